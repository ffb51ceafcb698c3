use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use ndarray::{concatenate, Array2, Axis};
use pulseforge::bounds::{inversion_lower_bound, rescaled_search, tau_min, BoundReport, JMatrix};
use pulseforge::designs::{self, DesignFile};
use pulseforge::graphcolor::{colored_decoupling_scheme, vertex_coloring, InteractionGraph};
use pulseforge::harmonic::{build_hc, fourier_inversion, phase_average, OscillatorNetwork};
use pulseforge::linalg;
use pulseforge::netham::PairHamiltonian;
use pulseforge::scheme::{
    decoupling_scheme, exponential_decoupling_scheme, inversion_scheme, verify_scheme, PulseScheme, VERIFY_TOL,
};
use pulseforge::signs::{oa_to_signs, signs_to_pulse_scheme, spread_signs, verify_signs};
use serde_json::json;

use crate::report::{inputs_digest, RunReport};
use crate::{BoundArgs, DecoupleArgs, DesignArgs, DesignKind, Format, InvertArgs, SignsArgs, VerifyArgs};

/// Largest Hilbert dimension verified on the whole network; larger schemes
/// are certified pair by pair, which is exact for pair interactions.
const FULL_VERIFY_DIM: usize = 1024;

pub struct Context {
    pub seed: u64,
    pub format: Format,
    pub args: Vec<String>,
    pub start: Instant,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Core(pulseforge::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<pulseforge::Error> for CliError {
    fn from(e: pulseforge::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Collects what a command produced and prints it. The artifact goes to
/// `--out` when given (report on stdout), otherwise to stdout (report on stderr).
struct Outcome {
    ok: bool,
    residuals: BTreeMap<String, f64>,
    details: serde_json::Value,
    artifact: Option<String>,
}

fn finish(ctx: &Context, inputs: &[&Path], out: Option<&Path>, outcome: Outcome) -> CliResult<ExitCode> {
    let mut outputs = BTreeMap::new();
    let mut artifact_on_stdout = None;
    if outcome.ok {
        if let Some(text) = outcome.artifact {
            match out {
                Some(path) => {
                    std::fs::write(path, &text).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
                    outputs.insert("artifact".to_string(), path.display().to_string());
                }
                None => {
                    outputs.insert("artifact".to_string(), "<stdout>".to_string());
                    artifact_on_stdout = Some(text);
                }
            }
        }
    }
    let digest = inputs_digest(&ctx.args, inputs).map_err(|e| CliError::Io(PathBuf::from("<inputs>"), e))?;
    let report = RunReport {
        command: ctx.args.clone(),
        inputs_digest: digest,
        seed: ctx.seed,
        ok: outcome.ok,
        outputs,
        residuals: outcome.residuals,
        details: outcome.details,
        wall_time_s: ctx.start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match artifact_on_stdout {
        Some(artifact) => {
            println!("{artifact}");
            eprintln!("{text}");
        }
        None => println!("{text}"),
    }
    Ok(if outcome.ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn matrix_artifact<V: ToString + Copy>(ctx: &Context, json: String, matrix: &Array2<V>) -> CliResult<String> {
    Ok(match ctx.format {
        Format::Json => json,
        Format::Csv => designs::matrix_to_csv(matrix)?,
    })
}

fn json_only(ctx: &Context, what: &str) -> CliResult<()> {
    match ctx.format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Usage(format!("{what} has no CSV form; use --format json"))),
    }
}

#[derive(Clone, Copy)]
enum Target {
    Zero,
    Invert,
}

fn masked_model(n: usize, d: usize, seed: u64, edges: Option<&[(usize, usize)]>) -> CliResult<PairHamiltonian<f64>> {
    let model = PairHamiltonian::<f64>::random(n, d, seed)?;
    let Some(edges) = edges else { return Ok(model) };
    let m = d * d - 1;
    let mut j = model.j_matrix().clone();
    for k in 0..n {
        for l in 0..n {
            if !edges.contains(&(k.min(l), k.max(l))) {
                j.slice_mut(ndarray::s![k * m..(k + 1) * m, l * m..(l + 1) * m]).fill(0.0);
            }
        }
    }
    Ok(PairHamiltonian::new(n, d, j, model.local_terms().to_vec())?)
}

fn check_one(model: &PairHamiltonian<f64>, scheme: &PulseScheme<f64>, target: Target) -> CliResult<f64> {
    let h = model.assemble()?;
    let goal = match target {
        Target::Zero => Array2::zeros(h.dim()),
        Target::Invert => h.mapv(|z| -z),
    };
    Ok(verify_scheme(model, scheme, &goal, scheme.target_overhead())?.residual)
}

/// Verifies against seeded random models; returns the worst residual and the mode used.
fn certify(
    scheme: &PulseScheme<f64>,
    d: usize,
    seed: u64,
    edges: Option<&[(usize, usize)]>,
    target: Target,
) -> CliResult<(f64, &'static str)> {
    let n = scheme.nodes();
    let full = d.checked_pow(n as u32).is_some_and(|t| t <= FULL_VERIFY_DIM);
    if full || n == 1 {
        let model = masked_model(n, d, seed, edges)?;
        return Ok((check_one(&model, scheme, target)?, "full"));
    }
    let pairs: Vec<(usize, usize)> = match edges {
        Some(e) => e.to_vec(),
        None => (0..n).flat_map(|k| ((k + 1)..n).map(move |l| (k, l))).collect(),
    };
    let mut worst = 0.0f64;
    for (k, l) in pairs {
        let sub = scheme.with_rows(&[k, l])?;
        let model = PairHamiltonian::random(2, d, seed.wrapping_add((k * n + l) as u64))?;
        worst = worst.max(check_one(&model, &sub, target)?);
    }
    Ok((worst, "pairwise"))
}

pub fn decouple(ctx: &Context, a: &DecoupleArgs) -> CliResult<ExitCode> {
    let mut inputs: Vec<&Path> = Vec::new();
    let (scheme, edges, colors) = match &a.graph {
        Some(path) => {
            inputs.push(path);
            let g = InteractionGraph::from_json(&read(path)?)?;
            if a.n.is_some_and(|n| n != g.vertices()) {
                return Err(CliError::Usage(format!("--n disagrees with the {}-vertex graph", g.vertices())));
            }
            let colors = vertex_coloring(&g).count;
            (colored_decoupling_scheme::<f64>(&g, a.d)?, Some(g.edges().to_vec()), Some(colors))
        }
        None => {
            let n = a.n.ok_or_else(|| CliError::Usage("--n is required without --graph".into()))?;
            let scheme = if a.exponential {
                exponential_decoupling_scheme::<f64>(n, a.d)?
            } else {
                decoupling_scheme::<f64>(n, a.d)?
            };
            (scheme, None, None)
        }
    };
    let (residual, mode) = certify(&scheme, a.d, ctx.seed, edges.as_deref(), Target::Zero)?;
    let artifact = matrix_artifact(ctx, scheme.to_json()?, scheme.pulses())?;
    finish(
        ctx,
        &inputs,
        a.out.as_deref(),
        Outcome {
            ok: residual <= VERIFY_TOL,
            residuals: BTreeMap::from([("decoupling".to_string(), residual)]),
            details: json!({
                "n": scheme.nodes(),
                "d": a.d,
                "N": scheme.intervals(),
                "colors": colors,
                "verification": mode,
            }),
            artifact: Some(artifact),
        },
    )
}

pub fn invert(ctx: &Context, a: &InvertArgs) -> CliResult<ExitCode> {
    if a.harmonic {
        json_only(ctx, "a phase scheme")?;
        let d = a.d.unwrap_or(3);
        let ps = fourier_inversion::<f64>(a.n)?;
        let net = OscillatorNetwork::<f64>::random(a.n, d, ctx.seed)?;
        // coupling-level check, always available
        let c_eff = ps.effective_coupling(net.coupling());
        let c_norm = net.coupling().iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
        let coupling_residual = c_eff
            .indexed_iter()
            .map(|((k, l), z)| (z * ps.overhead() + net.coupling()[[k, l]]).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / c_norm;
        let mut residuals = BTreeMap::from([("coupling".to_string(), coupling_residual)]);
        let full = d.checked_pow(a.n as u32).is_some_and(|t| t <= FULL_VERIFY_DIM);
        if full {
            let h = build_hc(&net)?;
            let avg = phase_average(&net, &ps)?.average;
            let r = linalg::frobenius(&(linalg::scale(&avg, ps.overhead()) + &h)) / linalg::frobenius(&h).max(1.0);
            residuals.insert("operator".to_string(), r);
        }
        let ok = residuals.values().all(|&r| r <= VERIFY_TOL);
        return finish(
            ctx,
            &[],
            a.out.as_deref(),
            Outcome {
                ok,
                residuals,
                details: json!({
                    "n": a.n,
                    "truncation": d,
                    "N": ps.intervals(),
                    "overhead": ps.overhead(),
                    "verification": if full { "full" } else { "coupling" },
                }),
                artifact: Some(ps.to_json()?),
            },
        );
    }
    let d = a.d.ok_or_else(|| CliError::Usage("--d is required for qudit networks".into()))?;
    let scheme = inversion_scheme::<f64>(a.n, d)?;
    let (residual, mode) = certify(&scheme, d, ctx.seed, None, Target::Invert)?;
    let artifact = matrix_artifact(ctx, scheme.to_json()?, scheme.pulses())?;
    finish(
        ctx,
        &[],
        a.out.as_deref(),
        Outcome {
            ok: residual <= VERIFY_TOL,
            residuals: BTreeMap::from([("inversion".to_string(), residual)]),
            details: json!({
                "n": a.n,
                "d": d,
                "N": scheme.intervals(),
                "overhead": scheme.target_overhead(),
                "verification": mode,
            }),
            artifact: Some(artifact),
        },
    )
}

pub fn bound(ctx: &Context, a: &BoundArgs) -> CliResult<ExitCode> {
    json_only(ctx, "a bound report")?;
    let mut inputs: Vec<&Path> = vec![&a.model];
    let model = PairHamiltonian::<f64>::from_json(&read(&a.model)?)?;
    let j = JMatrix::from_model(&model);
    let jt = match (&a.target, a.invert) {
        (_, true) => j.neg(),
        (Some(path), false) => {
            inputs.push(path);
            JMatrix::from_model(&PairHamiltonian::<f64>::from_json(&read(path)?)?)
        }
        (None, false) => j.clone(),
    };
    let tau = tau_min(&jt, &j)?;
    let inversion = if a.invert { Some(inversion_lower_bound(&j)?) } else { None };
    let search = a.rescale_search.map(|k| rescaled_search(&jt, &j, k, ctx.seed)).transpose()?;
    let report = BoundReport::new(tau, inversion, search.as_ref());
    let details = serde_json::to_value(&report).expect("report serializes");
    finish(
        ctx,
        &inputs,
        a.out.as_deref(),
        Outcome {
            ok: true,
            residuals: BTreeMap::new(),
            artifact: Some(serde_json::to_string_pretty(&report).expect("report serializes")),
            details,
        },
    )
}

pub fn verify(ctx: &Context, a: &VerifyArgs) -> CliResult<ExitCode> {
    let mut inputs: Vec<&Path> = vec![&a.model, &a.scheme];
    let model = PairHamiltonian::<f64>::from_json(&read(&a.model)?)?;
    let scheme = PulseScheme::<f64>::from_json(&read(&a.scheme)?)?;
    let h = model.assemble()?;
    let target_path = PathBuf::from(&a.target);
    let target = match a.target.as_str() {
        "zero" => Array2::zeros(h.dim()),
        "invert" => h.mapv(|z| -z),
        _ => {
            inputs.push(&target_path);
            PairHamiltonian::<f64>::from_json(&read(&target_path)?)?.assemble()?
        }
    };
    let overhead = a.overhead.unwrap_or(scheme.target_overhead());
    let report = verify_scheme(&model, &scheme, &target, overhead)?;
    finish(
        ctx,
        &inputs,
        None,
        Outcome {
            ok: report.ok,
            residuals: BTreeMap::from([("relative".to_string(), report.residual)]),
            details: json!({ "target": a.target, "overhead": overhead, "N": scheme.intervals() }),
            artifact: None,
        },
    )
}

pub fn signs(ctx: &Context, a: &SignsArgs) -> CliResult<ExitCode> {
    let mut inputs: Vec<&Path> = Vec::new();
    let st = match (&a.from_oa, a.m) {
        (Some(path), _) => {
            inputs.push(path);
            oa_to_signs(&DesignFile::from_json(&read(path)?)?.to_orthogonal_array()?)?
        }
        (None, Some(m)) => spread_signs(m)?,
        (None, None) => return Err(CliError::Usage("give --m or --from-oa".into())),
    };
    let checks = verify_signs(&st);
    let mut residuals = BTreeMap::new();
    let mut mode = None;
    if checks.ok {
        let scheme = signs_to_pulse_scheme::<f64>(&st)?;
        let (r, how) = certify(&scheme, 2, ctx.seed, None, Target::Zero)?;
        residuals.insert("decoupling".to_string(), r);
        mode = Some(how);
    }
    let ok = checks.ok && residuals.values().all(|&r| r <= VERIFY_TOL);
    let stacked = concatenate(Axis(0), &[st.sx.view(), st.sy.view(), st.sz.view()]).expect("equal shapes");
    let artifact = matrix_artifact(ctx, st.to_json()?, &stacked)?;
    finish(
        ctx,
        &inputs,
        a.out.as_deref(),
        Outcome {
            ok,
            residuals,
            details: json!({
                "n": st.qubits(),
                "N": st.intervals(),
                "violations": checks.violations.len(),
                "verification": mode,
            }),
            artifact: Some(artifact),
        },
    )
}

pub fn design(ctx: &Context, a: &DesignArgs) -> CliResult<ExitCode> {
    let (file, entries, report) = match a.kind {
        DesignKind::Oa => {
            let s = a.s.ok_or_else(|| CliError::Usage("--s is required for oa".into()))?;
            let oa = if a.n == 1 { designs::product_oa(1, s)? } else { designs::smallest_oa_for(a.n, s)? };
            (DesignFile::from(&oa), oa.entries().clone(), designs::verify_oa(&oa))
        }
        DesignKind::Ds => {
            let u = a.u.ok_or_else(|| CliError::Usage("--u is required for ds".into()))?;
            let ds = designs::cyclic_difference_scheme(u, a.n)?;
            (DesignFile::from(&ds), ds.entries().clone(), designs::verify_difference_scheme(&ds))
        }
    };
    let artifact = matrix_artifact(ctx, file.to_json()?, &entries)?;
    finish(
        ctx,
        &[],
        a.out.as_deref(),
        Outcome {
            ok: report.ok,
            residuals: BTreeMap::new(),
            details: json!({ "rows": entries.nrows(), "N": entries.ncols(), "violations": report.violations }),
            artifact: Some(artifact),
        },
    )
}
