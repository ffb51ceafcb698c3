//! Bilinearly coupled harmonic oscillators under phase-shift control.
//!
//! `H_C = Σ_{k≠l} c_kl a_k a_l†` on the Fock space truncated to `d` levels per
//! oscillator. Letting oscillator `k` evolve freely for a phase `t` maps
//! `a_k ↦ e^{-it} a_k`, so with phase rows `m_k(j) = e^{i t_k(j)}` and weights
//! `τ_j` the term `a_k a_l†` acquires the factor `Σ_j τ_j m_l(j) conj(m_k(j))`.

use ndarray::Array2;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::JMatrix;
use crate::designs::{self, DifferenceScheme};
use crate::error::{Error, Result};
use crate::gf;
use crate::graphcolor::{self, InteractionGraph};
use crate::linalg::{self, CMatrix};
use crate::netham::{SuBasis, MAX_HILBERT_DIM};
use crate::scalar::{cis, cplx, creal, Scalar, C};

/// Tolerance between the algebraic and numeric averages.
pub const PATH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorNetwork<T: Scalar> {
    d: usize,
    c: Array2<T>,
}

impl<T: Scalar> OscillatorNetwork<T> {
    pub fn new(d: usize, c: Array2<T>) -> Result<Self> {
        let n = c.nrows();
        if d < 2 || n == 0 || c.ncols() != n {
            return Err(Error::InvalidModel("need d >= 2 and a square non-empty C".into()));
        }
        for k in 0..n {
            if c[[k, k]] != T::zero() {
                return Err(Error::InvalidModel(format!("C has nonzero diagonal entry {k}")));
            }
            for l in (k + 1)..n {
                if c[[k, l]] != c[[l, k]] {
                    return Err(Error::InvalidModel(format!("C is not symmetric at ({k}, {l})")));
                }
            }
        }
        Ok(Self { d, c })
    }

    /// Seeded symmetric `C` with off-diagonal entries uniform in `[-1, 1]`.
    pub fn random(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Array2::zeros((n, n));
        for k in 0..n {
            for l in (k + 1)..n {
                let v = T::lit(rng.random_range(-1.0..=1.0));
                c[[k, l]] = v;
                c[[l, k]] = v;
            }
        }
        Self::new(d, c)
    }

    /// `c_kl = 1` for all `k ≠ l`.
    pub fn complete(n: usize, d: usize) -> Result<Self> {
        Self::new(d, Array2::from_shape_fn((n, n), |(k, l)| if k == l { T::zero() } else { T::one() }))
    }

    pub fn nodes(&self) -> usize {
        self.c.nrows()
    }

    pub fn truncation(&self) -> usize {
        self.d
    }

    pub fn coupling(&self) -> &Array2<T> {
        &self.c
    }

    fn dims(&self) -> Result<Vec<usize>> {
        let n = self.nodes();
        self.d
            .checked_pow(n as u32)
            .filter(|&t| t <= MAX_HILBERT_DIM)
            .ok_or_else(|| Error::Overflow(format!("{}^{n} exceeds {MAX_HILBERT_DIM}", self.d)))?;
        Ok(vec![self.d; n])
    }
}

/// Truncated annihilation operator: `a|E> = √E |E-1>`.
pub fn ladder<T: Scalar>(d: usize) -> CMatrix<T> {
    Array2::from_shape_fn((d, d), |(r, c)| if c == r + 1 { creal(T::from_usize_lossy(c).sqrt()) } else { C::zero() })
}

/// `Σ_{k≠l} coeff_kl a_k a_l†` for a complex coefficient matrix.
fn coupling_operator<T: Scalar>(coeff: &Array2<C<T>>, dims: &[usize]) -> CMatrix<T> {
    let d = dims[0];
    let total: usize = dims.iter().product();
    let a = ladder::<T>(d);
    let ad = linalg::dagger(&a);
    let a_ad = linalg::kron(&a, &ad);
    let ad_a = linalg::kron(&ad, &a);
    let mut h = Array2::zeros((total, total));
    let n = dims.len();
    for k in 0..n {
        for l in (k + 1)..n {
            let (ckl, clk) = (coeff[[k, l]], coeff[[l, k]]);
            if ckl == C::zero() && clk == C::zero() {
                continue;
            }
            // a_k a_l† is a ⊗ a† on (k, l); a_l a_k† is a† ⊗ a
            let op = a_ad.mapv(|z| z * ckl) + ad_a.mapv(|z| z * clk);
            linalg::add_pair(&mut h, &op, k, l, dims);
        }
    }
    h
}

pub fn build_hc<T: Scalar>(net: &OscillatorNetwork<T>) -> Result<CMatrix<T>> {
    let dims = net.dims()?;
    Ok(coupling_operator(&net.c.mapv(creal), &dims))
}

/// `n × N` unit-modulus phases with positive weights summing to one, plus
/// the overhead factor applied to the average.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScheme<T: Scalar> {
    phases: Array2<C<T>>,
    times: Vec<T>,
    overhead: T,
}

impl<T: Scalar> PhaseScheme<T> {
    pub fn new(phases: Array2<C<T>>, times: Vec<T>, overhead: T) -> Result<Self> {
        let (n, cols) = phases.dim();
        if n == 0 || cols == 0 || times.len() != cols {
            return Err(Error::InvalidScheme(format!("{n}×{cols} phases with {} times", times.len())));
        }
        let tol = T::tol(1e-12);
        if let Some(((k, j), _)) = phases.indexed_iter().find(|(_, z)| (z.norm() - T::one()).abs() > tol) {
            return Err(Error::InvalidScheme(format!("phase at ({k}, {j}) is not of modulus one")));
        }
        if times.iter().any(|&t| t.is_nan() || t <= T::zero()) {
            return Err(Error::InvalidScheme("times must be positive".into()));
        }
        let total: T = times.iter().copied().sum();
        if (total - T::one()).abs() > tol * T::from_usize_lossy(cols) {
            return Err(Error::InvalidScheme(format!("times sum to {total}, not 1")));
        }
        if overhead.is_nan() || overhead <= T::zero() {
            return Err(Error::InvalidScheme("overhead must be positive".into()));
        }
        Ok(Self { phases, times, overhead })
    }

    pub fn uniform(phases: Array2<C<T>>, overhead: T) -> Result<Self> {
        let cols = phases.ncols();
        Self::new(phases, vec![T::one() / T::from_usize_lossy(cols); cols], overhead)
    }

    pub fn nodes(&self) -> usize {
        self.phases.nrows()
    }

    pub fn intervals(&self) -> usize {
        self.phases.ncols()
    }

    pub fn phases(&self) -> &Array2<C<T>> {
        &self.phases
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn overhead(&self) -> T {
        self.overhead
    }

    /// `G_kl = N Σ_j τ_j m_k(j) conj(m_l(j))`: the plain Gram matrix of the
    /// rows for uniform times.
    pub fn gram(&self) -> Array2<C<T>> {
        let n = self.nodes();
        let w = T::from_usize_lossy(self.intervals());
        Array2::from_shape_fn((n, n), |(k, l)| {
            self.times
                .iter()
                .enumerate()
                .fold(C::zero(), |acc, (j, &t)| acc + self.phases[[k, j]] * self.phases[[l, j]].conj() * t)
                * w
        })
    }

    /// `c_kl Σ_j τ_j m_l(j) conj(m_k(j))`.
    pub fn effective_coupling(&self, c: &Array2<T>) -> Array2<C<T>> {
        let n = self.nodes();
        let w = T::one() / T::from_usize_lossy(self.intervals());
        let g = self.gram();
        Array2::from_shape_fn((n, n), |(k, l)| g[[l, k]] * w * c[[k, l]])
    }
}

#[derive(Debug, Clone)]
pub struct PhaseAverage<T: Scalar> {
    /// `Σ_j τ_j V_j H_C V_j†` computed on the truncated space.
    pub average: CMatrix<T>,
    /// Effective coupling coefficients (not yet multiplied by the overhead).
    pub c_eff: Array2<C<T>>,
    /// Relative Frobenius gap between the two evaluation paths.
    pub deviation: T,
}

/// Averages `H_C` both algebraically (through the Gram factors) and by
/// explicit conjugation with `exp(i h t)`; errors when they disagree.
pub fn phase_average<T: Scalar>(net: &OscillatorNetwork<T>, ps: &PhaseScheme<T>) -> Result<PhaseAverage<T>> {
    if ps.nodes() != net.nodes() {
        return Err(Error::DimensionMismatch(format!("{} phase rows for {} oscillators", ps.nodes(), net.nodes())));
    }
    let dims = net.dims()?;
    let h = coupling_operator(&net.c.mapv(creal), &dims);
    let c_eff = ps.effective_coupling(&net.c);
    let algebraic = coupling_operator(&c_eff, &dims);

    let total = h.nrows();
    let st = linalg::strides(&dims);
    let zero = || Array2::<C<T>>::zeros((total, total));
    let numeric = (0..ps.intervals())
        .into_par_iter()
        .fold(zero, |mut acc, j| {
            // V = ⊗_k diag(m_k^0, m_k^1, ..): v_x = Π_k m_k(j)^{x_k}
            let v: Vec<C<T>> = (0..total)
                .map(|x| {
                    (0..dims.len())
                        .fold(C::one(), |p, k| p * ps.phases[[k, j]].powu(linalg::digit(x, k, &dims, &st) as u32))
                })
                .collect();
            let t = ps.times[j];
            for ((r, c), z) in h.indexed_iter() {
                if *z != C::zero() {
                    acc[[r, c]] = acc[[r, c]] + v[r] * *z * v[c].conj() * t;
                }
            }
            acc
        })
        .reduce(zero, |a, b| a + b);

    let deviation = linalg::distance(&algebraic, &numeric) / linalg::frobenius(&numeric).max(T::one());
    if deviation > T::tol(PATH_TOL) {
        return Err(Error::PathMismatch(deviation.as_f64()));
    }
    Ok(PhaseAverage { average: numeric, c_eff, deviation })
}

fn root_of_unity<T: Scalar>(r: u64, u: u64) -> C<T> {
    cis(T::TAU() * T::lit((r % u) as f64) / T::lit(u as f64))
}

/// First `n` rows of a difference scheme, entry `r ↦ e^{2πi r/u}`.
pub fn ds_decoupling<T: Scalar>(n: usize, ds: &DifferenceScheme) -> Result<PhaseScheme<T>> {
    if ds.rows() < n {
        return Err(Error::InvalidParameter(format!("difference scheme has {} rows, need {n}", ds.rows())));
    }
    let u = ds.modulus() as u64;
    let phases = Array2::from_shape_fn((n, ds.columns()), |(k, j)| root_of_unity(ds.entry(k, j) as u64, u));
    PhaseScheme::uniform(phases, T::one())
}

/// Fourier rows `e^{2πi kj/n}` for any `n`. For large `n` the individual
/// phase steps `2π/n` become very close to the identity.
pub fn fourier_decoupling<T: Scalar>(n: usize) -> Result<PhaseScheme<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let phases = Array2::from_shape_fn((n, n), |(k, j)| root_of_unity((k * j) as u64, n as u64));
    PhaseScheme::uniform(phases, T::one())
}

fn check_partition(n: usize, partition: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut owner = vec![usize::MAX; n];
    for (c, clique) in partition.iter().enumerate() {
        if clique.is_empty() {
            return Err(Error::InvalidPartition(format!("clique {c} is empty")));
        }
        for &k in clique {
            if k >= n {
                return Err(Error::InvalidPartition(format!("node {k} out of range")));
            }
            if owner[k] != usize::MAX {
                return Err(Error::InvalidPartition(format!("node {k} appears twice")));
            }
            owner[k] = c;
        }
    }
    if let Some(k) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::InvalidPartition(format!("node {k} is not covered")));
    }
    Ok(owner)
}

/// One difference-scheme row per clique: couplings inside a clique are kept,
/// couplings between cliques average out, with no time overhead.
pub fn clique_recoupling<T: Scalar>(
    n: usize,
    partition: &[Vec<usize>],
    ds: &DifferenceScheme,
) -> Result<PhaseScheme<T>> {
    signed_clique_step(n, partition, &[], ds)
}

/// Like [`clique_recoupling`], with the rows of the nodes in `negated` multiplied by -1.
fn signed_clique_step<T: Scalar>(
    n: usize,
    partition: &[Vec<usize>],
    negated: &[usize],
    ds: &DifferenceScheme,
) -> Result<PhaseScheme<T>> {
    let owner = check_partition(n, partition)?;
    if ds.rows() < partition.len() {
        return Err(Error::InvalidParameter(format!(
            "difference scheme has {} rows for {} cliques",
            ds.rows(),
            partition.len()
        )));
    }
    let u = ds.modulus() as u64;
    let phases = Array2::from_shape_fn((n, ds.columns()), |(k, j)| {
        let z = root_of_unity::<T>(ds.entry(owner[k], j) as u64, u);
        if negated.contains(&k) {
            -z
        } else {
            z
        }
    });
    PhaseScheme::uniform(phases, T::one())
}

/// Smallest cyclic difference scheme with `rows` rows.
fn difference_scheme_for(rows: usize) -> Result<DifferenceScheme> {
    let mut u = rows.max(2) as u64;
    while !gf::is_prime(u) {
        u += 1;
    }
    designs::cyclic_difference_scheme(u as u32, rows)
}

/// Time-optimal inversion: `m_k(j) = e^{2πi jk/n}` for `j = 1..n-1`,
/// `k = 1..n`, with overhead `n - 1`.
pub fn fourier_inversion<T: Scalar>(n: usize) -> Result<PhaseScheme<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("inversion needs n >= 2, got {n}")));
    }
    let phases = Array2::from_shape_fn((n, n - 1), |(k, j)| root_of_unity(((j + 1) * (k + 1)) as u64, n as u64));
    PhaseScheme::uniform(phases, T::from_usize_lossy(n - 1))
}

/// Runs the steps one after another, step `i` for a fraction `weights[i]` of
/// the total time, and reports the given overhead.
pub fn concatenate<T: Scalar>(steps: &[PhaseScheme<T>], weights: &[T], overhead: T) -> Result<PhaseScheme<T>> {
    if steps.is_empty() || steps.len() != weights.len() {
        return Err(Error::InvalidScheme("need one weight per step".into()));
    }
    let n = steps[0].nodes();
    if steps.iter().any(|s| s.nodes() != n) {
        return Err(Error::InvalidScheme("steps act on different node counts".into()));
    }
    let wsum: T = weights.iter().copied().sum();
    let cols: usize = steps.iter().map(|s| s.intervals()).sum();
    let mut phases = Array2::zeros((n, cols));
    let mut times = Vec::with_capacity(cols);
    let mut at = 0;
    for (s, &w) in steps.iter().zip(weights) {
        for j in 0..s.intervals() {
            phases.column_mut(at).assign(&s.phases.column(j));
            times.push(s.times[j] * w / wsum);
            at += 1;
        }
    }
    PhaseScheme::new(phases, times, overhead)
}

/// `J = M ⊗ A` in the ladder-ordered su(d) basis ([`SuBasis::harmonic`]):
/// `M` has ones off the diagonal and `A = |φ><φ| + |ψ><ψ|` with
/// `φ = (√1, .., √(d-1), 0, ..)` on the `X_r` slots and `ψ` the same on the
/// `Y_r` slots. The complete network `c_kl = 1` has J-matrix `J / 4`.
pub fn harmonic_j_matrix<T: Scalar>(n: usize, d: usize) -> Result<JMatrix<T>> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 and d >= 2, got n = {n}, d = {d}")));
    }
    let m = d * d - 1;
    let mut phi = vec![T::zero(); m];
    let mut psi = vec![T::zero(); m];
    for r in 1..d {
        phi[r - 1] = T::from_usize_lossy(r).sqrt();
        psi[d - 1 + r - 1] = phi[r - 1];
    }
    let a = Array2::from_shape_fn((m, m), |(x, y)| phi[x] * phi[y] + psi[x] * psi[y]);
    let j = Array2::from_shape_fn((n * m, n * m), |(x, y)| if x / m == y / m { T::zero() } else { a[[x % m, y % m]] });
    JMatrix::new(j, m)
}

/// Ladder-ordered su(d) basis matching [`harmonic_j_matrix`].
pub fn harmonic_basis<T: Scalar>(d: usize) -> Result<SuBasis<T>> {
    SuBasis::harmonic(d)
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthesisStep {
    pub color: usize,
    /// Couplings kept in this step.
    pub edges: Vec<(usize, usize)>,
    pub cliques: Vec<Vec<usize>>,
    /// Nodes whose phase row is negated (sign flip of `T_kl = -1` edges).
    pub negated: Vec<usize>,
}

/// Bounds and, for 0/±1 targets, an explicit schedule for reshaping `C`
/// into `T ∘ C`.
#[derive(Debug, Clone, Serialize)]
pub struct GramReport<T: Scalar> {
    /// `max(0, -λ_min(T))`.
    pub lower: f64,
    /// `W_T`, when every entry is 0 or ±1.
    pub upper: Option<f64>,
    /// Whether the edge colorings behind `upper` are optimal.
    pub exact: bool,
    pub steps: Vec<SynthesisStep>,
    pub note: String,
    #[serde(skip)]
    pub scheme: Option<PhaseScheme<T>>,
}

pub fn gram_synthesis_report<T: Scalar>(target: &Array2<T>) -> Result<GramReport<T>> {
    let n = target.nrows();
    if n == 0 || target.ncols() != n {
        return Err(Error::InvalidTarget("T must be square and non-empty".into()));
    }
    let tol = T::tol(1e-12);
    for k in 0..n {
        for l in 0..n {
            if (target[[k, l]] - target[[l, k]]).abs() > tol {
                return Err(Error::InvalidTarget(format!("T is not symmetric at ({k}, {l})")));
            }
            if k != l && target[[k, l]].abs() > T::one() + tol {
                return Err(Error::InvalidTarget(format!("|T_{k}{l}| exceeds 1")));
            }
        }
    }
    let off = Array2::from_shape_fn((n, n), |(k, l)| if k == l { T::zero() } else { target[[k, l]] });
    let spec = linalg::eigvals_sym(&off);
    let lower = (-*spec.last().expect("non-empty")).max(T::zero()).as_f64();

    let unit = off.iter().all(|&x| x.abs() <= tol || (x.abs() - T::one()).abs() <= tol);
    if !unit {
        return Ok(GramReport {
            lower,
            upper: None,
            exact: false,
            steps: Vec::new(),
            scheme: None,
            note: "entries outside {0, ±1}: only the eigenvalue lower bound is available".into(),
        });
    }

    let graph = InteractionGraph::from_support(&off.mapv(|x| x.as_f64()), 0.5)?;
    let coloring = graphcolor::edge_coloring(&graph);
    let colors = coloring.count;
    let mut steps = Vec::new();
    let mut schemes = Vec::new();
    for color in 0..colors.max(1) {
        let edges: Vec<(usize, usize)> =
            graph.edges().iter().zip(&coloring.colors).filter(|(_, &c)| c == color).map(|(&e, _)| e).collect();
        let mut cliques: Vec<Vec<usize>> = edges.iter().map(|&(k, l)| vec![k, l]).collect();
        cliques.extend((0..n).filter(|k| !edges.iter().any(|&(a, b)| a == *k || b == *k)).map(|k| vec![k]));
        cliques.sort();
        let negated: Vec<usize> = edges.iter().filter(|&&(k, l)| off[[k, l]] < T::zero()).map(|&(_, l)| l).collect();
        let ds = difference_scheme_for(cliques.len())?;
        schemes.push(signed_clique_step::<T>(n, &cliques, &negated, &ds)?);
        steps.push(SynthesisStep { color, edges, cliques, negated });
    }
    let overhead = T::from_usize_lossy(colors.max(1));
    let weights = vec![T::one(); schemes.len()];
    let scheme = concatenate(&schemes, &weights, overhead)?;
    Ok(GramReport {
        lower,
        upper: Some(colors as f64),
        exact: coloring.exact,
        steps,
        scheme: Some(scheme),
        note: if colors == 0 {
            "T = 0: the schedule is plain decoupling".into()
        } else {
            "one clique-recoupling step per edge color".into()
        },
    })
}

/// Phase scheme JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseFile {
    pub n: usize,
    #[serde(rename = "N")]
    pub intervals: usize,
    pub phases: Vec<Vec<ComplexEntry>>,
    pub times: Vec<f64>,
    #[serde(default = "one")]
    pub overhead: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEntry {
    pub re: f64,
    pub im: f64,
}

impl<T: Scalar> PhaseScheme<T> {
    pub fn to_file(&self) -> PhaseFile {
        PhaseFile {
            n: self.nodes(),
            intervals: self.intervals(),
            phases: self
                .phases
                .rows()
                .into_iter()
                .map(|r| r.iter().map(|z| ComplexEntry { re: z.re.as_f64(), im: z.im.as_f64() }).collect())
                .collect(),
            times: self.times.iter().map(|t| t.as_f64()).collect(),
            overhead: self.overhead.as_f64(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: PhaseFile = serde_json::from_str(text)?;
        if f.phases.len() != f.n || f.phases.iter().any(|r| r.len() != f.intervals) {
            return Err(Error::InvalidScheme(format!("phases must be {}×{}", f.n, f.intervals)));
        }
        let phases = Array2::from_shape_fn((f.n, f.intervals), |(k, j)| {
            let e = f.phases[k][j];
            cplx(T::lit(e.re), T::lit(e.im))
        });
        Self::new(phases, f.times.into_iter().map(T::lit).collect(), T::lit(f.overhead))
    }
}
