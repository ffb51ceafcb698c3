use std::time::Instant;

use ndarray::Array2;
use pulseforge::bounds::{inversion_lower_bound, tau_min, JMatrix};
use pulseforge::designs::{
    cyclic_difference_scheme, product_oa, rao_hamming_oa, smallest_oa_for, verify_difference_scheme, verify_oa,
};
use pulseforge::graphcolor::weighted_chromatic_index;
use pulseforge::harmonic::{
    build_hc, clique_recoupling, ds_decoupling, fourier_inversion, harmonic_j_matrix, phase_average, OscillatorNetwork,
};
use pulseforge::linalg;
use pulseforge::netham::PairHamiltonian;
use pulseforge::scheme::{decoupling_scheme, exponential_decoupling_scheme, inversion_scheme, PulseScheme};
use pulseforge::signs::{oa_to_signs, signs_to_pulse_scheme, spread_signs, verify_signs, SignTriple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn decoupling_residual(scheme: &PulseScheme<f64>, model: &PairHamiltonian<f64>) -> f64 {
    let h = model.assemble().unwrap();
    let avg = scheme.average_operator(&h).unwrap();
    linalg::frobenius(&avg) / linalg::frobenius(&h)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &(n, d) in &[(2, 2), (3, 2), (5, 2), (4, 3), (3, 3)] {
        let scheme = decoupling_scheme::<f64>(n, d).map_err(|e| e.to_string())?;
        for seed in 0..10 {
            let model = PairHamiltonian::random(n, d, seed).unwrap();
            let r = decoupling_residual(&scheme, &model);
            worst = worst.max(r);
            check(r <= 1e-9, format!("(n, d) = ({n}, {d}), seed {seed}: residual {r:.3e}"))?;
        }
        if (n, d) == (4, 3) {
            check(scheme.intervals() == 81, format!("(4, 3) uses {} intervals", scheme.intervals()))?;
            let fallback = exponential_decoupling_scheme::<f64>(4, 3).unwrap();
            check(fallback.intervals() == 6561, format!("fallback uses {} intervals", fallback.intervals()))?;
            for seed in 0..10 {
                let r = decoupling_residual(&fallback, &PairHamiltonian::random(4, 3, seed).unwrap());
                worst = worst.max(r);
                check(r <= 1e-9, format!("fallback seed {seed}: residual {r:.3e}"))?;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, format!("took {secs:.1} s"))?;
    Ok(format!("max residual {worst:.2e}, (4,3) at 81 vs 6561 intervals, {secs:.1} s"))
}

fn criterion_2() -> Outcome {
    let five = decoupling_scheme::<f64>(5, 2).map_err(|e| e.to_string())?.intervals();
    let six = decoupling_scheme::<f64>(6, 2).map_err(|e| e.to_string())?.intervals();
    let law = |s: usize, n: usize| (s - 1) * n + 1;
    check(five == 16 && five == law(4, 5), format!("n = 5 gives N = {five}"))?;
    check(six == 64, format!("n = 6 gives N = {six}"))?;
    Ok("N = 16 for n = 5, N = 64 for n = 6".into())
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for &(n, d) in &[(2, 2), (4, 2), (3, 3)] {
        let scheme = inversion_scheme::<f64>(n, d).map_err(|e| e.to_string())?;
        let big_n = scheme.intervals() + 1;
        check(
            scheme.target_overhead() == (big_n - 1) as f64,
            format!("({n}, {d}): overhead {} with N = {big_n}", scheme.target_overhead()),
        )?;
        for seed in 0..10 {
            let h = PairHamiltonian::random(n, d, seed).unwrap().assemble().unwrap();
            let avg = scheme.average_operator(&h).unwrap();
            let r = linalg::frobenius(&(linalg::scale(&avg, (big_n - 1) as f64) + &h)) / linalg::frobenius(&h);
            worst = worst.max(r);
            check(r <= 1e-9, format!("({n}, {d}), seed {seed}: residual {r:.3e}"))?;
        }
    }
    Ok(format!("max residual {worst:.2e}, overhead N-1"))
}

fn criterion_4() -> Outcome {
    for n in 3..=6 {
        let j = JMatrix::from_model(&PairHamiltonian::<f64>::complete_diagonal(n, 2, 2, 1.0).unwrap());
        let tau = tau_min(&j.neg(), &j).unwrap().value().ok_or("zz network reported infeasible")?;
        check((tau - (n - 1) as f64).abs() <= 1e-9, format!("n = {n}: tau_min = {tau}"))?;

        let iso = PairHamiltonian::<f64>::complete(n, 2, &Array2::eye(3)).unwrap();
        let bound = inversion_lower_bound(&JMatrix::from_model(&iso)).unwrap();
        check((bound - (n - 1) as f64).abs() <= 1e-9, format!("n = {n}: isotropic bound {bound}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..50 {
        let n = rng.random_range(2..=5);
        let d = rng.random_range(2..=3);
        let j = JMatrix::from_model(&PairHamiltonian::<f64>::random(n, d, 1000 + trial).unwrap());
        let lower = inversion_lower_bound(&j).unwrap();
        let tau = tau_min(&j.neg(), &j).unwrap().value().ok_or(format!("trial {trial} infeasible"))?;
        check(lower <= tau + 1e-9, format!("trial {trial}: bound {lower} exceeds tau_min {tau}"))?;
    }
    Ok("tau_min = n-1 for n = 3..6, isotropic ratio n-1, bound below tau_min on 50 J".into())
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=5 {
        for d in 3..=4 {
            let ps = fourier_inversion::<f64>(n).map_err(|e| e.to_string())?;
            check(ps.overhead() == (n - 1) as f64, format!("n = {n}: overhead {}", ps.overhead()))?;
            let net = OscillatorNetwork::<f64>::complete(n, d).unwrap();
            let h = build_hc(&net).unwrap();
            let avg = phase_average(&net, &ps).map_err(|e| e.to_string())?.average;
            let r = linalg::frobenius(&(linalg::scale(&avg, (n - 1) as f64) + &h)) / linalg::frobenius(&h);
            worst = worst.max(r);
            check(r <= 1e-10, format!("(n, d) = ({n}, {d}): residual {r:.3e}"))?;

            let j = harmonic_j_matrix::<f64>(n, d).unwrap();
            let tau = tau_min(&j.neg(), &j).unwrap().value().ok_or("harmonic J infeasible")?;
            check((tau - (n - 1) as f64).abs() <= 1e-9, format!("(n, d) = ({n}, {d}): tau_min = {tau}"))?;
        }
    }
    Ok(format!("max residual {worst:.2e}, tau_min = n-1 throughout"))
}

fn criterion_6() -> Outcome {
    let ds = cyclic_difference_scheme(5, 5).unwrap();
    let net = OscillatorNetwork::<f64>::random(5, 3, 6).unwrap();
    let h = build_hc(&net).unwrap();
    let ps = ds_decoupling::<f64>(5, &ds).map_err(|e| e.to_string())?;
    let avg = phase_average(&net, &ps).map_err(|e| e.to_string())?.average;
    let r = linalg::frobenius(&avg) / linalg::frobenius(&h);
    check(r <= 1e-10, format!("D(5,5) residual {r:.3e}"))?;

    let partition = vec![vec![0, 1, 2], vec![3, 4]];
    let rc =
        clique_recoupling::<f64>(5, &partition, &cyclic_difference_scheme(2, 2).unwrap()).map_err(|e| e.to_string())?;
    let total: f64 = rc.times().iter().sum();
    check(
        (total - 1.0).abs() <= 1e-12 && rc.overhead() == 1.0,
        format!("times sum {total}, overhead {}", rc.overhead()),
    )?;
    let c_eff = phase_average(&net, &rc).map_err(|e| e.to_string())?.c_eff;
    let clique = |k: usize| if k < 3 { 0 } else { 1 };
    for k in 0..5 {
        for l in 0..5 {
            if k == l {
                continue;
            }
            let got = c_eff[[k, l]];
            if clique(k) == clique(l) {
                check(
                    (got.re - net.coupling()[[k, l]]).abs() <= 1e-12 && got.im.abs() <= 1e-12,
                    format!("intra ({k}, {l}) = {got}"),
                )?;
            } else {
                check(got.norm() <= 1e-10, format!("inter ({k}, {l}) = {got}"))?;
            }
        }
    }
    Ok(format!("D(5,5) residual {r:.2e}, two-clique recoupling exact"))
}

fn sign_checks(st: &SignTriple, n: usize, big_n: usize) -> Result<(), String> {
    check(st.qubits() == n && st.intervals() == big_n, format!("shape {}×{}", st.qubits(), st.intervals()))?;
    let report = verify_signs(st);
    check(report.ok, format!("{} violations", report.violations.len()))
}

fn criterion_7() -> Outcome {
    for m in 1..=3u32 {
        let st = spread_signs(m).map_err(|e| e.to_string())?;
        sign_checks(&st, (4usize.pow(m) - 1) / 3, 4usize.pow(m)).map_err(|e| format!("m = {m}: {e}"))?;
    }
    let scheme = signs_to_pulse_scheme::<f64>(&spread_signs(2).unwrap()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let r = decoupling_residual(&scheme, &PairHamiltonian::random(5, 2, seed).unwrap());
        worst = worst.max(r);
        check(r <= 1e-9, format!("seed {seed}: residual {r:.3e}"))?;
    }
    let st = oa_to_signs(&rao_hamming_oa(4, 2).unwrap()).map_err(|e| e.to_string())?;
    sign_checks(&st, 5, 16).map_err(|e| format!("from OA: {e}"))?;
    let r = decoupling_residual(&signs_to_pulse_scheme(&st).unwrap(), &PairHamiltonian::random(5, 2, 77).unwrap());
    check(r <= 1e-9, format!("OA-derived signs residual {r:.3e}"))?;
    Ok(format!("spreads m = 1..3 valid, 5-qubit residual {worst:.2e}"))
}

fn criterion_8() -> Outcome {
    let oas = [
        rao_hamming_oa(2, 3).unwrap(),
        rao_hamming_oa(3, 2).unwrap(),
        rao_hamming_oa(4, 2).unwrap(),
        rao_hamming_oa(9, 2).unwrap(),
        product_oa(3, 4).unwrap(),
        product_oa(2, 6).unwrap(),
        smallest_oa_for(7, 4).unwrap(),
    ];
    let dss = [
        cyclic_difference_scheme(2, 2).unwrap(),
        cyclic_difference_scheme(5, 5).unwrap(),
        cyclic_difference_scheme(7, 4).unwrap(),
        cyclic_difference_scheme(11, 11).unwrap(),
    ];
    for (i, oa) in oas.iter().enumerate() {
        check(verify_oa(oa).ok, format!("OA construction {i} rejected"))?;
    }
    for (i, ds) in dss.iter().enumerate() {
        check(verify_difference_scheme(ds).ok, format!("difference scheme {i} rejected"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..100 {
        let mut oa = oas[trial % oas.len()].clone();
        let (r, c) = (rng.random_range(0..oa.rows()), rng.random_range(0..oa.columns()));
        let s = oa.levels();
        let old = oa.entry(r, c);
        oa.set_entry(r, c, (old - 1 + rng.random_range(1..s)) % s + 1);
        let report = verify_oa(&oa);
        check(!report.ok && !report.violations.is_empty(), format!("OA mutation {trial} at ({r}, {c}) undetected"))?;

        let mut ds = dss[trial % dss.len()].clone();
        let (r, c) = (rng.random_range(0..ds.rows()), rng.random_range(0..ds.columns()));
        let u = ds.modulus();
        let old = ds.entry(r, c);
        ds.set_entry(r, c, (old + rng.random_range(1..u)) % u);
        let report = verify_difference_scheme(&ds);
        check(!report.ok && !report.violations.is_empty(), format!("DS mutation {trial} at ({r}, {c}) undetected"))?;
    }
    let ones = Array2::from_shape_fn((4, 4), |(k, l)| if k == l { 0.0 } else { 1.0 });
    let w = weighted_chromatic_index::<f64>(&ones).unwrap().value;
    check(w == 3.0, format!("W_T on K4 = {w}"))?;
    Ok("all constructions verify, 200 mutations located, W_T(K4) = 3".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("decoupling at scale", criterion_1),
        ("scheme-size law", criterion_2),
        ("inversion", criterion_3),
        ("majorization bounds", criterion_4),
        ("harmonic optimal inversion", criterion_5),
        ("difference-scheme decoupling", criterion_6),
        ("sign matrices", criterion_7),
        ("design property suites", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("[PASS] criterion {}: {name}: {msg} ({secs:.2} s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {msg} ({secs:.2} s)", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
