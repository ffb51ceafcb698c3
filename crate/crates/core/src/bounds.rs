//! Spectral lower bounds on the time overhead of simulating one pair
//! Hamiltonian by another.
//!
//! Simulating `J̃` with `J` for time overhead `τ` requires
//! `Spec(J̃) ≺ Spec(τ J)`, and the same for every blockwise Schur rescaling
//! `J_kl ↦ s_kl J_kl` with a symmetric `S`. These are necessary conditions
//! only: the bounds returned here are never claimed to be achievable.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, eigvals_sym, CMatrix};
use crate::netham::PairHamiltonian;
use crate::scalar::Scalar;

/// Seed of the built-in randomized `S` search.
pub const RESCALE_SEED: u64 = 0xC0FFEE;

/// Symmetric `(mn)×(mn)` matrix with zero `m×m` diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct JMatrix<T: Scalar> {
    m: usize,
    j: Array2<T>,
}

impl<T: Scalar> JMatrix<T> {
    pub fn new(j: Array2<T>, m: usize) -> Result<Self> {
        let size = j.nrows();
        if m == 0 || j.ncols() != size || !size.is_multiple_of(m) || size == 0 {
            return Err(Error::InvalidModel(format!("J of shape {:?} is not made of {m}×{m} blocks", j.dim())));
        }
        let scale = j.iter().fold(T::one(), |acc, x| acc.max(x.abs()));
        let tol = T::tol(1e-12) * scale;
        for a in 0..size {
            for b in a..size {
                if (j[[a, b]] - j[[b, a]]).abs() > tol {
                    return Err(Error::InvalidModel(format!("J is not symmetric at ({a}, {b})")));
                }
                if a / m == b / m && j[[a, b]].abs() > tol {
                    return Err(Error::InvalidModel(format!("diagonal block {} is nonzero", a / m)));
                }
            }
        }
        Ok(Self { m, j })
    }

    pub fn from_model(model: &PairHamiltonian<T>) -> Self {
        Self { m: model.basis_len(), j: model.j_matrix().clone() }
    }

    pub fn nodes(&self) -> usize {
        self.j.nrows() / self.m
    }

    pub fn block_size(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &Array2<T> {
        &self.j
    }

    pub fn neg(&self) -> Self {
        Self { m: self.m, j: self.j.mapv(|x| -x) }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { m: self.m, j: self.j.mapv(|x| x * s) }
    }

    /// Descending spectrum.
    pub fn spectrum(&self) -> Vec<T> {
        eigvals_sym(&self.j)
    }

    /// `J_kl ↦ s_kl J_kl`.
    pub fn schur_rescaled(&self, s: &Array2<T>) -> Result<Self> {
        let n = self.nodes();
        if s.dim() != (n, n) {
            return Err(Error::DimensionMismatch(format!("S must be {n}×{n}")));
        }
        for k in 0..n {
            for l in k..n {
                if s[[k, l]] != s[[l, k]] {
                    return Err(Error::InvalidParameter("S must be symmetric".into()));
                }
            }
        }
        let m = self.m;
        let j = Array2::from_shape_fn(self.j.dim(), |(a, b)| self.j[[a, b]] * s[[a / m, b / m]]);
        Ok(Self { m, j })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.m != other.m || self.j.dim() != other.j.dim() {
            return Err(Error::DimensionMismatch("J-matrices have different shapes".into()));
        }
        Ok(())
    }
}

/// `x ≺ y`: descending partial sums of `x` bounded by those of `y`, equal totals.
pub fn majorizes<T: Scalar>(x: &[T], y: &[T], tol: T) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    linalg::sort_descending(&mut xs);
    linalg::sort_descending(&mut ys);
    let (mut sx, mut sy) = (T::zero(), T::zero());
    for (a, b) in xs.iter().zip(&ys) {
        sx = sx + *a;
        sy = sy + *b;
        if sx > sy + tol {
            return Ok(false);
        }
    }
    Ok((sx - sy).abs() <= tol)
}

/// Smallest `τ` with `Spec(J̃) ≺ Spec(τJ)`, or `Infeasible` when none exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauMin<T> {
    Bound(T),
    Infeasible,
}

impl<T: Scalar> TauMin<T> {
    pub fn value(self) -> Option<T> {
        match self {
            TauMin::Bound(t) => Some(t),
            TauMin::Infeasible => None,
        }
    }

    /// Larger bound; `Infeasible` dominates.
    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (TauMin::Bound(a), TauMin::Bound(b)) => TauMin::Bound(a.max(b)),
            _ => TauMin::Infeasible,
        }
    }
}

/// `τ = max_k X_k / Y_k` over the descending partial sums `X_k` of `Spec(J̃)`
/// and `Y_k` of `Spec(J)`, `k = 1..D-1`. Both spectra sum to zero, so every
/// `Y_k ≥ 0`; a vanishing `Y_k` with positive `X_k` is infeasible and a
/// vanishing pair is skipped.
pub fn tau_min<T: Scalar>(jtilde: &JMatrix<T>, j: &JMatrix<T>) -> Result<TauMin<T>> {
    jtilde.check_compatible(j)?;
    Ok(tau_from_spectra(&jtilde.spectrum(), &j.spectrum()))
}

pub(crate) fn tau_from_spectra<T: Scalar>(x: &[T], y: &[T]) -> TauMin<T> {
    let scale = x.iter().chain(y).fold(T::one(), |acc, v| acc.max(v.abs()));
    let tol = T::tol(1e-9) * scale;
    let (mut sx, mut sy) = (T::zero(), T::zero());
    let mut tau = T::zero();
    for k in 0..x.len().saturating_sub(1) {
        sx = sx + x[k];
        sy = sy + y[k];
        if sy <= tol {
            if sx > tol {
                return TauMin::Infeasible;
            }
            continue;
        }
        tau = tau.max(sx / sy);
    }
    TauMin::Bound(tau)
}

pub fn tau_min_rescaled<T: Scalar>(jtilde: &JMatrix<T>, j: &JMatrix<T>, s: &Array2<T>) -> Result<TauMin<T>> {
    tau_min(&jtilde.schur_rescaled(s)?, &j.schur_rescaled(s)?)
}

#[derive(Debug, Clone)]
pub struct RescaledSearch<T: Scalar> {
    /// Bound without rescaling (all-ones `S`).
    pub plain: TauMin<T>,
    /// Maximum over the all-ones `S` and the random trials.
    pub best: TauMin<T>,
    pub argmax: Array2<T>,
}

fn random_sign_matrix<T: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Array2<T> {
    let mut s = Array2::from_elem((n, n), T::one());
    for k in 0..n {
        for l in (k + 1)..n {
            let v = if rng.random_bool(0.5) { T::one() } else { -T::one() };
            s[[k, l]] = v;
            s[[l, k]] = v;
        }
    }
    s
}

/// Maximizes the rescaled bound over the all-ones `S` and `trials` random
/// symmetric ±1 matrices drawn from `seed`.
pub fn rescaled_search<T: Scalar>(
    jtilde: &JMatrix<T>,
    j: &JMatrix<T>,
    trials: usize,
    seed: u64,
) -> Result<RescaledSearch<T>> {
    jtilde.check_compatible(j)?;
    let n = j.nodes();
    let ones = Array2::from_elem((n, n), T::one());
    let plain = tau_min(jtilde, j)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<Array2<T>> = (0..trials).map(|_| random_sign_matrix(n, &mut rng)).collect();
    let results = candidates.par_iter().map(|s| tau_min_rescaled(jtilde, j, s)).collect::<Result<Vec<_>>>()?;
    let mut best = plain;
    let mut argmax = ones;
    for (s, r) in candidates.into_iter().zip(results) {
        let better = match (best, r) {
            (TauMin::Infeasible, _) => false,
            (TauMin::Bound(_), TauMin::Infeasible) => true,
            (TauMin::Bound(a), TauMin::Bound(b)) => b > a,
        };
        if better {
            best = r;
            argmax = s;
        }
    }
    Ok(RescaledSearch { plain, best, argmax })
}

/// `r / (-q)` with `r` the largest and `q` the smallest eigenvalue of `J`.
pub fn inversion_lower_bound<T: Scalar>(j: &JMatrix<T>) -> Result<T> {
    if j.matrix().iter().all(|x| *x == T::zero()) {
        return Err(Error::ZeroMatrix);
    }
    let spec = j.spectrum();
    let r = spec[0];
    let q = *spec.last().expect("non-empty");
    Ok(r / -q)
}

/// Secondary check on full Hamiltonian spectra: `Spec(H̃) ≺ τ Spec(H)`.
pub fn hamiltonian_majorization<T: Scalar>(htilde: &CMatrix<T>, h: &CMatrix<T>, tau: T) -> Result<bool> {
    let x = linalg::eigvals_hermitian(htilde);
    let y: Vec<T> = linalg::eigvals_hermitian(h).into_iter().map(|v| v * tau).collect();
    let scale = x.iter().chain(&y).fold(T::one(), |acc, v| acc.max(v.abs()));
    majorizes(&x, &y, T::tol(1e-9) * scale * T::from_usize_lossy(x.len()))
}

/// Report of the `bound` command; every figure is a lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub tau_min: Option<f64>,
    pub infeasible: bool,
    pub inversion_bound: Option<f64>,
    pub rescaled_max: Option<f64>,
    #[serde(rename = "S_argmax")]
    pub s_argmax: Option<Vec<Vec<f64>>>,
    pub lower_bound: bool,
}

impl BoundReport {
    pub fn new<T: Scalar>(tau: TauMin<T>, inversion: Option<T>, search: Option<&RescaledSearch<T>>) -> Self {
        Self {
            tau_min: tau.value().map(T::as_f64),
            infeasible: tau == TauMin::Infeasible,
            inversion_bound: inversion.map(T::as_f64),
            rescaled_max: search.and_then(|s| s.best.value()).map(T::as_f64),
            s_argmax: search
                .map(|s| s.argmax.rows().into_iter().map(|r| r.iter().map(|x| x.as_f64()).collect()).collect()),
            lower_bound: true,
        }
    }
}
