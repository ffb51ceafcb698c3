//! Pulse schemes and the exact average-Hamiltonian engine.
//!
//! A scheme assigns to every node `k` and interval `j` an element of the
//! node's unitary error basis. The average Hamiltonian of `H` is
//! `Σ_j τ_j U_j† H U_j` with `U_j = ⊗_k E^k_{pulses[k][j]}` and `Σ_j τ_j = 1`;
//! the target overhead is the factor by which that average is rescaled.

use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designs::{self, OrthogonalArray};
use crate::error::{Error, Result};
use crate::error_basis::UnitaryErrorBasis;
use crate::linalg::{self, CMatrix, Monomial};
use crate::netham::PairHamiltonian;
use crate::scalar::{cplx, Scalar};

/// Residual threshold of [`verify_scheme`].
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct PulseScheme<T: Scalar> {
    times: Vec<T>,
    /// `n × N`, 0-based indices into each node's basis.
    pulses: Array2<usize>,
    bases: Vec<Arc<UnitaryErrorBasis<T>>>,
    target_overhead: T,
}

impl<T: Scalar> PulseScheme<T> {
    pub fn new(
        times: Vec<T>,
        pulses: Array2<usize>,
        bases: Vec<Arc<UnitaryErrorBasis<T>>>,
        target_overhead: T,
    ) -> Result<Self> {
        let (n, cols) = pulses.dim();
        if n == 0 || cols == 0 {
            return Err(Error::InvalidScheme("empty pulse matrix".into()));
        }
        if times.len() != cols {
            return Err(Error::InvalidScheme(format!("{} times for {cols} intervals", times.len())));
        }
        if bases.len() != n {
            return Err(Error::InvalidScheme(format!("{} bases for {n} nodes", bases.len())));
        }
        if times.iter().any(|&t| t.is_nan() || t <= T::zero()) {
            return Err(Error::InvalidScheme("times must be positive".into()));
        }
        let total: T = times.iter().copied().sum();
        if (total - T::one()).abs() > T::tol(1e-12) * T::from_usize_lossy(cols) {
            return Err(Error::InvalidScheme(format!("times sum to {total}, not 1")));
        }
        for ((k, j), &p) in pulses.indexed_iter() {
            if p >= bases[k].len() {
                return Err(Error::InvalidScheme(format!("pulse {p} at ({k}, {j}) out of range")));
            }
        }
        if target_overhead.is_nan() || target_overhead <= T::zero() {
            return Err(Error::InvalidScheme("target overhead must be positive".into()));
        }
        Ok(Self { times, pulses, bases, target_overhead })
    }

    /// Pulses from a 1-based design over the basis symbols, uniform times.
    pub fn from_design(
        entries: &Array2<u32>,
        bases: Vec<Arc<UnitaryErrorBasis<T>>>,
        target_overhead: T,
    ) -> Result<Self> {
        let cols = entries.ncols();
        let times = vec![T::one() / T::from_usize_lossy(cols); cols];
        if entries.iter().any(|&e| e == 0) {
            return Err(Error::InvalidScheme("design symbols are 1-based".into()));
        }
        Self::new(times, entries.mapv(|e| e as usize - 1), bases, target_overhead)
    }

    /// One interval with every node idle.
    pub fn identity(bases: Vec<Arc<UnitaryErrorBasis<T>>>) -> Result<Self> {
        let pulses = Array2::from_shape_fn((bases.len(), 1), |(k, _)| bases[k].identity_index());
        Self::new(vec![T::one()], pulses, bases, T::one())
    }

    pub fn nodes(&self) -> usize {
        self.pulses.nrows()
    }

    pub fn intervals(&self) -> usize {
        self.pulses.ncols()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn pulses(&self) -> &Array2<usize> {
        &self.pulses
    }

    pub fn bases(&self) -> &[Arc<UnitaryErrorBasis<T>>] {
        &self.bases
    }

    pub fn target_overhead(&self) -> T {
        self.target_overhead
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.dim()).collect()
    }

    /// Same scheme with rows reordered: row `k` of the result is row `order[k]`.
    pub fn with_rows(&self, order: &[usize]) -> Result<Self> {
        let pulses = Array2::from_shape_fn((order.len(), self.intervals()), |(k, j)| self.pulses[[order[k], j]]);
        let bases = order.iter().map(|&k| self.bases[k].clone()).collect();
        Self::new(self.times.clone(), pulses, bases, self.target_overhead)
    }

    pub fn set_pulse(&mut self, node: usize, interval: usize, pulse: usize) -> Result<()> {
        if pulse >= self.bases[node].len() {
            return Err(Error::InvalidScheme(format!("pulse {pulse} out of range")));
        }
        self.pulses[[node, interval]] = pulse;
        Ok(())
    }

    /// `Σ_j τ_j U_j† h U_j`.
    pub fn average_operator(&self, h: &CMatrix<T>) -> Result<CMatrix<T>> {
        let dims = self.dims();
        let total: usize = dims.iter().product();
        if h.dim() != (total, total) {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}×{}, scheme acts on dimension {total}",
                h.nrows(),
                h.ncols()
            )));
        }
        let cols = self.intervals();
        let all_monomial =
            (0..self.nodes()).all(|k| (0..cols).all(|j| self.bases[k].monomial(self.pulses[[k, j]]).is_some()));
        let zero = || Array2::zeros((total, total));
        let acc = (0..cols)
            .into_par_iter()
            .fold(zero, |mut acc, j| {
                if all_monomial {
                    let factors: Vec<&Monomial<T>> = (0..self.nodes())
                        .map(|k| self.bases[k].monomial(self.pulses[[k, j]]).expect("checked"))
                        .collect();
                    let (perm, phase) = linalg::global_monomial(&factors, &dims);
                    linalg::accumulate_monomial_conjugate(&mut acc, h, &perm, &phase, self.times[j]);
                } else {
                    let factors: Vec<&CMatrix<T>> =
                        (0..self.nodes()).map(|k| self.bases[k].element(self.pulses[[k, j]])).collect();
                    let conj = linalg::conjugate_local(h, &factors, &dims);
                    acc.zip_mut_with(&conj, |a, &c| *a = *a + c * self.times[j]);
                }
                acc
            })
            .reduce(zero, |a, b| a + b);
        Ok(acc)
    }

    pub fn average_hamiltonian(&self, model: &PairHamiltonian<T>) -> Result<CMatrix<T>> {
        self.check_model(model)?;
        self.average_operator(&model.assemble()?)
    }

    fn check_model(&self, model: &PairHamiltonian<T>) -> Result<()> {
        if model.nodes() != self.nodes() || self.bases.iter().any(|b| b.dim() != model.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "model has {} nodes of dimension {}, scheme has dims {:?}",
                model.nodes(),
                model.dim(),
                self.dims()
            )));
        }
        Ok(())
    }
}

fn shared_bases<T: Scalar>(n: usize, d: usize) -> Result<Vec<Arc<UnitaryErrorBasis<T>>>> {
    let basis = Arc::new(UnitaryErrorBasis::generalized_pauli(d)?);
    Ok(vec![basis; n])
}

fn alphabet(d: usize) -> Result<u32> {
    u32::try_from(d * d).map_err(|_| Error::Overflow(format!("d = {d}")))
}

/// Decoupling from the smallest linear orthogonal array over the `d²`
/// shift/clock symbols (exponential product array when `d` is not a prime power).
pub fn decoupling_scheme<T: Scalar>(n: usize, d: usize) -> Result<PulseScheme<T>> {
    let bases = shared_bases(n, d)?;
    let oa = if n == 1 { designs::product_oa(1, alphabet(d)?)? } else { designs::smallest_oa_for(n, alphabet(d)?)? };
    PulseScheme::from_design(oa.entries(), bases, T::one())
}

/// Decoupling from the product array with `d^{2n}` intervals.
pub fn exponential_decoupling_scheme<T: Scalar>(n: usize, d: usize) -> Result<PulseScheme<T>> {
    let bases = shared_bases(n, d)?;
    let oa = designs::product_oa(n, alphabet(d)?)?;
    PulseScheme::from_design(oa.entries(), bases, T::one())
}

/// Decoupling for nodes of different dimensions via the mixed product array.
pub fn decoupling_scheme_mixed<T: Scalar>(dims: &[usize]) -> Result<PulseScheme<T>> {
    let bases =
        dims.iter().map(|&d| UnitaryErrorBasis::generalized_pauli(d).map(Arc::new)).collect::<Result<Vec<_>>>()?;
    let levels = dims.iter().map(|&d| alphabet(d)).collect::<Result<Vec<_>>>()?;
    let mixed = designs::product_mixed(&levels)?;
    PulseScheme::from_design(&mixed.entries, bases, T::one())
}

/// Decouples every node outside `keep` (0-based, one or two nodes); kept
/// nodes stay idle, so their mutual coupling and local terms survive.
pub fn selective_scheme<T: Scalar>(n: usize, d: usize, keep: &[usize]) -> Result<PulseScheme<T>> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() || sorted.len() > 2 || sorted.len() != keep.len() || sorted.iter().any(|&k| k >= n) {
        return Err(Error::InvalidParameter(format!("keep set {keep:?} must name 1 or 2 distinct nodes below {n}")));
    }
    let bases = shared_bases(n, d)?;
    let others: Vec<usize> = (0..n).filter(|k| !sorted.contains(k)).collect();
    if others.is_empty() {
        return PulseScheme::identity(bases);
    }
    let s = alphabet(d)?;
    let oa = designs::smallest_oa_for(others.len().max(2), s)?.first_rows(others.len());
    let id = bases[0].identity_index() as u32 + 1;
    let mut entries = Array2::from_elem((n, oa.columns()), id);
    for (row, &node) in others.iter().enumerate() {
        entries.row_mut(node).assign(&oa.entries().row(row));
    }
    PulseScheme::from_design(&entries, bases, T::one())
}

/// Time reversal: normalize the array, drop its all-identity first column and
/// run the remaining `N - 1` columns with overhead `N - 1`.
pub fn inversion_scheme<T: Scalar>(n: usize, d: usize) -> Result<PulseScheme<T>> {
    let bases = shared_bases::<T>(n, d)?;
    let oa = if n == 1 { designs::product_oa(1, alphabet(d)?)? } else { designs::smallest_oa_for(n, alphabet(d)?)? };
    inversion_from_oa(&oa, bases)
}

pub fn inversion_from_oa<T: Scalar>(
    oa: &OrthogonalArray,
    bases: Vec<Arc<UnitaryErrorBasis<T>>>,
) -> Result<PulseScheme<T>> {
    let group = bases[0].group();
    if bases.iter().any(|b| b.labels() != bases[0].labels()) {
        return Err(Error::InvalidScheme("inversion needs one labeling shared by all nodes".into()));
    }
    let normal = designs::normalize_oa(oa, &group)?;
    let entries = normal.without_column(0);
    let overhead = T::from_usize_lossy(entries.ncols());
    PulseScheme::from_design(&entries, bases, overhead)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub residual: f64,
}

/// `‖overhead·avg - target‖_F / max(1, ‖target‖_F)`.
pub fn relative_residual<T: Scalar>(average: &CMatrix<T>, target: &CMatrix<T>, overhead: T) -> T {
    let scaled = linalg::scale(average, overhead);
    linalg::distance(&scaled, target) / linalg::frobenius(target).max(T::one())
}

/// Compares `overhead · average(model)` with `target`; ok iff the relative
/// residual is at most `1e-9`.
pub fn verify_scheme<T: Scalar>(
    model: &PairHamiltonian<T>,
    scheme: &PulseScheme<T>,
    target: &CMatrix<T>,
    overhead: T,
) -> Result<VerifyReport> {
    let avg = scheme.average_hamiltonian(model)?;
    if target.dim() != avg.dim() {
        return Err(Error::DimensionMismatch("target does not match the model".into()));
    }
    let residual = relative_residual(&avg, target, overhead).as_f64();
    Ok(VerifyReport { ok: residual <= VERIFY_TOL, residual })
}

/// Scheme JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeFile {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "N")]
    pub intervals: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    pub times: Vec<f64>,
    pub pulses: Vec<Vec<usize>>,
    pub basis: BasisSpec,
    pub target_overhead: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    /// `"generalized_pauli"` or `"pauli"`.
    Named(String),
    Inline {
        /// `elements[i][r][c] = [re, im]`.
        elements: Vec<Vec<Vec<[f64; 2]>>>,
        labels: Vec<(u32, u32)>,
    },
}

fn basis_spec<T: Scalar>(b: &UnitaryErrorBasis<T>) -> BasisSpec {
    let tol = T::tol(1e-12);
    let same = |other: &UnitaryErrorBasis<T>| {
        other.labels() == b.labels()
            && other.elements().iter().zip(b.elements()).all(|(x, y)| linalg::distance(x, y) <= tol)
    };
    if b.dim() <= crate::error_basis::MAX_BASIS_DIM
        && same(&UnitaryErrorBasis::generalized_pauli(b.dim()).expect("valid dimension"))
    {
        return BasisSpec::Named("generalized_pauli".into());
    }
    if b.dim() == 2 && same(&UnitaryErrorBasis::pauli()) {
        return BasisSpec::Named("pauli".into());
    }
    BasisSpec::Inline {
        elements: b
            .elements()
            .iter()
            .map(|e| e.rows().into_iter().map(|r| r.iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect()).collect())
            .collect(),
        labels: b.labels().to_vec(),
    }
}

impl BasisSpec {
    fn build<T: Scalar>(&self, d: usize) -> Result<UnitaryErrorBasis<T>> {
        match self {
            BasisSpec::Named(name) if name == "generalized_pauli" => UnitaryErrorBasis::generalized_pauli(d),
            BasisSpec::Named(name) if name == "pauli" && d == 2 => Ok(UnitaryErrorBasis::pauli()),
            BasisSpec::Named(name) => Err(Error::InvalidBasis(format!("unknown basis {name:?} for d = {d}"))),
            BasisSpec::Inline { elements, labels } => {
                let mats = elements
                    .iter()
                    .map(|rows| {
                        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                            return Err(Error::InvalidBasis(format!("inline element is not {d}×{d}")));
                        }
                        Ok(Array2::from_shape_fn((d, d), |(r, c)| cplx(T::lit(rows[r][c][0]), T::lit(rows[r][c][1]))))
                    })
                    .collect::<Result<Vec<_>>>()?;
                UnitaryErrorBasis::from_elements(d, mats, labels.clone())
            }
        }
    }
}

impl<T: Scalar> PulseScheme<T> {
    /// Serializes; all nodes must share one basis unless the dimensions differ
    /// and every basis is the shift/clock basis.
    pub fn to_file(&self) -> Result<SchemeFile> {
        let dims = self.dims();
        let uniform = dims.iter().all(|&d| d == dims[0]);
        let spec = basis_spec(&self.bases[0]);
        if uniform {
            if self.bases.iter().any(|b| basis_spec(b) != spec) {
                return Err(Error::Unsupported("per-node bases cannot be serialized".into()));
            }
        } else if self.bases.iter().any(|b| basis_spec(b) != BasisSpec::Named("generalized_pauli".into())) {
            return Err(Error::Unsupported("mixed-dimension schemes must use the shift/clock basis".into()));
        }
        Ok(SchemeFile {
            n: self.nodes(),
            d: dims[0],
            intervals: self.intervals(),
            dims: (!uniform).then_some(dims),
            times: self.times.iter().map(|t| t.as_f64()).collect(),
            pulses: self.pulses.rows().into_iter().map(|r| r.to_vec()).collect(),
            basis: spec,
            target_overhead: self.target_overhead.as_f64(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file()?)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<SchemeFile>(text)?.into_scheme()
    }
}

impl SchemeFile {
    pub fn into_scheme<T: Scalar>(self) -> Result<PulseScheme<T>> {
        let dims = self.dims.clone().unwrap_or_else(|| vec![self.d; self.n]);
        if dims.len() != self.n {
            return Err(Error::InvalidScheme(format!("{} dims for {} nodes", dims.len(), self.n)));
        }
        if self.pulses.len() != self.n || self.pulses.iter().any(|r| r.len() != self.intervals) {
            return Err(Error::InvalidScheme(format!("pulses must be {}×{}", self.n, self.intervals)));
        }
        let mut cache: Vec<(usize, Arc<UnitaryErrorBasis<T>>)> = Vec::new();
        let mut bases = Vec::with_capacity(self.n);
        for &d in &dims {
            if let Some((_, b)) = cache.iter().find(|(dd, _)| *dd == d) {
                bases.push(b.clone());
            } else {
                let b = Arc::new(self.basis.build::<T>(d)?);
                cache.push((d, b.clone()));
                bases.push(b);
            }
        }
        let pulses = Array2::from_shape_fn((self.n, self.intervals), |(k, j)| self.pulses[k][j]);
        PulseScheme::new(self.times.into_iter().map(T::lit).collect(), pulses, bases, T::lit(self.target_overhead))
    }
}
