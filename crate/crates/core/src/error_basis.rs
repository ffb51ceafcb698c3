//! Unitary error bases and the annihilators built from them.

use ndarray::Array2;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::designs::FiniteGroup;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Monomial};
use crate::netham::SuBasis;
use crate::scalar::{cis, Scalar, C};

pub const MAX_BASIS_DIM: usize = 8;

/// `d²` unitaries on `C^d`, orthonormal under `tr(A†B)/d`, each labeled by an
/// element of `Z_d × Z_d`; the label `(0, 0)` belongs to the identity.
#[derive(Debug, Clone)]
pub struct UnitaryErrorBasis<T: Scalar> {
    d: usize,
    elements: Vec<CMatrix<T>>,
    labels: Vec<(u32, u32)>,
    monomials: Vec<Option<Monomial<T>>>,
}

impl<T: Scalar> UnitaryErrorBasis<T> {
    /// Shift/clock basis: element `a·d + b` is `X^a Z^b` with label `(a, b)`.
    pub fn generalized_pauli(d: usize) -> Result<Self> {
        if !(2..=MAX_BASIS_DIM).contains(&d) {
            return Err(Error::InvalidParameter(format!("dimension {d} outside 2..={MAX_BASIS_DIM}")));
        }
        let omega = T::TAU() / T::from_usize_lossy(d);
        let mut elements = Vec::with_capacity(d * d);
        let mut labels = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                // X^a Z^b |j> = w^{bj} |j + a>
                let m = Array2::from_shape_fn((d, d), |(r, c)| {
                    if r == (c + a) % d {
                        cis(omega * T::from_usize_lossy((b * c) % d))
                    } else {
                        C::zero()
                    }
                });
                elements.push(m);
                labels.push((a as u32, b as u32));
            }
        }
        Self::from_elements(d, elements, labels)
    }

    /// `[1, σx, σy, σz]` with labels `(0,0), (1,0), (1,1), (0,1)`.
    pub fn pauli() -> Self {
        let o = C::<T>::zero();
        let l = C::<T>::one();
        let i = C::<T>::i();
        let m = |v: [C<T>; 4]| Array2::from_shape_vec((2, 2), v.to_vec()).expect("2x2");
        let elements = vec![m([l, o, o, l]), m([o, l, l, o]), m([o, -i, i, o]), m([l, o, o, -l])];
        Self::from_elements(2, elements, vec![(0, 0), (1, 0), (1, 1), (0, 1)]).expect("Pauli basis is valid")
    }

    /// Validates unitarity, trace orthogonality and the labeling.
    pub fn from_elements(d: usize, elements: Vec<CMatrix<T>>, labels: Vec<(u32, u32)>) -> Result<Self> {
        if d == 0 || elements.len() != d * d || labels.len() != d * d {
            return Err(Error::InvalidBasis(format!("need exactly {} elements and labels", d * d)));
        }
        if elements.iter().any(|e| e.dim() != (d, d)) {
            return Err(Error::InvalidBasis(format!("elements must be {d}×{d}")));
        }
        let mut seen = vec![false; d * d];
        for &(a, b) in &labels {
            let (a, b) = (a as usize, b as usize);
            if a >= d || b >= d || std::mem::replace(&mut seen[a * d + b], true) {
                return Err(Error::InvalidBasis("labels must be a bijection onto Z_d × Z_d".into()));
            }
        }
        let tol = T::tol(1e-12);
        let id = linalg::identity::<T>(d);
        for (idx, e) in elements.iter().enumerate() {
            let gram = linalg::dagger(e).dot(e);
            if linalg::distance(&gram, &id) > tol * T::from_usize_lossy(d) {
                return Err(Error::InvalidBasis(format!("element {idx} is not unitary")));
            }
        }
        let dd = T::from_usize_lossy(d);
        for i in 0..elements.len() {
            for j in (i + 1)..elements.len() {
                let ip = linalg::trace(&linalg::dagger(&elements[i]).dot(&elements[j])) / dd;
                if ip.norm() > tol {
                    return Err(Error::InvalidBasis(format!("elements {i} and {j} are not orthogonal")));
                }
            }
        }
        let id_pos = labels.iter().position(|&l| l == (0, 0)).expect("bijective labels");
        if linalg::distance(&elements[id_pos], &id) > tol {
            return Err(Error::InvalidBasis("label (0, 0) must be the identity matrix".into()));
        }
        let monomials = elements.iter().map(|e| Monomial::detect(e, tol)).collect();
        Ok(Self { d, elements, labels, monomials })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, index: usize) -> &CMatrix<T> {
        &self.elements[index]
    }

    pub fn elements(&self) -> &[CMatrix<T>] {
        &self.elements
    }

    pub fn labels(&self) -> &[(u32, u32)] {
        &self.labels
    }

    pub fn index_of(&self, label: (u32, u32)) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn identity_index(&self) -> usize {
        self.index_of((0, 0)).expect("validated basis")
    }

    pub(crate) fn monomial(&self, index: usize) -> Option<&Monomial<T>> {
        self.monomials[index].as_ref()
    }

    /// `Z_d × Z_d` on the 1-based symbols: symbol `i + 1` is element `i`.
    pub fn group(&self) -> FiniteGroup {
        FiniteGroup::from_pairs(self.d as u32, &self.labels)
    }

    /// Checks `E_(a,b) E_(a',b') = phase · E_(a+a', b+b')` with `|phase| = 1`.
    pub fn is_projective_representation(&self) -> bool {
        let d = self.d as u32;
        let tol = T::tol(1e-10);
        let dd = T::from_usize_lossy(self.d);
        for (i, &(a, b)) in self.labels.iter().enumerate() {
            for (j, &(a2, b2)) in self.labels.iter().enumerate() {
                let k = self.index_of(((a + a2) % d, (b + b2) % d)).expect("closed labels");
                let prod = self.elements[i].dot(&self.elements[j]);
                let phase = linalg::trace(&linalg::dagger(&self.elements[k]).dot(&prod)) / dd;
                if (phase.norm() - T::one()).abs() > tol
                    || linalg::distance(&prod, &self.elements[k].mapv(|z| z * phase)) > tol
                {
                    return false;
                }
            }
        }
        true
    }
}

/// `(1/d²) Σ_i E_i† a E_i` over the full basis.
pub fn annihilate<T: Scalar>(basis: &UnitaryErrorBasis<T>, a: &CMatrix<T>) -> Result<CMatrix<T>> {
    twirl(basis, &(0..basis.len()).collect::<Vec<_>>(), a)
}

fn twirl<T: Scalar>(basis: &UnitaryErrorBasis<T>, subset: &[usize], a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let d = basis.dim();
    if a.dim() != (d, d) {
        return Err(Error::DimensionMismatch(format!("expected a {d}×{d} operator")));
    }
    let dev = linalg::hermitian_deviation(a);
    if dev > T::tol(1e-10) * linalg::frobenius(a).max(T::one()) {
        return Err(Error::NotHermitian(dev.as_f64()));
    }
    let w = T::one() / T::from_usize_lossy(subset.len());
    let mut acc = Array2::zeros((d, d));
    for &i in subset {
        let e = basis.element(i);
        acc = acc + linalg::dagger(e).dot(a).dot(e).mapv(|z| z * w);
    }
    Ok(acc)
}

fn annihilates_all<T: Scalar>(basis: &UnitaryErrorBasis<T>, subset: &[usize], su: &SuBasis<T>) -> bool {
    su.matrices().iter().all(|s| {
        let out = twirl(basis, subset, s).expect("Gell-Mann matrices are Hermitian");
        linalg::frobenius(&out) <= T::tol(1e-10)
    })
}

/// Spot check that no uniform-weight subset of fewer than `d²` basis elements
/// annihilates su(d): every proper subset for `d = 2`, 100 seeded random
/// 8-subsets for `d = 3`. Also confirms that the full basis does annihilate.
pub fn minimality_check(d: usize) -> Result<bool> {
    let basis = UnitaryErrorBasis::<f64>::generalized_pauli(d)?;
    let su = SuBasis::<f64>::gell_mann(d)?;
    let full: Vec<usize> = (0..d * d).collect();
    if !annihilates_all(&basis, &full, &su) {
        return Ok(false);
    }
    match d {
        2 => Ok((1u32..15).all(|mask| {
            let subset: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
            !annihilates_all(&basis, &subset, &su)
        })),
        3 => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
            Ok((0..100).all(|_| {
                let subset = sample(&mut rng, 9, 8).into_vec();
                !annihilates_all(&basis, &subset, &su)
            }))
        }
        _ => Err(Error::InvalidParameter(format!("minimality check covers d ∈ {{2, 3}}, got {d}"))),
    }
}
