//! Pair-interaction Hamiltonians on networks of qudits.
//!
//! `H = Σ_{k≠l} Σ_{α,β} J_{kl;αβ} σ^k_α σ^l_β + Σ_k Σ_α r_{k;α} σ^k_α`, summed
//! over ordered pairs, so an unordered coupling `{k, l}` contributes through
//! both `J_kl` and `J_lk = J_klᵀ`.

use ndarray::Array2;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{creal, Scalar, C};

pub use crate::linalg::{eigvals_hermitian, eigvals_sym};

pub const MAX_HILBERT_DIM: usize = 4096;

/// `d² - 1` traceless Hermitian matrices with `tr(σ_α σ_β) = 2 δ_αβ`.
#[derive(Debug, Clone)]
pub struct SuBasis<T: Scalar> {
    d: usize,
    sigma: Vec<CMatrix<T>>,
}

fn unit<T: Scalar>(d: usize, r: usize, c: usize, z: C<T>) -> CMatrix<T> {
    let mut m = Array2::zeros((d, d));
    m[[r, c]] = z;
    m
}

fn symmetric<T: Scalar>(d: usize, j: usize, k: usize) -> CMatrix<T> {
    unit(d, j, k, C::one()) + unit(d, k, j, C::one())
}

/// `-i|j><k| + i|k><j|` for `j < k`; for `d = 2` this is σ_y.
fn antisymmetric<T: Scalar>(d: usize, j: usize, k: usize) -> CMatrix<T> {
    unit(d, j, k, -C::i()) + unit(d, k, j, C::i())
}

fn diagonal<T: Scalar>(d: usize, l: usize) -> CMatrix<T> {
    let norm = (T::lit(2.0) / T::from_usize_lossy(l * (l + 1))).sqrt();
    Array2::from_shape_fn((d, d), |(i, j)| {
        if i != j || i > l {
            C::zero()
        } else if i < l {
            creal(norm)
        } else {
            creal(-norm * T::from_usize_lossy(l))
        }
    })
}

impl<T: Scalar> SuBasis<T> {
    /// Generalized Gell-Mann matrices: for each pair `j < k` the symmetric then
    /// the antisymmetric element, then the `d - 1` diagonal elements. For
    /// `d = 2` this is `(σx, σy, σz)`.
    pub fn gell_mann(d: usize) -> Result<Self> {
        if !(2..=4).contains(&d) {
            return Err(Error::InvalidParameter(format!("Gell-Mann basis supports 2 <= d <= 4, got {d}")));
        }
        let mut sigma = Vec::with_capacity(d * d - 1);
        for j in 0..d {
            for k in (j + 1)..d {
                sigma.push(symmetric(d, j, k));
                sigma.push(antisymmetric(d, j, k));
            }
        }
        for l in 1..d {
            sigma.push(diagonal(d, l));
        }
        Ok(Self { d, sigma })
    }

    /// Basis ordered `X_1..X_{d-1}, Y_1..Y_{d-1}` followed by the remaining
    /// Gell-Mann elements, where `X_r = |r><r-1| + |r-1><r|` and
    /// `Y_r = i|r><r-1| - i|r-1><r|` are the ladder-adjacent pairs.
    pub fn harmonic(d: usize) -> Result<Self> {
        if !(2..=crate::error_basis::MAX_BASIS_DIM).contains(&d) {
            return Err(Error::InvalidParameter(format!("harmonic basis supports 2 <= d <= 8, got {d}")));
        }
        let mut sigma: Vec<CMatrix<T>> = (1..d).map(|r| symmetric(d, r - 1, r)).collect();
        sigma.extend((1..d).map(|r| antisymmetric(d, r - 1, r)));
        for j in 0..d {
            for k in (j + 2)..d {
                sigma.push(symmetric(d, j, k));
                sigma.push(antisymmetric(d, j, k));
            }
        }
        sigma.extend((1..d).map(|l| diagonal(d, l)));
        Ok(Self { d, sigma })
    }

    pub fn from_matrices(d: usize, sigma: Vec<CMatrix<T>>) -> Result<Self> {
        if d < 2 || sigma.len() != d * d - 1 || sigma.iter().any(|s| s.dim() != (d, d)) {
            return Err(Error::InvalidBasis(format!("need {} matrices of size {d}×{d}", d * d - 1)));
        }
        let tol = T::tol(1e-12);
        for (a, s) in sigma.iter().enumerate() {
            if linalg::hermitian_deviation(s) > tol || linalg::trace(s).norm() > tol {
                return Err(Error::InvalidBasis(format!("element {a} is not traceless Hermitian")));
            }
            for (b, t) in sigma.iter().enumerate().skip(a) {
                let ip = linalg::trace(&s.dot(t));
                let expect = if a == b { T::lit(2.0) } else { T::zero() };
                if (ip - creal(expect)).norm() > tol {
                    return Err(Error::InvalidBasis(format!("tr(σ_{a} σ_{b}) != 2δ")));
                }
            }
        }
        Ok(Self { d, sigma })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `m = d² - 1`.
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn matrices(&self) -> &[CMatrix<T>] {
        &self.sigma
    }

    pub fn matrix(&self, alpha: usize) -> &CMatrix<T> {
        &self.sigma[alpha]
    }
}

/// `n` nodes of dimension `d`, a symmetric `(mn)×(mn)` J-matrix with zero
/// diagonal blocks and a length-`mn` local coefficient vector (`m = d² - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct PairHamiltonian<T: Scalar> {
    n: usize,
    d: usize,
    j: Array2<T>,
    r: Vec<T>,
}

impl<T: Scalar> PairHamiltonian<T> {
    pub fn new(n: usize, d: usize, j: Array2<T>, r: Vec<T>) -> Result<Self> {
        if n == 0 || d < 2 {
            return Err(Error::InvalidModel(format!("need n >= 1 and d >= 2, got n = {n}, d = {d}")));
        }
        let m = d * d - 1;
        if j.dim() != (m * n, m * n) || r.len() != m * n {
            return Err(Error::InvalidModel(format!("J must be {0}×{0} and r of length {0}", m * n)));
        }
        let scale = j.iter().fold(T::one(), |acc, x| acc.max(x.abs()));
        let tol = T::tol(1e-12) * scale;
        for a in 0..m * n {
            for b in a..m * n {
                if (j[[a, b]] - j[[b, a]]).abs() > tol {
                    return Err(Error::InvalidModel(format!("J is not symmetric at ({a}, {b})")));
                }
                if a / m == b / m && j[[a, b]] != T::zero() {
                    return Err(Error::InvalidModel(format!("diagonal block {} is nonzero", a / m)));
                }
            }
        }
        Ok(Self { n, d, j, r })
    }

    /// Every pair coupled through the same `m×m` block: `J_kl = block` for
    /// `k < l` and `blockᵀ` for `k > l`; no local terms.
    pub fn complete(n: usize, d: usize, block: &Array2<T>) -> Result<Self> {
        let m = d * d - 1;
        if block.dim() != (m, m) {
            return Err(Error::InvalidModel(format!("coupling block must be {m}×{m}")));
        }
        let j = Array2::from_shape_fn((m * n, m * n), |(a, b)| {
            let (k, l) = (a / m, b / m);
            match k.cmp(&l) {
                std::cmp::Ordering::Less => block[[a % m, b % m]],
                std::cmp::Ordering::Greater => block[[b % m, a % m]],
                std::cmp::Ordering::Equal => T::zero(),
            }
        });
        Self::new(n, d, j, vec![T::zero(); m * n])
    }

    /// Complete network with `J_{kl;αα} = weight` for every pair.
    pub fn complete_diagonal(n: usize, d: usize, alpha: usize, weight: T) -> Result<Self> {
        let m = d * d - 1;
        let mut block = Array2::zeros((m, m));
        block[[alpha, alpha]] = weight;
        Self::complete(n, d, &block)
    }

    /// Seeded model with J and r entries uniform in `[-1, 1]`.
    pub fn random(n: usize, d: usize, seed: u64) -> Result<Self> {
        let m = d * d - 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut j = Array2::zeros((m * n, m * n));
        for a in 0..m * n {
            for b in (a + 1)..m * n {
                if a / m != b / m {
                    let v = T::lit(rng.random_range(-1.0..=1.0));
                    j[[a, b]] = v;
                    j[[b, a]] = v;
                }
            }
        }
        let r = (0..m * n).map(|_| T::lit(rng.random_range(-1.0..=1.0))).collect();
        Self::new(n, d, j, r)
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn basis_len(&self) -> usize {
        self.d * self.d - 1
    }

    pub fn j_matrix(&self) -> &Array2<T> {
        &self.j
    }

    pub fn local_terms(&self) -> &[T] {
        &self.r
    }

    /// Block `J_kl` as an `m×m` matrix.
    pub fn coupling(&self, k: usize, l: usize) -> Array2<T> {
        let m = self.basis_len();
        Array2::from_shape_fn((m, m), |(a, b)| self.j[[k * m + a, l * m + b]])
    }

    pub fn without_local_terms(&self) -> Self {
        Self { r: vec![T::zero(); self.r.len()], ..self.clone() }
    }

    /// Keeps only couplings inside `keep` and local terms of nodes in `keep`.
    pub fn restricted_to(&self, keep: &[usize]) -> Self {
        let m = self.basis_len();
        let inside = |k: usize| keep.contains(&k);
        let j = Array2::from_shape_fn(self.j.dim(), |(a, b)| {
            if inside(a / m) && inside(b / m) {
                self.j[[a, b]]
            } else {
                T::zero()
            }
        });
        let r = self.r.iter().enumerate().map(|(a, &x)| if inside(a / m) { x } else { T::zero() }).collect();
        Self { j, r, ..self.clone() }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { j: self.j.mapv(|x| x * s), r: self.r.iter().map(|&x| x * s).collect(), ..self.clone() }
    }

    pub fn hilbert_dim(&self) -> Result<usize> {
        self.d
            .checked_pow(self.n as u32)
            .filter(|&t| t <= MAX_HILBERT_DIM)
            .ok_or_else(|| Error::Overflow(format!("{}^{} exceeds {MAX_HILBERT_DIM}", self.d, self.n)))
    }

    /// Dense `H` in the generalized Gell-Mann basis.
    pub fn assemble(&self) -> Result<CMatrix<T>> {
        self.assemble_with(&SuBasis::gell_mann(self.d)?)
    }

    pub fn assemble_with(&self, basis: &SuBasis<T>) -> Result<CMatrix<T>> {
        if basis.dim() != self.d {
            return Err(Error::DimensionMismatch(format!("basis has d = {}, model d = {}", basis.dim(), self.d)));
        }
        let total = self.hilbert_dim()?;
        let dims = vec![self.d; self.n];
        let m = self.basis_len();
        let two = T::lit(2.0);
        let mut h = Array2::zeros((total, total));
        for k in 0..self.n {
            for l in (k + 1)..self.n {
                let mut pair: CMatrix<T> = Array2::zeros((self.d * self.d, self.d * self.d));
                let mut any = false;
                for a in 0..m {
                    for b in 0..m {
                        let w = self.j[[k * m + a, l * m + b]];
                        if w != T::zero() {
                            any = true;
                            pair = pair + linalg::kron(basis.matrix(a), basis.matrix(b)).mapv(|z| z * (w * two));
                        }
                    }
                }
                if any {
                    linalg::add_pair(&mut h, &pair, k, l, &dims);
                }
            }
            let mut local: CMatrix<T> = Array2::zeros((self.d, self.d));
            for a in 0..m {
                local = local + basis.matrix(a).mapv(|z| z * self.r[k * m + a]);
            }
            linalg::add_local(&mut h, &local, k, &dims);
        }
        Ok(h)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            n: self.n,
            d: self.d,
            j: JEntries::Flat(self.j.iter().map(|x| x.as_f64()).collect()),
            r: self.r.iter().map(|x| x.as_f64()).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ModelFile>(text)?.into_model()
    }
}

/// Model JSON: `J` row-major, either flat or as nested rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "J")]
    pub j: JEntries,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JEntries {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

impl ModelFile {
    pub fn into_model<T: Scalar>(self) -> Result<PairHamiltonian<T>> {
        if self.d < 2 {
            return Err(Error::InvalidModel(format!("d = {} < 2", self.d)));
        }
        let size = (self.d * self.d - 1) * self.n;
        let flat: Vec<f64> = match self.j {
            JEntries::Flat(v) => v,
            JEntries::Nested(rows) => {
                if rows.iter().any(|r| r.len() != size) {
                    return Err(Error::InvalidModel(format!("J rows must have length {size}")));
                }
                rows.into_iter().flatten().collect()
            }
        };
        if flat.len() != size * size {
            return Err(Error::InvalidModel(format!("J must have {} entries", size * size)));
        }
        let j = Array2::from_shape_vec((size, size), flat.into_iter().map(T::lit).collect()).expect("length checked");
        PairHamiltonian::new(self.n, self.d, j, self.r.into_iter().map(T::lit).collect())
    }
}
