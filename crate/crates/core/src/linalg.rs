//! Dense complex matrix helpers for tensor-product Hilbert spaces.
//!
//! Sites are ordered most-significant first: for local dimensions
//! `dims = [d_0, .., d_{n-1}]` the global basis index is
//! `i = sum_k a_k * stride_k` with `stride_k = prod_{j>k} d_j`.

use ndarray::Array2;
use num_traits::{One, Zero};

use crate::scalar::{Scalar, C};

/// Dense complex matrix.
pub type CMatrix<T> = Array2<C<T>>;

pub fn identity<T: Scalar>(n: usize) -> CMatrix<T> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { C::one() } else { C::zero() })
}

pub fn dagger<T: Scalar>(a: &CMatrix<T>) -> CMatrix<T> {
    a.t().mapv(|z| z.conj())
}

pub fn trace<T: Scalar>(a: &CMatrix<T>) -> C<T> {
    a.diag().iter().fold(C::zero(), |acc, &z| acc + z)
}

pub fn frobenius<T: Scalar>(a: &CMatrix<T>) -> T {
    a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

pub fn frobenius_real<T: Scalar>(a: &Array2<T>) -> T {
    a.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// `‖a - b‖_F`.
pub fn distance<T: Scalar>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter().zip(b.iter()).map(|(x, y)| (*x - *y).norm_sqr()).sum::<T>().sqrt()
}

/// Largest entry of `|a - a†|`.
pub fn hermitian_deviation<T: Scalar>(a: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let dev = (a[[i, j]] - a[[j, i]].conj()).norm();
            if dev > worst {
                worst = dev;
            }
        }
    }
    worst
}

pub fn scale<T: Scalar>(a: &CMatrix<T>, s: T) -> CMatrix<T> {
    a.mapv(|z| z * s)
}

pub fn kron<T: Scalar>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| a[[i / br, j / bc]] * b[[i % br, j % bc]])
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

pub(crate) fn digit(index: usize, site: usize, dims: &[usize], strides: &[usize]) -> usize {
    (index / strides[site]) % dims[site]
}

/// Embeds a single-site operator at `site`.
pub fn embed_local<T: Scalar>(op: &CMatrix<T>, site: usize, dims: &[usize]) -> CMatrix<T> {
    let total: usize = dims.iter().product();
    let mut out = Array2::zeros((total, total));
    add_local(&mut out, op, site, dims);
    out
}

/// `acc += 1 ⊗ .. ⊗ op (at site) ⊗ .. ⊗ 1`.
pub fn add_local<T: Scalar>(acc: &mut CMatrix<T>, op: &CMatrix<T>, site: usize, dims: &[usize]) {
    let total: usize = dims.iter().product();
    let st = strides(dims);
    for i in 0..total {
        let a = digit(i, site, dims, &st);
        let base = i - a * st[site];
        for b in 0..dims[site] {
            let v = op[[a, b]];
            if v != C::zero() {
                let j = base + b * st[site];
                acc[[i, j]] = acc[[i, j]] + v;
            }
        }
    }
}

/// Embeds a two-site operator acting on `site_a ⊗ site_b` (the row/column index
/// of `op` is `x_a * d_b + x_b`). The two sites may appear in either order.
pub fn embed_pair<T: Scalar>(op: &CMatrix<T>, site_a: usize, site_b: usize, dims: &[usize]) -> CMatrix<T> {
    let total: usize = dims.iter().product();
    let mut out = Array2::zeros((total, total));
    add_pair(&mut out, op, site_a, site_b, dims);
    out
}

/// Accumulating form of [`embed_pair`].
pub fn add_pair<T: Scalar>(acc: &mut CMatrix<T>, op: &CMatrix<T>, site_a: usize, site_b: usize, dims: &[usize]) {
    assert_ne!(site_a, site_b);
    let total: usize = dims.iter().product();
    let st = strides(dims);
    let (da, db) = (dims[site_a], dims[site_b]);
    for i in 0..total {
        let xa = digit(i, site_a, dims, &st);
        let xb = digit(i, site_b, dims, &st);
        let base = i - xa * st[site_a] - xb * st[site_b];
        let row = xa * db + xb;
        for ya in 0..da {
            for yb in 0..db {
                let v = op[[row, ya * db + yb]];
                if v != C::zero() {
                    let j = base + ya * st[site_a] + yb * st[site_b];
                    acc[[i, j]] = acc[[i, j]] + v;
                }
            }
        }
    }
}

/// Single-nonzero-per-column form of a unitary: `U[perm[c], c] = phase[c]`.
#[derive(Debug, Clone)]
pub struct Monomial<T: Scalar> {
    pub perm: Vec<usize>,
    pub phase: Vec<C<T>>,
}

impl<T: Scalar> Monomial<T> {
    /// Returns the monomial form when every column has exactly one entry of
    /// magnitude above `tol`.
    pub fn detect(u: &CMatrix<T>, tol: T) -> Option<Self> {
        let n = u.nrows();
        let mut perm = Vec::with_capacity(n);
        let mut phase = Vec::with_capacity(n);
        for c in 0..n {
            let mut hit = None;
            for r in 0..n {
                if u[[r, c]].norm() > tol {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(r);
                }
            }
            let r = hit?;
            perm.push(r);
            phase.push(u[[r, c]]);
        }
        Some(Self { perm, phase })
    }
}

/// `U† H U` for `U = factors[0] ⊗ .. ⊗ factors[n-1]`, applied site by site.
pub fn conjugate_local<T: Scalar>(h: &CMatrix<T>, factors: &[&CMatrix<T>], dims: &[usize]) -> CMatrix<T> {
    let st = strides(dims);
    let total = h.nrows();
    let mut cur = h.clone();
    for (site, u) in factors.iter().enumerate() {
        let d = dims[site];
        let s = st[site];
        // rows: (U_k† ⊗ 1) applied from the left
        let mut next: CMatrix<T> = Array2::zeros((total, total));
        for i in 0..total {
            let a = digit(i, site, dims, &st);
            let base = i - a * s;
            let mut row = next.row_mut(i);
            for b in 0..d {
                let coeff = u[[b, a]].conj();
                if coeff == C::zero() {
                    continue;
                }
                let src = cur.row(base + b * s);
                row.zip_mut_with(&src, |x: &mut C<T>, &y: &C<T>| *x = *x + coeff * y);
            }
        }
        // columns: (1 ⊗ U_k) applied from the right
        let mut out: CMatrix<T> = Array2::zeros((total, total));
        for j in 0..total {
            let a = digit(j, site, dims, &st);
            let base = j - a * s;
            let mut col = out.column_mut(j);
            for b in 0..d {
                let coeff = u[[b, a]];
                if coeff == C::zero() {
                    continue;
                }
                let src = next.column(base + b * s);
                col.zip_mut_with(&src, |x: &mut C<T>, &y: &C<T>| *x = *x + coeff * y);
            }
        }
        cur = out;
    }
    cur
}

/// Global permutation and phases of a tensor product of monomial unitaries.
pub(crate) fn global_monomial<T: Scalar>(factors: &[&Monomial<T>], dims: &[usize]) -> (Vec<usize>, Vec<C<T>>) {
    let st = strides(dims);
    let total: usize = dims.iter().product();
    let mut perm = vec![0; total];
    let mut phase = vec![C::one(); total];
    for c in 0..total {
        let mut row = 0;
        let mut ph = C::one();
        for (site, m) in factors.iter().enumerate() {
            let a = digit(c, site, dims, &st);
            row += m.perm[a] * st[site];
            ph = ph * m.phase[a];
        }
        perm[c] = row;
        phase[c] = ph;
    }
    (perm, phase)
}

/// Adds `weight · U† H U` to `acc`, with `U` given in global monomial form.
pub(crate) fn accumulate_monomial_conjugate<T: Scalar>(
    acc: &mut CMatrix<T>,
    h: &CMatrix<T>,
    perm: &[usize],
    phase: &[C<T>],
    weight: T,
) {
    let total = h.nrows();
    for r in 0..total {
        let left = phase[r].conj() * weight;
        let hr = h.row(perm[r]);
        let mut ar = acc.row_mut(r);
        for c in 0..total {
            ar[c] = ar[c] + left * hr[perm[c]] * phase[c];
        }
    }
}

/// Eigenvalues of a real symmetric matrix in descending order (cyclic Jacobi).
pub fn eigvals_sym<T: Scalar>(m: &Array2<T>) -> Vec<T> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "square matrix required");
    let mut a = m.clone();
    let total = frobenius_real(&a);
    if total == T::zero() {
        return vec![T::zero(); n];
    }
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[[p, q]] * a[[p, q]];
            }
        }
        if off.sqrt() <= eps * eps.sqrt() * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut vals: Vec<T> = a.diag().to_vec();
    sort_descending(&mut vals);
    vals
}

/// Eigenvalues of a Hermitian matrix in descending order, via the real
/// symmetric embedding `[[Re, -Im], [Im, Re]]` (each eigenvalue doubled).
pub fn eigvals_hermitian<T: Scalar>(h: &CMatrix<T>) -> Vec<T> {
    let n = h.nrows();
    let mut big = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            let z = h[[i, j]];
            big[[i, j]] = z.re;
            big[[i + n, j + n]] = z.re;
            big[[i, j + n]] = -z.im;
            big[[i + n, j]] = z.im;
        }
    }
    eigvals_sym(&big).into_iter().step_by(2).collect()
}

pub(crate) fn sort_descending<T: Scalar>(v: &mut [T]) {
    v.sort_by(|a, b| b.partial_cmp(a).expect("no NaN"));
}

#[cfg(test)]
pub(crate) fn c<T: Scalar>(re: f64, im: f64) -> C<T> {
    num_complex::Complex::new(T::lit(re), T::lit(im))
}
