//! Qubit decoupling through sign matrices.
//!
//! Conjugating a qubit by `1, σx, σy, σz` multiplies `(σx, σy, σz)` by one of
//! the sign patterns `(+++), (+--), (-+-), (--+)`. A scheme is thus described by
//! three `n × N` ±1 matrices with `Sx ∘ Sy = Sz`; it decouples when all `3n`
//! rows are mutually orthogonal and every row sums to zero.

use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designs::{self, OrthogonalArray};
use crate::error::{Error, Result};
use crate::error_basis::UnitaryErrorBasis;
use crate::gf::FieldSpec;
use crate::scalar::Scalar;
use crate::scheme::PulseScheme;

/// `φ: F_4 → {±1}^4` indexed by the field enumeration `[0, 1, ω, ω²]`.
pub const PHI: [[i8; 4]; 4] = [[1, 1, 1, 1], [1, -1, -1, 1], [1, -1, 1, -1], [1, 1, -1, -1]];

/// Signs acquired by `σx, σy, σz` under conjugation by the symbols
/// `1, σx, σy, σz` (OA symbols 1..4).
pub const SIGN_TABLE: [[i8; 4]; 3] = [[1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]];

pub const MAX_SPREAD_M: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignTriple {
    pub sx: Array2<i8>,
    pub sy: Array2<i8>,
    pub sz: Array2<i8>,
}

impl SignTriple {
    pub fn new(sx: Array2<i8>, sy: Array2<i8>, sz: Array2<i8>) -> Result<Self> {
        if sx.dim() != sy.dim() || sx.dim() != sz.dim() || sx.is_empty() {
            return Err(Error::InvalidSigns("Sx, Sy, Sz must share a non-empty shape".into()));
        }
        Ok(Self { sx, sy, sz })
    }

    pub fn qubits(&self) -> usize {
        self.sx.nrows()
    }

    pub fn intervals(&self) -> usize {
        self.sx.ncols()
    }

    pub fn matrices(&self) -> [&Array2<i8>; 3] {
        [&self.sx, &self.sy, &self.sz]
    }

    pub fn to_json(&self) -> Result<String> {
        let rows = |a: &Array2<i8>| a.rows().into_iter().map(|r| r.to_vec()).collect();
        Ok(serde_json::to_string_pretty(&SignFile {
            n: self.qubits(),
            intervals: self.intervals(),
            sx: rows(&self.sx),
            sy: rows(&self.sy),
            sz: rows(&self.sz),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SignFile = serde_json::from_str(text)?;
        let mat = |rows: &[Vec<i8>]| -> Result<Array2<i8>> {
            if rows.len() != f.n || rows.iter().any(|r| r.len() != f.intervals) {
                return Err(Error::InvalidSigns(format!("matrices must be {}×{}", f.n, f.intervals)));
            }
            Ok(Array2::from_shape_fn((f.n, f.intervals), |(k, j)| rows[k][j]))
        };
        Self::new(mat(&f.sx)?, mat(&f.sy)?, mat(&f.sz)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignFile {
    pub n: usize,
    #[serde(rename = "N")]
    pub intervals: usize,
    #[serde(rename = "Sx")]
    pub sx: Vec<Vec<i8>>,
    #[serde(rename = "Sy")]
    pub sy: Vec<Vec<i8>>,
    #[serde(rename = "Sz")]
    pub sz: Vec<Vec<i8>>,
}

/// Entrywise lookup of [`SIGN_TABLE`] on an orthogonal array over four symbols.
pub fn oa_to_signs(oa: &OrthogonalArray) -> Result<SignTriple> {
    if oa.levels() != 4 {
        return Err(Error::InvalidParameter(format!("sign conversion needs 4 symbols, got {}", oa.levels())));
    }
    if let Some(&bad) = oa.entries().iter().find(|&&e| !(1..=4).contains(&e)) {
        return Err(Error::InvalidParameter(format!("symbol {bad} outside 1..=4")));
    }
    let table = |axis: usize| oa.entries().mapv(|e| SIGN_TABLE[axis][e as usize - 1]);
    SignTriple::new(table(0), table(1), table(2))
}

/// `ϕ(v) = φ(v_1) ⊗ .. ⊗ φ(v_m)` (first coordinate most significant).
fn phi_tensor(v: &[u32]) -> Vec<i8> {
    v.iter().fold(vec![1i8], |acc, &x| acc.iter().flat_map(|&a| PHI[x as usize].iter().map(move |&b| a * b)).collect())
}

/// Maximal spread of `F_4^m`: one qubit per line `<v>` with projectively
/// normalized `v`, rows `Sx = ϕ(ωv)`, `Sy = ϕ(ω²v)`, `Sz = ϕ(v)`. Gives
/// `(4^m - 1)/3` qubits on `4^m` intervals.
pub fn spread_signs(m: u32) -> Result<SignTriple> {
    if !(1..=MAX_SPREAD_M).contains(&m) {
        return Err(Error::InvalidParameter(format!("m = {m} outside 1..={MAX_SPREAD_M}")));
    }
    let f4 = FieldSpec::of_order(4)?;
    let omega = f4.primitive_element();
    let omega2 = f4.mul(omega, omega);
    let lines = designs::projective_points(4, m as usize);
    let cols = 4usize.pow(m);
    let build = |scalar: u32| {
        let mut a = Array2::zeros((lines.len(), cols));
        for (k, v) in lines.iter().enumerate() {
            let scaled: Vec<u32> = v.iter().map(|&x| f4.mul(scalar, x)).collect();
            for (j, s) in phi_tensor(&scaled).into_iter().enumerate() {
                a[[k, j]] = s;
            }
        }
        a
    };
    SignTriple::new(build(omega), build(omega2), build(1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignViolation {
    NotSign { matrix: char, row: usize, column: usize, value: i8 },
    Schur { row: usize, column: usize },
    RowSum { matrix: char, row: usize, sum: i64 },
    NotOrthogonal { first: (char, usize), second: (char, usize), dot: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignReport {
    pub ok: bool,
    pub violations: Vec<SignViolation>,
}

const NAMES: [char; 3] = ['x', 'y', 'z'];

/// Checks ±1 entries, `Sx ∘ Sy = Sz`, zero row sums and pairwise orthogonality
/// of all `3n` rows.
pub fn verify_signs(st: &SignTriple) -> SignReport {
    let mut violations = Vec::new();
    for (a, m) in st.matrices().into_iter().enumerate() {
        for ((k, j), &v) in m.indexed_iter() {
            if v != 1 && v != -1 {
                violations.push(SignViolation::NotSign { matrix: NAMES[a], row: k, column: j, value: v });
            }
        }
    }
    for ((k, j), &x) in st.sx.indexed_iter() {
        if x * st.sy[[k, j]] != st.sz[[k, j]] {
            violations.push(SignViolation::Schur { row: k, column: j });
        }
    }
    let rows: Vec<(char, usize, Vec<i64>)> = st
        .matrices()
        .into_iter()
        .enumerate()
        .flat_map(|(a, m)| {
            m.rows().into_iter().enumerate().map(move |(k, r)| (NAMES[a], k, r.iter().map(|&v| v as i64).collect()))
        })
        .collect();
    for (name, k, r) in &rows {
        let sum: i64 = r.iter().sum();
        if sum != 0 {
            violations.push(SignViolation::RowSum { matrix: *name, row: *k, sum });
        }
    }
    let pairs: Vec<(usize, usize)> = (0..rows.len()).flat_map(|i| ((i + 1)..rows.len()).map(move |j| (i, j))).collect();
    let mut bad: Vec<SignViolation> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let dot: i64 = rows[i].2.iter().zip(&rows[j].2).map(|(a, b)| a * b).sum();
            (dot != 0).then_some(SignViolation::NotOrthogonal {
                first: (rows[i].0, rows[i].1),
                second: (rows[j].0, rows[j].1),
                dot,
            })
        })
        .collect();
    violations.append(&mut bad);
    SignReport { ok: violations.is_empty(), violations }
}

/// Recovers the conjugating Pauli per qubit and interval from the sign
/// pattern and returns the scheme over the `[1, σx, σy, σz]` basis.
pub fn signs_to_pulse_scheme<T: Scalar>(st: &SignTriple) -> Result<PulseScheme<T>> {
    let report = verify_signs(st);
    if !report.ok {
        return Err(Error::InvalidSigns(format!(
            "{} violations, first: {:?}",
            report.violations.len(),
            report.violations[0]
        )));
    }
    let mut pulses = Array2::zeros(st.sx.dim());
    for ((k, j), p) in pulses.indexed_iter_mut() {
        let pattern = [st.sx[[k, j]], st.sy[[k, j]], st.sz[[k, j]]];
        *p = (0..4)
            .find(|&s| (0..3).all(|a| SIGN_TABLE[a][s] == pattern[a]))
            .ok_or_else(|| Error::InvalidSigns(format!("pattern {pattern:?} at ({k}, {j})")))?;
    }
    let cols = st.intervals();
    let basis = Arc::new(UnitaryErrorBasis::pauli());
    PulseScheme::new(vec![T::one() / T::from_usize_lossy(cols); cols], pulses, vec![basis; st.qubits()], T::one())
}
