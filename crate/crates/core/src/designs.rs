//! Orthogonal arrays of strength two and difference schemes over Z_u.
//!
//! An orthogonal array here is an `n × N` matrix over the alphabet `1..=s`:
//! rows are network nodes, columns are time intervals, and every ordered pair
//! of symbols occurs exactly `λ = N / s²` times in the columns of any two rows.
//! A difference scheme is an `n × N` matrix over `Z_u` in which the difference
//! of any two rows hits every residue `N / u` times.

use std::collections::HashSet;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{self, FieldSpec};

pub const MAX_RAO_HAMMING_COLUMNS: u64 = 100_000;
pub const MAX_PRODUCT_COLUMNS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalArray {
    s: u32,
    entries: Array2<u32>,
}

/// A located defect found by [`verify_oa`] or [`verify_difference_scheme`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Column count not a multiple of the required block size.
    ColumnCount { columns: usize, divisor: u64 },
    /// Entry outside the alphabet.
    OutOfRange { row: usize, column: usize, value: u32 },
    /// A symbol pair (or a difference) occurs with the wrong frequency in a row pair.
    PairCount { rows: (usize, usize), symbols: (u32, u32), count: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DesignReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl DesignReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self { ok: violations.is_empty(), violations }
    }
}

impl OrthogonalArray {
    /// Wraps an entry matrix over `1..=s`. The strength-two property is not
    /// checked here; see [`verify_oa`].
    pub fn from_entries(entries: Array2<u32>, s: u32) -> Result<Self> {
        if s < 2 {
            return Err(Error::InvalidParameter(format!("alphabet size {s} < 2")));
        }
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidParameter("empty array".into()));
        }
        Ok(Self { s, entries })
    }

    /// Number of rows (nodes).
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of columns (time intervals).
    pub fn columns(&self) -> usize {
        self.entries.ncols()
    }

    pub fn levels(&self) -> u32 {
        self.s
    }

    /// `N / s²`.
    pub fn index(&self) -> usize {
        self.columns() / (self.s as usize * self.s as usize)
    }

    pub fn entries(&self) -> &Array2<u32> {
        &self.entries
    }

    pub fn entry(&self, row: usize, column: usize) -> u32 {
        self.entries[[row, column]]
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let entries = Array2::from_shape_fn((rows.len(), self.columns()), |(r, c)| self.entries[[rows[r], c]]);
        Self { s: self.s, entries }
    }

    pub fn first_rows(&self, n: usize) -> Self {
        self.select_rows(&(0..n.min(self.rows())).collect::<Vec<_>>())
    }

    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let entries = Array2::from_shape_fn(self.entries.dim(), |(r, c)| self.entries[[r, perm[c]]]);
        Self { s: self.s, entries }
    }

    /// Removes one column (the result is generally not an orthogonal array).
    pub fn without_column(&self, column: usize) -> Array2<u32> {
        let keep: Vec<usize> = (0..self.columns()).filter(|&c| c != column).collect();
        Array2::from_shape_fn((self.rows(), keep.len()), |(r, c)| self.entries[[r, keep[c]]])
    }

    pub fn set_entry(&mut self, row: usize, column: usize, value: u32) {
        self.entries[[row, column]] = value;
    }
}

/// The linear inner-product array over GF(s): rows are the projectively
/// normalized nonzero vectors `v` of GF(s)^i (first nonzero coordinate 1),
/// columns are all `x` in GF(s)^i, and the entry is `1 + <v, x>` with field
/// elements numbered as in [`FieldSpec::enumerate`]. Vectors are enumerated
/// with the first coordinate most significant.
///
/// Produces `n = (s^i - 1)/(s - 1)` rows, `N = s^i` columns and `λ = s^{i-2}`.
pub fn rao_hamming_oa(s: u64, i: u32) -> Result<OrthogonalArray> {
    if i < 2 {
        return Err(Error::InvalidParameter(format!("exponent i = {i} must be at least 2")));
    }
    let field = FieldSpec::of_order(s)?;
    let columns = s
        .checked_pow(i)
        .filter(|&c| c <= MAX_RAO_HAMMING_COLUMNS)
        .ok_or_else(|| Error::Overflow(format!("{s}^{i} columns exceed {MAX_RAO_HAMMING_COLUMNS}")))?
        as usize;
    let dim = i as usize;
    let vectors: Vec<Vec<u32>> = (0..columns).map(|x| base_digits(x, s as usize, dim)).collect();
    let rows: Vec<&Vec<u32>> = vectors.iter().filter(|v| v.iter().find(|&&c| c != 0) == Some(&1)).collect();
    let entries = Array2::from_shape_fn((rows.len(), columns), |(r, c)| {
        let dot = rows[r].iter().zip(&vectors[c]).fold(0, |acc, (&a, &b)| field.add(acc, field.mul(a, b)));
        dot + 1
    });
    OrthogonalArray::from_entries(entries, s as u32)
}

/// Projectively normalized nonzero vectors of GF(q)^dim in enumeration order.
pub(crate) fn projective_points(q: usize, dim: usize) -> Vec<Vec<u32>> {
    (0..q.pow(dim as u32)).map(|x| base_digits(x, q, dim)).filter(|v| v.iter().find(|&&c| c != 0) == Some(&1)).collect()
}

/// Digits of `x` in base `b`, most significant first.
fn base_digits(mut x: usize, b: usize, len: usize) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for slot in out.iter_mut().rev() {
        *slot = (x % b) as u32;
        x /= b;
    }
    out
}

/// All `s^n` tuples as columns (row 0 varies slowest).
pub fn product_oa(n: usize, s: u32) -> Result<OrthogonalArray> {
    if n == 0 {
        return Err(Error::InvalidParameter("at least one row required".into()));
    }
    let columns = product_columns(&vec![s; n])?;
    let entries = Array2::from_shape_fn((n, columns), |(r, c)| {
        let digits = base_digits(c, s as usize, n);
        digits[r] + 1
    });
    OrthogonalArray::from_entries(entries, s)
}

fn product_columns(levels: &[u32]) -> Result<usize> {
    levels
        .iter()
        .try_fold(1u64, |acc, &s| acc.checked_mul(s as u64))
        .filter(|&c| c <= MAX_PRODUCT_COLUMNS)
        .map(|c| c as usize)
        .ok_or_else(|| Error::Overflow(format!("product array over {levels:?} exceeds {MAX_PRODUCT_COLUMNS} columns")))
}

/// Smallest linear array with at least `n` rows (first `n` rows kept), or the
/// product array when `s` is not a prime power.
pub fn smallest_oa_for(n: usize, s: u32) -> Result<OrthogonalArray> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 nodes, got {n}")));
    }
    if gf::prime_power(s as u64).is_none() {
        return product_oa(n, s);
    }
    let s64 = s as u64;
    let mut i = 2u32;
    loop {
        let rows = (s64.pow(i) - 1) / (s64 - 1);
        if rows >= n as u64 {
            return Ok(rao_hamming_oa(s64, i)?.first_rows(n));
        }
        i += 1;
        if s64.checked_pow(i).is_none_or(|c| c > MAX_RAO_HAMMING_COLUMNS) {
            return Err(Error::Overflow(format!("no linear array with {n} rows over {s} symbols within limits")));
        }
    }
}

/// Exhaustive pair-count check over all row pairs.
pub fn verify_oa(oa: &OrthogonalArray) -> DesignReport {
    let s = oa.s as usize;
    let block = (s * s) as u64;
    let mut violations = Vec::new();
    if oa.rows() > 1 && !(oa.columns() as u64).is_multiple_of(block) {
        violations.push(Violation::ColumnCount { columns: oa.columns(), divisor: block });
    }
    for ((r, c), &v) in oa.entries.indexed_iter() {
        if v == 0 || v > oa.s {
            violations.push(Violation::OutOfRange { row: r, column: c, value: v });
        }
    }
    if !violations.is_empty() {
        return DesignReport::from_violations(violations);
    }
    let expected = oa.index();
    let pairs: Vec<(usize, usize)> = (0..oa.rows()).flat_map(|k| ((k + 1)..oa.rows()).map(move |l| (k, l))).collect();
    let found: Vec<Violation> = pairs
        .par_iter()
        .flat_map_iter(|&(k, l)| {
            let mut counts = vec![0usize; s * s];
            for c in 0..oa.columns() {
                let a = oa.entries[[k, c]] as usize - 1;
                let b = oa.entries[[l, c]] as usize - 1;
                counts[a * s + b] += 1;
            }
            counts
                .into_iter()
                .enumerate()
                .filter(move |&(_, n)| n != expected)
                .map(move |(ab, count)| Violation::PairCount {
                    rows: (k, l),
                    symbols: ((ab / s) as u32 + 1, (ab % s) as u32 + 1),
                    count,
                    expected,
                })
                .collect::<Vec<_>>()
        })
        .collect();
    DesignReport::from_violations(found)
}

/// A finite group on the labels `1..=order`, given by its Cayley table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    identity: u32,
    /// `table[a-1][b-1] = a·b`.
    table: Vec<Vec<u32>>,
}

impl FiniteGroup {
    /// Validates closure, identity, inverses and associativity.
    pub fn from_table(table: Vec<Vec<u32>>, identity: u32) -> Result<Self> {
        let order = table.len();
        if order == 0 || table.iter().any(|r| r.len() != order) {
            return Err(Error::InvalidGroup("table must be square and non-empty".into()));
        }
        let in_range = |x: u32| x >= 1 && x as usize <= order;
        if !in_range(identity) || table.iter().flatten().any(|&x| !in_range(x)) {
            return Err(Error::InvalidGroup("labels must lie in 1..=order".into()));
        }
        let g = Self { identity, table };
        for a in 1..=order as u32 {
            if g.mul(g.identity, a) != a || g.mul(a, g.identity) != a {
                return Err(Error::InvalidGroup(format!("{identity} is not an identity")));
            }
            let row: HashSet<u32> = g.table[a as usize - 1].iter().copied().collect();
            if row.len() != order {
                return Err(Error::InvalidGroup(format!("row {a} is not a permutation")));
            }
            if !(1..=order as u32).any(|b| g.mul(a, b) == g.identity) {
                return Err(Error::InvalidGroup(format!("{a} has no inverse")));
            }
        }
        for a in 1..=order as u32 {
            for b in 1..=order as u32 {
                for c in 1..=order as u32 {
                    if g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)) {
                        return Err(Error::InvalidGroup("not associative".into()));
                    }
                }
            }
        }
        Ok(g)
    }

    /// `Z_d × Z_d` with label `1 + a·d + b` for `(a, b)`; label 1 is `(0, 0)`.
    pub fn zd_squared(d: u32) -> Self {
        Self::from_pairs(d, &(0..d * d).map(|i| (i / d, i % d)).collect::<Vec<_>>())
    }

    /// `Z_d × Z_d` with an explicit labeling: label `i + 1` is `pairs[i]`.
    pub(crate) fn from_pairs(d: u32, pairs: &[(u32, u32)]) -> Self {
        let order = pairs.len();
        let lookup = |p: (u32, u32)| pairs.iter().position(|&q| q == p).expect("bijective labels") as u32 + 1;
        let table = (0..order)
            .map(|i| {
                (0..order).map(|j| lookup(((pairs[i].0 + pairs[j].0) % d, (pairs[i].1 + pairs[j].1) % d))).collect()
            })
            .collect();
        Self { identity: lookup((0, 0)), table }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize - 1][b as usize - 1]
    }

    pub fn inverse(&self, a: u32) -> u32 {
        (1..=self.order() as u32).find(|&b| self.mul(a, b) == self.identity).expect("validated group")
    }
}

/// Left-multiplies every row by the inverse of its first entry so the first
/// column becomes the group identity.
pub fn normalize_oa(oa: &OrthogonalArray, group: &FiniteGroup) -> Result<OrthogonalArray> {
    if group.order() != oa.s as usize {
        return Err(Error::InvalidGroup(format!("group order {} differs from alphabet size {}", group.order(), oa.s)));
    }
    let mut entries = oa.entries.clone();
    for mut row in entries.rows_mut() {
        let g_inv = group.inverse(row[0]);
        row.mapv_inplace(|x| group.mul(g_inv, x));
    }
    OrthogonalArray::from_entries(entries, oa.s)
}

pub fn is_normal_form(oa: &OrthogonalArray, group: &FiniteGroup) -> bool {
    oa.entries.column(0).iter().all(|&x| x == group.identity())
}

/// Product array with a separate alphabet per row (a mixed orthogonal array).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedArray {
    pub levels: Vec<u32>,
    pub entries: Array2<u32>,
}

pub fn product_mixed(levels: &[u32]) -> Result<MixedArray> {
    if levels.is_empty() || levels.iter().any(|&s| s < 2) {
        return Err(Error::InvalidParameter("every row needs an alphabet of size >= 2".into()));
    }
    let columns = product_columns(levels)?;
    let mut entries = Array2::zeros((levels.len(), columns));
    for c in 0..columns {
        let mut x = c;
        for r in (0..levels.len()).rev() {
            entries[[r, c]] = (x % levels[r] as usize) as u32 + 1;
            x /= levels[r] as usize;
        }
    }
    Ok(MixedArray { levels: levels.to_vec(), entries })
}

/// Every pair `(a, b) ∈ [1,s_k]×[1,s_l]` must occur `N/(s_k s_l)` times.
pub fn verify_mixed(array: &MixedArray) -> DesignReport {
    let n = array.levels.len();
    let columns = array.entries.ncols();
    let mut violations = Vec::new();
    for k in 0..n {
        for l in (k + 1)..n {
            let (sk, sl) = (array.levels[k] as usize, array.levels[l] as usize);
            if !columns.is_multiple_of(sk * sl) {
                violations.push(Violation::ColumnCount { columns, divisor: (sk * sl) as u64 });
                continue;
            }
            let expected = columns / (sk * sl);
            let mut counts = vec![0usize; sk * sl];
            for c in 0..columns {
                let a = array.entries[[k, c]] as usize;
                let b = array.entries[[l, c]] as usize;
                if a == 0 || a > sk || b == 0 || b > sl {
                    violations.push(Violation::OutOfRange { row: k, column: c, value: a.max(b) as u32 });
                    continue;
                }
                counts[(a - 1) * sl + b - 1] += 1;
            }
            for (ab, &count) in counts.iter().enumerate() {
                if count != expected {
                    violations.push(Violation::PairCount {
                        rows: (k, l),
                        symbols: ((ab / sl) as u32 + 1, (ab % sl) as u32 + 1),
                        count,
                        expected,
                    });
                }
            }
        }
    }
    DesignReport::from_violations(violations)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceScheme {
    u: u32,
    entries: Array2<u32>,
}

impl DifferenceScheme {
    pub fn from_entries(entries: Array2<u32>, u: u32) -> Result<Self> {
        if u < 2 {
            return Err(Error::InvalidParameter(format!("group order u = {u} < 2")));
        }
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidParameter("empty array".into()));
        }
        Ok(Self { u, entries })
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn columns(&self) -> usize {
        self.entries.ncols()
    }

    pub fn modulus(&self) -> u32 {
        self.u
    }

    pub fn entries(&self) -> &Array2<u32> {
        &self.entries
    }

    pub fn entry(&self, row: usize, column: usize) -> u32 {
        self.entries[[row, column]]
    }

    pub fn set_entry(&mut self, row: usize, column: usize, value: u32) {
        self.entries[[row, column]] = value;
    }
}

/// Rows `0..n` of the multiplication table of `Z_u`: entry `(k, j) = k·j mod u`.
///
/// Rows `k` and `l` form a valid pair iff `k - l` is a unit mod `u`, so for
/// prime `u` any `n <= u` works; for composite `u` the row count is limited to
/// the smallest prime factor of `u`.
pub fn cyclic_difference_scheme(u: u32, n: usize) -> Result<DifferenceScheme> {
    if u < 2 {
        return Err(Error::InvalidParameter(format!("group order u = {u} < 2")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("at least one row required".into()));
    }
    let max_rows = gf::smallest_prime_factor(u as u64) as usize;
    if n > max_rows {
        return Err(if gf::is_prime(u as u64) {
            Error::InvalidParameter(format!("n = {n} exceeds u = {u}"))
        } else {
            Error::Unsupported(format!("composite u = {u} supports at most {max_rows} rows in the cyclic construction"))
        });
    }
    let entries = Array2::from_shape_fn((n, u as usize), |(k, j)| ((k * j) % u as usize) as u32);
    DifferenceScheme::from_entries(entries, u)
}

/// Exhaustive difference-count check over all row pairs.
pub fn verify_difference_scheme(ds: &DifferenceScheme) -> DesignReport {
    let u = ds.u as usize;
    let mut violations = Vec::new();
    if !ds.columns().is_multiple_of(u) {
        violations.push(Violation::ColumnCount { columns: ds.columns(), divisor: u as u64 });
    }
    for ((r, c), &v) in ds.entries.indexed_iter() {
        if v as usize >= u {
            violations.push(Violation::OutOfRange { row: r, column: c, value: v });
        }
    }
    if !violations.is_empty() {
        return DesignReport::from_violations(violations);
    }
    let expected = ds.columns() / u;
    for k in 0..ds.rows() {
        for l in (k + 1)..ds.rows() {
            let mut counts = vec![0usize; u];
            for c in 0..ds.columns() {
                let diff = (ds.entries[[k, c]] as usize + u - ds.entries[[l, c]] as usize) % u;
                counts[diff] += 1;
            }
            for (g, &count) in counts.iter().enumerate() {
                if count != expected {
                    // the symbol pair records (difference, 0)
                    violations.push(Violation::PairCount { rows: (k, l), symbols: (g as u32, 0), count, expected });
                }
            }
        }
    }
    DesignReport::from_violations(violations)
}

/// JSON document for either kind of design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub kind: DesignKind,
    pub n: usize,
    #[serde(rename = "N")]
    pub columns: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub u: Option<u32>,
    pub lambda: usize,
    pub entries: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Oa,
    Ds,
}

fn rows_of(a: &Array2<u32>) -> Vec<Vec<u32>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn matrix_from_rows(rows: &[Vec<u32>], n: usize, columns: usize) -> Result<Array2<u32>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != columns) {
        return Err(Error::DimensionMismatch(format!("entries are not {n}×{columns}")));
    }
    Ok(Array2::from_shape_fn((n, columns), |(r, c)| rows[r][c]))
}

impl From<&OrthogonalArray> for DesignFile {
    fn from(oa: &OrthogonalArray) -> Self {
        Self {
            kind: DesignKind::Oa,
            n: oa.rows(),
            columns: oa.columns(),
            s: Some(oa.s),
            u: None,
            lambda: oa.index(),
            entries: rows_of(&oa.entries),
        }
    }
}

impl From<&DifferenceScheme> for DesignFile {
    fn from(ds: &DifferenceScheme) -> Self {
        Self {
            kind: DesignKind::Ds,
            n: ds.rows(),
            columns: ds.columns(),
            s: None,
            u: Some(ds.u),
            lambda: ds.columns() / ds.u as usize,
            entries: rows_of(&ds.entries),
        }
    }
}

impl DesignFile {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_orthogonal_array(&self) -> Result<OrthogonalArray> {
        let s = match (self.kind, self.s) {
            (DesignKind::Oa, Some(s)) => s,
            _ => return Err(Error::InvalidParameter("not an orthogonal array document".into())),
        };
        OrthogonalArray::from_entries(matrix_from_rows(&self.entries, self.n, self.columns)?, s)
    }

    pub fn to_difference_scheme(&self) -> Result<DifferenceScheme> {
        let u = match (self.kind, self.u) {
            (DesignKind::Ds, Some(u)) => u,
            _ => return Err(Error::InvalidParameter("not a difference scheme document".into())),
        };
        DifferenceScheme::from_entries(matrix_from_rows(&self.entries, self.n, self.columns)?, u)
    }
}

/// Writes an integer matrix as CSV, one row per line.
pub fn matrix_to_csv<V: ToString + Copy>(a: &Array2<V>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in a.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: counts every ordered pair directly with a hash map.
    fn pair_counts_uniform(a: &Array2<u32>, s: u32) -> bool {
        let n = a.nrows();
        let lambda = a.ncols() / (s * s) as usize;
        for k in 0..n {
            for l in 0..n {
                if k == l {
                    continue;
                }
                let mut map = std::collections::HashMap::new();
                for c in 0..a.ncols() {
                    *map.entry((a[[k, c]], a[[l, c]])).or_insert(0usize) += 1;
                }
                if map.len() != (s * s) as usize || map.values().any(|&v| v != lambda) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn rao_hamming_small_cases() {
        let oa = rao_hamming_oa(2, 2).unwrap();
        assert_eq!((oa.rows(), oa.columns(), oa.index()), (3, 4, 1));
        assert!(verify_oa(&oa).ok);
        assert!(pair_counts_uniform(oa.entries(), 2));

        let oa = rao_hamming_oa(4, 2).unwrap();
        assert_eq!((oa.rows(), oa.columns(), oa.index()), (5, 16, 1));
        assert!(verify_oa(&oa).ok);
        assert!(pair_counts_uniform(oa.entries(), 4));

        let oa = rao_hamming_oa(9, 2).unwrap();
        assert_eq!((oa.rows(), oa.columns()), (10, 81));
        assert!(verify_oa(&oa).ok);
    }

    #[test]
    fn rao_hamming_all_small_prime_powers() {
        for s in [2u64, 3, 4, 5, 7, 8, 9] {
            let oa = rao_hamming_oa(s, 2).unwrap();
            assert_eq!(oa.index(), 1);
            assert_eq!(oa.columns() as u64, s * s);
            assert_eq!(oa.rows() as u64, s + 1);
            assert!(verify_oa(&oa).ok, "s = {s}");
        }
        let oa = rao_hamming_oa(4, 3).unwrap();
        assert_eq!((oa.rows(), oa.columns(), oa.index()), (21, 64, 4));
        assert!(verify_oa(&oa).ok);
    }

    #[test]
    fn rao_hamming_rejects_non_prime_power() {
        assert!(matches!(rao_hamming_oa(6, 2), Err(Error::NotPrimePower(6))));
        assert!(matches!(rao_hamming_oa(10, 5), Err(Error::NotPrimePower(10))));
        assert!(matches!(rao_hamming_oa(7, 7), Err(Error::Overflow(_))));
    }

    #[test]
    fn product_arrays() {
        let oa = product_oa(2, 4).unwrap();
        assert_eq!((oa.columns(), oa.index()), (16, 1));
        assert!(verify_oa(&oa).ok);
        // first row varies slowest
        assert_eq!(oa.entries().row(0).to_vec()[..5], [1, 1, 1, 1, 2]);
        assert_eq!(oa.entries().row(1).to_vec()[..5], [1, 2, 3, 4, 1]);

        let oa = product_oa(4, 9).unwrap();
        assert_eq!(oa.columns(), 6561);
        assert!(verify_oa(&oa).ok);

        let oa = product_oa(3, 4).unwrap();
        assert_eq!((oa.columns(), oa.index()), (64, 4));
        assert!(pair_counts_uniform(oa.entries(), 4));

        assert!(matches!(product_oa(7, 9), Err(Error::Overflow(_))));
    }

    #[test]
    fn smallest_oa_sizes() {
        assert_eq!(smallest_oa_for(4, 9).unwrap().columns(), 81);
        assert_eq!(smallest_oa_for(5, 4).unwrap().columns(), 16);
        let oa = smallest_oa_for(6, 4).unwrap();
        assert_eq!((oa.rows(), oa.columns()), (6, 64));
        assert!(verify_oa(&oa).ok);
        // alphabet 6 is not a prime power: exponential fallback
        let oa = smallest_oa_for(3, 6).unwrap();
        assert_eq!(oa.columns(), 216);
        assert!(verify_oa(&oa).ok);
        assert!(smallest_oa_for(1, 4).is_err());
    }

    #[test]
    fn verify_flags_mutation_and_single_row() {
        let mut oa = rao_hamming_oa(4, 2).unwrap();
        let old = oa.entry(2, 7);
        oa.set_entry(2, 7, old % 4 + 1);
        let report = verify_oa(&oa);
        assert!(!report.ok);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::PairCount { rows: (k, l), .. } if *k == 2 || *l == 2
        )));

        let single = product_oa(1, 4).unwrap();
        assert!(verify_oa(&single).ok);

        let mut bad = product_oa(2, 2).unwrap();
        bad.set_entry(0, 0, 9);
        assert!(matches!(verify_oa(&bad).violations[0], Violation::OutOfRange { value: 9, .. }));
    }

    #[test]
    fn normal_form() {
        let g = FiniteGroup::zd_squared(2);
        let oa = rao_hamming_oa(4, 2).unwrap();
        let shuffled = oa.permute_columns(&(0..16).rev().collect::<Vec<_>>());
        assert!(!is_normal_form(&shuffled, &g));
        let nf = normalize_oa(&shuffled, &g).unwrap();
        assert!(is_normal_form(&nf, &g));
        assert_eq!((nf.rows(), nf.columns(), nf.index()), (5, 16, 1));
        assert!(verify_oa(&nf).ok);

        // already normal: unchanged
        assert!(is_normal_form(&oa, &g));
        assert_eq!(normalize_oa(&oa, &g).unwrap(), oa);

        let two = product_oa(2, 4).unwrap().permute_columns(&[5, 0, 1, 2, 3, 4, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15]);
        let nf = normalize_oa(&two, &g).unwrap();
        assert_eq!(nf.entries().column(0).to_vec(), vec![1, 1]);
        assert!(verify_oa(&nf).ok);

        assert!(normalize_oa(&oa, &FiniteGroup::zd_squared(3)).is_err());
    }

    #[test]
    fn group_validation() {
        assert!(FiniteGroup::from_table(vec![vec![1, 2], vec![2, 1]], 1).is_ok());
        assert!(FiniteGroup::from_table(vec![vec![1, 2], vec![2, 2]], 1).is_err());
        assert!(FiniteGroup::from_table(vec![vec![1, 2], vec![2, 1]], 2).is_err());
        assert!(FiniteGroup::from_table(vec![vec![1, 3], vec![2, 1]], 1).is_err());
        let g = FiniteGroup::zd_squared(3);
        let table = (1..=9).map(|a| (1..=9).map(|b| g.mul(a, b)).collect()).collect();
        assert_eq!(FiniteGroup::from_table(table, 1).unwrap(), g);
    }

    #[test]
    fn mixed_product() {
        let m = product_mixed(&[4, 9, 4]).unwrap();
        assert_eq!(m.entries.ncols(), 144);
        assert!(verify_mixed(&m).ok);
        let mut bad = m.clone();
        bad.entries[[1, 3]] = bad.entries[[1, 3]] % 9 + 1;
        assert!(!verify_mixed(&bad).ok);
    }

    #[test]
    fn difference_schemes() {
        let ds = cyclic_difference_scheme(2, 2).unwrap();
        assert_eq!(ds.entries().row(0).to_vec(), vec![0, 0]);
        assert_eq!(ds.entries().row(1).to_vec(), vec![0, 1]);
        assert!(verify_difference_scheme(&ds).ok);

        let ds = cyclic_difference_scheme(5, 5).unwrap();
        assert!(verify_difference_scheme(&ds).ok);

        let ds = cyclic_difference_scheme(3, 2).unwrap();
        assert_eq!(ds.rows(), 2);
        assert!(verify_difference_scheme(&ds).ok);

        // composite modulus: limited to the smallest prime factor
        assert!(verify_difference_scheme(&cyclic_difference_scheme(15, 3).unwrap()).ok);
        assert!(matches!(cyclic_difference_scheme(15, 4), Err(Error::Unsupported(_))));
        assert!(matches!(cyclic_difference_scheme(5, 6), Err(Error::InvalidParameter(_))));

        let mut bad = cyclic_difference_scheme(5, 5).unwrap();
        bad.set_entry(3, 2, (bad.entry(3, 2) + 1) % 5);
        assert!(!verify_difference_scheme(&bad).ok);

        let single = cyclic_difference_scheme(7, 1).unwrap();
        assert!(verify_difference_scheme(&single).ok);
    }

    #[test]
    fn random_mutations_are_located() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = rao_hamming_oa(3, 2).unwrap();
        for _ in 0..20 {
            let mut oa = base.clone();
            let (r, c) = (rng.random_range(0..oa.rows()), rng.random_range(0..oa.columns()));
            let v = oa.entry(r, c);
            oa.set_entry(r, c, v % 3 + 1);
            let report = verify_oa(&oa);
            assert!(!report.ok);
            for v in &report.violations {
                match v {
                    Violation::PairCount { rows: (k, l), .. } => assert!(*k == r || *l == r),
                    other => panic!("unexpected {other:?}"),
                }
            }
        }
    }

    #[test]
    fn json_and_csv() {
        let oa = rao_hamming_oa(2, 2).unwrap();
        let file = DesignFile::from(&oa);
        let text = file.to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["kind"], "oa");
        assert_eq!(value["N"], 4);
        assert_eq!(value["s"], 2);
        assert!(value.get("u").is_none());
        let back = DesignFile::from_json(&text).unwrap().to_orthogonal_array().unwrap();
        assert_eq!(back, oa);
        assert!(DesignFile::from_json(&text).unwrap().to_difference_scheme().is_err());

        let ds = cyclic_difference_scheme(3, 3).unwrap();
        let text = DesignFile::from(&ds).to_json().unwrap();
        assert_eq!(DesignFile::from_json(&text).unwrap().to_difference_scheme().unwrap(), ds);

        let csv = matrix_to_csv(ds.entries()).unwrap();
        assert_eq!(csv, "0,0,0\n0,1,2\n0,2,1\n");
    }

    proptest! {
        #[test]
        fn row_deletion_and_column_permutation_preserve_oa(
            seed in 0u64..1000,
            drop in 0usize..5,
        ) {
            let oa = rao_hamming_oa(4, 2).unwrap();
            let keep: Vec<usize> = (0..5).filter(|&r| r != drop).collect();
            let smaller = oa.select_rows(&keep);
            prop_assert!(verify_oa(&smaller).ok);
            prop_assert_eq!(smaller.index(), oa.index());

            let mut perm: Vec<usize> = (0..16).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..16).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            prop_assert!(verify_oa(&oa.permute_columns(&perm)).ok);

            let ds = cyclic_difference_scheme(7, 7).unwrap();
            let perm7: Vec<usize> = perm.iter().copied().filter(|&p| p < 7).collect();
            let permuted = DifferenceScheme::from_entries(
                Array2::from_shape_fn((7, 7), |(r, c)| ds.entry(r, perm7[c])), 7).unwrap();
            prop_assert!(verify_difference_scheme(&permuted).ok);
        }
    }
}
