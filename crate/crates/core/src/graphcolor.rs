//! Interaction graphs, vertex and edge colorings, and the weighted chromatic index.

use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::designs;
use crate::error::{Error, Result};
use crate::error_basis::UnitaryErrorBasis;
use crate::scalar::Scalar;
use crate::scheme::PulseScheme;

/// Exact vertex coloring is used up to this many vertices.
pub const EXACT_VERTEX_LIMIT: usize = 12;
/// Exact edge coloring is used up to this many edges.
pub const EXACT_EDGE_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    n: usize,
    /// Sorted, `k < l`, no duplicates.
    edges: Vec<(usize, usize)>,
    weights: Vec<Option<f64>>,
}

impl InteractionGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::with_weights(n, edges.iter().map(|&(k, l)| (k, l, None)).collect())
    }

    pub fn with_weights(n: usize, edges: Vec<(usize, usize, Option<f64>)>) -> Result<Self> {
        let mut list: Vec<((usize, usize), Option<f64>)> = Vec::with_capacity(edges.len());
        for (k, l, w) in edges {
            if k == l {
                return Err(Error::InvalidParameter(format!("self-loop at {k}")));
            }
            if k >= n || l >= n {
                return Err(Error::InvalidParameter(format!("edge ({k}, {l}) out of range for {n} vertices")));
            }
            if let Some(w) = w {
                if w.is_nan() || w <= 0.0 {
                    return Err(Error::InvalidParameter(format!("weight {w} on ({k}, {l}) is not positive")));
                }
            }
            list.push(((k.min(l), k.max(l)), w));
        }
        list.sort_by_key(|a| a.0);
        list.dedup_by(|a, b| a.0 == b.0);
        Ok(Self { n, edges: list.iter().map(|e| e.0).collect(), weights: list.iter().map(|e| e.1).collect() })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|k| ((k + 1)..n).map(move |l| (k, l))).collect();
        Self::new(n, &edges).expect("valid complete graph")
    }

    /// Edges `{k, l}` with `|t_kl| > threshold`.
    pub fn from_support(t: &Array2<f64>, threshold: f64) -> Result<Self> {
        let n = t.nrows();
        let edges: Vec<_> = (0..n)
            .flat_map(|k| ((k + 1)..n).map(move |l| (k, l)))
            .filter(|&(k, l)| t[[k, l]].abs() > threshold)
            .collect();
        Self::new(n, &edges)
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[Option<f64>] {
        &self.weights
    }

    pub fn has_edge(&self, k: usize, l: usize) -> bool {
        self.edges.binary_search(&(k.min(l), k.max(l))).is_ok()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(k, l) in &self.edges {
            adj[k].push(l);
            adj[l].push(k);
        }
        adj
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Result<String> {
        let edges = self
            .edges
            .iter()
            .zip(&self.weights)
            .map(|(&(k, l), w)| match w {
                Some(w) => EdgeEntry::Weighted(k, l, *w),
                None => EdgeEntry::Plain(k, l),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&GraphFile { n: self.n, edges })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(text)?;
        Self::with_weights(
            f.n,
            f.edges
                .into_iter()
                .map(|e| match e {
                    EdgeEntry::Plain(k, l) => (k, l, None),
                    EdgeEntry::Weighted(k, l, w) => (k, l, Some(w)),
                })
                .collect(),
        )
    }
}

/// Graph JSON: `{ "n", "edges": [[k, l], [k, l, weight], ..] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeEntry {
    Weighted(usize, usize, f64),
    Plain(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coloring {
    /// Color per vertex (or per edge, in [`InteractionGraph::edges`] order).
    pub colors: Vec<usize>,
    pub count: usize,
    /// False when a heuristic produced the coloring (the count is then an upper bound).
    pub exact: bool,
}

pub fn is_proper_vertex_coloring(g: &InteractionGraph, colors: &[usize]) -> bool {
    colors.len() == g.n && g.edges.iter().all(|&(k, l)| colors[k] != colors[l])
}

pub fn is_proper_edge_coloring(g: &InteractionGraph, colors: &[usize]) -> bool {
    if colors.len() != g.edges.len() {
        return false;
    }
    let mut seen = std::collections::HashSet::new();
    g.edges.iter().zip(colors).all(|(&(k, l), &c)| seen.insert((k, c)) && seen.insert((l, c)))
}

fn greedy_vertex(g: &InteractionGraph, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(adj[v].len()));
    let mut colors = vec![usize::MAX; g.n];
    for v in order {
        let mut c = 0;
        while adj[v].iter().any(|&w| colors[w] == c) {
            c += 1;
        }
        colors[v] = c;
    }
    colors
}

fn color_count(colors: &[usize]) -> usize {
    colors.iter().max().map_or(0, |&m| m + 1)
}

/// Backtracking search for a proper coloring with at most `k` colors.
fn vertex_colorable(
    adj: &[Vec<usize>],
    order: &[usize],
    k: usize,
    colors: &mut [usize],
    at: usize,
    used: usize,
) -> bool {
    if at == order.len() {
        return true;
    }
    let v = order[at];
    // a fresh color is tried only once (colors are interchangeable)
    for c in 0..k.min(used + 1) {
        if adj[v].iter().all(|&w| colors[w] != c) {
            colors[v] = c;
            if vertex_colorable(adj, order, k, colors, at + 1, used.max(c + 1)) {
                return true;
            }
            colors[v] = usize::MAX;
        }
    }
    false
}

/// Proper vertex coloring; optimal up to [`EXACT_VERTEX_LIMIT`] vertices,
/// largest-degree-first greedy beyond.
pub fn vertex_coloring(g: &InteractionGraph) -> Coloring {
    let adj = g.adjacency();
    let greedy = greedy_vertex(g, &adj);
    let upper = color_count(&greedy);
    if g.n > EXACT_VERTEX_LIMIT {
        return Coloring { colors: greedy, count: upper, exact: false };
    }
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(adj[v].len()));
    let lower = if g.edges.is_empty() { 1.min(g.n) } else { 2 };
    for k in lower..upper {
        let mut colors = vec![usize::MAX; g.n];
        if vertex_colorable(&adj, &order, k, &mut colors, 0, 0) {
            return Coloring { colors, count: k, exact: true };
        }
    }
    Coloring { colors: greedy, count: upper, exact: true }
}

/// Decoupling for networks whose couplings lie on the edges of `g`: one
/// orthogonal-array row per vertex color, shared by all vertices of that color.
pub fn colored_decoupling_scheme<T: Scalar>(g: &InteractionGraph, d: usize) -> Result<PulseScheme<T>> {
    if g.n == 0 {
        return Err(Error::InvalidParameter("graph has no vertices".into()));
    }
    let coloring = vertex_coloring(g);
    let s = u32::try_from(d * d).map_err(|_| Error::Overflow(format!("d = {d}")))?;
    let oa = designs::smallest_oa_for(coloring.count.max(2), s)?;
    let entries = Array2::from_shape_fn((g.n, oa.columns()), |(v, j)| oa.entry(coloring.colors[v], j));
    let basis = Arc::new(UnitaryErrorBasis::generalized_pauli(d)?);
    PulseScheme::from_design(&entries, vec![basis; g.n], T::one())
}

fn edge_colorable(edges: &[(usize, usize)], k: usize, colors: &mut [usize], at: usize, used: usize) -> bool {
    if at == edges.len() {
        return true;
    }
    let (a, b) = edges[at];
    for c in 0..k.min(used + 1) {
        let clash = edges[..at]
            .iter()
            .zip(colors.iter())
            .any(|(&(x, y), &cc)| cc == c && (x == a || x == b || y == a || y == b));
        if !clash {
            colors[at] = c;
            if edge_colorable(edges, k, colors, at + 1, used.max(c + 1)) {
                return true;
            }
        }
    }
    false
}

/// Proper edge coloring with `Δ` or `Δ + 1` colors: exact search up to
/// [`EXACT_EDGE_LIMIT`] edges, Misra–Gries beyond.
pub fn edge_coloring(g: &InteractionGraph) -> Coloring {
    let delta = g.max_degree();
    if g.edges.is_empty() {
        return Coloring { colors: Vec::new(), count: 0, exact: true };
    }
    if g.edges.len() <= EXACT_EDGE_LIMIT {
        let mut colors = vec![usize::MAX; g.edges.len()];
        if edge_colorable(&g.edges, delta, &mut colors, 0, 0) {
            return Coloring { colors, count: delta, exact: true };
        }
        let mut colors = vec![usize::MAX; g.edges.len()];
        assert!(edge_colorable(&g.edges, delta + 1, &mut colors, 0, 0), "Vizing bound");
        return Coloring { count: color_count(&colors), colors, exact: true };
    }
    let colors = misra_gries(g, delta);
    let count = color_count(&colors);
    Coloring { colors, count, exact: count == delta }
}

/// Misra–Gries edge coloring with at most `Δ + 1` colors.
fn misra_gries(g: &InteractionGraph, delta: usize) -> Vec<usize> {
    let n = g.n;
    let palette = delta + 1;
    let adj = g.adjacency();
    let mut col: Vec<Vec<Option<usize>>> = vec![vec![None; n]; n];
    let is_free = |col: &Vec<Vec<Option<usize>>>, x: usize, c: usize| adj[x].iter().all(|&y| col[x][y] != Some(c));
    let free_color =
        |col: &Vec<Vec<Option<usize>>>, x: usize| (0..palette).find(|&c| is_free(col, x, c)).expect("Δ+1 colors");

    for &(u, v) in &g.edges {
        // maximal fan of u starting at v
        let mut fan = vec![v];
        loop {
            let last = *fan.last().expect("non-empty");
            let next = adj[u]
                .iter()
                .copied()
                .find(|&w| !fan.contains(&w) && col[u][w].is_some_and(|c| is_free(&col, last, c)));
            match next {
                Some(w) => fan.push(w),
                None => break,
            }
        }
        let c = free_color(&col, u);
        let d = free_color(&col, *fan.last().expect("non-empty"));

        // invert the cd-path from u (it starts with a d edge since c is free on u)
        if c != d {
            let mut path = Vec::new();
            let (mut x, mut want) = (u, d);
            let mut prev = usize::MAX;
            while let Some(&y) = adj[x].iter().find(|&&y| y != prev && col[x][y] == Some(want)) {
                path.push((x, y));
                prev = x;
                x = y;
                want = if want == d { c } else { d };
            }
            for &(x, y) in &path {
                let swapped = if col[x][y] == Some(c) { d } else { c };
                col[x][y] = Some(swapped);
                col[y][x] = Some(swapped);
            }
        }

        // first w in the fan such that fan[..=w] is still a fan and d is free on w
        let mut end = 0;
        for i in 0..fan.len() {
            let prefix_ok = (1..=i).all(|j| col[u][fan[j]].is_some_and(|cc| is_free(&col, fan[j - 1], cc)));
            if !prefix_ok {
                break;
            }
            if is_free(&col, fan[i], d) {
                end = i;
                break;
            }
        }
        // rotate the fan prefix
        for j in 0..end {
            let cc = col[u][fan[j + 1]];
            col[u][fan[j]] = cc;
            col[fan[j]][u] = cc;
        }
        let w = fan[end];
        col[u][w] = Some(d);
        col[w][u] = Some(d);
    }
    g.edges.iter().map(|&(k, l)| col[k][l].expect("all edges colored")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedIndex<T> {
    pub value: T,
    /// False when some level used the heuristic coloring.
    pub exact: bool,
}

/// `W_T = ∫_0^∞ χ'(G_s) ds` with `G_s = {kl : |T_kl| > s}`, evaluated exactly
/// as a sum over the distinct thresholds.
pub fn weighted_chromatic_index<T: Scalar>(t: &Array2<T>) -> Result<WeightedIndex<T>> {
    let n = t.nrows();
    if t.ncols() != n {
        return Err(Error::InvalidParameter("T must be square".into()));
    }
    let abs = t.mapv(|x| x.abs().as_f64());
    let mut levels: Vec<f64> =
        (0..n).flat_map(|k| ((k + 1)..n).map(move |l| (k, l))).map(|(k, l)| abs[[k, l]]).filter(|&x| x > 0.0).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    levels.dedup();
    let mut value = T::zero();
    let mut exact = true;
    let mut below = 0.0;
    for &level in &levels {
        // on [below, level) the graph holds every edge with |T| >= level
        let g = InteractionGraph::from_support(&abs, below)?;
        let coloring = edge_coloring(&g);
        exact &= coloring.exact;
        value = value + T::lit(level - below) * T::from_usize_lossy(coloring.count);
        below = level;
    }
    Ok(WeightedIndex { value, exact })
}
