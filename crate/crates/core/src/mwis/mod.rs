//! Exact maximum-weight independent set solving.
//!
//! [`solve_exact`] applies forced bits, splits the rest into connected
//! components and solves each one with a frontier dynamic program in vertex-id
//! order. When the frontier grows past the configured limit, or the time
//! budget runs out, the component falls back to depth-first branch and bound,
//! which reports an anytime incumbent and drops the optimality claim if it
//! cannot finish. Among optimal sets the lexicographically smallest bit vector
//! is returned.

mod bnb;
mod brute;
mod dp;

pub use brute::{brute_force, BRUTE_LIMIT};

use num_rational::Rational64;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Errors from graph construction and solving.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MwisError {
    #[error("vertex {0} has non-positive weight")]
    NonPositiveWeight(usize),
    #[error("edge ({0}, {1}) references a missing vertex")]
    MissingVertex(usize, usize),
    #[error("self-edge on vertex {0}")]
    SelfEdge(usize),
    #[error("forced vertices {0} and {1} are adjacent and both active")]
    InconsistentForcing(usize, usize),
    #[error("vertex {0} is forced twice with different values")]
    ForcedTwice(usize),
    #[error("graph has {n} vertices, the oracle limit is {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("configuration has length {got}, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Undirected graph with positive rational vertex weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    weights: Vec<Rational64>,
    adj: Vec<Vec<usize>>,
}

impl WeightedGraph {
    /// Builds a graph; duplicate edges are merged.
    pub fn new(weights: Vec<Rational64>, edges: &[(usize, usize)]) -> Result<Self, MwisError> {
        let n = weights.len();
        if let Some(v) = weights.iter().position(|w| !w.is_positive()) {
            return Err(MwisError::NonPositiveWeight(v));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(MwisError::MissingVertex(a, b));
            }
            if a == b {
                return Err(MwisError::SelfEdge(a));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        Ok(Self { weights, adj })
    }

    /// Integer-weighted graph. Panics on invalid input.
    pub fn from_integer(weights: &[i64], edges: &[(usize, usize)]) -> Self {
        Self::new(weights.iter().map(|&w| Rational64::from_integer(w)).collect(), edges)
            .expect("valid integer graph")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, v: usize) -> Rational64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[Rational64] {
        &self.weights
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Edges with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, l) in self.adj.iter().enumerate() {
            out.extend(l.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_independent(&self, config: &[bool]) -> bool {
        config.len() == self.len()
            && (0..self.len()).all(|v| !config[v] || self.adj[v].iter().all(|&u| !config[u]))
    }

    pub fn total(&self, config: &[bool]) -> Rational64 {
        config
            .iter()
            .zip(&self.weights)
            .filter(|(b, _)| **b)
            .map(|(_, w)| *w)
            .sum()
    }

    fn scaled_weights(&self) -> (Vec<i64>, i64) {
        let scale = self
            .weights
            .iter()
            .fold(1i64, |acc, w| num_integer::lcm(acc, *w.denom()));
        let ws = self.weights.iter().map(|w| (w * scale).to_integer()).collect();
        (ws, scale)
    }

    /// Interchange text: `id weight` lines, a blank line, then `id id` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, w) in self.weights.iter().enumerate() {
            let _ = writeln!(s, "{i} {w}");
        }
        s.push('\n');
        for (a, b) in self.edges() {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }

    /// Parses [`WeightedGraph::to_text`] output. Lines starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self, MwisError> {
        let mut weights = Vec::new();
        let mut edges = Vec::new();
        let mut in_edges = false;
        for (k, line) in text.lines().enumerate() {
            let err = |m: &str| MwisError::Parse {
                line: k + 1,
                message: m.to_string(),
            };
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            if line.is_empty() {
                in_edges = !weights.is_empty() || in_edges;
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(err("expected two fields"));
            }
            let a: usize = toks[0].parse().map_err(|_| err("bad vertex id"))?;
            if in_edges {
                let b: usize = toks[1].parse().map_err(|_| err("bad vertex id"))?;
                edges.push((a, b));
            } else {
                if a != weights.len() {
                    return Err(err("vertex ids must be consecutive from 0"));
                }
                let w: Rational64 = toks[1].parse().map_err(|_| err("bad weight"))?;
                weights.push(w);
            }
        }
        Self::new(weights, &edges)
    }
}

/// Which engine settled a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Trivial,
    BruteForce,
    FrontierDp,
    BranchAndBound,
    Mixed,
}

/// Optimality evidence attached to a solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub proved_optimal: bool,
    pub method: Method,
    /// Weight of the returned set.
    pub lower_bound: Rational64,
    /// Proven upper bound on the optimum.
    pub upper_bound: Rational64,
    pub components: usize,
}

/// An independent set with its weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MwisSolution {
    /// Selected vertex ids, ascending.
    pub selected: Vec<usize>,
    pub total_weight: Rational64,
    pub certificate: Certificate,
}

impl MwisSolution {
    pub fn bits(&self, n: usize) -> Vec<bool> {
        let mut b = vec![false; n];
        for &v in &self.selected {
            b[v] = true;
        }
        b
    }

    pub fn contains(&self, v: usize) -> bool {
        self.selected.binary_search(&v).is_ok()
    }
}

/// Solver controls.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Vertex bits fixed before solving.
    pub forced: Vec<(usize, bool)>,
    /// Wall-clock budget for the whole solve; `None` is unlimited.
    pub budget: Option<Duration>,
    /// Largest frontier table the dynamic program may build.
    pub state_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            forced: Vec::new(),
            budget: Some(Duration::from_secs(600)),
            state_limit: 1 << 23,
        }
    }
}

impl SolveOptions {
    pub fn forcing(forced: Vec<(usize, bool)>) -> Self {
        Self {
            forced,
            ..Self::default()
        }
    }
}

/// Maximum-weight independent set extending `opts.forced`.
pub fn solve_exact(g: &WeightedGraph, opts: &SolveOptions) -> Result<MwisSolution, MwisError> {
    let start = Instant::now();
    let deadline = opts.budget.map(|b| start + b);
    let n = g.len();
    let mut fixed: Vec<Option<bool>> = vec![None; n];
    for &(v, b) in &opts.forced {
        if v >= n {
            return Err(MwisError::MissingVertex(v, v));
        }
        match fixed[v] {
            Some(old) if old != b => return Err(MwisError::ForcedTwice(v)),
            _ => fixed[v] = Some(b),
        }
    }
    for v in 0..n {
        if fixed[v] == Some(true) {
            if let Some(&u) = g.adj[v].iter().find(|&&u| fixed[u] == Some(true)) {
                return Err(MwisError::InconsistentForcing(v.min(u), v.max(u)));
            }
        }
    }
    let mut free = vec![true; n];
    let mut selected = vec![false; n];
    for v in 0..n {
        if let Some(b) = fixed[v] {
            free[v] = false;
            if b {
                selected[v] = true;
                for &u in &g.adj[v] {
                    free[u] = false;
                }
            }
        }
    }
    let (ws, scale) = g.scaled_weights();
    let mut proved = true;
    let mut upper = 0i64;
    let mut methods = Vec::new();
    let comps = components(g, &free);
    for comp in &comps {
        let local = local_graph(g, comp);
        let lw: Vec<i64> = comp.iter().map(|&v| ws[v]).collect();
        let res = solve_component(&local, &lw, deadline, opts.state_limit);
        for (k, &v) in comp.iter().enumerate() {
            selected[v] = res.bits[k];
        }
        proved &= res.proved;
        upper += res.upper;
        methods.push(res.method);
    }
    let forced_weight: i64 = (0..n).filter(|&v| fixed[v] == Some(true)).map(|v| ws[v]).sum();
    let total = g.total(&selected);
    let method = match methods.as_slice() {
        [] => Method::Trivial,
        [m, rest @ ..] if rest.iter().all(|x| x == m) => *m,
        _ => Method::Mixed,
    };
    Ok(MwisSolution {
        selected: (0..n).filter(|&v| selected[v]).collect(),
        total_weight: total,
        certificate: Certificate {
            proved_optimal: proved,
            method,
            lower_bound: total,
            upper_bound: Rational64::new(upper + forced_weight, scale),
            components: comps.len(),
        },
    })
}

struct ComponentResult {
    bits: Vec<bool>,
    upper: i64,
    proved: bool,
    method: Method,
}

fn solve_component(
    adj: &[Vec<usize>],
    w: &[i64],
    deadline: Option<Instant>,
    state_limit: usize,
) -> ComponentResult {
    if adj.len() == 1 {
        return ComponentResult {
            bits: vec![true],
            upper: w[0],
            proved: true,
            method: Method::Trivial,
        };
    }
    if let Some((value, bits)) = dp::solve(adj, w, deadline, state_limit) {
        return ComponentResult {
            bits,
            upper: value,
            proved: true,
            method: Method::FrontierDp,
        };
    }
    let r = bnb::solve(adj, w, deadline);
    ComponentResult {
        bits: r.bits,
        upper: r.upper,
        proved: r.complete,
        method: Method::BranchAndBound,
    }
}

/// Connected components of the free vertices, each ascending, ordered by smallest id.
fn components(g: &WeightedGraph, free: &[bool]) -> Vec<Vec<usize>> {
    let n = g.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if !free[s] || seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &u in &g.adj[v] {
                if free[u] && !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn local_graph(g: &WeightedGraph, comp: &[usize]) -> Vec<Vec<usize>> {
    comp.iter()
        .map(|&v| {
            g.adj[v]
                .iter()
                .filter_map(|u| comp.binary_search(u).ok())
                .collect()
        })
        .collect()
}

/// Ising-form energy `−Σ wᵢxᵢ + U·Σ_{(i,j)∈E} xᵢxⱼ`.
pub fn energy(g: &WeightedGraph, config: &[bool], u: Rational64) -> Result<Rational64, MwisError> {
    if config.len() != g.len() {
        return Err(MwisError::LengthMismatch {
            expected: g.len(),
            got: config.len(),
        });
    }
    let violations = g.edges().iter().filter(|(a, b)| config[*a] && config[*b]).count() as i64;
    Ok(-g.total(config) + u * Rational64::from_integer(violations))
}

/// Default penalty scale `U = 20δ`.
pub fn default_penalty() -> Rational64 {
    Rational64::from_integer(20)
}

/// All optimal activation patterns over `opt_vertices`, in lexicographic order.
///
/// Each pattern is found by re-solving with the probed bits forced; branches
/// whose forced optimum drops below the global optimum are pruned. At most
/// `cap` patterns are returned.
pub fn degeneracy_probe(
    g: &WeightedGraph,
    opt_vertices: &[usize],
    cap: usize,
    opts: &SolveOptions,
) -> Result<Vec<Vec<bool>>, MwisError> {
    let best = solve_exact(g, opts)?.total_weight;
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    probe(g, opt_vertices, cap, opts, best, &mut prefix, &mut out)?;
    Ok(out)
}

fn probe(
    g: &WeightedGraph,
    opt: &[usize],
    cap: usize,
    opts: &SolveOptions,
    best: Rational64,
    prefix: &mut Vec<bool>,
    out: &mut Vec<Vec<bool>>,
) -> Result<(), MwisError> {
    if out.len() >= cap {
        return Ok(());
    }
    if prefix.len() == opt.len() {
        out.push(prefix.clone());
        return Ok(());
    }
    for b in [false, true] {
        prefix.push(b);
        let mut o = opts.clone();
        o.forced.extend(opt.iter().copied().zip(prefix.iter().copied()));
        let ok = match solve_exact(g, &o) {
            Ok(s) => s.total_weight == best,
            Err(MwisError::InconsistentForcing(..)) => false,
            Err(e) => return Err(e),
        };
        if ok {
            probe(g, opt, cap, opts, best, prefix, out)?;
        }
        prefix.pop();
    }
    Ok(())
}

/// Greedy maximal independent set, heaviest first; used as a seed.
pub(crate) fn greedy(adj: &[Vec<usize>], w: &[i64]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..adj.len()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(w[v] * 8 / (adj[v].len() as i64 + 1)), v));
    let mut sel = vec![false; adj.len()];
    let mut blocked = vec![false; adj.len()];
    for v in order {
        if !blocked[v] {
            sel[v] = true;
            blocked[v] = true;
            for &u in &adj[v] {
                blocked[u] = true;
            }
        }
    }
    sel
}
