//! Depth-first branch and bound in vertex-id order.
//!
//! The 0-branch is explored first and only strict improvements replace the
//! incumbent, so a search that completes returns the lexicographically
//! smallest optimum. The bound sums, over a fixed greedy clique cover, the
//! heaviest still-available vertex of each clique.

use std::time::Instant;

pub(super) struct BnbResult {
    pub bits: Vec<bool>,
    pub upper: i64,
    pub complete: bool,
}

struct Search<'a> {
    adj: &'a [Vec<usize>],
    w: &'a [i64],
    cliques: Vec<Vec<usize>>,
    /// Count of selected neighbours per vertex.
    blocked: Vec<u32>,
    cur: Vec<bool>,
    best: Vec<bool>,
    best_w: i64,
    /// Incumbent came from the seed, not from the search.
    seeded: bool,
    deadline: Option<Instant>,
    nodes: u64,
    aborted: bool,
}

fn clique_cover(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut used = vec![false; n];
    let mut out = Vec::new();
    for v in 0..n {
        if used[v] {
            continue;
        }
        let mut c = vec![v];
        used[v] = true;
        for &u in &adj[v] {
            if !used[u] && c.iter().all(|x| adj[u].binary_search(x).is_ok()) {
                used[u] = true;
                c.push(u);
            }
        }
        out.push(c);
    }
    out
}

impl Search<'_> {
    /// Upper bound on what vertices `>= from` can still add.
    fn bound(&self, from: usize) -> i64 {
        self.cliques
            .iter()
            .map(|c| {
                c.iter()
                    .filter(|&&v| v >= from && self.blocked[v] == 0)
                    .map(|&v| self.w[v])
                    .max()
                    .unwrap_or(0)
            })
            .sum()
    }

    fn dfs(&mut self, v: usize, weight: i64) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes % 4096 == 1 && self.deadline.is_some_and(|d| Instant::now() > d) {
            self.aborted = true;
            return;
        }
        if v == self.w.len() {
            if weight > self.best_w || (weight == self.best_w && self.seeded) {
                self.best_w = weight;
                self.best.clone_from(&self.cur);
                self.seeded = false;
            }
            return;
        }
        let b = weight + self.bound(v);
        if b < self.best_w || (b == self.best_w && !self.seeded) {
            return;
        }
        self.dfs(v + 1, weight);
        if self.blocked[v] == 0 {
            self.cur[v] = true;
            for &u in self.adj[v].iter() {
                self.blocked[u] += 1;
            }
            self.dfs(v + 1, weight + self.w[v]);
            for &u in self.adj[v].iter() {
                self.blocked[u] -= 1;
            }
            self.cur[v] = false;
        }
    }
}

pub(super) fn solve(adj: &[Vec<usize>], w: &[i64], deadline: Option<Instant>) -> BnbResult {
    let n = adj.len();
    let cliques = clique_cover(adj);
    let seed = super::greedy(adj, w);
    let seed_w = (0..n).filter(|&v| seed[v]).map(|v| w[v]).sum();
    let mut s = Search {
        adj,
        w,
        cliques,
        blocked: vec![0; n],
        cur: vec![false; n],
        best: seed,
        best_w: seed_w,
        seeded: true,
        deadline,
        nodes: 0,
        aborted: false,
    };
    let root_bound = s.bound(0);
    s.dfs(0, 0);
    BnbResult {
        upper: if s.aborted { root_bound } else { s.best_w },
        complete: !s.aborted,
        bits: s.best,
    }
}
