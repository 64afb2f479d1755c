//! Frontier dynamic program over a fixed vertex order.
//!
//! Table `C_i` maps a selection of the prefix frontier
//! `F_i = { j < i : j has a neighbour ≥ i }` to the best weight obtainable
//! from vertices `i..n`. Tables are built from `i = n` down to `0`, keeping a
//! checkpoint every `√n` steps, then the solution is read forward in id order,
//! preferring 0 whenever the optimum survives. That yields the
//! lexicographically smallest optimal bit vector.

use rustc_hash::FxHashMap;
use std::time::Instant;

type Table = FxHashMap<u64, i64>;

/// Read-only table kept between passes, sorted by key.
struct Frozen(Vec<(u64, i64)>);

impl Frozen {
    fn new(t: &Table) -> Self {
        let mut v: Vec<(u64, i64)> = t.iter().map(|(&k, &x)| (k, x)).collect();
        v.sort_unstable_by_key(|e| e.0);
        Self(v)
    }

    fn get(&self, key: u64) -> Option<i64> {
        self.0.binary_search_by_key(&key, |e| e.0).ok().map(|i| self.0[i].1)
    }

    fn thaw(&self) -> Table {
        self.0.iter().copied().collect()
    }
}

struct Plan {
    /// Largest neighbour id, or the vertex itself when it has none larger.
    last: Vec<usize>,
    /// Frontier bit of each vertex that ever sits on the frontier.
    slot: Vec<u32>,
    /// Vertices whose last neighbour is `i`, for each `i`.
    enters: Vec<Vec<usize>>,
}

fn plan(adj: &[Vec<usize>]) -> Option<Plan> {
    let n = adj.len();
    let last: Vec<usize> = (0..n)
        .map(|v| adj[v].iter().copied().max().unwrap_or(v).max(v))
        .collect();
    let mut enters = vec![Vec::new(); n];
    for v in 0..n {
        if last[v] > v {
            enters[last[v]].push(v);
        }
    }
    let mut slot = vec![u32::MAX; n];
    let mut free: Vec<u32> = (0..64).rev().collect();
    for i in (0..n).rev() {
        for &v in &enters[i] {
            slot[v] = free.pop()?;
        }
        if last[i] > i {
            free.push(slot[i]);
        }
    }
    Some(Plan { last, slot, enters })
}

impl Plan {
    fn bit(&self, v: usize) -> u64 {
        1u64 << self.slot[v]
    }

    /// Computes `C_i` from `C_{i+1}`.
    fn step(&self, adj: &[Vec<usize>], w: &[i64], i: usize, next: &Table) -> Table {
        let in_next = self.last[i] > i;
        let bit_i = if in_next { self.bit(i) } else { 0 };
        // Frontier neighbours of i that stay on the frontier past i.
        let nb_mask: u64 = adj[i]
            .iter()
            .filter(|&&j| j < i && self.last[j] > i)
            .fold(0, |m, &j| m | self.bit(j));
        let entering = &self.enters[i];
        // Conflicts of each entering vertex with the older frontier and with each other.
        let conflicts: Vec<(u64, u64)> = entering
            .iter()
            .map(|&t| {
                let old = adj[t]
                    .iter()
                    .filter(|&&j| j < i && self.last[j] > i)
                    .fold(0, |m, &j| m | self.bit(j));
                let new = adj[t]
                    .iter()
                    .filter(|&&j| self.last[j] == i && j < i)
                    .fold(0, |m, &j| m | self.bit(j));
                (old, new)
            })
            .collect();
        let subsets = independent_subsets(entering, &conflicts, self);
        let mut out = Table::with_capacity_and_hasher(next.len(), Default::default());
        for (&key, &v0) in next {
            if key & bit_i != 0 {
                continue;
            }
            let take = if key & nb_mask == 0 {
                next.get(&(key | bit_i)).map(|v| v + w[i])
            } else {
                None
            };
            out.insert(key, take.map_or(v0, |t| t.max(v0)));
            for &(tmask, old_conf) in &subsets[1..] {
                if key & old_conf == 0 {
                    out.insert(key | tmask, v0);
                }
            }
        }
        out
    }
}

/// Independent subsets of the entering set as (bits, conflict mask with old frontier).
fn independent_subsets(entering: &[usize], conflicts: &[(u64, u64)], p: &Plan) -> Vec<(u64, u64)> {
    let mut out = vec![(0u64, 0u64)];
    for (k, &t) in entering.iter().enumerate() {
        let (old, new) = conflicts[k];
        let b = p.bit(t);
        let len = out.len();
        for s in 0..len {
            let (mask, conf) = out[s];
            if mask & new == 0 {
                out.push((mask | b, conf | old));
            }
        }
    }
    out
}

const CHECK_EVERY: usize = 64;

/// Returns `(optimum, bits)` or `None` when the frontier, the table limit or
/// the deadline is exceeded.
pub(super) fn solve(
    adj: &[Vec<usize>],
    w: &[i64],
    deadline: Option<Instant>,
    state_limit: usize,
) -> Option<(i64, Vec<bool>)> {
    let n = adj.len();
    let p = plan(adj)?;
    let block = ((n as f64).sqrt() as usize).max(1);
    let timed_out = |i: usize| i.is_multiple_of(CHECK_EVERY) && deadline.is_some_and(|d| Instant::now() > d);

    // Backward pass, keeping C_i for every i that is a multiple of `block`.
    let mut checkpoints: Vec<Option<Frozen>> = (0..=n / block).map(|_| None).collect();
    let mut cur = Table::default();
    cur.insert(0, 0);
    for i in (0..n).rev() {
        if timed_out(i) {
            return None;
        }
        if (i + 1) % block == 0 && i + 1 < n {
            checkpoints[(i + 1) / block] = Some(Frozen::new(&cur));
        }
        cur = p.step(adj, w, i, &cur);
        if cur.len() > state_limit {
            return None;
        }
    }
    let best = *cur.get(&0).expect("empty prefix state");
    drop(cur);

    // Forward read-out, one block at a time.
    let mut bits = vec![false; n];
    let mut key = 0u64;
    let mut start = 0;
    while start < n {
        let end = ((start / block + 1) * block).min(n);
        let mut cur = match checkpoints[end / block].take() {
            Some(f) if end < n => f.thaw(),
            _ => {
                let mut t = Table::default();
                t.insert(0, 0);
                t
            }
        };
        // tables[k] holds C_{end - k}.
        let mut tables: Vec<Frozen> = Vec::with_capacity(end - start + 1);
        for i in (start..end).rev() {
            if timed_out(i) {
                return None;
            }
            let next = p.step(adj, w, i, &cur);
            tables.push(Frozen::new(&cur));
            cur = next;
        }
        tables.push(Frozen::new(&cur));
        drop(cur);
        tables.reverse();
        for i in start..end {
            let here = tables[i - start].get(key).expect("reachable state");
            let mut k0 = key;
            for &t in &p.enters[i] {
                k0 &= !p.bit(t);
            }
            let next = &tables[i + 1 - start];
            if next.get(k0) == Some(here) {
                key = k0;
            } else {
                bits[i] = true;
                key = if p.last[i] > i { k0 | p.bit(i) } else { k0 };
                debug_assert_eq!(next.get(key).map(|v| v + w[i]), Some(here));
            }
        }
        start = end;
    }
    Some((best, bits))
}
