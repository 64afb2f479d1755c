//! Exhaustive oracle.

use super::{Certificate, Method, MwisError, MwisSolution, WeightedGraph};
use num_rational::Rational64;

/// Largest graph the oracle accepts.
pub const BRUTE_LIMIT: usize = 26;

/// Enumerates independent sets in lexicographic bit order and keeps the first
/// one of maximum weight.
pub fn brute_force(g: &WeightedGraph) -> Result<MwisSolution, MwisError> {
    let n = g.len();
    if n > BRUTE_LIMIT {
        return Err(MwisError::TooLarge {
            n,
            limit: BRUTE_LIMIT,
        });
    }
    let (w, scale) = g.scaled_weights();
    let nb: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let mut best = (-1i64, 0u32);
    dfs(0, 0, 0, &w, &nb, &mut best);
    let selected: Vec<usize> = (0..n).filter(|&v| best.1 >> v & 1 == 1).collect();
    let total = Rational64::new(best.0, scale);
    Ok(MwisSolution {
        selected,
        total_weight: total,
        certificate: Certificate {
            proved_optimal: true,
            method: Method::BruteForce,
            lower_bound: total,
            upper_bound: total,
            components: 1,
        },
    })
}

fn dfs(v: usize, set: u32, weight: i64, w: &[i64], nb: &[u32], best: &mut (i64, u32)) {
    if v == w.len() {
        if weight > best.0 {
            *best = (weight, set);
        }
        return;
    }
    dfs(v + 1, set, weight, w, nb, best);
    if set & nb[v] == 0 {
        dfs(v + 1, set | 1 << v, weight + w[v], w, nb, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex() {
        let g = WeightedGraph::from_integer(&[7], &[]);
        let s = brute_force(&g).unwrap();
        assert_eq!(s.selected, vec![0]);
        assert_eq!(s.total_weight, Rational64::from_integer(7));
    }

    #[test]
    fn empty_graph() {
        let s = brute_force(&WeightedGraph::from_integer(&[], &[])).unwrap();
        assert!(s.selected.is_empty());
        assert_eq!(s.total_weight, Rational64::from_integer(0));
    }

    #[test]
    fn lexicographic_tie_break() {
        let g = WeightedGraph::from_integer(&[1, 1], &[(0, 1)]);
        assert_eq!(brute_force(&g).unwrap().selected, vec![1]);
    }

    #[test]
    fn size_limit() {
        let g = WeightedGraph::from_integer(&[1; 27], &[]);
        assert!(matches!(brute_force(&g), Err(MwisError::TooLarge { n: 27, .. })));
    }
}
