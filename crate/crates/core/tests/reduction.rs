//! Reduction against the brute-force feasibility oracle.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use xor1::decode::lift;
use xor1::model::{enumerate_feasible, Assignment, ConstraintSet, CspInstance, VarId};
use xor1::reduce::{reduce_fixpoint, reorder, ReduceError};

const CAP: usize = 1 << 17;

fn feasible(inst: &CspInstance) -> BTreeSet<Vec<bool>> {
    let e = enumerate_feasible(inst, CAP).unwrap();
    assert!(!e.truncated);
    e.assignments.into_iter().map(|a| a.bits).collect()
}

/// Feasible set recovered from the reduced instance, or empty when reduction proves infeasibility.
fn lifted_feasible(inst: &CspInstance) -> BTreeSet<Vec<bool>> {
    match reduce_fixpoint(inst) {
        Ok((reduced, trace)) => feasible(&reduced)
            .into_iter()
            .map(|bits| lift(&Assignment::from_bits(bits, 0), &trace).unwrap().bits)
            .collect(),
        Err(ReduceError::Infeasible { .. }) => BTreeSet::new(),
    }
}

fn random_instance(rng: &mut impl Rng, max_vars: usize) -> CspInstance {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(1..=8);
    let labels = (0..n).map(|i| format!("x{}", i + 1)).collect();
    let constraints = (0..m)
        .map(|k| {
            let size = rng.gen_range(1..=n.min(4));
            let mut vars = BTreeSet::new();
            while vars.len() < size {
                vars.insert(VarId(rng.gen_range(0..n)));
            }
            ConstraintSet {
                label: format!("Y{}", k + 1),
                vars: vars.into_iter().collect(),
                has_dummy: rng.gen_bool(0.3),
            }
        })
        .collect();
    CspInstance::new(labels, constraints).unwrap()
}

fn example() -> CspInstance {
    CspInstance::from_labels(
        &["x1", "x2", "x3", "x4"],
        &[
            ("Y1", &["x1", "x2"], false),
            ("Y2", &["x1", "x2", "x3"], false),
            ("Y3", &["x3", "x4"], false),
        ],
    )
    .unwrap()
}

#[test]
fn inclusion_example_feasible_set() {
    let want: BTreeSet<Vec<bool>> = [
        vec![false, true, false, true],
        vec![true, false, false, true],
    ]
    .into();
    assert_eq!(feasible(&example()), want);
    assert_eq!(lifted_feasible(&example()), want);
    let (reduced, trace) = reduce_fixpoint(&example()).unwrap();
    assert_eq!(reduced.num_vars(), 2);
    assert_eq!(reduced.constraints().len(), 1);
    assert_eq!(trace.fixed_zeros, [VarId(2)]);
    assert_eq!(trace.fixed_ones, [VarId(3)]);
}

#[test]
fn oracle_agreement_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..1000 {
        let inst = random_instance(&mut rng, 16);
        assert_eq!(lifted_feasible(&inst), feasible(&inst), "instance {i}: {}", inst.to_json());
    }
}

#[test]
fn reorder_preserves_feasibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let inst = random_instance(&mut rng, 12);
        let (ord, r) = reorder(&inst);
        assert_eq!(feasible(&ord), feasible(&inst));
        let mut seen = r.order.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..inst.constraints().len()).collect::<Vec<_>>());
    }
}

#[test]
fn repeated_singleton_forced_zero_is_infeasible() {
    let inst = CspInstance::from_labels(&["x", "y"], &[("Y1", &["x"], false), ("Y2", &["x", "y"], false), ("Y3", &["y"], false)])
        .unwrap();
    assert!(matches!(reduce_fixpoint(&inst), Err(ReduceError::Infeasible { .. })));
    assert!(feasible(&inst).is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]
    #[test]
    fn reduction_preserves_feasible_set(seed in any::<u64>()) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), 10);
        prop_assert_eq!(lifted_feasible(&inst), feasible(&inst));
    }

    #[test]
    fn reduction_is_idempotent(seed in any::<u64>()) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), 10);
        if let Ok((once, _)) = reduce_fixpoint(&inst) {
            let (twice, trace) = reduce_fixpoint(&once).unwrap();
            prop_assert_eq!(twice.num_vars(), once.num_vars());
            prop_assert_eq!(twice.constraints().len(), once.constraints().len());
            prop_assert!(trace.fixed_ones.is_empty() && trace.fixed_zeros.is_empty());
        }
    }
}
