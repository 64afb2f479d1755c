//! Multi-constraint reduction: clean-up, single resolution and inclusion
//! merging, iterated to a fixpoint, followed by the occurrence-driven
//! reordering that prepares tail-cuts.

use crate::model::{ConstraintSet, CspInstance, VarId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Terminal outcomes of a reduction that are not a smaller instance.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("infeasible: constraint `{constraint}` {reason}")]
    Infeasible { constraint: String, reason: String },
}

/// Record of fixings and removals, in terms of the input instance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    /// Input variable labels, so the trace can lift without the original file.
    pub original_labels: Vec<String>,
    pub fixed_ones: Vec<VarId>,
    pub fixed_zeros: Vec<VarId>,
    /// Input indices of constraints that were satisfied or implied.
    pub removed_constraints: Vec<usize>,
    /// `variable_order[k]` is the input id of reduced variable `k`.
    pub variable_order: Vec<VarId>,
    /// `constraint_order[k]` is the input index of reduced constraint `k`.
    pub constraint_order: Vec<usize>,
}

impl ReductionTrace {
    /// Identity trace over `inst`.
    pub fn identity(inst: &CspInstance) -> Self {
        Self {
            original_labels: inst.variables().iter().map(|v| v.label.clone()).collect(),
            variable_order: (0..inst.num_vars()).map(VarId).collect(),
            constraint_order: (0..inst.constraints().len()).collect(),
            ..Self::default()
        }
    }

    /// Folds a constraint permutation of the reduced instance into the trace.
    pub fn apply_reorder(&mut self, r: &Reorder) {
        self.constraint_order = r.order.iter().map(|&k| self.constraint_order[k]).collect();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trace serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Mutable reduction state over the original instance.
#[derive(Debug, Clone)]
pub struct Reducer {
    inst: CspInstance,
    value: Vec<Option<bool>>,
    alive: Vec<bool>,
    sets: Vec<Vec<VarId>>,
    removed: Vec<usize>,
}

impl Reducer {
    pub fn new(inst: &CspInstance) -> Self {
        Self {
            value: vec![None; inst.num_vars()],
            alive: vec![true; inst.constraints().len()],
            sets: inst.constraints().iter().map(|c| c.vars.clone()).collect(),
            removed: Vec::new(),
            inst: inst.clone(),
        }
    }

    /// Seeds the state with the fixings of an earlier trace.
    pub fn with_trace(inst: &CspInstance, trace: &ReductionTrace) -> Result<Self, ReduceError> {
        let mut r = Self::new(inst);
        for &v in &trace.fixed_ones {
            r.fix(v, true, "lift")?;
        }
        for &v in &trace.fixed_zeros {
            r.fix(v, false, "lift")?;
        }
        Ok(r)
    }

    fn fix(&mut self, v: VarId, val: bool, ctx: &str) -> Result<bool, ReduceError> {
        match self.value[v.0] {
            Some(old) if old == val => Ok(false),
            Some(_) => Err(ReduceError::Infeasible {
                constraint: ctx.to_string(),
                reason: format!("forces `{}` to both 0 and 1", self.inst.label(v)),
            }),
            None => {
                self.value[v.0] = Some(val);
                Ok(true)
            }
        }
    }

    fn remove(&mut self, k: usize) {
        self.alive[k] = false;
        self.removed.push(k);
    }

    fn label(&self, k: usize) -> String {
        self.inst.constraints()[k].label.clone()
    }

    /// Drops zero-fixed members; empty zero-or-one sets vanish, empty
    /// exactly-one sets are infeasible.
    pub fn cleanup(&mut self) -> Result<bool, ReduceError> {
        let mut changed = false;
        for k in 0..self.sets.len() {
            if !self.alive[k] {
                continue;
            }
            let before = self.sets[k].len();
            let value = &self.value;
            self.sets[k].retain(|v| value[v.0] != Some(false));
            changed |= self.sets[k].len() != before;
            if self.sets[k].is_empty() {
                if self.inst.constraints()[k].has_dummy {
                    self.remove(k);
                    changed = true;
                } else {
                    return Err(ReduceError::Infeasible {
                        constraint: self.label(k),
                        reason: "has no remaining variable".into(),
                    });
                }
            }
        }
        Ok(changed)
    }

    /// Fixes singleton exactly-one sets to 1 and clears the co-members of
    /// every one-fixed variable, retiring the satisfied sets.
    pub fn resolve_singles(&mut self) -> Result<bool, ReduceError> {
        let mut changed = false;
        for k in 0..self.sets.len() {
            if self.alive[k] && self.sets[k].len() == 1 && !self.inst.constraints()[k].has_dummy {
                let v = self.sets[k][0];
                let ctx = self.label(k);
                changed |= self.fix(v, true, &ctx)?;
            }
        }
        loop {
            let mut progressed = false;
            for k in 0..self.sets.len() {
                if !self.alive[k] {
                    continue;
                }
                let ones: Vec<VarId> = self.sets[k]
                    .iter()
                    .copied()
                    .filter(|v| self.value[v.0] == Some(true))
                    .collect();
                match ones.len() {
                    0 => continue,
                    1 => {
                        let ctx = self.label(k);
                        for v in self.sets[k].clone() {
                            if v != ones[0] {
                                self.fix(v, false, &ctx)?;
                            }
                        }
                        self.remove(k);
                        progressed = true;
                    }
                    _ => {
                        return Err(ReduceError::Infeasible {
                            constraint: self.label(k),
                            reason: format!(
                                "would need both `{}` and `{}` set",
                                self.inst.label(ones[0]),
                                self.inst.label(ones[1])
                            ),
                        })
                    }
                }
            }
            if !progressed {
                break;
            }
            changed = true;
        }
        Ok(changed)
    }

    /// Applies the inclusion rule: an exactly-one subset forces the extra
    /// members of any superset to 0 and makes the superset redundant.
    pub fn merge_inclusions(&mut self) -> Result<bool, ReduceError> {
        let mut changed = false;
        let n = self.sets.len();
        for a in 0..n {
            for b in 0..n {
                if a == b || !self.alive[a] || !self.alive[b] {
                    continue;
                }
                let sa: BTreeSet<VarId> = self.sets[a].iter().copied().collect();
                let sb: BTreeSet<VarId> = self.sets[b].iter().copied().collect();
                if !sa.is_subset(&sb) {
                    continue;
                }
                let da = self.inst.constraints()[a].has_dummy;
                let db = self.inst.constraints()[b].has_dummy;
                if sa.len() == sb.len() {
                    // Equal sets: keep the stricter one, or the earlier of two alike.
                    let drop_b = (da == db && a < b) || (!da && db);
                    if drop_b {
                        self.remove(b);
                        changed = true;
                    }
                } else if !da {
                    let ctx = self.label(a);
                    for v in sb.difference(&sa) {
                        self.fix(*v, false, &ctx)?;
                    }
                    self.remove(b);
                    changed = true;
                }
            }
        }
        Ok(changed)
    }

    /// Runs cleanup, singles, cleanup, inclusion until nothing changes.
    pub fn run_fixpoint(&mut self) -> Result<(), ReduceError> {
        loop {
            let mut changed = self.cleanup()?;
            changed |= self.resolve_singles()?;
            changed |= self.cleanup()?;
            changed |= self.merge_inclusions()?;
            if !changed {
                return Ok(());
            }
        }
    }

    /// Compacts the surviving sets into a fresh instance.
    pub fn finish(&self) -> (CspInstance, ReductionTrace) {
        let mut trace = ReductionTrace {
            original_labels: self.inst.variables().iter().map(|v| v.label.clone()).collect(),
            ..ReductionTrace::default()
        };
        let mut remap = vec![None; self.inst.num_vars()];
        for (i, val) in self.value.iter().enumerate() {
            match val {
                Some(true) => trace.fixed_ones.push(VarId(i)),
                Some(false) => trace.fixed_zeros.push(VarId(i)),
                None => {
                    remap[i] = Some(VarId(trace.variable_order.len()));
                    trace.variable_order.push(VarId(i));
                }
            }
        }
        let labels = trace
            .variable_order
            .iter()
            .map(|v| self.inst.label(*v).to_string())
            .collect();
        let mut constraints = Vec::new();
        for (k, set) in self.sets.iter().enumerate() {
            if !self.alive[k] {
                continue;
            }
            trace.constraint_order.push(k);
            let c = &self.inst.constraints()[k];
            constraints.push(ConstraintSet {
                label: c.label.clone(),
                vars: set.iter().map(|v| remap[v.0].expect("live member")).collect(),
                has_dummy: c.has_dummy,
            });
        }
        trace.removed_constraints = self.removed.clone();
        trace.removed_constraints.sort_unstable();
        let reduced = CspInstance::new(labels, constraints).expect("reduction keeps invariants");
        (reduced, trace)
    }
}

/// Removes the variables `fixed` sets to 0 and drops emptied zero-or-one sets.
pub fn cleanup(inst: &CspInstance, fixed: &ReductionTrace) -> Result<CspInstance, ReduceError> {
    let mut r = Reducer::with_trace(inst, fixed)?;
    r.cleanup()?;
    Ok(r.finish().0)
}

/// Resolves singleton sets, interleaved with clean-up, to a fixpoint.
pub fn resolve_singles(inst: &CspInstance) -> Result<(CspInstance, ReductionTrace), ReduceError> {
    let mut r = Reducer::new(inst);
    loop {
        let a = r.resolve_singles()?;
        let b = r.cleanup()?;
        if !a && !b {
            break;
        }
    }
    Ok(r.finish())
}

/// Applies inclusion merging, interleaved with clean-up, to a fixpoint.
pub fn merge_inclusions(inst: &CspInstance) -> Result<(CspInstance, ReductionTrace), ReduceError> {
    let mut r = Reducer::new(inst);
    loop {
        let a = r.merge_inclusions()?;
        let b = r.cleanup()?;
        if !a && !b {
            break;
        }
    }
    Ok(r.finish())
}

/// Full reduction to a fixpoint.
pub fn reduce_fixpoint(inst: &CspInstance) -> Result<(CspInstance, ReductionTrace), ReduceError> {
    let mut r = Reducer::new(inst);
    r.run_fixpoint()?;
    Ok(r.finish())
}

/// Constraint permutation chosen by [`reorder`] plus tail-cut metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reorder {
    /// `order[k]` is the input index of output constraint `k`.
    pub order: Vec<usize>,
    /// `live_width[k]`: one past the highest variable used in output row `k` or later.
    pub live_width: Vec<usize>,
}

/// Orders constraints so the rightmost variables retire first.
///
/// Repeatedly takes the highest-index variable still used by an unplaced
/// set and places every unplaced set containing it, in input order.
/// Variables keep their canonical order.
pub fn reorder(inst: &CspInstance) -> (CspInstance, Reorder) {
    let cs = inst.constraints();
    let mut placed = vec![false; cs.len()];
    let mut order = Vec::with_capacity(cs.len());
    while order.len() < cs.len() {
        let target = (0..cs.len())
            .filter(|&k| !placed[k])
            .flat_map(|k| cs[k].vars.iter().map(|v| v.0))
            .max()
            .expect("unplaced sets are non-empty");
        for k in 0..cs.len() {
            if !placed[k] && cs[k].vars.iter().any(|v| v.0 == target) {
                placed[k] = true;
                order.push(k);
            }
        }
    }
    let reordered: Vec<ConstraintSet> = order.iter().map(|&k| cs[k].clone()).collect();
    let live_width = live_widths(&reordered);
    let labels = inst.variables().iter().map(|v| v.label.clone()).collect();
    let out = CspInstance::new(labels, reordered).expect("permutation keeps invariants");
    (out, Reorder { order, live_width })
}

/// Tail-cut widths for constraints taken in their given order.
pub fn live_widths(cs: &[ConstraintSet]) -> Vec<usize> {
    let mut widths = vec![0; cs.len()];
    let mut acc = 0;
    for (k, c) in cs.iter().enumerate().rev() {
        acc = acc.max(c.vars.iter().map(|v| v.0 + 1).max().unwrap_or(0));
        widths[k] = acc;
    }
    widths
}
