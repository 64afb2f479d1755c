//! Reading assignments out of MWIS solutions and lifting them back.

use crate::layout::RaaLayout;
use crate::model::{set_sum, Assignment, CspInstance, ModelError, VarId};
use crate::mwis::MwisSolution;
use crate::reduce::ReductionTrace;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("replicas of `{var}` disagree: band {first_band} reads {first}, band {band} reads {value}")]
    ReplicaDisagreement {
        var: String,
        first_band: usize,
        first: bool,
        band: usize,
        value: bool,
    },
    #[error("reduced assignment has {got} variables, the trace expects {expected}")]
    ReducedLength { expected: usize, got: usize },
    #[error("variable `{0}` is both fixed by the trace and free in the reduced instance")]
    TraceCollision(String),
    #[error("variable `{0}` is not covered by the trace")]
    Uncovered(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Bits of the layout's variables, read at their first band.
///
/// Every other band's optimization vertex must agree. Dummy bits are read
/// from the dummy vertices, one per band.
pub fn extract(layout: &RaaLayout, sol: &MwisSolution) -> Result<Assignment, DecodeError> {
    let mut bits = vec![false; layout.variables.len()];
    for (v, ids) in &layout.bindings {
        let first = sol.contains(ids[0]);
        let band0 = layout.graph.vertices[ids[0]].band;
        for &id in &ids[1..] {
            let val = sol.contains(id);
            if val != first {
                return Err(DecodeError::ReplicaDisagreement {
                    var: layout.variables[v.0].clone(),
                    first_band: band0,
                    first,
                    band: layout.graph.vertices[id].band,
                    value: val,
                });
            }
        }
        bits[v.0] = first;
    }
    let dummy_bits = layout.dummies.iter().map(|d| d.map(|id| sol.contains(id))).collect();
    Ok(Assignment { bits, dummy_bits })
}

/// Selected weight per band, in δ units.
pub fn band_weights(layout: &RaaLayout, sol: &MwisSolution) -> Vec<Rational64> {
    let mut out = vec![Rational64::from_integer(0); layout.bands.len()];
    for &id in &sol.selected {
        let v = &layout.graph.vertices[id];
        out[v.band] += Rational64::from_integer(i64::from(v.weight));
    }
    out
}

/// Re-inserts the trace's fixings around a reduced assignment.
pub fn lift(reduced: &Assignment, trace: &ReductionTrace) -> Result<Assignment, DecodeError> {
    let n = trace.original_labels.len();
    if reduced.bits.len() != trace.variable_order.len() {
        return Err(DecodeError::ReducedLength {
            expected: trace.variable_order.len(),
            got: reduced.bits.len(),
        });
    }
    let mut out: Vec<Option<bool>> = vec![None; n];
    let mut set = |v: VarId, b: bool| -> Result<(), DecodeError> {
        let label = || trace.original_labels.get(v.0).cloned().unwrap_or_else(|| format!("#{}", v.0));
        if v.0 >= n {
            return Err(ModelError::UnknownVariable(label()).into());
        }
        if out[v.0].is_some() {
            return Err(DecodeError::TraceCollision(label()));
        }
        out[v.0] = Some(b);
        Ok(())
    };
    for &v in &trace.fixed_ones {
        set(v, true)?;
    }
    for &v in &trace.fixed_zeros {
        set(v, false)?;
    }
    for (k, &v) in trace.variable_order.iter().enumerate() {
        set(v, reduced.bits[k])?;
    }
    let bits = out
        .iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| DecodeError::Uncovered(trace.original_labels[i].clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Assignment::from_bits(bits, 0))
}

/// Status of one constraint under an assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintStatus {
    pub label: String,
    pub sum: usize,
    pub has_dummy: bool,
    pub satisfied: bool,
}

/// Per-constraint check of an assignment against an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub constraints: Vec<ConstraintStatus>,
}

impl ValidationReport {
    pub fn violated(&self) -> Vec<&str> {
        self.constraints.iter().filter(|c| !c.satisfied).map(|c| c.label.as_str()).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            let kind = if c.has_dummy { "<=1" } else { "==1" };
            let st = if c.satisfied { "ok" } else { "VIOLATED" };
            writeln!(f, "{} sum={} {kind} {st}", c.label, c.sum)?;
        }
        writeln!(f, "{}", if self.valid { "valid" } else { "invalid" })
    }
}

/// Checks every constraint of `original`; dummy bits in `a` are ignored.
pub fn validate(original: &CspInstance, a: &Assignment) -> Result<ValidationReport, DecodeError> {
    if a.bits.len() != original.num_vars() {
        return Err(ModelError::DomainMismatch {
            expected: original.num_vars(),
            got: a.bits.len(),
        }
        .into());
    }
    let constraints: Vec<ConstraintStatus> = original
        .constraints()
        .iter()
        .map(|c| {
            let sum = set_sum(c, a);
            ConstraintStatus {
                label: c.label.clone(),
                sum,
                has_dummy: c.has_dummy,
                satisfied: if c.has_dummy { sum <= 1 } else { sum == 1 },
            }
        })
        .collect();
    Ok(ValidationReport {
        valid: constraints.iter().all(|c| c.satisfied),
        constraints,
    })
}

/// Decoded result over the original variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedSolution {
    pub assignment: Assignment,
    pub reduced: Assignment,
    pub band_weights: Vec<Rational64>,
}

/// `extract` followed by `lift`.
pub fn decode(layout: &RaaLayout, sol: &MwisSolution, trace: &ReductionTrace) -> Result<DecodedSolution, DecodeError> {
    let reduced = extract(layout, sol)?;
    let assignment = lift(&reduced, trace)?;
    Ok(DecodedSolution {
        assignment,
        reduced,
        band_weights: band_weights(layout, sol),
    })
}
