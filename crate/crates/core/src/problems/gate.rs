//! Airport gate assignment.
//!
//! Variable `x_{f,g}` says flight `f` parks at gate `g`; wide-body flights
//! get no variables at narrow gates. Each flight has one exactly-one set over
//! its gates. Each gate has one zero-or-one set per maximal group of flights
//! sharing a time slot.

use crate::model::{Assignment, ConstraintSet, CspInstance, ModelError, VarId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Ground time of a wide-body flight, in slots.
pub const WIDE_GROUND_TIME: usize = 3;
/// Ground time of a narrow-body flight, in slots.
pub const NARROW_GROUND_TIME: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: String,
    #[serde(default)]
    pub wide_body_capable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flight {
    pub id: String,
    pub arrival_slot: usize,
    #[serde(default)]
    pub wide_body: bool,
    /// Defaults by body type when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_time: Option<usize>,
}

impl Flight {
    pub fn ground_time(&self) -> usize {
        self.ground_time.unwrap_or(if self.wide_body {
            WIDE_GROUND_TIME
        } else {
            NARROW_GROUND_TIME
        })
    }

    /// Occupied slots `[arrival, arrival + ground_time)`.
    pub fn occupies(&self, slot: usize) -> bool {
        (self.arrival_slot..self.arrival_slot + self.ground_time()).contains(&slot)
    }
}

/// Gates, flights and the slot horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateInstance {
    pub gates: Vec<Gate>,
    pub flights: Vec<Flight>,
    pub horizon: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GateError {
    #[error("flight {0} has a zero ground time")]
    ZeroGroundTime(String),
    #[error("flight {0} leaves after the horizon")]
    BeyondHorizon(String),
    #[error("flight {0} has no compatible gate")]
    NoCompatibleGate(String),
    #[error("flight {0} is assigned {1} gates")]
    NotAssignedOnce(String, usize),
    #[error("flights {0} and {1} overlap at gate {2}, slot {3}")]
    Overlap(String, String, String, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid instance file: {0}")]
    Json(String),
}

impl GateInstance {
    pub fn from_json(text: &str) -> Result<Self, GateError> {
        let inst: Self = serde_json::from_str(text).map_err(|e| GateError::Json(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), GateError> {
        for f in &self.flights {
            if f.ground_time() == 0 {
                return Err(GateError::ZeroGroundTime(f.id.clone()));
            }
            if f.arrival_slot + f.ground_time() > self.horizon {
                return Err(GateError::BeyondHorizon(f.id.clone()));
            }
        }
        Ok(())
    }

    fn compatible(&self, f: &Flight, g: &Gate) -> bool {
        !f.wide_body || g.wide_body_capable
    }

    /// The three-gate, four-flight instance of the worked example.
    pub fn minimal_example() -> Self {
        let gate = |id: &str, wide| Gate {
            id: id.into(),
            wide_body_capable: wide,
        };
        let flight = |id: &str, arrival_slot, wide_body| Flight {
            id: id.into(),
            arrival_slot,
            wide_body,
            ground_time: None,
        };
        Self {
            gates: vec![gate("A", true), gate("B", false), gate("C", false)],
            flights: vec![
                flight("1", 0, true),
                flight("2", 0, false),
                flight("3", 1, false),
                flight("4", 2, false),
            ],
            horizon: 4,
        }
    }
}

pub fn var_label(flight: &str, gate: &str) -> String {
    format!("x_{{{flight},{gate}}}")
}

/// Builds the constraint instance.
pub fn encode_gate(inst: &GateInstance) -> Result<CspInstance, GateError> {
    inst.validate()?;
    let mut labels = Vec::new();
    let mut var: BTreeMap<(usize, usize), VarId> = BTreeMap::new();
    for (fi, f) in inst.flights.iter().enumerate() {
        for (gi, g) in inst.gates.iter().enumerate() {
            if inst.compatible(f, g) {
                var.insert((fi, gi), VarId(labels.len()));
                labels.push(var_label(&f.id, &g.id));
            }
        }
    }
    let mut sets = Vec::new();
    for (fi, f) in inst.flights.iter().enumerate() {
        let vars: Vec<VarId> = (0..inst.gates.len()).filter_map(|gi| var.get(&(fi, gi)).copied()).collect();
        if vars.is_empty() {
            return Err(GateError::NoCompatibleGate(f.id.clone()));
        }
        sets.push(vars);
    }
    let n_flight_sets = sets.len();
    // Maximal per-slot occupancy groups, ordered by first slot then gate.
    let mut groups: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for (gi, g) in inst.gates.iter().enumerate() {
        let occ: Vec<Vec<usize>> = (0..inst.horizon)
            .map(|t| {
                (0..inst.flights.len())
                    .filter(|&fi| inst.compatible(&inst.flights[fi], g) && inst.flights[fi].occupies(t))
                    .collect()
            })
            .collect();
        for (t, o) in occ.iter().enumerate() {
            let dominated = occ.iter().enumerate().any(|(u, p)| {
                let sup = o.iter().all(|x| p.contains(x));
                sup && (p.len() > o.len() || (p.len() == o.len() && u < t))
            });
            if o.len() >= 2 && !dominated {
                groups.push((t, gi, o.clone()));
            }
        }
    }
    groups.sort_by_key(|(t, gi, _)| (*t, *gi));
    for (_, gi, flights) in &groups {
        sets.push(flights.iter().map(|&fi| var[&(fi, *gi)]).collect());
    }
    let constraints = sets
        .into_iter()
        .enumerate()
        .map(|(k, vars)| ConstraintSet {
            label: format!("Y{}", k + 1),
            vars,
            has_dummy: k >= n_flight_sets,
        })
        .collect();
    Ok(CspInstance::new(labels, constraints)?)
}

/// Gate × slot occupancy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationTable {
    pub gates: Vec<String>,
    pub horizon: usize,
    /// `grid[g][t]` is the flight at gate `g` in slot `t`.
    pub grid: Vec<Vec<Option<String>>>,
    /// Gate index of each flight, in flight order.
    pub assignment: Vec<usize>,
}

impl AllocationTable {
    /// Slot runs `(flight, first, last)` at gate `g`.
    pub fn runs(&self, g: usize) -> Vec<(String, usize, usize)> {
        let mut out: Vec<(String, usize, usize)> = Vec::new();
        for (t, cell) in self.grid[g].iter().enumerate() {
            if let Some(f) = cell {
                match out.last_mut() {
                    Some(last) if &last.0 == f && last.2 + 1 == t => last.2 = t,
                    _ => out.push((f.clone(), t, t)),
                }
            }
        }
        out
    }
}

impl fmt::Display for AllocationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self
            .grid
            .iter()
            .flatten()
            .flatten()
            .map(|s| s.len())
            .max()
            .unwrap_or(1)
            .max(2);
        write!(f, "gate")?;
        for t in 0..self.horizon {
            write!(f, " {t:>w$}")?;
        }
        writeln!(f)?;
        for (g, row) in self.gates.iter().zip(&self.grid) {
            write!(f, "{g:<4}")?;
            for cell in row {
                write!(f, " {:>w$}", cell.as_deref().unwrap_or("."))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Places every flight at its assigned gate and checks for overlaps.
pub fn decode_gate(inst: &GateInstance, a: &Assignment) -> Result<AllocationTable, GateError> {
    let csp = encode_gate(inst)?;
    if a.bits.len() != csp.num_vars() {
        return Err(ModelError::DomainMismatch {
            expected: csp.num_vars(),
            got: a.bits.len(),
        }
        .into());
    }
    let mut grid = vec![vec![None::<String>; inst.horizon]; inst.gates.len()];
    let mut assignment = Vec::new();
    for f in &inst.flights {
        let gates: Vec<usize> = (0..inst.gates.len())
            .filter(|&gi| {
                csp.find(&var_label(&f.id, &inst.gates[gi].id))
                    .is_some_and(|v| a.get(v))
            })
            .collect();
        if gates.len() != 1 {
            return Err(GateError::NotAssignedOnce(f.id.clone(), gates.len()));
        }
        let gi = gates[0];
        for (t, cell) in grid[gi].iter_mut().enumerate().skip(f.arrival_slot).take(f.ground_time()) {
            if let Some(other) = cell {
                return Err(GateError::Overlap(other.clone(), f.id.clone(), inst.gates[gi].id.clone(), t));
            }
            *cell = Some(f.id.clone());
        }
        assignment.push(gi);
    }
    Ok(AllocationTable {
        gates: inst.gates.iter().map(|g| g.id.clone()).collect(),
        horizon: inst.horizon,
        grid,
        assignment,
    })
}
