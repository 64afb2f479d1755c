//! Constraint-satisfaction data model: variables, xor₁ sets and assignments.
//!
//! A constraint set is satisfied when the integer sum of its variables equals
//! one. Sets carrying a dummy slot accept a zero sum as well, because the
//! dummy bit absorbs the missing one.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

/// Largest variable count the brute-force oracle accepts.
pub const ORACLE_LIMIT: usize = 24;

/// Ordinal identifier of a problem variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

/// A declared variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub label: String,
}

/// One xor₁ set. `has_dummy` switches from exactly-one to zero-or-one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub label: String,
    pub vars: Vec<VarId>,
    pub has_dummy: bool,
}

/// Errors raised by the data model and its file format.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("constraint `{0}` has no variables")]
    EmptyConstraint(String),
    #[error("constraint `{constraint}` lists `{var}` more than once")]
    RepeatedInConstraint { constraint: String, var: String },
    #[error("assignment covers {got} variables, instance has {expected}")]
    DomainMismatch { expected: usize, got: usize },
    #[error("{n} variables exceed the oracle limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

/// A conjunction of xor₁ sets over declared variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspInstance {
    variables: Vec<Variable>,
    constraints: Vec<ConstraintSet>,
}

impl CspInstance {
    /// Builds an instance from labels and sets, checking every invariant.
    pub fn new(labels: Vec<String>, constraints: Vec<ConstraintSet>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(ModelError::DuplicateVariable(l.clone()));
            }
        }
        let variables: Vec<Variable> = labels
            .into_iter()
            .enumerate()
            .map(|(i, label)| Variable { id: VarId(i), label })
            .collect();
        for c in &constraints {
            if c.vars.is_empty() {
                return Err(ModelError::EmptyConstraint(c.label.clone()));
            }
            let mut members = BTreeSet::new();
            for v in &c.vars {
                let var = variables
                    .get(v.0)
                    .ok_or_else(|| ModelError::UnknownVariable(format!("#{}", v.0)))?;
                if !members.insert(*v) {
                    return Err(ModelError::RepeatedInConstraint {
                        constraint: c.label.clone(),
                        var: var.label.clone(),
                    });
                }
            }
        }
        Ok(Self {
            variables,
            constraints,
        })
    }

    /// Builds an instance from label strings, resolving member names.
    pub fn from_labels(
        labels: &[&str],
        sets: &[(&str, &[&str], bool)],
    ) -> Result<Self, ModelError> {
        let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let mut constraints = Vec::with_capacity(sets.len());
        for (label, members, dummy) in sets {
            let vars = members
                .iter()
                .map(|m| {
                    index
                        .get(m)
                        .map(|&i| VarId(i))
                        .ok_or_else(|| ModelError::UnknownVariable(m.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            constraints.push(ConstraintSet {
                label: label.to_string(),
                vars,
                has_dummy: *dummy,
            });
        }
        Self::new(labels.iter().map(|s| s.to_string()).collect(), constraints)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[ConstraintSet] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn label(&self, v: VarId) -> &str {
        &self.variables[v.0].label
    }

    /// Looks a variable up by label.
    pub fn find(&self, label: &str) -> Option<VarId> {
        self.variables.iter().find(|v| v.label == label).map(|v| v.id)
    }

    /// Parses the JSON instance format.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: CspFile = serde_json::from_str(text).map_err(|e| ModelError::Parse {
            line: e.line(),
            column: e.column(),
            message: {
                let full = e.to_string();
                let suffix = format!(" at line {} column {}", e.line(), e.column());
                full.strip_suffix(&suffix).unwrap_or(&full).to_string()
            },
        })?;
        let index: HashMap<&str, usize> = file
            .variables
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut constraints = Vec::with_capacity(file.constraints.len());
        for (k, c) in file.constraints.iter().enumerate() {
            let vars = c
                .vars
                .iter()
                .map(|m| {
                    index
                        .get(m.as_str())
                        .map(|&i| VarId(i))
                        .ok_or_else(|| ModelError::UnknownVariable(m.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            constraints.push(ConstraintSet {
                label: c.label.clone().unwrap_or_else(|| format!("Y{}", k + 1)),
                vars,
                has_dummy: c.dummy,
            });
        }
        Self::new(file.variables, constraints)
    }

    /// Serializes to the JSON instance format, pretty-printed with a trailing newline.
    pub fn to_json(&self) -> String {
        let file = CspFile {
            variables: self.variables.iter().map(|v| v.label.clone()).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintFile {
                    label: Some(c.label.clone()),
                    vars: c.vars.iter().map(|v| self.label(*v).to_string()).collect(),
                    dummy: c.has_dummy,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
        s.push('\n');
        s
    }

    /// Binary table view: one row per set, `1` where a variable participates,
    /// and a trailing `P` (dummy) or `p` (no dummy).
    pub fn binary_table(&self) -> String {
        let width = self.constraints.iter().map(|c| c.label.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.constraints {
            let mut bits = vec!['0'; self.num_vars()];
            for v in &c.vars {
                bits[v.0] = '1';
            }
            let row: String = bits.into_iter().collect();
            let tag = if c.has_dummy { 'P' } else { 'p' };
            out.push_str(&format!("{:<width$}  {} {}\n", c.label, row, tag));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct CspFile {
    variables: Vec<String>,
    constraints: Vec<ConstraintFile>,
}

#[derive(Serialize, Deserialize)]
struct ConstraintFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    vars: Vec<String>,
    #[serde(default)]
    dummy: bool,
}

/// Values for every variable plus the per-set dummy bits.
///
/// A dummy bit of `None` is left free: the checker accepts whichever value
/// completes the set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub bits: Vec<bool>,
    pub dummy_bits: Vec<Option<bool>>,
}

impl Assignment {
    /// Assignment with free dummies.
    pub fn from_bits(bits: Vec<bool>, n_constraints: usize) -> Self {
        Self {
            bits,
            dummy_bits: vec![None; n_constraints],
        }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_str_bits(s: &str, n_constraints: usize) -> Self {
        Self::from_bits(s.chars().map(|c| c == '1').collect(), n_constraints)
    }

    pub fn get(&self, v: VarId) -> bool {
        self.bits[v.0]
    }

    /// Bit string such as `0101`.
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Sum of a set's real variables under `a`.
pub fn set_sum(c: &ConstraintSet, a: &Assignment) -> usize {
    c.vars.iter().filter(|v| a.bits[v.0]).count()
}

/// True when `c` holds under `a`, honouring a fixed dummy bit if present.
pub fn set_holds(c: &ConstraintSet, a: &Assignment, dummy: Option<bool>) -> bool {
    let sum = set_sum(c, a);
    if !c.has_dummy {
        return sum == 1;
    }
    match dummy {
        Some(d) => sum + usize::from(d) == 1,
        None => sum <= 1,
    }
}

/// Indices of the sets violated by `a`.
pub fn violations(inst: &CspInstance, a: &Assignment) -> Result<Vec<usize>, ModelError> {
    if a.bits.len() != inst.num_vars() {
        return Err(ModelError::DomainMismatch {
            expected: inst.num_vars(),
            got: a.bits.len(),
        });
    }
    Ok(inst
        .constraints
        .iter()
        .enumerate()
        .filter(|(k, c)| !set_holds(c, a, a.dummy_bits.get(*k).copied().flatten()))
        .map(|(k, _)| k)
        .collect())
}

/// Checks every set of `inst` under `a`.
pub fn check_assignment(inst: &CspInstance, a: &Assignment) -> Result<bool, ModelError> {
    Ok(violations(inst, a)?.is_empty())
}

/// Output of [`enumerate_feasible`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub assignments: Vec<Assignment>,
    pub truncated: bool,
}

/// All feasible assignments in lexicographic bit order, dummies filled in.
pub fn enumerate_feasible(inst: &CspInstance, cap: usize) -> Result<Enumeration, ModelError> {
    let n = inst.num_vars();
    if n > ORACLE_LIMIT {
        return Err(ModelError::TooLarge {
            n,
            limit: ORACLE_LIMIT,
        });
    }
    // Sets indexed by their highest member so each set is checked once it is complete.
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, c) in inst.constraints.iter().enumerate() {
        let last = c.vars.iter().map(|v| v.0).max().expect("non-empty set");
        closing[last].push(k);
        for v in &c.vars {
            touching[v.0].push(k);
        }
    }
    let mut state = EnumState {
        inst,
        closing,
        touching,
        sums: vec![0; inst.constraints.len()],
        bits: vec![false; n],
        out: Vec::new(),
        cap,
        truncated: false,
    };
    state.walk(0);
    Ok(Enumeration {
        assignments: state.out,
        truncated: state.truncated,
    })
}

struct EnumState<'a> {
    inst: &'a CspInstance,
    closing: Vec<Vec<usize>>,
    touching: Vec<Vec<usize>>,
    sums: Vec<usize>,
    bits: Vec<bool>,
    out: Vec<Assignment>,
    cap: usize,
    truncated: bool,
}

impl EnumState<'_> {
    fn walk(&mut self, i: usize) {
        if self.truncated {
            return;
        }
        if i == self.bits.len() {
            if self.out.len() == self.cap {
                self.truncated = true;
                return;
            }
            let dummy_bits = self
                .inst
                .constraints
                .iter()
                .zip(&self.sums)
                .map(|(c, &s)| c.has_dummy.then_some(s == 0))
                .collect();
            self.out.push(Assignment {
                bits: self.bits.clone(),
                dummy_bits,
            });
            return;
        }
        for value in [false, true] {
            self.bits[i] = value;
            if value {
                for &k in &self.touching[i] {
                    self.sums[k] += 1;
                }
            }
            let ok = self.touching[i].iter().all(|&k| self.sums[k] <= 1)
                && self.closing[i]
                    .iter()
                    .all(|&k| self.sums[k] == 1 || self.inst.constraints[k].has_dummy);
            if ok {
                self.walk(i + 1);
            }
            if value {
                for &k in &self.touching[i] {
                    self.sums[k] -= 1;
                }
            }
        }
        self.bits[i] = false;
    }
}
