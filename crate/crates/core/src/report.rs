//! Resource tables over compiled instances.

use crate::layout::{
    assemble, assemble_rows, pad_rows, parse_pattern_table, pattern_variables, stats, AssembleOptions,
    LayoutStats,
};
use crate::problems::{encode_queens, QueensInstance};
use crate::gadgets::RowPattern;
use crate::model::CspInstance;
use crate::reduce::{reduce_fixpoint, reorder};
use serde::{Deserialize, Serialize};
use std::fmt::{self, Write as _};

/// Reference values for one published instance; constants, never recomputed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reference {
    pub label: String,
    pub opt_vars: usize,
    pub atoms: usize,
    pub atoms_pre: usize,
    pub dims: String,
    pub qubo_atoms: usize,
    pub qubo_dims: String,
    pub qubo_detuning: u64,
    pub detuning: u32,
}

#[derive(Debug, Deserialize)]
struct ReferenceFile {
    rows: Vec<Reference>,
}

const REFERENCE_JSON: &str = include_str!("../data/reference.json");

/// The shipped reference table.
pub fn references() -> Vec<Reference> {
    serde_json::from_str::<ReferenceFile>(REFERENCE_JSON)
        .expect("reference table parses")
        .rows
}

pub fn reference(label: &str) -> Option<Reference> {
    references().into_iter().find(|r| r.label == label)
}

/// Band patterns of the three shipped gate examples, labeled `gate-I` to `gate-III`.
pub const GATE_PATTERN_TABLES: [(&str, &str); 3] = [
    ("gate-I", include_str!("../data/gate_example_1.rows")),
    ("gate-II", include_str!("../data/gate_example_2.rows")),
    ("gate-III", include_str!("../data/gate_example_3.rows")),
];

/// The shipped gate pattern tables followed by `queens-n` for each size.
pub fn builtin_inputs(queens: &[usize]) -> Result<Vec<BenchmarkInput>, String> {
    let mut out = Vec::new();
    for (label, text) in GATE_PATTERN_TABLES {
        let rows = parse_pattern_table(text).map_err(|e| format!("{label}: {e}"))?;
        out.push(BenchmarkInput::Patterns {
            label: label.to_string(),
            rows,
        });
    }
    for &n in queens {
        let instance = encode_queens(&QueensInstance { n }).map_err(|e| e.to_string())?;
        out.push(BenchmarkInput::Csp {
            label: format!("queens-{n}"),
            instance,
        });
    }
    Ok(out)
}

/// Something to benchmark.
#[derive(Debug, Clone)]
pub enum BenchmarkInput {
    /// Raw instance: the baseline is its full-width layout, the optimized
    /// layout follows reduction, reordering and tail-cuts.
    Csp { label: String, instance: CspInstance },
    /// Finished band patterns: the baseline pads every band to full width.
    Patterns {
        label: String,
        rows: Vec<(String, RowPattern)>,
    },
}

impl BenchmarkInput {
    pub fn label(&self) -> &str {
        match self {
            Self::Csp { label, .. } | Self::Patterns { label, .. } => label,
        }
    }
}

/// One table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub label: String,
    pub opt_vars: usize,
    pub constraints: usize,
    pub atoms_pre: usize,
    pub atoms_post: usize,
    pub delta: f64,
    pub width: i32,
    pub height: i32,
    pub detuning: u32,
    pub max_degree: usize,
    pub reference: Option<Reference>,
}

impl BenchmarkRow {
    fn from_stats(label: &str, opt_vars: usize, constraints: usize, pre: &LayoutStats, post: &LayoutStats) -> Self {
        Self {
            label: label.to_string(),
            opt_vars,
            constraints,
            atoms_pre: pre.atoms,
            atoms_post: post.atoms,
            delta: round2(post.reduction(pre.atoms)),
            width: post.width,
            height: post.height,
            detuning: post.max_weight.max(pre.max_weight),
            max_degree: post.max_degree.max(pre.max_degree),
            reference: reference(label),
        }
    }

    /// Relative deviation of `ours` from `theirs`.
    pub fn deviation(ours: usize, theirs: usize) -> f64 {
        ours as f64 / theirs as f64 - 1.0
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn run_one(input: &BenchmarkInput) -> Result<BenchmarkRow, String> {
    match input {
        BenchmarkInput::Csp { label, instance } => {
            let full = AssembleOptions { tail_cut: false };
            let pre = stats(&assemble(instance, full).map_err(|e| e.to_string())?);
            let (reduced, _) = reduce_fixpoint(instance).map_err(|e| e.to_string())?;
            let (ordered, _) = reorder(&reduced);
            let post = stats(&assemble(&ordered, AssembleOptions::default()).map_err(|e| e.to_string())?);
            Ok(BenchmarkRow::from_stats(label, ordered.num_vars(), ordered.constraints().len(), &pre, &post))
        }
        BenchmarkInput::Patterns { label, rows } => {
            let vars = pattern_variables(rows);
            let pre = stats(&assemble_rows(&pad_rows(rows), &vars).map_err(|e| e.to_string())?);
            let post = stats(&assemble_rows(rows, &vars).map_err(|e| e.to_string())?);
            let used = (0..vars.len())
                .filter(|&i| rows.iter().any(|(_, p)| {
                    p.cells.get(i / 2).is_some_and(|c| if i % 2 == 0 { c.left } else { c.right })
                }))
                .count();
            Ok(BenchmarkRow::from_stats(label, used, rows.len(), &pre, &post))
        }
    }
}

/// One row per input; inputs compile on separate threads and failures stay per row.
pub fn benchmark(inputs: &[BenchmarkInput]) -> Vec<Result<BenchmarkRow, String>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = inputs.iter().map(|i| s.spawn(move || run_one(i))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("benchmark thread panicked".into())))
            .collect()
    })
}

/// Aligned plain-text table.
pub fn format_table(rows: &[Result<BenchmarkRow, String>]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:>5} {:>5} {:>9} {:>9} {:>5} {:>11} {:>4} {:>9} {:>9} {:>9} {:>6}",
        "label", "vars", "cstr", "atoms*", "atoms", "delta", "dims", "det", "ref", "ref*", "qubo", "qdet"
    );
    for r in rows {
        match r {
            Ok(r) => {
                let (a, p, q, d) = r.reference.as_ref().map_or(
                    ("-".into(), "-".into(), "-".into(), "-".into()),
                    |x| {
                        (
                            x.atoms.to_string(),
                            x.atoms_pre.to_string(),
                            x.qubo_atoms.to_string(),
                            x.qubo_detuning.to_string(),
                        )
                    },
                );
                let _ = writeln!(
                    s,
                    "{:<10} {:>5} {:>5} {:>9} {:>9} {:>5.2} {:>11} {:>4} {:>9} {:>9} {:>9} {:>6}",
                    r.label,
                    r.opt_vars,
                    r.constraints,
                    r.atoms_pre,
                    r.atoms_post,
                    r.delta,
                    format!("{}x{}", r.width, r.height),
                    r.detuning,
                    a,
                    p,
                    q,
                    d
                );
            }
            Err(e) => {
                let _ = writeln!(s, "error: {e}");
            }
        }
    }
    s
}

/// Structured form of the table.
pub fn to_json(rows: &[Result<BenchmarkRow, String>]) -> String {
    let v: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| match r {
            Ok(r) => serde_json::to_value(r).expect("row serializes"),
            Err(e) => serde_json::json!({ "error": e }),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&v).expect("table serializes");
    s.push('\n');
    s
}

impl fmt::Display for BenchmarkRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_table(&[Ok(self.clone())]))
    }
}
