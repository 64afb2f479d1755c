//! Full atom-array layouts: assembly, ASCII grids, statistics and cost weights.
//!
//! One constraint occupies one band of nine grid rows; consecutive bands
//! share their boundary row through stitched vertices. Variable `2k` sits in
//! the left slot and `2k+1` in the right slot of cell `k`, and every band ends
//! with its dummy cell.

use crate::gadgets::{
    build_composite_row, stitch_rows, CellCode, DummyCode, GadgetError, GadgetGraph, Role,
    RowPattern, BAND, CHUNK,
};
use crate::model::{CspInstance, ModelError, VarId};
use crate::mwis::WeightedGraph;
use crate::reduce::live_widths;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use thiserror::Error;

/// Errors from layout assembly, parsing and cost weighting.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LayoutError {
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("cost refers to variable {0}, which has no optimization vertex")]
    UnboundCost(String),
    #[error("constraint gap violated: {0}")]
    GapViolation(String),
}

/// The rows of the grid owned by one constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Band {
    pub label: String,
    pub first_row: i32,
    pub last_row: i32,
    pub pattern: RowPattern,
}

/// An assembled atom array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaaLayout {
    pub graph: GadgetGraph,
    pub bands: Vec<Band>,
    /// Variable labels in column order.
    pub variables: Vec<String>,
    /// Optimization vertices of each variable, top band first.
    pub bindings: BTreeMap<VarId, Vec<usize>>,
    /// Dummy vertex of each band.
    pub dummies: Vec<Option<usize>>,
    pub width: i32,
    pub height: i32,
}

/// Assembly switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssembleOptions {
    /// Drop cells whose variables are not used in the current or any later band.
    pub tail_cut: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self { tail_cut: true }
    }
}

/// Row pattern of every constraint, in instance order.
pub fn row_patterns(inst: &CspInstance, opts: AssembleOptions) -> Vec<RowPattern> {
    let n = inst.num_vars();
    let live = if opts.tail_cut {
        live_widths(inst.constraints())
    } else {
        vec![n; inst.constraints().len()]
    };
    inst.constraints()
        .iter()
        .zip(live)
        .map(|(c, width)| {
            let ncells = width.div_ceil(2);
            let has = |i: usize| c.vars.contains(&VarId(i));
            RowPattern {
                cells: (0..ncells).map(|k| CellCode::new(has(2 * k), has(2 * k + 1))).collect(),
                dummy: Some(if c.has_dummy {
                    DummyCode::Allowed
                } else {
                    DummyCode::Forbidden
                }),
                odd_tail: 2 * ncells > n,
            }
        })
        .collect()
}

/// Builds the layout of a reduced, reordered instance.
pub fn assemble(inst: &CspInstance, opts: AssembleOptions) -> Result<RaaLayout, LayoutError> {
    let rows: Vec<(String, RowPattern)> = inst
        .constraints()
        .iter()
        .map(|c| c.label.clone())
        .zip(row_patterns(inst, opts))
        .collect();
    let labels: Vec<String> = inst.variables().iter().map(|v| v.label.clone()).collect();
    assemble_rows(&rows, &labels)
}

/// Builds a layout from explicit band patterns.
pub fn assemble_rows(rows: &[(String, RowPattern)], variables: &[String]) -> Result<RaaLayout, LayoutError> {
    let mut built = Vec::with_capacity(rows.len());
    for (_, p) in rows {
        let bindings: Vec<Option<VarId>> = (0..p.slots())
            .map(|i| {
                let cell = p.cells[i / 2];
                let on = if i % 2 == 0 { cell.left } else { cell.right };
                on.then_some(VarId(i))
            })
            .collect();
        if let Some(v) = bindings.iter().flatten().find(|v| v.0 >= variables.len()) {
            return Err(ModelError::UnknownVariable(format!("column {}", v.0)).into());
        }
        built.push(build_composite_row(p, &bindings)?);
    }
    let graph = stitch_rows(&built)?;
    let mut bindings: BTreeMap<VarId, Vec<usize>> = BTreeMap::new();
    for v in &graph.vertices {
        if let Some(b) = v.binding {
            bindings.entry(b).or_default().push(v.id);
        }
    }
    for ids in bindings.values_mut() {
        ids.sort_by_key(|&i| graph.vertices[i].band);
    }
    let dummies = (0..rows.len()).map(|r| graph.port(&format!("r{r}.dummy"))).collect();
    let bands = rows
        .iter()
        .enumerate()
        .map(|(r, (label, p))| Band {
            label: label.clone(),
            first_row: BAND * r as i32,
            last_row: BAND * r as i32 + BAND,
            pattern: p.clone(),
        })
        .collect();
    let width = rows
        .first()
        .map_or(0, |(_, p)| CHUNK * (p.cells.len() + usize::from(p.dummy.is_some())) as i32 + 4);
    let height = if rows.is_empty() { 0 } else { BAND * rows.len() as i32 + 1 };
    Ok(RaaLayout {
        graph,
        bands,
        variables: variables.to_vec(),
        bindings,
        dummies,
        width,
        height,
    })
}

impl RaaLayout {
    /// Occupied sites.
    pub fn grid(&self) -> BTreeMap<(i32, i32), usize> {
        self.graph.vertices.iter().map(|v| (v.pos, v.id)).collect()
    }

    /// Optimization vertex of `v` in its first band (the read-out vertex).
    pub fn readout(&self, v: VarId) -> Option<usize> {
        self.bindings.get(&v).and_then(|ids| ids.first().copied())
    }

    pub fn weighted_graph(&self) -> WeightedGraph {
        self.graph.weighted_graph()
    }

    fn ascii_with(&self, cell: impl Fn(usize) -> char) -> String {
        let grid = self.grid();
        let mut s = String::with_capacity(((self.width + 1) * self.height) as usize);
        for r in 0..self.height {
            for c in 0..self.width {
                s.push(grid.get(&(r, c)).map_or('.', |&id| cell(id)));
            }
            s.push('\n');
        }
        s
    }
}

fn digit(w: u32) -> char {
    char::from_digit(w, 10).unwrap_or('#')
}

/// Weight digit per occupied site, `.` elsewhere.
pub fn render_ascii(layout: &RaaLayout) -> String {
    layout.ascii_with(|id| digit(layout.graph.vertices[id].weight))
}

/// Like [`render_ascii`], with inactive atoms shown as `0`.
pub fn render_activation(layout: &RaaLayout, active: &[bool]) -> String {
    layout.ascii_with(|id| {
        if active[id] {
            digit(layout.graph.vertices[id].weight)
        } else {
            '0'
        }
    })
}

/// A parsed weight grid.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AsciiGrid {
    pub width: i32,
    pub height: i32,
    pub cells: BTreeMap<(i32, i32), u32>,
}

impl AsciiGrid {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for r in 0..self.height {
            for c in 0..self.width {
                s.push(self.cells.get(&(r, c)).map_or('.', |&w| digit(w)));
            }
            s.push('\n');
        }
        s
    }

    pub fn atoms(&self) -> usize {
        self.cells.len()
    }
}

/// Parses a weight grid. Surrounding whitespace on each line and trailing
/// blank lines are ignored; rows must share one width.
pub fn parse_ascii(text: &str) -> Result<AsciiGrid, LayoutError> {
    let lines: Vec<&str> = text.lines().collect();
    let end = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |i| i + 1);
    let mut g = AsciiGrid::default();
    for (r, raw) in lines[..end].iter().enumerate() {
        let lead = raw.len() - raw.trim_start().len();
        let line = raw.trim();
        let width = line.chars().count() as i32;
        if r == 0 {
            g.width = width;
        } else if width != g.width {
            return Err(LayoutError::Parse {
                line: r + 1,
                column: 1,
                message: format!("row width {width}, expected {}", g.width),
            });
        }
        for (c, ch) in line.chars().enumerate() {
            match ch {
                '.' => {}
                '1'..='6' => {
                    g.cells.insert((r as i32, c as i32), ch.to_digit(10).expect("digit"));
                }
                _ => {
                    return Err(LayoutError::Parse {
                        line: r + 1,
                        column: lead + c + 1,
                        message: format!("unexpected character {ch:?}"),
                    })
                }
            }
        }
    }
    g.height = end as i32;
    Ok(g)
}

/// Grid of an assembled layout.
pub fn grid_of(layout: &RaaLayout) -> AsciiGrid {
    AsciiGrid {
        width: layout.width,
        height: layout.height,
        cells: layout.graph.vertices.iter().map(|v| (v.pos, v.weight)).collect(),
    }
}

/// Resource counts of a layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutStats {
    pub atoms: usize,
    pub width: i32,
    pub height: i32,
    /// Largest vertex weight in δ units, i.e. the detuning range.
    pub max_weight: u32,
    pub max_degree: usize,
    pub optimization_vertices: usize,
    pub per_band_atoms: Vec<usize>,
}

impl LayoutStats {
    /// `1 − atoms / baseline`.
    pub fn reduction(&self, baseline_atoms: usize) -> f64 {
        if baseline_atoms == 0 {
            0.0
        } else {
            1.0 - self.atoms as f64 / baseline_atoms as f64
        }
    }
}

impl fmt::Display for LayoutStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "atoms {}", self.atoms)?;
        writeln!(f, "dims {}x{}", self.width, self.height)?;
        writeln!(f, "max_weight {}", self.max_weight)?;
        writeln!(f, "max_degree {}", self.max_degree)?;
        writeln!(f, "optimization_vertices {}", self.optimization_vertices)?;
        let bands: Vec<String> = self.per_band_atoms.iter().map(|a| a.to_string()).collect();
        writeln!(f, "per_band_atoms {}", bands.join(" "))
    }
}

pub fn stats(layout: &RaaLayout) -> LayoutStats {
    let g = &layout.graph;
    let mut per_band = vec![0; layout.bands.len()];
    for v in &g.vertices {
        per_band[v.band] += 1;
    }
    LayoutStats {
        atoms: g.len(),
        width: layout.width,
        height: layout.height,
        max_weight: g.max_weight(),
        max_degree: g.max_degree(),
        optimization_vertices: g.vertices.iter().filter(|v| v.role == Role::Optimization).count(),
        per_band_atoms: per_band,
    }
}

/// Scaling estimate `m·(16n + 4⌈n/2⌉) − (m−1)·n`.
pub fn estimate_atoms(n_vars: usize, m_constraints: usize) -> usize {
    if n_vars == 0 || m_constraints == 0 {
        return 0;
    }
    m_constraints * (16 * n_vars + 4 * n_vars.div_ceil(2)) - (m_constraints - 1) * n_vars
}

/// How the cost function is folded into the vertex weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Add `ε·c` to optimization weights; `None` picks the default ε.
    Epsilon(Option<Rational64>),
    /// Multiply all weights by `λ` and add `c`; `None` picks the default λ.
    Lambda(Option<i64>),
}

/// Parameters of an applied cost function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub mode: CostMode,
    /// Multiplier applied to the cost (ε or 1).
    pub cost_scale: Rational64,
    /// Multiplier applied to the gadget weights (1 or λ).
    pub weight_scale: i64,
    /// Bound on the cost range over all assignments: `Σ|c|`.
    pub cost_range: i64,
    /// Penalty in δ units.
    pub penalty: Rational64,
    /// Constraint gap `U − 12δ`.
    pub zeta: Rational64,
    pub min_weight: Rational64,
    pub max_weight: Rational64,
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cost_scale {}", self.cost_scale)?;
        writeln!(f, "weight_scale {}", self.weight_scale)?;
        writeln!(f, "cost_range {}", self.cost_range)?;
        writeln!(f, "penalty {}", self.penalty)?;
        writeln!(f, "zeta {}", self.zeta)?;
        writeln!(f, "weight_range {}..{}", self.min_weight, self.max_weight)
    }
}

/// Vertex weights with a cost function folded in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostedWeights {
    pub weights: Vec<Rational64>,
    pub report: CostReport,
}

impl CostedWeights {
    pub fn graph(&self, layout: &RaaLayout) -> WeightedGraph {
        WeightedGraph::new(self.weights.clone(), &layout.graph.edges).expect("positive weights")
    }
}

/// Folds per-variable costs into the read-out optimization vertices.
///
/// The MWIS then maximizes the cost among feasible configurations. `u` is
/// the penalty in δ units and must exceed 12δ.
pub fn apply_cost(
    layout: &RaaLayout,
    cost: &BTreeMap<VarId, i64>,
    mode: CostMode,
    u: Rational64,
) -> Result<CostedWeights, LayoutError> {
    let twelve = Rational64::from_integer(12);
    let zeta = u - twelve;
    if !zeta.is_positive() {
        return Err(LayoutError::GapViolation(format!("U = {u} leaves no gap above 12δ")));
    }
    let mut readout = Vec::new();
    for (v, &c) in cost {
        let id = layout.readout(*v).ok_or_else(|| {
            LayoutError::UnboundCost(layout.variables.get(v.0).cloned().unwrap_or(format!("#{}", v.0)))
        })?;
        readout.push((id, c));
    }
    let range: i64 = cost.values().map(|c| c.abs()).sum();
    let range_r = Rational64::from_integer(range);
    let (cost_scale, weight_scale) = match mode {
        CostMode::Epsilon(eps) => {
            let tenth = zeta / Rational64::from_integer(10);
            let eps = eps.unwrap_or_else(|| {
                Rational64::new(1, (range_r / tenth).to_integer() + 1)
            });
            if !eps.is_positive() || (range > 0 && eps * range_r >= tenth) {
                return Err(LayoutError::GapViolation(format!(
                    "ε·range = {} is not below ζ/10 = {tenth}",
                    eps * range_r
                )));
            }
            (eps, 1)
        }
        CostMode::Lambda(lambda) => {
            let lambda = lambda.unwrap_or(range + 1);
            if lambda <= range {
                return Err(LayoutError::GapViolation(format!(
                    "λ = {lambda} does not exceed the cost range {range}"
                )));
            }
            (Rational64::from_integer(1), lambda)
        }
    };
    let mut weights: Vec<Rational64> = layout
        .graph
        .vertices
        .iter()
        .map(|v| Rational64::from_integer(i64::from(v.weight) * weight_scale))
        .collect();
    for (id, c) in readout {
        weights[id] += cost_scale * Rational64::from_integer(c);
    }
    if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
        return Err(LayoutError::GapViolation(format!("cost drives a weight to {w}")));
    }
    let min_weight = weights.iter().copied().min().unwrap_or_else(Rational64::zero);
    let max_weight = weights.iter().copied().max().unwrap_or_else(Rational64::zero);
    Ok(CostedWeights {
        weights,
        report: CostReport {
            mode,
            cost_scale,
            weight_scale,
            cost_range: range,
            penalty: u,
            zeta,
            min_weight,
            max_weight,
        },
    })
}

/// Parses `label cost` lines; blank lines and `#` comments are skipped.
pub fn parse_cost_file(text: &str) -> Result<Vec<(String, i64)>, LayoutError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |column: usize, message: &str| LayoutError::Parse {
            line: i + 1,
            column,
            message: message.to_string(),
        };
        let mut parts = line.split_whitespace();
        let (Some(label), Some(cost), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(1, "expected `label cost`"));
        };
        let column = raw.find(cost).unwrap_or(0) + 1;
        let cost = cost.parse::<i64>().map_err(|e| err(column, &e.to_string()))?;
        out.push((label.to_string(), cost));
    }
    Ok(out)
}

/// Parses `label: pattern` lines, one band per line. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_pattern_table(text: &str) -> Result<Vec<(String, RowPattern)>, LayoutError> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, pat) = line.split_once(':').ok_or_else(|| LayoutError::Parse {
            line: k + 1,
            column: 1,
            message: "expected `label: pattern`".into(),
        })?;
        let p = RowPattern::parse(pat).ok_or_else(|| LayoutError::Parse {
            line: k + 1,
            column: label.len() + 2,
            message: "bad row pattern".into(),
        })?;
        rows.push((label.trim().to_string(), p));
    }
    Ok(rows)
}

/// Widens every band to the widest one with non-participating cells.
pub fn pad_rows(rows: &[(String, RowPattern)]) -> Vec<(String, RowPattern)> {
    let width = rows.iter().map(|(_, p)| p.cells.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(l, p)| {
            let mut p = p.clone();
            p.cells.resize(width, CellCode::new(false, false));
            (l.clone(), p)
        })
        .collect()
}

/// Default variable labels `v0, v1, …` for a pattern table.
pub fn pattern_variables(rows: &[(String, RowPattern)]) -> Vec<String> {
    let n = rows.iter().map(|(_, p)| p.slots()).max().unwrap_or(0);
    (0..n).map(|i| format!("v{i}")).collect()
}

/// Layout file: a header with dims, band table and bindings, then the grid.
pub fn to_layout_file(layout: &RaaLayout) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "layout {} {}", layout.width, layout.height);
    for (i, v) in layout.variables.iter().enumerate() {
        let ids: Vec<String> = layout
            .bindings
            .get(&VarId(i))
            .map(|ids| ids.iter().map(|x| x.to_string()).collect())
            .unwrap_or_default();
        let _ = writeln!(s, "var {v} {}", ids.join(" "));
    }
    for b in &layout.bands {
        let _ = writeln!(s, "band {} {} {} {}", b.label, b.first_row, b.last_row, b.pattern);
    }
    s.push_str("grid\n");
    s.push_str(&render_ascii(layout));
    s
}

/// Rebuilds a layout from its file and checks the grid against the rebuild.
pub fn from_layout_file(text: &str) -> Result<RaaLayout, LayoutError> {
    let err = |line: usize, message: String| LayoutError::Parse {
        line,
        column: 1,
        message,
    };
    let mut vars = Vec::new();
    let mut rows = Vec::new();
    let mut grid_at = None;
    for (k, line) in text.lines().enumerate() {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("layout") | None => {}
            Some("var") => vars.push(toks.next().ok_or_else(|| err(k + 1, "missing label".into()))?.to_string()),
            Some("band") => {
                let label = toks.next().ok_or_else(|| err(k + 1, "missing label".into()))?;
                let rest: Vec<&str> = toks.skip(2).collect();
                let p = RowPattern::parse(&rest.join(" "))
                    .ok_or_else(|| err(k + 1, "bad row pattern".into()))?;
                rows.push((label.to_string(), p));
            }
            Some("grid") => {
                grid_at = Some(k + 1);
                break;
            }
            Some(t) => return Err(err(k + 1, format!("unknown record {t:?}"))),
        }
    }
    let start = grid_at.ok_or_else(|| err(1, "missing grid section".into()))?;
    let body: String = text.lines().skip(start).map(|l| format!("{l}\n")).collect();
    let grid = parse_ascii(&body).map_err(|e| match e {
        LayoutError::Parse { line, column, message } => LayoutError::Parse {
            line: line + start,
            column,
            message,
        },
        other => other,
    })?;
    let layout = assemble_rows(&rows, &vars)?;
    if grid_of(&layout) != grid {
        return Err(err(start + 1, "grid does not match the band patterns".into()));
    }
    Ok(layout)
}
