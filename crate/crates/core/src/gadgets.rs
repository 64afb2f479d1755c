//! Weighted gadget templates and their assembly into composite rows.
//!
//! Every template lists its vertices with band-local grid positions and an
//! explicit edge list. Edges are the source of truth; positions are for
//! rendering. A composite cell occupies a 12-column chunk: the left and right
//! copy slots, the re-weighted xor₁ unit, and one crossing per slot. Chunk `k`
//! starts at column `12k`, and each band spans rows 0 through 8. Row 0 holds
//! the copy terminals that are fed from the band above, and row 8 holds the
//! crossing legs that feed the band below.
//!
//! Two index slips in the published interaction lists are resolved by the
//! grid listings. In the crossing, the second `d'1` interior term reads
//! `d'1 d''4`. In the composite, the `d1 (x2) a4` link reads `d'2 (x2) a4`.

use crate::model::VarId;
use crate::mwis::WeightedGraph;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Column pitch of one composite cell.
pub const CHUNK: i32 = 12;
/// Row pitch between stitched bands.
pub const BAND: i32 = 8;

/// Functional role of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Optimization,
    Ancilla,
    Copy,
    CrossExterior,
    CrossInterior,
    Dummy,
    Aux,
}

/// A weighted vertex in δ units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub weight: u32,
    pub role: Role,
    /// Template label such as `c''` or `d'1`.
    pub tag: String,
    pub pos: (i32, i32),
    /// Band (constraint row) the vertex was built for.
    pub band: usize,
    pub binding: Option<VarId>,
}

/// Weighted vertex/edge graph with named ports.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GadgetGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
    pub ports: BTreeMap<String, usize>,
}

/// Errors from template assembly and stitching.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GadgetError {
    #[error("unit cells hold one or two optimization vertices, not {0}")]
    UnitArity(usize),
    #[error("pattern has {slots} slots but {bindings} bindings were given")]
    BindingArity { slots: usize, bindings: usize },
    #[error("participating slot {0} has no variable binding")]
    MissingBinding(usize),
    #[error("row {row} needs port `{port}` from the row above, which has none")]
    ColumnMismatch { row: usize, port: String },
    #[error("cannot merge `{upper}` (weight {upper_weight}) with `{lower}` (weight {lower_weight})")]
    IncompatibleMerge {
        upper: String,
        upper_weight: u32,
        lower: String,
        lower_weight: u32,
    },
}

impl GadgetGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a vertex and returns its id.
    pub fn add(&mut self, tag: &str, weight: u32, role: Role, pos: (i32, i32)) -> usize {
        let id = self.vertices.len();
        self.vertices.push(Vertex {
            id,
            weight,
            role,
            tag: tag.to_string(),
            pos,
            band: 0,
            binding: None,
        });
        id
    }

    pub fn connect(&mut self, a: usize, b: usize) {
        assert_ne!(a, b, "self-edge on {}", self.vertices[a].tag);
        self.edges.push((a.min(b), a.max(b)));
    }

    pub fn port(&self, name: &str) -> Option<usize> {
        self.ports.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.len()];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn max_weight(&self) -> u32 {
        self.vertices.iter().map(|v| v.weight).max().unwrap_or(0)
    }

    /// Unweighted-cost MWIS view.
    pub fn weighted_graph(&self) -> WeightedGraph {
        WeightedGraph::from_integer(
            &self.vertices.iter().map(|v| i64::from(v.weight)).collect::<Vec<_>>(),
            &self.edges,
        )
    }

    /// Edges implied by grid positions under king adjacency (Chebyshev distance 1).
    pub fn king_edges(&self) -> BTreeSet<(usize, usize)> {
        let at: BTreeMap<(i32, i32), usize> = self.vertices.iter().map(|v| (v.pos, v.id)).collect();
        let mut out = BTreeSet::new();
        for v in &self.vertices {
            for dr in -1..=1 {
                for dc in -1..=1 {
                    if (dr, dc) == (0, 0) {
                        continue;
                    }
                    if let Some(&u) = at.get(&(v.pos.0 + dr, v.pos.1 + dc)) {
                        out.insert((u.min(v.id), u.max(v.id)));
                    }
                }
            }
        }
        out
    }

    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().copied().collect()
    }

    /// Ids of vertices whose tag matches.
    pub fn find_tag(&self, tag: &str) -> Vec<usize> {
        self.vertices.iter().filter(|v| v.tag == tag).map(|v| v.id).collect()
    }

    fn shift(&mut self, dr: i32, dc: i32) {
        for v in &mut self.vertices {
            v.pos = (v.pos.0 + dr, v.pos.1 + dc);
        }
    }

    /// Copies `other` in, returning the id offset.
    fn absorb(&mut self, other: &GadgetGraph, prefix: &str) -> usize {
        let off = self.len();
        for v in &other.vertices {
            let mut v = v.clone();
            v.id += off;
            self.vertices.push(v);
        }
        self.edges.extend(other.edges.iter().map(|&(a, b)| (a + off, b + off)));
        for (name, &id) in &other.ports {
            self.ports.insert(format!("{prefix}{name}"), id + off);
        }
        off
    }

    /// Drops the listed vertices (with their edges and ports) and renumbers.
    fn remove(&mut self, dead: &BTreeSet<usize>) {
        let mut map = vec![usize::MAX; self.len()];
        let mut kept = Vec::with_capacity(self.len() - dead.len());
        for v in self.vertices.drain(..) {
            if !dead.contains(&v.id) {
                map[v.id] = kept.len();
                kept.push(v);
            }
        }
        for (i, v) in kept.iter_mut().enumerate() {
            v.id = i;
        }
        self.vertices = kept;
        self.edges = self
            .edges
            .iter()
            .filter(|(a, b)| !dead.contains(a) && !dead.contains(b))
            .map(|&(a, b)| (map[a], map[b]))
            .collect();
        self.ports = std::mem::take(&mut self.ports)
            .into_iter()
            .filter(|(_, id)| !dead.contains(id))
            .map(|(n, id)| (n, map[id]))
            .collect();
    }

    /// Renumbers vertices by band, then column, then row; sorts edges.
    pub fn canonicalize(&mut self) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| {
            let v = &self.vertices[i];
            (v.band, v.pos.1, v.pos.0)
        });
        let mut map = vec![0; self.len()];
        for (new, &old) in order.iter().enumerate() {
            map[old] = new;
        }
        let mut vs: Vec<Vertex> = order.iter().map(|&i| self.vertices[i].clone()).collect();
        for (i, v) in vs.iter_mut().enumerate() {
            v.id = i;
        }
        self.vertices = vs;
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| (map[a].min(map[b]), map[a].max(map[b])))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        self.edges = edges;
        for id in self.ports.values_mut() {
            *id = map[*id];
        }
    }
}

// ---------------------------------------------------------------------------
// Elementary gadgets
// ---------------------------------------------------------------------------

/// Template vertex: tag, band-local (row, column), weight, role.
type Tv = (&'static str, i32, i32, u32, Role);

use Role::{Ancilla as An, Copy as Cp, CrossExterior as Ce, CrossInterior as Ci};

/// xor₁ unit, two optimization vertices over the ancilla chain `a1..a4`.
const XOR_UNIT: [Tv; 6] = [
    ("x1", 4, 7, 1, Role::Optimization),
    ("x2", 4, 8, 1, Role::Optimization),
    ("a2", 5, 7, 2, An),
    ("a3", 5, 8, 2, An),
    ("a1", 6, 6, 2, An),
    ("a4", 6, 9, 2, An),
];
const XOR_EDGES: [(&str, &str); 8] = [
    ("x1", "x2"),
    ("x1", "a2"),
    ("x1", "a3"),
    ("x2", "a2"),
    ("x2", "a3"),
    ("a1", "a2"),
    ("a2", "a3"),
    ("a3", "a4"),
];

/// Copy chain feeding an optimization vertex from the left slot.
const COPY_LEFT: [Tv; 7] = [
    ("c2", 0, 3, 1, Cp),
    ("c'4", 1, 4, 3, Cp),
    ("c1", 1, 6, 1, Cp),
    ("c''", 2, 5, 5, Cp),
    ("c'3", 3, 4, 3, Cp),
    ("c'1", 3, 6, 3, Cp),
    ("c'2", 4, 4, 3, Cp),
];
const COPY_RIGHT: [Tv; 7] = [
    ("c2", 0, 11, 1, Cp),
    ("c1", 1, 9, 1, Cp),
    ("c'4", 1, 11, 3, Cp),
    ("c''", 2, 10, 5, Cp),
    ("c'1", 3, 9, 3, Cp),
    ("c'3", 3, 11, 3, Cp),
    ("c'2", 4, 12, 3, Cp),
];
const COPY_EDGES: [(&str, &str); 5] = [
    ("c2", "c'4"),
    ("c'4", "c''"),
    ("c''", "c1"),
    ("c''", "c'3"),
    ("c''", "c'1"),
];

/// Pass-through rail for a non-participating variable, plus the weight-5
/// blocker that keeps the unit's optimization vertex off.
const RAIL_LEFT: [Tv; 7] = [
    ("c2", 0, 3, 1, Cp),
    ("c'4", 1, 4, 3, Cp),
    ("c''", 2, 3, 5, Cp),
    ("c1", 3, 2, 1, Cp),
    ("c'3", 3, 4, 3, Cp),
    ("blk", 3, 6, 5, An),
    ("c'2", 4, 4, 3, Cp),
];
const RAIL_RIGHT: [Tv; 7] = [
    ("c2", 0, 11, 1, Cp),
    ("c'4", 1, 11, 3, Cp),
    ("c1", 1, 13, 1, Cp),
    ("c''", 2, 12, 5, Cp),
    ("blk", 3, 9, 5, An),
    ("c'3", 3, 11, 3, Cp),
    ("c'2", 4, 12, 3, Cp),
];
const RAIL_EDGES: [(&str, &str); 4] = [("c2", "c'4"), ("c'4", "c''"), ("c''", "c1"), ("c''", "c'3")];
const RAIL_TAIL: (&str, &str) = ("c'3", "c'2");

/// Crossing gadget: exteriors `d1,d2` (rail from the unit chain and the
/// downward leg), `d'1,d'2` (copy rail and ancilla), four interiors.
const CROSS_LEFT: [Tv; 8] = [
    ("d1", 6, 2, 2, Ce),
    ("d2", 8, 3, 2, Ce),
    ("d'1", 5, 4, 3, Ce),
    ("d'2", 7, 5, 3, Ce),
    ("d''1", 7, 3, 6, Ci),
    ("d''2", 7, 4, 6, Ci),
    ("d''3", 6, 3, 6, Ci),
    ("d''4", 6, 4, 6, Ci),
];
const CROSS_RIGHT: [Tv; 8] = [
    ("d1", 7, 13, 2, Ce),
    ("d2", 8, 11, 2, Ce),
    ("d'1", 5, 12, 3, Ce),
    ("d'2", 6, 10, 3, Ce),
    ("d''1", 7, 12, 6, Ci),
    ("d''2", 7, 11, 6, Ci),
    ("d''3", 6, 12, 6, Ci),
    ("d''4", 6, 11, 6, Ci),
];
const CROSS_EDGES: [(&str, &str); 14] = [
    ("d''1", "d''2"),
    ("d''1", "d''3"),
    ("d''1", "d''4"),
    ("d''2", "d''3"),
    ("d''2", "d''4"),
    ("d''3", "d''4"),
    ("d1", "d''1"),
    ("d1", "d''3"),
    ("d2", "d''1"),
    ("d2", "d''2"),
    ("d'1", "d''3"),
    ("d'1", "d''4"),
    ("d'2", "d''2"),
    ("d'2", "d''4"),
];

/// Local name → id map while a template is being placed.
struct Placed(BTreeMap<&'static str, usize>);

impl Placed {
    fn get(&self, tag: &str) -> usize {
        self.0[tag]
    }
}

fn place(g: &mut GadgetGraph, tvs: &[Tv], dc: i32, reweight: u32) -> Placed {
    let mut m = BTreeMap::new();
    for &(tag, r, c, w, role) in tvs {
        m.insert(tag, g.add(tag, w + reweight, role, (r, c + dc)));
    }
    Placed(m)
}

fn wire(g: &mut GadgetGraph, p: &Placed, edges: &[(&str, &str)]) {
    for (a, b) in edges {
        g.connect(p.get(a), p.get(b));
    }
}

/// Weight added to the unit vertices inside a composite cell.
const UNIT_SHIFT: u32 = 3;

/// Bare xor₁ unit cell with weights δ (optimization) and 2δ (ancilla).
///
/// Ports `a1` and `a4` are the chain ends.
pub fn build_xor1_unit(n_opt: usize) -> Result<GadgetGraph, GadgetError> {
    if !(1..=2).contains(&n_opt) {
        return Err(GadgetError::UnitArity(n_opt));
    }
    let mut g = GadgetGraph::new();
    let tvs: Vec<Tv> = XOR_UNIT.iter().copied().filter(|t| n_opt == 2 || t.0 != "x2").collect();
    let p = place(&mut g, &tvs, 0, 0);
    let edges: Vec<(&str, &str)> = XOR_EDGES
        .iter()
        .copied()
        .filter(|(a, b)| n_opt == 2 || (*a != "x2" && *b != "x2"))
        .collect();
    wire(&mut g, &p, &edges);
    g.ports.insert("a1".into(), p.get("a1"));
    g.ports.insert("a4".into(), p.get("a4"));
    g.ports.insert("x1".into(), p.get("x1"));
    if n_opt == 2 {
        g.ports.insert("x2".into(), p.get("x2"));
    }
    Ok(g)
}

/// `⌈n/2⌉` unit cells joined `a4 → a1`; an odd count ends in a one-vertex cell.
///
/// Optimization vertices carry bindings `VarId(0..n)`.
pub fn build_xor1_chain(n_vars: usize) -> GadgetGraph {
    let mut g = GadgetGraph::new();
    let mut prev_a4 = None;
    for k in 0..n_vars.div_ceil(2) {
        let n_opt = if 2 * k + 1 < n_vars { 2 } else { 1 };
        let mut unit = build_xor1_unit(n_opt).expect("arity 1 or 2");
        unit.shift(0, CHUNK * k as i32);
        let off = g.absorb(&unit, &format!("u{k}."));
        for (j, xs) in ["x1", "x2"].iter().enumerate().take(n_opt) {
            let id = unit.port(xs).expect("unit port") + off;
            g.vertices[id].binding = Some(VarId(2 * k + j));
        }
        let a1 = unit.port("a1").expect("a1") + off;
        if let Some(a4) = prev_a4 {
            g.connect(a4, a1);
        }
        prev_a4 = Some(unit.port("a4").expect("a4") + off);
    }
    g
}

/// Seven-vertex copy gadget. Port `src` (`c'1`) attaches to the source,
/// `top` (`c2`) and `out` (`c'2`) are the replicas at the ends.
pub fn build_copy() -> GadgetGraph {
    let mut g = GadgetGraph::new();
    let p = place(&mut g, &COPY_LEFT, 0, 0);
    wire(&mut g, &p, &COPY_EDGES);
    wire(&mut g, &p, &[RAIL_TAIL]);
    g.ports.insert("src".into(), p.get("c'1"));
    g.ports.insert("top".into(), p.get("c2"));
    g.ports.insert("out".into(), p.get("c'2"));
    g
}

/// Eight-vertex crossing gadget with ports for its four exteriors.
pub fn build_crossing() -> GadgetGraph {
    let mut g = GadgetGraph::new();
    let p = place(&mut g, &CROSS_LEFT, 0, 0);
    wire(&mut g, &p, &CROSS_EDGES);
    for t in ["d1", "d2", "d'1", "d'2"] {
        g.ports.insert(t.into(), p.get(t));
    }
    g
}

// ---------------------------------------------------------------------------
// Composite rows
// ---------------------------------------------------------------------------

/// Participation code of one variable-pair cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellCode {
    pub left: bool,
    pub right: bool,
}

impl CellCode {
    pub const fn new(left: bool, right: bool) -> Self {
        Self { left, right }
    }
}

impl fmt::Display for CellCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", u8::from(self.left), u8::from(self.right))
    }
}

/// Trailing dummy cell: `P` admits the all-zero row, `p` forbids it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DummyCode {
    Allowed,
    Forbidden,
}

/// Cells of one constraint row, left to right, and its trailing dummy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowPattern {
    pub cells: Vec<CellCode>,
    /// `None` builds bare composites without the dummy cell.
    pub dummy: Option<DummyCode>,
    /// Last cell covers a single variable; it renders as a `10` cell.
    pub odd_tail: bool,
}

impl RowPattern {
    /// Parses the textual form, e.g. `"00 01 01 P"`.
    pub fn parse(s: &str) -> Option<Self> {
        let mut cells = Vec::new();
        let mut dummy = None;
        let mut odd_tail = false;
        for tok in s.split_whitespace() {
            match tok {
                "P" | "0P" => dummy = Some(DummyCode::Allowed),
                "p" | "0p" => dummy = Some(DummyCode::Forbidden),
                _ => {
                    let b: Vec<char> = tok.chars().collect();
                    let bit = |c: char| match c {
                        '0' => Some(false),
                        '1' => Some(true),
                        _ => None,
                    };
                    match b.as_slice() {
                        [l, r] => cells.push(CellCode::new(bit(*l)?, bit(*r)?)),
                        [l] => {
                            cells.push(CellCode::new(bit(*l)?, false));
                            odd_tail = true;
                        }
                        _ => return None,
                    }
                }
            }
        }
        Some(Self {
            cells,
            dummy,
            odd_tail,
        })
    }

    /// Number of participation slots (two per cell).
    pub fn slots(&self) -> usize {
        2 * self.cells.len()
    }

    fn slot(&self, i: usize) -> bool {
        let c = self.cells[i / 2];
        if i.is_multiple_of(2) {
            c.left
        } else {
            c.right
        }
    }
}

impl fmt::Display for RowPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.cells.iter().map(|c| c.to_string()).collect();
        if self.odd_tail {
            if let Some(last) = parts.last_mut() {
                last.truncate(1);
            }
        }
        match self.dummy {
            Some(DummyCode::Allowed) => parts.push("P".into()),
            Some(DummyCode::Forbidden) => parts.push("p".into()),
            None => {}
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// One copy slot with its crossing; returns (top c2, c'2, attach vertex).
fn build_slot(g: &mut GadgetGraph, dc: i32, right: bool, participating: bool) -> (usize, usize, usize) {
    let (tvs, edges): (&[Tv], Vec<(&str, &str)>) = match (participating, right) {
        (true, false) => (&COPY_LEFT, COPY_EDGES.to_vec()),
        (true, true) => (&COPY_RIGHT, COPY_EDGES.to_vec()),
        (false, false) => (&RAIL_LEFT, RAIL_EDGES.to_vec()),
        (false, true) => (&RAIL_RIGHT, RAIL_EDGES.to_vec()),
    };
    let p = place(g, tvs, dc, 0);
    wire(g, &p, &edges);
    wire(g, &p, &[RAIL_TAIL]);
    let attach = if participating { p.get("c'1") } else { p.get("blk") };
    (p.get("c2"), p.get("c'2"), attach)
}

/// Builds one constraint row at band-local coordinates.
///
/// `bindings` has one entry per slot; participating slots must be bound.
/// Ports: `top.{k}.{L|R}` are the row-0 copy terminals, `leg.{k}.{L|R}` the
/// row-8 crossing legs, `aux` the isolated corner atom of the dummy cell, and
/// `dummy` the dummy vertex.
pub fn build_composite_row(
    pattern: &RowPattern,
    bindings: &[Option<VarId>],
) -> Result<GadgetGraph, GadgetError> {
    if bindings.len() != pattern.slots() {
        return Err(GadgetError::BindingArity {
            slots: pattern.slots(),
            bindings: bindings.len(),
        });
    }
    for (i, b) in bindings.iter().enumerate() {
        if pattern.slot(i) && b.is_none() {
            return Err(GadgetError::MissingBinding(i));
        }
    }
    let mut g = GadgetGraph::new();
    let mut prev_d1: Option<usize> = None;
    for (k, cell) in pattern.cells.iter().enumerate() {
        let dc = CHUNK * k as i32;
        let unit = place(&mut g, &XOR_UNIT, dc, UNIT_SHIFT);
        wire(&mut g, &unit, &XOR_EDGES);
        for (side, part, x) in [("L", cell.left, "x1"), ("R", cell.right, "x2")] {
            let right = side == "R";
            let (top, out, attach) = build_slot(&mut g, dc, right, part);
            let xv = unit.get(x);
            g.connect(attach, xv);
            if part {
                g.vertices[xv].binding = bindings[2 * k + usize::from(right)];
            } else {
                g.vertices[xv].role = An;
            }
            let cross = place(&mut g, if right { &CROSS_RIGHT } else { &CROSS_LEFT }, dc, 0);
            wire(&mut g, &cross, &CROSS_EDGES);
            g.connect(out, cross.get("d'1"));
            g.connect(unit.get(if right { "a4" } else { "a1" }), cross.get("d'2"));
            if right {
                prev_d1 = Some(cross.get("d1"));
            } else if let Some(d) = prev_d1 {
                g.connect(d, cross.get("d1"));
            }
            g.ports.insert(format!("top.{k}.{side}"), top);
            g.ports.insert(format!("leg.{k}.{side}"), cross.get("d2"));
            g.ports.insert(format!("x.{k}.{side}"), xv);
        }
    }
    if let Some(code) = pattern.dummy {
        let k = pattern.cells.len();
        let dc = CHUNK * k as i32;
        let unit = place(&mut g, &XOR_UNIT, dc, UNIT_SHIFT);
        wire(&mut g, &unit, &XOR_EDGES);
        let (top, out, attach) = build_slot(&mut g, dc, false, false);
        g.connect(attach, unit.get("x1"));
        g.vertices[unit.get("x1")].role = An;
        let dv = unit.get("x2");
        g.vertices[dv].role = Role::Dummy;
        let pend_w = match code {
            DummyCode::Allowed => 3,
            DummyCode::Forbidden => 5,
        };
        let pend = g.add("pd", pend_w, Cp, (3, dc + 9));
        g.connect(pend, dv);
        let cross = place(&mut g, &CROSS_LEFT, dc, 0);
        wire(&mut g, &cross, &CROSS_EDGES);
        g.connect(out, cross.get("d'1"));
        g.connect(unit.get("a1"), cross.get("d'2"));
        if let Some(d) = prev_d1 {
            g.connect(d, cross.get("d1"));
        }
        let aux = g.add("aux", 1, Role::Aux, (0, dc + 11));
        g.ports.insert(format!("top.{k}.L"), top);
        g.ports.insert(format!("leg.{k}.L"), cross.get("d2"));
        g.ports.insert("aux".into(), aux);
        g.ports.insert("dummy".into(), dv);
    }
    Ok(g)
}

/// Stacks rows top to bottom, eight grid rows apart.
///
/// Each lower-row copy terminal is merged into the crossing leg directly
/// above it; the merged vertex keeps weight 2δ. Lower rows lose their aux
/// atom, and upper legs without a partner stay as dangling atoms. Ports of
/// row `r` are re-exported as `r{r}.{name}`. Vertices come out in canonical
/// order (band, column, row).
pub fn stitch_rows(rows: &[GadgetGraph]) -> Result<GadgetGraph, GadgetError> {
    let mut g = GadgetGraph::new();
    let mut dead = BTreeSet::new();
    let mut redirect = BTreeMap::new();
    let mut prev_ports: Option<BTreeMap<String, usize>> = None;
    for (r, row) in rows.iter().enumerate() {
        let mut row = row.clone();
        row.shift(BAND * r as i32, 0);
        for v in &mut row.vertices {
            v.band = r;
        }
        let off = g.absorb(&row, &format!("r{r}."));
        if let Some(up) = &prev_ports {
            if let Some(aux) = row.port("aux") {
                dead.insert(aux + off);
            }
            for (name, &id) in &row.ports {
                let Some(rest) = name.strip_prefix("top.") else {
                    continue;
                };
                let lower = id + off;
                let leg_name = format!("leg.{rest}");
                let upper = *up.get(&leg_name).ok_or_else(|| GadgetError::ColumnMismatch {
                    row: r,
                    port: leg_name.clone(),
                })?;
                let (uv, lv) = (&g.vertices[upper], &g.vertices[lower]);
                if uv.role != Ce || uv.weight != 2 || lv.role != Cp || lv.weight != 1 {
                    return Err(GadgetError::IncompatibleMerge {
                        upper: uv.tag.clone(),
                        upper_weight: uv.weight,
                        lower: lv.tag.clone(),
                        lower_weight: lv.weight,
                    });
                }
                redirect.insert(lower, upper);
                dead.insert(lower);
            }
        }
        prev_ports = Some(
            row.ports
                .iter()
                .map(|(n, &id)| (n.clone(), id + off))
                .collect(),
        );
    }
    let to = |v: usize| *redirect.get(&v).unwrap_or(&v);
    for e in &mut g.edges {
        let (a, b) = (to(e.0), to(e.1));
        *e = (a.min(b), a.max(b));
    }
    g.remove(&dead);
    g.canonicalize();
    Ok(g)
}
