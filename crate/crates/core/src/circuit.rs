//! Syndrome-extraction circuits.
//!
//! Qubit ids: data qubits `0..6·Det` are 2-cells, X-ancillas
//! `6·Det..10·Det` are 1-cells, Z-ancillas `10·Det..14·Det` are 3-cells.

use std::collections::HashMap;
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use crate::complex::CssCode;
use crate::f2::BitVec;
use crate::homology::Sector;
use crate::lattice::{add, sub, unit, Cell, HnfMatrix};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Op {
    PrepX(usize),
    PrepZ(usize),
    Cnot(usize, usize),
    MeasX(usize),
    MeasZ(usize),
}

impl Op {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Op::PrepX(q) | Op::PrepZ(q) | Op::MeasX(q) | Op::MeasZ(q) => (q, None),
            Op::Cnot(c, t) => (c, Some(t)),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::PrepX(q) => write!(f, "PX {q}"),
            Op::PrepZ(q) => write!(f, "PZ {q}"),
            Op::Cnot(c, t) => write!(f, "CX {c} {t}"),
            Op::MeasX(q) => write!(f, "MX {q}"),
            Op::MeasZ(q) => write!(f, "MZ {q}"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct DirectionStep {
    pub sign: i8,
    pub axis: u8,
}

impl DirectionStep {
    pub const fn new(sign: i8, axis: u8) -> Self {
        Self { sign, axis }
    }
}

impl fmt::Display for DirectionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.sign > 0 { '+' } else { '-' }, self.axis)
    }
}

const fn d(sign: i8, axis: u8) -> DirectionStep {
    DirectionStep::new(sign, axis)
}

pub const STARFISH_ORDER: [DirectionStep; 8] = [d(1, 0), d(-1, 0), d(1, 1), d(-1, 1), d(1, 2), d(-1, 2), d(1, 3), d(-1, 3)];
pub const COMPACT_ORDER: [DirectionStep; 8] = [d(-1, 3), d(-1, 2), d(-1, 1), d(-1, 0), d(1, 0), d(1, 1), d(1, 2), d(1, 3)];

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitKind {
    Starfish,
    Compact,
}

impl std::str::FromStr for CircuitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "starfish" => Ok(CircuitKind::Starfish),
            "compact" => Ok(CircuitKind::Compact),
            _ => Err(Error::Invalid(format!("unknown circuit kind {s:?}"))),
        }
    }
}

/// Which stabilizer a measurement reads.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct MeasInfo {
    /// `Sector::Z` for MeasZ of a Z-ancilla (an hz row, detects X errors).
    pub check: Sector,
    pub row: usize,
    pub round: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RoundInfo {
    pub first_layer: usize,
    pub end_layer: usize,
    pub noiseless: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub kind: CircuitKind,
    pub det: usize,
    pub num_qubits: usize,
    pub layers: Vec<Vec<Op>>,
    /// Measurements in execution order.
    pub meas: Vec<MeasInfo>,
    pub rounds: Vec<RoundInfo>,
}

/// Qubit-id helpers for a lattice of determinant `det`.
#[derive(Clone, Copy, Debug)]
pub struct QubitMap {
    pub det: usize,
}

impl QubitMap {
    pub fn num_data(&self) -> usize {
        6 * self.det
    }
    pub fn x_anc(&self, edge: usize) -> usize {
        6 * self.det + edge
    }
    pub fn z_anc(&self, cube: usize) -> usize {
        10 * self.det + cube
    }
    pub fn total(&self) -> usize {
        14 * self.det
    }
    pub fn is_data(&self, q: usize) -> bool {
        q < 6 * self.det
    }

    /// Describes a qubit id as `(role, dimension, index)`.
    pub fn describe(&self, q: usize) -> (&'static str, usize, usize) {
        if q < 6 * self.det {
            ("data", 2, q)
        } else if q < 10 * self.det {
            ("xanc", 1, q - 6 * self.det)
        } else {
            ("zanc", 3, q - 10 * self.det)
        }
    }
}

impl Circuit {
    pub fn qubit_map(&self) -> QubitMap {
        QubitMap { det: self.det }
    }

    pub fn num_cnot_layers(&self) -> usize {
        self.layers.iter().filter(|l| l.iter().any(|op| matches!(op, Op::Cnot(..)))).count()
    }

    pub fn num_cnots(&self) -> usize {
        self.layers.iter().flatten().filter(|op| matches!(op, Op::Cnot(..))).count()
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Checks that each qubit appears at most once per layer.
    pub fn check_schedulable(&self) -> Result<()> {
        let mut seen = vec![usize::MAX; self.num_qubits];
        for (li, layer) in self.layers.iter().enumerate() {
            for op in layer {
                let (a, b) = op.qubits();
                for q in std::iter::once(a).chain(b) {
                    if seen[q] == li {
                        return Err(Error::Invalid(format!("qubit {q} used twice in layer {li}")));
                    }
                    seen[q] = li;
                }
            }
        }
        Ok(())
    }

    /// Text form: header comments mapping ids to cells, then one operation
    /// per line with `TICK` between layers.
    pub fn to_text(&self, h: &HnfMatrix) -> String {
        let mut out = self.header(h);
        for (i, layer) in self.layers.iter().enumerate() {
            if i > 0 {
                out.push_str("TICK\n");
            }
            for op in layer {
                writeln!(out, "{op}").unwrap();
            }
        }
        out
    }

    fn header(&self, h: &HnfMatrix) -> String {
        let qm = self.qubit_map();
        let mut out = String::new();
        writeln!(out, "# {:?} syndrome extraction, {} rounds, lattice {h}", self.kind, self.rounds.len()).unwrap();
        for q in 0..self.num_qubits {
            let (role, dim, idx) = qm.describe(q);
            writeln!(out, "# qubit {q} {role} {}", Cell::from_index(dim, idx, h)).unwrap();
        }
        out
    }

    /// JSON sidecar with the id↔cell map and the measurement schedule.
    pub fn metadata(&self, h: &HnfMatrix) -> serde_json::Value {
        let qm = self.qubit_map();
        let qubits: Vec<serde_json::Value> = (0..self.num_qubits)
            .map(|q| {
                let (role, dim, idx) = qm.describe(q);
                let c = Cell::from_index(dim, idx, h);
                serde_json::json!({"id": q, "role": role, "base": c.base, "dirs": (0..4).filter(|&d| c.has_dir(d)).collect::<Vec<_>>()})
            })
            .collect();
        serde_json::json!({
            "kind": self.kind,
            "lattice": h,
            "rounds": self.rounds,
            "qubits": qubits,
            "meas_schedule": self.meas,
        })
    }
}

/// Data qubit reached from X-ancilla edge `e` in direction `step`, if any.
pub fn x_neighbor(h: &HnfMatrix, edge: &Cell, step: DirectionStep) -> Option<Cell> {
    let j = step.axis as usize;
    if edge.has_dir(j) {
        return None;
    }
    let base = if step.sign > 0 { edge.base } else { sub(edge.base, unit(j)) };
    Some(Cell::new(base, edge.dirs | 1 << j, h))
}

/// Data qubit reached from Z-ancilla cube `c` in direction `step`, if any.
pub fn z_neighbor(h: &HnfMatrix, cube: &Cell, step: DirectionStep) -> Option<Cell> {
    let j = step.axis as usize;
    if !cube.has_dir(j) {
        return None;
    }
    let base = if step.sign > 0 { add(cube.base, unit(j)) } else { cube.base };
    Some(Cell::new(base, cube.dirs & !(1 << j), h))
}

/// CNOTs for one half-round direction layer. Pairs that occur an even
/// number of times across the round (collapsed lattices) are dropped.
fn direction_layer(h: &HnfMatrix, code: &CssCode, sector: Sector, step: DirectionStep) -> Vec<Op> {
    let qm = QubitMap { det: h.num_points() };
    let mut ops = Vec::new();
    match sector {
        Sector::X => {
            for e in 0..code.hx.num_rows() {
                let edge = Cell::from_index(1, e, h);
                if let Some(f) = x_neighbor(h, &edge, step) {
                    let q = f.index(h);
                    if code.hx.get(e, q) {
                        ops.push(Op::Cnot(qm.x_anc(e), q));
                    }
                }
            }
        }
        Sector::Z => {
            for c in 0..code.hz.num_rows() {
                let cube = Cell::from_index(3, c, h);
                if let Some(f) = z_neighbor(h, &cube, step) {
                    let q = f.index(h);
                    if code.hz.get(c, q) {
                        ops.push(Op::Cnot(q, qm.z_anc(c)));
                    }
                }
            }
        }
    }
    ops
}

/// Removes the second and later occurrences of each (ancilla, data) pair
/// within a round; such repeats only arise when faces are identified.
fn dedup_pairs(layers: &mut [Vec<Op>]) {
    let mut seen = std::collections::HashSet::new();
    for layer in layers.iter_mut() {
        layer.retain(|op| match op {
            Op::Cnot(a, b) => seen.insert((*a, *b)),
            _ => true,
        });
    }
}

fn single_round(kind: CircuitKind, layers: Vec<Vec<Op>>, code: &CssCode, meas: Vec<MeasInfo>) -> Circuit {
    let det = code.det();
    let n_layers = layers.len();
    Circuit {
        kind,
        det,
        num_qubits: 14 * det,
        layers,
        meas,
        rounds: vec![RoundInfo { first_layer: 0, end_layer: n_layers, noiseless: false }],
    }
}

fn meas_infos(code: &CssCode, order: &[Sector]) -> Vec<MeasInfo> {
    let mut v = Vec::new();
    for &s in order {
        let rows = match s {
            Sector::X => code.hx.num_rows(),
            Sector::Z => code.hz.num_rows(),
        };
        v.extend((0..rows).map(|row| MeasInfo { check: s, row, round: 0 }));
    }
    v
}

/// Sequential X then Z halves, each with the direction order
/// +0,−0,+1,−1,+2,−2,+3,−3.
pub fn starfish_round(h: &HnfMatrix, code: &CssCode) -> Circuit {
    let qm = QubitMap { det: h.num_points() };
    let nx = code.hx.num_rows();
    let nz = code.hz.num_rows();
    let mut layers = vec![(0..nx).map(|e| Op::PrepX(qm.x_anc(e))).collect::<Vec<_>>()];
    for step in STARFISH_ORDER {
        layers.push(direction_layer(h, code, Sector::X, step));
    }
    layers.push((0..nx).map(|e| Op::MeasX(qm.x_anc(e))).collect());
    layers.push((0..nz).map(|c| Op::PrepZ(qm.z_anc(c))).collect());
    for step in STARFISH_ORDER {
        layers.push(direction_layer(h, code, Sector::Z, step));
    }
    layers.push((0..nz).map(|c| Op::MeasZ(qm.z_anc(c))).collect());
    dedup_pairs(&mut layers);
    single_round(CircuitKind::Starfish, layers, code, meas_infos(code, &[Sector::X, Sector::Z]))
}

/// Interleaved halves in the order −3,−2,−1,−0,+0,+1,+2,+3.
pub fn compact_round(h: &HnfMatrix, code: &CssCode) -> Circuit {
    let qm = QubitMap { det: h.num_points() };
    let nx = code.hx.num_rows();
    let nz = code.hz.num_rows();
    let mut prep: Vec<Op> = (0..nx).map(|e| Op::PrepX(qm.x_anc(e))).collect();
    prep.extend((0..nz).map(|c| Op::PrepZ(qm.z_anc(c))));
    let mut layers = vec![prep];
    for step in COMPACT_ORDER {
        let mut layer = direction_layer(h, code, Sector::X, step);
        layer.extend(direction_layer(h, code, Sector::Z, step));
        layers.push(layer);
    }
    let mut meas: Vec<Op> = (0..nx).map(|e| Op::MeasX(qm.x_anc(e))).collect();
    meas.extend((0..nz).map(|c| Op::MeasZ(qm.z_anc(c))));
    layers.push(meas);
    dedup_pairs(&mut layers);
    single_round(CircuitKind::Compact, layers, code, meas_infos(code, &[Sector::X, Sector::Z]))
}

pub fn build_round(kind: CircuitKind, h: &HnfMatrix, code: &CssCode) -> Circuit {
    match kind {
        CircuitKind::Starfish => starfish_round(h, code),
        CircuitKind::Compact => compact_round(h, code),
    }
}

/// `rounds` copies of a single-round circuit, optionally followed by one
/// more copy marked noiseless.
pub fn repeat_rounds(c: &Circuit, rounds: usize, final_noiseless: bool) -> Circuit {
    assert!(rounds >= 1, "rounds must be at least 1");
    let base = &c.rounds[0];
    let template = &c.layers[base.first_layer..base.end_layer];
    let per_round_meas: Vec<MeasInfo> = c.meas.iter().filter(|m| m.round == 0).copied().collect();
    let total = rounds + usize::from(final_noiseless);
    let mut out = Circuit { kind: c.kind, det: c.det, num_qubits: c.num_qubits, layers: Vec::new(), meas: Vec::new(), rounds: Vec::new() };
    for r in 0..total {
        let first = out.layers.len();
        out.layers.extend(template.iter().cloned());
        out.meas.extend(per_round_meas.iter().map(|m| MeasInfo { round: r, ..*m }));
        out.rounds.push(RoundInfo { first_layer: first, end_layer: out.layers.len(), noiseless: r >= rounds });
    }
    out
}

/// Result of symbolic Pauli propagation on a single-round circuit.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub x_checks: usize,
    pub z_checks: usize,
}

/// Pauli operator on all circuit qubits as X and Z bit vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Frame {
    x: BitVec,
    z: BitVec,
}

impl Frame {
    /// Heisenberg conjugation by CNOT (self-inverse).
    fn cnot(&mut self, c: usize, t: usize) {
        if self.x.get(c) {
            self.x.flip(t);
        }
        if self.z.get(t) {
            self.z.flip(c);
        }
    }
}

/// Proves by backward propagation that every measurement in round 0 reads
/// exactly its stabilizer row on the data qubits.
pub fn effective_checks(c: &Circuit, code: &CssCode) -> Result<CheckReport> {
    let h = &code.lattice;
    let qm = c.qubit_map();
    let round = &c.rounds[0];
    let layers = &c.layers[round.first_layer..round.end_layer];
    let mut positions = HashMap::new();
    for (li, layer) in layers.iter().enumerate() {
        for op in layer {
            if let Op::MeasX(q) | Op::MeasZ(q) = *op {
                positions.insert(q, (li, *op));
            }
        }
    }
    let mut report = CheckReport { x_checks: 0, z_checks: 0 };
    let rows = [(Sector::X, code.hx.num_rows()), (Sector::Z, code.hz.num_rows())];
    for (sector, nrows) in rows {
        for row in 0..nrows {
            let (q, cell, kind) = match sector {
                Sector::X => (qm.x_anc(row), Cell::from_index(1, row, h), "X"),
                Sector::Z => (qm.z_anc(row), Cell::from_index(3, row, h), "Z"),
            };
            let fail = |detail: String| Error::CheckMismatch { kind, cell: cell.label(), detail };
            let Some(&(li, op)) = positions.get(&q) else {
                return Err(fail("ancilla is never measured".into()));
            };
            let mut f = Frame { x: BitVec::zeros(c.num_qubits), z: BitVec::zeros(c.num_qubits) };
            match (sector, op) {
                (Sector::X, Op::MeasX(_)) => f.x.set(q, true),
                (Sector::Z, Op::MeasZ(_)) => f.z.set(q, true),
                _ => return Err(fail("ancilla measured in the wrong basis".into())),
            }
            for layer in layers[..li].iter().rev() {
                for op in layer {
                    match *op {
                        Op::Cnot(a, b) => f.cnot(a, b),
                        Op::PrepX(p) => {
                            if f.z.get(p) {
                                return Err(fail(format!("observable anticommutes with preparation of qubit {p}")));
                            }
                            f.x.set(p, false);
                        }
                        Op::PrepZ(p) => {
                            if f.x.get(p) {
                                return Err(fail(format!("observable anticommutes with preparation of qubit {p}")));
                            }
                            f.z.set(p, false);
                        }
                        Op::MeasX(p) | Op::MeasZ(p) => {
                            if f.x.get(p) || f.z.get(p) {
                                return Err(fail(format!("observable depends on earlier measured qubit {p}")));
                            }
                        }
                    }
                }
            }
            let n = qm.num_data();
            if (n..c.num_qubits).any(|a| f.x.get(a) || f.z.get(a)) {
                return Err(fail("observable retains support on an unprepared ancilla".into()));
            }
            let (on, off, expected) = match sector {
                Sector::X => (&f.x, &f.z, code.hx.row(row)),
                Sector::Z => (&f.z, &f.x, code.hz.row(row)),
            };
            let got: Vec<usize> = on.ones().collect();
            if got != expected || !off.is_zero() {
                return Err(fail(format!("measured data support {got:?}, expected {expected:?}")));
            }
            match sector {
                Sector::X => report.x_checks += 1,
                Sector::Z => report.z_checks += 1,
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::css_from_lattice;
    use crate::lattice::{incident_cells, named_lattice, SIMULATION_LATTICES};

    fn setup(name: &str) -> (HnfMatrix, CssCode) {
        let h = named_lattice(name).unwrap().hnf();
        let c = css_from_lattice(&h);
        (h, c)
    }

    #[test]
    fn depths_and_counts() {
        let (h, code) = setup("Det3");
        let s = starfish_round(&h, &code);
        let c = compact_round(&h, &code);
        assert_eq!(s.num_cnot_layers(), 16);
        assert_eq!(c.num_cnot_layers(), 8);
        assert_eq!(s.num_cnots(), 48 * 3);
        assert_eq!(c.num_cnots(), 48 * 3);
        s.check_schedulable().unwrap();
        c.check_schedulable().unwrap();
    }

    #[test]
    fn both_circuits_measure_the_checks() {
        for l in SIMULATION_LATTICES.iter().take(4) {
            let h = l.hnf();
            let code = css_from_lattice(&h);
            for kind in [CircuitKind::Starfish, CircuitKind::Compact] {
                let r = effective_checks(&build_round(kind, &h, &code), &code).unwrap();
                assert_eq!(r.x_checks + r.z_checks, 8 * h.num_points(), "{} {kind:?}", l.name);
            }
        }
    }

    #[test]
    fn deleted_cnot_is_detected() {
        let (h, code) = setup("Det3");
        let mut c = compact_round(&h, &code);
        let Op::Cnot(anc, _) = c.layers[3][0] else { panic!("expected a CNOT") };
        c.layers[3].remove(0);
        let err = effective_checks(&c, &code).unwrap_err();
        let expected = Cell::from_index(1, anc - 18, &h).label();
        match err {
            Error::CheckMismatch { kind, cell, .. } => {
                assert_eq!(kind, "X");
                assert_eq!(cell, expected);
            }
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn adjacency_matches_incidence() {
        let (h, _) = setup("Hadamard");
        for e in 0..64 {
            let edge = Cell::from_index(1, e, &h);
            let mut via_dirs: Vec<Cell> = STARFISH_ORDER.iter().filter_map(|&s| x_neighbor(&h, &edge, s)).collect();
            let mut via_inc = incident_cells(&edge, &h, 1).unwrap();
            via_dirs.sort();
            via_inc.sort();
            assert_eq!(via_dirs, via_inc);
            let cube = Cell::from_index(3, e, &h);
            let mut zd: Vec<Cell> = STARFISH_ORDER.iter().filter_map(|&s| z_neighbor(&h, &cube, s)).collect();
            let mut zi = incident_cells(&cube, &h, -1).unwrap();
            zd.sort();
            zi.sort();
            assert_eq!(zd, zi);
        }
    }

    #[test]
    fn compact_layers_are_disjoint_matchings() {
        for name in ["Det3", "Hadamard"] {
            let (h, code) = setup(name);
            let c = compact_round(&h, &code);
            c.check_schedulable().unwrap();
            for layer in &c.layers[1..9] {
                assert_eq!(layer.len(), 6 * h.num_points());
            }
        }
    }

    #[test]
    fn repetition_arithmetic() {
        let (h, code) = setup("Det3");
        let c = compact_round(&h, &code);
        let rep = repeat_rounds(&c, 3, true);
        assert_eq!(rep.layers.len(), 4 * c.layers.len());
        assert_eq!(rep.meas.len(), 3 * 8 * 3 + 8 * 3);
        assert!(rep.rounds[3].noiseless && !rep.rounds[2].noiseless);
        let one = repeat_rounds(&c, 1, true);
        assert_eq!(one.rounds.len(), 2);
        assert_eq!(&one.layers[..c.layers.len()], &c.layers[..]);
    }

    #[test]
    fn text_is_deterministic() {
        let (h, code) = setup("Det3");
        let a = starfish_round(&h, &code).to_text(&h);
        let b = starfish_round(&h, &code).to_text(&h);
        assert_eq!(a, b);
        assert_eq!(a.lines().filter(|l| *l == "TICK").count(), 19);
        assert!(a.contains("CX "));
    }
}
