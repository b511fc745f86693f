//! Circuit-level Pauli noise, bit-sliced Pauli-frame sampling and
//! single-fault enumeration.
//!
//! Frames track the deviation from the noiseless run, 64 shots per `u64`.
//! Every measured operator is a stabilizer of the noiseless state, so the
//! frame flips are exactly the outcome flips.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Op};
use crate::f2::BitVec;
use crate::homology::{LogicalBasis, Sector};

/// Noise channels, each firing with probability `p` at its locations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    pub p: f64,
    /// Wrong-basis preparation (Z after PrepX, X after PrepZ).
    pub after_prep: bool,
    /// Single-qubit depolarizing after single-qubit gates. The generated
    /// circuits contain none, so this toggle has no locations today.
    pub after_1q: bool,
    /// Two-qubit depolarizing after every CNOT.
    pub after_2q: bool,
    /// Outcome flip before every measurement.
    pub before_meas: bool,
    /// Single-qubit depolarizing on live qubits idle during a CNOT layer.
    pub idle: bool,
    /// Single-qubit depolarizing on every data qubit at the start of each
    /// noisy round.
    pub data_before_round: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::standard(0.0)
    }
}

impl NoiseModel {
    pub fn standard(p: f64) -> Self {
        Self { p, after_prep: true, after_1q: true, after_2q: true, before_meas: true, idle: false, data_before_round: false }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(crate::Error::Invalid(format!("error probability {} outside [0, 1]", self.p)));
        }
        Ok(())
    }
}

/// Single-qubit Pauli as bits: 1 = X, 2 = Z, 3 = Y.
pub type PauliBits = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocKind {
    /// Fixed Pauli with probability `p` (preparation or measurement flips).
    Flip { q: usize, pauli: PauliBits },
    /// One of X, Z, Y each with probability `p/3`.
    Depol1 { q: usize },
    /// One of the 15 nonidentity two-qubit Paulis each with probability `p/15`.
    Depol2 { a: usize, b: usize },
}

impl LocKind {
    pub fn num_options(&self) -> usize {
        match self {
            LocKind::Flip { .. } => 1,
            LocKind::Depol1 { .. } => 3,
            LocKind::Depol2 { .. } => 15,
        }
    }

    /// Paulis applied by option `o`, as `(qubit, pauli)` pairs.
    pub fn paulis(&self, o: usize) -> [(usize, PauliBits); 2] {
        match *self {
            LocKind::Flip { q, pauli } => [(q, pauli), (q, 0)],
            LocKind::Depol1 { q } => [(q, o as u8 + 1), (q, 0)],
            LocKind::Depol2 { a, b } => {
                let idx = o as u8 + 1;
                [(a, idx & 3), (b, idx >> 2)]
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub kind: LocKind,
    /// The fault is applied just before executing flattened op `pos`
    /// (`pos == ops.len()` means at the very end).
    pub pos: usize,
    pub layer: usize,
    pub round: usize,
    /// Per-option probability.
    pub prob: f64,
    /// Virtual locations model data errors entering a round; they are part
    /// of the fault dictionary even when their probability is zero.
    pub virtual_data: bool,
}

/// Circuit with compiled noise locations and detector layout.
#[derive(Clone, Debug)]
pub struct NoisyCircuit {
    pub circuit: Circuit,
    pub noise: NoiseModel,
    ops: Vec<Op>,
    op_layer: Vec<usize>,
    /// Measurement index of each op, if it measures.
    op_meas: Vec<Option<usize>>,
    pub locations: Vec<Location>,
    /// Indices into `locations` with nonzero probability.
    active: Vec<usize>,
    /// `det_meas[s]` lists, per detector of error sector `s`, the
    /// measurement index and the previous-round index it is XORed with.
    det_meas: [Vec<(usize, Option<usize>)>; 2],
    checks_per_round: [usize; 2],
    num_data: usize,
}

fn sector_index(s: Sector) -> usize {
    match s {
        Sector::X => 0,
        Sector::Z => 1,
    }
}

impl NoisyCircuit {
    pub fn new(circuit: &Circuit, noise: NoiseModel) -> Self {
        let qm = circuit.qubit_map();
        let num_data = qm.num_data();
        let mut ops = Vec::new();
        let mut op_layer = Vec::new();
        let mut op_meas = Vec::new();
        let mut locations = Vec::new();
        let mut meas_count = 0;
        let p = noise.p;
        let mut live = vec![false; circuit.num_qubits];
        for (ri, round) in circuit.rounds.iter().enumerate() {
            let noisy = !round.noiseless;
            locations.extend((0..num_data).map(|q| Location {
                kind: LocKind::Depol1 { q },
                pos: ops.len(),
                layer: round.first_layer,
                round: ri,
                prob: if noisy && noise.data_before_round { p / 3.0 } else { 0.0 },
                virtual_data: true,
            }));
            for li in round.first_layer..round.end_layer {
                let layer = &circuit.layers[li];
                let mut busy = vec![false; circuit.num_qubits];
                let mut has_cnot = false;
                for op in layer {
                    let here = ops.len();
                    let loc = |kind, pos, prob| Location { kind, pos, layer: li, round: ri, prob, virtual_data: false };
                    match *op {
                        Op::PrepX(q) | Op::PrepZ(q) => {
                            live[q] = true;
                            if noisy && noise.after_prep {
                                let pauli = if matches!(op, Op::PrepX(_)) { 2 } else { 1 };
                                locations.push(loc(LocKind::Flip { q, pauli }, here + 1, p));
                            }
                            op_meas.push(None);
                        }
                        Op::MeasX(q) | Op::MeasZ(q) => {
                            if noisy && noise.before_meas {
                                let pauli = if matches!(op, Op::MeasX(_)) { 2 } else { 1 };
                                locations.push(loc(LocKind::Flip { q, pauli }, here, p));
                            }
                            live[q] = false;
                            op_meas.push(Some(meas_count));
                            meas_count += 1;
                        }
                        Op::Cnot(a, b) => {
                            has_cnot = true;
                            busy[a] = true;
                            busy[b] = true;
                            if noisy && noise.after_2q {
                                locations.push(loc(LocKind::Depol2 { a, b }, here + 1, p / 15.0));
                            }
                            op_meas.push(None);
                        }
                    }
                    ops.push(*op);
                    op_layer.push(li);
                }
                if noisy && noise.idle && has_cnot {
                    let end = ops.len();
                    for q in 0..circuit.num_qubits {
                        if !busy[q] && (q < num_data || live[q]) {
                            locations.push(Location {
                                kind: LocKind::Depol1 { q },
                                pos: end,
                                layer: li,
                                round: ri,
                                prob: p / 3.0,
                                virtual_data: false,
                            });
                        }
                    }
                }
            }
        }
        locations.sort_by_key(|l| l.pos);
        let active = (0..locations.len()).filter(|&i| locations[i].prob > 0.0).collect();

        // Detector layout from the measurement schedule.
        let checks_per_round = [
            circuit.meas.iter().filter(|m| m.round == 0 && m.check == Sector::Z).count(),
            circuit.meas.iter().filter(|m| m.round == 0 && m.check == Sector::X).count(),
        ];
        let mut det_meas: [Vec<(usize, Option<usize>)>; 2] = [Vec::new(), Vec::new()];
        for (s, check) in [(0, Sector::Z), (1, Sector::X)] {
            let rows = checks_per_round[s];
            let mut index = vec![vec![usize::MAX; rows]; circuit.rounds.len()];
            for (mi, m) in circuit.meas.iter().enumerate() {
                if m.check == check {
                    index[m.round][m.row] = mi;
                }
            }
            for r in 0..circuit.rounds.len() {
                for row in 0..rows {
                    det_meas[s].push((index[r][row], (r > 0).then(|| index[r - 1][row])));
                }
            }
        }
        Self { circuit: circuit.clone(), noise, ops, op_layer, op_meas, locations, active, det_meas, checks_per_round, num_data }
    }

    pub fn num_detectors(&self, s: Sector) -> usize {
        self.det_meas[sector_index(s)].len()
    }

    /// Detectors of error sector `s` per round (one per check row).
    pub fn detectors_per_round(&self, s: Sector) -> usize {
        self.checks_per_round[sector_index(s)]
    }

    pub fn num_rounds(&self) -> usize {
        self.circuit.rounds.len()
    }

    pub fn num_data(&self) -> usize {
        self.num_data
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn op_layer(&self, i: usize) -> usize {
        self.op_layer[i]
    }

    /// Number of non-virtual fault locations counted once per Pauli option.
    pub fn num_circuit_faults(&self) -> usize {
        self.locations.iter().filter(|l| !l.virtual_data).map(|l| l.kind.num_options()).sum()
    }

    /// Expected number of fired locations per shot.
    pub fn expected_faults(&self) -> f64 {
        self.active.iter().map(|&i| self.locations[i].prob * self.locations[i].kind.num_options() as f64).sum()
    }

    fn location_fire_prob(&self) -> f64 {
        // All active locations share the same firing probability p.
        self.noise.p
    }

    /// Samples the fired `(location, option)` events of one shot.
    fn sample_events(&self, rng: &mut ChaCha8Rng, out: &mut Vec<(u32, u8)>) {
        let p = self.location_fire_prob();
        let n = self.active.len();
        if p <= 0.0 || n == 0 {
            return;
        }
        let mut i = 0usize;
        if p >= 1.0 {
            for &loc in &self.active {
                let o = rng.gen_range(0..self.locations[loc].kind.num_options());
                out.push((loc as u32, o as u8));
            }
            return;
        }
        let log_q = (-p).ln_1p();
        loop {
            let u: f64 = rng.gen();
            let skip = ((1.0 - u).ln() / log_q).floor();
            if skip >= (n - i) as f64 {
                break;
            }
            i += skip as usize;
            let loc = self.active[i];
            let o = rng.gen_range(0..self.locations[loc].kind.num_options());
            out.push((loc as u32, o as u8));
            i += 1;
            if i >= n {
                break;
            }
        }
    }

    /// Propagates up to 64 lanes of frames with the given events, sorted
    /// by location index. Returns measurement flips and data frames.
    pub fn run_lanes(&self, events: &[(u32, u8, u8)]) -> LaneOutput {
        let nq = self.circuit.num_qubits;
        let mut x = vec![0u64; nq];
        let mut z = vec![0u64; nq];
        let mut meas = vec![0u64; self.circuit.meas.len()];
        let mut ev = 0;
        let apply = |x: &mut [u64], z: &mut [u64], loc: &Location, lane: u8, option: u8| {
            let bit = 1u64 << lane;
            for (q, pauli) in loc.kind.paulis(option as usize) {
                if pauli & 1 != 0 {
                    x[q] ^= bit;
                }
                if pauli & 2 != 0 {
                    z[q] ^= bit;
                }
            }
        };
        for (i, op) in self.ops.iter().enumerate() {
            while ev < events.len() && self.locations[events[ev].0 as usize].pos <= i {
                let (l, lane, o) = events[ev];
                apply(&mut x, &mut z, &self.locations[l as usize], lane, o);
                ev += 1;
            }
            match *op {
                Op::PrepX(q) | Op::PrepZ(q) => {
                    x[q] = 0;
                    z[q] = 0;
                }
                Op::Cnot(c, t) => {
                    x[t] ^= x[c];
                    z[c] ^= z[t];
                }
                Op::MeasX(q) => meas[self.op_meas[i].expect("measurement index")] = z[q],
                Op::MeasZ(q) => meas[self.op_meas[i].expect("measurement index")] = x[q],
            }
        }
        while ev < events.len() {
            let (l, lane, o) = events[ev];
            apply(&mut x, &mut z, &self.locations[l as usize], lane, o);
            ev += 1;
        }
        x.truncate(self.num_data);
        z.truncate(self.num_data);
        LaneOutput { meas, data_x: x, data_z: z }
    }

    /// Detector lanes of error sector `s`.
    pub fn detector_lanes(&self, out: &LaneOutput, s: Sector) -> Vec<u64> {
        self.det_meas[sector_index(s)]
            .iter()
            .map(|&(m, prev)| out.meas[m] ^ prev.map_or(0, |p| out.meas[p]))
            .collect()
    }

    /// Samples the 64 shots `64·batch .. 64·batch + 63`.
    pub fn sample_batch(&self, batch: u64, seed: u64, basis: &LogicalBasis) -> Vec<ShotRecord> {
        let mut events: Vec<(u32, u8, u8)> = Vec::new();
        let mut scratch = Vec::new();
        for lane in 0..64u8 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch * 64 + lane as u64);
            scratch.clear();
            self.sample_events(&mut rng, &mut scratch);
            events.extend(scratch.iter().map(|&(l, o)| (l, lane, o)));
        }
        events.sort_by_key(|&(l, lane, _)| (l, lane));
        let out = self.run_lanes(&events);
        self.records_from_lanes(&out, basis, batch * 64, 64)
    }

    pub fn records_from_lanes(&self, out: &LaneOutput, basis: &LogicalBasis, first_shot: u64, lanes: usize) -> Vec<ShotRecord> {
        let dx = self.detector_lanes(out, Sector::X);
        let dz = self.detector_lanes(out, Sector::Z);
        let fx = logical_lanes(&out.data_x, basis.ops(Sector::Z));
        let fz = logical_lanes(&out.data_z, basis.ops(Sector::X));
        (0..lanes)
            .map(|lane| {
                let pick = |lanes: &[u64]| {
                    let mut v = BitVec::zeros(lanes.len());
                    for (i, &w) in lanes.iter().enumerate() {
                        if w >> lane & 1 == 1 {
                            v.set(i, true);
                        }
                    }
                    v
                };
                let flips = |f: &[u64]| f.iter().enumerate().fold(0u8, |m, (j, &w)| m | (((w >> lane) & 1) as u8) << j);
                ShotRecord { shot: first_shot + lane as u64, det_x: pick(&dx), det_z: pick(&dz), flips_x: flips(&fx), flips_z: flips(&fz) }
            })
            .collect()
    }

    /// Deterministic for fixed seed regardless of thread count.
    pub fn sample_shots(&self, shots: usize, seed: u64, basis: &LogicalBasis) -> Vec<ShotRecord> {
        let batches = shots.div_ceil(64) as u64;
        let mut records: Vec<ShotRecord> =
            (0..batches).into_par_iter().flat_map_iter(|b| self.sample_batch(b, seed, basis)).collect();
        records.truncate(shots);
        records
    }

    /// Text export with noise annotations after the operations they follow.
    pub fn to_text(&self, h: &crate::lattice::HnfMatrix) -> String {
        let mut out = String::new();
        let base = self.circuit.to_text(h);
        // Keep the header, then re-emit the body with annotations.
        for line in base.lines().take_while(|l| l.starts_with('#')) {
            writeln!(out, "{line}").unwrap();
        }
        let mut li = 0;
        let mut loc_i = 0;
        let emit_loc = |out: &mut String, l: &Location| {
            let p = l.prob * l.kind.num_options() as f64;
            match l.kind {
                LocKind::Flip { q, .. } => writeln!(out, "FLIP {p} {q}").unwrap(),
                LocKind::Depol1 { q } => writeln!(out, "DEPOL1 {p} {q}").unwrap(),
                LocKind::Depol2 { a, b } => writeln!(out, "DEPOL2 {p} {a} {b}").unwrap(),
            }
        };
        for (i, op) in self.ops.iter().enumerate() {
            if self.op_layer[i] != li {
                // Flush post-layer noise belonging to the finished layer.
                while loc_i < self.locations.len() && self.locations[loc_i].pos <= i && self.locations[loc_i].layer == li {
                    if self.locations[loc_i].prob > 0.0 {
                        emit_loc(&mut out, &self.locations[loc_i]);
                    }
                    loc_i += 1;
                }
                out.push_str("TICK\n");
                li = self.op_layer[i];
            }
            while loc_i < self.locations.len() && self.locations[loc_i].pos <= i {
                if self.locations[loc_i].prob > 0.0 {
                    emit_loc(&mut out, &self.locations[loc_i]);
                }
                loc_i += 1;
            }
            writeln!(out, "{op}").unwrap();
        }
        for l in &self.locations[loc_i..] {
            if l.prob > 0.0 {
                emit_loc(&mut out, l);
            }
        }
        out
    }
}

/// Per-lane logical flips: bit `j` of lane `l` is the parity of the data
/// frame on `ops[j]`.
fn logical_lanes(data: &[u64], ops: &[BitVec]) -> Vec<u64> {
    ops.iter().map(|l| l.ones().fold(0u64, |acc, q| acc ^ data[q])).collect()
}

pub struct LaneOutput {
    pub meas: Vec<u64>,
    pub data_x: Vec<u64>,
    pub data_z: Vec<u64>,
}

/// Detector bits and final logical flips of one shot. `det_x` holds the
/// detectors that see X errors (Z-check outcomes), `flips_x` the logical
/// flips caused by the residual X error.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot: u64,
    pub det_x: BitVec,
    pub det_z: BitVec,
    pub flips_x: u8,
    pub flips_z: u8,
}

impl ShotRecord {
    pub fn detectors(&self, s: Sector) -> &BitVec {
        match s {
            Sector::X => &self.det_x,
            Sector::Z => &self.det_z,
        }
    }

    pub fn flips(&self, s: Sector) -> u8 {
        match s {
            Sector::X => self.flips_x,
            Sector::Z => self.flips_z,
        }
    }
}

/// Binary packing of a record stream: a JSON header line followed by
/// fixed-size little-endian records.
pub fn write_records<W: std::io::Write>(mut w: W, records: &[ShotRecord], header: &serde_json::Value) -> std::io::Result<()> {
    let (nx, nz) = records.first().map_or((0, 0), |r| (r.det_x.len(), r.det_z.len()));
    let mut head = header.clone();
    head["num_det_x"] = nx.into();
    head["num_det_z"] = nz.into();
    head["num_records"] = records.len().into();
    head["record_layout"] = "u64 shot, det_x words, det_z words, u8 flips_x, u8 flips_z".into();
    writeln!(w, "{}", serde_json::to_string(&head)?)?;
    for r in records {
        w.write_all(&r.shot.to_le_bytes())?;
        for word in r.det_x.words().iter().chain(r.det_z.words()) {
            w.write_all(&word.to_le_bytes())?;
        }
        w.write_all(&[r.flips_x, r.flips_z])?;
    }
    Ok(())
}

pub fn read_records<R: std::io::BufRead>(mut r: R) -> std::io::Result<(serde_json::Value, Vec<ShotRecord>)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let head: serde_json::Value = serde_json::from_str(&line)?;
    let get = |k: &str| head[k].as_u64().map(|v| v as usize).ok_or_else(|| std::io::Error::other(format!("missing {k}")));
    let (nx, nz, count) = (get("num_det_x")?, get("num_det_z")?, get("num_records")?);
    let mut out = Vec::with_capacity(count);
    let mut buf8 = [0u8; 8];
    let mut read_vec = |r: &mut R, len: usize| -> std::io::Result<BitVec> {
        let mut words = Vec::new();
        for _ in 0..len.div_ceil(64) {
            r.read_exact(&mut buf8)?;
            words.push(u64::from_le_bytes(buf8));
        }
        Ok(BitVec::from_words(len, words))
    };
    for _ in 0..count {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let shot = u64::from_le_bytes(b);
        let det_x = read_vec(&mut r, nx)?;
        let det_z = read_vec(&mut r, nz)?;
        let mut f = [0u8; 2];
        r.read_exact(&mut f)?;
        out.push(ShotRecord { shot, det_x, det_z, flips_x: f[0], flips_z: f[1] });
    }
    Ok((head, out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultClass {
    Qubit,
    MeasurementFlip,
    Ancillary,
    Partial,
}

/// Effect of a single fault restricted to one error sector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorEffect {
    pub detectors: BitVec,
    pub residual: BitVec,
    pub flips: u8,
    pub class: FaultClass,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fault {
    pub location: usize,
    pub option: u8,
    pub round: usize,
    pub layer: usize,
    /// Applied Paulis as `(qubit, pauli bits)`; pauli 0 entries omitted.
    pub paulis: Vec<(usize, PauliBits)>,
    pub prior: f64,
    /// Data-qubit error entering a round rather than a circuit fault.
    pub virtual_data: bool,
    pub x: SectorEffect,
    pub z: SectorEffect,
}

impl Fault {
    /// Shot record of this fault acting alone.
    pub fn record(&self) -> ShotRecord {
        ShotRecord { shot: 0, det_x: self.x.detectors.clone(), det_z: self.z.detectors.clone(), flips_x: self.x.flips, flips_z: self.z.flips }
    }

    pub fn effect(&self, s: Sector) -> &SectorEffect {
        match s {
            Sector::X => &self.x,
            Sector::Z => &self.z,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaultDictionary {
    pub faults: Vec<Fault>,
    pub num_det_x: usize,
    pub num_det_z: usize,
    pub detectors_per_round_x: usize,
    pub detectors_per_round_z: usize,
}

impl FaultDictionary {
    pub fn num_detectors(&self, s: Sector) -> usize {
        match s {
            Sector::X => self.num_det_x,
            Sector::Z => self.num_det_z,
        }
    }

    pub fn detectors_per_round(&self, s: Sector) -> usize {
        match s {
            Sector::X => self.detectors_per_round_x,
            Sector::Z => self.detectors_per_round_z,
        }
    }

    pub fn circuit_faults(&self) -> impl Iterator<Item = &Fault> {
        self.faults.iter().filter(|f| !f.virtual_data)
    }
}

fn classify(virtual_data: bool, only_ancilla: bool, detectors: &BitVec, residual: &BitVec, detectors_per_round: usize) -> FaultClass {
    if virtual_data {
        return FaultClass::Qubit;
    }
    if residual.is_zero() {
        // A lone outcome flip shows up in its own round and echoes in the
        // next: two detectors for the same check one round apart.
        let ones = detectors.to_indices();
        let single_flip = match ones.as_slice() {
            [_] => true,
            [a, b] => b - a == detectors_per_round,
            _ => false,
        };
        if single_flip {
            return FaultClass::MeasurementFlip;
        }
        return FaultClass::Partial;
    }
    if only_ancilla {
        FaultClass::Ancillary
    } else {
        FaultClass::Partial
    }
}

/// Simulates every single `(location, option)` fault, 64 per batch.
pub fn enumerate_single_faults(nc: &NoisyCircuit, basis: &LogicalBasis) -> FaultDictionary {
    let all: Vec<(usize, u8)> = nc
        .locations
        .iter()
        .enumerate()
        .flat_map(|(i, l)| (0..l.kind.num_options() as u8).map(move |o| (i, o)))
        .collect();
    let dpr = [nc.detectors_per_round(Sector::X), nc.detectors_per_round(Sector::Z)];
    let faults: Vec<Fault> = all
        .par_chunks(64)
        .flat_map_iter(|chunk| {
            let events: Vec<(u32, u8, u8)> = chunk.iter().enumerate().map(|(lane, &(l, o))| (l as u32, lane as u8, o)).collect();
            let out = nc.run_lanes(&events);
            let dx = nc.detector_lanes(&out, Sector::X);
            let dz = nc.detector_lanes(&out, Sector::Z);
            let fx = logical_lanes(&out.data_x, basis.ops(Sector::Z));
            let fz = logical_lanes(&out.data_z, basis.ops(Sector::X));
            chunk
                .iter()
                .enumerate()
                .map(|(lane, &(l, o))| {
                    let loc = &nc.locations[l];
                    let pick = |v: &[u64]| {
                        let mut b = BitVec::zeros(v.len());
                        for (i, &w) in v.iter().enumerate() {
                            if w >> lane & 1 == 1 {
                                b.set(i, true);
                            }
                        }
                        b
                    };
                    let flips = |f: &[u64]| f.iter().enumerate().fold(0u8, |m, (j, &w)| m | (((w >> lane) & 1) as u8) << j);
                    let paulis: Vec<(usize, PauliBits)> = loc.kind.paulis(o as usize).into_iter().filter(|&(_, p)| p != 0).collect();
                    let only_ancilla = paulis.iter().all(|&(q, _)| q >= nc.num_data());
                    let effect = |s: Sector, det: BitVec, res: BitVec, fl: u8| {
                        let class = classify(loc.virtual_data, only_ancilla, &det, &res, dpr[sector_index(s)]);
                        SectorEffect { detectors: det, residual: res, flips: fl, class }
                    };
                    Fault {
                        location: l,
                        option: o,
                        round: loc.round,
                        layer: loc.layer,
                        paulis,
                        prior: loc.prob,
                        virtual_data: loc.virtual_data,
                        x: effect(Sector::X, pick(&dx), pick(&out.data_x), flips(&fx)),
                        z: effect(Sector::Z, pick(&dz), pick(&out.data_z), flips(&fz)),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    FaultDictionary {
        faults,
        num_det_x: nc.num_detectors(Sector::X),
        num_det_z: nc.num_detectors(Sector::Z),
        detectors_per_round_x: dpr[0],
        detectors_per_round_z: dpr[1],
    }
}

/// Replays one fault through the simulator.
pub fn replay_fault(nc: &NoisyCircuit, basis: &LogicalBasis, location: usize, option: u8) -> ShotRecord {
    let out = nc.run_lanes(&[(location as u32, 0, option)]);
    nc.records_from_lanes(&out, basis, 0, 1).pop().expect("one lane")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_round, repeat_rounds, CircuitKind};
    use crate::complex::{css_from_lattice, CssCode};
    use crate::homology::logical_basis_linear;
    use crate::lattice::named_lattice;

    fn setup(name: &str, kind: CircuitKind, rounds: usize, p: f64) -> (CssCode, LogicalBasis, NoisyCircuit) {
        let h = named_lattice(name).unwrap().hnf();
        let code = css_from_lattice(&h);
        let basis = logical_basis_linear(&code);
        let c = repeat_rounds(&build_round(kind, &h, &code), rounds, true);
        let nc = NoisyCircuit::new(&c, NoiseModel::standard(p));
        (code, basis, nc)
    }

    #[test]
    fn noiseless_shots_are_trivial() {
        let (_, basis, nc) = setup("Det3", CircuitKind::Compact, 3, 0.0);
        for r in nc.sample_shots(1000, 1, &basis) {
            assert!(r.det_x.is_zero() && r.det_z.is_zero());
            assert_eq!((r.flips_x, r.flips_z), (0, 0));
        }
    }

    #[test]
    fn detector_counts() {
        let (_, _, nc) = setup("Det3", CircuitKind::Compact, 3, 0.01);
        assert_eq!(nc.num_detectors(Sector::X) + nc.num_detectors(Sector::Z), 2 * 4 * 12);
    }

    #[test]
    fn fault_count_arithmetic() {
        let (_, basis, nc) = setup("Det3", CircuitKind::Starfish, 1, 0.01);
        let c = &nc.circuit;
        let preps = c.layers.iter().flatten().filter(|o| matches!(o, Op::PrepX(_) | Op::PrepZ(_))).count() / 2;
        let meas = preps;
        let cnots = c.num_cnots() / 2;
        assert_eq!(nc.num_circuit_faults(), 15 * cnots + preps + meas);
        let fd = enumerate_single_faults(&nc, &basis);
        assert_eq!(fd.faults.len(), nc.num_circuit_faults() + 3 * 18 * 2);
    }

    #[test]
    fn single_faults_are_local_and_replay() {
        let (_, basis, nc) = setup("Det3", CircuitKind::Compact, 3, 0.01);
        let fd = enumerate_single_faults(&nc, &basis);
        for f in &fd.faults {
            for s in [Sector::X, Sector::Z] {
                let e = f.effect(s);
                let per = fd.detectors_per_round(s);
                for d in e.detectors.ones() {
                    let r = d / per;
                    assert!(r == f.round || r == f.round + 1, "fault in round {} hits round {r}", f.round);
                }
                if e.class == FaultClass::MeasurementFlip {
                    assert!(e.residual.is_zero());
                    assert!((1..=2).contains(&e.detectors.weight()));
                }
            }
        }
        for f in fd.faults.iter().step_by(97) {
            let r = replay_fault(&nc, &basis, f.location, f.option);
            assert_eq!(r.det_x, f.x.detectors);
            assert_eq!(r.det_z, f.z.detectors);
            assert_eq!((r.flips_x, r.flips_z), (f.x.flips, f.z.flips));
        }
    }

    #[test]
    fn qubit_faults_match_check_columns() {
        let (code, basis, nc) = setup("Det3", CircuitKind::Compact, 1, 0.01);
        let fd = enumerate_single_faults(&nc, &basis);
        let hz_cols = code.hz.col_supports();
        for f in fd.faults.iter().filter(|f| f.x.class == FaultClass::Qubit && f.round == 0) {
            let (q, pauli) = f.paulis[0];
            if pauli & 1 == 1 {
                // Seen in the noisy round and carried into the final round:
                // the detector difference there is zero.
                let per = fd.detectors_per_round(Sector::X);
                let round0: Vec<usize> = f.x.detectors.ones().filter(|&d| d < per).collect();
                assert_eq!(round0, hz_cols[q]);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_rate_matches() {
        let (_, basis, nc) = setup("Det3", CircuitKind::Compact, 1, 0.01);
        let a = nc.sample_shots(500, 42, &basis);
        let b = nc.sample_shots(500, 42, &basis);
        assert_eq!(a, b);
        // Fired-location counts against the binomial mean.
        let shots = 20_000u64;
        let mut total = 0usize;
        for s in 0..shots {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            rng.set_stream(s);
            let mut ev = Vec::new();
            nc.sample_events(&mut rng, &mut ev);
            total += ev.len();
        }
        let n = nc.active.len() as f64;
        let mean = n * 0.01 * shots as f64;
        let sd = (n * 0.01 * 0.99 * shots as f64).sqrt();
        assert!(((total as f64) - mean).abs() < 4.0 * sd, "total {total} mean {mean}");
    }

    #[test]
    fn record_stream_round_trip() {
        let (_, basis, nc) = setup("Det3", CircuitKind::Compact, 2, 0.02);
        let recs = nc.sample_shots(100, 3, &basis);
        let mut buf = Vec::new();
        write_records(&mut buf, &recs, &serde_json::json!({"seed": 3})).unwrap();
        let (head, back) = read_records(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(head["seed"], 3);
        assert_eq!(back, recs);
    }
}
