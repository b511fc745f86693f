//! Power decoder (subset search over known fault syndromes with a
//! meet-in-the-middle table) and BP+OSD on a detector error model.

use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::f2::{BitVec, F2Matrix};
use crate::homology::{LogicalBasis, Sector};
use crate::sim::{FaultClass, FaultDictionary, ShotRecord};
use crate::{CssCode, Error, Result};

/// Syndromes are packed into a fixed key; enough for 192 checks per round.
const KEY_WORDS: usize = 3;
type Key = [u64; KEY_WORDS];

fn key_of(v: &BitVec) -> Key {
    let mut k = [0u64; KEY_WORDS];
    k[..v.words().len()].copy_from_slice(v.words());
    k
}

#[inline]
fn xor_key(a: &Key, b: &Key) -> Key {
    [a[0] ^ b[0], a[1] ^ b[1], a[2] ^ b[2]]
}

#[inline]
fn key_weight(k: &Key) -> u32 {
    k.iter().map(|w| w.count_ones()).sum()
}

/// Index sets of up to three elements packed 21 bits each (stored +1).
fn pack(set: &[u32]) -> u64 {
    set.iter().enumerate().fold(0u64, |acc, (i, &x)| acc | (u64::from(x) + 1) << (21 * i))
}

fn unpack(mut v: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        let x = v & ((1 << 21) - 1);
        v >>= 21;
        (x != 0).then(|| x as usize - 1)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    pub k_max: usize,
    pub table_depth: usize,
    /// Cap on subset-tree nodes visited per decode; the best partial
    /// solution is returned when it is exhausted.
    pub visit_budget: usize,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self { k_max: 4, table_depth: 2, visit_budget: 200_000 }
    }
}

#[derive(Clone, Debug)]
pub struct PowerDecoderModel {
    pub sector: Sector,
    pub syndrome_len: usize,
    pub syndromes: Vec<BitVec>,
    pub recoveries: Vec<BitVec>,
    pub classes: Vec<FaultClass>,
    keys: Vec<Key>,
    table: HashMap<Key, u64>,
    pub k_max: usize,
    pub table_depth: usize,
    pub w_per: usize,
    pub w_table: usize,
    pub visit_budget: usize,
    /// Syndromes that several candidate faults share with distinct
    /// recoveries, as `(syndrome index, number of distinct recoveries)`.
    pub ambiguous: Vec<(usize, usize)>,
}

/// Decoder output: a data correction of one sector plus solver metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub data: BitVec,
    /// Indices of the combined candidate faults (or model columns).
    pub members: Vec<usize>,
    /// Weight of the target syndrome left unexplained (0 on success).
    pub residual_weight: usize,
    pub fallback: bool,
    /// Logical flips predicted by the correction (joint decoding only).
    pub flips: u8,
}

impl PowerDecoderModel {
    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    pub fn lookup(&self, s: &BitVec) -> Option<Vec<usize>> {
        self.table.get(&key_of(s)).map(|&v| unpack(v).collect())
    }
}

/// Builds the candidate set from round-0 effects of a one-round fault
/// dictionary. Per syndrome the preferred candidate is kept by class
/// (qubit, measurement flip, ancillary, partial), then residual weight, then
/// fault index. Partial faults and measurement flips recover trivially.
pub fn build_power_model(fd: &FaultDictionary, sector: Sector, cfg: PowerConfig) -> Result<PowerDecoderModel> {
    let per = fd.detectors_per_round(sector);
    if per > 64 * KEY_WORDS {
        return Err(Error::Invalid(format!("power decoder supports at most {} checks per round", 64 * KEY_WORDS)));
    }
    if cfg.table_depth > 3 {
        return Err(Error::Invalid("table depth above 3 is not supported".into()));
    }
    if fd.faults.is_empty() {
        return Err(Error::Invalid("empty fault dictionary".into()));
    }
    struct Cand {
        class: FaultClass,
        weight: usize,
        index: usize,
        syndrome: BitVec,
        recovery: BitVec,
    }
    let mut best: HashMap<Key, Cand> = HashMap::new();
    let mut distinct: HashMap<Key, Vec<BitVec>> = HashMap::new();
    for (index, f) in fd.faults.iter().enumerate() {
        if f.round != 0 {
            continue;
        }
        let e = f.effect(sector);
        let syndrome = BitVec::from_indices(per, e.detectors.ones().take_while(|&d| d < per));
        if syndrome.is_zero() {
            continue;
        }
        let recovery = match e.class {
            FaultClass::Qubit | FaultClass::Ancillary => e.residual.clone(),
            FaultClass::MeasurementFlip | FaultClass::Partial => BitVec::zeros(e.residual.len()),
        };
        let key = key_of(&syndrome);
        let recs = distinct.entry(key).or_default();
        if !recs.contains(&recovery) {
            recs.push(recovery.clone());
        }
        let cand = Cand { class: e.class, weight: recovery.weight(), index, syndrome, recovery };
        match best.get(&key) {
            Some(b) if (b.class, b.weight, b.index) <= (cand.class, cand.weight, cand.index) => {}
            _ => {
                best.insert(key, cand);
            }
        }
    }
    let mut cands: Vec<Cand> = best.into_values().collect();
    cands.sort_by_key(|c| (c.class, c.index));
    let ambiguous = cands
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let n = distinct[&key_of(&c.syndrome)].len();
            (n > 1).then_some((i, n))
        })
        .collect();
    let keys: Vec<Key> = cands.iter().map(|c| key_of(&c.syndrome)).collect();
    let mut table: HashMap<Key, u64> = HashMap::new();
    table.insert([0; KEY_WORDS], 0);
    let n = keys.len();
    if cfg.table_depth >= 1 {
        for i in 0..n {
            table.entry(keys[i]).or_insert(pack(&[i as u32]));
        }
    }
    if cfg.table_depth >= 2 {
        for i in 0..n {
            for j in (i + 1)..n {
                table.entry(xor_key(&keys[i], &keys[j])).or_insert(pack(&[i as u32, j as u32]));
            }
        }
    }
    if cfg.table_depth >= 3 {
        for i in 0..n {
            for j in (i + 1)..n {
                let ij = xor_key(&keys[i], &keys[j]);
                for k in (j + 1)..n {
                    table.entry(xor_key(&ij, &keys[k])).or_insert(pack(&[i as u32, j as u32, k as u32]));
                }
            }
        }
    }
    let w_per = keys.iter().map(|k| key_weight(k) as usize).max().unwrap_or(0);
    let w_table = table.keys().map(|k| key_weight(k) as usize).max().unwrap_or(0);
    Ok(PowerDecoderModel {
        sector,
        syndrome_len: per,
        syndromes: cands.iter().map(|c| c.syndrome.clone()).collect(),
        recoveries: cands.iter().map(|c| c.recovery.clone()).collect(),
        classes: cands.iter().map(|c| c.class).collect(),
        keys,
        table,
        k_max: cfg.k_max,
        table_depth: cfg.table_depth,
        w_per,
        w_table,
        visit_budget: cfg.visit_budget,
        ambiguous,
    })
}

struct Search<'a> {
    model: &'a PowerDecoderModel,
    visits: usize,
    best_weight: u32,
    best_set: Vec<usize>,
    stack: Vec<usize>,
}

enum Step {
    Found(Vec<usize>),
    Continue,
    Exhausted,
}

impl Search<'_> {
    /// Enumerates pruned subsets of size `k` drawn from indices `start..`,
    /// testing each completed subset against the table.
    fn subsets(&mut self, start: usize, k: usize, w_max: i64, t: Key) -> Step {
        self.visits += 1;
        if self.visits > self.model.visit_budget {
            return Step::Exhausted;
        }
        if k == 0 {
            if let Some(&entry) = self.model.table.get(&t) {
                let mut set = self.stack.clone();
                set.extend(unpack(entry));
                return Step::Found(set);
            }
            let w = key_weight(&t);
            if w < self.best_weight {
                self.best_weight = w;
                self.best_set = self.stack.clone();
            }
            return Step::Continue;
        }
        let n = self.model.keys.len();
        if n < k {
            return Step::Continue;
        }
        for i in start..=(n - k) {
            let t2 = xor_key(&self.model.keys[i], &t);
            if i64::from(key_weight(&t2)) <= w_max {
                self.stack.push(i);
                let r = self.subsets(i + 1, k - 1, w_max - self.model.w_per as i64, t2);
                self.stack.pop();
                match r {
                    Step::Continue => {}
                    other => return other,
                }
            }
        }
        Step::Continue
    }
}

pub fn power_decode(model: &PowerDecoderModel, t: &BitVec) -> Correction {
    assert_eq!(t.len(), model.syndrome_len, "target syndrome length");
    let tk = key_of(t);
    let mut search = Search { model, visits: 0, best_weight: key_weight(&tk), best_set: Vec::new(), stack: Vec::new() };
    let data_len = model.recoveries.first().map_or(0, BitVec::len);
    let combine = |set: &[usize]| {
        let mut d = BitVec::zeros(data_len);
        for &i in set {
            d.xor_assign(&model.recoveries[i]);
        }
        d
    };
    for k in 0..=model.k_max {
        let w_max = (k as i64 - 1) * model.w_per as i64 + model.w_table as i64;
        // The empty subset needs no pruning test.
        let r = if k == 0 { search.subsets(0, 0, w_max, tk) } else { search.subsets(0, k, w_max, tk) };
        match r {
            Step::Found(mut set) => {
                set.sort_unstable();
                return Correction { data: combine(&set), members: set, residual_weight: 0, fallback: false, flips: 0 };
            }
            Step::Exhausted => break,
            Step::Continue => {}
        }
    }
    let set = search.best_set.clone();
    Correction { data: combine(&set), members: set, residual_weight: search.best_weight as usize, fallback: true, flips: 0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BpOsdConfig {
    pub max_iter: usize,
    pub scaling: f64,
    /// Number of most-likely non-pivot columns tried in the combination
    /// sweep after OSD-0; 0 disables it.
    pub osd_sweep: usize,
}

impl Default for BpOsdConfig {
    fn default() -> Self {
        Self { max_iter: 30, scaling: 0.625, osd_sweep: 0 }
    }
}

/// Detector error model of one sector: merged fault columns.
#[derive(Clone, Debug)]
pub struct DecodingGraphModel {
    pub sector: Sector,
    pub num_detectors: usize,
    /// Detector support of each column.
    pub columns: Vec<Vec<usize>>,
    pub priors: Vec<f64>,
    pub flips: Vec<u8>,
    /// Representative data residual of each column.
    pub residuals: Vec<BitVec>,
    /// Indices into the fault dictionary merged into each column.
    pub members: Vec<Vec<usize>>,
    check_cols: Vec<Vec<(usize, usize)>>,
    col_edges: Vec<Vec<usize>>,
    col_vecs: Vec<BitVec>,
    rank: usize,
}

/// Merges faults with identical detector support and logical action;
/// merged prior is `1 − ∏(1 − p_i)`.
pub fn build_joint_model(fd: &FaultDictionary, sector: Sector) -> DecodingGraphModel {
    let nd = fd.num_detectors(sector);
    let mut index: HashMap<(Vec<u64>, u8), usize> = HashMap::new();
    let mut columns = Vec::new();
    let mut survive: Vec<f64> = Vec::new();
    let mut flips = Vec::new();
    let mut residuals = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (fi, f) in fd.faults.iter().enumerate() {
        if f.prior <= 0.0 {
            continue;
        }
        let e = f.effect(sector);
        if e.detectors.is_zero() {
            continue;
        }
        let key = (e.detectors.words().to_vec(), e.flips);
        let ci = *index.entry(key).or_insert_with(|| {
            columns.push(e.detectors.to_indices());
            survive.push(1.0);
            flips.push(e.flips);
            residuals.push(e.residual.clone());
            members.push(Vec::new());
            columns.len() - 1
        });
        survive[ci] *= 1.0 - f.prior;
        members[ci].push(fi);
    }
    let priors: Vec<f64> = survive.iter().map(|s| 1.0 - s).collect();
    let mut check_cols = vec![Vec::new(); nd];
    let mut col_edges = vec![Vec::new(); columns.len()];
    let mut edge = 0;
    for (j, col) in columns.iter().enumerate() {
        for &d in col {
            check_cols[d].push((j, edge));
            col_edges[j].push(edge);
            edge += 1;
        }
    }
    let col_vecs: Vec<BitVec> = columns.iter().map(|c| BitVec::from_indices(nd, c.iter().copied())).collect();
    let rank = F2Matrix::from_supports(nd, columns.clone()).rank();
    DecodingGraphModel { sector, num_detectors: nd, columns, priors, flips, residuals, members, check_cols, col_edges, col_vecs, rank }
}

impl DecodingGraphModel {
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_edges(&self) -> usize {
        self.col_edges.iter().map(Vec::len).sum()
    }

    /// Detector-error-model style text: `error(p) D.. L..` per column.
    pub fn to_dem_text(&self) -> String {
        let mut out = String::new();
        for j in 0..self.columns.len() {
            write!(out, "error({})", self.priors[j]).unwrap();
            for d in &self.columns[j] {
                write!(out, " D{d}").unwrap();
            }
            for l in 0..8 {
                if self.flips[j] >> l & 1 == 1 {
                    write!(out, " L{l}").unwrap();
                }
            }
            out.push('\n');
        }
        out
    }

    fn correction_from(&self, cols: Vec<usize>, fallback: bool) -> Correction {
        let len = self.residuals.first().map_or(0, BitVec::len);
        let mut data = BitVec::zeros(len);
        let mut flips = 0u8;
        for &j in &cols {
            data.xor_assign(&self.residuals[j]);
            flips ^= self.flips[j];
        }
        Correction { data, members: cols, residual_weight: 0, fallback, flips }
    }
}

/// Min-sum BP followed by OSD when BP's hard decision misses the syndrome.
pub fn bp_osd_decode(model: &DecodingGraphModel, syndrome: &BitVec, cfg: &BpOsdConfig) -> Result<Correction> {
    assert_eq!(syndrome.len(), model.num_detectors, "syndrome length");
    if syndrome.is_zero() {
        return Ok(model.correction_from(Vec::new(), false));
    }
    let ncols = model.columns.len();
    let prior_llr: Vec<f64> = model.priors.iter().map(|&p| ((1.0 - p) / p).ln()).collect();
    let nedges = model.num_edges();
    let mut v2c = vec![0.0f64; nedges];
    let mut c2v = vec![0.0f64; nedges];
    for j in 0..ncols {
        for &e in &model.col_edges[j] {
            v2c[e] = prior_llr[j];
        }
    }
    let mut posterior = prior_llr.clone();
    let mut hard = vec![false; ncols];
    for _ in 0..cfg.max_iter {
        for (i, edges) in model.check_cols.iter().enumerate() {
            let mut sign = syndrome.get(i);
            let (mut min1, mut min2, mut argmin) = (f64::INFINITY, f64::INFINITY, usize::MAX);
            for &(_, e) in edges {
                let m = v2c[e];
                sign ^= m < 0.0;
                let a = m.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    argmin = e;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for &(_, e) in edges {
                let mag = if e == argmin { min2 } else { min1 };
                let s = sign ^ (v2c[e] < 0.0);
                c2v[e] = if s { -cfg.scaling * mag } else { cfg.scaling * mag };
            }
        }
        for j in 0..ncols {
            let total: f64 = prior_llr[j] + model.col_edges[j].iter().map(|&e| c2v[e]).sum::<f64>();
            posterior[j] = total;
            hard[j] = total < 0.0;
            for &e in &model.col_edges[j] {
                v2c[e] = total - c2v[e];
            }
        }
        let mut s = BitVec::zeros(model.num_detectors);
        for j in (0..ncols).filter(|&j| hard[j]) {
            s.xor_assign(&model.col_vecs[j]);
        }
        if &s == syndrome {
            let support: Vec<usize> = (0..ncols).filter(|&j| hard[j]).collect();
            return Ok(model.correction_from(independent_subset(model, support, syndrome, &posterior), false));
        }
    }
    osd(model, syndrome, &posterior, &prior_llr, cfg.osd_sweep).map(|cols| model.correction_from(cols, true))
}

/// Fully reduced column echelon over detector space with combination
/// tracking in terms of pivot slots.
struct Echelon {
    rows: Vec<BitVec>,
    combos: Vec<BitVec>,
    pivot_row: Vec<Option<usize>>,
    pivot_cols: Vec<usize>,
}

impl Echelon {
    fn new(len: usize, cap: usize) -> Self {
        Self { rows: Vec::new(), combos: Vec::new(), pivot_row: vec![None; len], pivot_cols: Vec::with_capacity(cap) }
    }

    /// Reduces `v`, returning the combination of pivot slots used.
    fn reduce(&self, v: &mut BitVec, cap: usize) -> BitVec {
        let mut combo = BitVec::zeros(cap);
        let hits: Vec<usize> = v.ones().filter_map(|b| self.pivot_row[b]).collect();
        for r in hits {
            v.xor_assign(&self.rows[r]);
            combo.xor_assign(&self.combos[r]);
        }
        combo
    }

    fn insert(&mut self, col: usize, v: &BitVec, cap: usize) -> bool {
        let mut v = v.clone();
        let mut combo = self.reduce(&mut v, cap);
        let Some(p) = v.first_one() else {
            return false;
        };
        let slot = self.pivot_cols.len();
        self.pivot_cols.push(col);
        combo.flip(slot);
        for r in 0..self.rows.len() {
            if self.rows[r].get(p) {
                self.rows[r].xor_assign(&v);
                self.combos[r].xor_assign(&combo);
            }
        }
        self.pivot_row[p] = Some(self.rows.len());
        self.rows.push(v);
        self.combos.push(combo);
        true
    }

    fn solve(&self, s: &BitVec, cap: usize) -> Option<Vec<usize>> {
        let mut v = s.clone();
        let combo = self.reduce(&mut v, cap);
        v.is_zero().then(|| combo.ones().map(|slot| self.pivot_cols[slot]).collect())
    }
}

/// A converged BP decision can contain closed loops of columns (zero
/// syndrome, possibly a logical). Re-solves within the support using only
/// linearly independent columns, most likely first.
fn independent_subset(model: &DecodingGraphModel, mut support: Vec<usize>, syndrome: &BitVec, posterior: &[f64]) -> Vec<usize> {
    support.sort_by(|&a, &b| posterior[a].total_cmp(&posterior[b]).then(a.cmp(&b)));
    let cap = support.len().max(1);
    let mut ech = Echelon::new(model.num_detectors, cap);
    let mut dependent = false;
    for &j in &support {
        dependent |= !ech.insert(j, &model.col_vecs[j], cap);
    }
    if !dependent {
        support.sort_unstable();
        return support;
    }
    let mut cols = ech.solve(syndrome, cap).expect("support spans the syndrome");
    cols.sort_unstable();
    cols
}

fn osd(model: &DecodingGraphModel, syndrome: &BitVec, posterior: &[f64], prior_llr: &[f64], sweep: usize) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..model.columns.len()).collect();
    order.sort_by(|&a, &b| posterior[a].total_cmp(&posterior[b]).then(a.cmp(&b)));
    let cap = model.rank.max(1);
    let mut ech = Echelon::new(model.num_detectors, cap);
    let mut non_pivot = Vec::new();
    for &j in &order {
        if ech.pivot_cols.len() == model.rank {
            break;
        }
        if !ech.insert(j, &model.col_vecs[j], cap) {
            non_pivot.push(j);
        }
    }
    let mut best = ech.solve(syndrome, cap).ok_or(Error::UnmatchableSyndrome)?;
    if sweep > 0 {
        let cost = |cols: &[usize]| cols.iter().map(|&j| prior_llr[j]).sum::<f64>();
        let mut best_cost = cost(&best);
        // Most likely non-pivot columns, including those never examined.
        let mut candidates = non_pivot;
        let examined: std::collections::HashSet<usize> = ech.pivot_cols.iter().chain(candidates.iter()).copied().collect();
        candidates.extend(order.iter().filter(|j| !examined.contains(j)));
        for &j in candidates.iter().take(sweep) {
            let s2 = syndrome.xor(&model.col_vecs[j]);
            if let Some(mut cols) = ech.solve(&s2, cap) {
                cols.push(j);
                let c = cost(&cols);
                if c < best_cost {
                    best_cost = c;
                    best = cols;
                }
            }
        }
    }
    best.sort_unstable();
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderMode {
    SingleShotPower,
    JointBposd,
}

/// Per-sector decoding outcome of one shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ShotOutcome {
    pub fail_x: bool,
    pub fail_z: bool,
    /// Total number of combined candidates or columns in the corrections.
    pub correction_weight: usize,
}

impl ShotOutcome {
    pub fn failed(&self) -> bool {
        self.fail_x || self.fail_z
    }
}

/// Single-shot power decoding state for one sector.
#[derive(Clone, Debug)]
pub struct SingleShotSector {
    pub model: PowerDecoderModel,
    /// Check matrix whose rows produce this sector's detectors.
    pub checks: F2Matrix,
    /// Opposite-type logicals used to read logical flips of corrections.
    pub logicals: Vec<BitVec>,
}

impl SingleShotSector {
    /// `fd_one_round` must come from a single noisy round followed by a
    /// noiseless round.
    pub fn new(code: &CssCode, basis: &LogicalBasis, fd_one_round: &FaultDictionary, sector: Sector, cfg: PowerConfig) -> Result<Self> {
        let model = build_power_model(fd_one_round, sector, cfg)?;
        let checks = match sector {
            Sector::X => code.hz.clone(),
            Sector::Z => code.hx.clone(),
        };
        Ok(Self { model, checks, logicals: basis.ops(sector.other()).to_vec() })
    }

    /// Decodes every round in turn, applying each correction before the
    /// next round's syndrome is read; the final perfect round is decoded
    /// too. Fails on a nonzero leftover syndrome or a logical flip.
    pub fn decode(&self, detectors: &BitVec, actual_flips: u8) -> (bool, usize) {
        let per = self.model.syndrome_len;
        let rounds = detectors.len() / per;
        let n = self.checks.num_cols();
        let mut raw = BitVec::zeros(per);
        let mut correction = BitVec::zeros(n);
        let mut weight = 0;
        for r in 0..rounds {
            for i in 0..per {
                if detectors.get(r * per + i) {
                    raw.flip(i);
                }
            }
            let t = raw.xor(&self.checks.mul_vec(&correction));
            let c = power_decode(&self.model, &t);
            weight += c.members.len();
            correction.xor_assign(&c.data);
        }
        let leftover = raw.xor(&self.checks.mul_vec(&correction));
        let predicted = self.logicals.iter().enumerate().fold(0u8, |m, (j, l)| m | u8::from(l.dot(&correction)) << j);
        (!leftover.is_zero() || predicted != actual_flips, weight)
    }
}

/// Decoders for both sectors of one circuit.
#[derive(Clone, Debug)]
pub enum ShotDecoder {
    SingleShot { x: SingleShotSector, z: SingleShotSector },
    Joint { x: DecodingGraphModel, z: DecodingGraphModel, cfg: BpOsdConfig },
}

impl ShotDecoder {
    pub fn single_shot(code: &CssCode, basis: &LogicalBasis, fd_one_round: &FaultDictionary, cfg: PowerConfig) -> Result<Self> {
        Ok(ShotDecoder::SingleShot {
            x: SingleShotSector::new(code, basis, fd_one_round, Sector::X, cfg)?,
            z: SingleShotSector::new(code, basis, fd_one_round, Sector::Z, cfg)?,
        })
    }

    pub fn joint(fd: &FaultDictionary, cfg: BpOsdConfig) -> Self {
        ShotDecoder::Joint { x: build_joint_model(fd, Sector::X), z: build_joint_model(fd, Sector::Z), cfg }
    }

    pub fn mode(&self) -> DecoderMode {
        match self {
            ShotDecoder::SingleShot { .. } => DecoderMode::SingleShotPower,
            ShotDecoder::Joint { .. } => DecoderMode::JointBposd,
        }
    }

    pub fn decode_shot(&self, shot: &ShotRecord) -> Result<ShotOutcome> {
        match self {
            ShotDecoder::SingleShot { x, z } => {
                let (fx, wx) = x.decode(&shot.det_x, shot.flips_x);
                let (fz, wz) = z.decode(&shot.det_z, shot.flips_z);
                Ok(ShotOutcome { fail_x: fx, fail_z: fz, correction_weight: wx + wz })
            }
            ShotDecoder::Joint { x, z, cfg } => {
                let cx = bp_osd_decode(x, &shot.det_x, cfg)?;
                let cz = bp_osd_decode(z, &shot.det_z, cfg)?;
                Ok(ShotOutcome {
                    fail_x: cx.flips != shot.flips_x,
                    fail_z: cz.flips != shot.flips_z,
                    correction_weight: cx.members.len() + cz.members.len(),
                })
            }
        }
    }
}

/// Decodes every single circuit fault (and virtual data fault) of `fd` alone
/// and returns the indices of those that fail.
pub fn failing_single_faults(dec: &ShotDecoder, fd: &FaultDictionary) -> Result<Vec<usize>> {
    use rayon::prelude::*;
    let fails: Result<Vec<Option<usize>>> =
        fd.faults.par_iter().enumerate().map(|(i, f)| Ok(dec.decode_shot(&f.record())?.failed().then_some(i))).collect();
    Ok(fails?.into_iter().flatten().collect())
}

/// Decodes every pair of qubit-class faults in round `round` and returns
/// the failing pairs.
pub fn failing_qubit_pairs(dec: &ShotDecoder, fd: &FaultDictionary, round: usize) -> Result<Vec<(usize, usize)>> {
    use rayon::prelude::*;
    let qubit: Vec<usize> = (0..fd.faults.len())
        .filter(|&i| {
            let f = &fd.faults[i];
            f.virtual_data && f.round == round
        })
        .collect();
    let fails: Result<Vec<Vec<(usize, usize)>>> = qubit
        .par_iter()
        .enumerate()
        .map(|(a, &i)| {
            let fi = fd.faults[i].record();
            let mut out = Vec::new();
            for &j in &qubit[a + 1..] {
                let fj = &fd.faults[j];
                let rec = ShotRecord {
                    shot: 0,
                    det_x: fi.det_x.xor(&fj.x.detectors),
                    det_z: fi.det_z.xor(&fj.z.detectors),
                    flips_x: fi.flips_x ^ fj.x.flips,
                    flips_z: fi.flips_z ^ fj.z.flips,
                };
                if dec.decode_shot(&rec)?.failed() {
                    out.push((i, j));
                }
            }
            Ok(out)
        })
        .collect();
    Ok(fails?.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_round, repeat_rounds, CircuitKind};
    use crate::complex::css_from_lattice;
    use crate::homology::logical_basis_linear;
    use crate::lattice::named_lattice;
    use crate::sim::{enumerate_single_faults, NoiseModel, NoisyCircuit};

    fn fd(name: &str, kind: CircuitKind, rounds: usize) -> (crate::CssCode, crate::homology::LogicalBasis, FaultDictionary) {
        let h = named_lattice(name).unwrap().hnf();
        let code = css_from_lattice(&h);
        let basis = logical_basis_linear(&code);
        let c = repeat_rounds(&build_round(kind, &h, &code), rounds, true);
        let nc = NoisyCircuit::new(&c, NoiseModel::standard(1e-3));
        let fd = enumerate_single_faults(&nc, &basis);
        (code, basis, fd)
    }

    #[test]
    fn pack_round_trip() {
        assert_eq!(unpack(pack(&[])).count(), 0);
        assert_eq!(unpack(pack(&[0, 5, 1_000_000])).collect::<Vec<_>>(), vec![0, 5, 1_000_000]);
    }

    #[test]
    fn table_sizes() {
        let (_, _, fd) = fd("Det3", CircuitKind::Compact, 1);
        let m0 = build_power_model(&fd, Sector::X, PowerConfig { table_depth: 0, ..Default::default() }).unwrap();
        assert_eq!(m0.table_len(), 1);
        let m1 = build_power_model(&fd, Sector::X, PowerConfig { table_depth: 1, ..Default::default() }).unwrap();
        assert_eq!(m1.table_len(), m1.syndromes.len() + 1);
        assert_eq!(m1.w_per, m1.syndromes.iter().map(BitVec::weight).max().unwrap());
        // Every qubit has its own candidate.
        assert_eq!(m1.classes.iter().filter(|&&c| c == FaultClass::Qubit).count(), 18);
    }

    #[test]
    fn power_decode_singles_and_zero() {
        let (_, _, fd) = fd("Det3", CircuitKind::Compact, 1);
        for s in [Sector::X, Sector::Z] {
            let m = build_power_model(&fd, s, PowerConfig::default()).unwrap();
            let zero = power_decode(&m, &BitVec::zeros(m.syndrome_len));
            assert!(zero.members.is_empty() && !zero.fallback && zero.data.is_zero());
            for (i, syn) in m.syndromes.iter().enumerate() {
                let c = power_decode(&m, syn);
                assert!(!c.fallback);
                assert_eq!(c.data, m.recoveries[i]);
                // The chosen members reproduce the target exactly.
                let mut acc = BitVec::zeros(m.syndrome_len);
                for &j in &c.members {
                    acc.xor_assign(&m.syndromes[j]);
                }
                assert_eq!(&acc, syn);
            }
        }
    }

    #[test]
    fn joint_model_priors_merge() {
        let (_, _, fd) = fd("Det3", CircuitKind::Compact, 3);
        let m = build_joint_model(&fd, Sector::X);
        assert_eq!(m.num_detectors, 4 * 12);
        for (j, members) in m.members.iter().enumerate() {
            let expected = 1.0 - members.iter().map(|&f| 1.0 - fd.faults[f].prior).product::<f64>();
            assert!((m.priors[j] - expected).abs() < 1e-15);
            for &f in members {
                assert_eq!(fd.faults[f].x.detectors.to_indices(), m.columns[j]);
                assert_eq!(fd.faults[f].x.flips, m.flips[j]);
            }
        }
    }

    #[test]
    fn bposd_satisfies_syndrome_and_matches_singles() {
        let (_, _, fd) = fd("Det3", CircuitKind::Compact, 2);
        let cfg = BpOsdConfig::default();
        for s in [Sector::X, Sector::Z] {
            let m = build_joint_model(&fd, s);
            assert!(bp_osd_decode(&m, &BitVec::zeros(m.num_detectors), &cfg).unwrap().members.is_empty());
            for j in 0..m.num_columns() {
                let syn = BitVec::from_indices(m.num_detectors, m.columns[j].iter().copied());
                let c = bp_osd_decode(&m, &syn, &cfg).unwrap();
                assert_eq!(c.flips, m.flips[j], "column {j}");
                let mut acc = BitVec::zeros(m.num_detectors);
                for &k in &c.members {
                    acc.xor_assign(&m.col_vecs[k]);
                }
                assert_eq!(acc, syn);
            }
        }
    }

    #[test]
    fn osd_always_satisfies_syndrome() {
        let (_, _, fd) = fd("Det3", CircuitKind::Compact, 2);
        let m = build_joint_model(&fd, Sector::X);
        let cfg = BpOsdConfig { max_iter: 1, osd_sweep: 5, ..Default::default() };
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut syn = BitVec::zeros(m.num_detectors);
            for _ in 0..rng.gen_range(1..6) {
                syn.xor_assign(&m.col_vecs[rng.gen_range(0..m.num_columns())]);
            }
            let c = bp_osd_decode(&m, &syn, &cfg).unwrap();
            let mut acc = BitVec::zeros(m.num_detectors);
            for &k in &c.members {
                acc.xor_assign(&m.col_vecs[k]);
            }
            assert_eq!(acc, syn);
        }
    }

    #[test]
    fn det3_compact_joint_single_faults() {
        let (_, _, fd) = fd("Det3", CircuitKind::Compact, 3);
        let dec = ShotDecoder::joint(&fd, BpOsdConfig::default());
        assert_eq!(failing_single_faults(&dec, &fd).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn det3_single_shot_single_faults() {
        let (code, basis, fd1) = fd("Det3", CircuitKind::Compact, 1);
        let dec = ShotDecoder::single_shot(&code, &basis, &fd1, PowerConfig::default()).unwrap();
        let (_, _, fd3) = fd("Det3", CircuitKind::Compact, 3);
        let fails = failing_single_faults(&dec, &fd3).unwrap();
        println!("det3 single-shot failing singles: {}", fails.len());
    }
}
