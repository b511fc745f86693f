//! Memory experiments, binomial statistics, pseudo-threshold and slope
//! estimation, and machine-spec arithmetic.

use std::fmt::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_round, repeat_rounds, CircuitKind};
use crate::complex::css_from_lattice;
use crate::decoders::{BpOsdConfig, DecoderMode, PowerConfig, ShotDecoder};
use crate::homology::{distance_exact, distance_upper_bound, logical_basis_linear};
use crate::lattice::{named_lattice, HnfMatrix, LatticeSpec, PARAMETER_LATTICES, SIMULATION_LATTICES};
use crate::sim::{enumerate_single_faults, NoiseModel, NoisyCircuit};
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub const DEFAULT_P_GRID: [f64; 5] = [1e-2, 5e-3, 3e-3, 2e-3, 1e-3];

/// Logical qubits per block.
pub const K: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeRef {
    Named(NamedRef),
    Spec(LatticeSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedRef {
    pub name: String,
}

impl LatticeRef {
    pub fn named(name: &str) -> Self {
        LatticeRef::Named(NamedRef { name: name.to_string() })
    }

    pub fn to_hnf(&self) -> Result<HnfMatrix> {
        match self {
            LatticeRef::Named(n) => {
                named_lattice(&n.name).map(|l| l.hnf()).ok_or_else(|| Error::Invalid(format!("unknown lattice name {:?}", n.name)))
            }
            LatticeRef::Spec(s) => s.to_hnf(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MemoryExperimentConfig {
    pub lattice: LatticeRef,
    pub circuit: CircuitKind,
    /// Noisy rounds; defaults to the code distance.
    pub rounds: Option<usize>,
    pub p: Vec<f64>,
    /// Shot cap per point.
    pub shots: u64,
    /// Stop a point early once the 95% interval half-width is below this
    /// fraction of the estimate.
    pub target_rel_ci: f64,
    pub decoder: DecoderMode,
    pub seed: u64,
    /// Discard shots whose correction weight exceeds this value.
    pub postselect_weight: Option<usize>,
    /// Noise channel switches; the rate is taken from `p`.
    pub noise: NoiseModel,
    pub power: PowerConfig,
    pub bposd: BpOsdConfig,
    /// Shots between stopping checks (rounded up to a multiple of 64).
    pub chunk: u64,
}

impl Default for MemoryExperimentConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeRef::named("Det3"),
            circuit: CircuitKind::Compact,
            rounds: None,
            p: DEFAULT_P_GRID.to_vec(),
            shots: 100_000,
            target_rel_ci: 0.3,
            decoder: DecoderMode::JointBposd,
            seed: 0,
            postselect_weight: None,
            noise: NoiseModel::standard(0.0),
            power: PowerConfig::default(),
            bposd: BpOsdConfig::default(),
            chunk: 4096,
        }
    }
}

impl MemoryExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots < 1 {
            return Err(Error::Invalid("shots must be at least 1".into()));
        }
        if self.rounds == Some(0) {
            return Err(Error::Invalid("rounds must be at least 1".into()));
        }
        if self.p.is_empty() {
            return Err(Error::Invalid("empty p sweep".into()));
        }
        for &p in &self.p {
            NoiseModel { p, ..self.noise }.validate()?;
        }
        if !(self.target_rel_ci > 0.0) {
            return Err(Error::Invalid("target_rel_ci must be positive".into()));
        }
        if self.chunk == 0 {
            return Err(Error::Invalid("chunk must be positive".into()));
        }
        Ok(())
    }
}

/// Wilson score interval.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let ph = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (ph + z2 / (2.0 * n)) / denom;
    let half = z * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub p: f64,
    pub seed: u64,
    /// Shots kept after postselection.
    pub shots: u64,
    pub discarded: u64,
    pub failures: u64,
    pub failures_x: u64,
    pub failures_z: u64,
    pub p_fail: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `p_fail / rounds`.
    pub per_round: f64,
    pub per_round_ci: (f64, f64),
    /// `per_round / k`.
    pub per_round_per_qubit: f64,
    pub discard_fraction: f64,
    pub runtime_s: f64,
}

impl PointResult {
    fn new(p: f64, seed: u64, rounds: usize, t: &Tally, runtime_s: f64) -> Self {
        let (lo, hi) = wilson_interval(t.failures, t.kept, Z95);
        let p_fail = if t.kept == 0 { 0.0 } else { t.failures as f64 / t.kept as f64 };
        let r = rounds as f64;
        let total = t.kept + t.discarded;
        Self {
            p,
            seed,
            shots: t.kept,
            discarded: t.discarded,
            failures: t.failures,
            failures_x: t.failures_x,
            failures_z: t.failures_z,
            p_fail,
            ci_low: lo,
            ci_high: hi,
            per_round: p_fail / r,
            per_round_ci: (lo / r, hi / r),
            per_round_per_qubit: p_fail / r / K as f64,
            discard_fraction: if total == 0 { 0.0 } else { t.discarded as f64 / total as f64 },
            runtime_s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: MemoryExperimentConfig,
    pub hnf: HnfMatrix,
    pub rounds: usize,
    pub k: usize,
    pub points: Vec<PointResult>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    kept: u64,
    discarded: u64,
    failures: u64,
    failures_x: u64,
    failures_z: u64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.kept += o.kept;
        self.discarded += o.discarded;
        self.failures += o.failures;
        self.failures_x += o.failures_x;
        self.failures_z += o.failures_z;
        self
    }
}

/// Distance used as the default round count: the catalog value when the
/// lattice is listed, otherwise an exact search for small codes and a
/// randomized bound beyond.
pub fn default_rounds(h: &HnfMatrix) -> Result<usize> {
    if let Some(l) = PARAMETER_LATTICES.iter().chain(SIMULATION_LATTICES.iter()).find(|l| l.hnf() == *h) {
        return Ok(l.distance);
    }
    let code = css_from_lattice(h);
    let basis = logical_basis_linear(&code);
    if let Some(r) = distance_exact(&code, &basis, 8)? {
        return Ok(r.d);
    }
    Ok(distance_upper_bound(&code, &basis, 200, 0).d)
}

/// Seed of sweep point `i`, mixed from the master seed.
pub fn point_seed(master: u64, i: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = master ^ (i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs the memory experiment: `rounds` noisy rounds, one noiseless round,
/// decoding per shot. Deterministic for a fixed config regardless of the
/// number of threads.
pub fn run_memory_experiment(cfg: &MemoryExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let h = cfg.lattice.to_hnf()?;
    let rounds = match cfg.rounds {
        Some(r) => r,
        None => default_rounds(&h)?,
    };
    let code = css_from_lattice(&h);
    let basis = logical_basis_linear(&code);
    let round = build_round(cfg.circuit, &h, &code);
    let circuit = repeat_rounds(&round, rounds, true);
    let mut points = Vec::with_capacity(cfg.p.len());
    for (i, &p) in cfg.p.iter().enumerate() {
        let start = Instant::now();
        let noise = NoiseModel { p, ..cfg.noise };
        let nc = NoisyCircuit::new(&circuit, noise);
        // Fault priors are built at the point's own rate.
        let decoder = match cfg.decoder {
            DecoderMode::JointBposd => ShotDecoder::joint(&enumerate_single_faults(&nc, &basis), cfg.bposd),
            DecoderMode::SingleShotPower => {
                let one = NoisyCircuit::new(&repeat_rounds(&round, 1, true), noise);
                ShotDecoder::single_shot(&code, &basis, &enumerate_single_faults(&one, &basis), cfg.power)?
            }
        };
        let seed = point_seed(cfg.seed, i);
        let chunk_batches = cfg.chunk.div_ceil(64);
        let total_batches = cfg.shots.div_ceil(64);
        let mut tally = Tally::default();
        let mut next = 0u64;
        while next < total_batches {
            let end = (next + chunk_batches).min(total_batches);
            let part = (next..end)
                .into_par_iter()
                .map(|b| {
                    let mut t = Tally::default();
                    let lanes = (cfg.shots - b * 64).min(64) as usize;
                    for rec in nc.sample_batch(b, seed, &basis).into_iter().take(lanes) {
                        let trivial = rec.det_x.is_zero() && rec.det_z.is_zero();
                        let o = if trivial {
                            crate::decoders::ShotOutcome { fail_x: rec.flips_x != 0, fail_z: rec.flips_z != 0, correction_weight: 0 }
                        } else {
                            decoder.decode_shot(&rec)?
                        };
                        if cfg.postselect_weight.is_some_and(|w| o.correction_weight > w) {
                            t.discarded += 1;
                            continue;
                        }
                        t.kept += 1;
                        t.failures += u64::from(o.failed());
                        t.failures_x += u64::from(o.fail_x);
                        t.failures_z += u64::from(o.fail_z);
                    }
                    Ok(t)
                })
                .reduce(|| Ok(Tally::default()), |a: Result<Tally>, b| Ok(a?.merge(b?)))?;
            tally = tally.merge(part);
            next = end;
            if tally.failures > 0 {
                let (lo, hi) = wilson_interval(tally.failures, tally.kept, Z95);
                let est = tally.failures as f64 / tally.kept as f64;
                if (hi - lo) / 2.0 <= cfg.target_rel_ci * est {
                    break;
                }
            }
        }
        let pr = PointResult::new(p, seed, rounds, &tally, start.elapsed().as_secs_f64());
        log::info!("p={p:e} shots={} failures={} per_round={:e}", pr.shots, pr.failures, pr.per_round);
        points.push(pr);
    }
    Ok(SweepResult { config: cfg.clone(), hnf: h, rounds, k: K, points })
}

/// Crossing of a curve with the unencoded rate `k·p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub p_star: f64,
    /// Crossings of the interval bounds, when they are bracketed too.
    pub ci: (Option<f64>, Option<f64>),
}

fn log_crossing(pts: &[(f64, f64)], k: f64) -> Option<f64> {
    // g(x) = log P_L − log(k p) against x = log p; first sign change.
    let g: Vec<(f64, f64)> =
        pts.iter().filter(|&&(_, y)| y > 0.0).map(|&(p, y)| (p.ln(), y.ln() - (k * p).ln())).collect();
    for w in g.windows(2) {
        let ((x1, y1), (x2, y2)) = (w[0], w[1]);
        if y1 == 0.0 {
            return Some(x1.exp());
        }
        if (y1 < 0.0) != (y2 < 0.0) || y2 == 0.0 {
            return Some((x1 - y1 * (x2 - x1) / (y2 - y1)).exp());
        }
    }
    None
}

/// Pseudo-threshold from `(p, P_L, ci_low, ci_high)` points: log-log
/// interpolation of `P_L` against `k·p`.
pub fn pseudo_threshold_points(points: &[(f64, f64, f64, f64)], k: usize) -> Result<Crossing> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let kf = k as f64;
    let centre: Vec<(f64, f64)> = pts.iter().map(|&(p, y, _, _)| (p, y)).collect();
    let p_star = log_crossing(&centre, kf).ok_or(Error::NotBracketed)?;
    // The upper bound curve crosses first.
    let upper: Vec<(f64, f64)> = pts.iter().map(|&(p, _, _, hi)| (p, hi)).collect();
    let lower: Vec<(f64, f64)> = pts.iter().map(|&(p, _, lo, _)| (p, lo)).collect();
    Ok(Crossing { p_star, ci: (log_crossing(&upper, kf), log_crossing(&lower, kf)) })
}

/// Pseudo-threshold of a sweep using per-round block rates.
pub fn pseudo_threshold(curve: &SweepResult, k: usize) -> Result<Crossing> {
    let pts: Vec<(f64, f64, f64, f64)> =
        curve.points.iter().map(|r| (r.p, r.per_round, r.per_round_ci.0, r.per_round_ci.1)).collect();
    pseudo_threshold_points(&pts, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub slope_err: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares slope of `log y` against `log x` over points with `y > 0`.
pub fn fit_slope_points(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let xy: Vec<(f64, f64)> = points.iter().filter(|&&(x, y)| x > 0.0 && y > 0.0).map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = xy.len();
    if n < 3 {
        return Err(Error::InsufficientPoints { need: 3, have: n });
    }
    let nf = n as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("all points share one p".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let slope_err = (sse / (nf - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, slope_err, intercept, points: n })
}

/// Slope of the per-round block rate over points with at least one failure.
pub fn fit_slope(curve: &SweepResult) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = curve.points.iter().map(|r| (r.p, r.per_round)).collect();
    fit_slope_points(&pts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecsRow {
    pub det: u64,
    pub d: u64,
    pub blocks: u64,
    pub logical_qubits: u64,
    pub data_qubits: u64,
    pub measurements_per_cycle: u64,
    pub depth_starfish: u64,
    pub depth_compact: u64,
}

pub fn specs_table(entries: &[(u64, u64, u64)]) -> Vec<SpecsRow> {
    entries
        .iter()
        .map(|&(det, d, b)| SpecsRow {
            det,
            d,
            blocks: b,
            logical_qubits: 6 * b,
            data_qubits: 6 * b * det,
            measurements_per_cycle: 8 * b * det,
            depth_starfish: 16,
            depth_compact: 8,
        })
        .collect()
}

pub const RESULTS_CSV_HEADER: &str =
    "p,shots,discarded,failures,failures_x,failures_z,p_fail,ci_low,ci_high,per_round,per_round_ci_low,per_round_ci_high,per_round_per_qubit,runtime_s,seed";

pub fn results_csv(r: &SweepResult) -> String {
    let mut out = String::from(RESULTS_CSV_HEADER);
    out.push('\n');
    for p in &r.points {
        writeln!(
            out,
            "{:e},{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:.3},{}",
            p.p,
            p.shots,
            p.discarded,
            p.failures,
            p.failures_x,
            p.failures_z,
            p.p_fail,
            p.ci_low,
            p.ci_high,
            p.per_round,
            p.per_round_ci.0,
            p.per_round_ci.1,
            p.per_round_per_qubit,
            p.runtime_s,
            p.seed
        )
        .unwrap();
    }
    out
}

/// `x y y_low y_high` columns: physical rate against per-round block rate.
pub fn plot_data(r: &SweepResult) -> String {
    let mut out = String::from("# x=p y=per_round_rate y_low y_high\n");
    for p in &r.points {
        writeln!(out, "{:e} {:e} {:e} {:e}", p.p, p.per_round, p.per_round_ci.0, p.per_round_ci.1).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate_and_shrinks() {
        let (lo, hi) = wilson_interval(10, 1000, Z95);
        assert!(lo < 0.01 && 0.01 < hi);
        let (lo0, hi0) = wilson_interval(0, 100, Z95);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0);
        // Width scales as n^-1/2.
        let w = |n: u64| {
            let (a, b) = wilson_interval(n / 10, n, Z95);
            b - a
        };
        let ratio = w(10_000) / w(1_000_000);
        assert!((ratio - 10.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn wilson_matches_closed_form() {
        // 5/20 at z=1.96: textbook values.
        let (lo, hi) = wilson_interval(5, 20, 1.96);
        assert!((lo - 0.1119).abs() < 1e-4 && (hi - 0.4687).abs() < 1e-4, "{lo} {hi}");
    }

    #[test]
    fn synthetic_pseudo_threshold() {
        let pts: Vec<(f64, f64, f64, f64)> = [1e-4, 3e-4, 1e-3, 3e-3]
            .iter()
            .map(|&p| {
                let y = 1e4 * p * p;
                (p, y, 0.8 * y, 1.2 * y)
            })
            .collect();
        let c = pseudo_threshold_points(&pts, 6).unwrap();
        assert!((c.p_star - 6e-4).abs() < 1e-12);
        let (a, b) = (c.ci.0.unwrap(), c.ci.1.unwrap());
        assert!(a < c.p_star && c.p_star < b);
        let below: Vec<_> = pts[..2].to_vec();
        assert!(matches!(pseudo_threshold_points(&below, 6), Err(Error::NotBracketed)));
    }

    #[test]
    fn synthetic_slope() {
        let pts: Vec<(f64, f64)> = [1e-3f64, 2e-3, 3e-3, 5e-3].iter().map(|&p| (p, 7.0 * p.powi(4))).collect();
        let f = fit_slope_points(&pts).unwrap();
        assert!((f.slope - 4.0).abs() < 1e-9 && f.slope_err < 1e-6);
        assert!(matches!(fit_slope_points(&pts[..2]), Err(Error::InsufficientPoints { need: 3, have: 2 })));
    }

    #[test]
    fn specs_cells() {
        let rows = specs_table(&[(16, 8, 9), (45, 15, 16), (45, 15, 250)]);
        let cells: Vec<(u64, u64, u64)> = rows.iter().map(|r| (r.logical_qubits, r.data_qubits, r.measurements_per_cycle)).collect();
        assert_eq!(cells, vec![(54, 864, 1152), (96, 4320, 5760), (1500, 67500, 90000)]);
    }

    fn small_cfg() -> MemoryExperimentConfig {
        MemoryExperimentConfig { p: vec![4e-3], shots: 2000, chunk: 512, seed: 11, target_rel_ci: 1e-9, ..Default::default() }
    }

    #[test]
    fn zero_noise_has_no_failures() {
        let cfg = MemoryExperimentConfig { p: vec![0.0], shots: 500, ..small_cfg() };
        let r = run_memory_experiment(&cfg).unwrap();
        assert_eq!((r.points[0].failures, r.points[0].shots), (0, 500));
        assert_eq!(r.rounds, 3);
    }

    #[test]
    fn deterministic_and_postselect_infinity() {
        let cfg = small_cfg();
        let a = run_memory_experiment(&cfg).unwrap();
        let b = run_memory_experiment(&MemoryExperimentConfig { postselect_weight: Some(usize::MAX), ..cfg.clone() }).unwrap();
        let strip = |r: &SweepResult| r.points.iter().map(|p| (p.shots, p.failures, p.failures_x, p.failures_z, p.discarded)).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| run_memory_experiment(&cfg).unwrap());
        assert_eq!(strip(&a), strip(&c));
        let d = run_memory_experiment(&MemoryExperimentConfig { postselect_weight: Some(0), ..cfg }).unwrap();
        assert!(d.points[0].discarded > 0);
        assert_eq!(d.points[0].shots + d.points[0].discarded, 2000);
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        let ok: MemoryExperimentConfig = serde_json::from_str(r#"{"lattice": {"name": "Det9a"}, "circuit": "starfish", "decoder": "single_shot_power"}"#).unwrap();
        assert_eq!(ok.circuit, CircuitKind::Starfish);
        assert!(serde_json::from_str::<MemoryExperimentConfig>(r#"{"shots": 5, "bogus": 1}"#).is_err());
        let spec: MemoryExperimentConfig = serde_json::from_str(r#"{"lattice": {"hnf": [[1,1,1,1],[0,2,0,2],[0,0,2,2],[0,0,0,4]]}}"#).unwrap();
        assert_eq!(spec.lattice.to_hnf().unwrap().determinant(), 16);
    }
}
