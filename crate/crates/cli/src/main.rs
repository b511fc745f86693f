//! `torus4` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use torus4::bench::{
    self, fit_slope, plot_data, pseudo_threshold, results_csv, specs_table, LatticeRef, MemoryExperimentConfig, K,
};
use torus4::circuit::{build_round, effective_checks, repeat_rounds, CircuitKind};
use torus4::complex::css_from_lattice;
use torus4::decoders::DecoderMode;
use torus4::homology::{
    cup_logical_basis, distance_exact, distance_upper_bound, logical_basis_linear, CupConvention, DistanceReport,
    LogicalBasis,
};
use torus4::lattice::{hnfs_with_determinant, named_lattice, parse_hnf_shorthand, LatticeSpec};
use torus4::sim::NoiseModel;
use torus4::symmetry::{build_catalog, verify_catalog, GateCatalog, SymmetryReport};
use torus4::{CssCode, Error, HnfMatrix};

#[derive(Parser)]
#[command(name = "torus4", version, about = "4D rotated loop-only toric codes")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "TORUS4_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Code parameters [[n,k,d]] of a lattice.
    Params(ParamsArgs),
    /// Emit a syndrome-extraction circuit.
    Circuit(CircuitArgs),
    /// Run a memory experiment sweep.
    Simulate(SimulateArgs),
    /// Machine specification table for (det, d, blocks) entries.
    Specs(SpecsArgs),
    /// Automorphisms, ZX dualities and fold-transversal gate catalog.
    Symmetries(SymmetriesArgs),
    /// List HNF lattices of a small determinant.
    Hnfs(HnfsArgs),
}

#[derive(Args, Clone, Default)]
struct LatticeArgs {
    /// HNF shorthand `a11,a12,a13,a14,a22,a23,a24,a33,a34,a44`.
    #[arg(long, allow_hyphen_values = true)]
    hnf: Option<String>,
    /// JSON file `{"basis": [[..];4]}` or `{"hnf": [[..];4]}`.
    #[arg(long)]
    lattice_file: Option<PathBuf>,
    /// Catalog name such as `Det3`, `Hadamard`, or `identity`.
    #[arg(long)]
    lattice: Option<String>,
}

impl LatticeArgs {
    fn given(&self) -> bool {
        self.hnf.is_some() || self.lattice_file.is_some() || self.lattice.is_some()
    }

    fn to_ref(&self) -> Result<LatticeRef, CliError> {
        let n = [self.hnf.is_some(), self.lattice_file.is_some(), self.lattice.is_some()].iter().filter(|&&b| b).count();
        if n != 1 {
            return Err(CliError::Config("give exactly one of --hnf, --lattice-file, --lattice".into()));
        }
        if let Some(s) = &self.hnf {
            let h = parse_hnf_shorthand(s)?;
            return Ok(LatticeRef::Spec(LatticeSpec::Hnf(*h.rows())));
        }
        if let Some(path) = &self.lattice_file {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let spec: LatticeSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: invalid lattice file: {e}", path.display())))?;
            spec.to_hnf()?;
            return Ok(LatticeRef::Spec(spec));
        }
        let name = self.lattice.as_deref().unwrap_or_default();
        if name.eq_ignore_ascii_case("identity") {
            return Ok(LatticeRef::Spec(LatticeSpec::Hnf(*HnfMatrix::identity().rows())));
        }
        if named_lattice(name).is_none() {
            return Err(CliError::Config(format!("unknown lattice name {name:?}")));
        }
        Ok(LatticeRef::named(name))
    }

    fn hnf(&self) -> Result<HnfMatrix, CliError> {
        Ok(self.to_ref()?.to_hnf()?)
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum DistanceMode {
    /// Exact for Det ≤ 9, randomized otherwise.
    Auto,
    Exact,
    Probabilistic,
}

#[derive(Args)]
struct ParamsArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long, value_enum, default_value = "auto")]
    method: DistanceMode,
    /// Randomized-search trials.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Largest weight tried by the exact search.
    #[arg(long, default_value_t = 10)]
    max_weight: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print a JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CircuitArg {
    Starfish,
    Compact,
}

impl From<CircuitArg> for CircuitKind {
    fn from(c: CircuitArg) -> Self {
        match c {
            CircuitArg::Starfish => CircuitKind::Starfish,
            CircuitArg::Compact => CircuitKind::Compact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    /// Single-shot power decoding.
    Power,
    /// Joint BP+OSD over all rounds.
    Bposd,
}

impl From<DecoderArg> for DecoderMode {
    fn from(d: DecoderArg) -> Self {
        match d {
            DecoderArg::Power => DecoderMode::SingleShotPower,
            DecoderArg::Bposd => DecoderMode::JointBposd,
        }
    }
}

#[derive(Args)]
struct CircuitArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long, value_enum, default_value = "compact")]
    circuit: CircuitArg,
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    /// Append the noiseless readout round.
    #[arg(long)]
    final_noiseless: bool,
    /// Annotate with noise locations at this rate.
    #[arg(long)]
    p: Option<f64>,
    /// Directory for `circuit.txt` and `circuit.json`; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Base JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long, value_enum)]
    circuit: Option<CircuitArg>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Physical error rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Shot cap per point.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_enum)]
    decoder: Option<DecoderArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Discard shots whose correction weight exceeds this value.
    #[arg(long)]
    postselect_weight: Option<usize>,
    /// Relative 95% CI half-width at which a point stops early.
    #[arg(long)]
    target_rel_ci: Option<f64>,
    /// Also write `plot.dat` with x/y/CI columns.
    #[arg(long)]
    emit_plot_data: bool,
    /// Run directory (default `runs/<config hash>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
struct SpecsArgs {
    /// `det,d,blocks`; repeatable. Defaults to the Hadamard, Det45 and
    /// utility-scale machines.
    #[arg(long = "entry")]
    entries: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SymmetriesArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    /// Write the gate catalog to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-verify a previously written catalog instead of building one.
    #[arg(long)]
    verify: Option<PathBuf>,
}

#[derive(Args)]
struct HnfsArgs {
    #[arg(long)]
    det: i64,
    /// Stop after this many lattices.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Invariant(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violation: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(_)
            | Error::DegenerateLattice
            | Error::DimensionOutOfRange { .. }
            | Error::NotBracketed
            | Error::InsufficientPoints { .. } => CliError::Config(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Simulation runs log into their run directory once it exists.
    let deferred_log = matches!(&cli.cmd, Cmd::Simulate(a) if !a.dump_config);
    let result = (|| {
        if let Some(n) = cli.threads {
            if n == 0 {
                return Err(CliError::Config("--threads must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        }
        if !deferred_log {
            init_logger(None, "warn");
        }
        match cli.cmd {
            Cmd::Params(a) => cmd_params(&a),
            Cmd::Circuit(a) => cmd_circuit(&a),
            Cmd::Simulate(a) => cmd_simulate(&a),
            Cmd::Specs(a) => cmd_specs(&a),
            Cmd::Symmetries(a) => cmd_symmetries(&a),
            Cmd::Hnfs(a) => cmd_hnfs(&a),
        }
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("torus4: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// Log lines go to stderr and, when given, to a file as well.
struct Tee(Option<Arc<Mutex<fs::File>>>);

impl Write for Tee {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        if let Some(f) = &self.0 {
            f.lock().unwrap().write_all(buf)?;
        }
        std::io::stderr().write_all(buf)?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        if let Some(f) = &self.0 {
            f.lock().unwrap().flush()?;
        }
        std::io::stderr().flush()
    }
}

fn init_logger(file: Option<fs::File>, level: &str) {
    let tee = Tee(file.map(|f| Arc::new(Mutex::new(f))));
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Pipe(Box::new(tee)))
        .try_init();
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance line placed at the top of emitted text files.
fn header_line(hash: &str, seed: u64) -> String {
    format!("# torus4 {} config_sha256={hash} seed={seed}\n", env!("CARGO_PKG_VERSION"))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn basis_for(h: &HnfMatrix, code: &CssCode) -> LogicalBasis {
    cup_logical_basis(h, code, CupConvention::TwoPath).unwrap_or_else(|_| logical_basis_linear(code))
}

fn compute_distance(code: &CssCode, a: &ParamsArgs) -> CliResult<DistanceReport> {
    let basis = logical_basis_linear(code);
    let exact = match a.method {
        DistanceMode::Exact => true,
        DistanceMode::Probabilistic => false,
        DistanceMode::Auto => code.det() <= 9,
    };
    let report = if exact {
        distance_exact(code, &basis, a.max_weight)?.ok_or_else(|| {
            CliError::Config(format!("distance exceeds --max-weight {}; use --method probabilistic", a.max_weight))
        })?
    } else {
        distance_upper_bound(code, &basis, a.trials, a.seed)
    };
    report.verify(code, &basis).map_err(|e| CliError::Invariant(e.to_string()))?;
    Ok(report)
}

fn cmd_params(a: &ParamsArgs) -> CliResult<()> {
    let h = a.lattice.hnf()?;
    let code = css_from_lattice(&h);
    let dist = compute_distance(&code, a)?;
    let weights = code.weight_report();
    if a.json {
        let out = json!({
            "hnf": h.to_string(),
            "det": h.determinant(),
            "n": code.n,
            "k": code.k,
            "d": dist.d,
            "distance": dist,
            "rank_hx": code.rank_hx,
            "rank_hz": code.rank_hz,
            "uniform_weights": weights.is_uniform(),
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("json"));
        return Ok(());
    }
    let bound = if matches!(dist.method, torus4::homology::DistanceMethod::Exact) { "exact" } else { "upper bound" };
    println!("[[{},{},{}]]", code.n, code.k, dist.d);
    println!("hnf {h}  det {}", h.determinant());
    println!("distance {} (dx {}, dz {}, {bound})", dist.d, dist.dx, dist.dz);
    if let Some(t) = dist.trials {
        println!("trials {t}  seed {}", dist.seed.unwrap_or_default());
    }
    println!("rank hx {}  rank hz {}", code.rank_hx, code.rank_hz);
    if weights.is_uniform() {
        println!("check weights uniform (rows 6, columns 4)");
    } else {
        println!(
            "collapsed weights: {} hx rows, {} hz rows, {} hx cols, {} hz cols",
            weights.hx_rows.len(),
            weights.hz_rows.len(),
            weights.hx_cols.len(),
            weights.hz_cols.len()
        );
    }
    Ok(())
}

fn cmd_circuit(a: &CircuitArgs) -> CliResult<()> {
    if a.rounds == 0 {
        return Err(CliError::Config("--rounds must be at least 1".into()));
    }
    let h = a.lattice.hnf()?;
    let code = css_from_lattice(&h);
    let kind = CircuitKind::from(a.circuit);
    let round = build_round(kind, &h, &code);
    round.check_schedulable()?;
    effective_checks(&round, &code)?;
    let circuit = repeat_rounds(&round, a.rounds, a.final_noiseless);
    let cfg = json!({"hnf": h.to_string(), "circuit": kind, "rounds": a.rounds, "final_noiseless": a.final_noiseless, "p": a.p});
    let hash = sha256_hex(cfg.to_string().as_bytes());
    let body = match a.p {
        Some(p) => {
            let noise = NoiseModel::standard(p);
            noise.validate()?;
            torus4::sim::NoisyCircuit::new(&circuit, noise).to_text(&h)
        }
        None => circuit.to_text(&h),
    };
    let text = format!("{}{body}", header_line(&hash, 0));
    match &a.out {
        None => print!("{text}"),
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_file(&dir.join("circuit.txt"), &text)?;
            let mut meta = circuit.metadata(&h);
            meta["config_sha256"] = json!(hash);
            meta["config"] = cfg;
            write_file(&dir.join("circuit.json"), &serde_json::to_string_pretty(&meta).expect("json"))?;
            println!("wrote {} ({} CNOT layers)", dir.join("circuit.txt").display(), circuit.num_cnot_layers());
        }
    }
    Ok(())
}

fn resolve_config(a: &SimulateArgs) -> CliResult<MemoryExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => MemoryExperimentConfig::default(),
    };
    if a.lattice.given() {
        cfg.lattice = a.lattice.to_ref()?;
    }
    if let Some(c) = a.circuit {
        cfg.circuit = c.into();
    }
    if a.rounds.is_some() {
        cfg.rounds = a.rounds;
    }
    if let Some(p) = &a.p {
        cfg.p = p.clone();
    }
    if let Some(s) = a.shots {
        cfg.shots = s;
    }
    if let Some(d) = a.decoder {
        cfg.decoder = d.into();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.postselect_weight.is_some() {
        cfg.postselect_weight = a.postselect_weight;
    }
    if let Some(t) = a.target_rel_ci {
        cfg.target_rel_ci = t;
    }
    cfg.validate()?;
    cfg.lattice.to_hnf()?;
    Ok(cfg)
}

fn config_json(cfg: &MemoryExperimentConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<()> {
    let cfg = resolve_config(a)?;
    let cfg_text = config_json(&cfg);
    if a.dump_config {
        println!("{cfg_text}");
        return Ok(());
    }
    let hash = sha256_hex(cfg_text.as_bytes());
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(&hash[..12]));
    fs::create_dir_all(dir.join("circuits"))?;
    fs::create_dir_all(dir.join("logs"))?;
    init_logger(Some(fs::File::create(dir.join("logs").join("run.log"))?), "info");
    log::info!("run {} config_sha256={hash} seed={}", dir.display(), cfg.seed);
    write_file(&dir.join("config.json"), &cfg_text)?;

    let h = cfg.lattice.to_hnf()?;
    let code = css_from_lattice(&h);
    let round = build_round(cfg.circuit, &h, &code);
    round.check_schedulable()?;
    effective_checks(&round, &code)?;
    let header = header_line(&hash, cfg.seed);
    write_file(&dir.join("circuits").join("round.txt"), &format!("{header}{}", round.to_text(&h)))?;
    write_file(&dir.join("circuits").join("round.json"), &serde_json::to_string_pretty(&round.metadata(&h)).expect("json"))?;

    let result = bench::run_memory_experiment(&cfg)?;
    for p in &result.points {
        if p.failures > p.shots {
            return Err(CliError::Invariant(format!("p={}: failures exceed shots", p.p)));
        }
    }
    let threshold = pseudo_threshold(&result, K).ok();
    let slope = fit_slope(&result).ok();
    write_file(&dir.join("results.csv"), &format!("{header}{}", results_csv(&result)))?;
    let json = json!({
        "config_sha256": hash,
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "result": result,
        "pseudo_threshold": threshold,
        "slope": slope,
    });
    write_file(&dir.join("results.json"), &serde_json::to_string_pretty(&json).expect("json"))?;
    if a.emit_plot_data {
        write_file(&dir.join("plot.dat"), &format!("{header}{}", plot_data(&result)))?;
    }
    println!("{}", header.trim_end());
    println!("lattice {h}  rounds {}  circuit {:?}  decoder {:?}", result.rounds, cfg.circuit, cfg.decoder);
    println!("{:>10} {:>10} {:>8} {:>12} {:>12} {:>12}", "p", "shots", "fails", "p_fail", "per_round", "per_qubit");
    for p in &result.points {
        println!(
            "{:>10.3e} {:>10} {:>8} {:>12.3e} {:>12.3e} {:>12.3e}",
            p.p, p.shots, p.failures, p.p_fail, p.per_round, p.per_round_per_qubit
        );
    }
    if let Some(t) = threshold {
        println!("pseudo-threshold {:.3e}", t.p_star);
    }
    println!("results in {}", dir.display());
    Ok(())
}

fn parse_entry(s: &str) -> CliResult<(u64, u64, u64)> {
    let v: Vec<u64> = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| CliError::Config(format!("bad entry {s:?}: {e}"))))
        .collect::<CliResult<_>>()?;
    match v[..] {
        [det, d, b] => Ok((det, d, b)),
        _ => Err(CliError::Config(format!("entry {s:?} must be det,d,blocks"))),
    }
}

fn cmd_specs(a: &SpecsArgs) -> CliResult<()> {
    let entries = if a.entries.is_empty() {
        vec![(16, 8, 9), (45, 15, 16), (45, 15, 250)]
    } else {
        a.entries.iter().map(|s| parse_entry(s)).collect::<CliResult<_>>()?
    };
    let rows = specs_table(&entries);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("json"));
        return Ok(());
    }
    let line = |label: &str, f: &dyn Fn(&bench::SpecsRow) -> u64| {
        let cells: Vec<String> = rows.iter().map(|r| format!("{:>10}", f(r))).collect();
        println!("{label:<26}{}", cells.join(""));
    };
    line("determinant", &|r| r.det);
    line("distance", &|r| r.d);
    line("blocks", &|r| r.blocks);
    line("logical qubits", &|r| r.logical_qubits);
    line("data qubits", &|r| r.data_qubits);
    line("measurements per cycle", &|r| r.measurements_per_cycle);
    line("depth (starfish)", &|r| r.depth_starfish);
    line("depth (compact)", &|r| r.depth_compact);
    Ok(())
}

#[derive(serde::Deserialize, Serialize)]
struct CatalogFile {
    config_sha256: String,
    seed: u64,
    report: SymmetryReport,
    catalog: GateCatalog,
}

fn cmd_symmetries(a: &SymmetriesArgs) -> CliResult<()> {
    if let Some(path) = &a.verify {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let file: CatalogFile =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let h = file.catalog.hnf;
        if a.lattice.given() && a.lattice.hnf()? != h {
            return Err(CliError::Config("catalog lattice differs from the given lattice".into()));
        }
        let code = css_from_lattice(&h);
        verify_catalog(&code, &basis_for(&h, &code), &file.catalog).map_err(|e| CliError::Invariant(e.to_string()))?;
        println!("catalog verified: {} gates on lattice {h}", file.catalog.gates.len());
        return Ok(());
    }
    let h = a.lattice.hnf()?;
    let code = css_from_lattice(&h);
    let basis = basis_for(&h, &code);
    let (catalog, report) = build_catalog(&code, &basis)?;
    let hash = sha256_hex(json!({"hnf": h.to_string(), "command": "symmetries"}).to_string().as_bytes());
    println!("{}", header_line(&hash, 0).trim_end());
    println!("lattice {h}");
    println!("automorphisms (point group)      {}", report.automorphisms);
    println!("ZX duality classes               {}", report.duality_classes);
    println!("point group with dualities       {}", report.extended_point_group);
    println!("distinct qubit permutations      {}", report.distinct_qubit_permutations);
    println!("distinct logical permutations    {}", report.distinct_logical_permutations);
    println!("space group (mod lattice)        {}", report.space_group_size);
    println!("ZX dualities                     {} ({} involutive)", report.zx_dualities, report.involutive_dualities);
    println!("fold gates                       {} hadamard-type, {} phase-type", report.hadamard_gates, report.phase_gates);
    println!("catalog gates                    {}", catalog.gates.len());
    let order = |o: &torus4::symmetry::GroupOrder| format!("{}{}", o.order, if o.exact { "" } else { " (lower bound)" });
    println!("logical group order (phases)     {}", order(&report.group_order_signed));
    println!("logical group order (symplectic) {}", order(&report.group_order_symplectic));
    if let Some(path) = &a.out {
        let file = CatalogFile { config_sha256: hash, seed: 0, report, catalog };
        write_file(path, &serde_json::to_string_pretty(&file).expect("json"))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_hnfs(a: &HnfsArgs) -> CliResult<()> {
    if !(1..=64).contains(&a.det) {
        return Err(CliError::Config("--det must lie in 1..=64".into()));
    }
    let mut out = std::io::stdout().lock();
    for h in hnfs_with_determinant(a.det).take(a.limit.unwrap_or(usize::MAX)) {
        writeln!(out, "{h}")?;
    }
    Ok(())
}
