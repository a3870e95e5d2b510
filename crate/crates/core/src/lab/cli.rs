//! The `qta` command line. Data goes to files or stdout, diagnostics to
//! stderr. Exit status: 0 success, 1 usage or input error, 2 numerical
//! contract violation.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use super::render::{render_amplitude_grid, render_legend, write_ppm};
use super::stats::{fit_operator_means, summarize, write_summary_csv, GroupBy};
use super::sweep::{
    read_sweep_csv, run_sweep, write_sweep_csv, ExperimentConfig, DEFAULT_MASTER_SEED,
};
use crate::complexity::{
    build_k_local, coarse_complexity, evolution_from_eigen, reversal_operator, Couplings,
    KLocalHamiltonian, TermJson,
};
use crate::ergodic::{
    eigenphase_report, ergodic_convergence_check, DEFAULT_Q_MAX, DEFAULT_RATIONAL_TOL,
};
use crate::qca::{build_global_operator, evolve, read_probability_csv, LocalRule, Trajectory};
use crate::qlin::{
    haar_unitary, matrix_from_json, matrix_to_json, random_state, unitarity_defect,
    vector_from_json, JsonMatrix, RngSeed, StateVector,
};
use crate::thermo::{
    equilibration_time, fourier_spectrum, l2_convergence, shannon_entropy, write_series_csv,
    AnalysisConfig, DEFAULT_DOMINANT_FRACTION,
};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "qta",
    version,
    about = "Quantum tensor automaton simulator and analysis tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a state under a global operator and write the trajectory.
    Evolve(EvolveArgs),
    /// Detect equilibration on a probability trajectory.
    Equilibrate(EquilibrateArgs),
    /// Power spectrum of the basis-state probability series.
    Spectrum(SpectrumArgs),
    /// Reversal operator and coarse complexity between two states.
    Reverse(ReverseArgs),
    /// Shannon entropy (bits) of a probability distribution.
    Entropy(EntropyArgs),
    /// Cesàro convergence and eigenphase rationality of a unitary.
    Ergodic(ErgodicArgs),
    /// Build a k-local Pauli Hamiltonian and its time evolution.
    Klocal(KlocalArgs),
    /// Run an operator × initial-condition ensemble.
    Sweep(SweepArgs),
    /// ln–ln fits of operator means from a sweep table.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Builtin {
    Cnot,
    Haar,
}

#[derive(Debug, Args)]
struct RuleArgs {
    /// Local rule as a JSON list of 4×4 matrices of `[re, im]` pairs.
    #[arg(long, conflicts_with = "builtin")]
    rule: Option<PathBuf>,
    /// Built-in rule (default cnot).
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    /// Number of qubits.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Master seed for random rules and states.
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    seed: u64,
}

impl RuleArgs {
    fn rule(&self) -> Result<LocalRule> {
        match (&self.rule, self.builtin) {
            (Some(path), _) => LocalRule::from_json_str(&read_text(path)?),
            (None, Some(Builtin::Haar)) => Ok(LocalRule::haar(RngSeed::new(self.seed, 0))),
            (None, _) => Ok(LocalRule::cnot()),
        }
    }
}

#[derive(Debug, Args)]
struct InitArgs {
    /// Start from this computational basis state (default 0).
    #[arg(long, conflicts_with_all = ["state", "random_state"])]
    basis: Option<usize>,
    /// Start from a JSON amplitude vector of `[re, im]` pairs.
    #[arg(long, conflicts_with = "random_state")]
    state: Option<PathBuf>,
    /// Start from a seeded Gaussian random state.
    #[arg(long)]
    random_state: bool,
}

impl InitArgs {
    fn state(&self, n: usize, seed: u64) -> Result<StateVector> {
        if let Some(path) = &self.state {
            return read_state(path);
        }
        if self.random_state {
            return random_state(n, RngSeed::new(seed, 1));
        }
        StateVector::basis(n, self.basis.unwrap_or(0))
    }
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Probability trajectory (CSV from `evolve`, or its JSON form). When
    /// absent the trajectory is simulated from the rule options.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    rule: RuleArgs,
    #[command(flatten)]
    init: InitArgs,
}

impl SourceArgs {
    fn probabilities(&self, steps: usize) -> Result<Vec<Vec<f64>>> {
        match &self.input {
            Some(path) => read_probabilities(path),
            None => Ok(self.simulate(steps)?.probabilities),
        }
    }

    fn simulate(&self, steps: usize) -> Result<Trajectory> {
        let g = build_global_operator(&self.rule.rule()?, self.rule.n)?;
        evolve(&self.init.state(self.rule.n, self.rule.seed)?, &g, steps)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[command(flatten)]
    rule: RuleArgs,
    #[command(flatten)]
    init: InitArgs,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the `--out` extension by default.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write the amplitude grid as a PPM image.
    #[arg(long)]
    render: Option<PathBuf>,
    /// Also write the colour legend strip as a PPM image.
    #[arg(long)]
    legend: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EquilibrateArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 500)]
    horizon: usize,
    /// Also write the L² distance to the final plateau as `step,distance`.
    #[arg(long)]
    l2_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Steps simulated when no input is given.
    #[arg(long, default_value_t = 500)]
    steps: usize,
    /// Dominance threshold as a fraction of the largest non-DC power.
    #[arg(long, default_value_t = DEFAULT_DOMINANT_FRACTION)]
    threshold: f64,
    /// Write the spectrum table as CSV here; the JSON summary still goes to
    /// stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReverseArgs {
    /// Initial state as JSON amplitudes.
    #[arg(long, requires = "state_t")]
    state0: Option<PathBuf>,
    /// Evolved state as JSON amplitudes.
    #[arg(long, requires = "state0")]
    state_t: Option<PathBuf>,
    #[command(flatten)]
    rule: RuleArgs,
    #[command(flatten)]
    init: InitArgs,
    /// Steps of evolution when the states are simulated.
    #[arg(long, default_value_t = 1)]
    t: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    /// Comma-separated probabilities.
    #[arg(long, value_delimiter = ',', conflicts_with = "input")]
    probs: Option<Vec<f64>>,
    /// Probability trajectory; the row at `--step` is used.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Row of the trajectory (default: last).
    #[arg(long, requires = "input")]
    step: Option<usize>,
}

#[derive(Debug, Args)]
struct ErgodicArgs {
    /// Unitary as a JSON matrix of `[re, im]` pairs.
    #[arg(long, conflicts_with = "haar_dim")]
    unitary: Option<PathBuf>,
    /// Dimension of a seeded Haar-random unitary (default 4).
    #[arg(long)]
    haar_dim: Option<usize>,
    /// Vector to average, as JSON amplitudes (default: seeded random).
    #[arg(long)]
    vector: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    seed: u64,
    /// Largest Cesàro index N.
    #[arg(long = "cesaro-N", default_value_t = 1000)]
    cesaro_n: usize,
    #[arg(long, default_value_t = DEFAULT_Q_MAX)]
    qmax: u64,
    #[arg(long, default_value_t = DEFAULT_RATIONAL_TOL)]
    tol: f64,
    /// Write `N,error,bound` as CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KlocalArgs {
    /// Number of qubits.
    #[arg(long = "K")]
    big_k: usize,
    /// Weight of every term.
    #[arg(long = "k")]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    seed: u64,
    /// Explicit terms as a JSON list of `{letters, J}`; overrides the seed.
    #[arg(long)]
    couplings: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_Q_MAX)]
    qmax: u64,
    #[arg(long, default_value_t = DEFAULT_RATIONAL_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// ExperimentConfig as JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    operators: Option<usize>,
    #[arg(long)]
    ics: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Worker threads (default: `QTA_THREADS`, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "sweep-out")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Sweep rows table (`rows.csv`).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qta: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Evolve(a) => cmd_evolve(a),
        Command::Equilibrate(a) => cmd_equilibrate(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Reverse(a) => cmd_reverse(a),
        Command::Entropy(a) => cmd_entropy(a),
        Command::Ergodic(a) => cmd_ergodic(a),
        Command::Klocal(a) => cmd_klocal(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Fit(a) => cmd_fit(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn read_state(path: &Path) -> Result<StateVector> {
    let amps: Vec<[f64; 2]> = serde_json::from_str(&read_text(path)?)?;
    StateVector::new(vector_from_json(&amps)?)
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read_probabilities(path: &Path) -> Result<Vec<Vec<f64>>> {
    if is_json(path) {
        let v: serde_json::Value = serde_json::from_str(&read_text(path)?)?;
        let rows = v.get("probabilities").cloned().unwrap_or(v);
        return Ok(serde_json::from_value(rows)?);
    }
    let file =
        File::open(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    read_probability_csv(io::BufReader::new(file))
}

/// Opens `path`, or stdout when absent.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_evolve(a: EvolveArgs) -> Result<()> {
    let g = build_global_operator(&a.rule.rule()?, a.rule.n)?;
    let traj = evolve(&a.init.state(a.rule.n, a.rule.seed)?, &g, a.steps)?;
    let format = a.format.unwrap_or(match &a.out {
        Some(p) if is_json(p) => Format::Json,
        _ => Format::Csv,
    });
    match format {
        Format::Csv => {
            let mut out = sink(a.out.as_deref())?;
            traj.write_csv(&mut out)?;
            out.flush()?;
        }
        Format::Json => emit_json(&traj.to_json(), a.out.as_deref())?,
    }
    if let Some(path) = &a.render {
        render_amplitude_grid(&traj, path)?;
    }
    if let Some(path) = &a.legend {
        write_ppm(&render_legend(16), path)?;
    }
    Ok(())
}

fn cmd_equilibrate(a: EquilibrateArgs) -> Result<()> {
    let cfg = AnalysisConfig {
        epsilon: a.epsilon,
        window: a.window,
        horizon: a.horizon,
    };
    cfg.validate()?;
    let rows = a.source.probabilities(a.horizon)?;
    let report = equilibration_time(&rows, &cfg)?;
    if let Some(path) = &a.l2_out {
        let series = l2_convergence(&rows, a.window)?;
        write_series_csv(
            ["step", "distance"],
            &series,
            BufWriter::new(File::create(path)?),
        )?;
    }
    emit_json(&report, a.out.as_deref())
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<()> {
    let rows = a.source.probabilities(a.steps)?;
    let report = fourier_spectrum(&rows, a.threshold)?;
    if let Some(path) = &a.out {
        report.write_csv(BufWriter::new(File::create(path)?))?;
    }
    emit_json(
        &json!({
            "samples": report.samples,
            "dominant": report.dominant,
            "thresholdFraction": report.threshold_fraction,
        }),
        None,
    )
}

fn cmd_reverse(a: ReverseArgs) -> Result<()> {
    let (psi0, psi_t) = match (&a.state0, &a.state_t) {
        (Some(p0), Some(pt)) => (read_state(p0)?, read_state(pt)?),
        _ => {
            let g = build_global_operator(&a.rule.rule()?, a.rule.n)?;
            let psi0 = a.init.state(a.rule.n, a.rule.seed)?;
            let traj = evolve(&psi0, &g, a.t)?;
            (psi0, traj.last().clone())
        }
    };
    let r = reversal_operator(&psi0, &psi_t)?;
    let c = coarse_complexity(&r)?;
    emit_json(
        &json!({
            "reversal": matrix_to_json(&r.matrix),
            "phaseApplied": r.phase_applied,
            "overlap": r.overlap,
            "complexity": c.value,
        }),
        a.out.as_deref(),
    )
}

fn cmd_entropy(a: EntropyArgs) -> Result<()> {
    let (probs, step) = match (a.probs, &a.input) {
        (Some(p), _) => (p, None),
        (None, Some(path)) => {
            let rows = read_probabilities(path)?;
            let t = a.step.unwrap_or(rows.len().saturating_sub(1));
            let row = rows.get(t).cloned().ok_or_else(|| {
                Error::InvalidArgument(format!("step {t} beyond trajectory of {} rows", rows.len()))
            })?;
            (row, Some(t))
        }
        (None, None) => return Err(Error::InvalidArgument("give --probs or --input".into())),
    };
    let h = shannon_entropy(&probs)?;
    emit_json(&json!({ "entropyBits": h, "step": step }), None)
}

fn cmd_ergodic(a: ErgodicArgs) -> Result<()> {
    let u = match &a.unitary {
        Some(path) => {
            let rows: JsonMatrix = serde_json::from_str(&read_text(path)?)?;
            matrix_from_json(&rows)?
        }
        None => haar_unitary(a.haar_dim.unwrap_or(4), RngSeed::new(a.seed, 0))?,
    };
    let x = match &a.vector {
        Some(path) => read_state(path)?.into_amplitudes(),
        None => {
            let d = u.nrows();
            if !d.is_power_of_two() {
                return Err(Error::InvalidArgument(format!(
                    "dimension {d} needs an explicit --vector"
                )));
            }
            random_state(d.trailing_zeros() as usize, RngSeed::new(a.seed, 1))?.into_amplitudes()
        }
    };
    let report = ergodic_convergence_check(&u, &x, a.cesaro_n)?;
    let phases = eigenphase_report(&u, a.qmax, a.tol)?;
    if let Some(path) = &a.out {
        report.write_csv(BufWriter::new(File::create(path)?))?;
    }
    emit_json(
        &json!({
            "dimension": u.nrows(),
            "cesaroN": a.cesaro_n,
            "finalError": report.errors.last(),
            "gap": report.gap,
            "boundConstant": report.bound_constant,
            "fixedRank": report.fixed_rank,
            "eigenphases": phases,
        }),
        None,
    )
}

fn cmd_klocal(a: KlocalArgs) -> Result<()> {
    let h = match &a.couplings {
        Some(path) => {
            let terms: Vec<TermJson> = serde_json::from_str(&read_text(path)?)?;
            let h = KLocalHamiltonian::from_json(&terms)?;
            if h.n_qubits() != a.big_k || h.locality() != a.k {
                return Err(Error::InvalidArgument(format!(
                    "coupling file describes K = {}, k = {}",
                    h.n_qubits(),
                    h.locality()
                )));
            }
            h
        }
        None => build_k_local(a.big_k, a.k, Couplings::Seeded(RngSeed::new(a.seed, 0)))?,
    };
    let u = evolution_from_eigen(&h.eigen()?, a.t);
    let phases = eigenphase_report(&u, a.qmax, a.tol)?;
    emit_json(
        &json!({
            "K": h.n_qubits(),
            "k": h.locality(),
            "t": a.t,
            "termCount": h.terms().len(),
            "terms": h.to_json(),
            "hermitianDefect": h.hermitian_defect(),
            "unitarityDefect": unitarity_defect(&u),
            "evolution": matrix_to_json(&u),
            "eigenphases": phases,
        }),
        a.out.as_deref(),
    )
}

fn sweep_config(a: &SweepArgs) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = match &a.config {
        Some(path) => serde_json::from_str(&read_text(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = a.n {
        cfg.n_qubits = v;
    }
    if let Some(v) = a.operators {
        cfg.num_operators = v;
    }
    if let Some(v) = a.ics {
        cfg.num_initial_conditions = v;
    }
    if let Some(v) = a.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = a.epsilon {
        cfg.analysis.epsilon = v;
    }
    if let Some(v) = a.window {
        cfg.analysis.window = v;
    }
    if let Some(v) = a.horizon {
        cfg.horizon = v;
        cfg.analysis.horizon = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let cfg = sweep_config(&a)?;
    let result = match a.threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| run_sweep(&cfg))?,
        Some(_) => return Err(Error::InvalidArgument("--threads must be >= 1".into())),
        None => run_sweep(&cfg)?,
    };
    fs::create_dir_all(&a.out_dir)?;
    let create = |name: &str| -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(a.out_dir.join(name))?))
    };
    if cfg.wants("rows") {
        write_sweep_csv(&result.rows, create("rows.csv")?)?;
    }
    if cfg.wants("byOperator") {
        write_summary_csv(
            &summarize(&result.rows, GroupBy::Operator)?,
            "operator",
            create("by_operator.csv")?,
        )?;
    }
    if cfg.wants("byInitialCondition") {
        let s = summarize(&result.rows, GroupBy::InitialCondition)?;
        write_summary_csv(&s, "ic", create("by_initial_condition.csv")?)?;
    }
    if cfg.wants("convergence") {
        let mut w = csv::Writer::from_writer(create("convergence.csv")?);
        let mut header = vec!["step".to_string()];
        header.extend((0..cfg.num_operators).map(|o| format!("op{o}")));
        w.write_record(&header)?;
        for t in 0..=cfg.horizon {
            let mut rec = vec![t.to_string()];
            rec.extend(result.convergence.iter().map(|s| s[t].to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    if cfg.wants("fits") {
        match fit_operator_means(&result.rows) {
            Ok(fits) => emit_json(&fits, Some(&a.out_dir.join("fits.json")))?,
            Err(e) => eprintln!("qta: fits skipped: {e}"),
        }
    }
    let censored = result.rows.iter().filter(|r| r.censored).count();
    let annihilated = result.rows.iter().filter(|r| r.annihilated).count();
    eprintln!(
        "qta: {} cells, {censored} censored, {annihilated} annihilated; tables in {}",
        result.rows.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let file = File::open(&a.input)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", a.input.display())))?;
    let rows = read_sweep_csv(io::BufReader::new(file))?;
    emit_json(&fit_operator_means(&rows)?, a.out.as_deref())
}
