//! Command-line front-end: loads rate/measure files, runs the linearised
//! solver, the verification pipeline (linear vs direct, plus optional
//! Monte Carlo), and the spectrum report.
//!
//! Exit codes: 0 success, 2 input/config error, 3 numerical failure
//! (tolerance or invariant violation; reports are still written).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use recomb_core::error::Error;
use recomb_core::export::{coefficients_csv, trajectory_csv};
use recomb_core::linearizer::{
    build_generator, build_markov_matrix, solve_continuous_detailed, solve_discrete_detailed,
    spectrum_diagnostics, CoefficientVector, PartitionMatrix,
};
use recomb_core::measure::{tv_distance, ProductMeasure, ProductSpace, WEIGHT_TOL};
use recomb_core::oracle::{integrate_checkpoints, iterate, IntegratorConfig};
use recomb_core::partition::GroundSet;
use recomb_core::process::{compare, simulate_ctmc, simulate_discrete_chain, SimulationConfig};
use recomb_core::rates::{ModeSpec, RawSpec, FILE_PROB_TOL};

#[derive(Parser)]
#[command(
    name = "recomb",
    about = "Recombination dynamics on finite product spaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the dynamics and export coefficients and trajectory.
    Solve(RunArgs),
    /// Compare the linearised solution against the direct evolution,
    /// optionally also against Monte Carlo simulation.
    Verify(RunArgs),
    /// Print the eigenvalues of the generator or Markov matrix.
    Spectrum(SpectrumArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Rate/probability spec file (JSON).
    #[arg(long)]
    rates: PathBuf,
    /// Initial measure file (JSON); uniform on binary alphabets if absent.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Evaluation times for continuous mode, comma separated.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Generation count for discrete mode.
    #[arg(long)]
    generations: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Rescale a discrete spec whose probabilities do not sum to 1.
    #[arg(long)]
    renormalize: bool,
    /// Also run the Monte Carlo comparison (verify only).
    #[arg(long)]
    mc: bool,
    /// Override the TV tolerance of every check; per-check defaults are
    /// 1e-7 (oracle, continuous), 1e-12 (oracle, discrete), 1e-2 (MC).
    #[arg(long)]
    tolerance_tv: Option<f64>,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Rate/probability spec file (JSON).
    #[arg(long)]
    rates: PathBuf,
    /// Rescale a discrete spec whose probabilities do not sum to 1.
    #[arg(long)]
    renormalize: bool,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

/// Core errors raised while solving: invariant violations are numerical
/// failures, everything else points at the inputs.
fn classify(context: &str, e: Error) -> Failure {
    match e {
        Error::Invariant(_) => Failure::Numerical(format!("{context}: {e}")),
        _ => Failure::Input(format!("{context}: {e}")),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path, renormalize: bool) -> Result<ModeSpec, Failure> {
    let text = read_file(path)?;
    let raw = RawSpec::parse(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let (spec, notes) = raw
        .into_spec(renormalize)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    for note in notes {
        eprintln!("note: {}: {note}", path.display());
    }
    Ok(spec)
}

/// Initial measure: from file, or uniform on binary alphabets. A residual
/// in the total mass up to the file tolerance is rescaled with a note.
fn load_init(path: &Option<PathBuf>, ground: &GroundSet) -> Result<ProductMeasure, Failure> {
    let measure = match path {
        Some(p) => {
            let text = read_file(p)?;
            ProductMeasure::from_json(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?
        }
        None => {
            let n = ground.len() as u32;
            ProductMeasure::uniform(
                ProductSpace::binary(n).map_err(|e| Failure::Input(e.to_string()))?,
            )
        }
    };
    if measure.space().sites() != ground {
        return Err(Failure::Input(format!(
            "initial measure lives on sites {}, spec uses {ground}",
            measure.space().sites()
        )));
    }
    if !measure.is_positive() {
        return Err(Failure::Input(
            "initial measure has negative weights".into(),
        ));
    }
    let mass = measure.total_mass();
    let residual = (mass - 1.0).abs();
    if residual > FILE_PROB_TOL {
        return Err(Failure::Input(format!(
            "initial measure has total mass {mass}, not a probability measure"
        )));
    }
    if residual > WEIGHT_TOL {
        eprintln!("note: initial measure rescaled by {} to unit mass", 1.0 / mass);
        let weights = measure.weights().iter().map(|w| w / mass).collect();
        return ProductMeasure::new(measure.space().clone(), weights)
            .map_err(|e| Failure::Input(e.to_string()));
    }
    Ok(measure)
}

fn continuous_times(args: &RunArgs) -> Result<Vec<f64>, Failure> {
    if args.generations.is_some() {
        return Err(Failure::Input(
            "spec mode is continuous: use --times, not --generations".into(),
        ));
    }
    let times = args.times.clone().unwrap_or_default();
    if times.is_empty() {
        return Err(Failure::Input("no evaluation times".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Failure::Input("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Failure::Input("times must be sorted ascending".into()));
    }
    Ok(times)
}

fn discrete_generations(args: &RunArgs) -> Result<u64, Failure> {
    if args.times.is_some() {
        return Err(Failure::Input(
            "spec mode is discrete: use --generations, not --times".into(),
        ));
    }
    args.generations
        .ok_or_else(|| Failure::Input("no evaluation times".into()))
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print_coefficient_summary(matrix_ground: &GroundSet, rows: &[(String, Vec<f64>)]) {
    let partitions = recomb_core::partition::enumerate_partitions(matrix_ground);
    let header: Vec<String> = partitions.iter().map(|p| format!("\"{p}\"")).collect();
    println!("a_t coefficients over {} partitions:", partitions.len());
    println!("t\t{}", header.join("\t"));
    for (label, values) in rows {
        let cells: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        println!("{label}\t{}", cells.join("\t"));
    }
}

fn run_solve(args: &RunArgs) -> Result<(), Failure> {
    let spec = load_spec(&args.rates, args.renormalize)?;
    let (labels, detailed) = match &spec {
        ModeSpec::Continuous(rho) => {
            let times = continuous_times(args)?;
            let omega0 = load_init(&args.init, rho.ground())?;
            let detailed = solve_continuous_detailed(&omega0, rho, &times)
                .map_err(|e| classify("solve", e))?;
            let labels: Vec<String> = times.iter().map(|t| t.to_string()).collect();
            (labels, detailed)
        }
        ModeSpec::Discrete(r) => {
            let generations = discrete_generations(args)?;
            let omega0 = load_init(&args.init, r.ground())?;
            let detailed = solve_discrete_detailed(&omega0, r, generations)
                .map_err(|e| classify("solve", e))?;
            let labels: Vec<String> = (0..=generations).map(|t| t.to_string()).collect();
            (labels, detailed)
        }
    };
    let ground = detailed[0].0.ground().clone();
    let coefficient_rows: Vec<(String, Vec<f64>)> = labels
        .iter()
        .cloned()
        .zip(detailed.iter().map(|(a, _)| a.values().to_vec()))
        .collect();
    let partitions = recomb_core::partition::enumerate_partitions(&ground);
    write_out(
        &args.out,
        "a_t.csv",
        &coefficients_csv(&partitions, &coefficient_rows),
    )?;
    let measures: Vec<ProductMeasure> = detailed.iter().map(|(_, m)| m.clone()).collect();
    write_out(&args.out, "trajectory.csv", &trajectory_csv(&labels, &measures))?;
    print_coefficient_summary(&ground, &coefficient_rows);
    Ok(())
}

#[derive(Serialize)]
struct Check {
    name: String,
    time: f64,
    metric: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct Report {
    mode: String,
    pass: bool,
    checks: Vec<Check>,
}

fn push_check(checks: &mut Vec<Check>, name: &str, time: f64, metric: &str, value: f64, threshold: f64) {
    let pass = value <= threshold;
    println!(
        "{name} t={time}: {metric} {value:e} (threshold {threshold:e}) {}",
        if pass { "PASS" } else { "FAIL" }
    );
    checks.push(Check {
        name: name.into(),
        time,
        metric: metric.into(),
        value,
        threshold,
        pass,
    });
}

fn run_verify(args: &RunArgs) -> Result<(), Failure> {
    let spec = load_spec(&args.rates, args.renormalize)?;
    let mut checks = Vec::new();
    let mut histogram: Option<String> = None;
    let mode_name = match &spec {
        ModeSpec::Continuous(_) => "continuous",
        ModeSpec::Discrete(_) => "discrete",
    };

    match &spec {
        ModeSpec::Continuous(rho) => {
            let times = continuous_times(args)?;
            let omega0 = load_init(&args.init, rho.ground())?;
            let oracle_tol = args.tolerance_tv.unwrap_or(1e-7);
            let detailed = solve_continuous_detailed(&omega0, rho, &times)
                .map_err(|e| classify("solve", e))?;
            let cfg = IntegratorConfig::default();
            let direct = integrate_checkpoints(&omega0, rho, &times, &cfg)
                .map_err(|e| classify("integrate", e))?;
            for (k, &t) in times.iter().enumerate() {
                let tv = tv_distance(&detailed[k].1, &direct[k])
                    .map_err(|e| classify("compare", e))?;
                push_check(&mut checks, "linear-vs-integrator", t, "tv", tv, oracle_tol);
            }
            if args.mc {
                let mc_tol = args.tolerance_tv.unwrap_or(1e-2);
                let sim_cfg = SimulationConfig::new(args.samples, args.seed);
                for (k, &t) in times.iter().enumerate() {
                    let dist = simulate_ctmc(rho, t, &sim_cfg)
                        .map_err(|e| classify("simulate", e))?;
                    let mc = compare(&dist, &detailed[k].0, mc_tol)
                        .map_err(|e| classify("compare", e))?;
                    push_check(&mut checks, "monte-carlo", t, "tv", mc.tv, mc_tol);
                    histogram = Some(mc.to_csv());
                }
            }
        }
        ModeSpec::Discrete(r) => {
            let generations = discrete_generations(args)?;
            let omega0 = load_init(&args.init, r.ground())?;
            let oracle_tol = args.tolerance_tv.unwrap_or(1e-12);
            let detailed = solve_discrete_detailed(&omega0, r, generations)
                .map_err(|e| classify("solve", e))?;
            let direct =
                iterate(&omega0, r, generations).map_err(|e| classify("iterate", e))?;
            let mut worst = 0.0f64;
            for ((_, linear), exact) in detailed.iter().zip(&direct) {
                let dev = linear
                    .weights()
                    .iter()
                    .zip(exact.weights())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(dev);
            }
            push_check(
                &mut checks,
                "linear-vs-iteration",
                generations as f64,
                "max_dev",
                worst,
                oracle_tol,
            );
            if args.mc {
                let mc_tol = args.tolerance_tv.unwrap_or(1e-2);
                let sim_cfg = SimulationConfig::new(args.samples, args.seed);
                let dist = simulate_discrete_chain(r, generations, &sim_cfg)
                    .map_err(|e| classify("simulate", e))?;
                let reference: &CoefficientVector = &detailed[generations as usize].0;
                let mc = compare(&dist, reference, mc_tol)
                    .map_err(|e| classify("compare", e))?;
                push_check(
                    &mut checks,
                    "monte-carlo",
                    generations as f64,
                    "tv",
                    mc.tv,
                    mc_tol,
                );
                histogram = Some(mc.to_csv());
            }
        }
    }

    let pass = checks.iter().all(|c| c.pass);
    let report = Report {
        mode: mode_name.into(),
        pass,
        checks,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_out(&args.out, "report.json", &json)?;
    if let Some(csv) = histogram {
        write_out(&args.out, "histogram.csv", &csv)?;
    }
    if pass {
        println!("verify: all checks passed");
        Ok(())
    } else {
        Err(Failure::Numerical("verification tolerance failure".into()))
    }
}

fn run_spectrum(args: &SpectrumArgs) -> Result<(), Failure> {
    let spec = load_spec(&args.rates, args.renormalize)?;
    let matrix: PartitionMatrix = match &spec {
        ModeSpec::Continuous(rho) => build_generator(rho).map_err(|e| classify("build", e))?,
        ModeSpec::Discrete(r) => build_markov_matrix(r).map_err(|e| classify("build", e))?,
    };
    let report = spectrum_diagnostics(&matrix);
    let rendered: Vec<String> = report.eigenvalues.iter().map(|v| v.to_string()).collect();
    println!("eigenvalues (diagonal, coarser-first order): {}", rendered.join(", "));
    println!("multiplicities:");
    for (value, count) in &report.multiplicities {
        println!("  {value} x {count}");
    }
    if report.has_repeated() {
        for value in &report.repeated {
            println!("repeated eigenvalue: {value}");
        }
        println!("degenerate case candidate: the matrix may not be diagonalisable");
    } else {
        println!("all eigenvalues simple");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Verify(args) => run_verify(args),
        Command::Spectrum(args) => run_spectrum(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
