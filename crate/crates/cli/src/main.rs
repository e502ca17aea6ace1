//! Command-line harness: single-instance solves, Monte-Carlo sweeps, and
//! self-check suites for the two-way relay optimizer.
//!
//! Exit codes: 0 on success, 1 on a configuration error (bad flags, bad or
//! incomplete config file), 2 on a run failure (solver breakdown, failed
//! self-checks, unwritable output).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tworelay::bench::{
    gen_channels, run_sweep, scenario_params, to_csv_text, write_csv, Mode, ResultTable,
    Scenario, SweepConfig,
};
use tworelay::model::{
    oneway_ee, oneway_pair_rate, pair_throughput, split_oneway_beamformers, sum_throughput,
    total_tx_power, ChannelSet, ScenarioParams,
};
use tworelay::oracle::{
    equivalence_suite, grid_search_tiny, inequality_suite, GridSpec, OracleMode, SuiteReport,
};
use tworelay::solve::{
    algorithm1_from, algorithm2_from, equal_power_solve, oneway_ee_solve, RunTrace,
};
use tworelay::{AlgorithmSettings, ObjectiveKind};

// --- Argument grammar ----------------------------------------------------

#[derive(Parser)]
#[command(
    name = "tworelay",
    version,
    about = "Joint power allocation and relay beamforming for two-way relay networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the worst pair's exchange throughput on one random instance.
    Maximin(SolveArgs),
    /// Maximize energy efficiency under throughput floors on one random
    /// instance.
    Ee(EeArgs),
    /// Solve the two-stage one-way baseline on one random instance.
    Oneway(SolveArgs),
    /// Sweep scenarios, budgets and modes over many channel draws; emit CSV.
    Sweep(SweepArgs),
    /// Run the sampling and brute-force self-check suites.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// User pairs (the network has twice this many users).
    #[arg(long, default_value_t = 2)]
    pairs: usize,
    /// Relays.
    #[arg(long, default_value_t = 2)]
    relays: usize,
    /// Antennas per relay.
    #[arg(long, default_value_t = 4)]
    antennas: usize,
    /// Relay sum power budget in dBW.
    #[arg(long, default_value_t = 15.0)]
    budget_dbw: f64,
    /// Channel seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Outer-loop relative improvement threshold.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    /// Report rates in bits instead of nats.
    #[arg(long)]
    bits: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EeArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Per-pair throughput floor in nats; defaults to half the fair
    /// optimum of the same instance.
    #[arg(long)]
    floor: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Path to a TOML sweep configuration, or the literal `default`.
    #[arg(long, default_value = "default")]
    config: String,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured realization count.
    #[arg(long)]
    realizations: Option<usize>,
    /// Override the configured modes (comma-separated list).
    #[arg(long, value_delimiter = ',')]
    mode: Option<Vec<String>>,
    /// Report rates in bits instead of nats.
    #[arg(long)]
    bits: bool,
    /// Write the CSV to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Samples per bound check.
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    /// Random instances for the equivalence suite.
    #[arg(long, default_value_t = 100)]
    instances: usize,
    /// Toy instances compared against the brute-force grid.
    #[arg(long, default_value_t = 3)]
    oracle_instances: usize,
    /// Suite seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Append a machine-readable summary CSV to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

// --- Failure handling ----------------------------------------------------

#[derive(Debug)]
enum Failure {
    Config(String),
    Run(String),
}

fn config<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("run failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Maximin(args) => run_maximin(args),
        Command::Ee(args) => run_ee(args),
        Command::Oneway(args) => run_oneway(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::Validate(args) => run_validate(args),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// --- Single-instance solves ----------------------------------------------

struct Instance {
    sc: Scenario,
    ch: ChannelSet<f64>,
    settings: AlgorithmSettings<f64>,
    /// 1/ln 2 when reporting bits, 1 for nats.
    unit: f64,
    unit_name: &'static str,
}

fn instance(args: &SolveArgs) -> Result<Instance, Failure> {
    if args.pairs == 0 || args.relays == 0 || args.antennas == 0 {
        return config("pairs, relays and antennas must all be at least 1");
    }
    if !(args.epsilon > 0.0) {
        return config("epsilon must be positive");
    }
    let sc = Scenario {
        pairs: args.pairs,
        relays: args.relays,
        antennas: args.antennas,
    };
    Ok(Instance {
        sc,
        ch: gen_channels(args.seed, 0, 0, sc.dims()),
        settings: AlgorithmSettings {
            epsilon: args.epsilon,
            ..AlgorithmSettings::default()
        },
        unit: if args.bits { std::f64::consts::LN_2.recip() } else { 1.0 },
        unit_name: if args.bits { "bits" } else { "nats" },
    })
}

fn check_run(name: &str, trace: &RunTrace<f64>) -> Result<(), Failure> {
    match &trace.failure {
        Some(msg) => Err(Failure::Run(format!("{name}: {msg}"))),
        None => Ok(()),
    }
}

fn report_header(args: &SolveArgs, mode: &str) -> String {
    format!(
        "mode: {mode}\npairs {}, relays {}, antennas {}, relay budget {} dBW, seed {}\n",
        args.pairs, args.relays, args.antennas, args.budget_dbw, args.seed
    )
}

fn power_line(p: &[f64]) -> String {
    let entries: Vec<String> = p.iter().map(|v| format!("{v:.4}")).collect();
    format!("user powers (W): [{}]\n", entries.join(", "))
}

fn run_maximin(args: SolveArgs) -> Result<(), Failure> {
    let inst = instance(&args)?;
    let sp = scenario_params::<f64>(&inst.sc, args.budget_dbw, vec![1.0; args.pairs]);
    let ow = equal_power_solve(&inst.ch, &sp, &inst.settings, ObjectiveKind::Maximin);
    check_run("equal-power warm start", &ow)?;
    let trace = algorithm1_from(ow.point.clone(), &inst.ch, &sp, &inst.settings);
    check_run("fair throughput run", &trace)?;

    let mut text = report_header(&args, "fair throughput");
    text.push_str("\niteration trace (nats):\n");
    text.push_str(&trace.to_text());
    text.push_str(&format!(
        "\nworst pair throughput: {:.6} {}\n",
        inst.unit * trace.objective,
        inst.unit_name
    ));
    text.push_str(&format!(
        "sum throughput: {:.6} {}\n",
        inst.unit * sum_throughput(&trace.power, &trace.point.w, &inst.ch, &sp),
        inst.unit_name
    ));
    text.push_str(&power_line(&trace.power.p));
    text.push_str(&format!(
        "converged: {} after {} iterations\n",
        trace.converged, trace.iterations
    ));
    emit(&args.out, &text)
}

fn run_ee(args: EeArgs) -> Result<(), Failure> {
    let inst = instance(&args.solve)?;
    let args_s = args.solve;
    let sp1 = scenario_params::<f64>(&inst.sc, args_s.budget_dbw, vec![1.0; args_s.pairs]);
    let ow = equal_power_solve(&inst.ch, &sp1, &inst.settings, ObjectiveKind::Maximin);
    check_run("equal-power warm start", &ow)?;
    let joint = algorithm1_from(ow.point.clone(), &inst.ch, &sp1, &inst.settings);
    check_run("fair throughput run", &joint)?;

    let floor = match args.floor {
        Some(f) => {
            if !(f >= 0.0) {
                return config("floor must be nonnegative");
            }
            f
        }
        None => 0.5 * joint.objective,
    };
    let sp = scenario_params::<f64>(&inst.sc, args_s.budget_dbw, vec![floor; args_s.pairs]);
    let trace = algorithm2_from(joint.point.clone(), &inst.ch, &sp, &inst.settings);
    check_run("efficiency run", &trace)?;

    let mut text = report_header(&args_s, "energy efficiency");
    text.push_str(&format!("per-pair floor: {floor:.6} nats\n"));
    text.push_str("\niteration trace (nats/J):\n");
    text.push_str(&trace.to_text());
    text.push_str(&format!(
        "\nenergy efficiency: {:.6} {}/J\n",
        inst.unit * trace.objective,
        inst.unit_name
    ));
    let worst = (0..args_s.pairs)
        .map(|j| pair_throughput(&trace.power, &trace.point.w, &inst.ch, &sp, j))
        .fold(f64::INFINITY, f64::min);
    text.push_str(&format!(
        "worst pair throughput: {:.6} {}\n",
        inst.unit * worst,
        inst.unit_name
    ));
    text.push_str(&format!(
        "total transmit power: {:.4} W\n",
        total_tx_power(&trace.power, &trace.point.w, &inst.ch, &sp)
    ));
    text.push_str(&power_line(&trace.power.p));
    text.push_str(&format!(
        "converged: {} after {} iterations\n",
        trace.converged, trace.iterations
    ));
    emit(&args_s.out, &text)
}

fn run_oneway(args: SolveArgs) -> Result<(), Failure> {
    let inst = instance(&args)?;
    let sp = scenario_params::<f64>(&inst.sc, args.budget_dbw, vec![1.0; args.pairs]);
    let trace = oneway_ee_solve(&inst.ch, &sp, &inst.settings);
    check_run("one-way run", &trace)?;

    let (w1, w2) = split_oneway_beamformers(&trace.point.w);
    let mut text = report_header(&args, "one-way energy efficiency");
    text.push_str("\niteration trace (nats/J):\n");
    text.push_str(&trace.to_text());
    text.push_str(&format!(
        "\nenergy efficiency: {:.6} {}/J\n",
        inst.unit * oneway_ee(&trace.power, &w1, &w2, &inst.ch, &sp),
        inst.unit_name
    ));
    let worst = (0..args.pairs)
        .map(|j| 0.5 * oneway_pair_rate(&trace.power, &w1, &w2, &inst.ch, &sp, j))
        .fold(f64::INFINITY, f64::min);
    text.push_str(&format!(
        "worst pair throughput: {:.6} {}\n",
        inst.unit * worst,
        inst.unit_name
    ));
    text.push_str(&power_line(&trace.power.p));
    text.push_str(&format!(
        "converged: {} after {} iterations\n",
        trace.converged, trace.iterations
    ));
    emit(&args.out, &text)
}

// --- Sweep ----------------------------------------------------------------

fn load_config(spec: &str) -> Result<SweepConfig, Failure> {
    if spec == "default" {
        return Ok(SweepConfig::default());
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Failure::Config(format!("cannot read {spec}: {e}")))?;
    toml::from_str(&text).map_err(|e| Failure::Config(format!("{spec}: {e}")))
}

/// Scale rate-bearing metrics from nats to bits in place.
fn convert_to_bits(table: &mut ResultTable) {
    let scale = std::f64::consts::LN_2.recip();
    for row in &mut table.rows {
        if row.metric != "total_tx_power" {
            row.mean *= scale;
            row.stddev *= scale;
        }
    }
}

fn run_sweep_cmd(args: SweepArgs) -> Result<(), Failure> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.realizations {
        cfg.realizations = n;
    }
    if let Some(names) = &args.mode {
        let modes: Result<Vec<Mode>, String> =
            names.iter().map(|n| Mode::parse(n.trim())).collect();
        cfg.modes = modes.map_err(Failure::Config)?;
    }
    cfg.validate().map_err(Failure::Config)?;

    let mut table = run_sweep::<f64>(&cfg).map_err(Failure::Run)?;
    if args.bits {
        convert_to_bits(&mut table);
    }
    match &args.out {
        Some(path) => write_csv(&table, path).map_err(Failure::Run),
        None => {
            print!("{}", to_csv_text(&table));
            Ok(())
        }
    }
}

// --- Validation -------------------------------------------------------------

/// Compare both optimizers against the brute-force grid on one toy draw.
/// Returns (fair ratio, efficiency ratio) of achieved value over grid best.
fn oracle_ratios(seed: u64) -> Result<(f64, f64), Failure> {
    let sc = Scenario { pairs: 1, relays: 1, antennas: 1 };
    let ch: ChannelSet<f64> = gen_channels(seed, 0, 0, sc.dims());
    let settings = AlgorithmSettings::<f64>::default();
    let spec = GridSpec::acceptance();

    let sp1: ScenarioParams<f64> = scenario_params(&sc, 10.0, vec![1.0]);
    let grid_mm =
        grid_search_tiny(&ch, &sp1, &spec, OracleMode::Maximin).map_err(Failure::Run)?;
    let ow = equal_power_solve(&ch, &sp1, &settings, ObjectiveKind::Maximin);
    let joint = algorithm1_from(ow.point.clone(), &ch, &sp1, &settings);
    check_run("fair throughput run", &joint)?;
    let mm_ratio = joint.objective / grid_mm.value;

    let sp: ScenarioParams<f64> = scenario_params(&sc, 10.0, vec![0.5 * joint.objective]);
    let grid_ee = grid_search_tiny(&ch, &sp, &spec, OracleMode::EnergyEfficiency)
        .map_err(Failure::Run)?;
    let ee = algorithm2_from(joint.point.clone(), &ch, &sp, &settings);
    check_run("efficiency run", &ee)?;
    let ee_ratio = ee.objective / grid_ee.value;

    Ok((mm_ratio, ee_ratio))
}

fn summary_rows(suite: &str, report: &SuiteReport<f64>) -> String {
    report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{suite},{},{},{},{:.5e}\n",
                c.name.replace(' ', "_"),
                c.samples,
                c.violations,
                c.worst
            )
        })
        .collect()
}

fn run_validate(args: ValidateArgs) -> Result<(), Failure> {
    let mut failures = Vec::new();
    let mut summary = String::from("suite,check,samples,violations,worst\n");

    let ineq: SuiteReport<f64> = inequality_suite(args.samples, args.seed);
    println!(
        "inequality suite: {} checks, {} samples, {} violations",
        ineq.checks.len(),
        ineq.total_samples(),
        ineq.total_violations()
    );
    print!("{}", ineq.to_text());
    summary.push_str(&summary_rows("inequality", &ineq));
    if !ineq.passed() {
        failures.push("inequality suite".to_string());
    }

    let equiv: SuiteReport<f64> = equivalence_suite(args.instances, args.seed);
    println!(
        "equivalence suite: {} checks, {} samples, {} violations",
        equiv.checks.len(),
        equiv.total_samples(),
        equiv.total_violations()
    );
    print!("{}", equiv.to_text());
    summary.push_str(&summary_rows("equivalence", &equiv));
    if !equiv.passed() {
        failures.push("equivalence suite".to_string());
    }

    for i in 0..args.oracle_instances {
        let seed = 100 + i as u64;
        let (mm, ee) = oracle_ratios(seed)?;
        let ok = mm >= 0.99 && ee >= 0.99;
        println!(
            "oracle bar (seed {seed}): fair ratio {mm:.4}, efficiency ratio {ee:.4} [{}]",
            if ok { "ok" } else { "FAIL" }
        );
        summary.push_str(&format!("oracle,fair_ratio_seed_{seed},1,0,{mm:.5e}\n"));
        summary.push_str(&format!("oracle,efficiency_ratio_seed_{seed},1,0,{ee:.5e}\n"));
        if !ok {
            failures.push(format!("oracle bar at seed {seed}"));
        }
    }

    if let Some(path) = &args.out {
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Failure::Run(format!("cannot open {}: {e}", path.display())))?;
        file.write_all(summary.as_bytes())
            .map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display())))?;
    }

    if failures.is_empty() {
        println!("validate: PASS");
        Ok(())
    } else {
        Err(Failure::Run(format!("failed checks: {}", failures.join(", "))))
    }
}
