//! Acceptance gate: seven release criteria, each printed as a single
//! `ACCEPTANCE <n> (<name>): PASS|FAIL` line with its measured margins.
//!
//! Criteria 5 and 6 grade one shared desk-scale sweep (the default
//! configuration: two pairs, three relay layouts, budgets 0 to 30 dBW,
//! 50 channel draws), so the first of the two tests to run pays its cost.

use std::sync::OnceLock;
use std::time::Instant;

use tworelay::bench::{
    gen_channels, run_sweep, scenario_params, to_csv_text, Mode, ResultTable, Scenario,
    SweepConfig,
};
use tworelay::lift::unlift;
use tworelay::model::{feasible, pair_throughput, ChannelSet};
use tworelay::oracle::{
    equivalence_suite, grid_search_tiny, inequality_suite, GridSpec, OracleMode, SuiteReport,
};
use tworelay::solve::{algorithm1, algorithm2_from, RunTrace};
use tworelay::subproblem::GAP_TOL;
use tworelay::AlgorithmSettings;

// --- Shared tolerances and seeds -------------------------------------------

/// Samples per bound check (criterion 1).
const INEQ_SAMPLES: usize = 100_000;
/// Instances for the lift equivalence checks (criterion 2).
const EQUIV_INSTANCES: usize = 100;
/// Instances per algorithm for ascent/feasibility invariance (criterion 3).
const ASCENT_INSTANCES: usize = 100;
/// Toy instances compared against the brute-force grid (criterion 4).
const ORACLE_INSTANCES: usize = 20;
/// Required optimizer-to-grid value ratio (criterion 4).
const ORACLE_RATIO: f64 = 0.99;
/// Iteration-count bar for both algorithms (criterion 5).
const MEAN_ITER_BAR: f64 = 40.0;
/// Saturation bar between the last two budget points (criterion 6c).
const SATURATION_REL: f64 = 0.10;
/// Floor tolerance on iterate throughputs (criterion 3).
const FLOOR_TOL: f64 = 1e-6;

const SUITE_SEED: u64 = 20_240_915;

fn verdict(n: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {n} ({name}): {} [{detail}]",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

// --- Criterion 1: bound inequalities ----------------------------------------

#[test]
fn criterion_1_bound_inequalities() {
    let clock = Instant::now();
    let report: SuiteReport<f64> = inequality_suite(INEQ_SAMPLES, SUITE_SEED);
    let secs = clock.elapsed().as_secs_f64();
    let detail = format!(
        "{} samples, {} violations, {:.1}s",
        report.total_samples(),
        report.total_violations(),
        secs
    );
    verdict(
        1,
        "bound inequalities",
        report.passed() && secs < 10.0,
        &detail,
    );
}

// --- Criterion 2: lift equivalence -------------------------------------------

#[test]
fn criterion_2_lift_equivalence() {
    let clock = Instant::now();
    let report: SuiteReport<f64> = equivalence_suite(EQUIV_INSTANCES, SUITE_SEED);
    let secs = clock.elapsed().as_secs_f64();
    let detail = format!(
        "{} instances, {} violations, {:.1}s",
        EQUIV_INSTANCES,
        report.total_violations(),
        secs
    );
    verdict(2, "lift equivalence", report.passed() && secs < 30.0, &detail);
}

// --- Criterion 3: monotone ascent and feasibility invariance ----------------

/// Largest per-iteration objective drop of a recorded run, in units of the
/// solver gap tolerance (positive = regression).
fn worst_drop(trace: &RunTrace<f64>) -> f64 {
    let mut prev = trace.initial_objective;
    let mut worst = f64::NEG_INFINITY;
    for rec in &trace.records {
        worst = worst.max(prev - rec.objective);
        prev = rec.objective;
    }
    worst
}

#[test]
fn criterion_3_monotone_ascent_and_feasibility() {
    let clock = Instant::now();
    let settings = AlgorithmSettings::<f64> {
        record_iterates: true,
        ..AlgorithmSettings::default()
    };
    let ascent_tol = 2.0 * GAP_TOL;
    let mut worst_regression = f64::NEG_INFINITY;
    let mut worst_floor_slack = f64::INFINITY;

    for i in 0..ASCENT_INSTANCES {
        let sc = Scenario {
            pairs: 1 + i % 2,
            relays: 1 + (i / 2) % 2,
            antennas: 1 + (i / 4) % 3,
        };
        let ch: ChannelSet<f64> = gen_channels(SUITE_SEED, 3, i, sc.dims());
        let sp1 = scenario_params::<f64>(&sc, 10.0, vec![1.0; sc.pairs]);

        let fair = algorithm1(&ch, &sp1, &settings);
        assert!(fair.failure.is_none(), "instance {i}: {:?}", fair.failure);
        worst_regression = worst_regression.max(worst_drop(&fair));
        for it in fair.iterates.as_ref().unwrap() {
            let p = unlift(&it.beta);
            let report = feasible(&p, &it.w, &ch, &sp1, false);
            assert!(
                report.ok_within(FLOOR_TOL),
                "instance {i}: fair iterate violates a cap: {:?}",
                report.violations()
            );
        }

        let sp = scenario_params::<f64>(&sc, 10.0, vec![0.5 * fair.objective; sc.pairs]);
        let eff = algorithm2_from(fair.point.clone(), &ch, &sp, &settings);
        assert!(eff.failure.is_none(), "instance {i}: {:?}", eff.failure);
        worst_regression = worst_regression.max(worst_drop(&eff));
        for it in eff.iterates.as_ref().unwrap() {
            let p = unlift(&it.beta);
            let report = feasible(&p, &it.w, &ch, &sp, false);
            assert!(
                report.ok_within(FLOOR_TOL),
                "instance {i}: efficiency iterate violates a cap: {:?}",
                report.violations()
            );
            for j in 0..sc.pairs {
                let slack = pair_throughput(&p, &it.w, &ch, &sp, j) - sp.r[j];
                worst_floor_slack = worst_floor_slack.min(slack);
            }
        }
    }

    let pass = worst_regression <= ascent_tol && worst_floor_slack >= -FLOOR_TOL;
    let detail = format!(
        "{} instances per algorithm, worst regression {:.2e} (tol {:.0e}), worst floor slack {:.2e}, {:.0}s",
        ASCENT_INSTANCES,
        worst_regression,
        ascent_tol,
        worst_floor_slack,
        clock.elapsed().as_secs_f64()
    );
    verdict(3, "monotone ascent and feasibility", pass, &detail);
}

// --- Criterion 4: oracle optimality at toy scale ------------------------------

#[test]
fn criterion_4_oracle_optimality() {
    let clock = Instant::now();
    let spec = GridSpec::acceptance();
    let settings = AlgorithmSettings::<f64>::default();
    let sc = Scenario { pairs: 1, relays: 1, antennas: 1 };
    let mut worst_fair = f64::INFINITY;
    let mut worst_eff = f64::INFINITY;

    for i in 0..ORACLE_INSTANCES {
        let ch: ChannelSet<f64> = gen_channels(SUITE_SEED, 4, i, sc.dims());

        let sp1 = scenario_params::<f64>(&sc, 10.0, vec![1.0]);
        let fair = algorithm1(&ch, &sp1, &settings);
        assert!(fair.failure.is_none(), "instance {i}: {:?}", fair.failure);
        let grid_fair = grid_search_tiny(&ch, &sp1, &spec, OracleMode::Maximin).unwrap();
        worst_fair = worst_fair.min(fair.objective / grid_fair.value);

        let sp = scenario_params::<f64>(&sc, 10.0, vec![0.5 * fair.objective]);
        let eff = algorithm2_from(fair.point.clone(), &ch, &sp, &settings);
        assert!(eff.failure.is_none(), "instance {i}: {:?}", eff.failure);
        let grid_eff =
            grid_search_tiny(&ch, &sp, &spec, OracleMode::EnergyEfficiency).unwrap();
        worst_eff = worst_eff.min(eff.objective / grid_eff.value);
    }

    let secs = clock.elapsed().as_secs_f64();
    let pass = worst_fair >= ORACLE_RATIO && worst_eff >= ORACLE_RATIO && secs < 300.0;
    let detail = format!(
        "{} instances, worst fair ratio {:.4}, worst efficiency ratio {:.4}, {:.0}s",
        ORACLE_INSTANCES, worst_fair, worst_eff, secs
    );
    verdict(4, "oracle optimality", pass, &detail);
}

// --- Criteria 5 and 6: desk-scale sweep ---------------------------------------

static DESK: OnceLock<ResultTable> = OnceLock::new();

fn desk_sweep() -> &'static ResultTable {
    DESK.get_or_init(|| {
        let cfg = SweepConfig::default();
        run_sweep::<f64>(&cfg).expect("desk-scale sweep failed")
    })
}

/// Success-weighted mean of `mean_iterations` over every (scenario, budget)
/// cell of one mode.
fn pooled_iterations(table: &ResultTable, mode: Mode) -> (f64, usize, usize) {
    let mut weighted = 0.0;
    let mut successes = 0usize;
    let mut draws = 0usize;
    let cfg = SweepConfig::default();
    for sc in &cfg.scenarios {
        for &b in &cfg.budgets_dbw {
            let rows = table.select(sc, b, mode);
            let row = rows
                .iter()
                .find(|r| r.metric == "min_pair_throughput")
                .expect("missing sweep cell");
            weighted += row.mean_iterations * row.n_success as f64;
            successes += row.n_success;
            draws += cfg.realizations;
        }
    }
    (weighted / successes as f64, successes, draws)
}

#[test]
fn criterion_5_iteration_counts() {
    let table = desk_sweep();
    let (fair_mean, fair_ok, fair_n) = pooled_iterations(table, Mode::Maximin);
    let (eff_mean, eff_ok, eff_n) = pooled_iterations(table, Mode::EnergyEfficiency);
    let pass = fair_mean <= MEAN_ITER_BAR
        && eff_mean <= MEAN_ITER_BAR
        && fair_ok == fair_n
        && eff_ok == eff_n;
    let detail = format!(
        "fair mean {fair_mean:.2} ({fair_ok}/{fair_n} runs), efficiency mean {eff_mean:.2} ({eff_ok}/{eff_n} runs), bar {MEAN_ITER_BAR}"
    );
    verdict(5, "iteration counts", pass, &detail);
}

#[test]
fn criterion_6_desk_scale_trends() {
    let table = desk_sweep();
    let cfg = SweepConfig::default();
    let mut failures: Vec<String> = Vec::new();
    let mean = |sc: &Scenario, b: f64, mode: Mode, metric: &str| -> f64 {
        table
            .mean_of(sc, b, mode, metric)
            .unwrap_or_else(|| panic!("missing {metric} row"))
    };

    // (a) joint efficiency dominates the equal-power baseline per budget
    // (b) two-way efficiency dominates one-way per budget
    for sc in &cfg.scenarios {
        for &b in &cfg.budgets_dbw {
            let joint = mean(sc, b, Mode::EnergyEfficiency, "energy_efficiency");
            let frozen = mean(sc, b, Mode::EqualPowerEnergyEfficiency, "energy_efficiency");
            if joint < frozen {
                failures.push(format!(
                    "(a) M={} N={} at {b} dBW: joint {joint:.4} < equal-power {frozen:.4}",
                    sc.relays, sc.antennas
                ));
            }
            let oneway = mean(sc, b, Mode::OnewayEnergyEfficiency, "energy_efficiency");
            if joint < oneway {
                failures.push(format!(
                    "(b) M={} N={} at {b} dBW: two-way {joint:.4} < one-way {oneway:.4}",
                    sc.relays, sc.antennas
                ));
            }
        }
    }

    // (c) efficiency and radiated power saturate over the last budget step
    for sc in &cfg.scenarios {
        for metric in ["energy_efficiency", "total_tx_power"] {
            let at25 = mean(sc, 25.0, Mode::EnergyEfficiency, metric);
            let at30 = mean(sc, 30.0, Mode::EnergyEfficiency, metric);
            let rel = (at30 - at25).abs() / at25;
            if rel > SATURATION_REL {
                failures.push(format!(
                    "(c) M={} N={} {metric}: 25→30 dBW change {:.1}%",
                    sc.relays,
                    sc.antennas,
                    100.0 * rel
                ));
            }
        }
    }

    // (d) concentrating antennas at one relay beats spreading them out
    let one_relay = Scenario { pairs: 2, relays: 1, antennas: 8 };
    let four_relays = Scenario { pairs: 2, relays: 4, antennas: 2 };
    for &b in &cfg.budgets_dbw {
        let concentrated = mean(&one_relay, b, Mode::Maximin, "min_pair_throughput");
        let spread = mean(&four_relays, b, Mode::Maximin, "min_pair_throughput");
        if concentrated < spread {
            failures.push(format!(
                "(d) at {b} dBW: M=1,N=8 throughput {concentrated:.4} < M=4,N=2 {spread:.4}"
            ));
        }
    }

    let detail = if failures.is_empty() {
        format!(
            "{} draws per cell, all budget points satisfy (a)-(d)",
            cfg.realizations
        )
    } else {
        failures.join("; ")
    };
    verdict(6, "desk-scale trends", failures.is_empty(), &detail);
}

// --- Criterion 7: sweep determinism -------------------------------------------

#[test]
fn criterion_7_sweep_determinism() {
    let cfg = SweepConfig {
        scenarios: vec![Scenario { pairs: 1, relays: 2, antennas: 2 }],
        budgets_dbw: vec![0.0, 15.0],
        realizations: 2,
        seed: 99,
        modes: SweepConfig::default().modes,
        epsilon: 1e-4,
    };
    let first = to_csv_text(&run_sweep::<f64>(&cfg).unwrap());
    let second = to_csv_text(&run_sweep::<f64>(&cfg).unwrap());
    let pass = first == second && !first.is_empty();
    let detail = format!(
        "two identical sweeps, {} CSV bytes each, byte-equal {}",
        first.len(),
        first == second
    );
    verdict(7, "sweep determinism", pass, &detail);
}
