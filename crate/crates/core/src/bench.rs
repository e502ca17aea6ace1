//! Monte-Carlo benchmarking: fading channel generation, sweeps over
//! scenario layouts and relay power budgets, per-mode statistics, and CSV
//! emission.
//!
//! Every realization is seeded by a counter derived from its (scenario,
//! realization) coordinates, so results do not depend on execution order
//! and the same configuration always produces byte-identical output.
//! Budget points within a scenario share channel draws, which removes
//! sampling noise from budget-to-budget comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    dbw_to_watts, ee_objective, oneway_ee, oneway_pair_rate, oneway_relay_tx_power,
    pair_throughput, split_oneway_beamformers, sum_throughput, total_tx_power, ChannelSet,
    Dimensions, ScenarioParams,
};
use crate::scalar::Real;
use crate::solve::{
    algorithm1_from, algorithm2_from, equal_power_solve, oneway_ee_solve, sum_throughput_from,
    AlgorithmSettings, RunTrace,
};
use crate::subproblem::ObjectiveKind;

// --- Configuration ----------------------------------------------------------------

/// One network layout in the sweep grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub pairs: usize,
    pub relays: usize,
    pub antennas: usize,
}

impl Scenario {
    pub fn dims(&self) -> Dimensions {
        Dimensions::new(self.pairs, self.relays, self.antennas)
    }
}

/// Which optimizer pipeline a sweep runs per realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Joint fair throughput, warm-started from the equal-power run.
    Maximin,
    /// Beamformers only, powers frozen at the equal split.
    EqualPowerMaximin,
    /// Joint efficiency with floors at half the fair-throughput optimum.
    EnergyEfficiency,
    /// Frozen-power efficiency with floors from its own fair run.
    EqualPowerEnergyEfficiency,
    /// Two-stage one-way operation.
    OnewayEnergyEfficiency,
    /// Joint sum throughput under the same floors as the efficiency run.
    SumThroughput,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Maximin => "maximin",
            Mode::EqualPowerMaximin => "equal_power_maximin",
            Mode::EnergyEfficiency => "energy_efficiency",
            Mode::EqualPowerEnergyEfficiency => "equal_power_energy_efficiency",
            Mode::OnewayEnergyEfficiency => "oneway_energy_efficiency",
            Mode::SumThroughput => "sum_throughput",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "maximin" => Ok(Mode::Maximin),
            "equal_power_maximin" => Ok(Mode::EqualPowerMaximin),
            "energy_efficiency" => Ok(Mode::EnergyEfficiency),
            "equal_power_energy_efficiency" => Ok(Mode::EqualPowerEnergyEfficiency),
            "oneway_energy_efficiency" => Ok(Mode::OnewayEnergyEfficiency),
            "sum_throughput" => Ok(Mode::SumThroughput),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Sweep definition.  Fixed built-in constants: per-user cap 10 dBW, sum
/// user budget `K` times that, per-relay cap `2·P_sumR/M`, drain factor
/// 1/0.4, relay circuit 0.97 dBW per antenna, user circuit -13 dBW.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scenarios: Vec<Scenario>,
    /// Relay sum budgets in dBW.
    pub budgets_dbw: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub modes: Vec<Mode>,
    /// Outer-loop stop threshold.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    1e-4
}

impl Default for SweepConfig {
    /// Desk-scale default: two pairs, the three antenna-count-preserving
    /// layouts, budgets 0 to 30 dBW in 5 dBW steps, 50 draws.
    fn default() -> Self {
        Self {
            scenarios: vec![
                Scenario { pairs: 2, relays: 1, antennas: 8 },
                Scenario { pairs: 2, relays: 2, antennas: 4 },
                Scenario { pairs: 2, relays: 4, antennas: 2 },
            ],
            budgets_dbw: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            realizations: 50,
            seed: 1729,
            modes: vec![
                Mode::Maximin,
                Mode::EqualPowerMaximin,
                Mode::EnergyEfficiency,
                Mode::EqualPowerEnergyEfficiency,
                Mode::OnewayEnergyEfficiency,
                Mode::SumThroughput,
            ],
            epsilon: default_epsilon(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.scenarios.is_empty() {
            return Err("scenarios must be nonempty".to_string());
        }
        if self.budgets_dbw.is_empty() {
            return Err("budgets_dbw must be nonempty".to_string());
        }
        if self.realizations == 0 {
            return Err("realizations must be at least 1".to_string());
        }
        if self.modes.is_empty() {
            return Err("modes must be nonempty".to_string());
        }
        if !(self.epsilon > 0.0) {
            return Err("epsilon must be positive".to_string());
        }
        for s in &self.scenarios {
            if s.pairs == 0 || s.relays == 0 || s.antennas == 0 {
                return Err("scenario dimensions must be at least 1".to_string());
            }
        }
        Ok(())
    }
}

/// Built-in parameters for one scenario at one budget point.
pub fn scenario_params<T: Real>(sc: &Scenario, budget_dbw: f64, r: Vec<T>) -> ScenarioParams<T> {
    let p_sum_r = dbw_to_watts(T::of(budget_dbw));
    ScenarioParams {
        sigma_r2: T::one(),
        sigma_k2: vec![T::one(); 2 * sc.pairs],
        p_u_max: dbw_to_watts(T::of(10.0)),
        p_sum_u_max: T::of(sc.pairs as f64) * dbw_to_watts(T::of(10.0)),
        p_a_max: T::of(2.0) * p_sum_r / T::of(sc.relays as f64),
        p_sum_r_max: p_sum_r,
        zeta: T::one() / T::of(0.4),
        p_r: dbw_to_watts(T::of(0.97)),
        p_u_circ: dbw_to_watts(T::of(-13.0)),
        r,
    }
}

// --- Channel generation ----------------------------------------------------------------

/// Independent circularly-symmetric complex Gaussian channels with unit
/// variance per entry: uplink vectors first (user-major), then downlink,
/// whose conjugates are stored as the receive rows.  The stream counter
/// makes draws independent of evaluation order: realization `r` of
/// scenario `s` always sees the same fading state.
pub fn gen_channels<T: Real>(
    seed: u64,
    scenario_idx: usize,
    realization: usize,
    dims: Dimensions,
) -> ChannelSet<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((scenario_idx as u64) << 32) | realization as u64);
    let half = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let entry = |rng: &mut ChaCha8Rng| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        num_complex::Complex::new(T::of(re) * half, T::of(im) * half)
    };
    let h: Vec<Vec<Vec<_>>> = (0..dims.users())
        .map(|_| {
            (0..dims.relays)
                .map(|_| (0..dims.antennas).map(|_| entry(&mut rng)).collect())
                .collect()
        })
        .collect();
    let g: Vec<Vec<Vec<_>>> = (0..dims.relays)
        .map(|_| {
            (0..dims.users())
                .map(|_| (0..dims.antennas).map(|_| entry(&mut rng)).collect())
                .collect()
        })
        .collect();
    ChannelSet::from_downlink_gains(dims, h, g)
}

// --- Sweep execution ---------------------------------------------------------------------

pub const METRICS: [&str; 4] = [
    "min_pair_throughput",
    "energy_efficiency",
    "sum_throughput",
    "total_tx_power",
];

/// One aggregated table row.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub pairs: usize,
    pub relays: usize,
    pub antennas: usize,
    pub budget_dbw: f64,
    pub mode: Mode,
    pub metric: String,
    pub mean: f64,
    pub stddev: f64,
    pub n_success: usize,
    pub mean_iterations: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// Metrics of one mode on one realization.
struct ModeOutcome {
    ok: bool,
    values: [f64; 4],
    iterations: usize,
}

fn two_way_outcome<T: Real>(
    trace: &RunTrace<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> ModeOutcome {
    let p = &trace.power;
    let w = &trace.point.w;
    let min_pair = (0..ch.dims.pairs)
        .map(|j| pair_throughput(p, w, ch, sp, j))
        .fold(f64::INFINITY, |a, b| a.min(b.to_f64()));
    ModeOutcome {
        ok: trace.failure.is_none(),
        values: [
            min_pair,
            ee_objective(p, w, ch, sp).to_f64(),
            sum_throughput(p, w, ch, sp).to_f64(),
            total_tx_power(p, w, ch, sp).to_f64(),
        ],
        iterations: trace.iterations,
    }
}

fn oneway_outcome<T: Real>(
    trace: &RunTrace<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> ModeOutcome {
    let p = &trace.power;
    let (w1, w2) = split_oneway_beamformers(&trace.point.w);
    let rates: Vec<f64> = (0..ch.dims.pairs)
        .map(|j| 0.5 * oneway_pair_rate(p, &w1, &w2, ch, sp, j).to_f64())
        .collect();
    let relay_tx: f64 = (0..ch.dims.relays)
        .map(|m| oneway_relay_tx_power(p, &w1, &w2, ch, sp, m).to_f64())
        .sum();
    ModeOutcome {
        ok: trace.failure.is_none(),
        values: [
            rates.iter().copied().fold(f64::INFINITY, f64::min),
            oneway_ee(p, &w1, &w2, ch, sp).to_f64(),
            rates.iter().sum(),
            p.total().to_f64() + relay_tx,
        ],
        iterations: trace.iterations,
    }
}

/// Run every configured mode on one channel realization.  The fair run
/// warm-starts from the equal-power run, the floor-constrained runs from
/// the fair run, with floors at half the respectively achieved optimum.
fn run_realization<T: Real>(
    cfg: &SweepConfig,
    sc: &Scenario,
    budget_dbw: f64,
    ch: &ChannelSet<T>,
) -> Vec<ModeOutcome> {
    let pairs = sc.pairs;
    let sp1 = scenario_params::<T>(sc, budget_dbw, vec![T::one(); pairs]);
    let settings = AlgorithmSettings {
        epsilon: T::of(cfg.epsilon),
        ..AlgorithmSettings::default()
    };

    let ow = equal_power_solve(ch, &sp1, &settings, ObjectiveKind::Maximin);
    let joint = algorithm1_from(ow.point.clone(), ch, &sp1, &settings);

    cfg.modes
        .iter()
        .map(|mode| match mode {
            Mode::EqualPowerMaximin => two_way_outcome(&ow, ch, &sp1),
            Mode::Maximin => two_way_outcome(&joint, ch, &sp1),
            Mode::EnergyEfficiency => {
                let sp = scenario_params::<T>(
                    sc,
                    budget_dbw,
                    vec![T::of(0.5) * joint.objective; pairs],
                );
                let trace = algorithm2_from(joint.point.clone(), ch, &sp, &settings);
                let mut out = two_way_outcome(&trace, ch, &sp);
                out.ok = out.ok && joint.failure.is_none();
                out
            }
            Mode::SumThroughput => {
                let sp = scenario_params::<T>(
                    sc,
                    budget_dbw,
                    vec![T::of(0.5) * joint.objective; pairs],
                );
                let trace = sum_throughput_from(joint.point.clone(), ch, &sp, &settings);
                let mut out = two_way_outcome(&trace, ch, &sp);
                out.ok = out.ok && joint.failure.is_none();
                out
            }
            Mode::EqualPowerEnergyEfficiency => {
                let sp = scenario_params::<T>(
                    sc,
                    budget_dbw,
                    vec![T::of(0.5) * ow.objective; pairs],
                );
                let trace =
                    equal_power_solve(ch, &sp, &settings, ObjectiveKind::EnergyEfficiency);
                let mut out = two_way_outcome(&trace, ch, &sp);
                out.ok = out.ok && ow.failure.is_none();
                out
            }
            Mode::OnewayEnergyEfficiency => {
                let trace = oneway_ee_solve(ch, &sp1, &settings);
                oneway_outcome(&trace, ch, &sp1)
            }
        })
        .collect()
}

/// Two-pass sample statistics.
fn mean_stddev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Monte-Carlo sweep over every (scenario, budget) cell.  Realizations run
/// in parallel; per-run failures lower the cell's success count instead of
/// aborting the sweep.
pub fn run_sweep<T: Real>(cfg: &SweepConfig) -> Result<ResultTable, String> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (s_idx, sc) in cfg.scenarios.iter().enumerate() {
        // budget points reuse the scenario's channel draws
        let channels: Vec<ChannelSet<T>> = (0..cfg.realizations)
            .into_par_iter()
            .map(|r| gen_channels(cfg.seed, s_idx, r, sc.dims()))
            .collect();
        for &budget in &cfg.budgets_dbw {
            let outcomes: Vec<Vec<ModeOutcome>> = channels
                .par_iter()
                .map(|ch| run_realization(cfg, sc, budget, ch))
                .collect();
            for (m_idx, mode) in cfg.modes.iter().enumerate() {
                let succeeded: Vec<&ModeOutcome> = outcomes
                    .iter()
                    .map(|per_mode| &per_mode[m_idx])
                    .filter(|o| o.ok)
                    .collect();
                let n_success = succeeded.len();
                let mean_iterations = if n_success == 0 {
                    0.0
                } else {
                    succeeded.iter().map(|o| o.iterations as f64).sum::<f64>()
                        / n_success as f64
                };
                for (v_idx, metric) in METRICS.iter().enumerate() {
                    let values: Vec<f64> =
                        succeeded.iter().map(|o| o.values[v_idx]).collect();
                    let (mean, stddev) = mean_stddev(&values);
                    rows.push(ResultRow {
                        pairs: sc.pairs,
                        relays: sc.relays,
                        antennas: sc.antennas,
                        budget_dbw: budget,
                        mode: *mode,
                        metric: metric.to_string(),
                        mean,
                        stddev,
                        n_success,
                        mean_iterations,
                    });
                }
            }
        }
    }
    Ok(ResultTable { rows })
}

impl ResultTable {
    /// Rows of one (scenario, budget, mode) slice, in metric order.
    pub fn select(
        &self,
        sc: &Scenario,
        budget_dbw: f64,
        mode: Mode,
    ) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .filter(|r| {
                r.pairs == sc.pairs
                    && r.relays == sc.relays
                    && r.antennas == sc.antennas
                    && r.budget_dbw == budget_dbw
                    && r.mode == mode
            })
            .collect()
    }

    /// Mean of one metric in one slice.
    pub fn mean_of(
        &self,
        sc: &Scenario,
        budget_dbw: f64,
        mode: Mode,
        metric: &str,
    ) -> Option<f64> {
        self.select(sc, budget_dbw, mode)
            .into_iter()
            .find(|r| r.metric == metric)
            .map(|r| r.mean)
    }
}

// --- CSV emission ------------------------------------------------------------------------

pub const CSV_HEADER: &str =
    "pairs,relays,antennas,budget_dbw,mode,metric,mean,stddev,n_success,mean_iterations";

/// Render the table with 6 significant digits per number; row order is the
/// insertion order (grid, then mode, then metric), so equal tables always
/// produce identical bytes.
pub fn to_csv_text(table: &ResultTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{:.5e},{},{},{:.5e},{:.5e},{},{:.5e}\n",
            r.pairs,
            r.relays,
            r.antennas,
            r.budget_dbw,
            r.mode.as_str(),
            r.metric,
            r.mean,
            r.stddev,
            r.n_success,
            r.mean_iterations
        ));
    }
    out
}

pub fn write_csv(table: &ResultTable, path: &std::path::Path) -> Result<(), String> {
    std::fs::write(path, to_csv_text(table))
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Parse text produced by [`to_csv_text`].
pub fn from_csv_text(text: &str) -> Result<ResultTable, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(format!("row {}: expected 10 fields, got {}", i + 2, fields.len()));
        }
        let num = |s: &str| -> Result<f64, String> {
            s.parse::<f64>().map_err(|e| format!("row {}: {e}", i + 2))
        };
        let int = |s: &str| -> Result<usize, String> {
            s.parse::<usize>().map_err(|e| format!("row {}: {e}", i + 2))
        };
        rows.push(ResultRow {
            pairs: int(fields[0])?,
            relays: int(fields[1])?,
            antennas: int(fields[2])?,
            budget_dbw: num(fields[3])?,
            mode: Mode::parse(fields[4]).map_err(|e| format!("row {}: {e}", i + 2))?,
            metric: fields[5].to_string(),
            mean: num(fields[6])?,
            stddev: num(fields[7])?,
            n_success: int(fields[8])?,
            mean_iterations: num(fields[9])?,
        });
    }
    Ok(ResultTable { rows })
}
