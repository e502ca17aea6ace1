//! Independent validators: a brute-force grid optimizer for the smallest
//! topology and randomized property suites for the bound and lift layers.
//!
//! Nothing here reuses the optimizers; the grid search evaluates the true
//! objectives exhaustively, and the suites check the algebraic claims the
//! subproblem construction relies on.  Test code throughout the workspace
//! treats these results as ground truth.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::lift::{
    consumption_of, lift_point, lifted_ee, lifted_feasible, lifted_min_ratio,
    lifted_pair_throughput, lifted_relay_tx, lifted_sinr, LiftedPoint,
};
use crate::linalg::CMat;
use crate::model::{
    ee_objective, feasible, link_coeff, min_pair_ratio, oneway_ee, oneway_pair_rate,
    oneway_relay_tx_power, pair_throughput, relay_tx_power, sinr, Beamformers, ChannelSet,
    Dimensions, PowerAlloc, ScenarioParams,
};
use crate::scalar::Real;
use crate::surrogate::{
    ee_term_lower, rate_lower, reverse_convex_linearize, trust_region_margin, Expansion,
};

// --- Grid specification ---------------------------------------------------------

/// Resolution of the brute-force grid.  Powers are searched per user,
/// beamformer weights by magnitude and phase (one phase point suffices:
/// with a single scalar weight every objective depends on its magnitude
/// only).
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub power_points: usize,
    pub magnitude_points: usize,
    pub phase_points: usize,
}

const GRID_LIMIT: usize = 10_000_000;

impl GridSpec {
    pub fn new(power_points: usize, magnitude_points: usize, phase_points: usize) -> Self {
        assert!(power_points >= 8, "need at least 8 power points per user");
        assert!(magnitude_points >= 8, "need at least 8 magnitude points");
        assert!(phase_points >= 1, "need at least one phase point");
        Self {
            power_points,
            magnitude_points,
            phase_points,
        }
    }

    /// Resolution used by the acceptance gates: 64 power points per user,
    /// 128 magnitudes, phase fixed by invariance.
    pub fn acceptance() -> Self {
        Self::new(64, 128, 1)
    }

    /// Doubled resolution whose grids are supersets of this one's, so the
    /// best value can only improve.
    pub fn refined(&self) -> Self {
        Self {
            power_points: 2 * self.power_points - 1,
            magnitude_points: 2 * self.magnitude_points - 1,
            phase_points: if self.phase_points == 1 {
                1
            } else {
                2 * self.phase_points
            },
        }
    }
}

/// Which true objective the grid search maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    /// Worst weighted pair throughput, `min_k R_k/r_k`.
    Maximin,
    /// Throughput over consumption, with pairs below their floors excluded.
    EnergyEfficiency,
    /// One-way efficiency over two stage weights, floors on the unhalved
    /// stage rates.
    OnewayEnergyEfficiency,
}

/// Best feasible grid point.
#[derive(Clone, Debug)]
pub struct GridBest<T> {
    pub p: PowerAlloc<T>,
    /// Scalar relay weights: one entry for two-way modes, the two stage
    /// weights for the one-way mode.
    pub weights: Vec<Complex<T>>,
    pub value: T,
}

/// `n` log-spaced points ending at `p_max`, spanning three decades; a
/// non-positive budget collapses to the single point 0.
fn power_grid<T: Real>(p_max: T, n: usize) -> Vec<T> {
    if p_max <= T::zero() {
        return vec![T::zero()];
    }
    let lo = p_max * T::of(1e-3);
    let span = (p_max / lo).ln();
    (0..n)
        .map(|i| lo * (T::of(i as f64 / (n - 1) as f64) * span).exp())
        .collect()
}

fn fractions<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|j| T::of(j as f64 / (n - 1) as f64))
        .collect()
}

fn phases<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|t| T::of(2.0 * std::f64::consts::PI * t as f64 / n as f64))
        .collect()
}

struct Candidate<T> {
    value: T,
    index: usize,
    p: [T; 2],
    weights: [Complex<T>; 2],
}

impl<T: Real> Candidate<T> {
    fn none() -> Self {
        Self {
            value: T::neg_infinity(),
            index: usize::MAX,
            p: [T::zero(); 2],
            weights: [Complex::new(T::zero(), T::zero()); 2],
        }
    }

    /// Lexicographic preference: larger value, then smaller flat index, so
    /// parallel reduction stays deterministic.
    fn better_of(self, other: Self) -> Self {
        if other.value > self.value || (other.value == self.value && other.index < self.index) {
            other
        } else {
            self
        }
    }
}

/// Exhaustive search over the single-pair, single-relay, single-antenna
/// network.  Powers take log-spaced grids, weight magnitudes linear grids
/// scaled to the relay cap at each power point, so every grid point is
/// feasible by construction (the sum-power and stage-coupling rows are
/// filtered explicitly).
pub fn grid_search_tiny<T: Real>(
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    spec: &GridSpec,
    mode: OracleMode,
) -> Result<GridBest<T>, String> {
    let dims = ch.dims;
    assert!(
        dims.pairs == 1 && dims.relays == 1 && dims.antennas == 1,
        "the grid oracle only handles the 1-pair, 1-relay, 1-antenna case"
    );
    // unlike the optimizers, the oracle tolerates zero budgets, so it
    // checks only the fields it reads rather than the full validation
    assert!(sp.sigma_k2.len() == 2 && sp.r.len() == 1, "parameter lengths");
    assert!(sp.sigma_r2 > T::zero(), "relay noise must be positive");
    assert!(
        sp.p_u_max >= T::zero()
            && sp.p_sum_u_max >= T::zero()
            && sp.p_a_max >= T::zero()
            && sp.p_sum_r_max >= T::zero(),
        "power caps must be nonnegative"
    );
    if mode == OracleMode::Maximin {
        assert!(sp.r[0] > T::zero(), "maximin weights must be strictly positive");
    }

    let np = spec.power_points;
    let nw = spec.magnitude_points;
    let nph = spec.phase_points;
    let total = match mode {
        OracleMode::OnewayEnergyEfficiency => np * np * nw * nw * nph * nph,
        _ => np * np * nw * nph,
    };
    if total > GRID_LIMIT {
        return Err(format!(
            "grid would evaluate {total} points (limit {GRID_LIMIT})"
        ));
    }

    let p_grid = power_grid(sp.p_u_max.min(sp.p_sum_u_max), np);
    let fr = fractions::<T>(nw);
    let ph = phases::<T>(nph);
    let cap = sp.p_a_max.min(sp.p_sum_r_max);
    let h0 = ch.h(0, 0)[0].norm_sqr();
    let h1 = ch.h(1, 0)[0].norm_sqr();

    let best = (0..p_grid.len())
        .into_par_iter()
        .map(|i1| {
            let mut p = PowerAlloc::new(vec![T::zero(); 2]);
            let mut w = Beamformers::new(vec![CMat::zeros(1)]);
            let mut w2 = Beamformers::new(vec![CMat::zeros(1)]);
            let mut local = Candidate::none();
            for i2 in 0..p_grid.len() {
                if p_grid[i1] + p_grid[i2] > sp.p_sum_u_max {
                    continue;
                }
                p.p[0] = p_grid[i1];
                p.p[1] = p_grid[i2];
                match mode {
                    OracleMode::Maximin | OracleMode::EnergyEfficiency => {
                        // all of the relay's power rows collapse to one cap
                        let c_max =
                            (cap / (p.p[0] * h0 + p.p[1] * h1 + sp.sigma_r2)).sqrt();
                        for (j, f) in fr.iter().enumerate() {
                            for (t, theta) in ph.iter().enumerate() {
                                let wv = Complex::from_polar(*f * c_max, *theta);
                                w.w[0].set(0, 0, wv);
                                let value = match mode {
                                    OracleMode::Maximin => min_pair_ratio(&p, &w, ch, sp),
                                    _ => {
                                        if pair_throughput(&p, &w, ch, sp, 0) < sp.r[0] {
                                            continue;
                                        }
                                        ee_objective(&p, &w, ch, sp)
                                    }
                                };
                                let index = ((i1 * np + i2) * nw + j) * nph + t;
                                local = local.better_of(Candidate {
                                    value,
                                    index,
                                    p: [p.p[0], p.p[1]],
                                    weights: [wv, Complex::new(T::zero(), T::zero())],
                                });
                            }
                        }
                    }
                    OracleMode::OnewayEnergyEfficiency => {
                        // stage weights share the cap; grid each to its own
                        // bound and filter the coupled constraint
                        let c1 = (cap / (p.p[0] * h0 + sp.sigma_r2)).sqrt();
                        let c2 = (cap / (p.p[1] * h1 + sp.sigma_r2)).sqrt();
                        for (j1, f1) in fr.iter().enumerate() {
                            for (t1, th1) in ph.iter().enumerate() {
                                let wv1 = Complex::from_polar(*f1 * c1, *th1);
                                w.w[0].set(0, 0, wv1);
                                for (j2, f2) in fr.iter().enumerate() {
                                    for (t2, th2) in ph.iter().enumerate() {
                                        let wv2 = Complex::from_polar(*f2 * c2, *th2);
                                        w2.w[0].set(0, 0, wv2);
                                        if oneway_relay_tx_power(&p, &w, &w2, ch, sp, 0) > cap {
                                            continue;
                                        }
                                        if sp.r[0] > T::zero()
                                            && oneway_pair_rate(&p, &w, &w2, ch, sp, 0) < sp.r[0]
                                        {
                                            continue;
                                        }
                                        let value = oneway_ee(&p, &w, &w2, ch, sp);
                                        let index = (((i1 * np + i2) * nw + j1) * nph + t1)
                                            * nw
                                            * nph
                                            + j2 * nph
                                            + t2;
                                        local = local.better_of(Candidate {
                                            value,
                                            index,
                                            p: [p.p[0], p.p[1]],
                                            weights: [wv1, wv2],
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
            local
        })
        .reduce(Candidate::none, Candidate::better_of);

    if best.index == usize::MAX {
        return Err("no grid point satisfies the throughput floors".to_string());
    }
    let weights = match mode {
        OracleMode::OnewayEnergyEfficiency => best.weights.to_vec(),
        _ => vec![best.weights[0]],
    };
    Ok(GridBest {
        p: PowerAlloc::new(best.p.to_vec()),
        weights,
        value: best.value,
    })
}

// --- Suite reports --------------------------------------------------------------

/// Outcome of one property check across its samples.
#[derive(Clone, Debug)]
pub struct CheckStat<T> {
    pub name: &'static str,
    pub samples: usize,
    pub violations: usize,
    /// Largest signed violation margin observed (negative means every
    /// sample held with room to spare).
    pub worst: T,
}

impl<T: Real> CheckStat<T> {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            samples: 0,
            violations: 0,
            worst: T::neg_infinity(),
        }
    }

    fn record(&mut self, margin: T, tol: T) {
        self.samples += 1;
        self.worst = self.worst.max(margin);
        if margin > tol {
            self.violations += 1;
        }
    }
}

/// Aggregated result of a validation suite.
#[derive(Clone, Debug)]
pub struct SuiteReport<T> {
    pub checks: Vec<CheckStat<T>>,
}

impl<T: Real> SuiteReport<T> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
    }

    pub fn total_samples(&self) -> usize {
        self.checks.iter().map(|c| c.samples).sum()
    }

    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let worst = if c.samples == 0 {
                "-".to_string()
            } else {
                format!("{:+.3e}", c.worst.to_f64())
            };
            out.push_str(&format!(
                "{:<28} samples {:>7}  violations {:>3}  worst margin {}\n",
                c.name, c.samples, c.violations, worst
            ));
        }
        out.push_str(&format!(
            "{}: {} checks, {} samples, {} violations\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.total_samples(),
            self.total_violations()
        ));
        out
    }
}

// --- Shared random generation -----------------------------------------------------

fn random_unit<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::of(rng.gen::<f64>())
}

fn random_entry<T: Real>(rng: &mut ChaCha8Rng) -> Complex<T> {
    Complex::new(
        T::of(2.0 * rng.gen::<f64>() - 1.0),
        T::of(2.0 * rng.gen::<f64>() - 1.0),
    )
}

fn random_channelset<T: Real>(dims: Dimensions, rng: &mut ChaCha8Rng) -> ChannelSet<T> {
    let h = (0..dims.users())
        .map(|_| {
            (0..dims.relays)
                .map(|_| (0..dims.antennas).map(|_| random_entry(rng)).collect())
                .collect()
        })
        .collect();
    let f = (0..dims.relays)
        .map(|_| {
            (0..dims.users())
                .map(|_| (0..dims.antennas).map(|_| random_entry(rng)).collect())
                .collect()
        })
        .collect();
    ChannelSet::new(dims, h, f)
}

fn suite_params<T: Real>(dims: Dimensions) -> ScenarioParams<T> {
    let m = dims.relays as f64;
    ScenarioParams {
        sigma_r2: T::one(),
        sigma_k2: vec![T::one(); dims.users()],
        p_u_max: T::of(10.0),
        p_sum_u_max: T::of(10.0 * dims.pairs as f64),
        p_a_max: T::of(2.0 * 10.0 / m),
        p_sum_r_max: T::of(10.0),
        zeta: T::of(2.5),
        p_r: T::of(10f64.powf(0.097)),
        p_u_circ: T::of(10f64.powf(-1.3)),
        r: vec![T::of(0.1); dims.pairs],
    }
}

/// Random strictly feasible powers and beamformers: powers inside the
/// per-user and sum caps, relays loaded to a random fraction of their
/// budget share.
fn random_operating_point<T: Real>(
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    rng: &mut ChaCha8Rng,
) -> (PowerAlloc<T>, Beamformers<T>) {
    let dims = ch.dims;
    let users = dims.users();
    let p_each = sp.p_u_max.min(sp.p_sum_u_max / T::of(users as f64));
    let p = PowerAlloc::new(
        (0..users)
            .map(|_| p_each * (T::of(0.1) + T::of(0.9) * random_unit::<T>(rng)))
            .collect(),
    );
    let share = sp.p_a_max.min(sp.p_sum_r_max / T::of(dims.relays as f64));
    let mut mats = Vec::with_capacity(dims.relays);
    for _ in 0..dims.relays {
        let mut m = CMat::zeros(dims.antennas);
        for i in 0..dims.antennas {
            for j in 0..dims.antennas {
                m.set(i, j, random_entry(rng));
            }
        }
        mats.push(m);
    }
    let mut w = Beamformers::new(mats);
    for m in 0..dims.relays {
        let used = relay_tx_power(&p, &w, ch, sp, m);
        let target = share * (T::of(0.3) + T::of(0.6) * random_unit::<T>(rng));
        let c = (target / used).sqrt();
        w.w[m] = w.w[m].scale(Complex::new(c, T::zero()));
    }
    (p, w)
}

// --- Bound inequality suite ---------------------------------------------------------

/// Randomized audit of the three surrogate constructions: the log-rate
/// minorant, the rate-over-consumption minorant, and the linearized SINR
/// floor.  Each draw perturbs a random expansion within its trust region
/// and checks the bound direction at relative tolerance 1e-10 and the
/// tangency at the expansion itself at 1e-12.
pub fn inequality_suite<T: Real>(n_samples: usize, seed: u64) -> SuiteReport<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![
        CheckStat::new("rate bound minorant"),
        CheckStat::new("rate bound tangency"),
        CheckStat::new("efficiency bound minorant"),
        CheckStat::new("efficiency bound tangency"),
        CheckStat::new("floor cut minorant"),
        CheckStat::new("floor cut tangency"),
    ];
    let rel = T::of(1e-10);
    let eq = T::of(1e-12);

    let mut instance: Option<(ChannelSet<T>, ScenarioParams<T>, Expansion<T>)> = None;
    for sample in 0..n_samples {
        if sample % 50 == 0 || instance.is_none() {
            let dims = Dimensions::new(
                rng.gen_range(1..=2),
                rng.gen_range(1..=2),
                rng.gen_range(1..=2),
            );
            let ch = random_channelset::<T>(dims, &mut rng);
            let sp = suite_params::<T>(dims);
            let (p, w) = random_operating_point(&ch, &sp, &mut rng);
            let exp = Expansion::new(lift_point(&p, &w, &ch, &sp), &ch, &sp, true);
            instance = Some((ch, sp, exp));
        }
        let (ch, sp, exp) = instance.as_ref().unwrap();
        let users = ch.dims.users();
        let k = sample % users;
        let chi = crate::model::partner(k, ch.dims.pairs);

        // trial point inside the trust region (fall back to the expansion)
        let mut trial = None;
        for _ in 0..20 {
            let jitter = |rng: &mut ChaCha8Rng| T::of(0.85 + 0.3 * rng.gen::<f64>());
            let mut w = exp.point.w.clone();
            for m in 0..ch.dims.relays {
                w.w[m] = w.w[m].scale(Complex::new(jitter(&mut rng), T::zero()));
            }
            let alpha_k = exp.point.alpha[k] * jitter(&mut rng);
            let beta: Vec<T> = exp.point.beta.iter().map(|b| *b * jitter(&mut rng)).collect();
            if trust_region_margin(&w, alpha_k, beta[chi], exp, ch, k) > T::of(1e-9) {
                trial = Some((w, alpha_k, beta));
                break;
            }
        }
        let (w, alpha_k, beta) =
            trial.unwrap_or_else(|| (exp.point.w.clone(), exp.point.alpha[k], exp.point.beta.clone()));

        // exact values at the trial
        let x = link_coeff(&w, ch, k, chi).norm_sqr() / (alpha_k * beta[chi]).sqrt();
        let rate_true = (T::one() + x).ln();
        let rate_bnd = rate_lower(&w, alpha_k, beta[chi], exp, ch, k);
        checks[0].record(rate_bnd - rate_true, rel * T::one().max(rate_true.abs()));

        let t = consumption_of(&w, &beta, ch, sp);
        let ee_true = rate_true / t;
        let ee_bnd = ee_term_lower(&w, alpha_k, &beta, exp, ch, sp, k);
        checks[2].record(ee_bnd - ee_true, rel * T::one().max(ee_true.abs()));

        let r_floor = T::of(0.05) + T::of(1.45) * random_unit::<T>(&mut rng);
        let cut = reverse_convex_linearize(exp, ch, k, r_floor);
        let cut_true = cut.true_lhs(&w, ch, alpha_k, beta[chi]);
        let cut_bnd = cut.eval(&w, ch, alpha_k, beta[chi]);
        checks[4].record(cut_bnd - cut_true, rel * T::one().max(cut_true.abs()));

        // tangency at the expansion itself
        let (w0, a0, b0) = (&exp.point.w, exp.point.alpha[k], &exp.point.beta);
        let x0 = exp.xbar[k];
        let r0_true = (T::one() + x0).ln();
        let r0_bnd = rate_lower(w0, a0, b0[chi], exp, ch, k);
        checks[1].record((r0_bnd - r0_true).abs(), eq * T::one().max(r0_true.abs()));

        let t0 = exp.tbar.unwrap();
        let e0_true = r0_true / t0;
        let e0_bnd = ee_term_lower(w0, a0, b0, exp, ch, sp, k);
        checks[3].record((e0_bnd - e0_true).abs(), eq * T::one().max(e0_true.abs()));

        let c0_true = cut.true_lhs(w0, ch, a0, b0[chi]);
        let c0_bnd = cut.eval(w0, ch, a0, b0[chi]);
        checks[5].record((c0_bnd - c0_true).abs(), eq * T::one().max(c0_true.abs()));
    }
    SuiteReport { checks }
}

// --- Lift equivalence suite -----------------------------------------------------------

/// Randomized audit of the lifted reformulation: on random feasible
/// operating points up to 3 pairs, 4 relays, and 4 antennas, the lifted
/// evaluators must agree with the direct ones to 1e-10, feasibility must
/// agree in both representations at 1e-8, and corrupting the lift (halving
/// the interference certificates) must strictly inflate every ratio.
pub fn equivalence_suite<T: Real>(n_instances: usize, seed: u64) -> SuiteReport<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![
        CheckStat::new("ratio equality"),
        CheckStat::new("throughput equality"),
        CheckStat::new("objective equality"),
        CheckStat::new("relay power equality"),
        CheckStat::new("cross feasibility"),
        CheckStat::new("corrupted lift detected"),
    ];
    let rel = T::of(1e-10);
    let feas = T::of(1e-8);

    for _ in 0..n_instances {
        let dims = Dimensions::new(
            rng.gen_range(1..=3),
            rng.gen_range(1..=4),
            rng.gen_range(1..=4),
        );
        let ch = random_channelset::<T>(dims, &mut rng);
        let sp = suite_params::<T>(dims);
        let (p, w) = random_operating_point(&ch, &sp, &mut rng);
        let x = lift_point(&p, &w, &ch, &sp);

        let reldiff = |a: T, b: T| (a - b).abs() / T::one().max(b.abs());

        // per-user ratios through both representations
        let worst_sinr = (0..dims.users())
            .map(|k| reldiff(lifted_sinr(&x, &ch, k), sinr(&p, &w, &ch, &sp, k)))
            .fold(T::zero(), T::max);
        checks[0].record(worst_sinr - rel, T::zero());

        let worst_rate = (0..dims.pairs)
            .map(|j| {
                reldiff(
                    lifted_pair_throughput(&x, &ch, j),
                    pair_throughput(&p, &w, &ch, &sp, j),
                )
            })
            .fold(T::zero(), T::max);
        checks[1].record(worst_rate - rel, T::zero());

        let d_obj = reldiff(lifted_min_ratio(&x, &ch, &sp), min_pair_ratio(&p, &w, &ch, &sp))
            .max(reldiff(lifted_ee(&x, &ch, &sp), ee_objective(&p, &w, &ch, &sp)));
        checks[2].record(d_obj - rel, T::zero());

        let worst_tx = (0..dims.relays)
            .map(|m| reldiff(lifted_relay_tx(&x, &ch, &sp, m), relay_tx_power(&p, &w, &ch, &sp, m)))
            .fold(T::zero(), T::max);
        checks[3].record(worst_tx - rel, T::zero());

        // feasibility must agree in both representations, for the feasible
        // construction and for a deliberately overdriven copy
        let direct_ok = feasible(&p, &w, &ch, &sp, false).ok_within(feas);
        let lifted_ok = lifted_feasible(&x, &ch, &sp).ok_within(feas);
        let mut wide = w.clone();
        for m in 0..dims.relays {
            wide.w[m] = wide.w[m].scale(Complex::new(T::of(2.0), T::zero()));
        }
        let x_wide = lift_point(&p, &wide, &ch, &sp);
        let direct_bad = feasible(&p, &wide, &ch, &sp, false).ok_within(feas);
        let lifted_bad = lifted_feasible(&x_wide, &ch, &sp).ok_within(feas);
        let agree = direct_ok && lifted_ok && !direct_bad && !lifted_bad;
        checks[4].record(if agree { -T::one() } else { T::one() }, T::zero());

        // halving the interference certificates must inflate every ratio
        let corrupt = LiftedPoint::new(
            x.w.clone(),
            x.alpha.iter().map(|a| *a * T::of(0.5)).collect(),
            x.beta.clone(),
        );
        let inflated = (0..dims.users())
            .all(|k| lifted_sinr(&corrupt, &ch, k) > sinr(&p, &w, &ch, &sp, k));
        checks[5].record(if inflated { -T::one() } else { T::one() }, T::zero());
    }
    SuiteReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_channels() -> ChannelSet<f64> {
        let re = |x: f64| Complex::new(x, 0.0);
        ChannelSet::new(
            Dimensions::new(1, 1, 1),
            vec![vec![vec![re(1.0)]], vec![vec![re(2.0)]]],
            vec![vec![vec![re(1.0)], vec![re(1.0)]]],
        )
    }

    fn toy_params(r: f64) -> ScenarioParams<f64> {
        ScenarioParams {
            sigma_r2: 1.0,
            sigma_k2: vec![1.0, 1.0],
            p_u_max: 10.0,
            p_sum_u_max: 20.0,
            p_a_max: 20.0,
            p_sum_r_max: 20.0,
            zeta: 2.5,
            p_r: 10f64.powf(0.097),
            p_u_circ: 10f64.powf(-1.3),
            r: vec![r],
        }
    }

    #[test]
    fn zero_budgets_give_zero_value() {
        let ch = toy_channels();
        let sp = ScenarioParams {
            p_u_max: 0.0,
            p_sum_u_max: 0.0,
            ..toy_params(1.0)
        };
        let best = grid_search_tiny(&ch, &sp, &GridSpec::new(8, 8, 1), OracleMode::Maximin)
            .unwrap();
        assert_eq!(best.value, 0.0);
        assert_eq!(best.p.p, vec![0.0, 0.0]);
    }

    #[test]
    fn refinement_never_decreases_the_best_value() {
        let ch = toy_channels();
        let sp = toy_params(1.0);
        let spec = GridSpec::new(8, 8, 1);
        for mode in [OracleMode::Maximin, OracleMode::EnergyEfficiency] {
            let base = grid_search_tiny(&ch, &sp, &spec, mode).unwrap();
            let fine = grid_search_tiny(&ch, &sp, &spec.refined(), mode).unwrap();
            assert!(
                fine.value >= base.value,
                "{mode:?}: refined {} < base {}",
                fine.value,
                base.value
            );
        }
    }

    #[test]
    fn best_point_is_feasible_and_deterministic() {
        let ch = toy_channels();
        let sp = toy_params(0.5);
        let spec = GridSpec::new(12, 16, 1);
        let a = grid_search_tiny(&ch, &sp, &spec, OracleMode::EnergyEfficiency).unwrap();
        let b = grid_search_tiny(&ch, &sp, &spec, OracleMode::EnergyEfficiency).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.p.p, b.p.p);
        let mut w = Beamformers::new(vec![CMat::zeros(1)]);
        w.w[0].set(0, 0, a.weights[0]);
        assert!(feasible(&a.p, &w, &ch, &sp, true).ok_within(1e-9));
        assert!(pair_throughput(&a.p, &w, &ch, &sp, 0) >= sp.r[0]);
    }

    #[test]
    fn unreachable_floors_are_reported() {
        let ch = toy_channels();
        let sp = toy_params(1e3);
        let err = grid_search_tiny(&ch, &sp, &GridSpec::new(8, 8, 1), OracleMode::EnergyEfficiency)
            .unwrap_err();
        assert!(err.contains("floors"), "{err}");
    }

    #[test]
    fn grid_guard_rejects_oversized_requests() {
        let ch = toy_channels();
        let sp = toy_params(0.0);
        let err = grid_search_tiny(
            &ch,
            &sp,
            &GridSpec::new(64, 128, 1),
            OracleMode::OnewayEnergyEfficiency,
        )
        .unwrap_err();
        assert!(err.contains("limit"), "{err}");
    }

    #[test]
    fn oneway_mode_searches_both_stages() {
        let ch = toy_channels();
        let sp = toy_params(0.0);
        let best = grid_search_tiny(
            &ch,
            &sp,
            &GridSpec::new(10, 10, 1),
            OracleMode::OnewayEnergyEfficiency,
        )
        .unwrap();
        assert!(best.value > 0.0);
        assert_eq!(best.weights.len(), 2);
        // reported value matches a direct evaluation of the best point
        let mut w1 = Beamformers::new(vec![CMat::zeros(1)]);
        let mut w2 = Beamformers::new(vec![CMat::zeros(1)]);
        w1.w[0].set(0, 0, best.weights[0]);
        w2.w[0].set(0, 0, best.weights[1]);
        let direct = oneway_ee(&best.p, &w1, &w2, &ch, &sp);
        assert!((direct - best.value).abs() <= 1e-14);
    }

    #[test]
    fn inequality_suite_passes_and_is_deterministic() {
        let a: SuiteReport<f64> = inequality_suite(2000, 7);
        assert!(a.passed(), "\n{}", a.to_text());
        assert_eq!(a.total_samples(), 12000);
        let b: SuiteReport<f64> = inequality_suite(2000, 7);
        assert_eq!(a.to_text(), b.to_text());
        let empty: SuiteReport<f64> = inequality_suite(0, 7);
        assert!(empty.passed());
        assert_eq!(empty.total_samples(), 0);
    }

    #[test]
    fn equivalence_suite_passes_and_is_deterministic() {
        let a: SuiteReport<f64> = equivalence_suite(25, 11);
        assert!(a.passed(), "\n{}", a.to_text());
        let b: SuiteReport<f64> = equivalence_suite(25, 11);
        assert_eq!(a.to_text(), b.to_text());
    }
}
