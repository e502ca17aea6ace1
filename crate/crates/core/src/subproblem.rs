//! Assembly of the per-iteration convex programs over a real cone program.
//!
//! Each outer iteration maximizes the concave surrogate of `surrogate`
//! over the lifted feasible set of `lift`.  This module compiles that
//! problem into a [`ConeProgram`]: complex beamformers become real/imag
//! variable blocks, every fractional term gets an epigraph variable tied
//! down by second-order cones, and the trust region and throughput floors
//! become linear rows.
//!
//! Cone ledger (each nonlinear term maps to exactly these cones):
//! * geometric mean `u ≤ √(αβ)`: `‖(2u, α−β)‖ ≤ α+β`;
//! * quadratic-over-root epigraph `|z|²/√(αβ) ≤ t`: the cone above plus
//!   `‖(2 Re z, 2 Im z, t−u)‖ ≤ t+u`;
//! * reciprocal square root `1/√β ≤ s`: `v² ≤ β` then `‖(2, s−v)‖ ≤ s+v`;
//! * surrogate reciprocal `c/margin ≤ w` (`c > 0` constant, margin affine):
//!   `‖(2√c, w−margin)‖ ≤ w+margin`;
//! * squared Frobenius norm `‖W_m‖² ≤ t`: `‖(2·vec(W_m), t−1)‖ ≤ t+1`.
//!
//! Structurally zero link gains (as arise in the one-way embedding's
//! zero-padded channels) produce no epigraph variables and no cones.

use num_complex::Complex;

use crate::lift::{lifted_feasible_grouped, phi, psi, upsilon, LiftedPoint};
use crate::linalg::CMat;
use crate::model::{
    circuit_power, partner, two_way_cap_groups, Beamformers, ChannelSet, Dimensions,
    ScenarioParams,
};
use crate::scalar::Real;
use crate::socp::{AffExpr, ConeProgram, Solution};
use crate::surrogate::{ee_bound_coeffs, log_bound_coeffs, Expansion, QosCut};

/// Trust-region floor keeping surrogate denominators strictly positive.
pub const DELTA_TR: f64 = 1e-9;
/// Admissible relative duality gap on an inner solve.
pub const GAP_TOL: f64 = 1e-8;
/// Admissible constraint violation on solutions and expansion points.
pub const FEAS_TOL: f64 = 1e-8;
/// Admissible throughput-floor violation at an expansion point.  Floors are
/// enforced through surrogate rows whose coefficients grow with the inverse
/// user powers, so an accepted step can sit below a floor by the solver's
/// residual times that amplification; each following step re-anchors at the
/// exact floor, so the slack never accumulates past this scale.
pub const FLOOR_SLACK: f64 = 1e-6;
/// Interior-point iteration cap per inner solve.
pub const MAX_INNER_ITER: u32 = 200;

// --- Options ----------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Maximize `τ` with `f_k + f_{K+k} ≥ r_k·τ` per pair.
    Maximin,
    /// Maximize the summed rate-over-consumption bounds under throughput
    /// floors.
    EnergyEfficiency,
    /// Maximize the summed rate bounds under throughput floors.
    SumThroughput,
}

/// Knobs of one subproblem build.
#[derive(Clone, Copy, Debug)]
pub struct BuildOptions<'a, T> {
    pub objective: ObjectiveKind,
    /// Fixed `1/p_k²` values; set for runs that keep user powers frozen
    /// and optimize beamformers only.
    pub frozen_beta: Option<&'a [T]>,
    /// Relay index groups sharing one per-relay power cap.
    pub cap_groups: &'a [Vec<usize>],
    /// Emit per-pair throughput floor rows for every `r_k > 0`.
    pub qos: bool,
    /// Extra linearized per-user SINR floor rows.
    pub cuts: &'a [QosCut<T>],
    pub delta_tr: T,
}

impl<'a, T: Real> BuildOptions<'a, T> {
    pub fn new(objective: ObjectiveKind, cap_groups: &'a [Vec<usize>]) -> Self {
        Self {
            objective,
            frozen_beta: None,
            cap_groups,
            qos: objective != ObjectiveKind::Maximin,
            cuts: &[],
            delta_tr: T::of(DELTA_TR),
        }
    }
}

// --- Built program ----------------------------------------------------------

/// Index bookkeeping tying epigraph variables back to model quantities.
#[derive(Clone, Debug)]
struct Layout {
    /// `(observer k, interferer ℓ)` per interference epigraph.
    psi_items: Vec<(usize, usize)>,
    /// Users with a nonzero relay-noise row vector.
    ups_items: Vec<usize>,
    /// `(relay m, transmitter ℓ)` per forwarded-signal epigraph.
    phi_items: Vec<(usize, usize)>,
    /// Users with a rate-bound reciprocal variable.
    wf_items: Vec<usize>,
    /// Users with an efficiency-bound reciprocal variable.
    wq_items: Vec<usize>,
    has_tau: bool,
    has_tpi: bool,
}

/// A compiled subproblem: the cone program plus everything needed to map
/// solutions back to lifted points.
#[derive(Clone, Debug)]
pub struct Built<T> {
    pub program: ConeProgram<T>,
    dims: Dimensions,
    cap_groups: Vec<Vec<usize>>,
    frozen_beta: Option<Vec<T>>,
    layout: Layout,
}

// --- Builder ----------------------------------------------------------------

fn plus<T: Real>(a: &AffExpr<T>, b: &AffExpr<T>) -> AffExpr<T> {
    let mut e = a.clone();
    e.add_scaled(b, T::one());
    e
}

fn minus<T: Real>(a: &AffExpr<T>, b: &AffExpr<T>) -> AffExpr<T> {
    let mut e = a.clone();
    e.add_scaled(b, -T::one());
    e
}

/// Compile one subproblem around the expansion point.
///
/// Fails when the expansion violates the lifted constraint set (the report
/// names the worst constraint), has a structurally or numerically vanishing
/// partner link, or sits below an active throughput floor.
pub fn build<T: Real>(
    exp: &Expansion<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    opts: &BuildOptions<'_, T>,
) -> Result<Built<T>, String> {
    let dims = ch.dims;
    let (pairs, users, relays, nr) = (dims.pairs, dims.users(), dims.relays, dims.antennas);
    sp.validate(dims);
    assert_eq!(exp.point.users(), users, "expansion size mismatch");
    assert!(!opts.cap_groups.is_empty(), "at least one relay cap group");
    for g in opts.cap_groups {
        assert!(g.iter().all(|m| *m < relays), "cap group out of range");
    }
    assert!(opts.delta_tr > T::zero());
    let ee = opts.objective == ObjectiveKind::EnergyEfficiency;
    if ee {
        assert!(
            exp.tbar.is_some(),
            "efficiency program needs an expansion with consumption cache"
        );
    }
    if opts.objective == ObjectiveKind::Maximin {
        assert!(
            sp.r.iter().all(|r| *r > T::zero()),
            "maximin weights must be strictly positive"
        );
    }
    if let Some(fb) = opts.frozen_beta {
        assert_eq!(fb.len(), users);
        for (a, b) in fb.iter().zip(&exp.point.beta) {
            assert!(
                (*a - *b).abs() <= T::of(1e-9) * b.abs(),
                "frozen powers must match the expansion point"
            );
        }
    }

    // structural sparsity of the channel set
    let is_zero = |v: &[Complex<T>]| v.iter().all(|c| c.re == T::zero() && c.im == T::zero());
    let f_nz: Vec<Vec<bool>> = (0..relays)
        .map(|m| (0..users).map(|k| !is_zero(ch.f(m, k))).collect())
        .collect();
    let h_nz: Vec<Vec<bool>> = (0..users)
        .map(|l| (0..relays).map(|m| !is_zero(ch.h(l, m))).collect())
        .collect();
    let link_nz = |k: usize, l: usize| (0..relays).any(|m| f_nz[m][k] && h_nz[l][m]);

    // the program is built around a point that must itself be feasible
    let report = lifted_feasible_grouped(&exp.point, ch, sp, opts.cap_groups);
    if !report.ok_within(T::of(FEAS_TOL)) {
        let worst = report
            .slacks
            .iter()
            .min_by(|a, b| a.slack.partial_cmp(&b.slack).unwrap())
            .unwrap();
        return Err(format!(
            "expansion point infeasible: {} (slack {:.3e})",
            worst.constraint,
            worst.slack.to_f64()
        ));
    }
    for k in 0..users {
        if !link_nz(k, partner(k, pairs)) || exp.lbar[k].norm_sqr() == T::zero() {
            return Err(format!("expansion has a vanishing partner link for user {k}"));
        }
    }
    if opts.qos {
        for j in 0..pairs {
            if sp.r[j] > T::zero() {
                let have = (T::one() + exp.xbar[j]).ln() + (T::one() + exp.xbar[j + pairs]).ln();
                if have < sp.r[j] - T::of(FLOOR_SLACK) {
                    return Err(format!("expansion violates the throughput floor of pair {j}"));
                }
            }
        }
    }

    // surrogate coefficients at the expansion point
    let log_co: Vec<_> = exp.xbar.iter().map(|x| log_bound_coeffs(*x)).collect();
    let sab: Vec<T> = (0..users).map(|k| exp.sqrt_ab(k, pairs)).collect();
    let c_f: Vec<T> = (0..users).map(|k| log_co[k].b * sab[k]).collect();
    let (ee_co, c_q): (Vec<_>, Vec<T>) = if ee {
        let tbar = exp.tbar.unwrap();
        let co: Vec<_> = exp.xbar.iter().map(|x| ee_bound_coeffs(*x, tbar)).collect();
        let c = (0..users).map(|k| co[k].q * sab[k]).collect();
        (co, c)
    } else {
        (Vec::new(), Vec::new())
    };

    // active epigraph items, in emission order
    let mut psi_items = Vec::new();
    for k in 0..users {
        let chi = partner(k, pairs);
        for l in 0..users {
            if l != k && l != chi && link_nz(k, l) {
                psi_items.push((k, l));
            }
        }
    }
    let ups_items: Vec<usize> = (0..users)
        .filter(|&k| (0..relays).any(|m| f_nz[m][k]))
        .collect();
    let mut phi_items = Vec::new();
    for m in 0..relays {
        for l in 0..users {
            if h_nz[l][m] {
                phi_items.push((m, l));
            }
        }
    }
    let pair_of = |k: usize| if k < pairs { k } else { k - pairs };
    let needs_f = |k: usize| {
        let by_objective = matches!(
            opts.objective,
            ObjectiveKind::Maximin | ObjectiveKind::SumThroughput
        );
        by_objective || (opts.qos && sp.r[pair_of(k)] > T::zero())
    };
    let wf_items: Vec<usize> = (0..users)
        .filter(|&k| needs_f(k) && c_f[k] > T::zero())
        .collect();
    let wq_items: Vec<usize> = if ee {
        (0..users).filter(|&k| c_q[k] > T::zero()).collect()
    } else {
        Vec::new()
    };

    // variable blocks
    let mut cp = ConeProgram::new();
    let mut w_re = Vec::with_capacity(relays);
    let mut w_im = Vec::with_capacity(relays);
    for m in 0..relays {
        w_re.push(cp.add_block(&format!("w_re[{m}]"), nr * nr).start);
        w_im.push(cp.add_block(&format!("w_im[{m}]"), nr * nr).start);
    }
    let alpha0 = cp.add_block("alpha", users).start;
    let beta_expr: Vec<AffExpr<T>> = match opts.frozen_beta {
        Some(fb) => fb.iter().map(|b| AffExpr::constant(*b)).collect(),
        None => {
            let s = cp.add_block("beta", users).start;
            (0..users).map(|k| AffExpr::var(s + k)).collect()
        }
    };
    let u_alpha0 = cp.add_block("u_alpha", users).start;
    let s_alpha0 = cp.add_block("s_alpha", users).start;
    let (v_beta, s_beta): (Vec<AffExpr<T>>, Vec<AffExpr<T>>) = match opts.frozen_beta {
        Some(fb) => (
            fb.iter().map(|b| AffExpr::constant(b.sqrt())).collect(),
            fb.iter()
                .map(|b| AffExpr::constant(T::one() / b.sqrt()))
                .collect(),
        ),
        None => {
            let v = cp.add_block("v_beta", users).start;
            let s = cp.add_block("s_beta", users).start;
            (
                (0..users).map(|k| AffExpr::var(v + k)).collect(),
                (0..users).map(|k| AffExpr::var(s + k)).collect(),
            )
        }
    };
    let psi_t0 = cp.add_block("psi_t", psi_items.len()).start;
    let psi_u0 = cp.add_block("psi_u", psi_items.len()).start;
    let ups_t0 = cp.add_block("upsilon_t", ups_items.len()).start;
    let phi_t0 = cp.add_block("phi_t", phi_items.len()).start;
    let fro_t0 = cp.add_block("fro_t", relays).start;
    let w_f0 = cp.add_block("w_f", wf_items.len()).start;
    let w_q0 = if ee {
        cp.add_block("w_q", wq_items.len()).start
    } else {
        0
    };
    let tau = if opts.objective == ObjectiveKind::Maximin {
        Some(cp.add_block("tau", 1).start)
    } else {
        None
    };
    let t_pi = if ee {
        Some(cp.add_block("t_pi", 1).start)
    } else {
        None
    };

    let one = T::one();
    let two = T::of(2.0);

    // complex affine building blocks over the beamformer variables
    let widx = |m: usize, i: usize, j: usize| (w_re[m] + i * nr + j, w_im[m] + i * nr + j);
    // partner/interference gain: sum over relays of (receive row)·W_m·(transmit column)
    let link_expr = |k: usize, l: usize| -> (AffExpr<T>, AffExpr<T>) {
        let mut re = AffExpr::zero();
        let mut im = AffExpr::zero();
        for m in 0..relays {
            if !(f_nz[m][k] && h_nz[l][m]) {
                continue;
            }
            let f = ch.f(m, k);
            let h = ch.h(l, m);
            for i in 0..nr {
                for j in 0..nr {
                    let e = f[i].conj() * h[j];
                    let (xr, xi) = widx(m, i, j);
                    re.push(xr, e.re);
                    re.push(xi, -e.im);
                    im.push(xr, e.im);
                    im.push(xi, e.re);
                }
            }
        }
        (re, im)
    };
    // entry j of the receive-side row through relay m
    let relay_row_entry = |m: usize, k: usize, j: usize| -> (AffExpr<T>, AffExpr<T>) {
        let mut re = AffExpr::zero();
        let mut im = AffExpr::zero();
        let f = ch.f(m, k);
        for i in 0..nr {
            let (xr, xi) = widx(m, i, j);
            re.push(xr, f[i].re);
            re.push(xi, f[i].im);
            im.push(xr, -f[i].im);
            im.push(xi, f[i].re);
        }
        (re, im)
    };
    // entry i of the forwarded transmit vector of relay m for user l
    let forward_entry = |m: usize, l: usize, i: usize| -> (AffExpr<T>, AffExpr<T>) {
        let mut re = AffExpr::zero();
        let mut im = AffExpr::zero();
        let h = ch.h(l, m);
        for j in 0..nr {
            let (xr, xi) = widx(m, i, j);
            re.push(xr, h[j].re);
            re.push(xi, -h[j].im);
            im.push(xr, h[j].im);
            im.push(xi, h[j].re);
        }
        (re, im)
    };

    // per-user SINR-denominator section
    let mut psi_idx = 0;
    let mut ups_idx = 0;
    for k in 0..users {
        let chi = partner(k, pairs);
        let ak = AffExpr::var(alpha0 + k);
        let (ua, sa) = (u_alpha0 + k, s_alpha0 + k);
        let uav = AffExpr::var(ua);
        let sav = AffExpr::var(sa);
        // u² ≤ α_k
        let mut t = ak.clone();
        t.add_constant(one);
        let mut d = ak.clone();
        d.add_constant(-one);
        cp.soc(t, vec![AffExpr::term(ua, two), d]);
        // s·u ≥ 1, so s can stand in for 1/√α_k
        cp.soc(
            plus(&sav, &uav),
            vec![AffExpr::constant(two), minus(&sav, &uav)],
        );

        let mut row = AffExpr::constant(-one);
        for l in 0..users {
            if l == k || l == chi || !link_nz(k, l) {
                continue;
            }
            debug_assert_eq!(psi_items[psi_idx], (k, l));
            let (tv, uv) = (psi_t0 + psi_idx, psi_u0 + psi_idx);
            psi_idx += 1;
            // u ≤ √(α_k β_ℓ)
            cp.soc(
                plus(&ak, &beta_expr[l]),
                vec![AffExpr::term(uv, two), minus(&ak, &beta_expr[l])],
            );
            // |L_{k,ℓ}(W)|² ≤ t·u
            let (lre, lim) = link_expr(k, l);
            cp.soc(
                plus(&AffExpr::var(tv), &AffExpr::var(uv)),
                vec![
                    lre.scaled(two),
                    lim.scaled(two),
                    minus(&AffExpr::var(tv), &AffExpr::var(uv)),
                ],
            );
            row.push(tv, one);
        }
        if ups_items.get(ups_idx) == Some(&k) {
            let tv = ups_t0 + ups_idx;
            ups_idx += 1;
            // ‖receive rows‖² ≤ t·u with u² ≤ α_k
            let mut v = Vec::new();
            for m in 0..relays {
                if !f_nz[m][k] {
                    continue;
                }
                for j in 0..nr {
                    let (re, im) = relay_row_entry(m, k, j);
                    v.push(re.scaled(two));
                    v.push(im.scaled(two));
                }
            }
            v.push(minus(&AffExpr::var(tv), &uav));
            cp.soc(plus(&AffExpr::var(tv), &uav), v);
            row.push(tv, sp.sigma_r2);
        }
        row.push(sa, sp.sigma_k2[k]);
        cp.leq0(row);
    }
    debug_assert_eq!(psi_idx, psi_items.len());
    debug_assert_eq!(ups_idx, ups_items.len());

    // user power section
    if opts.frozen_beta.is_none() {
        for k in 0..users {
            // per-user cap: β_k ≥ 1/P_max²
            let mut e = AffExpr::constant(one / (sp.p_u_max * sp.p_u_max));
            e.add_scaled(&beta_expr[k], -one);
            cp.leq0(e);
            // v² ≤ β_k
            let mut t = beta_expr[k].clone();
            t.add_constant(one);
            let mut d = beta_expr[k].clone();
            d.add_constant(-one);
            cp.soc(t, vec![v_beta[k].clone().scaled(two), d]);
            // s·v ≥ 1
            cp.soc(
                plus(&s_beta[k], &v_beta[k]),
                vec![AffExpr::constant(two), minus(&s_beta[k], &v_beta[k])],
            );
        }
        // sum power: Σ 1/√β_k ≤ budget
        let mut row = AffExpr::constant(-sp.p_sum_u_max);
        for s in &s_beta {
            row.add_scaled(s, one);
        }
        cp.leq0(row);
    }

    // relay power section
    let mut phi_idx = 0;
    let mut tx_expr = Vec::with_capacity(relays);
    for m in 0..relays {
        let mut tx = AffExpr::zero();
        for l in 0..users {
            if !h_nz[l][m] {
                continue;
            }
            debug_assert_eq!(phi_items[phi_idx], (m, l));
            let tv = phi_t0 + phi_idx;
            phi_idx += 1;
            // ‖W_m h_ℓ‖² ≤ t·v with v² ≤ β_ℓ
            let mut v = Vec::new();
            for i in 0..nr {
                let (re, im) = forward_entry(m, l, i);
                v.push(re.scaled(two));
                v.push(im.scaled(two));
            }
            v.push(minus(&AffExpr::var(tv), &v_beta[l]));
            cp.soc(plus(&AffExpr::var(tv), &v_beta[l]), v);
            tx.push(tv, one);
        }
        // ‖W_m‖²_F ≤ t
        let tv = fro_t0 + m;
        let mut v = Vec::new();
        for idx in 0..nr * nr {
            v.push(AffExpr::term(w_re[m] + idx, two));
            v.push(AffExpr::term(w_im[m] + idx, two));
        }
        let mut t = AffExpr::var(tv);
        t.add_constant(one);
        let mut d = AffExpr::var(tv);
        d.add_constant(-one);
        v.push(d);
        cp.soc(t, v);
        tx.push(tv, sp.sigma_r2);
        tx_expr.push(tx);
    }
    debug_assert_eq!(phi_idx, phi_items.len());
    for group in opts.cap_groups {
        let mut row = AffExpr::constant(-sp.p_a_max);
        for &m in group {
            row.add_scaled(&tx_expr[m], one);
        }
        cp.leq0(row);
    }
    let mut row = AffExpr::constant(-sp.p_sum_r_max);
    for tx in &tx_expr {
        row.add_scaled(tx, one);
    }
    cp.leq0(row);

    // trust region: the bound denominators stay strictly positive
    let margins: Vec<AffExpr<T>> = (0..users)
        .map(|k| {
            let chi = partner(k, pairs);
            let (lre, lim) = link_expr(k, chi);
            let lb = exp.lbar[k];
            let half = T::of(0.5) * lb.norm_sqr();
            let mut e = AffExpr::zero();
            e.add_scaled(&lre, two * lb.re);
            e.add_scaled(&lim, two * lb.im);
            e.add_scaled(&AffExpr::var(alpha0 + k), -half / exp.point.alpha[k]);
            e.add_scaled(&beta_expr[chi], -half / exp.point.beta[chi]);
            e
        })
        .collect();
    for margin in &margins {
        let mut row = AffExpr::constant(opts.delta_tr);
        row.add_scaled(margin, -one);
        cp.leq0(row);
    }

    // surrogate reciprocals and per-user rate bounds
    let mut f_expr: Vec<AffExpr<T>> = (0..users)
        .map(|k| AffExpr::constant(log_co[k].a))
        .collect();
    for (i, &k) in wf_items.iter().enumerate() {
        let wv = AffExpr::var(w_f0 + i);
        cp.soc(
            plus(&wv, &margins[k]),
            vec![
                AffExpr::constant(two * c_f[k].sqrt()),
                minus(&wv, &margins[k]),
            ],
        );
        f_expr[k].push(w_f0 + i, -one);
    }
    if ee {
        for (i, &k) in wq_items.iter().enumerate() {
            let wv = AffExpr::var(w_q0 + i);
            cp.soc(
                plus(&wv, &margins[k]),
                vec![
                    AffExpr::constant(two * c_q[k].sqrt()),
                    minus(&wv, &margins[k]),
                ],
            );
        }
        // consumption epigraph: t_π dominates amplifier and circuit power
        let mut row = AffExpr::constant(circuit_power(dims, sp));
        for s in &s_beta {
            row.add_scaled(s, sp.zeta);
        }
        for tx in &tx_expr {
            row.add_scaled(tx, sp.zeta);
        }
        row.push(t_pi.unwrap(), -one);
        cp.leq0(row);
    }

    // objective and floor rows
    match opts.objective {
        ObjectiveKind::Maximin => {
            let tau = tau.unwrap();
            for j in 0..pairs {
                let mut row = AffExpr::term(tau, sp.r[j]);
                row.add_scaled(&f_expr[j], -one);
                row.add_scaled(&f_expr[j + pairs], -one);
                cp.leq0(row);
            }
            cp.maximize(AffExpr::var(tau));
        }
        ObjectiveKind::EnergyEfficiency => {
            let mut obj = AffExpr::constant(ee_co.iter().map(|c| c.p).sum());
            for (i, _) in wq_items.iter().enumerate() {
                obj.push(w_q0 + i, -one);
            }
            let r_total: T = ee_co.iter().map(|c| c.r).sum();
            obj.push(t_pi.unwrap(), -r_total);
            cp.maximize(obj);
        }
        ObjectiveKind::SumThroughput => {
            let mut obj = AffExpr::zero();
            for f in &f_expr {
                obj.add_scaled(f, one);
            }
            cp.maximize(obj);
        }
    }
    if opts.qos {
        for j in 0..pairs {
            if sp.r[j] > T::zero() {
                let mut row = AffExpr::constant(sp.r[j]);
                row.add_scaled(&f_expr[j], -one);
                row.add_scaled(&f_expr[j + pairs], -one);
                cp.leq0(row);
            }
        }
    }
    for cut in opts.cuts {
        assert!(cut.k < users);
        let chi = partner(cut.k, pairs);
        let (lre, lim) = link_expr(cut.k, chi);
        let mut e = AffExpr::constant(cut.offset);
        e.add_scaled(&lre, cut.lbar_conj2.re);
        e.add_scaled(&lim, -cut.lbar_conj2.im);
        e.add_scaled(&AffExpr::var(alpha0 + cut.k), cut.alpha_coeff);
        e.add_scaled(&beta_expr[chi], cut.beta_coeff);
        cp.leq0(e.neg());
    }

    Ok(Built {
        program: cp,
        dims,
        cap_groups: opts.cap_groups.to_vec(),
        frozen_beta: opts.frozen_beta.map(|fb| fb.to_vec()),
        layout: Layout {
            psi_items,
            ups_items,
            phi_items,
            wf_items,
            wq_items,
            has_tau: opts.objective == ObjectiveKind::Maximin,
            has_tpi: ee,
        },
    })
}

/// Fair-throughput subproblem with the standard two-way relay caps.
pub fn build_maximin<T: Real>(
    exp: &Expansion<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> Result<Built<T>, String> {
    let groups = two_way_cap_groups(ch.dims.relays);
    build(exp, ch, sp, &BuildOptions::new(ObjectiveKind::Maximin, &groups))
}

/// Energy-efficiency subproblem with the standard two-way relay caps.
pub fn build_ee<T: Real>(
    exp: &Expansion<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> Result<Built<T>, String> {
    let groups = two_way_cap_groups(ch.dims.relays);
    build(
        exp,
        ch,
        sp,
        &BuildOptions::new(ObjectiveKind::EnergyEfficiency, &groups),
    )
}

impl<T: Real> Built<T> {
    /// Reassemble the optimizer's decision vector into a lifted point,
    /// without any feasibility check.
    pub fn recover(&self, sol: &Solution<T>) -> LiftedPoint<T> {
        let nr = self.dims.antennas;
        let mut ws = Vec::with_capacity(self.dims.relays);
        for m in 0..self.dims.relays {
            let re = sol.block(&format!("w_re[{m}]"));
            let im = sol.block(&format!("w_im[{m}]"));
            let mut w = CMat::zeros(nr);
            for i in 0..nr {
                for j in 0..nr {
                    w.set(i, j, Complex::new(re[i * nr + j], im[i * nr + j]));
                }
            }
            ws.push(w);
        }
        let alpha = sol.block("alpha").to_vec();
        let beta = match &self.frozen_beta {
            Some(v) => v.clone(),
            None => sol.block("beta").to_vec(),
        };
        LiftedPoint::new(Beamformers::new(ws), alpha, beta)
    }

    /// Reassemble the optimizer's decision vector into a lifted point and
    /// check it against the lifted constraint set.
    pub fn extract(
        &self,
        sol: &Solution<T>,
        ch: &ChannelSet<T>,
        sp: &ScenarioParams<T>,
    ) -> Result<LiftedPoint<T>, String> {
        let point = self.recover(sol);
        let report = lifted_feasible_grouped(&point, ch, sp, &self.cap_groups);
        // interior-point residuals scale with the row magnitudes, so the
        // acceptance gate scales with the largest power cap
        let scale = T::one()
            .max(sp.p_u_max)
            .max(sp.p_sum_u_max)
            .max(sp.p_a_max)
            .max(sp.p_sum_r_max);
        if !report.ok_within(T::of(FEAS_TOL) * scale) {
            let worst = report
                .slacks
                .iter()
                .min_by(|a, b| a.slack.partial_cmp(&b.slack).unwrap())
                .unwrap();
            return Err(format!(
                "solution violates {} (slack {:.3e})",
                worst.constraint,
                worst.slack.to_f64()
            ));
        }
        Ok(point)
    }

    /// Decision vector realizing the expansion point with every epigraph
    /// variable tight; the program's constraints hold at this vector
    /// whenever the expansion satisfies any active floors.
    pub fn inject(
        &self,
        exp: &Expansion<T>,
        ch: &ChannelSet<T>,
        sp: &ScenarioParams<T>,
    ) -> Vec<T> {
        let dims = self.dims;
        let (pairs, users, nr) = (dims.pairs, dims.users(), dims.antennas);
        let point = &exp.point;
        let mut x = vec![T::zero(); self.program.num_vars()];
        let put = |x: &mut Vec<T>, name: &str, vals: &[T]| {
            let r = self.program.block(name);
            assert_eq!(r.len(), vals.len());
            x[r].copy_from_slice(vals);
        };
        for m in 0..dims.relays {
            let re: Vec<T> = point.w.w[m].entries().iter().map(|c| c.re).collect();
            let im: Vec<T> = point.w.w[m].entries().iter().map(|c| c.im).collect();
            put(&mut x, &format!("w_re[{m}]"), &re);
            put(&mut x, &format!("w_im[{m}]"), &im);
        }
        put(&mut x, "alpha", &point.alpha);
        let ua: Vec<T> = point.alpha.iter().map(|a| a.sqrt()).collect();
        let sa: Vec<T> = point.alpha.iter().map(|a| T::one() / a.sqrt()).collect();
        put(&mut x, "u_alpha", &ua);
        put(&mut x, "s_alpha", &sa);
        if self.frozen_beta.is_none() {
            put(&mut x, "beta", &point.beta);
            let vb: Vec<T> = point.beta.iter().map(|b| b.sqrt()).collect();
            let sb: Vec<T> = point.beta.iter().map(|b| T::one() / b.sqrt()).collect();
            put(&mut x, "v_beta", &vb);
            put(&mut x, "s_beta", &sb);
        }
        let psi_t: Vec<T> = self
            .layout
            .psi_items
            .iter()
            .map(|&(k, l)| psi(&point.w, ch, k, l, point.alpha[k], point.beta[l]))
            .collect();
        let psi_u: Vec<T> = self
            .layout
            .psi_items
            .iter()
            .map(|&(k, l)| (point.alpha[k] * point.beta[l]).sqrt())
            .collect();
        put(&mut x, "psi_t", &psi_t);
        put(&mut x, "psi_u", &psi_u);
        let ups: Vec<T> = self
            .layout
            .ups_items
            .iter()
            .map(|&k| upsilon(&point.w, ch, k, point.alpha[k]))
            .collect();
        put(&mut x, "upsilon_t", &ups);
        let phis: Vec<T> = self
            .layout
            .phi_items
            .iter()
            .map(|&(m, l)| phi(&point.w.w[m], ch.h(l, m), T::one(), point.beta[l]))
            .collect();
        put(&mut x, "phi_t", &phis);
        let fro: Vec<T> = (0..dims.relays).map(|m| point.w.w[m].fro_sq()).collect();
        put(&mut x, "fro_t", &fro);
        // at the expansion the margin equals the squared partner gain, so
        // the reciprocal epigraphs land exactly on the surrogate values
        let log_co: Vec<_> = exp.xbar.iter().map(|v| log_bound_coeffs(*v)).collect();
        let wf: Vec<T> = self
            .layout
            .wf_items
            .iter()
            .map(|&k| log_co[k].b * exp.sqrt_ab(k, pairs) / exp.lbar[k].norm_sqr())
            .collect();
        put(&mut x, "w_f", &wf);
        if self.layout.has_tpi {
            let tbar = exp.tbar.unwrap();
            let wq: Vec<T> = self
                .layout
                .wq_items
                .iter()
                .map(|&k| {
                    ee_bound_coeffs(exp.xbar[k], tbar).q * exp.sqrt_ab(k, pairs)
                        / exp.lbar[k].norm_sqr()
                })
                .collect();
            put(&mut x, "w_q", &wq);
            put(&mut x, "t_pi", &[tbar]);
        }
        if self.layout.has_tau {
            let rate = |k: usize| (T::one() + exp.xbar[k]).ln();
            let tau = (0..pairs)
                .map(|j| (rate(j) + rate(j + pairs)) / sp.r[j])
                .fold(T::infinity(), T::min);
            put(&mut x, "tau", &[tau]);
        }
        let _ = (users, nr);
        x
    }
}
