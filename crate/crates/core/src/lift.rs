//! Change of variables `(p, W) ↔ (W, α, β)` that turns the nonconvex power
//! constraints into convex ones.
//!
//! With `β_k = 1/p_k²` and `α_k` the squared interference-plus-noise
//! denominator at user `k`, the SINR becomes `|L_{k,χ(k)}|²/√(α_k β_{χ(k)})`
//! and every power constraint becomes a convex inequality in `(W, α, β)`
//! through the jointly convex building blocks [`psi`], [`upsilon`] and
//! [`phi`].

use crate::linalg::{norm_sq, CMat, C};
use crate::model::{
    circuit_power, link_coeff, partner, relay_rows, sinr_denominator, two_way_cap_groups,
    Beamformers, ChannelSet, ConstraintSlack, FeasReport, PowerAlloc, ScenarioParams,
};
use crate::scalar::Real;

/// Floor keeping `α` and `β` safely positive.
fn positivity_floor<T: Real>() -> T {
    T::of(1e-12)
}

/// The iterate of both path-following algorithms: beamformers plus the
/// lifted denominator and power variables.
#[derive(Clone, Debug)]
pub struct LiftedPoint<T> {
    pub w: Beamformers<T>,
    /// Squared SINR-denominator bounds, one per user, strictly positive.
    pub alpha: Vec<T>,
    /// Inverse squared user powers `1/p_k²`, strictly positive.
    pub beta: Vec<T>,
}

impl<T: Real> LiftedPoint<T> {
    pub fn new(w: Beamformers<T>, alpha: Vec<T>, beta: Vec<T>) -> Self {
        assert_eq!(alpha.len(), beta.len());
        let floor = positivity_floor::<T>();
        let clamp = |v: Vec<T>| v.into_iter().map(|x| x.max(floor)).collect();
        Self {
            w,
            alpha: clamp(alpha),
            beta: clamp(beta),
        }
    }

    pub fn users(&self) -> usize {
        self.alpha.len()
    }
}

/// `Ψ_{k,l}(W, α, β) = |L_{k,l}(W)|² / √(αβ)`.
pub fn psi<T: Real>(
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    k: usize,
    l: usize,
    alpha: T,
    beta: T,
) -> T {
    assert!(alpha > T::zero() && beta > T::zero(), "psi needs α, β > 0");
    link_coeff(w, ch, k, l).norm_sqr() / (alpha * beta).sqrt()
}

/// `Υ_k(W, α) = ‖L_k(W)‖² / √α`.
pub fn upsilon<T: Real>(w: &Beamformers<T>, ch: &ChannelSet<T>, k: usize, alpha: T) -> T {
    assert!(alpha > T::zero(), "upsilon needs α > 0");
    norm_sq(&relay_rows(w, ch, k)) / alpha.sqrt()
}

/// `Φ_{l,m}(W_m, α, β) = ‖W_m h_{l,m}‖² / √(αβ)`.
///
/// The column form `W h` is used so that `Φ(W_m, 1, β_l)` with `β = 1/p²`
/// reproduces the signal term of the relay transmit power exactly.
pub fn phi<T: Real>(w_m: &CMat<T>, h_lm: &[C<T>], alpha: T, beta: T) -> T {
    assert!(alpha > T::zero() && beta > T::zero(), "phi needs α, β > 0");
    norm_sq(&w_m.mul_vec(h_lm)) / (alpha * beta).sqrt()
}

/// Lift `(p, W)` into `(W, α, β)` with `β_k = 1/p_k²` and `α_k` set tight,
/// i.e. to the squared SINR denominator, so the lifted SINR equals the true
/// one and the denominator constraint holds with equality.
pub fn lift_point<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> LiftedPoint<T> {
    assert!(
        p.p.iter().all(|x| *x > T::zero()),
        "lift requires strictly positive powers"
    );
    let beta: Vec<T> = p.p.iter().map(|pk| T::one() / (*pk * *pk)).collect();
    let alpha: Vec<T> = (0..ch.dims.users())
        .map(|k| {
            let d = sinr_denominator(p, w, ch, sp, k);
            d * d
        })
        .collect();
    LiftedPoint::new(w.clone(), alpha, beta)
}

/// Recover the user powers from the lifted variables: `p_k = 1/√β_k`.
pub fn unlift<T: Real>(beta: &[T]) -> PowerAlloc<T> {
    PowerAlloc::new(beta.iter().map(|b| T::one() / b.sqrt()).collect())
}

/// Lifted SINR of user `k`: `|L_{k,χ(k)}(W)|² / √(α_k β_{χ(k)})`.
///
/// Equals the true SINR when `α` is tight, and lower-bounds it whenever the
/// denominator constraint holds.
pub fn lifted_sinr<T: Real>(x: &LiftedPoint<T>, ch: &ChannelSet<T>, k: usize) -> T {
    let chi = partner(k, ch.dims.pairs);
    link_coeff(&x.w, ch, k, chi).norm_sqr() / (x.alpha[k] * x.beta[chi]).sqrt()
}

/// Lifted exchange throughput of pair `k`, nats.
pub fn lifted_pair_throughput<T: Real>(x: &LiftedPoint<T>, ch: &ChannelSet<T>, pair: usize) -> T {
    (T::one() + lifted_sinr(x, ch, pair)).ln()
        + (T::one() + lifted_sinr(x, ch, pair + ch.dims.pairs)).ln()
}

/// Lifted `min_k R_k / r_k`; thresholds of zero count as satisfied.
pub fn lifted_min_ratio<T: Real>(x: &LiftedPoint<T>, ch: &ChannelSet<T>, sp: &ScenarioParams<T>) -> T {
    (0..ch.dims.pairs)
        .map(|k| {
            if sp.r[k] <= T::zero() {
                T::infinity()
            } else {
                lifted_pair_throughput(x, ch, k) / sp.r[k]
            }
        })
        .fold(T::infinity(), T::min)
}

/// Transmit power of relay `m` expressed in lifted variables:
/// `Σ_l Φ_{l,m}(W_m, 1, β_l) + σ_R² ‖W_m‖²`.
pub fn lifted_relay_tx<T: Real>(
    x: &LiftedPoint<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    m: usize,
) -> T {
    let mut tx = sp.sigma_r2 * x.w.w[m].fro_sq();
    for l in 0..ch.dims.users() {
        tx += phi(&x.w.w[m], ch.h(l, m), T::one(), x.beta[l]);
    }
    tx
}

/// Consumption power `π(β, W)` in lifted variables.
pub fn lifted_consumption<T: Real>(
    x: &LiftedPoint<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> T {
    consumption_of(&x.w, &x.beta, ch, sp)
}

/// `π(β, W)` from the raw parts, for callers that move `β` independently of
/// a full lifted point.
pub fn consumption_of<T: Real>(
    w: &Beamformers<T>,
    beta: &[T],
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> T {
    let user_tx: T = beta.iter().map(|b| T::one() / b.sqrt()).sum();
    let mut relay_tx = T::zero();
    for m in 0..ch.dims.relays {
        relay_tx += sp.sigma_r2 * w.w[m].fro_sq();
        for l in 0..ch.dims.users() {
            relay_tx += phi(&w.w[m], ch.h(l, m), T::one(), beta[l]);
        }
    }
    sp.zeta * user_tx + sp.zeta * relay_tx + circuit_power(ch.dims, sp)
}

/// Lifted energy efficiency `Σ_k R̃_k / π(β, W)`.
pub fn lifted_ee<T: Real>(x: &LiftedPoint<T>, ch: &ChannelSet<T>, sp: &ScenarioParams<T>) -> T {
    let rate: T = (0..ch.dims.pairs)
        .map(|k| lifted_pair_throughput(x, ch, k))
        .sum();
    rate / lifted_consumption(x, ch, sp)
}

/// Check the lifted constraint system: the per-user denominator bounds, the
/// user power caps in `β`, and the relay power caps.
pub fn lifted_feasible<T: Real>(
    x: &LiftedPoint<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> FeasReport<T> {
    lifted_feasible_grouped(x, ch, sp, &two_way_cap_groups(ch.dims.relays))
}

/// Lifted feasibility with explicit relay cap groups.
pub fn lifted_feasible_grouped<T: Real>(
    x: &LiftedPoint<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    cap_groups: &[Vec<usize>],
) -> FeasReport<T> {
    let users = ch.dims.users();
    let mut slacks = Vec::new();
    for k in 0..users {
        let chi = partner(k, ch.dims.pairs);
        let mut lhs = sp.sigma_r2 * upsilon(&x.w, ch, k, x.alpha[k])
            + sp.sigma_k2[k] / x.alpha[k].sqrt();
        for l in 0..users {
            if l == k || l == chi {
                continue;
            }
            lhs += psi(&x.w, ch, k, l, x.alpha[k], x.beta[l]);
        }
        slacks.push(ConstraintSlack {
            constraint: format!("sinr_denominator[{k}]"),
            slack: T::one() - lhs,
        });
    }
    for k in 0..users {
        slacks.push(ConstraintSlack {
            constraint: format!("user_power[{k}]"),
            slack: x.beta[k] - T::one() / (sp.p_u_max * sp.p_u_max),
        });
    }
    let user_sum: T = x.beta.iter().map(|b| T::one() / b.sqrt()).sum();
    slacks.push(ConstraintSlack {
        constraint: "user_power_sum".into(),
        slack: sp.p_sum_u_max - user_sum,
    });
    let tx: Vec<T> = (0..ch.dims.relays)
        .map(|m| lifted_relay_tx(x, ch, sp, m))
        .collect();
    for (g, group) in cap_groups.iter().enumerate() {
        let used: T = group.iter().map(|m| tx[*m]).sum();
        slacks.push(ConstraintSlack {
            constraint: format!("relay_power[{g}]"),
            slack: sp.p_a_max - used,
        });
    }
    slacks.push(ConstraintSlack {
        constraint: "relay_power_sum".into(),
        slack: sp.p_sum_r_max - tx.iter().copied().sum(),
    });
    FeasReport { slacks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{feasible, sinr, Dimensions};

    fn re(x: f64) -> C<f64> {
        C::new(x, 0.0)
    }

    fn toy_channels() -> ChannelSet<f64> {
        ChannelSet::new(
            Dimensions::new(1, 1, 1),
            vec![vec![vec![re(1.0)]], vec![vec![re(2.0)]]],
            vec![vec![vec![re(1.0)], vec![re(1.0)]]],
        )
    }

    fn toy_params() -> ScenarioParams<f64> {
        ScenarioParams {
            sigma_r2: 1.0,
            sigma_k2: vec![1.0, 1.0],
            p_u_max: 10.0,
            p_sum_u_max: 20.0,
            p_a_max: 9.0,
            p_sum_r_max: 9.0,
            zeta: 2.5,
            p_r: 10f64.powf(0.097),
            p_u_circ: 10f64.powf(-1.3),
            r: vec![1.0],
        }
    }

    fn toy_w(c: f64) -> Beamformers<f64> {
        Beamformers::new(vec![CMat::scaled_identity(1, re(c))])
    }

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * b.abs().max(1.0), "{a} != {b}");
    }

    #[test]
    fn beta_is_inverse_square() {
        let ch = toy_channels();
        let sp = toy_params();
        let x = lift_point(&PowerAlloc::new(vec![2.0, 2.0]), &toy_w(0.5), &ch, &sp);
        assert_eq!(x.beta, vec![0.25, 0.25]);
    }

    #[test]
    fn single_pair_alpha_is_squared_noise_denominator() {
        // K = 1: interference sum empty, denominator is σ_R²‖L_1‖² + σ²
        let ch = toy_channels();
        let sp = toy_params();
        let p = PowerAlloc::new(vec![4.0, 1.0]);
        let x = lift_point(&p, &toy_w(1.0), &ch, &sp);
        let d = sp.sigma_r2 * norm_sq(&relay_rows(&x.w, &ch, 0)) + sp.sigma_k2[0];
        approx(x.alpha[0], d * d, 1e-14);
        approx(x.alpha[0], 4.0, 1e-14);
    }

    #[test]
    fn lifted_sinr_matches_model_sinr() {
        // the defining identity: |L_{k,χ(k)}|²/√(α_k β_{χ(k)}) = γ_k
        let ch = toy_channels();
        let sp = toy_params();
        let p = PowerAlloc::new(vec![4.0, 1.0]);
        let w = toy_w(1.0);
        let x = lift_point(&p, &w, &ch, &sp);
        for k in 0..2 {
            approx(lifted_sinr(&x, &ch, k), sinr(&p, &w, &ch, &sp, k), 1e-12);
        }
        approx(lifted_sinr(&x, &ch, 0), 2.0, 1e-12);
    }

    #[test]
    fn unlift_round_trip() {
        let ch = toy_channels();
        let sp = toy_params();
        assert_eq!(unlift(&[1.0, 1.0]).p, vec![1.0, 1.0]);
        assert_eq!(unlift(&[0.25, 0.25]).p, vec![2.0, 2.0]);
        let p = PowerAlloc::new(vec![3.7, 0.412]);
        let x = lift_point(&p, &toy_w(0.3), &ch, &sp);
        let back = unlift(&x.beta);
        for k in 0..2 {
            approx(back.p[k], p.p[k], 1e-15);
        }
    }

    #[test]
    fn psi_upsilon_phi_values() {
        let ch = toy_channels();
        let w = toy_w(1.0);
        // |L_{0,1}|² = 4, α = 4, β = 1 → 2
        approx(psi(&w, &ch, 0, 1, 4.0, 1.0), 2.0, 1e-14);
        assert_eq!(psi(&Beamformers::zeros(ch.dims), &ch, 0, 1, 3.0, 5.0), 0.0);
        // ‖L‖² = 6, α = 4 → 3
        let dims = Dimensions::new(1, 1, 1);
        let ch6 = ChannelSet::new(
            dims,
            vec![vec![vec![re(1.0)]], vec![vec![re(1.0)]]],
            vec![vec![vec![C::new(1.0, 1.0)], vec![re(1.0)]]],
        );
        let w_sqrt3 = toy_w(3f64.sqrt());
        approx(upsilon(&w_sqrt3, &ch6, 0, 4.0), 3.0, 1e-12);
        // N_R = 1: h = 2, W = 3, α = 1, β = 4 → 36/2 = 18
        let w3 = CMat::scaled_identity(1, re(3.0));
        approx(phi(&w3, &[re(2.0)], 1.0, 4.0), 18.0, 1e-14);
        assert_eq!(phi(&CMat::zeros(1), &[re(2.0)], 1.0, 4.0), 0.0);
    }

    #[test]
    fn building_blocks_are_midpoint_convex() {
        // joint midpoint convexity over (W, α, β) on pseudorandom samples
        let ch = toy_channels();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut unit = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for _ in 0..10_000 {
            let w_a = toy_w(4.0 * unit() - 2.0);
            let w_b = toy_w(4.0 * unit() - 2.0);
            let (a1, b1) = (0.1 + 3.0 * unit(), 0.1 + 3.0 * unit());
            let (a2, b2) = (0.1 + 3.0 * unit(), 0.1 + 3.0 * unit());
            let w_mid = Beamformers::new(vec![CMat::scaled_identity(
                1,
                (w_a.w[0].get(0, 0) + w_b.w[0].get(0, 0)) * re(0.5),
            )]);
            let (am, bm) = ((a1 + a2) / 2.0, (b1 + b2) / 2.0);
            let lhs = psi(&w_mid, &ch, 0, 1, am, bm);
            let rhs = 0.5 * (psi(&w_a, &ch, 0, 1, a1, b1) + psi(&w_b, &ch, 0, 1, a2, b2));
            assert!(lhs <= rhs + 1e-12);
            let lhs_u = upsilon(&w_mid, &ch, 0, am);
            let rhs_u = 0.5 * (upsilon(&w_a, &ch, 0, a1) + upsilon(&w_b, &ch, 0, a2));
            assert!(lhs_u <= rhs_u + 1e-12);
            let lhs_p = phi(&w_mid.w[0], &[re(2.0)], am, bm);
            let rhs_p =
                0.5 * (phi(&w_a.w[0], &[re(2.0)], a1, b1) + phi(&w_b.w[0], &[re(2.0)], a2, b2));
            assert!(lhs_p <= rhs_p + 1e-12);
        }
    }

    #[test]
    fn phi_sum_reproduces_relay_tx_power() {
        let ch = toy_channels();
        let sp = toy_params();
        let p = PowerAlloc::new(vec![4.0, 1.0]);
        let w = toy_w(1.0);
        let x = lift_point(&p, &w, &ch, &sp);
        approx(
            lifted_relay_tx(&x, &ch, &sp, 0),
            crate::model::relay_tx_power(&p, &w, &ch, &sp, 0),
            1e-12,
        );
    }

    #[test]
    fn lift_of_feasible_point_is_lifted_feasible_and_tight() {
        let ch = toy_channels();
        let sp = toy_params();
        let p = PowerAlloc::new(vec![4.0, 1.0]);
        let w = toy_w(1.0);
        assert!(feasible(&p, &w, &ch, &sp, false).ok());
        let x = lift_point(&p, &w, &ch, &sp);
        let report = lifted_feasible(&x, &ch, &sp);
        assert!(report.ok_within(1e-12));
        // the denominator rows hold with equality at a lifted point
        for k in 0..2 {
            let s = &report.slacks[k];
            assert!(s.constraint.starts_with("sinr_denominator"));
            approx(s.slack, 0.0, 1e-12);
        }
    }

    #[test]
    fn beta_below_cap_is_flagged() {
        let ch = toy_channels();
        let sp = toy_params();
        let x = LiftedPoint::new(toy_w(0.1), vec![4.0, 4.0], vec![1e-4, 1.0]);
        let report = lifted_feasible(&x, &ch, &sp);
        let v = report.violations();
        assert!(v.iter().any(|s| s.constraint == "user_power[0]"));
    }

    #[test]
    fn enlarging_alpha_keeps_feasibility_and_shrinks_objective() {
        let ch = toy_channels();
        let sp = toy_params();
        let p = PowerAlloc::new(vec![4.0, 1.0]);
        let w = toy_w(1.0);
        let x = lift_point(&p, &w, &ch, &sp);
        let mut enlarged = x.clone();
        for a in &mut enlarged.alpha {
            *a *= 1.5;
        }
        assert!(lifted_feasible(&enlarged, &ch, &sp).ok_within(1e-12));
        assert!(lifted_min_ratio(&enlarged, &ch, &sp) < lifted_min_ratio(&x, &ch, &sp));
        // unlifting a feasible lifted point gives a feasible design
        let back = unlift(&enlarged.beta);
        assert!(feasible(&back, &enlarged.w, &ch, &sp, false).ok_within(1e-12));
    }

    #[test]
    fn lifted_consumption_matches_model() {
        let ch = toy_channels();
        let sp = toy_params();
        let p = PowerAlloc::new(vec![4.0, 1.0]);
        let w = toy_w(1.0);
        let x = lift_point(&p, &w, &ch, &sp);
        approx(
            lifted_consumption(&x, &ch, &sp),
            crate::model::consumption_power(&p, &w, &ch, &sp),
            1e-12,
        );
        approx(
            lifted_ee(&x, &ch, &sp),
            crate::model::ee_objective(&p, &w, &ch, &sp),
            1e-12,
        );
    }
}
