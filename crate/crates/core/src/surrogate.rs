//! Concave lower bounds driving the path-following iterations.
//!
//! Three closed-form minorants are built around the current iterate (the
//! "expansion point"):
//!
//! * a bound on each pair's log-rate term, valid on a trust region and
//!   exact at the expansion point;
//! * a bound on each rate-over-consumption term of the energy-efficiency
//!   objective, likewise exact at the expansion point;
//! * a tangent minorant of the convex left-hand side of the per-user SINR
//!   floor, turning that reverse-convex constraint into a linear one.
//!
//! Maximizing the bounds subject to the (convex) lifted constraints yields
//! monotone ascent of the true objective.

use crate::lift::{consumption_of, lifted_consumption, LiftedPoint};
use crate::linalg::C;
use crate::model::{link_coeff, partner, Beamformers, ChannelSet, ScenarioParams};
use crate::scalar::Real;

/// Iterate snapshot with the per-user quantities every bound reuses:
/// the partner-link gains `L̄_k`, the lifted SINRs `x̄_k`, and (for
/// energy-efficiency runs) the consumption `t̄`.
#[derive(Clone, Debug)]
pub struct Expansion<T> {
    pub point: LiftedPoint<T>,
    /// `L_{k,χ(k)}(W̄)` per user.
    pub lbar: Vec<C<T>>,
    /// Lifted SINR `|L̄_k|²/√(ᾱ_k β̄_{χ(k)})` per user.
    pub xbar: Vec<T>,
    /// Consumption power at the iterate; `None` for throughput-only runs.
    pub tbar: Option<T>,
}

impl<T: Real> Expansion<T> {
    pub fn new(
        point: LiftedPoint<T>,
        ch: &ChannelSet<T>,
        sp: &ScenarioParams<T>,
        with_consumption: bool,
    ) -> Self {
        let users = ch.dims.users();
        assert_eq!(point.users(), users);
        let lbar: Vec<C<T>> = (0..users)
            .map(|k| link_coeff(&point.w, ch, k, partner(k, ch.dims.pairs)))
            .collect();
        let xbar: Vec<T> = (0..users)
            .map(|k| {
                let chi = partner(k, ch.dims.pairs);
                lbar[k].norm_sqr() / (point.alpha[k] * point.beta[chi]).sqrt()
            })
            .collect();
        let tbar = with_consumption.then(|| lifted_consumption(&point, ch, sp));
        Self {
            point,
            lbar,
            xbar,
            tbar,
        }
    }

    /// `√(ᾱ_k β̄_{χ(k)})` for user `k`.
    pub fn sqrt_ab(&self, k: usize, pairs: usize) -> T {
        (self.point.alpha[k] * self.point.beta[partner(k, pairs)]).sqrt()
    }
}

/// Coefficients of the log-rate bound at one user:
/// `a = ln(1+x̄) + x̄/(x̄+1)`, `b = x̄²/(x̄+1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogBoundCoeffs<T> {
    pub a: T,
    pub b: T,
}

pub fn log_bound_coeffs<T: Real>(xbar: T) -> LogBoundCoeffs<T> {
    assert!(xbar >= T::zero(), "expansion SINR cannot be negative");
    LogBoundCoeffs {
        a: (T::one() + xbar).ln() + xbar / (xbar + T::one()),
        b: xbar * xbar / (xbar + T::one()),
    }
}

/// Coefficients of the rate-over-consumption bound at one user:
/// `p = 2ln(1+x̄)/t̄ + x̄/(t̄(x̄+1))`, `q = x̄²/((x̄+1)t̄)`, `r = ln(1+x̄)/t̄²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EeBoundCoeffs<T> {
    pub p: T,
    pub q: T,
    pub r: T,
}

pub fn ee_bound_coeffs<T: Real>(xbar: T, tbar: T) -> EeBoundCoeffs<T> {
    assert!(xbar >= T::zero() && tbar > T::zero());
    let log1p = (T::one() + xbar).ln();
    EeBoundCoeffs {
        p: T::of(2.0) * log1p / tbar + xbar / (tbar * (xbar + T::one())),
        q: xbar * xbar / ((xbar + T::one()) * tbar),
        r: log1p / (tbar * tbar),
    }
}

/// Trust-region margin at user `k`:
/// `2Re{L_{k,χ(k)}(W)·L̄*} − ½|L̄|²(α_k/ᾱ_k + β_{χ(k)}/β̄_{χ(k)})`.
///
/// The bounds below are valid where this is positive; it is affine in
/// `(W, α, β)` and evaluates to `|L̄|²` at the expansion point itself.
pub fn trust_region_margin<T: Real>(
    w: &Beamformers<T>,
    alpha_k: T,
    beta_chi: T,
    exp: &Expansion<T>,
    ch: &ChannelSet<T>,
    k: usize,
) -> T {
    let chi = partner(k, ch.dims.pairs);
    let l = link_coeff(w, ch, k, chi);
    let lbar = exp.lbar[k];
    T::of(2.0) * (l * lbar.conj()).re
        - T::of(0.5)
            * lbar.norm_sqr()
            * (alpha_k / exp.point.alpha[k] + beta_chi / exp.point.beta[chi])
}

/// Scalar form of the log-rate inequality's right-hand side:
/// `ln(1+x) ≥ ln(1+x̄) + x̄/(x̄+1) − x̄²/((x̄+1)x)` for `x, x̄ > 0`.
pub fn log_bound_rhs<T: Real>(xbar: T, x: T) -> T {
    let co = log_bound_coeffs(xbar);
    co.a - co.b / x
}

/// Scalar form of the ratio inequality's right-hand side:
/// `ln(1+x)/t ≥ p − q/x − r·t` with the coefficients taken at `(x̄, t̄)`.
pub fn ratio_bound_rhs<T: Real>(xbar: T, tbar: T, x: T, t: T) -> T {
    let co = ee_bound_coeffs(xbar, tbar);
    co.p - co.q / x - co.r * t
}

/// Concave lower bound on the log-rate term of user `k`,
/// `a − b·√(ᾱβ̄)/margin ≤ ln(1 + |L_{k,χ(k)}(W)|²/√(α_k β_{χ(k)}))`,
/// exact at the expansion point.
///
/// Panics outside the trust region (callers keep iterates inside it).
pub fn rate_lower<T: Real>(
    w: &Beamformers<T>,
    alpha_k: T,
    beta_chi: T,
    exp: &Expansion<T>,
    ch: &ChannelSet<T>,
    k: usize,
) -> T {
    let margin = trust_region_margin(w, alpha_k, beta_chi, exp, ch, k);
    assert!(
        margin > T::zero(),
        "rate bound evaluated outside its trust region"
    );
    let co = log_bound_coeffs(exp.xbar[k]);
    co.a - co.b * exp.sqrt_ab(k, ch.dims.pairs) / margin
}

/// Concave lower bound on user `k`'s rate-over-consumption term,
/// `p − q·√(ᾱβ̄)/margin − r·π(β, W) ≤ ln(1+x_k)/π(β, W)`,
/// exact at the expansion point (where it equals `ln(1+x̄_k)/t̄`).
pub fn ee_term_lower<T: Real>(
    w: &Beamformers<T>,
    alpha_k: T,
    beta: &[T],
    exp: &Expansion<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    k: usize,
) -> T {
    let chi = partner(k, ch.dims.pairs);
    let margin = trust_region_margin(w, alpha_k, beta[chi], exp, ch, k);
    assert!(
        margin > T::zero(),
        "energy-efficiency bound evaluated outside its trust region"
    );
    let tbar = exp
        .tbar
        .expect("expansion built without consumption cache");
    let co = ee_bound_coeffs(exp.xbar[k], tbar);
    co.p - co.q * exp.sqrt_ab(k, ch.dims.pairs) / margin - co.r * consumption_of(w, beta, ch, sp)
}

/// Linearized per-user SINR floor.
///
/// The floor `γ_k ≥ e^{r̃}−1` is, in lifted variables, the reverse-convex
/// constraint `|L_{k,χ(k)}(W)|² − (e^{r̃}−1)·√(α_k β_{χ(k)}) ≥ 0`.  Its
/// left-hand side is convex, so the tangent at the expansion point
/// minorizes it and `tangent ≥ 0` is a safe inner approximation.
#[derive(Clone, Debug)]
pub struct QosCut<T> {
    /// Observer user index.
    pub k: usize,
    /// `2·L̄*`, the gradient factor of the `|L|²` part.
    pub lbar_conj2: C<T>,
    /// Constant `−|L̄|²`.
    pub offset: T,
    /// Coefficient on `α_k`: `−(c/2)·√(ᾱβ̄)/ᾱ_k`.
    pub alpha_coeff: T,
    /// Coefficient on `β_{χ(k)}`: `−(c/2)·√(ᾱβ̄)/β̄_{χ(k)}`.
    pub beta_coeff: T,
    /// `e^{r̃} − 1`.
    pub c: T,
}

pub fn reverse_convex_linearize<T: Real>(
    exp: &Expansion<T>,
    ch: &ChannelSet<T>,
    k: usize,
    r_min: T,
) -> QosCut<T> {
    let chi = partner(k, ch.dims.pairs);
    let c = r_min.exp() - T::one();
    let sab = exp.sqrt_ab(k, ch.dims.pairs);
    let lbar = exp.lbar[k];
    QosCut {
        k,
        lbar_conj2: lbar.conj() * C::new(T::of(2.0), T::zero()),
        offset: -lbar.norm_sqr(),
        alpha_coeff: -(c * T::of(0.5)) * sab / exp.point.alpha[k],
        beta_coeff: -(c * T::of(0.5)) * sab / exp.point.beta[chi],
        c,
    }
}

impl<T: Real> QosCut<T> {
    /// Tangent value at `(W, α_k, β_{χ(k)})`.
    pub fn eval(&self, w: &Beamformers<T>, ch: &ChannelSet<T>, alpha_k: T, beta_chi: T) -> T {
        let chi = partner(self.k, ch.dims.pairs);
        let l = link_coeff(w, ch, self.k, chi);
        (self.lbar_conj2 * l).re + self.offset + self.alpha_coeff * alpha_k + self.beta_coeff * beta_chi
    }

    /// The exact left-hand side the tangent minorizes.
    pub fn true_lhs(&self, w: &Beamformers<T>, ch: &ChannelSet<T>, alpha_k: T, beta_chi: T) -> T {
        let chi = partner(self.k, ch.dims.pairs);
        link_coeff(w, ch, self.k, chi).norm_sqr() - self.c * (alpha_k * beta_chi).sqrt()
    }
}
