//! Physical network model for two-way amplify-and-forward relaying.
//!
//! `K` user pairs (so `2K` single-antenna users) exchange data through `M`
//! relays with `N_R` antennas each.  In the multiple-access phase all users
//! transmit simultaneously; each relay applies a beamforming matrix `W_m` to
//! its received signal and broadcasts it.  After self-interference
//! cancellation, user `k` decodes the signal of its partner `χ(k)`.
//!
//! Everything here is a pure function of immutable inputs: SINR, pair
//! throughput, transmit and consumption power, the energy-efficiency
//! objective, feasibility checks, and the one-way-relaying counterparts used
//! as a baseline.
//!
//! Index convention: all user and relay indices are 0-based. Users `0..K`
//! form the "left" group, users `K..2K` the "right" group, and user `k` is
//! paired with `partner(k, K)`.

use crate::linalg::{dot, norm_sq, CMat, C};
use crate::scalar::Real;

/// Network size: `pairs` user pairs (`2·pairs` users), `relays` relays with
/// `antennas` antennas each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dimensions {
    pub pairs: usize,
    pub relays: usize,
    pub antennas: usize,
}

impl Dimensions {
    pub fn new(pairs: usize, relays: usize, antennas: usize) -> Self {
        assert!(pairs >= 1, "need at least one user pair");
        assert!(relays >= 1, "need at least one relay");
        assert!(antennas >= 1, "need at least one antenna per relay");
        Self {
            pairs,
            relays,
            antennas,
        }
    }

    /// Number of users, `2K`.
    pub fn users(&self) -> usize {
        2 * self.pairs
    }
}

/// Partner of user `k`: the other member of its pair.
///
/// Users `0..K` are paired with `K..2K` in order; the map is an involution.
pub fn partner(k: usize, pairs: usize) -> usize {
    assert!(k < 2 * pairs, "user index {k} out of range (2K = {})", 2 * pairs);
    if k < pairs {
        k + pairs
    } else {
        k - pairs
    }
}

/// Channel coefficients for every (user, relay) link.
///
/// `h[l][m]` is the uplink vector from user `l` to relay `m` and
/// `f[m][k]` the conjugated downlink vector from relay `m` to user `k`
/// (stored pre-conjugated because every receive-side formula consumes it
/// that way).  All vectors have length `N_R`.
#[derive(Clone, Debug)]
pub struct ChannelSet<T> {
    pub dims: Dimensions,
    h: Vec<Vec<Vec<C<T>>>>,
    f: Vec<Vec<Vec<C<T>>>>,
}

impl<T: Real> ChannelSet<T> {
    /// Build from uplink vectors `h[l][m]` and already-conjugated receive
    /// vectors `f[m][k]`.
    pub fn new(dims: Dimensions, h: Vec<Vec<Vec<C<T>>>>, f: Vec<Vec<Vec<C<T>>>>) -> Self {
        assert_eq!(h.len(), dims.users(), "h: one entry per user");
        assert_eq!(f.len(), dims.relays, "f: one entry per relay");
        for hl in &h {
            assert_eq!(hl.len(), dims.relays, "h[l]: one vector per relay");
            for v in hl {
                assert_eq!(v.len(), dims.antennas, "h vector length");
            }
        }
        for fm in &f {
            assert_eq!(fm.len(), dims.users(), "f[m]: one vector per user");
            for v in fm {
                assert_eq!(v.len(), dims.antennas, "f vector length");
            }
        }
        Self { dims, h, f }
    }

    /// Build from uplink vectors and raw downlink vectors `g[m][k]`,
    /// conjugating once.
    pub fn from_downlink_gains(
        dims: Dimensions,
        h: Vec<Vec<Vec<C<T>>>>,
        g: Vec<Vec<Vec<C<T>>>>,
    ) -> Self {
        let f = g
            .into_iter()
            .map(|gm| {
                gm.into_iter()
                    .map(|v| v.into_iter().map(|x| x.conj()).collect())
                    .collect()
            })
            .collect();
        Self::new(dims, h, f)
    }

    pub fn h(&self, user: usize, relay: usize) -> &[C<T>] {
        &self.h[user][relay]
    }

    pub fn f(&self, relay: usize, user: usize) -> &[C<T>] {
        &self.f[relay][user]
    }
}

/// Per-user transmit powers, watts.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerAlloc<T> {
    pub p: Vec<T>,
}

impl<T: Real> PowerAlloc<T> {
    pub fn new(p: Vec<T>) -> Self {
        assert!(
            p.iter().all(|x| *x >= T::zero()),
            "transmit powers must be nonnegative"
        );
        Self { p }
    }

    pub fn equal(users: usize, value: T) -> Self {
        Self::new(vec![value; users])
    }

    pub fn total(&self) -> T {
        self.p.iter().copied().sum()
    }
}

/// One beamforming matrix per relay.
#[derive(Clone, Debug)]
pub struct Beamformers<T> {
    pub w: Vec<CMat<T>>,
}

impl<T: Real> Beamformers<T> {
    pub fn new(w: Vec<CMat<T>>) -> Self {
        assert!(!w.is_empty());
        let n = w[0].size();
        assert!(w.iter().all(|m| m.size() == n), "beamformers must share size");
        Self { w }
    }

    pub fn zeros(dims: Dimensions) -> Self {
        Self::new(vec![CMat::zeros(dims.antennas); dims.relays])
    }

    pub fn relays(&self) -> usize {
        self.w.len()
    }
}

/// Power budgets, noise levels, circuit constants and QoS thresholds.
#[derive(Clone, Debug)]
pub struct ScenarioParams<T> {
    /// Relay noise power σ_R².
    pub sigma_r2: T,
    /// Per-user noise powers σ_k², length 2K.
    pub sigma_k2: Vec<T>,
    /// Per-user transmit cap, watts.
    pub p_u_max: T,
    /// Total user transmit budget, watts.
    pub p_sum_u_max: T,
    /// Per-relay transmit cap, watts.
    pub p_a_max: T,
    /// Total relay transmit budget, watts.
    pub p_sum_r_max: T,
    /// Reciprocal power-amplifier drain efficiency (≥ 1).
    pub zeta: T,
    /// Circuit power per relay antenna, watts.
    pub p_r: T,
    /// Circuit power per user, watts.
    pub p_u_circ: T,
    /// Per-pair throughput thresholds, nats, length K.
    pub r: Vec<T>,
}

impl<T: Real> ScenarioParams<T> {
    pub fn validate(&self, dims: Dimensions) {
        assert_eq!(self.sigma_k2.len(), dims.users(), "one noise power per user");
        assert_eq!(self.r.len(), dims.pairs, "one QoS threshold per pair");
        assert!(self.sigma_r2 > T::zero() && self.sigma_k2.iter().all(|x| *x > T::zero()));
        assert!(self.p_u_max > T::zero() && self.p_sum_u_max > T::zero());
        assert!(self.p_a_max > T::zero() && self.p_sum_r_max > T::zero());
        assert!(self.zeta >= T::one(), "drain efficiency cannot exceed 1");
        assert!(self.p_r > T::zero() && self.p_u_circ > T::zero());
        assert!(self.r.iter().all(|x| *x >= T::zero()));
    }
}

/// Convert a dBW figure to watts.
pub fn dbw_to_watts<T: Real>(dbw: T) -> T {
    T::of(10.0).powf(dbw / T::of(10.0))
}

/// `L_{k,l}(W) = Σ_m f_{m,k}^H W_m h_{l,m}`: the effective complex gain from
/// transmitter `l` to receiver `k` through all relays.
pub fn link_coeff<T: Real>(
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    k: usize,
    l: usize,
) -> C<T> {
    let mut acc = C::new(T::zero(), T::zero());
    for m in 0..ch.dims.relays {
        acc += dot(&w.w[m].vh_mul(ch.f(m, k)), ch.h(l, m));
    }
    acc
}

/// `L_k(W)`: concatenation of the rows `f_{m,k}^H W_m` over relays, length
/// `M·N_R`.  Its squared norm scales the relay-noise term of the SINR.
pub fn relay_rows<T: Real>(w: &Beamformers<T>, ch: &ChannelSet<T>, k: usize) -> Vec<C<T>> {
    let mut out = Vec::with_capacity(ch.dims.relays * ch.dims.antennas);
    for m in 0..ch.dims.relays {
        out.extend(w.w[m].vh_mul(ch.f(m, k)));
    }
    out
}

/// Interference-plus-noise denominator of the SINR at user `k`: the partner
/// signal and the cancelled self-interference are excluded.
pub fn sinr_denominator<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    k: usize,
) -> T {
    let users = ch.dims.users();
    let chi = partner(k, ch.dims.pairs);
    let mut den = sp.sigma_r2 * norm_sq(&relay_rows(w, ch, k)) + sp.sigma_k2[k];
    for l in 0..users {
        if l == k || l == chi {
            continue;
        }
        den += p.p[l] * link_coeff(w, ch, k, l).norm_sqr();
    }
    den
}

/// SINR at user `k` after self-interference cancellation.
pub fn sinr<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    k: usize,
) -> T {
    let chi = partner(k, ch.dims.pairs);
    let num = p.p[chi] * link_coeff(w, ch, k, chi).norm_sqr();
    num / sinr_denominator(p, w, ch, sp, k)
}

/// Exchange throughput of pair `k` (0-based pair index), in nats:
/// `R_k = ln(1+γ_k) + ln(1+γ_{K+k})`.
pub fn pair_throughput<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    pair: usize,
) -> T {
    assert!(pair < ch.dims.pairs, "pair index out of range");
    (T::one() + sinr(p, w, ch, sp, pair)).ln()
        + (T::one() + sinr(p, w, ch, sp, pair + ch.dims.pairs)).ln()
}

/// Sum of all pair throughputs, nats.
pub fn sum_throughput<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> T {
    (0..ch.dims.pairs)
        .map(|k| pair_throughput(p, w, ch, sp, k))
        .sum()
}

/// Worst pair-throughput-to-threshold ratio `min_k R_k / r_k`.  A threshold
/// of zero counts as satisfied (infinite ratio).
pub fn min_pair_ratio<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> T {
    (0..ch.dims.pairs)
        .map(|k| {
            if sp.r[k] <= T::zero() {
                T::infinity()
            } else {
                pair_throughput(p, w, ch, sp, k) / sp.r[k]
            }
        })
        .fold(T::infinity(), T::min)
}

/// Transmit power radiated by relay `m`:
/// `Σ_l p_l ‖W_m h_{l,m}‖² + σ_R² ‖W_m‖²_F`.
pub fn relay_tx_power<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    m: usize,
) -> T {
    let mut tx = sp.sigma_r2 * w.w[m].fro_sq();
    for l in 0..ch.dims.users() {
        tx += p.p[l] * norm_sq(&w.w[m].mul_vec(ch.h(l, m)));
    }
    tx
}

/// Total radiated power of users plus relays, watts.
pub fn total_tx_power<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> T {
    p.total()
        + (0..ch.dims.relays)
            .map(|m| relay_tx_power(p, w, ch, sp, m))
            .sum()
}

/// Total consumed power: amplifier-scaled transmit power plus circuit power,
/// `π = ζ·Σ_k p_k + ζ·Σ_m P^A_m + M·N_R·P_r + 2K·P_Ucirc`.
pub fn consumption_power<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> T {
    assert!(
        p.p.iter().all(|x| *x > T::zero()),
        "consumption power requires strictly positive user powers"
    );
    let relay_tx: T = (0..ch.dims.relays)
        .map(|m| relay_tx_power(p, w, ch, sp, m))
        .sum();
    sp.zeta * p.total()
        + sp.zeta * relay_tx
        + circuit_power(ch.dims, sp)
}

/// Circuit-power floor of the consumption model (independent of p and W).
pub fn circuit_power<T: Real>(dims: Dimensions, sp: &ScenarioParams<T>) -> T {
    T::of(dims.relays as f64) * T::of(dims.antennas as f64) * sp.p_r
        + T::of(dims.users() as f64) * sp.p_u_circ
}

/// Network energy efficiency `Σ_k R_k / π`, nats per joule.
pub fn ee_objective<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> T {
    sum_throughput(p, w, ch, sp) / consumption_power(p, w, ch, sp)
}

/// One named constraint slack; negative means violated.
#[derive(Clone, Debug)]
pub struct ConstraintSlack<T> {
    pub constraint: String,
    pub slack: T,
}

/// Slack of every checked constraint.
#[derive(Clone, Debug)]
pub struct FeasReport<T> {
    pub slacks: Vec<ConstraintSlack<T>>,
}

impl<T: Real> FeasReport<T> {
    pub fn ok(&self) -> bool {
        self.ok_within(T::zero())
    }

    pub fn ok_within(&self, tol: T) -> bool {
        self.slacks.iter().all(|s| s.slack >= -tol)
    }

    /// Constraints with negative slack.
    pub fn violations(&self) -> Vec<&ConstraintSlack<T>> {
        self.slacks.iter().filter(|s| s.slack < T::zero()).collect()
    }

    pub fn worst(&self) -> T {
        self.slacks
            .iter()
            .map(|s| s.slack)
            .fold(T::infinity(), T::min)
    }
}

/// Relay indices that share one per-relay power cap.  Two-way networks cap
/// each relay alone; the one-way embedding caps each physical relay's two
/// stage beamformers jointly.
pub fn two_way_cap_groups(relays: usize) -> Vec<Vec<usize>> {
    (0..relays).map(|m| vec![m]).collect()
}

/// Check the power constraints (and optionally the QoS floors) of the
/// two-way design problem.
pub fn feasible<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    include_qos: bool,
) -> FeasReport<T> {
    feasible_grouped(
        p,
        w,
        ch,
        sp,
        &two_way_cap_groups(ch.dims.relays),
        include_qos,
    )
}

/// Feasibility with explicit relay cap groups (used by the one-way
/// embedding, where a physical relay's cap covers both of its stages).
pub fn feasible_grouped<T: Real>(
    p: &PowerAlloc<T>,
    w: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    cap_groups: &[Vec<usize>],
    include_qos: bool,
) -> FeasReport<T> {
    let mut slacks = Vec::new();
    for k in 0..ch.dims.users() {
        slacks.push(ConstraintSlack {
            constraint: format!("user_power[{k}]"),
            slack: sp.p_u_max - p.p[k],
        });
    }
    slacks.push(ConstraintSlack {
        constraint: "user_power_sum".into(),
        slack: sp.p_sum_u_max - p.total(),
    });
    let tx: Vec<T> = (0..ch.dims.relays)
        .map(|m| relay_tx_power(p, w, ch, sp, m))
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
    if include_qos {
        for k in 0..ch.dims.pairs {
            slacks.push(ConstraintSlack {
                constraint: format!("pair_qos[{k}]"),
                slack: pair_throughput(p, w, ch, sp, k) - sp.r[k],
            });
        }
    }
    FeasReport { slacks }
}

// --- One-way relaying -----------------------------------------------------

/// SINR under one-way relaying.  Users `0..K` transmit in stage one through
/// the beamformers `w1`; users `K..2K` transmit in stage two through `w2`.
/// Receivers only see interference from their own stage's transmitters and
/// have no self-interference term.
pub fn oneway_sinr<T: Real>(
    p: &PowerAlloc<T>,
    w1: &Beamformers<T>,
    w2: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    k: usize,
) -> T {
    let pairs = ch.dims.pairs;
    assert!(k < 2 * pairs, "user index out of range");
    let (w, tx_range) = if k < pairs {
        (w2, pairs..2 * pairs)
    } else {
        (w1, 0..pairs)
    };
    let chi = partner(k, pairs);
    let num = p.p[chi] * link_coeff(w, ch, k, chi).norm_sqr();
    let mut den = sp.sigma_r2 * norm_sq(&relay_rows(w, ch, k)) + sp.sigma_k2[k];
    for l in tx_range {
        if l == chi {
            continue;
        }
        den += p.p[l] * link_coeff(w, ch, k, l).norm_sqr();
    }
    num / den
}

/// Combined two-stage transmit power of relay `m` under one-way relaying.
pub fn oneway_relay_tx_power<T: Real>(
    p: &PowerAlloc<T>,
    w1: &Beamformers<T>,
    w2: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    m: usize,
) -> T {
    let pairs = ch.dims.pairs;
    let mut tx = sp.sigma_r2 * (w1.w[m].fro_sq() + w2.w[m].fro_sq());
    for l in 0..pairs {
        tx += p.p[l] * norm_sq(&w1.w[m].mul_vec(ch.h(l, m)));
        tx += p.p[l + pairs] * norm_sq(&w2.w[m].mul_vec(ch.h(l + pairs, m)));
    }
    tx
}

/// Per-pair one-way rate without the half pre-log, `ln(1+γ̃_k) + ln(1+γ̃_{K+k})`,
/// which is the quantity the QoS floors compare against.
pub fn oneway_pair_rate<T: Real>(
    p: &PowerAlloc<T>,
    w1: &Beamformers<T>,
    w2: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
    pair: usize,
) -> T {
    (T::one() + oneway_sinr(p, w1, w2, ch, sp, pair)).ln()
        + (T::one() + oneway_sinr(p, w1, w2, ch, sp, pair + ch.dims.pairs)).ln()
}

/// One-way energy efficiency.  The numerator carries the pre-log factor 1/2
/// for the two stages; the denominator charges both stages' relay transmit
/// power and a doubled relay circuit term.
pub fn oneway_ee<T: Real>(
    p: &PowerAlloc<T>,
    w1: &Beamformers<T>,
    w2: &Beamformers<T>,
    ch: &ChannelSet<T>,
    sp: &ScenarioParams<T>,
) -> T {
    let dims = ch.dims;
    let rate: T = (0..dims.pairs)
        .map(|k| oneway_pair_rate(p, w1, w2, ch, sp, k))
        .sum();
    let relay_tx: T = (0..dims.relays)
        .map(|m| oneway_relay_tx_power(p, w1, w2, ch, sp, m))
        .sum();
    let circuit = T::of(2.0) * T::of(dims.relays as f64) * T::of(dims.antennas as f64) * sp.p_r
        + T::of(dims.users() as f64) * sp.p_u_circ;
    T::of(0.5) * rate / (sp.zeta * (p.total() + relay_tx) + circuit)
}

// --- One-way embedding into the two-way machinery --------------------------
//
// One-way relaying is solved with the same pipeline by doubling the relay
// set: virtual relays `0..M` carry the stage-one beamformers and only see
// the stage-one transmitters/receivers, virtual relays `M..2M` carry stage
// two.  Zeroing the cross-stage channel vectors makes the one-way SINR,
// power and consumption formulas coincide with the two-way ones evaluated
// on the virtual network (the doubled relay count also doubles the relay
// circuit power, as the one-way model requires).

/// Channels of the virtual 2M-relay network that embeds one-way relaying.
pub fn oneway_virtual_channels<T: Real>(ch: &ChannelSet<T>) -> ChannelSet<T> {
    let dims = ch.dims;
    let vdims = Dimensions::new(dims.pairs, 2 * dims.relays, dims.antennas);
    let zero = vec![C::new(T::zero(), T::zero()); dims.antennas];
    let mut h = Vec::with_capacity(vdims.users());
    for l in 0..dims.users() {
        let mut per_relay = Vec::with_capacity(vdims.relays);
        for m in 0..dims.relays {
            // stage one hears only users 0..K
            per_relay.push(if l < dims.pairs {
                ch.h(l, m).to_vec()
            } else {
                zero.clone()
            });
        }
        for m in 0..dims.relays {
            per_relay.push(if l >= dims.pairs {
                ch.h(l, m).to_vec()
            } else {
                zero.clone()
            });
        }
        h.push(per_relay);
    }
    let mut f = Vec::with_capacity(vdims.relays);
    for m in 0..dims.relays {
        // stage one serves only users K..2K
        f.push(
            (0..dims.users())
                .map(|k| {
                    if k >= dims.pairs {
                        ch.f(m, k).to_vec()
                    } else {
                        zero.clone()
                    }
                })
                .collect(),
        );
    }
    for m in 0..dims.relays {
        f.push(
            (0..dims.users())
                .map(|k| {
                    if k < dims.pairs {
                        ch.f(m, k).to_vec()
                    } else {
                        zero.clone()
                    }
                })
                .collect(),
        );
    }
    ChannelSet::new(vdims, h, f)
}

/// Cap groups of the virtual network: physical relay `m`'s cap covers its
/// stage-one slot `m` and stage-two slot `M+m`.
pub fn oneway_cap_groups(relays: usize) -> Vec<Vec<usize>> {
    (0..relays).map(|m| vec![m, m + relays]).collect()
}

/// Split a virtual-network beamformer set back into the per-stage sets.
pub fn split_oneway_beamformers<T: Real>(w: &Beamformers<T>) -> (Beamformers<T>, Beamformers<T>) {
    let relays = w.relays() / 2;
    assert_eq!(w.relays(), 2 * relays, "virtual set must have even size");
    (
        Beamformers::new(w.w[..relays].to_vec()),
        Beamformers::new(w.w[relays..].to_vec()),
    )
}
