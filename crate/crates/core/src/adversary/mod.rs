//! Adversarial trajectories for interleaved regulators: the three-flow
//! "Spring" construction whose delay grows without bound, the variant with a
//! FIFO upstream system, the insertion trajectory that delays a fourth flow's
//! first packet past any bound, and the single-flow overdrive sequence.
//!
//! Per period `k` (offsets shifted by `kτ`, all sizes `b`):
//!
//! | packet | A time   | flow | upstream delay | B time     |
//! |--------|----------|------|----------------|------------|
//! | 1      | d        | f1   | d              | 2d         |
//! | 2      | I+ε      | f2   | d              | I+ε+d      |
//! | 3      | d+I      | f1   | 0              | d+I        |
//! | 4      | 2I+ε     | f2   | d              | 2I+ε+d     |
//! | 5      | 2I+2ε    | f3   | d              | 2I+2ε+d    |
//! | 6      | 3I+2ε    | f3   | d              | 3I+2ε+d    |
//!
//! Sorted by time, B lists f1, f1, f2, f2, f3, f3. At B, f1's two packets are
//! `I − d` apart (it needs burst `2b − r(I − d)`), f2 and f3 stay `I` apart,
//! and `ε` separates consecutive periods.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::minplus::leaky_bucket;
use crate::q::Q;
use crate::regulators::IrConfig;
use crate::traffic::{
    check_arrival_curve, is_fifo, is_fifo_per_flow, lossless, packet_delays, FlowContract, FlowId, Packet,
    PacketSequence,
};

pub const F1: FlowId = FlowId(1);
pub const F2: FlowId = FlowId(2);
pub const F3: FlowId = FlowId(3);
/// The flow whose first packet is delayed in [`trajectory_xm`].
pub const G: FlowId = FlowId(4);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} must lie strictly between 0 and 1")]
    Fraction(&'static str),
    #[error("need 0 < d < min(I, Dcap), got d = {d}, I = {i}, Dcap = {dcap}")]
    Delay { d: Q, i: Q, dcap: Q },
    #[error("need 0 < eps < min(I − d, d/3), got eps = {eps}, bound {bound}")]
    Eps { eps: Q, bound: Q },
    #[error("inconsistent derived field {0}")]
    Derived(&'static str),
}

/// Constants of the Spring construction. `i = b/r`, `tau = 3I + 3ε − d`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SpringParams {
    pub r: Q,
    pub b: Q,
    /// Delay bound of the upstream system.
    pub dcap: Q,
    pub i: Q,
    pub d: Q,
    pub eps: Q,
    pub tau: Q,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    r: Q,
    b: Q,
    dcap: Q,
    d: Q,
    eps: Q,
    i: Option<Q>,
    tau: Option<Q>,
}

impl TryFrom<RawParams> for SpringParams {
    type Error = ParamError;

    fn try_from(raw: RawParams) -> Result<SpringParams, ParamError> {
        let p = SpringParams::explicit(raw.r, raw.b, raw.dcap, raw.d, raw.eps)?;
        if raw.i.is_some_and(|i| i != p.i) {
            return Err(ParamError::Derived("i"));
        }
        if raw.tau.is_some_and(|t| t != p.tau) {
            return Err(ParamError::Derived("tau"));
        }
        Ok(p)
    }
}

impl SpringParams {
    /// Parameters with explicit `d` and `eps`.
    pub fn explicit(r: Q, b: Q, dcap: Q, d: Q, eps: Q) -> Result<SpringParams, ParamError> {
        for (name, v) in [("r", r), ("b", b), ("dcap", dcap)] {
            if !v.is_positive() {
                return Err(ParamError::NonPositive(name));
            }
        }
        let i = b / r;
        if !d.is_positive() || d >= i.min(dcap) {
            return Err(ParamError::Delay { d, i, dcap });
        }
        let bound = (i - d).min(d / Q::int(3));
        if !eps.is_positive() || eps >= bound {
            return Err(ParamError::Eps { eps, bound });
        }
        let tau = Q::int(3) * i + Q::int(3) * eps - d;
        Ok(SpringParams { r, b, dcap, i, d, eps, tau })
    }

    /// `3I − τ = d − 3ε`: delay gained by packet `6k+1` per period.
    pub fn increment(&self) -> Q {
        Q::int(3) * self.i - self.tau
    }

    /// The common contract `γ_{r,b}` for flow `f`.
    pub fn contract(&self, f: FlowId) -> FlowContract {
        FlowContract::new(f, self.r, self.b)
    }

    /// Regulator configuration: `γ_{r,b}` for f1, f2, f3 and [`G`].
    pub fn ir_config(&self) -> IrConfig {
        IrConfig::new([F1, F2, F3, G].map(|f| self.contract(f)))
    }

    /// Burst `2b − r(I − d)` that flow f1 needs at the regulator input.
    pub fn f1_burst_at_b(&self) -> Q {
        Q::int(2) * self.b - self.r * (self.i - self.d)
    }
}

/// `d = d_fraction·min(I, Dcap)`, `eps = eps_fraction·min(I − d, d/3)`.
pub fn spring_params(r: Q, b: Q, dcap: Q, d_fraction: Q, eps_fraction: Q) -> Result<SpringParams, ParamError> {
    for (name, v) in [("d_fraction", d_fraction), ("eps_fraction", eps_fraction)] {
        if !v.is_positive() || v >= Q::ONE {
            return Err(ParamError::Fraction(name));
        }
    }
    for (name, v) in [("r", r), ("b", b), ("dcap", dcap)] {
        if !v.is_positive() {
            return Err(ParamError::NonPositive(name));
        }
    }
    let i = b / r;
    let d = d_fraction * i.min(dcap);
    let eps = eps_fraction * (i - d).min(d / Q::int(3));
    SpringParams::explicit(r, b, dcap, d, eps)
}

/// [`spring_params`] with `d_fraction = 17/20`, `eps_fraction = 1/3`.
pub fn spring_params_default(r: Q, b: Q, dcap: Q) -> Result<SpringParams, ParamError> {
    spring_params(r, b, dcap, Q::new(17, 20), Q::new(1, 3))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryLabel {
    /// Upstream system reorders packets across flows.
    Trajectory1,
    /// Same regulator input, produced by a FIFO upstream system.
    Trajectory2,
}

impl fmt::Display for TrajectoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrajectoryLabel::Trajectory1 => "trajectory1",
            TrajectoryLabel::Trajectory2 => "trajectory2",
        })
    }
}

/// Source output `a`, regulator input `b`, and the upstream delay of each
/// packet of `a` under per-flow pairing.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TrajectoryBundle {
    pub a: PacketSequence,
    pub b: PacketSequence,
    pub s_delays: Vec<Q>,
    pub params: SpringParams,
    pub label: TrajectoryLabel,
}

const A_FLOWS: [FlowId; 6] = [F1, F2, F1, F2, F3, F3];
const S1_DELAYED: [bool; 6] = [true, true, false, true, true, true];

/// Source times of one period, before the `kτ` shift.
fn a_offsets(p: &SpringParams) -> [Q; 6] {
    let (i, e, d) = (p.i, p.eps, p.d);
    let two = Q::int(2);
    [d, i + e, d + i, two * i + e, two * i + two * e, Q::int(3) * i + two * e]
}

fn source(p: &SpringParams, n_periods: usize) -> Vec<Packet> {
    let offs = a_offsets(p);
    (0..n_periods as i128)
        .flat_map(|k| (0..6).map(move |s| Packet::new(Q::int(k) * p.tau + offs[s], p.b, A_FLOWS[s])))
        .collect()
}

/// Trajectory whose upstream system delays every packet but the third of each
/// period by `d`, so f1's second packet overtakes f2's first.
pub fn trajectory1(p: &SpringParams, n_periods: usize) -> TrajectoryBundle {
    let a = source(p, n_periods);
    let s_delays: Vec<Q> = (0..a.len()).map(|n| if S1_DELAYED[n % 6] { p.d } else { Q::ZERO }).collect();
    let b: Vec<Packet> = a.iter().zip(&s_delays).map(|(x, s)| Packet::new(x.time + *s, x.size, x.flow)).collect();
    TrajectoryBundle {
        a: PacketSequence::new(a).expect("source times increase"),
        b: PacketSequence::from_unsorted(b).expect("valid packets"),
        s_delays,
        params: *p,
        label: TrajectoryLabel::Trajectory1,
    }
}

/// Same B times as [`trajectory1`], with the flows of B packets `6k+2` and
/// `6k+3` exchanged so the upstream system is FIFO.
pub fn trajectory2(p: &SpringParams, n_periods: usize) -> TrajectoryBundle {
    let t1 = trajectory1(p, n_periods);
    let mut b: Vec<Packet> = t1.b.packets().to_vec();
    for k in 0..n_periods {
        b[6 * k + 1].flow = F2;
        b[6 * k + 2].flow = F1;
    }
    let b = PacketSequence::new(b).expect("times unchanged");
    let s_delays = packet_delays(&t1.a, &b).expect("same packets");
    TrajectoryBundle { a: t1.a, b, s_delays, params: *p, label: TrajectoryLabel::Trajectory2 }
}

/// The regulator input of [`trajectory1`], fed directly to the regulator.
pub fn trajectory3(p: &SpringParams, n_periods: usize) -> PacketSequence {
    trajectory1(p, n_periods).b
}

/// [`trajectory3`] with one extra packet inserted at 0-based position `index`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct XmTrajectory {
    pub seq: PacketSequence,
    pub k: i128,
    pub index: usize,
    /// `(d − I) + k(d − 3ε)`, a lower bound on the inserted packet's delay
    /// through the regulator; at least `M`.
    pub delay_bound: Q,
}

/// Inserts a packet of flow `g` and size `l_g` midway between B packets
/// `6k+1` and `6k+2` (1-based), `k = ⌈(M − d + I)/(d − 3ε)⌉ + 1`.
pub fn trajectory_xm(p: &SpringParams, m: Q, l_g: Q, g: FlowId) -> XmTrajectory {
    assert!(m.is_positive(), "M must be positive");
    assert!(l_g.is_positive() && l_g <= p.b, "inserted packet must fit the burst");
    let k = ((m - p.d + p.i) / p.increment()).ceil() + 1;
    let base = trajectory3(p, k as usize + 1);
    let at = 6 * k as usize;
    let mut packets = base.packets().to_vec();
    let t = packets[at].time.mid(packets[at + 1].time);
    packets.insert(at + 1, Packet::new(t, l_g, g));
    XmTrajectory {
        seq: PacketSequence::new(packets).expect("midpoint keeps order"),
        k,
        index: at + 1,
        delay_bound: (p.d - p.i) + Q::int(k) * p.increment(),
    }
}

/// `n` packets of size `b_f` spaced `I_f/2` apart, starting at 0.
pub fn overdrive_trajectory(f: FlowId, contract: &FlowContract, n: usize) -> PacketSequence {
    assert!(n >= 1, "need at least one packet");
    let half = contract.burst / contract.rate / Q::int(2);
    PacketSequence::new((0..n).map(|k| Packet::new(half * Q::int(k as i128), contract.burst, f)).collect())
        .expect("increasing times")
}

/// One named premise and its outcome.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub items: Vec<CheckItem>,
}

impl ConstraintReport {
    fn push(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.items.push(CheckItem { name: name.to_string(), pass, detail: detail.into() });
    }

    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.items.iter().filter(|i| !i.pass).map(|i| i.name.as_str()).collect()
    }
}

/// Checks the premises of the construction on a bundle: source conformance
/// to `γ_{r,b}` per flow, losslessness, per-flow order, the recorded upstream
/// delays, the delay bound `d < Dcap`, the expected global order for the
/// label, and the fixed time gaps of every period.
pub fn constraint_check(bundle: &TrajectoryBundle) -> ConstraintReport {
    let p = &bundle.params;
    let (a, b) = (&bundle.a, &bundle.b);
    let mut rep = ConstraintReport::default();

    let gamma = leaky_bucket(p.r, p.b).expect("positive parameters");
    let bad: Vec<String> = a
        .flows()
        .into_iter()
        .filter_map(|f| check_arrival_curve(a, &gamma, Some(f)).err().map(|v| format!("flow {f}: {v}")))
        .collect();
    rep.push("source_conformance", bad.is_empty(), bad.join("; "));

    let same = lossless(a, b);
    rep.push("lossless", same, "");
    rep.push("fifo_per_flow", same && is_fifo_per_flow(a, b).unwrap_or(false), "");
    let fifo = same && is_fifo(a, b).unwrap_or(false);
    let want_fifo = bundle.label == TrajectoryLabel::Trajectory2;
    rep.push("global_order", fifo == want_fifo, format!("fifo = {fifo}, expected {want_fifo}"));

    let measured = packet_delays(a, b).ok();
    rep.push("s_delays_recorded", measured.as_deref() == Some(bundle.s_delays.as_slice()), "");
    let over: Vec<usize> =
        bundle.s_delays.iter().enumerate().filter(|(_, s)| s.is_negative() || **s > p.d).map(|(n, _)| n + 1).collect();
    rep.push("delay_bound", over.is_empty() && p.d < p.dcap, format!("packets above d: {over:?}"));

    let ta = a.times();
    rep.push("source_strictly_increasing", ta.windows(2).all(|w| w[0] < w[1]), "");

    let tb = b.times();
    let periods = ta.len().min(tb.len()) / 6;
    let whole = ta.len() == 6 * periods && tb.len() == 6 * periods && periods > 0;
    rep.push("whole_periods", whole, format!("{} source packets", ta.len()));
    let equalities: [(&str, Q, fn(&[Q], &[Q], usize) -> Option<Q>); 5] = [
        ("a2_minus_a1", p.i + p.eps - p.d, |a, _, o| Some(a[o + 1] - a[o])),
        ("a3_minus_a1", p.i, |a, _, o| Some(a[o + 2] - a[o])),
        ("next_a1_minus_a3", p.tau - p.i, |a, _, o| a.get(o + 6).map(|n| *n - a[o + 2])),
        ("b3_minus_a2", p.d, |a, b, o| Some(b[o + 2] - a[o + 1])),
        ("b2_minus_a3", Q::ZERO, |a, b, o| Some(b[o + 1] - a[o + 2])),
    ];
    for (name, want, gap) in equalities {
        let off: Vec<usize> = (0..periods).filter(|k| gap(&ta, &tb, 6 * k).is_some_and(|v| v != want)).collect();
        rep.push(name, whole && off.is_empty(), format!("periods off: {off:?}"));
    }
    rep
}

/// First `h` (0-based) where departures break `D_{2h+1} ≥ B_1 + hI` or
/// `D_{2h+2} ≥ B_1 + hI + I`.
pub fn departure_floor_violation(arrivals: &PacketSequence, departures: &[Q], i: Q) -> Option<usize> {
    let b1 = arrivals.packets().first()?.time;
    departures.iter().enumerate().find_map(|(n, d)| {
        let h = Q::int((n / 2) as i128);
        let bound = b1 + h * i + if n % 2 == 1 { i } else { Q::ZERO };
        (*d < bound).then_some(n / 2)
    })
}

#[cfg(test)]
mod tests;
