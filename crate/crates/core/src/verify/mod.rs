//! Checkers for service-curve claims on concrete trajectories, the FIFO
//! residual pipeline, and the experiments and randomized suites built on them.
//!
//! Universal statements over continuous time are reduced to finite candidate
//! sets. Cumulative functions of packet sequences are left-continuous step
//! functions, so every check below is exact for them: the candidates are the
//! event instants together with one-sided limits.

mod experiments;
mod suites;

pub use experiments::{
    default_theta_grid, inserted_packet_experiment, residual_rate_experiment, InsertedPacketReport, ResidualRateReport,
    ThetaOutcome,
};
pub use suites::{
    equivalence_suite, pfr_suite, random_ir_instance, strict_sc_suite, suite_rng, EquivalenceSummary, PfrSummary,
    StrictScFailure, StrictScSummary,
};

use serde::{Deserialize, Serialize};

use crate::minplus::{first_reach, max_plus_deconv, pointwise_min, zero, Curve, CurveError, Segment, Tail};
use crate::q::{Ext, Q};
use crate::traffic::{cumulative_of, packet_delays, PacketSequence, TrafficError};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("cumulative functions must be step functions (zero slopes, finite affine tail)")]
    NotStep,
    #[error("output exceeds input at {t} by {excess}")]
    Causality { t: Q, excess: Q },
    #[error("{backlog} units are still backlogged after the last event")]
    Unfinished { backlog: Q },
    #[error("curve must be wide-sense increasing")]
    NotIncreasing,
    #[error("curve must be 0 at 0")]
    NotInF0,
    #[error("curve must be finite everywhere")]
    InfiniteCurve,
    #[error("need at least {needed} periods, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("per-period delay growth is not eventually affine; differences {0:?}")]
    NonAffine(Vec<Q>),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Regulator(#[from] crate::regulators::RegulatorError),
}

/// Maximal interval `(start, end]` on which the backlog is positive.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BackloggedPeriod {
    pub start: Q,
    pub end: Q,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violation,
}

/// A violated instance of a claim: `lhs < rhs` at `(s, t)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub s: Q,
    pub t: Q,
    pub lhs: Q,
    pub rhs: Q,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub claim: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl CheckReport {
    fn pass(claim: &str) -> CheckReport {
        CheckReport { claim: claim.to_string(), verdict: Verdict::Pass, witness: None }
    }

    fn violation(claim: &str, w: Witness) -> CheckReport {
        debug_assert!(w.lhs < w.rhs);
        CheckReport { claim: claim.to_string(), verdict: Verdict::Violation, witness: Some(w) }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub const STRICT_SC: &str = "strict_service_curve";
pub const SC: &str = "service_curve";

fn is_step(f: &Curve) -> bool {
    f.tail() == Tail::Affine && f.segments().iter().all(|s| s.slope.is_zero())
}

fn fin(x: Ext) -> Q {
    x.fin().expect("finite cumulative value")
}

fn merged_breakpoints(a: &Curve, b: &Curve) -> Vec<Q> {
    let mut xs: Vec<Q> = a.segments().iter().chain(b.segments()).map(|s| s.t).collect();
    xs.sort();
    xs.dedup();
    xs
}

/// Backlogged periods of a causal lossless system with cumulative input
/// `inflow` and output `outflow`.
pub fn backlogged_periods(inflow: &Curve, outflow: &Curve) -> Result<Vec<BackloggedPeriod>, VerifyError> {
    if !is_step(inflow) || !is_step(outflow) {
        return Err(VerifyError::NotStep);
    }
    let xs = merged_breakpoints(inflow, outflow);
    let mut out = Vec::new();
    let mut open: Option<Q> = None;
    for (i, x) in xs.iter().enumerate() {
        let at = fin(inflow.eval(*x)) - fin(outflow.eval(*x));
        if at.is_negative() {
            return Err(VerifyError::Causality { t: *x, excess: -at });
        }
        // Backlog on (x, next], constant for step functions.
        let after = fin(inflow.eval_right(*x)) - fin(outflow.eval_right(*x));
        if after.is_negative() {
            return Err(VerifyError::Causality { t: *x, excess: -after });
        }
        match (open, after.is_positive()) {
            (None, true) => open = Some(*x),
            (Some(start), false) => {
                out.push(BackloggedPeriod { start, end: *x });
                open = None;
            }
            _ => {}
        }
        if i + 1 == xs.len() && after.is_positive() {
            return Err(VerifyError::Unfinished { backlog: after });
        }
    }
    Ok(out)
}

fn check_beta(beta: &Curve) -> Result<(), VerifyError> {
    if !beta.is_increasing() {
        return Err(VerifyError::NotIncreasing);
    }
    if !beta.is_in_f0() {
        return Err(VerifyError::NotInF0);
    }
    Ok(())
}

/// Checks `R^D(t) − R^D(s) ≥ β(t − s)` for every `]s, t]` inside a backlogged
/// period.
///
/// With `R^D` constant on each `(τ_i, τ_{i+1}]` between output events and `β`
/// increasing, the worst `t` in a cell is its right end, and the worst `s` is
/// either an event instant or the limit `τ_i⁺` (checked against `β((t−τ_i)⁻)`).
/// A violation found at a limit is turned into a concrete `s` inside the cell.
pub fn check_strict_sc(inflow: &Curve, outflow: &Curve, beta: &Curve) -> Result<CheckReport, VerifyError> {
    check_beta(beta)?;
    if beta.tail() == Tail::Infinite {
        return Err(VerifyError::InfiniteCurve);
    }
    for period in backlogged_periods(inflow, outflow)? {
        let mut pts = vec![period.start];
        pts.extend(outflow.segments().iter().map(|s| s.t).filter(|t| *t > period.start && *t <= period.end));
        if *pts.last().unwrap() != period.end {
            pts.push(period.end);
        }
        let at: Vec<Q> = pts.iter().map(|x| fin(outflow.eval(*x))).collect();
        let right: Vec<Q> = pts.iter().map(|x| fin(outflow.eval_right(*x))).collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (s, t) = (pts[i], pts[j]);
                let gap = t - s;
                let lhs = at[j] - at[i];
                if let Ext::Fin(rhs) = beta.eval(gap) {
                    if lhs < rhs {
                        return Ok(CheckReport::violation(STRICT_SC, Witness { s, t, lhs, rhs }));
                    }
                }
                let lhs = at[j] - right[i];
                if beta.eval_left(gap) > Ext::Fin(lhs) {
                    return Ok(CheckReport::violation(STRICT_SC, refine_right_limit(beta, s, pts[i + 1], t, lhs)));
                }
            }
        }
    }
    Ok(CheckReport::pass(STRICT_SC))
}

/// A point `s' ∈ (s, cell_end)` with `β(t − s') > lhs`, given that the left
/// limit of `β` at `t − s` exceeds `lhs`.
fn refine_right_limit(beta: &Curve, s: Q, cell_end: Q, t: Q, lhs: Q) -> Witness {
    let mut h = (cell_end.min(t) - s) / Q::int(2);
    for _ in 0..256 {
        if let Ext::Fin(rhs) = beta.eval(t - s - h) {
            if rhs > lhs {
                return Witness { s: s + h, t, lhs, rhs };
            }
        }
        h = h / Q::int(2);
    }
    unreachable!("left limit exceeds {lhs} but no nearby point does")
}

/// Re-checks a strict service-curve witness from scratch: `(s, t]` lies in
/// one backlogged period and the output increment is below `β(t − s)`.
pub fn revalidate_strict(inflow: &Curve, outflow: &Curve, beta: &Curve, w: &Witness) -> Result<bool, VerifyError> {
    let inside = backlogged_periods(inflow, outflow)?.iter().any(|p| p.start <= w.s && w.s < w.t && w.t <= p.end);
    let lhs = fin(outflow.eval(w.t)) - fin(outflow.eval(w.s));
    Ok(inside && lhs == w.lhs && beta.eval(w.t - w.s) == Ext::Fin(w.rhs) && w.lhs < w.rhs)
}

/// `(f ⊗ g)(t) = inf_{0≤s≤t} f(s) + g(t − s)`, evaluated directly from the
/// breakpoints of both curves and the one-sided limits at each of them.
pub fn conv_at(f: &Curve, g: &Curve, t: Q) -> (Ext, Q) {
    let mut cands: Vec<Q> = vec![Q::ZERO, t];
    cands.extend(f.breakpoints_until(t));
    cands.extend(g.breakpoints_until(t).into_iter().map(|x| t - x));
    cands.sort();
    cands.dedup();
    let mut best = (Ext::Inf, Q::ZERO);
    let mut take = |v: Ext, s: Q| {
        if v < best.0 {
            best = (v, s);
        }
    };
    for s in cands {
        take(f.eval(s) + g.eval(t - s), s);
        if s < t {
            take(f.eval_right(s) + g.eval_left(t - s), s);
        }
        if s.is_positive() {
            take(f.eval_left(s) + g.eval_right(t - s), s);
        }
    }
    best
}

/// Checks `R^D(t) ≥ (R^B ⊗ β)(t)` for all `t ≥ 0`.
///
/// The convolution is non-decreasing and `R^D` is constant between its
/// breakpoints, so it suffices to compare at each output breakpoint; after the
/// last one `R^D` holds the total, which bounds the convolution from above.
pub fn check_sc(inflow: &Curve, outflow: &Curve, beta: &Curve) -> Result<CheckReport, VerifyError> {
    check_beta(beta)?;
    if !is_step(inflow) || !is_step(outflow) {
        return Err(VerifyError::NotStep);
    }
    for t in outflow.segments().iter().map(|s| s.t) {
        let lhs = fin(outflow.eval(t));
        if let (Ext::Fin(rhs), s) = conv_at(inflow, beta, t) {
            if lhs < rhs {
                return Ok(CheckReport::violation(SC, Witness { s, t, lhs, rhs }));
            }
        }
    }
    Ok(CheckReport::pass(SC))
}

/// Packet-level front end for [`check_strict_sc`].
pub fn check_strict_sc_packets(
    arrivals: &PacketSequence,
    departures: &PacketSequence,
    beta: &Curve,
) -> Result<CheckReport, VerifyError> {
    check_strict_sc(&cumulative_of(arrivals, None), &cumulative_of(departures, None), beta)
}

/// Packet-level front end for [`check_sc`].
pub fn check_sc_packets(
    arrivals: &PacketSequence,
    departures: &PacketSequence,
    beta: &Curve,
) -> Result<CheckReport, VerifyError> {
    check_sc(&cumulative_of(arrivals, None), &cumulative_of(departures, None), beta)
}

/// Raw residual `t ↦ |β(t) − α(t − θ)|⁺·1{t > θ}` and its non-decreasing
/// lower closure `t ↦ inf_{s≥t}` of it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Residual {
    pub raw: Curve,
    pub closure: Curve,
}

fn slope_after(f: &Curve, x: Q, next: Option<Q>) -> Q {
    match next {
        Some(n) => (fin(f.eval_left(n)) - fin(f.eval_right(x))) / (n - x),
        None => f.segments().last().unwrap().slope,
    }
}

/// Appends the positive part of a piece: value `v` at `x`, then the line
/// starting at `right` with `slope` up to `next`.
fn push_clipped(segs: &mut Vec<Segment>, x: Q, v: Q, right: Q, slope: Q, next: Option<Q>) {
    let v = v.pos();
    if right.is_negative() {
        let cross = slope.is_positive().then(|| x - right / slope).filter(|c| next.is_none_or(|n| *c < n));
        segs.push(Segment::new(x, v, Q::ZERO, -v));
        if let Some(c) = cross {
            segs.push(Segment::new(c, Q::ZERO, slope, Q::ZERO));
        }
    } else {
        let cross = slope.is_negative().then(|| x - right / slope).filter(|c| next.is_none_or(|n| *c < n));
        segs.push(Segment::new(x, v, slope, right - v));
        if let Some(c) = cross {
            if c > x {
                segs.push(Segment::new(c, Q::ZERO, Q::ZERO, Q::ZERO));
            } else {
                let last = segs.last_mut().unwrap();
                last.slope = Q::ZERO;
            }
        }
    }
}

/// The FIFO residual service curve for one flow given the aggregate service
/// curve `beta` and the summed arrival curve of the other flows.
///
/// Both curves must have an affine or infinite tail (`beta`) and an affine
/// tail (`alpha_others`); the result is then exact on all of `t ≥ 0`.
pub fn fifo_residual(beta: &Curve, alpha_others: &Curve, theta: Q) -> Result<Residual, VerifyError> {
    assert!(!theta.is_negative(), "theta must be non-negative");
    if beta.is_periodic() || beta.horizon().is_some() {
        return Err(CurveError::NeedsHorizon.into());
    }
    if alpha_others.tail() != Tail::Affine {
        return Err(CurveError::NeedsHorizon.into());
    }
    let mut xs: Vec<Q> = vec![Q::ZERO, theta];
    xs.extend(beta.segments().iter().map(|s| s.t));
    xs.extend(alpha_others.segments().iter().map(|s| s.t + theta));
    xs.sort();
    xs.dedup();
    let mut segs: Vec<Segment> = Vec::new();
    let mut infinite = false;
    for (i, x) in xs.iter().copied().enumerate() {
        let next = xs.get(i + 1).copied();
        if x < theta {
            segs.push(Segment::new(x, Q::ZERO, Q::ZERO, Q::ZERO));
            continue;
        }
        let v = if x == theta {
            Q::ZERO
        } else {
            match beta.eval(x) {
                Ext::Fin(b) => b - fin(alpha_others.eval(x - theta)),
                Ext::Inf => unreachable!("infinite values start after the last breakpoint"),
            }
        };
        let Ext::Fin(br) = beta.eval_right(x) else {
            segs.push(Segment::new(x, v.pos(), Q::ZERO, Q::ZERO));
            infinite = true;
            break;
        };
        let right = br - fin(alpha_others.eval_right(x - theta));
        let slope = slope_after(beta, x, next) - slope_after(alpha_others, x - theta, next.map(|n| n - theta));
        push_clipped(&mut segs, x, v, right, slope, next);
    }
    let raw = Curve::new(segs, if infinite { Tail::Infinite } else { Tail::Affine })?;
    let closure =
        if infinite { lower_closure_infinite(&raw)? } else { max_plus_deconv(&raw, &zero(), raw.transient_end())? };
    Ok(Residual { raw, closure })
}

/// `inf_{s≥t} f(s)` for a curve that is `+∞` after its last point: computed
/// on the finite part, then `+∞` beyond it.
fn lower_closure_infinite(f: &Curve) -> Result<Curve, VerifyError> {
    let last = f.transient_end();
    let segs = f.segments();
    if segs.len() == 1 {
        return Ok(f.clone());
    }
    let finite = Curve::new(segs[..segs.len() - 1].to_vec(), Tail::Horizon(last))?;
    let at_last = fin(f.eval(last));
    let floor = Curve::new(vec![Segment::new(Q::ZERO, at_last, Q::ZERO, Q::ZERO)], Tail::Horizon(last))?;
    let body = pointwise_min(&max_plus_deconv(&finite, &zero(), last)?, &floor)?;
    let mut out: Vec<Segment> = body.segments().iter().copied().filter(|s| s.t < last).collect();
    out.push(Segment::new(last, at_last, Q::ZERO, Q::ZERO));
    Ok(Curve::new(out, Tail::Infinite)?)
}

/// `inf{t ≥ 0 : β_g(t) ≥ L}`: a bound on the delay of a flow's first packet
/// of size `L` under the individual service curve `β_g`.
pub fn first_packet_delay_bound(beta_g: &Curve, l: Q) -> Ext {
    first_reach(beta_g, l)
}

/// `inf{t ≥ 0 : f(t) > level}` for a non-decreasing `f`, `+∞` if `f` stays at
/// or below `level` (or within a finite horizon).
pub fn first_exceed(f: &Curve, level: Q) -> Ext {
    let f = match f.tail() {
        Tail::Periodic { start, period, increment } => {
            let base = fin(f.eval(start));
            let k = if increment.is_positive() { ((level - base) / increment).ceil().max(0) + 2 } else { 1 };
            f.restrict(start + period * Q::int(k))
        }
        _ => f.clone(),
    };
    let segs = f.segments();
    for (i, s) in segs.iter().enumerate() {
        if s.v > level || s.v + s.jump > level {
            return Ext::Fin(s.t);
        }
        let is_last = i + 1 == segs.len();
        if is_last && f.tail() == Tail::Infinite {
            return Ext::Fin(s.t);
        }
        if s.slope.is_positive() {
            let x = s.t + (level - s.v - s.jump) / s.slope;
            let end = if is_last { f.horizon() } else { Some(segs[i + 1].t) };
            if end.is_none_or(|e| x < e) {
                return Ext::Fin(x);
            }
        }
    }
    Ext::Inf
}

/// Eventually-affine growth of the delay of packets at indices `0, p, 2p, …`:
/// `delay_k = offset + k·increment` for every `k ≥ from`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DelayGrowth {
    pub increment: Q,
    pub offset: Q,
    pub from: usize,
}

/// Per-period delay growth of the packets at 1-based indices `≡ 1 (mod
/// period)`, pairing input and output packets per flow in order.
pub fn delay_growth(
    inflow: &PacketSequence,
    outflow: &PacketSequence,
    period: usize,
) -> Result<DelayGrowth, VerifyError> {
    assert!(period >= 1, "period must be positive");
    let delays = packet_delays(inflow, outflow)?;
    let sampled: Vec<Q> = delays.iter().step_by(period).copied().collect();
    if sampled.len() < 3 {
        return Err(VerifyError::TooShort { needed: 3, got: sampled.len() });
    }
    let diffs: Vec<Q> = sampled.windows(2).map(|w| w[1] - w[0]).collect();
    let last = *diffs.last().unwrap();
    let from = diffs.iter().rposition(|d| *d != last).map_or(0, |i| i + 1);
    if from + 2 > diffs.len() {
        return Err(VerifyError::NonAffine(diffs));
    }
    Ok(DelayGrowth { increment: last, offset: sampled[from] - Q::int(from as i128) * last, from })
}
