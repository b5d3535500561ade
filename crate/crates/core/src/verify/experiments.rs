//! Refutation experiments: arbitrarily large delays for a packet of a flow
//! sharing the regulator with the Spring output, and the rate limit on any
//! service curve offered to such a flow through a FIFO residual.

use serde::{Deserialize, Serialize};

use super::{fifo_residual, first_exceed, first_packet_delay_bound, VerifyError};
use crate::adversary::{trajectory_xm, SpringParams, F1, F2, F3, G};
use crate::minplus::{leaky_bucket, long_term_rate, Curve, Segment, Tail};
use crate::q::{Ext, Q};
use crate::regulators::ir_process_leboudec;
use crate::traffic::{check_arrival_curve, subsequence};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct InsertedPacketReport {
    pub params: SpringParams,
    pub b1: Q,
    pub m: Q,
    pub l_g: Q,
    pub k: i128,
    /// 0-based position of the inserted packet.
    pub index: usize,
    pub inserted_at: Q,
    pub measured_delay: Q,
    /// Lower bound on the delay from the construction; at least `m`.
    pub guaranteed_delay: Q,
}

impl InsertedPacketReport {
    /// `Some(u)` when `candidate` exceeds `L_g` right after `u` and `u` is
    /// below the measured delay: a service curve for `g` would have released
    /// the inserted packet by then.
    pub fn refutes(&self, candidate: &Curve) -> Option<Q> {
        match first_exceed(candidate, self.l_g) {
            Ext::Fin(u) if u < self.measured_delay => Some(u),
            _ => None,
        }
    }
}

/// Builds the trajectory with one packet of flow `g` inserted so that its
/// delay through the regulator is at least `m`, checks the premises on the
/// regulator input, and measures that delay.
pub fn inserted_packet_experiment(p: &SpringParams, b1: Q, m: Q, l_g: Q) -> Result<InsertedPacketReport, VerifyError> {
    if b1 <= p.b {
        return Err(VerifyError::Infeasible(format!("b1 = {b1} must exceed b = {}", p.b)));
    }
    if !m.is_positive() || !l_g.is_positive() || l_g > p.b {
        return Err(VerifyError::Infeasible(format!("need M > 0 and 0 < L_g <= b, got M = {m}, L_g = {l_g}")));
    }
    let x = trajectory_xm(p, m, l_g, G);
    let f1 = leaky_bucket(p.r, b1)?;
    if let Err(v) = check_arrival_curve(&subsequence(&x.seq, F1), &f1, None) {
        return Err(VerifyError::Infeasible(format!("flow 1 needs burst {} at the regulator: {v}", p.f1_burst_at_b())));
    }
    let gamma = leaky_bucket(p.r, p.b)?;
    for f in [F2, F3] {
        if let Err(v) = check_arrival_curve(&subsequence(&x.seq, f), &gamma, None) {
            return Err(VerifyError::Infeasible(format!("flow {f} breaks its contract at the regulator: {v}")));
        }
    }
    let out = ir_process_leboudec(&x.seq, &p.ir_config())?;
    let inserted_at = x.seq.packets()[x.index].time;
    let measured_delay = out.departures.packets()[x.index].time - inserted_at;
    Ok(InsertedPacketReport {
        params: *p,
        b1,
        m,
        l_g,
        k: x.k,
        index: x.index,
        inserted_at,
        measured_delay,
        guaranteed_delay: x.delay_bound,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ThetaOutcome {
    pub theta: Q,
    /// Where the closed residual first exceeds `L_g`, if ever.
    pub exceeds_at: Ext,
    /// First-packet delay bound the closed residual would give flow `g`.
    pub delay_bound: Ext,
    /// The closed residual exceeds `L_g`, so it bounds the delay of a packet
    /// of `g` that the Spring trajectory delays without bound.
    pub contradiction: bool,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ResidualRateReport {
    pub params: SpringParams,
    pub l_g: Q,
    /// Rate and burst of the arrival curve of the other flows.
    pub alpha_rate: Q,
    pub alpha_burst: Q,
    pub long_term_rate: Ext,
    /// The candidate was replaced by its affine minorant before the residual
    /// computation.
    pub minorant: bool,
    pub outcomes: Vec<ThetaOutcome>,
    /// Long-term rate above `3r` with a contradiction at some grid `θ`.
    pub flagged: bool,
    pub refuting_theta: Option<Q>,
    /// Delay of an inserted packet of `g` on a Spring trajectory built to
    /// exceed the delay bound at the refuting `θ`.
    pub spring_delay: Option<Q>,
}

/// `θ = 0, I, 2I, …, 20I`.
pub fn default_theta_grid(p: &SpringParams) -> Vec<Q> {
    (0..=20).map(|k| p.i * Q::int(k)).collect()
}

/// `t ↦ ρt + c` with `ρ` the long-term rate and `c` the least offset keeping
/// it below `f`; `f` must have a periodic tail.
fn affine_minorant(f: &Curve) -> Result<Curve, VerifyError> {
    let Tail::Periodic { start, period, increment } = f.tail() else {
        unreachable!("only periodic curves are replaced");
    };
    let rho = increment / period;
    let end = start + period;
    let window = f.restrict(end);
    let mut c: Option<Q> = None;
    let mut take = |v: Ext, x: Q| {
        if let Ext::Fin(v) = v {
            let off = v - rho * x;
            c = Some(c.map_or(off, |c: Q| c.min(off)));
        }
    };
    for s in window.segments() {
        take(f.eval(s.t), s.t);
        take(f.eval_right(s.t), s.t);
        if s.t.is_positive() {
            take(f.eval_left(s.t), s.t);
        }
    }
    take(f.eval_left(end), end);
    let c = c.expect("at least one finite value");
    Ok(Curve::new(vec![Segment::new(Q::ZERO, c, rho, Q::ZERO)], Tail::Affine)?)
}

/// Runs the residual pipeline for each `θ` against the other flows' arrival
/// curve `γ_{3r, 3b+ε}`, with `L_g = b`.
pub fn residual_rate_experiment(
    p: &SpringParams,
    candidate: &Curve,
    theta_grid: &[Q],
) -> Result<ResidualRateReport, VerifyError> {
    if !candidate.is_in_f0() {
        return Err(VerifyError::NotInF0);
    }
    let three = Q::int(3);
    let (alpha_rate, alpha_burst, l_g) = (three * p.r, three * p.b + p.eps, p.b);
    let alpha = leaky_bucket(alpha_rate, alpha_burst)?;
    let rate = long_term_rate(candidate)?;
    let minorant = candidate.is_periodic();
    let beta = if minorant { affine_minorant(candidate)? } else { candidate.clone() };
    let mut outcomes = Vec::with_capacity(theta_grid.len());
    for theta in theta_grid {
        let res = fifo_residual(&beta, &alpha, *theta)?;
        let exceeds_at = first_exceed(&res.closure, l_g);
        outcomes.push(ThetaOutcome {
            theta: *theta,
            exceeds_at,
            delay_bound: first_packet_delay_bound(&res.closure, l_g),
            contradiction: !exceeds_at.is_inf(),
        });
    }
    let above = rate > Ext::Fin(alpha_rate);
    let hit = outcomes.iter().find(|o| o.contradiction);
    let flagged = above && hit.is_some();
    let refuting_theta = if flagged { hit.map(|o| o.theta) } else { None };
    let spring_delay = match hit.filter(|_| flagged) {
        Some(o) => {
            let m = o.exceeds_at.unwrap() + p.i;
            let x = trajectory_xm(p, m, l_g, G);
            let out = ir_process_leboudec(&x.seq, &p.ir_config())?;
            Some(out.departures.packets()[x.index].time - x.seq.packets()[x.index].time)
        }
        None => None,
    };
    Ok(ResidualRateReport {
        params: *p,
        l_g,
        alpha_rate,
        alpha_burst,
        long_term_rate: rate,
        minorant,
        outcomes,
        flagged,
        refuting_theta,
        spring_delay,
    })
}
