//! Long-term rates and the horizontal deviation between two curves.

use super::{first_reach, Curve, CurveError, Tail};
use crate::q::{Ext, Q};

/// `lim f(t)/t`: the tail slope, `increment/period`, or `+∞` for an infinite
/// tail.
pub fn long_term_rate(f: &Curve) -> Result<Ext, CurveError> {
    match f.tail() {
        Tail::Affine => Ok(Ext::Fin(f.segments().last().unwrap().slope)),
        Tail::Periodic { period, increment, .. } => Ok(Ext::Fin(increment / period)),
        Tail::Infinite => Ok(Ext::Inf),
        Tail::Horizon(h) => Err(CurveError::Truncated(h)),
    }
}

fn period_of(c: &Curve) -> Option<Q> {
    match c.tail() {
        Tail::Periodic { period, .. } => Some(period),
        _ => None,
    }
}

fn infinite_from(c: &Curve) -> Option<Q> {
    match c.tail() {
        Tail::Infinite => Some(c.segments().last().unwrap().t),
        _ => None,
    }
}

/// `h(α, β) = sup_{t≥0} inf{d ≥ 0 : α(t) ≤ β(t + d)}`.
///
/// Exact: `d(t) = (first_reach(β, α(t)) − t)⁺` is affine between consecutive
/// candidates (breakpoints of `α` and the times where `α` meets a vertex level
/// of `β`), so the supremum is attained at a candidate or as a one-sided limit
/// there. Beyond one common period after both transients the pattern repeats
/// with a non-increasing drift, so that window suffices.
pub fn horizontal_deviation(alpha: &Curve, beta: &Curve) -> Result<Ext, CurveError> {
    let ra = long_term_rate(alpha)?;
    let rb = long_term_rate(beta)?;
    let alpha_inf = infinite_from(alpha);
    if alpha_inf.is_none() && ra > rb {
        return Ok(Ext::Inf);
    }
    // After α becomes infinite only an infinite β can follow.
    let mut best = Q::ZERO;
    if let Some(ma) = alpha_inf {
        match infinite_from(beta) {
            Some(mb) => best = best.max(mb - ma),
            None => return Ok(Ext::Inf),
        }
    }
    let period = match (period_of(alpha), period_of(beta)) {
        (Some(a), Some(b)) => a.lcm(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => Q::ONE,
    };
    let window = match alpha_inf {
        Some(ma) => ma,
        None => alpha.transient_end().max(beta.transient_end()) + period,
    };
    let top = alpha.at(window);
    let reach_top = match first_reach(beta, top) {
        Ext::Inf => return Ok(Ext::Inf),
        Ext::Fin(s) => s,
    };
    let br = beta.restrict(reach_top + period + Q::ONE);
    let mut levels: Vec<Q> = Vec::new();
    let bsegs = br.segments();
    for (i, s) in bsegs.iter().enumerate() {
        levels.push(s.v);
        levels.push(s.v + s.jump);
        if let Some(n) = bsegs.get(i + 1) {
            levels.push(s.v + s.jump + s.slope * (n.t - s.t));
        }
    }
    levels.sort();
    levels.dedup();

    let ar = alpha.restrict(window);
    let asegs = ar.segments();
    let mut cands: Vec<Q> = asegs.iter().map(|s| s.t).collect();
    cands.push(window);
    for (i, s) in asegs.iter().enumerate() {
        if !s.slope.is_positive() {
            continue;
        }
        let next = asegs.get(i + 1).map_or(window, |n| n.t);
        let base = s.v + s.jump;
        for y in &levels {
            let x = s.t + (*y - base) / s.slope;
            if x > s.t && x < next {
                cands.push(x);
            }
        }
    }
    cands.sort();
    cands.dedup();

    let phi = |t: Q| -> Ext {
        match first_reach(beta, alpha.at(t)) {
            Ext::Fin(s) => Ext::Fin(s - t),
            Ext::Inf => Ext::Inf,
        }
    };
    let mut take = |v: Ext| -> bool {
        match v {
            Ext::Inf => false,
            Ext::Fin(d) => {
                best = best.max(d);
                true
            }
        }
    };
    for t in &cands {
        if !take(phi(*t)) {
            return Ok(Ext::Inf);
        }
    }
    let three = Q::int(3);
    for w in cands.windows(2) {
        let (a, b) = (w[0], w[1]);
        let p1 = a + (b - a) / three;
        let p2 = b - (b - a) / three;
        let (f1, f2) = match (phi(p1), phi(p2)) {
            (Ext::Fin(x), Ext::Fin(y)) => (x, y),
            _ => return Ok(Ext::Inf),
        };
        let slope = (f2 - f1) / (p2 - p1);
        take(Ext::Fin(f1 - slope * (p1 - a)));
        take(Ext::Fin(f2 + slope * (b - p2)));
    }
    Ok(Ext::Fin(best))
}
