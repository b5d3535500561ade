//! Standard curve shapes. Each constructor states its value at breakpoints.

use super::{Curve, CurveError, Segment, Tail};
use crate::q::Q;

fn seg(t: Q, v: Q, slope: Q, jump: Q) -> Segment {
    Segment::new(t, v, slope, jump)
}

/// The zero function.
pub fn zero() -> Curve {
    Curve::from_parts(vec![seg(Q::ZERO, Q::ZERO, Q::ZERO, Q::ZERO)], Tail::Affine)
}

/// `γ_{r,b}`: `0` at `t = 0`, `rt + b` for `t > 0` (value before the jump at 0).
pub fn leaky_bucket(r: Q, b: Q) -> Result<Curve, CurveError> {
    if r.is_negative() {
        return Err(CurveError::NegativeParameter("rate"));
    }
    if b.is_negative() {
        return Err(CurveError::NegativeParameter("burst"));
    }
    Ok(Curve::from_parts(vec![seg(Q::ZERO, Q::ZERO, r, b)], Tail::Affine))
}

/// `β_{R,T}: t ↦ R·(t − T)⁺`; continuous.
pub fn rate_latency(rate: Q, latency: Q) -> Result<Curve, CurveError> {
    if rate.is_negative() {
        return Err(CurveError::NegativeParameter("rate"));
    }
    if latency.is_negative() {
        return Err(CurveError::NegativeParameter("latency"));
    }
    let segs = if latency.is_zero() {
        vec![seg(Q::ZERO, Q::ZERO, rate, Q::ZERO)]
    } else {
        vec![seg(Q::ZERO, Q::ZERO, Q::ZERO, Q::ZERO), seg(latency, Q::ZERO, rate, Q::ZERO)]
    };
    Ok(Curve::from_parts(segs, Tail::Affine))
}

/// `δ_D`: `0` on `[0, D]`, `+∞` after.
pub fn bounded_delay(d: Q) -> Result<Curve, CurveError> {
    if d.is_negative() {
        return Err(CurveError::NegativeParameter("delay"));
    }
    let segs = if d.is_zero() {
        vec![seg(Q::ZERO, Q::ZERO, Q::ZERO, Q::ZERO)]
    } else {
        vec![seg(Q::ZERO, Q::ZERO, Q::ZERO, Q::ZERO), seg(d, Q::ZERO, Q::ZERO, Q::ZERO)]
    };
    Ok(Curve::from_parts(segs, Tail::Infinite))
}

/// `t ↦ ⌊t/I⌋·L`; takes the post-jump value at multiples of `I`.
pub fn staircase(l: Q, i: Q) -> Result<Curve, CurveError> {
    if !l.is_positive() {
        return Err(CurveError::NonPositiveParameter("step height"));
    }
    if !i.is_positive() {
        return Err(CurveError::NonPositiveParameter("step period"));
    }
    Ok(Curve::from_parts(
        vec![seg(Q::ZERO, Q::ZERO, Q::ZERO, Q::ZERO)],
        Tail::Periodic { start: Q::ZERO, period: i, increment: l },
    ))
}

/// `t ↦ L·1{t ≥ I}`; takes the post-jump value at `I`.
pub fn step_at(l: Q, i: Q) -> Result<Curve, CurveError> {
    if l.is_negative() {
        return Err(CurveError::NegativeParameter("step height"));
    }
    if !i.is_positive() {
        return Err(CurveError::NonPositiveParameter("step time"));
    }
    Ok(Curve::from_parts(vec![seg(Q::ZERO, Q::ZERO, Q::ZERO, Q::ZERO), seg(i, l, Q::ZERO, Q::ZERO)], Tail::Affine))
}

/// `t ↦ L·1{t > I}`, i.e. `min(L, δ_I)`; takes the pre-jump value at `I`.
pub fn step_after(l: Q, i: Q) -> Result<Curve, CurveError> {
    if l.is_negative() {
        return Err(CurveError::NegativeParameter("step height"));
    }
    if i.is_negative() {
        return Err(CurveError::NegativeParameter("step time"));
    }
    let segs = if i.is_zero() {
        vec![seg(Q::ZERO, Q::ZERO, Q::ZERO, l)]
    } else {
        vec![seg(Q::ZERO, Q::ZERO, Q::ZERO, Q::ZERO), seg(i, Q::ZERO, Q::ZERO, l)]
    };
    Ok(Curve::from_parts(segs, Tail::Affine))
}
