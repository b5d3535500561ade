//! Convolutions, deconvolution, pointwise extrema and the super-additive
//! closure, all computed exactly through [`Env`].

use super::{Curve, CurveError, Env, Mode, Piece, Segment, Tail, CLOSURE_ITERATION_CAP};
use crate::q::Q;

fn min_opt(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn infinite_start(c: &Curve) -> Option<Q> {
    match c.tail() {
        Tail::Infinite => Some(c.segments().last().unwrap().t),
        _ => None,
    }
}

fn reject_periodic(f: &Curve, g: &Curve) -> Result<(), CurveError> {
    if f.is_periodic() || g.is_periodic() {
        Err(CurveError::NeedsHorizon)
    } else {
        Ok(())
    }
}

fn envelope_of_convolution(f: &Curve, g: &Curve, mode: Mode, end: Option<Q>) -> Env {
    let mut env = Env::new(Q::ZERO, end, mode);
    let pf = f.pieces();
    let pg = g.pieces();
    for a in &pf {
        for b in &pg {
            for p in a.convolve(b, mode) {
                env.merge(&p);
            }
        }
    }
    env
}

/// In `Max` mode a `+∞` region of either operand swamps everything after its
/// start, so the envelope is built on `[0, m]` and closed with an infinite tail.
fn max_envelope(f: &Curve, g: &Curve, build: impl FnOnce(Option<Q>) -> Env) -> Result<Curve, CurveError> {
    let inf = min_opt(infinite_start(f), infinite_start(g));
    let end = min_opt(min_opt(f.horizon(), g.horizon()), inf);
    match inf {
        Some(m) if end == Some(m) => {
            let segs = build(Some(m)).into_segments()?;
            Ok(Curve::from_parts(segs, Tail::Infinite))
        }
        _ => build(end).into_curve(),
    }
}

/// `(f ⊗ g)(t) = inf_{0≤s≤t} f(s) + g(t − s)`. Exact for non-periodic curves;
/// the result's horizon is the smaller operand horizon.
pub fn min_plus_conv(f: &Curve, g: &Curve) -> Result<Curve, CurveError> {
    reject_periodic(f, g)?;
    let end = min_opt(f.horizon(), g.horizon());
    envelope_of_convolution(f, g, Mode::Min, end).into_curve()
}

/// [`min_plus_conv`] on `[0, h]`; accepts periodic operands.
pub fn min_plus_conv_until(f: &Curve, g: &Curve, h: Q) -> Result<Curve, CurveError> {
    min_plus_conv(&f.restrict(h), &g.restrict(h))
}

/// `(f ⊗̄ g)(t) = sup_{0≤s≤t} f(s) + g(t − s)`.
pub fn max_plus_conv(f: &Curve, g: &Curve) -> Result<Curve, CurveError> {
    reject_periodic(f, g)?;
    max_envelope(f, g, |end| envelope_of_convolution(f, g, Mode::Max, end))
}

/// [`max_plus_conv`] on `[0, h]`; accepts periodic operands.
pub fn max_plus_conv_until(f: &Curve, g: &Curve, h: Q) -> Result<Curve, CurveError> {
    max_plus_conv(&f.restrict(h), &g.restrict(h))
}

fn pointwise(f: &Curve, g: &Curve, mode: Mode, end: Option<Q>) -> Env {
    let mut env = Env::new(Q::ZERO, end, mode);
    for p in f.pieces().iter().chain(g.pieces().iter()) {
        env.merge(p);
    }
    env
}

/// `t ↦ min(f(t), g(t))`.
pub fn pointwise_min(f: &Curve, g: &Curve) -> Result<Curve, CurveError> {
    reject_periodic(f, g)?;
    pointwise(f, g, Mode::Min, min_opt(f.horizon(), g.horizon())).into_curve()
}

/// `t ↦ max(f(t), g(t))`.
pub fn pointwise_max(f: &Curve, g: &Curve) -> Result<Curve, CurveError> {
    reject_periodic(f, g)?;
    max_envelope(f, g, |end| pointwise(f, g, Mode::Max, end))
}

/// `(f ⊘̄ g)(t) = inf_{s≥t} f(s) − g(s − t)`, computed for `s ≤ horizon`.
///
/// When `g` is the zero function and `f` ends in a non-decreasing affine tail,
/// the infimum over `s > horizon` cannot be smaller and the result is exact
/// everywhere; otherwise it carries a horizon tail.
pub fn max_plus_deconv(f: &Curve, g: &Curve, horizon: Q) -> Result<Curve, CurveError> {
    let last = f.transient_end();
    if horizon < last {
        return Err(CurveError::HorizonTooShort { horizon, last });
    }
    if matches!(g.tail(), Tail::Infinite) {
        return Err(CurveError::UnboundedBelow);
    }
    let g_zero = g.is_zero_function();
    if g_zero {
        if let (Tail::Affine, Some(s)) = (f.tail(), f.segments().last()) {
            if s.slope.is_negative() {
                return Err(CurveError::UnboundedBelow);
            }
        }
    }
    let extend = g_zero && f.tail() == Tail::Affine;
    // The tail extension reads f just after the horizon, which must then lie
    // strictly inside the last segment.
    let horizon = if extend && horizon == last { last + Q::ONE } else { horizon };
    let fr = f.restrict(horizon);
    let gr = g.restrict(horizon);
    let reflected: Vec<Piece> = gr.pieces().iter().map(Piece::reflect_neg).collect();
    let mut env = Env::new(Q::ZERO, Some(horizon), Mode::Min);
    for a in fr.pieces() {
        for b in &reflected {
            for p in a.convolve(b, Mode::Min) {
                env.merge(&p);
            }
        }
    }
    let body = env.into_curve()?;
    if !extend {
        return Ok(body);
    }
    let mut segs: Vec<Segment> = body.segments().iter().copied().filter(|s| s.t < horizon).collect();
    let fh = f.at(horizon);
    let slope = f.segments().last().unwrap().slope;
    segs.push(Segment::new(horizon, fh, slope, f.eval_right(horizon).unwrap() - fh));
    Ok(Curve::from_parts(segs, Tail::Affine))
}

/// `f ∨ (f ⊗̄ f) ∨ (f ⊗̄ f ⊗̄ f) ∨ …` on `[0, horizon]`, iterated to a fixpoint.
pub fn super_additive_closure(f: &Curve, horizon: Q) -> Result<Curve, CurveError> {
    let base = f.restrict(horizon);
    let mut g = base.clone();
    for _ in 0..CLOSURE_ITERATION_CAP {
        let next = pointwise_max(&g, &max_plus_conv(&g, &base)?)?;
        if next == g {
            return Ok(g);
        }
        g = next;
    }
    Err(CurveError::ClosureNotConverged { iterations: CLOSURE_ITERATION_CAP, partial: Box::new(g) })
}
