//! Pseudo-inverses of wide-sense increasing curves.

use super::{Curve, CurveError, Env, Line, Mode, Piece, Segment, Tail};
use crate::q::{Ext, Q};

/// Lower bounds on `sup{s : f(s) ≤ w}` contributed by one piece of `f`, as
/// pieces over the level axis `w`.
fn contributions(p: &Piece) -> Result<Vec<Piece>, CurveError> {
    let from = |w: Q, closed: bool, value: Q| Piece {
        lo: w,
        hi: None,
        lo_closed: closed,
        hi_closed: false,
        line: Line::constant(value),
    };
    if p.is_point() {
        return Ok(vec![from(p.line.at(p.lo), true, p.lo)]);
    }
    let ya = p.line.at(p.lo);
    let sigma = p.line.slope;
    match p.hi {
        Some(b) => {
            let yb = p.line.at(b);
            if sigma.is_zero() {
                Ok(vec![from(ya, true, b)])
            } else {
                Ok(vec![Piece::open(ya, Some(yb), Line::through(ya, p.lo, sigma.recip())), from(yb, true, b)])
            }
        }
        None => {
            if sigma.is_zero() {
                Err(CurveError::UnboundedPseudoInverse { level: ya })
            } else {
                Ok(vec![Piece::open(ya, None, Line::through(ya, p.lo, sigma.recip()))])
            }
        }
    }
}

fn fill(env: &mut Env, f: &Curve) -> Result<(), CurveError> {
    env.merge(&Piece { lo: Q::ZERO, hi: None, lo_closed: true, hi_closed: false, line: Line::constant(Q::ZERO) });
    for p in f.pieces() {
        for c in contributions(&p)? {
            env.merge(&c);
        }
    }
    Ok(())
}

/// `w ↦ sup{s ≥ 0 : f(s) ≤ w}` for `w ≥ 0` (with `sup ∅ = 0`).
///
/// For `γ_{r,b}` this is `(w − b)⁺/r`. The result is right-continuous and in
/// general not in `F₀` (e.g. a latency shows up as the value at `w = 0`).
/// Bounded curves have an infinite inverse from their supremum on, reported as
/// [`CurveError::UnboundedPseudoInverse`].
pub fn pseudo_inverse(f: &Curve) -> Result<Curve, CurveError> {
    if !f.is_increasing() {
        return Err(CurveError::NotIncreasing);
    }
    match f.tail() {
        Tail::Horizon(h) => Err(CurveError::Truncated(h)),
        Tail::Affine | Tail::Infinite => {
            let mut env = Env::new(Q::ZERO, None, Mode::Max);
            fill(&mut env, f)?;
            env.into_curve()
        }
        Tail::Periodic { start, period, increment } => {
            let w0 = f.at(start);
            if !increment.is_positive() {
                return Err(CurveError::UnboundedPseudoInverse { level: w0 });
            }
            // Beyond w0 the inverse repeats: f↓(w + increment) = f↓(w) + period.
            let w_end = w0 + increment;
            let unrolled = f.restrict(start + period + period);
            let mut env = Env::new(Q::ZERO, Some(w_end), Mode::Max);
            env.split(w0);
            fill(&mut env, &unrolled)?;
            let mut segs: Vec<Segment> = env.into_segments()?;
            segs.pop();
            Ok(Curve::from_parts(segs, Tail::Periodic { start: w0, period: increment, increment: period }))
        }
    }
}

/// First crossing of level `y` inside `segs`, whose last segment ends at `end`
/// (exclusive for a periodic pattern, inclusive for a horizon).
fn scan(segs: &[Segment], y: Q, end: Option<Q>, end_inclusive: bool, infinite_after: bool) -> Option<Q> {
    for (i, s) in segs.iter().enumerate() {
        if s.v >= y {
            return Some(s.t);
        }
        let last = i + 1 == segs.len();
        if last && infinite_after {
            return Some(s.t);
        }
        let right = s.v + s.jump;
        if right >= y {
            return Some(s.t);
        }
        if s.slope.is_positive() {
            let x = s.t + (y - right) / s.slope;
            let limit = if last { end } else { Some(segs[i + 1].t) };
            let inside = match limit {
                None => true,
                Some(e) => x < e || (last && end_inclusive && x == e),
            };
            if inside {
                return Some(x);
            }
        }
    }
    None
}

/// `inf{t ≥ 0 : f(t) ≥ y}`, or `+∞` when `f` never reaches `y`.
///
/// Panics when the curve has a horizon and `y` is not reached before it.
pub fn first_reach(f: &Curve, y: Q) -> Ext {
    let segs = f.segments();
    match f.tail() {
        Tail::Affine => scan(segs, y, None, false, false).map_or(Ext::Inf, Ext::Fin),
        Tail::Infinite => Ext::Fin(scan(segs, y, None, false, true).expect("infinite tail is always reached")),
        Tail::Horizon(h) => Ext::Fin(
            scan(segs, y, Some(h), true, false)
                .unwrap_or_else(|| panic!("level {y} not reached before the horizon {h}")),
        ),
        Tail::Periodic { start, period, increment } => {
            let end = start + period;
            if let Some(t) = scan(segs, y, Some(end), false, false) {
                return Ext::Fin(t);
            }
            if !increment.is_positive() {
                return Ext::Inf;
            }
            let sup = f.eval_left(end).unwrap();
            let k = ((y - sup) / increment).ceil().max(1);
            let kq = Q::int(k);
            let pattern: Vec<Segment> = segs.iter().copied().filter(|s| s.t >= start).collect();
            match scan(&pattern, y - kq * increment, Some(end), false, false) {
                Some(t) => Ext::Fin(t + kq * period),
                None => Ext::Fin(start + (kq + Q::ONE) * period),
            }
        }
    }
}
