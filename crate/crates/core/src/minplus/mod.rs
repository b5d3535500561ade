//! Piecewise-affine curves over `t ≥ 0` and the min-plus / max-plus operators
//! on them.
//!
//! A [`Curve`] is a list of [`Segment`]s plus a [`Tail`]. Segment `i` pins the
//! value at its start `t_i` to `v_i`; on the open interval up to the next start
//! the curve is `v_i + jump_i + slope_i·(x − t_i)`. Because the point value and
//! the right limit are stored separately, both jump conventions (value before
//! or after the jump) are representable, and a left jump at `t_{i+1}` is
//! encoded by `v_{i+1}` differing from the left limit.

mod deviation;
mod env;
mod inverse;
mod json;
mod ops;
mod shapes;

pub use deviation::{horizontal_deviation, long_term_rate};
pub use inverse::{first_reach, pseudo_inverse};
pub use ops::{
    max_plus_conv, max_plus_conv_until, max_plus_deconv, min_plus_conv, min_plus_conv_until, pointwise_max,
    pointwise_min, super_additive_closure,
};
pub use shapes::{bounded_delay, leaky_bucket, rate_latency, staircase, step_after, step_at, zero};

use crate::q::{Ext, Q};

pub(crate) use env::{Env, Line, Mode, Piece};

/// Iteration cap for [`super_additive_closure`].
pub const CLOSURE_ITERATION_CAP: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Segment {
    pub t: Q,
    pub v: Q,
    pub slope: Q,
    pub jump: Q,
}

impl Segment {
    pub fn new(t: Q, v: Q, slope: Q, jump: Q) -> Segment {
        Segment { t, v, slope, jump }
    }

    /// Value of the segment's open-interval line at `x`.
    fn line_at(&self, x: Q) -> Q {
        self.v + self.jump + self.slope * (x - self.t)
    }

    pub(crate) fn line(&self) -> Line {
        Line::through(self.t, self.v + self.jump, self.slope)
    }
}

/// Behaviour after the last segment start.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Tail {
    /// The last segment extends to `+∞`.
    Affine,
    /// The curve is `+∞` strictly after the last segment start; the last
    /// segment is a single point with zero slope and jump.
    Infinite,
    /// `f(x + period) = f(x) + increment` for `x ≥ start`. `start` is a segment
    /// start and the segments cover `[0, start + period)`.
    Periodic { start: Q, period: Q, increment: Q },
    /// The curve is only known on `[0, h]`; the last segment extends to `h`.
    Horizon(Q),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("curve has no segments")]
    Empty,
    #[error("first segment must start at 0, found {0}")]
    BadOrigin(Q),
    #[error("segment starts must be strictly increasing (at {0})")]
    Unordered(Q),
    #[error("infinite tail requires a final point segment with zero slope and jump")]
    BadInfiniteTail,
    #[error("periodic tail is malformed: {0}")]
    BadPeriodic(&'static str),
    #[error("horizon {0} precedes the last segment start")]
    BadHorizon(Q),
    #[error("negative parameter: {0}")]
    NegativeParameter(&'static str),
    #[error("parameter must be positive: {0}")]
    NonPositiveParameter(&'static str),
    #[error("curve is not wide-sense increasing")]
    NotIncreasing,
    #[error("operation on a periodic curve needs an explicit horizon")]
    NeedsHorizon,
    #[error("curve is only known up to {0}; the operation needs the full curve")]
    Truncated(Q),
    #[error("horizon {horizon} must be at least the last breakpoint {last}")]
    HorizonTooShort { horizon: Q, last: Q },
    #[error("pseudo-inverse is +inf for every level w >= {level}")]
    UnboundedPseudoInverse { level: Q },
    #[error("result is unbounded below")]
    UnboundedBelow,
    #[error("infinite values inside the domain are not representable")]
    InteriorInfinity,
    #[error("closure did not converge within {iterations} iterations")]
    ClosureNotConverged { iterations: usize, partial: Box<Curve> },
}

/// Wide-sense increasing piecewise-affine curve; see the module docs for the
/// encoding.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Curve {
    segs: Vec<Segment>,
    tail: Tail,
}

impl Curve {
    /// Checks structure only; use [`Curve::is_increasing`] for monotonicity.
    pub fn new(segs: Vec<Segment>, tail: Tail) -> Result<Curve, CurveError> {
        let first = segs.first().ok_or(CurveError::Empty)?;
        if !first.t.is_zero() {
            return Err(CurveError::BadOrigin(first.t));
        }
        for w in segs.windows(2) {
            if w[1].t <= w[0].t {
                return Err(CurveError::Unordered(w[1].t));
            }
        }
        let last = *segs.last().unwrap();
        match tail {
            Tail::Affine => {}
            Tail::Infinite => {
                if !last.slope.is_zero() || !last.jump.is_zero() {
                    return Err(CurveError::BadInfiniteTail);
                }
            }
            Tail::Periodic { start, period, increment: _ } => {
                if !period.is_positive() {
                    return Err(CurveError::BadPeriodic("period must be positive"));
                }
                if !segs.iter().any(|s| s.t == start) {
                    return Err(CurveError::BadPeriodic("start must be a segment start"));
                }
                if last.t >= start + period {
                    return Err(CurveError::BadPeriodic("segments must end before start + period"));
                }
            }
            Tail::Horizon(h) => {
                if h < last.t {
                    return Err(CurveError::BadHorizon(h));
                }
            }
        }
        Ok(Curve { segs, tail })
    }

    /// Like [`Curve::new`] but also requires wide-sense increase.
    pub fn new_increasing(segs: Vec<Segment>, tail: Tail) -> Result<Curve, CurveError> {
        let c = Curve::new(segs, tail)?;
        if !c.is_increasing() {
            return Err(CurveError::NotIncreasing);
        }
        Ok(c)
    }

    pub(crate) fn from_parts(segs: Vec<Segment>, tail: Tail) -> Curve {
        let c = Curve::new(segs, tail).expect("internal curve construction");
        c.normalized()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segs
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.tail, Tail::Periodic { .. })
    }

    /// Last `t` at which the curve is defined, if bounded.
    pub fn horizon(&self) -> Option<Q> {
        match self.tail {
            Tail::Horizon(h) => Some(h),
            _ => None,
        }
    }

    /// End of the aperiodic prefix: the last segment start, or for periodic
    /// curves the end of the first period.
    pub fn transient_end(&self) -> Q {
        match self.tail {
            Tail::Periodic { start, period, .. } => start + period,
            _ => self.segs.last().unwrap().t,
        }
    }

    /// True when the curve belongs to `F₀`, i.e. `f(0) = 0`.
    pub fn is_in_f0(&self) -> bool {
        self.segs[0].v.is_zero()
    }

    pub fn is_increasing(&self) -> bool {
        for (i, s) in self.segs.iter().enumerate() {
            if s.slope.is_negative() || s.jump.is_negative() {
                return false;
            }
            if let Some(n) = self.segs.get(i + 1) {
                if n.v < s.line_at(n.t) {
                    return false;
                }
            }
        }
        if let Tail::Periodic { start, period, increment } = self.tail {
            let last = self.segs.last().unwrap();
            let at_start = self.segs.iter().find(|s| s.t == start).unwrap().v;
            if at_start + increment < last.line_at(start + period) {
                return false;
            }
        }
        true
    }

    /// True when every value on the domain is zero.
    pub fn is_zero_function(&self) -> bool {
        !matches!(self.tail, Tail::Infinite)
            && self.segs.iter().all(|s| s.v.is_zero() && s.jump.is_zero() && s.slope.is_zero())
            && match self.tail {
                Tail::Periodic { increment, .. } => increment.is_zero(),
                _ => true,
            }
    }

    /// Maps `t` into the stored prefix. With `left`, the reduced point lies in
    /// `(start, start + period]` so that left limits stay inside one period.
    fn reduce(&self, t: Q, left: bool) -> (Q, Q) {
        assert!(!t.is_negative(), "curve evaluated at negative time {t}");
        if let Tail::Horizon(h) = self.tail {
            assert!(t <= h, "curve evaluated at {t} beyond its horizon {h}");
        }
        if let Tail::Periodic { start, period, increment } = self.tail {
            let k = if left {
                if t <= start {
                    0
                } else {
                    ((t - start) / period).ceil() - 1
                }
            } else if t < start + period {
                0
            } else {
                ((t - start) / period).floor()
            };
            if k > 0 {
                let k = Q::int(k);
                return (t - k * period, k * increment);
            }
        }
        (t, Q::ZERO)
    }

    /// Index of the last segment with `t_i ≤ x` (or `< x` when `strict`).
    fn locate(&self, x: Q, strict: bool) -> usize {
        let n = if strict { self.segs.partition_point(|s| s.t < x) } else { self.segs.partition_point(|s| s.t <= x) };
        n.checked_sub(1).expect("located before the first segment")
    }

    fn beyond_infinite(&self, i: usize) -> bool {
        matches!(self.tail, Tail::Infinite) && i + 1 == self.segs.len()
    }

    /// `f(t)`. Panics for `t < 0` or beyond a finite horizon.
    pub fn eval(&self, t: Q) -> Ext {
        let (x, off) = self.reduce(t, false);
        let i = self.locate(x, false);
        let s = &self.segs[i];
        if s.t == x {
            return Ext::Fin(s.v + off);
        }
        if self.beyond_infinite(i) {
            return Ext::Inf;
        }
        Ext::Fin(s.line_at(x) + off)
    }

    /// Right limit `f(t⁺)`.
    pub fn eval_right(&self, t: Q) -> Ext {
        if let Tail::Horizon(h) = self.tail {
            assert!(t < h, "right limit at {t} needs values beyond the horizon {h}");
        }
        let (x, off) = self.reduce(t, false);
        let i = self.locate(x, false);
        if self.beyond_infinite(i) {
            return Ext::Inf;
        }
        Ext::Fin(self.segs[i].line_at(x) + off)
    }

    /// Left limit `f(t⁻)` for `t > 0`.
    pub fn eval_left(&self, t: Q) -> Ext {
        assert!(t.is_positive(), "left limit needs t > 0");
        let (x, off) = self.reduce(t, true);
        let i = self.locate(x, true);
        if self.beyond_infinite(i) {
            return Ext::Inf;
        }
        Ext::Fin(self.segs[i].line_at(x) + off)
    }

    /// Finite-valued evaluation; panics on `+∞`.
    pub fn at(&self, t: Q) -> Q {
        self.eval(t).unwrap()
    }

    /// Breakpoints in `[0, until]`, including repetitions of periodic ones.
    pub fn breakpoints_until(&self, until: Q) -> Vec<Q> {
        let mut out: Vec<Q> = self.segs.iter().map(|s| s.t).filter(|t| *t <= until).collect();
        if let Tail::Periodic { start, period, .. } = self.tail {
            let pattern: Vec<Q> = self.segs.iter().map(|s| s.t).filter(|t| *t >= start).collect();
            let mut k = Q::ONE;
            'outer: loop {
                for p in &pattern {
                    let t = *p + k * period;
                    if t > until {
                        break 'outer;
                    }
                    out.push(t);
                }
                k += Q::ONE;
            }
        }
        out
    }

    /// The same function on `[0, h]` with a [`Tail::Horizon`] tail; periodic
    /// parts are unrolled. An infinite tail starting before `h` is kept since
    /// it is already exact.
    pub fn restrict(&self, h: Q) -> Curve {
        assert!(!h.is_negative(), "negative horizon");
        match self.tail {
            Tail::Infinite if self.segs.last().unwrap().t < h => return self.clone(),
            Tail::Horizon(own) if own <= h => return self.clone(),
            _ => {}
        }
        let mut segs: Vec<Segment> = self.segs.iter().copied().filter(|s| s.t <= h).collect();
        if let Tail::Periodic { start, period, increment } = self.tail {
            let pattern: Vec<Segment> = self.segs.iter().copied().filter(|s| s.t >= start).collect();
            let mut k = Q::ONE;
            'outer: loop {
                for p in &pattern {
                    let t = p.t + k * period;
                    if t > h {
                        break 'outer;
                    }
                    segs.push(Segment::new(t, p.v + k * increment, p.slope, p.jump));
                }
                k += Q::ONE;
            }
        }
        if matches!(self.tail, Tail::Infinite) {
            // The point segment starts at or after h; only its predecessor
            // survives unless it sits exactly at h.
            if let Some(last) = segs.last_mut() {
                if last.t == h {
                    last.slope = Q::ZERO;
                    last.jump = Q::ZERO;
                }
            }
        }
        Curve::new(segs, Tail::Horizon(h)).expect("restriction keeps structure").normalized()
    }

    /// Decomposition into a point piece per segment start and an open piece
    /// per inter-breakpoint interval. Periodic curves must be restricted first.
    pub(crate) fn pieces(&self) -> Vec<Piece> {
        assert!(!self.is_periodic(), "pieces of a periodic curve need a horizon");
        let mut out = Vec::with_capacity(2 * self.segs.len());
        let n = self.segs.len();
        for (i, s) in self.segs.iter().enumerate() {
            out.push(Piece::point(s.t, s.v));
            let line = s.line();
            if i + 1 < n {
                out.push(Piece::open(s.t, Some(self.segs[i + 1].t), line));
                continue;
            }
            match self.tail {
                Tail::Affine => out.push(Piece::open(s.t, None, line)),
                Tail::Infinite => {}
                Tail::Horizon(h) => {
                    if h > s.t {
                        out.push(Piece::open(s.t, Some(h), line));
                        out.push(Piece::point(h, line.at(h)));
                    }
                }
                Tail::Periodic { .. } => unreachable!(),
            }
        }
        out
    }

    /// Merges segments that continue their predecessor without a break.
    pub(crate) fn normalized(mut self) -> Curve {
        let keep_start = match self.tail {
            Tail::Periodic { start, .. } => Some(start),
            _ => None,
        };
        let infinite = matches!(self.tail, Tail::Infinite);
        let horizon = self.horizon();
        let mut out: Vec<Segment> = Vec::with_capacity(self.segs.len());
        let n = self.segs.len();
        for (i, s) in self.segs.drain(..).enumerate() {
            if let Some(prev) = out.last() {
                let continuous = s.v == prev.line_at(s.t);
                let is_last = i + 1 == n;
                let protected = Some(s.t) == keep_start || (infinite && is_last);
                let zero_length_end = is_last && horizon == Some(s.t);
                if continuous && !protected && (zero_length_end || (s.jump.is_zero() && s.slope == prev.slope)) {
                    continue;
                }
            }
            out.push(s);
        }
        self.segs = out;
        self
    }

    /// Curve with every value multiplied by `k ≥ 0`.
    pub fn scale(&self, k: Q) -> Curve {
        assert!(!k.is_negative(), "negative scale factor");
        let segs = self.segs.iter().map(|s| Segment::new(s.t, s.v * k, s.slope * k, s.jump * k)).collect();
        let tail = match self.tail {
            Tail::Periodic { start, period, increment } => Tail::Periodic { start, period, increment: increment * k },
            t => t,
        };
        Curve::from_parts(segs, tail)
    }
}
