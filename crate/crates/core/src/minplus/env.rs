//! Exact lower/upper envelopes of affine pieces.
//!
//! An [`Env`] is a partition of a domain `[start, end]` (or `[start, ∞)`) into
//! breakpoints and the open intervals between them. Each breakpoint carries an
//! optional point value and each interval an optional [`Line`]; `None` means no
//! piece has contributed yet. Lines never cross strictly inside an interval:
//! merging a crossing piece splits the interval at the crossing.

use super::{Curve, CurveError, Segment, Tail};
use crate::q::Q;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) struct Line {
    pub slope: Q,
    pub icpt: Q,
}

impl Line {
    pub fn through(x: Q, y: Q, slope: Q) -> Line {
        Line { slope, icpt: y - slope * x }
    }

    pub fn constant(y: Q) -> Line {
        Line { slope: Q::ZERO, icpt: y }
    }

    pub fn at(&self, x: Q) -> Q {
        self.icpt + self.slope * x
    }

    /// The abscissa where the two lines meet, if they are not parallel.
    pub fn crossing(&self, o: &Line) -> Option<Q> {
        if self.slope == o.slope {
            None
        } else {
            Some((o.icpt - self.icpt) / (self.slope - o.slope))
        }
    }
}

/// An affine function on an interval with explicit endpoint closure. A point
/// piece has `hi == Some(lo)` and both ends closed. `hi == None` is `+∞`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) struct Piece {
    pub lo: Q,
    pub hi: Option<Q>,
    pub lo_closed: bool,
    pub hi_closed: bool,
    pub line: Line,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Mode {
    Min,
    Max,
}

impl Mode {
    fn better(self, a: Q, b: Q) -> bool {
        match self {
            Mode::Min => a < b,
            Mode::Max => a > b,
        }
    }

    fn pick(self, a: Q, b: Q) -> Q {
        if self.better(b, a) {
            b
        } else {
            a
        }
    }
}

impl Piece {
    pub fn point(x: Q, y: Q) -> Piece {
        Piece { lo: x, hi: Some(x), lo_closed: true, hi_closed: true, line: Line::constant(y) }
    }

    pub fn open(lo: Q, hi: Option<Q>, line: Line) -> Piece {
        Piece { lo, hi, lo_closed: false, hi_closed: false, line }
    }

    pub fn is_point(&self) -> bool {
        self.hi == Some(self.lo)
    }

    fn len(&self) -> Option<Q> {
        self.hi.map(|h| h - self.lo)
    }

    /// Mirror image `x ↦ −x` of the piece of `g`, carrying `−g(−x)`.
    pub fn reflect_neg(&self) -> Piece {
        let hi = self.hi.expect("reflection needs a bounded piece");
        Piece {
            lo: -hi,
            hi: Some(-self.lo),
            lo_closed: self.hi_closed,
            hi_closed: self.lo_closed,
            line: Line { slope: self.line.slope, icpt: -self.line.icpt },
        }
    }

    /// Pieces whose envelope (in `mode`) is the inf- or sup-convolution of two
    /// pieces over their domains.
    pub fn convolve(&self, other: &Piece, mode: Mode) -> Vec<Piece> {
        let lo = self.lo + other.lo;
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        let lo_closed = self.lo_closed && other.lo_closed;
        let hi_closed = self.hi_closed && other.hi_closed;
        let y0 = self.line.at(self.lo) + other.line.at(other.lo);
        if self.is_point() || other.is_point() {
            let slope = if self.is_point() { other.line.slope } else { self.line.slope };
            return vec![Piece { lo, hi, lo_closed, hi_closed, line: Line::through(lo, y0, slope) }];
        }
        // Spend the whole length of the cheaper (Min) or steeper (Max) piece
        // first, then continue along the other one.
        let (first, second) = {
            let a_first = match mode {
                Mode::Min => self.line.slope <= other.line.slope,
                Mode::Max => self.line.slope >= other.line.slope,
            };
            if a_first {
                (self, other)
            } else {
                (other, self)
            }
        };
        let l1 = Line::through(lo, y0, first.line.slope);
        match first.len() {
            Some(len) if first.line.slope != second.line.slope => {
                let knee = lo + len;
                let a = Piece { lo, hi: Some(knee), lo_closed, hi_closed: true, line: l1 };
                let b = Piece {
                    lo: knee,
                    hi,
                    lo_closed: false,
                    hi_closed,
                    line: Line::through(knee, l1.at(knee), second.line.slope),
                };
                vec![a, b]
            }
            _ => vec![Piece { lo, hi, lo_closed, hi_closed, line: l1 }],
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Env {
    xs: Vec<Q>,
    pts: Vec<Option<Q>>,
    gaps: Vec<Option<Line>>,
    end: Option<Q>,
    mode: Mode,
}

impl Env {
    pub fn new(start: Q, end: Option<Q>, mode: Mode) -> Env {
        let mut e = Env { xs: vec![start], pts: vec![None], gaps: vec![None], end, mode };
        if let Some(h) = end {
            assert!(h >= start, "empty envelope domain");
            if h > start {
                e.split(h);
            }
        }
        e
    }

    fn find(&self, x: Q) -> Result<usize, usize> {
        self.xs.binary_search(&x)
    }

    /// Ensures `x` is a breakpoint and returns its index.
    pub fn split(&mut self, x: Q) -> usize {
        match self.find(x) {
            Ok(i) => i,
            Err(p) => {
                assert!(p > 0, "split before the domain start");
                let g = self.gaps[p - 1];
                self.xs.insert(p, x);
                self.pts.insert(p, g.map(|l| l.at(x)));
                self.gaps.insert(p, g);
                if self.end == Some(x) {
                    self.gaps[p] = None;
                }
                p
            }
        }
    }

    fn probe(&self, k: usize) -> Q {
        match self.xs.get(k + 1) {
            Some(b) => self.xs[k].mid(*b),
            None => self.xs[k] + Q::ONE,
        }
    }

    fn merge_point(&mut self, k: usize, y: Q) {
        self.pts[k] = Some(match self.pts[k] {
            None => y,
            Some(c) => self.mode.pick(c, y),
        });
    }

    /// Merges `line` into the interval after breakpoint `k`. Returns the number
    /// of breakpoints inserted (0 or 1).
    fn merge_gap(&mut self, k: usize, line: Line) -> usize {
        let cur = match self.gaps[k] {
            None => {
                self.gaps[k] = Some(line);
                return 0;
            }
            Some(c) if c == line => return 0,
            Some(c) => c,
        };
        let a = self.xs[k];
        let b = self.xs.get(k + 1).copied();
        if let Some(x) = cur.crossing(&line) {
            if x > a && b.is_none_or(|b| x < b) {
                let j = self.split(x);
                debug_assert_eq!(j, k + 1);
                for idx in [k, k + 1] {
                    let p = self.probe(idx);
                    let c = self.gaps[idx].unwrap();
                    if self.mode.better(line.at(p), c.at(p)) {
                        self.gaps[idx] = Some(line);
                    }
                }
                return 1;
            }
        }
        let p = self.probe(k);
        if self.mode.better(line.at(p), cur.at(p)) {
            self.gaps[k] = Some(line);
        }
        0
    }

    pub fn merge(&mut self, piece: &Piece) {
        let start = self.xs[0];
        let (mut lo, mut lo_closed) = (piece.lo, piece.lo_closed);
        if lo < start {
            lo = start;
            lo_closed = true;
        }
        let (mut hi, mut hi_closed) = (piece.hi, piece.hi_closed);
        if let Some(end) = self.end {
            if hi.is_none_or(|h| h > end) {
                hi = Some(end);
                hi_closed = true;
            }
        }
        if let Some(h) = hi {
            if h < lo || (h == lo && !(lo_closed && hi_closed)) {
                return;
            }
        }
        let i_lo = self.split(lo);
        let mut i_hi = match hi {
            Some(h) => self.split(h),
            None => self.xs.len() - 1,
        };
        let line = piece.line;
        if lo_closed {
            self.merge_point(i_lo, line.at(lo));
        }
        if hi.is_some() && hi_closed && i_hi != i_lo {
            self.merge_point(i_hi, line.at(hi.unwrap()));
        }
        if hi.is_some() && i_hi == i_lo {
            return;
        }
        let mut k = i_lo;
        let unbounded = hi.is_none();
        loop {
            if !unbounded && k >= i_hi {
                break;
            }
            if k > i_lo {
                let x = self.xs[k];
                self.merge_point(k, line.at(x));
            }
            let added = self.merge_gap(k, line);
            if added == 1 {
                // The crossing point lies on both lines; the point merge on the
                // next iteration is a no-op but keeps the loop uniform.
                i_hi += 1;
            }
            k += 1;
            if unbounded && k >= self.xs.len() {
                break;
            }
        }
    }

    /// Converts the envelope into a curve. In `Min` mode an uncovered suffix
    /// means `+∞`; with a finite `end` the result has a horizon tail.
    pub fn into_curve(self) -> Result<Curve, CurveError> {
        let n = self.xs.len();
        let mut segs = Vec::with_capacity(n);
        for k in 0..n {
            let x = self.xs[k];
            let is_end = self.end == Some(x);
            let v = match self.pts[k] {
                Some(v) => v,
                None => return Err(CurveError::InteriorInfinity),
            };
            if is_end {
                segs.push(Segment::new(x, v, Q::ZERO, Q::ZERO));
                return Ok(Curve::from_parts(segs, Tail::Horizon(x)));
            }
            match self.gaps[k] {
                Some(l) => segs.push(Segment::new(x, v, l.slope, l.at(x) - v)),
                None => {
                    if self.mode == Mode::Max {
                        return Err(CurveError::InteriorInfinity);
                    }
                    let rest_empty = (k + 1..n).all(|j| self.pts[j].is_none() && self.gaps[j].is_none());
                    if !rest_empty {
                        return Err(CurveError::InteriorInfinity);
                    }
                    segs.push(Segment::new(x, v, Q::ZERO, Q::ZERO));
                    return Ok(Curve::from_parts(segs, Tail::Infinite));
                }
            }
        }
        Ok(Curve::from_parts(segs, Tail::Affine))
    }

    /// Raw segments up to and including the end point, without normalization.
    pub fn into_segments(self) -> Result<Vec<Segment>, CurveError> {
        let mut segs = Vec::with_capacity(self.xs.len());
        for k in 0..self.xs.len() {
            let x = self.xs[k];
            let v = self.pts[k].ok_or(CurveError::InteriorInfinity)?;
            if self.end == Some(x) {
                segs.push(Segment::new(x, v, Q::ZERO, Q::ZERO));
                break;
            }
            let l = self.gaps[k].ok_or(CurveError::InteriorInfinity)?;
            segs.push(Segment::new(x, v, l.slope, l.at(x) - v));
        }
        Ok(segs)
    }
}
