//! Brute-force oracles for the curve operators and a seeded generator of
//! random piecewise-affine curves. Breakpoints of generated curves lie on the
//! `1/2` grid, so sums and differences of breakpoints lie on the `1/8` grid
//! used for sampling; between grid points every operand is affine and extrema
//! over a cell are one-sided limits at its ends.

#![allow(dead_code)]

use atsnc::minplus::{Curve, Segment, Tail};
use atsnc::q::{q, Ext, Q};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grid() -> Q {
    q(1, 8)
}

/// `k/8` for `k in 0..n`.
pub fn samples(n: i128) -> Vec<Q> {
    (0..n).map(|k| q(k, 8)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick(rng: &mut ChaCha8Rng, xs: &[Q]) -> Q {
    *xs.choose(rng).unwrap()
}

/// Random curve in `F₀` with up to four segments on `[0, 6]`. When
/// `monotone` is false slopes and jumps may be negative but the final slope is
/// kept non-negative.
pub fn random_curve(rng: &mut ChaCha8Rng, allow_infinite: bool, monotone: bool) -> Curve {
    let n = rng.gen_range(1..=4usize);
    let mut cells: Vec<i128> = (1..=12).collect();
    cells.shuffle(rng);
    let mut starts: Vec<Q> = cells[..n - 1].iter().map(|k| q(*k, 2)).collect();
    starts.push(Q::ZERO);
    starts.sort();
    let (slopes, jumps, steps): (Vec<Q>, Vec<Q>, Vec<Q>) = if monotone {
        (
            vec![Q::ZERO, q(1, 2), Q::ONE, q(2, 1), q(3, 1)],
            vec![Q::ZERO, Q::ZERO, q(1, 2), Q::ONE, q(2, 1)],
            vec![Q::ZERO, Q::ZERO, q(1, 2), Q::ONE],
        )
    } else {
        (
            vec![-Q::ONE, Q::ZERO, q(1, 2), Q::ONE, q(2, 1)],
            vec![-Q::ONE, Q::ZERO, Q::ZERO, Q::ONE],
            vec![-Q::ONE, Q::ZERO, Q::ONE],
        )
    };
    let mut segs: Vec<Segment> = Vec::new();
    for (i, t) in starts.iter().enumerate() {
        let v = match segs.last() {
            None => Q::ZERO,
            Some(p) => p.v + p.jump + p.slope * (*t - p.t) + pick(rng, &steps),
        };
        let mut slope = pick(rng, &slopes);
        if i + 1 == starts.len() && slope.is_negative() {
            slope = Q::ZERO;
        }
        segs.push(Segment::new(*t, v, slope, pick(rng, &jumps)));
    }
    let infinite = allow_infinite && rng.gen_range(0..5) == 0;
    let tail = if infinite {
        let p = *segs.last().unwrap();
        let t = q(13, 2);
        let v = p.v + p.jump + p.slope * (t - p.t) + pick(rng, &steps);
        segs.push(Segment::new(t, v, Q::ZERO, Q::ZERO));
        Tail::Infinite
    } else {
        Tail::Affine
    };
    Curve::new(segs, tail).expect("generated curve is well formed")
}

/// Random wide-sense increasing curve whose slopes are all at least 1 (jumps
/// and flat steps excluded from the slope set), used as a server curve.
pub fn random_server(rng: &mut ChaCha8Rng) -> Curve {
    let n = rng.gen_range(1..=3usize);
    let mut cells: Vec<i128> = (1..=8).collect();
    cells.shuffle(rng);
    let mut starts: Vec<Q> = cells[..n - 1].iter().map(|k| q(*k, 2)).collect();
    starts.push(Q::ZERO);
    starts.sort();
    let mut segs: Vec<Segment> = Vec::new();
    for t in &starts {
        let v = match segs.last() {
            None => Q::ZERO,
            Some(p) => p.v + p.jump + p.slope * (*t - p.t) + pick(rng, &[Q::ZERO, Q::ONE]),
        };
        let slope = pick(rng, &[Q::ZERO, Q::ONE, q(2, 1), q(3, 1)]);
        segs.push(Segment::new(*t, v, slope, pick(rng, &[Q::ZERO, Q::ZERO, Q::ONE])));
    }
    if segs.last().unwrap().slope.is_zero() {
        segs.last_mut().unwrap().slope = Q::ONE;
    }
    Curve::new(segs, Tail::Affine).unwrap()
}

fn left(f: &Curve, x: Q) -> Option<Ext> {
    x.is_positive().then(|| f.eval_left(x))
}

/// `inf` or `sup` over `s ∈ [0, t]` of `f(s) + g(t − s)` by scanning the grid
/// with one-sided limits.
pub fn conv_oracle(f: &Curve, g: &Curve, t: Q, sup: bool) -> Ext {
    let step = grid();
    let mut vals: Vec<Ext> = Vec::new();
    let mut s = Q::ZERO;
    while s <= t {
        let u = t - s;
        vals.push(f.eval(s) + g.eval(u));
        if let Some(fl) = left(f, s) {
            vals.push(fl + g.eval_right(u));
        }
        if let Some(gl) = left(g, u) {
            vals.push(f.eval_right(s) + gl);
        }
        s += step;
    }
    if sup {
        *vals.iter().max().unwrap()
    } else {
        *vals.iter().min().unwrap()
    }
}

/// `inf_{s ∈ [t, h]} f(s) − g(s − t)` on the grid; `g` finite.
pub fn deconv_oracle(f: &Curve, g: &Curve, t: Q, h: Q) -> Q {
    let step = grid();
    let mut best: Option<Q> = None;
    let mut take = |v: Q| best = Some(best.map_or(v, |b: Q| b.min(v)));
    let mut s = t;
    while s <= h {
        let u = s - t;
        take(f.at(s) - g.at(u));
        if s > t {
            take(f.eval_left(s).unwrap() - g.eval_left(u).unwrap());
        }
        if s < h {
            take(f.eval_right(s).unwrap() - g.eval_right(u).unwrap());
        }
        s += step;
    }
    best.unwrap()
}

/// `sup{s ≥ 0 : f(s) ≤ w}` for a non-periodic increasing `f` with breakpoints
/// on the `1/2` grid below `limit`; `None` when the set is unbounded.
pub fn inverse_oracle(f: &Curve, w: Q, limit: Q) -> Option<Q> {
    let h = q(1, 2);
    let mut best = Q::ZERO;
    let mut a = Q::ZERO;
    loop {
        if f.eval(a) > Ext::Fin(w) {
            return Some(best);
        }
        best = a;
        let ra = f.eval_right(a);
        if ra > Ext::Fin(w) {
            return Some(best);
        }
        let ra = ra.unwrap();
        if a >= limit {
            // Affine beyond every breakpoint.
            let slope = f.eval_right(a + Q::ONE).unwrap() - ra;
            if slope.is_zero() {
                return None;
            }
            return Some(a + (w - ra) / slope);
        }
        let b = a + h;
        let lb = f.eval_left(b);
        if lb <= Ext::Fin(w) {
            best = b;
        } else {
            let slope = (lb.unwrap() - ra) / h;
            return Some(a + (w - ra) / slope);
        }
        a = b;
    }
}

/// `inf{t ≥ 0 : f(t) ≥ y}` by the same cell walk; `None` for `+∞`.
pub fn reach_oracle(f: &Curve, y: Q, limit: Q) -> Option<Q> {
    let h = q(1, 2);
    let mut a = Q::ZERO;
    loop {
        if f.eval(a) >= Ext::Fin(y) || f.eval_right(a) >= Ext::Fin(y) {
            return Some(a);
        }
        let ra = f.eval_right(a).unwrap();
        if a >= limit {
            let slope = f.eval_right(a + Q::ONE).unwrap() - ra;
            if slope.is_zero() {
                return None;
            }
            return Some(a + (y - ra) / slope);
        }
        let b = a + h;
        let lb = f.eval_left(b).unwrap();
        if lb >= y && lb > ra {
            return Some(a + (y - ra) / ((lb - ra) / h));
        }
        a = b;
    }
}

/// Super-additive closure of a piecewise-constant increasing step function
/// with jumps on the `step` grid and `f = 0` on `[0, step]`, by dynamic
/// programming over point values `p[k] = C(k·step)` and open-cell values
/// `o[k] = C` on `(k·step, (k+1)·step)`.
pub fn closure_oracle(f: &Curve, step: Q, cells: usize) -> (Vec<Q>, Vec<Q>) {
    let fp: Vec<Q> = (0..=cells).map(|k| f.at(Q::int(k as i128) * step)).collect();
    let fo: Vec<Q> = (0..=cells).map(|k| f.at(Q::int(k as i128) * step + step / Q::int(2))).collect();
    let mut p = vec![Q::ZERO; cells + 1];
    let mut o = vec![Q::ZERO; cells + 1];
    for k in 0..=cells {
        let mut best = fp[k];
        for j in 1..k {
            best = best.max(p[j] + fp[k - j]);
        }
        for j in 0..k {
            best = best.max(o[j] + fo[k - j - 1]);
        }
        p[k] = best;
        let mut cell = fo[k];
        for j in 1..=k {
            cell = cell.max(p[j] + fo[k - j]);
        }
        for j in 0..=k {
            cell = cell.max(o[j] + fp[k - j]);
            cell = cell.max(o[j] + fo[k - j]);
            if k > j {
                cell = cell.max(o[j] + fo[k - j - 1]);
            }
        }
        o[k] = cell;
    }
    (p, o)
}

fn check(errs: &mut Vec<String>, case: usize, name: &str, t: Q, got: Ext, want: Ext) {
    if got != want && errs.len() < 20 {
        errs.push(format!("case {case} {name} at t={t}: got {got}, want {want}"));
    }
}

/// Runs every binary and unary operator on `pairs` random curve pairs against
/// the oracles at `points` grid samples. Returns the first mismatches found.
pub fn operator_suite(seed: u64, pairs: usize, points: i128) -> Vec<String> {
    use atsnc::minplus::*;
    let mut errs = Vec::new();
    let ts = samples(points);
    let mut r = rng(seed);
    for case in 0..pairs {
        let f = random_curve(&mut r, true, true);
        let g = random_curve(&mut r, true, true);
        let conv = min_plus_conv(&f, &g).unwrap();
        let sconv = max_plus_conv(&f, &g).unwrap();
        let lo = pointwise_min(&f, &g).unwrap();
        let hi = pointwise_max(&f, &g).unwrap();
        for t in &ts {
            check(&mut errs, case, "min_plus_conv", *t, conv.eval(*t), conv_oracle(&f, &g, *t, false));
            check(&mut errs, case, "max_plus_conv", *t, sconv.eval(*t), conv_oracle(&f, &g, *t, true));
            check(&mut errs, case, "pointwise_min", *t, lo.eval(*t), f.eval(*t).min(g.eval(*t)));
            check(&mut errs, case, "pointwise_max", *t, hi.eval(*t), f.eval(*t).max(g.eval(*t)));
        }

        // Deconvolution: non-monotone f against zero (exact everywhere) and
        // against an increasing affine-tailed g on a horizon.
        let fd = random_curve(&mut r, false, false);
        let gd = random_curve(&mut r, false, true);
        let h = q(8, 1);
        let closure = max_plus_deconv(&fd, &zero(), h).unwrap();
        let general = max_plus_deconv(&fd, &gd, h).unwrap();
        for t in &ts {
            let far = *t + q(10, 1);
            check(
                &mut errs,
                case,
                "max_plus_deconv(f, 0)",
                *t,
                closure.eval(*t),
                Ext::Fin(deconv_oracle(&fd, &zero(), *t, far.max(h))),
            );
            if *t <= h {
                check(
                    &mut errs,
                    case,
                    "max_plus_deconv(f, g)",
                    *t,
                    general.eval(*t),
                    Ext::Fin(deconv_oracle(&fd, &gd, *t, h)),
                );
            }
        }

        // Pseudo-inverse and first reach on f.
        let limit = q(13, 2);
        let bounded = inverse_oracle(&f, Q::int(1000), limit).is_none();
        match pseudo_inverse(&f) {
            Ok(inv) => {
                for w in &ts {
                    let want = inverse_oracle(&f, *w, limit).map_or(Ext::Inf, Ext::Fin);
                    check(&mut errs, case, "pseudo_inverse", *w, inv.eval(*w), want);
                }
            }
            Err(CurveError::UnboundedPseudoInverse { .. }) if bounded => {}
            Err(e) => errs.push(format!("case {case} pseudo_inverse failed: {e}")),
        }
        for y in &ts {
            let want = reach_oracle(&f, *y, limit).map_or(Ext::Inf, Ext::Fin);
            check(&mut errs, case, "first_reach", *y, first_reach(&f, *y), want);
        }

        // Horizontal deviation against the sampled delay function: the result
        // dominates every sample and is approached within the slope bound.
        let a = random_curve(&mut r, false, true);
        let b = random_server(&mut r);
        let dev = horizontal_deviation(&a, &b).unwrap();
        let ra = long_term_rate(&a).unwrap();
        let rb = long_term_rate(&b).unwrap();
        if ra > rb {
            check(&mut errs, case, "horizontal_deviation", Q::ZERO, dev, Ext::Inf);
        } else {
            let step = q(1, 16);
            let mut best = Q::ZERO;
            let mut t = Q::ZERO;
            while t <= q(10, 1) {
                let s = reach_oracle(&b, a.at(t), q(4, 1)).unwrap();
                best = best.max(s - t);
                t += step;
            }
            let d = dev.unwrap();
            if d < best || d > best + step * Q::int(3) {
                errs.push(format!("case {case} horizontal_deviation {d} vs sampled {best}"));
            }
        }
    }
    errs
}
