//! JSON form of a curve:
//! `{"segments":[{"t","v","slope","jump"}], "tail_slope": Q | "inf",
//!   "periodic"?: {"start","period","increment"}, "horizon"?: Q}`.

use super::{Curve, Segment, Tail};
use crate::q::{Ext, Q};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentJson {
    t: Q,
    v: Q,
    slope: Q,
    jump: Q,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeriodicJson {
    start: Q,
    period: Q,
    increment: Q,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveJson {
    segments: Vec<SegmentJson>,
    tail_slope: Ext,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    periodic: Option<PeriodicJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<Q>,
}

impl Serialize for Curve {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let segs = self.segments();
        let last_slope = segs.last().unwrap().slope;
        let (tail_slope, periodic, horizon) = match self.tail() {
            Tail::Affine => (Ext::Fin(last_slope), None, None),
            Tail::Infinite => (Ext::Inf, None, None),
            Tail::Periodic { start, period, increment } => {
                (Ext::Fin(increment / period), Some(PeriodicJson { start, period, increment }), None)
            }
            Tail::Horizon(h) => (Ext::Fin(last_slope), None, Some(h)),
        };
        CurveJson {
            segments: segs.iter().map(|s| SegmentJson { t: s.t, v: s.v, slope: s.slope, jump: s.jump }).collect(),
            tail_slope,
            periodic,
            horizon,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Curve {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Curve, D::Error> {
        let j = CurveJson::deserialize(de)?;
        let segs: Vec<Segment> = j.segments.iter().map(|s| Segment::new(s.t, s.v, s.slope, s.jump)).collect();
        let last_slope = segs.last().map(|s| s.slope);
        let tail = match (j.periodic, j.horizon, j.tail_slope) {
            (Some(_), Some(_), _) => return Err(D::Error::custom("a curve cannot be both periodic and truncated")),
            (Some(p), None, Ext::Fin(s)) => {
                if p.period.is_positive() && s != p.increment / p.period {
                    return Err(D::Error::custom("tail_slope must equal increment/period"));
                }
                Tail::Periodic { start: p.start, period: p.period, increment: p.increment }
            }
            (None, Some(h), Ext::Fin(s)) => {
                if last_slope != Some(s) {
                    return Err(D::Error::custom("tail_slope must equal the last segment slope"));
                }
                Tail::Horizon(h)
            }
            (None, None, Ext::Fin(s)) => {
                if last_slope != Some(s) {
                    return Err(D::Error::custom("tail_slope must equal the last segment slope"));
                }
                Tail::Affine
            }
            (None, None, Ext::Inf) => Tail::Infinite,
            (_, _, Ext::Inf) => return Err(D::Error::custom("an infinite tail cannot be periodic or truncated")),
        };
        Curve::new(segs, tail).map_err(D::Error::custom)
    }
}
