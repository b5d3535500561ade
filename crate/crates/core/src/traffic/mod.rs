//! Packet sequences, their cumulative functions, arrival-curve conformance and
//! order checks between the input and output of a lossless system.
//!
//! List order is authoritative: packets may share a timestamp, and FIFO checks
//! compare list positions rather than times.

mod io;

pub use io::{read_csv, read_json, write_csv, write_json, PacketRow};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::minplus::{first_reach, leaky_bucket, Curve, CurveError, Segment, Tail};
use crate::q::{Ext, Q};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub u32);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Packet {
    pub time: Q,
    pub size: Q,
    pub flow: FlowId,
}

impl Packet {
    pub fn new(time: Q, size: Q, flow: FlowId) -> Packet {
        Packet { time, size, flow }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TrafficError {
    #[error("packet {index}: time {time} precedes the previous packet")]
    Unordered { index: usize, time: Q },
    #[error("packet {index}: size must be positive, found {size}")]
    NonPositiveSize { index: usize, size: Q },
    #[error("input and output do not carry the same packets (lossy or reordered within a flow)")]
    Lossy,
    #[error("row {row}: expected index {expected}, found {found}")]
    BadIndex { row: usize, expected: usize, found: usize },
    #[error("row {row}: {source}")]
    BadRational { row: usize, source: crate::q::ParseQError },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Packets in list order with non-decreasing times and positive sizes.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct PacketSequence {
    packets: Vec<Packet>,
}

impl PacketSequence {
    pub fn new(packets: Vec<Packet>) -> Result<PacketSequence, TrafficError> {
        for (i, p) in packets.iter().enumerate() {
            if !p.size.is_positive() {
                return Err(TrafficError::NonPositiveSize { index: i, size: p.size });
            }
            if i > 0 && p.time < packets[i - 1].time {
                return Err(TrafficError::Unordered { index: i, time: p.time });
            }
        }
        Ok(PacketSequence { packets })
    }

    pub fn empty() -> PacketSequence {
        PacketSequence::default()
    }

    /// Builds a sequence from packets in arbitrary order by a stable sort on
    /// time, so simultaneous packets keep their relative order.
    pub fn from_unsorted(mut packets: Vec<Packet>) -> Result<PacketSequence, TrafficError> {
        packets.sort_by_key(|a| a.time);
        PacketSequence::new(packets)
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn times(&self) -> Vec<Q> {
        self.packets.iter().map(|p| p.time).collect()
    }

    pub fn sizes(&self) -> Vec<Q> {
        self.packets.iter().map(|p| p.size).collect()
    }

    pub fn flows(&self) -> BTreeSet<FlowId> {
        self.packets.iter().map(|p| p.flow).collect()
    }

    pub fn total_size(&self) -> Q {
        self.packets.iter().map(|p| p.size).sum()
    }

    /// Largest packet of flow `f`, if any.
    pub fn max_size(&self, f: FlowId) -> Option<Q> {
        self.packets.iter().filter(|p| p.flow == f).map(|p| p.size).max()
    }

    /// Concatenation of sequences merged by time; ties keep the order of
    /// `parts`, then list order within each part.
    pub fn merge(parts: &[&PacketSequence]) -> PacketSequence {
        let all: Vec<Packet> = parts.iter().flat_map(|s| s.packets.iter().copied()).collect();
        PacketSequence::from_unsorted(all).expect("merging valid sequences")
    }
}

/// A leaky-bucket contract `γ_{r,b}` for one flow.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct FlowContract {
    pub flow: FlowId,
    pub rate: Q,
    pub burst: Q,
}

impl FlowContract {
    pub fn new(flow: FlowId, rate: Q, burst: Q) -> FlowContract {
        assert!(rate.is_positive(), "contract rate must be positive");
        assert!(!burst.is_negative(), "contract burst must be non-negative");
        FlowContract { flow, rate, burst }
    }

    pub fn curve(&self) -> Curve {
        leaky_bucket(self.rate, self.burst).expect("validated contract")
    }
}

/// Left-continuous cumulative function of a packet sequence.
pub type CumulativeFunction = Curve;

/// `t ↦ Σ L_n·1{M_n < t}` over all packets, or only those of `flow`.
pub fn cumulative_of(seq: &PacketSequence, flow: Option<FlowId>) -> CumulativeFunction {
    let mut segs = vec![Segment::new(Q::ZERO, Q::ZERO, Q::ZERO, Q::ZERO)];
    let mut total = Q::ZERO;
    for p in seq.packets.iter().filter(|p| flow.is_none_or(|f| p.flow == f)) {
        let last = segs.last_mut().unwrap();
        if last.t == p.time {
            last.jump += p.size;
        } else {
            segs.push(Segment::new(p.time, total, Q::ZERO, p.size));
        }
        total += p.size;
    }
    Curve::new(segs, Tail::Affine).expect("cumulative function is well formed")
}

/// Order-preserving filter on one flow.
pub fn subsequence(seq: &PacketSequence, f: FlowId) -> PacketSequence {
    PacketSequence { packets: seq.packets.iter().copied().filter(|p| p.flow == f).collect() }
}

/// A window `[s, t]` of packet instants whose data exceeds `α((t − s)⁺)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct ArrivalViolation {
    pub s: Q,
    pub t: Q,
    pub data: Q,
    pub bound: Q,
    pub excess: Q,
}

impl fmt::Display for ArrivalViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "data {} in [{}, {}] exceeds bound {}", self.data, self.s, self.t, self.bound)
    }
}

/// True when `alpha` is exactly some `γ_{r,b}`.
fn as_leaky_bucket(alpha: &Curve) -> Option<(Q, Q)> {
    match (alpha.segments(), alpha.tail()) {
        ([s], Tail::Affine) if s.v.is_zero() => Some((s.slope, s.jump)),
        _ => None,
    }
}

/// Checks `R(t) − R(s) ≤ α(t − s)` for all `s < t`.
///
/// For a left-continuous step `R` the worst windows start at a packet instant
/// (excluding nothing before it) and end just after one, so it suffices to
/// compare the data in every closed window `[M_i, M_j]` with `α((M_j − M_i)⁺)`.
/// Leaky buckets use an equivalent token-bucket pass and only search for the
/// witness window once a violation is known.
pub fn check_arrival_curve(seq: &PacketSequence, alpha: &Curve, flow: Option<FlowId>) -> Result<(), ArrivalViolation> {
    let mut groups: Vec<(Q, Q)> = Vec::new();
    for p in seq.packets.iter().filter(|p| flow.is_none_or(|f| p.flow == f)) {
        match groups.last_mut() {
            Some((t, l)) if *t == p.time => *l += p.size,
            _ => groups.push((p.time, p.size)),
        }
    }
    if let Some((r, b)) = as_leaky_bucket(alpha) {
        let mut tokens = b;
        let mut prev = None;
        for (j, (t, l)) in groups.iter().enumerate() {
            if let Some(p) = prev {
                tokens = b.min(tokens + r * (*t - p));
            }
            tokens -= *l;
            if tokens.is_negative() {
                return Err(window_search(&groups, alpha, j).expect("token bucket found a violation"));
            }
            prev = Some(*t);
        }
        return Ok(());
    }
    for j in 0..groups.len() {
        if let Some(v) = window_search(&groups, alpha, j) {
            return Err(v);
        }
    }
    Ok(())
}

/// Worst window ending at group `j`, if it violates `alpha`.
fn window_search(groups: &[(Q, Q)], alpha: &Curve, j: usize) -> Option<ArrivalViolation> {
    let tj = groups[j].0;
    let mut data = Q::ZERO;
    let mut worst: Option<ArrivalViolation> = None;
    for i in (0..=j).rev() {
        data += groups[i].1;
        let bound = match alpha.eval_right(tj - groups[i].0) {
            Ext::Fin(v) => v,
            Ext::Inf => break,
        };
        if data > bound {
            let excess = data - bound;
            if worst.is_none_or(|w| excess > w.excess) {
                worst = Some(ArrivalViolation { s: groups[i].0, t: tj, data, bound, excess });
            }
        }
    }
    worst
}

/// For each input packet, the index of its output packet when every flow is
/// served in order. `None` when the two sides differ as multisets or a flow's
/// size sequence changed.
fn per_flow_pairing(inp: &PacketSequence, out: &PacketSequence) -> Option<Vec<usize>> {
    if inp.len() != out.len() {
        return None;
    }
    let mut queues: BTreeMap<FlowId, Vec<usize>> = BTreeMap::new();
    for (k, p) in out.packets.iter().enumerate().rev() {
        queues.entry(p.flow).or_default().push(k);
    }
    let mut pairing = Vec::with_capacity(inp.len());
    for p in &inp.packets {
        let k = queues.get_mut(&p.flow)?.pop()?;
        if out.packets[k].size != p.size {
            return None;
        }
        pairing.push(k);
    }
    Some(pairing)
}

/// Delay of every input packet, pairing packets of each flow in order. Equals
/// index-by-index pairing for FIFO systems.
pub fn packet_delays(inp: &PacketSequence, out: &PacketSequence) -> Result<Vec<Q>, TrafficError> {
    let pairing = per_flow_pairing(inp, out).ok_or(TrafficError::Lossy)?;
    Ok(pairing.iter().enumerate().map(|(n, k)| out.packets[*k].time - inp.packets[n].time).collect())
}

/// Whether the output lists the input packets in the same global order.
pub fn is_fifo(inp: &PacketSequence, out: &PacketSequence) -> Result<bool, TrafficError> {
    if !lossless(inp, out) {
        return Err(TrafficError::Lossy);
    }
    Ok(per_flow_pairing(inp, out).is_some_and(|p| p.iter().enumerate().all(|(n, k)| n == *k)))
}

/// Whether every flow keeps its packet order.
pub fn is_fifo_per_flow(inp: &PacketSequence, out: &PacketSequence) -> Result<bool, TrafficError> {
    if !lossless(inp, out) {
        return Err(TrafficError::Lossy);
    }
    Ok(per_flow_pairing(inp, out).is_some())
}

/// Multiset equality of `(size, flow)`.
pub fn lossless(inp: &PacketSequence, out: &PacketSequence) -> bool {
    let count = |s: &PacketSequence| {
        let mut m: BTreeMap<(FlowId, Q), usize> = BTreeMap::new();
        for p in &s.packets {
            *m.entry((p.flow, p.size)).or_default() += 1;
        }
        m
    };
    count(inp) == count(out)
}

/// Whether no packet leaves before it arrives, under per-flow pairing.
pub fn is_causal(inp: &PacketSequence, out: &PacketSequence) -> Result<bool, TrafficError> {
    Ok(packet_delays(inp, out)?.iter().all(|d| !d.is_negative()))
}

/// Packets released from a fluid output.
#[derive(Clone, Debug, PartialEq)]
pub struct Packetized {
    pub released: PacketSequence,
    /// Indices (into the size list) of packets whose last bit never arrives.
    pub never_released: Vec<usize>,
}

/// Releases packet `n` at the first instant the fluid reaches the cumulative
/// size of packets `1..=n`.
pub fn packetize(fluid: &Curve, sizes: &[Q], flows: &[FlowId]) -> Result<Packetized, CurveError> {
    assert_eq!(sizes.len(), flows.len(), "one flow per packet");
    let mut released = Vec::new();
    let mut never = Vec::new();
    let mut boundary = Q::ZERO;
    for (n, (l, f)) in sizes.iter().zip(flows).enumerate() {
        boundary += *l;
        let reached = match fluid.horizon() {
            Some(h) if fluid.eval(h) < Ext::Fin(boundary) => Ext::Inf,
            _ => first_reach(fluid, boundary),
        };
        match reached {
            Ext::Fin(t) if never.is_empty() => released.push(Packet::new(t, *l, *f)),
            _ => never.push(n),
        }
    }
    let released = PacketSequence::new(released).map_err(|_| CurveError::NotIncreasing)?;
    Ok(Packetized { released, never_released: never })
}
