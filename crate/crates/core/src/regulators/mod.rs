//! Packet-level models of the per-flow regulator (PFR) and the interleaved
//! regulator (IR) with leaky-bucket shaping curves.
//!
//! Both IR models are provided: the max-plus form, where the shaping term of
//! packet `n` is the `Π` operator over the earlier packets of its flow, and
//! the token-bucket form, where it is `(L_n − Λ_{f,n⊖1})/r_f + D_{n⊖1}`.
//! Conventions: `D_0 = 0`, and for the first packet of a flow `n⊖1 = 0` with
//! `Λ_{f,0} = b_f`.

mod trace;

pub use trace::{trace_csv, trace_json, TraceRow};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::q::Q;
use crate::traffic::{FlowContract, FlowId, Packet, PacketSequence};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegulatorError {
    #[error("no shaping contract for flow {0}")]
    MissingContract(FlowId),
    #[error("packet {index} of flow {flow} has size {size} above the burst {burst}")]
    OversizedPacket { index: usize, flow: FlowId, size: Q, burst: Q },
    #[error("a per-flow regulator takes a single flow, found {0} and {1}")]
    MultiFlow(FlowId, FlowId),
}

/// Shaping contracts of the flows sharing an interleaved regulator.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrConfig {
    pub contracts: BTreeMap<FlowId, FlowContract>,
}

impl IrConfig {
    pub fn new(contracts: impl IntoIterator<Item = FlowContract>) -> IrConfig {
        IrConfig { contracts: contracts.into_iter().map(|c| (c.flow, c)).collect() }
    }

    fn validate(&self, seq: &PacketSequence) -> Result<(), RegulatorError> {
        for (index, p) in seq.packets().iter().enumerate() {
            let c = self.contracts.get(&p.flow).ok_or(RegulatorError::MissingContract(p.flow))?;
            if p.size > c.burst {
                return Err(RegulatorError::OversizedPacket { index, flow: p.flow, size: p.size, burst: c.burst });
            }
        }
        Ok(())
    }
}

/// How the `Π` term is evaluated.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum PiEvaluation {
    /// Running maximum of `D_m − P_{m−1}/r` per flow; linear time.
    #[default]
    Incremental,
    /// The defining maximum over all earlier packets of the flow; quadratic.
    Literal,
}

/// Output of a regulator run together with per-packet diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegulatorTrace {
    pub arrivals: PacketSequence,
    pub departures: PacketSequence,
    /// The shaping term of each packet; `None` when it imposes nothing (the
    /// empty maximum for the first packet of a flow).
    pub eligibility: Vec<Option<Q>>,
    /// Tokens left in the packet's bucket just after it is released.
    pub tokens: Vec<Q>,
}

impl RegulatorTrace {
    pub fn departure_times(&self) -> Vec<Q> {
        self.departures.times()
    }

    /// `D_n − max(B_n, D_{n−1})`: time spent waiting on the shaping term.
    pub fn hol_waits(&self) -> Vec<Q> {
        let mut prev = Q::ZERO;
        let mut out = Vec::with_capacity(self.arrivals.len());
        for (a, d) in self.arrivals.packets().iter().zip(self.departures.packets()) {
            out.push(d.time - a.time.max(prev));
            prev = d.time;
        }
        out
    }
}

/// `max_{1≤m≤n−1} D_m + γ↓(Σ_{j=m}^n L_j)` with `γ↓(w) = (w − b)⁺/r`, for
/// 1-based `n`. `None` is the empty maximum at `n = 1`.
pub fn pi_operator(departures: &[Q], sizes: &[Q], gamma: &FlowContract, n: usize) -> Option<Q> {
    assert!(n >= 1, "packet indices start at 1");
    assert!(departures.len() >= n - 1 && sizes.len() >= n, "prefixes too short");
    let mut best: Option<Q> = None;
    let mut sum = sizes[n - 1];
    for m in (1..n).rev() {
        sum += sizes[m - 1];
        let v = departures[m - 1] + (sum - gamma.burst).pos() / gamma.rate;
        best = Some(best.map_or(v, |b| b.max(v)));
    }
    best
}

fn tokens_after(c: &FlowContract, prev_tokens: Q, prev_departure: Q, departure: Q, size: Q) -> Q {
    c.burst.min(prev_tokens + c.rate * (departure - prev_departure)) - size
}

#[derive(Default)]
struct FlowState {
    /// Departure times and sizes of the flow's packets so far.
    departures: Vec<Q>,
    sizes: Vec<Q>,
    /// Sum of the flow's sizes so far.
    prefix: Q,
    /// `max_m D_m − P_{m−1}/r` over the flow's packets so far.
    best: Option<Q>,
    last_departure: Q,
    tokens: Option<Q>,
}

fn run_max_plus(seq: &PacketSequence, cfg: &IrConfig, eval: PiEvaluation) -> Result<RegulatorTrace, RegulatorError> {
    cfg.validate(seq)?;
    let mut flows: BTreeMap<FlowId, FlowState> = BTreeMap::new();
    let mut prev = Q::ZERO;
    let mut out = Vec::with_capacity(seq.len());
    let mut eligibility = Vec::with_capacity(seq.len());
    let mut tokens = Vec::with_capacity(seq.len());
    for p in seq.packets() {
        let c = &cfg.contracts[&p.flow];
        let st = flows.entry(p.flow).or_default();
        let pi = match eval {
            PiEvaluation::Incremental => st.best.map(|best| {
                let shaped = best + (st.prefix + p.size - c.burst) / c.rate;
                shaped.max(st.last_departure)
            }),
            PiEvaluation::Literal => {
                let mut sizes = st.sizes.clone();
                sizes.push(p.size);
                pi_operator(&st.departures, &sizes, c, sizes.len())
            }
        };
        let d = pi.map_or(p.time.max(prev), |e| p.time.max(prev).max(e));
        let candidate = d - st.prefix / c.rate;
        st.best = Some(st.best.map_or(candidate, |b| b.max(candidate)));
        let before = st.tokens.unwrap_or(c.burst);
        let prev_dep = if st.tokens.is_some() { st.last_departure } else { Q::ZERO };
        let left = tokens_after(c, before, prev_dep, d, p.size);
        st.tokens = Some(left);
        st.prefix += p.size;
        st.last_departure = d;
        if eval == PiEvaluation::Literal {
            st.departures.push(d);
            st.sizes.push(p.size);
        }
        eligibility.push(pi);
        tokens.push(left);
        out.push(Packet::new(d, p.size, p.flow));
        prev = d;
    }
    Ok(RegulatorTrace {
        arrivals: seq.clone(),
        departures: PacketSequence::new(out).expect("departures are non-decreasing"),
        eligibility,
        tokens,
    })
}

/// Interleaved regulator, max-plus form with the `Π` operator applied to each
/// flow's subsequence.
pub fn ir_process_leboudec(seq: &PacketSequence, cfg: &IrConfig) -> Result<RegulatorTrace, RegulatorError> {
    run_max_plus(seq, cfg, PiEvaluation::Incremental)
}

/// [`ir_process_leboudec`] with an explicit `Π` evaluation strategy.
pub fn ir_process_leboudec_with(
    seq: &PacketSequence,
    cfg: &IrConfig,
    eval: PiEvaluation,
) -> Result<RegulatorTrace, RegulatorError> {
    run_max_plus(seq, cfg, eval)
}

/// Interleaved regulator, token-bucket form.
pub fn ir_process_boyer(seq: &PacketSequence, cfg: &IrConfig) -> Result<RegulatorTrace, RegulatorError> {
    cfg.validate(seq)?;
    // (Λ_{f,n⊖1}, D_{n⊖1}) per flow.
    let mut buckets: BTreeMap<FlowId, (Q, Q)> = BTreeMap::new();
    let mut prev = Q::ZERO;
    let mut out = Vec::with_capacity(seq.len());
    let mut eligibility = Vec::with_capacity(seq.len());
    let mut tokens = Vec::with_capacity(seq.len());
    for p in seq.packets() {
        let c = &cfg.contracts[&p.flow];
        let (lambda, last) = *buckets.entry(p.flow).or_insert((c.burst, Q::ZERO));
        let e = (p.size - lambda) / c.rate + last;
        let d = p.time.max(prev).max(e);
        let left = c.burst.min(lambda + c.rate * (d - last)) - p.size;
        buckets.insert(p.flow, (left, d));
        eligibility.push(Some(e));
        tokens.push(left);
        out.push(Packet::new(d, p.size, p.flow));
        prev = d;
    }
    Ok(RegulatorTrace {
        arrivals: seq.clone(),
        departures: PacketSequence::new(out).expect("departures are non-decreasing"),
        eligibility,
        tokens,
    })
}

/// Per-flow regulator for a single-flow sequence.
pub fn pfr_process(seq: &PacketSequence, contract: &FlowContract) -> Result<RegulatorTrace, RegulatorError> {
    if let Some(p) = seq.packets().iter().find(|p| p.flow != contract.flow) {
        return Err(RegulatorError::MultiFlow(contract.flow, p.flow));
    }
    run_max_plus(seq, &IrConfig::new([*contract]), PiEvaluation::Incremental)
}

/// A per-flow regulator bank: each flow is shaped by its own PFR and the
/// outputs are merged by time (ties ordered by flow id).
pub fn pfr_bank(seq: &PacketSequence, cfg: &IrConfig) -> Result<PacketSequence, RegulatorError> {
    cfg.validate(seq)?;
    let mut outs = Vec::new();
    for f in seq.flows() {
        let sub = crate::traffic::subsequence(seq, f);
        outs.push(pfr_process(&sub, &cfg.contracts[&f])?.departures);
    }
    let refs: Vec<&PacketSequence> = outs.iter().collect();
    Ok(PacketSequence::merge(&refs))
}

#[cfg(test)]
pub(crate) mod tests;
