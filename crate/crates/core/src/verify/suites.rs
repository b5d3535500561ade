//! Seeded randomized suites. Task `i` of a suite draws from its own ChaCha
//! stream, so results do not depend on the number of worker threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_strict_sc_packets, Witness};
use crate::minplus::{rate_latency, staircase};
use crate::q::Q;
use crate::regulators::{ir_process_boyer, ir_process_leboudec, pfr_bank, IrConfig};
use crate::traffic::{packet_delays, FlowContract, FlowId, Packet, PacketSequence};

/// Generator for task `index` of a suite seeded with `seed`.
pub fn suite_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn quarter(rng: &mut ChaCha8Rng, lo: i128, hi: i128) -> Q {
    Q::new(rng.gen_range(lo..=hi), 4)
}

/// Up to 5 flows with random contracts, up to 200 packets with random gaps
/// and sizes between a common minimum and each flow's burst.
pub fn random_ir_instance(rng: &mut ChaCha8Rng) -> (PacketSequence, IrConfig) {
    let flows = rng.gen_range(1..=5u32);
    let contracts: Vec<FlowContract> =
        (1..=flows).map(|f| FlowContract::new(FlowId(f), quarter(rng, 1, 12), quarter(rng, 4, 16))).collect();
    let lmin = quarter(rng, 1, 4);
    let n = rng.gen_range(1..=200usize);
    let mut t = Q::ZERO;
    let mut packets = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.gen_bool(0.7) {
            t += quarter(rng, 0, 8);
        }
        let c = &contracts[rng.gen_range(0..contracts.len())];
        let steps = ((c.burst - lmin) * Q::int(4)).floor();
        let size = lmin + Q::new(rng.gen_range(0..=steps), 4);
        packets.push(Packet::new(t, size, c.flow));
    }
    (PacketSequence::new(packets).expect("non-decreasing times"), IrConfig::new(contracts))
}

/// `(L^min, I^max)` of an instance: the least packet size and the largest
/// `L^max_f / r_f`.
fn size_and_interval(seq: &PacketSequence, cfg: &IrConfig) -> (Q, Q) {
    let lmin = seq.sizes().into_iter().min().expect("non-empty instance");
    let imax = seq
        .flows()
        .into_iter()
        .map(|f| seq.max_size(f).unwrap() / cfg.contracts[&f].rate)
        .max()
        .expect("non-empty instance");
    (lmin, imax)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct StrictScFailure {
    pub instance: usize,
    pub curve: String,
    pub witness: Option<Witness>,
    pub error: Option<String>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct StrictScSummary {
    pub seed: u64,
    pub instances: usize,
    pub packets: usize,
    pub failures: Vec<StrictScFailure>,
}

/// Checks the staircase and rate-latency strict service curves derived from
/// each instance's sizes and contracts on the interleaved regulator output.
pub fn strict_sc_suite(seed: u64, count: usize) -> StrictScSummary {
    let results: Vec<(usize, Vec<StrictScFailure>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (seq, cfg) = random_ir_instance(&mut suite_rng(seed, i as u64));
            let out = ir_process_boyer(&seq, &cfg).expect("generated instance is valid").departures;
            let (lmin, imax) = size_and_interval(&seq, &cfg);
            let curves = [
                ("staircase", staircase(lmin, imax).unwrap()),
                ("rate_latency", rate_latency(lmin / imax, imax).unwrap()),
            ];
            let mut fails = Vec::new();
            for (name, beta) in curves {
                match check_strict_sc_packets(&seq, &out, &beta) {
                    Ok(r) if r.passed() => {}
                    Ok(r) => fails.push(StrictScFailure {
                        instance: i,
                        curve: name.to_string(),
                        witness: r.witness,
                        error: None,
                    }),
                    Err(e) => fails.push(StrictScFailure {
                        instance: i,
                        curve: name.to_string(),
                        witness: None,
                        error: Some(e.to_string()),
                    }),
                }
            }
            (seq.len(), fails)
        })
        .collect();
    StrictScSummary {
        seed,
        instances: count,
        packets: results.iter().map(|r| r.0).sum(),
        failures: results.into_iter().flat_map(|r| r.1).collect(),
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EquivalenceSummary {
    pub seed: u64,
    pub instances: usize,
    pub packets: usize,
    /// Instances whose departure vectors differ between the two models.
    pub mismatches: Vec<usize>,
}

/// Runs both interleaved-regulator models on each instance and compares the
/// departure vectors.
pub fn equivalence_suite(seed: u64, count: usize) -> EquivalenceSummary {
    let results: Vec<(usize, bool)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (seq, cfg) = random_ir_instance(&mut suite_rng(seed, i as u64));
            let a = ir_process_leboudec(&seq, &cfg).expect("generated instance is valid");
            let b = ir_process_boyer(&seq, &cfg).expect("generated instance is valid");
            (seq.len(), a.departure_times() == b.departure_times())
        })
        .collect();
    EquivalenceSummary {
        seed,
        instances: count,
        packets: results.iter().map(|r| r.0).sum(),
        mismatches: results.iter().enumerate().filter(|(_, r)| !r.1).map(|(i, _)| i).collect(),
    }
}

/// Greedy token-bucket source: each packet leaves at the later of its wished
/// time and the instant its bucket holds enough tokens.
fn conformant_source(rng: &mut ChaCha8Rng, c: &FlowContract, n: usize) -> Vec<Packet> {
    let mut out = Vec::with_capacity(n);
    let (mut tokens, mut last) = (c.burst, Q::ZERO);
    let mut wish = Q::ZERO;
    for _ in 0..n {
        wish += quarter(rng, 0, 8);
        let size = quarter(rng, 1, (c.burst * Q::int(4)).floor());
        let level = c.burst.min(tokens + c.rate * (wish - last));
        let t = if level >= size { wish } else { wish + (size - level) / c.rate };
        tokens = c.burst.min(tokens + c.rate * (t - last)) - size;
        last = t;
        out.push(Packet::new(t, size, c.flow));
    }
    out
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PfrSummary {
    pub seed: u64,
    pub instances: usize,
    /// `(instance, max delay through the FIFO system, max delay with the
    /// per-flow regulators appended)` where the two differ.
    pub mismatches: Vec<(usize, Q, Q)>,
}

/// Conformant sources through a random FIFO system, then a bank of per-flow
/// regulators configured with the source contracts.
pub fn pfr_suite(seed: u64, count: usize) -> PfrSummary {
    let results: Vec<(usize, Q, Q)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = suite_rng(seed, i as u64);
            let flows = rng.gen_range(1..=4u32);
            let contracts: Vec<FlowContract> = (1..=flows)
                .map(|f| FlowContract::new(FlowId(f), quarter(&mut rng, 1, 8), quarter(&mut rng, 4, 12)))
                .collect();
            let mut packets = Vec::new();
            for c in &contracts {
                let n = rng.gen_range(1..=40);
                packets.extend(conformant_source(&mut rng, c, n));
            }
            let a = PacketSequence::from_unsorted(packets).expect("finite times");
            let mut prev = Q::ZERO;
            let through: Vec<Packet> = a
                .packets()
                .iter()
                .map(|p| {
                    prev = prev.max(p.time + quarter(&mut rng, 0, 12));
                    Packet::new(prev, p.size, p.flow)
                })
                .collect();
            let b = PacketSequence::new(through).expect("FIFO output is ordered");
            let cfg = IrConfig::new(contracts);
            let d = pfr_bank(&b, &cfg).expect("contracts cover every flow");
            let max_of = |out: &PacketSequence| {
                packet_delays(&a, out).expect("same flows").into_iter().max().expect("non-empty")
            };
            (i, max_of(&b), max_of(&d))
        })
        .collect();
    PfrSummary { seed, instances: count, mismatches: results.into_iter().filter(|r| r.1 != r.2).collect() }
}
