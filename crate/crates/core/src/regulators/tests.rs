use super::*;
use crate::minplus::leaky_bucket;
use crate::q::{q, Q};
use crate::traffic::{check_arrival_curve, subsequence, FlowContract, FlowId, Packet, PacketSequence};
use proptest::prelude::*;

fn i(n: i128) -> Q {
    Q::int(n)
}

fn seq(rows: &[(Q, Q, u32)]) -> PacketSequence {
    PacketSequence::new(rows.iter().map(|(t, l, f)| Packet::new(*t, *l, FlowId(*f))).collect()).unwrap()
}

fn contract(f: u32, r: Q, b: Q) -> FlowContract {
    FlowContract::new(FlowId(f), r, b)
}

#[test]
fn pi_operator_examples() {
    let (r, b) = (i(2), i(3));
    let g = contract(1, r, b);
    assert_eq!(pi_operator(&[], &[b], &g, 1), None);
    assert_eq!(pi_operator(&[i(0)], &[b, b], &g, 2), Some(b / r));
    let g11 = contract(1, i(1), i(1));
    assert_eq!(pi_operator(&[i(0), i(2)], &[i(1), i(1), i(1)], &g11, 3), Some(i(3)));
}

#[test]
fn pfr_examples() {
    let (r, b) = (i(2), i(3));
    let period = b / r;
    let g = contract(1, r, b);
    let t = pfr_process(&seq(&[(i(0), b, 1), (period / i(2), b, 1)]), &g).unwrap();
    assert_eq!(t.departure_times(), vec![i(0), period]);
    let t = pfr_process(&seq(&[(i(0), b, 1), (period, b, 1)]), &g).unwrap();
    assert_eq!(t.departure_times(), vec![i(0), period]);
    assert!(t.hol_waits().iter().all(|w| w.is_zero()));
    let t = pfr_process(&seq(&[(i(0), b, 1), (i(0), b, 1), (i(0), b, 1)]), &g).unwrap();
    assert_eq!(t.departure_times(), vec![i(0), period, period * i(2)]);
    assert_eq!(
        pfr_process(&seq(&[(i(0), b, 1), (i(0), b, 2)]), &g),
        Err(RegulatorError::MultiFlow(FlowId(1), FlowId(2)))
    );
}

fn spring_period_zero() -> (PacketSequence, IrConfig) {
    let (d, e) = (q(17, 20), q(1, 20));
    let one = Q::ONE;
    let s = seq(&[
        (d, one, 1),
        (d + one, one, 1),
        (d + one + e, one, 2),
        (i(2) + e, one, 2),
        (i(2) + e * i(2) + d, one, 3),
        (i(3) + e * i(2), one, 3),
    ]);
    let cfg = IrConfig::new((1..=3).map(|f| contract(f, one, one)));
    (s, cfg)
}

#[test]
fn ir_spring_period_zero() {
    let (s, cfg) = spring_period_zero();
    let want = vec![q(85, 100), q(185, 100), q(190, 100), q(290, 100), q(295, 100), q(395, 100)];
    for t in [
        ir_process_leboudec(&s, &cfg).unwrap(),
        ir_process_leboudec_with(&s, &cfg, PiEvaluation::Literal).unwrap(),
        ir_process_boyer(&s, &cfg).unwrap(),
    ] {
        assert_eq!(t.departure_times(), want);
    }
}

#[test]
fn ir_single_flow_is_pfr() {
    let g = contract(1, i(1), i(2));
    let s = seq(&[(i(0), i(2), 1), (i(0), i(1), 1), (q(1, 2), i(2), 1), (i(5), i(1), 1)]);
    let cfg = IrConfig::new([g]);
    assert_eq!(ir_process_leboudec(&s, &cfg).unwrap(), pfr_process(&s, &g).unwrap());
    assert_eq!(ir_process_boyer(&s, &cfg).unwrap().departure_times(), pfr_process(&s, &g).unwrap().departure_times());
}

#[test]
fn ir_overdrive_sequence() {
    let (r, b) = (i(1), i(2));
    let period = b / r;
    let s = PacketSequence::new((0..5).map(|k| Packet::new(period * q(k, 2), b, FlowId(1))).collect()).unwrap();
    let cfg = IrConfig::new([contract(1, r, b)]);
    let want: Vec<Q> = (0..5).map(|k| period * i(k)).collect();
    assert_eq!(ir_process_leboudec(&s, &cfg).unwrap().departure_times(), want);
    let boyer = ir_process_boyer(&s, &cfg).unwrap();
    assert_eq!(boyer.departure_times(), want);
    assert!(boyer.tokens.iter().all(|t| t.is_zero()));
}

#[test]
fn first_packet_departs_on_arrival() {
    let cfg = IrConfig::new([contract(1, i(1), i(2)), contract(2, i(1), i(2))]);
    let s = seq(&[(i(3), i(2), 2)]);
    assert_eq!(ir_process_boyer(&s, &cfg).unwrap().departure_times(), vec![i(3)]);
    assert_eq!(ir_process_leboudec(&s, &cfg).unwrap().departure_times(), vec![i(3)]);
}

#[test]
fn configuration_errors() {
    let cfg = IrConfig::new([contract(1, i(1), i(2))]);
    assert_eq!(ir_process_boyer(&seq(&[(i(0), i(1), 7)]), &cfg), Err(RegulatorError::MissingContract(FlowId(7))));
    assert!(matches!(
        ir_process_leboudec(&seq(&[(i(0), i(3), 1)]), &cfg),
        Err(RegulatorError::OversizedPacket { index: 0, .. })
    ));
}

#[test]
fn trace_export() {
    let (s, cfg) = spring_period_zero();
    let t = ir_process_boyer(&s, &cfg).unwrap();
    let mut buf = Vec::new();
    trace_csv(&t, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "index,arrival_n,arrival_d,departure_n,departure_d,flow,size_n,size_d,hol_wait_n,hol_wait_d,tokens_n,tokens_d,arrival,departure,hol_wait"
    );
    assert_eq!(lines.nth(3).unwrap(), "4,41,20,29,10,2,1,1,17,20,0,1,2.050000,2.900000,0.850000");
    let mut j = Vec::new();
    trace_json(&t, &mut j).unwrap();
    assert!(String::from_utf8(j).unwrap().contains("\"hol_wait_n\": 17"));
}

pub(crate) fn arb_input(max: usize, flows: u32) -> impl Strategy<Value = (PacketSequence, IrConfig)> {
    let contracts = prop::collection::vec((1i128..5, 2i128..6), flows as usize);
    let packets = prop::collection::vec((0i128..5, 1u32..=flows, 1i128..=4), 0..max);
    (contracts, packets).prop_map(move |(cs, ps)| {
        let cfg = IrConfig::new(
            cs.iter().enumerate().map(|(k, (r, b))| FlowContract::new(FlowId(k as u32 + 1), q(*r, 2), q(*b, 2))),
        );
        let mut t = Q::ZERO;
        let packets = ps
            .into_iter()
            .map(|(gap, f, l)| {
                t += q(gap, 3);
                let burst = cfg.contracts[&FlowId(f)].burst;
                Packet::new(t, burst.min(q(l, 2)), FlowId(f))
            })
            .collect();
        (PacketSequence::new(packets).unwrap(), cfg)
    })
}

/// Whether a departure list is FIFO, causal and shaped per flow.
fn admissible(arrivals: &PacketSequence, times: &[Q], cfg: &IrConfig) -> bool {
    let packets: Vec<Packet> =
        arrivals.packets().iter().zip(times).map(|(p, t)| Packet::new(*t, p.size, p.flow)).collect();
    if times.windows(2).any(|w| w[1] < w[0]) || packets.iter().zip(arrivals.packets()).any(|(d, a)| d.time < a.time) {
        return false;
    }
    let out = PacketSequence::new(packets).unwrap();
    cfg.contracts
        .values()
        .all(|c| check_arrival_curve(&subsequence(&out, c.flow), &leaky_bucket(c.rate, c.burst).unwrap(), None).is_ok())
}

proptest! {
    #[test]
    fn models_agree((s, cfg) in arb_input(40, 4)) {
        let a = ir_process_leboudec(&s, &cfg).unwrap();
        let b = ir_process_boyer(&s, &cfg).unwrap();
        let c = ir_process_leboudec_with(&s, &cfg, PiEvaluation::Literal).unwrap();
        prop_assert_eq!(a.departure_times(), b.departure_times());
        prop_assert_eq!(&a, &c);
        prop_assert_eq!(&a.tokens, &b.tokens);
    }

    #[test]
    fn output_is_admissible_and_tokens_bounded((s, cfg) in arb_input(40, 4)) {
        let t = ir_process_boyer(&s, &cfg).unwrap();
        prop_assert!(admissible(&s, &t.departure_times(), &cfg));
        for (p, tok) in s.packets().iter().zip(&t.tokens) {
            prop_assert!(!tok.is_negative());
            prop_assert!(*tok <= cfg.contracts[&p.flow].burst);
        }
        for ((a, d), e) in s.packets().iter().zip(t.departures.packets()).zip(&t.eligibility) {
            prop_assert!(d.time >= a.time);
            prop_assert!(e.is_none_or(|e| d.time >= e));
        }
    }

    #[test]
    fn departures_are_earliest((s, cfg) in arb_input(12, 3)) {
        let times = ir_process_leboudec(&s, &cfg).unwrap().departure_times();
        let delta = q(1, 1000);
        for n in 0..times.len() {
            let mut moved = times.clone();
            moved[n] -= delta;
            prop_assert!(!admissible(&s, &moved, &cfg), "packet {} could leave earlier", n);
        }
    }
}
