use super::*;
use crate::q::q;
use crate::regulators::{ir_process_boyer, ir_process_leboudec, IrConfig};
use crate::traffic::subsequence;
use proptest::prelude::*;

fn figure_params() -> SpringParams {
    SpringParams::explicit(Q::ONE, Q::ONE, q(43, 50), q(17, 20), q(1, 20)).unwrap()
}

fn cfg(p: &SpringParams) -> IrConfig {
    p.ir_config()
}

fn hundredths(xs: &[i128]) -> Vec<Q> {
    xs.iter().map(|x| q(*x, 100)).collect()
}

#[test]
fn parameters() {
    let p = figure_params();
    assert_eq!((p.i, p.tau, p.increment()), (Q::ONE, q(23, 10), q(7, 10)));
    let dflt = spring_params_default(Q::ONE, Q::ONE, q(43, 50)).unwrap();
    assert_eq!(dflt.d, q(731, 1000));
    assert_eq!(dflt.eps, q(1, 3) * (q(269, 1000)).min(q(731, 3000)));
    assert!(matches!(SpringParams::explicit(Q::ONE, Q::ONE, q(2, 1), Q::ONE, q(1, 20)), Err(ParamError::Delay { .. })));
    assert!(matches!(
        SpringParams::explicit(Q::ONE, Q::ONE, q(2, 1), q(17, 20), q(17, 60)),
        Err(ParamError::Eps { .. })
    ));
    assert!(matches!(spring_params(Q::ONE, Q::ONE, Q::ONE, Q::ONE, q(1, 3)), Err(ParamError::Fraction(_))));
    let s = serde_json::to_string(&p).unwrap();
    assert_eq!(serde_json::from_str::<SpringParams>(&s).unwrap(), p);
    let wrong_tau = s.replace("\"tau\":{\"n\":23", "\"tau\":{\"n\":21");
    assert_ne!(wrong_tau, s);
    assert!(serde_json::from_str::<SpringParams>(&wrong_tau).is_err());
}

#[test]
fn trajectory1_period_zero() {
    let t = trajectory1(&figure_params(), 1);
    assert_eq!(t.a.times(), hundredths(&[85, 105, 185, 205, 210, 310]));
    assert_eq!(t.b.times(), hundredths(&[170, 185, 190, 290, 295, 395]));
    let flows: Vec<FlowId> = t.b.packets().iter().map(|p| p.flow).collect();
    assert_eq!(flows, vec![F1, F1, F2, F2, F3, F3]);
    assert!(!is_fifo(&t.a, &t.b).unwrap());
    assert!(is_fifo_per_flow(&t.a, &t.b).unwrap());
    let gamma = leaky_bucket(Q::ONE, Q::ONE).unwrap();
    for f in [F1, F2, F3] {
        assert_eq!(check_arrival_curve(&t.a, &gamma, Some(f)), Ok(()));
    }
}

#[test]
fn constraint_check_accepts_both_constructions() {
    let p = figure_params();
    for n in [1, 2, 7] {
        let r1 = constraint_check(&trajectory1(&p, n));
        assert!(r1.all_pass(), "{:?}", r1.failures());
        let r2 = constraint_check(&trajectory2(&p, n));
        assert!(r2.all_pass(), "{:?}", r2.failures());
    }
}

#[test]
fn trajectory2_is_fifo_with_small_delays() {
    let p = figure_params();
    let t1 = trajectory1(&p, 3);
    let t2 = trajectory2(&p, 3);
    assert_eq!(t1.b.times(), t2.b.times());
    assert!(is_fifo(&t2.a, &t2.b).unwrap());
    assert_eq!(&t2.s_delays[..6], &[p.d, p.d - p.eps, p.eps, p.d, p.d, p.d]);
    assert!(t2.s_delays.iter().all(|s| *s <= p.d));
}

#[test]
fn injected_faults_are_caught() {
    let p = figure_params();
    let mut late = trajectory1(&p, 2);
    late.s_delays[0] = p.d + Q::ONE;
    assert!(!constraint_check(&late).item("delay_bound").unwrap().pass);

    let mut fast = trajectory1(&p, 1);
    let mut a = fast.a.packets().to_vec();
    a[2].time = a[0].time + p.i / q(2, 1);
    a.sort_by_key(|x| x.time);
    fast.a = PacketSequence::new(a).unwrap();
    let rep = constraint_check(&fast);
    assert!(!rep.item("source_conformance").unwrap().pass);

    let mut reordered = trajectory1(&p, 1);
    reordered.label = TrajectoryLabel::Trajectory2;
    assert!(!constraint_check(&reordered).item("global_order").unwrap().pass);
}

#[test]
fn trajectory3_shapes_and_regulator_output() {
    let p = figure_params();
    let b = trajectory3(&p, 4);
    assert_eq!(b, trajectory1(&p, 4).b);
    // Flow f1 needs burst 2b − r(I − d) at the regulator input, and no less.
    let f1 = subsequence(&b, F1);
    let need = p.f1_burst_at_b();
    assert_eq!(need, q(37, 20));
    assert_eq!(check_arrival_curve(&f1, &leaky_bucket(p.r, need).unwrap(), None), Ok(()));
    assert!(check_arrival_curve(&f1, &leaky_bucket(p.r, need - q(1, 1000)).unwrap(), None).is_err());
    for f in [F2, F3] {
        assert_eq!(check_arrival_curve(&b, &leaky_bucket(p.r, p.b).unwrap(), Some(f)), Ok(()));
    }
    let out = ir_process_leboudec(&trajectory3(&p, 1), &cfg(&p)).unwrap();
    assert_eq!(out.departure_times(), hundredths(&[170, 270, 270, 370, 370, 470]));
}

#[test]
fn departure_floor_holds_on_reference_run() {
    let p = figure_params();
    let b = trajectory3(&p, 60);
    let out = ir_process_boyer(&b, &cfg(&p)).unwrap();
    assert_eq!(departure_floor_violation(&b, &out.departure_times(), p.i), None);
    let mut early = out.departure_times();
    early[5] -= q(1, 2);
    assert_eq!(departure_floor_violation(&b, &early, p.i), Some(2));
}

#[test]
fn xm_examples() {
    let p = figure_params();
    for (m, k) in [(10, 16), (100, 145)] {
        let m = q(m, 1) * p.i;
        let x = trajectory_xm(&p, m, q(1, 2), G);
        assert_eq!(x.k, k);
        assert_eq!(x.index, 6 * k as usize + 1);
        assert!(x.delay_bound >= m);
        let pk = x.seq.packets()[x.index];
        assert_eq!(pk.flow, G);
        let before = x.seq.packets()[x.index - 1].time;
        let after = x.seq.packets()[x.index + 1].time;
        assert!(before < pk.time && pk.time < after);
        let out = ir_process_leboudec(&x.seq, &cfg(&p)).unwrap();
        let delay = out.departure_times()[x.index] - pk.time;
        assert!(delay >= x.delay_bound && delay >= m, "delay {delay} below {m}");
    }
}

#[test]
fn overdrive_examples() {
    let c = FlowContract::new(F1, Q::ONE, Q::ONE);
    assert_eq!(overdrive_trajectory(F1, &c, 5).times(), hundredths(&[0, 50, 100, 150, 200]));
    assert_eq!(overdrive_trajectory(F1, &c, 1).times(), vec![Q::ZERO]);
    let c = FlowContract::new(F2, q(2, 1), q(3, 1));
    let s = overdrive_trajectory(F2, &c, 5);
    let out = ir_process_boyer(&s, &IrConfig::new([c])).unwrap();
    let period = q(3, 2);
    assert_eq!(out.departure_times(), (0..5).map(|k| period * q(k, 1)).collect::<Vec<_>>());
}

#[test]
fn bundle_json_roundtrip() {
    let t = trajectory2(&figure_params(), 2);
    let s = serde_json::to_string(&t).unwrap();
    assert_eq!(serde_json::from_str::<TrajectoryBundle>(&s).unwrap(), t);
}

fn arb_params() -> impl Strategy<Value = SpringParams> {
    (1i128..5, 1i128..5, 1i128..20, 1i128..20)
        .prop_map(|(r, b, df, ef)| spring_params(q(r, 2), q(b, 2), q(b, r) * q(3, 2), q(df, 20), q(ef, 20)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn construction_meets_premises_for_all_parameters(p in arb_params(), n in 1usize..6) {
        prop_assert!(p.increment().is_positive());
        let r1 = constraint_check(&trajectory1(&p, n));
        prop_assert!(r1.all_pass(), "{:?}", r1.failures());
        let r2 = constraint_check(&trajectory2(&p, n));
        prop_assert!(r2.all_pass(), "{:?}", r2.failures());
    }

    #[test]
    fn departure_floor_and_delay_chain(p in arb_params()) {
        let b = trajectory3(&p, 12);
        let d = ir_process_leboudec(&b, &cfg(&p)).unwrap().departure_times();
        prop_assert_eq!(departure_floor_violation(&b, &d, p.i), None);
        let b1 = b.packets()[0].time;
        for k in 0..12 {
            let n = 6 * k;
            let delay = d[n] - b.packets()[n].time;
            prop_assert!(delay >= q(k as i128, 1) * p.increment() + b1 - q(2, 1) * p.d);
        }
    }
}
