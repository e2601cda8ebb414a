use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use edgealloc_core::synth::{self, SynthConfig};
use edgealloc_core::*;

fn instance(seed: u64) -> ValidatedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    validate_instance(synth::random_instance(&mut rng, &SynthConfig::default())).unwrap()
}

fn scaled_bandwidth(v: &ValidatedInstance, factor: f64) -> ValidatedInstance {
    let mut inst = v.instance().clone();
    inst.params.bandwidth *= factor;
    validate_instance(inst).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uplink_rate_is_linear_in_rho(seed in any::<u64>(), a in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        let v = instance(seed);
        let q = v.levels[0].q;
        let r = uplink_rate(a * t, q, &v.params).unwrap();
        let full = uplink_rate(a, q, &v.params).unwrap();
        prop_assert!((r - t * full).abs() <= 1e-12 * full.max(1.0));
    }

    #[test]
    fn feasibility_survives_more_bandwidth(seed in any::<u64>(), u in 0.0..=1.0f64, rho in 0.0..=1.0f64, k in 1.0..100.0f64) {
        let v = instance(seed);
        let m = u * v.params.m_hi();
        let c = Candidate::with_full_split(m, rho, v.levels[0].q, &v.params);
        if check_feasible(&c, &v).is_feasible() {
            let wide = scaled_bandwidth(&v, k);
            let c = Candidate::with_full_split(m, rho, v.levels[0].q, &wide.params);
            prop_assert!(check_feasible(&c, &wide).is_feasible());
        }
    }

    #[test]
    fn curves_are_midpoint_concave(seed in any::<u64>(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let v = instance(seed);
        for level in &v.levels {
            let mid = level.g.eval(0.5 * (a + b));
            prop_assert!(mid >= 0.5 * (level.g.eval(a) + level.g.eval(b)) - 1e-12);
        }
    }

    #[test]
    fn envelope_is_monotone_and_dominant(seed in any::<u64>(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let v = instance(seed);
        let env = build_envelope(&v).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (lo, hi) = (lo * env.m_hi(), hi * env.m_hi());
        let (el, eh) = (env.evaluate(lo).unwrap(), env.evaluate(hi).unwrap());
        prop_assert!(el.value >= eh.value - 1e-9);
        for j in 0..v.levels.len() {
            prop_assert!(el.value >= env.level_value(j, lo) - 1e-12);
        }
        prop_assert!((el.value - env.level_value(el.level, lo)).abs() <= 1e-12);
    }

    #[test]
    fn more_bandwidth_never_hurts(seed in any::<u64>(), k in 1.0..50.0f64, u in 0.0..=1.0f64) {
        let v = instance(seed);
        let wide = scaled_bandwidth(&v, k);
        let m = u * v.params.m_hi();
        let narrow_env = build_envelope(&v).unwrap();
        let wide_env = build_envelope(&wide).unwrap();
        prop_assert!(wide_env.evaluate(m).unwrap().value >= narrow_env.evaluate(m).unwrap().value - 1e-9);
        let (a, b) = (solve(&v).unwrap(), solve(&wide).unwrap());
        prop_assert!(b.map_opt >= a.map_opt - 1e-9);
    }

    #[test]
    fn solution_is_feasible_and_on_boundary(seed in any::<u64>()) {
        let v = instance(seed);
        let r = solve(&v).unwrap();
        let c = Candidate { m: r.m_opt, rho: r.rho_opt, q: r.q_opt, t_u: r.t_u_opt, t_d: r.t_d_opt };
        prop_assert!(check_feasible(&c, &v).is_feasible());
        let env = build_envelope(&v).unwrap();
        prop_assert!((r.map_star_opt - env.evaluate(r.m_opt).unwrap().value).abs() <= 1e-9);
        prop_assert!(r.map_opt >= v.fusion.map_pre - 1e-12);
        prop_assert!((r.t_u_opt + r.t_d_opt - v.params.total_time).abs() <= 1e-12 * v.params.total_time);
    }

    #[test]
    fn split_sums_to_one(up in 0.0..1e12f64, down in 0.0..1e12f64) {
        let s = overhead_split(up, down);
        if up + down > 0.0 {
            prop_assert!((s.uplink + s.downlink - 1.0).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&s.uplink) && (0.0..=1.0).contains(&s.downlink));
        } else {
            prop_assert!(!s.defined);
        }
    }

    #[test]
    fn instance_json_round_trips(seed in any::<u64>()) {
        let v = instance(seed);
        let text = v.to_json().unwrap();
        let back = ProblemInstance::from_json(&text).unwrap();
        prop_assert_eq!(&back, v.instance());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sweep_is_deterministic(seed in any::<u64>()) {
        let v = instance(seed);
        let b = v.params.bandwidth;
        let spec = SweepSpec::range(SweptParam::Bandwidth, b * 0.1, b * 10.0, 6, true, vec![Baseline::NoneUpdate]).unwrap();
        let a = run_sweep(&v, &spec).unwrap();
        let c = run_sweep(&v, &spec).unwrap();
        prop_assert_eq!(a.to_csv_string().unwrap(), c.to_csv_string().unwrap());
        let parsed = SweepTable::read_csv(a.to_csv_string().unwrap().as_bytes()).unwrap();
        prop_assert_eq!(parsed, a);
    }
}
