//! Worked examples, each checked against an independent brute-force oracle
//! built only from `check_feasible` and direct curve evaluation.

use edgealloc_core::synth::{self, SynthConfig};
use edgealloc_core::*;

fn reference() -> ValidatedInstance {
    validate_instance(synth::reference_instance()).unwrap()
}

/// Largest ρ in [0, 1] with a feasible full-split candidate, by bisection on
/// the constraint check.
fn bisect_feasible_rho(v: &ValidatedInstance, level: usize, m: f64) -> f64 {
    let q = v.levels[level].q;
    let ok = |rho: f64| {
        check_feasible(&Candidate::with_full_split(m, rho, q, &v.params), v).is_feasible()
    };
    if ok(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// How far above the exact cap the check lets ρ go: the uplink slack
/// `CONSTRAINT_TOL · B · S_u` expressed in ρ.
fn rho_slack(v: &ValidatedInstance, level: usize) -> f64 {
    let p = &v.params;
    1e-9 * p.bandwidth * p.uplink_efficiency / (p.frame_rate * p.frame_params * v.levels[level].q)
        + 1e-15
}

/// Best `g_j(ρ)` over the feasible part of `ρ ∈ {0, 1e-4, …, 1}`.
fn rho_grid_best(v: &ValidatedInstance, level: usize, m: f64) -> f64 {
    let q = v.levels[level].q;
    (0..=10_000)
        .map(|k| k as f64 * 1e-4)
        .filter(|&r| {
            check_feasible(&Candidate::with_full_split(m, r, q, &v.params), v).is_feasible()
        })
        .map(|r| v.levels[level].g.eval(r))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Best objective over an `n × n` grid of `(M, ρ)` for every level.
fn exhaustive(v: &ValidatedInstance, n: usize) -> (f64, f64) {
    let m_hi = v.params.m_hi();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=n {
        let m = m_hi * i as f64 / n as f64;
        for level in &v.levels {
            for k in 0..=n {
                let rho = k as f64 / n as f64;
                let c = Candidate::with_full_split(m, rho, level.q, &v.params);
                if check_feasible(&c, v).is_feasible() {
                    let val = v.fusion_at(m, level.g.eval(rho));
                    if val > best.0 {
                        best = (val, m);
                    }
                }
            }
        }
    }
    best
}

#[test]
fn rate_examples() {
    let p = reference().params;
    assert_eq!(uplink_rate(0.0, 8.0, &p).unwrap(), 0.0);
    assert_eq!(uplink_rate(0.5, 8.0, &p).unwrap(), 40_000.0);
    assert_eq!(uplink_rate(1.0, 16.0, &p).unwrap(), 160_000.0);
    assert_eq!(downlink_rate(0.0, &p).unwrap(), 0.0);
    assert_eq!(downlink_rate(1e6, &p).unwrap(), 8e5);
    let mut short = p;
    short.total_time = 1.0;
    assert_eq!(downlink_rate(1e6, &short).unwrap(), 8e6);
    assert!(uplink_rate(1.5, 8.0, &p).is_err());
}

#[test]
fn reference_candidate_is_feasible() {
    let c = Candidate {
        m: 1e6,
        rho: 1.0,
        q: 8.0,
        t_u: 2.0,
        t_d: 8.0,
    };
    let v = reference();
    assert!(check_feasible(&c, &v).is_feasible());
    // direct constraint arithmetic
    let p = &v.params;
    assert!(c.t_u + c.t_d <= p.total_time);
    assert!(
        p.frame_rate * p.frame_params * c.rho * c.q * p.total_time
            <= p.bandwidth * p.uplink_efficiency * c.t_u
    );
    assert!(c.m * p.bits() <= p.bandwidth * p.downlink_efficiency * c.t_d);
}

#[test]
fn rho_cap_matches_feasibility_bisection() {
    let v = reference();
    for m in [0.0, 1e6] {
        assert_eq!(rho_cap(m, 0, &v).unwrap(), 1.0);
        assert_eq!(bisect_feasible_rho(&v, 0, m), 1.0);
    }
    let mut wide = synth::reference_instance();
    wide.params.max_params = 1.25e6;
    let v = validate_instance(wide).unwrap();
    assert_eq!(rho_cap(1.25e6, 0, &v).unwrap(), 0.0);
    for m in [1.0e6, 1.1e6, 1.2e6] {
        let d = (rho_cap(m, 0, &v).unwrap() - bisect_feasible_rho(&v, 0, m)).abs();
        assert!(d <= rho_slack(&v, 0), "M = {m}: off by {d}");
    }
    assert!(rho_cap(1.3e6, 0, &v).is_err());
}

#[test]
fn rho_cap_on_random_instances() {
    for inst in synth::random_instances(101, 20, &SynthConfig::default()) {
        let v = validate_instance(inst).unwrap();
        let m_hi = v.params.m_hi();
        for j in 0..v.levels.len() {
            for t in [0.0, 0.3, 0.7, 0.95, 1.0] {
                let m = t * m_hi;
                let d = (rho_cap(m, j, &v).unwrap() - bisect_feasible_rho(&v, j, m)).abs();
                assert!(d <= rho_slack(&v, j), "level {j} M = {m}: off by {d}");
            }
        }
    }
}

#[test]
fn reference_boundary_matches_rho_grid() {
    let v = reference();
    let b = per_level_boundary(0, &v);
    assert_eq!(b.rho_best, 1.0);
    assert!((b.plateau_value - 0.7).abs() < 1e-15);
    assert_eq!(b.threshold, 1e6);
    let env = build_envelope(&v).unwrap();
    for i in 0..=100 {
        let m = 1e4 * i as f64;
        assert!((env.level_value(0, m) - 0.7).abs() < 1e-12);
        assert!((rho_grid_best(&v, 0, m) - 0.7).abs() < 1e-12);
    }
}

#[test]
fn wider_model_decays_to_g0() {
    let mut wide = synth::reference_instance();
    wide.params.max_params = 1.25e6;
    let v = validate_instance(wide).unwrap();
    let env = build_envelope(&v).unwrap();
    assert!((env.level_value(0, 1.25e6) - 0.5).abs() < 1e-12);
    for i in 0..=100 {
        let m = 1.25e4 * i as f64;
        let d = (env.level_value(0, m) - rho_grid_best(&v, 0, m)).abs();
        assert!(d < 1e-4, "M = {m}: off by {d}");
    }
}

#[test]
fn two_level_envelope_crosses() {
    let mut inst = synth::reference_instance();
    inst.params.max_params = 1.25e6;
    inst.levels.push(QuantLevelModel {
        q: 16.0,
        g: PerfCurve::Quadratic {
            a: 0.5,
            c: 0.5,
            d: 0.2,
        },
    });
    let v = validate_instance(inst).unwrap();
    let env = build_envelope(&v).unwrap();
    let start = env.evaluate(0.0).unwrap();
    assert!((start.value - 0.8).abs() < 1e-12);
    assert_eq!(start.level, 1);
    assert_eq!(env.evaluate(1.2e6).unwrap().level, 0);
    let levels: Vec<usize> = env.segments().iter().map(|s| s.level).collect();
    assert!(levels.windows(2).any(|w| w[0] != w[1]));
    for i in 0..=50 {
        let m = env.m_hi() * i as f64 / 50.0;
        let brute = (0..2)
            .map(|j| rho_grid_best(&v, j, m))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((env.evaluate(m).unwrap().value - brute).abs() < 1e-4);
    }
}

#[test]
fn objective_midpoint() {
    let v = reference();
    let env = build_envelope(&v).unwrap();
    let direct = 0.4 + (0.7 - 0.4) * 0.5;
    assert!((objective(5e5, &env).unwrap() - direct).abs() < 1e-12);
    assert!((objective(0.0, &env).unwrap() - 0.4).abs() < 1e-15);
    assert!((objective(1e6, &env).unwrap() - 0.7).abs() < 1e-12);
}

#[test]
fn reference_solution_matches_exhaustive_grid() {
    let v = reference();
    let r = solve(&v).unwrap();
    assert_eq!(r.m_opt, 1e6);
    assert_eq!(r.q_opt, 8.0);
    assert_eq!(r.rho_opt, 1.0);
    assert_eq!(r.t_d_opt, 8.0);
    assert_eq!(r.t_u_opt, 2.0);
    assert!((r.map_opt - 0.7).abs() < 1e-12);
    let (best, m) = exhaustive(&v, 1000);
    assert!((best - r.map_opt).abs() < 1e-12);
    assert_eq!(m, 1e6);
    let split = overhead_split(r.uplink_bits(&v), r.downlink_bits(&v));
    assert!((split.uplink - 0.2).abs() < 1e-12);
    assert!((split.downlink - 0.8).abs() < 1e-12);
}

#[test]
fn interior_optimum_matches_exhaustive_grid() {
    // thin channel: longer downloads starve the upload, so M_opt sits inside
    let mut inst = synth::reference_instance();
    inst.params.bandwidth = 1.2e5;
    inst.params.max_params = 1.4e5;
    inst.levels[0].g = PerfCurve::Quadratic {
        a: 0.3,
        c: 0.6,
        d: 0.1,
    };
    inst.fusion.phi = BlendCurve::Power { gamma: 0.5 };
    let v = validate_instance(inst).unwrap();
    let r = solve(&v).unwrap();
    assert!(r.m_opt > 0.0 && r.m_opt < v.params.m_hi());
    let env = build_envelope(&v).unwrap();
    let grid = GridSpec::new(600, 600).unwrap();
    let o = brute_force(&v, grid, &OracleOptions::default()).unwrap();
    let eps = grid_resolution_bound(&env, grid);
    assert!(o.best.map <= r.map_opt + 1e-12);
    assert!(r.map_opt - o.best.map <= eps);
    let (best, _) = exhaustive(&v, 600);
    assert!(best <= r.map_opt + 1e-12);
    assert!(r.map_opt - best < 1e-3);
}

#[test]
fn starved_channel_and_unbounded_channel() {
    let mut inst = synth::reference_instance();
    inst.params.bandwidth = 1e12;
    let v = validate_instance(inst).unwrap();
    let r = solve(&v).unwrap();
    assert_eq!(r.m_opt, 1e6);
    assert_eq!(r.rho_opt, 1.0);
    assert!((r.map_opt - 0.7).abs() < 1e-12);

    let mut inst = synth::reference_instance();
    inst.params.bandwidth = 1e-9;
    let v = validate_instance(inst).unwrap();
    let o = brute_force(
        &v,
        GridSpec::new(20, 20).unwrap(),
        &OracleOptions::default(),
    )
    .unwrap();
    assert!((o.best.map - 0.4).abs() < 1e-12);
}

#[test]
fn tabulated_convex_points_rejected() {
    let mut inst = synth::reference_instance();
    inst.levels[0].g = PerfCurve::Tabulated(vec![(0.0, 0.5), (0.5, 0.6), (1.0, 0.9)]);
    match validate_instance(inst) {
        Err(Error::Validation(report)) => assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, Issue::ConcavityViolation { .. }))),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn fusion_boundaries() {
    let v = reference();
    for s in [0.0, 0.25, 0.7, 1.0] {
        assert_eq!(v.fusion_at(0.0, s), 0.4);
        assert_eq!(v.fusion_at(1e6, s), s);
    }
}

#[test]
fn sweep_baselines_and_monotone_columns() {
    let v = reference();
    let fixed = FixedStrategyBaseline {
        rho_fix: 1.0,
        q_fix: 8.0,
        m_fix: 5e5,
    };
    let spec = SweepSpec::range(
        SweptParam::Bandwidth,
        1e4,
        4e7,
        20,
        true,
        vec![Baseline::NoneUpdate, Baseline::Fixed(fixed)],
    )
    .unwrap();
    let table = run_sweep(&v, &spec).unwrap();
    assert_eq!(table.rows.len(), 20);
    for row in &table.rows {
        assert_eq!(row.map_none_update, Some(0.4));
        assert!(row.map_opt.unwrap() + 1e-12 >= row.map_fixed.unwrap());
    }
    for w in table.rows.windows(2) {
        assert!(w[1].map_opt.unwrap() >= w[0].map_opt.unwrap() - 1e-9);
    }
}

#[test]
fn frame_rate_sweep_with_generous_bandwidth() {
    // the upload cap stays at 1 for every N, so the optimum never drops
    let mut inst = synth::reference_instance();
    inst.params.bandwidth = 1e9;
    let v = validate_instance(inst).unwrap();
    let spec = SweepSpec::range(SweptParam::FrameRate, 1.0, 100.0, 10, true, vec![]).unwrap();
    let table = run_sweep(&v, &spec).unwrap();
    for w in table.rows.windows(2) {
        assert!(w[1].map_opt.unwrap() >= w[0].map_opt.unwrap() - 1e-9);
    }
}

#[test]
fn split_edge_cases() {
    let s = overhead_split(5.0, 0.0);
    assert_eq!((s.uplink, s.downlink), (1.0, 0.0));
    let s = overhead_split(0.0, 5.0);
    assert_eq!((s.uplink, s.downlink), (0.0, 1.0));
    let (mut zero_m, v) = (synth::reference_instance(), reference());
    zero_m.fusion.map_pre = 0.9;
    let r = solve(&validate_instance(zero_m).unwrap()).unwrap();
    assert_eq!(r.m_opt, 0.0);
    let s = overhead_split(r.uplink_bits(&v), r.downlink_bits(&v));
    assert_eq!((s.uplink, s.downlink), (1.0, 0.0));
}
