use granular_core::build_particles;
use granular_core::density::{Piece, PiecewiseDensity, Profile};
use granular_core::dynamics::{check_state, LagrangianSystem, SimState, StepperConfig};
use granular_core::force::{ForceField, PiecewiseForce, ZeroForce};
use granular_core::heterogeneous::{
    build_ratio_system, ConcentrationScenario, ForceWeighting, RatioSystem,
};

fn run(sys: &LagrangianSystem, f: &dyn ForceField, cfg: &StepperConfig) -> Vec<SimState> {
    let n = sys.particles().len();
    let s0 = sys.init_state(&vec![0.0; n]).unwrap();
    let mut out = vec![s0.clone()];
    out.extend(sys.march(s0, f, cfg).map(Result::unwrap));
    out
}

fn congested_zone_around(rs: &RatioSystem, s: &SimState, x: f64) -> Option<(f64, f64)> {
    let fld = rs.reconstruct(s).unwrap();
    let k = fld.samples.partition_point(|p| p.x < x);
    let tight =
        |p: &granular_core::eulerian::EulerianSample| (1.0 - p.ratio).abs() < 1e-9 && p.gamma < 0.0;
    if !tight(&fld.samples[k]) || !tight(&fld.samples[k - 1]) {
        return None;
    }
    let mut lo = k - 1;
    while lo > 0 && tight(&fld.samples[lo - 1]) {
        lo -= 1;
    }
    let mut hi = k;
    while hi + 1 < fld.samples.len() && tight(&fld.samples[hi + 1]) {
        hi += 1;
    }
    Some((fld.samples[lo].x, fld.samples[hi].x))
}

#[test]
fn concentration_experiment() {
    let sc = ConcentrationScenario::default();
    let rs = sc.build(1000).unwrap();
    let sys = rs.lagrangian(ForceWeighting::Direct);
    let f = sc.force().unwrap();
    let cfg = StepperConfig::new(1e-3, 0.8);
    let states = run(&sys, &f, &cfg);
    for s in &states {
        let rep = check_state(
            s,
            sys.xtil(),
            sys.masses(),
            cfg.tol_gamma_for(0.8, &s.u_free),
        );
        assert!(
            rep.passed(),
            "t = {}: {:?}",
            s.t,
            rep.failures().collect::<Vec<_>>()
        );
        let fld = rs.reconstruct(s).unwrap();
        for p in &fld.samples {
            assert!(p.ratio <= 1.0 + 1e-12);
            assert!(p.rho <= p.rho_star.unwrap() + 1e-12);
        }
    }
    let z5 = congested_zone_around(&rs, &states[500], 0.5).expect("congested at t = 0.5");
    let z8 = congested_zone_around(&rs, &states[800], 0.5).expect("congested at t = 0.8");
    assert!(z8.0 < z5.0 && z5.1 < z8.1, "{z5:?} {z8:?}");
    // the zone sits where the constraint peaks, so the density there exceeds 1
    let fld = rs.reconstruct(&states[800]).unwrap();
    let peak = fld.samples.iter().map(|p| p.rho).fold(0.0, f64::max);
    assert!(peak > 1.3);
}

#[test]
fn constraint_values_travel_with_particles() {
    let sc = ConcentrationScenario::default();
    let rs = sc.build(200).unwrap();
    let sys = rs.lagrangian(ForceWeighting::Direct);
    let states = run(&sys, &sc.force().unwrap(), &StepperConfig::new(5e-3, 0.5));
    let last = rs.reconstruct(states.last().unwrap()).unwrap();
    let star = &rs.rho_star0_at_particles;
    assert_eq!(last.samples[0].rho_star, Some(star[0]));
    assert_eq!(
        last.samples[100].rho_star,
        Some(0.5 * (star[99] + star[100]))
    );
    assert_eq!(last.samples.last().unwrap().rho_star, Some(star[199]));
}

#[test]
fn no_force_no_motion() {
    let sc = ConcentrationScenario::default();
    let rs = sc.build(400).unwrap();
    let sys = rs.lagrangian(ForceWeighting::Direct);
    let states = run(&sys, &ZeroForce, &StepperConfig::new(1e-2, 1.0));
    let rho0 = sc.rho0().unwrap();
    for s in [&states[0], states.last().unwrap()] {
        for (x, x0) in s.x.iter().zip(rs.base.positions()) {
            assert!((x - x0).abs() < 1e-14);
        }
        let fld = rs.reconstruct(s).unwrap();
        for p in &fld.samples[1..fld.samples.len() - 1] {
            assert!((p.rho - rho0.value(p.x)).abs() < 1e-4, "x = {}", p.x);
        }
    }
}

#[test]
fn flat_constraint_reproduces_the_homogeneous_run() {
    let rho0 = PiecewiseDensity::new(vec![Piece::new(
        0.0,
        1.0,
        Profile::RaisedCosine {
            base: 0.4,
            amplitude: 0.2,
            period: 1.0,
            center: 0.5,
        },
    )])
    .unwrap();
    let f = PiecewiseForce::compressive(0.5, 0.5).unwrap();
    let cfg = StepperConfig::new(2e-3, 0.8);
    let plain = LagrangianSystem::new(build_particles(&rho0, 500).unwrap());
    let expected = run(&plain, &f, &cfg);
    let rs = build_ratio_system(&rho0, &Profile::Constant(1.0), 500).unwrap();
    for w in [ForceWeighting::Direct, ForceWeighting::RhoStarWeighted] {
        assert_eq!(run(&rs.lagrangian(w), &f, &cfg), expected);
    }
}

#[test]
fn weighted_force_variant_differs_but_stays_admissible() {
    let sc = ConcentrationScenario::default();
    let rs = sc.build(300).unwrap();
    let f = sc.force().unwrap();
    let cfg = StepperConfig::new(2e-3, 0.5);
    let direct = run(&rs.lagrangian(ForceWeighting::Direct), &f, &cfg);
    let sys = rs.lagrangian(ForceWeighting::RhoStarWeighted);
    let weighted = run(&sys, &f, &cfg);
    assert_ne!(direct.last().unwrap().x, weighted.last().unwrap().x);
    for s in &weighted {
        assert!(check_state(s, sys.xtil(), sys.masses(), 1e-10).passed());
    }
}

#[test]
fn initial_density_above_the_cap_is_rejected() {
    let sc = ConcentrationScenario {
        fill: 1.2,
        ..Default::default()
    };
    assert!(sc.build(100).is_err());
}
