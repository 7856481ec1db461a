use granular_core::density::{Piece, PiecewiseDensity, Profile};
use granular_core::heterogeneous::ConcentrationScenario;
use granular_core::scenarios::TwoBlockParams;
use granular_core::{build_particles, Error};

/// Composite Simpson on a fine grid, independent of the library's quadrature.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Quantile by bisection on the Simpson cumulative mass.
fn quantile(f: &impl Fn(f64) -> f64, a: f64, b: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if simpson(f, a, mid, 2000) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn uniform_pair() {
    let ps = build_particles(&PiecewiseDensity::uniform(0.0, 1.0).unwrap(), 2).unwrap();
    assert_eq!(ps.positions(), &[0.25, 0.75]);
    assert_eq!(ps.masses(), &[0.5, 0.5]);
}

#[test]
fn two_blocks_split_evenly() {
    let ps = build_particles(&TwoBlockParams::default().density().unwrap(), 2000).unwrap();
    assert!((ps.total_mass() - 2.0).abs() < 1e-12);
    assert!(ps.masses().iter().all(|&m| (m - 1e-3).abs() < 1e-15));
    let left = ps.positions().iter().filter(|&&x| x < 0.0).count();
    assert_eq!(left, 1000);
    assert!((ps.positions()[0] - (-1.1024 + 0.5e-3)).abs() < 1e-12);
    assert!((ps.positions()[999] - (-0.1024 - 0.5e-3)).abs() < 1e-12);
    assert!((ps.positions()[1000] - (0.1024 + 0.5e-3)).abs() < 1e-12);
}

#[test]
fn bumped_density_matches_quadrature_oracle() {
    let sc = ConcentrationScenario::default();
    let rho0 = sc.rho0().unwrap();
    let f = |x: f64| rho0.value(x);
    let mass = simpson(f, 0.0, 1.0, 4000);
    assert!((mass - 0.96).abs() < 1e-12);
    assert!((rho0.total_mass() - mass).abs() < 1e-12);

    let n = 50;
    let ps = build_particles(&rho0, n).unwrap();
    let m = mass / n as f64;
    for (i, &x) in ps.positions().iter().enumerate().step_by(7) {
        let q = quantile(&f, 0.0, 1.0, (i as f64 + 0.5) * m);
        assert!((x - q).abs() < 1e-9, "particle {i}: {x} vs {q}");
    }
}

#[test]
fn degenerate_densities_are_rejected() {
    let zero = PiecewiseDensity::new(vec![Piece::new(0.0, 1.0, Profile::Constant(0.0))]).unwrap();
    assert_eq!(build_particles(&zero, 10).unwrap_err(), Error::EmptyMeasure);
    assert!(
        PiecewiseDensity::new(vec![Piece::new(0.0, 1.0, Profile::Constant(f64::NAN))]).is_err()
    );
    assert!(build_particles(&PiecewiseDensity::uniform(0.0, 1.0).unwrap(), 0).is_err());
}
