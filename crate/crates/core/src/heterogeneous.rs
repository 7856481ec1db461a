//! Dynamics under a maximal density `ρ*` that is transported with the flow.
//!
//! The unknown becomes the ratio `r = ρ / ρ*`, which is bounded by 1 and conserved, so
//! the homogeneous machinery applies unchanged to the measure `r₀ dx`. Each particle
//! keeps the value of `ρ*₀` at its starting point for the whole run.

use crate::density::{Piece, PiecewiseDensity, Profile};
use crate::dynamics::{LagrangianSystem, SimState};
use crate::error::{Error, Result};
use crate::eulerian::{reconstruct, EulerianField};
use crate::force::PiecewiseForce;
use crate::particles::{build_particles, ParticleSystem};

/// How the external force enters the ratio dynamics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ForceWeighting {
    /// Particles accelerate by `f(t, Y)`.
    #[default]
    Direct,
    /// Particles accelerate by `f(t, Y) · ρ*₀`, the momentum source `ρ f` per unit of
    /// carried ratio mass.
    RhoStarWeighted,
}

/// Samples per piece used to check `ρ₀ <= ρ*₀`.
const CONSTRAINT_SAMPLES: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSystem {
    pub base: ParticleSystem,
    pub rho_star0_at_particles: Vec<f64>,
    system: LagrangianSystem,
}

impl RatioSystem {
    /// The Lagrangian system on the ratio measure, with the force weighting applied.
    pub fn lagrangian(&self, weighting: ForceWeighting) -> LagrangianSystem {
        match weighting {
            ForceWeighting::Direct => self.system.clone(),
            ForceWeighting::RhoStarWeighted => self
                .system
                .clone()
                .with_force_scale(self.rho_star0_at_particles.clone())
                .expect("one value per particle"),
        }
    }

    pub fn xtil(&self) -> &crate::monotone::MonotoneMap {
        self.system.xtil()
    }

    /// Eulerian fields with `ρ = r · ρ*`.
    pub fn reconstruct(&self, state: &SimState) -> Result<EulerianField> {
        reconstruct(
            state,
            self.system.xtil(),
            self.base.masses(),
            Some(&self.rho_star0_at_particles),
        )
    }
}

/// Discretizes `r₀ = ρ₀ / ρ*₀` with `n` particles and records `ρ*₀` at each of them.
pub fn build_ratio_system(
    rho0: &PiecewiseDensity,
    rho_star0: &Profile,
    n: usize,
) -> Result<RatioSystem> {
    let mut ratio_pieces = Vec::with_capacity(rho0.pieces().len());
    for piece in rho0.pieces() {
        for k in 0..=CONSTRAINT_SAMPLES {
            let x = piece.lo + (piece.hi - piece.lo) * k as f64 / CONSTRAINT_SAMPLES as f64;
            let (rho, cap) = (piece.profile.value(x), rho_star0.value(x));
            if !(cap > 0.0) || rho > cap * (1.0 + 1e-12) {
                return Err(Error::ConstraintViolation {
                    x,
                    rho,
                    rho_star: cap,
                });
            }
        }
        ratio_pieces.push(Piece::new(
            piece.lo,
            piece.hi,
            Profile::Quotient(Box::new(piece.profile.clone()), Box::new(rho_star0.clone())),
        ));
    }
    let ratio = PiecewiseDensity::new(ratio_pieces)?;
    let base = build_particles(&ratio, n)?;
    let rho_star0_at_particles = base
        .positions()
        .iter()
        .map(|&x| rho_star0.value(x))
        .collect();
    Ok(RatioSystem {
        system: LagrangianSystem::new(base.clone()),
        base,
        rho_star0_at_particles,
    })
}

/// Parameters of the concentration experiment: a constraint with a bump,
/// `ρ*₀ = 1 + amp (1 - cos 2π(x - center))`, an initial density at a fixed fraction
/// of it on `[lo, hi]`, and a constant force pointing to `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationScenario {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub amplitude: f64,
    pub fill: f64,
    pub force: f64,
}

impl Default for ConcentrationScenario {
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: 1.0,
            center: 0.5,
            amplitude: 0.2,
            fill: 0.8,
            force: 0.5,
        }
    }
}

impl ConcentrationScenario {
    pub fn rho_star0(&self) -> Profile {
        Profile::RaisedCosine {
            base: 1.0,
            amplitude: self.amplitude,
            period: 1.0,
            center: self.center,
        }
    }

    pub fn rho0(&self) -> Result<PiecewiseDensity> {
        PiecewiseDensity::new(vec![Piece::new(
            self.lo,
            self.hi,
            Profile::RaisedCosine {
                base: self.fill,
                amplitude: self.fill * self.amplitude,
                period: 1.0,
                center: self.center,
            },
        )])
    }

    pub fn force(&self) -> Result<PiecewiseForce> {
        PiecewiseForce::compressive(self.center, self.force)
    }

    pub fn build(&self, n: usize) -> Result<RatioSystem> {
        build_ratio_system(&self.rho0()?, &self.rho_star0(), n)
    }
}
