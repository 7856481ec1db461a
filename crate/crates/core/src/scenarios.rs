//! Two congested blocks pushed together and pulled apart, with its exact solution.
//!
//! Two unit-density blocks `[a₁, b₁]` and `[a₂, b₂]`, symmetric about 0, feel a force
//! `+α` on `x < 0` and `-α` on `x > 0` until `t*`, reversed afterwards. The motion has
//! four phases:
//!
//! 1. free flight until the blocks touch at `t₁ = √((a₂ - b₁)/α)`;
//! 2. stuck at rest, the adhesion potential growing as `-α t` times the mass to the left;
//! 3. after the reversal, still stuck while the stored compression decays linearly;
//! 4. from `t₂ = 2t*` on, the blocks separate and accelerate away from each other.
//!
//! Phase boundaries are right-continuous, matching the force switch.

use crate::density::{Piece, PiecewiseDensity, Profile};
use crate::dynamics::{BlockHistory, ContactKind, SimState};
use crate::error::{Error, Result};
use crate::force::PiecewiseForce;
use crate::particles::ParticleSystem;
use crate::projection::weighted_distance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBlockParams {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub alpha: f64,
    pub t_star: f64,
}

impl Default for TwoBlockParams {
    /// Unit blocks with gap 0.2048, so that `t₁ = 0.64` for `α = 0.5`, `t* = 1`.
    fn default() -> Self {
        Self::from_gap(0.5, 1.0, 1.0, 0.2048).expect("default parameters are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Free,
    Stuck,
    Relaxing,
    Separated,
}

impl TwoBlockParams {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64, alpha: f64, t_star: f64) -> Result<Self> {
        let p = Self {
            a1,
            b1,
            a2,
            b2,
            alpha,
            t_star,
        };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric blocks of the given width separated by `gap`.
    pub fn from_gap(alpha: f64, t_star: f64, width: f64, gap: f64) -> Result<Self> {
        let h = 0.5 * gap;
        Self::new(-h - width, -h, h, h + width, alpha, t_star)
    }

    pub fn validate(&self) -> Result<()> {
        let v = [self.a1, self.b1, self.a2, self.b2, self.alpha, self.t_star];
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(
                "two-block parameters must be finite".into(),
            ));
        }
        let w1 = self.b1 - self.a1;
        let w2 = self.b2 - self.a2;
        let tol = 1e-12 * (1.0 + self.b2.abs());
        if !(w1 > 0.0) || (w1 - w2).abs() > tol {
            return Err(Error::InvalidConfig(
                "blocks must have equal positive widths".into(),
            ));
        }
        if !(self.a2 > self.b1) {
            return Err(Error::InvalidConfig(
                "blocks must be separated (a2 > b1)".into(),
            ));
        }
        if (self.a1 + self.b2).abs() > tol || (self.b1 + self.a2).abs() > tol {
            return Err(Error::InvalidConfig(
                "blocks must be symmetric about 0".into(),
            ));
        }
        if !(self.alpha > 0.0) || !(self.t_star > 0.0) {
            return Err(Error::InvalidConfig(
                "alpha and t_star must be positive".into(),
            ));
        }
        if !(self.t1() < self.t_star) {
            return Err(Error::InvalidConfig(format!(
                "blocks must touch before the reversal (t1 = {} >= t_star = {})",
                self.t1(),
                self.t_star
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.b1 - self.a1
    }

    pub fn gap(&self) -> f64 {
        self.a2 - self.b1
    }

    pub fn t1(&self) -> f64 {
        (self.gap() / self.alpha).sqrt()
    }

    pub fn t2(&self) -> f64 {
        2.0 * self.t_star
    }

    pub fn phase_at(&self, t: f64) -> Phase {
        if t < self.t1() {
            Phase::Free
        } else if t < self.t_star {
            Phase::Stuck
        } else if t < self.t2() {
            Phase::Relaxing
        } else {
            Phase::Separated
        }
    }

    pub fn density(&self) -> Result<PiecewiseDensity> {
        PiecewiseDensity::new(vec![
            Piece::new(self.a1, self.b1, Profile::Constant(1.0)),
            Piece::new(self.a2, self.b2, Profile::Constant(1.0)),
        ])
    }

    pub fn force(&self) -> Result<PiecewiseForce> {
        PiecewiseForce::two_block(self.alpha, self.t_star)
    }

    /// Exact position, velocity and adhesion potential of a point of the left
    /// (`left = true`) or right block that started at `x0`, with the adhesion
    /// potential taken at the point of the block whose current position is `xg`.
    fn exact_point(&self, left: bool, x0: f64, xg0: f64, t: f64) -> (f64, f64, f64) {
        let (a, w, h) = (self.alpha, self.width(), 0.5 * self.gap());
        let s = if left { 1.0 } else { -1.0 };
        // Γ in the merged block, as a function of the current position
        let merged = |g: f64, xg: f64| {
            if left {
                -g * (xg + w)
            } else {
                g * (xg - w)
            }
        };
        match self.phase_at(t) {
            Phase::Free => (x0 + s * 0.5 * a * t * t, s * a * t, 0.0),
            Phase::Stuck => (x0 + s * h, 0.0, merged(a * t, xg0 + s * h)),
            Phase::Relaxing => (x0 + s * h, 0.0, merged(a * (self.t2() - t), xg0 + s * h)),
            Phase::Separated => {
                let d = t - self.t2();
                (x0 + s * h - s * 0.5 * a * d * d, -s * a * d, 0.0)
            }
        }
    }
}

/// Exact fields at the particle indices of a system built from the two-block density.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// Adhesion potential at the right edge of each particle's mass cell, the point the
    /// discrete `Γᵢ` refers to.
    pub gamma: Vec<f64>,
}

pub fn two_block_exact(
    params: &TwoBlockParams,
    ps: &ParticleSystem,
    t: f64,
) -> Result<ExactSnapshot> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "query time must be nonnegative, got {t}"
        )));
    }
    let n = ps.len();
    let mut out = ExactSnapshot {
        t,
        x: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        gamma: Vec::with_capacity(n),
    };
    for (&x0, &m) in ps.positions().iter().zip(ps.masses()) {
        let left = x0 < 0.0;
        let (x, u, g) = params.exact_point(left, x0, x0 + 0.5 * m, t);
        out.x.push(x);
        out.u.push(u);
        out.gamma.push(g.min(0.0));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub x_l2: f64,
    pub u_l2: f64,
    pub gamma_sup: f64,
    /// `max |Γ^ex|`, the scale for relative adhesion errors.
    pub gamma_scale: f64,
}

pub fn error_norms(sim: &SimState, exact: &ExactSnapshot, masses: &[f64]) -> Result<ErrorReport> {
    let n = masses.len();
    for len in [
        sim.x.len(),
        sim.u.len(),
        sim.gamma.len(),
        exact.x.len(),
        exact.u.len(),
        exact.gamma.len(),
    ] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let gamma_sup = sim
        .gamma
        .iter()
        .zip(&exact.gamma)
        .fold(0.0_f64, |s, (a, b)| s.max((a - b).abs()));
    Ok(ErrorReport {
        x_l2: weighted_distance(&sim.x, &exact.x, masses),
        u_l2: weighted_distance(&sim.u, &exact.u, masses),
        gamma_sup,
        gamma_scale: exact.gamma.iter().fold(0.0_f64, |s, g| s.max(g.abs())),
    })
}

/// Steps during which the two blocks form one congested zone, as the half-open
/// interval `[contact, release)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeInterval {
    pub contact_step: usize,
    pub contact_t: f64,
    pub release_step: Option<usize>,
    pub release_t: Option<f64>,
}

/// Reads the merge interval off the contacts between the last particle of the left
/// block (`interface`) and the first of the right one.
pub fn merge_interval(history: &BlockHistory, interface: usize) -> Option<MergeInterval> {
    let c = history.first(interface, ContactKind::Contact)?;
    let r = history.first_after(interface, ContactKind::Release, c.step);
    Some(MergeInterval {
        contact_step: c.step,
        contact_t: c.t,
        release_step: r.map(|e| e.step),
        release_t: r.map(|e| e.t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::build_particles;

    #[test]
    fn default_phase_times() {
        let p = TwoBlockParams::default();
        assert!((p.t1() - 0.64).abs() < 1e-15);
        assert_eq!(p.t2(), 2.0);
        assert_eq!(p.phase_at(0.64), Phase::Stuck);
        assert_eq!(p.phase_at(1.0), Phase::Relaxing);
        assert_eq!(p.phase_at(2.0), Phase::Separated);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(TwoBlockParams::new(-1.0, -0.1, 0.1, 1.2, 0.5, 1.0).is_err());
        assert!(TwoBlockParams::from_gap(0.5, 0.1, 1.0, 0.2048).is_err());
        assert!(TwoBlockParams::from_gap(0.5, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn initial_snapshot_is_at_rest() {
        let p = TwoBlockParams::default();
        let ps = build_particles(&p.density().unwrap(), 20).unwrap();
        let ex = two_block_exact(&p, &ps, 0.0).unwrap();
        assert_eq!(ex.x, ps.positions());
        assert!(ex.u.iter().chain(&ex.gamma).all(|v| *v == 0.0));
        assert!(two_block_exact(&p, &ps, -1.0).is_err());
    }
}
