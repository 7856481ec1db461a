use crate::density::PiecewiseDensity;
use crate::error::{Error, Result};

/// Sorted particle positions with positive masses: the discrete reference measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    positions: Vec<f64>,
    masses: Vec<f64>,
    total_mass: f64,
}

impl ParticleSystem {
    pub fn new(positions: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::NoParticles);
        }
        if positions.len() != masses.len() {
            return Err(Error::LengthMismatch {
                expected: positions.len(),
                found: masses.len(),
            });
        }
        if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "particle positions",
                index: i,
            });
        }
        if let Some(i) = masses.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::NonPositiveWeight {
                index: i,
                value: masses[i],
            });
        }
        if let Some(i) = positions.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidTransport {
                index: i,
                next: i + 1,
                ratio: f64::INFINITY,
            });
        }
        let total_mass = masses.iter().sum();
        Ok(Self {
            positions,
            masses,
            total_mass,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Mass-weighted mean position.
    pub fn center_of_mass(&self) -> f64 {
        self.positions
            .iter()
            .zip(&self.masses)
            .map(|(x, m)| x * m)
            .sum::<f64>()
            / self.total_mass
    }
}

/// Discretizes `density` by `n` equal-mass particles placed at the mass-quantile
/// midpoints `F⁻¹((i + 1/2) m)`, `m = M / n`.
pub fn build_particles(density: &PiecewiseDensity, n: usize) -> Result<ParticleSystem> {
    if n == 0 {
        return Err(Error::NoParticles);
    }
    let total = density.total_mass();
    if !total.is_finite() {
        return Err(Error::NonFinite {
            what: "density mass",
            index: 0,
        });
    }
    if total <= 0.0 {
        return Err(Error::EmptyMeasure);
    }
    let m = total / n as f64;
    let mut positions: Vec<f64> = (0..n)
        .map(|i| density.quantile((i as f64 + 0.5) * m))
        .collect();
    // Newton iterates in separate pieces can tie at 1 ulp; keep the order exact.
    for i in 1..n {
        if positions[i] < positions[i - 1] {
            positions[i] = positions[i - 1];
        }
    }
    ParticleSystem::new(positions, vec![m; n])
}
