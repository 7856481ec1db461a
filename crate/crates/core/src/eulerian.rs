//! Eulerian fields read off a Lagrangian state.
//!
//! The density is the gap ratio `(X̃[i+1] - X̃[i]) / (x[i+1] - x[i])`, sampled at the
//! midpoint of each pair of neighbouring particles. The same points carry the
//! adhesion potential `Γᵢ`: it is the value at the interface between the mass cells of
//! particles `i` and `i+1`, which is where the gap ratio lives, so the sample holds
//! exactly the pair on which the exclusion relation `(1 - ρ) γ = 0` is enforced.
//!
//! Two end cells close the support: the outer half mass of the first and last
//! particles, spread at the density of the neighbouring gap. With them the cell
//! masses add up to the total mass.

use crate::dynamics::SimState;
use crate::error::{Error, Result};
use crate::monotone::MonotoneMap;

/// Density ratios above 1 by at most this much are rounding and get clamped.
pub const DENSITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerianSample {
    pub x: f64,
    /// Width of the cell the sample stands for.
    pub width: f64,
    /// Physical density `r · ρ*` (equal to `r` without a heterogeneous constraint).
    pub rho: f64,
    /// Ratio to the maximal density, in `[0, 1]`.
    pub ratio: f64,
    pub u: f64,
    pub gamma: f64,
    pub rho_star: Option<f64>,
}

impl EulerianSample {
    pub fn cap(&self) -> f64 {
        self.rho_star.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerianField {
    pub t: f64,
    pub samples: Vec<EulerianSample>,
}

impl EulerianField {
    /// `Σ ratio · width`: the conserved mass of the carrier measure.
    pub fn ratio_mass(&self) -> f64 {
        self.samples.iter().map(|s| s.ratio * s.width).sum()
    }

    /// `Σ rho · width`.
    pub fn mass(&self) -> f64 {
        self.samples.iter().map(|s| s.rho * s.width).sum()
    }

    /// Adhesion potential at `x`, linear between samples and zero outside the support.
    pub fn gamma_at(&self, x: f64) -> f64 {
        let s = &self.samples;
        if s.is_empty() || x < s[0].x || x > s[s.len() - 1].x {
            return 0.0;
        }
        let k = s.partition_point(|p| p.x <= x);
        if k == 0 || k == s.len() {
            return s[k.min(s.len() - 1)].gamma;
        }
        let (a, b) = (&s[k - 1], &s[k]);
        if b.x == a.x {
            return a.gamma;
        }
        a.gamma + (b.gamma - a.gamma) * (x - a.x) / (b.x - a.x)
    }
}

fn ratio_of(xtil_gap: f64, gap: f64, index: usize) -> Result<f64> {
    let r = if gap > 0.0 {
        xtil_gap / gap
    } else {
        f64::INFINITY
    };
    if !(r <= 1.0 + DENSITY_SLACK) {
        return Err(Error::InvalidTransport {
            index,
            next: index + 1,
            ratio: r,
        });
    }
    Ok(r.min(1.0))
}

/// Samples `ρ`, `u` and `γ` from `state`. `rho_star` gives the maximal density carried
/// by each particle in heterogeneous runs.
pub fn reconstruct(
    state: &SimState,
    xtil: &MonotoneMap,
    masses: &[f64],
    rho_star: Option<&[f64]>,
) -> Result<EulerianField> {
    let n = state.x.len();
    for len in [xtil.len(), masses.len(), state.u.len(), state.gamma.len()]
        .into_iter()
        .chain(rho_star.map(<[f64]>::len))
    {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: len,
            });
        }
    }
    if n == 0 {
        return Err(Error::NoParticles);
    }
    let x = &state.x;
    let star = |i: usize| rho_star.map(|s| s[i]);
    let sample =
        |x: f64, width: f64, ratio: f64, u: f64, gamma: f64, rs: Option<f64>| EulerianSample {
            x,
            width,
            rho: ratio * rs.unwrap_or(1.0),
            ratio,
            u,
            gamma,
            rho_star: rs,
        };

    if n == 1 {
        return Ok(EulerianField {
            t: state.t,
            samples: vec![sample(
                x[0],
                masses[0],
                1.0,
                state.u[0],
                state.gamma[0],
                star(0),
            )],
        });
    }

    let mut samples = Vec::with_capacity(n + 1);
    let ratios = (0..n - 1)
        .map(|i| ratio_of(xtil[i + 1] - xtil[i], x[i + 1] - x[i], i))
        .collect::<Result<Vec<_>>>()?;

    // outer half mass of an end particle, spread at the density of its gap
    let h0 = 0.5 * masses[0] / ratios[0];
    samples.push(sample(
        x[0] - 0.5 * h0,
        h0,
        ratios[0],
        state.u[0],
        0.0,
        star(0),
    ));
    for i in 0..n - 1 {
        let rs = rho_star.map(|s| 0.5 * (s[i] + s[i + 1]));
        samples.push(sample(
            0.5 * (x[i] + x[i + 1]),
            x[i + 1] - x[i],
            ratios[i],
            0.5 * (state.u[i] + state.u[i + 1]),
            state.gamma[i],
            rs,
        ));
    }
    let hn = 0.5 * masses[n - 1] / ratios[n - 2];
    samples.push(sample(
        x[n - 1] + 0.5 * hn,
        hn,
        ratios[n - 2],
        state.u[n - 1],
        state.gamma[n - 1],
        star(n - 1),
    ));
    Ok(EulerianField {
        t: state.t,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionReport {
    /// Largest `|(cap - rho) · gamma|` over the samples.
    pub max_residual: f64,
    /// Indices of samples whose residual exceeds the tolerance.
    pub offending: Vec<usize>,
}

/// Complementarity between free room under the cap and adhesion.
pub fn check_exclusion(field: &EulerianField, tol: f64) -> ExclusionReport {
    let mut max_residual = 0.0_f64;
    let mut offending = Vec::new();
    for (k, s) in field.samples.iter().enumerate() {
        let r = ((s.cap() - s.rho) * s.gamma).abs();
        max_residual = max_residual.max(r);
        if r > tol {
            offending.push(k);
        }
    }
    ExclusionReport {
        max_residual,
        offending,
    }
}

/// Quadratic Wasserstein distance between `X1#ρ̄` and `X2#ρ̄`.
pub fn wasserstein2(x1: &[f64], x2: &[f64], masses: &[f64]) -> Result<f64> {
    for len in [x2.len(), masses.len()] {
        if len != x1.len() {
            return Err(Error::LengthMismatch {
                expected: x1.len(),
                found: len,
            });
        }
    }
    Ok(crate::projection::weighted_distance(x1, x2, masses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::BlockPartition;

    fn state(x: Vec<f64>, gamma: Vec<f64>) -> SimState {
        let n = x.len();
        SimState {
            step: 0,
            t: 0.0,
            a_free: x.clone(),
            u_free: vec![0.0; n],
            x: MonotoneMap::new(x).unwrap(),
            u: vec![0.0; n],
            gamma,
            blocks: BlockPartition::empty(),
        }
    }

    #[test]
    fn congested_and_spread_densities() {
        let xt = MonotoneMap::new(vec![0.125, 0.375, 0.625, 0.875]).unwrap();
        let m = [0.25; 4];
        let f = reconstruct(&state(xt.to_vec(), vec![0.0; 4]), &xt, &m, None).unwrap();
        assert!(f.samples.iter().all(|s| s.rho == 1.0));
        assert!((f.mass() - 1.0).abs() < 1e-15);

        let spread: Vec<f64> = xt.iter().map(|v| 2.0 * v).collect();
        let f = reconstruct(&state(spread, vec![0.0; 4]), &xt, &m, None).unwrap();
        assert!(f.samples.iter().all(|s| (s.rho - 0.5).abs() < 1e-15));
        assert!((f.mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overcompressed_pair_is_invalid() {
        let xt = MonotoneMap::new(vec![0.0, 1.0]).unwrap();
        let err =
            reconstruct(&state(vec![0.0, 0.5], vec![0.0; 2]), &xt, &[1.0; 2], None).unwrap_err();
        assert!(matches!(err, Error::InvalidTransport { index: 0, .. }));
        let err =
            reconstruct(&state(vec![0.0, 0.0], vec![0.0; 2]), &xt, &[1.0; 2], None).unwrap_err();
        assert!(matches!(err, Error::InvalidTransport { .. }));
    }

    #[test]
    fn single_particle_cell() {
        let xt = MonotoneMap::new(vec![3.0]).unwrap();
        let f = reconstruct(&state(vec![3.0], vec![0.0]), &xt, &[0.5], None).unwrap();
        assert_eq!(f.samples.len(), 1);
        assert_eq!((f.samples[0].rho, f.samples[0].width), (1.0, 0.5));
    }

    #[test]
    fn exclusion_flags_adhesion_in_free_flow() {
        let xt = MonotoneMap::new(vec![0.0, 1.0, 2.0]).unwrap();
        let ok = reconstruct(
            &state(vec![0.0, 1.0, 3.0], vec![-0.5, 0.0, 0.0]),
            &xt,
            &[1.0; 3],
            None,
        )
        .unwrap();
        assert_eq!(check_exclusion(&ok, 1e-12).max_residual, 0.0);

        let bad = reconstruct(
            &state(vec![0.0, 2.0, 3.0], vec![-0.5, 0.0, 0.0]),
            &xt,
            &[1.0; 3],
            None,
        )
        .unwrap();
        let rep = check_exclusion(&bad, 1e-12);
        assert_eq!(rep.offending, vec![1]);
        assert!((rep.max_residual - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gamma_interpolates_between_samples() {
        let xt = MonotoneMap::new(vec![0.0, 1.0, 2.0]).unwrap();
        let f = reconstruct(
            &state(vec![0.0, 1.0, 2.0], vec![-1.0, 0.0, 0.0]),
            &xt,
            &[1.0; 3],
            None,
        )
        .unwrap();
        assert_eq!(f.gamma_at(0.5), -1.0);
        assert_eq!(f.gamma_at(1.0), -0.5);
        assert_eq!(f.gamma_at(10.0), 0.0);
    }

    #[test]
    fn wasserstein_translation() {
        let m = [0.25, 0.75];
        assert_eq!(wasserstein2(&[0.0, 1.0], &[0.0, 1.0], &m).unwrap(), 0.0);
        let d = wasserstein2(&[0.0, 1.0], &[0.3, 1.3], &m).unwrap();
        assert!((d - 0.3).abs() < 1e-15);
        assert!(wasserstein2(&[0.0], &[0.0, 1.0], &m).is_err());
    }
}
