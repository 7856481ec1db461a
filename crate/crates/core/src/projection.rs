//! Congested rearrangement and L²(ρ̄) projections onto the monotone cone `K` and its
//! shift `K̃ = K + X̃`.
//!
//! The admissible set `K̃` encodes the density bound: `X ∈ K̃` iff every gap
//! `X[i+1] - X[i]` is at least the corresponding gap of `X̃`. Written as a linear
//! system this is `G (X - X̃) <= 0` with `G` the first-difference matrix; the
//! projection onto it is a weighted isotonic regression of `z - X̃`.

use crate::error::{Error, Result};
use crate::monotone::{Block, BlockPartition, MonotoneMap};
use crate::particles::ParticleSystem;
use crate::pava::{pava, Pool};

/// Relative tolerance below which two pooled means count as equal.
pub const TIE_RTOL: f64 = 64.0 * f64::EPSILON;

/// The maximally compressed rearrangement `X̃`: the particles packed at unit density
/// into an interval of length `M` centered at the center of mass.
pub fn congested_transport(ps: &ParticleSystem) -> MonotoneMap {
    let start = ps.center_of_mass() - 0.5 * ps.total_mass();
    // compensated prefix sums: congested runs must stay evenly spaced to the last bit
    let (mut before, mut carry) = (0.0_f64, 0.0_f64);
    let values = ps
        .masses()
        .iter()
        .map(|&m| {
            let x = start + (before + (carry + 0.5 * m));
            let sum = before + m;
            carry += if before.abs() >= m {
                (before - sum) + m
            } else {
                (m - sum) + before
            };
            before = sum;
            x
        })
        .collect();
    MonotoneMap::from_sorted(values)
}

/// Result of projecting onto `K`: the projected map and the PAVA pools behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneProjection {
    pub map: MonotoneMap,
    pub pools: Vec<Pool>,
}

pub(crate) fn validate(z: &[f64], w: &[f64]) -> Result<()> {
    if z.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: z.len(),
            found: w.len(),
        });
    }
    if let Some(i) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "projection input",
            index: i,
        });
    }
    if let Some(i) = w.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositiveWeight {
            index: i,
            value: w[i],
        });
    }
    Ok(())
}

fn scale_of<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0_f64, |s, v| s.max(v.abs()))
}

/// Weighted L² projection of `z` onto the cone of nondecreasing vectors.
pub fn project_monotone(z: &[f64], w: &[f64]) -> Result<MonotoneProjection> {
    validate(z, w)?;
    let iso = pava(z, w, TIE_RTOL * scale_of(z));
    Ok(MonotoneProjection {
        map: MonotoneMap::from_sorted(iso.values),
        pools: iso.pools,
    })
}

/// Weighted L² projection of `z` onto `K̃ = K + X̃`, together with the congested
/// blocks: the pools of length ≥ 2 of the inner projection, where `X - X̃` is
/// constant and the discrete density equals its maximum.
pub fn project_admissible(
    z: &[f64],
    xtil: &MonotoneMap,
    w: &[f64],
) -> Result<(MonotoneMap, BlockPartition)> {
    validate(z, w)?;
    if xtil.len() != z.len() {
        return Err(Error::LengthMismatch {
            expected: z.len(),
            found: xtil.len(),
        });
    }
    let shifted: Vec<f64> = z.iter().zip(xtil.iter()).map(|(a, b)| a - b).collect();
    let tol = TIE_RTOL * scale_of(z).max(scale_of(xtil.iter()));
    let iso = pava(&shifted, w, tol);

    let mut x: Vec<f64> = xtil.iter().zip(&iso.values).map(|(a, s)| a + s).collect();
    // unpooled points are their own projection; keep them bit-exact
    for p in iso.pools.iter().filter(|p| p.count() == 1) {
        x[p.lo] = z[p.lo];
    }
    for i in 1..x.len() {
        // X̃ and S are both nondecreasing; only an ulp-level tie can flip
        if x[i] < x[i - 1] {
            x[i] = x[i - 1];
        }
    }
    let blocks = iso
        .pools
        .iter()
        .filter(|p| p.count() >= 2)
        .map(|p| Block { lo: p.lo, hi: p.hi })
        .collect();
    Ok((
        MonotoneMap::from_sorted(x),
        BlockPartition::new(blocks).expect("PAVA pools are sorted and disjoint"),
    ))
}

/// Weighted norm `sqrt(Σ wᵢ vᵢ²)`.
pub fn weighted_norm(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(x, m)| m * x * x).sum::<f64>().sqrt()
}

/// Weighted distance `sqrt(Σ wᵢ (aᵢ - bᵢ)²)`.
pub fn weighted_distance(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(w)
        .map(|((x, y), m)| m * (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
