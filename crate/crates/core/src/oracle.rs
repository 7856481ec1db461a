//! Brute-force reference for the admissible projection.
//!
//! Solves `min Σ wᵢ (zᵢ - xᵢ)²` subject to `x[i+1] - x[i] >= X̃[i+1] - X̃[i]` by
//! enumerating every subset of the `N - 1` gap constraints, solving the
//! equality-constrained problem for that subset through its dense KKT system, and
//! keeping the best primal-feasible candidate. The optimum lies in the relative
//! interior of one face, so it is always among the candidates. Exponential in `N`;
//! meant for cross-checking the PAVA route on small instances only.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::monotone::MonotoneMap;
use crate::projection::validate;

/// Largest instance the enumeration accepts.
pub const ORACLE_MAX_N: usize = 12;

const FEASIBILITY_TOL: f64 = 1e-11;

pub fn oracle_qp_projection(z: &[f64], xtil: &MonotoneMap, w: &[f64]) -> Result<Vec<f64>> {
    validate(z, w)?;
    let n = z.len();
    if xtil.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: xtil.len(),
        });
    }
    if n > ORACLE_MAX_N {
        return Err(Error::OracleLimit {
            n,
            max: ORACLE_MAX_N,
        });
    }
    if n <= 1 {
        return Ok(z.to_vec());
    }
    let gaps: Vec<f64> = xtil.windows(2).map(|p| p[1] - p[0]).collect();
    let scale = 1.0
        + z.iter()
            .chain(xtil.iter())
            .fold(0.0_f64, |s, v| s.max(v.abs()));

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (n - 1)) {
        let active: Vec<usize> = (0..n - 1).filter(|a| mask & (1 << a) != 0).collect();
        let Some(x) = solve_equality_qp(z, w, &gaps, &active) else {
            continue;
        };
        let feasible = (0..n - 1).all(|i| x[i + 1] - x[i] - gaps[i] >= -FEASIBILITY_TOL * scale);
        if !feasible {
            continue;
        }
        let objective: f64 = (0..n).map(|i| w[i] * (z[i] - x[i]).powi(2)).sum();
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, x));
        }
    }
    // the all-active subset always yields a feasible candidate
    Ok(best.expect("at least one feasible face").1)
}

/// Minimizer of `Σ wᵢ (zᵢ - xᵢ)²` with `x[a+1] - x[a] = gaps[a]` for `a` in `active`,
/// from the KKT system `[W  -Eᵀ; E  0] [x; λ] = [W z; g]`.
fn solve_equality_qp(z: &[f64], w: &[f64], gaps: &[f64], active: &[usize]) -> Option<Vec<f64>> {
    let n = z.len();
    let k = active.len();
    let mut kkt = DMatrix::<f64>::zeros(n + k, n + k);
    let mut rhs = DVector::<f64>::zeros(n + k);
    for i in 0..n {
        kkt[(i, i)] = w[i];
        rhs[i] = w[i] * z[i];
    }
    for (r, &a) in active.iter().enumerate() {
        let row = n + r;
        kkt[(row, a)] = -1.0;
        kkt[(row, a + 1)] = 1.0;
        kkt[(a, row)] = 1.0;
        kkt[(a + 1, row)] = -1.0;
        rhs[row] = gaps[a];
    }
    let sol = kkt.lu().solve(&rhs)?;
    Some(sol.iter().take(n).copied().collect())
}
