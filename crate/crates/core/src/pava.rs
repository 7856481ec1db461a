//! Weighted pool-adjacent-violators.
//!
//! Computes the minimizer of `Σ wᵢ (zᵢ - xᵢ)²` over nondecreasing `x`. The sweep runs
//! left to right, pushing each point as a singleton pool and merging backwards while
//! the previous pool's mean is not below the current one. Equal means are merged too:
//! a run of tied values is one constant stretch of the solution, and downstream code
//! reads congested zones off these pools.

/// One pooled stretch `[lo, hi]` of the solution, constant equal to `mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pool {
    pub lo: usize,
    pub hi: usize,
    pub mean: f64,
    pub weight: f64,
}

impl Pool {
    pub fn count(&self) -> usize {
        self.hi - self.lo + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Isotonic {
    pub values: Vec<f64>,
    pub pools: Vec<Pool>,
}

/// Weighted isotonic regression. Pools whose means differ by at most `tie_tol` are
/// merged. Inputs are assumed validated (finite, positive weights, equal lengths).
pub fn pava(z: &[f64], w: &[f64], tie_tol: f64) -> Isotonic {
    debug_assert_eq!(z.len(), w.len());
    // sums are taken relative to z[0] so that constant stretches pool exactly
    let origin = z.first().copied().unwrap_or(0.0);
    let mut stack: Vec<(usize, usize, f64, f64)> = Vec::with_capacity(z.len());
    for (i, (&zi, &wi)) in z.iter().zip(w).enumerate() {
        let (mut lo, mut sum, mut weight) = (i, wi * (zi - origin), wi);
        while let Some(&(plo, _, psum, pweight)) = stack.last() {
            if psum / pweight >= sum / weight - tie_tol {
                stack.pop();
                lo = plo;
                sum += psum;
                weight += pweight;
            } else {
                break;
            }
        }
        stack.push((lo, i, sum, weight));
    }

    let mut values = vec![0.0; z.len()];
    let pools = stack
        .into_iter()
        .map(|(lo, hi, sum, weight)| {
            let mean = origin + sum / weight;
            values[lo..=hi].fill(mean);
            Pool {
                lo,
                hi,
                mean,
                weight,
            }
        })
        .collect();
    Isotonic { values, pools }
}
