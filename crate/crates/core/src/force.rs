//! External force fields `f(t, x)`.

use crate::error::{Error, Result};

/// An external acceleration field with the bounds the solver relies on.
pub trait ForceField: Sync {
    fn eval(&self, t: f64, x: f64) -> f64;

    /// Spatial Lipschitz constant on the simulated range.
    fn lipschitz_k(&self) -> f64;

    /// Bound on `|f|`.
    fn sup_bound(&self) -> f64;
}

impl<F: ForceField + ?Sized> ForceField for &F {
    fn eval(&self, t: f64, x: f64) -> f64 {
        (**self).eval(t, x)
    }
    fn lipschitz_k(&self) -> f64 {
        (**self).lipschitz_k()
    }
    fn sup_bound(&self) -> f64 {
        (**self).sup_bound()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroForce;

impl ForceField for ZeroForce {
    fn eval(&self, _t: f64, _x: f64) -> f64 {
        0.0
    }
    fn lipschitz_k(&self) -> f64 {
        0.0
    }
    fn sup_bound(&self) -> f64 {
        0.0
    }
}

/// A spatial step function active from `t_start` on.
///
/// `values[k]` applies on `[x_breaks[k-1], x_breaks[k])`, with `values[0]` left of the
/// first break and the last value right of the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcePhase {
    pub t_start: f64,
    pub x_breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl ForcePhase {
    fn eval(&self, x: f64) -> f64 {
        self.values[self.x_breaks.partition_point(|&b| b <= x)]
    }
}

/// Force that is piecewise constant in space and switches between phases in time.
///
/// Both switches are right-continuous: a phase applies for `t >= t_start`, and a
/// spatial break belongs to the piece on its right. With the left-rectangle rule
/// `∫_{t}^{t+dt} f ≈ dt f(t)` this makes the quadrature exact whenever a switching
/// time lies on the time grid. The field is piecewise constant, so its Lipschitz
/// constant away from the breaks is zero; that is what [`ForceField::lipschitz_k`]
/// reports.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseForce {
    phases: Vec<ForcePhase>,
    sup: f64,
}

impl PiecewiseForce {
    pub fn new(mut phases: Vec<ForcePhase>) -> Result<Self> {
        phases.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
        for (k, p) in phases.iter().enumerate() {
            if p.values.len() != p.x_breaks.len() + 1 {
                return Err(Error::LengthMismatch {
                    expected: p.x_breaks.len() + 1,
                    found: p.values.len(),
                });
            }
            if !p.t_start.is_finite() || p.x_breaks.iter().chain(&p.values).any(|v| !v.is_finite())
            {
                return Err(Error::NonFinite {
                    what: "force phase",
                    index: k,
                });
            }
            if p.x_breaks.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidConfig(format!(
                    "force phase {k}: breaks must be strictly increasing"
                )));
            }
        }
        let sup = phases
            .iter()
            .flat_map(|p| p.values.iter())
            .fold(0.0_f64, |s, v| s.max(v.abs()));
        Ok(Self { phases, sup })
    }

    /// `+alpha` left of 0 and `-alpha` right of it until `t_star`, reversed afterwards.
    pub fn two_block(alpha: f64, t_star: f64) -> Result<Self> {
        Self::new(vec![
            ForcePhase {
                t_start: 0.0,
                x_breaks: vec![0.0],
                values: vec![alpha, -alpha],
            },
            ForcePhase {
                t_start: t_star,
                x_breaks: vec![0.0],
                values: vec![-alpha, alpha],
            },
        ])
    }

    /// Constant magnitude pointing towards `center` from both sides.
    pub fn compressive(center: f64, magnitude: f64) -> Result<Self> {
        Self::new(vec![ForcePhase {
            t_start: 0.0,
            x_breaks: vec![center],
            values: vec![magnitude, -magnitude],
        }])
    }

    pub fn phases(&self) -> &[ForcePhase] {
        &self.phases
    }
}

impl ForceField for PiecewiseForce {
    fn eval(&self, t: f64, x: f64) -> f64 {
        let k = self.phases.partition_point(|p| p.t_start <= t);
        if k == 0 {
            0.0
        } else {
            self.phases[k - 1].eval(x)
        }
    }
    fn lipschitz_k(&self) -> f64 {
        0.0
    }
    fn sup_bound(&self) -> f64 {
        self.sup
    }
}

/// Restoring spring `-stiffness * clamp(x - center, -reach, reach)`: Lipschitz with
/// constant `stiffness` and bounded by `stiffness * reach`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturatedSpring {
    pub stiffness: f64,
    pub center: f64,
    pub reach: f64,
}

impl ForceField for SaturatedSpring {
    fn eval(&self, _t: f64, x: f64) -> f64 {
        -self.stiffness * (x - self.center).clamp(-self.reach, self.reach)
    }
    fn lipschitz_k(&self) -> f64 {
        self.stiffness
    }
    fn sup_bound(&self) -> f64 {
        self.stiffness * self.reach
    }
}

/// Closure-backed field with caller-declared bounds.
pub struct FnForce<F> {
    f: F,
    lipschitz_k: f64,
    sup_bound: f64,
}

impl<F: Fn(f64, f64) -> f64 + Sync> FnForce<F> {
    pub fn new(f: F, lipschitz_k: f64, sup_bound: f64) -> Self {
        Self {
            f,
            lipschitz_k,
            sup_bound,
        }
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> ForceField for FnForce<F> {
    fn eval(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }
    fn lipschitz_k(&self) -> f64 {
        self.lipschitz_k
    }
    fn sup_bound(&self) -> f64 {
        self.sup_bound
    }
}

/// Largest difference quotient of `f(t, ·)` over `samples` equispaced points of
/// `[lo, hi]`; a lower bound for the true Lipschitz constant.
pub fn sampled_lipschitz(f: &dyn ForceField, t: f64, lo: f64, hi: f64, samples: usize) -> f64 {
    let xs: Vec<f64> = (0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1).max(1) as f64)
        .collect();
    xs.windows(2)
        .map(|w| (f.eval(t, w[1]) - f.eval(t, w[0])).abs() / (w[1] - w[0]))
        .fold(0.0, f64::max)
}
