//! Piecewise density descriptions and their cumulative mass / quantile functions.
//!
//! A [`PiecewiseDensity`] is a finite list of disjoint intervals, each carrying a
//! [`Profile`]; the density vanishes outside the pieces. Profiles with a closed-form
//! antiderivative are integrated exactly, the others by composite Gauss-Legendre.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A real function of position used as a density profile on a piece.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `value` everywhere.
    Constant(f64),
    /// `base + amplitude * (1 - cos(2π (x - center) / period))`.
    RaisedCosine {
        base: f64,
        amplitude: f64,
        period: f64,
        center: f64,
    },
    /// Pointwise quotient `num(x) / den(x)`.
    Quotient(Box<Profile>, Box<Profile>),
}

impl Profile {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::RaisedCosine {
                base,
                amplitude,
                period,
                center,
            } => base + amplitude * (1.0 - (2.0 * PI * (x - center) / period).cos()),
            Profile::Quotient(num, den) => num.value(x) / den.value(x),
        }
    }

    /// Closed-form antiderivative, when one is known.
    pub fn antiderivative(&self, x: f64) -> Option<f64> {
        match self {
            Profile::Constant(c) => Some(c * x),
            Profile::RaisedCosine {
                base,
                amplitude,
                period,
                center,
            } => {
                let k = 2.0 * PI / period;
                Some((base + amplitude) * x - amplitude * (k * (x - center)).sin() / k)
            }
            Profile::Quotient(num, den) => match den.as_ref() {
                Profile::Constant(c) => num.antiderivative(x).map(|a| a / c),
                _ => None,
            },
        }
    }

    /// Minimum of the profile on `[lo, hi]` used for validation (sampled).
    fn min_on(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            _ => sampled_min(self, lo, hi),
        }
    }
}

fn sampled_min(p: &Profile, lo: f64, hi: f64) -> f64 {
    const SAMPLES: usize = 257;
    (0..SAMPLES)
        .map(|k| p.value(lo + (hi - lo) * k as f64 / (SAMPLES - 1) as f64))
        .fold(f64::INFINITY, |m, v| {
            if m.is_nan() || v.is_nan() {
                f64::NAN
            } else {
                m.min(v)
            }
        })
}

// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683,
    0.538_469_310_105_683,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
    0.236_926_885_056_189,
];

fn gauss_legendre(p: &Profile, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let s: f64 = GL_NODES
            .iter()
            .zip(GL_WEIGHTS)
            .map(|(&node, w)| w * p.value(mid + 0.5 * h * node))
            .sum();
        total += 0.5 * h * s;
    }
    total
}

/// One interval `[lo, hi]` of a piecewise density.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub profile: Profile,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, profile: Profile) -> Self {
        Self { lo, hi, profile }
    }

    /// Mass of the piece restricted to `[a, b]`, with `lo <= a <= b <= hi`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match (
            self.profile.antiderivative(a),
            self.profile.antiderivative(b),
        ) {
            (Some(fa), Some(fb)) => fb - fa,
            _ => {
                let width = self.hi - self.lo;
                let panels = ((b - a) / width * 64.0).ceil().max(1.0) as usize;
                gauss_legendre(&self.profile, a, b, panels)
            }
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass_between(self.lo, self.hi)
    }
}

/// A density given by disjoint pieces, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDensity {
    pieces: Vec<Piece>,
}

impl PiecewiseDensity {
    /// Validates and sorts the pieces. Pieces must be finite, non-degenerate,
    /// non-overlapping and carry a nonnegative profile.
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for (k, p) in pieces.iter().enumerate() {
            if !p.lo.is_finite() || !p.hi.is_finite() {
                return Err(Error::NonFinite {
                    what: "density piece bounds",
                    index: k,
                });
            }
            if p.hi <= p.lo {
                return Err(Error::InvalidDensity(format!(
                    "piece {k} has empty interval [{}, {}]",
                    p.lo, p.hi
                )));
            }
            let min = p.profile.min_on(p.lo, p.hi);
            if !min.is_finite() {
                return Err(Error::NonFinite {
                    what: "density values",
                    index: k,
                });
            }
            if min < 0.0 {
                return Err(Error::InvalidDensity(format!(
                    "piece {k} takes negative values (min {min})"
                )));
            }
            if !p.mass().is_finite() {
                return Err(Error::NonFinite {
                    what: "density mass",
                    index: k,
                });
            }
        }
        for (k, w) in pieces.windows(2).enumerate() {
            if w[1].lo < w[0].hi {
                return Err(Error::InvalidDensity(format!(
                    "pieces {k} and {} overlap",
                    k + 1
                )));
            }
        }
        Ok(Self { pieces })
    }

    /// Indicator of `[lo, hi]` with height 1.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![Piece::new(lo, hi, Profile::Constant(1.0))])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn value(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.lo <= x && x <= p.hi)
            .map_or(0.0, |p| p.profile.value(x))
    }

    pub fn total_mass(&self) -> f64 {
        self.pieces.iter().map(Piece::mass).sum()
    }

    /// Smallest `x` with cumulative mass `F(x) = q`, for `0 < q < total_mass`.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut below = 0.0;
        for (k, p) in self.pieces.iter().enumerate() {
            let mass = p.mass();
            let last = k + 1 == self.pieces.len();
            if q <= below + mass || last {
                return invert_piece(p, (q - below).clamp(0.0, mass), mass);
            }
            below += mass;
        }
        unreachable!("pieces are non-empty")
    }
}

/// Solves `mass_between(lo, x) = target` on one piece by safeguarded Newton.
fn invert_piece(p: &Piece, target: f64, mass: f64) -> f64 {
    if mass <= 0.0 {
        return p.lo;
    }
    let (mut a, mut b) = (p.lo, p.hi);
    let mut x = p.lo + (p.hi - p.lo) * (target / mass);
    let tol = 4.0 * f64::EPSILON * mass.max(target.abs());
    for _ in 0..200 {
        let residual = p.mass_between(p.lo, x) - target;
        if residual.abs() <= tol {
            return x;
        }
        if residual > 0.0 {
            b = x;
        } else {
            a = x;
        }
        let slope = p.profile.value(x);
        let newton = x - residual / slope;
        x = if slope > 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            return x;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raised_cosine_mass_over_one_period() {
        let p = Piece::new(
            0.0,
            1.0,
            Profile::RaisedCosine {
                base: 0.8,
                amplitude: 0.16,
                period: 1.0,
                center: 0.5,
            },
        );
        assert!((p.mass() - 0.96).abs() < 1e-14);
    }

    #[test]
    fn quotient_by_constant_keeps_closed_form() {
        let num = Profile::Constant(3.0);
        let q = Profile::Quotient(Box::new(num), Box::new(Profile::Constant(1.0)));
        assert_eq!(q.antiderivative(2.0), Some(6.0));
    }

    #[test]
    fn quantile_of_uniform_is_linear() {
        let d = PiecewiseDensity::uniform(0.0, 1.0).unwrap();
        assert_eq!(d.quantile(0.25), 0.25);
        assert_eq!(d.quantile(0.75), 0.75);
    }

    #[test]
    fn rejects_overlap_and_negative() {
        let overlap = PiecewiseDensity::new(vec![
            Piece::new(0.0, 1.0, Profile::Constant(1.0)),
            Piece::new(0.5, 2.0, Profile::Constant(1.0)),
        ]);
        assert!(matches!(overlap, Err(Error::InvalidDensity(_))));
        let negative = PiecewiseDensity::new(vec![Piece::new(0.0, 1.0, Profile::Constant(-1.0))]);
        assert!(matches!(negative, Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let nan = PiecewiseDensity::new(vec![Piece::new(0.0, 1.0, Profile::Constant(f64::NAN))]);
        assert!(matches!(nan, Err(Error::NonFinite { .. })));
        let inf =
            PiecewiseDensity::new(vec![Piece::new(0.0, f64::INFINITY, Profile::Constant(1.0))]);
        assert!(matches!(inf, Err(Error::NonFinite { .. })));
    }
}
