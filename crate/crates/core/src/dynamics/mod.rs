//! Time integration of the constrained Lagrangian dynamics.
//!
//! Each step accumulates the free velocity with the left-rectangle force rule,
//! projects onto the admissible set `K̃`, and then reads the velocity and the
//! adhesion potential off the congested blocks of the projection:
//!
//! ```text
//! U^free ← U^free + dt f(t, X)
//! X      ← P_K̃(X + dt U^free)          (UpdateRule::Incremental, default)
//! U      = block means of U^free        (identity off the blocks)
//! Γᵢ     = Σ_{j ≤ i} mⱼ (Uⱼ - U^freeⱼ)
//! ```
//!
//! `U^free` is never reset to `U`: it carries the whole force history, which is what
//! keeps a block stuck (Γ < 0) after the force reverses until the accumulated
//! compression has been paid back.

mod history;
mod invariants;
mod picard;

pub use history::{BlockHistory, ContactEvent, ContactKind};
pub use invariants::{check_state, Check, CheckReport};
pub use picard::{picard_solve, PicardOutcome};

use crate::error::{Error, Result};
use crate::force::ForceField;
use crate::monotone::{Block, BlockPartition, MonotoneMap};
use crate::particles::ParticleSystem;
use crate::pava::pava;
use crate::projection::{congested_transport, project_admissible, TIE_RTOL};

/// Snapshot of the Lagrangian fields at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Number of steps taken to reach `t`.
    pub step: usize,
    pub t: f64,
    /// Free trajectory `X̄ + ∫ U^free`.
    pub a_free: Vec<f64>,
    pub u_free: Vec<f64>,
    pub x: MonotoneMap,
    pub u: Vec<f64>,
    /// Adhesion potential, cumulative from the left: `gamma[i]` is the value at the
    /// right edge of particle `i`'s mass cell.
    pub gamma: Vec<f64>,
    pub blocks: BlockPartition,
}

/// Which point gets projected onto `K̃` at each step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UpdateRule {
    /// `X_{n+1} = P_K̃(X_n + dt U^free_{n+1})`.
    #[default]
    Incremental,
    /// `X_{n+1} = P_K̃(X̄ + Σ dt U^free)`: the fixed-point map used by
    /// [`picard_solve`]. Matches `Incremental` until the first contact; afterwards a
    /// block only releases once the free paths stop overlapping, which is later than
    /// the adhesion potential vanishing.
    AccumulatedFreePath,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub max_iters: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub picard: Option<PicardConfig>,
    /// Upper bound accepted for Γ; `None` uses `1e-10 · max(1, M · max|U^free|)`.
    pub tol_gamma: Option<f64>,
    pub update_rule: UpdateRule,
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            picard: None,
            tol_gamma: None,
            update_rule: UpdateRule::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if let Some(p) = self.picard {
            if p.max_iters == 0 || !(p.tol > 0.0) {
                return Err(Error::InvalidConfig(
                    "picard needs max_iters >= 1 and tol > 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`; the last one is shortened when `t_end` is
    /// not a multiple of `dt`.
    pub fn n_steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        (ratio - 1e-9 * ratio.max(1.0)).ceil().max(0.0) as usize
    }

    /// Time reached after `k` steps.
    pub fn time_at(&self, k: usize) -> f64 {
        if k >= self.n_steps() {
            self.t_end
        } else {
            k as f64 * self.dt
        }
    }

    /// Step index whose time is closest to `t`.
    pub fn step_index(&self, t: f64) -> usize {
        ((t / self.dt).round().max(0.0) as usize).min(self.n_steps())
    }

    pub fn tol_gamma_for(&self, total_mass: f64, u_free: &[f64]) -> f64 {
        self.tol_gamma.unwrap_or_else(|| {
            let vmax = u_free.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
            1e-10 * (total_mass * vmax).max(1.0)
        })
    }
}

/// Orthogonal projection onto velocities constant on each block: block mass-averages
/// of `u_free`, identity elsewhere.
pub fn block_velocity(u_free: &[f64], blocks: &BlockPartition, masses: &[f64]) -> Vec<f64> {
    let mut u = u_free.to_vec();
    for b in blocks.iter() {
        // offset from the first value keeps an already constant block exact
        let base = u_free[b.lo];
        let (mut mu, mut mass) = (0.0, 0.0);
        for j in b.indices() {
            mu += masses[j] * (u_free[j] - base);
            mass += masses[j];
        }
        u[b.lo..=b.hi].fill(base + mu / mass);
    }
    u
}

/// `Γᵢ = Σ_{j ≤ i} mⱼ (uⱼ - u_freeⱼ)`.
pub fn adhesion_potential(u: &[f64], u_free: &[f64], masses: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    u.iter()
        .zip(u_free)
        .zip(masses)
        .map(|((a, b), m)| {
            acc += m * (a - b);
            acc
        })
        .collect()
}

fn check_len(what: usize, expected: usize) -> Result<()> {
    if what != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: what,
        });
    }
    Ok(())
}

/// Initial velocity compatible with the initial congestion: on each congested block
/// of `x0`, `u0` is projected onto nondecreasing velocities (a block may spread but
/// not compress); the pooled stretches become the reported blocks.
fn admissible_initial_velocity(
    u0: &[f64],
    blocks: &BlockPartition,
    masses: &[f64],
) -> (Vec<f64>, BlockPartition) {
    let mut u = u0.to_vec();
    let mut refined = Vec::new();
    let scale = u0.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    for b in blocks.iter() {
        let iso = pava(&u0[b.lo..=b.hi], &masses[b.lo..=b.hi], TIE_RTOL * scale);
        u[b.lo..=b.hi].copy_from_slice(&iso.values);
        refined.extend(iso.pools.iter().filter(|p| p.count() >= 2).map(|p| Block {
            lo: b.lo + p.lo,
            hi: b.lo + p.hi,
        }));
    }
    (
        u,
        BlockPartition::new(refined).expect("sub-pools of sorted blocks stay sorted"),
    )
}

/// A particle system together with its congested rearrangement and an optional
/// per-particle force multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSystem {
    particles: ParticleSystem,
    xtil: MonotoneMap,
    force_scale: Option<Vec<f64>>,
}

impl LagrangianSystem {
    pub fn new(particles: ParticleSystem) -> Self {
        let xtil = congested_transport(&particles);
        Self {
            particles,
            xtil,
            force_scale: None,
        }
    }

    /// Uses a caller-provided rearrangement instead of the congested transport.
    pub fn with_xtil(particles: ParticleSystem, xtil: MonotoneMap) -> Result<Self> {
        check_len(xtil.len(), particles.len())?;
        Ok(Self {
            particles,
            xtil,
            force_scale: None,
        })
    }

    /// Multiplies the force felt by particle `i` by `scale[i]`.
    pub fn with_force_scale(mut self, scale: Vec<f64>) -> Result<Self> {
        check_len(scale.len(), self.particles.len())?;
        self.force_scale = Some(scale);
        Ok(self)
    }

    pub fn particles(&self) -> &ParticleSystem {
        &self.particles
    }

    pub fn masses(&self) -> &[f64] {
        self.particles.masses()
    }

    pub fn xtil(&self) -> &MonotoneMap {
        &self.xtil
    }

    pub fn init_state(&self, u0: &[f64]) -> Result<SimState> {
        let masses = self.masses();
        check_len(u0.len(), masses.len())?;
        if let Some(i) = u0.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "initial velocity",
                index: i,
            });
        }
        let positions = self.particles.positions();
        let (x, congested) = project_admissible(positions, &self.xtil, masses)?;
        let (u, blocks) = admissible_initial_velocity(u0, &congested, masses);
        let gamma = adhesion_potential(&u, u0, masses);
        Ok(SimState {
            step: 0,
            t: 0.0,
            a_free: positions.to_vec(),
            u_free: u0.to_vec(),
            x,
            u,
            gamma,
            blocks,
        })
    }

    pub(crate) fn acceleration(
        &self,
        force: &dyn ForceField,
        t: f64,
        x: &[f64],
    ) -> Result<Vec<f64>> {
        x.iter()
            .enumerate()
            .map(|(i, &xi)| {
                let mut a = force.eval(t, xi);
                if let Some(s) = &self.force_scale {
                    a *= s[i];
                }
                if a.is_finite() {
                    Ok(a)
                } else {
                    Err(Error::NonFiniteForce {
                        t,
                        index: i,
                        x: xi,
                        value: a,
                    })
                }
            })
            .collect()
    }

    /// Advances `state` by `h`, landing at time `t_next`.
    fn advance(
        &self,
        state: &SimState,
        force: &dyn ForceField,
        rule: UpdateRule,
        h: f64,
        t_next: f64,
    ) -> Result<SimState> {
        let masses = self.masses();
        let accel = self.acceleration(force, state.t, &state.x)?;
        let u_free: Vec<f64> = state
            .u_free
            .iter()
            .zip(&accel)
            .map(|(u, a)| u + h * a)
            .collect();
        let a_free: Vec<f64> = state
            .a_free
            .iter()
            .zip(&u_free)
            .map(|(x, u)| x + h * u)
            .collect();
        let (x, blocks) = match rule {
            UpdateRule::Incremental => {
                let target: Vec<f64> = state
                    .x
                    .iter()
                    .zip(&u_free)
                    .map(|(x, u)| x + h * u)
                    .collect();
                project_admissible(&target, &self.xtil, masses)?
            }
            UpdateRule::AccumulatedFreePath => project_admissible(&a_free, &self.xtil, masses)?,
        };
        let u = block_velocity(&u_free, &blocks, masses);
        let gamma = adhesion_potential(&u, &u_free, masses);
        Ok(SimState {
            step: state.step + 1,
            t: t_next,
            a_free,
            u_free,
            x,
            u,
            gamma,
            blocks,
        })
    }

    /// One step of size `cfg.dt` (shortened to land on `cfg.t_end`).
    pub fn step(
        &self,
        state: &SimState,
        force: &dyn ForceField,
        cfg: &StepperConfig,
    ) -> Result<SimState> {
        cfg.validate()?;
        let k = state.step + 1;
        let (h, t_next) = if k <= cfg.n_steps() {
            let t_next = cfg.time_at(k);
            (t_next - cfg.time_at(k - 1), t_next)
        } else {
            (cfg.dt, state.t + cfg.dt)
        };
        self.advance(state, force, cfg.update_rule, h, t_next)
    }

    /// Marches from `initial` to `cfg.t_end`, yielding every state after the first.
    pub fn march<'a>(
        &'a self,
        initial: SimState,
        force: &'a dyn ForceField,
        cfg: &'a StepperConfig,
    ) -> Marcher<'a> {
        Marcher {
            system: self,
            force,
            cfg,
            current: initial,
            failed: false,
        }
    }
}

/// Iterator over the states of a marching run.
pub struct Marcher<'a> {
    system: &'a LagrangianSystem,
    force: &'a dyn ForceField,
    cfg: &'a StepperConfig,
    current: SimState,
    failed: bool,
}

impl Iterator for Marcher<'_> {
    type Item = Result<SimState>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.current.step >= self.cfg.n_steps() {
            return None;
        }
        let k = self.current.step + 1;
        let t_next = self.cfg.time_at(k);
        let h = t_next - self.cfg.time_at(k - 1);
        match self
            .system
            .advance(&self.current, self.force, self.cfg.update_rule, h, t_next)
        {
            Ok(s) => {
                self.current = s.clone();
                Some(Ok(s))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Initial state for `ps` with initial velocity `u0`.
pub fn init_state(ps: &ParticleSystem, u0: &[f64]) -> Result<SimState> {
    LagrangianSystem::new(ps.clone()).init_state(u0)
}

/// One marching step with explicit `X̃` and masses.
pub fn step(
    state: &SimState,
    force: &dyn ForceField,
    cfg: &StepperConfig,
    xtil: &MonotoneMap,
    masses: &[f64],
) -> Result<SimState> {
    let ps = ParticleSystem::new(state.x.to_vec(), masses.to_vec())?;
    LagrangianSystem::with_xtil(ps, xtil.clone())?.step(state, force, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force::ZeroForce;

    #[test]
    fn block_velocity_examples() {
        let none = BlockPartition::empty();
        assert_eq!(
            block_velocity(&[1.0, -2.0], &none, &[1.0, 1.0]),
            vec![1.0, -2.0]
        );

        let all = BlockPartition::new(vec![Block { lo: 0, hi: 1 }]).unwrap();
        assert_eq!(
            block_velocity(&[1.0, -1.0], &all, &[0.5, 0.5]),
            vec![0.0, 0.0]
        );

        let first = BlockPartition::new(vec![Block { lo: 0, hi: 1 }]).unwrap();
        assert_eq!(
            block_velocity(&[4.0, 0.0, 7.0], &first, &[1.0, 3.0, 1.0]),
            vec![1.0, 1.0, 7.0]
        );
    }

    #[test]
    fn adhesion_vanishes_without_constraint() {
        let g = adhesion_potential(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &[1.0; 3]);
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn adhesion_vanishes_at_block_right_edges() {
        let masses = [0.2, 0.3, 0.5, 0.4, 0.1];
        let uf = [3.0, 1.0, -2.0, 5.0, 4.0];
        let blocks =
            BlockPartition::new(vec![Block { lo: 0, hi: 2 }, Block { lo: 3, hi: 4 }]).unwrap();
        let u = block_velocity(&uf, &blocks, &masses);
        let g = adhesion_potential(&u, &uf, &masses);
        assert!(g[2].abs() < 1e-15);
        assert!(g[4].abs() < 1e-15);
        assert!(g[0] < 0.0 && g[1] < 0.0 && g[3] < 0.0);
    }

    fn uniform(n: usize) -> ParticleSystem {
        let m = 1.0 / n as f64;
        ParticleSystem::new((0..n).map(|i| (i as f64 + 0.5) * m).collect(), vec![m; n]).unwrap()
    }

    #[test]
    fn rigid_translation_is_admissible() {
        let s = init_state(&uniform(8), &[0.7; 8]).unwrap();
        assert_eq!(s.u, vec![0.7; 8]);
        assert!(s.gamma.iter().all(|g| g.abs() < 1e-15));
        assert_eq!(s.blocks.blocks(), &[Block { lo: 0, hi: 7 }]);
    }

    #[test]
    fn compressive_initial_velocity_is_averaged() {
        let s = init_state(&uniform(3), &[3.0, 0.0, -3.0]).unwrap();
        for u in &s.u {
            assert!(u.abs() < 1e-15);
        }
        assert!(s.gamma[0] < 0.0 && s.gamma[1] < 0.0 && s.gamma[2].abs() < 1e-15);
    }

    #[test]
    fn spreading_initial_velocity_is_kept() {
        let s = init_state(&uniform(3), &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.u, vec![-1.0, 0.0, 1.0]);
        assert!(s.blocks.is_empty());
    }

    #[test]
    fn free_flight_without_contact() {
        let ps = ParticleSystem::new(vec![0.0, 2.0, 4.0], vec![0.5; 3]).unwrap();
        let sys = LagrangianSystem::new(ps);
        let s0 = sys.init_state(&[-0.5, 0.0, 0.5]).unwrap();
        let cfg = StepperConfig::new(0.1, 1.0);
        let s1 = sys.step(&s0, &ZeroForce, &cfg).unwrap();
        assert_eq!(s1.x.values(), &[-0.05, 2.0, 4.05]);
        assert_eq!(s1.x.values(), s1.a_free.as_slice());
        assert!(s1.blocks.is_empty());
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            init_state(&uniform(3), &[0.0; 2]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_force_aborts() {
        let sys = LagrangianSystem::new(uniform(2));
        let s0 = sys.init_state(&[0.0; 2]).unwrap();
        let bad = crate::force::FnForce::new(|_, _| f64::NAN, 0.0, 0.0);
        let err = sys
            .step(&s0, &bad, &StepperConfig::new(0.1, 1.0))
            .unwrap_err();
        assert!(matches!(err, Error::NonFiniteForce { .. }));
    }

    #[test]
    fn step_count_and_times() {
        let cfg = StepperConfig::new(1e-3, 3.0);
        assert_eq!(cfg.n_steps(), 3000);
        assert_eq!(cfg.time_at(640), 0.64);
        assert_eq!(cfg.time_at(3000), 3.0);
        assert_eq!(StepperConfig::new(0.3, 1.0).n_steps(), 4);
        assert_eq!(StepperConfig::new(0.1, 0.0).n_steps(), 0);
    }
}
