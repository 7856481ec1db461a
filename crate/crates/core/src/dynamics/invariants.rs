//! Named checks on a Lagrangian state.

use super::SimState;
use crate::monotone::MonotoneMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Worst value observed; the check passes when `value <= limit`.
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.limit
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn push(&mut self, name: &'static str, value: f64, limit: f64) {
        self.checks.push(Check { name, value, limit });
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn max_abs<'a>(v: impl IntoIterator<Item = &'a f64>) -> f64 {
    v.into_iter().fold(0.0_f64, |s, x| s.max(x.abs()))
}

/// Feasibility, block structure of the velocity and sign and boundary values of the
/// adhesion potential. `tol_gamma` bounds how far Γ may rise above zero.
pub fn check_state(
    state: &SimState,
    xtil: &MonotoneMap,
    masses: &[f64],
    tol_gamma: f64,
) -> CheckReport {
    let mut r = CheckReport::default();
    let n = state.x.len();
    let pos_scale = max_abs(state.x.iter()).max(max_abs(xtil.iter())).max(1.0);
    let vmax = max_abs(&state.u_free).max(max_abs(&state.u));
    let total_mass: f64 = masses.iter().sum();
    let gamma_scale = total_mass * vmax;

    let infeasible = (1..n)
        .map(|i| (xtil[i] - xtil[i - 1]) - (state.x[i] - state.x[i - 1]))
        .fold(0.0_f64, f64::max);
    r.push("feasibility", infeasible, 1e-12 * pos_scale);

    let mut in_block = vec![false; n];
    let mut block_spread = 0.0_f64;
    let mut ends = vec![n.saturating_sub(1)];
    for b in state.blocks.iter() {
        for i in b.indices() {
            in_block[i] = true;
            block_spread = block_spread.max((state.u[i] - state.u[b.lo]).abs());
        }
        ends.push(b.hi);
    }
    r.push("block_velocity_constant", block_spread, 0.0);

    let off_block = (0..n)
        .filter(|&i| !in_block[i])
        .map(|i| (state.u[i] - state.u_free[i]).abs())
        .fold(0.0_f64, f64::max);
    r.push("free_velocity_off_blocks", off_block, 0.0);

    r.push(
        "gamma_nonpositive",
        state.gamma.iter().copied().fold(0.0, f64::max),
        tol_gamma,
    );

    let end_values = ends.iter().filter_map(|&i| state.gamma.get(i));
    r.push("gamma_block_ends", max_abs(end_values), 1e-12 * gamma_scale);

    let p: f64 = masses.iter().zip(&state.u).map(|(m, u)| m * u).sum();
    let pf: f64 = masses.iter().zip(&state.u_free).map(|(m, u)| m * u).sum();
    r.push("momentum_balance", (p - pf).abs(), 1e-12 * gamma_scale);
    r
}
