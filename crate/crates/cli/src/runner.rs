//! Builds a run from its configuration, drives the integrator and checks every state.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use granular_core::build_particles;
use granular_core::density::{Piece, PiecewiseDensity, Profile};
use granular_core::dynamics::{
    check_state, picard_solve, BlockHistory, CheckReport, ContactKind, LagrangianSystem,
    PicardConfig, SimState, StepperConfig, UpdateRule,
};
use granular_core::eulerian::{check_exclusion, reconstruct, EulerianField};
use granular_core::force::{ForceField, ForcePhase, PiecewiseForce, SaturatedSpring, ZeroForce};
use granular_core::heterogeneous::{ConcentrationScenario, ForceWeighting};
use granular_core::scenarios::{error_norms, merge_interval, two_block_exact, TwoBlockParams};
use serde::Serialize;

use crate::config::{IntegratorKind, RunConfig, Scenario, UpdateRuleConfig, WeightingConfig};
use crate::error::CliError;
use crate::output::{write_json, RecordWriter, EULERIAN_HEADER, LAGRANGIAN_HEADER};

/// Environment variable that replaces `output.path`.
pub const OUTPUT_DIR_ENV: &str = "GRANULAR_OUTPUT_DIR";

/// Relative mass drift accepted for the reconstructed density.
const MASS_RTOL: f64 = 1e-9;

pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| cfg.output.path.clone())
}

/// Everything needed to integrate one configuration.
pub struct Prepared {
    pub system: LagrangianSystem,
    pub u0: Vec<f64>,
    pub force: Box<dyn ForceField>,
    pub rho_star: Option<Vec<f64>>,
    /// Set when the closed-form two-block solution applies.
    pub exact: Option<TwoBlockParams>,
    pub stepper: StepperConfig,
}

fn config_err(e: granular_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn build_force(cfg: &RunConfig) -> Result<Option<Box<dyn ForceField>>, CliError> {
    let f = &cfg.force;
    if f.phases.is_some() && f.spring.is_some() {
        return Err(CliError::Config(
            "force: give either phases or spring, not both".into(),
        ));
    }
    if let Some(phases) = &f.phases {
        let phases = phases
            .iter()
            .map(|p| ForcePhase {
                t_start: p.t_start,
                x_breaks: p.breaks.clone(),
                values: p.values.clone(),
            })
            .collect();
        return Ok(Some(Box::new(
            PiecewiseForce::new(phases).map_err(config_err)?,
        )));
    }
    if let Some(s) = f.spring {
        if !(s.stiffness >= 0.0 && s.reach >= 0.0) || !s.center.is_finite() {
            return Err(CliError::Config(
                "spring needs nonnegative stiffness and reach".into(),
            ));
        }
        return Ok(Some(Box::new(SaturatedSpring {
            stiffness: s.stiffness,
            center: s.center,
            reach: s.reach,
        })));
    }
    Ok(None)
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    cfg.validate()?;
    let explicit_force = build_force(cfg)?;
    let mut stepper = StepperConfig::new(cfg.dt, cfg.t_end);
    stepper.update_rule = match cfg.integrator.update_rule {
        UpdateRuleConfig::Incremental => UpdateRule::Incremental,
        UpdateRuleConfig::FreePath => UpdateRule::AccumulatedFreePath,
    };
    if cfg.integrator.kind == IntegratorKind::Picard {
        stepper.picard = Some(PicardConfig {
            max_iters: cfg.integrator.max_iters,
            tol: cfg.integrator.tol,
        });
    }
    let n = cfg.n;

    let prepared = match cfg.scenario {
        Scenario::TwoBlock => {
            let geom = cfg.two_block.unwrap_or_default();
            let params = TwoBlockParams::from_gap(
                cfg.force.alpha.unwrap_or(0.5),
                cfg.force.t_star.unwrap_or(1.0),
                geom.width,
                geom.gap,
            )
            .map_err(config_err)?;
            let ps =
                build_particles(&params.density().map_err(config_err)?, n).map_err(config_err)?;
            let (force, exact): (Box<dyn ForceField>, _) = match explicit_force {
                Some(f) => (f, None),
                None => (Box::new(params.force().map_err(config_err)?), Some(params)),
            };
            Prepared {
                system: LagrangianSystem::new(ps),
                u0: vec![0.0; n],
                force,
                rho_star: None,
                exact,
                stepper,
            }
        }
        Scenario::Heterogeneous => {
            let h = cfg.heterogeneous.unwrap_or_default();
            let sc = ConcentrationScenario {
                lo: h.lo,
                hi: h.hi,
                center: h.center,
                amplitude: h.amplitude,
                fill: h.fill,
                force: cfg.force.magnitude.unwrap_or(0.5),
            };
            let rs = sc.build(n).map_err(config_err)?;
            let weighting = match h.weighting {
                WeightingConfig::Direct => ForceWeighting::Direct,
                WeightingConfig::RhoStar => ForceWeighting::RhoStarWeighted,
            };
            let force: Box<dyn ForceField> = match explicit_force {
                Some(f) => f,
                None => Box::new(
                    PiecewiseForce::compressive(cfg.force.center.unwrap_or(h.center), sc.force)
                        .map_err(config_err)?,
                ),
            };
            Prepared {
                system: rs.lagrangian(weighting),
                u0: vec![0.0; n],
                force,
                rho_star: Some(rs.rho_star0_at_particles.clone()),
                exact: None,
                stepper,
            }
        }
        Scenario::Custom => {
            let c = cfg.custom.as_ref().expect("validated");
            let pieces = c
                .pieces
                .iter()
                .map(|p| Piece::new(p.lo, p.hi, Profile::Constant(p.value)))
                .collect();
            let density = PiecewiseDensity::new(pieces).map_err(config_err)?;
            if let Some(p) = c.pieces.iter().find(|p| p.value > 1.0) {
                return Err(CliError::Config(format!(
                    "density {} on [{}, {}] exceeds the maximal density 1",
                    p.value, p.lo, p.hi
                )));
            }
            let ps = build_particles(&density, n).map_err(config_err)?;
            let u0 = ps
                .positions()
                .iter()
                .map(|x| c.velocity_slope * x + c.velocity_offset)
                .collect();
            Prepared {
                system: LagrangianSystem::new(ps),
                u0,
                force: explicit_force.unwrap_or_else(|| Box::new(ZeroForce)),
                rho_star: None,
                exact: None,
                stepper,
            }
        }
    };
    Ok(prepared)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckMaximum {
    pub name: String,
    pub max_value: f64,
    /// Largest `value / limit` seen (0 when both are 0).
    pub max_fraction_of_limit: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EventRecord {
    pub step: usize,
    pub t: f64,
    pub interface: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ContactSummary {
    pub contacts: usize,
    pub releases: usize,
    pub first_contact: Option<EventRecord>,
    pub last_release: Option<EventRecord>,
}

/// Steps `[first, end)` during which the two blocks are one congested zone.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MergedBlock {
    pub first_step: usize,
    pub end_step: Option<usize>,
    pub first_t: f64,
    pub end_t: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ErrorAtTime {
    pub t: f64,
    pub x_l2: f64,
    pub u_l2: f64,
    pub gamma_sup: f64,
    pub gamma_scale: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PicardSummary {
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub scenario: Scenario,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub total_mass: f64,
    pub output_steps: Vec<usize>,
    pub output_times: Vec<f64>,
    pub contacts: ContactSummary,
    pub merged_block: Option<MergedBlock>,
    pub invariants: Vec<CheckMaximum>,
    pub errors: Vec<ErrorAtTime>,
    pub picard: Option<PicardSummary>,
    pub files: Vec<String>,
}

/// Lagrangian checks plus the Eulerian ones: density bound (through the
/// reconstruction), mass conservation and exclusion.
pub fn check_all(
    p: &Prepared,
    s: &SimState,
    exclusion_tol: f64,
) -> Result<(CheckReport, EulerianField), CliError> {
    let masses = p.system.masses();
    let total = p.system.particles().total_mass();
    let mut report = check_state(
        s,
        p.system.xtil(),
        masses,
        p.stepper.tol_gamma_for(total, &s.u_free),
    );
    let field = match reconstruct(s, p.system.xtil(), masses, p.rho_star.as_deref()) {
        Ok(f) => f,
        Err(granular_core::Error::InvalidTransport { ratio, .. }) => {
            return Err(CliError::Invariant {
                check: "density_bound".into(),
                step: s.step,
                t: s.t,
                value: ratio,
                limit: 1.0 + granular_core::eulerian::DENSITY_SLACK,
            })
        }
        Err(e) => return Err(e.into()),
    };
    report.push(
        "mass_conservation",
        (field.ratio_mass() - total).abs(),
        MASS_RTOL * total,
    );
    let vmax = s.u_free.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let limit = exclusion_tol * (total * vmax).max(1.0);
    report.push(
        "exclusion",
        check_exclusion(&field, limit).max_residual,
        limit,
    );
    Ok((report, field))
}

fn first_failure(report: &CheckReport, s: &SimState) -> Result<(), CliError> {
    match report.failures().next() {
        Some(c) => Err(CliError::Invariant {
            check: c.name.to_string(),
            step: s.step,
            t: s.t,
            value: c.value,
            limit: c.limit,
        }),
        None => Ok(()),
    }
}

struct Tracker {
    maxima: BTreeMap<&'static str, (f64, f64)>,
    order: Vec<&'static str>,
}

impl Tracker {
    fn new() -> Self {
        Self {
            maxima: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    fn add(&mut self, report: &CheckReport) {
        for c in &report.checks {
            let frac = if c.value <= 0.0 {
                0.0
            } else {
                c.value / c.limit
            };
            let e = self
                .maxima
                .entry(c.name)
                .or_insert_with(|| (f64::NEG_INFINITY, 0.0));
            if e.0 == f64::NEG_INFINITY {
                self.order.push(c.name);
            }
            e.0 = e.0.max(c.value);
            e.1 = e.1.max(frac);
        }
    }

    fn into_summary(self) -> Vec<CheckMaximum> {
        self.order
            .iter()
            .map(|name| {
                let (v, f) = self.maxima[name];
                CheckMaximum {
                    name: name.to_string(),
                    max_value: v,
                    max_fraction_of_limit: f,
                }
            })
            .collect()
    }
}

fn output_steps(cfg: &RunConfig, stepper: &StepperConfig) -> Vec<usize> {
    let mut steps: Vec<usize> = cfg
        .effective_output_times()
        .iter()
        .map(|&t| stepper.step_index(t))
        .collect();
    steps.sort_unstable();
    steps.dedup();
    steps
}

/// Runs `cfg`, writing records under `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<Summary, CliError> {
    let p = prepare(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let fmt = cfg.output.format;
    let mut lag = RecordWriter::create(out_dir, "lagrangian", LAGRANGIAN_HEADER, fmt)?;
    let mut eul = RecordWriter::create(out_dir, "eulerian", EULERIAN_HEADER, fmt)?;

    let n = cfg.n;
    let total_mass = p.system.particles().total_mass();
    let out_steps = output_steps(cfg, &p.stepper);
    let mut out_times = Vec::new();
    let mut errors = Vec::new();
    let mut tracker = Tracker::new();
    let initial = p.system.init_state(&p.u0)?;
    let mut history = BlockHistory::new(&initial.blocks, n);

    let mut visit = |s: &SimState| -> Result<(), CliError> {
        if s.step > 0 {
            history.record(s.step, s.t, &s.blocks);
        }
        let (report, field) = check_all(&p, s, cfg.exclusion_tol)?;
        tracker.add(&report);
        first_failure(&report, s)?;
        if out_steps.binary_search(&s.step).is_ok() {
            lag.write_state(s)?;
            eul.write_field(&field)?;
            out_times.push(s.t);
            if let Some(params) = &p.exact {
                let ex = two_block_exact(params, p.system.particles(), s.t)?;
                let e = error_norms(s, &ex, p.system.masses())?;
                errors.push(ErrorAtTime {
                    t: s.t,
                    x_l2: e.x_l2,
                    u_l2: e.u_l2,
                    gamma_sup: e.gamma_sup,
                    gamma_scale: e.gamma_scale,
                });
            }
        }
        Ok(())
    };

    let picard = match cfg.integrator.kind {
        IntegratorKind::Marching => {
            visit(&initial)?;
            for s in p.system.march(initial, p.force.as_ref(), &p.stepper) {
                visit(&s?)?;
            }
            None
        }
        IntegratorKind::Picard => {
            let out = picard_solve(&p.system, &p.u0, p.force.as_ref(), &p.stepper)?;
            for s in &out.states {
                visit(s)?;
            }
            Some(PicardSummary {
                iterations: out.iterations,
                contraction_ratios: out.contraction_ratios(),
                residuals: out.residuals,
            })
        }
    };

    let files = [lag.finish()?, eul.finish()?];
    let event = |e: &granular_core::dynamics::ContactEvent| EventRecord {
        step: e.step,
        t: e.t,
        interface: e.interface,
    };
    let contacts = ContactSummary {
        contacts: history.count(ContactKind::Contact),
        releases: history.count(ContactKind::Release),
        first_contact: history
            .events()
            .iter()
            .find(|e| e.kind == ContactKind::Contact)
            .map(event),
        last_release: history
            .events()
            .iter()
            .rev()
            .find(|e| e.kind == ContactKind::Release)
            .map(event),
    };
    let merged_block = match cfg.scenario {
        Scenario::TwoBlock if n >= 2 => merge_interval(&history, n / 2 - 1).map(|m| MergedBlock {
            first_step: m.contact_step,
            end_step: m.release_step,
            first_t: m.contact_t,
            end_t: m.release_t,
        }),
        _ => None,
    };
    let summary_path = out_dir.join("summary.json");
    let summary = Summary {
        scenario: cfg.scenario,
        n,
        dt: cfg.dt,
        t_end: cfg.t_end,
        steps: p.stepper.n_steps(),
        total_mass,
        output_steps: out_steps.clone(),
        output_times: out_times,
        contacts,
        merged_block,
        invariants: tracker.into_summary(),
        errors,
        picard,
        files: files
            .iter()
            .chain(std::iter::once(&summary_path))
            .filter_map(|f| f.file_name().map(|s| s.to_string_lossy().into_owned()))
            .collect(),
    };
    write_json(&summary_path, &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ValidationReport {
    pub scenario: Scenario,
    pub n: usize,
    pub total_mass: f64,
    pub initial_blocks: usize,
    pub steps: usize,
    pub has_exact_solution: bool,
    pub invariants: Vec<CheckMaximum>,
}

/// Parses and builds the run, then checks the initial state without stepping.
pub fn validate(cfg: &RunConfig) -> Result<ValidationReport, CliError> {
    let p = prepare(cfg)?;
    let s0 = p.system.init_state(&p.u0)?;
    let (report, _) = check_all(&p, &s0, cfg.exclusion_tol)?;
    first_failure(&report, &s0)?;
    let mut tracker = Tracker::new();
    tracker.add(&report);
    Ok(ValidationReport {
        scenario: cfg.scenario,
        n: cfg.n,
        total_mass: p.system.particles().total_mass(),
        initial_blocks: s0.blocks.len(),
        steps: p.stepper.n_steps(),
        has_exact_solution: p.exact.is_some(),
        invariants: tracker.into_summary(),
    })
}

/// Writes the closed-form solution at the output times to `exact.csv` / `exact.jsonl`.
pub fn oracle(cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf, CliError> {
    let p = prepare(cfg)?;
    let params = p
        .exact
        .ok_or_else(|| CliError::Config("no exact solution for this configuration".into()))?;
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut w = RecordWriter::create(out_dir, "exact", LAGRANGIAN_HEADER, cfg.output.format)?;
    for step in output_steps(cfg, &p.stepper) {
        let t = p.stepper.time_at(step);
        let ex = two_block_exact(&params, p.system.particles(), t)?;
        w.write_particles(t, &ex.x, &ex.u, &ex.gamma)?;
    }
    w.finish()
}
