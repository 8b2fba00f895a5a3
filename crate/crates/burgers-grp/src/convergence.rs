//! Mesh-refinement convergence studies.
//!
//! A study runs the solver on a sequence of meshes (`n` doubling per level),
//! measures errors against a reference solution at the final time and
//! reports experimental orders of convergence `EOC = log₂(e_h / e_{h/2})`.
//! Levels that blow up are reported without aborting the remaining levels.

use alloc::vec::Vec;

use crate::diagnostics::EntropyAuditor;
use crate::field::FieldError;
use crate::math;
use crate::mesh::{Mesh, MeshError};
use crate::oracles::{error_norms, ExactError, ExactSolution, InitialData, Norms};
use crate::stepper::{run, BlowUp, RunConfig, StepObserver};

/// Template for one study: the per-level mesh is `dim`-dimensional with
/// `base_n · 2^level` cells per axis.
#[derive(Clone, Copy, Debug)]
pub struct StudySpec {
    pub dim: usize,
    pub base_n: usize,
    pub levels: usize,
    pub initial: InitialData,
    pub config: RunConfig,
}

/// One completed level.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    /// First time step of the run (the uniform step away from the final
    /// truncated one).
    pub dt: f64,
    pub norms: Norms,
    /// `log₂(e_{previous}/e_{this})` per norm; `None` on the first level or
    /// when a neighboring error vanishes.
    pub eoc: [Option<f64>; 3],
    pub steps: usize,
    /// Faces whose stabilized dissipation product fell below `C₁|⟦u⟧|³`,
    /// summed over the run (positive counts flag entropy-inequality
    /// failures of the unstabilized variant).
    pub dissipation_violations: usize,
    /// Largest per-step increase of total entropy.
    pub max_entropy_increase: f64,
    /// Weak-BV accumulator at the final time.
    pub weak_bv: f64,
}

/// Per-level outcome.
#[derive(Clone, Debug)]
pub enum LevelOutcome {
    Done(ConvergenceRow),
    BlewUp { level: usize, n: usize, report: BlowUp },
}

#[derive(Clone, Debug)]
pub enum StudyError {
    Mesh(MeshError),
    Projection(FieldError),
    Oracle(ExactError),
}

impl core::fmt::Display for StudyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StudyError::Mesh(e) => write!(f, "mesh error: {e}"),
            StudyError::Projection(e) => write!(f, "projection error: {e}"),
            StudyError::Oracle(e) => write!(f, "reference solution error: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StudyError {}

/// Run all levels of a study against a reference solution. The reference is
/// taken from the initial data's closed form unless `reference` overrides
/// it.
pub fn convergence_study(
    spec: &StudySpec,
    reference: Option<&ExactSolution>,
) -> Result<Vec<LevelOutcome>, StudyError> {
    let owned;
    let exact = match reference {
        Some(e) => e,
        None => {
            owned = spec
                .initial
                .exact_solution()
                .expect("every shipped initial datum has a closed form");
            &owned
        }
    };

    let mut outcomes = Vec::with_capacity(spec.levels);
    let mut prev_norms: Option<Norms> = None;
    for level in 0..spec.levels {
        let n = spec.base_n << level;
        let mesh = Mesh::new(spec.dim, n).map_err(StudyError::Mesh)?;
        let initial = spec.initial.project(&mesh).map_err(StudyError::Projection)?;
        let mut auditor = EntropyAuditor::new(&spec.config.scheme);
        match run(&mesh, initial, &spec.config, &mut auditor) {
            Ok(trajectory) => {
                let norms = error_norms(&mesh, trajectory.final_field(), exact)
                    .map_err(StudyError::Oracle)?;
                let eoc = match &prev_norms {
                    Some(prev) => [
                        eoc(prev.l1, norms.l1),
                        eoc(prev.l2, norms.l2),
                        eoc(prev.linf, norms.linf),
                    ],
                    None => [None, None, None],
                };
                prev_norms = Some(norms);
                outcomes.push(LevelOutcome::Done(ConvergenceRow {
                    level,
                    n,
                    h: mesh.h(),
                    dt: trajectory.stats.first().map(|s| s.dt).unwrap_or(0.0),
                    norms,
                    eoc,
                    steps: trajectory.steps_taken(),
                    dissipation_violations: auditor.total_violations(),
                    max_entropy_increase: auditor.max_entropy_increase(),
                    weak_bv: auditor.weak_bv_accumulated(),
                }));
            }
            Err(report) => {
                prev_norms = None;
                outcomes.push(LevelOutcome::BlewUp { level, n, report });
            }
        }
    }
    Ok(outcomes)
}

fn eoc(coarse: f64, fine: f64) -> Option<f64> {
    if coarse > 0.0 && fine > 0.0 {
        Some(math::ln(coarse / fine) / math::ln(2.0))
    } else {
        None
    }
}

/// Same-scheme reference at `refine ×` the finest study resolution, with the
/// time-step constant halved: a self-convergence oracle for horizons where
/// no closed form applies.
pub fn fine_grid_reference(
    spec: &StudySpec,
    refine: usize,
    observer: &mut impl StepObserver,
) -> Result<ExactSolution, StudyError> {
    let n = (spec.base_n << (spec.levels.saturating_sub(1))) * refine;
    let mesh = Mesh::new(spec.dim, n).map_err(StudyError::Mesh)?;
    let initial = spec.initial.project(&mesh).map_err(StudyError::Projection)?;
    let mut config = spec.config;
    config.time = crate::stepper::TimeControls::new(
        config.time.t_end(),
        0.5 * config.time.c2(),
        config.time.p(),
        config.time.cfl(),
    )
    .expect("halving C2 keeps the controls valid");
    match run(&mesh, initial, &config, observer) {
        Ok(traj) => Ok(ExactSolution::Reference(crate::oracles::ReferenceField {
            field: traj.final_field().clone(),
            mesh,
        })),
        Err(report) => Err(StudyError::Oracle(ExactError::ReferenceTimeMismatch {
            t: report.time,
            reference_time: config.time.t_end(),
        })),
    }
}
