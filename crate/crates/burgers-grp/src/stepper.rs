//! Forward Euler finite-volume update with the stabilized GRP flux.
//!
//! One step reads the current piecewise-constant state, builds minmod
//! gradients, evaluates the stabilized flux on every face (each face exactly
//! once, shared by its two cells, so the update telescopes and mass is
//! conserved to rounding), and writes
//!
//! `u_K ← u_K − (Δt/h) Σᵢ (f_{σᵢ⁺} − f_{σᵢ⁻})`.
//!
//! The time step is `Δt = min(C₂ hᵖ, cfl·h/(d·max|u|))` with `p ≥ 4/3`; the
//! advective bound is an addition on top of the `hᵖ` rule so coarse
//! demonstration grids stay stable, and runs report when it binds. The final
//! step is truncated to land on the end time exactly.
//!
//! All loops run in a fixed order and reductions are compensated, so a run
//! is bit-reproducible for identical inputs.

use alloc::vec::Vec;
use core::fmt;

use crate::field::Field;
use crate::flux::{face_breakdown, FluxBreakdown, SchemeParams};
use crate::math;
use crate::mesh::Mesh;
use crate::reconstruction::{minmod_gradients, GradientField};

/// Guard against division by zero in the advective time-step bound.
const SPEED_FLOOR: f64 = 1e-30;

/// Relative slack when deciding that the remaining time fits in one step.
const FINAL_STEP_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeControlsError {
    /// End time must be finite and nonnegative.
    BadEndTime,
    /// The proportionality constant `C₂` must be positive.
    BadC2,
    /// The exponent must satisfy `p ≥ 4/3` so `Δt ≤ C₂ h^{4/3}` always.
    BadExponent,
    /// The advective safety factor must lie in `(0, 1]`.
    BadCfl,
}

impl fmt::Display for TimeControlsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            TimeControlsError::BadEndTime => "end time must be finite and >= 0",
            TimeControlsError::BadC2 => "time-step constant C2 must be > 0",
            TimeControlsError::BadExponent => "time-step exponent p must be >= 4/3",
            TimeControlsError::BadCfl => "cfl must lie in (0, 1]",
        };
        f.write_str(msg)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TimeControlsError {}

/// Validated time-step policy.
#[derive(Clone, Copy, Debug)]
pub struct TimeControls {
    t_end: f64,
    c2: f64,
    p: f64,
    cfl: f64,
}

impl TimeControls {
    pub const P_MIN: f64 = 4.0 / 3.0;

    pub fn new(t_end: f64, c2: f64, p: f64, cfl: f64) -> Result<Self, TimeControlsError> {
        if !t_end.is_finite() || t_end < 0.0 {
            return Err(TimeControlsError::BadEndTime);
        }
        if !(c2 > 0.0) || !c2.is_finite() {
            return Err(TimeControlsError::BadC2);
        }
        if !(p >= Self::P_MIN) || !p.is_finite() {
            return Err(TimeControlsError::BadExponent);
        }
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(TimeControlsError::BadCfl);
        }
        Ok(Self { t_end, c2, p, cfl })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    pub fn with_t_end(self, t_end: f64) -> Self {
        Self { t_end, ..self }
    }
}

/// Nominal time step before final-step truncation:
/// `min(C₂ hᵖ, cfl·h/(d·max(|u|, ε)))`.
pub fn nominal_dt(controls: &TimeControls, mesh: &Mesh, max_abs_u: f64) -> f64 {
    let refinement = controls.c2 * math::powf(mesh.h(), controls.p);
    let advective = controls.cfl * mesh.h() / (mesh.dim() as f64 * max_abs_u.max(SPEED_FLOOR));
    refinement.min(advective)
}

/// Time step actually taken: the nominal step truncated so the run lands on
/// the end time exactly. Returns the step and whether the advective bound
/// was the binding one.
pub fn choose_dt(
    controls: &TimeControls,
    mesh: &Mesh,
    max_abs_u: f64,
    remaining: f64,
) -> (f64, bool) {
    let refinement = controls.c2 * math::powf(mesh.h(), controls.p);
    let advective = controls.cfl * mesh.h() / (mesh.dim() as f64 * max_abs_u.max(SPEED_FLOOR));
    let nominal = refinement.min(advective);
    let dt = if nominal >= remaining * (1.0 - FINAL_STEP_SLACK) {
        remaining
    } else {
        nominal
    };
    (dt, advective < refinement)
}

/// Per-step scalars kept for every step of a run.
#[derive(Clone, Copy, Debug)]
pub struct StepStats {
    pub step: usize,
    /// Time after the step.
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub total_entropy: f64,
    pub max_abs_u: f64,
    /// True when the advective bound produced a smaller step than `C₂ hᵖ`.
    pub cfl_bound: bool,
}

/// A completed run: snapshots at the configured cadence (always including
/// the initial and final states) and per-step statistics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<(usize, Field)>,
    pub stats: Vec<StepStats>,
}

impl Trajectory {
    pub fn initial(&self) -> &Field {
        &self.snapshots[0].1
    }

    pub fn final_field(&self) -> &Field {
        &self.snapshots.last().expect("at least the initial snapshot").1
    }

    pub fn steps_taken(&self) -> usize {
        self.stats.len()
    }

    /// Largest `max|u|` seen over the whole run, initial state included.
    pub fn max_abs_over_run(&self) -> f64 {
        let initial = self.snapshots[0].1.max_abs();
        self.stats
            .iter()
            .fold(initial, |m, s| m.max(s.max_abs_u))
    }

    /// Relative drift of the conserved mass between the first and any later
    /// step, normalised by `max(|mass₀|, 1)`.
    pub fn max_mass_drift(&self, mesh: &Mesh) -> f64 {
        let m0 = self.initial().mass(mesh);
        let scale = math::abs(m0).max(1.0);
        self.stats
            .iter()
            .fold(0.0, |worst, s| worst.max(math::abs(s.mass - m0) / scale))
    }
}

/// Runaway state: the update produced a non-finite value.
#[derive(Clone, Debug)]
pub struct BlowUp {
    pub step: usize,
    pub time: f64,
    /// Last finite state before the failed update.
    pub last: Field,
}

impl fmt::Display for BlowUp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "solution blew up at step {} (t = {:.6})",
            self.step, self.time
        )
    }
}

#[cfg(feature = "std")]
impl std::error::Error for BlowUp {}

/// Everything an observer may inspect about one completed step.
pub struct StepContext<'a> {
    pub mesh: &'a Mesh,
    pub step_index: usize,
    /// State at the beginning of the step (time `t`).
    pub before: &'a Field,
    /// State after the step (time `t + Δt`).
    pub after: &'a Field,
    pub dt: f64,
    /// Full flux breakdowns for every face, indexed by `mesh.face_index`.
    pub breakdowns: &'a [FluxBreakdown],
    pub gradients: &'a GradientField,
}

/// Per-step hook; all methods are optional.
pub trait StepObserver {
    fn on_step(&mut self, _ctx: &StepContext<'_>) {}
}

impl StepObserver for () {}

impl<A: StepObserver, B: StepObserver> StepObserver for (&mut A, &mut B) {
    fn on_step(&mut self, ctx: &StepContext<'_>) {
        self.0.on_step(ctx);
        self.1.on_step(ctx);
    }
}

/// Run configuration: flux parameters, time-step policy and snapshot
/// cadence (`0` keeps only the initial and final states).
#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub scheme: SchemeParams,
    pub time: TimeControls,
    pub snapshot_cadence: usize,
}

/// Evaluate every face flux of one step into `breakdowns`.
pub fn compute_breakdowns(
    mesh: &Mesh,
    field: &Field,
    grads: &GradientField,
    dt: f64,
    params: &SchemeParams,
    breakdowns: &mut Vec<FluxBreakdown>,
) {
    breakdowns.clear();
    breakdowns.extend(
        mesh.faces()
            .map(|face| face_breakdown(mesh, field, grads, face, dt, params)),
    );
}

fn apply_update(
    mesh: &Mesh,
    field: &Field,
    breakdowns: &[FluxBreakdown],
    dt: f64,
    next_values: &mut Vec<f64>,
) {
    let n_cells = mesh.cell_count();
    let factor = dt / mesh.h();
    next_values.clear();
    next_values.extend_from_slice(field.values());
    for axis in 0..mesh.dim() {
        let base = axis * n_cells;
        for cell in 0..n_cells {
            let f_plus = breakdowns[base + cell].f_new;
            let f_minus = breakdowns[base + mesh.neighbor(cell, axis, -1)].f_new;
            next_values[cell] -= factor * (f_plus - f_minus);
        }
    }
}

/// One forward Euler step. Returns the new field and the per-face flux
/// breakdowns that produced it, or the blow-up report if the update left the
/// finite range.
pub fn step(
    mesh: &Mesh,
    field: &Field,
    params: &SchemeParams,
    dt: f64,
) -> Result<(Field, Vec<FluxBreakdown>), BlowUp> {
    let grads = minmod_gradients(mesh, field);
    let mut breakdowns = Vec::new();
    compute_breakdowns(mesh, field, &grads, dt, params, &mut breakdowns);
    let mut next_values = Vec::new();
    apply_update(mesh, field, &breakdowns, dt, &mut next_values);
    if let Some(_bad) = next_values.iter().position(|v| !v.is_finite()) {
        return Err(BlowUp {
            step: 0,
            time: field.time(),
            last: field.clone(),
        });
    }
    let next = Field::from_raw(next_values, field.time() + dt);
    Ok((next, breakdowns))
}

/// Iterate the scheme from `initial` to `time.t_end()`, invoking the
/// observer after every step. Returns the trajectory, or the blow-up report
/// (with the last finite state attached) if the run failed.
pub fn run(
    mesh: &Mesh,
    initial: Field,
    config: &RunConfig,
    observer: &mut impl StepObserver,
) -> Result<Trajectory, BlowUp> {
    let t_end = config.time.t_end();
    let mut snapshots = Vec::new();
    let mut stats = Vec::new();
    let initial = initial.with_time(0.0);
    snapshots.push((0, initial.clone()));

    let mut current = initial;
    let mut t = 0.0f64;
    let mut step_index = 0usize;
    let mut breakdowns: Vec<FluxBreakdown> = Vec::new();
    let mut next_values: Vec<f64> = Vec::new();

    while t < t_end {
        let (dt, cfl_bound) = choose_dt(&config.time, mesh, current.max_abs(), t_end - t);
        let grads = minmod_gradients(mesh, &current);
        compute_breakdowns(mesh, &current, &grads, dt, &config.scheme, &mut breakdowns);
        apply_update(mesh, &current, &breakdowns, dt, &mut next_values);
        if next_values.iter().any(|v| !v.is_finite()) {
            return Err(BlowUp {
                step: step_index,
                time: t,
                last: current,
            });
        }
        let t_new = if t + dt >= t_end { t_end } else { t + dt };
        let next = Field::from_raw(core::mem::take(&mut next_values), t_new);
        step_index += 1;

        observer.on_step(&StepContext {
            mesh,
            step_index,
            before: &current,
            after: &next,
            dt,
            breakdowns: &breakdowns,
            gradients: &grads,
        });

        stats.push(StepStats {
            step: step_index,
            t: t_new,
            dt,
            mass: next.mass(mesh),
            total_entropy: next.total_entropy(mesh),
            max_abs_u: next.max_abs(),
            cfl_bound,
        });

        next_values = Vec::new();
        let keep = config.snapshot_cadence != 0 && step_index % config.snapshot_cadence == 0;
        current = next;
        t = t_new;
        if keep && t < t_end {
            snapshots.push((step_index, current.clone()));
        }
    }

    if stats.is_empty() {
        // zero-length run: trajectory holds only the projected initial data
        return Ok(Trajectory { snapshots, stats });
    }
    snapshots.push((step_index, current));
    Ok(Trajectory { snapshots, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::SchemeVariant;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn controls(t_end: f64) -> TimeControls {
        TimeControls::new(t_end, 0.4, 1.5, 0.9).unwrap()
    }

    #[test]
    fn time_controls_validation() {
        assert!(TimeControls::new(1.0, 0.4, 1.5, 0.9).is_ok());
        assert!(TimeControls::new(-1.0, 0.4, 1.5, 0.9).is_err());
        assert!(TimeControls::new(1.0, 0.0, 1.5, 0.9).is_err());
        assert!(TimeControls::new(1.0, 0.4, 1.2, 0.9).is_err());
        assert!(TimeControls::new(1.0, 0.4, 1.5, 0.0).is_err());
        assert!(TimeControls::new(1.0, 0.4, 1.5, 1.1).is_err());
    }

    #[test]
    fn dt_formula_cases() {
        // refinement branch: h = 1/16, C2 = 0.1, p = 3/2, small max|u|
        let mesh = Mesh::new(1, 16).unwrap();
        let tc = TimeControls::new(10.0, 0.1, 1.5, 0.9).unwrap();
        let (dt, cfl_bound) = choose_dt(&tc, &mesh, 1e-6, 10.0);
        assert_abs_diff_eq!(dt, 0.1 * (1.0f64 / 16.0).powf(1.5), epsilon = 1e-18);
        assert!(!cfl_bound);

        // zero field: advective branch inactive
        let (dt0, _) = choose_dt(&tc, &mesh, 0.0, 10.0);
        assert_eq!(dt0, dt);

        // advective branch binds: cfl = 0.4, h = 1/32, d = 2, max|u| = 2
        let mesh = Mesh::new(2, 32).unwrap();
        let tc = TimeControls::new(10.0, 10.0, 1.5, 0.4).unwrap();
        let (dt, cfl_bound) = choose_dt(&tc, &mesh, 2.0, 10.0);
        assert_abs_diff_eq!(dt, 1.0 / 320.0, epsilon = 1e-18);
        assert!(cfl_bound);
    }

    #[test]
    fn final_step_lands_exactly() {
        let mesh = Mesh::new(1, 8).unwrap();
        let field = Field::project(&mesh, 0.0, |x| 0.25 + 0.1 * x[0]).unwrap();
        let config = RunConfig {
            scheme: SchemeParams::stabilized_default(),
            time: controls(0.037),
            snapshot_cadence: 0,
        };
        let traj = run(&mesh, field, &config, &mut ()).unwrap();
        assert_eq!(traj.final_field().time(), 0.037);
        assert_eq!(traj.stats.last().unwrap().t, 0.037);
    }

    #[test]
    fn zero_horizon_keeps_only_initial_data() {
        let mesh = Mesh::new(1, 8).unwrap();
        let field = Field::constant(&mesh, 1.0, 0.0);
        let config = RunConfig {
            scheme: SchemeParams::stabilized_default(),
            time: controls(0.0),
            snapshot_cadence: 0,
        };
        let traj = run(&mesh, field, &config, &mut ()).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.steps_taken(), 0);
    }

    #[test]
    fn constant_state_is_a_fixed_point() {
        let mesh = Mesh::new(2, 8).unwrap();
        let field = Field::constant(&mesh, 0.7, 0.0);
        let config = RunConfig {
            scheme: SchemeParams::stabilized_default(),
            time: controls(0.05),
            snapshot_cadence: 0,
        };
        let traj = run(&mesh, field, &config, &mut ()).unwrap();
        for &v in traj.final_field().values() {
            assert_abs_diff_eq!(v, 0.7, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_cell_step_by_hand() {
        // u = (0, 2), Δt/h = 0.1, C₁ = 1/24: wrap face is a shock with
        // stabilized flux 7/3, interior face is sonic with flux 0
        let mesh = Mesh::new(1, 2).unwrap();
        let field = Field::new(&mesh, vec![0.0, 2.0], 0.0).unwrap();
        let params = SchemeParams::stabilized_default();
        let dt = 0.1 * mesh.h();
        let (next, breakdowns) = step(&mesh, &field, &params, dt).unwrap();
        assert_eq!(breakdowns[0].case, crate::flux::CaseLabel::RareSonic);
        assert_eq!(breakdowns[1].case, crate::flux::CaseLabel::ShockMinus);
        assert_abs_diff_eq!(breakdowns[1].f_new, 7.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(next.value(0), 7.0 / 30.0, epsilon = 1e-14);
        assert_abs_diff_eq!(next.value(1), 2.0 - 7.0 / 30.0, epsilon = 1e-14);
        assert_abs_diff_eq!(next.mass(&mesh), field.mass(&mesh), epsilon = 1e-15);
    }

    #[test]
    fn variants_differ_exactly_on_negative_jumps() {
        let mesh = Mesh::new(1, 8).unwrap();
        let values = vec![0.0, 0.0, 1.0, 1.0, 2.0, 1.0, 1.0, 0.0];
        let field = Field::new(&mesh, values, 0.0).unwrap();
        let dt = 0.05 * mesh.h();
        let stab = SchemeParams::stabilized_default();
        let unstab = stab.with_variant(SchemeVariant::UnstabilizedGrp);
        let (a, bks) = step(&mesh, &field, &stab, dt).unwrap();
        let (b, _) = step(&mesh, &field, &unstab, dt).unwrap();
        for (face, bk) in mesh.faces().zip(&bks) {
            let jump = field.face_values(&mesh, face).jump;
            if jump >= 0.0 {
                assert_eq!(bk.stab_increment, 0.0);
            } else {
                assert!(bk.stab_increment > 0.0);
            }
        }
        let diff: f64 = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .sum();
        assert!(diff > 0.0);

        // with only nonnegative jumps the variants coincide bit for bit
        let flat = Field::constant(&mesh, 1.3, 0.0);
        let (a, _) = step(&mesh, &flat, &stab, dt).unwrap();
        let (b, _) = step(&mesh, &flat, &unstab, dt).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn conservation_and_determinism_over_a_run() {
        let mesh = Mesh::new(2, 16).unwrap();
        let initial = Field::project(&mesh, 0.0, |x| {
            0.25 + 0.1 * crate::math::sin(core::f64::consts::TAU * (x[0] + x[1]))
        })
        .unwrap();
        let config = RunConfig {
            scheme: SchemeParams::stabilized_default(),
            time: controls(0.1),
            snapshot_cadence: 7,
        };
        let a = run(&mesh, initial.clone(), &config, &mut ()).unwrap();
        let b = run(&mesh, initial, &config, &mut ()).unwrap();
        assert!(a.max_mass_drift(&mesh) <= 1e-12);
        // bit-identical trajectories
        assert_eq!(a.steps_taken(), b.steps_taken());
        assert_eq!(a.final_field().values(), b.final_field().values());
        for (sa, sb) in a.stats.iter().zip(&b.stats) {
            assert_eq!(sa.t.to_bits(), sb.t.to_bits());
            assert_eq!(sa.mass.to_bits(), sb.mass.to_bits());
        }
    }

    #[test]
    fn blow_up_reports_last_finite_state() {
        let mesh = Mesh::new(1, 4).unwrap();
        let field = Field::new(&mesh, vec![1e200, -1e200, 1e200, -1e200], 0.0).unwrap();
        // gigantic forced step: fluxes ~ 1e400 overflow
        let err = step(&mesh, &field, &SchemeParams::stabilized_default(), 1.0).unwrap_err();
        assert_eq!(err.last.values()[0], 1e200);
    }
}
