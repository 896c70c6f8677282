//! Adaptive time integration of vortex dynamics with dense output,
//! collapse-event detection and invariant monitoring.
//!
//! The stepper is the Dormand-Prince 5(4) embedded pair with the classic
//! proportional-integral step-size controller and the companion 4th-order
//! dense-output interpolant. A run terminates early, with a refined event
//! time, when the minimal pairwise distance crosses the configured collapse
//! radius.
//!
//! Close to a collapse the remaining time can shrink far below the floating
//! resolution of the clock (`T - t` of order `1e-30 T` is routine for steep
//! kernels), so the current time is accumulated in compensated `hi + lo`
//! form; recorded sample times stay plain `f64` and strictly increasing.

use crate::core::{min_pair_distance, velocity_field_into, InvariantSample, VortexState};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};

/// Right-hand side of a first-order vortex system.
///
/// Implementations are pure; the integrator may evaluate them at trial
/// positions far from any recorded sample.
pub trait Dynamics {
    /// Writes the velocity of every vortex into `out`.
    fn velocities(&self, positions: &[Vec2], intensities: &[f64], out: &mut [Vec2]) -> Result<()>;

    /// Kernel exponent used when sampling invariants along the run.
    fn alpha(&self) -> f64;
}

/// The planar interaction field with kernel exponent `alpha`.
#[derive(Clone, Copy, Debug)]
pub struct PlaneDynamics {
    alpha: f64,
}

impl PlaneDynamics {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::NegativeAlpha { alpha });
        }
        Ok(PlaneDynamics { alpha })
    }
}

impl Dynamics for PlaneDynamics {
    fn velocities(&self, positions: &[Vec2], intensities: &[f64], out: &mut [Vec2]) -> Result<()> {
        velocity_field_into(positions, intensities, self.alpha, out)
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Optional hard cap on the step size; `None` leaves the controller free.
    pub max_step: Option<f64>,
    /// Minimal pairwise distance at which a run is declared collapsed.
    pub collapse_radius: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_step: None,
            collapse_radius: 1e-8,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidOptions {
                what: "rel_tol must be positive",
            });
        }
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::InvalidOptions {
                what: "abs_tol must be positive",
            });
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::InvalidOptions {
                    what: "max_step must be positive",
                });
            }
        }
        if !(self.collapse_radius > 0.0) {
            return Err(Error::InvalidOptions {
                what: "collapse_radius must be positive",
            });
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidOptions {
                what: "max_steps must be positive",
            });
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    ReachedFinalTime,
    /// Min pairwise distance crossed the collapse radius at the given time.
    Collapsed(f64),
    StepLimit,
    /// Step size underflowed before the collapse radius was reached.
    SingularFailure,
}

impl Termination {
    pub fn collapse_time(&self) -> Option<f64> {
        match self {
            Termination::Collapsed(t) => Some(*t),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::ReachedFinalTime => "reached_final_time",
            Termination::Collapsed(_) => "collapsed",
            Termination::StepLimit => "step_limit",
            Termination::SingularFailure => "singular_failure",
        }
    }
}

/// Time-stamped trajectory with per-sample invariants.
///
/// `times` is strictly increasing and `times`, `states` and `invariants`
/// have equal lengths. Immutable once returned.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<VortexState>,
    pub invariants: Vec<InvariantSample>,
    pub termination: Termination,
    pub options: IntegratorOptions,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn collapse_time(&self) -> Option<f64> {
        self.termination.collapse_time()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("record has at least one sample")
    }

    pub fn final_state(&self) -> &VortexState {
        self.states.last().expect("record has at least one sample")
    }
}

// Dormand-Prince 5(4) tableau (the field is autonomous, so the stage times
// never appear explicitly).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller settings (order-5 pair): the accepted-step factor is
// clamped so h never shrinks below h/5 nor grows beyond 10h.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const STEP_EXPONENT: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.1;
const FAC_MAX: f64 = 5.0;
/// Absolute floor under which a step size counts as underflowed.
const STEP_FLOOR: f64 = 1e-300;

/// Current time kept as an unevaluated `hi + lo` sum so that steps far below
/// `epsilon * t` still advance the clock.
#[derive(Clone, Copy, Debug)]
struct CompensatedTime {
    hi: f64,
    lo: f64,
}

impl CompensatedTime {
    fn new(t: f64) -> Self {
        CompensatedTime { hi: t, lo: 0.0 }
    }

    fn add(self, h: f64) -> Self {
        // Neumaier two-sum of hi and (h + lo).
        let y = h + self.lo;
        let s = self.hi + y;
        let c = if self.hi.abs() >= y.abs() {
            (self.hi - s) + y
        } else {
            (y - s) + self.hi
        };
        CompensatedTime { hi: s, lo: c }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }

    fn remaining_until(self, t1: f64) -> f64 {
        (t1 - self.hi) - self.lo
    }
}

struct StageBuffers {
    k: [Vec<Vec2>; 7],
    trial: Vec<Vec2>,
    y_new: Vec<Vec2>,
}

impl StageBuffers {
    fn new(n: usize) -> Self {
        StageBuffers {
            k: std::array::from_fn(|_| vec![Vec2::default(); n]),
            trial: vec![Vec2::default(); n],
            y_new: vec![Vec2::default(); n],
        }
    }
}

/// Dense-output polynomial for one accepted step.
struct DenseOutput {
    t0: f64,
    cont: [Vec<Vec2>; 5],
}

impl DenseOutput {
    fn build(y0: &[Vec2], y1: &[Vec2], buffers: &StageBuffers, h: f64, t0: f64) -> Self {
        let n = y0.len();
        let mut cont: [Vec<Vec2>; 5] = std::array::from_fn(|_| vec![Vec2::default(); n]);
        for i in 0..n {
            let ydiff = y1[i] - y0[i];
            let bspl = h * buffers.k[0][i] - ydiff;
            cont[0][i] = y0[i];
            cont[1][i] = ydiff;
            cont[2][i] = bspl;
            cont[3][i] = ydiff - h * buffers.k[6][i] - bspl;
            cont[4][i] = h
                * (D1 * buffers.k[0][i]
                    + D3 * buffers.k[2][i]
                    + D4 * buffers.k[3][i]
                    + D5 * buffers.k[4][i]
                    + D6 * buffers.k[5][i]
                    + D7 * buffers.k[6][i]);
        }
        DenseOutput { t0, cont }
    }

    fn eval_into(&self, theta: f64, out: &mut Vec<Vec2>) {
        let s = theta;
        let s1 = 1.0 - theta;
        out.clear();
        for i in 0..self.cont[0].len() {
            out.push(
                self.cont[0][i]
                    + s * (self.cont[1][i]
                        + s1 * (self.cont[2][i] + s * (self.cont[3][i] + s1 * self.cont[4][i]))),
            );
        }
    }
}

struct Recorder<'a> {
    template: &'a VortexState,
    times: Vec<f64>,
    states: Vec<VortexState>,
    invariants: Vec<InvariantSample>,
}

impl<'a> Recorder<'a> {
    fn new(template: &'a VortexState) -> Self {
        Recorder {
            template,
            times: Vec::new(),
            states: Vec::new(),
            invariants: Vec::new(),
        }
    }

    /// Appends a sample, skipping it when the rounded time does not move
    /// forward (deep-collapse steps can be far below the clock resolution).
    fn push(&mut self, t: f64, positions: &[Vec2]) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Ok(());
            }
        }
        let state = self.template.with_positions(positions.to_vec());
        let invariants = InvariantSample::of(&state)?;
        self.times.push(t);
        self.states.push(state);
        self.invariants.push(invariants);
        Ok(())
    }

    /// Appends the collapse sample; if the event time has been absorbed by
    /// the last recorded time, the last sample is replaced instead so the
    /// record still ends at the collapse state.
    fn push_final(&mut self, t: f64, positions: &[Vec2]) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                let state = self.template.with_positions(positions.to_vec());
                let invariants = InvariantSample::of(&state)?;
                *self.states.last_mut().unwrap() = state;
                *self.invariants.last_mut().unwrap() = invariants;
                return Ok(());
            }
        }
        self.push(t, positions)
    }

    fn finish(self, termination: Termination, options: IntegratorOptions) -> TrajectoryRecord {
        TrajectoryRecord {
            times: self.times,
            states: self.states,
            invariants: self.invariants,
            termination,
            options,
        }
    }
}

/// Integrates `state` from `t0` to `t1` under `dynamics`.
///
/// Samples are recorded at every accepted controller step plus at every
/// requested time in `extra_samples` (evaluated on the dense interpolant).
/// The run terminates early with [`Termination::Collapsed`] as soon as the
/// minimal pairwise distance crosses `options.collapse_radius`; the event
/// time is refined by bisection on the dense output.
pub fn integrate(
    state: &VortexState,
    t0: f64,
    t1: f64,
    options: &IntegratorOptions,
    dynamics: &dyn Dynamics,
    extra_samples: &[f64],
) -> Result<TrajectoryRecord> {
    options.validate()?;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::EmptyInterval { t0, t1 });
    }

    let n = state.len();
    let intensities = state.intensities().to_vec();
    // Invariants are sampled with the field's kernel exponent.
    let template = if state.alpha() == dynamics.alpha() {
        state.clone()
    } else {
        VortexState::new(
            state.positions().to_vec(),
            intensities.clone(),
            dynamics.alpha(),
        )?
    };
    let mut queue: Vec<f64> = extra_samples
        .iter()
        .copied()
        .filter(|t| t.is_finite() && *t > t0 && *t <= t1)
        .collect();
    queue.sort_by(|a, b| a.partial_cmp(b).unwrap());
    queue.dedup();
    let mut queue_next = 0usize;

    let mut recorder = Recorder::new(&template);
    let mut y: Vec<Vec2> = state.positions().to_vec();
    recorder.push(t0, &y)?;

    if min_pair_distance(&y) <= options.collapse_radius {
        return Ok(recorder.finish(Termination::Collapsed(t0), *options));
    }

    let mut buffers = StageBuffers::new(n);
    let mut scratch = Vec::with_capacity(n);

    // Initial derivative; a singular starting configuration is a caller error.
    dynamics.velocities(&y, &intensities, &mut buffers.k[0])?;

    let max_step = options.max_step.unwrap_or(f64::INFINITY).min(t1 - t0);
    let mut h = initial_step(
        &y,
        &buffers.k[0],
        &intensities,
        dynamics,
        options,
        t1 - t0,
        max_step,
    );
    let mut t = CompensatedTime::new(t0);
    let mut facold = 1e-4_f64;
    let mut steps = 0usize;

    let termination = loop {
        if steps >= options.max_steps {
            break Termination::StepLimit;
        }
        steps += 1;

        let remaining = t.remaining_until(t1);
        if remaining <= 0.0 {
            break Termination::ReachedFinalTime;
        }
        let mut final_step = false;
        if h >= remaining {
            h = remaining;
            final_step = true;
        }

        match try_step(&y, &intensities, dynamics, &mut buffers, &mut scratch, h) {
            StepOutcome::FieldFailure => {
                h *= 0.25;
                if h < STEP_FLOOR {
                    break Termination::SingularFailure;
                }
                continue;
            }
            StepOutcome::Done => {
                let err = error_norm(&y, &buffers.y_new, &scratch, options);
                if !err.is_finite() {
                    h *= 0.25;
                    if h < STEP_FLOOR {
                        break Termination::SingularFailure;
                    }
                    continue;
                }
                let fac11 = err.powf(STEP_EXPONENT);
                if err > 1.0 {
                    // Rejected: shrink and retry.
                    h /= (fac11 / SAFETY).min(FAC_MAX);
                    if h < STEP_FLOOR {
                        break Termination::SingularFailure;
                    }
                    continue;
                }

                // Accepted.
                let t_new = t.add(h);
                let t_new_f64 = if final_step { t1 } else { t_new.value() };
                let dense = DenseOutput::build(&y, &buffers.y_new, &buffers, h, t.value());

                let dmin_new = min_pair_distance(&buffers.y_new);
                if dmin_new <= options.collapse_radius {
                    let theta = refine_crossing(&dense, options.collapse_radius, &mut scratch);
                    let t_collapse = t.add(theta * h).value();
                    while queue_next < queue.len() && queue[queue_next] <= t_collapse {
                        let ts = queue[queue_next];
                        let th = ((ts - dense.t0) / h).clamp(0.0, 1.0);
                        dense.eval_into(th, &mut scratch);
                        recorder.push(ts, &scratch)?;
                        queue_next += 1;
                    }
                    dense.eval_into(theta, &mut scratch);
                    recorder.push_final(t_collapse, &scratch)?;
                    break Termination::Collapsed(t_collapse);
                }

                while queue_next < queue.len() && queue[queue_next] < t_new_f64 {
                    let ts = queue[queue_next];
                    let th = ((ts - dense.t0) / h).clamp(0.0, 1.0);
                    dense.eval_into(th, &mut scratch);
                    recorder.push(ts, &scratch)?;
                    queue_next += 1;
                }
                recorder.push(t_new_f64, &buffers.y_new)?;
                if queue_next < queue.len() && queue[queue_next] <= t_new_f64 {
                    queue_next += 1; // covered by the step sample itself
                }

                std::mem::swap(&mut y, &mut buffers.y_new);
                let (k0, k6) = {
                    let [first, .., last] = &mut buffers.k;
                    (first, last)
                };
                std::mem::swap(k0, k6); // FSAL
                t = t_new;
                if final_step {
                    break Termination::ReachedFinalTime;
                }

                let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(FAC_MIN, FAC_MAX);
                facold = err.max(1e-4);
                h = (h / fac).min(max_step);
            }
        }
    };

    Ok(recorder.finish(termination, *options))
}

enum StepOutcome {
    /// A stage evaluation failed (singular or out-of-domain trial point).
    FieldFailure,
    Done,
}

fn try_step(
    y: &[Vec2],
    intensities: &[f64],
    dynamics: &dyn Dynamics,
    buffers: &mut StageBuffers,
    err_vec: &mut Vec<Vec2>,
    h: f64,
) -> StepOutcome {
    let n = y.len();
    macro_rules! stage {
        ($idx:expr, $($coef:expr => $k:expr),+) => {{
            for i in 0..n {
                let mut acc = Vec2::default();
                $(acc += $coef * buffers.k[$k][i];)+
                buffers.trial[i] = y[i] + h * acc;
            }
            if dynamics
                .velocities(&buffers.trial, intensities, &mut buffers.k[$idx])
                .is_err()
            {
                return StepOutcome::FieldFailure;
            }
        }};
    }

    stage!(1, A21 => 0);
    stage!(2, A31 => 0, A32 => 1);
    stage!(3, A41 => 0, A42 => 1, A43 => 2);
    stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
    stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);

    for i in 0..n {
        let acc = A71 * buffers.k[0][i]
            + A73 * buffers.k[2][i]
            + A74 * buffers.k[3][i]
            + A75 * buffers.k[4][i]
            + A76 * buffers.k[5][i];
        buffers.y_new[i] = y[i] + h * acc;
    }
    if dynamics
        .velocities(&buffers.y_new, intensities, &mut buffers.k[6])
        .is_err()
    {
        return StepOutcome::FieldFailure;
    }

    err_vec.clear();
    for i in 0..n {
        let e = E1 * buffers.k[0][i]
            + E3 * buffers.k[2][i]
            + E4 * buffers.k[3][i]
            + E5 * buffers.k[4][i]
            + E6 * buffers.k[5][i]
            + E7 * buffers.k[6][i];
        err_vec.push(h * e);
    }
    StepOutcome::Done
}

fn error_norm(y0: &[Vec2], y1: &[Vec2], err_vec: &[Vec2], options: &IntegratorOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..y0.len() {
        for (e, a, b) in [
            (err_vec[i].x, y0[i].x, y1[i].x),
            (err_vec[i].y, y0[i].y, y1[i].y),
        ] {
            let scale = options.abs_tol + options.rel_tol * a.abs().max(b.abs());
            let q = e / scale;
            acc += q * q;
        }
    }
    (acc / (2.0 * y0.len() as f64)).sqrt()
}

fn initial_step(
    y: &[Vec2],
    f0: &[Vec2],
    intensities: &[f64],
    dynamics: &dyn Dynamics,
    options: &IntegratorOptions,
    interval: f64,
    max_step: f64,
) -> f64 {
    let fallback = (1e-6 * interval).min(max_step);
    let n = y.len() as f64;
    let scaled_norm = |v: &[Vec2], reference: &[Vec2]| -> f64 {
        let mut acc = 0.0;
        for i in 0..v.len() {
            for (val, r) in [(v[i].x, reference[i].x), (v[i].y, reference[i].y)] {
                let scale = options.abs_tol + options.rel_tol * r.abs();
                acc += (val / scale) * (val / scale);
            }
        }
        (acc / (2.0 * n)).sqrt()
    };

    let d0 = scaled_norm(y, y);
    let d1 = scaled_norm(f0, y);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(max_step);

    let trial: Vec<Vec2> = y.iter().zip(f0).map(|(p, f)| *p + h0 * *f).collect();
    let mut f1 = vec![Vec2::default(); y.len()];
    if dynamics.velocities(&trial, intensities, &mut f1).is_err() {
        return fallback;
    }
    let diff: Vec<Vec2> = f1.iter().zip(f0).map(|(a, b)| *a - *b).collect();
    let d2 = scaled_norm(&diff, y) / h0;

    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    (100.0 * h0).min(h1).min(max_step)
}

/// Bisects the dense interpolant for the first crossing of the collapse
/// radius inside an accepted step; returns the crossing parameter in [0, 1],
/// rounded to the side where the distance is at or below the radius.
fn refine_crossing(dense: &DenseOutput, radius: f64, scratch: &mut Vec<Vec2>) -> f64 {
    let mut lo = 0.0_f64; // distance above radius
    let mut hi = 1.0_f64; // distance at or below radius
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        dense.eval_into(mid, scratch);
        if min_pair_distance(scratch) <= radius {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Re-derives the collapse time from the recorded min-distance samples by
/// bisection on their piecewise-linear interpolation.
///
/// This is a record-level check of the event time the integrator refined on
/// its dense output; the two agree to sampling resolution.
pub fn refine_collapse_time(record: &TrajectoryRecord) -> Result<f64> {
    if record.collapse_time().is_none() {
        return Err(Error::NoCollapse);
    }
    let radius = record.options.collapse_radius;
    let dmin: Vec<f64> = record
        .invariants
        .iter()
        .map(|s| s.min_pair_distance)
        .collect();
    let Some(k) = dmin.iter().position(|d| *d <= radius) else {
        return Err(Error::NoCollapse);
    };
    if k == 0 {
        return Ok(record.times[0]);
    }
    let (t_lo, d_lo) = (record.times[k - 1], dmin[k - 1]);
    let (t_hi, d_hi) = (record.times[k], dmin[k]);
    let line = |t: f64| d_lo + (d_hi - d_lo) * (t - t_lo) / (t_hi - t_lo);
    let (mut lo, mut hi) = (t_lo, t_hi);
    while hi - lo > 1e-12 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if line(mid) <= radius {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
