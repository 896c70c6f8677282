//! Scenario files and run artifacts: the library side of the command-line
//! front end.
//!
//! A scenario is a schema-versioned JSON document selecting a field (plane
//! or disc), an initial configuration (explicit, self-similar, or seeded
//! random), a horizon, integrator options and the analyses to run. Executing
//! it produces a trajectory CSV (`t, x1, y1, ..., xN, yN, H, Mx, My, I, L,
//! dmin`, 17 significant digits) and a summary JSON. Outputs are
//! deterministic: the same scenario on the same build writes byte-identical
//! files, and nothing is written unless the whole run succeeded.

use crate::analysis::{
    check_prevent_collapse, holder_fit, prevent_collapse_constant, relative_holder_fit,
    Counterexample, Verdict,
};
use crate::cluster::collision_clusters_default;
use crate::core::{
    degeneracy_params, intensity_weighted_moment, momentum, seeded_random_state, vorticity_vector,
    VortexState,
};
use crate::disc::{near_boundary, DiscDynamics, DiscState};
use crate::error::Error;
use crate::geom::Vec2;
use crate::integrate::{
    integrate, refine_collapse_time, Dynamics, IntegratorOptions, PlaneDynamics, Termination,
    TrajectoryRecord,
};
use crate::selfsimilar::{build_collapse, construction_residuals, SelfSimilarSolution};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::path::Path;

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// Planar dynamics with kernel exponent `alpha`.
    Plane { alpha: f64 },
    /// Euler dynamics in the open unit disc.
    Disc,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Positions and intensities given literally.
    Explicit {
        positions: Vec<Vec2>,
        intensities: Vec<f64>,
    },
    /// Self-similar collapse construction for the given exponent,
    /// optionally scaled down (useful to embed the configuration in the
    /// disc).
    SelfSimilar {
        alpha: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Well-separated seeded random configuration.
    Random { count: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisRequest {
    pub holder: bool,
    pub clusters: bool,
    pub invariants: bool,
    pub prevent_collapse: bool,
}

fn default_samples() -> usize {
    2000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub field: FieldSpec,
    pub initial: InitialSpec,
    /// Integration horizon; optional when the collapse time is predictable
    /// (self-similar initial data).
    #[serde(default)]
    pub t_final: Option<f64>,
    /// Declares that the scenario is expected to collapse; the horizon then
    /// defaults to 1.5 times the predicted collapse time.
    #[serde(default)]
    pub run_to_collapse: bool,
    /// Explicit integrator options; when absent, defaults are chosen for
    /// the initial data (self-similar runs get the raised collapse radius
    /// of `SelfSimilarSolution::collapse_run_options`).
    #[serde(default)]
    pub integrator: Option<IntegratorOptions>,
    /// Count of uniform dense-output samples on top of controller steps.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub analysis: AnalysisRequest,
}

/// A failed run, tagged with the process exit code the CLI maps it to.
#[derive(Debug, Clone)]
pub enum RunFailure {
    /// Unreadable, unparsable or invalid scenario (exit 2).
    Schema(String),
    /// The integration did not complete (exit 3), or artifacts could not be
    /// written.
    Integration(String),
    /// A requested analysis was not applicable to the run (exit 4).
    Analysis(String),
}

impl RunFailure {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunFailure::Schema(_) => 2,
            RunFailure::Integration(_) => 3,
            RunFailure::Analysis(_) => 4,
        }
    }
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            RunFailure::Schema(m) => write!(f, "scenario error: {m}"),
            RunFailure::Integration(m) => write!(f, "integration error: {m}"),
            RunFailure::Analysis(m) => write!(f, "analysis error: {m}"),
        }
    }
}

impl std::error::Error for RunFailure {}

/// Command-line overrides applied on top of a scenario file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    /// Replaces `rel_tol` (and sets `abs_tol = rel_tol / 100`).
    pub rel_tol: Option<f64>,
    pub collapse_radius: Option<f64>,
    /// Replaces the seed of a random initial configuration.
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Scenario, RunFailure> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunFailure::Schema(format!("cannot read {}: {e}", path.display())))?;
        Scenario::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Scenario, RunFailure> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| RunFailure::Schema(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), RunFailure> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(RunFailure::Schema(format!(
                "unsupported schema_version {} (expected {SCENARIO_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if let FieldSpec::Plane { alpha } = self.field {
            if !alpha.is_finite() || alpha < 0.0 {
                return Err(RunFailure::Schema(format!("invalid alpha {alpha}")));
            }
        }
        match &self.initial {
            InitialSpec::SelfSimilar { alpha, scale } => {
                if !(*alpha > 0.0) {
                    return Err(RunFailure::Schema(
                        "self-similar construction needs alpha > 0".into(),
                    ));
                }
                if !(*scale > 0.0) {
                    return Err(RunFailure::Schema("scale must be positive".into()));
                }
                match self.field {
                    FieldSpec::Plane { alpha: field_alpha } if field_alpha != *alpha => {
                        return Err(RunFailure::Schema(format!(
                            "field alpha {field_alpha} differs from self-similar alpha {alpha}"
                        )));
                    }
                    FieldSpec::Disc if *alpha != 1.0 => {
                        return Err(RunFailure::Schema(
                            "the disc field is the Euler case: self-similar alpha must be 1".into(),
                        ));
                    }
                    _ => {}
                }
            }
            InitialSpec::Random { count, .. } => {
                if *count == 0 {
                    return Err(RunFailure::Schema("random count must be positive".into()));
                }
            }
            InitialSpec::Explicit {
                positions,
                intensities,
            } => {
                if positions.len() != intensities.len() {
                    return Err(RunFailure::Schema(format!(
                        "{} positions vs {} intensities",
                        positions.len(),
                        intensities.len()
                    )));
                }
            }
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0) {
                return Err(RunFailure::Schema(format!("t_final = {t} must be > 0")));
            }
        }
        if self.t_final.is_none()
            && !self.run_to_collapse
            && !matches!(self.initial, InitialSpec::SelfSimilar { .. })
        {
            return Err(RunFailure::Schema(
                "either t_final or run_to_collapse is required".into(),
            ));
        }
        if let Some(options) = &self.integrator {
            options
                .validate()
                .map_err(|e| RunFailure::Schema(e.to_string()))?;
        }
        Ok(())
    }

    /// Integrator options actually used: the explicit block when present,
    /// otherwise defaults suited to the initial data.
    pub fn effective_options(&self) -> IntegratorOptions {
        match (&self.integrator, &self.initial) {
            (Some(options), _) => *options,
            (None, InitialSpec::SelfSimilar { alpha, scale }) => IntegratorOptions {
                collapse_radius: crate::selfsimilar::default_collapse_radius(*alpha)
                    .unwrap_or(1e-4)
                    * scale,
                ..Default::default()
            },
            (None, _) => IntegratorOptions::default(),
        }
    }

    fn with_overrides(&self, overrides: &Overrides) -> Scenario {
        let mut scenario = self.clone();
        if overrides.rel_tol.is_some() || overrides.collapse_radius.is_some() {
            let mut options = scenario.effective_options();
            if let Some(tol) = overrides.rel_tol {
                options.rel_tol = tol;
                options.abs_tol = tol / 100.0;
            }
            if let Some(radius) = overrides.collapse_radius {
                options.collapse_radius = radius;
            }
            scenario.integrator = Some(options);
        }
        if let Some(seed) = overrides.seed {
            if let InitialSpec::Random { count, .. } = scenario.initial {
                scenario.initial = InitialSpec::Random { count, seed };
            }
        }
        scenario
    }
}

// ---------------------------------------------------------------------------
// summary structures (serialization order is the file order)

#[derive(Clone, Debug, Serialize)]
pub struct DriftSummary {
    pub hamiltonian: f64,
    pub vorticity_x: f64,
    pub vorticity_y: f64,
    pub momentum: f64,
    pub pair_moment: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfSimilarSummary {
    pub lambda: f64,
    pub intensity: f64,
    pub contraction_rate: f64,
    pub rotation_rate: f64,
    pub predicted_collapse_time: f64,
    pub side_ratio_residual: f64,
    pub pair_moment_residual: f64,
    pub inverse_alpha_residual: f64,
    pub one_minus_alpha_residual: f64,
    /// Which of the two candidate scale-invariance conditions vanishes on
    /// the constructed data.
    pub vanishing_condition: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderSummary {
    pub subject: String,
    pub exponent: f64,
    pub expected: f64,
    pub fit_residual: f64,
    pub samples_used: usize,
    pub limit_point: Option<Vec2>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClustersSummary {
    pub parts: Vec<Vec<usize>>,
    pub threshold: f64,
    /// Minimal inter-cluster distance over the record; absent when all
    /// vortices collapse together.
    pub separation_floor: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PreventCollapseSummary {
    pub kappa: f64,
    pub r: f64,
    pub s: f64,
    pub c_kappa: f64,
    pub c0: f64,
    pub c1: f64,
    pub eta: f64,
    pub verdict: String,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantIdentitySummary {
    /// Max over samples of the scaled deviation of
    /// `L - (2 (sum a) I - 2 |M|^2)`.
    pub max_scaled_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub field: String,
    pub alpha: f64,
    pub vortex_count: usize,
    pub termination: String,
    pub t_c: Option<f64>,
    pub refined_collapse_time: Option<f64>,
    pub predicted_collapse_time: Option<f64>,
    pub sample_count: usize,
    pub drift: DriftSummary,
    pub invariant_identity: Option<InvariantIdentitySummary>,
    pub self_similar: Option<SelfSimilarSummary>,
    pub holder: Option<Vec<HolderSummary>>,
    pub clusters: Option<ClustersSummary>,
    pub prevent_collapse: Option<PreventCollapseSummary>,
    pub boundary_proximity_samples: Option<usize>,
}

/// Everything a finished run produced, before any file is written.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub record: TrajectoryRecord,
    pub summary: Summary,
}

// ---------------------------------------------------------------------------
// execution

struct Prepared {
    state: VortexState,
    dynamics: Box<dyn Dynamics>,
    alpha: f64,
    field_label: String,
    predicted_collapse_time: Option<f64>,
    self_similar: Option<(SelfSimilarSolution, f64)>,
    is_disc: bool,
}

fn prepare(scenario: &Scenario) -> Result<Prepared, RunFailure> {
    let (is_disc, field_alpha) = match scenario.field {
        FieldSpec::Plane { alpha } => (false, alpha),
        FieldSpec::Disc => (true, 1.0),
    };

    let mut predicted = None;
    let mut self_similar = None;
    let state = match &scenario.initial {
        InitialSpec::Explicit {
            positions,
            intensities,
        } => VortexState::new(positions.clone(), intensities.clone(), field_alpha)
            .map_err(|e| RunFailure::Schema(e.to_string()))?,
        InitialSpec::Random { count, seed } => {
            let state = seeded_random_state(*seed, *count, field_alpha)
                .map_err(|e| RunFailure::Schema(e.to_string()))?;
            if is_disc {
                // Shrink the sampling box into the disc.
                let positions: Vec<Vec2> = state.positions().iter().map(|p| *p / 3.0).collect();
                VortexState::new(positions, state.intensities().to_vec(), field_alpha)
                    .map_err(|e| RunFailure::Schema(e.to_string()))?
            } else {
                state
            }
        }
        InitialSpec::SelfSimilar { alpha, scale } => {
            let solution = build_collapse(*alpha).map_err(|e| RunFailure::Schema(e.to_string()))?;
            let positions: Vec<Vec2> = solution
                .initial_state
                .positions()
                .iter()
                .map(|p| *p * *scale)
                .collect();
            // Collapse time of the scaled configuration: positions scale by
            // mu, velocities by mu^{-alpha}, time by mu^{alpha+1}; the disc
            // field carries the extra Euler normalization 1/(2 pi).
            let t_scaled = solution.collapse_time * scale.powf(alpha + 1.0);
            predicted = Some(if is_disc {
                2.0 * std::f64::consts::PI * t_scaled
            } else {
                t_scaled
            });
            self_similar = Some((solution.clone(), *scale));
            let state = VortexState::new(
                positions,
                solution.initial_state.intensities().to_vec(),
                field_alpha,
            )
            .map_err(|e| RunFailure::Schema(e.to_string()))?;
            state
        }
    };

    if is_disc {
        DiscState::new(state.positions().to_vec(), state.intensities().to_vec())
            .map_err(|e| RunFailure::Schema(e.to_string()))?;
    }

    let dynamics: Box<dyn Dynamics> = if is_disc {
        Box::new(DiscDynamics)
    } else {
        Box::new(PlaneDynamics::new(field_alpha).map_err(|e| RunFailure::Schema(e.to_string()))?)
    };
    let field_label = if is_disc {
        "disc".to_string()
    } else {
        format!("plane(alpha={field_alpha})")
    };

    Ok(Prepared {
        state,
        dynamics,
        alpha: field_alpha,
        field_label,
        predicted_collapse_time: predicted,
        self_similar,
        is_disc,
    })
}

fn sample_times(t0: f64, t1: f64, uniform: usize, predicted: Option<f64>) -> Vec<f64> {
    let mut times = Vec::with_capacity(uniform + 256);
    for k in 1..=uniform {
        times.push(t0 + (t1 - t0) * k as f64 / uniform as f64);
    }
    // Log-spaced tail inside the final decade before a predicted collapse,
    // so Hölder fits see well-distributed log-spacing even at coarse
    // uniform sampling.
    if let Some(t_c) = predicted {
        if t_c > t0 && t_c <= t1 {
            let span = t_c - t0;
            for k in 0..=200 {
                let frac = 10f64.powf(-1.0 - 6.0 * k as f64 / 200.0);
                times.push(t_c - span * frac);
            }
        }
    }
    times
}

fn scaled_drift(series: impl Iterator<Item = f64>, reference: f64, scale: f64) -> f64 {
    let denom = reference.abs().max(scale).max(f64::MIN_POSITIVE);
    series.fold(0.0, |acc: f64, v| acc.max((v - reference).abs() / denom))
}

/// Runs a prepared scenario entirely in memory.
pub fn execute(scenario: &Scenario) -> Result<RunOutput, RunFailure> {
    scenario.validate()?;
    let prepared = prepare(scenario)?;
    let t0 = 0.0;
    // Horizon: explicit t_final, else 1.5 times the predicted collapse
    // time, else (run_to_collapse without a prediction) a default cap of
    // 100 time units; the run still ends early at the collapse event.
    let t1 = match (scenario.t_final, prepared.predicted_collapse_time) {
        (Some(t), _) => t,
        (None, Some(t_c)) => 1.5 * t_c,
        (None, None) if scenario.run_to_collapse => 100.0,
        (None, None) => {
            return Err(RunFailure::Schema(
                "no t_final and no predictable collapse time".into(),
            ))
        }
    };
    let extra = sample_times(t0, t1, scenario.samples, prepared.predicted_collapse_time);

    let options = scenario.effective_options();
    let record = integrate(
        &prepared.state,
        t0,
        t1,
        &options,
        prepared.dynamics.as_ref(),
        &extra,
    )
    .map_err(|e| RunFailure::Integration(e.to_string()))?;

    match record.termination {
        Termination::SingularFailure => {
            return Err(RunFailure::Integration(
                "step size underflow before the collapse radius was reached".into(),
            ))
        }
        Termination::StepLimit => {
            return Err(RunFailure::Integration("step limit exceeded".into()))
        }
        _ => {}
    }

    let summary = summarize(scenario, &prepared, &record)?;
    Ok(RunOutput { record, summary })
}

fn summarize(
    scenario: &Scenario,
    prepared: &Prepared,
    record: &TrajectoryRecord,
) -> Result<Summary, RunFailure> {
    let first = &record.invariants[0];
    let state0 = &record.states[0];
    // Scale for the Hamiltonian drift: sum of absolute kernel terms.
    let h_scale = {
        let mut scale = 0.0;
        let kernel = crate::core::KernelProfile::new(prepared.alpha)
            .map_err(|e| RunFailure::Schema(e.to_string()))?;
        let p = state0.positions();
        let a = state0.intensities();
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                if let Ok(v) = kernel.value(p[i].distance(p[j])) {
                    scale += (a[i] * a[j] * v).abs();
                }
            }
        }
        scale
    };
    let m_scale: f64 = state0
        .intensities()
        .iter()
        .zip(state0.positions())
        .map(|(a, x)| (a.abs() * x.norm()).max(a.abs()))
        .sum();
    let i_scale: f64 = state0
        .intensities()
        .iter()
        .zip(state0.positions())
        .map(|(a, x)| a.abs() * x.norm_sq())
        .sum();
    let (_, l_scale) = intensity_weighted_moment(state0, 2.0);

    let drift = DriftSummary {
        hamiltonian: scaled_drift(
            record.invariants.iter().map(|s| s.hamiltonian),
            first.hamiltonian,
            h_scale,
        ),
        vorticity_x: scaled_drift(
            record.invariants.iter().map(|s| s.vorticity_vector.x),
            first.vorticity_vector.x,
            m_scale,
        ),
        vorticity_y: scaled_drift(
            record.invariants.iter().map(|s| s.vorticity_vector.y),
            first.vorticity_vector.y,
            m_scale,
        ),
        momentum: scaled_drift(
            record.invariants.iter().map(|s| s.momentum),
            first.momentum,
            i_scale,
        ),
        pair_moment: scaled_drift(
            record.invariants.iter().map(|s| s.pair_moment),
            first.pair_moment,
            l_scale,
        ),
    };

    let invariant_identity = scenario.analysis.invariants.then(|| {
        let mut worst = 0.0_f64;
        for (state, sample) in record.states.iter().zip(&record.invariants) {
            let total: f64 = state.intensities().iter().sum();
            let closed = 2.0 * total * momentum(state) - 2.0 * vorticity_vector(state).norm_sq();
            let (l, scale) = intensity_weighted_moment(state, 2.0);
            let denom = scale.max(closed.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((l - closed).abs() / denom);
            let _ = sample;
        }
        InvariantIdentitySummary {
            max_scaled_error: worst,
        }
    });

    let self_similar = match &prepared.self_similar {
        Some((solution, _scale)) => {
            let residuals =
                construction_residuals(solution).map_err(|e| RunFailure::Schema(e.to_string()))?;
            let vanishing = match (
                residuals.inverse_alpha_scaled <= 1e-10,
                residuals.one_minus_alpha_scaled <= 1e-10,
            ) {
                (true, true) => "both",
                (true, false) => "inverse_alpha",
                (false, true) => "one_minus_alpha",
                (false, false) => "neither",
            };
            Some(SelfSimilarSummary {
                lambda: solution.lambda,
                intensity: solution.intensity,
                contraction_rate: solution.contraction_rate,
                rotation_rate: solution.rotation_rate,
                predicted_collapse_time: prepared
                    .predicted_collapse_time
                    .expect("self-similar runs have a prediction"),
                side_ratio_residual: residuals.side_ratio,
                pair_moment_residual: residuals.pair_moment_scaled,
                inverse_alpha_residual: residuals.inverse_alpha_scaled,
                one_minus_alpha_residual: residuals.one_minus_alpha_scaled,
                vanishing_condition: vanishing.to_string(),
            })
        }
        None => None,
    };

    let t_c = record.collapse_time();
    let refined = t_c.and_then(|_| refine_collapse_time(record).ok());

    let holder = if scenario.analysis.holder {
        let t_collapse = t_c.ok_or_else(|| {
            RunFailure::Analysis("Hölder fit requested but the run did not collapse".into())
        })?;
        let n = record.states[0].len();
        let expected = 1.0 / (prepared.alpha + 1.0);
        let mut fits = Vec::new();
        for index in 0..n {
            let fit = holder_fit(record, t_collapse, index)
                .map_err(|e| RunFailure::Analysis(e.to_string()))?;
            fits.push(HolderSummary {
                subject: format!("vortex_{index}"),
                exponent: fit.exponent,
                expected,
                fit_residual: fit.fit_residual,
                samples_used: fit.samples_used,
                limit_point: fit.limit_point,
            });
        }
        if n <= 6 {
            for i in 0..n {
                for j in (i + 1)..n {
                    if let Ok(fit) = relative_holder_fit(record, t_collapse, (i, j)) {
                        fits.push(HolderSummary {
                            subject: format!("pair_{i}_{j}"),
                            exponent: fit.exponent,
                            expected,
                            fit_residual: fit.fit_residual,
                            samples_used: fit.samples_used,
                            limit_point: None,
                        });
                    }
                }
            }
        }
        Some(fits)
    } else {
        None
    };

    let clusters = if scenario.analysis.clusters {
        let clusters = collision_clusters_default(record).map_err(|e| match e {
            Error::NoCollapse => RunFailure::Analysis(
                "cluster analysis requested but the run did not collapse".into(),
            ),
            other => RunFailure::Analysis(other.to_string()),
        })?;
        Some(ClustersSummary {
            parts: clusters.parts,
            threshold: clusters.threshold,
            separation_floor: clusters
                .separation_floor
                .is_finite()
                .then_some(clusters.separation_floor),
        })
    } else {
        None
    };

    let prevent_collapse = if scenario.analysis.prevent_collapse {
        if prepared.is_disc {
            return Err(RunFailure::Analysis(
                "the prevent-collapse constants are computed for the planar field only".into(),
            ));
        }
        let intensities = record.states[0].intensities();
        let params =
            degeneracy_params(intensities).map_err(|e| RunFailure::Analysis(e.to_string()))?;
        let c0 = params.intensity_abs_sum * intensities.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
            / params.min_subcluster_sum.max(f64::MIN_POSITIVE);
        let bound = prevent_collapse_constant(intensities, prepared.alpha, c0, 0.0)
            .map_err(|e| RunFailure::Analysis(e.to_string()))?;
        let eta = (0.5 * record.states[0].min_pair_distance()).min(1.0);
        let verdict = check_prevent_collapse(record, &bound, eta)
            .map_err(|e| RunFailure::Analysis(e.to_string()))?;
        let (label, counterexample) = match verdict {
            Verdict::Pass => ("pass", None),
            Verdict::Fail(ce) => ("fail", Some(ce)),
        };
        Some(PreventCollapseSummary {
            kappa: bound.kappa,
            r: bound.r,
            s: bound.s,
            c_kappa: bound.c_kappa,
            c0: bound.c0,
            c1: bound.c1,
            eta,
            verdict: label.to_string(),
            counterexample,
        })
    } else {
        None
    };

    let boundary_proximity_samples = prepared.is_disc.then(|| {
        record
            .states
            .iter()
            .filter(|s| !near_boundary(s.positions()).is_empty())
            .count()
    });

    Ok(Summary {
        schema_version: SCENARIO_SCHEMA_VERSION,
        field: prepared.field_label.clone(),
        alpha: prepared.alpha,
        vortex_count: record.states[0].len(),
        termination: record.termination.label().to_string(),
        t_c,
        refined_collapse_time: refined,
        predicted_collapse_time: prepared.predicted_collapse_time,
        sample_count: record.len(),
        drift,
        invariant_identity,
        self_similar,
        holder,
        clusters,
        prevent_collapse,
        boundary_proximity_samples,
    })
}

// ---------------------------------------------------------------------------
// artifacts

fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders the fixed-column trajectory CSV.
pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let n = record.states[0].len();
    let mut out = String::new();
    out.push('t');
    for i in 1..=n {
        out.push_str(&format!(",x{i},y{i}"));
    }
    out.push_str(",H,Mx,My,I,L,dmin\n");
    for ((t, state), inv) in record
        .times
        .iter()
        .zip(&record.states)
        .zip(&record.invariants)
    {
        out.push_str(&format_float(*t));
        for p in state.positions() {
            out.push(',');
            out.push_str(&format_float(p.x));
            out.push(',');
            out.push_str(&format_float(p.y));
        }
        for v in [
            inv.hamiltonian,
            inv.vorticity_vector.x,
            inv.vorticity_vector.y,
            inv.momentum,
            inv.pair_moment,
            inv.min_pair_distance,
        ] {
            out.push(',');
            out.push_str(&format_float(v));
        }
        out.push('\n');
    }
    out
}

pub fn summary_json(summary: &Summary) -> String {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    text
}

/// Writes `trajectory.csv` and `summary.json` into `out_dir` (created if
/// missing). Nothing is written on failure.
pub fn write_artifacts(output: &RunOutput, out_dir: &Path) -> Result<(), RunFailure> {
    let csv = trajectory_csv(&output.record);
    let json = summary_json(&output.summary);
    fs::create_dir_all(out_dir).map_err(|e| {
        RunFailure::Integration(format!("cannot create {}: {e}", out_dir.display()))
    })?;
    fs::write(out_dir.join("trajectory.csv"), csv)
        .map_err(|e| RunFailure::Integration(format!("cannot write trajectory.csv: {e}")))?;
    fs::write(out_dir.join("summary.json"), json)
        .map_err(|e| RunFailure::Integration(format!("cannot write summary.json: {e}")))?;
    Ok(())
}

/// Full `run` operation: load, execute, write artifacts.
pub fn run_scenario_file(
    path: &Path,
    out_dir: &Path,
    overrides: &Overrides,
) -> Result<RunOutput, RunFailure> {
    let scenario = Scenario::from_path(path)?.with_overrides(overrides);
    let output = execute(&scenario)?;
    write_artifacts(&output, out_dir)?;
    Ok(output)
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub alpha: f64,
    pub status: String,
    pub t_c: Option<f64>,
    pub predicted_collapse_time: Option<f64>,
    /// Mean fitted exponent over the vortex fits of the run.
    pub exponent: Option<f64>,
    pub expected_exponent: Option<f64>,
    pub relative_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub rows: Vec<SweepRow>,
}

fn specialize(template: &Scenario, alpha: f64) -> Result<Scenario, RunFailure> {
    let mut scenario = template.clone();
    match scenario.field {
        FieldSpec::Plane { .. } => scenario.field = FieldSpec::Plane { alpha },
        FieldSpec::Disc => {
            return Err(RunFailure::Schema(
                "sweep requires a plane-field template".into(),
            ))
        }
    }
    if let InitialSpec::SelfSimilar { scale, .. } = scenario.initial {
        scenario.initial = InitialSpec::SelfSimilar { alpha, scale };
    }
    scenario.validate()?;
    Ok(scenario)
}

/// Runs the template once per exponent (rows execute concurrently, outputs
/// key on the row index) and aggregates fitted exponents against
/// `1/(alpha+1)`.
pub fn sweep(
    alphas: &[f64],
    template: &Scenario,
    out_dir: &Path,
    overrides: &Overrides,
) -> Result<(SweepSummary, bool), RunFailure> {
    if alphas.is_empty() {
        return Err(RunFailure::Schema("empty alpha list".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| {
        RunFailure::Integration(format!("cannot create {}: {e}", out_dir.display()))
    })?;

    let mut rows: Vec<Option<SweepRow>> = vec![None; alphas.len()];
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (index, &alpha) in alphas.iter().enumerate() {
            let out_dir = out_dir.to_path_buf();
            let overrides = *overrides;
            handles.push((
                index,
                scope.spawn(move || -> SweepRow {
                    let run_dir = out_dir.join(format!("run_{index:03}_alpha_{alpha}"));
                    let result = specialize(template, alpha)
                        .map(|s| s.with_overrides(&overrides))
                        .and_then(|scenario| {
                            let output = execute(&scenario)?;
                            write_artifacts(&output, &run_dir)?;
                            Ok(output)
                        });
                    match result {
                        Ok(output) => {
                            let expected = 1.0 / (alpha + 1.0);
                            let exponent = output.summary.holder.as_ref().map(|fits| {
                                let vortex_fits: Vec<f64> = fits
                                    .iter()
                                    .filter(|f| f.subject.starts_with("vortex"))
                                    .map(|f| f.exponent)
                                    .collect();
                                vortex_fits.iter().sum::<f64>() / vortex_fits.len() as f64
                            });
                            SweepRow {
                                index,
                                alpha,
                                status: "ok".into(),
                                t_c: output.summary.t_c,
                                predicted_collapse_time: output.summary.predicted_collapse_time,
                                exponent,
                                expected_exponent: Some(expected),
                                relative_error: exponent.map(|e| (e - expected).abs() / expected),
                            }
                        }
                        Err(failure) => SweepRow {
                            index,
                            alpha,
                            status: failure.to_string(),
                            t_c: None,
                            predicted_collapse_time: None,
                            exponent: None,
                            expected_exponent: Some(1.0 / (alpha + 1.0)),
                            relative_error: None,
                        },
                    }
                }),
            ));
        }
        for (index, handle) in handles {
            rows[index] = Some(handle.join().expect("sweep row thread panicked"));
        }
    });

    let rows: Vec<SweepRow> = rows.into_iter().map(Option::unwrap).collect();
    let any_failed = rows.iter().any(|r| r.status != "ok");

    let mut table =
        String::from("alpha,exponent,expected,relative_error,t_c,predicted_t_c,status\n");
    for row in &rows {
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        table.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_float(row.alpha),
            opt(row.exponent),
            opt(row.expected_exponent),
            opt(row.relative_error),
            opt(row.t_c),
            opt(row.predicted_collapse_time),
            row.status
        ));
    }
    let summary = SweepSummary {
        schema_version: SCENARIO_SCHEMA_VERSION,
        rows,
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("sweep summary serializes");
    json.push('\n');
    fs::write(out_dir.join("sweep.csv"), table)
        .map_err(|e| RunFailure::Integration(format!("cannot write sweep.csv: {e}")))?;
    fs::write(out_dir.join("sweep_summary.json"), json)
        .map_err(|e| RunFailure::Integration(format!("cannot write sweep_summary.json: {e}")))?;
    Ok((summary, any_failed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn translating_pair_json() -> String {
        r#"{
            "schema_version": 1,
            "field": {"type": "plane", "alpha": 1.0},
            "initial": {"type": "explicit",
                        "positions": [[0.0, 0.0], [1.0, 0.0]],
                        "intensities": [1.0, -1.0]},
            "t_final": 1.0,
            "samples": 50,
            "analysis": {"invariants": true}
        }"#
        .to_string()
    }

    #[test]
    fn scenario_round_trips_losslessly() {
        let scenario = Scenario::from_json(&translating_pair_json()).unwrap();
        let text = serde_json::to_string(&scenario).unwrap();
        let back = Scenario::from_json(&text).unwrap();
        let again = serde_json::to_string(&back).unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = translating_pair_json().replace("\"t_final\"", "\"t_fnial\"");
        match Scenario::from_json(&bad) {
            Err(RunFailure::Schema(_)) => {}
            other => panic!("expected schema failure, got {other:?}"),
        }
    }

    #[test]
    fn schema_version_enforced() {
        let bad = translating_pair_json().replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(matches!(
            Scenario::from_json(&bad),
            Err(RunFailure::Schema(_))
        ));
    }

    #[test]
    fn translating_pair_run_summary() {
        let scenario = Scenario::from_json(&translating_pair_json()).unwrap();
        let output = execute(&scenario).unwrap();
        assert_eq!(output.summary.termination, "reached_final_time");
        assert!(output.summary.t_c.is_none());
        assert!(output.summary.drift.hamiltonian <= 1e-9);
        assert!(output.summary.drift.momentum <= 1e-9);
        assert!(output.summary.invariant_identity.unwrap().max_scaled_error <= 1e-12);
    }

    #[test]
    fn self_similar_scenario_end_to_end() {
        let scenario = Scenario::from_json(
            r#"{
                "schema_version": 1,
                "field": {"type": "plane", "alpha": 1.0},
                "initial": {"type": "self_similar", "alpha": 1.0},
                "run_to_collapse": true,
                "samples": 200,
                "analysis": {"holder": true, "clusters": true}
            }"#,
        )
        .unwrap();
        let output = execute(&scenario).unwrap();
        assert_eq!(output.summary.termination, "collapsed");
        let t_c = output.summary.t_c.unwrap();
        let predicted = output.summary.predicted_collapse_time.unwrap();
        assert!((t_c - predicted).abs() / predicted <= 1e-3);
        let holder = output.summary.holder.as_ref().unwrap();
        for fit in holder.iter().filter(|f| f.subject.starts_with("vortex")) {
            assert!((fit.exponent - 0.5).abs() <= 0.01, "{fit:?}");
        }
        let ss = output.summary.self_similar.as_ref().unwrap();
        assert_eq!(ss.vanishing_condition, "one_minus_alpha");
        let clusters = output.summary.clusters.as_ref().unwrap();
        assert_eq!(clusters.parts, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn disc_scenario_with_scaled_collapse() {
        let scenario = Scenario::from_json(
            r#"{
                "schema_version": 1,
                "field": {"type": "disc"},
                "initial": {"type": "self_similar", "alpha": 1.0, "scale": 0.01},
                "run_to_collapse": true,
                "samples": 200,
                "analysis": {"holder": true}
            }"#,
        )
        .unwrap();
        let output = execute(&scenario).unwrap();
        assert_eq!(output.summary.field, "disc");
        assert_eq!(output.summary.termination, "collapsed");
        let t_c = output.summary.t_c.unwrap();
        let predicted = output.summary.predicted_collapse_time.unwrap();
        // The boundary term perturbs the planar prediction only slightly.
        assert!(
            (t_c - predicted).abs() / predicted <= 1e-2,
            "t_c = {t_c} vs {predicted}"
        );
        for fit in output
            .summary
            .holder
            .as_ref()
            .unwrap()
            .iter()
            .filter(|f| f.subject.starts_with("vortex"))
        {
            assert!((fit.exponent - 0.5).abs() <= 0.01, "{fit:?}");
        }
        assert!(output.summary.boundary_proximity_samples == Some(0));
    }

    #[test]
    fn disc_rejects_self_similar_with_wrong_alpha() {
        let result = Scenario::from_json(
            r#"{
                "schema_version": 1,
                "field": {"type": "disc"},
                "initial": {"type": "self_similar", "alpha": 2.0}
            }"#,
        );
        assert!(matches!(result, Err(RunFailure::Schema(_))));
    }

    #[test]
    fn run_to_collapse_supplies_default_horizon() {
        // Non-collapsing explicit data with run_to_collapse: the run caps at
        // the default horizon instead of being a schema error.
        let scenario = Scenario::from_json(
            r#"{
                "schema_version": 1,
                "field": {"type": "plane", "alpha": 1.0},
                "initial": {"type": "explicit",
                            "positions": [[0.0, 0.0], [1.0, 0.0]],
                            "intensities": [1.0, -1.0]},
                "run_to_collapse": true,
                "integrator": {"rel_tol": 1e-9, "abs_tol": 1e-11},
                "samples": 10
            }"#,
        )
        .unwrap();
        let output = execute(&scenario).unwrap();
        assert_eq!(output.summary.termination, "reached_final_time");
        assert!((output.record.final_time() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_artifacts() {
        let scenario = Scenario::from_json(&translating_pair_json()).unwrap();
        let a = execute(&scenario).unwrap();
        let b = execute(&scenario).unwrap();
        assert_eq!(trajectory_csv(&a.record), trajectory_csv(&b.record));
        assert_eq!(summary_json(&a.summary), summary_json(&b.summary));
    }

    #[test]
    fn csv_has_fixed_columns() {
        let scenario = Scenario::from_json(&translating_pair_json()).unwrap();
        let output = execute(&scenario).unwrap();
        let csv = trajectory_csv(&output.record);
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "t,x1,y1,x2,y2,H,Mx,My,I,L,dmin");
        let first_row = csv.lines().nth(1).unwrap();
        assert_eq!(first_row.split(',').count(), 11);
        // 17 significant digits in scientific notation.
        assert!(first_row.split(',').all(|f| f.contains('e')));
    }

    #[test]
    fn holder_requires_collapse() {
        let mut scenario = Scenario::from_json(&translating_pair_json()).unwrap();
        scenario.analysis.holder = true;
        match execute(&scenario) {
            Err(RunFailure::Analysis(_)) => {}
            other => panic!("expected analysis failure, got {other:?}"),
        }
    }

    #[test]
    fn random_initial_is_seed_deterministic() {
        let json = r#"{
            "schema_version": 1,
            "field": {"type": "plane", "alpha": 1.0},
            "initial": {"type": "random", "count": 4, "seed": 11},
            "t_final": 0.25,
            "samples": 20
        }"#;
        let scenario = Scenario::from_json(json).unwrap();
        let a = execute(&scenario).unwrap();
        let b = execute(&scenario).unwrap();
        assert_eq!(trajectory_csv(&a.record), trajectory_csv(&b.record));
        // Seed override changes the configuration.
        let other = execute(&scenario.with_overrides(&Overrides {
            seed: Some(12),
            ..Default::default()
        }))
        .unwrap();
        assert_ne!(trajectory_csv(&a.record), trajectory_csv(&other.record));
    }
}
