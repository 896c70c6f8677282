//! Post-hoc verification of trajectory data: Hölder-exponent estimation at
//! the time of collapse, limit-point extraction, the prevent-collapse
//! implication, and quasi-preservation of cluster barycenters.

use crate::core::{
    barycenter_speed_bound, cluster_barycenter, degeneracy_params, NEUTRAL_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::integrate::TrajectoryRecord;
use serde::Serialize;

/// Minimum sample count demanded inside the fit window.
pub const MIN_FIT_SAMPLES: usize = 20;

/// Relative fit window: samples with `(t_c - t)/t_c` inside the interval
/// are used. Excludes both the pre-asymptotic regime and the region where
/// integrator error dominates.
#[derive(Clone, Copy, Debug)]
pub struct FitWindow {
    pub lower_frac: f64,
    pub upper_frac: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow {
            lower_frac: 1e-6,
            upper_frac: 1e-1,
        }
    }
}

/// What a Hölder fit was computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FitSubject {
    Vortex(usize),
    Pair(usize, usize),
}

/// Result of a log-log Hölder fit near the collapse time.
#[derive(Clone, Debug)]
pub struct HolderFit {
    pub subject: FitSubject,
    /// Extrapolated limit point; absent for relative (pair) fits.
    pub limit_point: Option<Vec2>,
    /// Fitted exponent `beta` of `|x(t) - x*| ~ C (t_c - t)^beta`.
    pub exponent: f64,
    /// RMS of the log-log fit deviations.
    pub fit_residual: f64,
    /// Time span `(t_min, t_max)` of the samples actually used.
    pub sample_range: (f64, f64),
    pub samples_used: usize,
}

fn fit_line(u: &[f64], w: &[f64]) -> (f64, f64, f64) {
    let n = u.len() as f64;
    let mu: f64 = u.iter().sum::<f64>() / n;
    let mw: f64 = w.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in u.iter().zip(w) {
        num += (a - mu) * (b - mw);
        den += (a - mu) * (a - mu);
    }
    let slope = num / den;
    let intercept = mw - slope * mu;
    let mut rss = 0.0;
    for (a, b) in u.iter().zip(w) {
        let r = b - (intercept + slope * a);
        rss += r * r;
    }
    (slope, intercept, (rss / n).sqrt())
}

/// Indices of samples lying strictly before `t_collapse` inside the window.
fn window_indices(record: &TrajectoryRecord, t_collapse: f64, window: &FitWindow) -> Vec<usize> {
    record
        .times
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            let frac = (t_collapse - **t) / t_collapse;
            frac >= window.lower_frac && frac <= window.upper_frac && **t < t_collapse
        })
        .map(|(k, _)| k)
        .collect()
}

/// Estimate of the true singularity time behind a record that terminated
/// at the finite collapse radius.
///
/// The crossing time undershoots the singularity by the time the minimal
/// distance still needs to vanish; for the power-law approach of order
/// `beta` that remainder is `beta * dmin / |d(dmin)/dt|` at the final
/// sample. The deepest samples sit exactly in that gap, so extrapolation
/// must account for it.
fn singular_time_estimate(record: &TrajectoryRecord, t_collapse: f64) -> f64 {
    let n = record.len();
    if n < 2 || record.collapse_time() != Some(t_collapse) {
        return t_collapse;
    }
    let beta = 1.0 / (record.states[0].alpha() + 1.0);
    let (t1, d1) = (
        record.times[n - 1],
        record.invariants[n - 1].min_pair_distance,
    );
    let (t0, d0) = (
        record.times[n - 2],
        record.invariants[n - 2].min_pair_distance,
    );
    let slope = (d1 - d0) / (t1 - t0);
    if !(slope < 0.0) {
        return t_collapse;
    }
    t1 + beta * d1 / (-slope)
}

/// Richardson extrapolation of the limit point at the given power-law
/// order, phase-matched against the spiral of the approach.
///
/// A collapsing vortex approaches its limit point along
/// `x(t) = x* + c (T - t)^beta e^{i omega ln(T - t)}`: the modulus is an
/// exact power law but the prefactor rotates, so a plain two-point
/// Richardson step carries an error of the order of the *last* sample's
/// distance to `x*`. The spiral rate `omega` is measured from the turning
/// of the separation vector to the nearest collapsing neighbour (no limit
/// point needed for that), and the extrapolation partner is then taken one
/// full turn away, which cancels the rotating term. Without a usable
/// rotation estimate the partner at distance ratio 2 is used.
fn extrapolate_limit(record: &TrajectoryRecord, t_collapse: f64, index: usize, beta: f64) -> Vec2 {
    let singular_time = singular_time_estimate(record, t_collapse);
    let usable: Vec<(f64, Vec2)> = record
        .times
        .iter()
        .zip(&record.states)
        .filter(|(t, _)| **t < t_collapse)
        .map(|(t, s)| (singular_time - *t, s.positions()[index]))
        .collect();
    let (d_last, x_last) = *usable.last().expect("record has samples before collapse");

    let plain = || -> Vec2 {
        let mut partner: Option<(f64, Vec2)> = None;
        for &(d, x) in usable.iter().rev().skip(1) {
            let ratio = d / d_last;
            if ratio > 10.0 {
                break;
            }
            if ratio >= 1.5 {
                partner = Some((d, x));
                if ratio >= 2.0 {
                    break;
                }
            }
        }
        match partner {
            Some((d2, x2)) => {
                let r = (d2 / d_last).powf(beta);
                (r * x_last - x2) / (r - 1.0)
            }
            None => x_last,
        }
    };

    let Some(omega) = spiral_rate(record, t_collapse, singular_time, index) else {
        return plain();
    };
    // Partner one full turn up; it must still sit in the asymptotic tail.
    let target = d_last * (std::f64::consts::TAU / omega.abs()).exp();
    if target > 3e-2 * t_collapse {
        return plain();
    }
    let mut best: Option<(f64, Vec2)> = None;
    for &(d, x) in usable.iter().rev().skip(1) {
        if best.map_or(true, |(bd, _)| {
            (d / target).ln().abs() < (bd / target).ln().abs()
        }) {
            best = Some((d, x));
        }
        if d > target * 2.0 {
            break;
        }
    }
    match best {
        Some((d2, x2)) if (d2 / target).ln().abs() < 0.35 => {
            let r = (d2 / d_last).powf(beta);
            (r * x_last - x2) / (r - 1.0)
        }
        _ => plain(),
    }
}

/// Spiral rate `omega` of the approach: the separation vector to the
/// nearest neighbour at the final sample turns by `omega` per unit of
/// `ln(T - t)`. `None` when there is no collapsing neighbour or the
/// turning is not coherent.
fn spiral_rate(
    record: &TrajectoryRecord,
    t_collapse: f64,
    singular_time: f64,
    index: usize,
) -> Option<f64> {
    let n = record.states[0].len();
    if n < 2 {
        return None;
    }
    let last = record.final_state().positions();
    let neighbour = (0..n)
        .filter(|j| *j != index)
        .min_by(|a, b| {
            let da = last[*a].distance(last[index]);
            let db = last[*b].distance(last[index]);
            da.partial_cmp(&db).unwrap()
        })
        .expect("at least two vortices");

    // Unwrapped argument of the separation against ln(t_c - t) over the
    // asymptotic tail.
    let mut u = Vec::new();
    let mut phi = Vec::new();
    let mut prev: Option<f64> = None;
    let mut offset = 0.0;
    for (t, state) in record.times.iter().zip(&record.states) {
        let d = singular_time - t;
        if !(*t < t_collapse) || !(d > 0.0) || d > 3e-2 * t_collapse {
            continue;
        }
        let sep = state.positions()[index] - state.positions()[neighbour];
        let raw = sep.y.atan2(sep.x);
        if let Some(p) = prev {
            let mut delta = raw + offset - p;
            while delta > std::f64::consts::PI {
                offset -= std::f64::consts::TAU;
                delta -= std::f64::consts::TAU;
            }
            while delta < -std::f64::consts::PI {
                offset += std::f64::consts::TAU;
                delta += std::f64::consts::TAU;
            }
        }
        let unwrapped = raw + offset;
        prev = Some(unwrapped);
        u.push(d.ln());
        phi.push(unwrapped);
    }
    if u.len() < 10 {
        return None;
    }
    let (omega, _, residual) = fit_line(&u, &phi);
    if !omega.is_finite() || omega.abs() < 1e-6 || residual > 0.3 {
        return None;
    }
    Some(omega)
}

/// Fits the Hölder exponent of `|x_i(t) - x_i*|` against `t_c - t` on
/// log-log axes over the configured window.
///
/// The limit point is Richardson-extrapolated over the final sampled decade
/// at the order `1/(alpha+1)` known from the record's kernel exponent, then
/// refined once with the fitted exponent.
pub fn holder_fit(record: &TrajectoryRecord, t_collapse: f64, index: usize) -> Result<HolderFit> {
    holder_fit_with(record, t_collapse, index, &FitWindow::default())
}

pub fn holder_fit_with(
    record: &TrajectoryRecord,
    t_collapse: f64,
    index: usize,
    window: &FitWindow,
) -> Result<HolderFit> {
    if record.collapse_time().is_none() {
        return Err(Error::NoCollapse);
    }
    let n = record.states[0].len();
    if index >= n {
        return Err(Error::SubsetIndexRange { index, n });
    }
    let used = window_indices(record, t_collapse, window);
    if used.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            found: used.len(),
            need: MIN_FIT_SAMPLES,
        });
    }

    // Extrapolation order matched to the exponent known from the kernel;
    // the data then decides the fitted exponent on its own.
    let known_order = 1.0 / (record.states[0].alpha() + 1.0);
    let limit = extrapolate_limit(record, t_collapse, index, known_order);
    let mut u = Vec::new();
    let mut w = Vec::new();
    for &k in &used {
        let d = t_collapse - record.times[k];
        let r = (record.states[k].positions()[index] - limit).norm();
        if r > 0.0 {
            u.push(d.ln());
            w.push(r.ln());
        }
    }
    if u.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            found: u.len(),
            need: MIN_FIT_SAMPLES,
        });
    }
    let fit = fit_line(&u, &w);

    Ok(HolderFit {
        subject: FitSubject::Vortex(index),
        limit_point: Some(limit),
        exponent: fit.0,
        fit_residual: fit.2,
        sample_range: (
            record.times[*used.first().unwrap()],
            record.times[*used.last().unwrap()],
        ),
        samples_used: used.len(),
    })
}

/// Hölder fit of the pair separation `|x_i(t) - x_j(t)|`; no limit point is
/// extracted. The pair must actually collapse: its final sampled separation
/// has to sit within three orders of magnitude of the collapse radius.
pub fn relative_holder_fit(
    record: &TrajectoryRecord,
    t_collapse: f64,
    pair: (usize, usize),
) -> Result<HolderFit> {
    relative_holder_fit_with(record, t_collapse, pair, &FitWindow::default())
}

pub fn relative_holder_fit_with(
    record: &TrajectoryRecord,
    t_collapse: f64,
    pair: (usize, usize),
    window: &FitWindow,
) -> Result<HolderFit> {
    if record.collapse_time().is_none() {
        return Err(Error::NoCollapse);
    }
    let n = record.states[0].len();
    let (i, j) = pair;
    for index in [i, j] {
        if index >= n {
            return Err(Error::SubsetIndexRange { index, n });
        }
    }
    let final_sep = {
        let p = record.final_state().positions();
        p[i].distance(p[j])
    };
    if final_sep > 1e3 * record.options.collapse_radius {
        return Err(Error::NonCollapsingPair { i, j });
    }
    let used = window_indices(record, t_collapse, window);
    if used.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            found: used.len(),
            need: MIN_FIT_SAMPLES,
        });
    }
    let mut u = Vec::new();
    let mut w = Vec::new();
    for &k in &used {
        let p = record.states[k].positions();
        let d = t_collapse - record.times[k];
        let r = p[i].distance(p[j]);
        if r > 0.0 {
            u.push(d.ln());
            w.push(r.ln());
        }
    }
    let (slope, _, residual) = fit_line(&u, &w);
    Ok(HolderFit {
        subject: FitSubject::Pair(i, j),
        limit_point: None,
        exponent: slope,
        fit_residual: residual,
        sample_range: (
            record.times[*used.first().unwrap()],
            record.times[*used.last().unwrap()],
        ),
        samples_used: used.len(),
    })
}

/// Explicit constants of the prevent-collapse criterion for one intensity
/// family: if two vortices are `eta` apart at a time `t` with
/// `T - t <= c_kappa eta^{alpha+1}`, they stay at least `eta/2` apart until
/// `T`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PreventCollapseBound {
    pub alpha: f64,
    pub n: usize,
    /// Separation ratio `kappa = A0 / (17 a)`.
    pub kappa: f64,
    /// `r = min(1/8, A0/(8 a kappa) - 2)`; positive because
    /// `kappa < A0/(16 a)`.
    pub r: f64,
    /// `s = r (kappa/8)^N`.
    pub s: f64,
    /// Time-window constant `C_kappa`.
    pub c_kappa: f64,
    pub c0: f64,
    pub c1: f64,
}

/// Computes the explicit constants (`kappa`, `r`, `s`, `C_kappa`) of the
/// prevent-collapse criterion.
///
/// `c0` bounds the inverse-distance part of the barycenter drift (the
/// planar field satisfies it with the constant from
/// [`barycenter_speed_bound`]); `c1` bounds any additional uniformly
/// bounded drift (zero in the plane). At least one must be positive: with
/// both zero every vortex is motionless and the criterion is vacuous.
pub fn prevent_collapse_constant(
    intensities: &[f64],
    alpha: f64,
    c0: f64,
    c1: f64,
) -> Result<PreventCollapseBound> {
    let n = intensities.len();
    if n < 2 {
        return Err(Error::TooFewVortices { n, need: 2 });
    }
    if c0 < 0.0 || c1 < 0.0 || !c0.is_finite() || !c1.is_finite() {
        return Err(Error::NonPositiveScale { value: c0.min(c1) });
    }
    if c0 == 0.0 && c1 == 0.0 {
        return Err(Error::MotionlessBound);
    }
    let params = degeneracy_params(intensities)?;
    let a0 = params.min_subcluster_sum;
    let a = params.intensity_abs_sum;
    if a0 <= NEUTRAL_TOLERANCE * a {
        return Err(Error::DegenerateIntensities);
    }

    let kappa = a0 / (17.0 * a);
    let r = (1.0_f64 / 8.0).min(a0 / (8.0 * a * kappa) - 2.0);
    let s = r * (kappa / 8.0).powi(n as i32);
    let n_minus_2 = (n - 2) as f64;
    let branch_inverse = if c0 > 0.0 {
        a * kappa.powf(-alpha) / (2f64.powf(alpha) * a0 * c0) * s.powf(n_minus_2 * (alpha + 1.0))
    } else {
        f64::INFINITY
    };
    let branch_bounded = if c1 > 0.0 {
        a / (a0 * c1) * s.powf(n_minus_2)
    } else {
        f64::INFINITY
    };
    let c_kappa = 0.5 * branch_inverse.min(branch_bounded);

    Ok(PreventCollapseBound {
        alpha,
        n,
        kappa,
        r,
        s,
        c_kappa,
        c0,
        c1,
    })
}

/// First violation found by [`check_prevent_collapse`], if any.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Counterexample {
    pub t: f64,
    pub tau: f64,
    pub i: usize,
    pub j: usize,
    pub initial_distance: f64,
    pub later_distance: f64,
}

#[derive(Clone, Copy, Debug)]
pub enum Verdict {
    Pass,
    Fail(Counterexample),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Checks the prevent-collapse implication on a record: for every sampled
/// time `t` with `T - t <= c_kappa eta^{alpha+1}` and every pair at least
/// `eta` apart at `t`, all later samples keep the pair at least `eta/2`
/// apart. `T` is the collapse time if the record collapsed, else its final
/// time.
pub fn check_prevent_collapse(
    record: &TrajectoryRecord,
    bound: &PreventCollapseBound,
    eta: f64,
) -> Result<Verdict> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::EtaRange { eta });
    }
    let horizon = record
        .collapse_time()
        .unwrap_or_else(|| record.final_time());
    let window = bound.c_kappa * eta.powf(bound.alpha + 1.0);
    let n = record.states[0].len();
    let samples = record.len();

    for i in 0..n {
        for j in (i + 1)..n {
            // Suffix minima of the pair separation.
            let mut suffix_min = vec![f64::INFINITY; samples + 1];
            for k in (0..samples).rev() {
                let p = record.states[k].positions();
                suffix_min[k] = suffix_min[k + 1].min(p[i].distance(p[j]));
            }
            for k in 0..samples {
                let t = record.times[k];
                if horizon - t > window {
                    continue;
                }
                let p = record.states[k].positions();
                let dist = p[i].distance(p[j]);
                if dist >= eta && suffix_min[k + 1] < 0.5 * eta {
                    let tau_idx = (k + 1..samples)
                        .find(|&m| {
                            let q = record.states[m].positions();
                            q[i].distance(q[j]) < 0.5 * eta
                        })
                        .expect("suffix minimum located a violation");
                    let q = record.states[tau_idx].positions();
                    return Ok(Verdict::Fail(Counterexample {
                        t,
                        tau: record.times[tau_idx],
                        i,
                        j,
                        initial_distance: dist,
                        later_distance: q[i].distance(q[j]),
                    }));
                }
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Maximal ratio of the finite-difference barycenter speed `|dB_P/dt|` to
/// [`barycenter_speed_bound`] across adjacent samples.
///
/// For the full index set both the drift and the bound vanish; that `0/0`
/// is reported as 0. Sample pairs whose spacing is so small that position
/// rounding alone could fake one percent of the bound are skipped: a finite
/// difference there measures floating noise, not motion (this only affects
/// the ulp-spaced samples right before a collapse).
pub fn quasi_preservation_check(record: &TrajectoryRecord, subset: &[usize]) -> Result<f64> {
    let mut max_ratio = 0.0_f64;
    let mut prev: Option<(f64, Vec2, f64)> = None;
    for (t, state) in record.times.iter().zip(&record.states) {
        let b = cluster_barycenter(state, subset)?;
        let bound = barycenter_speed_bound(state, subset)?;
        if let Some((t_prev, b_prev, bound_prev)) = prev {
            let dt = t - t_prev;
            let speed = (b - b_prev).norm() / dt;
            let denom = bound.max(bound_prev);
            let rounding = 8.0 * f64::EPSILON * (b.norm() + b_prev.norm()) / dt;
            if denom > 0.0 && rounding <= 0.01 * denom {
                max_ratio = max_ratio.max(speed / denom);
            }
        }
        prev = Some((*t, b, bound));
    }
    Ok(max_ratio)
}
