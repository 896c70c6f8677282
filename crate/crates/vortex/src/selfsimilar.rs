//! Exact self-similar three-vortex collapse configurations for any
//! exponent `alpha > 0`, together with their closed-form trajectories.
//!
//! The construction places three vortices with intensities `(a, 1, 1)` on a
//! right triangle whose legs have length ratio `lambda`. For the right
//! `lambda` (a root of [`side_ratio_equation`]) and the matching negative
//! intensity `a`, the triangle shrinks homothetically while rotating, and
//! every pairwise distance reaches zero at a finite time `T` that is known
//! in closed form. These solutions give ground truth for collapse-time
//! detection and for the Hölder exponent `1/(alpha+1)` of the trajectories.

use crate::core::{pair_moment, velocity_field, VortexState};
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Residual tolerance demanded of the side-ratio root.
const ROOT_RESIDUAL: f64 = 1e-12;
/// Agreement demanded between the two closed forms of the intensity.
const INTENSITY_AGREEMENT: f64 = 1e-8;

/// Orientation of the initial right triangle. Only one of the two signs
/// contracts; the mirror image is the time-reversed, expanding solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Counterclockwise,
    Clockwise,
}

/// A constructed self-similar collapse.
///
/// `initial_state` is expressed in the frame where the conserved vorticity
/// vector sits at the origin, which is the fixed point of the contraction;
/// all three trajectories converge to it at `t = collapse_time`.
#[derive(Clone, Debug)]
pub struct SelfSimilarSolution {
    pub alpha: f64,
    /// Leg ratio `|x3 - x1| / |x2 - x3|` of the right triangle, in (0, 1).
    pub lambda: f64,
    /// First intensity `a`; the other two are 1. Always negative.
    pub intensity: f64,
    /// Three-vortex initial configuration, recentered.
    pub initial_state: VortexState,
    /// Contraction rate `C'`: the long leg obeys `|A(t)|^{alpha+1} = 1 - C' t`.
    pub contraction_rate: f64,
    /// Rotation rate `D`: the configuration turns by `-D T ln((T-t)/T)`.
    pub rotation_rate: f64,
    /// Collapse time `T = 1 / C'`.
    pub collapse_time: f64,
}

/// The scalar equation whose root in (0, 1) makes the right triangle evolve
/// self-similarly:
///
/// `(1+l^2)/sqrt(1+l^2)^{a+1} * (1 - sqrt(1+l^2)^{a+1})/l^2 - (1 - l^{-(a+1)})`.
///
/// Admits evaluation at `lambda = 1` (used for the sign check); the root
/// search itself stays in the open interval.
pub fn side_ratio_equation(lambda: f64, alpha: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) || !lambda.is_finite() {
        return Err(Error::SideRatioRange { lambda });
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::NegativeAlpha { alpha });
    }
    let lam_sq = lambda * lambda;
    let hyp_pow = (1.0 + lam_sq).powf(0.5 * (alpha + 1.0));
    let leg_pow = lambda.powf(-(alpha + 1.0));
    Ok((1.0 + lam_sq) * (1.0 - hyp_pow) / (hyp_pow * lam_sq) - 1.0 + leg_pow)
}

/// Root of [`side_ratio_equation`] in (0, 1) by bisection.
///
/// The bracket `[1e-6, 1 - 1e-9]` always changes sign for `alpha > 0`
/// (the equation blows up to `+inf` at 0 and is negative at 1); a
/// same-sign bracket therefore signals a regression, not a bad input.
pub fn solve_side_ratio(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::NegativeAlpha { alpha });
    }
    let mut lo = 1e-6;
    let mut hi = 1.0 - 1e-9;
    let mut f_lo = side_ratio_equation(lo, alpha)?;
    let f_hi = side_ratio_equation(hi, alpha)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::BracketFailure);
    }
    // Bisect until the midpoint stagnates; that is well below the 1e-14
    // interval the callers rely on.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = side_ratio_equation(mid, alpha)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let residual = side_ratio_equation(root, alpha)?.abs();
    if residual > ROOT_RESIDUAL {
        return Err(Error::ConstructionResidual {
            what: "side ratio equation",
            residual,
        });
    }
    Ok(root)
}

/// Intensity `a` of the first vortex for a given side-ratio root.
///
/// Two independent closed forms exist (one per leg of the triangle); they
/// agree exactly at a root and diverge off it, so their disagreement is an
/// error that flags a non-root `lambda`. The result is always negative.
pub fn intensity_for_side_ratio(lambda: f64, alpha: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::SideRatioRange { lambda });
    }
    let lam_sq = lambda * lambda;
    let hyp_pow_inv = (1.0 + lam_sq).powf(-0.5 * (alpha + 1.0));
    let leg_pow = lambda.powf(-(alpha + 1.0));
    let denom = leg_pow - hyp_pow_inv; // > 0 on (0, 1)
    let first = (hyp_pow_inv - 1.0) / (lam_sq * denom);
    let second = (1.0 - leg_pow) / ((1.0 + lam_sq) * denom);
    if (first - second).abs() > INTENSITY_AGREEMENT * first.abs().max(second.abs()) {
        return Err(Error::InconsistentIntensity {
            lambda,
            first,
            second,
        });
    }
    let a = 0.5 * (first + second);
    if a >= 0.0 {
        return Err(Error::IntensitySign { value: a });
    }
    Ok(a)
}

/// Builds the collapsing configuration for the requested orientation.
///
/// Vortices are placed as `x3 = 0`, `x2 = (1, 0)`, `x1 = (0, -/+ lambda)`,
/// then recentered so the conserved vorticity vector is the origin. The
/// orientation whose long leg expands is rejected; the caller may ask for
/// the opposite sign (or use [`build_collapse`]).
pub fn build_configuration(alpha: f64, orientation: Orientation) -> Result<SelfSimilarSolution> {
    let lambda = solve_side_ratio(alpha)?;
    let intensity = intensity_for_side_ratio(lambda, alpha)?;
    let intensities = vec![intensity, 1.0, 1.0];
    let total = intensity + 2.0;
    if total.abs() <= 1e-9 * (intensity.abs() + 2.0) {
        return Err(Error::NeutralTotalIntensity { total });
    }

    let sign = match orientation {
        Orientation::Counterclockwise => -1.0,
        Orientation::Clockwise => 1.0,
    };
    let raw = [
        Vec2::new(0.0, sign * lambda),
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, 0.0),
    ];
    let center = (intensity * raw[0] + raw[1] + raw[2]) / total;
    let positions: Vec<Vec2> = raw.iter().map(|p| *p - center).collect();
    let state = VortexState::new(positions, intensities, alpha)?;

    // Contraction sign from the field itself: d|x2 - x3|^2/dt at t = 0.
    let v = velocity_field(&state)?;
    let leg = state.positions()[1] - state.positions()[2];
    let slope = 2.0 * leg.dot(v[1] - v[2]);
    if slope >= 0.0 {
        return Err(Error::ExpandingOrientation);
    }
    // |A(0)| = 1, so dA/dt(0) = slope/2 and A^{alpha+1}(t) = 1 - C' t with
    // C' = -(alpha+1) dA/dt(0).
    let contraction_rate = -(alpha + 1.0) * 0.5 * slope;
    let collapse_time = 1.0 / contraction_rate;

    // Rotation rate: for every vortex, (-i v_j)/x_j + i f'(0) must be one and
    // the same real number.
    let radial_rate = -contraction_rate / (alpha + 1.0); // f'(0)
    let mut rotation_rate = 0.0;
    for j in 0..3 {
        let z = state.positions()[j];
        let numerator = Vec2::new(v[j].y, -v[j].x); // -i v_j
        let d = numerator.complex_div(z) + Vec2::new(0.0, radial_rate);
        debug_assert!(
            d.y.abs() <= 1e-8 * (d.x.abs() + radial_rate.abs()),
            "rotation rate has imaginary part {:.3e}",
            d.y
        );
        rotation_rate += d.x / 3.0;
    }

    let solution = SelfSimilarSolution {
        alpha,
        lambda,
        intensity,
        initial_state: state,
        contraction_rate,
        rotation_rate,
        collapse_time,
    };
    solution.validate()?;
    Ok(solution)
}

/// Convenience builder: tries both orientations and returns the contracting
/// one.
pub fn build_collapse(alpha: f64) -> Result<SelfSimilarSolution> {
    match build_configuration(alpha, Orientation::Counterclockwise) {
        Err(Error::ExpandingOrientation) => build_configuration(alpha, Orientation::Clockwise),
        other => other,
    }
}

/// Relative remaining time at which collapse detection triggers on
/// constructed runs: deep enough that Hölder fits over `(t_c - t)/t_c` in
/// `[1e-6, 1e-1]` see only clean data, shallow enough that the trajectory
/// has not yet been thrown off the (unstable) exact collapse orbit by the
/// ~1e-16 rounding of the initial data.
const TRIGGER_DEPTH: f64 = 1e-9;

/// Collapse radius adapted to driving a constructed configuration into its
/// collapse: the smallest pairwise distance `lambda |A(0)|` scaled down to
/// the standard trigger depth.
///
/// A fixed radius cannot serve every exponent: double-precision initial
/// data starts about `1e-16` off the exact (unstable) collapse orbit, which
/// caps the attainable minimal distance between roughly `3e-8` of the
/// initial separation at `alpha = 1` and `2e-5` at `alpha = 3`, while a
/// trigger too close to the initial separation leaves the Hölder fit
/// window truncated. Pinning the *relative remaining time* at `1e-9` keeps
/// both margins for every `alpha`; the detected collapse time then sits
/// within `1e-9` of the true one, far inside every stated tolerance.
pub fn default_collapse_radius(alpha: f64) -> Result<f64> {
    let lambda = solve_side_ratio(alpha)?;
    Ok(lambda * TRIGGER_DEPTH.powf(1.0 / (alpha + 1.0)))
}

impl SelfSimilarSolution {
    /// Integrator options suited to driving this configuration into its
    /// collapse; see [`default_collapse_radius`].
    pub fn collapse_run_options(&self) -> crate::integrate::IntegratorOptions {
        crate::integrate::IntegratorOptions {
            collapse_radius: self.lambda * TRIGGER_DEPTH.powf(1.0 / (self.alpha + 1.0)),
            ..Default::default()
        }
    }

    /// Shrink factor `f(t) = ((T - t)/T)^{1/(alpha+1)}`.
    pub fn shrink_factor(&self, t: f64) -> Result<f64> {
        if !(0.0..self.collapse_time).contains(&t) {
            return Err(Error::OutsideCollapseInterval {
                t,
                t_collapse: self.collapse_time,
            });
        }
        Ok(((self.collapse_time - t) / self.collapse_time).powf(1.0 / (self.alpha + 1.0)))
    }

    /// Accumulated rotation angle `theta(t) = -D T ln((T - t)/T)`.
    pub fn rotation_angle(&self, t: f64) -> Result<f64> {
        if !(0.0..self.collapse_time).contains(&t) {
            return Err(Error::OutsideCollapseInterval {
                t,
                t_collapse: self.collapse_time,
            });
        }
        Ok(-self.rotation_rate
            * self.collapse_time
            * ((self.collapse_time - t) / self.collapse_time).ln())
    }

    fn validate(&self) -> Result<()> {
        let residual = side_ratio_equation(self.lambda, self.alpha)?.abs();
        if residual > ROOT_RESIDUAL {
            return Err(Error::ConstructionResidual {
                what: "side ratio equation",
                residual,
            });
        }
        // Right angle between the two legs, exact by construction.
        let p = self.initial_state.positions();
        let leg_a = p[1] - p[2];
        let leg_b = p[2] - p[0];
        let dot = leg_a.dot(leg_b).abs();
        if dot > 1e-14 {
            return Err(Error::ConstructionResidual {
                what: "right angle",
                residual: dot,
            });
        }
        // Necessary condition L(0) = 0 for any self-similar collapse.
        let l0 = pair_moment(&self.initial_state).abs();
        let scale: f64 = {
            let a = self.initial_state.intensities();
            let mut s = 0.0;
            for i in 0..3 {
                for j in (i + 1)..3 {
                    s += 2.0 * (a[i] * a[j]).abs() * (p[i] - p[j]).norm_sq();
                }
            }
            s
        };
        if l0 > 1e-10 * scale {
            return Err(Error::ConstructionResidual {
                what: "pair moment at t = 0",
                residual: l0 / scale,
            });
        }
        Ok(())
    }
}

/// Closed-form positions of the three vortices at time `t in [0, T)`:
/// `x_j(t) = x_j(0) f(t) e^{i theta(t)}` in the recentered frame.
pub fn analytic_trajectory(solution: &SelfSimilarSolution, t: f64) -> Result<[Vec2; 3]> {
    let f = solution.shrink_factor(t)?;
    let theta = solution.rotation_angle(t)?;
    let rot = Vec2::from_angle(theta) * f;
    let p = solution.initial_state.positions();
    Ok([
        p[0].complex_mul(rot),
        p[1].complex_mul(rot),
        p[2].complex_mul(rot),
    ])
}

/// Scaled residuals of the two candidate scale-invariance conditions plus
/// the side-ratio residual, bundled for reporting.
#[derive(Clone, Copy, Debug)]
pub struct ConstructionResiduals {
    pub side_ratio: f64,
    pub pair_moment_scaled: f64,
    pub inverse_alpha_scaled: f64,
    pub one_minus_alpha_scaled: f64,
}

pub fn construction_residuals(solution: &SelfSimilarSolution) -> Result<ConstructionResiduals> {
    let residuals = crate::core::collapse_moment_residuals(&solution.initial_state);
    let (l0, l_scale) = crate::core::intensity_weighted_moment(&solution.initial_state, 2.0);
    Ok(ConstructionResiduals {
        side_ratio: side_ratio_equation(solution.lambda, solution.alpha)?.abs(),
        pair_moment_scaled: l0.abs() / l_scale.max(f64::MIN_POSITIVE),
        inverse_alpha_scaled: residuals.inverse_alpha,
        one_minus_alpha_scaled: residuals.one_minus_alpha,
    })
}
