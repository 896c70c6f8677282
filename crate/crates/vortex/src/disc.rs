//! Euler point-vortex dynamics in the open unit disc via the explicit
//! Green and Robin functions of the Laplacian (method of images).
//!
//! With the complex identification of the plane the Green function is
//! `G(x, y) = (1/2pi) ln(|1 - x conj(y)| / |x - y|)` and its regular part
//! `gamma(x, y) = (1/2pi) ln|1 - x conj(y)|` is harmonic in each variable
//! with diagonal `gamma(x, x) = (1/2pi) ln(1 - |x|^2)`.
//!
//! The velocity field combines the planar Euler interaction with the
//! boundary correction carried by `gamma`. The sign of the `gamma`
//! contribution is fixed by physics, not notation: a single positive vortex
//! must precess counter-clockwise (its image across the boundary is a
//! negative vortex, and the resulting pair translates with the planar
//! rotation sense), and the disc Hamiltonian must be conserved. Both checks
//! are enforced in the tests below.

use crate::analysis::{holder_fit, HolderFit};
use crate::core::VortexState;
use crate::core::DISTANCE_FLOOR;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::integrate::{Dynamics, TrajectoryRecord};
use std::f64::consts::PI;

/// Distance to the boundary below which a vortex counts as boundary-near.
pub const BOUNDARY_PROXIMITY: f64 = 1e-6;

/// Positions strictly inside the unit disc with nonzero intensities.
#[derive(Clone, Debug)]
pub struct DiscState {
    positions: Vec<Vec2>,
    intensities: Vec<f64>,
}

impl DiscState {
    pub fn new(positions: Vec<Vec2>, intensities: Vec<f64>) -> Result<Self> {
        for p in &positions {
            check_interior(*p)?;
        }
        // Reuse the planar validation (distinctness, nonzero intensities).
        let state = VortexState::new(positions, intensities, 1.0)?;
        Ok(DiscState {
            positions: state.positions().to_vec(),
            intensities: state.intensities().to_vec(),
        })
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    /// View as a planar state with the Euler exponent (used for
    /// integration records and invariant sampling).
    pub fn to_vortex_state(&self) -> VortexState {
        VortexState::new(self.positions.clone(), self.intensities.clone(), 1.0)
            .expect("disc state is a valid vortex state")
    }
}

fn check_interior(p: Vec2) -> Result<()> {
    if !p.is_finite() || p.norm_sq() >= 1.0 {
        return Err(Error::OutsideDisc { x: p.x, y: p.y });
    }
    Ok(())
}

/// `1 - x conj(y)` under the complex identification.
fn image_factor(x: Vec2, y: Vec2) -> Vec2 {
    Vec2::new(1.0, 0.0) - x.complex_mul(y.conj())
}

/// Green function of the unit disc: `(1/2pi) ln(|1 - x conj(y)| / |x - y|)`.
///
/// Symmetric in its arguments, positive inside, vanishing as either
/// argument approaches the boundary.
pub fn green_value(x: Vec2, y: Vec2) -> Result<f64> {
    check_interior(x)?;
    check_interior(y)?;
    let d = x.distance(y);
    if d < DISTANCE_FLOOR {
        return Err(Error::CoincidentPositions { i: 0, j: 1 });
    }
    Ok((image_factor(x, y).norm() / d).ln() / (2.0 * PI))
}

/// Robin (regular) part of the Green function:
/// `gamma(x, y) = (1/2pi) ln|1 - x conj(y)|`.
pub fn robin_value(x: Vec2, y: Vec2) -> Result<f64> {
    check_interior(x)?;
    check_interior(y)?;
    Ok(image_factor(x, y).norm().ln() / (2.0 * PI))
}

/// Diagonal of the Robin function: `gamma(x, x) = (1/2pi) ln(1 - |x|^2)`.
pub fn robin_diagonal(x: Vec2) -> Result<f64> {
    check_interior(x)?;
    Ok((1.0 - x.norm_sq()).ln() / (2.0 * PI))
}

/// Gradient of `gamma` in its first variable:
/// `grad_x gamma(x, y) = -(1/2pi) y (1 - x conj(y)) / |1 - x conj(y)|^2`
/// (complex product).
pub fn robin_gradient(x: Vec2, y: Vec2) -> Result<Vec2> {
    check_interior(x)?;
    check_interior(y)?;
    let w = image_factor(x, y);
    Ok(y.complex_mul(w) * (-1.0 / (2.0 * PI * w.norm_sq())))
}

/// Gradient of the diagonal map `x -> gamma(x, x)`:
/// `-(1/pi) x / (1 - |x|^2)`. Equals twice [`robin_gradient`] on the
/// diagonal, by symmetry of `gamma`.
pub fn robin_diagonal_gradient(x: Vec2) -> Result<Vec2> {
    check_interior(x)?;
    Ok(x * (-1.0 / (PI * (1.0 - x.norm_sq()))))
}

/// Velocity of every vortex in the disc:
/// the planar Euler interaction `(1/2pi) sum_{j != i} a_j (x_i - x_j)^perp /
/// |x_i - x_j|^2` plus the boundary correction `-sum_j a_j grad^perp gamma
/// (x_i, x_j)`, where the `j = i` term is the self-interaction through the
/// Robin gradient on the diagonal.
pub fn disc_velocity_field(state: &DiscState) -> Result<Vec<Vec2>> {
    let mut out = vec![Vec2::default(); state.positions.len()];
    disc_velocities_into(&state.positions, &state.intensities, &mut out)?;
    Ok(out)
}

fn disc_velocities_into(positions: &[Vec2], intensities: &[f64], out: &mut [Vec2]) -> Result<()> {
    let n = positions.len();
    out.fill(Vec2::default());
    for i in 0..n {
        check_interior(positions[i])?;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let sep = positions[i] - positions[j];
            let d_sq = sep.norm_sq();
            if d_sq < DISTANCE_FLOOR * DISTANCE_FLOOR {
                return Err(Error::SingularConfiguration {
                    i,
                    j,
                    dist: d_sq.sqrt(),
                });
            }
            let kick = sep.perp() / (2.0 * PI * d_sq);
            out[i] += intensities[j] * kick;
            out[j] -= intensities[i] * kick;
        }
    }
    for i in 0..n {
        for j in 0..n {
            let grad = robin_gradient(positions[i], positions[j])?;
            out[i] -= intensities[j] * grad.perp();
        }
    }
    Ok(())
}

/// Indices of vortices within [`BOUNDARY_PROXIMITY`] of the boundary.
/// Integration continues regardless; callers may want to report it.
pub fn near_boundary(positions: &[Vec2]) -> Vec<usize> {
    positions
        .iter()
        .enumerate()
        .filter(|(_, p)| 1.0 - p.norm() < BOUNDARY_PROXIMITY)
        .map(|(i, _)| i)
        .collect()
}

/// Kirchhoff-Routh energy of the disc system:
/// `sum_{i<j} a_i a_j G(x_i, x_j) + 1/2 sum_i a_i^2 gamma(x_i, x_i)`.
/// Conserved along [`DiscDynamics`] trajectories.
pub fn disc_hamiltonian(state: &DiscState) -> Result<f64> {
    let mut h = 0.0;
    let n = state.positions.len();
    for i in 0..n {
        h +=
            0.5 * state.intensities[i] * state.intensities[i] * robin_diagonal(state.positions[i])?;
        for j in (i + 1)..n {
            h += state.intensities[i]
                * state.intensities[j]
                * green_value(state.positions[i], state.positions[j])?;
        }
    }
    Ok(h)
}

/// The disc field as an integrable dynamics (Euler kernel, `alpha = 1`).
#[derive(Clone, Copy, Debug, Default)]
pub struct DiscDynamics;

impl Dynamics for DiscDynamics {
    fn velocities(&self, positions: &[Vec2], intensities: &[f64], out: &mut [Vec2]) -> Result<()> {
        disc_velocities_into(positions, intensities, out)
    }

    fn alpha(&self) -> f64 {
        1.0
    }
}

/// Hölder check for a vortex with an interior adherence point: verifies the
/// candidate is actually approached (some sample within ten collapse radii),
/// delegates to [`holder_fit`] and demands consistency of the fitted
/// exponent with `1/2` at tolerance `tol`.
pub fn boundary_holder_check(
    record: &TrajectoryRecord,
    t_collapse: f64,
    index: usize,
    candidate_limit: Vec2,
    tol: f64,
) -> Result<HolderFit> {
    check_interior(candidate_limit)?;
    let approach = record
        .states
        .iter()
        .map(|s| s.positions()[index].distance(candidate_limit))
        .fold(f64::INFINITY, f64::min);
    if approach > 10.0 * record.options.collapse_radius {
        return Err(Error::NonAdheringCandidate { index });
    }
    let fit = holder_fit(record, t_collapse, index)?;
    if (fit.exponent - 0.5).abs() > tol {
        return Err(Error::ExponentMismatch {
            fitted: fit.exponent,
            expected: 0.5,
            tol,
        });
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, IntegratorOptions, Termination};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_interior(rng: &mut ChaCha8Rng, max_radius: f64) -> Vec2 {
        loop {
            let p = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if p.norm() < max_radius {
                return p;
            }
        }
    }

    #[test]
    fn green_at_center_is_log_inverse_radius() {
        let y = Vec2::new(0.3, -0.4);
        let expected = (1.0 / y.norm()).ln() / (2.0 * PI);
        let got = green_value(Vec2::new(0.0, 0.0), y).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn green_symmetric_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let x = random_interior(&mut rng, 0.999);
            let y = random_interior(&mut rng, 0.999);
            if x.distance(y) < 1e-6 {
                continue;
            }
            let a = green_value(x, y).unwrap();
            let b = green_value(y, x).unwrap();
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
            let ga = robin_value(x, y).unwrap();
            let gb = robin_value(y, x).unwrap();
            assert!((ga - gb).abs() <= 1e-14 * ga.abs().max(1.0));
        }
    }

    #[test]
    fn green_decays_at_boundary() {
        let x = Vec2::new(0.3, 0.0);
        let y = Vec2::new(0.0, 1.0 - 1e-3);
        assert!(green_value(x, y).unwrap().abs() < 1e-3);
    }

    #[test]
    fn green_rejects_exterior_and_coincidence() {
        let inside = Vec2::new(0.1, 0.1);
        assert!(matches!(
            green_value(Vec2::new(1.0, 0.0), inside),
            Err(Error::OutsideDisc { .. })
        ));
        assert!(matches!(
            green_value(inside, inside),
            Err(Error::CoincidentPositions { .. })
        ));
    }

    #[test]
    fn robin_diagonal_values() {
        assert_eq!(robin_diagonal(Vec2::new(0.0, 0.0)).unwrap(), 0.0);
        // gamma(x, x) = -1 at |x|^2 = 1 - e^{-2pi}.
        let r = (1.0 - (-2.0 * PI).exp()).sqrt();
        let got = robin_diagonal(Vec2::new(r, 0.0)).unwrap();
        assert!((got + 1.0).abs() < 1e-12, "gamma = {got}");
    }

    #[test]
    fn robin_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let step = 1e-6;
        for _ in 0..100 {
            let x = random_interior(&mut rng, 0.95);
            let y = random_interior(&mut rng, 0.95);
            let grad = robin_gradient(x, y).unwrap();
            let fd = Vec2::new(
                (robin_value(x + Vec2::new(step, 0.0), y).unwrap()
                    - robin_value(x - Vec2::new(step, 0.0), y).unwrap())
                    / (2.0 * step),
                (robin_value(x + Vec2::new(0.0, step), y).unwrap()
                    - robin_value(x - Vec2::new(0.0, step), y).unwrap())
                    / (2.0 * step),
            );
            assert!(
                (grad - fd).norm() <= 1e-7 * grad.norm().max(1.0),
                "grad {grad:?} vs fd {fd:?}"
            );
        }
    }

    #[test]
    fn robin_is_harmonic_discretely() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let h = 1e-4;
        for _ in 0..50 {
            let x = random_interior(&mut rng, 0.8);
            let y = random_interior(&mut rng, 0.8);
            if x.distance(y) < 0.1 {
                continue;
            }
            let g = |p: Vec2| robin_value(p, y).unwrap();
            let laplacian = (g(x + Vec2::new(h, 0.0))
                + g(x - Vec2::new(h, 0.0))
                + g(x + Vec2::new(0.0, h))
                + g(x - Vec2::new(0.0, h))
                - 4.0 * g(x))
                / (h * h);
            assert!(laplacian.abs() < 1e-5, "laplacian = {laplacian}");
        }
    }

    #[test]
    fn diagonal_gradient_is_half_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..50 {
            let x = random_interior(&mut rng, 0.95);
            let half = robin_diagonal_gradient(x).unwrap() * 0.5;
            let diag = robin_gradient(x, x).unwrap();
            assert!((half - diag).norm() <= 1e-12 * half.norm().max(1.0));
        }
    }

    #[test]
    fn robin_gradient_boundary_estimate() {
        // |grad_x gamma(x, y)| * dist(x, boundary) stays below 1/(2pi).
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let mut worst: f64 = 0.0;
        for _ in 0..2000 {
            let x = random_interior(&mut rng, 0.9999);
            let y = random_interior(&mut rng, 0.9999);
            let grad = robin_gradient(x, y).unwrap();
            worst = worst.max(grad.norm() * (1.0 - x.norm()));
        }
        assert!(worst <= 1.0 / (2.0 * PI) + 1e-12, "C_Omega = {worst}");
        assert!(worst > 0.0);
    }

    #[test]
    fn single_vortex_at_center_is_steady() {
        let state = DiscState::new(vec![Vec2::new(0.0, 0.0)], vec![1.0]).unwrap();
        let v = disc_velocity_field(&state).unwrap();
        assert!(v[0].norm() < 1e-15);
    }

    #[test]
    fn single_vortex_precesses_counterclockwise() {
        // Classical image construction: a positive vortex at (rho, 0) moves
        // in +y with speed rho / (2 pi (1 - rho^2)).
        let rho = 0.5;
        let state = DiscState::new(vec![Vec2::new(rho, 0.0)], vec![1.0]).unwrap();
        let v = disc_velocity_field(&state).unwrap();
        let expected = rho / (2.0 * PI * (1.0 - rho * rho));
        assert!(v[0].x.abs() < 1e-15);
        assert!(
            (v[0].y - expected).abs() < 1e-14,
            "v_y = {} vs {expected}",
            v[0].y
        );
    }

    #[test]
    fn near_center_pair_matches_planar_rotation_sense() {
        // Two equal positive vortices near the center rotate like the
        // planar pair (counter-clockwise): the left one moves down.
        let d = 1e-3;
        let state = DiscState::new(
            vec![Vec2::new(-d / 2.0, 0.0), Vec2::new(d / 2.0, 0.0)],
            vec![1.0, 1.0],
        )
        .unwrap();
        let v = disc_velocity_field(&state).unwrap();
        assert!(v[0].y < 0.0 && v[1].y > 0.0, "{v:?}");
        // Boundary correction is tiny here: planar speed 1/(2 pi d).
        let planar = 1.0 / (2.0 * PI * d);
        assert!((v[1].y - planar).abs() / planar < 1e-2);
    }

    #[test]
    fn mirror_pair_velocities_reflect() {
        let rho = 0.4;
        let state = DiscState::new(
            vec![Vec2::new(rho, 0.0), Vec2::new(-rho, 0.0)],
            vec![1.0, -1.0],
        )
        .unwrap();
        let v = disc_velocity_field(&state).unwrap();
        // The configuration is invariant under reflection across the y-axis
        // combined with intensity flip; velocities must satisfy
        // v2 = (-v1.x, v1.y).
        assert!((v[1] - Vec2::new(-v[0].x, v[0].y)).norm() < 1e-14, "{v:?}");
    }

    #[test]
    fn single_vortex_radius_conserved_over_revolution() {
        let rho = 0.6;
        let omega = 1.0 / (2.0 * PI * (1.0 - rho * rho));
        let period = 2.0 * PI * rho / (rho * omega);
        let state = DiscState::new(vec![Vec2::new(rho, 0.0)], vec![1.0]).unwrap();
        let record = integrate(
            &state.to_vortex_state(),
            0.0,
            period,
            &IntegratorOptions::default(),
            &DiscDynamics,
            &[],
        )
        .unwrap();
        assert_eq!(record.termination, Termination::ReachedFinalTime);
        for s in &record.states {
            assert!((s.positions()[0].norm() - rho).abs() <= 1e-8);
        }
        // One full revolution returns to the start.
        let p = record.final_state().positions()[0];
        assert!((p - Vec2::new(rho, 0.0)).norm() < 1e-6, "end = {p:?}");
    }

    #[test]
    fn disc_hamiltonian_conserved() {
        let state = DiscState::new(
            vec![
                Vec2::new(0.3, 0.1),
                Vec2::new(-0.2, 0.25),
                Vec2::new(0.05, -0.35),
            ],
            vec![1.0, 0.8, 1.3],
        )
        .unwrap();
        let h0 = disc_hamiltonian(&state).unwrap();
        let record = integrate(
            &state.to_vortex_state(),
            0.0,
            1.0,
            &IntegratorOptions::default(),
            &DiscDynamics,
            &[],
        )
        .unwrap();
        assert_eq!(record.termination, Termination::ReachedFinalTime);
        for s in &record.states {
            let disc_state =
                DiscState::new(s.positions().to_vec(), s.intensities().to_vec()).unwrap();
            let h = disc_hamiltonian(&disc_state).unwrap();
            assert!(
                (h - h0).abs() <= 1e-9 * h0.abs().max(1.0),
                "H = {h} vs {h0}"
            );
        }
    }

    #[test]
    fn momentum_conserved_in_disc() {
        // Rotational symmetry of the disc preserves sum a_i |x_i|^2.
        let state = DiscState::new(
            vec![Vec2::new(0.3, 0.1), Vec2::new(-0.2, 0.25)],
            vec![1.0, 0.8],
        )
        .unwrap();
        let record = integrate(
            &state.to_vortex_state(),
            0.0,
            1.0,
            &IntegratorOptions::default(),
            &DiscDynamics,
            &[],
        )
        .unwrap();
        let i0 = record.invariants[0].momentum;
        for s in &record.invariants {
            assert!((s.momentum - i0).abs() <= 1e-9 * i0.abs().max(1.0));
        }
    }

    #[test]
    fn boundary_holder_check_rejects_far_candidate() {
        let sol = crate::selfsimilar::build_collapse(1.0).unwrap();
        // Scale the planar collapse into the disc.
        let scale = 1e-2;
        let positions: Vec<Vec2> = sol
            .initial_state
            .positions()
            .iter()
            .map(|p| *p * scale)
            .collect();
        let state = DiscState::new(positions, sol.initial_state.intensities().to_vec()).unwrap();
        let record = integrate(
            &state.to_vortex_state(),
            0.0,
            1.0,
            &IntegratorOptions::default(),
            &DiscDynamics,
            &[],
        )
        .unwrap();
        assert!(record.collapse_time().is_some());
        let t_c = record.collapse_time().unwrap();
        let err = boundary_holder_check(&record, t_c, 0, Vec2::new(0.5, 0.5), 0.02);
        assert!(matches!(err, Err(Error::NonAdheringCandidate { .. })));
    }

    #[test]
    fn state_rejects_exterior_points() {
        assert!(matches!(
            DiscState::new(vec![Vec2::new(1.2, 0.0)], vec![1.0]),
            Err(Error::OutsideDisc { .. })
        ));
    }
}
