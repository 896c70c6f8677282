//! Pure evaluation of the generalized point-vortex vector field and its
//! conserved quantities.
//!
//! The interaction kernel is the radial profile `K_alpha` whose derivative is
//! `r^{-alpha}`; `alpha = 1` is the Euler case, `alpha = 3 - 2s` corresponds
//! to the surface quasi-geostrophic family with fractional exponent `s`.
//! All functions here are pure: they borrow immutable data and are safe to
//! call concurrently.

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Pairwise distances below this floor are reported as a typed singularity
/// instead of letting NaNs propagate.
pub const DISTANCE_FLOOR: f64 = 1e-30;

/// Hard cap on the 2^N subset scan of [`degeneracy_params`].
pub const SUBSET_ENUMERATION_LIMIT: usize = 25;

/// Relative tolerance under which a cluster intensity sum counts as neutral.
pub const NEUTRAL_TOLERANCE: f64 = 1e-14;

/// Radial interaction profile with derivative `r^{-alpha}`, normalized so
/// that the profile vanishes at `r = 1`.
///
/// The normalization makes the profile continuous in `alpha` (the `alpha = 1`
/// logarithm is the limit of the general formula) and is the constant choice
/// left free in the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelProfile {
    alpha: f64,
}

impl KernelProfile {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::NegativeAlpha { alpha });
        }
        Ok(KernelProfile { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `K_alpha(r)` with `K_alpha(1) = 0`: `ln r` at `alpha = 1`, else
    /// `(r^{1-alpha} - 1)/(1 - alpha)`.
    pub fn value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::KernelRadius { r });
        }
        let eps = 1.0 - self.alpha;
        if eps == 0.0 {
            Ok(r.ln())
        } else {
            // expm1 keeps the formula accurate arbitrarily close to alpha = 1.
            Ok(f64::exp_m1(eps * r.ln()) / eps)
        }
    }

    /// `d/dr K_alpha(r) = r^{-alpha}`.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::KernelRadius { r });
        }
        Ok(r.powf(-self.alpha))
    }
}

/// Kernel profile evaluation; see [`KernelProfile::value`].
pub fn kernel_value(alpha: f64, r: f64) -> Result<f64> {
    KernelProfile::new(alpha)?.value(r)
}

/// Kernel exponent of the surface quasi-geostrophic model with fractional
/// Laplacian exponent `s in (0, 1)`: `alpha = 3 - 2s`. The limit `s -> 1`
/// recovers the Euler case `alpha = 1`.
pub fn sqg_alpha(s: f64) -> f64 {
    3.0 - 2.0 * s
}

/// Instantaneous configuration: `N` planar positions, `N` nonzero
/// intensities and the kernel exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct VortexState {
    positions: Vec<Vec2>,
    intensities: Vec<f64>,
    alpha: f64,
}

impl VortexState {
    /// Validates the configuration: at least one vortex, nonzero finite
    /// intensities, pairwise distinct positions (coincident positions are an
    /// already-collapsed state) and `alpha >= 0`.
    pub fn new(positions: Vec<Vec2>, intensities: Vec<f64>, alpha: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptySystem);
        }
        if positions.len() != intensities.len() {
            return Err(Error::LengthMismatch {
                positions: positions.len(),
                intensities: intensities.len(),
            });
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::NegativeAlpha { alpha });
        }
        for (index, a) in intensities.iter().enumerate() {
            if !a.is_finite() || !positions[index].is_finite() {
                return Err(Error::NonFiniteInput);
            }
            if *a == 0.0 {
                return Err(Error::ZeroIntensity { index });
            }
        }
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                if positions[i] == positions[j] {
                    return Err(Error::CoincidentPositions { i, j });
                }
            }
        }
        Ok(VortexState {
            positions,
            intensities,
            alpha,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same intensities and exponent, new positions. Skips the coincidence
    /// check: integration states may get arbitrarily close to collapse.
    pub fn with_positions(&self, positions: Vec<Vec2>) -> VortexState {
        debug_assert_eq!(positions.len(), self.intensities.len());
        VortexState {
            positions,
            intensities: self.intensities.clone(),
            alpha: self.alpha,
        }
    }

    pub fn min_pair_distance(&self) -> f64 {
        min_pair_distance(&self.positions)
    }
}

/// Minimal pairwise distance of a point family (`+inf` for a single point).
pub fn min_pair_distance(points: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.min(points[i].distance(points[j]));
        }
    }
    best
}

fn pair_distance_checked(points: &[Vec2], i: usize, j: usize) -> Result<f64> {
    let d = points[i].distance(points[j]);
    if d < DISTANCE_FLOOR {
        return Err(Error::SingularConfiguration { i, j, dist: d });
    }
    Ok(d)
}

/// `|x|^{alpha+1}` from the squared norm, with an exact fast path for the
/// Euler exponent.
fn dist_pow_alpha_plus_one(d_sq: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        d_sq
    } else {
        d_sq.powf(0.5 * (alpha + 1.0))
    }
}

/// Velocity of every vortex under the mutual interaction field:
/// component `i` is `sum_{j != i} a_j (x_i - x_j)^perp / |x_i - x_j|^{alpha+1}`.
pub fn velocity_field(state: &VortexState) -> Result<Vec<Vec2>> {
    velocity_field_at(state.positions(), state.intensities(), state.alpha())
}

/// [`velocity_field`] on raw position/intensity slices (used by the
/// integrator, which steps positions without re-validating a state).
pub fn velocity_field_at(positions: &[Vec2], intensities: &[f64], alpha: f64) -> Result<Vec<Vec2>> {
    let mut out = vec![Vec2::default(); positions.len()];
    velocity_field_into(positions, intensities, alpha, &mut out)?;
    Ok(out)
}

/// [`velocity_field_at`] writing into a caller-provided buffer.
pub fn velocity_field_into(
    positions: &[Vec2],
    intensities: &[f64],
    alpha: f64,
    out: &mut [Vec2],
) -> Result<()> {
    let n = positions.len();
    out.fill(Vec2::default());
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
            let kick = sep.perp() / dist_pow_alpha_plus_one(d_sq, alpha);
            out[i] += intensities[j] * kick;
            out[j] -= intensities[i] * kick;
        }
    }
    Ok(())
}

/// Interaction energy `1/2 sum_{i != j} a_i a_j K_alpha(|x_i - x_j|)`.
pub fn hamiltonian(state: &VortexState) -> Result<f64> {
    let kernel = KernelProfile::new(state.alpha())?;
    let (positions, intensities) = (state.positions(), state.intensities());
    let mut h = 0.0;
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let d = pair_distance_checked(positions, i, j)?;
            h += intensities[i] * intensities[j] * kernel.value(d)?;
        }
    }
    Ok(h)
}

/// Intensity-weighted first moment `M = sum a_i x_i`, conserved by the flow.
pub fn vorticity_vector(state: &VortexState) -> Vec2 {
    let mut m = Vec2::default();
    for (x, a) in state.positions().iter().zip(state.intensities()) {
        m += *a * *x;
    }
    m
}

/// Second moment `I = sum a_i |x_i|^2`, conserved by the flow.
pub fn momentum(state: &VortexState) -> f64 {
    state
        .positions()
        .iter()
        .zip(state.intensities())
        .map(|(x, a)| a * x.norm_sq())
        .sum()
}

/// `sum_{i != j} a_i a_j |x_i - x_j|^p` together with the sum of the absolute
/// values of its terms (the natural scale for residual checks).
pub fn intensity_weighted_moment(state: &VortexState, exponent: f64) -> (f64, f64) {
    let (positions, intensities) = (state.positions(), state.intensities());
    let mut value = 0.0;
    let mut scale = 0.0;
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let d_sq = (positions[i] - positions[j]).norm_sq();
            let term = 2.0 * intensities[i] * intensities[j] * d_sq.powf(0.5 * exponent);
            value += term;
            scale += term.abs();
        }
    }
    (value, scale)
}

/// Pair moment `L = sum_{i != j} a_i a_j |x_i - x_j|^2`; equals
/// `2 (sum a_i) I - 2 |M|^2` identically.
pub fn pair_moment(state: &VortexState) -> f64 {
    intensity_weighted_moment(state, 2.0).0
}

/// Scaled residuals of the two candidate scale-invariance conditions on a
/// configuration: the weighted moments of exponent `-alpha` and of exponent
/// `1 - alpha`.
///
/// Exactly one of them is expected to vanish on a genuine self-similar
/// collapse configuration; both are reported so the verification suite can
/// decide empirically rather than by fiat.
#[derive(Clone, Copy, Debug)]
pub struct MomentResiduals {
    /// `|sum a_i a_j l_ij^{-alpha}|` over the sum of absolute terms.
    pub inverse_alpha: f64,
    /// `|sum a_i a_j l_ij^{1-alpha}|` over the sum of absolute terms.
    pub one_minus_alpha: f64,
}

pub fn collapse_moment_residuals(state: &VortexState) -> MomentResiduals {
    let (v0, s0) = intensity_weighted_moment(state, -state.alpha());
    let (v1, s1) = intensity_weighted_moment(state, 1.0 - state.alpha());
    MomentResiduals {
        inverse_alpha: v0.abs() / s0.max(f64::MIN_POSITIVE),
        one_minus_alpha: v1.abs() / s1.max(f64::MIN_POSITIVE),
    }
}

/// Conserved quantities sampled along a trajectory.
#[derive(Clone, Copy, Debug)]
pub struct InvariantSample {
    pub hamiltonian: f64,
    pub vorticity_vector: Vec2,
    pub momentum: f64,
    pub pair_moment: f64,
    pub min_pair_distance: f64,
}

impl InvariantSample {
    pub fn of(state: &VortexState) -> Result<InvariantSample> {
        Ok(InvariantSample {
            hamiltonian: hamiltonian(state)?,
            vorticity_vector: vorticity_vector(state),
            momentum: momentum(state),
            pair_moment: pair_moment(state),
            min_pair_distance: state.min_pair_distance(),
        })
    }
}

/// Degeneracy parameters of an intensity family.
///
/// `min_subcluster_sum` (`A0`) is the minimum of `|sum_{k in P} a_k|` over
/// nonempty strict subsets; `min_cluster_sum` (`A`) additionally admits the
/// full set. `A0 > 0` is the non-neutral sub-clusters hypothesis, `A > 0`
/// the non-neutral clusters hypothesis.
#[derive(Clone, Copy, Debug)]
pub struct DegeneracyParams {
    /// `A = min(A0, |sum a_i|)`.
    pub min_cluster_sum: f64,
    /// `A0`, minimum over nonempty strict subsets.
    pub min_subcluster_sum: f64,
    /// `a = sum |a_i|`.
    pub intensity_abs_sum: f64,
    /// `a0 = |sum a_i|`.
    pub total_abs: f64,
}

/// Enumerates every nonempty subset of the intensities (Gray-code walk, so
/// one add per subset) and reports the degeneracy parameters.
///
/// Refuses `N > 25`: the scan is 2^N and the operation does not approximate.
/// For `N = 1` there is no nonempty strict subset and `A0` degenerates to
/// `|a_1|`.
pub fn degeneracy_params(intensities: &[f64]) -> Result<DegeneracyParams> {
    let n = intensities.len();
    if n == 0 {
        return Err(Error::EmptySystem);
    }
    if n > SUBSET_ENUMERATION_LIMIT {
        return Err(Error::SubsetSizeLimit {
            n,
            max: SUBSET_ENUMERATION_LIMIT,
        });
    }
    for (index, a) in intensities.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if *a == 0.0 {
            return Err(Error::ZeroIntensity { index });
        }
    }

    let total: f64 = intensities.iter().sum();
    let total_abs = total.abs();
    let intensity_abs_sum: f64 = intensities.iter().map(|a| a.abs()).sum();

    let exact_subset_sum = |mask: u64| -> f64 {
        let mut s = 0.0;
        for (k, a) in intensities.iter().enumerate() {
            if mask >> k & 1 == 1 {
                s += a;
            }
        }
        s
    };

    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut min_strict = f64::INFINITY;
    let mut running = 0.0_f64;
    let mut gray_prev = 0u64;
    // Slack absorbing the rounding drift of the running Gray-code sum;
    // candidate minima are re-summed exactly before being accepted.
    let slack = 1e-9 * intensity_abs_sum.max(1.0);
    for k in 1..=full {
        let gray = k ^ (k >> 1);
        let bit = (gray ^ gray_prev).trailing_zeros() as usize;
        if gray >> bit & 1 == 1 {
            running += intensities[bit];
        } else {
            running -= intensities[bit];
        }
        gray_prev = gray;
        if gray != full && running.abs() < min_strict + slack {
            min_strict = min_strict.min(exact_subset_sum(gray).abs());
        }
    }
    let min_subcluster_sum = if min_strict.is_finite() {
        min_strict
    } else {
        total_abs // N = 1: no strict nonempty subset
    };

    Ok(DegeneracyParams {
        min_cluster_sum: min_subcluster_sum.min(total_abs),
        min_subcluster_sum,
        intensity_abs_sum,
        total_abs,
    })
}

/// Deterministic, well-separated random configuration: positions drawn in
/// the square `[-1.5, 1.5]^2` with pairwise separation at least 0.5, and
/// positive intensities in `[0.25, 1.25]`.
///
/// Positive intensities keep every sub-cluster non-neutral, so these states
/// exercise the conservation and quasi-preservation bounds without risking a
/// collapse on unit-time horizons.
pub fn seeded_random_state(seed: u64, n: usize, alpha: f64) -> Result<VortexState> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<Vec2> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while positions.len() < n {
        let p = Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        if positions.iter().all(|q| q.distance(p) > 0.5) {
            positions.push(p);
        }
        attempts += 1;
        if attempts > 100_000 {
            positions.clear();
            attempts = 0;
        }
    }
    let intensities = (0..n).map(|_| rng.gen_range(0.25..1.25)).collect();
    VortexState::new(positions, intensities, alpha)
}

/// Builds a verified membership mask out of a subset of vortex indices
/// (treated as a set: duplicates are idempotent).
fn subset_mask(n: usize, subset: &[usize]) -> Result<Vec<bool>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut mask = vec![false; n];
    for &index in subset {
        if index >= n {
            return Err(Error::SubsetIndexRange { index, n });
        }
        mask[index] = true;
    }
    Ok(mask)
}

fn subset_intensity_sum(state: &VortexState, mask: &[bool]) -> Result<f64> {
    let sum: f64 = state
        .intensities()
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(a, _)| *a)
        .sum();
    let abs_sum: f64 = state.intensities().iter().map(|a| a.abs()).sum();
    if sum.abs() <= NEUTRAL_TOLERANCE * abs_sum {
        return Err(Error::NeutralCluster { sum });
    }
    Ok(sum)
}

/// Center of vorticity `B_P = (sum_{i in P} a_i)^{-1} sum_{i in P} a_i x_i`
/// of a non-neutral cluster.
pub fn cluster_barycenter(state: &VortexState, subset: &[usize]) -> Result<Vec2> {
    let mask = subset_mask(state.len(), subset)?;
    let sum = subset_intensity_sum(state, &mask)?;
    let mut b = Vec2::default();
    for i in 0..state.len() {
        if mask[i] {
            b += state.intensities()[i] * state.positions()[i];
        }
    }
    Ok(b / sum)
}

/// Instantaneous velocity of the cluster barycenter, computed from the
/// vector field. Intra-cluster interactions cancel pairwise; only the
/// cross terms survive.
pub fn cluster_barycenter_velocity(state: &VortexState, subset: &[usize]) -> Result<Vec2> {
    let mask = subset_mask(state.len(), subset)?;
    let sum = subset_intensity_sum(state, &mask)?;
    let velocities = velocity_field(state)?;
    let mut v = Vec2::default();
    for i in 0..state.len() {
        if mask[i] {
            v += state.intensities()[i] * velocities[i];
        }
    }
    Ok(v / sum)
}

/// Upper bound on the barycenter speed of a cluster:
/// `sum_{i in P} sum_{j not in P} C0 / |x_i - x_j|^alpha` with
/// `C0 = a.max_j|a_j| / |sum_{k in P} a_k|`.
///
/// The constant comes from expanding `dB_P/dt` and bounding each cross term
/// by `max|a| . a` over the cluster intensity sum. For the full index set the
/// outer sum is empty and the bound is exactly zero.
pub fn barycenter_speed_bound(state: &VortexState, subset: &[usize]) -> Result<f64> {
    let mask = subset_mask(state.len(), subset)?;
    let sum = subset_intensity_sum(state, &mask)?;
    let abs_sum: f64 = state.intensities().iter().map(|a| a.abs()).sum();
    let max_abs = state
        .intensities()
        .iter()
        .fold(0.0_f64, |m, a| m.max(a.abs()));
    let c0 = abs_sum * max_abs / sum.abs();
    let alpha = state.alpha();
    let positions = state.positions();
    let mut bound = 0.0;
    for i in 0..state.len() {
        if !mask[i] {
            continue;
        }
        for j in 0..state.len() {
            if mask[j] {
                continue;
            }
            let d = pair_distance_checked(positions, i, j)?;
            bound += c0 / d.powf(alpha);
        }
    }
    Ok(bound)
}
