//! Constructive partition of point families into clusters certified by
//! intra/inter distance bounds, and identification of collision clusters
//! from collapsed trajectories.
//!
//! The two building blocks mirror a covering argument: [`balls_cover`]
//! iteratively removes representatives that sit closer than `delta/kappa`
//! while inflating `delta` by `2/kappa`, and [`cluster_partition`] turns the
//! cover into a genuine partition whose inter-cluster distances exceed the
//! intra-cluster diameter by the factor `1/kappa`. Every output can be
//! re-checked directly against the input points; nothing needs to be trusted.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::integrate::TrajectoryRecord;

/// Result of the covering pass: `delta`, the surviving representatives and
/// the removal sequence that produced them.
#[derive(Clone, Debug)]
pub struct BallsCover {
    pub delta: f64,
    /// Ascending indices of the representative points.
    pub representatives: Vec<usize>,
    /// `(kept, removed)` pairs in removal order.
    pub removals: Vec<(usize, usize)>,
}

/// Covers all `eps`-balls around the points by `delta`-balls centered on a
/// subset of representatives that are pairwise at least `delta/kappa` apart,
/// with `eps <= delta < (kappa/2)^{-N} eps`.
///
/// While two representatives violate the separation, the higher index of the
/// lexicographically smallest violating pair is dropped and `delta` inflates
/// by `2/kappa`; this terminates in at most `N` rounds. The tie-break makes
/// the output deterministic.
pub fn balls_cover(points: &[Vec2], eps: f64, kappa: f64) -> Result<BallsCover> {
    if points.is_empty() {
        return Err(Error::EmptySystem);
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::NonPositiveScale { value: eps });
    }
    if !(kappa > 0.0 && kappa <= 0.5) {
        return Err(Error::KappaRange {
            kappa,
            interval: "(0, 1/2]",
        });
    }

    let mut reps: Vec<usize> = (0..points.len()).collect();
    let mut delta = eps;
    let mut removals = Vec::new();
    loop {
        let threshold = delta / kappa;
        let mut violation = None;
        'scan: for (a, &i) in reps.iter().enumerate() {
            for &j in reps.iter().skip(a + 1) {
                if points[i].distance(points[j]) < threshold {
                    violation = Some((i, j));
                    break 'scan;
                }
            }
        }
        match violation {
            None => break,
            Some((i, j)) => {
                reps.retain(|&k| k != j);
                removals.push((i, j));
                delta *= 2.0 / kappa;
            }
        }
    }
    debug_assert!(removals.len() < points.len());
    Ok(BallsCover {
        delta,
        representatives: reps,
        removals,
    })
}

/// A partition of `{0, .., N-1}` certified by a separation scale `delta` and
/// ratio `kappa`: points inside one part are within `delta` of each other,
/// points of different parts at least `delta/kappa` apart.
#[derive(Clone, Debug)]
pub struct ClusterPartition {
    /// Disjoint covering parts; each sorted ascending, parts ordered by
    /// their smallest element.
    pub parts: Vec<Vec<usize>>,
    pub delta: f64,
    pub kappa: f64,
}

impl ClusterPartition {
    /// Re-derives every certified inequality directly from the points:
    /// partition structure, the intra bound, the inter bound, and
    /// `delta in [1/2 (kappa/8)^N d, d)`. Returns a description of the first
    /// violation, if any.
    pub fn certify(&self, points: &[Vec2], d: f64) -> std::result::Result<(), String> {
        let n = points.len();
        let mut seen = vec![false; n];
        for part in &self.parts {
            if part.is_empty() {
                return Err("empty part".into());
            }
            for &i in part {
                if i >= n {
                    return Err(format!("index {i} out of range"));
                }
                if seen[i] {
                    return Err(format!("index {i} appears twice"));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("partition does not cover every index".into());
        }
        for part in &self.parts {
            for (a, &i) in part.iter().enumerate() {
                for &j in part.iter().skip(a + 1) {
                    let dist = points[i].distance(points[j]);
                    if dist > self.delta {
                        return Err(format!(
                            "intra violation: |x{i} - x{j}| = {dist} > delta = {}",
                            self.delta
                        ));
                    }
                }
            }
        }
        let inter_floor = self.delta / self.kappa;
        for (a, part) in self.parts.iter().enumerate() {
            for other in self.parts.iter().skip(a + 1) {
                for &i in part {
                    for &j in other {
                        let dist = points[i].distance(points[j]);
                        if dist < inter_floor {
                            return Err(format!(
                                "inter violation: |x{i} - x{j}| = {dist} < {inter_floor}"
                            ));
                        }
                    }
                }
            }
        }
        let lower = 0.5 * (self.kappa / 8.0).powi(n as i32) * d;
        if !(self.delta >= lower && self.delta < d) {
            return Err(format!("delta = {} outside [{lower}, {d})", self.delta));
        }
        Ok(())
    }
}

/// Partitions the points at target scale `d` with separation ratio `kappa`.
///
/// Follows the covering construction: an `eps = 1/2 (kappa/8)^N d` cover at
/// the internal ratio `kappa' = (2/kappa + 2)^{-1}` is computed first, the
/// parts are the `delta'`-balls around the surviving representatives, and
/// the certified scale is `delta = 2 delta'`.
pub fn cluster_partition(points: &[Vec2], d: f64, kappa: f64) -> Result<ClusterPartition> {
    if points.is_empty() {
        return Err(Error::EmptySystem);
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::NonPositiveScale { value: d });
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::KappaRange {
            kappa,
            interval: "(0, 1)",
        });
    }
    let n = points.len();
    // (kappa/8)^N can underflow for very large families; the partition is
    // still valid with the smallest positive scale.
    let eps = (0.5 * (kappa / 8.0).powi(n as i32) * d).max(f64::MIN_POSITIVE);
    let inner_kappa = 1.0 / (2.0 / kappa + 2.0);
    let cover = balls_cover(points, eps, inner_kappa)?;
    let half_delta = cover.delta;
    let delta = 2.0 * half_delta;

    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); cover.representatives.len()];
    for j in 0..n {
        let mut owner = None;
        for (slot, &rep) in cover.representatives.iter().enumerate() {
            if points[j].distance(points[rep]) <= half_delta {
                owner = Some(slot);
                break;
            }
        }
        // Covering guarantee of balls_cover: every point sits within
        // delta' - eps of a representative.
        let slot = owner.expect("covering property violated");
        parts[slot].push(j);
    }
    parts.sort_by_key(|p| p[0]);
    Ok(ClusterPartition {
        parts,
        delta,
        kappa,
    })
}

/// Collision clusters extracted from a collapsed trajectory, together with
/// the empirical inter-cluster separation floor over the whole record.
#[derive(Clone, Debug)]
pub struct CollisionClusters {
    pub parts: Vec<Vec<usize>>,
    /// Minimal distance observed between vortices of different clusters
    /// over the entire record; `+inf` when everything collapses together.
    pub separation_floor: f64,
    /// Pair-grouping threshold that was applied (twice the collapse radius).
    pub threshold: f64,
}

/// Groups vortices that approach each other within twice the collapse
/// radius over the final `window` of time before the collapse.
///
/// The asymptotic statement (distances inside a collision cluster tend to
/// zero, distances across clusters stay bounded below) is replaced by this
/// finite surrogate; it is validated on constructed collapses.
pub fn collision_clusters(record: &TrajectoryRecord, window: f64) -> Result<CollisionClusters> {
    let Some(t_collapse) = record.collapse_time() else {
        return Err(Error::NoCollapse);
    };
    if !(window > 0.0) {
        return Err(Error::NonPositiveScale { value: window });
    }
    let n = record.states[0].len();
    let threshold = 2.0 * record.options.collapse_radius;
    let start = t_collapse - window;

    // Union-find over vortex indices.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    for i in 0..n {
        for j in (i + 1)..n {
            let mut closest = f64::INFINITY;
            for (t, state) in record.times.iter().zip(&record.states) {
                if *t >= start {
                    closest = closest.min(state.positions()[i].distance(state.positions()[j]));
                }
            }
            if closest <= threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }

    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(slot) => parts[slot].push(i),
            None => {
                root_slot[r] = Some(parts.len());
                parts.push(vec![i]);
            }
        }
    }
    parts.sort_by_key(|p| p[0]);

    let cluster_of = {
        let mut owner = vec![0usize; n];
        for (slot, part) in parts.iter().enumerate() {
            for &i in part {
                owner[i] = slot;
            }
        }
        owner
    };
    let mut separation_floor = f64::INFINITY;
    for state in &record.states {
        for i in 0..n {
            for j in (i + 1)..n {
                if cluster_of[i] != cluster_of[j] {
                    separation_floor =
                        separation_floor.min(state.positions()[i].distance(state.positions()[j]));
                }
            }
        }
    }

    Ok(CollisionClusters {
        parts,
        separation_floor,
        threshold,
    })
}

/// [`collision_clusters`] with the default window `1e-3` of the collapse
/// time.
pub fn collision_clusters_default(record: &TrajectoryRecord) -> Result<CollisionClusters> {
    let t_collapse = record.collapse_time().ok_or(Error::NoCollapse)?;
    collision_clusters(record, 1e-3 * t_collapse.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(raw: &[(f64, f64)]) -> Vec<Vec2> {
        raw.iter().map(|&(x, y)| Vec2::new(x, y)).collect()
    }

    #[test]
    fn single_point_cover() {
        let cover = balls_cover(&pts(&[(3.0, 4.0)]), 1.0, 0.5).unwrap();
        assert_eq!(cover.delta, 1.0);
        assert_eq!(cover.representatives, vec![0]);
        assert!(cover.removals.is_empty());
    }

    #[test]
    fn separated_pair_keeps_both() {
        let cover = balls_cover(&pts(&[(0.0, 0.0), (10.0, 0.0)]), 1.0, 0.5).unwrap();
        assert_eq!(cover.delta, 1.0);
        assert_eq!(cover.representatives, vec![0, 1]);
    }

    #[test]
    fn near_pair_merges_once() {
        // One removal step: delta inflates to (2/kappa) eps = 4.
        let cover = balls_cover(&pts(&[(0.0, 0.0), (0.5, 0.0)]), 1.0, 0.5).unwrap();
        assert_eq!(cover.delta, 4.0);
        assert_eq!(cover.representatives, vec![0]);
        assert_eq!(cover.removals, vec![(0, 1)]);
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec2> {
        // Half the instances are clustered groups, half uniform.
        if rng.gen_bool(0.5) {
            let groups = rng.gen_range(1..=n);
            let centers: Vec<Vec2> = (0..groups)
                .map(|_| Vec2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)))
                .collect();
            (0..n)
                .map(|_| {
                    let c = centers[rng.gen_range(0..groups)];
                    c + Vec2::new(rng.gen_range(-0.01..0.01), rng.gen_range(-0.01..0.01))
                })
                .collect()
        } else {
            (0..n)
                .map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        }
    }

    #[test]
    fn cover_certified_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let points = random_points(&mut rng, n);
            let eps = 10f64.powf(rng.gen_range(-3.0..1.0));
            let kappa = rng.gen_range(0.05..0.5);
            let cover = balls_cover(&points, eps, kappa).unwrap();

            assert!(cover.removals.len() <= n, "too many iterations");
            assert!(cover.delta >= eps);
            assert!(cover.delta < (kappa / 2.0).powi(-(n as i32)) * eps * (1.0 + 1e-12));
            // Separation of representatives.
            for (a, &i) in cover.representatives.iter().enumerate() {
                for &j in cover.representatives.iter().skip(a + 1) {
                    assert!(points[i].distance(points[j]) >= cover.delta / kappa);
                }
            }
            // Full-ball containment: D(x_i, eps) inside some D(x_rep, delta).
            for i in 0..n {
                let covered = cover
                    .representatives
                    .iter()
                    .any(|&r| points[i].distance(points[r]) + eps <= cover.delta * (1.0 + 1e-12));
                assert!(covered, "ball around point {i} escapes the cover");
            }
            // Removal sequence is a nested chain: no index is removed twice
            // and removals only reference still-live representatives.
            let mut alive = vec![true; n];
            for &(kept, removed) in &cover.removals {
                assert!(alive[kept] && alive[removed]);
                alive[removed] = false;
            }
        }
    }

    #[test]
    fn partition_single_cluster_when_tight() {
        let kappa = 0.5;
        let d = 1.0;
        let eps = 0.5 * (kappa / 8.0_f64).powi(3) * d;
        let points = pts(&[(0.0, 0.0), (eps * 0.4, 0.0), (0.0, eps * 0.4)]);
        let partition = cluster_partition(&points, d, kappa).unwrap();
        assert_eq!(partition.parts.len(), 1);
        partition.certify(&points, d).unwrap();
    }

    #[test]
    fn partition_separates_distant_groups() {
        let kappa = 0.5;
        let d = 1.0;
        let points = pts(&[(0.0, 0.0), (1e-6, 0.0), (7.0, 0.0), (7.0, 1e-6)]);
        let partition = cluster_partition(&points, d, kappa).unwrap();
        assert_eq!(partition.parts.len(), 2);
        assert_eq!(partition.parts[0], vec![0, 1]);
        assert_eq!(partition.parts[1], vec![2, 3]);
        partition.certify(&points, d).unwrap();
    }

    #[test]
    fn partition_certified_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for trial in 0..200 {
            let n = rng.gen_range(1..=6);
            let points = random_points(&mut rng, n);
            let d = 10f64.powf(rng.gen_range(-3.0..1.0));
            let kappa = rng.gen_range(0.05..0.95);
            let partition = cluster_partition(&points, d, kappa).unwrap();
            if let Err(why) = partition.certify(&points, d) {
                panic!("trial {trial}: {why}");
            }
        }
    }

    proptest! {
        #[test]
        fn partition_always_certifies(
            seed in 0u64..5000,
            d_exp in -2.0f64..1.0,
            kappa in 0.05f64..0.95,
            n in 1usize..7,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points = random_points(&mut rng, n);
            let d = 10f64.powf(d_exp);
            let partition = cluster_partition(&points, d, kappa).unwrap();
            prop_assert!(partition.certify(&points, d).is_ok());
        }
    }

    #[test]
    fn collision_clusters_require_collapse() {
        use crate::core::VortexState;
        use crate::integrate::{integrate, IntegratorOptions, PlaneDynamics};
        let state = VortexState::new(
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)],
            vec![1.0, -1.0],
            1.0,
        )
        .unwrap();
        let record = integrate(
            &state,
            0.0,
            1.0,
            &IntegratorOptions::default(),
            &PlaneDynamics::new(1.0).unwrap(),
            &[],
        )
        .unwrap();
        assert!(matches!(
            collision_clusters_default(&record),
            Err(Error::NoCollapse)
        ));
    }

    #[test]
    fn collision_clusters_single_cluster_on_collapse() {
        use crate::integrate::{integrate, PlaneDynamics};
        use crate::selfsimilar::build_collapse;
        let sol = build_collapse(1.0).unwrap();
        let record = integrate(
            &sol.initial_state,
            0.0,
            1.5 * sol.collapse_time,
            &sol.collapse_run_options(),
            &PlaneDynamics::new(1.0).unwrap(),
            &[],
        )
        .unwrap();
        let clusters = collision_clusters_default(&record).unwrap();
        assert_eq!(clusters.parts, vec![vec![0, 1, 2]]);
        assert!(clusters.separation_floor.is_infinite());
    }
}
