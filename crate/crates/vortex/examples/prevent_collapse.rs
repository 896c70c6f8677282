//! Compute the explicit prevent-collapse constants for an intensity family
//! and check the eta/2 implication on an integrated run.
//!
//! Usage: `cargo run --example prevent_collapse [seed]`.

use alpha_vortex::analysis::{check_prevent_collapse, prevent_collapse_constant, Verdict};
use alpha_vortex::core::{degeneracy_params, seeded_random_state};
use alpha_vortex::integrate::{integrate, IntegratorOptions, PlaneDynamics};

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(7);
    let alpha = 1.0;
    let state = seeded_random_state(seed, 4, alpha).unwrap();

    let params = degeneracy_params(state.intensities()).unwrap();
    println!("intensities: {:?}", state.intensities());
    println!(
        "degeneracy:  A = {:.6}, A0 = {:.6}, a = {:.6}, a0 = {:.6}",
        params.min_cluster_sum,
        params.min_subcluster_sum,
        params.intensity_abs_sum,
        params.total_abs
    );

    // Drift constant of the barycenter bound for the planar field.
    let max_abs = state
        .intensities()
        .iter()
        .fold(0.0f64, |m, a| m.max(a.abs()));
    let c0 = params.intensity_abs_sum * max_abs / params.min_subcluster_sum;
    let bound = prevent_collapse_constant(state.intensities(), alpha, c0, 0.0).unwrap();
    println!("\nexplicit constants:");
    println!("  kappa   = {:.6e}  (A0 / 17a)", bound.kappa);
    println!("  r       = {:.6e}", bound.r);
    println!("  s       = {:.6e}  (r (kappa/8)^N)", bound.s);
    println!("  C_kappa = {:.6e}", bound.c_kappa);

    let record = integrate(
        &state,
        0.0,
        1.0,
        &IntegratorOptions::default(),
        &PlaneDynamics::new(alpha).unwrap(),
        &[],
    )
    .unwrap();
    let eta = (0.5 * state.min_pair_distance()).min(1.0);
    println!(
        "\nchecking the implication at eta = {eta:.6} over {} samples:",
        record.len()
    );
    match check_prevent_collapse(&record, &bound, eta).unwrap() {
        Verdict::Pass => println!("  PASS: no pair at distance >= eta inside the C_kappa window later dropped under eta/2"),
        Verdict::Fail(ce) => println!("  FAIL: {ce:?}"),
    }
}
