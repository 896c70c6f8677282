//! Fit the Hölder exponent of every vortex trajectory at the time of
//! collapse and compare against the predicted 1/(alpha+1).
//!
//! Usage: `cargo run --example holder_exponent [alpha]` (default 2.0, the
//! quasi-geostrophic case with s = 1/2, whose exponent is 1/3).

use alpha_vortex::analysis::{holder_fit, relative_holder_fit};
use alpha_vortex::integrate::{integrate, PlaneDynamics};
use alpha_vortex::selfsimilar::build_collapse;

fn main() {
    let alpha: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("alpha must be a number"))
        .unwrap_or(2.0);

    let solution = build_collapse(alpha).unwrap();
    let record = integrate(
        &solution.initial_state,
        0.0,
        1.5 * solution.collapse_time,
        &solution.collapse_run_options(),
        &PlaneDynamics::new(alpha).unwrap(),
        &[],
    )
    .unwrap();
    let t_c = record.collapse_time().expect("run collapses");
    let expected = 1.0 / (alpha + 1.0);

    println!("alpha = {alpha}, expected exponent 1/(alpha+1) = {expected:.9}");
    println!("\nper-vortex fits (limit point extrapolated from the data):");
    for index in 0..3 {
        let fit = holder_fit(&record, t_c, index).unwrap();
        let limit = fit.limit_point.unwrap();
        println!(
            "  vortex {index}: beta = {:.9}  (dev {:+.2e}), limit point ({:+.3e}, {:+.3e}), {} samples, residual {:.1e}",
            fit.exponent,
            fit.exponent - expected,
            limit.x,
            limit.y,
            fit.samples_used,
            fit.fit_residual
        );
    }
    println!("\npair separation fits:");
    for pair in [(0, 1), (0, 2), (1, 2)] {
        let fit = relative_holder_fit(&record, t_c, pair).unwrap();
        println!(
            "  |x{} - x{}|: beta = {:.9}  (dev {:+.2e})",
            pair.0,
            pair.1,
            fit.exponent,
            fit.exponent - expected
        );
    }
}
