//! Vortices in the unit disc: single-vortex precession on an exact circle,
//! Green/Robin function values, and a planar collapse configuration scaled
//! into the disc.
//!
//! Usage: `cargo run --example disc_vortex`.

use alpha_vortex::disc::{
    boundary_holder_check, disc_hamiltonian, disc_velocity_field, green_value, robin_diagonal,
    DiscDynamics, DiscState,
};
use alpha_vortex::geom::Vec2;
use alpha_vortex::integrate::{integrate, IntegratorOptions};
use alpha_vortex::selfsimilar::build_collapse;
use std::f64::consts::PI;

fn main() {
    // Green and Robin values.
    let x = Vec2::new(0.3, 0.1);
    let y = Vec2::new(-0.2, 0.4);
    println!("G(x, y)      = {:.12}", green_value(x, y).unwrap());
    println!("G(y, x)      = {:.12}", green_value(y, x).unwrap());
    println!("gamma(x, x)  = {:.12}", robin_diagonal(x).unwrap());

    // Single vortex: precession speed and radius conservation.
    let rho = 0.6;
    let single = DiscState::new(vec![Vec2::new(rho, 0.0)], vec![1.0]).unwrap();
    let v = disc_velocity_field(&single).unwrap();
    println!(
        "\nsingle vortex at rho = {rho}: v = ({:+.6e}, {:+.6e}), expected (0, {:+.6e})",
        v[0].x,
        v[0].y,
        rho / (2.0 * PI * (1.0 - rho * rho))
    );
    let period = (2.0 * PI) * (2.0 * PI * (1.0 - rho * rho));
    let record = integrate(
        &single.to_vortex_state(),
        0.0,
        period,
        &IntegratorOptions::default(),
        &DiscDynamics,
        &[],
    )
    .unwrap();
    let drift = record
        .states
        .iter()
        .map(|s| (s.positions()[0].norm() - rho).abs())
        .fold(0.0f64, f64::max);
    println!("radius drift over one revolution: {drift:.3e}");

    // Scaled-in planar collapse.
    let solution = build_collapse(1.0).unwrap();
    let scale = 1e-2;
    let positions: Vec<Vec2> = solution
        .initial_state
        .positions()
        .iter()
        .map(|p| *p * scale)
        .collect();
    let state = DiscState::new(positions, solution.initial_state.intensities().to_vec()).unwrap();
    let h0 = disc_hamiltonian(&state).unwrap();
    let predicted = 2.0 * PI * scale * scale * solution.collapse_time;
    let options = IntegratorOptions {
        collapse_radius: solution.collapse_run_options().collapse_radius * scale,
        ..Default::default()
    };
    let collapse = integrate(
        &state.to_vortex_state(),
        0.0,
        2.0 * predicted,
        &options,
        &DiscDynamics,
        &[],
    )
    .unwrap();
    let t_c = collapse
        .collapse_time()
        .expect("collapse persists in the disc");
    println!("\nscaled-in collapse (scale {scale}):");
    println!("  disc energy at start: {h0:+.9e}");
    println!("  t_c = {t_c:.9e}  (planar prediction {predicted:.9e})");
    let limit = collapse.final_state().positions()[0];
    let fit = boundary_holder_check(&collapse, t_c, 0, limit, 0.02).unwrap();
    println!(
        "  vortex 0 exponent at collapse: {:.6} (expected 0.5)",
        fit.exponent
    );
}
