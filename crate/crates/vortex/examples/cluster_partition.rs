//! Partition a point family into certified distance clusters and verify
//! every certified inequality directly against the points.
//!
//! Usage: `cargo run --example cluster_partition [d] [kappa]`.

use alpha_vortex::cluster::{balls_cover, cluster_partition};
use alpha_vortex::geom::Vec2;

fn main() {
    let mut args = std::env::args().skip(1);
    // The guaranteed merge scale is (kappa/8)^N below d, so the group
    // spread must sit far under d and the group separations far above the
    // inflated cover scale for N = 8 points.
    let d: f64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(1e5);
    let kappa: f64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(0.5);

    // Three tight groups plus one outlier.
    let points = vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(1e-6, 2e-6),
        Vec2::new(-2e-6, 1e-6),
        Vec2::new(300.0, 0.0),
        Vec2::new(300.0, 3e-6),
        Vec2::new(-200.0, -400.0),
        Vec2::new(-200.000001, -400.000002),
        Vec2::new(900.0, 900.0),
    ];

    let cover = balls_cover(&points, 1e-3, 0.25).unwrap();
    println!(
        "cover at eps = 1e-3, kappa = 0.25: delta = {:.6e}, representatives {:?} ({} removals)",
        cover.delta,
        cover.representatives,
        cover.removals.len()
    );

    let partition = cluster_partition(&points, d, kappa).unwrap();
    println!("\npartition at d = {d}, kappa = {kappa}:");
    for (k, part) in partition.parts.iter().enumerate() {
        println!("  cluster {k}: {part:?}");
    }
    println!(
        "  delta = {:.6e} (inter-cluster floor {:.6e})",
        partition.delta,
        partition.delta / partition.kappa
    );

    match partition.certify(&points, d) {
        Ok(()) => println!("\ncertified: intra <= delta, inter >= delta/kappa, delta in range"),
        Err(why) => println!("\ncertification FAILED: {why}"),
    }
}
