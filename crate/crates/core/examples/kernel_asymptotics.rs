//! The spectral kernel's diagonal jets against their leading-term
//! predictions from the moment constants: dimension counts (Weyl scaling),
//! the plain diagonal, and derivative entries.
//!
//!     cargo run --release --example kernel_asymptotics

use randnodal::ensembles::{
    build_basis, verify_kernel_asymptotics, Manifold, SpectralWindow,
};

fn print_table(
    label: &str,
    manifold: Manifold,
    sweep: &[f64],
    d1: (usize, usize),
    d2: (usize, usize),
    point: [f64; 2],
) -> randnodal::Result<()> {
    let table = verify_kernel_asymptotics(manifold, SpectralWindow::Full, sweep, d1, d2, point)?;
    println!("{label}:");
    println!("{:>10} {:>16} {:>16} {:>12}", "L", "exact", "predicted", "rel_error");
    for row in &table.rows {
        println!(
            "{:>10} {:>16.6} {:>16.6} {:>12.3e}",
            row.l, row.exact, row.predicted, row.rel_error
        );
    }
    println!("  errors decreasing: {}\n", table.decreasing);
    Ok(())
}

fn main() -> randnodal::Result<()> {
    println!("dimension against the leading-order count c0 Vol L^(n/2):");
    for (manifold, l) in [
        (Manifold::Circle, 1600.0),
        (Manifold::Torus2, 400.0),
        (Manifold::Sphere2, 420.0),
    ] {
        let basis = build_basis(manifold, l, SpectralWindow::Full)?;
        println!(
            "  {manifold:?} at L = {l}: N_L = {:>5}, Weyl ratio = {:.4}",
            basis.dimension(),
            basis.weyl_ratio()?
        );
    }
    println!();

    print_table(
        "torus kernel diagonal e_L(x,x) vs c0 L",
        Manifold::Torus2,
        &[100.0, 900.0, 10_000.0],
        (0, 0),
        (0, 0),
        [0.4, 1.1],
    )?;
    print_table(
        "torus (d/dtheta, d/dtheta) entry vs c1 L^2",
        Manifold::Torus2,
        &[100.0, 900.0, 10_000.0],
        (1, 0),
        (1, 0),
        [0.4, 1.1],
    )?;
    print_table(
        "circle diagonal vs c0 sqrt(L)",
        Manifold::Circle,
        &[400.0, 2_500.0, 10_000.0],
        (0, 0),
        (0, 0),
        [0.7, 0.0],
    )?;
    print_table(
        "sphere diagonal vs c0 L (addition theorem makes it exactly constant)",
        Manifold::Sphere2,
        &[110.0, 930.0, 9_900.0],
        (0, 0),
        (0, 0),
        [std::f64::consts::FRAC_PI_2, 0.0],
    )?;

    // Odd-parity derivative pairs vanish identically on the diagonal.
    let basis = build_basis(Manifold::Torus2, 100.0, SpectralWindow::Full)?;
    let odd = basis.kernel_diag([0.9, 2.2], (1, 0), (0, 0))?;
    println!("odd-parity entry (d/dtheta, id) on the torus: {odd:.3e}");
    Ok(())
}
