//! Nodal domains of random spherical-harmonic combinations, counted on a
//! colatitude-longitude mesh with analytically closed polar caps; tangency
//! counts use the height function.
//!
//!     cargo run --release --example sphere_nodal

use randnodal::ensembles::{build_basis, Manifold, SpectralWindow};
use randnodal::nodal::{run_trials, EnsembleConfig, NodalCounts};

fn main() -> randnodal::Result<()> {
    println!("random sections over all degrees with l(l+1) <= L, height Morse function\n");
    println!(
        "{:>6} {:>6} {:>8} {:>10} {:>10} {:>12}",
        "L", "N_L", "trials", "b0 mean", "crit0", "crit0/L"
    );
    for (l, trials) in [(30.0f64, 60), (56.0, 40), (110.0, 25)] {
        let basis = build_basis(Manifold::Sphere2, l, SpectralWindow::Full)?;
        let config = EnsembleConfig::new(Manifold::Sphere2, l);
        let batch = run_trials(&config, None, trials, 99)?;
        let (b0, _) = batch.mean_stderr(|s| match s.counts {
            NodalCounts::Surface { b0, .. } => b0 as f64,
            _ => 0.0,
        });
        let (crit0, _) = batch.mean_stderr(|s| s.primary_count());
        println!(
            "{l:>6} {:>6} {trials:>8} {b0:>10.2} {crit0:>10.2} {:>12.4}",
            basis.dimension(),
            crit0 / l
        );
    }
    println!("\n(the sphere has volume 4 pi, so crit0/L approaches 4 pi / (8 pi^2) = {:.4})",
        1.0 / (2.0 * std::f64::consts::PI));

    // Pure eigenspaces: the classical random spherical harmonic of a single
    // degree; the eigenvalue must be hit exactly.
    let degree = 12u32;
    let l = (degree * (degree + 1)) as f64;
    let config = EnsembleConfig::new(Manifold::Sphere2, l).with_window(SpectralWindow::Pure);
    let batch = run_trials(&config, None, 25, 4)?;
    let (b0, se) = batch.mean_stderr(|s| match s.counts {
        NodalCounts::Surface { b0, .. } => b0 as f64,
        _ => 0.0,
    });
    println!(
        "\npure degree {degree} (L = {l}, 2l+1 = {} modes): mean b0 = {b0:.2} +- {se:.2}, b0/L = {:.4}",
        2 * degree + 1,
        b0 / l
    );
    Ok(())
}
