//! The expected tangency density three ways: direct simulation, the exact
//! finite-L conditioned-Gaussian formula, and the closed-form limit
//! constant.
//!
//!     cargo run --release --example density_cross_check

use std::f64::consts::PI;

use randnodal::density::{
    asymptotic_constant, ball_closed_form, dtn_constants, finite_l_density, EnsembleFamily,
};
use randnodal::ensembles::{build_basis, Manifold, SpectralWindow};
use randnodal::nodal::{run_trials, EnsembleConfig, MorseFunctionSpec, NodalCounts};
use randnodal::randmat::{expected_det_index, DetIndexEstimate, TraceCoupledGaussian};
use randnodal::symbols::{ball_moments, sphere_limit_moments};

fn main() -> randnodal::Result<()> {
    // Circle: the finite-L formula is a closed form and the limit is
    // 1/(pi sqrt 3) per unit length.
    println!("circle zero density per unit length:");
    for l in [100.0, 400.0, 1600.0] {
        let basis = build_basis(Manifold::Circle, l, SpectralWindow::Full)?;
        let d = finite_l_density(&basis, [0.3, 0.0], None, 0, 1, 1)?;
        println!(
            "  L = {l:>6}: {:.6} / sqrt(L) = {:.6}   (limit 1/(pi sqrt 3) = {:.6})",
            d.per_chart,
            d.per_chart / l.sqrt(),
            1.0 / (PI * 3.0f64.sqrt())
        );
    }

    // Torus at moderate L: simulation vs formula per unit area, away from
    // the critical points of p (the density diverges integrably there, so
    // both sides exclude the same disks).
    let l = 100.0;
    let exclusion = 0.5;
    let mut morse = MorseFunctionSpec::torus_default();
    morse.exclusion_radius = exclusion;
    let config = EnsembleConfig::new(Manifold::Torus2, l);
    let batch = run_trials(&config, Some(&morse), 400, 31)?;
    let (total, se) = batch.mean_stderr(|s| match s.counts {
        NodalCounts::Surface { crit0, crit1, .. } => (crit0 + crit1) as f64,
        _ => unreachable!(),
    });
    let volume = Manifold::Torus2.volume();
    println!("\ntorus tangency density (both indices) at L = {l}:");
    println!("  simulation: {:.4} +- {:.4}", total / volume, se / volume);

    let basis = build_basis(Manifold::Torus2, l, SpectralWindow::Full)?;
    let kept = 1.0 - 4.0 * PI * exclusion * exclusion / volume;
    let mut formula = 0.0;
    let points = [[1.3, 2.0], [2.4, 5.1], [4.1, 1.2], [5.6, 3.9]];
    for &p in &points {
        let d0 = finite_l_density(&basis, p, Some(&morse), 0, 100_000, 8)?;
        let d1 = finite_l_density(&basis, p, Some(&morse), 1, 100_000, 9)?;
        formula += (d0.per_chart + d1.per_chart) / points.len() as f64;
    }
    println!("  formula:    {:.4} (averaged over {} points, kept-area weight {kept:.4})",
        formula * kept, points.len());
    println!("  limit:      {:.4} (2 L / (8 pi^2))", 2.0 * l / (8.0 * PI * PI));

    // Limit constants assembled from moments and expected determinants.
    println!("\nassembled limit constants:");
    let moments = ball_moments(2)?;
    let det = expected_det_index(&TraceCoupledGaussian::new(1, 1.0 / 6.0)?, 0, 400_000, 12)?;
    let full = asymptotic_constant(2, 0, EnsembleFamily::Full, &moments, &det)?;
    println!(
        "  full ensemble, n = 2: {:.7} +- {:.7}   (1/(8 pi^2) = {:.7})",
        full.value,
        full.stderr,
        1.0 / (8.0 * PI * PI)
    );
    let pure = asymptotic_constant(
        2,
        0,
        EnsembleFamily::Pure,
        &sphere_limit_moments(2)?,
        &DetIndexEstimate::exact(1.0 / (2.0 * PI.sqrt())),
    )?;
    println!(
        "  pure ensemble,  n = 2: {:.7}             (x 4 pi = {:.6}, the sphere bound 1/(pi sqrt 2) = {:.6})",
        pure.value,
        pure.value * 4.0 * PI,
        1.0 / (PI * 2.0f64.sqrt())
    );
    let dtn = dtn_constants(2, 0, &moments, &det)?;
    println!(
        "  order-one operator:   same constant {:.7}, but against L^{} instead of L^{}",
        dtn.value, dtn.scaling_exponent, full.scaling_exponent
    );
    println!(
        "  closed form with exact determinant: {:.7}",
        ball_closed_form(2, 6.0f64.sqrt() / (4.0 * PI.sqrt()))
    );
    Ok(())
}
