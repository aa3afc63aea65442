//! Dumps one random nodal curve as a plot-ready segment soup: each line is
//! "theta1 phi1 theta2 phi2" in chart coordinates, suitable for gnuplot
//! (`plot 'nodal_curve.dat' using 1:2:($3-$1):($4-$2) with vectors nohead`).
//!
//!     cargo run --release --example nodal_curves [L] [seed]

use std::f64::consts::TAU;
use std::io::Write;
use std::sync::Arc;

use randnodal::ensembles::{
    build_basis, torus_fft::torus_grid_eval, Manifold, RandomSection, SpectralWindow,
};
use randnodal::nodal::{extract_segments, extract_nodal_components_torus, MarchingInput};

fn main() -> randnodal::Result<()> {
    let mut args = std::env::args().skip(1);
    let l: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(100.0);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);

    let basis = Arc::new(build_basis(Manifold::Torus2, l, SpectralWindow::Full)?);
    let section = RandomSection::draw_for_trial(basis.clone(), seed, 0);

    let n = ((12.0 * l.sqrt()).ceil() as usize).div_ceil(16) * 16;
    let h = TAU / n as f64;
    let values = torus_grid_eval(&section, n, (0, 0), 0.5, 0.0);
    let input = MarchingInput {
        values: &values,
        rows: n,
        cols: n,
        wrap_rows: true,
        scale: basis.kernel_diag([0.0, 0.0], (0, 0), (0, 0))?.sqrt(),
    };
    let segments = extract_segments(&input, |i, j| {
        section
            .eval([(i as f64 + 1.0) * h, (j as f64 + 0.5) * h], (0, 0))
            .unwrap()
    });
    let topology = extract_nodal_components_torus(&section, 2 * n)?;

    let path = std::env::temp_dir().join("nodal_curve.dat");
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(&path).map_err(|e| randnodal::Error::io(path.display().to_string(), e))?,
    );
    for seg in &segments {
        // Fractional grid coordinates back to the chart.
        let a = [(seg[0][0] + 0.5) * h, seg[0][1] * h];
        let b = [(seg[1][0] + 0.5) * h, seg[1][1] * h];
        writeln!(out, "{} {} {} {}", a[0], a[1], b[0], b[1])
            .map_err(|e| randnodal::Error::io(path.display().to_string(), e))?;
    }
    println!(
        "L = {l}, seed {seed}: {} segments across {} components (grid {n}x{n})",
        segments.len(),
        topology.b0
    );
    println!("wrote {}", path.display());
    Ok(())
}
