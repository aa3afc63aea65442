//! Zeros of random trigonometric sums on the circle: trial counts against
//! the exact stationary-process expectation and the sqrt(L) scaling law.
//!
//!     cargo run --release --example circle_zeros

use randnodal::ensembles::Manifold;
use randnodal::nodal::{run_trials, EnsembleConfig};

/// Exact expected zero count of the full ensemble below L: the stationary
/// form 2 pi (1/pi) sqrt(Var s' / Var s) with both variances in closed form.
fn expected_zeros(l: f64) -> f64 {
    let k = l.sqrt().floor() as u32;
    let sum_k2: f64 = (1..=k).map(|j| (j as f64) * (j as f64)).sum();
    2.0 * (sum_k2 / (0.5 + k as f64)).sqrt()
}

fn main() -> randnodal::Result<()> {
    println!(
        "{:>8} {:>10} {:>10} {:>8} {:>12} {:>10}",
        "L", "mean", "exact", "z", "mean/sqrtL", "2/sqrt3"
    );
    let limit = 2.0 / 3.0f64.sqrt();
    for l in [100.0, 400.0, 1600.0, 6400.0] {
        let config = EnsembleConfig::new(Manifold::Circle, l);
        let batch = run_trials(&config, None, 2_000, 11)?;
        let (mean, stderr) = batch.mean_stderr(|s| s.primary_count());
        let exact = expected_zeros(l);
        println!(
            "{l:>8} {mean:>10.3} {exact:>10.3} {:>8.2} {:>12.5} {limit:>10.5}",
            (mean - exact) / stderr,
            mean / l.sqrt()
        );
    }
    println!("\n(z compares the trial mean with the exact finite-L expectation;");
    println!(" mean/sqrt(L) approaches 2/sqrt(3) = {limit:.5} from above)");
    Ok(())
}
