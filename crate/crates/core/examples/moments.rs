//! Moment constants of symbol bodies: closed forms for balls and shells,
//! Monte Carlo for general symbols, and the induced structures downstream
//! (conformal metric factor, trace-coupled inner product on symmetric
//! matrices).
//!
//!     cargo run --release --example moments

use randnodal::symbols::{
    annulus_moments, ball_moments, gp_metric, mc_moments, sphere_limit_moments, sym2_inner,
    SymbolSpec,
};

fn main() -> randnodal::Result<()> {
    println!("Euclidean ball moments (normalized by (2 pi)^n):");
    println!("{:>3} {:>12} {:>12} {:>12} {:>12} {:>8}", "n", "c0", "c1", "c2", "c4", "c4/c2");
    for n in 1..=6 {
        let m = ball_moments(n)?;
        println!(
            "{n:>3} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e} {:>8.3}",
            m.c0,
            m.c1,
            m.c2,
            m.c4,
            m.c4 / m.c2
        );
    }

    println!("\nSpherical shells at n = 2 (inner fraction gamma, order 2):");
    for gamma in [0.0, 0.25, 0.5, 0.9] {
        let m = annulus_moments(2, gamma, 2.0)?;
        println!("  gamma = {gamma:<4}: c0 = {:.6}, c1 = {:.6}, c2 = {:.6}", m.c0, m.c1, m.c2);
    }

    println!("\nMonte Carlo vs closed form (unit ball, n = 2, 1e6 samples):");
    let symbol = SymbolSpec::euclidean_ball(2, 2.0)?;
    let mc = mc_moments(&symbol, 1_000_000, 42)?;
    let exact = ball_moments(2)?;
    let se = mc.stderr.unwrap();
    for (name, est, ex, sigma) in [
        ("c0", mc.c0, exact.c0, se.c0),
        ("c1", mc.c1, exact.c1, se.c1),
        ("c2", mc.c2, exact.c2, se.c2),
        ("c4", mc.c4, exact.c4, se.c4),
    ] {
        println!(
            "  {name}: {est:.6e} vs {ex:.6e}  (z = {:+.2})",
            (est - ex) / sigma
        );
    }

    // An order-one symbol with the same unit-ball body gives the same
    // moments: the body, not the order, carries them.
    let norm_symbol = SymbolSpec::custom(2, 1.0, |xi| {
        xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    })?;
    let mc1 = mc_moments(&norm_symbol, 500_000, 7)?;
    println!(
        "\nOrder-one norm symbol, same body: c0 = {:.6} (ball: {:.6})",
        mc1.c0, exact.c0
    );

    println!("\nInduced structures at n = 2:");
    let g = gp_metric(&exact);
    println!("  conformal metric factor c1 = {:.8}", g.conformal_factor);
    let inner = sym2_inner(&exact);
    println!(
        "  Sym^2 inner product: {:.6e} Tr(AB) + {:.6e} (Tr A)(Tr B)",
        inner.tr_pair, inner.trace_product
    );
    println!(
        "  trace coupling of the induced Gaussian: {:.6} (ball families give 1/6)",
        inner.trace_coupled_gamma()
    );
    let shell = sym2_inner(&sphere_limit_moments(2)?);
    println!(
        "  thin-window limit coupling:              {:.6} (window families give 1/2)",
        shell.trace_coupled_gamma()
    );
    Ok(())
}
