//! Expected tangency densities, two ways.
//!
//! The finite-threshold route evaluates the exact expected density of
//! index-`i` critical points of `p` restricted to the nodal set at a point:
//! starting from the kernel's jet covariance, rotate the jet into the frame
//! `(u, w)` spanned by `ker dp` and its normal, pass to the leaf-restricted
//! second derivative `beta = s_uu + kappa s_w` (with `kappa` the level-curve
//! curvature of `p`, which absorbs the connection terms), condition on the
//! incidence event `s = 0, s_u = 0` by a Schur complement, and integrate
//! `|alpha beta|` over the conditioned Gaussian restricted to the index cone
//! - the index is the sign of `alpha beta` since the restricted Hessian is
//! `-(p_w / alpha) beta`. The density at the conditioning event enters in
//! closed form, so no rejection sampling near the zero set is involved.
//!
//! The asymptotic route assembles the limiting constant from the moment set
//! of the symbol body and a signature-restricted expected determinant:
//!
//! ```text
//! density / L^{n/m} -> E(i, n-1-i) * sqrt(c2^{n-1} c1^{2-n} / c0) / sqrt(pi)^{n+1}
//! ```
//!
//! per unit Riemannian volume. For the Euclidean-ball body this reduces to
//! `E(i, n-1-i) / (sqrt(pi)^{n+1} sqrt((n+2)(n+4)^{n-1}))`, and the
//! thin-window (sphere) body replaces the denominator by
//! `sqrt(n (n+2)^{n-1})`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{Jet2, JetCovariance, Point, SpectralBasis};
use crate::error::{Error, Result};
use crate::nodal::MorseFunctionSpec;
use crate::randmat::{schur_conditional, standard_normal, DetIndexEstimate};
use crate::symbols::MomentSet;

/// Which part of the spectrum the constant describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EnsembleFamily {
    Full,
    Window(f64),
    Pure,
}

/// A limiting density constant: critical points of index `i` per unit
/// Riemannian volume per `L^{n/m}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticConstant {
    pub n: usize,
    pub index: usize,
    pub family: EnsembleFamily,
    pub value: f64,
    /// Propagated from the determinant estimate; zero for exact inputs.
    pub stderr: f64,
    /// The count scales as `L^{exponent}`: `n/2` for the Laplacian, `n` for
    /// the order-one Dirichlet-to-Neumann operator.
    pub scaling_exponent: f64,
    pub operator_order: f64,
}

/// Finite-`L` expected density of tangencies at a point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensityEstimate {
    /// Expected count per unit chart area (per unit length for n = 1).
    pub per_chart: f64,
    /// Monte Carlo standard error of `per_chart` (zero for n = 1, where the
    /// conditioned expectation is a closed form).
    pub stderr: f64,
    /// `per_chart` divided by the metric volume density at the point.
    pub per_metric: f64,
    pub point: Point,
    pub samples: usize,
}

const SHARD: usize = 16_384;

/// Finite-`L` expected density (Kac-Rice) of index-`i` tangencies at a
/// point, from the ensemble's exact jet covariance.
pub fn finite_l_density(
    basis: &SpectralBasis,
    point: Point,
    morse: Option<&MorseFunctionSpec>,
    index: usize,
    samples: usize,
    seed: u64,
) -> Result<DensityEstimate> {
    let cov = basis.jet_covariance(point)?;
    match basis.manifold().dim() {
        1 => circle_zero_density(&cov, point),
        _ => {
            let morse = morse.ok_or_else(|| {
                Error::Config("surface densities need a Morse function".into())
            })?;
            if morse.distance_to_critical(point) < morse.exclusion_radius {
                return Err(Error::Config(format!(
                    "point {point:?} lies inside the exclusion radius of a critical point of p"
                )));
            }
            surface_density_from_jets(
                &cov,
                &morse.jet(point),
                basis.manifold().sqrt_det_metric(point),
                index,
                samples,
                seed,
            )
        }
    }
}

/// Zero density of a 1-D ensemble: `rho(0) E[|s'| | s = 0]`, both factors in
/// closed form.
fn circle_zero_density(cov: &JetCovariance, point: Point) -> Result<DensityEstimate> {
    let m = &cov.matrix;
    let var_s = m[(0, 0)];
    if var_s <= 0.0 {
        return Err(Error::SingularCovariance { rcond: 0.0 });
    }
    let var_ds = m[(1, 1)] - m[(0, 1)] * m[(0, 1)] / var_s;
    if var_ds <= 0.0 {
        return Err(Error::SingularCovariance { rcond: var_ds });
    }
    let density = (var_ds / var_s).sqrt() / PI;
    Ok(DensityEstimate {
        per_chart: density,
        stderr: 0.0,
        per_metric: density,
        point,
        samples: 0,
    })
}

/// Level-curve curvature of `p` for the unit field spanning `ker dp` in the
/// chart: the normal component of the self-advection of the field.
fn level_curvature(p: &Jet2) -> f64 {
    let g2 = p.dt * p.dt + p.dp * p.dp;
    (2.0 * p.dt * p.dp * p.dtp - p.dp * p.dp * p.dtt - p.dt * p.dt * p.dpp) / g2.powf(1.5)
}

/// The surface Kac-Rice density evaluated from an explicit jet covariance
/// and Morse-function jet; exposed separately so the scaling invariance can
/// be exercised directly on the covariance.
pub fn surface_density_from_jets(
    cov: &JetCovariance,
    p_jet: &Jet2,
    sqrt_det_metric: f64,
    index: usize,
    samples: usize,
    seed: u64,
) -> Result<DensityEstimate> {
    if index > 1 {
        return Err(Error::IndexOutOfRange { index, size: 1 });
    }
    if samples == 0 {
        return Err(Error::Config("density estimate needs samples".into()));
    }
    let grad = (p_jet.dt * p_jet.dt + p_jet.dp * p_jet.dp).sqrt();
    if grad < 1e-12 {
        return Err(Error::Config(
            "Morse gradient vanishes at the query point".into(),
        ));
    }
    // Chart-orthonormal frame: u spans ker dp, w the gradient direction
    // (p_w = |grad p| > 0).
    let u = [-p_jet.dp / grad, p_jet.dt / grad];
    let w = [p_jet.dt / grad, p_jet.dp / grad];
    let kappa = level_curvature(p_jet);

    // Vector (alpha, beta, s, s_u) as a linear image of the chart jet
    // (s, st, sp, stt, stp, spp); beta is the leaf-restricted second
    // derivative s_uu + kappa s_w.
    let rows = [
        [0.0, w[0], w[1], 0.0, 0.0, 0.0],
        [
            0.0,
            kappa * w[0],
            kappa * w[1],
            u[0] * u[0],
            2.0 * u[0] * u[1],
            u[1] * u[1],
        ],
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, u[0], u[1], 0.0, 0.0, 0.0],
    ];
    let t = DMatrix::from_fn(4, 6, |i, j| rows[i][j]);
    let sigma4 = &t * &cov.matrix * t.transpose();

    // Gaussian density of (s, s_u) at the conditioning event.
    let event = sigma4.view((2, 2), (2, 2)).into_owned();
    let det_event = event[(0, 0)] * event[(1, 1)] - event[(0, 1)] * event[(1, 0)];
    if det_event <= 0.0 {
        return Err(Error::SingularCovariance { rcond: det_event });
    }
    let rho0 = 1.0 / (2.0 * PI * det_event.sqrt());

    // Conditional covariance of (alpha, beta) given the event.
    let conditional = schur_conditional(&sigma4, 2)?;
    let chol = nalgebra::Cholesky::new(conditional.clone())
        .ok_or(Error::SingularCovariance { rcond: 0.0 })?;
    let l = chol.l();
    let (l00, l10, l11) = (l[(0, 0)], l[(1, 0)], l[(1, 1)]);

    // E[|alpha beta| ; index] over the conditioned Gaussian. The restricted
    // Hessian is -(p_w/alpha) beta with p_w > 0, so index 1 (a maximum of p
    // along the curve) is the cone alpha beta > 0.
    let shards: Vec<(usize, usize)> = (0..samples)
        .step_by(SHARD)
        .enumerate()
        .map(|(k, start)| (k, SHARD.min(samples - start)))
        .collect();
    let partial: Vec<(f64, f64)> = shards
        .par_iter()
        .map(|&(shard_id, count)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard_id as u64 + 1);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..count {
                let z0 = standard_normal(&mut rng);
                let z1 = standard_normal(&mut rng);
                let alpha = l00 * z0;
                let beta = l10 * z0 + l11 * z1;
                let product = alpha * beta;
                let in_cone = if index == 1 {
                    product > 0.0
                } else {
                    product < 0.0
                };
                let x = if in_cone { product.abs() } else { 0.0 };
                sum += x;
                sum_sq += x * x;
            }
            (sum, sum_sq)
        })
        .collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (s, s2) in partial {
        sum += s;
        sum_sq += s2;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    let per_chart = rho0 * mean;
    let stderr = rho0 * (var / nf).sqrt();
    Ok(DensityEstimate {
        per_chart,
        stderr,
        per_metric: per_chart / sqrt_det_metric,
        point: cov.point,
        samples,
    })
}

fn moment_ratios_consistent(moments: &MomentSet) -> bool {
    let nf = moments.n as f64;
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs();
    rel(moments.c1, moments.c0 / (nf + 2.0))
        && rel(moments.c2, moments.c0 / ((nf + 2.0) * (nf + 4.0)))
        && rel(moments.c4, 3.0 * moments.c2)
}

/// Density factor `sqrt(c2^{n-1} c1^{2-n} / c0) / sqrt(pi)^{n+1}` turning an
/// expected determinant into the per-volume constant.
fn moment_factor(moments: &MomentSet) -> f64 {
    let n = moments.n as i32;
    let ratio = moments.c2.powi(n - 1) * moments.c1.powi(2 - n) / moments.c0;
    ratio.sqrt() / PI.sqrt().powi(n + 1)
}

/// Assembles the limiting density constant for index-`i` tangencies from a
/// moment set and the matching expected determinant `E(i, n-1-i)`.
///
/// The determinant estimate must come from the trace-coupled Gaussian that
/// the moment set induces (coupling 1/6 for sublevel bodies, 1/2 for the
/// thin-window limit); for `n = 1` the convention `E = 1` applies.
pub fn asymptotic_constant(
    n: usize,
    index: usize,
    family: EnsembleFamily,
    moments: &MomentSet,
    det: &DetIndexEstimate,
) -> Result<AsymptoticConstant> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if n >= 2 && index > n - 1 {
        return Err(Error::IndexOutOfRange { index, size: n - 1 });
    }
    if moments.n != n {
        return Err(Error::Config(format!(
            "moment set is for dimension {}, queried {n}",
            moments.n
        )));
    }
    if family == EnsembleFamily::Full && !moment_ratios_consistent(moments) {
        return Err(Error::Config(
            "moment set violates the ball-body ratios beyond tolerance".into(),
        ));
    }
    let factor = moment_factor(moments);
    Ok(AsymptoticConstant {
        n,
        index,
        family,
        value: det.estimate * factor,
        stderr: det.stderr * factor,
        scaling_exponent: n as f64 / 2.0,
        operator_order: 2.0,
    })
}

/// The same constants declared against the order-one scaling `L^n` of the
/// Dirichlet-to-Neumann operator, whose symbol body coincides with the
/// Laplace ball.
pub fn dtn_constants(
    n: usize,
    index: usize,
    moments: &MomentSet,
    det: &DetIndexEstimate,
) -> Result<AsymptoticConstant> {
    if !moment_ratios_consistent(moments) {
        return Err(Error::Config(
            "Dirichlet-to-Neumann constants need ball moments".into(),
        ));
    }
    let mut constant = asymptotic_constant(n, index, EnsembleFamily::Full, moments, det)?;
    constant.scaling_exponent = n as f64;
    constant.operator_order = 1.0;
    Ok(constant)
}

/// Convenience: the exact closed-form constant of the ball family,
/// `E / (sqrt(pi)^{n+1} sqrt((n+2)(n+4)^{n-1}))`.
pub fn ball_closed_form(n: usize, det_value: f64) -> f64 {
    let nf = n as f64;
    det_value
        / (PI.sqrt().powi(n as i32 + 1)
            * ((nf + 2.0) * (nf + 4.0).powi(n as i32 - 1)).sqrt())
}
