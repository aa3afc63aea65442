//! Homogeneous symbols, their sublevel bodies and moment constants.
//!
//! A degree-`m` positive even symbol `sigma` on `R^n` cuts out the body
//! `K = { xi : sigma(xi) <= 1 }`. Everything downstream consumes `K` only
//! through four scalar moments, each normalized by `(2 pi)^n`:
//!
//! ```text
//! c0 = Vol(K)/(2pi)^n        c1 = int_K xi_1^2 /(2pi)^n
//! c2 = int_K xi_1^2 xi_2^2   c4 = int_K xi_1^4      (same normalization)
//! ```
//!
//! For rotation-invariant bodies (balls and spherical shells) the moments are
//! closed forms; arbitrary symbols fall back to rejection-sampling Monte Carlo
//! with reported standard errors.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tag distinguishing the exactly-solvable ball from user-supplied symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    EuclideanBall,
    Custom,
}

/// An even, positive, degree-`m` homogeneous symbol on the cotangent fibre.
#[derive(Clone)]
pub struct SymbolSpec {
    dimension: usize,
    order: f64,
    kind: SymbolKind,
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for SymbolSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolSpec")
            .field("dimension", &self.dimension)
            .field("order", &self.order)
            .field("kind", &self.kind)
            .finish()
    }
}

impl SymbolSpec {
    /// `sigma(xi) = |xi|^m`, whose body is the unit ball for every order.
    pub fn euclidean_ball(dimension: usize, order: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if !(order > 0.0) {
            return Err(Error::InvalidSymbol(format!(
                "order must be positive, got {order}"
            )));
        }
        Ok(SymbolSpec {
            dimension,
            order,
            kind: SymbolKind::EuclideanBall,
            eval: Arc::new(move |xi| {
                let r2: f64 = xi.iter().map(|x| x * x).sum();
                r2.powf(order / 2.0)
            }),
        })
    }

    pub fn custom(
        dimension: usize,
        order: f64,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if !(order > 0.0) {
            return Err(Error::InvalidSymbol(format!(
                "order must be positive, got {order}"
            )));
        }
        Ok(SymbolSpec {
            dimension,
            order,
            kind: SymbolKind::Custom,
            eval: Arc::new(eval),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dimension);
        (self.eval)(xi)
    }

    /// Checks homogeneity `sigma(t xi) = t^m sigma(xi)`, evenness
    /// `sigma(-xi) = sigma(xi)` and ellipticity `sigma > 0` away from the
    /// origin on `pairs` random `(xi, t)` draws.
    pub fn validate(&self, pairs: usize, seed: u64, rel_tol: f64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coord = Uniform::new(-1.0f64, 1.0);
        let scale = Uniform::new(0.1f64, 10.0);
        for _ in 0..pairs {
            let xi: Vec<f64> = (0..self.dimension).map(|_| coord.sample(&mut rng)).collect();
            let norm2: f64 = xi.iter().map(|x| x * x).sum();
            if norm2 < 1e-4 {
                continue;
            }
            let v = self.eval(&xi);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidSymbol(format!(
                    "evaluator returned {v} at {xi:?}"
                )));
            }
            if v == 0.0 {
                return Err(Error::InvalidSymbol(format!(
                    "ellipticity violated: sigma = 0 at {xi:?}"
                )));
            }
            let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
            let vneg = self.eval(&neg);
            if (vneg - v).abs() > rel_tol * v.abs() {
                return Err(Error::InvalidSymbol(format!(
                    "evenness violated at {xi:?}: {v} vs {vneg}"
                )));
            }
            let t = scale.sample(&mut rng);
            let scaled: Vec<f64> = xi.iter().map(|x| t * x).collect();
            let vs = self.eval(&scaled);
            let expected = t.powf(self.order) * v;
            if (vs - expected).abs() > rel_tol * expected.abs().max(1e-300) {
                return Err(Error::InvalidSymbol(format!(
                    "homogeneity violated at t={t}: {vs} vs {expected}"
                )));
            }
        }
        Ok(())
    }
}

/// Standard errors attached to Monte Carlo moment estimates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentStdErr {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c4: f64,
}

/// The moment constants of a body `K` in fibre dimension `n`, already
/// divided by `(2 pi)^n`.
#[derive(Debug, Clone, Serialize)]
pub struct MomentSet {
    pub n: usize,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c4: f64,
    /// Inner-radius fraction of the annulus body `K^gamma`; `None` for the
    /// plain sublevel body.
    pub gamma_window: Option<f64>,
    /// Present exactly when the moments were estimated stochastically.
    pub stderr: Option<MomentStdErr>,
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // Vol(B^n) = pi^{n/2} / Gamma(n/2 + 1), via the stable recursion
    // Vol(B^n) = Vol(B^{n-2}) * 2 pi / n.
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

/// Closed-form moments of the Euclidean unit ball.
///
/// `c1 = c0/(n+2)`, `c2 = c0/((n+2)(n+4))` and `c4 = 3 c2` hold exactly.
pub fn ball_moments(n: usize) -> Result<MomentSet> {
    annulus_moments(n, 0.0, 2.0)
}

/// Moments of the spherical shell `{ gamma <= sigma(xi) <= 1 }` for the
/// rotation-invariant symbol of order `m`, i.e. inner radius `gamma^{1/m}`.
///
/// `gamma = 0` reproduces [`ball_moments`] bitwise.
pub fn annulus_moments(n: usize, gamma: f64, order: f64) -> Result<MomentSet> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidWindow(gamma));
    }
    if !(order > 0.0) {
        return Err(Error::InvalidSymbol(format!(
            "order must be positive, got {order}"
        )));
    }
    let nf = n as f64;
    let norm = (2.0 * PI).powi(n as i32);
    let c0_ball = unit_ball_volume(n) / norm;
    let c1_ball = c0_ball / (nf + 2.0);
    let c2_ball = c0_ball / ((nf + 2.0) * (nf + 4.0));
    // A radial monomial of total degree d integrates over the shell to the
    // ball value times (1 - r0^{n+d}).
    let r0 = gamma.powf(1.0 / order);
    let f0 = 1.0 - r0.powf(nf);
    let f2 = 1.0 - r0.powf(nf + 2.0);
    let f4 = 1.0 - r0.powf(nf + 4.0);
    let c2 = c2_ball * f4;
    Ok(MomentSet {
        n,
        c0: c0_ball * f0,
        c1: c1_ball * f2,
        c2,
        c4: 3.0 * c2,
        gamma_window: if gamma == 0.0 { None } else { Some(gamma) },
        stderr: None,
    })
}

/// Moments of the thin-shell limit `gamma -> 1`: the sphere `sigma = 1`
/// carrying the boundary measure of `R^n`, normalized by `(2 pi)^n`.
///
/// The overall scale of the sphere measure cancels in every density constant
/// assembled downstream, so this particular normalization is a free choice.
pub fn sphere_limit_moments(n: usize) -> Result<MomentSet> {
    let ball = ball_moments(n)?;
    let nf = n as f64;
    let c2 = ball.c2 * (nf + 4.0);
    Ok(MomentSet {
        n,
        c0: ball.c0 * nf,
        c1: ball.c1 * (nf + 2.0),
        c2,
        c4: 3.0 * c2,
        gamma_window: Some(1.0),
        stderr: None,
    })
}

/// Monte Carlo moments of an arbitrary symbol body by rejection sampling
/// inside the bounding box `[-R, R]^n`.
///
/// Homogeneity makes the box rigorous: with `R = (min_{|u|=1} sigma(u))^{-1/m}`
/// any point outside the box has `sigma > 1`. The minimum is estimated on
/// sampled directions and padded by 1%.
pub fn mc_moments(symbol: &SymbolSpec, samples: usize, seed: u64) -> Result<MomentSet> {
    if samples < 1_000 {
        return Err(Error::Config(format!(
            "mc_moments needs at least 1000 samples, got {samples}"
        )));
    }
    symbol.validate(1_000, seed ^ 0x5371_90ab, 1e-10)?;
    let n = symbol.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Directional minimum of sigma on the unit sphere, from uniformly random
    // directions (normalized Gaussians) plus the coordinate axes.
    let mut min_sigma = f64::INFINITY;
    for _ in 0..4_096 {
        let mut u: Vec<f64> = (0..n)
            .map(|_| {
                let (a, b): (f64, f64) = (rng.gen(), rng.gen());
                (-2.0 * (1.0 - a).ln()).sqrt() * (2.0 * PI * b).cos()
            })
            .collect();
        let norm: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        u.iter_mut().for_each(|x| *x /= norm);
        min_sigma = min_sigma.min(symbol.eval(&u));
    }
    for axis in 0..n {
        let mut u = vec![0.0; n];
        u[axis] = 1.0;
        min_sigma = min_sigma.min(symbol.eval(&u));
    }
    if !(min_sigma > 0.0) || !min_sigma.is_finite() {
        return Err(Error::InvalidSymbol(format!(
            "directional minimum of sigma is {min_sigma}; body is unbounded"
        )));
    }
    let radius = 1.01 * min_sigma.powf(-1.0 / symbol.order());
    let box_volume = (2.0 * radius).powi(n as i32);
    let norm = (2.0 * PI).powi(n as i32);
    let coord = Uniform::new(-radius, radius);

    // Integrands: indicator, xi1^2, xi1^2 xi2^2, xi1^4. In dimension one the
    // mixed moment has no meaning; c2 is reported through c4/3, which agrees
    // with the radial closed form.
    let mut sums = [0.0f64; 4];
    let mut sums_sq = [0.0f64; 4];
    let mut xi = vec![0.0f64; n];
    for _ in 0..samples {
        for x in xi.iter_mut() {
            *x = coord.sample(&mut rng);
        }
        let v = symbol.eval(&xi);
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidSymbol(format!(
                "evaluator returned {v} at {xi:?}"
            )));
        }
        let inside = if v <= 1.0 { 1.0 } else { 0.0 };
        let x1 = xi[0];
        let x2 = if n > 1 { xi[1] } else { 0.0 };
        let f = [
            inside,
            inside * x1 * x1,
            inside * x1 * x1 * x2 * x2,
            inside * x1 * x1 * x1 * x1,
        ];
        for k in 0..4 {
            sums[k] += f[k];
            sums_sq[k] += f[k] * f[k];
        }
    }
    let m = samples as f64;
    let mut est = [0.0f64; 4];
    let mut se = [0.0f64; 4];
    for k in 0..4 {
        let mean = sums[k] / m;
        let var = (sums_sq[k] / m - mean * mean).max(0.0);
        est[k] = box_volume * mean / norm;
        se[k] = box_volume * (var / m).sqrt() / norm;
    }
    let (c2, se2) = if n > 1 {
        (est[2], se[2])
    } else {
        (est[3] / 3.0, se[3] / 3.0)
    };
    Ok(MomentSet {
        n,
        c0: est[0],
        c1: est[1],
        c2,
        c4: est[3],
        gamma_window: None,
        stderr: Some(MomentStdErr {
            c0: se[0],
            c1: se[1],
            c2: se2,
            c4: se[3],
        }),
    })
}

/// The conformal factor and volume density the body induces on the base.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GpMetric {
    /// Multiplier on the ambient Euclidean metric: the metric is `c1 * g`.
    pub conformal_factor: f64,
    /// Volume density factor `sqrt(c1)^n` converting chart volume to the
    /// induced volume.
    pub volume_factor: f64,
}

/// Metric induced on the base by a rotation-invariant body: `c1` times the
/// ambient metric.
pub fn gp_metric(moments: &MomentSet) -> GpMetric {
    GpMetric {
        conformal_factor: moments.c1,
        volume_factor: moments.c1.sqrt().powi(moments.n as i32),
    }
}

/// The inner product a body induces on symmetric `(n-1) x (n-1)` matrices:
/// `tr_pair * Tr(AB) + trace_product * (Tr A)(Tr B)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sym2InnerSpec {
    /// Matrix size `n - 1`.
    pub dim: usize,
    /// Coefficient of `Tr(AB)`: equals `2 c2`.
    pub tr_pair: f64,
    /// Coefficient of `(Tr A)(Tr B)`: equals `c2 - c1^2/c0`.
    pub trace_product: f64,
}

impl Sym2InnerSpec {
    /// Coefficients `(a', b')` of the inverse (primal-side) inner product in
    /// the form `(1/tr_pair) * (a' on diagonal self-pairs, b' on distinct
    /// diagonal pairs, 1 off-diagonal)`; the ball body gives `(4/3, 1/3)`.
    pub fn primal_coefficients(&self) -> (f64, f64) {
        let m = self.dim.max(1) as f64;
        let r = self.trace_product / self.tr_pair;
        let rp = -r / (1.0 + r * m);
        (1.0 + rp, rp)
    }

    /// Trace-coupling `gamma` of the Gaussian the primal inner product
    /// defines after normalizing the `Tr(AB)` coefficient to 1/2, i.e. the
    /// measure `exp(-(Tr(A^2)/2 + gamma (Tr A)^2))` up to scale.
    ///
    /// Ball bodies give `1/6`; the thin-shell limit gives `1/2`.
    pub fn trace_coupled_gamma(&self) -> f64 {
        self.primal_coefficients().1 / 2.0
    }
}

/// Inner product induced on `Sym(n-1, R)` by a rotation-invariant body.
pub fn sym2_inner(moments: &MomentSet) -> Sym2InnerSpec {
    Sym2InnerSpec {
        dim: moments.n.saturating_sub(1),
        tr_pair: 2.0 * moments.c2,
        trace_product: moments.c2 - moments.c1 * moments.c1 / moments.c0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Brute-force quadrature oracle over the box; independent of the
    /// closed-form route.
    fn quadrature_moment_2d(power1: u32, power2: u32, inner: f64) -> f64 {
        let n = 2_000usize;
        let h = 2.0 / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            let x = -1.0 + (i as f64 + 0.5) * h;
            for j in 0..n {
                let y = -1.0 + (j as f64 + 0.5) * h;
                let r2 = x * x + y * y;
                if r2 <= 1.0 && r2 >= inner * inner {
                    total += x.powi(power1 as i32) * y.powi(power2 as i32);
                }
            }
        }
        total * h * h / (2.0 * PI).powi(2)
    }

    #[test]
    fn ball_moments_n1_match_interval_integrals() {
        // 1-D oracle: int_{-1}^{1} dxi/(2pi) and int xi^2 dxi/(2pi).
        let m = ball_moments(1).unwrap();
        assert_relative_eq!(m.c0, 1.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(m.c1, 1.0 / (3.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(m.c4, (2.0 / 5.0) / (2.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn ball_moments_n2_match_polar_integrals() {
        let m = ball_moments(2).unwrap();
        assert_relative_eq!(m.c0, 1.0 / (4.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(m.c1, 1.0 / (16.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(m.c2, 1.0 / (96.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(m.c4, 1.0 / (32.0 * PI), max_relative = 1e-15);
        // Cross-check against the 2-D quadrature oracle (midpoint rule on the
        // indicator carries O(h) boundary error).
        assert_relative_eq!(m.c0, quadrature_moment_2d(0, 0, 0.0), max_relative = 1e-4);
        assert_relative_eq!(m.c1, quadrature_moment_2d(2, 0, 0.0), max_relative = 1e-4);
        assert_relative_eq!(m.c2, quadrature_moment_2d(2, 2, 0.0), max_relative = 1e-4);
        assert_relative_eq!(m.c4, quadrature_moment_2d(4, 0, 0.0), max_relative = 1e-4);
    }

    #[test]
    fn ball_moment_ratios_exact_for_n_up_to_six() {
        for n in 1..=6 {
            let m = ball_moments(n).unwrap();
            let nf = n as f64;
            assert_relative_eq!(m.c1, m.c0 / (nf + 2.0), max_relative = 1e-12);
            assert_relative_eq!(
                m.c2,
                m.c0 / ((nf + 2.0) * (nf + 4.0)),
                max_relative = 1e-12
            );
            assert_relative_eq!(m.c4, 3.0 * m.c2, max_relative = 1e-12);
            assert!(m.stderr.is_none());
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(ball_moments(0), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn annulus_gamma_zero_is_ball_bitwise() {
        for n in 1..=4 {
            let ball = ball_moments(n).unwrap();
            let ann = annulus_moments(n, 0.0, 2.0).unwrap();
            assert_eq!(ball.c0.to_bits(), ann.c0.to_bits());
            assert_eq!(ball.c1.to_bits(), ann.c1.to_bits());
            assert_eq!(ball.c2.to_bits(), ann.c2.to_bits());
            assert_eq!(ball.c4.to_bits(), ann.c4.to_bits());
        }
    }

    #[test]
    fn annulus_examples() {
        // Radial power integrals with inner radius gamma^{1/m} = 1/2.
        let a2 = annulus_moments(2, 0.25, 2.0).unwrap();
        assert_relative_eq!(a2.c0, 3.0 / (16.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(
            a2.c0,
            quadrature_moment_2d(0, 0, 0.5),
            max_relative = 1e-4
        );
        let a1 = annulus_moments(1, 0.25, 2.0).unwrap();
        assert_relative_eq!(a1.c0, 1.0 / (2.0 * PI), max_relative = 1e-14);
        assert!(matches!(
            annulus_moments(2, 1.0, 2.0),
            Err(Error::InvalidWindow(_))
        ));
    }

    #[test]
    fn mc_moments_match_ball_oracle_within_three_sigma() {
        let symbol = SymbolSpec::euclidean_ball(2, 2.0).unwrap();
        let mc = mc_moments(&symbol, 200_000, 7).unwrap();
        let exact = ball_moments(2).unwrap();
        let se = mc.stderr.unwrap();
        assert!((mc.c0 - exact.c0).abs() <= 3.0 * se.c0);
        assert!((mc.c1 - exact.c1).abs() <= 3.0 * se.c1);
        assert!((mc.c2 - exact.c2).abs() <= 3.0 * se.c2);
        assert!((mc.c4 - exact.c4).abs() <= 3.0 * se.c4);
    }

    #[test]
    fn order_one_symbol_has_same_body_as_ball() {
        // The order-one symbol |xi| cuts out the same unit ball.
        let dtn = SymbolSpec::custom(2, 1.0, |xi| {
            xi.iter().map(|x| x * x).sum::<f64>().sqrt()
        })
        .unwrap();
        let mc = mc_moments(&dtn, 200_000, 11).unwrap();
        let exact = ball_moments(2).unwrap();
        let se = mc.stderr.unwrap();
        assert!((mc.c0 - exact.c0).abs() <= 3.0 * se.c0);
        assert!((mc.c1 - exact.c1).abs() <= 3.0 * se.c1);
    }

    #[test]
    fn degenerate_symbol_rejected() {
        let zero = SymbolSpec::custom(2, 2.0, |_| 0.0).unwrap();
        assert!(mc_moments(&zero, 10_000, 3).is_err());
    }

    #[test]
    fn mc_stderr_shrinks_like_inverse_sqrt() {
        let symbol = SymbolSpec::euclidean_ball(2, 2.0).unwrap();
        let a = mc_moments(&symbol, 100_000, 5).unwrap();
        let b = mc_moments(&symbol, 200_000, 6).unwrap();
        let ratio = b.stderr.unwrap().c0 / a.stderr.unwrap().c0;
        assert!(
            (0.6..=0.85).contains(&ratio),
            "stderr ratio {ratio} outside [0.6, 0.85]"
        );
    }

    #[test]
    fn symbol_validation_catches_odd_symbols() {
        let odd = SymbolSpec::custom(2, 1.0, |xi| xi[0] + 2.0 * xi[1].abs() + 3.0).unwrap();
        assert!(odd.validate(1_000, 1, 1e-12).is_err());
        let ball = SymbolSpec::euclidean_ball(3, 2.0).unwrap();
        ball.validate(1_000, 1, 1e-12).unwrap();
    }

    #[test]
    fn gp_metric_returns_c1() {
        let m2 = ball_moments(2).unwrap();
        let g2 = gp_metric(&m2);
        assert_relative_eq!(g2.conformal_factor, 1.0 / (16.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(g2.volume_factor, m2.c1, max_relative = 1e-14);
        let m1 = ball_moments(1).unwrap();
        assert_relative_eq!(
            gp_metric(&m1).conformal_factor,
            1.0 / (3.0 * PI),
            max_relative = 1e-14
        );
    }

    #[test]
    fn sym2_inner_ball_coefficients() {
        let m = ball_moments(2).unwrap();
        let s = sym2_inner(&m);
        assert_relative_eq!(s.tr_pair, 2.0 / (96.0 * PI), max_relative = 1e-14);
        // trace-product coefficient is -2 c2/(n+2) = -c2/2 at n = 2.
        assert_relative_eq!(s.trace_product, -m.c2 / 2.0, max_relative = 1e-12);
        let m3 = ball_moments(3).unwrap();
        let s3 = sym2_inner(&m3);
        assert_relative_eq!(s3.trace_product, -2.0 * m3.c2 / 5.0, max_relative = 1e-12);
    }

    #[test]
    fn primal_side_recovers_one_sixth_coupling() {
        for n in 2..=6 {
            let s = sym2_inner(&ball_moments(n).unwrap());
            let (ap, bp) = s.primal_coefficients();
            assert_relative_eq!(ap, 4.0 / 3.0, max_relative = 1e-12);
            assert_relative_eq!(bp, 1.0 / 3.0, max_relative = 1e-12);
            assert_relative_eq!(s.trace_coupled_gamma(), 1.0 / 6.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn thin_annulus_limit_recovers_one_half_coupling() {
        // gamma -> 1 approaches the sphere measure, whose coupling is 1/2.
        for n in 2..=4 {
            let near = sym2_inner(&annulus_moments(n, 1.0 - 1e-7, 2.0).unwrap());
            assert_relative_eq!(near.trace_coupled_gamma(), 0.5, max_relative = 1e-5);
            let exact = sym2_inner(&sphere_limit_moments(n).unwrap());
            assert_relative_eq!(exact.trace_coupled_gamma(), 0.5, max_relative = 1e-12);
        }
    }
}
