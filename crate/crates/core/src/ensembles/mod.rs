//! Spectral bases, Gaussian random sections and the spectral kernel on the
//! three model manifolds.
//!
//! A basis is the orthonormal set of Laplace eigenfunctions with eigenvalue
//! at most `L` (optionally restricted to a window `[aL, L]` or to the pure
//! eigenspace at `L`). Random sections carry i.i.d. standard normal
//! coefficients; nodal statistics are invariant under a global rescaling of
//! the coefficient variance, which is tested rather than assumed.
//!
//! Everything the expected-density machinery needs from the ensemble is the
//! diagonal jet of the kernel `e_L(x, y) = sum_k phi_k(x) phi_k(y)`:
//! [`SpectralBasis::kernel_diag`] evaluates the exact finite sums and
//! [`verify_kernel_asymptotics`] compares them with their leading-term
//! predictions from the moment constants.

pub mod sphere;
pub mod torus_fft;

use std::f64::consts::{PI, SQRT_2, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randmat::standard_normal;
use crate::symbols::{annulus_moments, MomentSet};
use sphere::{tri, LegendreTables};

/// Chart point; the circle uses only the first coordinate.
pub type Point = [f64; 2];

/// Chart derivative order `(theta, phi)` with total order at most 2.
pub type DerivOrder = (usize, usize);

/// Jet coordinate order used by 1-D jet covariances.
pub const JET_DERIVS_1D: [DerivOrder; 3] = [(0, 0), (1, 0), (2, 0)];
/// Jet coordinate order used by 2-D jet covariances:
/// value, gradient, then Hessian entries `(tt, tp, pp)`.
pub const JET_DERIVS_2D: [DerivOrder; 6] =
    [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Circle,
    Torus2,
    Sphere2,
}

impl Manifold {
    pub fn dim(&self) -> usize {
        match self {
            Manifold::Circle => 1,
            Manifold::Torus2 | Manifold::Sphere2 => 2,
        }
    }

    /// Operator order of the Laplacian; the eigenvalue threshold scales like
    /// `L^{n/m}` with `m = 2`.
    pub fn operator_order(&self) -> f64 {
        2.0
    }

    pub fn volume(&self) -> f64 {
        match self {
            Manifold::Circle => TAU,
            Manifold::Torus2 => TAU * TAU,
            Manifold::Sphere2 => 2.0 * TAU,
        }
    }

    /// Square root of the metric determinant in chart coordinates.
    pub fn sqrt_det_metric(&self, point: Point) -> f64 {
        match self {
            Manifold::Circle | Manifold::Torus2 => 1.0,
            Manifold::Sphere2 => point[0].sin().abs(),
        }
    }
}

impl std::str::FromStr for Manifold {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circle" | "s1" => Ok(Manifold::Circle),
            "torus" | "torus2" | "t2" => Ok(Manifold::Torus2),
            "sphere" | "sphere2" | "s2" => Ok(Manifold::Sphere2),
            other => Err(Error::Config(format!("unknown manifold '{other}'"))),
        }
    }
}

/// Which part of the spectrum below `L` the ensemble spans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralWindow {
    /// All eigenvalues in `[0, L]`.
    Full,
    /// Eigenvalues in `[aL, L]` for a fraction `a` in `[0, 1)`.
    Window(f64),
    /// The single eigenspace at eigenvalue exactly `L`.
    Pure,
}

/// One basis mode with its eigenvalue descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    CircleConst,
    CircleCos { k: u32 },
    CircleSin { k: u32 },
    TorusConst,
    TorusCos { j: i32, k: i32 },
    TorusSin { j: i32, k: i32 },
    SphereY { l: u32, m: i32 },
}

impl Mode {
    pub fn eigenvalue(&self) -> f64 {
        match *self {
            Mode::CircleConst | Mode::TorusConst => 0.0,
            Mode::CircleCos { k } | Mode::CircleSin { k } => (k as f64) * (k as f64),
            Mode::TorusCos { j, k } | Mode::TorusSin { j, k } => {
                (j as f64) * (j as f64) + (k as f64) * (k as f64)
            }
            Mode::SphereY { l, .. } => (l as f64) * (l as f64 + 1.0),
        }
    }
}

/// Frequency-pair layout for the circle and torus fast paths; coefficients
/// are stored `[const?, cos/sin pairs...]`.
#[derive(Debug, Clone)]
pub struct PairReps<F> {
    pub pairs: Vec<F>,
    pub const_index: Option<usize>,
    pub pair_offset: usize,
}

#[derive(Debug, Clone)]
enum Layout {
    Circle(PairReps<u32>),
    Torus(PairReps<(i32, i32)>),
    Sphere { lmax: usize, lms: Vec<(u32, i32)> },
}

/// Orthonormal eigenbasis of the spectrum window on a model manifold.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    manifold: Manifold,
    threshold: f64,
    window: SpectralWindow,
    modes: Vec<Mode>,
    layout: Layout,
}

fn window_bounds(l: f64, window: SpectralWindow) -> Result<(f64, f64)> {
    match window {
        SpectralWindow::Full => Ok((f64::NEG_INFINITY, l)),
        SpectralWindow::Window(a) => {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::InvalidWindow(a));
            }
            Ok((a * l, l))
        }
        SpectralWindow::Pure => Ok((l, l)),
    }
}

/// Builds the orthonormal basis of eigenfunctions with eigenvalue below `L`
/// (or inside the window).
pub fn build_basis(
    manifold: Manifold,
    l: f64,
    window: SpectralWindow,
) -> Result<SpectralBasis> {
    if !(l >= 0.0) || !l.is_finite() {
        return Err(Error::Config(format!("threshold L must be >= 0, got {l}")));
    }
    let (lo, hi) = window_bounds(l, window)?;
    let pure_tol = 1e-9 * l.max(1.0);
    let in_window = |lambda: f64| -> bool {
        match window {
            SpectralWindow::Pure => (lambda - l).abs() <= pure_tol,
            _ => lambda >= lo && lambda <= hi,
        }
    };

    let mut modes = Vec::new();
    let layout = match manifold {
        Manifold::Circle => {
            if window == SpectralWindow::Pure {
                let k = l.sqrt().round();
                if (k * k - l).abs() > pure_tol {
                    return Err(Error::NotAnEigenvalue(l));
                }
            }
            let mut reps = PairReps {
                pairs: Vec::new(),
                const_index: None,
                pair_offset: 0,
            };
            if in_window(0.0) {
                reps.const_index = Some(0);
                reps.pair_offset = 1;
                modes.push(Mode::CircleConst);
            }
            let kmax = l.sqrt().floor() as u32 + 1;
            for k in 1..=kmax {
                if in_window((k as f64) * (k as f64)) {
                    reps.pairs.push(k);
                    modes.push(Mode::CircleCos { k });
                    modes.push(Mode::CircleSin { k });
                }
            }
            Layout::Circle(reps)
        }
        Manifold::Torus2 => {
            if window == SpectralWindow::Pure && (l - l.round()).abs() > pure_tol {
                return Err(Error::NotAnEigenvalue(l));
            }
            let mut reps = PairReps {
                pairs: Vec::new(),
                const_index: None,
                pair_offset: 0,
            };
            if in_window(0.0) {
                reps.const_index = Some(0);
                reps.pair_offset = 1;
                modes.push(Mode::TorusConst);
            }
            let fmax = l.sqrt().floor() as i32 + 1;
            // Representatives: j > 0 with any k, plus the half-line j = 0, k > 0.
            for j in 0..=fmax {
                let krange = if j == 0 { 1..=fmax } else { -fmax..=fmax };
                for k in krange {
                    let lambda = (j * j + k * k) as f64;
                    if j == 0 && k == 0 {
                        continue;
                    }
                    if j == 0 && k <= 0 {
                        continue;
                    }
                    if in_window(lambda) {
                        reps.pairs.push((j, k));
                        modes.push(Mode::TorusCos { j, k });
                        modes.push(Mode::TorusSin { j, k });
                    }
                }
            }
            if window == SpectralWindow::Pure && modes.is_empty() {
                return Err(Error::NotAnEigenvalue(l));
            }
            Layout::Torus(reps)
        }
        Manifold::Sphere2 => {
            if window == SpectralWindow::Pure {
                let lf = ((-1.0 + (1.0 + 4.0 * l).sqrt()) / 2.0).round();
                if (lf * (lf + 1.0) - l).abs() > pure_tol {
                    return Err(Error::NotAnEigenvalue(l));
                }
            }
            let mut lms = Vec::new();
            let lmax_bound = ((-1.0 + (1.0 + 4.0 * l).sqrt()) / 2.0).floor() as u32 + 1;
            for deg in 0..=lmax_bound {
                let lambda = (deg as f64) * (deg as f64 + 1.0);
                if in_window(lambda) {
                    for m in -(deg as i32)..=(deg as i32) {
                        lms.push((deg, m));
                        modes.push(Mode::SphereY { l: deg, m });
                    }
                }
            }
            let lmax = lms.iter().map(|&(l, _)| l).max().unwrap_or(0) as usize;
            Layout::Sphere { lmax, lms }
        }
    };
    if modes.is_empty() {
        return Err(Error::EmptyBasis(l));
    }
    Ok(SpectralBasis {
        manifold,
        threshold: l,
        window,
        modes,
        layout,
    })
}

fn validate_point(manifold: Manifold, p: Point, derivatives: bool) -> Result<()> {
    if !p[0].is_finite() || !p[1].is_finite() {
        return Err(Error::PointOffManifold(p));
    }
    if manifold == Manifold::Sphere2 {
        if !(0.0..=PI).contains(&p[0]) {
            return Err(Error::PointOffManifold(p));
        }
        if derivatives && (p[0] <= 0.0 || p[0] >= PI) {
            return Err(Error::PointOffManifold(p));
        }
    }
    Ok(())
}

impl SpectralBasis {
    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn window(&self) -> SpectralWindow {
        self.window
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dimension(&self) -> usize {
        self.modes.len()
    }

    pub fn volume(&self) -> f64 {
        self.manifold.volume()
    }

    /// Ratio of the dimension to its leading-order prediction
    /// `c0 * Vol * L^{n/2}` from the moment constants.
    pub fn weyl_ratio(&self) -> Result<f64> {
        let n = self.manifold.dim();
        let gamma = match self.window {
            SpectralWindow::Full => 0.0,
            SpectralWindow::Window(a) => a,
            SpectralWindow::Pure => {
                return Err(Error::Config(
                    "Weyl ratio is not defined for the pure window".into(),
                ))
            }
        };
        let moments = annulus_moments(n, gamma, 2.0)?;
        let predicted =
            moments.c0 * self.volume() * self.threshold.powf(n as f64 / 2.0);
        Ok(self.dimension() as f64 / predicted)
    }

    pub(crate) fn torus_reps(&self) -> &PairReps<(i32, i32)> {
        match &self.layout {
            Layout::Torus(reps) => reps,
            _ => panic!("not a torus basis"),
        }
    }

    /// Values of every basis mode's chart derivative at a point, in mode
    /// order.
    pub fn mode_values(&self, p: Point, deriv: DerivOrder) -> Result<Vec<f64>> {
        let (dt, dp) = deriv;
        if dt + dp > 2 {
            return Err(Error::DerivativeOrder(dt + dp));
        }
        validate_point(self.manifold, p, dt + dp > 0)?;
        let mut out = Vec::with_capacity(self.modes.len());
        match &self.layout {
            Layout::Circle(_) => {
                if dp > 0 {
                    return Err(Error::DerivativeOrder(dp));
                }
                let norm = 1.0 / PI.sqrt();
                for mode in &self.modes {
                    let v = match *mode {
                        Mode::CircleConst => {
                            if dt == 0 {
                                1.0 / TAU.sqrt()
                            } else {
                                0.0
                            }
                        }
                        Mode::CircleCos { k } => {
                            let kf = k as f64;
                            kf.powi(dt as i32) * (kf * p[0] + dt as f64 * PI / 2.0).cos() * norm
                        }
                        Mode::CircleSin { k } => {
                            let kf = k as f64;
                            kf.powi(dt as i32) * (kf * p[0] + dt as f64 * PI / 2.0).sin() * norm
                        }
                        _ => unreachable!(),
                    };
                    out.push(v);
                }
            }
            Layout::Torus(_) => {
                let norm = 1.0 / (SQRT_2 * PI);
                let shift = (dt + dp) as f64 * PI / 2.0;
                for mode in &self.modes {
                    let v = match *mode {
                        Mode::TorusConst => {
                            if dt + dp == 0 {
                                1.0 / TAU
                            } else {
                                0.0
                            }
                        }
                        Mode::TorusCos { j, k } => {
                            let (jf, kf) = (j as f64, k as f64);
                            jf.powi(dt as i32)
                                * kf.powi(dp as i32)
                                * (jf * p[0] + kf * p[1] + shift).cos()
                                * norm
                        }
                        Mode::TorusSin { j, k } => {
                            let (jf, kf) = (j as f64, k as f64);
                            jf.powi(dt as i32)
                                * kf.powi(dp as i32)
                                * (jf * p[0] + kf * p[1] + shift).sin()
                                * norm
                        }
                        _ => unreachable!(),
                    };
                    out.push(v);
                }
            }
            Layout::Sphere { lmax, lms } => {
                let tables = if dt > 0 {
                    LegendreTables::with_derivatives(*lmax, p[0])
                } else {
                    LegendreTables::values_only(*lmax, p[0])
                };
                let shift = dp as f64 * PI / 2.0;
                for &(l, m) in lms {
                    let table = match dt {
                        0 => &tables.p,
                        1 => &tables.dp,
                        _ => &tables.d2p,
                    };
                    let plm = table[tri(l as usize, m.unsigned_abs() as usize)];
                    let v = if m == 0 {
                        if dp == 0 {
                            plm
                        } else {
                            0.0
                        }
                    } else {
                        let mf = m.unsigned_abs() as f64;
                        let angular = if m > 0 {
                            (mf * p[1] + shift).cos()
                        } else {
                            (mf * p[1] + shift).sin()
                        };
                        SQRT_2 * mf.powi(dp as i32) * plm * angular
                    };
                    out.push(v);
                }
            }
        }
        Ok(out)
    }

    /// Exact finite sum `sum_k (Q1 phi_k)(x) (Q2 phi_k)(x)` - the diagonal
    /// jet of the spectral kernel.
    pub fn kernel_diag(&self, p: Point, d1: DerivOrder, d2: DerivOrder) -> Result<f64> {
        let v1 = self.mode_values(p, d1)?;
        if d1 == d2 {
            return Ok(v1.iter().map(|a| a * a).sum());
        }
        let v2 = self.mode_values(p, d2)?;
        Ok(v1.iter().zip(v2.iter()).map(|(a, b)| a * b).sum())
    }

    /// Covariance of the 2-jet of a random section at a point, over the jet
    /// coordinates [`JET_DERIVS_1D`] / [`JET_DERIVS_2D`].
    pub fn jet_covariance(&self, p: Point) -> Result<JetCovariance> {
        let derivs: &[DerivOrder] = if self.manifold.dim() == 1 {
            &JET_DERIVS_1D
        } else {
            &JET_DERIVS_2D
        };
        let values: Vec<Vec<f64>> = derivs
            .iter()
            .map(|&d| self.mode_values(p, d))
            .collect::<Result<_>>()?;
        let dim = derivs.len();
        let mut matrix = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let s: f64 = values[i]
                    .iter()
                    .zip(values[j].iter())
                    .map(|(a, b)| a * b)
                    .sum();
                matrix[(i, j)] = s;
                matrix[(j, i)] = s;
            }
        }
        Ok(JetCovariance {
            point: p,
            threshold: self.threshold,
            matrix,
        })
    }
}

/// Covariance of `(s, grad s, hess s)` at a point of the manifold, in the
/// chart jet coordinates of [`JET_DERIVS_2D`] (or [`JET_DERIVS_1D`]).
#[derive(Debug, Clone)]
pub struct JetCovariance {
    pub point: Point,
    pub threshold: f64,
    pub matrix: DMatrix<f64>,
}

impl JetCovariance {
    /// Smallest eigenvalue; the matrix is a Gram matrix so this should only
    /// dip below zero by rounding.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.clone().symmetric_eigen().eigenvalues.min()
    }
}

/// A Gaussian random section of the ensemble: independent standard normal
/// coefficients over the basis modes.
#[derive(Debug, Clone)]
pub struct RandomSection {
    basis: Arc<SpectralBasis>,
    coeffs: Vec<f64>,
    /// `(master seed, stream)` when drawn through the trial machinery.
    pub provenance: Option<(u64, u64)>,
}

/// Value and chart derivatives of a section at a point.
#[derive(Debug, Clone, Copy, Default)]
pub struct Jet2 {
    pub value: f64,
    pub dt: f64,
    pub dp: f64,
    pub dtt: f64,
    pub dtp: f64,
    pub dpp: f64,
}

impl RandomSection {
    pub fn draw(basis: Arc<SpectralBasis>, rng: &mut impl Rng) -> Self {
        let coeffs = (0..basis.dimension())
            .map(|_| standard_normal(rng))
            .collect();
        RandomSection {
            basis,
            coeffs,
            provenance: None,
        }
    }

    /// A section with explicitly prescribed coefficients (test sections,
    /// deterministic examples).
    pub fn from_coeffs(basis: Arc<SpectralBasis>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), basis.dimension(), "one coefficient per mode");
        RandomSection {
            basis,
            coeffs,
            provenance: None,
        }
    }

    /// Deterministic per-trial draw: stream `trial + 1` of the master seed.
    pub fn draw_for_trial(basis: Arc<SpectralBasis>, master_seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(trial + 1);
        let mut section = Self::draw(basis, &mut rng);
        section.provenance = Some((master_seed, trial + 1));
        section
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The section with every coefficient multiplied by `factor`; its nodal
    /// set is unchanged for `factor != 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        RandomSection {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            provenance: self.provenance,
        }
    }

    /// Torus translation `s(. + delta)` realized on coefficients: each
    /// frequency pair rotates by its phase increment.
    pub fn translated(&self, dtheta: f64, dphi: f64) -> Self {
        let reps = self.basis.torus_reps();
        let mut coeffs = self.coeffs.clone();
        for (r, &(j, k)) in reps.pairs.iter().enumerate() {
            let delta = j as f64 * dtheta + k as f64 * dphi;
            let (sd, cd) = delta.sin_cos();
            let cc = self.coeffs[reps.pair_offset + 2 * r];
            let cs = self.coeffs[reps.pair_offset + 2 * r + 1];
            coeffs[reps.pair_offset + 2 * r] = cc * cd + cs * sd;
            coeffs[reps.pair_offset + 2 * r + 1] = -cc * sd + cs * cd;
        }
        RandomSection {
            basis: self.basis.clone(),
            coeffs,
            provenance: self.provenance,
        }
    }

    /// Exact finite-sum evaluation of a chart derivative at a point.
    pub fn eval(&self, p: Point, deriv: DerivOrder) -> Result<f64> {
        let values = self.basis.mode_values(p, deriv)?;
        Ok(values
            .iter()
            .zip(self.coeffs.iter())
            .map(|(v, c)| v * c)
            .sum())
    }

    /// Fused evaluation of the full 2-jet; one trigonometric evaluation per
    /// frequency pair on the flat manifolds, one Legendre-table build per
    /// point on the sphere.
    pub fn jet2(&self, p: Point) -> Result<Jet2> {
        validate_point(self.basis.manifold, p, true)?;
        let mut jet = Jet2::default();
        match &self.basis.layout {
            Layout::Circle(reps) => {
                if let Some(idx) = reps.const_index {
                    jet.value += self.coeffs[idx] / TAU.sqrt();
                }
                let norm = 1.0 / PI.sqrt();
                for (r, &k) in reps.pairs.iter().enumerate() {
                    let kf = k as f64;
                    let (s, c) = (kf * p[0]).sin_cos();
                    let a = self.coeffs[reps.pair_offset + 2 * r];
                    let b = self.coeffs[reps.pair_offset + 2 * r + 1];
                    let even = (a * c + b * s) * norm;
                    let odd = (-a * s + b * c) * norm;
                    jet.value += even;
                    jet.dt += kf * odd;
                    jet.dtt -= kf * kf * even;
                }
            }
            Layout::Torus(reps) => {
                if let Some(idx) = reps.const_index {
                    jet.value += self.coeffs[idx] / TAU;
                }
                let norm = 1.0 / (SQRT_2 * PI);
                for (r, &(j, k)) in reps.pairs.iter().enumerate() {
                    let (jf, kf) = (j as f64, k as f64);
                    let (s, c) = (jf * p[0] + kf * p[1]).sin_cos();
                    let a = self.coeffs[reps.pair_offset + 2 * r];
                    let b = self.coeffs[reps.pair_offset + 2 * r + 1];
                    let even = (a * c + b * s) * norm;
                    let odd = (-a * s + b * c) * norm;
                    jet.value += even;
                    jet.dt += jf * odd;
                    jet.dp += kf * odd;
                    jet.dtt -= jf * jf * even;
                    jet.dtp -= jf * kf * even;
                    jet.dpp -= kf * kf * even;
                }
            }
            Layout::Sphere { lmax, lms } => {
                // Aggregate per azimuthal order first: A_m/B_m carry the
                // Legendre sums for value, d/dtheta and d^2/dtheta^2.
                let tables = LegendreTables::with_derivatives(*lmax, p[0]);
                let mut acc = vec![[0.0f64; 6]; *lmax + 1];
                for (idx, &(l, m)) in lms.iter().enumerate() {
                    let c = self.coeffs[idx];
                    let mm = m.unsigned_abs() as usize;
                    let t = tri(l as usize, mm);
                    let w = if m == 0 { c } else { SQRT_2 * c };
                    let slot = &mut acc[mm];
                    if m >= 0 {
                        slot[0] += w * tables.p[t];
                        slot[1] += w * tables.dp[t];
                        slot[2] += w * tables.d2p[t];
                    } else {
                        slot[3] += w * tables.p[t];
                        slot[4] += w * tables.dp[t];
                        slot[5] += w * tables.d2p[t];
                    }
                }
                for (mm, slot) in acc.iter().enumerate() {
                    let mf = mm as f64;
                    let (s, c) = (mf * p[1]).sin_cos();
                    let even0 = slot[0] * c + slot[3] * s;
                    let even1 = slot[1] * c + slot[4] * s;
                    let odd0 = -slot[0] * s + slot[3] * c;
                    let odd1 = -slot[1] * s + slot[4] * c;
                    jet.value += even0;
                    jet.dt += even1;
                    jet.dtt += slot[2] * c + slot[5] * s;
                    jet.dp += mf * odd0;
                    jet.dtp += mf * odd1;
                    jet.dpp -= mf * mf * even0;
                }
            }
        }
        Ok(jet)
    }
}

/// One row of the kernel-asymptotics comparison table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticsRow {
    pub l: f64,
    pub exact: f64,
    pub predicted: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsTable {
    pub rows: Vec<AsymptoticsRow>,
    /// Whether the relative error decreased at every step of the sweep.
    pub decreasing: bool,
}

/// Leading-term coefficient of the kernel entry for a derivative pair: the
/// moment of the monomial `xi_1^{a1+a2} xi_2^{b1+b2}` over the body, with the
/// parity sign `(-1)^{(|d1|-|d2|)/2}`; zero for odd pairs.
fn predicted_moment(moments: &MomentSet, d1: DerivOrder, d2: DerivOrder) -> f64 {
    let p = d1.0 + d2.0;
    let q = d1.1 + d2.1;
    if p % 2 == 1 || q % 2 == 1 {
        return 0.0;
    }
    let order1 = (d1.0 + d1.1) as i32;
    let order2 = (d2.0 + d2.1) as i32;
    let sign = if (order1 - order2).rem_euclid(4) == 2 {
        -1.0
    } else {
        1.0
    };
    let moment = match (p, q) {
        (0, 0) => moments.c0,
        (2, 0) | (0, 2) => moments.c1,
        (2, 2) => moments.c2,
        (4, 0) | (0, 4) => moments.c4,
        _ => unreachable!("jet orders are at most 2"),
    };
    sign * moment
}

/// Compares exact kernel entries against their leading-term predictions
/// `moment * L^{(n + |d1| + |d2|)/2}` over an increasing sweep of
/// thresholds.
pub fn verify_kernel_asymptotics(
    manifold: Manifold,
    window: SpectralWindow,
    sweep: &[f64],
    d1: DerivOrder,
    d2: DerivOrder,
    point: Point,
) -> Result<AsymptoticsTable> {
    if sweep.len() < 2 || sweep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotoneSweep(sweep.to_vec()));
    }
    let n = manifold.dim();
    let gamma = match window {
        SpectralWindow::Full => 0.0,
        SpectralWindow::Window(a) => a,
        SpectralWindow::Pure => {
            return Err(Error::Config(
                "asymptotics sweeps need a full or window ensemble".into(),
            ))
        }
    };
    let moments = annulus_moments(n, gamma, 2.0)?;
    let coefficient = predicted_moment(&moments, d1, d2);
    let exponent = (n + d1.0 + d1.1 + d2.0 + d2.1) as f64 / 2.0;
    let mut rows = Vec::with_capacity(sweep.len());
    for &l in sweep {
        let basis = build_basis(manifold, l, window)?;
        let exact = basis.kernel_diag(point, d1, d2)?;
        let predicted = coefficient * l.powf(exponent);
        let rel_error = if predicted != 0.0 {
            ((exact - predicted) / predicted).abs()
        } else {
            exact.abs()
        };
        rows.push(AsymptoticsRow {
            l,
            exact,
            predicted,
            rel_error,
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].rel_error <= w[0].rel_error);
    Ok(AsymptoticsTable { rows, decreasing })
}
