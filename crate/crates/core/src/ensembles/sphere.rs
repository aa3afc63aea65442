//! Fully normalized associated Legendre functions and their first two
//! colatitude derivatives.
//!
//! The recurrences stay in the orthonormal normalization throughout
//! (`int |Y_lm|^2 dOmega = 1`), which keeps every intermediate bounded and
//! avoids factorial overflow past degree 30.

/// Triangular index into `(l, m)` tables with `0 <= m <= l`.
#[inline]
pub fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Tables of `P_l^m(cos theta)`, `d/dtheta` and `d^2/dtheta^2` for all
/// `0 <= m <= l <= lmax`, in spherical-harmonic normalization: the real
/// harmonics are `Y_{l,0} = P_l^0`, `Y_{l,m} = sqrt(2) P_l^m cos(m phi)` and
/// `Y_{l,-m} = sqrt(2) P_l^m sin(m phi)` for `m > 0`.
pub struct LegendreTables {
    pub lmax: usize,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub d2p: Vec<f64>,
}

impl LegendreTables {
    /// Values only; derivative tables are filled with zeros.
    pub fn values_only(lmax: usize, theta: f64) -> Self {
        Self::build(lmax, theta, false)
    }

    /// Values plus first and second theta derivatives. Requires
    /// `theta` strictly inside `(0, pi)`: the derivative relations divide by
    /// `sin theta`.
    pub fn with_derivatives(lmax: usize, theta: f64) -> Self {
        debug_assert!(
            theta > 0.0 && theta < std::f64::consts::PI,
            "derivative tables need 0 < theta < pi"
        );
        Self::build(lmax, theta, true)
    }

    fn build(lmax: usize, theta: f64, derivs: bool) -> Self {
        let len = tri(lmax, lmax) + 1;
        let mut p = vec![0.0; len];
        let mut dp = vec![0.0; len];
        let mut d2p = vec![0.0; len];
        let (sin_t, cos_t) = theta.sin_cos();

        p[tri(0, 0)] = (4.0 * std::f64::consts::PI).powf(-0.5);
        // Diagonal: P_m^m = sqrt((2m+1)/(2m)) sin(theta) P_{m-1}^{m-1}.
        for m in 1..=lmax {
            let f = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            p[tri(m, m)] = f * sin_t * p[tri(m - 1, m - 1)];
        }
        // First off-diagonal: P_{m+1}^m = sqrt(2m+3) cos(theta) P_m^m.
        for m in 0..lmax {
            p[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * cos_t * p[tri(m, m)];
        }
        // Three-term recurrence upward in l.
        for m in 0..=lmax {
            for l in (m + 2)..=lmax {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                    / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                p[tri(l, m)] = a * (cos_t * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
            }
        }

        if derivs {
            // sin(theta) dP_l^m/dtheta = l cos(theta) P_l^m - beta P_{l-1}^m
            // with beta = sqrt((2l+1)(l^2-m^2)/(2l-1)); the second derivative
            // follows from the associated Legendre ODE.
            for m in 0..=lmax {
                for l in m..=lmax {
                    let lf = l as f64;
                    let mf = m as f64;
                    let below = if l > m { p[tri(l - 1, m)] } else { 0.0 };
                    let beta = if l > 0 {
                        ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt()
                    } else {
                        0.0
                    };
                    let d1 = (lf * cos_t * p[tri(l, m)] - beta * below) / sin_t;
                    dp[tri(l, m)] = d1;
                    d2p[tri(l, m)] = -cos_t / sin_t * d1
                        - (lf * (lf + 1.0) - mf * mf / (sin_t * sin_t)) * p[tri(l, m)];
                }
            }
        }

        LegendreTables { lmax, p, dp, d2p }
    }
}
