//! Tangency detection: critical points of a fixed Morse function restricted
//! to the nodal curve, with their indices.
//!
//! A point is critical for `p` on `{s = 0}` iff `s = 0` and
//! `g := det(ds, dp) = 0`. Candidate cells are those where both fields
//! change sign on the evaluation grid; Newton refines each candidate on the
//! exact 2x2 system. At a refined root, `lambda` solves `dp = lambda ds`,
//! the nodal tangent `v` spans `ker ds`, and the restricted second
//! derivative
//!
//! ```text
//! q = Hess p(v, v) - lambda Hess s(v, v)
//! ```
//!
//! (raw chart second derivatives; the connection terms cancel against
//! `dp = lambda ds`) classifies the index: 1 where `q < 0`, 0 where
//! `q > 0`.

use crate::ensembles::{Jet2, Point, RandomSection};
use crate::nodal::{chart_distance, GridGeometry, MorseFunctionSpec};

/// A refined and classified tangency.
#[derive(Debug, Clone, Copy)]
pub struct CriticalPoint {
    pub point: Point,
    /// Morse index of the restriction: 0 for a local minimum of `p` along
    /// the curve, 1 for a local maximum.
    pub index: usize,
    /// Restricted second derivative along the nodal tangent.
    pub q: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Default)]
pub struct CritOutcome {
    pub points: Vec<CriticalPoint>,
    /// Roots discarded for sitting within the exclusion radius of a critical
    /// point of `p` itself.
    pub excluded: usize,
    /// Near-tangential zero (`|ds|` small), near-degenerate restricted
    /// Hessian, or Newton non-convergence.
    pub degenerate: bool,
}

/// Field scales used for relative degeneracy thresholds, from the kernel
/// diagonal.
#[derive(Debug, Clone, Copy)]
pub struct FieldScales {
    /// sqrt of Var s.
    pub value: f64,
    /// sqrt of Var (ds/dtheta).
    pub gradient: f64,
    /// sqrt of Var (d2s/dtheta2).
    pub hessian: f64,
}

const MAX_NEWTON_ITER: usize = 50;
const DEDUP_RADIUS: f64 = 1e-6;
const DEGENERACY_REL: f64 = 1e-8;

/// Result of the damped Newton refinement from one candidate cell.
#[derive(Debug, Clone, Copy)]
pub enum NewtonOutcome {
    /// Converged to a joint root of `(s, g)`.
    Root(Point),
    /// Certified no root near the cell: descent stalled at a residual far
    /// from zero.
    Spurious,
    /// Stalled in the gray zone: plausibly an ill-conditioned tangency the
    /// grid cannot resolve.
    Stalled,
}

pub struct CriticalSearch<'a> {
    pub section: &'a RandomSection,
    pub morse: &'a MorseFunctionSpec,
    pub geometry: &'a GridGeometry,
    /// Grid values of s and of g = det(ds, dp) at the grid vertices.
    pub s_grid: &'a [f64],
    pub g_grid: &'a [f64],
    pub scales: FieldScales,
    pub newton_tol: f64,
}

impl CriticalSearch<'_> {
    fn jets(&self, x: Point) -> Option<(Jet2, Jet2)> {
        let s = self.section.jet2(x).ok()?;
        let p = self.morse.jet(x);
        Some((s, p))
    }

    /// Residual pair `(s, g)` and its Jacobian at `x`.
    fn system(&self, x: Point) -> Option<([f64; 2], [[f64; 2]; 2])> {
        let (s, p) = self.jets(x)?;
        let g = s.dt * p.dp - s.dp * p.dt;
        let g_t = s.dtt * p.dp + s.dt * p.dtp - s.dtp * p.dt - s.dp * p.dtt;
        let g_p = s.dtp * p.dp + s.dt * p.dpp - s.dpp * p.dt - s.dp * p.dtp;
        Some(([s.value, g], [[s.dt, s.dp], [g_t, g_p]]))
    }

    fn scaled_residual(&self, f: [f64; 2]) -> f64 {
        let scale_s = self.scales.value;
        let scale_g = self.scales.gradient * self.morse.gradient_scale();
        (f[0] / scale_s).hypot(f[1] / scale_g)
    }

    /// Damped Newton on `(s, g) = 0` from a seed point, descending the
    /// scaled residual norm.
    ///
    /// Candidate cells frequently carry sign changes of both fields without
    /// a joint root (the zero curves pass without intersecting); plain
    /// Newton limit-cycles around the fold there. Backtracking makes the
    /// outcome a certificate. When descent stalls, the full Newton step
    /// bounds the distance to a root: a stall with a sub-dedup step is a
    /// converged root; a stall with a larger step sits at a positive merit
    /// minimum, i.e. the two zero curves pass without crossing - either no
    /// tangency at all, or a minimum-maximum pair at the edge of
    /// annihilation whose joint omission keeps the counts balanced
    /// ([`NewtonOutcome::Spurious`]). [`NewtonOutcome::Stalled`] is reserved
    /// for exhausting the iteration budget while still descending.
    pub fn newton_from(&self, start: Point) -> NewtonOutcome {
        let accept: f64 = self.newton_tol;
        let step_cap = 2.0 * self.geometry.ht.max(self.geometry.hp);
        let mut x = start;
        let Some((mut f, mut jac)) = self.system(x) else {
            return NewtonOutcome::Stalled;
        };
        let mut residual = self.scaled_residual(f);
        for _ in 0..MAX_NEWTON_ITER {
            if residual < accept {
                return NewtonOutcome::Root(x);
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det.abs() < 1e-300 {
                return NewtonOutcome::Spurious;
            }
            let full_step = [
                -(f[0] * jac[1][1] - f[1] * jac[0][1]) / det,
                -(f[1] * jac[0][0] - f[0] * jac[1][0]) / det,
            ];
            let full_norm = (full_step[0] * full_step[0] + full_step[1] * full_step[1]).sqrt();
            let stall = |x: Point| {
                if full_norm < DEDUP_RADIUS {
                    // Within dedup distance of the root it was chasing.
                    NewtonOutcome::Root(x)
                } else {
                    NewtonOutcome::Spurious
                }
            };
            let mut dx = full_step;
            if full_norm > step_cap {
                dx[0] *= step_cap / full_norm;
                dx[1] *= step_cap / full_norm;
            }
            // Backtracking line search on the residual norm.
            let mut t = 1.0f64;
            let accepted = loop {
                let Some(next) = self
                    .geometry
                    .normalize_point([x[0] + t * dx[0], x[1] + t * dx[1]])
                else {
                    return stall(x);
                };
                if let Some((f_next, jac_next)) = self.system(next) {
                    let r_next = self.scaled_residual(f_next);
                    if r_next < residual * (1.0 - 1e-4 * t) {
                        break Some((next, f_next, jac_next, r_next));
                    }
                }
                t *= 0.5;
                if t < 1.0 / 1024.0 {
                    break None;
                }
            };
            match accepted {
                Some((next, f_next, jac_next, r_next)) => {
                    x = next;
                    f = f_next;
                    jac = jac_next;
                    residual = r_next;
                }
                None => return stall(x),
            }
        }
        // Budget exhausted: classify by the same step-norm bound. Slow
        // descent happens along folds of the system, where the
        // pair-annihilation argument applies just as at a strict stall.
        if residual < accept {
            return NewtonOutcome::Root(x);
        }
        let Some((f, jac)) = self.system(x) else {
            return NewtonOutcome::Stalled;
        };
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 {
            return NewtonOutcome::Spurious;
        }
        let step = [
            -(f[0] * jac[1][1] - f[1] * jac[0][1]) / det,
            -(f[1] * jac[0][0] - f[0] * jac[1][0]) / det,
        ];
        if (step[0] * step[0] + step[1] * step[1]).sqrt() < DEDUP_RADIUS {
            NewtonOutcome::Root(x)
        } else {
            NewtonOutcome::Spurious
        }
    }

    /// Runs the full search over candidate cells.
    pub fn run(&self) -> CritOutcome {
        let geo = self.geometry;
        let rows = geo.rows;
        let cols = geo.cols;
        let cell_rows = if geo.wrap_rows { rows } else { rows - 1 };
        let changes = |grid: &[f64], i: usize, j: usize| -> bool {
            let v = [
                grid[(i % rows) * cols + j % cols],
                grid[((i + 1) % rows) * cols + j % cols],
                grid[(i % rows) * cols + (j + 1) % cols],
                grid[((i + 1) % rows) * cols + (j + 1) % cols],
            ];
            let pos = v.iter().filter(|x| **x >= 0.0).count();
            pos != 0 && pos != 4
        };
        // g changing sign anywhere on the 4x4 vertex block around the cell:
        // a root close to a cell corner can leave the g crossing pattern in
        // a neighboring cell only, so the strict same-cell test misses it.
        let g_changes_nearby = |i: usize, j: usize| -> bool {
            let mut any_pos = false;
            let mut any_neg = false;
            for di in -1i64..=2 {
                let row = if geo.wrap_rows {
                    (i as i64 + di).rem_euclid(rows as i64) as usize
                } else {
                    (i as i64 + di).clamp(0, rows as i64 - 1) as usize
                };
                for dj in -1i64..=2 {
                    let col = (j as i64 + dj).rem_euclid(cols as i64) as usize;
                    if self.g_grid[row * cols + col] >= 0.0 {
                        any_pos = true;
                    } else {
                        any_neg = true;
                    }
                }
            }
            any_pos && any_neg
        };

        let mut outcome = CritOutcome::default();
        let mut accepted: Vec<Point> = Vec::new();
        for i in 0..cell_rows {
            for j in 0..cols {
                if !(changes(self.s_grid, i, j) && g_changes_nearby(i, j)) {
                    continue;
                }
                let center = [
                    geo.theta0 + (i as f64 + 0.5) * geo.ht,
                    geo.phi0 + (j as f64 + 0.5) * geo.hp,
                ];
                let near_zone = self.morse.distance_to_critical(center)
                    < self.morse.exclusion_radius + 2.0 * geo.ht.max(geo.hp);
                let root = match self.newton_from(center) {
                    NewtonOutcome::Root(root) => root,
                    NewtonOutcome::Spurious => continue,
                    NewtonOutcome::Stalled => {
                        if near_zone {
                            // dp ~ 0 makes g identically small around
                            // Crit(p) and the refinement ill-posed there;
                            // tangencies in the zone are discarded by
                            // design anyway.
                            outcome.excluded += 1;
                        } else {
                            outcome.degenerate = true;
                        }
                        continue;
                    }
                };
                if accepted
                    .iter()
                    .any(|&p| chart_distance(self.morse.manifold, p, root) < DEDUP_RADIUS)
                {
                    continue;
                }
                accepted.push(root);
                if self.morse.distance_to_critical(root) < self.morse.exclusion_radius {
                    outcome.excluded += 1;
                    continue;
                }
                let Some((s, p)) = self.jets(root) else {
                    outcome.degenerate = true;
                    continue;
                };
                let ds_norm = (s.dt * s.dt + s.dp * s.dp).sqrt();
                if ds_norm < DEGENERACY_REL * self.scales.gradient {
                    // Nearly non-transversal zero.
                    outcome.degenerate = true;
                    continue;
                }
                let lambda = (p.dt * s.dt + p.dp * s.dp) / (ds_norm * ds_norm);
                let v = [-s.dp / ds_norm, s.dt / ds_norm];
                let hess_q = |jet: &Jet2| {
                    jet.dtt * v[0] * v[0] + 2.0 * jet.dtp * v[0] * v[1] + jet.dpp * v[1] * v[1]
                };
                let q = hess_q(&p) - lambda * hess_q(&s);
                let q_scale =
                    lambda.abs() * self.scales.hessian + self.morse.hessian_scale();
                if q.abs() < DEGENERACY_REL * q_scale {
                    // The restriction is locally non-Morse at resolution.
                    outcome.degenerate = true;
                    continue;
                }
                outcome.points.push(CriticalPoint {
                    point: root,
                    index: if q < 0.0 { 1 } else { 0 },
                    q,
                    lambda,
                });
            }
        }
        outcome
    }
}
