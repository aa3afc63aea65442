//! Marching-squares extraction of nodal curves, on periodic grids (torus)
//! and on theta-bounded grids with polar caps (sphere).
//!
//! Component counting unions mixed cells (cells whose corner signs differ)
//! across shared edges; this is the set-level notion of connectedness at
//! grid resolution and matches a brute-force flood fill. The segment soup is
//! extracted separately with the usual center-value disambiguation of saddle
//! cells.

/// Union-find with path halving.
pub struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Pole values for the two spherical caps left out of the theta range.
#[derive(Debug, Clone, Copy)]
pub struct CapValues {
    /// Value of the section at theta = 0.
    pub north: f64,
    /// Value at theta = pi.
    pub south: f64,
}

/// Connected-component count of the zero set.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceTopology {
    pub b0: usize,
    pub degenerate: bool,
    /// Nodal passages into the unmeshed polar caps (half the boundary-ring
    /// crossings); any tangency inside a cap is invisible to the search, so
    /// trials with cap passages are treated like exclusion events.
    pub cap_entries: usize,
}

/// Vertex-value grid: `rows x cols`, row-major, columns always periodic;
/// rows periodic exactly when `wrap_rows`.
pub struct MarchingInput<'a> {
    pub values: &'a [f64],
    pub rows: usize,
    pub cols: usize,
    pub wrap_rows: bool,
    /// Degeneracy scale: a cell whose four corners all sit below
    /// `1e-12 * scale` flags the extraction degenerate.
    pub scale: f64,
}

impl MarchingInput<'_> {
    fn value(&self, i: usize, j: usize) -> f64 {
        self.values[(i % self.rows) * self.cols + (j % self.cols)]
    }

    fn cell_rows(&self) -> usize {
        if self.wrap_rows {
            self.rows
        } else {
            self.rows - 1
        }
    }

    /// Corner values of cell `(i, j)`: `(theta_i, phi_j)`, theta above, phi
    /// right, both.
    fn corners(&self, i: usize, j: usize) -> [f64; 4] {
        [
            self.value(i, j),
            self.value(i + 1, j),
            self.value(i, j + 1),
            self.value(i + 1, j + 1),
        ]
    }
}

fn positive(v: f64) -> bool {
    v >= 0.0
}

fn mixed(corners: &[f64; 4]) -> bool {
    let pos = corners.iter().filter(|v| positive(**v)).count();
    pos != 0 && pos != 4
}

/// Counts connected components of the zero set: mixed cells are united
/// across shared edges (periodically in phi, and in theta on the torus).
///
/// With bounded rows, `caps` closes the two boundary rings analytically: a
/// ring whose restriction changes sign exactly twice joins the two cells
/// through the cap; more crossings than the cap can resolve, or a pole of
/// the opposite sign behind an uncrossed ring, flag the trial degenerate.
pub fn count_components(input: &MarchingInput<'_>, caps: Option<CapValues>) -> SurfaceTopology {
    let cols = input.cols;
    let cell_rows = input.cell_rows();
    let cell_id = |i: usize, j: usize| -> u32 { ((i % cell_rows) * cols + (j % cols)) as u32 };
    let mut is_mixed = vec![false; cell_rows * cols];
    let mut degenerate = false;
    let tiny = 1e-12 * input.scale;

    for i in 0..cell_rows {
        for j in 0..cols {
            let corners = input.corners(i, j);
            if corners.iter().all(|v| v.abs() < tiny) {
                degenerate = true;
                continue;
            }
            is_mixed[i * cols + j] = mixed(&corners);
        }
    }

    let mut uf = UnionFind::new(cell_rows * cols);
    for i in 0..cell_rows {
        for j in 0..cols {
            if !is_mixed[i * cols + j] {
                continue;
            }
            // Right neighbor (phi wraps).
            let right = ((j + 1) % cols, i);
            if is_mixed[right.1 * cols + right.0] {
                uf.union(cell_id(i, j), cell_id(i, j + 1));
            }
            // Upward neighbor in theta.
            if i + 1 < cell_rows || input.wrap_rows {
                let up = (i + 1) % cell_rows;
                if is_mixed[up * cols + j] {
                    uf.union(cell_id(i, j), cell_id(i + 1, j));
                }
            }
        }
    }

    let mut cap_entries = 0usize;
    if !input.wrap_rows {
        let caps = caps.expect("bounded rows need cap values");
        for (ring_row, cell_row, pole) in
            [(0usize, 0usize, caps.north), (input.rows - 1, cell_rows - 1, caps.south)]
        {
            // Crossings of the boundary ring, owned by the boundary cells.
            let crossing_cells: Vec<usize> = (0..cols)
                .filter(|&j| {
                    positive(input.value(ring_row, j)) != positive(input.value(ring_row, j + 1))
                })
                .collect();
            cap_entries += crossing_cells.len() / 2;
            match crossing_cells.len() {
                0 => {
                    if positive(input.value(ring_row, 0)) != positive(pole) {
                        // A nodal circle hides inside the cap.
                        degenerate = true;
                    }
                }
                2 => uf.union(
                    cell_id(cell_row, crossing_cells[0]),
                    cell_id(cell_row, crossing_cells[1]),
                ),
                _ => degenerate = true,
            }
        }
    }

    let mut roots = std::collections::HashSet::new();
    for i in 0..cell_rows {
        for j in 0..cols {
            if is_mixed[i * cols + j] {
                roots.insert(uf.find(cell_id(i, j)));
            }
        }
    }
    SurfaceTopology {
        b0: roots.len(),
        degenerate,
        cap_entries,
    }
}

/// One nodal segment in fractional grid coordinates `(row, col)`.
pub type Segment = [[f64; 2]; 2];

/// Extracts the nodal curve as a segment soup by linear interpolation along
/// crossed edges; ambiguous (saddle) cells are resolved by the sign of the
/// cell-center value supplied by `center_value`.
pub fn extract_segments(
    input: &MarchingInput<'_>,
    mut center_value: impl FnMut(usize, usize) -> f64,
) -> Vec<Segment> {
    let cols = input.cols;
    let cell_rows = input.cell_rows();
    let mut segments = Vec::new();
    let cross = |a: f64, b: f64| -> f64 { a / (a - b) };
    for i in 0..cell_rows {
        for j in 0..cols {
            let [a, b, d, c] = input.corners(i, j);
            let (fi, fj) = (i as f64, j as f64);
            // Crossing points on the four edges, in (row, col) fractions.
            let left = [fi + cross(a, b), fj];
            let right = [fi + cross(d, c), fj + 1.0];
            let bottom = [fi, fj + cross(a, d)];
            let top = [fi + 1.0, fj + cross(b, c)];
            let mut ends: Vec<[f64; 2]> = Vec::with_capacity(4);
            if positive(a) != positive(b) {
                ends.push(left);
            }
            if positive(d) != positive(c) {
                ends.push(right);
            }
            if positive(a) != positive(d) {
                ends.push(bottom);
            }
            if positive(b) != positive(c) {
                ends.push(top);
            }
            match ends.len() {
                0 => {}
                2 => segments.push([ends[0], ends[1]]),
                4 => {
                    // ends order: [left, right, bottom, top].
                    if positive(center_value(i, j)) == positive(a) {
                        // Branches hug the theta-above and phi-right corners.
                        segments.push([ends[0], ends[3]]);
                        segments.push([ends[2], ends[1]]);
                    } else {
                        segments.push([ends[0], ends[2]]);
                        segments.push([ends[3], ends[1]]);
                    }
                }
                _ => unreachable!("cells cross an even number of edges"),
            }
        }
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus_grid(n: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let h = std::f64::consts::TAU / n as f64;
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                v[i * n + j] = f((i as f64 + 0.5) * h, j as f64 * h);
            }
        }
        v
    }

    fn torus_components(n: usize, f: impl Fn(f64, f64) -> f64) -> SurfaceTopology {
        let values = torus_grid(n, &f);
        count_components(
            &MarchingInput {
                values: &values,
                rows: n,
                cols: n,
                wrap_rows: true,
                scale: 1.0,
            },
            None,
        )
    }

    #[test]
    fn two_parallel_circles() {
        let topo = torus_components(64, |t, _| t.cos());
        assert_eq!(topo.b0, 2);
        assert!(!topo.degenerate);
    }

    #[test]
    fn crossed_diagonals_are_one_component() {
        // cos t + cos p vanishes on two circles that intersect in two
        // points; as a point set this is a single component.
        let topo = torus_components(96, |t, p| t.cos() + p.cos());
        assert_eq!(topo.b0, 1);
    }

    #[test]
    fn tilted_bands_wrap_both_directions() {
        let topo = torus_components(64, |t, p| (t + p).sin());
        assert_eq!(topo.b0, 2);
    }

    #[test]
    fn separated_ovals_are_counted_separately() {
        // Two small circles far apart.
        let f = |t: f64, p: f64| {
            let d1 = (t - 1.5).powi(2) + (p - 1.5).powi(2);
            let d2 = (t - 4.5).powi(2) + (p - 4.5).powi(2);
            (d1 - 0.25).min(d2 - 0.25)
        };
        let topo = torus_components(96, f);
        assert_eq!(topo.b0, 2);
    }

    #[test]
    fn bounded_rows_with_caps() {
        // Sphere-style grid for cos(theta): one equatorial circle; the caps
        // carry no zeros and the poles have consistent signs.
        let rows = 33;
        let cols = 64;
        let h = std::f64::consts::PI / (rows + 1) as f64;
        let mut values = vec![0.0; rows * cols];
        for i in 0..rows {
            let theta = (i + 1) as f64 * h;
            for j in 0..cols {
                values[i * cols + j] = theta.cos();
            }
        }
        let topo = count_components(
            &MarchingInput {
                values: &values,
                rows,
                cols,
                wrap_rows: false,
                scale: 1.0,
            },
            Some(CapValues {
                north: 1.0,
                south: -1.0,
            }),
        );
        assert_eq!(topo.b0, 1);
        assert!(!topo.degenerate);
    }

    #[test]
    fn curve_through_cap_joins_across_the_ring() {
        // A single tilted great circle on the sphere passes through both
        // caps; the analytic cap closure must keep it one component.
        let rows = 41;
        let cols = 80;
        let h = std::f64::consts::PI / (rows + 1) as f64;
        let hp = std::f64::consts::TAU / cols as f64;
        // z-axis tilted toward x: f = cos(theta) - 2 sin(theta) cos(phi)
        // vanishes on a great circle through the polar caps.
        let f = |theta: f64, phi: f64| theta.cos() - 2.0 * theta.sin() * phi.cos();
        let mut values = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                values[i * cols + j] = f((i + 1) as f64 * h, j as f64 * hp);
            }
        }
        let topo = count_components(
            &MarchingInput {
                values: &values,
                rows,
                cols,
                wrap_rows: false,
                scale: 1.0,
            },
            Some(CapValues {
                north: f(1e-9, 0.0),
                south: f(std::f64::consts::PI - 1e-9, 0.0),
            }),
        );
        assert_eq!(topo.b0, 1, "tilted great circle split by the caps");
    }

    #[test]
    fn hidden_cap_component_flags_degenerate() {
        let rows = 17;
        let cols = 32;
        let values = vec![1.0; rows * cols];
        let topo = count_components(
            &MarchingInput {
                values: &values,
                rows,
                cols,
                wrap_rows: false,
                scale: 1.0,
            },
            Some(CapValues {
                north: -1.0,
                south: 1.0,
            }),
        );
        assert_eq!(topo.b0, 0);
        assert!(topo.degenerate);
    }

    #[test]
    fn all_small_cell_flags_degenerate() {
        let n = 8;
        let values = vec![1e-15; n * n];
        let topo = count_components(
            &MarchingInput {
                values: &values,
                rows: n,
                cols: n,
                wrap_rows: true,
                scale: 1.0,
            },
            None,
        );
        assert!(topo.degenerate);
    }

    #[test]
    fn segment_soup_closes_loops() {
        let n = 64;
        let f = |t: f64, _p: f64| t.cos();
        let values = torus_grid(n, f);
        let input = MarchingInput {
            values: &values,
            rows: n,
            cols: n,
            wrap_rows: true,
            scale: 1.0,
        };
        let h = std::f64::consts::TAU / n as f64;
        let segments = extract_segments(&input, |i, j| {
            f((i as f64 + 1.0) * h, (j as f64 + 0.5) * h)
        });
        // Two full circles cross every column once each.
        assert_eq!(segments.len(), 2 * n);
        // Interpolated crossings sit on theta = pi/2 and 3 pi/2 (in row
        // fractions: theta = (row + 0.5) h).
        for seg in &segments {
            for end in seg {
                let theta = (end[0] + 0.5) * h;
                let d1 = (theta - std::f64::consts::FRAC_PI_2).abs();
                let d2 = (theta - 3.0 * std::f64::consts::FRAC_PI_2).abs();
                assert!(d1.min(d2) < 1e-9, "crossing at theta {theta}");
            }
        }
    }
}
