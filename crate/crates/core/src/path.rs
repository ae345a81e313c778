//! Joint-space paths parameterized by a scalar path coordinate `s ∈ [0, 1]`.
//!
//! A path is either fitted as a natural cubic spline through waypoints or
//! supplied directly as derivative samples. Everything downstream only sees
//! [`PathSamples`]: `q`, `dq/ds` and `d²q/ds²` on a [`PathGrid`].

use crate::error::{ensure_finite, Error, Result};

/// How waypoints are assigned path-coordinate values before splining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameterization {
    #[default]
    Uniform,
    ChordLength,
}

/// Natural cubic spline of a single scalar coordinate.
///
/// On `[knots[i], knots[i+1]]` with `t = s - knots[i]` the value is
/// `a[i] + b[i] t + c[i] t² + d[i] t³`.
#[derive(Debug, Clone)]
struct CubicSpline {
    knots: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl CubicSpline {
    fn natural(knots: &[f64], values: &[f64]) -> Self {
        let n = knots.len() - 1;
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();

        // Second derivatives at the knots, zero at both ends.
        let mut m = vec![0.0; n + 1];
        if n >= 2 {
            let size = n - 1;
            let mut diag = vec![0.0; size];
            let mut rhs = vec![0.0; size];
            for i in 1..n {
                diag[i - 1] = 2.0 * (h[i - 1] + h[i]);
                rhs[i - 1] = 6.0
                    * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
            }
            // Thomas algorithm; off-diagonals are h[i].
            for r in 1..size {
                let w = h[r] / diag[r - 1];
                diag[r] -= w * h[r];
                rhs[r] -= w * rhs[r - 1];
            }
            m[size] = rhs[size - 1] / diag[size - 1];
            for r in (0..size - 1).rev() {
                m[r + 1] = (rhs[r] - h[r + 1] * m[r + 2]) / diag[r];
            }
        }

        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        for i in 0..n {
            a.push(values[i]);
            b.push((values[i + 1] - values[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0);
            c.push(0.5 * m[i]);
            d.push((m[i + 1] - m[i]) / (6.0 * h[i]));
        }
        Self {
            knots: knots.to_vec(),
            a,
            b,
            c,
            d,
        }
    }

    fn segment(&self, s: f64) -> usize {
        let last = self.a.len() - 1;
        self.knots
            .partition_point(|&k| k <= s)
            .saturating_sub(1)
            .min(last)
    }

    fn eval(&self, s: f64) -> (f64, f64, f64) {
        let i = self.segment(s);
        let t = s - self.knots[i];
        let (a, b, c, d) = (self.a[i], self.b[i], self.c[i], self.d[i]);
        (
            a + t * (b + t * (c + t * d)),
            b + t * (2.0 * c + 3.0 * t * d),
            2.0 * c + 6.0 * t * d,
        )
    }
}

/// A joint-space path `q(s)` through waypoints.
#[derive(Debug, Clone)]
pub struct JointPath {
    waypoints: Vec<Vec<f64>>,
    knots: Vec<f64>,
    splines: Vec<CubicSpline>,
}

impl JointPath {
    /// Fits one natural cubic spline per joint through `waypoints`.
    pub fn fit(waypoints: &[Vec<f64>], parameterization: Parameterization) -> Result<Self> {
        fit_spline(waypoints, parameterization)
    }

    pub fn dof(&self) -> usize {
        self.waypoints[0].len()
    }

    pub fn waypoints(&self) -> &[Vec<f64>] {
        &self.waypoints
    }

    /// Path-coordinate value assigned to each waypoint.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Returns `(q, dq/ds, d²q/ds²)` at `s`.
    pub fn eval(&self, s: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.dof();
        let mut q = Vec::with_capacity(n);
        let mut dq = Vec::with_capacity(n);
        let mut ddq = Vec::with_capacity(n);
        for spline in &self.splines {
            let (v, d1, d2) = spline.eval(s);
            q.push(v);
            dq.push(d1);
            ddq.push(d2);
        }
        (q, dq, ddq)
    }
}

pub fn fit_spline(waypoints: &[Vec<f64>], parameterization: Parameterization) -> Result<JointPath> {
    if waypoints.len() < 2 {
        return Err(Error::Invalid(format!(
            "a path needs at least 2 waypoints, got {}",
            waypoints.len()
        )));
    }
    let n = waypoints[0].len();
    if n == 0 {
        return Err(Error::Dimension("waypoints have zero joints".into()));
    }
    for (i, w) in waypoints.iter().enumerate() {
        if w.len() != n {
            return Err(Error::Dimension(format!(
                "waypoint {i} has {} joints, expected {n}",
                w.len()
            )));
        }
        ensure_finite(w, "waypoint")?;
    }

    let count = waypoints.len();
    let knots: Vec<f64> = match parameterization {
        Parameterization::Uniform => (0..count)
            .map(|i| i as f64 / (count - 1) as f64)
            .collect(),
        Parameterization::ChordLength => {
            let mut cumulative = Vec::with_capacity(count);
            cumulative.push(0.0);
            for pair in waypoints.windows(2) {
                let chord = pair[0]
                    .iter()
                    .zip(&pair[1])
                    .map(|(a, b)| (b - a) * (b - a))
                    .sum::<f64>()
                    .sqrt();
                if chord == 0.0 {
                    return Err(Error::Invalid(
                        "chord-length parameterization needs distinct consecutive waypoints"
                            .into(),
                    ));
                }
                cumulative.push(cumulative.last().unwrap() + chord);
            }
            let total = *cumulative.last().unwrap();
            let mut knots: Vec<f64> = cumulative.into_iter().map(|c| c / total).collect();
            knots[count - 1] = 1.0;
            knots
        }
    };

    let splines = (0..n)
        .map(|j| {
            let values: Vec<f64> = waypoints.iter().map(|w| w[j]).collect();
            CubicSpline::natural(&knots, &values)
        })
        .collect();

    Ok(JointPath {
        waypoints: waypoints.to_vec(),
        knots,
        splines,
    })
}

/// Discretization `0 = s_0 < s_1 < … < s_N = 1` of the path coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    s: Vec<f64>,
    deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpacing {
    Uniform,
    Custom(Vec<f64>),
}

/// Minimum number of segments; jerk rows need four consecutive grid points.
pub const MIN_SEGMENTS: usize = 3;

pub const DEFAULT_SEGMENTS: usize = 50;

impl PathGrid {
    pub fn uniform(n_segments: usize) -> Result<Self> {
        make_grid(n_segments, GridSpacing::Uniform)
    }

    /// Builds a grid from explicit `s` values.
    pub fn from_values(s: Vec<f64>) -> Result<Self> {
        let n = s.len().saturating_sub(1);
        make_grid(n, GridSpacing::Custom(s))
    }

    /// Number of segments `N`.
    pub fn segments(&self) -> usize {
        self.deltas.len()
    }

    /// Number of grid points `N + 1`.
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    /// `Δ_k = s_{k+1} − s_k`.
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }
}

pub fn make_grid(n_segments: usize, spacing: GridSpacing) -> Result<PathGrid> {
    if n_segments < MIN_SEGMENTS {
        return Err(Error::Invalid(format!(
            "grid needs at least {MIN_SEGMENTS} segments, got {n_segments}"
        )));
    }
    let s = match spacing {
        GridSpacing::Uniform => {
            let mut s: Vec<f64> = (0..=n_segments)
                .map(|k| k as f64 / n_segments as f64)
                .collect();
            s[n_segments] = 1.0;
            s
        }
        GridSpacing::Custom(values) => {
            if values.len() != n_segments + 1 {
                return Err(Error::Dimension(format!(
                    "custom grid has {} points, expected {}",
                    values.len(),
                    n_segments + 1
                )));
            }
            ensure_finite(&values, "grid")?;
            if values[0] != 0.0 || values[n_segments] != 1.0 {
                return Err(Error::Invalid("custom grid must start at 0 and end at 1".into()));
            }
            if values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Invalid("custom grid must be strictly increasing".into()));
            }
            values
        }
    };
    let deltas = s.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(PathGrid { s, deltas })
}

/// Path geometry sampled on a grid: `q_k`, `q′_k`, `q″_k` for `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSamples {
    q: Vec<Vec<f64>>,
    dq: Vec<Vec<f64>>,
    ddq: Vec<Vec<f64>>,
}

impl PathSamples {
    /// Wraps precomputed samples, validating shape and finiteness.
    pub fn from_raw(q: Vec<Vec<f64>>, dq: Vec<Vec<f64>>, ddq: Vec<Vec<f64>>) -> Result<Self> {
        let len = q.len();
        if len == 0 {
            return Err(Error::Invalid("empty path samples".into()));
        }
        if dq.len() != len || ddq.len() != len {
            return Err(Error::Dimension(format!(
                "sample arrays have lengths {}, {}, {}",
                len,
                dq.len(),
                ddq.len()
            )));
        }
        let n = q[0].len();
        if n == 0 {
            return Err(Error::Dimension("samples have zero joints".into()));
        }
        for rows in [&q, &dq, &ddq] {
            for row in rows.iter() {
                if row.len() != n {
                    return Err(Error::Dimension(format!(
                        "sample row has {} joints, expected {n}",
                        row.len()
                    )));
                }
                ensure_finite(row, "path samples")?;
            }
        }
        Ok(Self { q, dq, ddq })
    }

    pub fn dof(&self) -> usize {
        self.q[0].len()
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn q(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn dq(&self) -> &[Vec<f64>] {
        &self.dq
    }

    pub fn ddq(&self) -> &[Vec<f64>] {
        &self.ddq
    }
}

/// Evaluates the spline and its analytic derivatives at every grid point.
pub fn sample_path(path: &JointPath, grid: &PathGrid) -> PathSamples {
    let mut q = Vec::with_capacity(grid.len());
    let mut dq = Vec::with_capacity(grid.len());
    let mut ddq = Vec::with_capacity(grid.len());
    for &s in grid.s() {
        let (a, b, c) = path.eval(s);
        q.push(a);
        dq.push(b);
        ddq.push(c);
    }
    PathSamples { q, dq, ddq }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(path: &JointPath, s: f64) -> (f64, f64, f64) {
        let (q, dq, ddq) = path.eval(s);
        (q[0], dq[0], ddq[0])
    }

    #[test]
    fn two_waypoints_give_a_line() {
        let path = fit_spline(&[vec![0.0], vec![1.0]], Parameterization::Uniform).unwrap();
        for s in [0.0, 0.3, 0.7, 1.0] {
            let (q, dq, ddq) = scalar(&path, s);
            assert!((q - s).abs() < 1e-14);
            assert!((dq - 1.0).abs() < 1e-14);
            assert!(ddq.abs() < 1e-14);
        }
    }

    #[test]
    fn collinear_waypoints_stay_linear() {
        let path = fit_spline(
            &[vec![0.0], vec![0.5], vec![1.0]],
            Parameterization::Uniform,
        )
        .unwrap();
        for s in [0.1, 0.5, 0.9] {
            let (q, dq, ddq) = scalar(&path, s);
            assert!((q - s).abs() < 1e-14);
            assert!((dq - 1.0).abs() < 1e-14);
            assert!(ddq.abs() < 1e-13);
        }
    }

    #[test]
    fn symmetric_three_point_spline() {
        // Hand-solved tridiagonal system: interior second derivative -12,
        // first piece q(s) = 3s - 4s³.
        let path = fit_spline(
            &[vec![0.0], vec![1.0], vec![0.0]],
            Parameterization::Uniform,
        )
        .unwrap();
        let (q, dq, ddq) = scalar(&path, 0.25);
        assert!((q - 0.6875).abs() < 1e-14);
        assert!((dq - 2.25).abs() < 1e-14);
        assert!((ddq + 6.0).abs() < 1e-13);
        let (q, dq, ddq) = scalar(&path, 0.5);
        assert!((q - 1.0).abs() < 1e-14);
        assert!(dq.abs() < 1e-13);
        assert!((ddq + 12.0).abs() < 1e-12);
        let (q, dq, _) = scalar(&path, 0.75);
        assert!((q - 0.6875).abs() < 1e-14);
        assert!((dq + 2.25).abs() < 1e-13);
    }

    #[test]
    fn chord_length_knots() {
        let path = fit_spline(
            &[vec![0.0, 0.0], vec![3.0, 4.0], vec![3.0, 9.0]],
            Parameterization::ChordLength,
        )
        .unwrap();
        assert_eq!(path.knots(), &[0.0, 0.5, 1.0]);
        let (q, _, _) = path.eval(0.5);
        assert!((q[0] - 3.0).abs() < 1e-12 && (q[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn spline_errors() {
        assert!(matches!(
            fit_spline(&[vec![0.0]], Parameterization::Uniform),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            fit_spline(&[vec![0.0], vec![0.0, 1.0]], Parameterization::Uniform),
            Err(Error::Dimension(_))
        ));
        assert!(fit_spline(&[vec![1.0], vec![1.0]], Parameterization::ChordLength).is_err());
    }

    #[test]
    fn grids() {
        let g = make_grid(4, GridSpacing::Uniform).unwrap();
        assert_eq!(g.s(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(g.deltas().iter().all(|&d| d == 0.25));

        let g = make_grid(4, GridSpacing::Custom(vec![0.0, 0.1, 0.5, 0.9, 1.0])).unwrap();
        let expected = [0.1, 0.4, 0.4, 0.1];
        for (d, e) in g.deltas().iter().zip(expected) {
            assert!((d - e).abs() < 1e-15);
        }

        assert!(make_grid(2, GridSpacing::Uniform).is_err());
        assert!(make_grid(3, GridSpacing::Custom(vec![0.0, 0.6, 0.5, 1.0])).is_err());
        assert!(make_grid(3, GridSpacing::Custom(vec![0.1, 0.2, 0.5, 1.0])).is_err());
        assert!(make_grid(3, GridSpacing::Custom(vec![0.0, 0.2, 0.5, 0.9])).is_err());
    }

    #[test]
    fn line_samples() {
        let path = fit_spline(&[vec![0.0], vec![1.0]], Parameterization::Uniform).unwrap();
        let grid = make_grid(4, GridSpacing::Uniform).unwrap();
        let samples = sample_path(&path, &grid);
        assert_eq!(samples.len(), 5);
        for k in 0..5 {
            assert!((samples.dq()[k][0] - 1.0).abs() < 1e-14);
            assert!(samples.ddq()[k][0].abs() < 1e-14);
        }
    }

    #[test]
    fn raw_samples_validation() {
        let ok = PathSamples::from_raw(vec![vec![0.0]; 4], vec![vec![1.0]; 4], vec![vec![0.0]; 4]);
        assert!(ok.is_ok());
        let short = PathSamples::from_raw(vec![vec![0.0]; 4], vec![vec![1.0]; 3], vec![vec![0.0]; 4]);
        assert!(matches!(short, Err(Error::Dimension(_))));
        let nan = PathSamples::from_raw(
            vec![vec![0.0]; 4],
            vec![vec![f64::NAN]; 4],
            vec![vec![0.0]; 4],
        );
        assert!(matches!(nan, Err(Error::Invalid(_))));
    }
}
