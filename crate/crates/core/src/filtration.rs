//! Ball filtrations `N_r(z)` and monotone reparameterizations.

use crate::error::{Error, Result};
use crate::length::{Backend, Length};
use crate::space::{FiniteMetricSpace, PointCloud};

/// Piecewise-linear non-decreasing function, extended past its first and
/// last breakpoints with the slopes of the boundary segments. A single
/// breakpoint denotes a constant function.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl MonotoneFunction {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidMonotoneFunction("no breakpoints".into()));
        }
        if breakpoints.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidMonotoneFunction("non-finite breakpoint".into()));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = breakpoints.into_iter().unzip();
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMonotoneFunction("x not strictly increasing".into()));
        }
        if ys.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidMonotoneFunction("y decreasing".into()));
        }
        if ys.iter().any(|&y| y < 0.0) {
            return Err(Error::InvalidMonotoneFunction("negative value".into()));
        }
        Ok(MonotoneFunction { xs, ys })
    }

    pub fn identity() -> Self {
        MonotoneFunction { xs: vec![0.0, 1.0], ys: vec![0.0, 1.0] }
    }

    /// `x ↦ slope·x + intercept`.
    pub fn affine(slope: f64, intercept: f64) -> Result<Self> {
        if slope < 0.0 {
            return Err(Error::InvalidMonotoneFunction("negative slope".into()));
        }
        Self::new(vec![(0.0, intercept), (1.0, intercept + slope)])
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn segment_slope(&self, i: usize) -> f64 {
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }

    pub fn left_slope(&self) -> f64 {
        if self.xs.len() < 2 {
            0.0
        } else {
            self.segment_slope(0)
        }
    }

    pub fn right_slope(&self) -> f64 {
        let m = self.xs.len();
        if m < 2 {
            0.0
        } else {
            self.segment_slope(m - 2)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let m = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.left_slope() * (x - self.xs[0]);
        }
        if x >= self.xs[m - 1] {
            return self.ys[m - 1] + self.right_slope() * (x - self.xs[m - 1]);
        }
        let i = self.xs.partition_point(|&b| b <= x) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
    }

    /// `inf { x | f(x) ≥ y }`, with `-∞` when every `x` qualifies and `+∞`
    /// when none does.
    pub fn generalized_inverse(&self, y: f64) -> f64 {
        let m = self.xs.len();
        if y <= self.ys[0] {
            let s = self.left_slope();
            return if s > 0.0 { self.xs[0] + (y - self.ys[0]) / s } else { f64::NEG_INFINITY };
        }
        if y > self.ys[m - 1] {
            let s = self.right_slope();
            return if s > 0.0 { self.xs[m - 1] + (y - self.ys[m - 1]) / s } else { f64::INFINITY };
        }
        // first breakpoint with ys[j] >= y; j >= 1 since y > ys[0]
        let j = self.ys.partition_point(|&v| v < y);
        let (x0, y0, x1, y1) = (self.xs[j - 1], self.ys[j - 1], self.xs[j], self.ys[j]);
        x0 + (y - y0) / (y1 - y0) * (x1 - x0)
    }

    /// Segment slopes are non-decreasing.
    pub fn is_convex(&self) -> bool {
        let slopes: Vec<f64> = (0..self.xs.len().saturating_sub(1))
            .map(|i| self.segment_slope(i))
            .collect();
        slopes.windows(2).all(|w| w[1] >= w[0] - 1e-12)
    }

    /// `sup_x |f(x) − g(x)|`, exact for piecewise-linear functions.
    pub fn sup_distance(&self, other: &MonotoneFunction) -> f64 {
        if (self.left_slope() - other.left_slope()).abs() > 1e-12
            || (self.right_slope() - other.right_slope()).abs() > 1e-12
        {
            return f64::INFINITY;
        }
        self.xs
            .iter()
            .chain(&other.xs)
            .map(|&x| (self.eval(x) - other.eval(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// Indices of the cloud points with `‖x − z‖ ≤ r`.
pub fn ball_neighborhood_cloud(cloud: &PointCloud, z: &[f64], r: f64) -> Vec<usize> {
    (0..cloud.len()).filter(|&i| cloud.distance_to(i, z) <= r).collect()
}

/// Indices of the points with `d(x, z) ≤ r`, for a center inside the space.
pub fn ball_neighborhood(space: &FiniteMetricSpace, center: usize, r: Length) -> Vec<usize> {
    (0..space.len()).filter(|&i| space.dist(center, i) <= r).collect()
}

/// Nested subsets `N_{f⁻¹(a)}(z)` of a finite metric space. Each point enters
/// at the single value `f(d(x, z))`.
#[derive(Debug, Clone)]
pub struct Filtration {
    space: FiniteMetricSpace,
    radii: Vec<f64>,
    values: Vec<f64>,
    repar: Option<MonotoneFunction>,
}

impl Filtration {
    /// Balls about an arbitrary point `center` of the ambient space.
    pub fn from_cloud(
        cloud: &PointCloud,
        center: &[f64],
        backend: Backend,
        repar: Option<MonotoneFunction>,
    ) -> Result<Self> {
        if !cloud.is_empty() && center.len() != cloud.dim() {
            return Err(Error::DimensionMismatch { expected: cloud.dim(), found: center.len() });
        }
        let space = FiniteMetricSpace::from_point_cloud(cloud, backend)?;
        let radii = (0..cloud.len()).map(|i| cloud.distance_to(i, center)).collect();
        Self::from_radii(space, radii, repar)
    }

    /// Balls about a point of the space itself.
    pub fn from_space(
        space: FiniteMetricSpace,
        center: usize,
        repar: Option<MonotoneFunction>,
    ) -> Result<Self> {
        if center >= space.len() {
            return Err(Error::IndexOutOfRange { index: center, len: space.len() });
        }
        let radii = (0..space.len()).map(|i| space.dist_f64(center, i)).collect();
        Self::from_radii(space, radii, repar)
    }

    /// Explicit distance of every point to the center.
    pub fn from_radii(
        space: FiniteMetricSpace,
        radii: Vec<f64>,
        repar: Option<MonotoneFunction>,
    ) -> Result<Self> {
        if radii.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), found: radii.len() });
        }
        if radii.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidArgument("radii must be finite and nonnegative".into()));
        }
        let values = match &repar {
            None => radii.clone(),
            Some(f) => radii
                .iter()
                .map(|&r| {
                    let v = f.eval(r);
                    if v < 0.0 {
                        Err(Error::NonPositiveFunction { radius: r })
                    } else {
                        Ok(v)
                    }
                })
                .collect::<Result<_>>()?,
        };
        Ok(Filtration { space, radii, values, repar })
    }

    /// Same space and radii under a different reparameterization.
    pub fn reparameterized(&self, repar: Option<MonotoneFunction>) -> Result<Self> {
        Self::from_radii(self.space.clone(), self.radii.clone(), repar)
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Filtration value at which each point enters.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn repar(&self) -> Option<&MonotoneFunction> {
        self.repar.as_ref()
    }

    /// Sorted distinct entry values.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn members_at(&self, a: f64) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] <= a).collect()
    }

    pub fn subspace_at(&self, a: f64) -> FiniteMetricSpace {
        self.space.subspace(&self.members_at(a))
    }

    /// Value at which every point of `tuple` is present.
    pub fn entry_value(&self, tuple: &[usize]) -> f64 {
        tuple.iter().map(|&i| self.values[i]).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Filtration of a point cloud by balls about `center`, optionally
/// reparameterized by `f`.
pub fn build_filtration(
    cloud: &PointCloud,
    center: &[f64],
    backend: Backend,
    f: Option<MonotoneFunction>,
) -> Result<Filtration> {
    Filtration::from_cloud(cloud, center, backend, f)
}
