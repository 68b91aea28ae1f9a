//! Finite metric spaces and Euclidean point clouds.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::length::{
    big_to_small, decimal_rational_of_f64, rational_sqrt, Backend, Length, Rational,
};

/// A finite set with a validated metric. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<Length>,
    backend: Backend,
    euclidean: bool,
}

impl FiniteMetricSpace {
    /// Builds a space from a real-valued table. In the rational backend every
    /// entry is read as the decimal it was written as (`0.5` is `1/2`).
    pub fn from_distance_matrix(table: &[Vec<f64>], backend: Backend) -> Result<Self> {
        check_square(table)?;
        let mut rows = Vec::with_capacity(table.len());
        for (i, row) in table.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteDistance { i, j });
                }
                out.push(match backend {
                    Backend::Rational => {
                        let r = decimal_rational_of_f64(v)
                            .ok_or(Error::NonFiniteDistance { i, j })?;
                        Length::Exact(big_to_small(&r).ok_or(Error::OverflowInExactArithmetic)?)
                    }
                    Backend::Bucketed { tau } => Length::bucketed(v, tau),
                });
            }
            rows.push(out);
        }
        Self::from_lengths(rows, backend)
    }

    pub fn from_rational_matrix(table: &[Vec<Rational>]) -> Result<Self> {
        check_square(table)?;
        let rows = table
            .iter()
            .map(|row| row.iter().map(|&r| Length::Exact(r)).collect())
            .collect();
        Self::from_lengths(rows, Backend::Rational)
    }

    /// Integer distance matrix in the rational backend.
    pub fn from_integer_matrix(table: &[Vec<i64>]) -> Result<Self> {
        let rows: Vec<Vec<Rational>> = table
            .iter()
            .map(|row| row.iter().map(|&v| Rational::from_integer(v)).collect())
            .collect();
        Self::from_rational_matrix(&rows)
    }

    fn from_lengths(rows: Vec<Vec<Length>>, backend: Backend) -> Result<Self> {
        let n = rows.len();
        let dist: Vec<Length> = rows.into_iter().flatten().collect();
        let at = |i: usize, j: usize| dist[i * n + j];
        for i in 0..n {
            if !at(i, i).is_zero() {
                return Err(Error::NonZeroDiagonal { i });
            }
        }
        for i in 0..n {
            for j in 0..n {
                if at(i, j).is_negative() {
                    return Err(Error::NegativeDistance { i, j });
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if at(i, j) != at(j, i) {
                    return Err(Error::AsymmetricMatrix { i, j });
                }
                if at(i, j).is_zero() {
                    return Err(Error::ZeroOffDiagonal { i, j });
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let via = at(i, k)
                        .checked_add(&at(k, j))
                        .ok_or(Error::OverflowInExactArithmetic)?;
                    if at(i, j) > via {
                        return Err(Error::TriangleViolation { i, j, k });
                    }
                }
            }
        }
        Ok(FiniteMetricSpace {
            labels: (0..n).map(|i| i.to_string()).collect(),
            dist,
            backend,
            euclidean: false,
        })
    }

    /// Pairwise Euclidean distances. The rational backend is accepted only
    /// when every distance is a rational number.
    pub fn from_point_cloud(cloud: &PointCloud, backend: Backend) -> Result<Self> {
        let n = cloud.len();
        let mut dist = vec![backend.zero(); n * n];
        match backend {
            Backend::Bucketed { tau } => {
                for i in 0..n {
                    for j in i + 1..n {
                        let d = Length::bucketed(cloud.distance(i, j), tau);
                        dist[i * n + j] = d;
                        dist[j * n + i] = d;
                    }
                }
            }
            Backend::Rational => {
                let coords: Vec<Vec<BigRational>> = cloud
                    .points()
                    .iter()
                    .map(|p| {
                        p.iter()
                            .map(|&x| decimal_rational_of_f64(x).expect("finite coordinate"))
                            .collect()
                    })
                    .collect();
                for i in 0..n {
                    for j in i + 1..n {
                        let mut sq = BigRational::zero();
                        for (a, b) in coords[i].iter().zip(&coords[j]) {
                            let diff = a - b;
                            sq += &diff * &diff;
                        }
                        let root = rational_sqrt(&sq)
                            .ok_or(Error::IrrationalDistanceInRationalBackend { i, j })?;
                        let d = Length::Exact(
                            big_to_small(&root).ok_or(Error::OverflowInExactArithmetic)?,
                        );
                        dist[i * n + j] = d;
                        dist[j * n + i] = d;
                    }
                }
            }
        }
        let rows = dist.chunks(n.max(1)).take(n).map(|c| c.to_vec()).collect();
        let mut space = Self::from_lengths(rows, backend)?;
        space.euclidean = true;
        Ok(space)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// True when the space came from a Euclidean point cloud.
    pub fn is_euclidean(&self) -> bool {
        self.euclidean
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> Length {
        self.dist[i * self.len() + j]
    }

    pub fn dist_f64(&self, i: usize, j: usize) -> f64 {
        self.dist(i, j).to_f64()
    }

    pub fn distance_table_f64(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.dist_f64(i, j)).collect()).collect()
    }

    pub fn min_positive_distance(&self) -> Option<Length> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.dist(i, j))
            .min()
    }

    pub fn diameter(&self) -> Length {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.dist(i, j))
            .max()
            .unwrap_or_else(|| self.backend.zero())
    }

    /// The subspace on `indices` (in the given order). Isometric embedding of
    /// the result back into `self` is `k -> indices[k]`.
    pub fn subspace(&self, indices: &[usize]) -> FiniteMetricSpace {
        let m = indices.len();
        let mut dist = Vec::with_capacity(m * m);
        for &a in indices {
            for &b in indices {
                dist.push(self.dist(a, b));
            }
        }
        FiniteMetricSpace {
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            dist,
            backend: self.backend,
            euclidean: self.euclidean,
        }
    }
}

fn check_square<T>(table: &[Vec<T>]) -> Result<()> {
    let rows = table.len();
    for (row, r) in table.iter().enumerate() {
        if r.len() != rows {
            return Err(Error::NonSquareMatrix { rows, row, cols: r.len() });
        }
    }
    Ok(())
}

/// Distinct points in ℝ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Parse("non-finite coordinate".into()));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::DuplicatePoint { i, j });
                }
            }
        }
        Ok(PointCloud { dim, points })
    }

    /// Same points translated so that the barycenter is the origin.
    pub fn centered(&self) -> PointCloud {
        let c = self.barycenter();
        PointCloud {
            dim: self.dim,
            points: self
                .points
                .iter()
                .map(|p| p.iter().zip(&c).map(|(x, m)| x - m).collect())
                .collect(),
        }
    }

    pub fn is_barycentered(&self) -> bool {
        (0..self.dim).all(|a| self.points.iter().map(|p| p[a]).sum::<f64>().abs() <= 1e-12)
    }

    pub fn barycenter(&self) -> Vec<f64> {
        let n = self.points.len().max(1) as f64;
        (0..self.dim)
            .map(|a| self.points.iter().map(|p| p[a]).sum::<f64>() / n)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(&self.points[i], &self.points[j])
    }

    pub fn distance_to(&self, i: usize, z: &[f64]) -> f64 {
        euclidean(&self.points[i], z)
    }

    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            dim: self.dim,
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }

    /// Largest distance from the barycenter.
    pub fn radius_about_barycenter(&self) -> f64 {
        let c = self.barycenter();
        (0..self.len()).map(|i| self.distance_to(i, &c)).fold(0.0, f64::max)
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `x ↦ Q x + t` with `Q` orthogonal.
#[derive(Debug, Clone)]
pub struct Isometry {
    linear: DMatrix<f64>,
    translation: DVector<f64>,
}

impl Isometry {
    pub fn new(linear: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let d = linear.nrows();
        if linear.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: linear.ncols() });
        }
        if translation.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: translation.len() });
        }
        let deviation = (linear.transpose() * &linear - DMatrix::identity(d, d)).amax();
        if deviation > 1e-10 {
            return Err(Error::NotOrthogonal { deviation });
        }
        Ok(Isometry { linear, translation })
    }

    pub fn identity(d: usize) -> Self {
        Isometry { linear: DMatrix::identity(d, d), translation: DVector::zeros(d) }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply_point(&self, p: &[f64]) -> Vec<f64> {
        let v = &self.linear * DVector::from_column_slice(p) + &self.translation;
        v.iter().copied().collect()
    }
}

pub fn apply_isometry(cloud: &PointCloud, t: &Isometry) -> Result<PointCloud> {
    if !cloud.is_empty() && cloud.dim() != t.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), found: cloud.dim() });
    }
    PointCloud::new(cloud.points().iter().map(|p| t.apply_point(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bucketed() -> Backend {
        Backend::default()
    }

    #[test]
    fn singleton_and_pair() {
        let s = FiniteMetricSpace::from_distance_matrix(&[vec![0.0]], bucketed()).unwrap();
        assert_eq!(s.len(), 1);
        let s = FiniteMetricSpace::from_distance_matrix(
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
            Backend::Rational,
        )
        .unwrap();
        assert_eq!(s.dist(0, 1), Length::integer(1));
    }

    #[test]
    fn metric_axiom_errors() {
        let tri = [vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
        assert_eq!(
            FiniteMetricSpace::from_distance_matrix(&tri, Backend::Rational),
            Err(Error::TriangleViolation { i: 0, j: 2, k: 1 })
        );
        let asym = [vec![0.0, 1.0], vec![2.0, 0.0]];
        assert_eq!(
            FiniteMetricSpace::from_distance_matrix(&asym, bucketed()),
            Err(Error::AsymmetricMatrix { i: 0, j: 1 })
        );
        let neg = [vec![0.0, -1.0], vec![-1.0, 0.0]];
        assert_eq!(
            FiniteMetricSpace::from_distance_matrix(&neg, bucketed()),
            Err(Error::NegativeDistance { i: 0, j: 1 })
        );
        let zero = [vec![0.0, 0.0], vec![0.0, 0.0]];
        assert_eq!(
            FiniteMetricSpace::from_distance_matrix(&zero, bucketed()),
            Err(Error::ZeroOffDiagonal { i: 0, j: 1 })
        );
        let ragged = [vec![0.0, 1.0], vec![1.0]];
        assert!(matches!(
            FiniteMetricSpace::from_distance_matrix(&ragged, bucketed()),
            Err(Error::NonSquareMatrix { .. })
        ));
    }

    #[test]
    fn collinear_cloud_is_rational() {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let s = FiniteMetricSpace::from_point_cloud(&cloud, Backend::Rational).unwrap();
        assert_eq!(s.dist(0, 1), Length::integer(1));
        assert_eq!(s.dist(1, 2), Length::integer(1));
        assert_eq!(s.dist(0, 2), Length::integer(2));
        assert!(s.is_euclidean());
    }

    #[test]
    fn pythagorean_cloud_is_rational() {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![0.3, 0.4]]).unwrap();
        let s = FiniteMetricSpace::from_point_cloud(&cloud, Backend::Rational).unwrap();
        assert_eq!(s.dist(0, 1), Length::exact(Rational::new(1, 2)));
    }

    #[test]
    fn irrational_distance_rejected() {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(
            FiniteMetricSpace::from_point_cloud(&cloud, Backend::Rational),
            Err(Error::IrrationalDistanceInRationalBackend { i: 0, j: 1 })
        );
        assert!(FiniteMetricSpace::from_point_cloud(&cloud, bucketed()).is_ok());
    }

    #[test]
    fn duplicate_points_rejected() {
        assert_eq!(
            PointCloud::new(vec![vec![1.0, 2.0], vec![1.0, 2.0]]),
            Err(Error::DuplicatePoint { i: 0, j: 1 })
        );
    }

    #[test]
    fn rotation_by_quarter_turn() {
        let cloud = PointCloud::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let t = Isometry::new(rot, DVector::zeros(2)).unwrap();
        let moved = apply_isometry(&cloud, &t).unwrap();
        assert_eq!(moved.points(), &[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(moved.distance(0, 1), cloud.distance(0, 1));
    }

    #[test]
    fn identity_isometry_is_identity() {
        let cloud = PointCloud::new(vec![vec![0.5, -2.0], vec![3.0, 1.0]]).unwrap();
        let moved = apply_isometry(&cloud, &Isometry::identity(2)).unwrap();
        assert_eq!(moved, cloud);
    }

    #[test]
    fn shear_is_not_orthogonal() {
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            Isometry::new(shear, DVector::zeros(2)),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn subspace_keeps_distances() {
        let s = FiniteMetricSpace::from_integer_matrix(&[
            vec![0, 1, 2],
            vec![1, 0, 1],
            vec![2, 1, 0],
        ])
        .unwrap();
        let sub = s.subspace(&[2, 0]);
        assert_eq!(sub.dist(0, 1), Length::integer(2));
        assert_eq!(sub.labels(), &["2".to_string(), "0".to_string()]);
    }

    #[test]
    fn centering() {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 3.0]]).unwrap();
        assert!(!cloud.is_barycentered());
        let c = cloud.centered();
        assert!(c.is_barycentered());
        assert!((c.distance(0, 2) - cloud.distance(0, 2)).abs() < 1e-15);
    }
}
