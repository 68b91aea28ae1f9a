//! ∞-Wasserstein distance between equal-size point sets.

use super::matching::min_bottleneck;
use crate::error::{Error, Result};
use crate::space::{euclidean, PointCloud};

/// `min over bijections γ of max ‖x − γ(x)‖`.
pub fn wasserstein_inf(x: &PointCloud, y: &PointCloud) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::CardinalityMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    let n = x.len();
    let cost = |i: usize, j: usize| euclidean(x.point(i), y.point(j));
    let mut candidates: Vec<f64> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| cost(i, j)).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (value, _) = min_bottleneck(n, cost, &candidates).expect("the complete graph has a perfect matching");
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let x = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(wasserstein_inf(&x, &x).unwrap(), 0.0);
        let y = PointCloud::new(vec![vec![0.0, 0.1], vec![1.0, 0.0]]).unwrap();
        assert!((wasserstein_inf(&x, &y).unwrap() - 0.1).abs() < 1e-15);
        let z = PointCloud::new(vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(
            wasserstein_inf(&x, &z),
            Err(Error::CardinalityMismatch { left: 2, right: 1 })
        );
    }

    #[test]
    fn relabelling_is_free() {
        let x = PointCloud::new(vec![vec![0.0], vec![5.0], vec![9.0]]).unwrap();
        let y = PointCloud::new(vec![vec![9.0], vec![0.0], vec![5.0]]).unwrap();
        assert_eq!(wasserstein_inf(&x, &y).unwrap(), 0.0);
    }
}
