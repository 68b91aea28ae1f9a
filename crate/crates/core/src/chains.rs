//! The magnitude chain complex `MC_{*,l}`.
//!
//! `MC_{k,l}` is free on the tuples `(x_0, …, x_k)` with `x_i ≠ x_{i+1}` whose
//! consecutive distances sum to exactly `l`. The differential is
//! `d = Σ_i (−1)^i ∂_i`, where `∂_i` omits `x_i` when that keeps the length
//! equal to `l` and is zero otherwise.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::length::Length;
use crate::linalg::SparseMatrix;
use crate::space::FiniteMetricSpace;

/// Default cap on the number of tuples materialized for one length.
pub const DEFAULT_TUPLE_BUDGET: u128 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathTuple {
    pub points: Vec<usize>,
    pub length: Length,
}

impl PathTuple {
    pub fn degree(&self) -> usize {
        self.points.len() - 1
    }
}

/// Left-to-right sum of consecutive distances. `None` on rational overflow.
pub fn path_length(space: &FiniteMetricSpace, points: &[usize]) -> Option<Length> {
    let mut total = space.backend().zero();
    for w in points.windows(2) {
        total = total.checked_add(&space.dist(w[0], w[1]))?;
    }
    Some(total)
}

/// Basis of `MC_{k,l}` in lexicographic order of point indices.
#[derive(Debug, Clone)]
pub struct MagnitudeChainBasis {
    k: usize,
    l: Length,
    tuples: Vec<PathTuple>,
    index: HashMap<Vec<usize>, usize>,
}

impl MagnitudeChainBasis {
    fn new(k: usize, l: Length, tuples: Vec<PathTuple>) -> Self {
        let index = tuples.iter().enumerate().map(|(i, t)| (t.points.clone(), i)).collect();
        MagnitudeChainBasis { k, l, tuples, index }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> Length {
        self.l
    }

    pub fn tuples(&self) -> &[PathTuple] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn index_of(&self, points: &[usize]) -> Option<usize> {
        self.index.get(points).copied()
    }
}

/// `true` when `a` is certainly larger than `b`. In the bucketed backend a
/// one-bucket margin absorbs rounding between differently ordered sums.
fn certainly_exceeds(a: &Length, b: &Length) -> bool {
    match (a, b) {
        (Length::Exact(x), Length::Exact(y)) => x > y,
        (Length::Bucketed { value: x, tau }, Length::Bucketed { value: y, .. }) => *x > *y + *tau,
        _ => panic!("mixed backends"),
    }
}

/// Every tuple of `MC_{k,l}`, or `ResourceLimit` once more than `limit` have
/// been found.
pub fn enumerate_tuples_limited(
    space: &FiniteMetricSpace,
    k: usize,
    l: &Length,
    limit: u128,
) -> Result<MagnitudeChainBasis> {
    let n = space.len();
    let mut out = Vec::new();
    if n == 0 {
        return Ok(MagnitudeChainBasis::new(k, *l, out));
    }
    let min = space.min_positive_distance();
    let mut stack = Vec::with_capacity(k + 1);
    for start in 0..n {
        stack.clear();
        stack.push(start);
        extend(space, k, l, min.as_ref(), &mut stack, space.backend().zero(), &mut out, limit)?;
    }
    Ok(MagnitudeChainBasis::new(k, *l, out))
}

#[allow(clippy::too_many_arguments)]
fn extend(
    space: &FiniteMetricSpace,
    k: usize,
    l: &Length,
    min: Option<&Length>,
    stack: &mut Vec<usize>,
    current: Length,
    out: &mut Vec<PathTuple>,
    limit: u128,
) -> Result<()> {
    if current > *l {
        return Ok(());
    }
    let remaining = k + 1 - stack.len();
    if remaining == 0 {
        if current == *l {
            if out.len() as u128 >= limit {
                return Err(Error::ResourceLimit {
                    what: format!("MC_{{{k},{l}}}"),
                    size: out.len() as u128 + 1,
                    limit,
                });
            }
            out.push(PathTuple { points: stack.clone(), length: current });
        }
        return Ok(());
    }
    if let Some(min) = min {
        let bound = min
            .checked_mul_int(remaining as i64)
            .and_then(|m| current.checked_add(&m));
        match bound {
            Some(b) if certainly_exceeds(&b, l) => return Ok(()),
            None => return Ok(()),
            _ => {}
        }
    }
    let last = *stack.last().expect("nonempty stack");
    for next in 0..space.len() {
        if next == last {
            continue;
        }
        let len = current
            .checked_add(&space.dist(last, next))
            .ok_or(Error::OverflowInExactArithmetic)?;
        stack.push(next);
        extend(space, k, l, min, stack, len, out, limit)?;
        stack.pop();
    }
    Ok(())
}

/// Every tuple of `MC_{k,l}`, without a size cap. Panics on rational
/// overflow, which needs lengths near `i64::MAX / denominator`.
pub fn enumerate_tuples(space: &FiniteMetricSpace, k: usize, l: &Length) -> MagnitudeChainBasis {
    enumerate_tuples_limited(space, k, l, u128::MAX).expect("exact length overflow")
}

/// Matrix of `d_{k,l}: MC_{k,l} → MC_{k−1,l}` with respect to the given bases.
pub fn boundary_between(
    space: &FiniteMetricSpace,
    source: &MagnitudeChainBasis,
    target: &MagnitudeChainBasis,
) -> SparseMatrix {
    assert!(source.k() >= 1, "boundary needs k >= 1");
    assert_eq!(source.k(), target.k() + 1, "bases must be in adjacent degrees");
    assert_eq!(source.l(), target.l(), "bases must share the length grading");
    let l = source.l();
    let k = source.k();
    let columns = source
        .tuples()
        .iter()
        .map(|t| {
            let mut col = Vec::new();
            for i in 0..=k {
                let mut face = t.points.clone();
                face.remove(i);
                let degenerate = face.windows(2).any(|w| w[0] == w[1]);
                let len = face_length(space, &face);
                let preserved = len == Some(l);
                if i == 0 || i == k {
                    assert!(!preserved, "omitting an endpoint of {:?} kept length {l}", t.points);
                    continue;
                }
                if degenerate {
                    assert!(!preserved, "degenerate face of {:?} kept length {l}", t.points);
                    continue;
                }
                if preserved {
                    let row = target
                        .index_of(&face)
                        .expect("length-preserving nondegenerate face lies in the target basis");
                    col.push((row, if i % 2 == 0 { 1 } else { -1 }));
                }
            }
            col
        })
        .collect();
    SparseMatrix::from_columns(target.len(), columns)
}

/// Length of a possibly degenerate tuple (repeated neighbours contribute 0).
fn face_length(space: &FiniteMetricSpace, points: &[usize]) -> Option<Length> {
    path_length(space, points)
}

/// `d_{k,l}` on freshly enumerated bases; `d_0` maps onto the zero module.
pub fn boundary_matrix(space: &FiniteMetricSpace, k: usize, l: &Length) -> SparseMatrix {
    let source = enumerate_tuples(space, k, l);
    if k == 0 {
        return SparseMatrix::zeros(0, source.len());
    }
    let target = enumerate_tuples(space, k - 1, l);
    boundary_between(space, &source, &target)
}

/// Smallest degree above which `MC_{*,l}` certainly vanishes:
/// `ceil(l / min positive distance)`.
pub fn default_k_max(space: &FiniteMetricSpace, l: &Length) -> usize {
    let Some(min) = space.min_positive_distance() else { return 0 };
    match (l.as_rational(), min.as_rational()) {
        (Some(l), Some(m)) => (l / m).ceil().to_integer().max(0) as usize,
        _ => {
            let q = l.to_f64() / min.to_f64();
            // tolerate a bucket of slack so that l = k·min is not rounded up
            let tau = l.backend().tau().unwrap_or(0.0) / min.to_f64();
            (q - tau).ceil().max(0.0) as usize
        }
    }
}

/// `|MC_{k,l}|` for `k = 0, 1, …` until the complex vanishes, by dynamic
/// programming over (last point, length so far). Exact in the rational
/// backend; in the bucketed backend paths are merged by bucket.
pub fn chain_counts(space: &FiniteMetricSpace, l: &Length) -> Vec<BigInt> {
    let n = space.len();
    let mut counts = Vec::new();
    let mut layer: BTreeMap<(Length, usize), BigInt> =
        (0..n).map(|i| ((space.backend().zero(), i), BigInt::from(1))).collect();
    while !layer.is_empty() {
        let exact: BigInt = layer
            .iter()
            .filter(|((len, _), _)| len == l)
            .map(|(_, c)| c.clone())
            .sum();
        counts.push(exact);
        let mut next: BTreeMap<(Length, usize), BigInt> = BTreeMap::new();
        for ((len, last), c) in &layer {
            for j in 0..n {
                if j == *last {
                    continue;
                }
                let Some(nl) = len.checked_add(&space.dist(*last, j)) else { continue };
                if nl > *l {
                    continue;
                }
                *next.entry((nl, j)).or_insert_with(BigInt::zero) += c;
            }
        }
        layer = next;
    }
    while counts.len() > 1 && counts.last().is_some_and(Zero::is_zero) {
        counts.pop();
    }
    counts
}

/// Distinct lengths `≤ l_max` realized by some tuple, in increasing order.
pub fn realized_lengths(space: &FiniteMetricSpace, l_max: &Length) -> Vec<Length> {
    let n = space.len();
    if n == 0 {
        return Vec::new();
    }
    let mut seen: std::collections::BTreeSet<Length> = Default::default();
    let mut frontier: std::collections::BTreeSet<(Length, usize)> =
        (0..n).map(|i| (space.backend().zero(), i)).collect();
    let mut visited = frontier.clone();
    while !frontier.is_empty() {
        let mut next = std::collections::BTreeSet::new();
        for (len, last) in &frontier {
            seen.insert(*len);
            for j in 0..n {
                if j == *last {
                    continue;
                }
                let Some(nl) = len.checked_add(&space.dist(*last, j)) else { continue };
                if nl <= *l_max && visited.insert((nl, j)) {
                    next.insert((nl, j));
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().filter(|x| x <= l_max).collect()
}

/// Induced chain map of an isometric embedding `A → B`, `a ↦ embedding[a]`,
/// as a matrix from `MC_{k,l}(A)` to `MC_{k,l}(B)`.
pub fn inclusion_chain_map(
    embedding: &[usize],
    source: &MagnitudeChainBasis,
    target: &MagnitudeChainBasis,
) -> SparseMatrix {
    let columns = source
        .tuples()
        .iter()
        .map(|t| {
            let image: Vec<usize> = t.points.iter().map(|&p| embedding[p]).collect();
            let row = target.index_of(&image).expect("isometric embedding preserves length");
            vec![(row, 1)]
        })
        .collect();
    SparseMatrix::from_columns(target.len(), columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::length::{Backend, Rational};
    use crate::space::PointCloud;

    fn two_points() -> FiniteMetricSpace {
        FiniteMetricSpace::from_integer_matrix(&[vec![0, 1], vec![1, 0]]).unwrap()
    }

    fn collinear() -> FiniteMetricSpace {
        FiniteMetricSpace::from_integer_matrix(&[vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]])
            .unwrap()
    }

    fn points(b: &MagnitudeChainBasis) -> Vec<Vec<usize>> {
        b.tuples().iter().map(|t| t.points.clone()).collect()
    }

    #[test]
    fn zero_length_tuples_are_singletons() {
        let b = enumerate_tuples(&collinear(), 0, &Length::integer(0));
        assert_eq!(points(&b), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn alternating_tuples_on_two_points() {
        let b = enumerate_tuples(&two_points(), 2, &Length::integer(2));
        assert_eq!(points(&b), vec![vec![0, 1, 0], vec![1, 0, 1]]);
    }

    #[test]
    fn collinear_pairs_at_distance_two() {
        let b = enumerate_tuples(&collinear(), 1, &Length::integer(2));
        assert_eq!(points(&b), vec![vec![0, 2], vec![2, 0]]);
    }

    #[test]
    fn two_point_boundaries_vanish() {
        for k in 1..=5 {
            let m = boundary_matrix(&two_points(), k, &Length::integer(k as i64));
            assert!(m.is_zero());
        }
    }

    #[test]
    fn collinear_middle_omission() {
        let x = collinear();
        let l = Length::integer(2);
        let src = enumerate_tuples(&x, 2, &l);
        let tgt = enumerate_tuples(&x, 1, &l);
        let m = boundary_between(&x, &src, &tgt);
        let col = src.index_of(&[0, 1, 2]).unwrap();
        let row = tgt.index_of(&[0, 2]).unwrap();
        assert_eq!(m.get(row, col), -1);
    }

    #[test]
    fn perturbed_collinear_has_no_two_chains() {
        let cloud =
            PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.05], vec![2.0, 0.0]]).unwrap();
        let y = FiniteMetricSpace::from_point_cloud(&cloud, Backend::default()).unwrap();
        let l = Length::bucketed(2.0, 1e-9);
        assert!(enumerate_tuples(&y, 2, &l).is_empty());
        assert_eq!(enumerate_tuples(&y, 1, &l).len(), 2);
    }

    #[test]
    fn chain_counts_match_enumeration() {
        let x = collinear();
        for l in 0..=5 {
            let l = Length::integer(l);
            let counts = chain_counts(&x, &l);
            for (k, c) in counts.iter().enumerate() {
                assert_eq!(*c, BigInt::from(enumerate_tuples(&x, k, &l).len()));
            }
            assert!(enumerate_tuples(&x, counts.len(), &l).is_empty());
        }
    }

    #[test]
    fn k_max_default() {
        let x = FiniteMetricSpace::from_rational_matrix(&[
            vec![Rational::from_integer(0), Rational::new(1, 2)],
            vec![Rational::new(1, 2), Rational::from_integer(0)],
        ])
        .unwrap();
        assert_eq!(default_k_max(&x, &Length::integer(2)), 4);
        assert_eq!(default_k_max(&x, &Length::exact(Rational::new(3, 4))), 2);
    }

    #[test]
    fn realized_lengths_of_collinear() {
        let ls = realized_lengths(&collinear(), &Length::integer(3));
        assert_eq!(ls, (0..=3).map(Length::integer).collect::<Vec<_>>());
    }

    #[test]
    fn resource_limit_is_reported() {
        let x = two_points();
        let err = enumerate_tuples_limited(&x, 3, &Length::integer(3), 1).unwrap_err();
        assert_eq!(err.code(), "RESOURCE_LIMIT");
    }
}
