//! Magnitude homology `MH_{k,l} = ker d_{k,l} / im d_{k+1,l}` and the Euler
//! characteristics that recover magnitude.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::chains::{
    boundary_between, chain_counts, default_k_max, enumerate_tuples_limited, realized_lengths,
    MagnitudeChainBasis, DEFAULT_TUPLE_BUDGET,
};
use crate::error::{Error, Result};
use crate::length::Length;
use crate::linalg::{elementary_divisors, field_rank, Field, SparseMatrix};
use crate::space::FiniteMetricSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct HomologyRank {
    pub k: usize,
    pub l: Length,
    pub rank: usize,
    /// Elementary divisors of `d_{k+1,l}` greater than one.
    pub torsion: Vec<BigInt>,
}

/// The chain complex `MC_{0..=top, l}` with its boundary matrices.
/// `boundaries[k]` is `d_{k,l}` (with `boundaries[0]` the zero map).
pub struct SliceComplex {
    pub l: Length,
    pub bases: Vec<MagnitudeChainBasis>,
    pub boundaries: Vec<SparseMatrix>,
}

impl SliceComplex {
    /// Bases for `k ≤ top + 1`, so that homology is available up to `top`.
    pub fn build(space: &FiniteMetricSpace, l: &Length, top: usize, budget: u128) -> Result<Self> {
        let mut bases = Vec::with_capacity(top + 2);
        let mut used: u128 = 0;
        for k in 0..=top + 1 {
            let b = enumerate_tuples_limited(space, k, l, budget - used).map_err(|e| match e {
                Error::ResourceLimit { limit, .. } => Error::ResourceLimit {
                    what: format!("chain complex MC_{{*,{l}}}"),
                    size: limit + 1,
                    limit: budget,
                },
                other => other,
            })?;
            used += b.len() as u128;
            bases.push(b);
        }
        let mut boundaries = vec![SparseMatrix::zeros(0, bases[0].len())];
        for k in 1..bases.len() {
            boundaries.push(boundary_between(space, &bases[k], &bases[k - 1]));
        }
        Ok(SliceComplex { l: *l, bases, boundaries })
    }

    pub fn top(&self) -> usize {
        self.bases.len() - 2
    }

    /// Integer homology in every degree `≤ top`.
    pub fn integer_homology(&self) -> Vec<HomologyRank> {
        let divisors: Vec<Vec<BigInt>> =
            self.boundaries.iter().map(elementary_divisors).collect();
        (0..=self.top())
            .map(|k| {
                let rank = self.bases[k].len() - divisors[k].len() - divisors[k + 1].len();
                let torsion = divisors[k + 1].iter().filter(|d| !d.is_one()).cloned().collect();
                HomologyRank { k, l: self.l, rank, torsion }
            })
            .collect()
    }

    /// Betti numbers over `field` in every degree `≤ top`.
    pub fn field_betti<F: Field>(&self, field: &F) -> Vec<usize> {
        let ranks: Vec<usize> = self.boundaries.iter().map(|m| field_rank(field, m)).collect();
        (0..=self.top()).map(|k| self.bases[k].len() - ranks[k] - ranks[k + 1]).collect()
    }
}

/// Integer magnitude homology in degree `k` at length `l`.
pub fn homology_rank(space: &FiniteMetricSpace, k: usize, l: &Length) -> Result<HomologyRank> {
    homology_rank_limited(space, k, l, DEFAULT_TUPLE_BUDGET)
}

pub fn homology_rank_limited(
    space: &FiniteMetricSpace,
    k: usize,
    l: &Length,
    budget: u128,
) -> Result<HomologyRank> {
    let complex = SliceComplex::build(space, l, k, budget)?;
    Ok(complex.integer_homology().swap_remove(k))
}

/// Betti number of `MH_{k,l}` over a field.
pub fn field_homology_rank<F: Field>(
    space: &FiniteMetricSpace,
    k: usize,
    l: &Length,
    field: &F,
) -> Result<usize> {
    let complex = SliceComplex::build(space, l, k, DEFAULT_TUPLE_BUDGET)?;
    Ok(complex.field_betti(field)[k])
}

/// How an Euler characteristic was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EulerRoute {
    /// From homology ranks, cross-checked against chain counts.
    Homology,
    /// From chain counts alone (the complex exceeded the tuple budget).
    ChainCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerCharacteristic {
    pub l: Length,
    pub value: BigInt,
    pub route: EulerRoute,
}

fn alternating_sum(counts: impl IntoIterator<Item = BigInt>) -> BigInt {
    counts
        .into_iter()
        .enumerate()
        .fold(BigInt::zero(), |acc, (k, c)| if k % 2 == 0 { acc + c } else { acc - c })
}

/// `χ(MH_{*,l}) = Σ_k (−1)^k rank MH_{k,l}` for `k ≤ k_max`
/// (default `ceil(l / min distance)`).
pub fn euler_characteristic(
    space: &FiniteMetricSpace,
    l: &Length,
    k_max: Option<usize>,
) -> Result<EulerCharacteristic> {
    euler_characteristic_limited(space, l, k_max, DEFAULT_TUPLE_BUDGET)
}

pub fn euler_characteristic_limited(
    space: &FiniteMetricSpace,
    l: &Length,
    k_max: Option<usize>,
    budget: u128,
) -> Result<EulerCharacteristic> {
    let k_max = k_max.unwrap_or_else(|| default_k_max(space, l));
    let counts = chain_counts(space, l);
    if counts.len() > k_max + 1 {
        let k = (k_max + 1..counts.len()).find(|&k| !counts[k].is_zero()).unwrap_or(k_max + 1);
        return Err(Error::TruncationNotSaturated { k, l: l.to_text() });
    }
    let chain_chi = alternating_sum(counts.iter().cloned());
    let total: BigInt = counts.iter().sum();
    let within_budget = total.to_u128().is_some_and(|t| t <= budget);
    if !within_budget {
        return Ok(EulerCharacteristic { l: *l, value: chain_chi, route: EulerRoute::ChainCounts });
    }
    let top = counts.len().saturating_sub(1);
    let complex = SliceComplex::build(space, l, top, budget)?;
    let homology = complex.integer_homology();
    let chi = alternating_sum(homology.iter().map(|h| BigInt::from(h.rank)));
    assert_eq!(chi, chain_chi, "homology and chain Euler characteristics differ at l = {l}");
    Ok(EulerCharacteristic { l: *l, value: chi, route: EulerRoute::Homology })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeFromHomology {
    pub value: f64,
    pub terms: Vec<EulerCharacteristic>,
    /// `true` when lengths beyond `l_max` could still contribute.
    pub tail_truncated: bool,
}

/// Partial sum `Σ_{l ≤ l_max} χ(MH_{*,l}) e^{−l}` over realized lengths.
pub fn magnitude_from_homology(
    space: &FiniteMetricSpace,
    l_max: &Length,
    k_max: Option<usize>,
) -> Result<MagnitudeFromHomology> {
    magnitude_from_homology_limited(space, l_max, k_max, DEFAULT_TUPLE_BUDGET)
}

pub fn magnitude_from_homology_limited(
    space: &FiniteMetricSpace,
    l_max: &Length,
    k_max: Option<usize>,
    budget: u128,
) -> Result<MagnitudeFromHomology> {
    let mut terms = Vec::new();
    let mut value = 0.0;
    for l in realized_lengths(space, l_max) {
        let chi = euler_characteristic_limited(space, &l, k_max, budget)?;
        value += chi.value.to_f64().unwrap_or(f64::NAN) * (-l.to_f64()).exp();
        terms.push(chi);
    }
    // with two or more points tuples of every length multiple of a distance exist
    Ok(MagnitudeFromHomology { value, terms, tail_truncated: space.len() >= 2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::length::Backend;
    use crate::linalg::{PrimeField, Rationals};
    use crate::magnitude::{compute_magnitude, magnitude_series};
    use crate::space::PointCloud;

    fn uniform_int(n: usize, t: i64) -> FiniteMetricSpace {
        let table: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0 } else { t }).collect())
            .collect();
        FiniteMetricSpace::from_integer_matrix(&table).unwrap()
    }

    fn collinear() -> FiniteMetricSpace {
        FiniteMetricSpace::from_integer_matrix(&[vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]])
            .unwrap()
    }

    #[test]
    fn degree_zero_counts_points() {
        for n in 1..=4 {
            let h = homology_rank(&uniform_int(n, 2), 0, &Length::integer(0)).unwrap();
            assert_eq!(h.rank, n);
            assert!(h.torsion.is_empty());
        }
    }

    #[test]
    fn collinear_pair_is_a_boundary() {
        // d(x0,x1,x2) = −(x0,x2) and d(x2,x1,x0) = −(x2,x0)
        let h = homology_rank(&collinear(), 1, &Length::integer(2)).unwrap();
        assert_eq!(h.rank, 0);
    }

    #[test]
    fn perturbed_collinear_pairs_are_cycles() {
        let cloud =
            PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.05], vec![2.0, 0.0]]).unwrap();
        let y = FiniteMetricSpace::from_point_cloud(&cloud, Backend::default()).unwrap();
        let h = homology_rank(&y, 1, &Length::bucketed(2.0, 1e-9)).unwrap();
        assert_eq!(h.rank, 2);
    }

    #[test]
    fn two_point_ranks() {
        let x = uniform_int(2, 1);
        for k in 0..=6 {
            for l in 0..=6 {
                let h = homology_rank(&x, k, &Length::integer(l)).unwrap();
                assert_eq!(h.rank, if l == k as i64 { 2 } else { 0 }, "k={k} l={l}");
            }
        }
    }

    #[test]
    fn euler_characteristic_examples() {
        let x = uniform_int(2, 1);
        assert_eq!(euler_characteristic(&x, &Length::integer(0), None).unwrap().value, 2.into());
        assert_eq!(euler_characteristic(&x, &Length::integer(3), None).unwrap().value, (-2).into());
        let k3 = uniform_int(3, 1);
        let chi = euler_characteristic(&k3, &Length::integer(2), None).unwrap();
        assert_eq!(chi.value, 12.into());
        assert_eq!(chi.route, EulerRoute::Homology);
    }

    #[test]
    fn truncation_must_saturate() {
        let err = euler_characteristic(&uniform_int(2, 1), &Length::integer(3), Some(2));
        assert_eq!(err.unwrap_err().code(), "TRUNCATION_NOT_SATURATED");
    }

    #[test]
    fn chain_route_beyond_budget() {
        let k3 = uniform_int(3, 1);
        let chi = euler_characteristic_limited(&k3, &Length::integer(6), None, 10).unwrap();
        assert_eq!(chi.route, EulerRoute::ChainCounts);
        assert_eq!(chi.value, BigInt::from(3 * 64));
    }

    #[test]
    fn series_coefficients_are_euler_characteristics() {
        let x = FiniteMetricSpace::from_integer_matrix(&[
            vec![0, 1, 2, 2],
            vec![1, 0, 1, 2],
            vec![2, 1, 0, 1],
            vec![2, 2, 1, 0],
        ])
        .unwrap();
        let series = magnitude_series(&x, &Length::integer(6)).unwrap();
        for l in 0..=6 {
            let l = Length::integer(l);
            assert_eq!(euler_characteristic(&x, &l, None).unwrap().value, series.coefficient(&l));
        }
    }

    #[test]
    fn magnitude_recovered_for_point_and_pair() {
        let one = uniform_int(1, 1);
        let m = magnitude_from_homology(&one, &Length::integer(10), None).unwrap();
        assert_eq!(m.value, 1.0);
        assert!(!m.tail_truncated);
        let two = uniform_int(2, 1);
        let m = magnitude_from_homology(&two, &Length::integer(40), None).unwrap();
        assert!((m.value - compute_magnitude(&two).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn field_ranks_agree_without_torsion() {
        let x = collinear();
        for l in 0..=4 {
            let l = Length::integer(l);
            for k in 0..=3 {
                let z = homology_rank(&x, k, &l).unwrap();
                assert_eq!(field_homology_rank(&x, k, &l, &Rationals).unwrap(), z.rank);
                if z.torsion.is_empty() {
                    let p = PrimeField::new(2).unwrap();
                    assert_eq!(field_homology_rank(&x, k, &l, &p).unwrap(), z.rank);
                }
            }
        }
    }
}
