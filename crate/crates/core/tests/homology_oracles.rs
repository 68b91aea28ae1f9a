use std::collections::BTreeMap;

use maghom::chains::{boundary_matrix, chain_counts, enumerate_tuples, realized_lengths};
use maghom::homology::{euler_characteristic, field_homology_rank, homology_rank};
use maghom::linalg::{PrimeField, Rationals};
use maghom::magnitude::magnitude_series;
use maghom::{Backend, FiniteMetricSpace, Length, PointCloud};
use num_bigint::BigInt;
use proptest::prelude::*;

fn metric_strategy(max_n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(1i64..=3, n * n).prop_map(move |raw| {
            let mut d = vec![vec![0i64; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    d[i][j] = raw[i * n + j];
                    d[j][i] = raw[i * n + j];
                }
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                    }
                }
            }
            d
        })
    })
}

/// Every sequence of `k + 1` points with distinct neighbours and total length
/// `l`, by exhaustive listing.
fn brute_tuples(d: &[Vec<i64>], k: usize, l: i64) -> Vec<Vec<usize>> {
    let n = d.len();
    let mut out = Vec::new();
    let total = n.pow(k as u32 + 1);
    for code in 0..total {
        let mut c = code;
        let t: Vec<usize> = (0..=k)
            .map(|_| {
                let v = c % n;
                c /= n;
                v
            })
            .collect();
        if t.windows(2).all(|w| w[0] != w[1]) && t.windows(2).map(|w| d[w[0]][w[1]]).sum::<i64>() == l {
            out.push(t);
        }
    }
    out.sort();
    out
}

/// `Σ (−1)^i ∂_i` with `∂_i` omitting entry i when that keeps the length,
/// as a map from tuple to coefficient per face.
fn brute_boundary(d: &[Vec<i64>], t: &[usize]) -> BTreeMap<Vec<usize>, i64> {
    let len = |s: &[usize]| s.windows(2).map(|w| d[w[0]][w[1]]).sum::<i64>();
    let mut out = BTreeMap::new();
    for i in 0..t.len() {
        let mut face = t.to_vec();
        face.remove(i);
        let nondegenerate = face.windows(2).all(|w| w[0] != w[1]);
        if nondegenerate && len(&face) == len(t) {
            *out.entry(face).or_insert(0) += if i % 2 == 0 { 1 } else { -1 };
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn enumeration_matches_exhaustive_listing(d in metric_strategy(4), k in 0usize..=3, l in 0i64..=5) {
        let x = FiniteMetricSpace::from_integer_matrix(&d).unwrap();
        let basis = enumerate_tuples(&x, k, &Length::integer(l));
        let listed: Vec<Vec<usize>> = basis.tuples().iter().map(|t| t.points.clone()).collect();
        prop_assert_eq!(listed, brute_tuples(&d, k, l));
        let counts = chain_counts(&x, &Length::integer(l));
        let expected = counts.get(k).cloned().unwrap_or_default();
        prop_assert_eq!(BigInt::from(basis.len()), expected);
    }

    #[test]
    fn boundary_matches_face_formula(d in metric_strategy(4), k in 1usize..=3, l in 1i64..=5) {
        let x = FiniteMetricSpace::from_integer_matrix(&d).unwrap();
        let l = Length::integer(l);
        let source = enumerate_tuples(&x, k, &l);
        let target = enumerate_tuples(&x, k - 1, &l);
        let m = boundary_matrix(&x, k, &l);
        for (j, t) in source.tuples().iter().enumerate() {
            let expected = brute_boundary(&d, &t.points);
            let got: BTreeMap<Vec<usize>, i64> = m
                .column(j)
                .iter()
                .map(|&(i, v)| (target.tuples()[i].points.clone(), v))
                .collect();
            prop_assert_eq!(got, expected);
        }
    }

    #[test]
    fn euler_characteristic_matches_series(d in metric_strategy(4)) {
        let x = FiniteMetricSpace::from_integer_matrix(&d).unwrap();
        let series = magnitude_series(&x, &Length::integer(5)).unwrap();
        for l in 0..=5 {
            let l = Length::integer(l);
            prop_assert_eq!(euler_characteristic(&x, &l, None).unwrap().value, series.coefficient(&l));
        }
    }

    #[test]
    fn field_ranks_agree_without_torsion(d in metric_strategy(4)) {
        let x = FiniteMetricSpace::from_integer_matrix(&d).unwrap();
        for l in realized_lengths(&x, &Length::integer(4)) {
            for k in 0..=3 {
                let z = homology_rank(&x, k, &l).unwrap();
                let q = field_homology_rank(&x, k, &l, &Rationals).unwrap();
                prop_assert_eq!(z.rank, q);
                if z.torsion.is_empty() {
                    prop_assert_eq!(field_homology_rank(&x, k, &l, &PrimeField::new(2).unwrap()).unwrap(), q);
                }
            }
        }
    }
}

#[test]
fn boundary_squares_to_zero_on_a_lattice() {
    let pts: Vec<Vec<f64>> = (0..3).flat_map(|i| (0..2).map(move |j| vec![i as f64, j as f64])).collect();
    let x = FiniteMetricSpace::from_point_cloud(&PointCloud::new(pts).unwrap(), Backend::default()).unwrap();
    for l in realized_lengths(&x, &Length::bucketed(3.0, 1e-9)) {
        for k in 2..=4 {
            assert!(boundary_matrix(&x, k - 1, &l).mul(&boundary_matrix(&x, k, &l)).is_zero());
        }
    }
}

#[test]
fn low_diagonal_ranks_of_a_four_cycle() {
    let x = FiniteMetricSpace::from_integer_matrix(&[
        vec![0, 1, 2, 1],
        vec![1, 0, 1, 2],
        vec![2, 1, 0, 1],
        vec![1, 2, 1, 0],
    ])
    .unwrap();
    // points, then ordered edges: no faces keep the length and nothing maps in
    assert_eq!(homology_rank(&x, 0, &Length::integer(0)).unwrap().rank, 4);
    assert_eq!(homology_rank(&x, 1, &Length::integer(1)).unwrap().rank, 8);
    assert!(homology_rank(&x, 1, &Length::integer(2)).unwrap().torsion.is_empty());
}
