use maghom::magnitude::{
    compute_magnitude, compute_weighting, magnitude_series, magnitude_upper_bound, similarity_matrix,
    variational_lower_bound_check,
};
use maghom::{apply_isometry, Backend, FiniteMetricSpace, Isometry, Length, PointCloud};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Clouds whose points are pairwise at least 0.05 apart.
fn cloud_strategy() -> impl Strategy<Value = PointCloud> {
    (1usize..=3, 1usize..=7).prop_flat_map(|(dim, n)| {
        proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, dim), n).prop_filter_map(
            "points too close",
            |pts| {
                let ok = (0..pts.len()).all(|i| {
                    (i + 1..pts.len()).all(|j| maghom::space::euclidean(&pts[i], &pts[j]) >= 0.05)
                });
                ok.then(|| PointCloud::new(pts).unwrap())
            },
        )
    })
}

fn space(c: &PointCloud) -> FiniteMetricSpace {
    FiniteMetricSpace::from_point_cloud(c, Backend::default()).unwrap()
}

/// Shortest-path metric of a connected graph on `n` vertices given by an
/// edge mask; `None` if disconnected.
fn graph_metric(n: usize, mask: &[bool]) -> Option<Vec<Vec<i64>>> {
    let inf = i64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    let mut e = 0;
    for i in 0..n {
        d[i][i] = 0;
        for j in i + 1..n {
            if mask[e] {
                d[i][j] = 1;
                d[j][i] = 1;
            }
            e += 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    d.iter().flatten().all(|&x| x < inf).then_some(d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weighting_solves_the_system(c in cloud_strategy()) {
        let x = space(&c);
        let w = compute_weighting(&x).unwrap();
        let z = similarity_matrix(&x);
        let residual = (&z * DVector::from_column_slice(&w.w)).add_scalar(-1.0);
        prop_assert!(residual.amax() <= 1e-10 * z.norm().max(1.0));
    }

    #[test]
    fn magnitude_between_one_and_n(c in cloud_strategy()) {
        let m = compute_magnitude(&space(&c)).unwrap();
        let n = c.len() as f64;
        prop_assert!(m >= 1.0 - 1e-9 && m <= n + 1e-9);
    }

    #[test]
    fn below_the_radius_bound(c in cloud_strategy()) {
        let centered = c.centered();
        let bound = magnitude_upper_bound(c.len(), centered.radius_about_barycenter());
        prop_assert!(compute_magnitude(&space(&c)).unwrap() <= bound + 1e-9);
    }

    #[test]
    fn variational_bound_never_exceeds(c in cloud_strategy(), seed in proptest::collection::vec(0.0f64..1.0, 7)) {
        let x = space(&c);
        let u: Vec<f64> = seed[..c.len()].iter().map(|v| v + 1e-3).collect();
        let mag = compute_magnitude(&x).unwrap();
        prop_assert!(variational_lower_bound_check(&x, &u).unwrap() <= mag + 1e-9);
    }

    #[test]
    fn subsets_have_smaller_magnitude(c in cloud_strategy(), keep in proptest::collection::vec(any::<bool>(), 7)) {
        let idx: Vec<usize> = (0..c.len()).filter(|&i| keep[i]).collect();
        prop_assume!(!idx.is_empty());
        let a = compute_magnitude(&space(&c.subset(&idx))).unwrap();
        let b = compute_magnitude(&space(&c)).unwrap();
        prop_assert!(a <= b + 1e-9);
    }

    #[test]
    fn isometries_preserve_magnitude(c in cloud_strategy(), entries in proptest::collection::vec(-1.0f64..1.0, 12)) {
        let d = c.dim();
        let q = DMatrix::from_column_slice(d, d, &entries[..d * d]).qr().q();
        prop_assume!((q.transpose() * &q - DMatrix::identity(d, d)).amax() < 1e-12);
        let t = Isometry::new(q, DVector::from_column_slice(&entries[9..9 + d])).unwrap();
        let moved = apply_isometry(&c, &t).unwrap();
        let (a, b) = (compute_magnitude(&space(&c)).unwrap(), compute_magnitude(&space(&moved)).unwrap());
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn series_sums_to_magnitude_when_convergent(n in 1usize..=5, mask in proptest::collection::vec(any::<bool>(), 10)) {
        let Some(d) = graph_metric(n, &mask) else { return Ok(()) };
        prop_assume!(d.iter().flatten().all(|&x| x <= 3));
        let x = FiniteMetricSpace::from_integer_matrix(&d).unwrap();
        // the Neumann expansion at q = e^{-1} converges iff the off-diagonal
        // part has spectral radius below one; keep a margin for the tail
        let off = similarity_matrix(&x) - DMatrix::identity(n, n);
        let radius = off.symmetric_eigenvalues().amax();
        prop_assume!(radius <= 0.7);
        let series = magnitude_series(&x, &Length::integer(60)).unwrap();
        prop_assert_eq!(series.coefficients[0].clone(), n.into());
        prop_assert!((series.evaluate(1.0) - compute_magnitude(&x).unwrap()).abs() <= 1e-6);
    }
}

#[test]
fn equidistant_closed_form_against_direct_solve() {
    for n in 1..=5usize {
        for &t in &[0.1, 1.0, 2.5] {
            let table: Vec<Vec<f64>> =
                (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { t }).collect()).collect();
            let x = FiniteMetricSpace::from_distance_matrix(&table, Backend::default()).unwrap();
            let z = DMatrix::from_fn(n, n, |i, j| (-table[i][j]).exp());
            let w = z.lu().solve(&DVector::from_element(n, 1.0)).unwrap();
            let closed = n as f64 / (1.0 + (n as f64 - 1.0) * (-t).exp());
            assert!((w.sum() - closed).abs() < 1e-12);
            assert!((compute_magnitude(&x).unwrap() - closed).abs() < 1e-12);
        }
    }
}

#[test]
fn upper_bound_examples() {
    assert_eq!(magnitude_upper_bound(3, 0.0), 1.0);
    assert!((magnitude_upper_bound(3, 1.0) - 3.0 / (1.0 + 2.0 * (-2.0f64).exp())).abs() < 1e-15);
    assert!((magnitude_upper_bound(4, 40.0) - 4.0).abs() < 1e-12);
}
