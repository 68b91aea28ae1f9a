//! Magnitude of finite metric spaces.
//!
//! `Mag(X) = 1ᵀ Z⁻¹ 1` with `Z_ij = exp(−d(x_i, x_j))`, computed by solving
//! `Z w = 1` (Cholesky, with an LU fallback) and summing the weighting.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::length::{Length, Rational};
use crate::space::FiniteMetricSpace;

/// Condition number above which `Z` is treated as singular.
pub const MAX_CONDITION: f64 = 1e14;

pub fn similarity_matrix(space: &FiniteMetricSpace) -> DMatrix<f64> {
    let n = space.len();
    DMatrix::from_fn(n, n, |i, j| (-space.dist_f64(i, j)).exp())
}

fn similarity_from_table(table: &[Vec<f64>]) -> DMatrix<f64> {
    let n = table.len();
    DMatrix::from_fn(n, n, |i, j| (-table[i][j]).exp())
}

/// Solution of `Z w = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weighting {
    pub w: Vec<f64>,
}

impl Weighting {
    pub fn magnitude(&self) -> f64 {
        // fold from +0 so the empty space reports 0, not -0
        self.w.iter().fold(0.0, |a, b| a + b)
    }
}

fn condition_estimate(z: &DMatrix<f64>) -> f64 {
    let eig = z.clone().symmetric_eigenvalues();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &l in eig.iter() {
        lo = lo.min(l.abs());
        hi = hi.max(l.abs());
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn solve_weighting(z: DMatrix<f64>) -> Result<Weighting> {
    let n = z.nrows();
    if n == 0 {
        return Ok(Weighting { w: vec![] });
    }
    let condition = condition_estimate(&z);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularSimilarityMatrix { condition });
    }
    let ones = DVector::from_element(n, 1.0);
    let w = match z.clone().cholesky() {
        Some(ch) => ch.solve(&ones),
        None => z
            .lu()
            .solve(&ones)
            .ok_or(Error::SingularSimilarityMatrix { condition })?,
    };
    Ok(Weighting { w: w.iter().copied().collect() })
}

pub fn compute_weighting(space: &FiniteMetricSpace) -> Result<Weighting> {
    solve_weighting(similarity_matrix(space))
}

pub fn compute_magnitude(space: &FiniteMetricSpace) -> Result<f64> {
    let mag = compute_weighting(space)?.magnitude();
    if space.is_euclidean() && !space.is_empty() {
        debug_assert!(
            mag >= 1.0 - 1e-9 && mag <= space.len() as f64 + 1e-9,
            "Euclidean magnitude {mag} outside [1, {}]",
            space.len()
        );
    }
    Ok(mag)
}

/// Magnitude of a raw real distance table (no metric validation).
pub fn magnitude_of_table(table: &[Vec<f64>]) -> Result<f64> {
    Ok(solve_weighting(similarity_from_table(table))?.magnitude())
}

/// `n / (1 + (n − 1) e^{−2L})`: the bound for `n` points in a ball of radius `L`.
pub fn magnitude_upper_bound(n: usize, radius: f64) -> f64 {
    assert!(n >= 1, "bound needs at least one point");
    assert!(radius >= 0.0, "radius must be nonnegative");
    let n = n as f64;
    n / (1.0 + (n - 1.0) * (-2.0 * radius).exp())
}

/// Reference value `1 + 2L + L²/2` for planar sets in a ball of radius `L`.
/// Quoted from the literature on the magnitude of discs; not verified here.
pub fn ball_reference_bound_2d(radius: f64) -> f64 {
    1.0 + 2.0 * radius + radius * radius / 2.0
}

/// Reference value `1 + 3L + 3L²/2 + L³/6` for sets in a 3-ball of radius `L`.
pub fn ball_reference_bound_3d(radius: f64) -> f64 {
    1.0 + 3.0 * radius + 1.5 * radius * radius + radius.powi(3) / 6.0
}

/// `(Σ u)² / (uᵀ Z u)`; never exceeds `Mag(X)` when `Z` is positive definite.
pub fn variational_lower_bound_check(space: &FiniteMetricSpace, u: &[f64]) -> Result<f64> {
    if u.len() != space.len() {
        return Err(Error::DimensionMismatch { expected: space.len(), found: u.len() });
    }
    if u.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVector);
    }
    let z = similarity_matrix(space);
    let v = DVector::from_column_slice(u);
    let quad = v.dot(&(&z * &v));
    let s: f64 = u.iter().sum();
    Ok(s * s / quad)
}

/// Formal power series `Σ c_j q^{j·unit}` of `1ᵀ Z(q)⁻¹ 1`, where `Z(q)`
/// has entries `q^{d(x_i,x_j)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSeries {
    pub unit: Rational,
    pub coefficients: Vec<BigInt>,
}

impl MagnitudeSeries {
    /// Coefficient of `q^l`; zero when `l` is not a multiple of the unit or
    /// lies beyond the computed degree.
    pub fn coefficient(&self, l: &Length) -> BigInt {
        l.multiple_of(&self.unit)
            .and_then(|j| usize::try_from(j).ok())
            .and_then(|j| self.coefficients.get(j).cloned())
            .unwrap_or_else(BigInt::zero)
    }

    /// Partial sum at `q = e^{−t}`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let u = *self.unit.numer() as f64 / *self.unit.denom() as f64;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| c.to_f64().unwrap_or(f64::NAN) * (-t * u * j as f64).exp())
            .sum()
    }
}

/// Largest rational `u` with every distance an integer multiple of `u`.
pub fn common_length_unit(space: &FiniteMetricSpace) -> Result<Rational> {
    let n = space.len();
    let mut dists = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            dists.push(space.dist(i, j).as_rational().ok_or(Error::IncommensurableLengths)?);
        }
    }
    if dists.is_empty() {
        return Ok(Rational::from_integer(1));
    }
    let lcm_den = dists.iter().fold(1i64, |acc, r| acc.lcm(r.denom()));
    let gcd_num = dists.iter().fold(0i64, |acc, r| {
        let scaled = *r.numer() * (lcm_den / *r.denom());
        acc.gcd(&scaled)
    });
    Ok(Rational::new(gcd_num, lcm_den))
}

/// Exact coefficients up to length `l_max` via the alternating Neumann series
/// `Σ_k (−1)^k 1ᵀ N^k 1`, where `N` is the off-diagonal part of `Z(q)`.
pub fn magnitude_series(space: &FiniteMetricSpace, l_max: &Length) -> Result<MagnitudeSeries> {
    let unit = common_length_unit(space)?;
    let l_max = l_max.as_rational().ok_or(Error::IncommensurableLengths)?;
    let degree = (l_max / unit).floor().to_integer();
    let n = space.len();
    if degree < 0 || n == 0 {
        return Ok(MagnitudeSeries { unit, coefficients: vec![] });
    }
    let degree = degree as usize;
    let steps: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| space.dist(i, j).multiple_of(&unit).unwrap_or(0) as usize)
                .collect()
        })
        .collect();
    let mut total = vec![BigInt::zero(); degree + 1];
    let mut current: Vec<Vec<BigInt>> = (0..n)
        .map(|_| {
            let mut p = vec![BigInt::zero(); degree + 1];
            p[0] = BigInt::from(1);
            p
        })
        .collect();
    let mut sign = 1i32;
    loop {
        for poly in &current {
            for (t, c) in total.iter_mut().zip(poly) {
                if sign > 0 {
                    *t += c;
                } else {
                    *t -= c;
                }
            }
        }
        if current.iter().all(|p| p.iter().all(Zero::is_zero)) {
            break;
        }
        let mut next = vec![vec![BigInt::zero(); degree + 1]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j || steps[i][j] > degree {
                    continue;
                }
                let shift = steps[i][j];
                for e in 0..=degree - shift {
                    if !current[j][e].is_zero() {
                        next[i][e + shift] += &current[j][e];
                    }
                }
            }
        }
        current = next;
        sign = -sign;
    }
    Ok(MagnitudeSeries { unit, coefficients: total })
}
