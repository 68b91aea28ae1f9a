//! Coefficient fields for ranks and persistence.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// A coefficient field given by a context value (so that the modulus of a
/// prime field is data rather than a type parameter).
pub trait Field: Sync {
    type Elem: Clone + PartialEq + std::fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse of a nonzero element.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn name(&self) -> String;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        assert!(!a.is_zero(), "inverse of zero");
        a.recip()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn name(&self) -> String {
        "Q".into()
    }
}

/// ℤ/p for a prime `p < 2³²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        let is_prime = p >= 2 && p < (1 << 32) && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0);
        if !is_prime {
            return Err(Error::InvalidArgument(format!("{p} is not a prime below 2^32")));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        (a * b) % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a) % self.p
    }
    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "inverse of zero");
        // Fermat: a^(p−2)
        let (mut base, mut exp, mut acc) = (*a, self.p - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            exp >>= 1;
        }
        acc
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn name(&self) -> String {
        format!("Z/{}", self.p)
    }
}

/// Rank of an integer matrix read over `field`, by row echelon elimination
/// on rows (independent of the column reduction used for persistence).
pub fn rank<F: Field>(field: &F, m: &SparseMatrix) -> usize {
    let mut rows: Vec<Vec<(usize, F::Elem)>> = vec![Vec::new(); m.rows()];
    for (j, c) in m.columns().iter().enumerate() {
        for &(i, v) in c {
            let e = field.from_i64(v);
            if !field.is_zero(&e) {
                rows[i].push((j, e));
            }
        }
    }
    // pivot column -> normalized pivot row (leading entry 1)
    let mut pivots: std::collections::BTreeMap<usize, Vec<(usize, F::Elem)>> = Default::default();
    for row in rows {
        let mut row = row;
        while let Some((lead, coeff)) = row.first().cloned() {
            let Some(p) = pivots.get(&lead) else {
                let inv = field.inv(&coeff);
                let normalized = row.iter().map(|(j, v)| (*j, field.mul(v, &inv))).collect();
                pivots.insert(lead, normalized);
                break;
            };
            row = axpy(field, &row, &coeff, p);
        }
    }
    pivots.len()
}

/// `a − c·b` for sparse rows sorted by column.
fn axpy<F: Field>(
    field: &F,
    a: &[(usize, F::Elem)],
    c: &F::Elem,
    b: &[(usize, F::Elem)],
) -> Vec<(usize, F::Elem)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, field.neg(&field.mul(c, &b[j].1))));
            j += 1;
        } else {
            let v = field.sub(&a[i].1, &field.mul(c, &b[j].1));
            if !field.is_zero(&v) {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}
