//! Smith normal form over ℤ.
//!
//! Boundary matrices are large, sparse and mostly `±1`, so most of the work is
//! done by eliminating unit pivots in place (each contributes a divisor 1).
//! What is left, usually tiny, goes through a dense arbitrary-precision SNF.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::sparse::SparseMatrix;

/// Nonzero elementary divisors `d_1 | d_2 | ⋯`, all positive. Their count is
/// the rank of the matrix.
pub fn elementary_divisors(m: &SparseMatrix) -> Vec<BigInt> {
    let mut state = UnitElimination::new(m);
    let units = state.run();
    let rest = state.remaining_dense();
    let mut divisors = vec![BigInt::one(); units];
    divisors.extend(dense_snf(rest));
    divisors.sort();
    divisors
}

/// Number of elementary divisors, i.e. the rank over ℚ.
pub fn integer_rank(m: &SparseMatrix) -> usize {
    elementary_divisors(m).len()
}

struct UnitElimination {
    columns: Vec<Option<BTreeMap<usize, i64>>>,
    row_index: Vec<HashSet<usize>>,
}

impl UnitElimination {
    fn new(m: &SparseMatrix) -> Self {
        let mut row_index = vec![HashSet::new(); m.rows()];
        let columns = m
            .columns()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                for &(i, _) in c {
                    row_index[i].insert(j);
                }
                Some(c.iter().copied().collect())
            })
            .collect();
        UnitElimination { columns, row_index }
    }

    /// Eliminates unit pivots until none remain or an update would overflow.
    /// Returns the number of pivots removed.
    fn run(&mut self) -> usize {
        let mut pivots = 0;
        loop {
            let mut progress = false;
            for j in 0..self.columns.len() {
                let Some(col) = &self.columns[j] else { continue };
                if col.is_empty() {
                    self.columns[j] = None;
                    continue;
                }
                let pivot = col
                    .iter()
                    .filter(|(_, v)| v.abs() == 1)
                    .min_by_key(|(r, _)| self.row_index[**r].len())
                    .map(|(r, v)| (*r, *v));
                let Some((r, v)) = pivot else { continue };
                match self.eliminate(j, r, v) {
                    Some(()) => {
                        pivots += 1;
                        progress = true;
                    }
                    None => return pivots,
                }
            }
            if !progress {
                return pivots;
            }
        }
    }

    /// Clears row `r` from every other column using the unit at `(r, j)`,
    /// then drops column `j`. Commits nothing if an update would overflow.
    fn eliminate(&mut self, j: usize, r: usize, v: i64) -> Option<()> {
        let pivot_col = self.columns[j].clone().expect("active column");
        let others: Vec<usize> = self.row_index[r].iter().copied().filter(|&c| c != j).collect();
        let mut updates = Vec::with_capacity(others.len());
        for &c in &others {
            let col = self.columns[c].as_ref().expect("indexed column is active");
            let factor = col[&r] * v; // v = ±1 so col[r] / v = col[r] * v
            let mut next = col.clone();
            for (&row, &pv) in &pivot_col {
                let delta = factor.checked_mul(pv)?;
                let entry = next.entry(row).or_insert(0);
                *entry = entry.checked_sub(delta)?;
                if *entry == 0 {
                    next.remove(&row);
                }
            }
            debug_assert!(!next.contains_key(&r));
            updates.push((c, next));
        }
        for (c, next) in updates {
            let old = self.columns[c].as_ref().expect("active");
            for row in old.keys() {
                if !next.contains_key(row) {
                    self.row_index[*row].remove(&c);
                }
            }
            for row in next.keys() {
                self.row_index[*row].insert(c);
            }
            self.columns[c] = Some(next);
        }
        for row in pivot_col.keys() {
            self.row_index[*row].remove(&j);
        }
        self.columns[j] = None;
        debug_assert!(self.row_index[r].is_empty());
        Some(())
    }

    fn remaining_dense(&self) -> Vec<Vec<BigInt>> {
        let cols: Vec<&BTreeMap<usize, i64>> =
            self.columns.iter().flatten().filter(|c| !c.is_empty()).collect();
        let mut rows: Vec<usize> = cols.iter().flat_map(|c| c.keys().copied()).collect();
        rows.sort_unstable();
        rows.dedup();
        let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(k, &r)| (r, k)).collect();
        let mut dense = vec![vec![BigInt::zero(); cols.len()]; rows.len()];
        for (j, c) in cols.iter().enumerate() {
            for (r, v) in c.iter() {
                dense[pos[r]][j] = BigInt::from(*v);
            }
        }
        dense
    }
}

/// Diagonal of the Smith normal form of a dense matrix (nonzero entries only).
pub fn dense_snf(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero()
                    && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..cols {
                    let delta = &q * &a[t][j];
                    a[i][j] -= delta;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                    a.swap(t, i);
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let delta = &q * &row[t];
                    row[j] -= delta;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                }
            }
            if !clean {
                continue;
            }
            // the pivot must divide the whole trailing block
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !(&a[i][j] % &a[t][t]).is_zero());
            match bad {
                Some((i, _)) => {
                    for j in t..cols {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        out.push(a[t][t].abs());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn diagonal_divisors() {
        let m = SparseMatrix::from_dense(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(elementary_divisors(&m), big(&[1, 6]));
        let m = SparseMatrix::from_dense(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(elementary_divisors(&m), big(&[2, 6, 12]));
    }

    #[test]
    fn unit_phase_and_rank() {
        let m = SparseMatrix::from_dense(&[vec![1, 1, 0], vec![-1, 0, 1], vec![0, -1, -1]]);
        assert_eq!(elementary_divisors(&m), big(&[1, 1]));
        assert_eq!(integer_rank(&SparseMatrix::zeros(3, 4)), 0);
    }

    #[test]
    fn torsion_survives() {
        // boundary of the real projective plane style relation: 2·e
        let m = SparseMatrix::from_dense(&[vec![2], vec![0]]);
        assert_eq!(elementary_divisors(&m), big(&[2]));
    }

    fn dense_oracle_divisors(m: &[Vec<i64>]) -> Vec<BigInt> {
        let mut d = dense_snf(m.iter().map(|r| big(r)).collect());
        d.sort();
        d
    }

    proptest::proptest! {
        #[test]
        fn sparse_phase_agrees_with_dense(
            entries in proptest::collection::vec(-2i64..=2, 1..=30),
            cols in 1usize..=6,
        ) {
            let rows = entries.len().div_ceil(cols);
            let mut dense = vec![vec![0; cols]; rows];
            for (k, v) in entries.iter().enumerate() {
                dense[k / cols][k % cols] = *v;
            }
            let m = SparseMatrix::from_dense(&dense);
            proptest::prop_assert_eq!(elementary_divisors(&m), dense_oracle_divisors(&dense));
        }
    }
}
