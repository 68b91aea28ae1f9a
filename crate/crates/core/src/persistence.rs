//! Persistent magnitude homology of a ball filtration.
//!
//! Every tuple over the full space enters the filtration at the largest entry
//! value among its points. For each length `l` the filtered complex
//! `MC_{*,l}` is reduced column by column over a field; the pairing gives
//! bars `[birth, death)` weighted by `l`.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{
    boundary_between, chain_counts, default_k_max, enumerate_tuples_limited, realized_lengths,
    MagnitudeChainBasis, PathTuple, DEFAULT_TUPLE_BUDGET,
};
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::length::Length;
use crate::linalg::{elementary_divisors, Field, SparseMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedBar {
    pub birth: f64,
    /// `f64::INFINITY` for classes that never die.
    #[serde(serialize_with = "crate::io::serialize_f64")]
    pub death: f64,
    #[serde(serialize_with = "crate::io::serialize_length")]
    pub weight: Length,
    pub dim: usize,
}

impl WeightedBar {
    pub fn is_infinite(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn alive_at(&self, r: f64) -> bool {
        self.birth <= r && r < self.death
    }
}

/// Canonical order: (dim, weight, birth, death).
pub fn bar_order(a: &WeightedBar, b: &WeightedBar) -> Ordering {
    a.dim
        .cmp(&b.dim)
        .then(a.weight.cmp(&b.weight))
        .then(a.birth.total_cmp(&b.birth))
        .then(a.death.total_cmp(&b.death))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BarcodeMetadata {
    pub dropped_zero_bars: usize,
    pub field: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WeightedBarcode {
    pub bars: Vec<WeightedBar>,
    pub metadata: BarcodeMetadata,
}

impl WeightedBarcode {
    pub fn new(mut bars: Vec<WeightedBar>) -> Self {
        bars.sort_by(bar_order);
        WeightedBarcode { bars, metadata: BarcodeMetadata::default() }
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// Bars of degree `k` and weight `l`.
    pub fn slice(&self, k: usize, l: &Length) -> impl Iterator<Item = &WeightedBar> + '_ {
        let l = *l;
        self.bars.iter().filter(move |b| b.dim == k && b.weight == l)
    }

    /// `β^{a,b}_{k,l}`: bars of the slice born by `a` and still alive after `b`.
    pub fn persistent_betti(&self, k: usize, l: &Length, a: f64, b: f64) -> Result<usize> {
        if a > b {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(self.slice(k, l).filter(|bar| bar.birth <= a && bar.death > b).count())
    }

    /// Distinct weights present, increasing.
    pub fn weights(&self) -> Vec<Length> {
        let mut w: Vec<Length> = self.bars.iter().map(|b| b.weight).collect();
        w.sort();
        w.dedup();
        w
    }
}

/// A basis of `MC_{k,l}` over the whole space, sorted by (entry value,
/// lexicographic tuple).
#[derive(Debug, Clone)]
pub struct FilteredBasis {
    pub basis: MagnitudeChainBasis,
    /// Position in `basis` of the j-th tuple in filtration order.
    pub order: Vec<usize>,
    /// Entry value of the j-th tuple in filtration order.
    pub entry: Vec<f64>,
}

impl FilteredBasis {
    fn new(filtration: &Filtration, basis: MagnitudeChainBasis) -> Self {
        let values: Vec<f64> =
            basis.tuples().iter().map(|t| filtration.entry_value(&t.points)).collect();
        let mut order: Vec<usize> = (0..basis.len()).collect();
        // the basis is already lexicographic, so a stable sort keeps ties in that order
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let entry = order.iter().map(|&i| values[i]).collect();
        FilteredBasis { basis, order, entry }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn tuple(&self, j: usize) -> &PathTuple {
        &self.basis.tuples()[self.order[j]]
    }

    /// Tuples present at filtration value `r`.
    pub fn alive_at(&self, r: f64) -> impl Iterator<Item = &PathTuple> + '_ {
        (0..self.len()).filter(move |&j| self.entry[j] <= r).map(|j| self.tuple(j))
    }
}

/// Boundary matrix between filtered bases, rows and columns in filtration
/// order.
fn filtered_boundary(
    filtration: &Filtration,
    source: &FilteredBasis,
    target: &FilteredBasis,
) -> SparseMatrix {
    let raw = boundary_between(filtration.space(), &source.basis, &target.basis);
    let mut row_pos = vec![0; target.len()];
    for (j, &i) in target.order.iter().enumerate() {
        row_pos[i] = j;
    }
    let columns = source
        .order
        .iter()
        .map(|&c| raw.column(c).iter().map(|&(r, v)| (row_pos[r], v)).collect())
        .collect();
    SparseMatrix::from_columns(target.len(), columns)
}

/// The filtered slice `(k, l)` with its neighbours: `d_k` into degree `k−1`
/// and `d_{k+1}` from degree `k+1`.
#[derive(Debug, Clone)]
pub struct FilteredSliceComplex {
    pub k: usize,
    pub l: Length,
    pub basis: FilteredBasis,
    pub upper: FilteredBasis,
    pub d_k: SparseMatrix,
    pub d_k1: SparseMatrix,
}

fn filtered_basis(f: &Filtration, k: usize, l: &Length, budget: u128) -> Result<FilteredBasis> {
    Ok(FilteredBasis::new(f, enumerate_tuples_limited(f.space(), k, l, budget)?))
}

pub fn filtered_slice(f: &Filtration, k: usize, l: &Length) -> Result<FilteredSliceComplex> {
    filtered_slice_limited(f, k, l, DEFAULT_TUPLE_BUDGET)
}

pub fn filtered_slice_limited(
    f: &Filtration,
    k: usize,
    l: &Length,
    budget: u128,
) -> Result<FilteredSliceComplex> {
    let basis = filtered_basis(f, k, l, budget)?;
    let upper = filtered_basis(f, k + 1, l, budget)?;
    let d_k = if k == 0 {
        SparseMatrix::zeros(0, basis.len())
    } else {
        filtered_boundary(f, &basis, &filtered_basis(f, k - 1, l, budget)?)
    };
    let d_k1 = filtered_boundary(f, &upper, &basis);
    Ok(FilteredSliceComplex { k, l: *l, basis, upper, d_k, d_k1 })
}

/// Column reduction over `field`. Returns the pivot (lowest nonzero row) of
/// each reduced column, `None` for columns reduced to zero.
pub fn reduce_columns<F: Field>(field: &F, m: &SparseMatrix) -> Vec<Option<usize>> {
    let mut reduced: Vec<Vec<(usize, F::Elem)>> = Vec::with_capacity(m.cols());
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let mut lows = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let mut col: Vec<(usize, F::Elem)> = m
            .column(j)
            .iter()
            .map(|&(r, v)| (r, field.from_i64(v)))
            .filter(|(_, v)| !field.is_zero(v))
            .collect();
        while let Some((low, c)) = col.last().cloned() {
            let Some(&other) = owner.get(&low) else { break };
            let (_, oc) = reduced[other].last().cloned().expect("pivot column is nonzero");
            let factor = field.mul(&c, &field.inv(&oc));
            col = sub_scaled(field, &col, &factor, &reduced[other]);
        }
        let low = col.last().map(|e| e.0);
        if let Some(r) = low {
            owner.insert(r, j);
        }
        lows.push(low);
        reduced.push(col);
    }
    lows
}

/// `a − c·b` for columns sorted by row.
fn sub_scaled<F: Field>(
    field: &F,
    a: &[(usize, F::Elem)],
    c: &F::Elem,
    b: &[(usize, F::Elem)],
) -> Vec<(usize, F::Elem)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => break,
            (Some(x), None) => {
                out.push(x.clone());
                i += 1;
            }
            (None, Some(y)) => {
                out.push((y.0, field.neg(&field.mul(c, &y.1))));
                j += 1;
            }
            (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                Ordering::Less => {
                    out.push(x.clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((y.0, field.neg(&field.mul(c, &y.1))));
                    j += 1;
                }
                Ordering::Equal => {
                    let v = field.sub(&x.1, &field.mul(c, &y.1));
                    if !field.is_zero(&v) {
                        out.push((x.0, v));
                    }
                    i += 1;
                    j += 1;
                }
            },
        }
    }
    out
}

/// Bars of degree `k` from the reductions of `d_k` and `d_{k+1}`.
/// Returns the bars and the number of zero-length bars dropped.
fn pair_degree(
    k: usize,
    l: &Length,
    basis: &FilteredBasis,
    upper: &FilteredBasis,
    lows_k: &[Option<usize>],
    lows_k1: &[Option<usize>],
) -> (Vec<WeightedBar>, usize) {
    let mut killer = vec![None; basis.len()];
    for (i, low) in lows_k1.iter().enumerate() {
        if let Some(r) = low {
            killer[*r] = Some(i);
        }
    }
    let mut bars = Vec::new();
    let mut dropped = 0;
    for j in 0..basis.len() {
        if lows_k[j].is_some() {
            continue;
        }
        let birth = basis.entry[j];
        let death = killer[j].map_or(f64::INFINITY, |i| upper.entry[i]);
        if death == birth {
            dropped += 1;
        } else {
            bars.push(WeightedBar { birth, death, weight: *l, dim: k });
        }
    }
    (bars, dropped)
}

/// Bars of one slice.
pub fn reduce_slice<F: Field>(c: &FilteredSliceComplex, field: &F) -> (Vec<WeightedBar>, usize) {
    let lows_k = reduce_columns(field, &c.d_k);
    let lows_k1 = reduce_columns(field, &c.d_k1);
    pair_degree(c.k, &c.l, &c.basis, &c.upper, &lows_k, &lows_k1)
}

struct LengthResult {
    bars: Vec<WeightedBar>,
    dropped: usize,
    warnings: Vec<String>,
}

fn barcode_at_length<F: Field>(
    f: &Filtration,
    l: &Length,
    k_max: Option<usize>,
    field: &F,
    budget: u128,
) -> Result<LengthResult> {
    let counts = chain_counts(f.space(), l);
    let top = match k_max {
        Some(k) => {
            if counts.len() > k + 1 {
                return Err(Error::TruncationNotSaturated { k: k + 1, l: l.to_text() });
            }
            k
        }
        None => default_k_max(f.space(), l).max(counts.len().saturating_sub(1)),
    };
    let top = top.min(counts.len().saturating_sub(1));
    let total: BigInt = counts.iter().sum();
    if total > BigInt::from(budget) {
        return Err(Error::ResourceLimit {
            what: format!("chain complex MC_{{*,{l}}}"),
            size: u128::try_from(total).unwrap_or(u128::MAX),
            limit: budget,
        });
    }
    let bases: Vec<FilteredBasis> =
        (0..=top + 1).map(|k| filtered_basis(f, k, l, budget)).collect::<Result<_>>()?;
    let mut boundaries = vec![SparseMatrix::zeros(0, bases[0].len())];
    for k in 1..bases.len() {
        boundaries.push(filtered_boundary(f, &bases[k], &bases[k - 1]));
    }
    let lows: Vec<Vec<Option<usize>>> =
        boundaries.iter().map(|m| reduce_columns(field, m)).collect();
    let mut out = LengthResult { bars: Vec::new(), dropped: 0, warnings: Vec::new() };
    for k in 0..=top {
        let (bars, dropped) = pair_degree(k, l, &bases[k], &bases[k + 1], &lows[k], &lows[k + 1]);
        out.bars.extend(bars);
        out.dropped += dropped;
    }
    for (k, m) in boundaries.iter().enumerate().skip(1) {
        let torsion: Vec<BigInt> =
            elementary_divisors(m).into_iter().filter(|d| !d.is_one()).collect();
        if !torsion.is_empty() {
            let list: Vec<String> = torsion.iter().map(ToString::to_string).collect();
            out.warnings.push(format!(
                "integer homology MH_{{{},{l}}} of the full space has torsion [{}]; {} ranks may differ from integer ranks",
                k - 1,
                list.join(", "),
                field.name()
            ));
        }
    }
    Ok(out)
}

/// Union of the slice barcodes over all realized `l ≤ l_max` and `k ≤ k_max`.
pub fn weighted_barcode<F: Field>(
    f: &Filtration,
    l_max: &Length,
    k_max: Option<usize>,
    field: &F,
) -> Result<WeightedBarcode> {
    weighted_barcode_limited(f, l_max, k_max, field, DEFAULT_TUPLE_BUDGET)
}

pub fn weighted_barcode_limited<F: Field>(
    f: &Filtration,
    l_max: &Length,
    k_max: Option<usize>,
    field: &F,
    budget: u128,
) -> Result<WeightedBarcode> {
    let lengths = realized_lengths(f.space(), l_max);
    // fail before any reduction work if some length is over budget
    for l in &lengths {
        let total: BigInt = chain_counts(f.space(), l).iter().sum();
        if total > BigInt::from(budget) {
            return Err(Error::ResourceLimit {
                what: format!("chain complex MC_{{*,{l}}}"),
                size: u128::try_from(total).unwrap_or(u128::MAX),
                limit: budget,
            });
        }
    }
    let per_length: Vec<LengthResult> = lengths
        .par_iter()
        .map(|l| barcode_at_length(f, l, k_max, field, budget))
        .collect::<Result<_>>()?;
    let mut barcode = WeightedBarcode::default();
    barcode.metadata.field = field.name();
    for r in per_length {
        barcode.bars.extend(r.bars);
        barcode.metadata.dropped_zero_bars += r.dropped;
        barcode.metadata.warnings.extend(r.warnings);
    }
    barcode.bars.sort_by(bar_order);
    Ok(barcode)
}

/// `β^{a,b}_{k,l}` computed from a fresh barcode of the slice.
pub fn persistent_betti<F: Field>(
    f: &Filtration,
    k: usize,
    l: &Length,
    a: f64,
    b: f64,
    field: &F,
) -> Result<usize> {
    if a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    let slice = filtered_slice(f, k, l)?;
    let (bars, _) = reduce_slice(&slice, field);
    Ok(bars.iter().filter(|bar| bar.birth <= a && bar.death > b).count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistentMagnitude {
    pub value: f64,
    /// `(l, Σ_k (−1)^k β^{a,b}_{k,l})` for each realized length.
    pub terms: Vec<(Length, i64)>,
}

/// `Σ_{l ≤ l_max} Σ_k (−1)^k β^{a,b}_{k,l} e^{−l}`.
pub fn persistent_magnitude<F: Field>(
    f: &Filtration,
    a: f64,
    b: f64,
    l_max: &Length,
    k_max: Option<usize>,
    field: &F,
    budget: u128,
) -> Result<PersistentMagnitude> {
    if a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    let barcode = weighted_barcode_limited(f, l_max, k_max, field, budget)?;
    persistent_magnitude_from_barcode(&barcode, f, a, b, l_max)
}

/// Same sum read off an already computed barcode.
pub fn persistent_magnitude_from_barcode(
    barcode: &WeightedBarcode,
    f: &Filtration,
    a: f64,
    b: f64,
    l_max: &Length,
) -> Result<PersistentMagnitude> {
    if a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    let mut terms = Vec::new();
    let mut value = 0.0;
    for l in realized_lengths(f.space(), l_max) {
        let mut chi = 0i64;
        for bar in barcode.bars.iter().filter(|bar| bar.weight == l) {
            if bar.birth <= a && bar.death > b {
                chi += if bar.dim % 2 == 0 { 1 } else { -1 };
            }
        }
        value += chi as f64 * (-l.to_f64()).exp();
        terms.push((l, chi));
    }
    Ok(PersistentMagnitude { value, terms })
}
