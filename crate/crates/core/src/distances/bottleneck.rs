//! Weight-preserving bottleneck distance between weighted barcodes.
//!
//! Bars are compared only within the same (degree, weight) class and the
//! result is the maximum over classes. Within a class, infinite bars are
//! paired with infinite bars by sorted birth; finite bars are matched to
//! finite bars at cost `max(|b₁ − b₂|, |d₁ − d₂|)` or sent to the diagonal at
//! cost `(d − b)/2`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::matching::min_bottleneck;
use crate::length::Length;
use crate::persistence::WeightedBar;

/// One edge of a matching; `None` on a side stands for the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    pub left: Option<usize>,
    pub right: Option<usize>,
    #[serde(serialize_with = "crate::io::serialize_f64")]
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Matching {
    pub pairs: Vec<MatchedPair>,
    #[serde(serialize_with = "crate::io::serialize_f64")]
    pub cost: f64,
}

/// Cost of matching two finite bars.
pub fn bar_cost(a: &WeightedBar, b: &WeightedBar) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

/// Cost of sending a finite bar to the diagonal.
pub fn diagonal_cost(a: &WeightedBar) -> f64 {
    (a.death - a.birth) / 2.0
}

fn classes(bars: &[WeightedBar]) -> BTreeMap<(usize, Length), Vec<usize>> {
    let mut out: BTreeMap<(usize, Length), Vec<usize>> = BTreeMap::new();
    for (i, b) in bars.iter().enumerate() {
        out.entry((b.dim, b.weight)).or_default().push(i);
    }
    out
}

/// `d_B(B₁, B₂)` with an optimal matching. Indices in the matching refer to
/// positions in `left` and `right`. The distance is `+∞` when some class has
/// different numbers of infinite bars.
pub fn bottleneck_weighted(left: &[WeightedBar], right: &[WeightedBar]) -> (f64, Matching) {
    let lc = classes(left);
    let rc = classes(right);
    let mut keys: Vec<&(usize, Length)> = lc.keys().chain(rc.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut matching = Matching::default();
    let empty = Vec::new();
    for key in keys {
        let li = lc.get(key).unwrap_or(&empty);
        let ri = rc.get(key).unwrap_or(&empty);
        let part = match_class(left, li, right, ri);
        matching.cost = matching.cost.max(part.cost);
        matching.pairs.extend(part.pairs);
    }
    (matching.cost, matching)
}

fn match_class(left: &[WeightedBar], li: &[usize], right: &[WeightedBar], ri: &[usize]) -> Matching {
    let mut out = Matching::default();
    let sorted_infinite = |bars: &[WeightedBar], idx: &[usize]| {
        let mut v: Vec<usize> = idx.iter().copied().filter(|&i| bars[i].is_infinite()).collect();
        v.sort_by(|&a, &b| bars[a].birth.total_cmp(&bars[b].birth));
        v
    };
    let linf = sorted_infinite(left, li);
    let rinf = sorted_infinite(right, ri);
    for (a, b) in linf.iter().zip(&rinf) {
        let cost = (left[*a].birth - right[*b].birth).abs();
        out.cost = out.cost.max(cost);
        out.pairs.push(MatchedPair { left: Some(*a), right: Some(*b), cost });
    }
    for &a in linf.iter().skip(rinf.len()) {
        out.pairs.push(MatchedPair { left: Some(a), right: None, cost: f64::INFINITY });
        out.cost = f64::INFINITY;
    }
    for &b in rinf.iter().skip(linf.len()) {
        out.pairs.push(MatchedPair { left: None, right: Some(b), cost: f64::INFINITY });
        out.cost = f64::INFINITY;
    }

    let lf: Vec<usize> = li.iter().copied().filter(|&i| !left[i].is_infinite()).collect();
    let rf: Vec<usize> = ri.iter().copied().filter(|&i| !right[i].is_infinite()).collect();
    let (p, q) = (lf.len(), rf.len());
    let n = p + q;
    if n == 0 {
        return out;
    }
    // left slots: p bars then q diagonal copies; right slots: q bars then p copies
    let cost = |i: usize, j: usize| -> f64 {
        match (i < p, j < q) {
            (true, true) => bar_cost(&left[lf[i]], &right[rf[j]]),
            (true, false) if j - q == i => diagonal_cost(&left[lf[i]]),
            (false, true) if i - p == j => diagonal_cost(&right[rf[j]]),
            (false, false) => 0.0,
            _ => f64::INFINITY,
        }
    };
    let mut candidates: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| cost(i, j))
        .filter(|c| c.is_finite())
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (value, assignment) =
        min_bottleneck(n, cost, &candidates).expect("all-diagonal assignment is feasible");
    out.cost = out.cost.max(value);
    for (i, &j) in assignment.iter().enumerate() {
        let c = cost(i, j);
        match (i < p, j < q) {
            (true, true) => out.pairs.push(MatchedPair { left: Some(lf[i]), right: Some(rf[j]), cost: c }),
            (true, false) => out.pairs.push(MatchedPair { left: Some(lf[i]), right: None, cost: c }),
            (false, true) => out.pairs.push(MatchedPair { left: None, right: Some(rf[j]), cost: c }),
            (false, false) => {}
        }
    }
    out
}
