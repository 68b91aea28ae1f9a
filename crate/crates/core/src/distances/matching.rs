//! Bipartite perfect matching by augmenting paths.

/// A perfect matching of the complete bipartite graph `n × n` restricted to
/// edges with `allowed(i, j)`, as `left -> right`, if one exists.
pub fn perfect_matching(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| allowed(i, j)).collect()).collect();
    let mut right_owner: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, &adj, &mut seen, &mut right_owner) {
            return None;
        }
    }
    let mut left = vec![0; n];
    for (j, owner) in right_owner.iter().enumerate() {
        left[owner.expect("perfect")] = j;
    }
    Some(left)
}

fn augment(
    i: usize,
    adj: &[Vec<usize>],
    seen: &mut [bool],
    right_owner: &mut [Option<usize>],
) -> bool {
    for &j in &adj[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if right_owner[j].is_none_or(|o| augment(o, adj, seen, right_owner)) {
            right_owner[j] = Some(i);
            return true;
        }
    }
    false
}

/// Smallest value `c` in `candidates` (sorted, ascending) such that the
/// edges with `cost(i, j) ≤ c` admit a perfect matching, with that matching.
pub fn min_bottleneck(
    n: usize,
    cost: impl Fn(usize, usize) -> f64,
    candidates: &[f64],
) -> Option<(f64, Vec<usize>)> {
    let (mut lo, mut hi) = (0usize, candidates.len());
    let mut best = None;
    while lo < hi {
        let mid = (lo + hi) / 2;
        let c = candidates[mid];
        match perfect_matching(n, |i, j| cost(i, j) <= c) {
            Some(m) => {
                best = Some((c, m));
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_matching_when_one_exists() {
        let allowed = [[true, true, false], [true, false, false], [false, true, true]];
        let m = perfect_matching(3, |i, j| allowed[i][j]).unwrap();
        assert_eq!(m, vec![1, 0, 2]);
        assert!(perfect_matching(2, |_, j| j == 0).is_none());
        assert_eq!(perfect_matching(0, |_, _| false), Some(vec![]));
    }

    #[test]
    fn bottleneck_threshold() {
        let c = [[1.0, 5.0], [2.0, 3.0]];
        let mut cands: Vec<f64> = c.iter().flatten().copied().collect();
        cands.sort_by(f64::total_cmp);
        let (v, m) = min_bottleneck(2, |i, j| c[i][j], &cands).unwrap();
        assert_eq!(v, 3.0);
        assert_eq!(m, vec![0, 1]);
    }
}
