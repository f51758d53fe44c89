//! Maximum-weight perfect matchings on small square weight matrices.

/// Largest size handled by exhaustive enumeration.
const BRUTE_FORCE_MAX: usize = 6;

/// Returns `perm` maximizing `Σ_j weights[j][perm[j]]`.
///
/// Ties keep the lexicographically smallest permutation.
pub fn max_weight_bijection(weights: &[Vec<f64>]) -> Vec<usize> {
    if weights.len() <= BRUTE_FORCE_MAX {
        max_weight_bijection_brute_force(weights)
    } else {
        hungarian_max(weights)
    }
}

/// Enumerates all `n!` permutations in lexicographic order.
pub fn max_weight_bijection_brute_force(weights: &[Vec<f64>]) -> Vec<usize> {
    let n = weights.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_value = score(weights, &perm);
    while next_permutation(&mut perm) {
        let value = score(weights, &perm);
        if value > best_value + 1e-15 {
            best_value = value;
            best.copy_from_slice(&perm);
        }
    }
    best
}

fn score(weights: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(j, &k)| weights[j][k]).sum()
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// O(n³) Hungarian algorithm (shortest augmenting paths with potentials)
/// run on negated weights.
fn hungarian_max(weights: &[Vec<f64>]) -> Vec<usize> {
    let n = weights.len();
    let cost = |i: usize, j: usize| -weights[i - 1][j - 1];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // p[j]: row matched to column j (1-based, 0 = free).
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn permutations_enumerate_all() {
        let mut v = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 24);
    }

    #[test]
    fn identity_preferred_on_diagonal_weights() {
        let w = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(max_weight_bijection(&w), vec![0, 1]);
    }

    #[test]
    fn picks_larger_split_when_both_want_same_column() {
        // Both rows prefer column 0; giving it to row 1 loses less.
        let w = vec![vec![0.9, 0.1], vec![0.6, 0.4]];
        let perm = max_weight_bijection(&w);
        assert_eq!(perm, vec![0, 1]);
        let w = vec![vec![0.6, 0.4], vec![0.9, 0.1]];
        assert_eq!(max_weight_bijection(&w), vec![1, 0]);
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            for _ in 0..200 {
                let w: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
                    .collect();
                let a = score(&w, &hungarian_max(&w));
                let b = score(&w, &max_weight_bijection_brute_force(&w));
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hungarian_returns_permutation_for_large_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 13;
        let w: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
            .collect();
        let mut perm = max_weight_bijection(&w);
        perm.sort_unstable();
        assert_eq!(perm, (0..n).collect::<Vec<_>>());
    }
}
