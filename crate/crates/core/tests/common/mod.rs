//! Reference implementations used as test oracles. They work on raw label
//! vectors with hash maps and pair loops, sharing no code with the library.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: u32) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// Pairwise generalized Binder cost over unordered pairs: `a` for pairs
/// together in `truth` but split in `est`, `b` for the reverse.
pub fn binder_pairs(truth: &[u32], est: &[u32], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..truth.len() {
        for j in (i + 1)..truth.len() {
            let t = truth[i] == truth[j];
            let e = est[i] == est[j];
            if t && !e {
                total += a;
            } else if !t && e {
                total += b;
            }
        }
    }
    total
}

fn entropy_of<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>, n: usize) -> f64 {
    let mut counts: HashMap<K, usize> = HashMap::new();
    for k in keys {
        *counts.entry(k).or_default() += 1;
    }
    let n = n as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// `(H(truth), H(est), I(truth, est))` in bits.
pub fn entropies(truth: &[u32], est: &[u32]) -> (f64, f64, f64) {
    let n = truth.len();
    let h1 = entropy_of(truth.iter(), n);
    let h2 = entropy_of(est.iter(), n);
    let h12 = entropy_of(truth.iter().zip(est), n);
    (h1, h2, h1 + h2 - h12)
}

pub fn gvi(truth: &[u32], est: &[u32], a: f64, b: f64) -> f64 {
    let (h1, h2, i) = entropies(truth, est);
    b * h1 + a * h2 - (a + b) * i
}

pub fn vi(truth: &[u32], est: &[u32]) -> f64 {
    gvi(truth, est, 1.0, 1.0)
}

/// Rand index from pair counting.
pub fn rand_index(truth: &[u32], est: &[u32]) -> f64 {
    let n = truth.len();
    let mut agree = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            if (truth[i] == truth[j]) == (est[i] == est[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / (n * (n - 1) / 2) as f64
}

/// Adjusted Rand index from pair counting.
pub fn adjusted_rand(truth: &[u32], est: &[u32]) -> f64 {
    let n = truth.len();
    let (mut both, mut t, mut e) = (0f64, 0f64, 0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            let st = truth[i] == truth[j];
            let se = est[i] == est[j];
            both += (st && se) as u8 as f64;
            t += st as u8 as f64;
            e += se as u8 as f64;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let expected = t * e / pairs;
    (both - expected) / (0.5 * (t + e) - expected)
}

/// Co-clustering proportions from the raw draws.
pub fn psm(draws: &[Vec<u32>]) -> Vec<Vec<f64>> {
    let n = draws[0].len();
    let mut m = vec![vec![0.0; n]; n];
    for d in draws {
        for i in 0..n {
            for j in 0..n {
                if d[i] == d[j] {
                    m[i][j] += 1.0;
                }
            }
        }
    }
    for row in &mut m {
        for x in row {
            *x /= draws.len() as f64;
        }
    }
    m
}

pub fn mean_over<F: Fn(&[u32]) -> f64>(draws: &[Vec<u32>], f: F) -> f64 {
    draws.iter().map(|d| f(d)).sum::<f64>() / draws.len() as f64
}

/// Every set partition of `n` items by recursive insertion, in no
/// particular order, as 0-based label vectors.
pub fn all_partitions(n: usize) -> Vec<Vec<u32>> {
    fn go(i: usize, n: usize, cur: &mut Vec<u32>, k: u32, out: &mut Vec<Vec<u32>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=k {
            cur.push(c);
            go(i + 1, n, cur, k.max(c + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Number of clusters of a raw label vector.
pub fn n_clusters(labels: &[u32]) -> usize {
    let mut seen: Vec<u32> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}
