#![allow(dead_code)]

use icvi_artmap::{CviKind, Matrix};
use nalgebra::DMatrix;
use rand::Rng;

/// Index value straight from the textbook definitions: explicit loops,
/// LU determinants, nothing cached.
pub fn naive_index(kind: CviKind, x: &Matrix, labels: &[usize]) -> f64 {
    let (n, d) = (x.rows(), x.cols());
    let k = labels.iter().max().unwrap() + 1;
    let members: Vec<Vec<&[f64]>> = (0..k)
        .map(|c| (0..n).filter(|&r| labels[r] == c).map(|r| x.row(r)).collect())
        .collect();
    let mean = |rows: &[&[f64]]| -> Vec<f64> {
        (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64).collect()
    };
    let sq = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum() };
    let all: Vec<&[f64]> = x.iter_rows().collect();
    let mu_data = mean(&all);
    let mu: Vec<Vec<f64>> = members.iter().map(|m| mean(m)).collect();
    let cp: Vec<f64> = (0..k).map(|c| members[c].iter().map(|r| sq(r, &mu[c])).sum()).collect();
    let sep: Vec<f64> = (0..k).map(|c| members[c].len() as f64 * sq(&mu[c], &mu_data)).collect();
    let cp_sum: f64 = cp.iter().sum();
    let sep_sum: f64 = sep.iter().sum();
    let d2 = |i: usize, j: usize| sq(&mu[i], &mu[j]);
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();

    let delta = 10f64.powf(-12.0 / d as f64);
    let logdet = |rows: &[&[f64]], m: &[f64]| -> f64 {
        let mut s = DMatrix::<f64>::zeros(d, d);
        if rows.len() > 1 {
            for r in rows {
                for a in 0..d {
                    for b in 0..d {
                        s[(a, b)] += (r[a] - m[a]) * (r[b] - m[b]);
                    }
                }
            }
            s /= (rows.len() - 1) as f64;
        }
        s += DMatrix::identity(d, d) * delta;
        s.determinant().ln()
    };

    match kind {
        CviKind::Ch => (sep_sum / (k - 1) as f64) / (cp_sum / (n - k) as f64),
        CviKind::Wb => k as f64 * cp_sum / sep_sum,
        CviKind::Db => {
            let s: Vec<f64> = (0..k).map(|c| cp[c] / members[c].len() as f64).collect();
            (0..k)
                .map(|i| {
                    (0..k)
                        .filter(|&j| j != i)
                        .map(|j| (s[i] + s[j]) / d2(i, j))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .sum::<f64>()
                / k as f64
        }
        CviKind::Xb => {
            let min = pairs.iter().map(|&(i, j)| d2(i, j)).fold(f64::INFINITY, f64::min);
            cp_sum / (n as f64 * min)
        }
        CviKind::Pbm => {
            let e0: f64 = all.iter().map(|r| sq(r, &mu_data)).sum();
            let max = pairs.iter().map(|&(i, j)| d2(i, j)).fold(0.0, f64::max);
            (e0 / cp_sum * max / k as f64).powi(2)
        }
        CviKind::Ni => {
            let mut v = 0.0;
            for c in 0..k {
                let p = members[c].len() as f64 / n as f64;
                v += 0.5 * p * logdet(&members[c], &mu[c]) - p * p.ln();
            }
            v - 0.5 * logdet(&all, &mu_data)
        }
    }
}

/// Adjusted Rand index by enumerating every sample pair.
pub fn pair_count_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let total = both + only_a + only_b + neither;
    if total == 0.0 {
        return 1.0;
    }
    let same_a = both + only_a;
    let same_b = both + only_b;
    let expected = same_a * same_b / total;
    let max = 0.5 * (same_a + same_b);
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

pub fn close(a: f64, b: f64, rtol: f64) -> bool {
    a == b || (a - b).abs() <= rtol * a.abs().max(b.abs())
}

/// Standard-normal matrix with per-cluster offsets so partitions are not
/// degenerate.
pub fn random_data<R: Rng>(rng: &mut R, n: usize, d: usize, centers: usize) -> (Matrix, Vec<usize>) {
    let offsets: Vec<Vec<f64>> = (0..centers)
        .map(|_| (0..d).map(|_| rng.random_range(-4.0..4.0)).collect())
        .collect();
    let mut data = Vec::with_capacity(n * d);
    let mut truth = Vec::with_capacity(n);
    for r in 0..n {
        let c = r % centers;
        truth.push(c);
        for j in 0..d {
            let u: f64 = rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0);
            data.push(offsets[c][j] + u);
        }
    }
    (Matrix::new(n, d, data).unwrap(), truth)
}

/// Labels covering `0..k` with every cluster non-empty.
pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut l: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    for i in (1..n).rev() {
        l.swap(i, rng.random_range(0..=i));
    }
    l
}
