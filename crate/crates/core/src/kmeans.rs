//! k-means with k-means++ seeding.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::linalg::sq_dist;

pub const MAX_ITER: usize = 300;
pub const TOL: f64 = 1e-6;
pub const TRIALS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeans {
    pub centroids: Matrix,
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

fn check_k(x: &Matrix, k: usize) -> Result<()> {
    if k == 0 || k > x.rows() {
        return Err(Error::InvalidInput(format!(
            "k = {k} must be between 1 and the sample count {}",
            x.rows()
        )));
    }
    Ok(())
}

/// D^2 seeding: the first centroid is uniform, each next one is drawn with
/// probability proportional to the squared distance to the nearest chosen
/// centroid.
pub fn kmeanspp_seed_with<R: Rng + ?Sized>(x: &Matrix, k: usize, rng: &mut R) -> Result<Matrix> {
    check_k(x, k)?;
    let n = x.rows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(chosen[0]))).collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&nearest) {
            Ok(w) => w.sample(rng),
            // every remaining point coincides with a centroid
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), x.row(next)));
        }
    }
    let rows: Vec<&[f64]> = chosen.iter().map(|&i| x.row(i)).collect();
    Matrix::from_rows(&rows)
}

pub fn kmeanspp_seed(x: &Matrix, k: usize, seed: u64) -> Result<Matrix> {
    kmeanspp_seed_with(x, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn nearest(x: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centroids.iter_rows().enumerate() {
        let d = sq_dist(x, mu);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd iterations from `seeds` until the total squared centroid shift
/// drops to `tol` or `max_iter` is reached. Clusters left empty by an
/// assignment step take the point farthest from its centroid.
pub fn kmeans_fit(x: &Matrix, seeds: &Matrix, max_iter: usize, tol: f64) -> KMeans {
    let (n, d, k) = (x.rows(), x.cols(), seeds.rows());
    let mut centroids = seeds.clone();
    let mut labels = vec![0; n];
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let mut dist = vec![0.0; n];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let (c, dd) = nearest(x.row(i), &centroids);
            labels[i] = c;
            dist[i] = dd;
            counts[c] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                .expect("k <= n leaves a cluster with two members");
            counts[labels[far]] -= 1;
            labels[far] = c;
            counts[c] = 1;
            dist[far] = 0.0;
        }
        let mut next = Matrix::zeros(k, d);
        for i in 0..n {
            let row = next.row_mut(labels[i]);
            for (m, v) in row.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for c in 0..k {
            let cnt = counts[c] as f64;
            next.row_mut(c).iter_mut().for_each(|m| *m /= cnt);
        }
        let shift: f64 = (0..k).map(|c| sq_dist(next.row(c), centroids.row(c))).sum();
        centroids = next;
        if shift <= tol {
            break;
        }
    }
    let inertia = (0..n).map(|i| sq_dist(x.row(i), centroids.row(labels[i]))).sum();
    KMeans {
        centroids,
        labels,
        inertia,
        iterations,
    }
}

/// Lowest-inertia run out of `trials` seeded fits.
pub fn best_of(x: &Matrix, k: usize, trials: usize, seed: u64) -> Result<KMeans> {
    check_k(x, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeans> = None;
    for _ in 0..trials.max(1) {
        let seeds = kmeanspp_seed_with(x, k, &mut rng)?;
        let run = kmeans_fit(x, &seeds, MAX_ITER, TOL);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one trial"))
}
