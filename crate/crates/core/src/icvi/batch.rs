use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::linalg::{logdet_shifted, sq_dist};

use super::{index_value, ClusterView, CviKind, Globals};

struct BatchView {
    n: Vec<f64>,
    cp: Vec<f64>,
    sep: Vec<f64>,
    logdet: Vec<f64>,
    dist2: Vec<Vec<f64>>,
}

impl ClusterView for BatchView {
    fn k(&self) -> usize {
        self.n.len()
    }
    fn n(&self, i: usize) -> f64 {
        self.n[i]
    }
    fn cp(&self, i: usize) -> f64 {
        self.cp[i]
    }
    fn sep(&self, i: usize) -> f64 {
        self.sep[i]
    }
    fn logdet(&self, i: usize) -> f64 {
        self.logdet[i]
    }
    fn dist2(&self, i: usize, j: usize) -> f64 {
        self.dist2[i][j]
    }
}

/// Recomputes index values from raw data for arbitrary labelings.
///
/// Only the data-level terms (mean, total scatter, data covariance) are
/// computed once; every call rebuilds all cluster statistics from the rows.
#[derive(Clone, Debug)]
pub struct BatchEvaluator {
    kind: CviKind,
    g: Globals,
}

impl BatchEvaluator {
    pub fn new(kind: CviKind, x_b: &Matrix) -> Self {
        Self {
            kind,
            g: Globals::from_data(kind, x_b),
        }
    }

    pub fn kind(&self) -> CviKind {
        self.kind
    }

    /// Index value of `labels` (ids `0..k`, every cluster non-empty).
    pub fn value(&self, x_b: &Matrix, labels: &[usize]) -> Result<f64> {
        let (n_rows, d) = (x_b.rows(), x_b.cols());
        if labels.len() != n_rows {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} samples",
                labels.len(),
                n_rows
            )));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut count = vec![0usize; k];
        let mut mu = vec![vec![0.0; d]; k];
        for (r, &l) in labels.iter().enumerate() {
            count[l] += 1;
            for (m, x) in mu[l].iter_mut().zip(x_b.row(r)) {
                *m += x;
            }
        }
        if let Some(c) = count.iter().position(|&c| c == 0) {
            return Err(Error::EmptyCluster(c));
        }
        self.kind.check_k(k)?;
        for (m, &c) in mu.iter_mut().zip(&count) {
            m.iter_mut().for_each(|v| *v /= c as f64);
        }

        let cov = self.kind.needs_covariance();
        let mut cp = vec![0.0; k];
        let mut scatter = if cov { vec![vec![0.0; d * d]; k] } else { Vec::new() };
        let mut v = vec![0.0; d];
        for (r, &l) in labels.iter().enumerate() {
            let x = x_b.row(r);
            for j in 0..d {
                v[j] = x[j] - mu[l][j];
            }
            cp[l] += v.iter().map(|e| e * e).sum::<f64>();
            if cov {
                let s = &mut scatter[l];
                for i in 0..d {
                    let vi = v[i];
                    let row = &mut s[i * d..(i + 1) * d];
                    for j in i..d {
                        row[j] += vi * v[j];
                    }
                }
            }
        }

        let logdet = if cov {
            scatter
                .iter_mut()
                .zip(&count)
                .map(|(s, &c)| {
                    let scale = if c > 1 { 1.0 / (c - 1) as f64 } else { 0.0 };
                    for i in 0..d {
                        for j in i..d {
                            s[j * d + i] = s[i * d + j];
                        }
                    }
                    logdet_shifted(s, d, scale, self.g.delta)
                })
                .collect()
        } else {
            vec![0.0; k]
        };

        let view = BatchView {
            n: count.iter().map(|&c| c as f64).collect(),
            sep: (0..k).map(|i| self.g.sep(count[i], &mu[i])).collect(),
            cp,
            logdet,
            dist2: (0..k)
                .map(|i| (0..k).map(|j| if i == j { 0.0 } else { sq_dist(&mu[i], &mu[j]) }).collect())
                .collect(),
        };
        index_value(self.kind, &self.g, &view)
    }
}

/// Index value of `labels` on `x_b`, computed from scratch.
pub fn batch_value(kind: CviKind, x_b: &Matrix, labels: &[usize]) -> Result<f64> {
    BatchEvaluator::new(kind, x_b).value(x_b, labels)
}
