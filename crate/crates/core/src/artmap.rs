//! Fuzzy ARTa and the map field.
//!
//! ARTa categories are hyperboxes stored as complement-coded weight rows. The
//! map field holds one row per ARTa category and one column per live cluster;
//! the argmax of a row is the category's predicted cluster. There are no
//! uncommitted categories: when nothing resonates, the input is committed as a
//! new category with an all-ones map-field row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Perturbation used when splitting a category whose map-field row is
/// uniform.
pub const SPLIT_DELTA: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtA {
    /// `C_a x 2d` weight rows, entries in `[0, 1]`.
    pub weights: Vec<Vec<f64>>,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Samples currently coded by each category.
    pub instance_count: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapField {
    /// `C_a x k'` mapping matrix, entries in `[0, 1]`.
    pub weights: Vec<Vec<f64>>,
    pub rho: f64,
    pub beta: f64,
    /// Match-tracking increment.
    pub epsilon: f64,
    /// Live cluster count `k'` (kept explicitly so an empty network still
    /// knows its width).
    pub clusters: usize,
}

#[inline]
fn l1_min(x: &[f64], w: &[f64]) -> f64 {
    x.iter().zip(w).map(|(a, b)| a.min(*b)).sum()
}

/// `w <- (1 - beta) w + beta (x ^ w)`; exact `x ^ w` when `beta = 1`.
#[inline]
fn fuzzy_learn(w: &mut [f64], x: &[f64], beta: f64) {
    for (wi, xi) in w.iter_mut().zip(x) {
        *wi = (1.0 - beta) * *wi + beta * xi.min(*wi);
    }
}

/// Index of the largest entry; lowest index wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl ArtA {
    pub fn new(rho: f64, alpha: f64, beta: f64) -> Self {
        Self {
            weights: Vec::new(),
            rho,
            alpha,
            beta,
            instance_count: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Choice values `T_j = |x ^ w_j| / (alpha + |w_j|)`.
    pub fn activations(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| l1_min(x, w) / (self.alpha + w.iter().sum::<f64>()))
            .collect()
    }

    /// `M_J = |x ^ w_J| / |x|`.
    pub fn match_value(&self, x: &[f64], j: usize) -> f64 {
        l1_min(x, &self.weights[j]) / x.iter().sum::<f64>()
    }

    pub fn learn(&mut self, j: usize, x: &[f64]) {
        let beta = self.beta;
        fuzzy_learn(&mut self.weights[j], x, beta);
    }

    /// Resets `w_r` to the element-wise minimum of `samples`.
    pub fn shrink<'a>(&mut self, r: usize, samples: impl IntoIterator<Item = &'a [f64]>) -> Result<()> {
        let mut it = samples.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::Contract(format!("cannot shrink category {r} onto no samples")))?;
        let w = &mut self.weights[r];
        w.copy_from_slice(first);
        for s in it {
            for (wi, si) in w.iter_mut().zip(s) {
                *wi = wi.min(*si);
            }
        }
        Ok(())
    }
}

impl MapField {
    pub fn new(rho: f64, beta: f64, epsilon: f64, clusters: usize) -> Self {
        Self {
            weights: Vec::new(),
            rho,
            beta,
            epsilon,
            clusters,
        }
    }

    /// `M^ab_J = |y ^ w^ab_J| / |y|`.
    pub fn match_value(&self, j: usize, y: &[f64]) -> f64 {
        l1_min(y, &self.weights[j]) / y.iter().sum::<f64>()
    }

    pub fn learn(&mut self, j: usize, y: &[f64]) {
        let beta = self.beta;
        fuzzy_learn(&mut self.weights[j], y, beta);
    }

    /// Cluster predicted for category `j`.
    pub fn predict(&self, j: usize) -> usize {
        argmax(&self.weights[j])
    }

    /// Replaces columns `i` and `j` by one merged column appended last.
    ///
    /// For each row, the merged entry is the larger of the two entries when
    /// the row currently predicts `i` or `j`, otherwise the smaller one.
    /// Returns the merged column's index (`k' - 2`).
    pub fn merge_columns(&mut self, i: usize, j: usize) -> usize {
        assert!(i != j && i < self.clusters && j < self.clusters);
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        for row in &mut self.weights {
            let pred = argmax(row);
            let v = if pred == i || pred == j {
                row[i].max(row[j])
            } else {
                row[i].min(row[j])
            };
            row.push(v);
            row.remove(hi);
            row.remove(lo);
        }
        self.clusters -= 1;
        self.clusters - 1
    }

    /// Turns category `q` into the sole representative of a new cluster
    /// (appended as the last column) and returns the new cluster id.
    pub fn split_column(&mut self, q: usize) -> usize {
        let k = self.clusters;
        for (l, row) in self.weights.iter_mut().enumerate() {
            if l != q {
                row.push(0.0);
                continue;
            }
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            if max == min {
                let c = (max - SPLIT_DELTA).max(0.0);
                row.iter_mut().for_each(|w| *w = c);
            } else {
                let h = argmax(row);
                row[h] = min;
            }
            row.push(max);
        }
        self.clusters += 1;
        k
    }

    /// Removes cluster column `c` (used when a cluster loses its last sample).
    pub fn delete_column(&mut self, c: usize) {
        for row in &mut self.weights {
            row.remove(c);
        }
        self.clusters -= 1;
    }
}

/// ARTa plus map field, kept in lock-step row-wise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artmap {
    pub art: ArtA,
    pub map: MapField,
}

/// Outcome of [`Artmap::search_and_resonate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resonance {
    pub category: usize,
    pub created: bool,
}

impl Artmap {
    pub fn new(art: ArtA, map: MapField) -> Self {
        Self { art, map }
    }

    pub fn categories(&self) -> usize {
        self.art.len()
    }

    /// Appends `x` as a new category with an all-ones map-field row.
    pub fn fast_commit(&mut self, x: &[f64]) -> usize {
        self.art.weights.push(x.to_vec());
        self.art.instance_count.push(0);
        self.map.weights.push(vec![1.0; self.map.clusters]);
        self.art.len() - 1
    }

    /// Winner-take-all search with match tracking.
    ///
    /// Categories are visited in decreasing activation order (lowest id on
    /// ties). A category resonates when it passes the working ARTa vigilance
    /// and the map-field vigilance; a map-field mismatch raises the working
    /// vigilance to `M_J + epsilon` for the rest of this presentation. When no
    /// category resonates a new one is committed. Learning is applied to the
    /// returned category in both modules.
    pub fn search_and_resonate(&mut self, x: &[f64], y: &[f64]) -> Resonance {
        let t = self.art.activations(x);
        let mut order: Vec<usize> = (0..t.len()).collect();
        order.sort_by(|&a, &b| t[b].total_cmp(&t[a]).then(a.cmp(&b)));

        let mut rho = self.art.rho;
        let mut winner = None;
        for j in order {
            if rho > 1.0 {
                break;
            }
            let m = self.art.match_value(x, j);
            if m < rho {
                continue;
            }
            if self.map.match_value(j, y) >= self.map.rho {
                winner = Some(j);
                break;
            }
            rho = m + self.map.epsilon;
        }
        let (category, created) = match winner {
            Some(j) => (j, false),
            None => (self.fast_commit(x), true),
        };
        self.art.learn(category, x);
        self.map.learn(category, y);
        Resonance { category, created }
    }

    /// Deletes an empty category from both modules. Ids above `r` shift down.
    pub fn prune(&mut self, r: usize) -> Result<()> {
        if r >= self.art.len() {
            return Err(Error::Contract(format!("category {r} does not exist")));
        }
        if self.art.instance_count[r] != 0 {
            return Err(Error::Contract(format!(
                "category {r} still codes {} samples",
                self.art.instance_count[r]
            )));
        }
        self.art.weights.remove(r);
        self.art.instance_count.remove(r);
        self.map.weights.remove(r);
        Ok(())
    }
}
