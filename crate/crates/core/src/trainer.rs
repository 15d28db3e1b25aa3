//! The training loop: k-means seeding, index-driven sample presentation,
//! end-of-epoch merging and splitting, and stopping rules.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::artmap::{argmax, ArtA, Artmap, MapField};
use crate::data::{Labels, Matrix};
use crate::error::{Error, Result};
use crate::icvi::{BatchEvaluator, CviKind, IcviState};
use crate::kmeans::{self, KMeans};
use crate::preprocess::PreparedData;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CviMode {
    /// Cached statistics with incremental updates.
    Incremental,
    /// Every index value recomputed from the data.
    Batch,
}

impl CviMode {
    pub fn name(self) -> &'static str {
        match self {
            CviMode::Incremental => "incremental",
            CviMode::Batch => "batch",
        }
    }
}

impl std::fmt::Display for CviMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CviMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "incr" | "incremental" => Ok(CviMode::Incremental),
            "batch" => Ok(CviMode::Batch),
            _ => Err(Error::InvalidInput(format!("unknown mode '{s}' (expected incr or batch)"))),
        }
    }
}

/// Internal consistency checks run during training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckLevel {
    Off,
    Epoch,
    Every,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub k: usize,
    pub kind: CviKind,
    pub rho_a: f64,
    pub alpha_a: f64,
    pub beta_a: f64,
    pub rho_ab: f64,
    pub beta_ab: f64,
    pub epsilon: f64,
    pub max_epochs: usize,
    pub tol: f64,
    pub seed: u64,
    pub mode: CviMode,
    pub check: CheckLevel,
    pub kmeans_trials: usize,
}

impl TrainerConfig {
    pub fn new(k: usize, kind: CviKind) -> Self {
        Self {
            k,
            kind,
            rho_a: 0.0,
            alpha_a: 0.001,
            beta_a: 1.0,
            rho_ab: 0.5,
            beta_ab: 0.001,
            epsilon: 0.01,
            max_epochs: 20,
            tol: 1e-6,
            seed: 0,
            mode: CviMode::Incremental,
            check: CheckLevel::Off,
            kmeans_trials: kmeans::TRIALS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let rate = |v: f64| v > 0.0 && v <= 1.0;
        let problems = [
            (self.k < 2, "k must be at least 2"),
            (!unit(self.rho_a), "rho_a must lie in [0, 1]"),
            (!unit(self.rho_ab), "rho_ab must lie in [0, 1]"),
            (!rate(self.beta_a), "beta_a must lie in (0, 1]"),
            (!rate(self.beta_ab), "beta_ab must lie in (0, 1]"),
            (!(self.alpha_a > 0.0), "alpha_a must be positive"),
            (!(self.epsilon >= 0.0), "epsilon must be non-negative"),
            (self.max_epochs == 0, "at least one epoch is required"),
            (!(self.tol >= 0.0), "tol must be non-negative"),
        ];
        match problems.iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(Error::InvalidInput((*msg).into())),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    WeightsStable,
    IcviConverged,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub kmeans_seconds: f64,
    /// Category seeding, initial partition and index initialization.
    pub setup_seconds: f64,
    pub train_seconds: f64,
    pub total_seconds: f64,
}

impl Timings {
    /// Everything after k-means.
    pub fn fit_seconds(&self) -> f64 {
        self.setup_seconds + self.train_seconds
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub epoch: usize,
    pub before: f64,
    pub after: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub labels: Labels,
    /// `(iteration, index value)` after every presentation, merge and split.
    pub trace: Vec<(usize, f64)>,
    pub epochs_run: usize,
    pub stop_reason: StopReason,
    pub timings: Timings,
    pub k_final: usize,
    pub value: f64,
    pub categories: usize,
    pub merges: Vec<MergeEvent>,
    pub splits: usize,
}

enum Evaluator {
    Incremental(IcviState),
    Batch {
        eval: BatchEvaluator,
        value: f64,
        sizes: Vec<usize>,
    },
}

fn sizes_of(labels: &[usize], k: usize) -> Vec<usize> {
    let mut s = vec![0; k];
    labels.iter().for_each(|&l| s[l] += 1);
    s
}

/// Old cluster id to new id after merging `i` and `j` into a cluster appended
/// last.
fn merge_map(k: usize, i: usize, j: usize) -> Vec<usize> {
    let mut map = vec![0; k];
    let mut next = 0;
    for (m, slot) in map.iter_mut().enumerate() {
        if m == i || m == j {
            *slot = k - 2;
        } else {
            *slot = next;
            next += 1;
        }
    }
    map
}

impl Evaluator {
    fn new(mode: CviMode, kind: CviKind, x_b: &Matrix, labels: &[usize]) -> Result<Self> {
        Ok(match mode {
            CviMode::Incremental => Evaluator::Incremental(IcviState::init_batch(kind, x_b, labels)?),
            CviMode::Batch => {
                let eval = BatchEvaluator::new(kind, x_b);
                let value = eval.value(x_b, labels)?;
                let k = labels.iter().max().map_or(0, |m| m + 1);
                Evaluator::Batch {
                    eval,
                    value,
                    sizes: sizes_of(labels, k),
                }
            }
        })
    }

    fn kind(&self) -> CviKind {
        match self {
            Evaluator::Incremental(s) => s.kind(),
            Evaluator::Batch { eval, .. } => eval.kind(),
        }
    }

    fn value(&self) -> f64 {
        match self {
            Evaluator::Incremental(s) => s.value(),
            Evaluator::Batch { value, .. } => *value,
        }
    }

    fn size(&self, c: usize) -> usize {
        match self {
            Evaluator::Incremental(s) => s.size(c),
            Evaluator::Batch { sizes, .. } => sizes[c],
        }
    }

    fn swap_scores(&self, x_b: &Matrix, row: usize, labels: &mut [usize]) -> Vec<f64> {
        let from = labels[row];
        match self {
            Evaluator::Incremental(s) => s.swap_scores(x_b.row(row), from),
            Evaluator::Batch { eval, value, sizes } => {
                let mut out = vec![eval.kind().worst(); sizes.len()];
                out[from] = *value;
                if sizes[from] > 1 {
                    for (to, slot) in out.iter_mut().enumerate().filter(|(to, _)| *to != from) {
                        labels[row] = to;
                        *slot = eval.value(x_b, labels).unwrap_or(f64::NAN);
                    }
                    labels[row] = from;
                }
                out
            }
        }
    }

    fn score_merge(&self, x_b: &Matrix, i: usize, j: usize, labels: &[usize]) -> Result<f64> {
        match self {
            Evaluator::Incremental(s) => s.score_merge(i, j),
            Evaluator::Batch { eval, sizes, .. } => {
                let map = merge_map(sizes.len(), i, j);
                let merged: Vec<usize> = labels.iter().map(|&l| map[l]).collect();
                eval.value(x_b, &merged)
            }
        }
    }

    fn score_split(&self, x_b: &Matrix, c: usize, rows: &[usize], labels: &[usize]) -> Result<f64> {
        match self {
            Evaluator::Incremental(s) => s.score_split(c, rows, x_b),
            Evaluator::Batch { eval, sizes, .. } => {
                let mut split = labels.to_vec();
                rows.iter().for_each(|&r| split[r] = sizes.len());
                eval.value(x_b, &split)
            }
        }
    }

    /// Re-derives the batch value after the caller relabelled.
    fn resync(&mut self, x_b: &Matrix, labels: &[usize], k: usize) -> Result<()> {
        if let Evaluator::Batch { eval, value, sizes } = self {
            *value = eval.value(x_b, labels)?;
            *sizes = sizes_of(labels, k);
        }
        Ok(())
    }
}

/// Everything a training run mutates.
pub struct Trainer<'a> {
    prep: &'a PreparedData,
    cfg: TrainerConfig,
    pub net: Artmap,
    cluster_of: Vec<usize>,
    category_of: Vec<usize>,
    k_cur: usize,
    eval: Evaluator,
    trace: Vec<(usize, f64)>,
    iteration: usize,
    epoch: usize,
    merges: Vec<MergeEvent>,
    splits: usize,
}

impl<'a> Trainer<'a> {
    /// Seeds ARTa with the k-means centroids, assigns every sample to its
    /// highest-activation category and initializes the index in batch.
    pub fn initialize(prep: &'a PreparedData, cfg: &TrainerConfig, init: &KMeans) -> Result<Self> {
        cfg.validate()?;
        let (n, k) = (prep.n(), cfg.k);
        if k > n {
            return Err(Error::InvalidInput(format!("k = {k} exceeds the sample count {n}")));
        }
        if init.centroids.rows() != k || init.centroids.cols() != prep.d() {
            return Err(Error::InvalidInput(format!(
                "initial centroids are {}x{}, expected {k}x{}",
                init.centroids.rows(),
                init.centroids.cols(),
                prep.d()
            )));
        }
        let mut art = ArtA::new(cfg.rho_a, cfg.alpha_a, cfg.beta_a);
        art.weights = init
            .centroids
            .iter_rows()
            .map(|mu| prep.centroid_to_category(mu))
            .collect();
        let mut category_of: Vec<usize> = prep.x_a.iter_rows().map(|x| argmax(&art.activations(x))).collect();
        repair_empty(&mut category_of, k, &prep.x_b);
        art.instance_count = sizes_of(&category_of, k);

        let mut map = MapField::new(cfg.rho_ab, cfg.beta_ab, cfg.epsilon, k);
        map.weights = vec![vec![1.0; k]; k];
        let cluster_of = category_of.clone();
        let eval = Evaluator::new(cfg.mode, cfg.kind, &prep.x_b, &cluster_of)?;
        Ok(Self {
            prep,
            cfg: cfg.clone(),
            net: Artmap::new(art, map),
            cluster_of,
            category_of,
            k_cur: k,
            eval,
            trace: Vec::new(),
            iteration: 0,
            epoch: 0,
            merges: Vec::new(),
            splits: 0,
        })
    }

    pub fn value(&self) -> f64 {
        self.eval.value()
    }

    pub fn clusters(&self) -> usize {
        self.k_cur
    }

    pub fn cluster_of(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn category_of(&self) -> &[usize] {
        &self.category_of
    }

    pub fn trace(&self) -> &[(usize, f64)] {
        &self.trace
    }

    fn kind(&self) -> CviKind {
        self.eval.kind()
    }

    fn record(&mut self) {
        self.trace.push((self.iteration, self.eval.value()));
    }

    /// One presentation of sample `t`.
    pub fn present_sample(&mut self, t: usize) -> Result<()> {
        self.iteration += 1;
        let kind = self.kind();
        let x_b = &self.prep.x_b;
        let c = self.cluster_of[t];
        let scores = self.eval.swap_scores(x_b, t, &mut self.cluster_of);
        let mut best = c;
        for (m, &s) in scores.iter().enumerate() {
            if kind.is_better(s, scores[best]) {
                best = m;
            }
        }
        let y = if scores.iter().all(|&s| kind.ties(s, scores[c])) {
            vec![1.0; self.k_cur]
        } else {
            let mut y = vec![0.0; self.k_cur];
            y[best] = 1.0;
            y
        };

        let j = self.net.search_and_resonate(self.prep.x_a.row(t), &y).category;
        let l = self.net.map.predict(j);
        if l != c {
            self.move_sample(t, c, l)?;
        }

        let old = self.category_of[t];
        if j != old {
            self.category_of[t] = j;
            let counts = &mut self.net.art.instance_count;
            counts[old] -= 1;
            counts[j] += 1;
            if counts[old] == 0 {
                self.net.prune(old)?;
                self.category_of.iter_mut().filter(|q| **q > old).for_each(|q| *q -= 1);
            } else {
                let x_a = &self.prep.x_a;
                let members = (0..x_a.rows()).filter(|&r| self.category_of[r] == old).map(|r| x_a.row(r));
                self.net.art.shrink(old, members)?;
            }
        }
        self.record();
        if self.cfg.check == CheckLevel::Every {
            self.check()?;
        }
        Ok(())
    }

    fn move_sample(&mut self, t: usize, from: usize, to: usize) -> Result<()> {
        let x_b = &self.prep.x_b;
        if self.eval.size(from) > 1 {
            self.cluster_of[t] = to;
            match &mut self.eval {
                Evaluator::Incremental(s) => s.move_sample(x_b.row(t), from, to)?,
                e => e.resync(x_b, &self.cluster_of, self.k_cur)?,
            }
            return Ok(());
        }
        if self.k_cur <= 2 {
            return Ok(());
        }
        // the sample was the last member of `from`
        let shift = |l: usize| if l > from { l - 1 } else { l };
        self.cluster_of[t] = to;
        self.cluster_of.iter_mut().for_each(|l| *l = shift(*l));
        self.net.map.delete_column(from);
        self.k_cur -= 1;
        match &mut self.eval {
            Evaluator::Incremental(s) => {
                s.move_last_member(x_b.row(t), from, to)?;
            }
            e => e.resync(x_b, &self.cluster_of, self.k_cur)?,
        }
        Ok(())
    }

    /// Merges the best pair while that strictly improves the index.
    pub fn merge_phase(&mut self) -> Result<()> {
        let kind = self.kind();
        let x_b = &self.prep.x_b;
        while self.k_cur > 2 {
            let current = self.eval.value();
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.k_cur {
                for j in i + 1..self.k_cur {
                    let s = self.eval.score_merge(x_b, i, j, &self.cluster_of)?;
                    if best.is_none_or(|(b, _, _)| kind.is_better(s, b)) {
                        best = Some((s, i, j));
                    }
                }
            }
            let Some((score, i, j)) = best.filter(|(s, _, _)| kind.is_better(*s, current)) else {
                break;
            };
            let map = merge_map(self.k_cur, i, j);
            self.cluster_of.iter_mut().for_each(|l| *l = map[*l]);
            self.net.map.merge_columns(i, j);
            self.k_cur -= 1;
            match &mut self.eval {
                Evaluator::Incremental(s) => {
                    s.update_merge(i, j)?;
                }
                e => e.resync(x_b, &self.cluster_of, self.k_cur)?,
            }
            let after = self.eval.value();
            if self.cfg.check != CheckLevel::Off && !kind.is_better(after, current) {
                return Err(Error::Invariant(format!(
                    "merge of clusters {i} and {j} scored {score} but moved the index from {current} to {after}"
                )));
            }
            self.merges.push(MergeEvent {
                epoch: self.epoch,
                before: current,
                after,
            });
            self.record();
        }
        Ok(())
    }

    /// Rows of each category that sit in the cluster the category predicts,
    /// restricted to clusters with at least two such categories.
    fn split_candidates(&self) -> Vec<(usize, usize, Vec<usize>)> {
        let cats = self.net.categories();
        let pred: Vec<usize> = (0..cats).map(|q| self.net.map.predict(q)).collect();
        let mut rows = vec![Vec::new(); cats];
        for (r, (&q, &c)) in self.category_of.iter().zip(&self.cluster_of).enumerate() {
            if pred[q] == c {
                rows[q].push(r);
            }
        }
        let mut per_cluster = vec![0usize; self.k_cur];
        for q in 0..cats {
            if !rows[q].is_empty() {
                per_cluster[pred[q]] += 1;
            }
        }
        rows.into_iter()
            .enumerate()
            .filter(|(q, r)| !r.is_empty() && per_cluster[pred[*q]] >= 2)
            .map(|(q, r)| (q, pred[q], r))
            .collect()
    }

    fn tie_ratio(&self, q: usize) -> f64 {
        let row = &self.net.map.weights[q];
        let h = argmax(row);
        let max = row[h];
        let second = row
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != h)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        if max > 0.0 && second.is_finite() {
            (max - second) / max
        } else {
            0.0
        }
    }

    /// Splits categories off into their own clusters until `k` clusters
    /// exist or no cluster has more than one populated category.
    pub fn split_phase(&mut self) -> Result<()> {
        let kind = self.kind();
        let x_b = &self.prep.x_b;
        while self.k_cur < self.cfg.k {
            let mut best: Option<(f64, f64, usize, usize, Vec<usize>)> = None;
            for (q, c, rows) in self.split_candidates() {
                let s = self.eval.score_split(x_b, c, &rows, &self.cluster_of)?;
                let ratio = self.tie_ratio(q);
                let take = match &best {
                    None => true,
                    Some((b, br, ..)) => kind.is_better(s, *b) || (kind.ties(s, *b) && ratio < *br),
                };
                if take {
                    best = Some((s, ratio, q, c, rows));
                }
            }
            let Some((_, _, q, c, rows)) = best else {
                break;
            };
            let new_id = self.net.map.split_column(q);
            if new_id != self.k_cur {
                return Err(Error::Invariant(format!(
                    "split produced cluster {new_id}, expected {}",
                    self.k_cur
                )));
            }
            rows.iter().for_each(|&r| self.cluster_of[r] = new_id);
            self.k_cur += 1;
            match &mut self.eval {
                Evaluator::Incremental(s) => {
                    s.update_split(c, &rows, x_b)?;
                }
                e => e.resync(x_b, &self.cluster_of, self.k_cur)?,
            }
            self.splits += 1;
            self.record();
        }
        Ok(())
    }

    /// Verifies partition bookkeeping and, against a batch recomputation,
    /// the current index value.
    pub fn check(&self) -> Result<()> {
        let n = self.prep.n();
        let sizes = sizes_of(&self.cluster_of, self.k_cur.max(1));
        if self.cluster_of.iter().any(|&l| l >= self.k_cur) || sizes.iter().any(|&s| s == 0) {
            return Err(Error::Invariant(format!("cluster ids are not dense in 0..{}", self.k_cur)));
        }
        let total: usize = (0..self.k_cur).map(|c| self.eval.size(c)).sum();
        if total != n || (0..self.k_cur).any(|c| self.eval.size(c) != sizes[c]) {
            return Err(Error::Invariant(format!("cluster sizes sum to {total}, expected {n}")));
        }
        let map = &self.net.map;
        if map.clusters != self.k_cur || map.weights.iter().any(|r| r.len() != self.k_cur) {
            return Err(Error::Invariant(format!(
                "map field has {} columns for {} clusters",
                map.clusters, self.k_cur
            )));
        }
        let cats = self.net.categories();
        if map.weights.len() != cats || self.net.art.instance_count != sizes_of(&self.category_of, cats) {
            return Err(Error::Invariant("category bookkeeping is out of sync".into()));
        }
        let batch = crate::icvi::batch_value(self.kind(), &self.prep.x_b, &self.cluster_of)?;
        let v = self.eval.value();
        let agree = v == batch || (v - batch).abs() <= 1e-6 * v.abs().max(batch.abs()).max(1e-12);
        if !agree {
            return Err(Error::Invariant(format!("index value {v} differs from batch value {batch}")));
        }
        Ok(())
    }

    fn finish(self, epochs_run: usize, stop_reason: StopReason, timings: Timings) -> RunResult {
        RunResult {
            labels: Labels(self.cluster_of),
            value: self.eval.value(),
            trace: self.trace,
            epochs_run,
            stop_reason,
            timings,
            k_final: self.k_cur,
            categories: self.net.categories(),
            merges: self.merges,
            splits: self.splits,
        }
    }
}

/// Gives every empty category the sample of the largest cluster that lies
/// farthest from that cluster's mean.
fn repair_empty(category_of: &mut [usize], k: usize, x_b: &Matrix) {
    loop {
        let sizes = sizes_of(category_of, k);
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let largest = (0..k).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap();
        let members: Vec<usize> = (0..category_of.len()).filter(|&r| category_of[r] == largest).collect();
        let mu = crate::icvi::ClusterStats::from_rows(members.iter().map(|&r| x_b.row(r)), x_b.cols(), false).mu;
        let far = members
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let (da, db) = (crate::linalg::sq_dist(x_b.row(a), &mu), crate::linalg::sq_dist(x_b.row(b), &mu));
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        category_of[far] = empty;
    }
}

/// Runs k-means (best of `cfg.kmeans_trials`) and then [`fit_with_init`].
pub fn fit(prep: &PreparedData, cfg: &TrainerConfig) -> Result<RunResult> {
    cfg.validate()?;
    let start = Instant::now();
    let init = kmeans::best_of(&prep.x_b, cfg.k, cfg.kmeans_trials, cfg.seed)?;
    let kmeans_seconds = start.elapsed().as_secs_f64();
    let mut result = fit_with_init(prep, cfg, &init)?;
    result.timings.kmeans_seconds = kmeans_seconds;
    result.timings.total_seconds += kmeans_seconds;
    Ok(result)
}

/// Trains from a precomputed k-means solution.
pub fn fit_with_init(prep: &PreparedData, cfg: &TrainerConfig, init: &KMeans) -> Result<RunResult> {
    let start = Instant::now();
    let mut tr = Trainer::initialize(prep, cfg, init)?;
    if cfg.check != CheckLevel::Off {
        tr.check()?;
    }
    let setup_seconds = start.elapsed().as_secs_f64();

    let mut order: Vec<usize> = (0..prep.n()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    order.shuffle(&mut rng);

    let train_start = Instant::now();
    let mut previous_weights = tr.net.art.weights.clone();
    let mut previous_value = tr.value();
    let mut stop = StopReason::MaxEpochs;
    let mut epochs = 0;
    for epoch in 1..=cfg.max_epochs {
        tr.epoch = epoch;
        for &t in &order {
            tr.present_sample(t)?;
        }
        tr.merge_phase()?;
        tr.split_phase()?;
        if cfg.check != CheckLevel::Off {
            tr.check()?;
        }
        epochs = epoch;
        let value = tr.value();
        if tr.net.art.weights == previous_weights {
            stop = StopReason::WeightsStable;
            break;
        }
        if value == previous_value || (value - previous_value).abs() <= cfg.tol {
            stop = StopReason::IcviConverged;
            break;
        }
        previous_weights.clone_from(&tr.net.art.weights);
        previous_value = value;
    }
    let train_seconds = train_start.elapsed().as_secs_f64();
    let timings = Timings {
        kmeans_seconds: 0.0,
        setup_seconds,
        train_seconds,
        total_seconds: setup_seconds + train_seconds,
    };
    Ok(tr.finish(epochs, stop, timings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::preprocess::prepare;

    fn blobs() -> PreparedData {
        let mut rows = Vec::new();
        for (cx, cy) in [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)] {
            for i in 0..8 {
                let a = i as f64 * 0.7;
                rows.push(vec![cx + 0.5 * a.cos(), cy + 0.5 * a.sin()]);
            }
        }
        prepare(&Dataset::from_rows(&rows).unwrap())
    }

    #[test]
    fn config_validation() {
        let mut c = TrainerConfig::new(3, CviKind::Ni);
        assert!(c.validate().is_ok());
        c.rho_a = 1.5;
        assert!(c.validate().is_err());
        let mut c = TrainerConfig::new(1, CviKind::Ni);
        assert!(c.validate().is_err());
        c.k = 2;
        c.beta_ab = 0.0;
        assert!(c.validate().is_err());
        c.beta_ab = 0.5;
        c.tol = f64::NAN;
        assert!(c.validate().is_err());
    }

    #[test]
    fn merge_map_appends_merged_cluster() {
        assert_eq!(merge_map(4, 1, 3), vec![0, 2, 1, 2]);
        assert_eq!(merge_map(3, 0, 1), vec![1, 1, 0]);
    }

    #[test]
    fn two_points_two_categories() {
        let prep = prepare(&Dataset::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap());
        let cfg = TrainerConfig::new(2, CviKind::Wb);
        let init = kmeans::best_of(&prep.x_b, 2, 1, 0).unwrap();
        let tr = Trainer::initialize(&prep, &cfg, &init).unwrap();
        assert_ne!(tr.category_of()[0], tr.category_of()[1]);
        assert_eq!(tr.net.map.weights, vec![vec![1.0; 2]; 2]);
    }

    #[test]
    fn initial_partition_follows_centroids() {
        let prep = blobs();
        let cfg = TrainerConfig::new(3, CviKind::Ch);
        let init = kmeans::best_of(&prep.x_b, 3, 5, 1).unwrap();
        let tr = Trainer::initialize(&prep, &cfg, &init).unwrap();
        assert_eq!(crate::metrics::ari(tr.cluster_of(), &init.labels).unwrap(), 1.0);
        tr.check().unwrap();
    }

    #[test]
    fn empty_category_repair() {
        let x = Matrix::from_rows(&[[0.0], [0.1], [0.2], [5.0]]).unwrap();
        let mut cats = vec![0, 0, 0, 0];
        repair_empty(&mut cats, 3, &x);
        assert_eq!(sizes_of(&cats, 3), vec![2, 1, 1]);
        assert_eq!(cats[3], 1);
    }

    #[test]
    fn runs_with_every_check() {
        let prep = blobs();
        for kind in CviKind::ALL {
            let mut cfg = TrainerConfig::new(3, kind);
            cfg.check = CheckLevel::Every;
            cfg.max_epochs = 3;
            cfg.rho_a = 0.3;
            let r = fit(&prep, &cfg).unwrap();
            assert_eq!(r.labels.len(), 24);
            assert_eq!(r.trace.len(), 24 * r.epochs_run + r.merges.len() + r.splits);
        }
    }

    #[test]
    fn single_epoch_with_infinite_tolerance() {
        let prep = blobs();
        let mut cfg = TrainerConfig::new(3, CviKind::Ni);
        cfg.max_epochs = 1;
        cfg.tol = f64::INFINITY;
        let r = fit(&prep, &cfg).unwrap();
        assert_eq!(r.epochs_run, 1);
        assert_ne!(r.stop_reason, StopReason::WeightsStable);
    }
}
