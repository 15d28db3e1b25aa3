//! Synthetic fixtures, the vigilance grid sweep and the incremental versus
//! batch timing study.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{dense_relabel, Dataset, Labels, Matrix};
use crate::error::{Error, Result};
use crate::icvi::CviKind;
use crate::kmeans;
use crate::metrics::ari;
use crate::preprocess::{prepare, PreparedData};
use crate::trainer::{fit_with_init, CviMode, TrainerConfig};

/// Worker count for [`sweep`]; unset means one worker per core.
pub const WORKERS_ENV: &str = "ICVI_ARTMAP_WORKERS";

/// Directory searched by [`load_fixture`].
pub const FIXTURES_ENV: &str = "ICVI_ARTMAP_FIXTURES";

const CENTER_TRIES: usize = 1000;
const LAYOUT_RESTARTS: usize = 100;
const SAMPLE_TRIES: usize = 10_000;

/// Axis-aligned Gaussian clusters with well separated centres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub k: usize,
    pub d: usize,
    /// Inclusive range of samples per cluster.
    pub n_per_cluster: (usize, usize),
    /// When set, overrides `n_per_cluster` with an even split of this many
    /// samples (earlier clusters take the remainder).
    pub n_total: Option<usize>,
    /// Per-coordinate range the centres are drawn from.
    pub center_box: (f64, f64),
    /// Range of per-axis standard deviations.
    pub covariance_scale: (f64, f64),
    /// Minimum centre distance in units of the largest standard deviation.
    pub min_center_separation: f64,
    pub rng_seed: u64,
}

impl GaussianSpec {
    /// `n` samples split evenly over `k` clusters with standard deviations in
    /// `[0.5, 1]` and a centre box sized for the requested separation.
    pub fn new(k: usize, d: usize, n: usize, sep: f64, seed: u64) -> Self {
        let sigma_hi = 1.0;
        let half = 1.5 * sep * sigma_hi * (k.max(1) as f64).powf(1.0 / d.max(1) as f64);
        Self {
            k,
            d,
            n_per_cluster: (n / k.max(1), n.div_ceil(k.max(1))),
            n_total: Some(n),
            center_box: (-half, half),
            covariance_scale: (0.5, sigma_hi),
            min_center_separation: sep,
            rng_seed: seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (nlo, nhi) = self.n_per_cluster;
        let (blo, bhi) = self.center_box;
        let (slo, shi) = self.covariance_scale;
        let problems = [
            (self.k == 0, "k must be positive"),
            (self.d == 0, "d must be positive"),
            (self.n_total.is_none() && (nlo == 0 || nlo > nhi), "n_per_cluster must be a non-empty range of positive sizes"),
            (self.n_total.is_some_and(|n| n < self.k), "n must be at least k"),
            (!(blo < bhi), "center_box must satisfy lo < hi"),
            (!(slo > 0.0 && slo <= shi && shi.is_finite()), "covariance_scale must satisfy 0 < lo <= hi"),
            (!(self.min_center_separation > 0.0), "min_center_separation must be positive"),
        ];
        match problems.iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(Error::InvalidInput((*msg).into())),
            None => Ok(()),
        }
    }

    fn sizes<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        match self.n_total {
            Some(n) => (0..self.k).map(|c| n / self.k + usize::from(c < n % self.k)).collect(),
            None => (0..self.k)
                .map(|_| rng.random_range(self.n_per_cluster.0..=self.n_per_cluster.1))
                .collect(),
        }
    }
}

fn draw_centers<R: Rng>(spec: &GaussianSpec, min_dist: f64, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let (lo, hi) = spec.center_box;
    let min2 = min_dist * min_dist;
    'layout: for _ in 0..LAYOUT_RESTARTS {
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.k);
        while centers.len() < spec.k {
            let found = (0..CENTER_TRIES).find_map(|_| {
                let c: Vec<f64> = (0..spec.d).map(|_| rng.random_range(lo..=hi)).collect();
                centers
                    .iter()
                    .all(|o| crate::linalg::sq_dist(o, &c) >= min2)
                    .then_some(c)
            });
            match found {
                Some(c) => centers.push(c),
                None => continue 'layout,
            }
        }
        return Ok(centers);
    }
    Err(Error::InvalidInput(format!(
        "cannot place {} centres {min_dist} apart inside [{lo}, {hi}]^{}",
        spec.k, spec.d
    )))
}

/// Draws the fixture described by `spec`. Rows are shuffled; labels give the
/// generating cluster.
///
/// Samples are truncated so that none projects more than 0.4 of the way
/// towards another centre, which keeps every sample nearest to its own centre.
pub fn generate(spec: &GaussianSpec) -> Result<(Dataset, Labels)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let (slo, shi) = spec.covariance_scale;
    let sigmas: Vec<Vec<f64>> = (0..spec.k)
        .map(|_| (0..spec.d).map(|_| rng.random_range(slo..=shi)).collect())
        .collect();
    let sigma_max = sigmas.iter().flatten().fold(0.0f64, |m, &s| m.max(s));
    let centers = draw_centers(spec, spec.min_center_separation * sigma_max, &mut rng)?;
    let sizes = spec.sizes(&mut rng);

    // unit directions and truncation limits towards every other centre
    let towards: Vec<Vec<(Vec<f64>, f64)>> = (0..spec.k)
        .map(|a| {
            (0..spec.k)
                .filter(|&b| b != a)
                .map(|b| {
                    let diff: Vec<f64> = centers[b].iter().zip(&centers[a]).map(|(x, y)| x - y).collect();
                    let dist = crate::linalg::dot(&diff, &diff).sqrt();
                    (diff.iter().map(|v| v / dist).collect(), 0.4 * dist)
                })
                .collect()
        })
        .collect();

    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rows: Vec<(Vec<f64>, usize)> = Vec::with_capacity(sizes.iter().sum());
    for (c, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            let offset = (0..SAMPLE_TRIES)
                .find_map(|_| {
                    let z: Vec<f64> = sigmas[c].iter().map(|s| s * std_normal.sample(&mut rng)).collect();
                    towards[c].iter().all(|(u, limit)| crate::linalg::dot(u, &z) < *limit).then_some(z)
                })
                .ok_or_else(|| Error::InvalidInput("separation too small to draw truncated samples".into()))?;
            rows.push((centers[c].iter().zip(&offset).map(|(m, z)| m + z).collect(), c));
        }
    }
    rows.shuffle(&mut rng);
    let labels = Labels(rows.iter().map(|r| r.1).collect());
    let x: Vec<&[f64]> = rows.iter().map(|r| r.0.as_slice()).collect();
    Ok((Dataset::new(Matrix::from_rows(&x)?)?, labels))
}

/// Closed interval `[lo, hi]` sampled every `step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }

    pub fn point(v: f64) -> Self {
        Self::new(v, v, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.lo <= self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid [{}, {}] @ {} needs lo <= hi and step > 0",
                self.lo, self.hi, self.step
            )));
        }
        Ok(())
    }

    /// Grid points, rounded to 1e-9 so that `0.1 * 3` prints as 0.3.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.lo + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectBy {
    Ari,
    Icvi,
}

impl std::str::FromStr for SelectBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ari" => Ok(SelectBy::Ari),
            "icvi" => Ok(SelectBy::Icvi),
            _ => Err(Error::InvalidInput(format!("unknown selection '{s}' (expected ari or icvi)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub rho_a: Grid,
    pub rho_ab: Grid,
    pub select_by: SelectBy,
}

impl SweepSpec {
    /// Vigilance grids used for synthetic data: a finer ARTa range in two
    /// dimensions than in ten or more.
    pub fn for_dimension(d: usize, select_by: SelectBy) -> Self {
        let rho_a_hi = if d <= 2 { 0.95 } else { 0.7 };
        Self {
            rho_a: Grid::new(0.0, rho_a_hi, 0.05),
            rho_ab: Grid::new(0.1, 1.0, 0.1),
            select_by,
        }
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let ab = self.rho_ab.values();
        self.rho_a
            .values()
            .into_iter()
            .flat_map(|a| ab.iter().map(move |&b| (a, b)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho_a: f64,
    pub rho_ab: f64,
    pub ari: Option<f64>,
    pub icvi: f64,
    pub epochs: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    /// One row per grid point, `rho_a` major.
    pub rows: Vec<SweepRow>,
    pub selected: usize,
    pub labels: Labels,
}

impl SweepOutcome {
    pub fn best(&self) -> &SweepRow {
        &self.rows[self.selected]
    }
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("{WORKERS_ENV}={v} is not a worker count")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))
}

/// Fits `base` at every grid point of `spec` (in parallel) and selects the
/// run with the highest ARI or the best final index value. All runs share
/// one k-means initialization. Ties keep the earlier grid point.
pub fn sweep(prep: &PreparedData, truth: Option<&Labels>, spec: &SweepSpec, base: &TrainerConfig) -> Result<SweepOutcome> {
    spec.rho_a.validate()?;
    spec.rho_ab.validate()?;
    if spec.select_by == SelectBy::Ari && truth.is_none() {
        return Err(Error::InvalidInput("selecting by ARI needs ground-truth labels".into()));
    }
    if let Some(t) = truth.filter(|t| t.len() != prep.n()) {
        return Err(Error::InvalidInput(format!("{} truth labels for {} samples", t.len(), prep.n())));
    }
    base.validate()?;
    let init = kmeans::best_of(&prep.x_b, base.k, base.kmeans_trials, base.seed)?;
    let points = spec.points();
    let runs: Vec<(SweepRow, Labels)> = worker_pool()?.install(|| {
        points
            .par_iter()
            .map(|&(rho_a, rho_ab)| {
                let cfg = TrainerConfig {
                    rho_a,
                    rho_ab,
                    ..base.clone()
                };
                let r = fit_with_init(prep, &cfg, &init)?;
                let ari = truth.map(|t| ari(r.labels.as_slice(), t.as_slice())).transpose()?;
                let row = SweepRow {
                    rho_a,
                    rho_ab,
                    ari,
                    icvi: r.value,
                    epochs: r.epochs_run,
                    seconds: r.timings.fit_seconds(),
                };
                Ok((row, r.labels))
            })
            .collect::<Result<_>>()
    })?;

    let mut selected = 0;
    for (i, (row, _)) in runs.iter().enumerate().skip(1) {
        let incumbent = &runs[selected].0;
        let better = match spec.select_by {
            SelectBy::Ari => row.ari > incumbent.ari,
            SelectBy::Icvi => base.kind.is_better(row.icvi, incumbent.icvi),
        };
        if better {
            selected = i;
        }
    }
    let labels = runs[selected].1.clone();
    Ok(SweepOutcome {
        rows: runs.into_iter().map(|r| r.0).collect(),
        selected,
        labels,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedSpec {
    pub d: usize,
    pub n: usize,
    pub ks: Vec<usize>,
    pub kinds: Vec<CviKind>,
    pub sep: f64,
    pub seed: u64,
}

impl SpeedSpec {
    /// Every `k` in `2..=k_max` and every index kind.
    pub fn new(d: usize, n: usize, k_max: usize, seed: u64) -> Self {
        Self {
            d,
            n,
            ks: (2..=k_max).collect(),
            kinds: CviKind::ALL.to_vec(),
            sep: 6.0,
            seed,
        }
    }

    /// Trainer settings for timing: one epoch with `rho_a = 0.7`, `rho_ab = 1`.
    pub fn config(&self, k: usize, kind: CviKind, mode: CviMode) -> TrainerConfig {
        TrainerConfig {
            rho_a: 0.7,
            rho_ab: 1.0,
            max_epochs: 1,
            seed: self.seed,
            mode,
            ..TrainerConfig::new(k, kind)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedRow {
    pub icvi: CviKind,
    pub k: usize,
    pub mode: CviMode,
    pub seconds: f64,
}

/// Times incremental against batch index computation for every `(k, kind)`
/// of `spec`, sequentially. Each `k` gets its own fixture with `k`
/// clusters; the time covers initialization through the final epoch.
///
/// Fails if the two modes disagree on the final labels.
pub fn speed_study(spec: &SpeedSpec) -> Result<Vec<SpeedRow>> {
    speed_study_with(spec, |_| {})
}

/// [`speed_study`] with a callback for every finished row.
pub fn speed_study_with(spec: &SpeedSpec, mut progress: impl FnMut(&SpeedRow)) -> Result<Vec<SpeedRow>> {
    let mut rows = Vec::new();
    for &k in &spec.ks {
        let (ds, _) = generate(&GaussianSpec::new(k, spec.d, spec.n, spec.sep, spec.seed.wrapping_add(k as u64)))?;
        let prep = prepare(&ds);
        let init = kmeans::best_of(&prep.x_b, k, kmeans::TRIALS, spec.seed)?;
        for &kind in &spec.kinds {
            let mut labels = Vec::new();
            for mode in [CviMode::Incremental, CviMode::Batch] {
                let r = fit_with_init(&prep, &spec.config(k, kind, mode), &init)?;
                let row = SpeedRow {
                    icvi: kind,
                    k,
                    mode,
                    seconds: r.timings.fit_seconds(),
                };
                progress(&row);
                rows.push(row);
                labels.push(r.labels);
            }
            if labels[0] != labels[1] {
                return Err(Error::Invariant(format!(
                    "incremental and batch runs of {kind} at k = {k} ended with different labels"
                )));
            }
        }
    }
    Ok(rows)
}

/// `batch / incremental` seconds for `(kind, k)`.
pub fn speedup(rows: &[SpeedRow], kind: CviKind, k: usize) -> Option<f64> {
    let secs = |mode| {
        rows.iter()
            .find(|r| r.icvi == kind && r.k == k && r.mode == mode)
            .map(|r| r.seconds)
    };
    Some(secs(CviMode::Batch)? / secs(CviMode::Incremental)?)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// `rho_a,rho_ab,ari,icvi,epochs,seconds`; `ari` is empty without ground truth.
pub fn write_sweep_csv(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record(["rho_a", "rho_ab", "ari", "icvi", "epochs", "seconds"])
        .map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.rho_a.to_string(),
            r.rho_ab.to_string(),
            r.ari.map_or_else(String::new, |a| a.to_string()),
            r.icvi.to_string(),
            r.epochs.to_string(),
            r.seconds.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `icvi,k,mode,seconds`.
pub fn write_speed_csv(path: impl AsRef<Path>, rows: &[SpeedRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record(["icvi", "k", "mode", "seconds"]).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([r.icvi.to_string(), r.k.to_string(), r.mode.to_string(), r.seconds.to_string()])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parses whitespace-separated rows whose last value is the class label.
/// Blank lines and lines starting with `#` are skipped; labels are densified.
pub fn parse_labeled(text: &str) -> Result<(Dataset, Labels)> {
    let mut rows = Vec::new();
    let mut raw = Vec::new();
    for (row, line) in text.lines().map(str::trim).enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut values = Vec::new();
        for (column, cell) in line.split_whitespace().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column,
                message: format!("cannot parse {cell:?} as a number"),
            })?;
            values.push(v);
        }
        let label = values.pop().filter(|_| !values.is_empty()).ok_or_else(|| Error::Parse {
            row,
            column: 0,
            message: "a row needs at least one feature and a label".into(),
        })?;
        if label.fract() != 0.0 || label < 0.0 {
            return Err(Error::Parse {
                row,
                column: values.len(),
                message: format!("label {label} is not a non-negative integer"),
            });
        }
        raw.push(label as usize);
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("no data rows".into()));
    }
    Ok((Dataset::from_rows(&rows)?, Labels(dense_relabel(&raw))))
}

pub fn load_labeled(path: impl AsRef<Path>) -> Result<(Dataset, Labels)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labeled(&text)
}

/// Looks for `name`, `name.dat` or `name.txt` in the directory named by
/// [`FIXTURES_ENV`]. Returns `Ok(None)` when the variable is unset or no file
/// exists.
pub fn load_fixture(name: &str) -> Result<Option<(Dataset, Labels)>> {
    let Some(dir) = std::env::var_os(FIXTURES_ENV) else {
        return Ok(None);
    };
    let dir = PathBuf::from(dir);
    let found = [name.to_string(), format!("{name}.dat"), format!("{name}.txt")]
        .into_iter()
        .map(|f| dir.join(f))
        .find(|p| p.is_file());
    found.map(load_labeled).transpose()
}
