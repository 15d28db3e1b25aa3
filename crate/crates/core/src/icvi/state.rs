use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::linalg::{dot, logdet_shifted, sq_dist, SpdFactor};

use super::{index_value, ratio, ClusterStats, ClusterView, CviKind, Globals};

const NONE: usize = usize::MAX;

/// Incrementally maintained index state for one partition.
#[derive(Clone)]
pub struct IcviState {
    kind: CviKind,
    g: Globals,
    clusters: Vec<ClusterStats>,
    sep: Vec<f64>,
    logdet: Vec<f64>,
    /// Factor of `((n-1)/n) Sigma + delta I`, the base of a rank-one add.
    add_factor: Vec<Option<SpdFactor>>,
    dist2: Vec<Vec<f64>>,
    gram: Vec<Vec<f64>>,
    /// Per row, the three nearest / farthest other centroids.
    near: Vec<[usize; 3]>,
    far: Vec<[usize; 3]>,
    /// Per row, the three largest Davies-Bouldin ratios.
    db_top: Vec<[usize; 3]>,
    value: f64,
}

impl std::fmt::Debug for IcviState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IcviState")
            .field("kind", &self.kind)
            .field("k", &self.k())
            .field("value", &self.value)
            .finish()
    }
}

impl ClusterView for IcviState {
    fn k(&self) -> usize {
        self.clusters.len()
    }
    fn n(&self, i: usize) -> f64 {
        self.clusters[i].n as f64
    }
    fn cp(&self, i: usize) -> f64 {
        self.clusters[i].cp
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

/// Hypothetical cluster terms overriding or extending the current state.
#[derive(Clone, Copy)]
struct Extra {
    n: f64,
    cp: f64,
    sep: f64,
    logdet: f64,
}

#[derive(Clone, Copy)]
enum Slot {
    Base(usize),
    New(usize),
}

/// A partition described as base clusters plus a few replacement clusters.
struct HypView<'a> {
    base: &'a IcviState,
    slots: Vec<Slot>,
    extra: Vec<Extra>,
    /// `extra_dist[s][p]`: squared distance from extra `s` to slot `p`.
    extra_dist: Vec<Vec<f64>>,
}

impl<'a> HypView<'a> {
    fn new(base: &'a IcviState, slots: Vec<Slot>, stats: &[ClusterStats]) -> Self {
        let mu = |slot: Slot| match slot {
            Slot::Base(b) => &base.clusters[b].mu,
            Slot::New(s) => &stats[s].mu,
        };
        let extra_dist = stats
            .iter()
            .map(|s| slots.iter().map(|&p| sq_dist(&s.mu, mu(p))).collect())
            .collect();
        let extra = stats
            .iter()
            .map(|s| Extra {
                n: s.n as f64,
                cp: s.cp,
                sep: base.g.sep(s.n, &s.mu),
                logdet: base.g.logdet(s),
            })
            .collect();
        Self {
            base,
            slots,
            extra,
            extra_dist,
        }
    }

    fn get<T>(&self, i: usize, base: impl Fn(usize) -> T, new: impl Fn(&Extra) -> T) -> T {
        match self.slots[i] {
            Slot::Base(b) => base(b),
            Slot::New(s) => new(&self.extra[s]),
        }
    }
}

impl ClusterView for HypView<'_> {
    fn k(&self) -> usize {
        self.slots.len()
    }
    fn n(&self, i: usize) -> f64 {
        self.get(i, |b| self.base.n(b), |e| e.n)
    }
    fn cp(&self, i: usize) -> f64 {
        self.get(i, |b| self.base.cp(b), |e| e.cp)
    }
    fn sep(&self, i: usize) -> f64 {
        self.get(i, |b| self.base.sep[b], |e| e.sep)
    }
    fn logdet(&self, i: usize) -> f64 {
        self.get(i, |b| self.base.logdet[b], |e| e.logdet)
    }
    fn dist2(&self, i: usize, j: usize) -> f64 {
        match (self.slots[i], self.slots[j]) {
            (Slot::Base(a), Slot::Base(b)) => self.base.dist2[a][b],
            (Slot::New(s), _) => self.extra_dist[s][j],
            (_, Slot::New(s)) => self.extra_dist[s][i],
        }
    }
}

/// The current partition with one sample moved from `f` to `t`.
struct SwapView<'a> {
    base: &'a IcviState,
    f: usize,
    t: usize,
    ef: Extra,
    et: Extra,
    /// Squared distances from the two changed centroids to every cluster;
    /// `df[t] == dt[f]` is the distance between them.
    df: &'a [f64],
    dt: &'a [f64],
}

impl SwapView<'_> {
    fn pick<T>(&self, i: usize, base: impl Fn(usize) -> T, new: impl Fn(&Extra) -> T) -> T {
        if i == self.f {
            new(&self.ef)
        } else if i == self.t {
            new(&self.et)
        } else {
            base(i)
        }
    }
}

impl ClusterView for SwapView<'_> {
    fn k(&self) -> usize {
        self.base.k()
    }
    fn n(&self, i: usize) -> f64 {
        self.pick(i, |b| self.base.n(b), |e| e.n)
    }
    fn cp(&self, i: usize) -> f64 {
        self.pick(i, |b| self.base.cp(b), |e| e.cp)
    }
    fn sep(&self, i: usize) -> f64 {
        self.pick(i, |b| self.base.sep[b], |e| e.sep)
    }
    fn logdet(&self, i: usize) -> f64 {
        self.pick(i, |b| self.base.logdet[b], |e| e.logdet)
    }
    fn dist2(&self, i: usize, j: usize) -> f64 {
        if i == self.f {
            self.df[j]
        } else if j == self.f {
            self.df[i]
        } else if i == self.t {
            self.dt[j]
        } else if j == self.t {
            self.dt[i]
        } else {
            self.base.dist2[i][j]
        }
    }
}

fn top3(k: usize, skip: usize, better: impl Fn(usize, usize) -> bool) -> [usize; 3] {
    let mut top = [NONE; 3];
    for c in (0..k).filter(|&c| c != skip) {
        let mut pos = 3;
        while pos > 0 && (top[pos - 1] == NONE || better(c, top[pos - 1])) {
            pos -= 1;
        }
        if pos < 3 {
            top.copy_within(pos..2, pos + 1);
            top[pos] = c;
        }
    }
    top
}

fn first_outside(top: &[usize; 3], f: usize, t: usize) -> Option<usize> {
    top.iter().copied().find(|&c| c != NONE && c != f && c != t)
}

impl IcviState {
    /// Computes every statistic directly from `x_b` and dense `labels`.
    pub fn init_batch(kind: CviKind, x_b: &Matrix, labels: &[usize]) -> Result<Self> {
        if labels.len() != x_b.rows() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} samples",
                labels.len(),
                x_b.rows()
            )));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        if let Some(c) = members.iter().position(|m| m.is_empty()) {
            return Err(Error::EmptyCluster(c));
        }
        kind.check_k(k)?;
        let d = x_b.cols();
        let cov = kind.needs_covariance();
        let clusters = members
            .iter()
            .map(|m| ClusterStats::from_rows(m.iter().map(|&r| x_b.row(r)), d, cov))
            .collect();
        Ok(Self::from_parts(kind, Globals::from_data(kind, x_b), clusters))
    }

    fn from_parts(kind: CviKind, g: Globals, clusters: Vec<ClusterStats>) -> Self {
        let k = clusters.len();
        let mut s = Self {
            kind,
            g,
            clusters,
            sep: vec![0.0; k],
            logdet: vec![0.0; k],
            add_factor: vec![None; k],
            dist2: vec![vec![0.0; k]; k],
            gram: vec![vec![0.0; k]; k],
            near: Vec::new(),
            far: Vec::new(),
            db_top: Vec::new(),
            value: 0.0,
        };
        for i in 0..k {
            s.refresh(i);
        }
        s.finish_update();
        s
    }

    pub fn kind(&self) -> CviKind {
        self.kind
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn globals(&self) -> &Globals {
        &self.g
    }

    pub fn clusters(&self) -> &[ClusterStats] {
        &self.clusters
    }

    pub fn stats(&self, i: usize) -> &ClusterStats {
        &self.clusters[i]
    }

    pub fn size(&self, i: usize) -> usize {
        self.clusters[i].n
    }

    /// Cached squared distance between centroids `i` and `j`.
    pub fn centroid_dist2(&self, i: usize, j: usize) -> f64 {
        self.dist2[i][j]
    }

    /// Index value recomputed from the cached terms.
    pub fn evaluate(&self) -> Result<f64> {
        index_value(self.kind, &self.g, self)
    }

    fn check_id(&self, i: usize) -> Result<()> {
        if i >= self.k() {
            return Err(Error::Contract(format!(
                "cluster {i} does not exist (k = {})",
                self.k()
            )));
        }
        Ok(())
    }

    /// Recomputes the derived terms of cluster `i` and its distance row.
    fn refresh(&mut self, i: usize) {
        let c = &self.clusters[i];
        self.sep[i] = self.g.sep(c.n, &c.mu);
        if let Some(sig) = &c.sigma {
            let d = self.g.d;
            self.logdet[i] = logdet_shifted(sig, d, 1.0, self.g.delta);
            let nf = c.n as f64;
            self.add_factor[i] = SpdFactor::new(sig, d, (nf - 1.0) / nf, self.g.delta);
        }
        for m in 0..self.k() {
            let d2 = if m == i {
                0.0
            } else {
                sq_dist(&self.clusters[i].mu, &self.clusters[m].mu)
            };
            let gm = dot(&self.clusters[i].mu, &self.clusters[m].mu);
            self.dist2[i][m] = d2;
            self.dist2[m][i] = d2;
            self.gram[i][m] = gm;
            self.gram[m][i] = gm;
        }
    }

    fn finish_update(&mut self) {
        let k = self.k();
        let d2 = &self.dist2;
        match self.kind {
            CviKind::Xb => {
                self.near = (0..k)
                    .map(|i| top3(k, i, |a, b| d2[i][a] < d2[i][b]))
                    .collect();
            }
            CviKind::Pbm => {
                self.far = (0..k)
                    .map(|i| top3(k, i, |a, b| d2[i][a] > d2[i][b]))
                    .collect();
            }
            CviKind::Db => {
                let s: Vec<f64> = self.clusters.iter().map(|c| c.cp / c.n as f64).collect();
                let r = |i: usize, j: usize| ratio(s[i] + s[j], d2[i][j]);
                self.db_top = (0..k).map(|i| top3(k, i, |a, b| r(i, a) > r(i, b))).collect();
            }
            _ => {}
        }
        // callers keep k at or above the index minimum
        self.value = self.evaluate().unwrap_or(f64::NAN);
    }

    fn remove_slot(&mut self, i: usize) {
        self.clusters.remove(i);
        self.sep.remove(i);
        self.logdet.remove(i);
        self.add_factor.remove(i);
        self.dist2.remove(i);
        self.gram.remove(i);
        for row in self.dist2.iter_mut().chain(self.gram.iter_mut()) {
            row.remove(i);
        }
    }

    fn push_slot(&mut self, stats: ClusterStats) -> usize {
        self.clusters.push(stats);
        self.sep.push(0.0);
        self.logdet.push(0.0);
        self.add_factor.push(None);
        for row in self.dist2.iter_mut().chain(self.gram.iter_mut()) {
            row.push(0.0);
        }
        let k = self.k();
        self.dist2.push(vec![0.0; k]);
        self.gram.push(vec![0.0; k]);
        self.refresh(k - 1);
        k - 1
    }

    pub fn update_add(&mut self, i: usize, x: &[f64]) -> Result<()> {
        self.check_id(i)?;
        self.clusters[i].add(x);
        self.refresh(i);
        self.finish_update();
        Ok(())
    }

    pub fn update_remove(&mut self, i: usize, x: &[f64]) -> Result<()> {
        self.check_id(i)?;
        self.clusters[i].remove(x)?;
        self.refresh(i);
        self.finish_update();
        Ok(())
    }

    /// Moves sample `x` from cluster `from` (at least two members) to `to`.
    pub fn move_sample(&mut self, x: &[f64], from: usize, to: usize) -> Result<()> {
        self.check_id(from)?;
        self.check_id(to)?;
        if from == to {
            return Ok(());
        }
        self.clusters[from].remove(x)?;
        self.clusters[to].add(x);
        self.refresh(from);
        self.refresh(to);
        self.finish_update();
        Ok(())
    }

    /// Moves the only member `x` of cluster `from` to `to` and deletes
    /// `from`. Returns the new id of `to`.
    pub fn move_last_member(&mut self, x: &[f64], from: usize, to: usize) -> Result<usize> {
        self.check_id(from)?;
        self.check_id(to)?;
        if from == to || self.clusters[from].n != 1 {
            return Err(Error::Contract(format!(
                "cluster {from} is not a singleton distinct from {to}"
            )));
        }
        self.check_deletable()?;
        self.clusters[to].add(x);
        self.refresh(to);
        self.remove_slot(from);
        self.finish_update();
        Ok(if to > from { to - 1 } else { to })
    }

    fn check_deletable(&self) -> Result<()> {
        let k = self.k();
        if k <= 1 || k - 1 < self.kind.min_clusters() {
            return Err(Error::TooFewClusters {
                kind: self.kind.name(),
                required: self.kind.min_clusters().max(1),
                actual: k.saturating_sub(1),
            });
        }
        Ok(())
    }

    /// Drops cluster `i`; ids above `i` shift down.
    pub fn delete_cluster(&mut self, i: usize) -> Result<()> {
        self.check_id(i)?;
        self.check_deletable()?;
        self.remove_slot(i);
        self.finish_update();
        Ok(())
    }

    fn merge_ids(&self, i: usize, j: usize) -> Result<()> {
        self.check_id(i)?;
        self.check_id(j)?;
        if i == j {
            return Err(Error::Contract(format!("cannot merge cluster {i} with itself")));
        }
        if self.k() - 1 < self.kind.min_clusters() {
            return Err(Error::TooFewClusters {
                kind: self.kind.name(),
                required: self.kind.min_clusters(),
                actual: self.k() - 1,
            });
        }
        Ok(())
    }

    /// Merges clusters `i` and `j`. The other clusters keep their relative
    /// order and the merged cluster is appended last; returns its id.
    pub fn update_merge(&mut self, i: usize, j: usize) -> Result<usize> {
        self.merge_ids(i, j)?;
        let merged = self.clusters[i].merged(&self.clusters[j]);
        let (lo, hi) = (i.min(j), i.max(j));
        self.remove_slot(hi);
        self.remove_slot(lo);
        let id = self.push_slot(merged);
        self.finish_update();
        Ok(id)
    }

    pub fn score_merge(&self, i: usize, j: usize) -> Result<f64> {
        self.merge_ids(i, j)?;
        let merged = self.clusters[i].merged(&self.clusters[j]);
        let mut slots: Vec<Slot> = (0..self.k())
            .filter(|&m| m != i && m != j)
            .map(Slot::Base)
            .collect();
        slots.push(Slot::New(0));
        let view = HypView::new(self, slots, std::slice::from_ref(&merged));
        index_value(self.kind, &self.g, &view)
    }

    fn split_parts(
        &self,
        i: usize,
        member_rows: &[usize],
        x_b: &Matrix,
    ) -> Result<(ClusterStats, ClusterStats)> {
        self.check_id(i)?;
        let part = ClusterStats::from_rows(
            member_rows.iter().map(|&r| x_b.row(r)),
            self.g.d,
            self.kind.needs_covariance(),
        );
        let rest = self.clusters[i].split_off(&part)?;
        Ok((rest, part))
    }

    /// Splits `member_rows` (rows of `x_b` currently in cluster `i`) off into
    /// a new cluster appended last; returns its id.
    pub fn update_split(&mut self, i: usize, member_rows: &[usize], x_b: &Matrix) -> Result<usize> {
        let (rest, part) = self.split_parts(i, member_rows, x_b)?;
        self.clusters[i] = rest;
        self.refresh(i);
        let id = self.push_slot(part);
        self.finish_update();
        Ok(id)
    }

    pub fn score_split(&self, i: usize, member_rows: &[usize], x_b: &Matrix) -> Result<f64> {
        let (rest, part) = self.split_parts(i, member_rows, x_b)?;
        let mut slots: Vec<Slot> = (0..self.k())
            .map(|m| if m == i { Slot::New(0) } else { Slot::Base(m) })
            .collect();
        slots.push(Slot::New(1));
        let view = HypView::new(self, slots, &[rest, part]);
        index_value(self.kind, &self.g, &view)
    }

    /// Index value after moving `x` from `from` to `to`, without mutation.
    pub fn score_swap(&self, x: &[f64], from: usize, to: usize) -> Result<f64> {
        self.check_id(from)?;
        self.check_id(to)?;
        Ok(self.swap_scores(x, from)[to])
    }

    /// Index values of moving `x` (currently in `from`) to every cluster.
    ///
    /// Entry `from` is the current value. Moving the only member of a cluster
    /// is not scored: every other entry is then the worst value.
    pub fn swap_scores(&self, x: &[f64], from: usize) -> Vec<f64> {
        let k = self.k();
        let mut out = vec![self.kind.worst(); k];
        out[from] = self.value;
        let Ok(fs) = self.clusters[from].with_removed(x) else {
            return out;
        };
        let ef = Extra {
            n: fs.n as f64,
            cp: fs.cp,
            sep: self.g.sep(fs.n, &fs.mu),
            logdet: self.g.logdet(&fs),
        };
        let mut df: Vec<f64> = (0..k)
            .map(|m| if m == from { 0.0 } else { sq_dist(&fs.mu, &self.clusters[m].mu) })
            .collect();
        let xm: Vec<f64> = self.clusters.iter().map(|c| dot(x, &c.mu)).collect();
        let mut v = vec![0.0; self.g.d];
        let mut mu_t = vec![0.0; self.g.d];
        let mut dt = vec![0.0; k];

        for to in (0..k).filter(|&t| t != from) {
            let ct = &self.clusters[to];
            let nt = ct.n as f64;
            for j in 0..v.len() {
                v[j] = x[j] - ct.mu[j];
                mu_t[j] = ct.mu[j] + v[j] / (nt + 1.0);
            }
            let vv: f64 = v.iter().map(|e| e * e).sum();
            let logdet = if self.kind.needs_covariance() {
                match &self.add_factor[to] {
                    Some(fac) => fac.logdet + (fac.inv_quad(&v) / (nt + 1.0)).ln_1p(),
                    None => self.g.logdet(&ct.with_added(x)),
                }
            } else {
                0.0
            };
            let et = Extra {
                n: nt + 1.0,
                cp: ct.cp + nt / (nt + 1.0) * vv,
                sep: self.g.sep(ct.n + 1, &mu_t),
                logdet,
            };
            let dft = sq_dist(&mu_t, &fs.mu);
            let g = &self.gram[to];
            let shift = vv / ((nt + 1.0) * (nt + 1.0));
            for m in 0..k {
                dt[m] = if m == to {
                    0.0
                } else if m == from {
                    dft
                } else {
                    let u = (xm[to] - xm[m] - g[to] + g[m]) / (nt + 1.0);
                    self.dist2[to][m] + 2.0 * u + shift
                };
            }
            let saved = df[to];
            df[to] = dft;
            let view = SwapView {
                base: self,
                f: from,
                t: to,
                ef,
                et,
                df: &df,
                dt: &dt,
            };
            out[to] = self.swap_value(&view);
            df[to] = saved;
        }
        out
    }

    fn swap_value(&self, v: &SwapView) -> f64 {
        let (f, t, k) = (v.f, v.t, self.k());
        let others = || (0..k).filter(move |&m| m != f && m != t);
        match self.kind {
            CviKind::Xb | CviKind::Pbm => {
                let xb = self.kind == CviKind::Xb;
                let pick = |a: f64, b: f64| if xb { a.min(b) } else { a.max(b) };
                let mut best = if xb { f64::INFINITY } else { 0.0 };
                let cache = if xb { &self.near } else { &self.far };
                for m in others() {
                    if let Some(c) = first_outside(&cache[m], f, t) {
                        best = pick(best, self.dist2[m][c]);
                    }
                    best = pick(best, v.df[m]);
                    best = pick(best, v.dt[m]);
                }
                best = pick(best, v.df[t]);
                let cp = super::sum_cp(v);
                if xb {
                    super::xb_value(self.g.n_total, cp, best)
                } else {
                    super::pbm_value(self.g.e0, k, cp, best)
                }
            }
            CviKind::Db => {
                let s = |i: usize| v.cp(i) / v.n(i);
                let mut total = 0.0;
                for i in 0..k {
                    let si = s(i);
                    let mut best = f64::NEG_INFINITY;
                    if i == f || i == t {
                        for j in (0..k).filter(|&j| j != i) {
                            best = best.max(ratio(si + s(j), v.dist2(i, j)));
                        }
                    } else {
                        if let Some(c) = first_outside(&self.db_top[i], f, t) {
                            best = ratio(si + s(c), self.dist2[i][c]);
                        }
                        best = best.max(ratio(si + v.ef.cp / v.ef.n, v.df[i]));
                        best = best.max(ratio(si + v.et.cp / v.et.n, v.dt[i]));
                    }
                    total += best;
                }
                total / k as f64
            }
            _ => index_value(self.kind, &self.g, v).unwrap_or(f64::NAN),
        }
    }

    /// Largest relative gap between the cached centroid distances and a
    /// direct recomputation.
    pub fn dist2_drift(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.k() {
            for j in 0..self.k() {
                let direct = sq_dist(&self.clusters[i].mu, &self.clusters[j].mu);
                let gap = (direct - self.dist2[i][j]).abs() / direct.abs().max(1e-300);
                if i != j {
                    worst = worst.max(gap);
                }
            }
        }
        worst
    }
}
