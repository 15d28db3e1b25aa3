//! Cluster validity indices with incremental updates.
//!
//! [`IcviState`] caches per-cluster frequency, mean, compactness, separation
//! and (for [`CviKind::Ni`]) covariance, plus pairwise centroid distances, and
//! keeps them current under sample moves, merges, splits and deletions.
//! [`batch_value`] recomputes an index from raw data and labels.

mod batch;
mod stats;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};

pub use batch::{batch_value, BatchEvaluator};
pub use stats::ClusterStats;
pub use state::IcviState;

/// Denominators below this are treated as zero.
pub const ZERO_GUARD: f64 = 1e-30;

/// Relative tolerance under which two index values count as tied.
pub const TIE_RTOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CviKind {
    Ch,
    Wb,
    Db,
    Xb,
    Pbm,
    Ni,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimality {
    Max,
    Min,
}

impl CviKind {
    pub const ALL: [CviKind; 6] = [
        CviKind::Ni,
        CviKind::Ch,
        CviKind::Wb,
        CviKind::Xb,
        CviKind::Db,
        CviKind::Pbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CviKind::Ch => "ch",
            CviKind::Wb => "wb",
            CviKind::Db => "db",
            CviKind::Xb => "xb",
            CviKind::Pbm => "pbm",
            CviKind::Ni => "ni",
        }
    }

    pub fn optimality(self) -> Optimality {
        match self {
            CviKind::Ch | CviKind::Pbm => Optimality::Max,
            _ => Optimality::Min,
        }
    }

    /// Fewest clusters the index is defined for.
    pub fn min_clusters(self) -> usize {
        match self {
            CviKind::Wb | CviKind::Ni => 1,
            _ => 2,
        }
    }

    pub(crate) fn needs_covariance(self) -> bool {
        self == CviKind::Ni
    }

    /// The value that loses every comparison.
    pub fn worst(self) -> f64 {
        match self.optimality() {
            Optimality::Max => f64::NEG_INFINITY,
            Optimality::Min => f64::INFINITY,
        }
    }

    /// `a` strictly better than `b`, beyond the tie tolerance.
    pub fn is_better(self, a: f64, b: f64) -> bool {
        if a == b || a.is_nan() {
            return false;
        }
        if b.is_nan() {
            return true;
        }
        let diff = match self.optimality() {
            Optimality::Max => a - b,
            Optimality::Min => b - a,
        };
        if a.is_infinite() || b.is_infinite() {
            return diff > 0.0;
        }
        diff > TIE_RTOL * a.abs().max(b.abs())
    }

    pub fn ties(self, a: f64, b: f64) -> bool {
        !self.is_better(a, b) && !self.is_better(b, a)
    }

    pub(crate) fn check_k(self, k: usize) -> Result<()> {
        if k < self.min_clusters() {
            return Err(Error::TooFewClusters {
                kind: self.name(),
                required: self.min_clusters(),
                actual: k,
            });
        }
        Ok(())
    }
}

impl fmt::Display for CviKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CviKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CviKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown index '{s}', expected one of: ni, ch, wb, xb, db, pbm"
                ))
            })
    }
}

/// Data-level quantities shared by every partition of the same data.
#[derive(Clone, Debug)]
pub struct Globals {
    pub n_total: usize,
    pub d: usize,
    pub mu_data: Vec<f64>,
    /// Total scatter around the data mean.
    pub e0: f64,
    /// `ln |Sigma_data + delta I|`; zero unless the index needs covariances.
    pub logdet_data: f64,
    /// Covariance regularizer `10^(-12/d)`.
    pub delta: f64,
}

impl Globals {
    pub fn from_data(kind: CviKind, x: &Matrix) -> Self {
        let (n, d) = (x.rows(), x.cols());
        let all = ClusterStats::from_rows(x.iter_rows(), d, kind.needs_covariance());
        let delta = regularizer(d);
        let logdet_data = match &all.sigma {
            Some(s) => crate::linalg::logdet_shifted(s, d, 1.0, delta),
            None => 0.0,
        };
        Self {
            n_total: n,
            d,
            mu_data: all.mu,
            e0: all.cp,
            logdet_data,
            delta,
        }
    }

    pub(crate) fn sep(&self, n: usize, mu: &[f64]) -> f64 {
        n as f64 * crate::linalg::sq_dist(mu, &self.mu_data)
    }

    pub(crate) fn logdet(&self, s: &ClusterStats) -> f64 {
        match &s.sigma {
            Some(sig) => crate::linalg::logdet_shifted(sig, self.d, 1.0, self.delta),
            None => 0.0,
        }
    }
}

pub fn regularizer(d: usize) -> f64 {
    10f64.powf(-12.0 / d as f64)
}

/// Read access to the per-cluster terms an index formula needs.
pub(crate) trait ClusterView {
    fn k(&self) -> usize;
    fn n(&self, i: usize) -> f64;
    fn cp(&self, i: usize) -> f64;
    fn sep(&self, i: usize) -> f64;
    fn logdet(&self, i: usize) -> f64;
    fn dist2(&self, i: usize, j: usize) -> f64;
}

#[inline]
pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den.abs() < ZERO_GUARD {
        f64::INFINITY
    } else {
        num / den
    }
}

pub(crate) fn sum_cp(v: &impl ClusterView) -> f64 {
    (0..v.k()).map(|i| v.cp(i)).sum()
}

pub(crate) fn ch_value(n_total: usize, k: usize, sep: f64, cp: f64) -> f64 {
    if cp.abs() < ZERO_GUARD {
        return f64::INFINITY;
    }
    sep / cp * (n_total - k) as f64 / (k - 1) as f64
}

pub(crate) fn wb_value(k: usize, sep: f64, cp: f64) -> f64 {
    k as f64 * ratio(cp, sep)
}

pub(crate) fn xb_value(n_total: usize, cp: f64, min_d2: f64) -> f64 {
    ratio(cp, n_total as f64 * min_d2)
}

pub(crate) fn pbm_value(e0: f64, k: usize, cp: f64, max_d2: f64) -> f64 {
    if cp.abs() < ZERO_GUARD {
        return f64::INFINITY;
    }
    let t = e0 / cp * max_d2 / k as f64;
    t * t
}

pub(crate) fn ni_value(n_total: usize, logdet_data: f64, v: &impl ClusterView) -> f64 {
    let nt = n_total as f64;
    let mut s = 0.0;
    for i in 0..v.k() {
        let p = v.n(i) / nt;
        s += 0.5 * p * v.logdet(i) - p * p.ln();
    }
    s - 0.5 * logdet_data
}

/// Index value of the partition exposed by `v`.
pub(crate) fn index_value(kind: CviKind, g: &Globals, v: &impl ClusterView) -> Result<f64> {
    let k = v.k();
    kind.check_k(k)?;
    let pairs = || (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)));
    Ok(match kind {
        CviKind::Ch => {
            let sep = (0..k).map(|i| v.sep(i)).sum();
            ch_value(g.n_total, k, sep, sum_cp(v))
        }
        CviKind::Wb => {
            let sep = (0..k).map(|i| v.sep(i)).sum();
            wb_value(k, sep, sum_cp(v))
        }
        CviKind::Db => {
            let mut total = 0.0;
            for i in 0..k {
                let si = v.cp(i) / v.n(i);
                let mut best = f64::NEG_INFINITY;
                for j in (0..k).filter(|&j| j != i) {
                    let r = ratio(si + v.cp(j) / v.n(j), v.dist2(i, j));
                    best = best.max(r);
                }
                total += best;
            }
            total / k as f64
        }
        CviKind::Xb => {
            let min = pairs().map(|(i, j)| v.dist2(i, j)).fold(f64::INFINITY, f64::min);
            xb_value(g.n_total, sum_cp(v), min)
        }
        CviKind::Pbm => {
            let max = pairs().map(|(i, j)| v.dist2(i, j)).fold(0.0, f64::max);
            pbm_value(g.e0, k, sum_cp(v), max)
        }
        CviKind::Ni => ni_value(g.n_total, g.logdet_data, v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_parse_and_report_direction() {
        for k in CviKind::ALL {
            assert_eq!(k.name().parse::<CviKind>().unwrap(), k);
        }
        assert_eq!("NI".parse::<CviKind>().unwrap(), CviKind::Ni);
        let err = "bogus".parse::<CviKind>().unwrap_err().to_string();
        assert!(err.contains("ni, ch, wb, xb, db, pbm"));
        assert_eq!(CviKind::Ch.optimality(), Optimality::Max);
        assert_eq!(CviKind::Pbm.optimality(), Optimality::Max);
        for k in [CviKind::Wb, CviKind::Db, CviKind::Xb, CviKind::Ni] {
            assert_eq!(k.optimality(), Optimality::Min);
        }
    }

    #[test]
    fn comparisons_respect_direction_and_tolerance() {
        let (mx, mn) = (CviKind::Ch, CviKind::Xb);
        assert!(mx.is_better(2.0, 1.0));
        assert!(!mx.is_better(1.0, 2.0));
        assert!(mn.is_better(1.0, 2.0));
        assert!(mx.ties(1.0, 1.0 + 1e-12));
        assert!(!mx.is_better(1.0 + 1e-12, 1.0));
        assert!(mx.is_better(f64::INFINITY, 1e300));
        assert!(mx.ties(f64::INFINITY, f64::INFINITY));
        assert!(mn.is_better(1.0, mn.worst()));
        assert!(mx.is_better(-1e300, mx.worst()));
        assert!(mn.ties(mn.worst(), mn.worst()));
    }

    #[test]
    fn regularizer_matches_dimension() {
        assert!((regularizer(1) - 1e-12).abs() < 1e-24);
        assert!((regularizer(12) - 0.1).abs() < 1e-15);
    }
}
