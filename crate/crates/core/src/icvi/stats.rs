use crate::error::{Error, Result};
use crate::linalg::sq_dist;

/// Frequency, mean, compactness and optional sample covariance of one
/// cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterStats {
    pub n: usize,
    pub mu: Vec<f64>,
    /// Sum of squared distances of members to `mu`.
    pub cp: f64,
    /// Flat `d x d` sample covariance (denominator `n - 1`, zero for `n = 1`).
    pub sigma: Option<Vec<f64>>,
}

fn outer_axpy(sigma: &mut [f64], a: f64, v: &[f64]) {
    let d = v.len();
    for i in 0..d {
        let row = &mut sigma[i * d..(i + 1) * d];
        let avi = a * v[i];
        for j in 0..d {
            row[j] += avi * v[j];
        }
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl ClusterStats {
    pub fn singleton(x: &[f64], with_cov: bool) -> Self {
        let d = x.len();
        Self {
            n: 1,
            mu: x.to_vec(),
            cp: 0.0,
            sigma: with_cov.then(|| vec![0.0; d * d]),
        }
    }

    /// Stats computed directly from member rows (two passes).
    pub fn from_rows<'a, I>(rows: I, d: usize, with_cov: bool) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
        I::IntoIter: Clone,
    {
        let rows = rows.into_iter();
        let mut n = 0usize;
        let mut mu = vec![0.0; d];
        for r in rows.clone() {
            n += 1;
            for (m, x) in mu.iter_mut().zip(r) {
                *m += x;
            }
        }
        if n > 0 {
            mu.iter_mut().for_each(|m| *m /= n as f64);
        }
        let mut cp = 0.0;
        let mut sigma = with_cov.then(|| vec![0.0; d * d]);
        let mut v = vec![0.0; d];
        for r in rows {
            for j in 0..d {
                v[j] = r[j] - mu[j];
            }
            cp += v.iter().map(|e| e * e).sum::<f64>();
            if let Some(s) = sigma.as_mut() {
                // upper triangle only, mirrored below
                for i in 0..d {
                    let vi = v[i];
                    let row = &mut s[i * d..(i + 1) * d];
                    for j in i..d {
                        row[j] += vi * v[j];
                    }
                }
            }
        }
        if let Some(s) = sigma.as_mut() {
            let denom = if n > 1 { (n - 1) as f64 } else { f64::INFINITY };
            for i in 0..d {
                for j in i..d {
                    let val = s[i * d + j] / denom;
                    s[i * d + j] = val;
                    s[j * d + i] = val;
                }
            }
        }
        Self { n, mu, cp, sigma }
    }

    pub fn d(&self) -> usize {
        self.mu.len()
    }

    pub fn add(&mut self, x: &[f64]) {
        let n = self.n as f64;
        let v = diff(x, &self.mu);
        let vv: f64 = v.iter().map(|e| e * e).sum();
        self.cp += n / (n + 1.0) * vv;
        for (m, e) in self.mu.iter_mut().zip(&v) {
            *m += e / (n + 1.0);
        }
        if let Some(s) = self.sigma.as_mut() {
            let a = (n - 1.0) / n;
            s.iter_mut().for_each(|e| *e *= a);
            outer_axpy(s, 1.0 / (n + 1.0), &v);
        }
        self.n += 1;
    }

    pub fn with_added(&self, x: &[f64]) -> Self {
        let mut s = self.clone();
        s.add(x);
        s
    }

    /// Removes member `x`. Removing the last member is not an update.
    pub fn remove(&mut self, x: &[f64]) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Contract(
                "cannot remove the only member of a cluster".into(),
            ));
        }
        let n = self.n as f64;
        let v = diff(x, &self.mu);
        let vv: f64 = v.iter().map(|e| e * e).sum();
        self.cp = (self.cp - n / (n - 1.0) * vv).max(0.0);
        for (m, e) in self.mu.iter_mut().zip(&v) {
            *m -= e / (n - 1.0);
        }
        if let Some(s) = self.sigma.as_mut() {
            if self.n == 2 {
                s.iter_mut().for_each(|e| *e = 0.0);
            } else {
                let a = (n - 1.0) / (n - 2.0);
                s.iter_mut().for_each(|e| *e *= a);
                outer_axpy(s, -n / ((n - 1.0) * (n - 2.0)), &v);
            }
        }
        self.n -= 1;
        Ok(())
    }

    pub fn with_removed(&self, x: &[f64]) -> Result<Self> {
        let mut s = self.clone();
        s.remove(x)?;
        Ok(s)
    }

    /// Union of two disjoint clusters.
    pub fn merged(&self, other: &ClusterStats) -> Self {
        let (ni, nj) = (self.n as f64, other.n as f64);
        let n = ni + nj;
        let v = diff(&other.mu, &self.mu);
        let vv: f64 = v.iter().map(|e| e * e).sum();
        let cp = self.cp + other.cp + ni * nj / n * vv;
        let mu = self
            .mu
            .iter()
            .zip(&other.mu)
            .map(|(a, b)| (ni * a + nj * b) / n)
            .collect();
        let sigma = match (&self.sigma, &other.sigma) {
            (Some(si), Some(sj)) => {
                let mut s: Vec<f64> = si
                    .iter()
                    .zip(sj)
                    .map(|(a, b)| ((ni - 1.0) * a + (nj - 1.0) * b) / (n - 1.0))
                    .collect();
                outer_axpy(&mut s, ni * nj / (n * (n - 1.0)), &v);
                Some(s)
            }
            _ => None,
        };
        Self {
            n: self.n + other.n,
            mu,
            cp,
            sigma,
        }
    }

    /// What remains of `self` after the member subset described by `part` is
    /// taken out.
    pub fn split_off(&self, part: &ClusterStats) -> Result<Self> {
        if part.n == 0 || part.n >= self.n {
            return Err(Error::Contract(format!(
                "split of {} members from a cluster of {} is not a proper split",
                part.n, self.n
            )));
        }
        let (ni, nj) = (self.n as f64, part.n as f64);
        let nr = ni - nj;
        let v = diff(&part.mu, &self.mu);
        let vv: f64 = v.iter().map(|e| e * e).sum();
        let cp = (self.cp - part.cp - ni * nj / nr * vv).max(0.0);
        let mu = self
            .mu
            .iter()
            .zip(&part.mu)
            .map(|(a, b)| (ni * a - nj * b) / nr)
            .collect();
        let sigma = match (&self.sigma, &part.sigma) {
            (Some(si), Some(sj)) => {
                if self.n - part.n == 1 {
                    Some(vec![0.0; si.len()])
                } else {
                    let mut s: Vec<f64> = si
                        .iter()
                        .zip(sj)
                        .map(|(a, b)| ((ni - 1.0) * a - (nj - 1.0) * b) / (nr - 1.0))
                        .collect();
                    outer_axpy(&mut s, -ni * nj / (nr * (nr - 1.0)), &v);
                    Some(s)
                }
            }
            _ => None,
        };
        Ok(Self {
            n: self.n - part.n,
            mu,
            cp,
            sigma,
        })
    }

    /// Largest absolute per-field difference, for tests and invariant checks.
    pub fn max_abs_diff(&self, other: &ClusterStats) -> f64 {
        let mut m = (self.n as f64 - other.n as f64).abs();
        m = m.max((self.cp - other.cp).abs());
        m = m.max(sq_dist(&self.mu, &other.mu).sqrt());
        for (a, b) in self.mu.iter().zip(&other.mu) {
            m = m.max((a - b).abs());
        }
        if let (Some(a), Some(b)) = (&self.sigma, &other.sigma) {
            for (x, y) in a.iter().zip(b) {
                m = m.max((x - y).abs());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn stats(rows: &[Vec<f64>]) -> ClusterStats {
        ClusterStats::from_rows(rows.iter().map(|r| r.as_slice()), rows[0].len(), true)
    }

    #[test]
    fn add_to_singleton() {
        let mut s = ClusterStats::singleton(&[0.0, 0.0], true);
        s.add(&[2.0, 0.0]);
        assert_eq!(s.n, 2);
        assert_eq!(s.mu, vec![1.0, 0.0]);
        assert_eq!(s.cp, 2.0);
        assert_eq!(s.sigma.as_ref().unwrap(), &vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn add_mean_is_noop_for_mean_and_cp() {
        let mut s = stats(&[vec![1.0, 2.0], vec![3.0, -1.0], vec![0.5, 0.5]]);
        let before = s.clone();
        let mu = s.mu.clone();
        s.add(&mu);
        assert_eq!(s.n, 4);
        assert_abs_diff_eq!(s.cp, before.cp, epsilon = 1e-12);
        for (a, b) in s.mu.iter().zip(&before.mu) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        let mut s = before.clone();
        s.remove(&mu).unwrap();
        assert_abs_diff_eq!(s.cp, before.cp, epsilon = 1e-12);
        assert_eq!(s.n, 2);
    }

    #[test]
    fn remove_last_member_is_an_error() {
        let mut s = ClusterStats::singleton(&[1.0], false);
        assert!(s.remove(&[1.0]).is_err());
    }

    #[test]
    fn improper_split_is_an_error() {
        let s = stats(&[vec![0.0], vec![1.0]]);
        assert!(s.split_off(&s).is_err());
        let empty = ClusterStats::from_rows(std::iter::empty(), 1, true);
        assert!(s.split_off(&empty).is_err());
    }

    #[test]
    fn remove_down_to_one_member_zeroes_covariance() {
        let mut s = stats(&[vec![0.0, 1.0], vec![2.0, 3.0]]);
        s.remove(&[2.0, 3.0]).unwrap();
        assert_eq!(s.sigma.as_ref().unwrap(), &vec![0.0; 4]);
        assert_eq!(s.cp, 0.0);
        assert_eq!(s.mu, vec![0.0, 1.0]);
    }

    fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..5).prop_flat_map(|d| {
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), 2..25)
        })
    }

    proptest! {
        #[test]
        fn incremental_matches_batch(rows in rows_strategy(), cut in 1usize..24) {
            let cut = 1 + cut % (rows.len() - 1);
            let (a, b) = rows.split_at(cut);
            let full = stats(&rows);

            let mut grown = stats(a);
            for x in b {
                grown.add(x);
            }
            prop_assert!(grown.max_abs_diff(&full) < 1e-8);

            let mut shrunk = full.clone();
            for x in b {
                shrunk.remove(x).unwrap();
            }
            prop_assert!(shrunk.max_abs_diff(&stats(a)) < 1e-8);

            let merged = stats(a).merged(&stats(b));
            prop_assert!(merged.max_abs_diff(&full) < 1e-8);

            let rest = full.split_off(&stats(b)).unwrap();
            prop_assert!(rest.max_abs_diff(&stats(a)) < 1e-8);
        }

        #[test]
        fn add_remove_inverse(rows in rows_strategy(), x in prop::collection::vec(-10.0f64..10.0, 4)) {
            let s = stats(&rows);
            let x = &x[..s.d()];
            let round = s.with_added(x).with_removed(x).unwrap();
            prop_assert!(round.max_abs_diff(&s) < 1e-9);
            let ClusterStats { n, .. } = s;
            if n >= 2 {
                let x0 = rows[0].clone();
                let round = s.with_removed(&x0).unwrap().with_added(&x0);
                prop_assert!(round.max_abs_diff(&s) < 1e-9);
            }
        }

        #[test]
        fn merge_with_singleton_is_add(rows in rows_strategy(), x in prop::collection::vec(-10.0f64..10.0, 4)) {
            let s = stats(&rows);
            let x = &x[..s.d()];
            let a = s.with_added(x);
            let m = s.merged(&ClusterStats::singleton(x, true));
            prop_assert!(a.max_abs_diff(&m) < 1e-12 * (1.0 + a.cp));
            let r = s.split_off(&ClusterStats::singleton(&rows[0], true)).unwrap();
            let r2 = s.with_removed(&rows[0]).unwrap();
            prop_assert!(r.max_abs_diff(&r2) < 1e-9 * (1.0 + s.cp));
        }
    }
}
