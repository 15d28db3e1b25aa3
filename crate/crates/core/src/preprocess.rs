//! The two input views: complement-coded min-max data for ARTa and
//! standardized data for the validity-index engine, plus the inverse mapping
//! used to turn k-means centroids into ARTa categories.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Matrix};

/// Per-feature scaling `(x - offset) / scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedData {
    /// `N x 2d`, rows `[x_mm, 1 - x_mm]`.
    pub x_a: Matrix,
    /// `N x d`, per-feature zero mean / unit (population) variance.
    pub x_b: Matrix,
    /// offset = feature min, scale = max - min (1 for constant features).
    pub minmax: FeatureScaling,
    /// offset = feature mean, scale = population stdev (1 for constant features).
    pub standard: FeatureScaling,
}

impl PreparedData {
    pub fn n(&self) -> usize {
        self.x_b.rows()
    }

    pub fn d(&self) -> usize {
        self.x_b.cols()
    }

    /// Complement-coded image of a centroid given in standardized space.
    ///
    /// Undoes standardization, applies the training min-max scaling, clamps to
    /// the unit interval and complement-codes.
    pub fn centroid_to_category(&self, mu_std: &[f64]) -> Vec<f64> {
        centroid_to_category(mu_std, self)
    }
}

/// Builds the ARTa and index-engine views of `ds`.
pub fn prepare(ds: &Dataset) -> PreparedData {
    let x = ds.x();
    let (n, d) = (x.rows(), x.cols());

    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    let mut mean = vec![0.0; d];
    for row in x.iter_rows() {
        for j in 0..d {
            min[j] = min[j].min(row[j]);
            max[j] = max[j].max(row[j]);
            mean[j] += row[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for row in x.iter_rows() {
        for j in 0..d {
            let e = row[j] - mean[j];
            var[j] += e * e;
        }
    }
    let range: Vec<f64> = (0..d)
        .map(|j| if max[j] > min[j] { max[j] - min[j] } else { 1.0 })
        .collect();
    let std: Vec<f64> = var
        .iter()
        .map(|v| {
            let s = (v / n as f64).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();

    let mut x_a = Matrix::zeros(n, 2 * d);
    let mut x_b = Matrix::zeros(n, d);
    for i in 0..n {
        let src = x.row(i);
        let a = x_a.row_mut(i);
        for j in 0..d {
            let mm = if max[j] > min[j] { (src[j] - min[j]) / range[j] } else { 0.0 };
            a[j] = mm;
            a[j + d] = 1.0 - mm;
        }
        let b = x_b.row_mut(i);
        for j in 0..d {
            b[j] = (src[j] - mean[j]) / std[j];
        }
    }

    PreparedData {
        x_a,
        x_b,
        minmax: FeatureScaling {
            offset: min,
            scale: range,
        },
        standard: FeatureScaling {
            offset: mean,
            scale: std,
        },
    }
}

pub fn centroid_to_category(mu_std: &[f64], prep: &PreparedData) -> Vec<f64> {
    let d = mu_std.len();
    let mut out = vec![0.0; 2 * d];
    for j in 0..d {
        let raw = mu_std[j] * prep.standard.scale[j] + prep.standard.offset[j];
        let mm = ((raw - prep.minmax.offset[j]) / prep.minmax.scale[j]).clamp(0.0, 1.0);
        out[j] = mm;
        out[j + d] = 1.0 - mm;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ds(rows: &[Vec<f64>]) -> Dataset {
        Dataset::from_rows(rows).unwrap()
    }

    #[test]
    fn minmax_and_complement_of_linear_column() {
        let p = prepare(&ds(&[vec![0.0], vec![2.0], vec![4.0]]));
        let got: Vec<_> = p.x_a.iter_rows().map(|r| (r[0], r[1])).collect();
        assert_eq!(got, vec![(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]);
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let p = prepare(&ds(&[vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 3.0]]));
        for r in p.x_a.iter_rows() {
            assert_eq!((r[0], r[2]), (0.0, 1.0));
        }
        for r in p.x_b.iter_rows() {
            assert_eq!(r[0], 0.0);
        }
    }

    #[test]
    fn complement_row_layout() {
        // column mins 0, maxes 1, so the middle sample is unchanged by min-max
        let p = prepare(&ds(&[vec![0.0, 0.0], vec![0.2, 0.8], vec![1.0, 1.0]]));
        let r = p.x_a.row(1);
        assert_abs_diff_eq!(r[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(r[2], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(r[3], 0.2, epsilon = 1e-15);
    }

    #[test]
    fn centroid_of_data_point_maps_to_its_row() {
        let data = vec![vec![1.0, -3.0], vec![4.0, 2.0], vec![2.5, 7.0], vec![0.0, 0.0]];
        let p = prepare(&ds(&data));
        for i in 0..data.len() {
            let w = p.centroid_to_category(p.x_b.row(i));
            for (a, b) in w.iter().zip(p.x_a.row(i)) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn zero_centroid_is_raw_mean_image() {
        let data = vec![vec![1.0, -3.0], vec![4.0, 2.0], vec![2.5, 7.0], vec![0.0, 0.0]];
        let p = prepare(&ds(&data));
        let w = p.centroid_to_category(&[0.0, 0.0]);
        // direct route: raw mean, then min-max, then complement
        let mean = [7.5 / 4.0, 6.0 / 4.0];
        let (min, max) = ([0.0, -3.0], [4.0, 7.0]);
        for j in 0..2 {
            let mm = (mean[j] - min[j]) / (max[j] - min[j]);
            assert_abs_diff_eq!(w[j], mm, epsilon = 1e-12);
            assert_abs_diff_eq!(w[j + 2], 1.0 - mm, epsilon = 1e-12);
        }
    }

    #[test]
    fn out_of_range_centroid_is_clamped() {
        let p = prepare(&ds(&[vec![0.0], vec![1.0]]));
        // standardized value far above the max
        let w = p.centroid_to_category(&[50.0]);
        assert_eq!(w, vec![1.0, 0.0]);
        let w = p.centroid_to_category(&[-50.0]);
        assert_eq!(w, vec![0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn views_satisfy_their_contracts(
            rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..30)
        ) {
            let p = prepare(&ds(&rows));
            let (n, d) = (p.n(), p.d());
            for r in p.x_a.iter_rows() {
                for j in 0..d {
                    prop_assert!((0.0..=1.0).contains(&r[j]));
                    prop_assert!((r[j] + r[j + d] - 1.0).abs() <= 1e-12);
                }
            }
            for j in 0..d {
                let col: Vec<f64> = p.x_b.iter_rows().map(|r| r[j]).collect();
                let m = col.iter().sum::<f64>() / n as f64;
                let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
                prop_assert!(m.abs() < 1e-9);
                if p.standard.scale[j] != 1.0 || v > 0.0 {
                    prop_assert!((v - 1.0).abs() < 1e-9 || v == 0.0);
                }
            }
            // inverse transforms reproduce the raw data
            for (i, raw) in rows.iter().enumerate() {
                for j in 0..d {
                    let back = p.x_b.get(i, j) * p.standard.scale[j] + p.standard.offset[j];
                    prop_assert!((back - raw[j]).abs() <= 1e-9 * raw[j].abs().max(1.0));
                    let back = p.x_a.get(i, j) * p.minmax.scale[j] + p.minmax.offset[j];
                    if p.minmax.scale[j] != 1.0 || p.x_a.get(i, j) != 0.0 {
                        prop_assert!((back - raw[j]).abs() <= 1e-9 * raw[j].abs().max(1.0));
                    }
                }
            }
        }
    }
}
