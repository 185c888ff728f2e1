//! Permutation-invariant reductions of variable-size vector multisets.

use serde::{Deserialize, Serialize};

use super::GnnError;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    #[default]
    Mean,
    /// Mean concatenated with the population variance.
    MeanVar,
    Sum,
}

impl Aggregator {
    pub const fn output_dim(self, d: usize) -> usize {
        match self {
            Aggregator::MeanVar => 2 * d,
            Aggregator::Mean | Aggregator::Sum => d,
        }
    }

    /// Reduces a multiset of `d`-vectors. The empty multiset maps to zeros.
    pub fn aggregate<T: Scalar>(self, d: usize, vectors: &[Vec<T>]) -> Result<Vec<T>, GnnError> {
        let mut data = Vec::with_capacity(vectors.len() * d);
        for v in vectors {
            if v.len() != d {
                return Err(GnnError::DimensionMismatch {
                    what: "aggregated vector",
                    expected: d,
                    found: v.len(),
                });
            }
            data.extend_from_slice(v);
        }
        let x = Matrix::from_vec(vectors.len(), d, data).expect("sized");
        let seg = vec![0; vectors.len()];
        Ok(self.segments(&x, &seg, 1).into_vec())
    }

    /// Reduces the rows of `x` grouped by `segment[r] < n_segments`.
    pub fn segments<T: Scalar>(self, x: &Matrix<T>, segment: &[usize], n_segments: usize) -> Matrix<T> {
        let d = x.cols();
        let counts = segment_counts(segment, n_segments);
        let mut out = Matrix::zeros(n_segments, self.output_dim(d));
        for (r, &s) in segment.iter().enumerate() {
            let o = &mut out.row_mut(s)[..d];
            for (acc, &v) in o.iter_mut().zip(x.row(r)) {
                *acc += v;
            }
        }
        if self == Aggregator::Sum {
            return out;
        }
        for (s, &c) in counts.iter().enumerate() {
            if c > 0 {
                let inv = T::one() / T::from_count(c);
                for v in &mut out.row_mut(s)[..d] {
                    *v *= inv;
                }
            }
        }
        if self == Aggregator::MeanVar {
            for (r, &s) in segment.iter().enumerate() {
                let row = out.row_mut(s);
                let (mean, var) = row.split_at_mut(d);
                for ((acc, &m), &v) in var.iter_mut().zip(mean.iter()).zip(x.row(r)) {
                    let dv = v - m;
                    *acc += dv * dv;
                }
            }
            for (s, &c) in counts.iter().enumerate() {
                if c > 0 {
                    let inv = T::one() / T::from_count(c);
                    for v in &mut out.row_mut(s)[d..] {
                        *v *= inv;
                    }
                }
            }
        }
        out
    }

    /// Adds the gradient of [`Aggregator::segments`] with respect to `x`
    /// into `dx`. `out` is the forward result for the same inputs.
    pub fn segments_backward<T: Scalar>(
        self,
        x: &Matrix<T>,
        segment: &[usize],
        out: &Matrix<T>,
        upstream: &Matrix<T>,
        dx: &mut Matrix<T>,
    ) {
        let d = x.cols();
        let counts = segment_counts(segment, out.rows());
        let two = T::lit(2.0);
        for (r, &s) in segment.iter().enumerate() {
            let up = upstream.row(s);
            let scale = match self {
                Aggregator::Sum => T::one(),
                _ => T::one() / T::from_count(counts[s]),
            };
            let means = &out.row(s)[..d];
            let xr = x.row(r);
            let g = dx.row_mut(r);
            for c in 0..d {
                let mut v = up[c] * scale;
                if self == Aggregator::MeanVar {
                    v += up[d + c] * two * (xr[c] - means[c]) * scale;
                }
                g[c] += v;
            }
        }
    }
}

pub(crate) fn segment_counts(segment: &[usize], n_segments: usize) -> Vec<usize> {
    let mut counts = vec![0; n_segments];
    for &s in segment {
        counts[s] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let v = vec![vec![1.0, 3.0], vec![3.0, 5.0]];
        assert_eq!(Aggregator::Mean.aggregate(2, &v).unwrap(), vec![2.0, 4.0]);
        assert_eq!(
            Aggregator::MeanVar.aggregate(2, &v).unwrap(),
            vec![2.0, 4.0, 1.0, 1.0]
        );
        assert_eq!(Aggregator::Sum.aggregate(2, &v).unwrap(), vec![4.0, 8.0]);
        assert_eq!(
            Aggregator::MeanVar.aggregate(2, &[vec![7.0, -1.0]]).unwrap(),
            vec![7.0, -1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn empty_multiset_is_zero() {
        let e: Vec<Vec<f64>> = Vec::new();
        assert_eq!(Aggregator::Mean.aggregate(3, &e).unwrap(), vec![0.0; 3]);
        assert_eq!(Aggregator::MeanVar.aggregate(3, &e).unwrap(), vec![0.0; 6]);
    }

    #[test]
    fn width_mismatch() {
        assert!(Aggregator::Mean
            .aggregate(2, &[vec![1.0, 2.0], vec![1.0]])
            .is_err());
    }

    #[test]
    fn empty_segment_gets_zero_and_no_gradient() {
        let x = Matrix::from_rows(&[vec![1.0], vec![5.0]], 1).unwrap();
        let seg = [0, 2];
        let out = Aggregator::MeanVar.segments(&x, &seg, 3);
        assert_eq!(out.row(1), &[0.0, 0.0]);
        let up = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]], 2).unwrap();
        let mut dx = Matrix::<f64>::zeros(2, 1);
        Aggregator::MeanVar.segments_backward(&x, &seg, &out, &up, &mut dx);
        assert_eq!(dx.as_slice(), &[1.0, 1.0]);
    }
}
