//! Pairwise joint-angle features.
//!
//! The skeleton stream is L2-normalized per channel over the frame
//! dimension, every joint pair's normalized trajectories are compared by
//! dot product to build a symmetric 25x25 cosine matrix, and that matrix
//! is multiplied into the raw stream over the joint dimension. The
//! embedding amplifies postural deviations (slant, asymmetry) before the
//! graph encoder sees the data.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::skeleton::SkeletonSequence;

/// Numerical floor applied to frame-vector norms.
pub const NORM_EPSILON: f64 = 1e-8;

/// Symmetric matrix of pairwise joint-trajectory cosines.
///
/// Entry `(i, j)` is the mean over channels of the per-channel dot
/// product of the frame-normalized trajectories of joints `i` and `j`.
/// The diagonal is 1 for every joint with nonzero motion energy;
/// all-zero joints produce zero rows instead of NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleMatrix {
    pub values: Array2<f64>,
}

impl AngleMatrix {
    pub fn identity(n: usize) -> AngleMatrix {
        AngleMatrix {
            values: Array2::eye(n),
        }
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    /// Checks symmetry, boundedness, and the unit diagonal (degenerate
    /// joints, marked by an all-zero row, are exempt).
    pub fn validate(&self, tolerance: f64) -> Result<()> {
        let n = self.size();
        if self.values.ncols() != n {
            return Err(Error::Shape("angle matrix must be square".to_string()));
        }
        for i in 0..n {
            for j in 0..n {
                let v = self.values[[i, j]];
                if !v.is_finite() {
                    return Err(Error::Validation(format!("non-finite entry at ({i}, {j})")));
                }
                if v.abs() > 1.0 + tolerance {
                    return Err(Error::Validation(format!(
                        "entry ({i}, {j}) = {v} outside [-1, 1]"
                    )));
                }
                if (v - self.values[[j, i]]).abs() > tolerance {
                    return Err(Error::Validation(format!(
                        "asymmetric entries at ({i}, {j})"
                    )));
                }
            }
            let degenerate = (0..n).all(|j| self.values[[i, j]].abs() <= tolerance);
            if !degenerate && (self.values[[i, i]] - 1.0).abs() > tolerance {
                return Err(Error::Validation(format!(
                    "diagonal entry {i} = {} is not 1",
                    self.values[[i, i]]
                )));
            }
        }
        Ok(())
    }
}

/// L2-normalizes each (channel, joint) trajectory over the frame
/// dimension. Norms below `epsilon` are floored at `epsilon`, so all-zero
/// joints stay zero instead of producing NaN.
pub fn normalize_over_frames(data: &Array3<f64>, epsilon: f64) -> Array3<f64> {
    let (c, t, j) = data.dim();
    let mut out = Array3::zeros((c, t, j));
    for ci in 0..c {
        for ji in 0..j {
            let mut sum_sq = 0.0;
            for ti in 0..t {
                let v = data[[ci, ti, ji]];
                sum_sq += v * v;
            }
            let norm = sum_sq.sqrt().max(epsilon);
            for ti in 0..t {
                out[[ci, ti, ji]] = data[[ci, ti, ji]] / norm;
            }
        }
    }
    out
}

/// Builds the pairwise cosine matrix from a frame-normalized stream.
/// Each entry is computed once and mirrored, so symmetry is exact.
pub fn angle_matrix(normalized: &Array3<f64>) -> AngleMatrix {
    let (c, t, j) = normalized.dim();
    let mut values = Array2::zeros((j, j));
    for a in 0..j {
        for b in a..j {
            let mut acc = 0.0;
            for ci in 0..c {
                for ti in 0..t {
                    acc += normalized[[ci, ti, a]] * normalized[[ci, ti, b]];
                }
            }
            let v = acc / c as f64;
            values[[a, b]] = v;
            values[[b, a]] = v;
        }
    }
    AngleMatrix { values }
}

/// Multiplies the angle matrix into the stream over the joint dimension:
/// `out[c, t, i] = sum_j X[c, t, j] * am[j, i]`. Metadata is preserved.
pub fn embed_angles(seq: &SkeletonSequence, am: &AngleMatrix) -> Result<SkeletonSequence> {
    let (c, t, j) = seq.data.dim();
    if am.size() != j {
        return Err(Error::Shape(format!(
            "angle matrix is {}x{} but the sequence has {j} joints",
            am.size(),
            am.size()
        )));
    }
    let mut out = Array3::zeros((c, t, j));
    for ci in 0..c {
        for ti in 0..t {
            for i in 0..j {
                let mut acc = 0.0;
                for jj in 0..j {
                    acc += seq.data[[ci, ti, jj]] * am.values[[jj, i]];
                }
                out[[ci, ti, i]] = acc;
            }
        }
    }
    Ok(seq.with_data(out))
}

/// Full per-sequence pipeline: the matrix is computed from the sequence's
/// own frame-normalized stream and applied to the raw stream.
pub fn angle_pipeline(seq: &SkeletonSequence) -> Result<SkeletonSequence> {
    let normalized = normalize_over_frames(&seq.data, NORM_EPSILON);
    let am = angle_matrix(&normalized);
    embed_angles(seq, &am)
}

/// Convenience: the matrix alone, from the raw sequence.
pub fn angle_matrix_of(seq: &SkeletonSequence) -> AngleMatrix {
    angle_matrix(&normalize_over_frames(&seq.data, NORM_EPSILON))
}
