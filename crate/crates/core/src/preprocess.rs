//! Sequence normalization and augmentation.
//!
//! Covers view-invariant alignment (shoulder axis onto x, spine axis onto
//! z, spine joint at the origin), completion of raw 10-joint upper-body
//! recordings to the full 25-joint graph, eye-gaze injection, fixed-length
//! frame regularization, and the seven-fold augmentation suite.

use ndarray::{Array3, ArrayView3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::skeleton::{
    AugmentationKind, Provenance, SkeletonSequence, SkeletonTopology, FULL_BODY_JOINTS,
    UPPER_BODY_JOINTS, UPPER_BODY_NAMES,
};

/// Standard deviation of jitter noise, meters.
pub const JITTER_SIGMA: f64 = 0.01;
/// Uniform scale-factor range.
pub const SCALE_RANGE: (f64, f64) = (0.9, 1.1);
/// Lateral translation step, meters.
pub const TRANSLATE_STEP: f64 = 0.1;
/// Fraction of frames kept by the slice augmentation.
pub const SLICE_FRACTION: f64 = 0.8;

/// Anthropometric offsets used to synthesize missing lower-body joints,
/// as fractions of the measured torso length (spine shoulder to spine
/// base). These are toolkit conventions, documented here and in the CLI
/// docs; the source material does not prescribe a completion formula.
pub mod completion_ratios {
    /// Lateral hip offset from the spine base.
    pub const HIP_LATERAL: f64 = 0.25;
    /// Downward hip offset from the spine base.
    pub const HIP_DROP: f64 = 0.15;
    /// Hip-to-knee length.
    pub const KNEE_DROP: f64 = 0.85;
    /// Knee-to-ankle length.
    pub const ANKLE_DROP: f64 = 0.80;
    /// Ankle-to-foot length.
    pub const FOOT_DROP: f64 = 0.25;
    /// Wrist-to-hand extension along the forearm.
    pub const HAND_EXT: f64 = 0.18;
    /// Hand-to-fingertip extension along the forearm.
    pub const TIP_EXT: f64 = 0.12;
    /// Hand-to-thumb drop along the spine direction.
    pub const THUMB_DROP: f64 = 0.10;
}

/// Knobs for the preprocessing chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// Fixed frame count every sequence is regularized to.
    pub target_frames: usize,
    /// Apply the view-invariant rotation. Off by default: rotating gait
    /// recordings would cancel the slanted-posture signal; turn on for
    /// upper-body therapy recordings.
    pub apply_rotation: bool,
    /// Write available eye-gaze vectors into the gaze joint slot.
    pub gaze_as_joint: bool,
    /// Numerical floor for axis lengths and norms.
    pub epsilon: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            target_frames: 60,
            apply_rotation: false,
            gaze_as_joint: false,
            epsilon: 1e-8,
        }
    }
}

type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale3(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn joint(data: &ArrayView3<f64>, t: usize, j: usize) -> Vec3 {
    [data[[0, t, j]], data[[1, t, j]], data[[2, t, j]]]
}

fn set_joint(data: &mut Array3<f64>, t: usize, j: usize, v: Vec3) {
    data[[0, t, j]] = v[0];
    data[[1, t, j]] = v[1];
    data[[2, t, j]] = v[2];
}

fn required_index(topo: &SkeletonTopology, name: &str) -> Result<usize> {
    topo.index_of(name)
        .ok_or_else(|| Error::Preprocess(format!("topology has no joint named '{name}'")))
}

/// Rotates every frame by one rigid rotation computed from frame 1 so the
/// shoulder axis lands on the x-axis and the spine axis on the z-axis,
/// and translates the spine joint to the origin per frame.
///
/// The spine axis maps onto z exactly; the shoulder axis is
/// orthogonalized against it and lands in the x-z half-plane with
/// positive x (exactly on x for orthogonal inputs). Idempotent, and
/// invariant under rigid motions of the input.
pub fn view_invariant_transform(
    seq: &SkeletonSequence,
    topo: &SkeletonTopology,
    epsilon: f64,
) -> Result<SkeletonSequence> {
    if seq.joints() != FULL_BODY_JOINTS {
        return Err(Error::Preprocess(format!(
            "view-invariant transform expects {FULL_BODY_JOINTS} joints, got {}",
            seq.joints()
        )));
    }
    let left = required_index(topo, "shoulder_left")?;
    let right = required_index(topo, "shoulder_right")?;
    let spine_top = required_index(topo, "spine_shoulder")?;
    let spine_bottom = required_index(topo, "spine_base")?;
    let spine = topo.spine_index;

    let view = seq.data.view();
    let shoulder_axis = sub(joint(&view, 0, left), joint(&view, 0, right));
    let spine_axis = sub(joint(&view, 0, spine_top), joint(&view, 0, spine_bottom));

    let spine_len = norm(spine_axis);
    if spine_len <= epsilon {
        return Err(Error::Preprocess(
            "degenerate spine axis (spine_shoulder coincides with spine_base in frame 1)"
                .to_string(),
        ));
    }
    let z_axis = scale3(spine_axis, 1.0 / spine_len);
    let shoulder_perp = sub(shoulder_axis, scale3(z_axis, dot(shoulder_axis, z_axis)));
    let shoulder_len = norm(shoulder_perp);
    if shoulder_len <= epsilon {
        return Err(Error::Preprocess(
            "degenerate shoulder axis (shoulder_left and shoulder_right collinear with the spine in frame 1)"
                .to_string(),
        ));
    }
    let x_axis = scale3(shoulder_perp, 1.0 / shoulder_len);
    let y_axis = cross(z_axis, x_axis);

    let (t_len, j_len) = (seq.frames(), seq.joints());
    let mut out = Array3::zeros((3, t_len, j_len));
    for t in 0..t_len {
        let origin = joint(&view, t, spine);
        for j in 0..j_len {
            let v = sub(joint(&view, t, j), origin);
            set_joint(
                &mut out,
                t,
                j,
                [dot(x_axis, v), dot(y_axis, v), dot(z_axis, v)],
            );
        }
    }
    Ok(seq.with_data(out))
}

/// Synthesizes the 15 joints missing from a raw 10-joint upper-body
/// recording. The lower body extrapolates along the spine direction with
/// the offsets in [`completion_ratios`], scaled by the measured torso
/// length; mirrored joints are placed symmetrically about the spine axis.
pub fn complete_upper_body(
    seq: &SkeletonSequence,
    topo: &SkeletonTopology,
    epsilon: f64,
) -> Result<SkeletonSequence> {
    if seq.joints() != UPPER_BODY_JOINTS {
        return Err(Error::Preprocess(format!(
            "upper-body completion expects {UPPER_BODY_JOINTS} joints, got {}",
            seq.joints()
        )));
    }
    // Map raw slots to full-body slots by name.
    let mut target = [0usize; UPPER_BODY_JOINTS];
    for (i, name) in UPPER_BODY_NAMES.iter().enumerate() {
        target[i] = required_index(topo, name)?;
    }
    let raw_slot = |name: &str| -> usize {
        UPPER_BODY_NAMES.iter().position(|n| *n == name).expect("known name")
    };
    let head = raw_slot("head");
    let spine_shoulder = raw_slot("spine_shoulder");
    let spine_base = raw_slot("spine_base");
    let shoulder_left = raw_slot("shoulder_left");
    let shoulder_right = raw_slot("shoulder_right");
    let elbow_left = raw_slot("elbow_left");
    let elbow_right = raw_slot("elbow_right");
    let wrist_left = raw_slot("wrist_left");
    let wrist_right = raw_slot("wrist_right");

    use completion_ratios::*;
    let t_len = seq.frames();
    let mut out = Array3::zeros((3, t_len, FULL_BODY_JOINTS));
    let view = seq.data.view();
    for t in 0..t_len {
        for (raw, &full) in target.iter().enumerate() {
            set_joint(&mut out, t, full, joint(&view, t, raw));
        }

        let top = joint(&view, t, spine_shoulder);
        let base = joint(&view, t, spine_base);
        let torso = sub(base, top);
        let torso_len = norm(torso);
        if torso_len <= epsilon {
            return Err(Error::Preprocess(format!(
                "zero torso length in frame {t}: spine_shoulder coincides with spine_base"
            )));
        }
        let down = scale3(torso, 1.0 / torso_len);

        let shoulder_axis = sub(joint(&view, t, shoulder_left), joint(&view, t, shoulder_right));
        let lat_perp = sub(shoulder_axis, scale3(down, dot(shoulder_axis, down)));
        let lat_len = norm(lat_perp);
        if lat_len <= epsilon {
            return Err(Error::Preprocess(format!(
                "degenerate shoulder axis in frame {t}: cannot orient the lower body"
            )));
        }
        let lateral = scale3(lat_perp, 1.0 / lat_len);

        // Neck: midpoint of spine shoulder and head.
        let neck = scale3(add(top, joint(&view, t, head)), 0.5);
        set_joint(&mut out, t, required_index(topo, "neck")?, neck);

        // Hips, symmetric about the spine axis; legs extend along it.
        let l = torso_len;
        for (side, sign) in [("left", 1.0), ("right", -1.0)] {
            let hip = add(base, add(scale3(lateral, sign * HIP_LATERAL * l), scale3(down, HIP_DROP * l)));
            let knee = add(hip, scale3(down, KNEE_DROP * l));
            let ankle = add(knee, scale3(down, ANKLE_DROP * l));
            let foot = add(ankle, scale3(down, FOOT_DROP * l));
            set_joint(&mut out, t, required_index(topo, &format!("hip_{side}"))?, hip);
            set_joint(&mut out, t, required_index(topo, &format!("knee_{side}"))?, knee);
            set_joint(&mut out, t, required_index(topo, &format!("ankle_{side}"))?, ankle);
            set_joint(&mut out, t, required_index(topo, &format!("foot_{side}"))?, foot);
        }

        // Hands extend along the measured forearm.
        for (side, elbow, wrist) in [
            ("left", elbow_left, wrist_left),
            ("right", elbow_right, wrist_right),
        ] {
            let wrist_pos = joint(&view, t, wrist);
            let forearm = sub(wrist_pos, joint(&view, t, elbow));
            let forearm_len = norm(forearm);
            let dir = if forearm_len > epsilon {
                scale3(forearm, 1.0 / forearm_len)
            } else {
                down
            };
            let hand = add(wrist_pos, scale3(dir, HAND_EXT * l));
            let tip = add(hand, scale3(dir, TIP_EXT * l));
            let thumb = add(hand, scale3(down, THUMB_DROP * l));
            set_joint(&mut out, t, required_index(topo, &format!("hand_{side}"))?, hand);
            set_joint(&mut out, t, required_index(topo, &format!("hand_tip_{side}"))?, tip);
            set_joint(&mut out, t, required_index(topo, &format!("thumb_{side}"))?, thumb);
        }
    }
    let mut completed = seq.with_data(out);
    completed.gaze = seq.gaze.clone();
    Ok(completed)
}

/// Writes per-frame eye-gaze vectors into the designated gaze joint slot.
/// Missing entries are replaced with the most recent preceding value; a
/// missing first entry takes the first available value.
pub fn inject_gaze_joint(
    seq: &SkeletonSequence,
    topo: &SkeletonTopology,
    gaze: &[Option<[f64; 3]>],
) -> Result<SkeletonSequence> {
    if seq.joints() != FULL_BODY_JOINTS {
        return Err(Error::Preprocess(format!(
            "gaze injection expects {FULL_BODY_JOINTS} joints, got {}",
            seq.joints()
        )));
    }
    if gaze.len() != seq.frames() {
        return Err(Error::Shape(format!(
            "gaze length {} does not match frame count {}",
            gaze.len(),
            seq.frames()
        )));
    }
    let first = gaze
        .iter()
        .flatten()
        .next()
        .copied()
        .ok_or_else(|| Error::Preprocess("all gaze entries are missing".to_string()))?;

    let mut out = seq.data.clone();
    let slot = topo.head_gaze_index;
    let mut last = first;
    for (t, entry) in gaze.iter().enumerate() {
        if let Some(v) = entry {
            last = *v;
        }
        set_joint(&mut out, t, slot, last);
    }
    let mut injected = seq.with_data(out);
    injected.gaze = None;
    Ok(injected)
}

/// Regularizes a sequence to exactly `target` frames: short sequences are
/// repeated cyclically from the start, long ones truncated.
pub fn regularize_length(seq: &SkeletonSequence, target: usize) -> Result<SkeletonSequence> {
    if target == 0 {
        return Err(Error::Preprocess("target frame count must be >= 1".to_string()));
    }
    let t_len = seq.frames();
    if t_len == target {
        return Ok(seq.clone());
    }
    let (c, _, j) = (seq.channels(), t_len, seq.joints());
    let mut out = Array3::zeros((c, target, j));
    for t in 0..target {
        let src = t % t_len;
        for ci in 0..c {
            for ji in 0..j {
                out[[ci, t, ji]] = seq.data[[ci, src, ji]];
            }
        }
    }
    let mut result = seq.with_data(out);
    if let Some(gaze) = &seq.gaze {
        result.gaze = Some((0..target).map(|t| gaze[t % t_len]).collect());
    }
    Ok(result)
}

/// Multiplies all coordinates by `factor`.
pub fn scale_sequence(seq: &SkeletonSequence, factor: f64) -> SkeletonSequence {
    seq.with_data(seq.data.mapv(|v| v * factor))
}

/// Applies one augmentation, deterministically for a given seed. The
/// output keeps the subject id and carries `Augmented(kind)` provenance.
pub fn augment(
    seq: &SkeletonSequence,
    topo: &SkeletonTopology,
    kind: AugmentationKind,
    seed: u64,
) -> Result<SkeletonSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = match kind {
        AugmentationKind::Jitter => {
            let normal = Normal::new(0.0, JITTER_SIGMA)
                .map_err(|e| Error::Preprocess(format!("jitter noise: {e}")))?;
            seq.with_data(seq.data.mapv(|v| v + normal.sample(&mut rng)))
        }
        AugmentationKind::Scale => {
            let factor = rng.random_range(SCALE_RANGE.0..=SCALE_RANGE.1);
            scale_sequence(seq, factor)
        }
        AugmentationKind::TranslateLeft => translate_x(seq, -TRANSLATE_STEP),
        AugmentationKind::TranslateRight => translate_x(seq, TRANSLATE_STEP),
        AugmentationKind::FlipHorizontal => flip_horizontal(seq, topo),
        AugmentationKind::FlipVertical => {
            let mut data = seq.data.clone();
            for v in data.index_axis_mut(ndarray::Axis(0), 1).iter_mut() {
                *v = -*v;
            }
            seq.with_data(data)
        }
        AugmentationKind::Slice => {
            let t_len = seq.frames();
            let window = ((t_len as f64 * SLICE_FRACTION).floor() as usize).max(1);
            let start = rng.random_range(0..=(t_len - window));
            let cropped = seq.with_data(
                seq.data
                    .slice(ndarray::s![.., start..start + window, ..])
                    .to_owned(),
            );
            regularize_length(&cropped, t_len)?
        }
    };
    out.provenance = Provenance::Augmented(kind);
    Ok(out)
}

/// Produces the full seven-variant augmentation set for one sequence.
/// Per-kind seeds are derived from `base_seed` so the set is reproducible.
pub fn augment_all(
    seq: &SkeletonSequence,
    topo: &SkeletonTopology,
    base_seed: u64,
) -> Result<Vec<SkeletonSequence>> {
    AugmentationKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &kind)| augment(seq, topo, kind, base_seed.wrapping_add(i as u64)))
        .collect()
}

fn translate_x(seq: &SkeletonSequence, delta: f64) -> SkeletonSequence {
    let mut data = seq.data.clone();
    for v in data.index_axis_mut(ndarray::Axis(0), 0).iter_mut() {
        *v += delta;
    }
    seq.with_data(data)
}

fn flip_horizontal(seq: &SkeletonSequence, topo: &SkeletonTopology) -> SkeletonSequence {
    let mut data = seq.data.clone();
    for v in data.index_axis_mut(ndarray::Axis(0), 0).iter_mut() {
        *v = -*v;
    }
    if seq.joints() == topo.joint_count() {
        for (l, r) in topo.mirror_pairs() {
            for c in 0..seq.channels() {
                for t in 0..seq.frames() {
                    let tmp = data[[c, t, l]];
                    data[[c, t, l]] = data[[c, t, r]];
                    data[[c, t, r]] = tmp;
                }
            }
        }
    }
    seq.with_data(data)
}

/// Runs the full preprocessing chain on one sequence: upper-body
/// completion when needed, gaze injection, optional view-invariant
/// rotation, and frame regularization.
pub fn preprocess_sequence(
    seq: &SkeletonSequence,
    topo: &SkeletonTopology,
    config: &PreprocessConfig,
) -> Result<SkeletonSequence> {
    let mut current = if seq.joints() == UPPER_BODY_JOINTS {
        complete_upper_body(seq, topo, config.epsilon)?
    } else {
        seq.clone()
    };
    if config.gaze_as_joint {
        if let Some(gaze) = current.gaze.clone() {
            current = inject_gaze_joint(&current, topo, &gaze)?;
        }
    }
    if config.apply_rotation {
        current = view_invariant_transform(&current, topo, config.epsilon)?;
    }
    current = regularize_length(&current, config.target_frames)?;
    current.gaze = None;
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::default_topology;
    use approx::assert_abs_diff_eq;
    use ndarray::Array3;
    use rand::Rng;

    /// Static full-body pose with distinct, non-degenerate joints.
    fn standing_sequence(frames: usize) -> SkeletonSequence {
        let topo = default_topology();
        let mut data = Array3::zeros((3, frames, 25));
        let pose = crate::assessment::synth::rest_pose();
        for t in 0..frames {
            for j in 0..25 {
                for c in 0..3 {
                    data[[c, t, j]] = pose[j][c];
                }
            }
        }
        let _ = &topo;
        SkeletonSequence::new(data, "pose").unwrap()
    }

    fn apply_rigid(seq: &SkeletonSequence, rot: [[f64; 3]; 3], shift: [f64; 3]) -> SkeletonSequence {
        let mut data = seq.data.clone();
        for t in 0..seq.frames() {
            for j in 0..seq.joints() {
                let v = [seq.data[[0, t, j]], seq.data[[1, t, j]], seq.data[[2, t, j]]];
                for c in 0..3 {
                    data[[c, t, j]] =
                        rot[c][0] * v[0] + rot[c][1] * v[1] + rot[c][2] * v[2] + shift[c];
                }
            }
        }
        seq.with_data(data)
    }

    fn max_abs_diff(a: &SkeletonSequence, b: &SkeletonSequence) -> f64 {
        a.data
            .iter()
            .zip(b.data.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn transform_is_idempotent() {
        let topo = default_topology();
        let seq = standing_sequence(3);
        let once = view_invariant_transform(&seq, &topo, 1e-8).unwrap();
        let twice = view_invariant_transform(&once, &topo, 1e-8).unwrap();
        assert!(max_abs_diff(&once, &twice) < 1e-9);
    }

    #[test]
    fn transform_undoes_z_rotation() {
        let topo = default_topology();
        let seq = standing_sequence(2);
        let aligned = view_invariant_transform(&seq, &topo, 1e-8).unwrap();
        // 90 degrees about z.
        let rot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let rotated = apply_rigid(&aligned, rot, [0.0, 0.0, 0.0]);
        let recovered = view_invariant_transform(&rotated, &topo, 1e-8).unwrap();
        assert!(max_abs_diff(&aligned, &recovered) < 1e-9);
    }

    #[test]
    fn transform_preserves_pairwise_distances() {
        let topo = default_topology();
        let seq = standing_sequence(2);
        // Arbitrary rigid motion: rotation about a skew axis plus shift.
        let (s, c) = (0.6f64, 0.8f64);
        let rot = [[c, -s, 0.0], [s * c, c * c, -s], [s * s, s * c, c]];
        // Orthonormalize columns via Gram-Schmidt to get a proper rotation.
        let rot = orthonormalize(rot);
        let moved = apply_rigid(&seq, rot, [0.4, -1.2, 0.7]);
        let out = view_invariant_transform(&moved, &topo, 1e-8).unwrap();
        for t in 0..seq.frames() {
            for a in 0..25 {
                for b in (a + 1)..25 {
                    let d_in: f64 = (0..3)
                        .map(|ch| (moved.data[[ch, t, a]] - moved.data[[ch, t, b]]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    let d_out: f64 = (0..3)
                        .map(|ch| (out.data[[ch, t, a]] - out.data[[ch, t, b]]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    assert_abs_diff_eq!(d_in, d_out, epsilon = 1e-9 * d_in.max(1.0));
                }
            }
        }
    }

    fn orthonormalize(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let col = |m: &[[f64; 3]; 3], j: usize| [m[0][j], m[1][j], m[2][j]];
        let mut a = col(&m, 0);
        let an = norm(a);
        a = scale3(a, 1.0 / an);
        let mut b = col(&m, 1);
        b = sub(b, scale3(a, dot(a, b)));
        let bn = norm(b);
        b = scale3(b, 1.0 / bn);
        let c = cross(a, b);
        [[a[0], b[0], c[0]], [a[1], b[1], c[1]], [a[2], b[2], c[2]]]
    }

    #[test]
    fn transform_rejects_degenerate_axes() {
        let topo = default_topology();
        let seq = SkeletonSequence::new(Array3::zeros((3, 2, 25)), "flat").unwrap();
        let err = view_invariant_transform(&seq, &topo, 1e-8).unwrap_err();
        assert!(err.to_string().contains("spine"));
    }

    fn upper_body_t_pose(frames: usize) -> SkeletonSequence {
        // Order follows UPPER_BODY_NAMES.
        let joints: [[f64; 3]; 10] = [
            [0.0, 0.0, 1.45],   // head
            [0.0, 0.0, 1.25],   // spine_shoulder
            [0.0, 0.0, 1.00],   // spine_mid
            [0.0, 0.0, 0.75],   // spine_base (torso length 0.5)
            [0.20, 0.0, 1.25],  // shoulder_left
            [0.45, 0.0, 1.25],  // elbow_left
            [0.70, 0.0, 1.25],  // wrist_left
            [-0.20, 0.0, 1.25], // shoulder_right
            [-0.45, 0.0, 1.25], // elbow_right
            [-0.70, 0.0, 1.25], // wrist_right
        ];
        let mut data = Array3::zeros((3, frames, 10));
        for t in 0..frames {
            for (j, p) in joints.iter().enumerate() {
                for c in 0..3 {
                    data[[c, t, j]] = p[c];
                }
            }
        }
        SkeletonSequence::new(data, "dream").unwrap()
    }

    #[test]
    fn completion_places_hips_symmetrically() {
        let topo = default_topology();
        let seq = upper_body_t_pose(2);
        let full = complete_upper_body(&seq, &topo, 1e-8).unwrap();
        assert_eq!(full.joints(), 25);
        let hip_l = topo.index_of("hip_left").unwrap();
        let hip_r = topo.index_of("hip_right").unwrap();
        for t in 0..2 {
            assert_abs_diff_eq!(
                full.data[[0, t, hip_l]],
                -full.data[[0, t, hip_r]],
                epsilon = 1e-9
            );
            assert_abs_diff_eq!(full.data[[2, t, hip_l]], full.data[[2, t, hip_r]], epsilon = 1e-9);
            // Lower joints extend below the spine base (-z direction).
            for name in ["knee_left", "ankle_left", "foot_left", "knee_right"] {
                let idx = topo.index_of(name).unwrap();
                assert!(full.data[[2, t, idx]] < 0.75);
            }
        }
    }

    #[test]
    fn completion_uses_documented_hip_ratio() {
        let topo = default_topology();
        let seq = upper_body_t_pose(1);
        let full = complete_upper_body(&seq, &topo, 1e-8).unwrap();
        let hip_l = topo.index_of("hip_left").unwrap();
        // Torso length is 0.5 m; lateral hip offset is 0.5 * HIP_LATERAL.
        assert_abs_diff_eq!(
            full.data[[0, 0, hip_l]],
            0.5 * completion_ratios::HIP_LATERAL,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            full.data[[2, 0, hip_l]],
            0.75 - 0.5 * completion_ratios::HIP_DROP,
            epsilon = 1e-12
        );
    }

    #[test]
    fn completion_rejects_wrong_joint_count() {
        let topo = default_topology();
        let seq = SkeletonSequence {
            data: Array3::zeros((3, 1, 9)),
            subject_id: "bad".to_string(),
            frame_rate: None,
            label: None,
            ados: None,
            provenance: Provenance::Original,
            gaze: None,
        };
        assert!(complete_upper_body(&seq, &topo, 1e-8).is_err());
    }

    #[test]
    fn completion_rejects_zero_torso() {
        let topo = default_topology();
        let mut seq = upper_body_t_pose(1);
        // Collapse spine_base onto spine_shoulder.
        for c in 0..3 {
            let v = seq.data[[c, 0, 1]];
            seq.data[[c, 0, 3]] = v;
        }
        let err = complete_upper_body(&seq, &topo, 1e-8).unwrap_err();
        assert!(err.to_string().contains("torso"));
    }

    #[test]
    fn gaze_fill_uses_preceding_values() {
        let topo = default_topology();
        let seq = standing_sequence(3);
        let g1 = [0.1, 0.2, 0.3];
        let g3 = [0.4, 0.5, 0.6];
        let out = inject_gaze_joint(&seq, &topo, &[Some(g1), None, Some(g3)]).unwrap();
        let slot = topo.head_gaze_index;
        for c in 0..3 {
            assert_eq!(out.data[[c, 0, slot]], g1[c]);
            assert_eq!(out.data[[c, 1, slot]], g1[c]);
            assert_eq!(out.data[[c, 2, slot]], g3[c]);
        }
    }

    #[test]
    fn gaze_backfills_leading_gap() {
        let topo = default_topology();
        let seq = standing_sequence(2);
        let g2 = [0.7, 0.8, 0.9];
        let out = inject_gaze_joint(&seq, &topo, &[None, Some(g2)]).unwrap();
        let slot = topo.head_gaze_index;
        for c in 0..3 {
            assert_eq!(out.data[[c, 0, slot]], g2[c]);
            assert_eq!(out.data[[c, 1, slot]], g2[c]);
        }
    }

    #[test]
    fn gaze_rejects_all_missing() {
        let topo = default_topology();
        let seq = standing_sequence(2);
        assert!(inject_gaze_joint(&seq, &topo, &[None, None]).is_err());
    }

    #[test]
    fn regularize_repeats_cyclically() {
        let mut data = Array3::zeros((3, 2, 25));
        for j in 0..25 {
            data[[0, 0, j]] = 1.0;
            data[[0, 1, j]] = 2.0;
        }
        let seq = SkeletonSequence::new(data, "ab").unwrap();
        let out = regularize_length(&seq, 5).unwrap();
        let values: Vec<f64> = (0..5).map(|t| out.data[[0, t, 0]]).collect();
        assert_eq!(values, vec![1.0, 2.0, 1.0, 2.0, 1.0]);
    }

    #[test]
    fn regularize_truncates() {
        let mut data = Array3::zeros((3, 10, 25));
        for t in 0..10 {
            data[[0, t, 0]] = t as f64;
        }
        let seq = SkeletonSequence::new(data, "long").unwrap();
        let out = regularize_length(&seq, 4).unwrap();
        assert_eq!(out.frames(), 4);
        for t in 0..4 {
            assert_eq!(out.data[[0, t, 0]], t as f64);
        }
    }

    #[test]
    fn flip_horizontal_is_an_involution() {
        let topo = default_topology();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut data = Array3::zeros((3, 4, 25));
        for v in data.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let seq = SkeletonSequence::new(data, "s").unwrap();
        let once = augment(&seq, &topo, AugmentationKind::FlipHorizontal, 0).unwrap();
        let twice = augment(&once, &topo, AugmentationKind::FlipHorizontal, 0).unwrap();
        assert!(max_abs_diff(&seq, &twice) < 1e-12);
    }

    #[test]
    fn jitter_is_deterministic_per_seed() {
        let topo = default_topology();
        let seq = standing_sequence(4);
        let a = augment(&seq, &topo, AugmentationKind::Jitter, 42).unwrap();
        let b = augment(&seq, &topo, AugmentationKind::Jitter, 42).unwrap();
        assert_eq!(a.data, b.data);
        let c = augment(&seq, &topo, AugmentationKind::Jitter, 43).unwrap();
        assert!(max_abs_diff(&a, &c) > 0.0);
    }

    #[test]
    fn augment_all_yields_seven_variants() {
        let topo = default_topology();
        let seq = standing_sequence(5);
        let variants = augment_all(&seq, &topo, 7).unwrap();
        assert_eq!(variants.len(), 7);
        for v in &variants {
            assert_eq!(v.subject_id, seq.subject_id);
            assert_eq!(v.frames(), seq.frames());
            assert_eq!(v.joints(), seq.joints());
            assert!(!v.provenance.is_original());
        }
    }

    #[test]
    fn scale_round_trip_is_identity() {
        let seq = standing_sequence(3);
        let f = 1.07;
        let back = scale_sequence(&scale_sequence(&seq, f), 1.0 / f);
        assert!(max_abs_diff(&seq, &back) < 1e-9);
    }

    #[test]
    fn translations_cancel() {
        let topo = default_topology();
        let seq = standing_sequence(3);
        let left = augment(&seq, &topo, AugmentationKind::TranslateLeft, 0).unwrap();
        let back = augment(&left, &topo, AugmentationKind::TranslateRight, 0).unwrap();
        assert!(max_abs_diff(&seq, &back) < 1e-12);
    }
}
