//! Domain types: skeleton sequences, the 25-joint body graph, and
//! severity-score records.
//!
//! Coordinates are stored as an `ndarray` tensor of shape `(C, T, J)` —
//! channels (x, y, z in meters), frames, joints — at double precision.
//! All types are immutable after construction and safe to share across
//! threads.

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of joints in the full-body graph.
pub const FULL_BODY_JOINTS: usize = 25;

/// Number of joints in a raw upper-body recording before completion.
pub const UPPER_BODY_JOINTS: usize = 10;

/// Number of coordinate channels (x, y, z).
pub const CHANNELS: usize = 3;

/// Classification label for a subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    /// Typically developing.
    Td,
    /// Autism spectrum disorder.
    Asd,
}

/// The seven augmentation transforms applied to training sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationKind {
    Jitter,
    Scale,
    TranslateLeft,
    TranslateRight,
    FlipHorizontal,
    FlipVertical,
    Slice,
}

impl AugmentationKind {
    /// All seven kinds, in a fixed order.
    pub const ALL: [AugmentationKind; 7] = [
        AugmentationKind::Jitter,
        AugmentationKind::Scale,
        AugmentationKind::TranslateLeft,
        AugmentationKind::TranslateRight,
        AugmentationKind::FlipHorizontal,
        AugmentationKind::FlipVertical,
        AugmentationKind::Slice,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AugmentationKind::Jitter => "jitter",
            AugmentationKind::Scale => "scale",
            AugmentationKind::TranslateLeft => "translate_left",
            AugmentationKind::TranslateRight => "translate_right",
            AugmentationKind::FlipHorizontal => "flip_horizontal",
            AugmentationKind::FlipVertical => "flip_vertical",
            AugmentationKind::Slice => "slice",
        }
    }

    pub fn from_name(name: &str) -> Option<AugmentationKind> {
        AugmentationKind::ALL.iter().copied().find(|k| k.name() == name)
    }
}

/// Whether a sequence is an original recording or an augmented copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Original,
    Augmented(AugmentationKind),
}

impl Provenance {
    pub fn is_original(&self) -> bool {
        matches!(self, Provenance::Original)
    }

    /// Stable string form used by the file formats ("original" or
    /// "augmented:<kind>").
    pub fn as_str(&self) -> String {
        match self {
            Provenance::Original => "original".to_string(),
            Provenance::Augmented(kind) => format!("augmented:{}", kind.name()),
        }
    }

    pub fn parse(s: &str) -> Result<Provenance> {
        if s == "original" {
            return Ok(Provenance::Original);
        }
        if let Some(kind) = s.strip_prefix("augmented:") {
            if let Some(k) = AugmentationKind::from_name(kind) {
                return Ok(Provenance::Augmented(k));
            }
        }
        Err(Error::Validation(format!("unknown provenance '{s}'")))
    }
}

/// Severity-score record attached to a subject: raw total score, the
/// evaluation module used (1 or 2), and the subject's age in years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdosRecord {
    pub score: u32,
    pub module_id: u8,
    pub age_years: u32,
}

impl AdosRecord {
    pub fn new(score: u32, module_id: u8, age_years: u32) -> Result<AdosRecord> {
        let record = AdosRecord {
            score,
            module_id,
            age_years,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        if self.module_id != 1 && self.module_id != 2 {
            return Err(Error::Validation(format!(
                "module id must be 1 or 2, got {}",
                self.module_id
            )));
        }
        if self.age_years < 3 {
            return Err(Error::Validation(format!(
                "age must be at least 3 years, got {}",
                self.age_years
            )));
        }
        Ok(())
    }
}

/// A per-subject time series of 3-D joint coordinates with metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonSequence {
    /// Coordinates, shape `(C, T, J)`, meters.
    pub data: Array3<f64>,
    pub subject_id: String,
    /// Capture frame rate in Hz, when known.
    pub frame_rate: Option<f64>,
    pub label: Option<Label>,
    pub ados: Option<AdosRecord>,
    pub provenance: Provenance,
    /// Optional per-frame eye-gaze vectors (`None` entries are missing
    /// samples), carried alongside raw upper-body recordings.
    pub gaze: Option<Vec<Option<[f64; 3]>>>,
}

impl SkeletonSequence {
    /// Builds a sequence and checks its invariants.
    pub fn new(data: Array3<f64>, subject_id: impl Into<String>) -> Result<SkeletonSequence> {
        let seq = SkeletonSequence {
            data,
            subject_id: subject_id.into(),
            frame_rate: None,
            label: None,
            ados: None,
            provenance: Provenance::Original,
            gaze: None,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn channels(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn frames(&self) -> usize {
        self.data.shape()[1]
    }

    pub fn joints(&self) -> usize {
        self.data.shape()[2]
    }

    /// Checks shape and finiteness invariants: 3 channels, at least one
    /// frame, 10 or 25 joints, every coordinate finite.
    pub fn validate(&self) -> Result<()> {
        if self.channels() != CHANNELS {
            return Err(Error::Validation(format!(
                "sequence '{}': expected {CHANNELS} coordinate channels, got {}",
                self.subject_id,
                self.channels()
            )));
        }
        if self.frames() == 0 {
            return Err(Error::Validation(format!(
                "sequence '{}': at least one frame required",
                self.subject_id
            )));
        }
        let j = self.joints();
        if j != FULL_BODY_JOINTS && j != UPPER_BODY_JOINTS {
            return Err(Error::Validation(format!(
                "sequence '{}': joint count must be {UPPER_BODY_JOINTS} or {FULL_BODY_JOINTS}, got {j}",
                self.subject_id
            )));
        }
        if let Some(record) = &self.ados {
            record.validate()?;
        }
        if !self.data.iter().all(|v| v.is_finite()) {
            return Err(Error::Validation(format!(
                "sequence '{}': non-finite coordinate value",
                self.subject_id
            )));
        }
        if let Some(gaze) = &self.gaze {
            if gaze.len() != self.frames() {
                return Err(Error::Validation(format!(
                    "sequence '{}': gaze length {} does not match frame count {}",
                    self.subject_id,
                    gaze.len(),
                    self.frames()
                )));
            }
        }
        Ok(())
    }

    /// Copies metadata (id, rate, label, score record) onto a new tensor.
    /// Gaze is dropped: it is only meaningful for raw recordings.
    pub fn with_data(&self, data: Array3<f64>) -> SkeletonSequence {
        SkeletonSequence {
            data,
            subject_id: self.subject_id.clone(),
            frame_rate: self.frame_rate,
            label: self.label,
            ados: self.ados,
            provenance: self.provenance,
            gaze: None,
        }
    }
}

/// The 25-joint body graph: joint names, bones, the center (spine) joint,
/// and the mirrored left/right joint groups used by the asymmetry metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonTopology {
    pub joint_names: Vec<String>,
    /// Bone list as joint-index pairs; forms a tree (24 edges, connected).
    pub edges: Vec<(usize, usize)>,
    /// The center joint all angle/distance metrics reference.
    pub spine_index: usize,
    /// Eight left-side joints: shoulder, elbow, wrist, hand, hand tip,
    /// hip, knee, ankle. Position `i` mirrors `right_group[i]`.
    pub left_group: Vec<usize>,
    pub right_group: Vec<usize>,
    /// Joint slot that receives the eye-gaze vector for gaze-augmented
    /// recordings (the neck slot, which is synthesized during upper-body
    /// completion and therefore carries no measured data).
    pub head_gaze_index: usize,
}

impl SkeletonTopology {
    pub fn joint_count(&self) -> usize {
        self.joint_names.len()
    }

    /// Index of a joint by name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.joint_names.iter().position(|n| n == name)
    }

    /// Checks the tree and mirror-group invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.joint_count();
        if self.edges.len() != n - 1 {
            return Err(Error::Validation(format!(
                "topology must have {} edges for {} joints, got {}",
                n - 1,
                n,
                self.edges.len()
            )));
        }
        for &(a, b) in &self.edges {
            if a >= n || b >= n || a == b {
                return Err(Error::Validation(format!("invalid edge ({a}, {b})")));
            }
        }
        // Connectivity via BFS from the spine joint.
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([self.spine_index]);
        seen[self.spine_index] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Validation(
                "topology graph is not connected".to_string(),
            ));
        }
        if self.left_group.len() != self.right_group.len() {
            return Err(Error::Validation(
                "left and right groups must have equal length".to_string(),
            ));
        }
        if self.left_group.iter().any(|i| self.right_group.contains(i)) {
            return Err(Error::Validation(
                "left and right groups must be disjoint".to_string(),
            ));
        }
        Ok(())
    }

    /// Mirrored `(left, right)` joint-index pairs in group order.
    pub fn mirror_pairs(&self) -> Vec<(usize, usize)> {
        self.left_group
            .iter()
            .copied()
            .zip(self.right_group.iter().copied())
            .collect()
    }
}

/// Canonical joint order of the full body graph (Kinect-v2 convention).
///
/// This fixed order defines row/column `i` of every 25x25 matrix the
/// toolkit produces; cross-tool comparisons must use this mapping.
pub const JOINT_NAMES: [&str; FULL_BODY_JOINTS] = [
    "spine_base",     // 0
    "spine_mid",      // 1
    "neck",           // 2
    "head",           // 3
    "shoulder_left",  // 4
    "elbow_left",     // 5
    "wrist_left",     // 6
    "hand_left",      // 7
    "shoulder_right", // 8
    "elbow_right",    // 9
    "wrist_right",    // 10
    "hand_right",     // 11
    "hip_left",       // 12
    "knee_left",      // 13
    "ankle_left",     // 14
    "foot_left",      // 15
    "hip_right",      // 16
    "knee_right",     // 17
    "ankle_right",    // 18
    "foot_right",     // 19
    "spine_shoulder", // 20
    "hand_tip_left",  // 21
    "thumb_left",     // 22
    "hand_tip_right", // 23
    "thumb_right",    // 24
];

/// Joint names of a raw 10-joint upper-body recording, mapped by name to
/// slots of the full-body graph during completion.
pub const UPPER_BODY_NAMES: [&str; UPPER_BODY_JOINTS] = [
    "head",
    "spine_shoulder",
    "spine_mid",
    "spine_base",
    "shoulder_left",
    "elbow_left",
    "wrist_left",
    "shoulder_right",
    "elbow_right",
    "wrist_right",
];

/// Returns the fixed 25-joint body tree with mirrored left/right groups.
pub fn default_topology() -> SkeletonTopology {
    let edges = vec![
        (0, 1),   // spine_base - spine_mid
        (1, 20),  // spine_mid - spine_shoulder
        (20, 2),  // spine_shoulder - neck
        (2, 3),   // neck - head
        (20, 4),  // spine_shoulder - shoulder_left
        (4, 5),
        (5, 6),
        (6, 7),
        (7, 21),  // hand_left - hand_tip_left
        (7, 22),  // hand_left - thumb_left
        (20, 8),  // spine_shoulder - shoulder_right
        (8, 9),
        (9, 10),
        (10, 11),
        (11, 23),
        (11, 24),
        (0, 12),  // spine_base - hip_left
        (12, 13),
        (13, 14),
        (14, 15),
        (0, 16),  // spine_base - hip_right
        (16, 17),
        (17, 18),
        (18, 19),
    ];
    SkeletonTopology {
        joint_names: JOINT_NAMES.iter().map(|s| s.to_string()).collect(),
        edges,
        spine_index: 1,
        left_group: vec![4, 5, 6, 7, 21, 12, 13, 14],
        right_group: vec![8, 9, 10, 11, 23, 16, 17, 18],
        head_gaze_index: 2,
    }
}

/// A collection of sequences sharing one topology.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub sequences: Vec<SkeletonSequence>,
    pub topology: SkeletonTopology,
}

impl Dataset {
    pub fn new(sequences: Vec<SkeletonSequence>) -> Dataset {
        Dataset {
            sequences,
            topology: default_topology(),
        }
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// True when any sequence still carries a raw upper-body joint set.
    pub fn requires_completion(&self) -> bool {
        self.sequences.iter().any(|s| s.joints() != FULL_BODY_JOINTS)
    }

    /// Validates every sequence plus the cross-record invariant that each
    /// augmented sequence has an original with the same subject id.
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        let mut originals = std::collections::HashSet::new();
        for seq in &self.sequences {
            seq.validate()?;
            if seq.provenance.is_original() {
                originals.insert(seq.subject_id.as_str());
            }
        }
        for seq in &self.sequences {
            if !seq.provenance.is_original() && !originals.contains(seq.subject_id.as_str()) {
                return Err(Error::Validation(format!(
                    "augmented sequence '{}' has no original with the same subject id",
                    seq.subject_id
                )));
            }
        }
        Ok(())
    }

    /// Unique subject ids in first-appearance order.
    pub fn subject_ids(&self) -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        let mut ids = Vec::new();
        for seq in &self.sequences {
            if seen.insert(seq.subject_id.clone()) {
                ids.push(seq.subject_id.clone());
            }
        }
        ids
    }
}
