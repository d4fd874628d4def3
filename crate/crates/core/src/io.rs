//! Dataset file formats.
//!
//! Two on-disk representations, both lossless for double-precision
//! coordinates:
//!
//! - **JSON**: one object `{"topology": "kinect25"|"dream10", "sequences":
//!   [...]}` where each sequence holds `subject_id`, `label` (`"TD"`,
//!   `"ASD"` or `null`), `ados` (`{"score", "module", "age"}` or `null`),
//!   `provenance`, optional `frame_rate`, optional per-frame `gaze`
//!   entries (`[x, y, z]` or `null`), and `frames` as a `T x J x 3`
//!   nested array.
//! - **CSV**: long-form rows `subject_id,frame,joint,x,y,z` plus a JSON
//!   sidecar at `<path>.meta.json` holding the topology marker and the
//!   ordered per-record metadata (record boundaries, labels, scores).
//!
//! Worked two-frame examples of both formats live in `docs/formats.md`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{
    AdosRecord, Dataset, Label, Provenance, SkeletonSequence, FULL_BODY_JOINTS, UPPER_BODY_JOINTS,
};

/// Supported dataset file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Json,
    Csv,
}

impl FileFormat {
    pub fn parse(s: &str) -> Result<FileFormat> {
        match s {
            "json" => Ok(FileFormat::Json),
            "csv" => Ok(FileFormat::Csv),
            other => Err(Error::Config(format!("unknown file format '{other}'"))),
        }
    }
}

const TOPOLOGY_FULL: &str = "kinect25";
const TOPOLOGY_UPPER: &str = "dream10";

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    topology: String,
    sequences: Vec<SequenceRecord>,
}

#[derive(Serialize, Deserialize)]
struct SequenceRecord {
    subject_id: String,
    label: Option<String>,
    ados: Option<AdosFileRecord>,
    provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame_rate: Option<f64>,
    /// `T x J x 3` coordinate array.
    frames: Vec<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gaze: Option<Vec<Option<[f64; 3]>>>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
struct AdosFileRecord {
    score: u32,
    module: u8,
    age: u32,
}

impl From<AdosRecord> for AdosFileRecord {
    fn from(r: AdosRecord) -> Self {
        AdosFileRecord {
            score: r.score,
            module: r.module_id,
            age: r.age_years,
        }
    }
}

fn label_to_string(label: Option<Label>) -> Option<String> {
    label.map(|l| match l {
        Label::Td => "TD".to_string(),
        Label::Asd => "ASD".to_string(),
    })
}

fn label_from_string(s: &Option<String>, record: &str) -> Result<Option<Label>> {
    match s.as_deref() {
        None => Ok(None),
        Some("TD") => Ok(Some(Label::Td)),
        Some("ASD") => Ok(Some(Label::Asd)),
        Some(other) => Err(Error::Validation(format!(
            "record '{record}': unknown label '{other}'"
        ))),
    }
}

fn ados_from_file(r: Option<AdosFileRecord>) -> Result<Option<AdosRecord>> {
    match r {
        None => Ok(None),
        Some(a) => Ok(Some(AdosRecord::new(a.score, a.module, a.age)?)),
    }
}

/// Topology marker for a set of sequences; mixed joint counts are invalid.
fn topology_marker(ds: &Dataset) -> Result<&'static str> {
    let mut joints = None;
    for seq in &ds.sequences {
        match joints {
            None => joints = Some(seq.joints()),
            Some(j) if j != seq.joints() => {
                return Err(Error::Validation(
                    "dataset mixes joint counts; complete upper-body records first".to_string(),
                ))
            }
            _ => {}
        }
    }
    Ok(match joints {
        Some(UPPER_BODY_JOINTS) => TOPOLOGY_UPPER,
        _ => TOPOLOGY_FULL,
    })
}

fn sequence_to_record(seq: &SkeletonSequence) -> SequenceRecord {
    let (t, j) = (seq.frames(), seq.joints());
    let mut frames = Vec::with_capacity(t);
    for ti in 0..t {
        let mut row = Vec::with_capacity(j);
        for ji in 0..j {
            row.push([
                seq.data[[0, ti, ji]],
                seq.data[[1, ti, ji]],
                seq.data[[2, ti, ji]],
            ]);
        }
        frames.push(row);
    }
    SequenceRecord {
        subject_id: seq.subject_id.clone(),
        label: label_to_string(seq.label),
        ados: seq.ados.map(AdosFileRecord::from),
        provenance: seq.provenance.as_str(),
        frame_rate: seq.frame_rate,
        frames,
        gaze: seq.gaze.clone(),
    }
}

fn record_to_sequence(rec: SequenceRecord, index: usize, path: &str) -> Result<SkeletonSequence> {
    let t = rec.frames.len();
    if t == 0 {
        return Err(Error::Parse {
            path: path.to_string(),
            location: format!("record {index} ('{}')", rec.subject_id),
            message: "sequence has no frames".to_string(),
        });
    }
    let j = rec.frames[0].len();
    let mut data = Array3::zeros((3, t, j));
    for (ti, frame) in rec.frames.iter().enumerate() {
        if frame.len() != j {
            return Err(Error::Parse {
                path: path.to_string(),
                location: format!("record {index} ('{}'), frame {ti}", rec.subject_id),
                message: format!("expected {j} joints, found {}", frame.len()),
            });
        }
        for (ji, xyz) in frame.iter().enumerate() {
            for c in 0..3 {
                data[[c, ti, ji]] = xyz[c];
            }
        }
    }
    let seq = SkeletonSequence {
        data,
        subject_id: rec.subject_id.clone(),
        frame_rate: rec.frame_rate,
        label: label_from_string(&rec.label, &rec.subject_id)?,
        ados: ados_from_file(rec.ados)?,
        provenance: Provenance::parse(&rec.provenance)?,
        gaze: rec.gaze,
    };
    seq.validate()?;
    Ok(seq)
}

/// Loads a dataset from `path` in the given format.
pub fn load_dataset(path: impl AsRef<Path>, format: FileFormat) -> Result<Dataset> {
    match format {
        FileFormat::Json => load_json(path.as_ref()),
        FileFormat::Csv => load_csv(path.as_ref()),
    }
}

/// Saves a dataset to `path` in the given format. Loading the file back
/// reproduces the dataset exactly (full double precision).
pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>, format: FileFormat) -> Result<()> {
    ds.validate()?;
    match format {
        FileFormat::Json => save_json(ds, path.as_ref()),
        FileFormat::Csv => save_csv(ds, path.as_ref()),
    }
}

fn load_json(path: &Path) -> Result<Dataset> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let parsed: DatasetFile = serde_json::from_reader(reader).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    if parsed.topology != TOPOLOGY_FULL && parsed.topology != TOPOLOGY_UPPER {
        return Err(Error::Parse {
            path: path.display().to_string(),
            location: "topology".to_string(),
            message: format!("unknown topology marker '{}'", parsed.topology),
        });
    }
    let expected_joints = if parsed.topology == TOPOLOGY_UPPER {
        UPPER_BODY_JOINTS
    } else {
        FULL_BODY_JOINTS
    };
    let path_str = path.display().to_string();
    let mut sequences = Vec::with_capacity(parsed.sequences.len());
    for (i, rec) in parsed.sequences.into_iter().enumerate() {
        let seq = record_to_sequence(rec, i, &path_str)?;
        if seq.joints() != expected_joints {
            return Err(Error::Validation(format!(
                "record {i} ('{}'): topology '{}' requires {expected_joints} joints, got {}",
                seq.subject_id,
                parsed.topology,
                seq.joints()
            )));
        }
        sequences.push(seq);
    }
    let ds = Dataset::new(sequences);
    ds.validate()?;
    Ok(ds)
}

fn save_json(ds: &Dataset, path: &Path) -> Result<()> {
    let file = DatasetFile {
        topology: topology_marker(ds)?.to_string(),
        sequences: ds.sequences.iter().map(sequence_to_record).collect(),
    };
    let out = File::create(path)?;
    let mut writer = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut writer, &file)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CsvSidecar {
    topology: String,
    records: Vec<CsvRecordMeta>,
}

#[derive(Serialize, Deserialize)]
struct CsvRecordMeta {
    subject_id: String,
    frames: usize,
    joints: usize,
    label: Option<String>,
    ados: Option<AdosFileRecord>,
    provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gaze: Option<Vec<Option<[f64; 3]>>>,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".meta.json");
    std::path::PathBuf::from(name)
}

fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["subject_id", "frame", "joint", "x", "y", "z"])?;
    let mut records = Vec::with_capacity(ds.len());
    for seq in &ds.sequences {
        for t in 0..seq.frames() {
            for j in 0..seq.joints() {
                writer.write_record([
                    seq.subject_id.as_str(),
                    &t.to_string(),
                    &j.to_string(),
                    &format!("{}", seq.data[[0, t, j]]),
                    &format!("{}", seq.data[[1, t, j]]),
                    &format!("{}", seq.data[[2, t, j]]),
                ])?;
            }
        }
        records.push(CsvRecordMeta {
            subject_id: seq.subject_id.clone(),
            frames: seq.frames(),
            joints: seq.joints(),
            label: label_to_string(seq.label),
            ados: seq.ados.map(AdosFileRecord::from),
            provenance: seq.provenance.as_str(),
            frame_rate: seq.frame_rate,
            gaze: seq.gaze.clone(),
        });
    }
    writer.flush()?;
    let sidecar = CsvSidecar {
        topology: topology_marker(ds)?.to_string(),
        records,
    };
    let out = File::create(sidecar_path(path))?;
    let mut w = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut w, &sidecar)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn load_csv(path: &Path) -> Result<Dataset> {
    let sidecar_file = sidecar_path(path);
    let sidecar: CsvSidecar = {
        let f = File::open(&sidecar_file).map_err(|e| Error::Parse {
            path: sidecar_file.display().to_string(),
            location: "sidecar".to_string(),
            message: format!("cannot open metadata sidecar: {e}"),
        })?;
        serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::Parse {
            path: sidecar_file.display().to_string(),
            location: format!("line {}", e.line()),
            message: e.to_string(),
        })?
    };

    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut rows = reader.records();
    let mut line = 1usize; // header consumed
    let mut sequences = Vec::with_capacity(sidecar.records.len());

    for (index, meta) in sidecar.records.into_iter().enumerate() {
        let mut data = Array3::zeros((3, meta.frames, meta.joints));
        for t in 0..meta.frames {
            for j in 0..meta.joints {
                line += 1;
                let row = rows.next().ok_or_else(|| Error::Parse {
                    path: path_str.clone(),
                    location: format!("line {line}"),
                    message: format!(
                        "unexpected end of file; record {index} ('{}') expects {} rows",
                        meta.subject_id,
                        meta.frames * meta.joints
                    ),
                })??;
                if row.len() != 6 {
                    return Err(Error::Parse {
                        path: path_str.clone(),
                        location: format!("line {line}"),
                        message: format!("expected 6 columns, found {}", row.len()),
                    });
                }
                if &row[0] != meta.subject_id.as_str() {
                    return Err(Error::Parse {
                        path: path_str.clone(),
                        location: format!("line {line}"),
                        message: format!(
                            "subject '{}' does not match sidecar record '{}'",
                            &row[0], meta.subject_id
                        ),
                    });
                }
                let parse_num = |field: &str, name: &str| -> Result<f64> {
                    field.trim().parse::<f64>().map_err(|_| Error::Parse {
                        path: path_str.clone(),
                        location: format!("line {line}"),
                        message: format!("cannot parse {name} value '{field}'"),
                    })
                };
                let ft = parse_num(&row[1], "frame")? as usize;
                let fj = parse_num(&row[2], "joint")? as usize;
                if ft != t || fj != j {
                    return Err(Error::Parse {
                        path: path_str.clone(),
                        location: format!("line {line}"),
                        message: format!(
                            "rows must be ordered frame-major; expected ({t}, {j}), found ({ft}, {fj})"
                        ),
                    });
                }
                data[[0, t, j]] = parse_num(&row[3], "x")?;
                data[[1, t, j]] = parse_num(&row[4], "y")?;
                data[[2, t, j]] = parse_num(&row[5], "z")?;
            }
        }
        let seq = SkeletonSequence {
            data,
            subject_id: meta.subject_id.clone(),
            frame_rate: meta.frame_rate,
            label: label_from_string(&meta.label, &meta.subject_id)?,
            ados: ados_from_file(meta.ados)?,
            provenance: Provenance::parse(&meta.provenance)?,
            gaze: meta.gaze,
        };
        seq.validate()?;
        sequences.push(seq);
    }
    let ds = Dataset::new(sequences);
    ds.validate()?;
    Ok(ds)
}
