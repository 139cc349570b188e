/*
Copyright 2026 The tcbirrt Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
//! CSV and JSON artifacts: trials, success-rate curves and path files.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use tcbirrt_core::kinematics::JointVector;
use tcbirrt_core::planner::{ObjectPoses, PlanResult, Segment, SegmentKind};
use tcbirrt_core::se3::Pose6;
use thiserror::Error;

use crate::metrics::{MetricsReport, TrialRecord};

/// Exact header line of `trials.csv`.
pub const TRIALS_HEADER: &str = "task_id,success,time_s,iterations,path_len_rad,regrasp";

/// Path file format version.
pub const PATH_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExportError + '_ {
    move |source| ExportError::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> ExportError + '_ {
    move |source| ExportError::Json {
        path: path.display().to_string(),
        source,
    }
}

/// Appends trial rows to `trials.csv`, flushing after each one.
pub struct TrialWriter {
    path: std::path::PathBuf,
    writer: csv::Writer<File>,
}

impl TrialWriter {
    pub fn create(path: &Path) -> Result<Self, ExportError> {
        let writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
        Ok(Self {
            path: path.to_path_buf(),
            writer,
        })
    }

    pub fn write(&mut self, record: &TrialRecord) -> Result<(), ExportError> {
        self.writer.serialize(record).map_err(csv_err(&self.path))?;
        self.writer.flush().map_err(io_err(&self.path))
    }
}

pub fn write_trials_csv(path: &Path, records: &[TrialRecord]) -> Result<(), ExportError> {
    let mut w = TrialWriter::create(path)?;
    if records.is_empty() {
        let mut f = File::create(path).map_err(io_err(path))?;
        return writeln!(f, "{TRIALS_HEADER}").map_err(io_err(path));
    }
    records.iter().try_for_each(|r| w.write(r))
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRecord>, ExportError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    reader.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

/// Writes `t,p` rows of a success-rate curve.
pub fn write_curve_csv(path: &Path, curve: &[(f64, f64)]) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["t", "p"]).map_err(csv_err(path))?;
    for (t, p) in curve {
        w.serialize((t, p)).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_report(path: &Path, report: &MetricsReport) -> Result<(), ExportError> {
    let mut text = serde_json::to_string_pretty(report).map_err(json_err(path))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKindJson {
    Transport,
    Regrasp,
}

/// Object poses of a segment: one per state, or a single held pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObjectPoseJson {
    PerState(Vec<[f64; 6]>),
    Held([f64; 6]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSegment {
    pub kind: SegmentKindJson,
    pub joints: Vec<Vec<f64>>,
    pub object_pose: ObjectPoseJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathMetadata {
    pub version: u32,
    pub generator: String,
    /// Hex SHA-256 of the scene file the plan was made in.
    pub scene_sha256: String,
    pub seed: u64,
    #[serde(default)]
    pub task_id: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    pub metadata: PathMetadata,
    pub segments: Vec<PathSegment>,
}

impl PathFile {
    pub fn from_plan(plan: &PlanResult, scene_sha256: &str, seed: u64, task_id: Option<usize>) -> Self {
        let segments = plan
            .segments
            .iter()
            .map(|s| PathSegment {
                kind: match s.kind {
                    SegmentKind::Transport => SegmentKindJson::Transport,
                    SegmentKind::Regrasp => SegmentKindJson::Regrasp,
                },
                joints: s.joints.iter().map(|q| q.0.clone()).collect(),
                object_pose: match &s.object_poses {
                    ObjectPoses::PerState(p) => ObjectPoseJson::PerState(p.iter().map(Pose6::to_array).collect()),
                    ObjectPoses::Held(p) => ObjectPoseJson::Held(p.to_array()),
                },
            })
            .collect();
        Self {
            metadata: PathMetadata {
                version: PATH_FORMAT_VERSION,
                generator: format!("tcbirrt {}", env!("CARGO_PKG_VERSION")),
                scene_sha256: scene_sha256.to_owned(),
                seed,
                task_id,
            },
            segments,
        }
    }

    /// Planner segments described by this file.
    pub fn segments(&self) -> Vec<Segment> {
        self.segments
            .iter()
            .map(|s| Segment {
                kind: match s.kind {
                    SegmentKindJson::Transport => SegmentKind::Transport,
                    SegmentKindJson::Regrasp => SegmentKind::Regrasp,
                },
                joints: s.joints.iter().map(|q| JointVector(q.clone())).collect(),
                object_poses: match &s.object_pose {
                    ObjectPoseJson::PerState(p) => ObjectPoses::PerState(p.iter().map(|a| Pose6::from_array(*a)).collect()),
                    ObjectPoseJson::Held(p) => ObjectPoses::Held(Pose6::from_array(*p)),
                },
            })
            .collect()
    }
}

pub fn write_path_file(path: &Path, file: &PathFile) -> Result<(), ExportError> {
    let f = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, file).map_err(json_err(path))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_path_file(path: &Path) -> Result<PathFile, ExportError> {
    let f = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(BufReader::new(f)).map_err(json_err(path))
}

/// File name of a benchmark trial's path file.
pub fn path_file_name(task_id: usize) -> String {
    format!("path_{task_id:04}.json")
}
