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
//! JSON scene files: robot, obstacles, object, nominal poses and planner
//! settings. Angles are radians, lengths meters.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tcbirrt_core::collision::{Body, RobotGeometry, Shape, WorldModel};
use tcbirrt_core::kinematics::{DhRow, DualArmSystem, IkParams, JointVector, ManipulatorModel, ModelError};
use tcbirrt_core::planner::{PlannerParams, RegraspMode, RegraspParams};
use tcbirrt_core::se3::{Pose6, RotationMatrix, Transform, Vec3, Vec6};
use thiserror::Error;

/// Position plus roll/pitch/yaw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frame {
    pub position: [f64; 3],
    pub rpy: [f64; 3],
}

impl Frame {
    pub fn to_transform(&self) -> Transform {
        Transform::new(
            RotationMatrix::from_euler(self.rpy[0], self.rpy[1], self.rpy[2]),
            Vec3::from(self.position),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DhSpec {
    pub theta_offset: f64,
    pub alpha: f64,
    pub d: f64,
    pub a: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub half_extents: [f64; 3],
    pub frame: Frame,
}

impl BoxSpec {
    pub fn to_shape(&self) -> Shape {
        Shape::cuboid(Vec3::from(self.half_extents), self.frame.to_transform())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    pub dh: Vec<DhSpec>,
    pub limits: Vec<[f64; 2]>,
    pub base: Frame,
    pub link_radii: Vec<f64>,
    /// Pedestal under the base, in the world frame.
    #[serde(default)]
    pub mount: Option<BoxSpec>,
    /// Object frame to end-effector frame.
    pub grasp: Frame,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub arms: [ArmSpec; 2],
    /// Distal links of each arm exempt from object contact checks.
    pub contact_links: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    /// Box half extents in the object frame.
    pub half_extents: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NominalPoses {
    /// `[x, y, z, roll, pitch, yaw]`.
    pub start: [f64; 6],
    pub goal: [f64; 6],
    /// Configurations realizing the nominal poses; IK seeds for tasks.
    pub q_start: Vec<f64>,
    pub q_goal: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    /// Half-width of the uniform position perturbation per axis, meters.
    pub position: f64,
    /// Half-width of the uniform Euler-angle perturbation per axis, radians.
    pub orientation: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            position: 0.2,
            orientation: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IkSpec {
    pub gain: [f64; 6],
    pub step: f64,
    pub max_iters: usize,
    pub eps_p: f64,
    pub eps_o: f64,
    pub damping: f64,
    pub sv_cutoff: f64,
}

impl From<&IkParams> for IkSpec {
    fn from(p: &IkParams) -> Self {
        Self {
            gain: p.gain.into(),
            step: p.step,
            max_iters: p.max_iters,
            eps_p: p.eps_p,
            eps_o: p.eps_o,
            damping: p.damping,
            sv_cutoff: p.sv_cutoff,
        }
    }
}

impl Default for IkSpec {
    fn default() -> Self {
        Self::from(&IkParams::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegraspModeSpec {
    Joint,
    Sequential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegraspSpec {
    pub budget: f64,
    pub max_iterations: usize,
    pub edge_step: f64,
    pub collision_step: f64,
    pub freeze_tol: f64,
    pub mode: RegraspModeSpec,
}

impl Default for RegraspSpec {
    fn default() -> Self {
        let p = RegraspParams::default();
        Self {
            budget: p.budget,
            max_iterations: p.max_iterations,
            edge_step: p.edge_step,
            collision_step: p.collision_step,
            freeze_tol: p.freeze_tol,
            mode: RegraspModeSpec::Joint,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerSpec {
    pub step: f64,
    pub lower: [f64; 6],
    pub upper: [f64; 6],
    pub interp_points: usize,
    pub timeout: f64,
    pub eq_tol: f64,
    pub nn_weights: [f64; 6],
    pub continuity_max: f64,
    pub bridge_max: f64,
    pub constraint_tol_p: f64,
    pub constraint_tol_o: f64,
    pub ik: IkSpec,
    pub regrasp: RegraspSpec,
}

impl Default for PlannerSpec {
    fn default() -> Self {
        let p = PlannerParams::default();
        Self {
            step: p.step,
            lower: p.lower.into(),
            upper: p.upper.into(),
            interp_points: p.interp_points,
            timeout: p.timeout,
            eq_tol: p.eq_tol,
            nn_weights: p.nn_weights.into(),
            continuity_max: p.continuity_max,
            bridge_max: p.bridge_max,
            constraint_tol_p: p.constraint_tol_p,
            constraint_tol_o: p.constraint_tol_o,
            ik: IkSpec::default(),
            regrasp: RegraspSpec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub name: String,
    /// Difficulty tier, 1 (open) to 3 (cluttered).
    pub tier: u8,
    pub seed: u64,
    pub robot: RobotSpec,
    pub object: ObjectSpec,
    pub obstacles: Vec<BoxSpec>,
    pub nominal_poses: NominalPoses,
    #[serde(default)]
    pub perturbation: Perturbation,
    #[serde(default)]
    pub planner: PlannerSpec,
    /// Number of fastest successes averaged in the time statistics.
    #[serde(default)]
    pub n_t_min: Option<usize>,
}

/// Where in the file a problem was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub file: PathBuf,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file.display(), self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{location}: parse error: {message}")]
    Parse { location: Location, message: String },
    #[error("{location}: invalid `{field}`: {reason}")]
    Validation {
        location: Location,
        field: String,
        reason: String,
    },
}

impl SceneError {
    pub fn field(&self) -> Option<&str> {
        match self {
            SceneError::Validation { field, .. } => Some(field),
            _ => None,
        }
    }
}

/// Invalid field found by [`SceneConfig::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    /// Dotted path such as `robot.arms[0].limits[3]`.
    pub field: String,
    pub reason: String,
}

fn field_err(field: impl Into<String>, reason: impl Into<String>) -> FieldError {
    FieldError {
        field: field.into(),
        reason: reason.into(),
    }
}

fn check_finite(field: &str, values: &[f64]) -> Result<(), FieldError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(field_err(format!("{field}[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

fn check_positive(field: &str, values: &[f64]) -> Result<(), FieldError> {
    match values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        Some(i) => Err(field_err(format!("{field}[{i}]"), format!("must be positive, got {}", values[i]))),
        None => Ok(()),
    }
}

fn check_frame(field: &str, f: &Frame) -> Result<(), FieldError> {
    check_finite(&format!("{field}.position"), &f.position)?;
    check_finite(&format!("{field}.rpy"), &f.rpy)
}

fn check_box(field: &str, b: &BoxSpec) -> Result<(), FieldError> {
    check_positive(&format!("{field}.half_extents"), &b.half_extents)?;
    check_frame(&format!("{field}.frame"), &b.frame)
}

impl SceneConfig {
    /// Checks every invariant that deserialization alone cannot.
    pub fn validate(&self) -> Result<(), FieldError> {
        if !(1..=3).contains(&self.tier) {
            return Err(field_err("tier", format!("must be 1, 2 or 3, got {}", self.tier)));
        }
        for (i, arm) in self.robot.arms.iter().enumerate() {
            let at = format!("robot.arms[{i}]");
            if arm.dh.is_empty() {
                return Err(field_err(format!("{at}.dh"), "needs at least one row"));
            }
            for (j, row) in arm.dh.iter().enumerate() {
                check_finite(&format!("{at}.dh[{j}]"), &[row.theta_offset, row.alpha, row.d, row.a])?;
            }
            if arm.limits.len() != arm.dh.len() {
                return Err(field_err(
                    format!("{at}.limits"),
                    format!("has {} entries for {} joints", arm.limits.len(), arm.dh.len()),
                ));
            }
            for (j, [lo, hi]) in arm.limits.iter().enumerate() {
                check_finite(&format!("{at}.limits[{j}]"), &[*lo, *hi])?;
                if lo > hi {
                    return Err(field_err(
                        format!("{at}.limits[{j}]"),
                        format!("joint {} lower limit {lo} exceeds upper limit {hi}", j + 1),
                    ));
                }
            }
            if arm.link_radii.len() != arm.dh.len() {
                return Err(field_err(
                    format!("{at}.link_radii"),
                    format!("has {} entries for {} links", arm.link_radii.len(), arm.dh.len()),
                ));
            }
            check_positive(&format!("{at}.link_radii"), &arm.link_radii)?;
            check_frame(&format!("{at}.base"), &arm.base)?;
            check_frame(&format!("{at}.grasp"), &arm.grasp)?;
            if let Some(m) = &arm.mount {
                check_box(&format!("{at}.mount"), m)?;
            }
        }
        let min_dof = self.robot.arms.iter().map(|a| a.dh.len()).min().unwrap_or(0);
        if self.robot.contact_links > min_dof {
            return Err(field_err("robot.contact_links", format!("exceeds the {min_dof} links of an arm")));
        }
        check_positive("object.half_extents", &self.object.half_extents)?;
        for (i, o) in self.obstacles.iter().enumerate() {
            check_box(&format!("obstacles[{i}]"), o)?;
        }

        let dof: usize = self.robot.arms.iter().map(|a| a.dh.len()).sum();
        let n = &self.nominal_poses;
        check_finite("nominal_poses.start", &n.start)?;
        check_finite("nominal_poses.goal", &n.goal)?;
        for (name, q) in [("q_start", &n.q_start), ("q_goal", &n.q_goal)] {
            if q.len() != dof {
                return Err(field_err(
                    format!("nominal_poses.{name}"),
                    format!("has {} joints, the robot has {dof}", q.len()),
                ));
            }
            check_finite(&format!("nominal_poses.{name}"), q)?;
        }
        for (name, v) in [
            ("perturbation.position", self.perturbation.position),
            ("perturbation.orientation", self.perturbation.orientation),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(field_err(name, format!("must be non-negative, got {v}")));
            }
        }
        if self.n_t_min == Some(0) {
            return Err(field_err("n_t_min", "must be at least 1"));
        }

        let p = &self.planner;
        check_finite("planner.lower", &p.lower)?;
        check_finite("planner.upper", &p.upper)?;
        for i in 0..6 {
            if p.lower[i] > p.upper[i] {
                return Err(field_err(
                    format!("planner.lower[{i}]"),
                    format!("exceeds planner.upper[{i}] ({} > {})", p.lower[i], p.upper[i]),
                ));
            }
        }
        if p.interp_points == 0 {
            return Err(field_err("planner.interp_points", "must be at least 1"));
        }
        if !(p.timeout.is_finite() && p.timeout >= 0.0) {
            return Err(field_err("planner.timeout", format!("must be non-negative, got {}", p.timeout)));
        }
        for (name, v) in [
            ("planner.step", p.step),
            ("planner.continuity_max", p.continuity_max),
            ("planner.constraint_tol_p", p.constraint_tol_p),
            ("planner.constraint_tol_o", p.constraint_tol_o),
            ("planner.ik.step", p.ik.step),
            ("planner.ik.eps_p", p.ik.eps_p),
            ("planner.ik.eps_o", p.ik.eps_o),
            ("planner.regrasp.budget", p.regrasp.budget),
            ("planner.regrasp.edge_step", p.regrasp.edge_step),
            ("planner.regrasp.collision_step", p.regrasp.collision_step),
        ] {
            check_positive(name, &[v]).map_err(|e| field_err(name, e.reason))?;
        }
        for (name, v) in [
            ("planner.eq_tol", p.eq_tol),
            ("planner.bridge_max", p.bridge_max),
            ("planner.ik.damping", p.ik.damping),
            ("planner.ik.sv_cutoff", p.ik.sv_cutoff),
            ("planner.regrasp.freeze_tol", p.regrasp.freeze_tol),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(field_err(name, format!("must be non-negative, got {v}")));
            }
        }
        check_finite("planner.nn_weights", &p.nn_weights)?;
        check_finite("planner.ik.gain", &p.ik.gain)?;
        if p.ik.max_iters == 0 {
            return Err(field_err("planner.ik.max_iters", "must be at least 1"));
        }
        Ok(())
    }

    pub fn dof(&self) -> usize {
        self.robot.arms.iter().map(|a| a.dh.len()).sum()
    }

    pub fn system(&self) -> Result<DualArmSystem, ModelError> {
        let arm = |a: &ArmSpec| {
            let dh = a.dh.iter().map(|r| DhRow::new(r.theta_offset, r.alpha, r.d, r.a)).collect();
            let limits = a.limits.iter().map(|[lo, hi]| (*lo, *hi)).collect();
            ManipulatorModel::new(dh, limits, a.base.to_transform())
        };
        let [a0, a1] = &self.robot.arms;
        Ok(DualArmSystem::new(
            [arm(a0)?, arm(a1)?],
            [a0.grasp.to_transform(), a1.grasp.to_transform()],
        ))
    }

    /// Builds the collision world; the scene must have passed [`Self::validate`].
    pub fn world(&self) -> WorldModel {
        let system = self.system().expect("validated scene");
        let [a0, a1] = &self.robot.arms;
        let robot = RobotGeometry {
            link_radii: [a0.link_radii.clone(), a1.link_radii.clone()],
            base_shapes: [a0.mount.map(|m| m.to_shape()), a1.mount.map(|m| m.to_shape())],
            object: Shape::cuboid(Vec3::from(self.object.half_extents), Transform::identity()),
            object_contact_links: self.robot.contact_links,
        };
        let obstacles = self.obstacles.iter().map(BoxSpec::to_shape).collect();
        let pairs: Vec<(Body, Body)> = WorldModel::default_self_pairs(&system, &robot);
        WorldModel::new(system, robot, obstacles, pairs).expect("validated scene")
    }

    pub fn planner_params(&self, seed: u64) -> PlannerParams {
        let p = &self.planner;
        PlannerParams {
            step: p.step,
            lower: Vec6::from(p.lower),
            upper: Vec6::from(p.upper),
            interp_points: p.interp_points,
            timeout: p.timeout,
            seed,
            eq_tol: p.eq_tol,
            nn_weights: Vec6::from(p.nn_weights),
            continuity_max: p.continuity_max,
            bridge_max: p.bridge_max,
            constraint_tol_p: p.constraint_tol_p,
            constraint_tol_o: p.constraint_tol_o,
            ik: IkParams {
                gain: Vec6::from(p.ik.gain),
                step: p.ik.step,
                max_iters: p.ik.max_iters,
                eps_p: p.ik.eps_p,
                eps_o: p.ik.eps_o,
                damping: p.ik.damping,
                sv_cutoff: p.ik.sv_cutoff,
            },
            regrasp: RegraspParams {
                budget: p.regrasp.budget,
                max_iterations: p.regrasp.max_iterations,
                edge_step: p.regrasp.edge_step,
                collision_step: p.regrasp.collision_step,
                freeze_tol: p.regrasp.freeze_tol,
                mode: match p.regrasp.mode {
                    RegraspModeSpec::Joint => RegraspMode::Joint,
                    RegraspModeSpec::Sequential => RegraspMode::Sequential,
                },
            },
        }
    }

    pub fn nominal_start(&self) -> (Pose6, JointVector) {
        let n = &self.nominal_poses;
        (Pose6::from_array(n.start), JointVector(n.q_start.clone()))
    }

    pub fn nominal_goal(&self) -> (Pose6, JointVector) {
        let n = &self.nominal_poses;
        (Pose6::from_array(n.goal), JointVector(n.q_goal.clone()))
    }

    /// Time-statistics cutoff: the configured value or the tier default.
    pub fn n_t_min(&self) -> usize {
        self.n_t_min.unwrap_or(match self.tier {
            1 => 40,
            2 => 30,
            _ => 15,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }
}

/// Best-effort line/column of the JSON value at `field` in `text`.
fn locate(text: &str, field: &str) -> (usize, usize) {
    let mut offset = 0;
    for part in field.split('.') {
        let key = part.split('[').next().unwrap_or(part);
        let mut from = offset;
        if let Some(pos) = text[from..].find(&format!("\"{key}\"")) {
            from += pos;
            offset = from;
        }
        let mut rest = part;
        while let Some(open) = rest.find('[') {
            let close = rest[open..].find(']').map_or(rest.len(), |c| open + c);
            let index: usize = rest[open + 1..close].parse().unwrap_or(0);
            offset = nth_element(text, offset, index).unwrap_or(offset);
            rest = &rest[(close + 1).min(rest.len())..];
        }
    }
    line_col(text, offset)
}

/// Offset of element `index` of the first array opening at or after `from`.
fn nth_element(text: &str, from: usize, index: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut i = from + text[from..].find('[')? + 1;
    let mut depth = 0usize;
    let mut count = 0usize;
    let mut in_str = false;
    let mut start = None;
    while i < bytes.len() {
        let c = bytes[i];
        if in_str {
            if c == b'\\' {
                i += 1;
            } else if c == b'"' {
                in_str = false;
            }
        } else {
            match c {
                b'"' => in_str = true,
                b'[' | b'{' => depth += 1,
                b']' | b'}' if depth == 0 => return None,
                b']' | b'}' => depth -= 1,
                b',' if depth == 0 => count += 1,
                _ => {}
            }
            if count == index && start.is_none() && !c.is_ascii_whitespace() && c != b',' {
                start = Some(i);
                return start;
            }
        }
        i += 1;
    }
    None
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

/// Parses and validates scene text; `origin` labels error locations.
pub fn parse_scene(text: &str, origin: &Path) -> Result<SceneConfig, SceneError> {
    let scene: SceneConfig = serde_json::from_str(text).map_err(|e| SceneError::Parse {
        location: Location {
            file: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
        },
        message: e.to_string(),
    })?;
    scene.validate().map_err(|e| {
        let (line, column) = locate(text, &e.field);
        SceneError::Validation {
            location: Location {
                file: origin.to_path_buf(),
                line,
                column,
            },
            field: e.field,
            reason: e.reason,
        }
    })?;
    Ok(scene)
}

pub fn load_scene(path: &Path) -> Result<SceneConfig, SceneError> {
    let text = fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scene(&text, path)
}

pub fn save_scene(scene: &SceneConfig, path: &Path) -> std::io::Result<()> {
    let mut text = scene.to_json();
    text.push('\n');
    fs::write(path, text)
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}
