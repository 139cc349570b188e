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
//! Scene files, task generation, benchmark execution, metrics, export and
//! replay validation for the tcbirrt planner.

pub mod export;
pub mod metrics;
pub mod run;
pub mod scene;
pub mod tasks;
pub mod validate;

pub use export::{read_path_file, read_trials_csv, write_curve_csv, write_path_file, PathFile, TrialWriter};
pub use metrics::{success_rate_curve, trimmed_time_stats, MetricsReport, TrialRecord};
pub use run::{run_benchmark, BenchConfig, ClockKind, TrialOutcome};
pub use scene::{load_scene, SceneConfig, SceneError};
pub use tasks::{generate_tasks, TaskInstance};
pub use validate::{validate_path, Violation};
