use std::path::{Path, PathBuf};

use nustab_core::diophantine::{Xi0, DEFAULT_LOG_EPSILON};
use nustab_core::resolvent::Method;
use nustab_core::semigroup::Spacing;
use nustab_core::{RateFunction, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Modes,
    ResolventScan,
    Peaks,
    DecaySim,
    Conditions,
    Optimality,
    Diophantine,
    Reproduce,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Modes => "modes",
            Task::ResolventScan => "resolvent-scan",
            Task::Peaks => "peaks",
            Task::DecaySim => "decay-sim",
            Task::Conditions => "conditions",
            Task::Optimality => "optimality",
            Task::Diophantine => "diophantine",
            Task::Reproduce => "reproduce",
        }
    }

    fn writes_csv(self) -> bool {
        matches!(self, Task::Modes | Task::ResolventScan | Task::Peaks | Task::DecaySim | Task::Optimality)
    }
}

/// Imaginary-axis sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SGrid {
    /// Every frequency, every midpoint, and `refinements` further equispaced
    /// points inside each gap.
    Frequencies {
        #[serde(default)]
        refinements: usize,
    },
    Linear { start: f64, stop: f64, points: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeWindow {
    pub lo: usize,
    pub hi: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

fn default_random_samples() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsParams {
    pub beta: f64,
    pub tau: f64,
    #[serde(default = "default_random_samples")]
    pub random_samples: usize,
    /// Also rerun the observability check at twice the truncation.
    #[serde(default)]
    pub doubling: bool,
}

fn default_n_max() -> u64 {
    100_000
}

fn default_depth() -> usize {
    30
}

fn default_epsilon() -> f64 {
    DEFAULT_LOG_EPSILON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiophantineParams {
    pub xi0: Xi0,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<SGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<TGrid>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<ModeWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diophantine: Option<DiophantineParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<String>,
}

impl ExperimentConfig {
    pub fn for_task(task: Task) -> Self {
        ExperimentConfig {
            task: Some(task),
            system: None,
            s_grid: None,
            t_grid: None,
            outputs: Outputs::default(),
            seed: None,
            method: None,
            modes: None,
            fit: None,
            rate: None,
            conditions: None,
            diophantine: None,
            recipe: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks that the fields `task` needs are present and well-formed.
    pub fn validate(&self, task: Task) -> Result<(), CliError> {
        let invalid = |msg: String| Err(CliError::Validation(msg));
        if let Some(t) = self.task {
            if t != task {
                return invalid(format!("config declares task `{}` but `{}` was requested", t.name(), task.name()));
            }
        }
        let needs_system = !matches!(task, Task::Diophantine | Task::Reproduce);
        match &self.system {
            Some(sys) => sys.validate().map_err(|e| CliError::Validation(format!("system: {e}")))?,
            None if needs_system => return invalid(format!("task `{}` requires `system`", task.name())),
            None => {}
        }
        if matches!(task, Task::DecaySim | Task::Optimality) && self.t_grid.is_none() {
            return invalid(format!("task `{}` requires `t_grid`", task.name()));
        }
        if let Some(g) = &self.t_grid {
            if !(g.start > 0.0 && g.stop > g.start && g.points >= 2) {
                return invalid(format!(
                    "t_grid needs 0 < start < stop and at least 2 points (got start {}, stop {}, points {})",
                    g.start, g.stop, g.points
                ));
            }
        }
        if let Some(SGrid::Linear { start, stop, points }) = &self.s_grid {
            if !(start.is_finite() && stop.is_finite() && stop > start && *points >= 2) {
                return invalid(format!("linear s_grid needs start < stop and at least 2 points (got {start}, {stop}, {points})"));
            }
        }
        if let Some(w) = &self.modes {
            if w.lo == 0 || w.hi < w.lo {
                return invalid(format!("modes window {}..={} is empty or starts at 0", w.lo, w.hi));
            }
        }
        if let Some(w) = &self.fit {
            if !(w.lo > 0.0 && w.hi > w.lo) {
                return invalid(format!("fit window [{}, {}] must satisfy 0 < lo < hi", w.lo, w.hi));
            }
        }
        if let Some(r) = &self.rate {
            r.validate().map_err(|e| CliError::Validation(format!("rate: {e}")))?;
        }
        match task {
            Task::Optimality if self.rate.is_none() => invalid("task `optimality` requires `rate` (the candidate M0)".into()),
            Task::Conditions if self.conditions.is_none() => {
                invalid("task `conditions` requires `conditions` {beta, tau}".into())
            }
            Task::Diophantine if self.diophantine.is_none() => {
                invalid("task `diophantine` requires `diophantine` {xi0}".into())
            }
            Task::Reproduce if self.recipe.is_none() => invalid("task `reproduce` requires `recipe`".into()),
            _ => Ok(()),
        }
    }

    /// Declared output paths, defaulting to `<task>.csv` / `<task>.json`, resolved against `out`.
    pub fn output_paths(&self, task: Task, out: &Path) -> (Option<PathBuf>, PathBuf) {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { out.join(p) };
        let csv = match &self.outputs.csv {
            Some(p) => Some(resolve(p)),
            None if task.writes_csv() => Some(out.join(format!("{}.csv", task.name()))),
            None => None,
        };
        let json = resolve(self.outputs.json.as_deref().unwrap_or(Path::new(&format!("{}.json", task.name()))));
        (csv, json)
    }
}
