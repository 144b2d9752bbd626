use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which model advances the mixture during a stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Unmixed settling with reactions (moving-boundary PDE).
    #[serde(rename = "PDE")]
    Pde,
    /// Completely mixed tank with reactions (ODE).
    #[serde(rename = "ODE")]
    Ode,
}

/// One row of an operating schedule. Times in s, flows in m³/s,
/// concentrations in kg/m³.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub name: String,
    pub t_start: f64,
    pub t_end: f64,
    pub q_f: f64,
    pub q_u: f64,
    pub q_e: f64,
    pub c_feed: Vec<f64>,
    pub s_feed: Vec<f64>,
    pub model: ModelKind,
}

impl Stage {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// `Q̄ - Q_u`: rate of change of the mixture volume.
    pub fn volume_rate(&self) -> f64 {
        self.q_f - self.q_e - self.q_u
    }

    /// True for stages in the extraction set, `Q_e > 0`.
    pub fn is_extraction(&self) -> bool {
        self.q_e > 0.0
    }
}

/// Stages ordered in time, tiling `[0, T]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StageSchedule {
    stages: Vec<Stage>,
}

impl StageSchedule {
    pub fn new(stages: Vec<Stage>, k_c: usize, k_s: usize) -> Result<Self> {
        for (i, st) in stages.iter().enumerate() {
            let label = || format!("stage {i} ('{}')", st.name);
            for (flow, value) in [("Q_f", st.q_f), ("Q_u", st.q_u), ("Q_e", st.q_e)] {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::Config(format!("{}: {flow} must be >= 0, got {value}", label())));
                }
            }
            if st.q_f > 0.0 && st.q_e > 0.0 {
                return Err(Error::Config(format!(
                    "{}: cannot fill (Q_f > 0) and extract (Q_e > 0) simultaneously",
                    label()
                )));
            }
            if !(st.t_start.is_finite() && st.t_end.is_finite() && st.t_end >= st.t_start) {
                return Err(Error::Config(format!(
                    "{}: invalid period [{}, {}) s",
                    label(),
                    st.t_start,
                    st.t_end
                )));
            }
            let expected_start = if i == 0 { 0.0 } else { stages[i - 1].t_end };
            if st.t_start != expected_start {
                return Err(Error::Config(format!(
                    "{}: starts at {} s but must start at {} s (stages must tile [0, T])",
                    label(),
                    st.t_start,
                    expected_start
                )));
            }
            if st.c_feed.len() != k_c || st.s_feed.len() != k_s {
                return Err(Error::Config(format!(
                    "{}: feed vectors have lengths ({}, {}), expected ({k_c}, {k_s})",
                    label(),
                    st.c_feed.len(),
                    st.s_feed.len()
                )));
            }
            if st.c_feed.iter().chain(&st.s_feed).any(|&c| !(c.is_finite() && c >= 0.0)) {
                return Err(Error::Config(format!("{}: feed concentrations must be >= 0", label())));
            }
        }
        Ok(StageSchedule { stages })
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.stages.last().map_or(0.0, |s| s.t_end)
    }

    /// The stage whose half-open period `[t_start, t_end)` contains `t`; the
    /// final instant `T` belongs to the last stage.
    pub fn stage_at(&self, t: f64) -> Option<&Stage> {
        self.stages
            .iter()
            .find(|s| s.t_start <= t && t < s.t_end)
            .or_else(|| self.stages.last().filter(|s| t == s.t_end))
    }
}
