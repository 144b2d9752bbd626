//! Mass-balance ledger and invariant-region monitoring.

use serde::{Deserialize, Serialize};

use crate::effluent::EffluentHistory;

/// Relative ledger residual accepted as closed.
pub const LEDGER_TOLERANCE: f64 = 1e-8;

/// Cumulative masses (kg) per component, solids first.
#[derive(Clone, Debug, PartialEq)]
pub struct MassLedger {
    names: Vec<String>,
    initial: Vec<f64>,
    inflow: Vec<f64>,
    underflow: Vec<f64>,
    effluent: Vec<f64>,
    reacted: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Flow {
    Inflow,
    Underflow,
    Effluent,
    Reacted,
}

impl MassLedger {
    pub fn new(names: Vec<String>, initial: Vec<f64>) -> Self {
        let k = names.len();
        assert_eq!(initial.len(), k, "one initial mass per component");
        MassLedger {
            names,
            initial,
            inflow: vec![0.0; k],
            underflow: vec![0.0; k],
            effluent: vec![0.0; k],
            reacted: vec![0.0; k],
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Adds `factor · values` to the given flow starting at component `offset`.
    pub(crate) fn add(&mut self, flow: Flow, offset: usize, values: &[f64], factor: f64) {
        let target = match flow {
            Flow::Inflow => &mut self.inflow,
            Flow::Underflow => &mut self.underflow,
            Flow::Effluent => &mut self.effluent,
            Flow::Reacted => &mut self.reacted,
        };
        for (acc, v) in target[offset..].iter_mut().zip(values) {
            *acc += factor * v;
        }
    }

    pub fn inflow(&self) -> &[f64] {
        &self.inflow
    }

    pub fn underflow(&self) -> &[f64] {
        &self.underflow
    }

    pub fn effluent(&self) -> &[f64] {
        &self.effluent
    }

    pub fn reacted(&self) -> &[f64] {
        &self.reacted
    }

    /// Balance of every component against the masses held at the end.
    pub fn close(&self, final_mass: &[f64]) -> LedgerReport {
        let components: Vec<ComponentBalance> = (0..self.names.len())
            .map(|k| {
                let expected = self.inflow[k] - self.underflow[k] - self.effluent[k] + self.reacted[k];
                let residual = (final_mass[k] - self.initial[k]) - expected;
                let scale = [
                    self.initial[k],
                    final_mass[k],
                    self.inflow[k],
                    self.underflow[k],
                    self.effluent[k],
                    self.reacted[k],
                ]
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()));
                ComponentBalance {
                    name: self.names[k].clone(),
                    initial: self.initial[k],
                    final_mass: final_mass[k],
                    inflow: self.inflow[k],
                    underflow: self.underflow[k],
                    effluent: self.effluent[k],
                    reacted: self.reacted[k],
                    residual,
                    relative_residual: if scale > 0.0 { residual.abs() / scale } else { 0.0 },
                }
            })
            .collect();
        let closed = components.iter().all(|c| c.relative_residual <= LEDGER_TOLERANCE);
        LedgerReport {
            tolerance: LEDGER_TOLERANCE,
            closed,
            components,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentBalance {
    pub name: String,
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_mass: f64,
    pub inflow: f64,
    pub underflow: f64,
    pub effluent: f64,
    pub reacted: f64,
    pub residual: f64,
    pub relative_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub tolerance: f64,
    pub closed: bool,
    pub components: Vec<ComponentBalance>,
}

impl LedgerReport {
    pub fn max_relative_residual(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.relative_residual))
    }
}

/// Extremes of the admissible-state quantities over all accepted steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantMonitor {
    pub steps: u64,
    pub min_concentration: f64,
    pub max_solids: f64,
    pub min_water: f64,
    /// Accepted steps in which some cell held more than `X̂`.
    pub steps_above_x_max: u64,
    /// Cancellation-level negative masses reset to zero, and their total.
    pub flushes: u64,
    pub flushed_mass: f64,
}

impl Default for InvariantMonitor {
    fn default() -> Self {
        InvariantMonitor {
            steps: 0,
            min_concentration: f64::INFINITY,
            max_solids: 0.0,
            min_water: f64::INFINITY,
            steps_above_x_max: 0,
            flushes: 0,
            flushed_mass: 0.0,
        }
    }
}

impl InvariantMonitor {
    pub(crate) fn observe(&mut self, min_concentration: f64, max_solids: f64, min_water: f64, x_max: f64) {
        if max_solids > x_max {
            self.steps_above_x_max += 1;
        }
        self.min_concentration = self.min_concentration.min(min_concentration);
        self.max_solids = self.max_solids.max(max_solids);
        self.min_water = self.min_water.min(min_water);
    }
}

/// Everything a time stepper reports besides the new state.
#[derive(Clone, Debug)]
pub struct StepLog {
    pub ledger: MassLedger,
    pub effluent: EffluentHistory,
    pub monitor: InvariantMonitor,
}

impl StepLog {
    pub fn new(ledger: MassLedger) -> Self {
        StepLog {
            ledger,
            effluent: EffluentHistory::new(),
            monitor: InvariantMonitor::default(),
        }
    }
}
