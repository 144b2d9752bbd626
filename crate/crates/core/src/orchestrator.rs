//! Multi-stage scenario runs: model switching, sampling and the mass ledger.

use crate::audit::{InvariantMonitor, LedgerReport, MassLedger, StepLog};
use crate::constitutive::{Constitutive, MaterialParams};
use crate::effluent::{EffluentHistory, OutletSample};
use crate::error::{Error, Result};
use crate::geometry::{surface_trajectory, ModelKind, StageSchedule, SurfaceTrajectory, TankGeometry};
use crate::mixed::{MixedState, OdeIntegrator};
use crate::reactions::ReactionModel;
use crate::settler::{sample_times, Grid, MixtureState, PdeSolver};

/// Water concentration `W = ρ_L (1 - X/ρ_X) - ΣS` (kg/m³).
pub fn water_concentration(params: &MaterialParams, x: f64, s: &[f64]) -> f64 {
    params.rho_l * (1.0 - x / params.rho_x) - s.iter().sum::<f64>()
}

/// Piecewise-constant concentrations on the depth interval `[from, to)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialLayer {
    pub from: f64,
    pub to: f64,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialProfile {
    pub zbar: f64,
    pub layers: Vec<InitialLayer>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Numerics {
    pub cells: usize,
    /// Output cadence (s).
    pub output_interval: f64,
    /// Fixed step of the mixed-tank integrator (s).
    pub ode_step: f64,
    pub cfl_safety: f64,
    /// Effluent pipe cross-section (m²), used only to reconstruct pipe profiles.
    pub pipe_area: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            cells: 100,
            output_interval: 30.0,
            ode_step: crate::mixed::DEFAULT_ODE_STEP,
            cfl_safety: crate::settler::DEFAULT_CFL_SAFETY,
            pipe_area: crate::effluent::DEFAULT_PIPE_AREA,
        }
    }
}

/// A fully validated simulation setup.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub geometry: TankGeometry,
    pub material: MaterialParams,
    pub reactions: ReactionModel,
    pub schedule: StageSchedule,
    pub initial: InitialProfile,
    pub numerics: Numerics,
}

impl Scenario {
    /// Checks the cross-section consistency that the parts cannot check alone.
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        let (k_c, k_s) = (self.reactions.k_c(), self.reactions.k_s());
        let depth = self.geometry.depth();
        let z0 = self.initial.zbar;
        if !(0.0..=depth).contains(&z0) {
            return Err(Error::Config(format!("initial surface {z0} m lies outside [0, {depth}] m")));
        }
        for (i, layer) in self.initial.layers.iter().enumerate() {
            if layer.c.len() != k_c || layer.s.len() != k_s {
                return Err(Error::Config(format!("initial layer {i}: expected {k_c} solids and {k_s} solubles")));
            }
            if !(0.0 <= layer.from && layer.from < layer.to && layer.to <= depth) {
                return Err(Error::Config(format!(
                    "initial layer {i}: need 0 <= from < to <= {depth}, got [{}, {})",
                    layer.from, layer.to
                )));
            }
            if layer.c.iter().chain(&layer.s).any(|&v| !(v.is_finite() && v >= 0.0)) {
                return Err(Error::Config(format!("initial layer {i}: concentrations must be >= 0")));
            }
            let nonzero = layer.c.iter().chain(&layer.s).any(|&v| v > 0.0);
            if nonzero && layer.from < z0 {
                return Err(Error::Config(format!(
                    "initial layer {i} holds material above the surface at {z0} m"
                )));
            }
            let x: f64 = layer.c.iter().sum();
            if x > self.material.x_max {
                return Err(Error::Config(format!(
                    "initial layer {i}: X = {x} exceeds the maximal concentration {}",
                    self.material.x_max
                )));
            }
            if water_concentration(&self.material, x, &layer.s) < 0.0 {
                return Err(Error::Config(format!("initial layer {i}: negative water concentration")));
            }
        }
        if self.numerics.output_interval <= 0.0 {
            return Err(Error::Config("output interval must be positive".into()));
        }
        surface_trajectory(&self.geometry, &self.schedule, z0)?;
        Ok(())
    }

    /// Component names, solids first.
    pub fn component_names(&self) -> Vec<String> {
        let reg = self.reactions.registry();
        reg.solids.iter().chain(&reg.solubles).cloned().collect()
    }
}

/// Concentration fields at one sample time; zeros above the surface.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub t: f64,
    pub zbar: f64,
    /// `N × k_C`, cell-major.
    pub c: Vec<f64>,
    /// `N × k_S`, cell-major.
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

/// Mass movements during one stage (kg per component, solids first).
#[derive(Clone, Debug, PartialEq)]
pub struct StageSummary {
    pub index: usize,
    pub name: String,
    pub model: ModelKind,
    pub t_start: f64,
    pub t_end: f64,
    pub mass_start: Vec<f64>,
    pub mass_end: Vec<f64>,
    pub inflow: Vec<f64>,
    pub underflow: Vec<f64>,
    pub effluent: Vec<f64>,
    pub reacted: Vec<f64>,
}

impl StageSummary {
    /// Mass that left through the surface according to the tank contents:
    /// the balance of everything except the effluent.
    pub fn tank_side_effluent(&self) -> Vec<f64> {
        (0..self.mass_start.len())
            .map(|k| {
                self.mass_start[k] - self.mass_end[k] + self.inflow[k] - self.underflow[k] + self.reacted[k]
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub names: Vec<String>,
    pub k_c: usize,
    pub cell_centers: Vec<f64>,
    pub outlets: Vec<OutletSample>,
    pub fields: Vec<FieldSample>,
    pub ledger: LedgerReport,
    pub stages: Vec<StageSummary>,
    pub monitor: InvariantMonitor,
    pub effluent: EffluentHistory,
    pub final_mass: Vec<f64>,
}

enum Phase {
    Pde(MixtureState),
    Ode(MixedState),
}

/// Volume-weighted average of a layered state; masses are kept exactly.
pub fn pde_to_ode(state: &MixtureState) -> Result<MixedState> {
    let volume = state.total_volume();
    if !(volume > 0.0) {
        return Err(Error::EmptyMixture { time_s: state.t() });
    }
    let mass = state.component_mass();
    let (c, s) = mass.split_at(state.k_c());
    Ok(MixedState {
        t: state.t(),
        volume,
        c: c.iter().map(|m| m / volume).collect(),
        s: s.iter().map(|m| m / volume).collect(),
    })
}

/// Spreads a mixed state uniformly over the wet cells.
pub fn ode_to_pde(mixed: &MixedState, grid: &Grid, trajectory: &SurfaceTrajectory) -> Result<MixtureState> {
    if !(mixed.volume > 0.0) {
        return Err(Error::EmptyMixture { time_s: mixed.t });
    }
    MixtureState::uniform(grid, trajectory, mixed.t, &mixed.c, &mixed.s)
}

/// Cell state at `t = 0` from the layered initial profile, integrating each
/// layer exactly over the wet part of every cell.
pub fn initial_state(scenario: &Scenario, grid: &Grid, trajectory: &SurfaceTrajectory) -> Result<MixtureState> {
    let (k_c, k_s) = (scenario.reactions.k_c(), scenario.reactions.k_s());
    let n = grid.cells();
    let dz = grid.dz();
    let depth = scenario.geometry.depth();
    let zbar = scenario.initial.zbar;
    let mut mass_c = vec![0.0; n * k_c];
    let mut mass_s = vec![0.0; n * k_s];
    for j in 0..n {
        let a = (j as f64 * dz).max(zbar);
        let b = if j + 1 == n { depth } else { (j + 1) as f64 * dz };
        for layer in &scenario.initial.layers {
            let (lo, hi) = (a.max(layer.from), b.min(layer.to));
            if hi <= lo {
                continue;
            }
            let v = scenario.geometry.volume_between(lo, hi);
            for (m, c) in mass_c[j * k_c..(j + 1) * k_c].iter_mut().zip(&layer.c) {
                *m += c * v;
            }
            for (m, s) in mass_s[j * k_s..(j + 1) * k_s].iter_mut().zip(&layer.s) {
                *m += s * v;
            }
        }
    }
    MixtureState::from_masses(grid, trajectory, 0.0, k_c, k_s, mass_c, mass_s)
}

fn field_sample(state: &MixtureState, params: &MaterialParams) -> FieldSample {
    let n = state.cells();
    let (k_c, k_s) = (state.k_c(), state.k_s());
    let mut c = vec![0.0; n * k_c];
    let mut s = vec![0.0; n * k_s];
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for j in state.top()..n {
        c[j * k_c..(j + 1) * k_c].copy_from_slice(state.solids(j));
        s[j * k_s..(j + 1) * k_s].copy_from_slice(state.solubles(j));
        x[j] = state.total_solids(j);
        w[j] = water_concentration(params, x[j], state.solubles(j));
    }
    FieldSample {
        t: state.t(),
        zbar: state.zbar(),
        c,
        s,
        x,
        w,
    }
}

fn phase_mass(phase: &Phase) -> Vec<f64> {
    match phase {
        Phase::Pde(st) => st.component_mass(),
        Phase::Ode(m) => m.mass(),
    }
}

/// Runs all stages of `scenario` in order.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let law = Constitutive::new(scenario.material)?;
    let grid = Grid::new(&scenario.geometry, scenario.numerics.cells)?;
    let trajectory = surface_trajectory(&scenario.geometry, &scenario.schedule, scenario.initial.zbar)?;
    let reactions = &scenario.reactions;
    let names = scenario.component_names();
    let k_c = reactions.k_c();

    let mut phase = Phase::Pde(initial_state(scenario, &grid, &trajectory)?);
    let initial_mass = phase_mass(&phase);
    let mut log = StepLog::new(MassLedger::new(names.clone(), initial_mass));
    let mut pde = PdeSolver::new(&grid, &law, reactions, &trajectory, scenario.numerics.cfl_safety)?;
    let mut ode = OdeIntegrator::new(reactions, &trajectory, &scenario.material, scenario.numerics.ode_step)?;

    let mut outlets = Vec::new();
    let mut fields = Vec::new();
    let mut summaries = Vec::new();
    let cadence = scenario.numerics.output_interval;
    let stages = scenario.schedule.stages();

    for (index, stage) in stages.iter().enumerate() {
        let wrap = |e: Error, t: f64| Error::Stage {
            index,
            time_s: t,
            source: Box::new(e),
        };
        phase = match (phase, stage.model) {
            (Phase::Pde(st), ModelKind::Ode) => Phase::Ode(pde_to_ode(&st).map_err(|e| wrap(e, stage.t_start))?),
            (Phase::Ode(m), ModelKind::Pde) => {
                Phase::Pde(ode_to_pde(&m, &grid, &trajectory).map_err(|e| wrap(e, stage.t_start))?)
            }
            (p, _) => p,
        };
        let mass_start = phase_mass(&phase);
        let before = log.ledger.clone();

        let mut times = sample_times(stage.t_start, stage.t_end, cadence);
        if index + 1 == stages.len() {
            times.push(stage.t_end);
        }
        for &t in &times {
            match &mut phase {
                Phase::Pde(st) => {
                    pde.advance(st, stage, t, &mut log).map_err(|e| wrap(e, st.t()))?;
                    outlets.push(pde.outlet(st, stage));
                    fields.push(field_sample(st, &scenario.material));
                }
                Phase::Ode(m) => {
                    ode.advance(m, stage, t, &mut log).map_err(|e| wrap(e, m.t))?;
                    outlets.push(ode.outlet(m, stage));
                    let view = ode_to_pde(m, &grid, &trajectory).map_err(|e| wrap(e, m.t))?;
                    fields.push(field_sample(&view, &scenario.material));
                }
            }
        }
        match &mut phase {
            Phase::Pde(st) => pde.advance(st, stage, stage.t_end, &mut log).map_err(|e| wrap(e, st.t()))?,
            Phase::Ode(m) => ode.advance(m, stage, stage.t_end, &mut log).map_err(|e| wrap(e, m.t))?,
        }

        let diff = |now: &[f64], then: &[f64]| now.iter().zip(then).map(|(a, b)| a - b).collect::<Vec<f64>>();
        summaries.push(StageSummary {
            index,
            name: stage.name.clone(),
            model: stage.model,
            t_start: stage.t_start,
            t_end: stage.t_end,
            mass_start,
            mass_end: phase_mass(&phase),
            inflow: diff(log.ledger.inflow(), before.inflow()),
            underflow: diff(log.ledger.underflow(), before.underflow()),
            effluent: diff(log.ledger.effluent(), before.effluent()),
            reacted: diff(log.ledger.reacted(), before.reacted()),
        });
    }

    let final_mass = phase_mass(&phase);
    Ok(RunOutput {
        names,
        k_c,
        cell_centers: (0..grid.cells()).map(|j| grid.center(j)).collect(),
        outlets,
        fields,
        ledger: log.ledger.close(&final_mass),
        stages: summaries,
        monitor: log.monitor,
        effluent: log.effluent,
        final_mass,
    })
}
