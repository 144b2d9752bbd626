//! Explicit finite-volume solver for the unmixed settling stages.
//!
//! The tank `[0, B]` is split into `N` equal cells. A cell belongs to the
//! mixture when its center lies below the surface `zbar(t)`; the topmost wet
//! cell also owns the partial layer between the surface and its upper face,
//! so the wet volumes always add up to the mixture volume `V̄(t)`.
//!
//! The update is done on cell masses. Solids fluxes use the Godunov flux for
//! hindered settling plus a two-point compression flux, both apportioned to
//! the components by the upwind cell's composition; solubles move with the
//! liquid. The feed enters the top wet cell, the underflow leaves the bottom
//! cell and the effluent leaves the top wet cell.

mod godunov;

pub use godunov::godunov_batch_flux;
pub(crate) use godunov::godunov_raw;

use crate::audit::{Flow, InvariantMonitor, StepLog};
use crate::constitutive::Constitutive;
use crate::effluent::{withdrawal_coefficients, EffluentSegment, OutletSample};
use crate::error::{Error, Result};
use crate::geometry::{ModelKind, Stage, SurfaceTrajectory, TankGeometry};
use crate::orchestrator::water_concentration;
use crate::reactions::ReactionModel;

pub const MIN_CELLS: usize = 10;

/// Default safety factor applied to the stability bound.
const ROUNDOFF_ULPS: f64 = 64.0;

pub const DEFAULT_CFL_SAFETY: f64 = 0.9;

/// Uniform cells over `[0, B]` with exact cell volumes.
#[derive(Clone, Debug)]
pub struct Grid {
    n: usize,
    dz: f64,
    /// `V(z_j)` at the faces `z_j = j·Δz`, `j = 0..=N`.
    face_volume: Vec<f64>,
    face_area: Vec<f64>,
    cell_volume: Vec<f64>,
}

impl Grid {
    pub fn new(geometry: &TankGeometry, n: usize) -> Result<Self> {
        if n < MIN_CELLS {
            return Err(Error::Config(format!("grid needs at least {MIN_CELLS} cells, got {n}")));
        }
        let depth = geometry.depth();
        let dz = depth / n as f64;
        let face_z = |j: usize| if j == n { depth } else { j as f64 * dz };
        let face_volume: Vec<f64> = (0..=n).map(|j| geometry.volume_unchecked(face_z(j))).collect();
        let face_area = (0..=n).map(|j| geometry.area(face_z(j))).collect();
        let cell_volume = face_volume.windows(2).map(|w| w[0] - w[1]).collect();
        Ok(Grid {
            n,
            dz,
            face_volume,
            face_area,
            cell_volume,
        })
    }

    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dz
    }

    pub fn cell_volume(&self, j: usize) -> f64 {
        self.cell_volume[j]
    }

    pub fn face_area(&self, j: usize) -> f64 {
        self.face_area[j]
    }

    /// Index of the topmost wet cell: the first cell whose center lies
    /// strictly below `zbar`. The bottom cell is wet whenever the tank holds
    /// any mixture.
    pub fn top_cell(&self, zbar: f64) -> usize {
        let above = (zbar / self.dz - 0.5).floor() + 1.0;
        if above <= 0.0 {
            0
        } else {
            (above as usize).min(self.n - 1)
        }
    }

    /// `(top, volume of the top wet cell)` for a mixture of `volume` m³.
    fn layout(&self, zbar: f64, volume: f64, t: f64) -> Result<(usize, f64)> {
        let top = self.top_cell(zbar);
        let top_volume = volume - self.face_volume[top + 1];
        if top_volume <= 0.0 {
            return Err(Error::EmptyMixture { time_s: t });
        }
        Ok((top, top_volume))
    }
}

/// Cell concentrations on a [`Grid`], zero above the surface.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureState {
    t: f64,
    zbar: f64,
    top: usize,
    /// Wet volume of each cell; zero above the surface.
    volumes: Vec<f64>,
    k_c: usize,
    k_s: usize,
    c: Vec<f64>,
    s: Vec<f64>,
}

impl MixtureState {
    /// Builds a state from cell masses (kg, per component). Mass placed in
    /// cells above the top wet cell is merged into it.
    pub fn from_masses(
        grid: &Grid,
        trajectory: &SurfaceTrajectory,
        t: f64,
        k_c: usize,
        k_s: usize,
        mut mass_c: Vec<f64>,
        mut mass_s: Vec<f64>,
    ) -> Result<Self> {
        let n = grid.n;
        if mass_c.len() != n * k_c || mass_s.len() != n * k_s {
            return Err(Error::Config("cell mass arrays do not match the grid".into()));
        }
        let zbar = trajectory.zbar(t);
        let (top, top_volume) = grid.layout(zbar, trajectory.volume(t), t)?;
        let mut volumes = vec![0.0; n];
        volumes[top] = top_volume;
        volumes[top + 1..].copy_from_slice(&grid.cell_volume[top + 1..]);
        for (mass, k) in [(&mut mass_c, k_c), (&mut mass_s, k_s)] {
            for j in 0..top {
                for i in 0..k {
                    mass[top * k + i] += mass[j * k + i];
                    mass[j * k + i] = 0.0;
                }
            }
            for j in top..n {
                for v in &mut mass[j * k..(j + 1) * k] {
                    *v /= volumes[j];
                }
            }
        }
        Ok(MixtureState {
            t,
            zbar,
            top,
            volumes,
            k_c,
            k_s,
            c: mass_c,
            s: mass_s,
        })
    }

    /// Equal concentrations in every wet cell.
    pub fn uniform(
        grid: &Grid,
        trajectory: &SurfaceTrajectory,
        t: f64,
        c: &[f64],
        s: &[f64],
    ) -> Result<Self> {
        let (k_c, k_s) = (c.len(), s.len());
        let n = grid.n;
        let mut state = Self::from_masses(grid, trajectory, t, k_c, k_s, vec![0.0; n * k_c], vec![0.0; n * k_s])?;
        for j in state.top..n {
            state.c[j * k_c..(j + 1) * k_c].copy_from_slice(c);
            state.s[j * k_s..(j + 1) * k_s].copy_from_slice(s);
        }
        Ok(state)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn zbar(&self) -> f64 {
        self.zbar
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn cells(&self) -> usize {
        self.volumes.len()
    }

    pub fn k_c(&self) -> usize {
        self.k_c
    }

    pub fn k_s(&self) -> usize {
        self.k_s
    }

    pub fn is_wet(&self, j: usize) -> bool {
        j >= self.top
    }

    /// Wet volume of cell `j` (m³).
    pub fn volume(&self, j: usize) -> f64 {
        self.volumes[j]
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn solids(&self, j: usize) -> &[f64] {
        &self.c[j * self.k_c..(j + 1) * self.k_c]
    }

    pub fn solubles(&self, j: usize) -> &[f64] {
        &self.s[j * self.k_s..(j + 1) * self.k_s]
    }

    pub fn total_solids(&self, j: usize) -> f64 {
        self.solids(j).iter().sum()
    }

    /// Mass of every component in the tank (kg), solids first.
    pub fn component_mass(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.k_c + self.k_s];
        for j in self.top..self.cells() {
            let v = self.volumes[j];
            for (acc, c) in out.iter_mut().zip(self.solids(j)) {
                *acc += c * v;
            }
            for (acc, s) in out[self.k_c..].iter_mut().zip(self.solubles(j)) {
                *acc += s * v;
            }
        }
        out
    }
}

/// Per-step flux data shared by the stability bound and the update.
#[derive(Clone, Debug, Default)]
struct Fluxes {
    /// Downward solids flux through each face (kg/s), `(N+1)·k_C`.
    solids: Vec<f64>,
    /// Downward solubles flux through each face (kg/s), `(N+1)·k_S`.
    solubles: Vec<f64>,
    /// Downward liquid volume flux through each face (m³/s).
    liquid: Vec<f64>,
    /// Withdrawal coefficients of the top cell.
    effluent_solids: f64,
    effluent_solubles: f64,
    d_gradient: f64,
    surface_area: f64,
}

/// Explicit time stepper for PDE stages.
pub struct PdeSolver<'a> {
    grid: &'a Grid,
    law: &'a Constitutive,
    reactions: &'a ReactionModel,
    trajectory: &'a SurfaceTrajectory,
    safety: f64,
    x: Vec<f64>,
    d_prim: Vec<f64>,
    fluxes: Fluxes,
    mass_c: Vec<f64>,
    mass_s: Vec<f64>,
    rates: Vec<f64>,
    r_c: Vec<f64>,
    r_s: Vec<f64>,
}

impl<'a> PdeSolver<'a> {
    pub fn new(
        grid: &'a Grid,
        law: &'a Constitutive,
        reactions: &'a ReactionModel,
        trajectory: &'a SurfaceTrajectory,
        safety: f64,
    ) -> Result<Self> {
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(Error::Config(format!("CFL safety factor must lie in (0, 1], got {safety}")));
        }
        let n = grid.n;
        let (k_c, k_s) = (reactions.k_c(), reactions.k_s());
        Ok(PdeSolver {
            grid,
            law,
            reactions,
            trajectory,
            safety,
            x: vec![0.0; n],
            d_prim: vec![0.0; n],
            fluxes: Fluxes {
                solids: vec![0.0; (n + 1) * k_c],
                solubles: vec![0.0; (n + 1) * k_s],
                liquid: vec![0.0; n + 1],
                ..Fluxes::default()
            },
            mass_c: vec![0.0; n * k_c],
            mass_s: vec![0.0; n * k_s],
            rates: vec![0.0; reactions.k_r()],
            r_c: vec![0.0; k_c],
            r_s: vec![0.0; k_s],
        })
    }

    fn check_dims(&self, state: &MixtureState) -> Result<()> {
        if state.k_c != self.reactions.k_c() || state.k_s != self.reactions.k_s() || state.cells() != self.grid.n {
            return Err(Error::Config("state does not match the grid or the component registry".into()));
        }
        Ok(())
    }

    /// Largest stable step from the current state (s).
    pub fn cfl_dt(&mut self, state: &MixtureState, stage: &Stage) -> Result<f64> {
        self.check_dims(state)?;
        self.prepare(state, stage)
    }

    /// Advances `state` by `dt`, which must not exceed [`cfl_dt`](Self::cfl_dt).
    pub fn step(&mut self, state: &mut MixtureState, stage: &Stage, dt: f64, log: &mut StepLog) -> Result<()> {
        self.check_dims(state)?;
        let limit = self.prepare(state, stage)?;
        if !(dt >= 0.0) || dt > limit {
            return Err(Error::StepSize { dt, limit });
        }
        self.apply(state, stage, state.t + dt, log)
    }

    /// Steps until `state.t == t_target`.
    pub fn advance(&mut self, state: &mut MixtureState, stage: &Stage, t_target: f64, log: &mut StepLog) -> Result<()> {
        self.check_dims(state)?;
        while state.t < t_target {
            let limit = self.prepare(state, stage)?;
            let t_next = if state.t + limit >= t_target { t_target } else { state.t + limit };
            self.apply(state, stage, t_next, log)?;
        }
        Ok(())
    }

    /// Runs a PDE stage, sampling the outlets every `cadence` seconds on
    /// `[t_start, t_end)`.
    pub fn run_stage(
        &mut self,
        state: &mut MixtureState,
        stage: &Stage,
        cadence: f64,
        log: &mut StepLog,
    ) -> Result<Vec<OutletSample>> {
        if stage.model != ModelKind::Pde {
            return Err(Error::Config(format!("stage '{}' is not a PDE stage", stage.name)));
        }
        let mut samples = Vec::new();
        for t in sample_times(stage.t_start, stage.t_end, cadence) {
            self.advance(state, stage, t, log)?;
            samples.push(self.outlet(state, stage));
        }
        self.advance(state, stage, stage.t_end, log)?;
        Ok(samples)
    }

    /// Underflow and effluent concentrations of the current state.
    pub fn outlet(&mut self, state: &MixtureState, stage: &Stage) -> OutletSample {
        let n = self.grid.n;
        let top = state.top;
        let (k_c, k_s) = (state.k_c, state.k_s);
        let (mut c_e, mut s_e) = (vec![0.0; k_c], vec![0.0; k_s]);
        if stage.q_e > 0.0 {
            let x_top = state.total_solids(top);
            let d_gradient = if top + 1 < n {
                (self.law.d_primitive_raw(state.total_solids(top + 1)) - self.law.d_primitive_raw(x_top)) / self.grid.dz
            } else {
                0.0
            };
            let area = self.trajectory.geometry().area(state.zbar);
            let (e_c, e_s) = withdrawal_coefficients(self.law, x_top, d_gradient, area, stage.q_e);
            for (out, c) in c_e.iter_mut().zip(state.solids(top)) {
                *out = e_c * c / stage.q_e;
            }
            for (out, s) in s_e.iter_mut().zip(state.solubles(top)) {
                *out = e_s * s / stage.q_e;
            }
        }
        OutletSample {
            t: state.t,
            zbar: state.zbar,
            c_u: state.solids(n - 1).to_vec(),
            s_u: state.solubles(n - 1).to_vec(),
            c_e,
            s_e,
        }
    }

    /// Fills the flux buffers for `state` and returns the stable step.
    fn prepare(&mut self, state: &MixtureState, stage: &Stage) -> Result<f64> {
        let grid = self.grid;
        let law = self.law;
        let params = law.params();
        let rho_x = params.rho_x;
        let (n, dz, top) = (grid.n, grid.dz, state.top);
        let (k_c, k_s) = (state.k_c, state.k_s);
        let q_u = stage.q_u;

        for j in top..n {
            let x = state.total_solids(j);
            self.x[j] = x;
            self.d_prim[j] = law.d_primitive_raw(x);
        }

        let fl = &mut self.fluxes;
        fl.solids.fill(0.0);
        fl.solubles.fill(0.0);
        fl.liquid.fill(0.0);

        // interior faces between wet cells f-1 and f
        for f in top + 1..n {
            let (a, b) = (self.x[f - 1], self.x[f]);
            let area = grid.face_area[f];
            let psi = godunov_raw(law, a, b) - (self.d_prim[f] - self.d_prim[f - 1]) / dz;
            let (up, x_up) = if psi >= 0.0 { (f - 1, a) } else { (f, b) };
            let settling = if x_up > 0.0 { area * psi } else { 0.0 };
            let above = state.solids(f - 1);
            let upwind = state.solids(up);
            for k in 0..k_c {
                let share = if x_up > 0.0 { upwind[k] / x_up } else { 0.0 };
                fl.solids[f * k_c + k] = q_u * above[k] + settling * share;
            }
            let liquid = q_u - (q_u * a + settling) / rho_x;
            fl.liquid[f] = liquid;
            let (src, x_src) = if liquid >= 0.0 { (f - 1, a) } else { (f, b) };
            let per_liquid = liquid / (1.0 - x_src / rho_x);
            for (k, s) in state.solubles(src).iter().enumerate() {
                fl.solubles[f * k_s + k] = per_liquid * s;
            }
        }

        // bottom face: bulk withdrawal only
        let bottom = state.solids(n - 1);
        for k in 0..k_c {
            fl.solids[n * k_c + k] = q_u * bottom[k];
        }
        for (k, s) in state.solubles(n - 1).iter().enumerate() {
            fl.solubles[n * k_s + k] = q_u * s;
        }
        fl.liquid[n] = q_u * (1.0 - self.x[n - 1] / rho_x);

        fl.d_gradient = if top + 1 < n { (self.d_prim[top + 1] - self.d_prim[top]) / dz } else { 0.0 };
        fl.surface_area = self.trajectory.geometry().area(state.zbar);
        let (e_c, e_s) = withdrawal_coefficients(law, self.x[top], fl.d_gradient, fl.surface_area, stage.q_e);
        fl.effluent_solids = e_c;
        fl.effluent_solubles = e_s;

        // stability: outflow coefficients per unit of the cell's own content
        let slope = law.max_flux_slope();
        let d_star = if self.x[top..].iter().any(|&x| x > params.x_crit) { law.max_d() } else { 0.0 };
        let mut max_rate: f64 = 0.0;
        for j in top..n {
            let v = state.volumes[j];
            let lower = if j + 1 < n { grid.face_area[j + 1] * (slope + d_star / dz) } else { 0.0 };
            let upper = if j > top { grid.face_area[j] * d_star / dz } else { 0.0 };
            let mut solids = q_u + lower + upper;
            let mut liquid_out = fl.liquid[j + 1].max(0.0) + if j > top { (-fl.liquid[j]).max(0.0) } else { 0.0 };
            liquid_out /= 1.0 - self.x[j] / rho_x;
            if j == top && stage.q_e > 0.0 {
                solids += stage.q_e + fl.surface_area * fl.d_gradient.max(0.0);
                liquid_out += e_s;
            }
            let depletion = self.reactions.depletion_bound(state.solids(j), state.solubles(j));
            max_rate = max_rate.max(solids.max(liquid_out) / v + depletion);
        }
        let mut limit = if max_rate > 0.0 { self.safety / max_rate } else { f64::INFINITY };

        // the surface moves at most half a cell per step
        let volume_rate = self.trajectory.volume_rate(state.t).abs();
        if volume_rate > 0.0 {
            limit = limit.min(0.5 * dz * fl.surface_area / volume_rate);
        }
        Ok(limit)
    }

    /// Mass update with the buffered fluxes, then redistribution onto the
    /// wet cells at `t_next` and the invariant-region check.
    fn apply(&mut self, state: &mut MixtureState, stage: &Stage, t_next: f64, log: &mut StepLog) -> Result<()> {
        let grid = self.grid;
        let (n, top) = (grid.n, state.top);
        let (k_c, k_s) = (state.k_c, state.k_s);
        let dt = t_next - state.t;
        let fl = &self.fluxes;

        self.mass_c.fill(0.0);
        self.mass_s.fill(0.0);
        for j in top..n {
            let v = state.volumes[j];
            for k in 0..k_c {
                self.mass_c[j * k_c + k] = state.c[j * k_c + k] * v;
            }
            for k in 0..k_s {
                self.mass_s[j * k_s + k] = state.s[j * k_s + k] * v;
            }
            if self.reactions.k_r() > 0 {
                self.reactions.evaluate(state.solids(j), state.solubles(j), &mut self.rates, &mut self.r_c, &mut self.r_s);
                let factor = dt * v;
                for k in 0..k_c {
                    self.mass_c[j * k_c + k] += factor * self.r_c[k];
                }
                for k in 0..k_s {
                    self.mass_s[j * k_s + k] += factor * self.r_s[k];
                }
                log.ledger.add(Flow::Reacted, 0, &self.r_c, factor);
                log.ledger.add(Flow::Reacted, k_c, &self.r_s, factor);
            }
        }

        for f in top + 1..=n {
            for k in 0..k_c {
                let moved = dt * fl.solids[f * k_c + k];
                self.mass_c[(f - 1) * k_c + k] -= moved;
                if f < n {
                    self.mass_c[f * k_c + k] += moved;
                }
            }
            for k in 0..k_s {
                let moved = dt * fl.solubles[f * k_s + k];
                self.mass_s[(f - 1) * k_s + k] -= moved;
                if f < n {
                    self.mass_s[f * k_s + k] += moved;
                }
            }
        }
        log.ledger.add(Flow::Underflow, 0, &fl.solids[n * k_c..], dt);
        log.ledger.add(Flow::Underflow, k_c, &fl.solubles[n * k_s..], dt);

        if stage.q_f > 0.0 {
            for k in 0..k_c {
                self.mass_c[top * k_c + k] += dt * stage.q_f * stage.c_feed[k];
            }
            for k in 0..k_s {
                self.mass_s[top * k_s + k] += dt * stage.q_f * stage.s_feed[k];
            }
            log.ledger.add(Flow::Inflow, 0, &stage.c_feed, dt * stage.q_f);
            log.ledger.add(Flow::Inflow, k_c, &stage.s_feed, dt * stage.q_f);
        }

        if stage.q_e > 0.0 {
            let out_c: Vec<f64> = state.solids(top).iter().map(|c| fl.effluent_solids * c).collect();
            let out_s: Vec<f64> = state.solubles(top).iter().map(|s| fl.effluent_solubles * s).collect();
            for k in 0..k_c {
                self.mass_c[top * k_c + k] -= dt * out_c[k];
            }
            for k in 0..k_s {
                self.mass_s[top * k_s + k] -= dt * out_s[k];
            }
            log.ledger.add(Flow::Effluent, 0, &out_c, dt);
            log.ledger.add(Flow::Effluent, k_c, &out_s, dt);
            log.effluent.push(EffluentSegment {
                t: state.t,
                dt,
                q_e: stage.q_e,
                c: out_c.iter().map(|v| v / stage.q_e).collect(),
                s: out_s.iter().map(|v| v / stage.q_e).collect(),
            });
        }

        for (mass, k) in [(&mut self.mass_c, k_c), (&mut self.mass_s, k_s)] {
            flush_roundoff(&mut mass[top * k..n * k], k, &mut log.monitor);
        }

        // new wet layout
        let zbar = self.trajectory.zbar(t_next);
        let (new_top, top_volume) = grid.layout(zbar, self.trajectory.volume(t_next), t_next)?;
        let volumes = &mut state.volumes;
        volumes.fill(0.0);
        volumes[new_top] = top_volume;
        volumes[new_top + 1..].copy_from_slice(&grid.cell_volume[new_top + 1..]);

        for (mass, conc, k) in [(&mut self.mass_c, &mut state.c, k_c), (&mut self.mass_s, &mut state.s, k_s)] {
            conc.fill(0.0);
            if new_top < top {
                // surface rose: spread the old top cell over the newly wet cells
                let pooled: f64 = volumes[new_top..=top].iter().sum();
                for i in 0..k {
                    let value = mass[top * k + i] / pooled;
                    for j in new_top..=top {
                        conc[j * k + i] = value;
                    }
                }
            } else if new_top > top {
                // surface fell: merge the drained cells into the new top cell
                for j in top..new_top {
                    for i in 0..k {
                        mass[new_top * k + i] += mass[j * k + i];
                    }
                }
            }
            let first = if new_top < top { top + 1 } else { new_top };
            for j in first..n {
                for i in 0..k {
                    conc[j * k + i] = mass[j * k + i] / volumes[j];
                }
            }
        }

        state.t = t_next;
        state.zbar = zbar;
        state.top = new_top;
        self.check_invariants(state, log)
    }

    /// Negative concentrations or water are fatal. `X > X̂` is only recorded:
    /// the hindered-settling velocity does not vanish at `X̂`, so a heavy bed
    /// can be compacted past it and the constitutive laws are continued there.
    fn check_invariants(&self, state: &MixtureState, log: &mut StepLog) -> Result<()> {
        let params = self.law.params();
        let mut min_conc = f64::INFINITY;
        let mut max_x: f64 = 0.0;
        let mut min_w = f64::INFINITY;
        for j in state.top..state.cells() {
            let c = state.solids(j);
            let s = state.solubles(j);
            let lowest = c.iter().chain(s).fold(f64::INFINITY, |m, &v| m.min(v));
            let x: f64 = c.iter().sum();
            let w = water_concentration(params, x, s);
            if !(lowest >= 0.0) || !(w >= 0.0) {
                return Err(Error::Scheme {
                    time_s: state.t,
                    detail: format!("cell {j}: min concentration {lowest:e}, X = {x}, W = {w}"),
                });
            }
            min_conc = min_conc.min(lowest);
            max_x = max_x.max(x);
            min_w = min_w.min(w);
        }
        log.monitor.observe(min_conc, max_x, min_w, params.x_max);
        log.monitor.steps += 1;
        Ok(())
    }
}

/// Masses are updated by sums of non-negative contributions minus outflows
/// bounded by the CFL condition, so an exact result is never negative. A
/// computed negative within a few ulps of the component's largest cell mass
/// is cancellation noise and is reset to zero; anything larger is left for
/// the invariant check to reject.
fn flush_roundoff(mass: &mut [f64], k: usize, monitor: &mut InvariantMonitor) {
    for i in 0..k {
        let scale = mass.iter().skip(i).step_by(k).fold(0.0_f64, |m, v| m.max(v.abs()));
        let floor = -ROUNDOFF_ULPS * f64::EPSILON * scale;
        for m in mass.iter_mut().skip(i).step_by(k) {
            if *m < 0.0 && *m >= floor {
                monitor.flushed_mass += -*m;
                monitor.flushes += 1;
                *m = 0.0;
            }
        }
    }
}

/// Multiples of `cadence` in `[t_start, t_end)`.
pub fn sample_times(t_start: f64, t_end: f64, cadence: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(cadence > 0.0) {
        return out;
    }
    let mut k = (t_start / cadence).ceil() as u64;
    loop {
        let t = k as f64 * cadence;
        if t >= t_end {
            break;
        }
        out.push(t);
        k += 1;
    }
    out
}
