//! Completely mixed tank with reactions.
//!
//! Concentrations are homogeneous below the surface. The integrator works on
//! the component masses `M = V̄·C`, for which
//! `M' = Q_f C_f - (Q_u + Q_e) C + V̄ R(C, S)`; the volume `V̄(t)` is known in
//! closed form from the surface trajectory. Cumulative underflow, effluent and
//! reaction masses are integrated alongside, so the ledger closes up to
//! rounding.

use crate::audit::{Flow, StepLog};
use crate::constitutive::MaterialParams;
use crate::effluent::{EffluentSegment, OutletSample};
use crate::error::{Error, Result};
use crate::geometry::{ModelKind, Stage, SurfaceTrajectory};
use crate::orchestrator::water_concentration;
use crate::reactions::ReactionModel;
use crate::settler::sample_times;

/// Default fixed step (s).
pub const DEFAULT_ODE_STEP: f64 = 1.0;

/// Smallest step the positivity guard may fall back to (s).
pub const MIN_ODE_STEP: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    pub t: f64,
    /// Mixture volume `V̄` (m³).
    pub volume: f64,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

impl MixedState {
    /// Component masses (kg), solids first.
    pub fn mass(&self) -> Vec<f64> {
        self.c.iter().chain(&self.s).map(|v| v * self.volume).collect()
    }

    pub fn total_solids(&self) -> f64 {
        self.c.iter().sum()
    }
}

/// Time derivatives `(dC/dt, dS/dt, dV̄/dt)`.
///
/// `V̄ C' = Q_f (C_f - C) + V̄ R`: withdrawal through either outlet removes
/// mixture at its own concentration, so it changes the volume but not the
/// concentrations.
pub fn ode_rhs(state: &MixedState, stage: &Stage, reactions: &ReactionModel) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if !(state.volume > 0.0) {
        return Err(Error::EmptyMixture { time_s: state.t });
    }
    let (r_c, r_s) = reactions.reaction_terms(&state.c, &state.s)?;
    let dilution = stage.q_f / state.volume;
    let dc = (0..state.c.len())
        .map(|k| dilution * (stage.c_feed[k] - state.c[k]) + r_c[k])
        .collect();
    let ds = (0..state.s.len())
        .map(|k| dilution * (stage.s_feed[k] - state.s[k]) + r_s[k])
        .collect();
    Ok((dc, ds, stage.volume_rate()))
}

/// Fixed-step classical Runge–Kutta integrator for ODE stages.
pub struct OdeIntegrator<'a> {
    reactions: &'a ReactionModel,
    trajectory: &'a SurfaceTrajectory,
    params: &'a MaterialParams,
    dt_max: f64,
    rates: Vec<f64>,
    r_c: Vec<f64>,
    r_s: Vec<f64>,
    clamped: Vec<f64>,
}

impl<'a> OdeIntegrator<'a> {
    pub fn new(
        reactions: &'a ReactionModel,
        trajectory: &'a SurfaceTrajectory,
        params: &'a MaterialParams,
        dt_max: f64,
    ) -> Result<Self> {
        if !(dt_max >= MIN_ODE_STEP && dt_max.is_finite()) {
            return Err(Error::Config(format!("ODE step must be at least {MIN_ODE_STEP} s, got {dt_max}")));
        }
        let k = reactions.k_c() + reactions.k_s();
        Ok(OdeIntegrator {
            reactions,
            trajectory,
            params,
            dt_max,
            rates: vec![0.0; reactions.k_r()],
            r_c: vec![0.0; reactions.k_c()],
            r_s: vec![0.0; reactions.k_s()],
            clamped: vec![0.0; k],
        })
    }

    /// Derivative of the augmented state `[M, underflow, effluent, reacted]`,
    /// each block of length `k_C + k_S`.
    fn derivative(&mut self, t: f64, y: &[f64], stage: &Stage, out: &mut [f64]) {
        let k_c = self.reactions.k_c();
        let k = k_c + self.reactions.k_s();
        let volume = self.trajectory.volume(t);
        for i in 0..k {
            self.clamped[i] = (y[i] / volume).max(0.0);
        }
        if self.reactions.k_r() > 0 {
            let (c, s) = self.clamped.split_at(k_c);
            self.reactions.evaluate(c, s, &mut self.rates, &mut self.r_c, &mut self.r_s);
        } else {
            self.r_c.fill(0.0);
            self.r_s.fill(0.0);
        }
        for i in 0..k {
            let conc = y[i] / volume;
            let reaction = volume * if i < k_c { self.r_c[i] } else { self.r_s[i - k_c] };
            let feed = if i < k_c { stage.c_feed[i] } else { stage.s_feed[i - k_c] };
            out[i] = stage.q_f * feed - (stage.q_u + stage.q_e) * conc + reaction;
            out[k + i] = stage.q_u * conc;
            out[2 * k + i] = stage.q_e * conc;
            out[3 * k + i] = reaction;
        }
    }

    fn rk4(&mut self, t: f64, y: &[f64], h: f64, stage: &Stage) -> Vec<f64> {
        let len = y.len();
        let mut k1 = vec![0.0; len];
        let mut k2 = vec![0.0; len];
        let mut k3 = vec![0.0; len];
        let mut k4 = vec![0.0; len];
        let mut tmp = vec![0.0; len];
        self.derivative(t, y, stage, &mut k1);
        for i in 0..len {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        self.derivative(t + 0.5 * h, &tmp, stage, &mut k2);
        for i in 0..len {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        self.derivative(t + 0.5 * h, &tmp, stage, &mut k3);
        for i in 0..len {
            tmp[i] = y[i] + h * k3[i];
        }
        self.derivative(t + h, &tmp, stage, &mut k4);
        (0..len)
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }

    /// One accepted step to at most `t_target`, halving on negative masses.
    fn step(&mut self, state: &mut MixedState, stage: &Stage, t_target: f64, log: &mut StepLog) -> Result<()> {
        let k_c = state.c.len();
        let k = k_c + state.s.len();
        let mut y = state.mass();
        y.resize(4 * k, 0.0);
        let mut h = self.dt_max.min(t_target - state.t);
        let next = loop {
            let candidate = self.rk4(state.t, &y, h, stage);
            if candidate[..k].iter().all(|&m| m >= 0.0) {
                break candidate;
            }
            h *= 0.5;
            if h < MIN_ODE_STEP {
                return Err(Error::Kinetics { time_s: state.t });
            }
        };
        let t_next = if state.t + h >= t_target { t_target } else { state.t + h };
        let dt = t_next - state.t;

        if stage.q_f > 0.0 {
            log.ledger.add(Flow::Inflow, 0, &stage.c_feed, dt * stage.q_f);
            log.ledger.add(Flow::Inflow, k_c, &stage.s_feed, dt * stage.q_f);
        }
        log.ledger.add(Flow::Underflow, 0, &next[k..2 * k], 1.0);
        log.ledger.add(Flow::Effluent, 0, &next[2 * k..3 * k], 1.0);
        log.ledger.add(Flow::Reacted, 0, &next[3 * k..], 1.0);
        if stage.q_e > 0.0 {
            let per_volume = 1.0 / (stage.q_e * dt);
            log.effluent.push(EffluentSegment {
                t: state.t,
                dt,
                q_e: stage.q_e,
                c: next[2 * k..2 * k + k_c].iter().map(|m| m * per_volume).collect(),
                s: next[2 * k + k_c..3 * k].iter().map(|m| m * per_volume).collect(),
            });
        }

        let volume = self.trajectory.volume(t_next);
        if !(volume > 0.0) {
            return Err(Error::EmptyMixture { time_s: t_next });
        }
        for (dst, m) in state.c.iter_mut().chain(state.s.iter_mut()).zip(&next[..k]) {
            *dst = m / volume;
        }
        state.t = t_next;
        state.volume = volume;
        self.check_invariants(state, log)
    }

    fn check_invariants(&self, state: &MixedState, log: &mut StepLog) -> Result<()> {
        let lowest = state.c.iter().chain(&state.s).fold(f64::INFINITY, |m, &v| m.min(v));
        let x = state.total_solids();
        let w = water_concentration(self.params, x, &state.s);
        if !(lowest >= 0.0) || !(w >= 0.0) {
            return Err(Error::Scheme {
                time_s: state.t,
                detail: format!("mixed tank: min concentration {lowest:e}, X = {x}, W = {w}"),
            });
        }
        log.monitor.observe(lowest, x, w, self.params.x_max);
        log.monitor.steps += 1;
        Ok(())
    }

    /// Integrates until `state.t == t_target`.
    pub fn advance(&mut self, state: &mut MixedState, stage: &Stage, t_target: f64, log: &mut StepLog) -> Result<()> {
        while state.t < t_target {
            self.step(state, stage, t_target, log)?;
        }
        Ok(())
    }

    /// Runs an ODE stage, sampling the outlets every `cadence` seconds on
    /// `[t_start, t_end)`.
    pub fn integrate_react_stage(
        &mut self,
        state: &mut MixedState,
        stage: &Stage,
        cadence: f64,
        log: &mut StepLog,
    ) -> Result<Vec<OutletSample>> {
        if stage.model != ModelKind::Ode {
            return Err(Error::Config(format!("stage '{}' is not an ODE stage", stage.name)));
        }
        let mut samples = Vec::new();
        for t in sample_times(stage.t_start, stage.t_end, cadence) {
            self.advance(state, stage, t, log)?;
            samples.push(self.outlet(state, stage));
        }
        self.advance(state, stage, stage.t_end, log)?;
        Ok(samples)
    }

    /// Outlets of a mixed tank: both carry the mixture concentrations.
    pub fn outlet(&self, state: &MixedState, stage: &Stage) -> OutletSample {
        let extracting = stage.q_e > 0.0;
        let gate = |v: &Vec<f64>| if extracting { v.clone() } else { vec![0.0; v.len()] };
        OutletSample {
            t: state.t,
            zbar: self.trajectory.zbar(state.t),
            c_u: state.c.clone(),
            s_u: state.s.clone(),
            c_e: gate(&state.c),
            s_e: gate(&state.s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::MassLedger;
    use crate::geometry::{surface_trajectory, StageSchedule, TankGeometry};
    use crate::reactions::{DenitrificationParams, NITRATE_COD_FACTOR};

    const H: f64 = 3600.0;

    fn stage(t1: f64, q_f: f64, q_u: f64, q_e: f64, feed: (Vec<f64>, Vec<f64>)) -> Stage {
        Stage {
            name: "react".into(),
            t_start: 0.0,
            t_end: t1,
            q_f,
            q_u,
            q_e,
            c_feed: feed.0,
            s_feed: feed.1,
            model: ModelKind::Ode,
        }
    }

    fn setup(st: Stage, zbar0: f64) -> (ReactionModel, SurfaceTrajectory, MaterialParams, StageSchedule) {
        let reactions = ReactionModel::denitrification(DenitrificationParams::default()).unwrap();
        let schedule = StageSchedule::new(vec![st], 2, 3).unwrap();
        let geometry = TankGeometry::cylinder(400.0, 3.0).unwrap();
        let trajectory = surface_trajectory(&geometry, &schedule, zbar0).unwrap();
        (reactions, trajectory, MaterialParams::default(), schedule)
    }

    fn new_log(m: &MixedState) -> StepLog {
        let names = ["X_OHO", "X_U", "S_NO3", "S_S", "S_N2"].map(String::from).to_vec();
        StepLog::new(MassLedger::new(names, m.mass()))
    }

    fn react_state(volume: f64) -> MixedState {
        MixedState {
            t: 0.0,
            volume,
            c: vec![2.4, 0.96],
            s: vec![4e-3, 0.02, 1e-3],
        }
    }

    fn zero_feed() -> (Vec<f64>, Vec<f64>) {
        (vec![0.0; 2], vec![0.0; 3])
    }

    fn run(dt: f64, st: Stage, mut m: MixedState) -> (MixedState, StepLog) {
        let (r, tr, p, sch) = setup(st, 3.0 - m.volume / 400.0);
        let mut lg = new_log(&m);
        let mut ode = OdeIntegrator::new(&r, &tr, &p, dt).unwrap();
        let stage = &sch.stages()[0];
        ode.advance(&mut m, stage, stage.t_end, &mut lg).unwrap();
        (m, lg)
    }

    #[test]
    fn closed_tank_without_reactions_is_stationary() {
        let r = ReactionModel::denitrification(DenitrificationParams::default()).unwrap();
        let m = MixedState { t: 0.0, volume: 400.0, c: vec![0.0, 1.0], s: vec![0.0, 0.0, 1.0] };
        let (dc, ds, dv) = ode_rhs(&m, &stage(H, 0.0, 0.0, 0.0, zero_feed()), &r).unwrap();
        assert!(dc.iter().chain(&ds).all(|&v| v == 0.0));
        assert_eq!(dv, 0.0);
    }

    #[test]
    fn withdrawal_leaves_concentrations_reaction_driven() {
        let r = ReactionModel::denitrification(DenitrificationParams::default()).unwrap();
        let m = react_state(1190.0);
        let st = stage(H, 0.0, 100.0 / H, 0.0, zero_feed());
        let (dc, ds, dv) = ode_rhs(&m, &st, &r).unwrap();
        let (rc, rs) = r.reaction_terms(&m.c, &m.s).unwrap();
        assert_eq!((dc, ds), (rc, rs));
        assert!((dv + 100.0 / H).abs() < 1e-18);
        let empty = MixedState { volume: 0.0, ..m };
        assert!(ode_rhs(&empty, &st, &r).is_err());
    }

    #[test]
    fn closed_tank_invariants_hold() {
        let m0 = react_state(1190.0);
        let (m, lg) = run(1.0, stage(2.0 * H, 0.0, 0.0, 0.0, zero_feed()), m0.clone());
        let a = |m: &MixedState| m.s[0] + m.s[2];
        let b = |m: &MixedState| m.c[0] + m.c[1] + m.s[1] - NITRATE_COD_FACTOR * m.s[0];
        assert!((a(&m) - a(&m0)).abs() <= 1e-10 * a(&m0));
        assert!((b(&m) - b(&m0)).abs() <= 1e-10 * b(&m0));
        assert!(m.s[0] < 1e-5, "nitrate left: {}", m.s[0]);
        assert!(lg.ledger.close(&m.mass()).closed);
    }

    #[test]
    fn zero_state_stays_zero() {
        let m0 = MixedState { t: 0.0, volume: 800.0, c: vec![0.0; 2], s: vec![0.0; 3] };
        let (m, _) = run(1.0, stage(H, 0.0, 0.0, 0.0, zero_feed()), m0.clone());
        assert_eq!(m.c, m0.c);
        assert_eq!(m.s, m0.s);
    }

    #[test]
    fn ledger_closes_with_flows() {
        let feed = (vec![1.0, 0.5], vec![6e-3, 9e-4, 0.0]);
        let (m, lg) = run(1.0, stage(H, 200.0 / H, 10.0 / H, 0.0, feed), react_state(800.0));
        assert!((m.volume - 990.0).abs() < 1e-9);
        let report = lg.ledger.close(&m.mass());
        assert!(report.closed, "{report:?}");
        let (m, lg) = run(1.0, stage(H, 0.0, 0.0, 300.0 / H, zero_feed()), react_state(800.0));
        assert!(lg.ledger.close(&m.mass()).closed);
        let (eff, _) = lg.effluent.extracted_mass(0.0, H);
        assert!((eff[0] - lg.ledger.effluent()[0]).abs() <= 1e-12 * eff[0]);
    }

    #[test]
    fn fourth_order_convergence() {
        let st = || stage(1800.0, 0.0, 0.0, 0.0, zero_feed());
        let finals: Vec<MixedState> = [8.0, 4.0, 2.0].iter().map(|&dt| run(dt, st(), react_state(1190.0)).0).collect();
        let diff = |a: &MixedState, b: &MixedState| {
            a.c.iter().chain(&a.s).zip(b.c.iter().chain(&b.s)).map(|(x, y)| (x - y).abs()).sum::<f64>()
        };
        let order = (diff(&finals[0], &finals[1]) / diff(&finals[1], &finals[2])).log2();
        assert!(order >= 3.5, "observed order {order}");
    }
}
