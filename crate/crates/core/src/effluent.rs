//! Coupling between the mixture surface and the effluent pipe.
//!
//! During extraction the mixture leaves through the surface into a pipe of
//! cross-section `A_e`. No reactions take place in the pipe, so the pipe
//! concentrations are the surface boundary values transported with speed
//! `Q_e / A_e`.

use crate::constitutive::Constitutive;
use crate::error::{Error, Result};

/// Pipe cross-section used when none is configured (m²).
pub const DEFAULT_PIPE_AREA: f64 = 0.05;

/// Mixture values just below the surface.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceValues<'a> {
    pub c: &'a [f64],
    pub s: &'a [f64],
    /// Total solids `X`.
    pub x: f64,
    /// One-sided estimate of `∂_z D(X)` from inside the mixture.
    pub d_gradient: f64,
    /// Cross-section at the surface, `A(zbar)`.
    pub area: f64,
}

/// Volumetric withdrawal coefficients `(e_C, e_S)`: the surface loses
/// `e_C·C` solids and `e_S·S` solubles per second.
///
/// Settling pushes solids away from the outlet, so the solids coefficient is
/// `Q_e - A(v_hs - ∂_z D)`, floored at zero: the outlet never feeds solids
/// back. The liquid that carries the solubles is whatever part of `Q_e` is
/// not solids volume.
pub(crate) fn withdrawal_coefficients(
    law: &Constitutive,
    x: f64,
    d_gradient: f64,
    area: f64,
    q_e: f64,
) -> (f64, f64) {
    if q_e <= 0.0 {
        return (0.0, 0.0);
    }
    let rho_x = law.params().rho_x;
    let relative = area * (law.v_hs_raw(x) - d_gradient);
    let solids = (q_e - relative).max(0.0);
    let liquid = (q_e - solids * x / rho_x).max(0.0);
    (solids, liquid / (1.0 - x / rho_x))
}

fn check_extraction(q_e: f64) -> Result<()> {
    if q_e > 0.0 && q_e.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "surface coupling needs an extraction flow Q_e > 0, got {q_e}"
        )))
    }
}

/// Solids flux through the surface, `Φ_{C,e}` (kg/s, negative when leaving).
pub fn coupling_flux_solids(law: &Constitutive, surface: &SurfaceValues, q_e: f64) -> Result<Vec<f64>> {
    check_extraction(q_e)?;
    law.v_hs(surface.x)?;
    let (e_c, _) = withdrawal_coefficients(law, surface.x, surface.d_gradient, surface.area, q_e);
    Ok(surface.c.iter().map(|&c| -e_c * c).collect())
}

/// Solubles flux through the surface, `Φ_{S,e}` (kg/s, negative when leaving).
pub fn coupling_flux_substrates(law: &Constitutive, surface: &SurfaceValues, q_e: f64) -> Result<Vec<f64>> {
    check_extraction(q_e)?;
    law.v_hs(surface.x)?;
    let (_, e_s) = withdrawal_coefficients(law, surface.x, surface.d_gradient, surface.area, q_e);
    Ok(surface.s.iter().map(|&s| -e_s * s).collect())
}

/// Pipe inlet concentration `-Φ / Q_e`.
pub fn boundary_values(flux: &[f64], q_e: f64) -> Vec<f64> {
    flux.iter().map(|&f| -f / q_e).collect()
}

/// Outlet concentrations at one instant (kg/m³).
#[derive(Clone, Debug, PartialEq)]
pub struct OutletSample {
    pub t: f64,
    pub zbar: f64,
    pub c_u: Vec<f64>,
    pub s_u: Vec<f64>,
    pub c_e: Vec<f64>,
    pub s_e: Vec<f64>,
}

/// Pipe inlet concentrations held over `[t, t + dt)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffluentSegment {
    pub t: f64,
    pub dt: f64,
    pub q_e: f64,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

impl EffluentSegment {
    fn end(&self) -> f64 {
        self.t + self.dt
    }
}

/// Append-only record of the pipe inlet values, one segment per time step.
#[derive(Clone, Debug, Default)]
pub struct EffluentHistory {
    segments: Vec<EffluentSegment>,
}

impl EffluentHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a segment; steps without extraction are not recorded.
    pub fn push(&mut self, segment: EffluentSegment) {
        if segment.q_e > 0.0 && segment.dt > 0.0 {
            debug_assert!(self.segments.last().is_none_or(|s| s.end() <= segment.t + 1e-9));
            self.segments.push(segment);
        }
    }

    pub fn segments(&self) -> &[EffluentSegment] {
        &self.segments
    }

    /// `∫ Q_e (C_e, S_e) dt` over `[t0, t1]`.
    pub fn extracted_mass(&self, t0: f64, t1: f64) -> (Vec<f64>, Vec<f64>) {
        let (k_c, k_s) = self
            .segments
            .first()
            .map_or((0, 0), |s| (s.c.len(), s.s.len()));
        let mut c = vec![0.0; k_c];
        let mut s = vec![0.0; k_s];
        for seg in &self.segments {
            let overlap = seg.end().min(t1) - seg.t.max(t0);
            if overlap <= 0.0 {
                continue;
            }
            // whole segments are summed as recorded so the total matches the step ledger
            let w = if seg.t >= t0 && seg.end() <= t1 { seg.dt } else { overlap };
            for (acc, v) in c.iter_mut().zip(&seg.c) {
                *acc += seg.q_e * v * w;
            }
            for (acc, v) in s.iter_mut().zip(&seg.s) {
                *acc += seg.q_e * v * w;
            }
        }
        (c, s)
    }

    fn segment_at(&self, t: f64) -> Option<&EffluentSegment> {
        let i = self.segments.partition_point(|s| s.t <= t);
        self.segments[..i].last().filter(|s| t < s.end())
    }

    /// `(C_e(t), S_e(t))`; zero outside extraction periods. `None` when no
    /// extraction was ever recorded.
    pub fn effluent_record(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let first = self.segments.first()?;
        Some(match self.segment_at(t) {
            Some(seg) => (seg.c.clone(), seg.s.clone()),
            None => (vec![0.0; first.c.len()], vec![0.0; first.s.len()]),
        })
    }
}

/// The effluent pipe on `x ≥ 0`, solved by characteristics from the inlet
/// history.
#[derive(Clone, Debug)]
pub struct PipeModel {
    area: f64,
    history: EffluentHistory,
}

impl PipeModel {
    pub fn new(area: f64, history: EffluentHistory) -> Result<Self> {
        if !(area > 0.0 && area.is_finite()) {
            return Err(Error::Config(format!("pipe area must be positive, got {area}")));
        }
        Ok(PipeModel { area, history })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn history(&self) -> &EffluentHistory {
        &self.history
    }

    /// Concentrations at distance `x` down the pipe at time `t`: the inlet
    /// value from the time `τ` with `∫_τ^t Q_e = A_e x`. `None` when that
    /// liquid entered before the recorded history.
    pub fn profile(&self, x: f64, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut remaining = self.area * x.max(0.0);
        for seg in self.history.segments.iter().rev() {
            if seg.t > t {
                continue;
            }
            let span = seg.end().min(t) - seg.t;
            let volume = seg.q_e * span;
            if remaining < volume || (remaining == 0.0 && span > 0.0) {
                return Some((seg.c.clone(), seg.s.clone()));
            }
            remaining -= volume;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::MaterialParams;

    fn law() -> Constitutive {
        Constitutive::new(MaterialParams::default()).unwrap()
    }

    fn surface<'a>(c: &'a [f64], s: &'a [f64], x: f64) -> SurfaceValues<'a> {
        SurfaceValues {
            c,
            s,
            x,
            d_gradient: 0.0,
            area: 400.0,
        }
    }

    #[test]
    fn clean_surface_gives_clean_effluent() {
        let l = law();
        let sv = surface(&[0.0, 0.0], &[1e-3, 2e-3, 0.0], 0.0);
        let q_e = 0.4;
        let phi_c = coupling_flux_solids(&l, &sv, q_e).unwrap();
        assert!(phi_c.iter().all(|&f| f == 0.0));
        let s_tilde = boundary_values(&coupling_flux_substrates(&l, &sv, q_e).unwrap(), q_e);
        assert!((s_tilde[0] - 1e-3).abs() < 1e-18 && (s_tilde[1] - 2e-3).abs() < 1e-18);
    }

    #[test]
    fn withdrawal_without_settling_takes_the_surface_value() {
        let mut p = MaterialParams::default();
        p.v0 = 1e-300;
        let l = Constitutive::new(p).unwrap();
        let sv = surface(&[2.0, 1.0], &[0.0, 0.0, 0.0], 3.0);
        let c_tilde = boundary_values(&coupling_flux_solids(&l, &sv, 0.3).unwrap(), 0.3);
        assert!((c_tilde[0] - 2.0).abs() < 1e-12 && (c_tilde[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn settling_can_hold_back_all_solids() {
        let l = law();
        let x = 3.0;
        let sv = surface(&[2.0, 1.0], &[1e-3, 0.0, 0.0], x);
        let q_e = 400.0 * l.v_hs(x).unwrap();
        let phi_c = coupling_flux_solids(&l, &sv, q_e).unwrap();
        assert!(phi_c.iter().all(|f| f.abs() < 1e-15));
        // closed form for the solubles: (A X v/(ρ_X - X) + Q_e) S
        let phi_s = coupling_flux_substrates(&l, &sv, q_e).unwrap();
        let expected = (400.0 * x * l.v_hs(x).unwrap() / (1050.0 - x) + q_e) * 1e-3;
        assert!((phi_s[0] + expected).abs() < 1e-15);
        assert!(-phi_s[0] / q_e > 1e-3);
    }

    #[test]
    fn unlimited_flux_matches_the_closed_form() {
        let l = law();
        let (x, dg, area, q_e) = (8.0, 1e-4, 300.0, 0.5);
        let c = [5.0, 3.0];
        let s = [1e-3, 2e-3, 4e-3];
        let sv = SurfaceValues { c: &c, s: &s, x, d_gradient: dg, area };
        let w = l.v_hs(x).unwrap() - dg;
        let phi_c = coupling_flux_solids(&l, &sv, q_e).unwrap();
        let phi_s = coupling_flux_substrates(&l, &sv, q_e).unwrap();
        for k in 0..2 {
            assert!((phi_c[k] - (area * w - q_e) * c[k]).abs() < 1e-14);
        }
        for k in 0..3 {
            let closed = -(area * x * w / (1050.0 - x) + q_e) * s[k];
            assert!((phi_s[k] - closed).abs() < 1e-15);
        }
    }

    #[test]
    fn no_extraction_is_an_error() {
        let l = law();
        let sv = surface(&[1.0], &[], 1.0);
        assert!(coupling_flux_solids(&l, &sv, 0.0).is_err());
    }

    fn history() -> EffluentHistory {
        let mut h = EffluentHistory::new();
        h.push(EffluentSegment { t: 0.0, dt: 10.0, q_e: 0.0, c: vec![9.0], s: vec![] });
        h.push(EffluentSegment { t: 10.0, dt: 5.0, q_e: 0.1, c: vec![1.0], s: vec![] });
        h.push(EffluentSegment { t: 15.0, dt: 5.0, q_e: 0.1, c: vec![2.0], s: vec![] });
        h
    }

    #[test]
    fn history_integrals_and_lookup() {
        let h = history();
        assert_eq!(h.segments().len(), 2);
        let (c, _) = h.extracted_mass(0.0, 100.0);
        assert!((c[0] - 1.5).abs() < 1e-15);
        let (c, _) = h.extracted_mass(12.0, 17.0);
        assert!((c[0] - (0.3 + 0.4)).abs() < 1e-15);
        assert_eq!(h.effluent_record(16.0).unwrap().0, vec![2.0]);
        assert_eq!(h.effluent_record(25.0).unwrap().0, vec![0.0]);
        assert!(EffluentHistory::new().effluent_record(1.0).is_none());
    }

    #[test]
    fn pipe_profile_is_a_delay_line() {
        let pipe = PipeModel::new(0.05, history()).unwrap();
        // speed Q_e / A_e = 2 m/s
        assert_eq!(pipe.profile(0.0, 19.0).unwrap().0, vec![2.0]);
        assert_eq!(pipe.profile(7.0, 19.0).unwrap().0, vec![2.0]);
        assert_eq!(pipe.profile(9.0, 19.0).unwrap().0, vec![1.0]);
        assert!(pipe.profile(30.0, 19.0).is_none());
        assert!(PipeModel::new(0.0, history()).is_err());
    }
}
