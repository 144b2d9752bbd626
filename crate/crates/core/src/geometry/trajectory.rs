use super::{StageSchedule, TankGeometry};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
struct Knot {
    t: f64,
    t_end: f64,
    volume: f64,
    rate: f64,
}

/// Mixture volume and surface location as functions of time.
///
/// With piecewise-constant flows the volume is piecewise linear in `t`, so
/// the whole trajectory is known before any concentration is computed.
#[derive(Clone, Debug)]
pub struct SurfaceTrajectory {
    geometry: TankGeometry,
    knots: Vec<Knot>,
    end_volume: f64,
}

/// Integrates `V̄' = Q̄ - Q_u` over the schedule starting from `zbar0`.
pub fn surface_trajectory(
    geometry: &TankGeometry,
    schedule: &StageSchedule,
    zbar0: f64,
) -> Result<SurfaceTrajectory> {
    let total = geometry.total_volume();
    let mut volume = geometry.volume_at(zbar0)?;
    // slack for rounding in the flow integrals, e.g. filling exactly to the top
    let slack = 1e-9 * total;
    let mut knots = Vec::with_capacity(schedule.stages().len());
    for stage in schedule.stages() {
        let rate = stage.volume_rate();
        let end = volume + rate * stage.duration();
        if end < -slack {
            return Err(Error::Infeasible {
                time_s: stage.t_start - volume / rate,
                reason: format!("tank empties during stage '{}'", stage.name),
            });
        }
        if end > total + slack {
            return Err(Error::Infeasible {
                time_s: stage.t_start + (total - volume) / rate,
                reason: format!("tank overflows during stage '{}'", stage.name),
            });
        }
        knots.push(Knot {
            t: stage.t_start,
            t_end: stage.t_end,
            volume,
            rate,
        });
        volume = end.clamp(0.0, total);
    }
    Ok(SurfaceTrajectory {
        geometry: geometry.clone(),
        knots,
        end_volume: volume,
    })
}

impl SurfaceTrajectory {
    pub fn geometry(&self) -> &TankGeometry {
        &self.geometry
    }

    /// Mixture volume `V̄(t)`; constant before the first and after the last stage.
    pub fn volume(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|k| k.t <= t);
        if idx == 0 {
            return self.knots.first().map_or(self.end_volume, |k| k.volume);
        }
        let k = self.knots[idx - 1];
        let v = k.volume + k.rate * (t.min(k.t_end) - k.t);
        v.clamp(0.0, self.geometry.total_volume())
    }

    /// `V̄'(t) = Q̄(t) - Q_u(t)` on the stage containing `t`.
    pub fn volume_rate(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|k| k.t <= t);
        if idx == 0 {
            0.0
        } else {
            self.knots[idx - 1].rate
        }
    }

    /// Surface depth `zbar(t) = V⁻¹(V̄(t))`.
    pub fn zbar(&self, t: f64) -> f64 {
        self.geometry
            .depth_at_volume(self.volume(t))
            .expect("trajectory volume stays within [0, V(0)]")
    }

    /// Indicator of the mixture region, `χ{zbar(t) < z < B}`.
    pub fn gamma(&self, z: f64, t: f64) -> u8 {
        u8::from(self.zbar(t) < z && z < self.geometry.depth())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ModelKind, Stage};

    const H: f64 = 3600.0;

    fn stage(t0: f64, t1: f64, q_f: f64, q_u: f64, q_e: f64) -> Stage {
        Stage {
            name: format!("[{t0}, {t1}) h"),
            t_start: t0 * H,
            t_end: t1 * H,
            q_f: q_f / H,
            q_u: q_u / H,
            q_e: q_e / H,
            c_feed: vec![],
            s_feed: vec![],
            model: ModelKind::Pde,
        }
    }

    fn example1() -> (TankGeometry, StageSchedule) {
        let schedule = StageSchedule::new(
            vec![
                stage(0.0, 1.0, 790.0, 0.0, 0.0),
                stage(1.0, 3.0, 0.0, 0.0, 0.0),
                stage(3.0, 5.0, 0.0, 0.0, 0.0),
                stage(5.0, 5.5, 0.0, 0.0, 1570.0),
                stage(5.5, 6.0, 0.0, 10.0, 0.0),
            ],
            0,
            0,
        )
        .unwrap();
        (TankGeometry::cylinder(400.0, 3.0).unwrap(), schedule)
    }

    #[test]
    fn closed_tank_keeps_the_surface() {
        let g = TankGeometry::cylinder(400.0, 3.0).unwrap();
        let s = StageSchedule::new(vec![stage(0.0, 2.0, 0.0, 0.0, 0.0)], 0, 0).unwrap();
        let tr = surface_trajectory(&g, &s, 1.3).unwrap();
        for t in [0.0, 100.0, 7200.0, 9000.0] {
            assert_eq!(tr.zbar(t), 1.3);
        }
    }

    #[test]
    fn example1_surface_after_fill() {
        let (g, s) = example1();
        let tr = surface_trajectory(&g, &s, 2.0).unwrap();
        assert!((tr.zbar(H) - 0.025).abs() < 1e-12);
        assert!((tr.zbar(0.5 * H) - 1.0125).abs() < 1e-12);
        assert_eq!(tr.gamma(1.0, 0.5 * H), 0);
        assert_eq!(tr.gamma(1.1, 0.5 * H), 1);
        assert!((tr.volume(6.0 * H) - 400.0).abs() < 1e-9);
    }

    #[test]
    fn gamma_limits() {
        let g = TankGeometry::cylinder(400.0, 3.0).unwrap();
        let empty = StageSchedule::new(vec![stage(0.0, 1.0, 0.0, 0.0, 0.0)], 0, 0).unwrap();
        let tr = surface_trajectory(&g, &empty, 3.0).unwrap();
        assert_eq!(tr.gamma(1.5, 0.0), 0);
        let tr = surface_trajectory(&g, &empty, 0.0).unwrap();
        assert_eq!(tr.gamma(3.0 - 1e-9, 0.0), 1);
    }

    #[test]
    fn surface_moves_monotonically() {
        let g = TankGeometry::cone(12.0, 10.0, 3.0).unwrap();
        let s = StageSchedule::new(
            vec![stage(0.0, 1.0, 500.0, 0.0, 0.0), stage(1.0, 2.0, 0.0, 0.0, 500.0)],
            0,
            0,
        )
        .unwrap();
        let tr = surface_trajectory(&g, &s, 2.0).unwrap();
        let zs: Vec<f64> = (0..=200).map(|i| tr.zbar(i as f64 * 2.0 * H / 200.0)).collect();
        assert!(zs[..=100].windows(2).all(|w| w[1] < w[0]));
        assert!(zs[100..].windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn overfill_and_empty_are_errors() {
        let g = TankGeometry::cylinder(400.0, 3.0).unwrap();
        let over = StageSchedule::new(vec![stage(0.0, 1.0, 1000.0, 0.0, 0.0)], 0, 0).unwrap();
        match surface_trajectory(&g, &over, 2.0) {
            Err(Error::Infeasible { time_s, .. }) => assert!((time_s - 0.8 * H).abs() < 1e-6),
            other => panic!("expected overflow, got {other:?}"),
        }
        let drain = StageSchedule::new(vec![stage(0.0, 1.0, 0.0, 300.0, 200.0)], 0, 0).unwrap();
        match surface_trajectory(&g, &drain, 2.0) {
            Err(Error::Infeasible { time_s, .. }) => assert!((time_s - 0.8 * H).abs() < 1e-6),
            other => panic!("expected empty tank, got {other:?}"),
        }
    }
}
