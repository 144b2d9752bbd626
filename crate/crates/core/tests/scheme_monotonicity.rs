//! Ordered initial solids profiles stay ordered under the settling scheme.

use proptest::prelude::*;

use sbr_core::audit::{MassLedger, StepLog};
use sbr_core::constitutive::{Constitutive, MaterialParams};
use sbr_core::geometry::{surface_trajectory, ModelKind, Stage, StageSchedule, TankGeometry};
use sbr_core::reactions::{ComponentRegistry, ReactionModel};
use sbr_core::settler::{Grid, MixtureState, PdeSolver};

const STEPS: usize = 100;

fn state(grid: &Grid, traj: &sbr_core::geometry::SurfaceTrajectory, x: &[f64]) -> MixtureState {
    let mass_c: Vec<f64> = x.iter().enumerate().map(|(j, v)| v * grid.cell_volume(j)).collect();
    let mass_s = vec![0.0; x.len()];
    MixtureState::from_masses(grid, traj, 0.0, 1, 1, mass_c, mass_s).unwrap()
}

fn solids(st: &MixtureState) -> Vec<f64> {
    (0..st.cells()).map(|j| st.total_solids(j)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ordered_profiles_stay_ordered(
        profile in prop::collection::vec((0.0..25.0_f64, 0.0..5.0_f64), 10..=40),
        q_u_per_h in prop_oneof![Just(0.0), 0.0..200.0_f64],
    ) {
        let n = profile.len();
        let geometry = TankGeometry::cylinder(400.0, 3.0).unwrap();
        let stage = Stage {
            name: "settle".into(),
            t_start: 0.0,
            t_end: 3600.0,
            q_f: 0.0,
            q_u: q_u_per_h / 3600.0,
            q_e: 0.0,
            c_feed: vec![0.0],
            s_feed: vec![0.0],
            model: ModelKind::Pde,
        };
        let schedule = StageSchedule::new(vec![stage.clone()], 1, 1).unwrap();
        let traj = surface_trajectory(&geometry, &schedule, 0.0).unwrap();
        let law = Constitutive::new(MaterialParams::default()).unwrap();
        let registry = ComponentRegistry::new(vec!["X".into()], vec!["S".into()]).unwrap();
        let reactions = ReactionModel::inert(registry);
        let grid = Grid::new(&geometry, n).unwrap();

        let low: Vec<f64> = profile.iter().map(|p| p.0).collect();
        let high: Vec<f64> = profile.iter().map(|p| (p.0 + p.1).min(29.0)).collect();
        let mut u = state(&grid, &traj, &low);
        let mut v = state(&grid, &traj, &high);
        let mut solver = PdeSolver::new(&grid, &law, &reactions, &traj, 0.9).unwrap();
        let names = vec!["X".to_string(), "S".to_string()];
        let mut log_u = StepLog::new(MassLedger::new(names.clone(), u.component_mass()));
        let mut log_v = StepLog::new(MassLedger::new(names, v.component_mass()));

        for _ in 0..STEPS {
            let dt = solver.cfl_dt(&u, &stage).unwrap().min(solver.cfl_dt(&v, &stage).unwrap());
            solver.step(&mut u, &stage, dt, &mut log_u).unwrap();
            solver.step(&mut v, &stage, dt, &mut log_v).unwrap();
            prop_assert_eq!(u.top(), v.top());
            for (j, (a, b)) in solids(&u).iter().zip(solids(&v)).enumerate() {
                prop_assert!(*a <= b + 1e-12 * b.max(1.0), "cell {} at t = {}: {} > {}", j, u.t(), a, b);
            }
        }
    }
}
