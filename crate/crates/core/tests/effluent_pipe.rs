//! Pipe profiles from characteristics agree with an upwind solver run at
//! Courant number one, where upwinding transports cell values exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbr_core::effluent::{EffluentHistory, EffluentSegment, PipeModel};

const AREA: f64 = 0.05;
const DX: f64 = 0.5;
const CELLS: usize = 200;

#[test]
fn characteristics_match_exact_upwind() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..10 {
        let mut history = EffluentHistory::new();
        // upwind cells, inlet first; None until liquid has arrived
        let mut cells: Vec<Option<(Vec<f64>, Vec<f64>)>> = vec![None; CELLS];
        let mut t = rng.gen_range(0.0..1000.0);
        for _ in 0..rng.gen_range(5..30) {
            let q_e = rng.gen_range(0.01..0.5);
            let c: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..10.0)).collect();
            let s: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..0.01)).collect();
            let steps = rng.gen_range(1..20);
            let dt = AREA * DX / q_e;
            for _ in 0..steps {
                cells.rotate_right(1);
                cells[0] = Some((c.clone(), s.clone()));
            }
            history.push(EffluentSegment { t, dt: dt * steps as f64, q_e, c, s });
            t += dt * steps as f64;
            // idle gaps do not move liquid in the pipe
            if rng.gen_bool(0.3) {
                t += rng.gen_range(10.0..500.0);
            }
        }

        let pipe = PipeModel::new(AREA, history).unwrap();
        for (i, expected) in cells.iter().enumerate() {
            let x = (i as f64 + 0.5) * DX;
            let got = pipe.profile(x, t);
            match (expected, got) {
                (None, None) => {}
                (Some((ce, se)), Some((cg, sg))) => {
                    assert_eq!(ce, &cg, "case {case}, cell {i}");
                    assert_eq!(se, &sg, "case {case}, cell {i}");
                }
                (e, g) => panic!("case {case}, cell {i}: upwind {e:?}, characteristics {g:?}"),
            }
        }
    }
}

#[test]
fn inlet_value_is_current_effluent() {
    let mut history = EffluentHistory::new();
    history.push(EffluentSegment { t: 0.0, dt: 10.0, q_e: 0.2, c: vec![1.0], s: vec![2.0] });
    history.push(EffluentSegment { t: 10.0, dt: 10.0, q_e: 0.2, c: vec![3.0], s: vec![4.0] });
    let pipe = PipeModel::new(AREA, history.clone()).unwrap();
    assert_eq!(pipe.profile(0.0, 15.0), history.effluent_record(15.0));
    assert_eq!(pipe.profile(0.0, 15.0), Some((vec![3.0], vec![4.0])));
}
