//! Behavior of the driver on the 1D benchmark at full size: the
//! decomposed and undecomposed runs land on objectives within one
//! percent of each other.

use std::sync::Arc;

use tvslip::control::ValueSet;
use tvslip::grid::Grid;
use tvslip::model::{Conv1dModel, Model};
use tvslip::patches::make_uniform_patches;
use tvslip::slip::{self, SlipConfig, StopReason};

#[test]
fn oned_benchmark_objective_parity_across_patch_counts() {
    let grid = Arc::new(Grid::new_1d(-1.0, 1.0, 512).unwrap());
    let vset = ValueSet::new(vec![-1, 0, 1]).unwrap();
    let model = Model::Conv1d(Conv1dModel::new(grid.clone(), 0.1).unwrap());
    let lipschitz = model.lipschitz_bound().unwrap();
    let cfg = SlipConfig {
        delta0: 0.125,
        sigma: 1e-4,
        max_outer_iters: 1000,
        lipschitz,
        ..SlipConfig::default()
    };

    let mut js = Vec::new();
    for np in [1usize, 4] {
        let patches = make_uniform_patches(&grid, [np, 1], [0.2, 0.0]).unwrap();
        let w0 = slip::default_start(&model, &vset);
        let res = slip::run(&model, 5e-4, &vset, &patches, &cfg, w0, None).unwrap();
        assert_eq!(res.reason, StopReason::Stationary);
        assert!(res.violations.is_empty(), "{:?}", res.violations);
        js.push(res.final_objective.j);
    }
    let rel = (js[1] - js[0]).abs() / js[0];
    assert!(rel <= 0.01, "J(np=4) = {} vs J(np=1) = {} (rel {rel:.3e})", js[1], js[0]);
}
