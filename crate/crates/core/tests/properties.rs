//! Property tests for the field algebra.

use std::sync::Arc;

use proptest::prelude::*;

use tvslip::control::{ControlField, ValueSet};
use tvslip::grid::Grid;

fn grid_and_fields() -> impl Strategy<Value = (Arc<Grid>, Vec<i32>, Vec<i32>)> {
    (2usize..12).prop_flat_map(|n| {
        let grid = Arc::new(Grid::new_1d(-1.0, 1.0, n).unwrap());
        (
            Just(grid),
            proptest::collection::vec(-2i32..=2, n),
            proptest::collection::vec(-2i32..=2, n),
        )
    })
}

fn vset() -> ValueSet {
    ValueSet::new(vec![-2, -1, 0, 1, 2]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tv_invariant_under_value_shift((grid, vals, _) in grid_and_fields(), c in -4i32..=4) {
        let w = vset();
        let field = ControlField::new(grid.clone(), vals.clone(), &w).unwrap();
        let shifted_set = ValueSet::new(w.values().iter().map(|v| v + c).collect()).unwrap();
        let shifted = ControlField::new(
            grid,
            vals.iter().map(|v| v + c).collect(),
            &shifted_set,
        ).unwrap();
        prop_assert_eq!(field.tv_units(), shifted.tv_units());
    }

    #[test]
    fn l1_is_a_metric((grid, a_vals, b_vals) in grid_and_fields()) {
        let w = vset();
        let a = ControlField::new(grid.clone(), a_vals.clone(), &w).unwrap();
        let b = ControlField::new(grid.clone(), b_vals.clone(), &w).unwrap();
        let zero = ControlField::constant(grid, 0);

        prop_assert_eq!(a.l1_units(&a).unwrap(), 0);
        prop_assert_eq!(a.l1_units(&b).unwrap(), b.l1_units(&a).unwrap());
        prop_assert!(a.l1_units(&b).unwrap() >= 0);
        // triangle inequality through the zero field
        prop_assert!(
            a.l1_units(&b).unwrap() <= a.l1_units(&zero).unwrap() + zero.l1_units(&b).unwrap()
        );
        prop_assert_eq!(a.l1_units(&b).unwrap() == 0, a.values() == b.values());
    }

    #[test]
    fn splice_matches_donor_on_patch_and_base_elsewhere(
        (grid, a_vals, b_vals) in grid_and_fields(),
        split in 0usize..12,
    ) {
        let w = vset();
        let base = ControlField::new(grid.clone(), a_vals, &w).unwrap();
        let donor = ControlField::new(grid.clone(), b_vals, &w).unwrap();
        let cells: Vec<usize> = (0..split.min(grid.n_cells())).collect();
        let spliced = base.splice(&cells, &donor).unwrap();
        for c in 0..grid.n_cells() {
            if cells.contains(&c) {
                prop_assert_eq!(spliced.value(c), donor.value(c));
            } else {
                prop_assert_eq!(spliced.value(c), base.value(c));
            }
        }
    }

    #[test]
    fn restricted_tv_sums_over_partitions((grid, vals, _) in grid_and_fields(), mask in any::<u64>()) {
        let w = vset();
        let field = ControlField::new(grid.clone(), vals, &w).unwrap();
        let mut part_a = Vec::new();
        let mut part_b = Vec::new();
        for id in 0..grid.interfaces().len() {
            if mask >> (id % 64) & 1 == 1 {
                part_a.push(id);
            } else {
                part_b.push(id);
            }
        }
        let total = field.tv_restricted_units(&part_a).unwrap()
            + field.tv_restricted_units(&part_b).unwrap();
        prop_assert_eq!(total, field.tv_units());
    }
}
