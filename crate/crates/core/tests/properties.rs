mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use yardstack::constraints::{
    check_floor_monotone, check_support, feasible_positions, feasible_positions_simulated, is_clean,
    rule_violations, validate_layout,
};
use yardstack::fitness::{buffered_retrieval, layout_fitness, rehandle_count, retrieval_oracle, FitnessMode};
use yardstack::{Container, Coord, Instance, Layout};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn placement_map_and_grid_agree(layout in scattered_layout()) {
        let mut seen = 0;
        for (id, at) in layout.placements() {
            prop_assert_eq!(layout.occupant(at).unwrap().map(|c| c.id), Some(id));
            seen += 1;
        }
        prop_assert_eq!(seen, layout.len());
        prop_assert_eq!(layout.occupied().count(), layout.len());
    }

    #[test]
    fn place_then_remove_is_identity(layout in scattered_layout(), pick in any::<prop::sample::Index>()) {
        let cfg = *layout.config();
        let free: Vec<Coord> = cfg.coords().filter(|&p| !layout.is_occupied(p).unwrap()).collect();
        prop_assume!(!free.is_empty());
        let at = free[pick.index(free.len())];
        let mut edited = layout.clone();
        let extra = Container::new(1_000_000, yardstack::ContainerType::Dry, 1);
        edited.place(extra, at).unwrap();
        prop_assert_eq!(edited.remove(at).unwrap(), extra);
        prop_assert_eq!(&edited, &layout);
        prop_assert_eq!(edited.position_of(extra.id), None);
    }

    #[test]
    fn floor_counts_sum_to_len(layout in scattered_layout()) {
        let cfg = *layout.config();
        let total: u32 = (1..=cfg.blocks())
            .flat_map(|j| (1..=cfg.n3).map(move |k| (j, k)))
            .map(|(j, k)| layout.floor_count(j, k).unwrap())
            .sum();
        prop_assert_eq!(total as usize, layout.len());
    }

    #[test]
    fn stack_above_counts_occupied_cells_above(layout in scattered_layout()) {
        let cfg = *layout.config();
        for (p, _) in layout.occupied() {
            let expected = (p.z + 1..=cfg.n3).filter(|&z| layout.is_occupied(Coord { z, ..p }).unwrap()).count();
            prop_assert_eq!(layout.stack_above(p).unwrap().len(), expected);
        }
    }

    #[test]
    fn supported_layouts_have_monotone_floors(layout in stacked_layout()) {
        prop_assert!(check_support(&layout).is_empty());
        prop_assert!(check_floor_monotone(&layout).is_empty());
    }

    #[test]
    fn is_clean_matches_rule_violations(layout in prop_oneof![stacked_layout(), scattered_layout()]) {
        prop_assert_eq!(is_clean(&layout), rule_violations(&layout).is_empty());
    }

    #[test]
    fn fast_feasible_positions_match_simulation(case in feasible_case(0.8), keep in 0.0f64..1.0) {
        let Some((inst, full)) = case else { return Ok(()) };
        // Strip containers from stack tops to get a clean partial layout.
        let mut partial = full.clone();
        let mut removed = Vec::new();
        let target = ((inst.len() as f64) * keep) as usize;
        while partial.len() > target {
            let (top, _) = partial
                .occupied()
                .filter(|(p, _)| !partial.is_occupied(p.above()).unwrap_or(false))
                .map(|(p, c)| (p, c.id))
                .max_by_key(|&(p, id)| (p.z, id))
                .unwrap();
            removed.push(partial.remove(top).unwrap());
        }
        prop_assert!(is_clean(&partial));
        for c in inst.containers() {
            prop_assert_eq!(feasible_positions(&partial, c), feasible_positions_simulated(&partial, c));
        }
    }

    #[test]
    fn dirty_layouts_use_the_reference_path(layout in scattered_layout()) {
        let probe = Container::new(2_000_000, yardstack::ContainerType::OpenSide, 3);
        prop_assert_eq!(feasible_positions(&layout, &probe), feasible_positions_simulated(&layout, &probe));
    }

    #[test]
    fn oracle_matches_blocking_count(case in feasible_case(0.9)) {
        let Some((inst, layout)) = case else { return Ok(()) };
        let oracle = retrieval_oracle(&layout, &inst).unwrap();
        for c in inst.containers() {
            prop_assert_eq!(oracle[&c.id], rehandle_count(&layout, c, FitnessMode::Blocking).unwrap());
        }
    }

    #[test]
    fn above_dominates_blocking_dominates_buffer(case in feasible_case(0.9)) {
        let Some((inst, layout)) = case else { return Ok(()) };
        let buffered = buffered_retrieval(&layout, &inst).unwrap();
        for c in inst.containers() {
            let blocking = rehandle_count(&layout, c, FitnessMode::Blocking).unwrap();
            prop_assert!(rehandle_count(&layout, c, FitnessMode::Above).unwrap() >= blocking);
            prop_assert!(buffered[&c.id] <= blocking);
        }
        let f = |m| layout_fitness(&layout, &inst, m).unwrap().value();
        prop_assert!(f(FitnessMode::Above) >= f(FitnessMode::Blocking));
    }

    #[test]
    fn scaling_dates_scales_blocking_fitness(case in feasible_case(0.9), k in 2u32..=7) {
        let Some((inst, layout)) = case else { return Ok(()) };
        let scale = |c: &Container| Container::new(c.id.0, c.ctype, c.delivery_date * k);
        let scaled_inst = Instance::new(*inst.config(), inst.containers().iter().map(scale).collect()).unwrap();
        let mut scaled = Layout::new(*inst.config()).unwrap();
        for (p, c) in layout.occupied() {
            scaled.place(scale(c), p).unwrap();
        }
        let base = layout_fitness(&layout, &inst, FitnessMode::Blocking).unwrap().value();
        let after = layout_fitness(&scaled, &scaled_inst, FitnessMode::Blocking).unwrap().value();
        prop_assert!((after * f64::from(k) - base).abs() <= 1e-12 * base.max(1.0));
        prop_assert_eq!(base == 0.0, after == 0.0);
    }

    #[test]
    fn blocking_zero_iff_nothing_later_above(case in feasible_case(0.9)) {
        let Some((inst, layout)) = case else { return Ok(()) };
        let zero = layout_fitness(&layout, &inst, FitnessMode::Blocking).unwrap().value() == 0.0;
        let blocked = layout.occupied().any(|(p, c)| {
            layout.stack_above(p).unwrap().iter().any(|o| o.delivery_date > c.delivery_date)
        });
        prop_assert_eq!(zero, !blocked);
    }

    #[test]
    fn swapping_stacks_of_one_block_keeps_fitness(case in feasible_case(0.9)) {
        let Some((inst, layout)) = case else { return Ok(()) };
        // Mirror every block along y; rows move as a whole so open-side
        // neighbourhoods are preserved.
        let cfg = *layout.config();
        let mut mirrored = Layout::new(cfg).unwrap();
        for (p, c) in layout.occupied() {
            mirrored.place(*c, Coord { y: cfg.n2 + 1 - p.y, ..p }).unwrap();
        }
        prop_assert!(validate_layout(&mirrored, &inst).unwrap().is_empty());
        for mode in [FitnessMode::Blocking, FitnessMode::Above] {
            prop_assert_eq!(
                layout_fitness(&layout, &inst, mode).unwrap(),
                layout_fitness(&mirrored, &inst, mode).unwrap()
            );
        }
    }
}

#[test]
fn generated_feasible_layouts_are_valid() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let mut found = 0;
    let mut sizes = BTreeMap::new();
    for _ in 0..300 {
        if let Some((inst, layout)) = feasible_case(0.9).new_tree(&mut runner).unwrap().current() {
            assert!(validate_layout(&layout, &inst).unwrap().is_empty());
            found += 1;
            *sizes.entry(inst.len() > 5).or_insert(0) += 1;
        }
    }
    assert!(found > 200, "generator found only {found} feasible cases");
    assert!(sizes.get(&true).copied().unwrap_or(0) > 50);
}
