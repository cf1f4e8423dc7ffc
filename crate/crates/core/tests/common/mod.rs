#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use yardstack::ga::random_feasible_layout;
use yardstack::{Container, ContainerType, Coord, Instance, Layout, YardConfig};

pub fn small_config() -> impl Strategy<Value = YardConfig> {
    (1u32..=3, 1u32..=3, 1u32..=3, 0u32..=2, 1u32..=2)
        .prop_map(|(n1, n2, n3, r, g)| YardConfig::new(n1, n2, n3, r, g).unwrap())
}

/// Containers with random types and dates, at most `fill` of the yard and
/// never more reefers than powered cells.
pub fn instance_for(config: YardConfig, fill: f64) -> impl Strategy<Value = Instance> {
    let max = ((config.capacity() as f64) * fill).floor() as usize;
    prop::collection::vec((0usize..6, 1u32..=12), 0..=max).prop_map(move |spec| {
        let mut reefers = 0;
        let containers = spec
            .into_iter()
            .enumerate()
            .map(|(i, (t, d))| {
                let mut ctype = ContainerType::ALL[t];
                if ctype == ContainerType::Reefer {
                    reefers += 1;
                    if reefers > config.refrigerated_capacity() {
                        ctype = ContainerType::Dry;
                    }
                }
                Container::new(i as u32 + 1, ctype, d)
            })
            .collect();
        Instance::new(config, containers).unwrap()
    })
}

pub fn small_instance(fill: f64) -> impl Strategy<Value = Instance> {
    small_config().prop_flat_map(move |c| instance_for(c, fill))
}

/// A feasible complete layout for a random instance, when the generator finds
/// one.
pub fn feasible_case(fill: f64) -> impl Strategy<Value = Option<(Instance, Layout)>> {
    (small_instance(fill), any::<u64>()).prop_map(|(inst, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_feasible_layout(&inst, &mut rng).ok().map(|l| (inst, l))
    })
}

/// Random stacks that respect gravity but no other rule.
pub fn stacked_layout() -> impl Strategy<Value = Layout> {
    small_config().prop_flat_map(|cfg| {
        let stacks = (cfg.blocks() * cfg.floor_size()) as usize;
        prop::collection::vec(prop::collection::vec((0usize..6, 1u32..=9), 0..=cfg.n3 as usize), stacks).prop_map(
            move |columns| {
                let mut layout = Layout::new(cfg).unwrap();
                let mut id = 0;
                for (ground, column) in cfg.stacks().zip(columns) {
                    for (k, (t, d)) in column.into_iter().enumerate() {
                        id += 1;
                        let c = Container::new(id, ContainerType::ALL[t], d);
                        layout.place(c, Coord { z: k as u32 + 1, ..ground }).unwrap();
                    }
                }
                layout
            },
        )
    })
}

/// Containers dropped into arbitrary cells, floating ones included.
pub fn scattered_layout() -> impl Strategy<Value = Layout> {
    small_config().prop_flat_map(|cfg| {
        let cells = cfg.capacity() as usize;
        prop::collection::vec(prop::option::weighted(0.4, (0usize..6, 1u32..=9)), cells).prop_map(move |slots| {
            let mut layout = Layout::new(cfg).unwrap();
            for (i, (p, slot)) in cfg.coords().zip(slots).enumerate() {
                if let Some((t, d)) = slot {
                    layout.place(Container::new(i as u32 + 1, ContainerType::ALL[t], d), p).unwrap();
                }
            }
            layout
        })
    })
}

/// The instance made of whatever `layout` holds.
pub fn instance_of(layout: &Layout) -> Instance {
    let containers = layout.placements().map(|(id, _)| *layout.container(id).unwrap()).collect();
    Instance::new_unchecked(*layout.config(), containers).unwrap()
}
