//! Delivery-weighted rehandle objective.
//!
//! Each container contributes `(1 / delivery_date) × rehandles`, where the
//! rehandle count depends on [`FitnessMode`]. Lower is better; zero means no
//! container has to be moved to reach another one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::validate_layout;
use crate::yard::{Container, ContainerId, Coord, Instance, Layout};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitnessMode {
    /// Count only containers above with a strictly later delivery date.
    #[default]
    Blocking,
    /// Count every container above.
    Above,
}

impl FitnessMode {
    pub fn name(self) -> &'static str {
        match self {
            FitnessMode::Blocking => "blocking",
            FitnessMode::Above => "above",
        }
    }
}

impl fmt::Display for FitnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitnessMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blocking" => Ok(FitnessMode::Blocking),
            "above" => Ok(FitnessMode::Above),
            other => Err(format!("unknown fitness mode `{other}` (expected blocking or above)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitnessError {
    #[error("delivery date must be >= 1, got {0}")]
    Domain(u32),
    #[error("container {0} is not placed")]
    NotPlaced(ContainerId),
    #[error("layout is incomplete: container {0} is not placed")]
    Incomplete(ContainerId),
    #[error("retrieval simulation needs a complete feasible layout: {0}")]
    Precondition(String),
}

/// Non-negative objective value.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FitnessValue(pub f64);

impl FitnessValue {
    pub const ZERO: FitnessValue = FitnessValue(0.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for FitnessValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn priority(delivery_date: u32) -> Result<f64, FitnessError> {
    if delivery_date == 0 {
        return Err(FitnessError::Domain(delivery_date));
    }
    Ok(1.0 / f64::from(delivery_date))
}

fn count_above(layout: &Layout, at: Coord, delivery_date: u32, mode: FitnessMode) -> u32 {
    let n3 = layout.config().n3;
    (at.z + 1..=n3)
        .filter_map(|z| layout.at(Coord { z, ..at }))
        .filter(|c| match mode {
            FitnessMode::Above => true,
            FitnessMode::Blocking => c.delivery_date > delivery_date,
        })
        .count() as u32
}

pub fn rehandle_count(layout: &Layout, container: &Container, mode: FitnessMode) -> Result<u32, FitnessError> {
    let at = layout
        .position_of(container.id)
        .ok_or(FitnessError::NotPlaced(container.id))?;
    Ok(count_above(layout, at, container.delivery_date, mode))
}

/// Sum of `priority × rehandles` over all instance containers, accumulated in
/// ascending id order.
pub fn layout_fitness(layout: &Layout, instance: &Instance, mode: FitnessMode) -> Result<FitnessValue, FitnessError> {
    let mut ordered: Vec<&Container> = instance.containers().iter().collect();
    ordered.sort_by_key(|c| c.id);
    let mut total = 0.0;
    for c in ordered {
        let at = layout.position_of(c.id).ok_or(FitnessError::Incomplete(c.id))?;
        let m = count_above(layout, at, c.delivery_date, mode);
        if m > 0 {
            total += priority(c.delivery_date)? * f64::from(m);
        }
    }
    Ok(FitnessValue(total))
}

fn require_feasible(layout: &Layout, instance: &Instance) -> Result<(), FitnessError> {
    let violations = validate_layout(layout, instance).map_err(|e| FitnessError::Precondition(e.to_string()))?;
    match violations.first() {
        Some(v) => Err(FitnessError::Precondition(v.to_string())),
        None => Ok(()),
    }
}

/// Stacks as bottom-to-top vectors keyed by their ground coordinate.
fn stacks_of(layout: &Layout) -> BTreeMap<Coord, Vec<Container>> {
    let mut stacks: BTreeMap<Coord, Vec<Container>> = BTreeMap::new();
    for (p, c) in layout.occupied() {
        stacks.entry(Coord { z: 1, ..p }).or_default().push(*c);
    }
    stacks
}

/// Retrieval order: ascending delivery date; equal dates leave top-down.
fn retrieval_order(layout: &Layout) -> Vec<(Container, Coord)> {
    let mut order: Vec<(Container, Coord)> = layout.occupied().map(|(p, c)| (*c, p)).collect();
    order.sort_by(|(a, pa), (b, pb)| {
        a.delivery_date
            .cmp(&b.delivery_date)
            .then(pb.z.cmp(&pa.z))
            .then(a.id.cmp(&b.id))
    });
    order
}

/// Step-through retrieval simulation.
///
/// Containers leave in ascending delivery date, equal dates top-down within a
/// stack. To reach a container every container above it is lifted off (one
/// rehandle each, charged to the retrieved container), the target is taken out
/// and the lifted containers are set back in their original order. Returns
/// the rehandles charged to each container.
pub fn retrieval_oracle(layout: &Layout, instance: &Instance) -> Result<BTreeMap<ContainerId, u32>, FitnessError> {
    require_feasible(layout, instance)?;
    let mut stacks = stacks_of(layout);
    let mut charged = BTreeMap::new();
    for (target, at) in retrieval_order(layout) {
        let stack = stacks.get_mut(&Coord { z: 1, ..at }).expect("stack exists");
        let mut lifted = Vec::new();
        while stack.last().map(|c| c.id) != Some(target.id) {
            lifted.push(stack.pop().expect("target is in its stack"));
        }
        stack.pop();
        charged.insert(target.id, lifted.len() as u32);
        while let Some(c) = lifted.pop() {
            stack.push(c);
        }
    }
    Ok(charged)
}

/// Retrieval with an off-yard buffer: lifted containers are parked outside
/// the yard and later leave from there at no cost. Per container this never
/// exceeds the blocking count.
pub fn buffered_retrieval(layout: &Layout, instance: &Instance) -> Result<BTreeMap<ContainerId, u32>, FitnessError> {
    require_feasible(layout, instance)?;
    let mut stacks = stacks_of(layout);
    let mut buffered = std::collections::BTreeSet::new();
    let mut charged = BTreeMap::new();
    for (target, at) in retrieval_order(layout) {
        if buffered.remove(&target.id) {
            charged.insert(target.id, 0);
            continue;
        }
        let stack = stacks.get_mut(&Coord { z: 1, ..at }).expect("stack exists");
        let mut moves = 0;
        while let Some(top) = stack.pop() {
            if top.id == target.id {
                break;
            }
            buffered.insert(top.id);
            moves += 1;
        }
        charged.insert(target.id, moves);
    }
    Ok(charged)
}
