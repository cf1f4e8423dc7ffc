//! Stacking and placement rules.
//!
//! Each rule is an independent predicate over a [`Layout`] returning the
//! violations it finds. [`validate_layout`] runs all of them plus a
//! completeness check against an [`Instance`]. [`feasible_positions`] answers
//! "where may this container go next" and is the primitive every solver in the
//! crate builds layouts with.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::yard::{Container, ContainerId, ContainerType, Coord, Instance, Layout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstraintId {
    /// A tier never holds more containers than the tier below it.
    FloorMonotone,
    /// An occupied cell above ground sits on an occupied cell.
    Support,
    /// Nothing is stacked on an open-top container.
    OpenTop,
    /// Nothing above an open-side container, and nothing beside it at larger x.
    OpenSide,
    /// An empty container only carries other empties.
    EmptyUnderFull,
    /// A tank only carries other tanks.
    TankStack,
    /// Reefers only go in powered blocks.
    ReeferBlock,
    /// A container of the instance is missing from the layout.
    PlacementIncomplete,
}

impl ConstraintId {
    pub const RULES: [ConstraintId; 7] = [
        ConstraintId::FloorMonotone,
        ConstraintId::Support,
        ConstraintId::OpenTop,
        ConstraintId::OpenSide,
        ConstraintId::EmptyUnderFull,
        ConstraintId::TankStack,
        ConstraintId::ReeferBlock,
    ];

    /// Equation number of the stacking model this rule encodes.
    pub fn equation(self) -> Option<u8> {
        match self {
            ConstraintId::FloorMonotone => Some(3),
            ConstraintId::Support => Some(4),
            ConstraintId::OpenTop => Some(5),
            ConstraintId::OpenSide => Some(6),
            ConstraintId::EmptyUnderFull => Some(7),
            ConstraintId::TankStack => Some(8),
            ConstraintId::ReeferBlock => Some(9),
            ConstraintId::PlacementIncomplete => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintId::FloorMonotone => "FloorMonotone",
            ConstraintId::Support => "Support",
            ConstraintId::OpenTop => "OpenTop",
            ConstraintId::OpenSide => "OpenSide",
            ConstraintId::EmptyUnderFull => "EmptyUnderFull",
            ConstraintId::TankStack => "TankStack",
            ConstraintId::ReeferBlock => "ReeferBlock",
            ConstraintId::PlacementIncomplete => "PlacementIncomplete",
        }
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a violation was detected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Location {
    Cell(Coord),
    /// Tier `tier` of block `block` (floor-count rule).
    Tier { block: u32, tier: u32 },
    /// A container that has no cell.
    Unplaced(ContainerId),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Cell(c) => write!(f, "{c}"),
            Location::Tier { block, tier } => write!(f, "(block={block}, tier={tier})"),
            Location::Unplaced(id) => write!(f, "container {id}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintId,
    pub location: Location,
    pub detail: String,
}

impl Violation {
    fn at(constraint: ConstraintId, coord: Coord, detail: String) -> Self {
        Violation {
            constraint,
            location: Location::Cell(coord),
            detail,
        }
    }

    pub fn coord(&self) -> Option<Coord> {
        match self.location {
            Location::Cell(c) => Some(c),
            _ => None,
        }
    }

    fn key(&self) -> (ConstraintId, Location) {
        (self.constraint, self.location)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.constraint, self.location, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntegrityError {
    #[error("layout holds container {0} which is not part of the instance")]
    UnknownContainer(ContainerId),
    #[error("layout record for container {0} differs from the instance record")]
    RecordMismatch(ContainerId),
    #[error("layout and instance use different yard configurations")]
    ConfigMismatch,
}

fn occupied_cells(layout: &Layout) -> impl Iterator<Item = (Coord, &Container)> {
    layout.occupied()
}

fn describe(c: &Container) -> String {
    format!("{} container {}", c.ctype, c.id)
}

/// Occupied cells above ground whose cell below is empty.
pub fn check_support(layout: &Layout) -> Vec<Violation> {
    occupied_cells(layout)
        .filter_map(|(p, c)| {
            let below = p.below()?;
            layout
                .at(below)
                .is_none()
                .then(|| Violation::at(ConstraintId::Support, p, format!("{} floats over an empty cell", describe(c))))
        })
        .collect()
}

/// Per block, every tier holding fewer containers than the tier above it.
pub fn check_floor_monotone(layout: &Layout) -> Vec<Violation> {
    let cfg = layout.config();
    let mut out = Vec::new();
    for j in 1..=cfg.blocks() {
        for k in 1..cfg.n3 {
            let lower = layout.floor_count(j, k).expect("in bounds");
            let upper = layout.floor_count(j, k + 1).expect("in bounds");
            if lower < upper {
                out.push(Violation {
                    constraint: ConstraintId::FloorMonotone,
                    location: Location::Tier { block: j, tier: k },
                    detail: format!("tier {k} holds {lower} containers but tier {} holds {upper}", k + 1),
                });
            }
        }
    }
    out
}

pub fn check_open_top(layout: &Layout) -> Vec<Violation> {
    let n3 = layout.config().n3;
    occupied_cells(layout)
        .filter(|(p, c)| c.ctype == ContainerType::OpenTop && p.z < n3)
        .filter_map(|(p, c)| {
            let top = layout.at(p.above())?;
            Some(Violation::at(
                ConstraintId::OpenTop,
                p,
                format!("{} carries {}", describe(c), describe(top)),
            ))
        })
        .collect()
}

/// Open-side containers with anything above them in their stack, or anything
/// at larger x on the same row and tier of the same block.
pub fn check_open_side(layout: &Layout) -> Vec<Violation> {
    let cfg = *layout.config();
    occupied_cells(layout)
        .filter(|(_, c)| c.ctype == ContainerType::OpenSide)
        .filter_map(|(p, c)| {
            let above = (p.z + 1..=cfg.n3).find_map(|z| layout.at(Coord { z, ..p }));
            if let Some(o) = above {
                return Some(Violation::at(
                    ConstraintId::OpenSide,
                    p,
                    format!("{} has {} stacked above", describe(c), describe(o)),
                ));
            }
            let beside = (p.x + 1..=cfg.n1).find_map(|x| layout.at(Coord { x, ..p }));
            beside.map(|o| {
                Violation::at(
                    ConstraintId::OpenSide,
                    p,
                    format!("{} has {} beside it at larger x", describe(c), describe(o)),
                )
            })
        })
        .collect()
}

/// Carrier containers of type `carrier` with something other than `carrier`
/// directly above.
fn check_carrier(layout: &Layout, carrier: ContainerType, rule: ConstraintId) -> Vec<Violation> {
    let n3 = layout.config().n3;
    occupied_cells(layout)
        .filter(|(p, c)| c.ctype == carrier && p.z < n3)
        .filter_map(|(p, c)| {
            let top = layout.at(p.above())?;
            (top.ctype != carrier).then(|| Violation::at(rule, p, format!("{} carries {}", describe(c), describe(top))))
        })
        .collect()
}

pub fn check_empty_stacking(layout: &Layout) -> Vec<Violation> {
    check_carrier(layout, ContainerType::Empty, ConstraintId::EmptyUnderFull)
}

pub fn check_tank_stacking(layout: &Layout) -> Vec<Violation> {
    check_carrier(layout, ContainerType::Tank, ConstraintId::TankStack)
}

pub fn check_reefer_block(layout: &Layout) -> Vec<Violation> {
    let refrig = layout.config().n_stock_refrig;
    occupied_cells(layout)
        .filter(|(p, c)| c.ctype == ContainerType::Reefer && p.j > refrig)
        .map(|(p, c)| {
            Violation::at(
                ConstraintId::ReeferBlock,
                p,
                format!("{} is in unpowered block {}", describe(c), p.j),
            )
        })
        .collect()
}

/// All seven stacking rules, without consulting an instance.
pub fn rule_violations(layout: &Layout) -> Vec<Violation> {
    let mut out = check_floor_monotone(layout);
    out.extend(check_support(layout));
    out.extend(check_open_top(layout));
    out.extend(check_open_side(layout));
    out.extend(check_empty_stacking(layout));
    out.extend(check_tank_stacking(layout));
    out.extend(check_reefer_block(layout));
    out
}

/// Every rule violation plus one [`ConstraintId::PlacementIncomplete`] entry
/// per instance container missing from the layout.
pub fn validate_layout(layout: &Layout, instance: &Instance) -> Result<Vec<Violation>, IntegrityError> {
    if layout.config() != instance.config() {
        return Err(IntegrityError::ConfigMismatch);
    }
    for (id, _) in layout.placements() {
        let known = instance.container(id).ok_or(IntegrityError::UnknownContainer(id))?;
        if layout.container(id) != Some(known) {
            return Err(IntegrityError::RecordMismatch(id));
        }
    }
    let mut out = rule_violations(layout);
    out.extend(
        instance
            .containers()
            .iter()
            .filter(|c| layout.position_of(c.id).is_none())
            .map(|c| Violation {
                constraint: ConstraintId::PlacementIncomplete,
                location: Location::Unplaced(c.id),
                detail: format!("{} is not placed", describe(c)),
            }),
    );
    Ok(out)
}

/// True iff the layout breaks none of the seven stacking rules. Single pass
/// with early exit; agrees with `rule_violations(layout).is_empty()`.
pub fn is_clean(layout: &Layout) -> bool {
    let cfg = *layout.config();
    let mut prev_tier = 0;
    for j in 1..=cfg.blocks() {
        for k in 1..=cfg.n3 {
            let n = layout.floor_count(j, k).expect("in bounds");
            if k > 1 && prev_tier < n {
                return false;
            }
            prev_tier = n;
        }
    }
    for (p, c) in layout.occupied() {
        if p.z > 1 && layout.at(Coord { z: p.z - 1, ..p }).is_none() {
            return false;
        }
        let above = if p.z < cfg.n3 { layout.at(p.above()) } else { None };
        let ok = match c.ctype {
            ContainerType::Dry => true,
            ContainerType::OpenTop => above.is_none(),
            ContainerType::Empty => above.is_none_or(|a| a.ctype == ContainerType::Empty),
            ContainerType::Tank => above.is_none_or(|a| a.ctype == ContainerType::Tank),
            ContainerType::Reefer => p.j <= cfg.n_stock_refrig,
            ContainerType::OpenSide => {
                (p.z + 1..=cfg.n3).all(|z| layout.at(Coord { z, ..p }).is_none())
                    && (p.x + 1..=cfg.n1).all(|x| layout.at(Coord { x, ..p }).is_none())
            }
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Whether a container of type `ctype` can go in `coord` without creating a
/// violation, assuming `layout` is currently clean (see [`is_clean`]).
///
/// Only the cells whose rule status can change are inspected: the target, its
/// stack neighbours, and open-side containers below it or to its left.
pub(crate) fn fits_clean(layout: &Layout, ctype: ContainerType, coord: Coord) -> bool {
    let cfg = *layout.config();
    debug_assert!(cfg.contains(coord));
    if layout.at(coord).is_some() {
        return false;
    }
    if ctype == ContainerType::Reefer && coord.j > cfg.n_stock_refrig {
        return false;
    }
    let below = coord.below().and_then(|b| layout.at(b));
    if coord.z > 1 && below.is_none() {
        return false;
    }
    // Support holds everywhere, so the cell above an empty cell is empty and
    // the new container carries nothing. Only the container below and
    // open-side neighbours can object.
    if let Some(b) = below {
        let objects = match b.ctype {
            ContainerType::OpenTop | ContainerType::OpenSide => true,
            ContainerType::Empty => ctype != ContainerType::Empty,
            ContainerType::Tank => ctype != ContainerType::Tank,
            ContainerType::Dry | ContainerType::Reefer => false,
        };
        if objects {
            return false;
        }
    }
    // Open-side containers further down the stack.
    if (1..coord.z.saturating_sub(1)).any(|z| layout.at(Coord { z, ..coord }).is_some_and(|c| c.ctype == ContainerType::OpenSide)) {
        return false;
    }
    // Open-side containers to the left on the same row and tier.
    if (1..coord.x).any(|x| layout.at(Coord { x, ..coord }).is_some_and(|c| c.ctype == ContainerType::OpenSide)) {
        return false;
    }
    // A new open-side container needs its row clear to the right.
    if ctype == ContainerType::OpenSide && (coord.x + 1..=cfg.n1).any(|x| layout.at(Coord { x, ..coord }).is_some()) {
        return false;
    }
    true
}

/// Reference implementation of [`feasible_positions`]: tries every empty
/// cell, re-validates the whole layout and keeps cells that add no violation
/// which was not already present.
pub fn feasible_positions_simulated(layout: &Layout, container: &Container) -> Vec<Coord> {
    if layout.position_of(container.id).is_some() {
        return Vec::new();
    }
    let baseline: BTreeSet<_> = rule_violations(layout).iter().map(Violation::key).collect();
    let mut scratch = layout.clone();
    let cfg = *layout.config();
    cfg.coords()
        .filter(|&p| layout.at(p).is_none())
        .filter(|&p| {
            scratch.place(*container, p).expect("empty in-bounds cell");
            let fresh = rule_violations(&scratch).iter().all(|v| baseline.contains(&v.key()));
            scratch.remove(p).expect("just placed");
            fresh
        })
        .collect()
}

/// Every empty cell where `container` can be placed without introducing a new
/// rule violation, in storage order. Returns nothing for a container that is
/// already placed.
pub fn feasible_positions(layout: &Layout, container: &Container) -> Vec<Coord> {
    if layout.position_of(container.id).is_some() {
        return Vec::new();
    }
    if !is_clean(layout) {
        return feasible_positions_simulated(layout, container);
    }
    feasible_clean(layout, container.ctype)
}

/// [`feasible_positions`] for a clean layout. Only the lowest free tier of
/// each stack can be supported, so one candidate per stack is tested.
pub(crate) fn feasible_clean(layout: &Layout, ctype: ContainerType) -> Vec<Coord> {
    let cfg = *layout.config();
    cfg.stacks()
        .filter_map(|ground| {
            let height = layout.stack_height(ground);
            (height < cfg.n3).then(|| Coord { z: height + 1, ..ground })
        })
        .filter(|&p| fits_clean(layout, ctype, p))
        .collect()
}
