//! Yard geometry, container records and the occupancy grid.
//!
//! A yard is a set of identical blocks, each an `n1 × n2` floor plan with `n3`
//! tiers. Blocks `1..=n_stock_refrig` carry power points for reefers; the
//! remaining blocks are regular. All coordinates are 1-based and `z = 1` is
//! the ground tier.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Container category. The numeric codes are part of the file formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ContainerType {
    Dry = 1,
    Empty = 2,
    OpenTop = 3,
    OpenSide = 4,
    Tank = 5,
    Reefer = 6,
}

impl ContainerType {
    pub const ALL: [ContainerType; 6] = [
        ContainerType::Dry,
        ContainerType::Empty,
        ContainerType::OpenTop,
        ContainerType::OpenSide,
        ContainerType::Tank,
        ContainerType::Reefer,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(ContainerType::Dry),
            2 => Some(ContainerType::Empty),
            3 => Some(ContainerType::OpenTop),
            4 => Some(ContainerType::OpenSide),
            5 => Some(ContainerType::Tank),
            6 => Some(ContainerType::Reefer),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ContainerType::Dry => "dry",
            ContainerType::Empty => "empty",
            ContainerType::OpenTop => "open-top",
            ContainerType::OpenSide => "open-side",
            ContainerType::Tank => "tank",
            ContainerType::Reefer => "reefer",
        }
    }
}

impl TryFrom<u8> for ContainerType {
    type Error = String;

    fn try_from(code: u8) -> Result<Self, Self::Error> {
        ContainerType::from_code(code).ok_or_else(|| format!("unknown container type code {code}"))
    }
}

impl From<ContainerType> for u8 {
    fn from(t: ContainerType) -> u8 {
        t.code()
    }
}

impl fmt::Display for ContainerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContainerId(pub u32);

impl fmt::Display for ContainerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Container {
    pub id: ContainerId,
    pub ctype: ContainerType,
    /// Abstract time units, always `>= 1`.
    pub delivery_date: u32,
}

impl Container {
    pub fn new(id: u32, ctype: ContainerType, delivery_date: u32) -> Self {
        Container {
            id: ContainerId(id),
            ctype,
            delivery_date,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YardConfig {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
    pub n_stock_refrig: u32,
    pub n_stock_reg: u32,
}

impl YardConfig {
    pub fn new(n1: u32, n2: u32, n3: u32, n_stock_refrig: u32, n_stock_reg: u32) -> Result<Self, YardError> {
        let config = YardConfig {
            n1,
            n2,
            n3,
            n_stock_refrig,
            n_stock_reg,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), YardError> {
        if self.n1 == 0 || self.n2 == 0 || self.n3 == 0 {
            return Err(YardError::InvalidConfig(format!(
                "grid dimensions must be positive, got {}x{}x{}",
                self.n1, self.n2, self.n3
            )));
        }
        if self.blocks() == 0 {
            return Err(YardError::InvalidConfig("yard has no blocks".into()));
        }
        // Cell indices are kept in u32 arithmetic elsewhere.
        let cells = u64::from(self.blocks()) * u64::from(self.n1) * u64::from(self.n2) * u64::from(self.n3);
        if cells > u64::from(u32::MAX) {
            return Err(YardError::InvalidConfig(format!("yard too large ({cells} cells)")));
        }
        Ok(())
    }

    pub fn blocks(&self) -> u32 {
        self.n_stock_refrig + self.n_stock_reg
    }

    /// Cells per tier of one block.
    pub fn floor_size(&self) -> u32 {
        self.n1 * self.n2
    }

    pub fn block_capacity(&self) -> u32 {
        self.n1 * self.n2 * self.n3
    }

    /// Total number of cells in the yard.
    pub fn capacity(&self) -> u32 {
        self.blocks() * self.block_capacity()
    }

    pub fn refrigerated_capacity(&self) -> u32 {
        self.n_stock_refrig * self.block_capacity()
    }

    pub fn is_refrigerated_block(&self, j: u32) -> Result<bool, YardError> {
        if j == 0 || j > self.blocks() {
            return Err(YardError::BlockOutOfRange(j));
        }
        Ok(j <= self.n_stock_refrig)
    }

    pub fn contains(&self, c: Coord) -> bool {
        (1..=self.n1).contains(&c.x)
            && (1..=self.n2).contains(&c.y)
            && (1..=self.n3).contains(&c.z)
            && (1..=self.blocks()).contains(&c.j)
    }

    /// Every coordinate of the yard in storage order: block, then y, then x,
    /// with tiers innermost so each stack is contiguous and bottom-up.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        let cfg = *self;
        (1..=cfg.blocks()).flat_map(move |j| {
            (1..=cfg.n2).flat_map(move |y| (1..=cfg.n1).flat_map(move |x| (1..=cfg.n3).map(move |z| Coord { x, y, z, j })))
        })
    }

    /// Ground coordinates of every stack, in the same order as [`coords`](Self::coords).
    pub fn stacks(&self) -> impl Iterator<Item = Coord> + '_ {
        self.coords().filter(|c| c.z == 1)
    }

    pub(crate) fn index(&self, c: Coord) -> usize {
        let stack = ((c.j - 1) * self.n2 + (c.y - 1)) * self.n1 + (c.x - 1);
        (stack * self.n3 + (c.z - 1)) as usize
    }

    pub(crate) fn coord_at(&self, index: usize) -> Coord {
        let index = index as u32;
        let z = index % self.n3 + 1;
        let stack = index / self.n3;
        let x = stack % self.n1 + 1;
        let row = stack / self.n1;
        let y = row % self.n2 + 1;
        let j = row / self.n2 + 1;
        Coord { x, y, z, j }
    }
}

/// A cell position: `x ∈ 1..=n1`, `y ∈ 1..=n2`, tier `z ∈ 1..=n3`, block `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub x: u32,
    pub y: u32,
    pub z: u32,
    pub j: u32,
}

impl Coord {
    pub const fn new(x: u32, y: u32, z: u32, j: u32) -> Self {
        Coord { x, y, z, j }
    }

    pub fn above(self) -> Coord {
        Coord { z: self.z + 1, ..self }
    }

    pub fn below(self) -> Option<Coord> {
        (self.z > 1).then(|| Coord { z: self.z - 1, ..self })
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x={}, y={}, z={}, block={})", self.x, self.y, self.z, self.j)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum YardError {
    #[error("invalid yard configuration: {0}")]
    InvalidConfig(String),
    #[error("coordinate {0} is outside the yard")]
    OutOfBounds(Coord),
    #[error("block {0} does not exist")]
    BlockOutOfRange(u32),
    #[error("tier {0} does not exist")]
    TierOutOfRange(u32),
    #[error("cell {coord} is already occupied by container {occupant}")]
    Occupied { coord: Coord, occupant: ContainerId },
    #[error("container {id} is already placed at {at}")]
    DuplicatePlacement { id: ContainerId, at: Coord },
    #[error("cell {0} has no occupant")]
    NoOccupant(Coord),
    #[error("container {0} is not placed")]
    NotPlaced(ContainerId),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    /// More containers (or reefers) than the yard can hold.
    #[error("unsatisfiable instance: {0}")]
    OverCapacity(String),
}

/// The occupancy grid: which container (if any) sits in every cell.
///
/// The occupant's full record is stored in the cell, so a cell's type is
/// always read from the container itself. `placement` is the inverse map and
/// is kept in lock-step with the grid by [`place`](Layout::place) and
/// [`remove`](Layout::remove).
#[derive(Clone, Debug)]
pub struct Layout {
    config: YardConfig,
    cells: Vec<Option<Container>>,
    placement: BTreeMap<ContainerId, Coord>,
    // (j - 1) * n3 + (k - 1)
    tier_counts: Vec<u32>,
}

impl Layout {
    pub fn new(config: YardConfig) -> Result<Self, YardError> {
        config.validate()?;
        Ok(Layout {
            config,
            cells: vec![None; config.capacity() as usize],
            placement: BTreeMap::new(),
            tier_counts: vec![0; (config.blocks() * config.n3) as usize],
        })
    }

    pub fn config(&self) -> &YardConfig {
        &self.config
    }

    fn check_bounds(&self, coord: Coord) -> Result<usize, YardError> {
        if self.config.contains(coord) {
            Ok(self.config.index(coord))
        } else {
            Err(YardError::OutOfBounds(coord))
        }
    }

    pub fn occupant(&self, coord: Coord) -> Result<Option<&Container>, YardError> {
        let idx = self.check_bounds(coord)?;
        Ok(self.cells[idx].as_ref())
    }

    /// Unchecked lookup for callers that already know `coord` is in bounds.
    #[inline]
    pub(crate) fn at(&self, coord: Coord) -> Option<&Container> {
        debug_assert!(self.config.contains(coord));
        self.cells[self.config.index(coord)].as_ref()
    }

    pub fn is_occupied(&self, coord: Coord) -> Result<bool, YardError> {
        Ok(self.occupant(coord)?.is_some())
    }

    pub fn place(&mut self, container: Container, coord: Coord) -> Result<(), YardError> {
        let idx = self.check_bounds(coord)?;
        if let Some(other) = &self.cells[idx] {
            return Err(YardError::Occupied {
                coord,
                occupant: other.id,
            });
        }
        if let Some(&at) = self.placement.get(&container.id) {
            return Err(YardError::DuplicatePlacement { id: container.id, at });
        }
        self.cells[idx] = Some(container);
        self.placement.insert(container.id, coord);
        let slot = self.tier_slot(coord.j, coord.z);
        self.tier_counts[slot] += 1;
        Ok(())
    }

    pub fn remove(&mut self, coord: Coord) -> Result<Container, YardError> {
        let idx = self.check_bounds(coord)?;
        let container = self.cells[idx].take().ok_or(YardError::NoOccupant(coord))?;
        self.placement.remove(&container.id);
        let slot = self.tier_slot(coord.j, coord.z);
        self.tier_counts[slot] -= 1;
        Ok(container)
    }

    /// Exchanges the positions of two placed containers.
    pub fn swap(&mut self, a: ContainerId, b: ContainerId) -> Result<(), YardError> {
        let pa = self.position_of(a).ok_or(YardError::NotPlaced(a))?;
        let pb = self.position_of(b).ok_or(YardError::NotPlaced(b))?;
        if a == b {
            return Ok(());
        }
        let ia = self.config.index(pa);
        let ib = self.config.index(pb);
        self.cells.swap(ia, ib);
        self.placement.insert(a, pb);
        self.placement.insert(b, pa);
        // Tier counts are unchanged: both cells stay occupied.
        Ok(())
    }

    pub fn position_of(&self, id: ContainerId) -> Option<Coord> {
        self.placement.get(&id).copied()
    }

    pub fn container(&self, id: ContainerId) -> Option<&Container> {
        self.position_of(id).and_then(|c| self.at(c))
    }

    /// Placed containers with their coordinates, ascending by id.
    pub fn placements(&self) -> impl Iterator<Item = (ContainerId, Coord)> + '_ {
        self.placement.iter().map(|(&id, &c)| (id, c))
    }

    /// Occupied cells in storage order.
    pub fn occupied(&self) -> impl Iterator<Item = (Coord, &Container)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|c| (self.config.coord_at(i), c)))
    }

    pub fn len(&self) -> usize {
        self.placement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placement.is_empty()
    }

    /// Occupants strictly above `coord` in its stack, bottom to top. Empty
    /// cells are skipped, so gaps in an infeasible layout are tolerated.
    pub fn stack_above(&self, coord: Coord) -> Result<Vec<Container>, YardError> {
        self.check_bounds(coord)?;
        Ok((coord.z + 1..=self.config.n3)
            .filter_map(|z| self.at(Coord { z, ..coord }).copied())
            .collect())
    }

    /// Number of occupied cells on tier `k` of block `j`.
    pub fn floor_count(&self, j: u32, k: u32) -> Result<u32, YardError> {
        if j == 0 || j > self.config.blocks() {
            return Err(YardError::BlockOutOfRange(j));
        }
        if k == 0 || k > self.config.n3 {
            return Err(YardError::TierOutOfRange(k));
        }
        Ok(self.tier_counts[self.tier_slot(j, k)])
    }

    /// Height of the stack at `(x, y, j)`: the lowest empty tier minus one.
    pub(crate) fn stack_height(&self, ground: Coord) -> u32 {
        (1..=self.config.n3)
            .take_while(|&z| self.at(Coord { z, ..ground }).is_some())
            .count() as u32
    }

    fn tier_slot(&self, j: u32, k: u32) -> usize {
        ((j - 1) * self.config.n3 + (k - 1)) as usize
    }
}

impl PartialEq for Layout {
    /// Cell-wise equality of the occupancy grid.
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.cells == other.cells
    }
}

impl Eq for Layout {}

/// A yard plus the containers that must be stored in it.
#[derive(Clone, Debug)]
pub struct Instance {
    config: YardConfig,
    containers: Vec<Container>,
    by_id: HashMap<ContainerId, usize>,
}

impl Instance {
    /// Builds an instance, checking ids, dates and capacity bounds.
    pub fn new(config: YardConfig, containers: Vec<Container>) -> Result<Self, YardError> {
        config.validate()?;
        let instance = Self::new_unchecked(config, containers)?;
        if instance.containers.len() as u64 > u64::from(config.capacity()) {
            return Err(YardError::OverCapacity(format!(
                "{} containers exceed yard capacity {}",
                instance.containers.len(),
                config.capacity()
            )));
        }
        let reefers = instance.count_of(ContainerType::Reefer);
        if reefers as u64 > u64::from(config.refrigerated_capacity()) {
            return Err(YardError::OverCapacity(format!(
                "{reefers} reefers exceed refrigerated capacity {}",
                config.refrigerated_capacity()
            )));
        }
        Ok(instance)
    }

    /// Like [`Instance::new`] but skips the capacity bounds. Ids must still be
    /// unique and dates positive. Useful for building deliberately
    /// unsatisfiable instances.
    pub fn new_unchecked(config: YardConfig, containers: Vec<Container>) -> Result<Self, YardError> {
        let mut by_id = HashMap::with_capacity(containers.len());
        for (i, c) in containers.iter().enumerate() {
            if c.delivery_date == 0 {
                return Err(YardError::InvalidInstance(format!(
                    "container {} has delivery date 0 (must be >= 1)",
                    c.id
                )));
            }
            if by_id.insert(c.id, i).is_some() {
                return Err(YardError::InvalidInstance(format!("duplicate container id {}", c.id)));
            }
        }
        Ok(Instance {
            config,
            containers,
            by_id,
        })
    }

    pub fn config(&self) -> &YardConfig {
        &self.config
    }

    /// Containers in arrival (input) order.
    pub fn containers(&self) -> &[Container] {
        &self.containers
    }

    pub fn container(&self, id: ContainerId) -> Option<&Container> {
        self.by_id.get(&id).map(|&i| &self.containers[i])
    }

    pub fn len(&self) -> usize {
        self.containers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.containers.is_empty()
    }

    pub fn count_of(&self, ctype: ContainerType) -> usize {
        self.containers.iter().filter(|c| c.ctype == ctype).count()
    }

    /// Per-type counts indexed by `code - 1`.
    pub fn type_counts(&self) -> [usize; 6] {
        let mut counts = [0; 6];
        for c in &self.containers {
            counts[c.ctype.code() as usize - 1] += 1;
        }
        counts
    }

    /// Number of distinct container types present.
    pub fn type_variety(&self) -> usize {
        self.type_counts().iter().filter(|&&n| n > 0).count()
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.containers == other.containers
    }
}

impl Eq for Instance {}
