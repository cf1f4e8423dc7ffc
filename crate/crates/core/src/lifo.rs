//! Manual-planning baseline: containers are pushed onto stacks in arrival
//! order, filling one stack before moving to the next.
//!
//! Non-reefers walk a cursor over the regular blocks and then the powered
//! blocks; each stack is ordered by block, row (`y`) and column (`x`). A
//! container goes on top of the cursor's stack if that is legal, otherwise the
//! cursor advances (wrapping once around the yard). Reefers always take the
//! first powered stack that accepts them.

use thiserror::Error;

use crate::constraints::fits_clean;
use crate::yard::{ContainerId, ContainerType, Coord, Instance, Layout};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LifoError {
    #[error("no stack accepts container {0}")]
    NoFeasiblePush(ContainerId),
    #[error("invalid yard configuration: {0}")]
    InvalidConfig(String),
}

fn top_of(layout: &Layout, ground: Coord) -> Option<Coord> {
    let height = layout.stack_height(ground);
    (height < layout.config().n3).then_some(Coord { z: height + 1, ..ground })
}

pub fn lifo_allocate(instance: &Instance) -> Result<Layout, LifoError> {
    let cfg = *instance.config();
    let mut layout = Layout::new(cfg).map_err(|e| LifoError::InvalidConfig(e.to_string()))?;
    let powered: Vec<Coord> = cfg.stacks().filter(|p| p.j <= cfg.n_stock_refrig).collect();
    let general: Vec<Coord> = cfg
        .stacks()
        .filter(|p| p.j > cfg.n_stock_refrig)
        .chain(powered.iter().copied())
        .collect();

    let mut cursor = 0;
    for c in instance.containers() {
        let target = if c.ctype == ContainerType::Reefer {
            powered
                .iter()
                .find_map(|&g| top_of(&layout, g).filter(|&p| fits_clean(&layout, c.ctype, p)))
        } else {
            (0..general.len()).find_map(|step| {
                let at = (cursor + step) % general.len();
                let top = top_of(&layout, general[at]).filter(|&p| fits_clean(&layout, c.ctype, p))?;
                cursor = at;
                Some(top)
            })
        };
        let target = target.ok_or(LifoError::NoFeasiblePush(c.id))?;
        layout.place(*c, target).expect("top cell is free");
    }
    Ok(layout)
}
