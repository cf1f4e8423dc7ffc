//! Instance generation, the comparison presets, and the JSON file formats for
//! instances and plans. The formats are described in `docs/FORMATS.md`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::yard::{Container, ContainerType, Coord, Instance, Layout, YardConfig, YardError};

pub const FORMAT_VERSION: u32 = 1;

/// Default inclusive range of delivery dates.
pub const DEFAULT_DATE_RANGE: (u32, u32) = (1, 30);

/// Per-type counts (`counts[code - 1]`) of the five comparison cases.
pub const TABLE_IV_COUNTS: [[u32; 6]; 5] = [
    [50, 0, 15, 0, 0, 0],
    [25, 25, 10, 0, 0, 0],
    [0, 0, 8, 5, 7, 15],
    [0, 14, 8, 5, 7, 15],
    [25, 14, 9, 8, 7, 12],
];

/// Yard used by the comparison cases: 3×3×3 blocks, 2 powered and 3 regular.
pub fn comparison_yard() -> YardConfig {
    YardConfig {
        n1: 3,
        n2: 3,
        n3: 3,
        n_stock_refrig: 2,
        n_stock_reg: 3,
    }
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("invalid content: {0}")]
    Invalid(String),
    /// Well-formed, but the yard cannot hold the containers.
    #[error("{0}")]
    Unsatisfiable(String),
}

impl From<YardError> for FormatError {
    fn from(e: YardError) -> Self {
        match e {
            YardError::OverCapacity(_) => FormatError::Unsatisfiable(e.to_string()),
            _ => FormatError::Invalid(e.to_string()),
        }
    }
}

/// Parameters of a random instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub config: YardConfig,
    /// Number of containers of each type, indexed by `code - 1`.
    pub counts: [u32; 6],
    /// Inclusive delivery date range, `1 <= min <= max`.
    pub date_range: (u32, u32),
    pub seed: u64,
}

impl GenSpec {
    pub fn new(config: YardConfig, counts: [u32; 6]) -> Self {
        GenSpec {
            config,
            counts,
            date_range: DEFAULT_DATE_RANGE,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_dates(mut self, min: u32, max: u32) -> Self {
        self.date_range = (min, max);
        self
    }
}

/// Containers get ids `1..=total` grouped by ascending type code; dates are
/// drawn uniformly from the date range.
pub fn generate_instance(spec: &GenSpec) -> Result<Instance, FormatError> {
    let (lo, hi) = spec.date_range;
    if lo == 0 || lo > hi {
        return Err(FormatError::Invalid(format!("date range [{lo}, {hi}] must satisfy 1 <= min <= max")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut containers = Vec::new();
    let mut next_id = 1;
    for (t, &n) in ContainerType::ALL.iter().zip(&spec.counts) {
        for _ in 0..n {
            containers.push(Container::new(next_id, *t, rng.gen_range(lo..=hi)));
            next_id += 1;
        }
    }
    Ok(Instance::new(spec.config, containers)?)
}

/// Comparison case `n` (1-based) on [`comparison_yard`].
pub fn table_iv_preset(n: usize, date_range: (u32, u32), seed: u64) -> Result<Instance, FormatError> {
    let counts = *TABLE_IV_COUNTS
        .get(n.wrapping_sub(1))
        .ok_or_else(|| FormatError::Invalid(format!("preset {n} does not exist (1..=5)")))?;
    generate_instance(&GenSpec {
        config: comparison_yard(),
        counts,
        date_range,
        seed,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContainerRecord {
    id: u32,
    #[serde(rename = "type")]
    ctype: ContainerType,
    delivery_date: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format_version: u32,
    config: YardConfig,
    containers: Vec<ContainerRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementRecord {
    id: u32,
    x: u32,
    y: u32,
    z: u32,
    j: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    format_version: u32,
    config: YardConfig,
    placements: Vec<PlacementRecord>,
}

fn check_version(v: u32) -> Result<(), FormatError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(FormatError::Version(v))
    }
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn instance_to_json(instance: &Instance) -> String {
    to_pretty(&InstanceFile {
        format_version: FORMAT_VERSION,
        config: *instance.config(),
        containers: instance
            .containers()
            .iter()
            .map(|c| ContainerRecord {
                id: c.id.0,
                ctype: c.ctype,
                delivery_date: c.delivery_date,
            })
            .collect(),
    })
}

pub fn instance_from_json(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    check_version(file.format_version)?;
    let containers = file
        .containers
        .into_iter()
        .map(|r| Container::new(r.id, r.ctype, r.delivery_date))
        .collect();
    Ok(Instance::new(file.config, containers)?)
}

pub fn plan_to_json(layout: &Layout) -> String {
    to_pretty(&PlanFile {
        format_version: FORMAT_VERSION,
        config: *layout.config(),
        placements: layout
            .placements()
            .map(|(id, p)| PlacementRecord {
                id: id.0,
                x: p.x,
                y: p.y,
                z: p.z,
                j: p.j,
            })
            .collect(),
    })
}

/// Parses a plan and rebuilds its layout from the records of `instance`.
/// Rule violations and missing containers are not errors here; they are
/// reported by [`validate_layout`](crate::constraints::validate_layout).
pub fn plan_from_json(text: &str, instance: &Instance) -> Result<Layout, FormatError> {
    let file: PlanFile = serde_json::from_str(text)?;
    check_version(file.format_version)?;
    if file.config != *instance.config() {
        return Err(FormatError::Invalid(format!(
            "plan config {:?} differs from instance config {:?}",
            file.config,
            instance.config()
        )));
    }
    let mut layout = Layout::new(file.config)?;
    for r in file.placements {
        let id = crate::yard::ContainerId(r.id);
        let container = instance
            .container(id)
            .ok_or_else(|| FormatError::Invalid(format!("placement of unknown container {id}")))?;
        layout.place(*container, Coord::new(r.x, r.y, r.z, r.j))?;
    }
    Ok(layout)
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_instance(path: impl AsRef<Path>, instance: &Instance) -> Result<(), FormatError> {
    write(path.as_ref(), &instance_to_json(instance))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, FormatError> {
    instance_from_json(&read(path.as_ref())?)
}

pub fn save_plan(path: impl AsRef<Path>, layout: &Layout) -> Result<(), FormatError> {
    write(path.as_ref(), &plan_to_json(layout))
}

pub fn load_plan(path: impl AsRef<Path>, instance: &Instance) -> Result<Layout, FormatError> {
    plan_from_json(&read(path.as_ref())?, instance)
}
