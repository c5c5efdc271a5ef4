//! Attachable backends.

pub mod formatter;
pub mod gridworld;
pub mod hanoi;
pub mod particles;

use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::error::Error;
use crate::interpreter::Interpreter;

/// Textual world selector: `none`, `hanoi`, `gridworld:<map-path>` or
/// `particles:<seed>,<n>`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum WorldSpec {
    #[default]
    None,
    Hanoi,
    Gridworld(PathBuf),
    Particles { seed: u64, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("invalid world spec `{0}` (expected none, hanoi, gridworld:<map> or particles:<seed>,<n>)")]
    Spec(String),
    #[error(transparent)]
    Map(#[from] gridworld::MapError),
    #[error("cannot attach world: {0}")]
    Attach(String),
}

impl FromStr for WorldSpec {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WorldError::Spec(s.to_string());
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, arg) {
            ("none", None) => Ok(WorldSpec::None),
            ("hanoi", None) => Ok(WorldSpec::Hanoi),
            ("gridworld", Some(path)) if !path.is_empty() => Ok(WorldSpec::Gridworld(path.into())),
            ("particles", Some(args)) => {
                let (seed, n) = args.split_once(',').ok_or_else(bad)?;
                Ok(WorldSpec::Particles {
                    seed: seed.trim().parse().map_err(|_| bad())?,
                    n: n.trim().parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl WorldSpec {
    /// Attaches the world (and the grid formatters) to `interp`.
    pub fn attach(&self, interp: &mut Interpreter) -> Result<(), WorldError> {
        let attach_err = |e: Error| WorldError::Attach(e.to_string());
        formatter::attach(interp).map_err(attach_err)?;
        match self {
            WorldSpec::None => {}
            WorldSpec::Hanoi => hanoi::attach(interp).map_err(attach_err)?,
            WorldSpec::Gridworld(path) => {
                let map = gridworld::GridMap::load(path)?;
                gridworld::attach(interp, map).map_err(attach_err)?;
            }
            WorldSpec::Particles { seed, n } => {
                particles::attach(interp, particles::ParticleWorld::new(*seed, *n)).map_err(attach_err)?;
            }
        }
        Ok(())
    }
}
