//! Carroll particles: algebra, coadjoint orbits, dynamics, gravity and quantization.

pub mod cli;
pub mod coadjoint;
pub mod dynamics;
pub mod error;
pub mod gravity;
pub mod lie;
pub mod quantize;
pub mod verify;

pub use error::{Error, Result};
