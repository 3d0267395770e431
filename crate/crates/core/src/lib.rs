//! Infinitesimal rigidity of conic frameworks: agents measuring
//! pseudo-ranges `‖x_e − x_r‖ + β_r − β_e` with unknown clock biases.

pub mod commands;
pub mod decompose;
pub mod error;
pub mod fixtures;
pub mod flex;
pub mod framework;
pub mod graph;
pub mod io;
pub mod laman;
pub mod matroid;
pub mod numeric;
pub mod unidim;

pub use error::{Error, Result};
