//! Timed-stream semantics for component models: parsing, consistency
//! checks, bounded refinement checking and interactive simulation.

pub mod behavior;
pub mod consistency;
pub mod expr;
pub mod kernel;
pub mod model;
pub mod network;
pub mod refinement;
pub mod speclang;
pub mod traces;
pub mod simulator;
