//! Deterministic 2D indoor simulator with a modular object-goal navigation stack:
//! semantic mapping, frontier and prior-driven exploration, Fast Marching planning,
//! and a benchmark harness with SR, SPL, SRCC and failure attribution.

pub mod agentloop;
pub mod bench;
pub mod category;
pub mod config;
pub mod explore;
pub mod grid;
pub mod gridworld;
pub mod planner;
pub mod semmap;
pub mod sensors;

pub use category::Category;
