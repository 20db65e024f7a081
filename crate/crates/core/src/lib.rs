//! Cooperative task scheduling for teams of agents that share computation
//! and data over intermittent links.

pub mod baseline;
pub mod cli;
pub mod distsim;
pub mod encoder;
pub mod model;
pub mod rational;
pub mod render;
pub mod scenarios;
pub mod solver;
pub mod verify;

pub use rational::Q;
