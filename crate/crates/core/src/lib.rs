//! Dynamic hydrodynamic torque converter model for Type-5 wind turbine
//! drivetrains, with steady-state initialization, parameter scaling,
//! drivetrain components, a stator-vane speed governor and a fixed-step
//! simulation engine.

pub mod config;
pub mod drivetrain;
pub mod error;
pub mod governor;
pub mod roots;
pub mod scaling;
pub mod sim;
pub mod steady;
pub mod tc;

pub use error::{Error, Result};
