//! The bead model and the periodic dimer models whose amoeba tentacles
//! converge to it.

pub mod dimer;
pub mod discrete;
pub mod dpp;
pub mod error;
pub mod io;
pub mod kernel;
pub mod quad;
pub mod sampler;

pub use dimer::{DimerModel, HoneycombWeights, MagneticField, PeriodicBipartiteGraph, Phase};
pub use discrete::DiscreteParams;
pub use dpp::{BeadPoint, Interval, WindowSpec};
pub use error::{Error, Result};
pub use io::{Format, Table, Value};
pub use kernel::{BeadKernel, KernelParams};
