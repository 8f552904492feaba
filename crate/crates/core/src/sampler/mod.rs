//! Random bead configurations: sequential determinantal sampling of the
//! continuous process and Markov chain sampling of the discrete model on a torus.

mod stats;
mod torus;
mod window;

pub use stats::*;
pub use torus::*;
pub use window::*;
