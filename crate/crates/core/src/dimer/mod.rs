//! Periodic bipartite dimer models with a magnetic field.

pub mod graph;
pub mod poly;
pub mod spectral;
pub mod tentacle;

pub use graph::{
    honeycomb_1x1, honeycomb_nm, kasteleyn_sign_fix, square_1x1, validate_graph, Diagnostic, Edge, HoneycombWeights,
    PeriodicBipartiteGraph,
};
pub use poly::{newton_polygon, LaurentPoly2};
pub use spectral::{
    char_poly, cofactor_matrix, cofactor_poly, count_boundary_tentacles, kasteleyn_matrix, Axis, DimerModel, KinvValue,
    MagneticField, Phase, PhaseSample, RasterGrid,
};
