//! Noncommutative differential calculus over Moyal-type coordinate algebras,
//! warped-convolution deformations of flat metrics, and the curvature,
//! cosmology and operator checks built on top of them.

pub mod algebra;
pub mod centrality;
pub mod cosmology;
pub mod deformation;
pub mod gravity;
pub mod ncalc;
pub mod qoperators;
pub mod scalar;
pub mod spacetimes;
