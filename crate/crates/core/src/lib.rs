//! Numerical laboratory for the growth and nodal geometry of harmonic
//! functions.
//!
//! The crate evaluates closed-form harmonic functions ([`hfun`]), measures
//! their growth (doubling index, frequency, boundary mass; [`growth`]),
//! estimates nodal volumes and certified lower bounds ([`nodal`]), runs the
//! multi-scale constructions that locate many disjoint zero-centered balls
//! ([`multiscale`]), and studies how the doubling index distributes over
//! subcubes ([`dist`]). The [`cli`] module wires everything to the
//! `nodal-lab` binary.

pub mod calibration;
pub mod cli;
pub mod corpus;
pub mod dist;
pub mod error;
pub mod geom;
pub mod growth;
pub mod hfun;
pub mod io;
pub mod multiscale;
pub mod nodal;
pub mod quad;
pub mod svg;

pub use error::{LabError, Result};
