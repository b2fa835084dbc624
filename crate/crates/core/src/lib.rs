//! Wodzicki-Chern-Simons forms on loop spaces: curvature from second-order
//! jets, the `Y^{p,q}` metric family, pointwise WCS integrands and their
//! integrals over cycles induced by circle actions.

pub mod cli;
pub mod cycles;
pub mod geometry;
pub mod jets;
pub mod metrics;
pub mod quadrature;
pub mod selftest;
pub mod wcs;
