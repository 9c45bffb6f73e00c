//! Fixed-dimension spectral embeddings for 2D geospatial objects.

pub mod cft;
pub mod config;
pub mod geometry;
pub mod grid;
pub mod nn;
pub mod quadrature;
pub mod tasks;
pub mod train;
pub mod triangulate;
pub mod verify;
