//! Fourier expansions of GL(2) newforms at arbitrary cusps of Gamma0(N).

pub mod cli;
pub mod dirichlet;
pub mod cusps;
pub mod exactnum;
pub mod heckering;
pub mod numeric;
pub mod supercusp;
pub mod transfer;
