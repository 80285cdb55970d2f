//! Composite-boson (coboson) normalization toolkit.
//!
//! Two bound fermions act as one boson only while the Pauli principle stays
//! irrelevant; the normalization factor chi_N of an N-coboson state, and above
//! all the ratio chi_{N+1}/chi_N, measure how far a given two-fermion state is
//! from that ideal. This crate computes chi sequences by several mutually
//! checking algorithms, evaluates the tight purity-based bounds on the ratio
//! together with the extremal Schmidt distributions that saturate them, applies
//! the triple uniforming/peaking operations behind those bounds, and samples
//! random Schmidt spectra to reproduce the bound-containment scans.

pub mod bounds;
pub mod chi;
pub mod error;
pub mod io;
pub mod numeric;
pub mod sampling;
pub mod scan;
pub mod schmidt;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use schmidt::{min_schmidt_number, ExtremalBranch, PowerSums, SchmidtDistribution};
