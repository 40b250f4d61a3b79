//! Smoothing tools for laminations by graphs over a transversal parameter.
//!
//! The crate estimates the log-Lipschitz modulus of slope fields, builds
//! transversal smoothers and composite approximants for laminations of the
//! plane by curves and of three-space by surfaces, and mollifies slope fields
//! in three-space to obtain a smooth leaf projection with quantitative error
//! and gradient bounds.

pub mod catalog;
pub mod chi;
pub mod config;
pub mod curve3d;
pub mod diff;
pub mod domain;
pub mod error;
pub mod family2d;
pub mod ode;
pub mod report;
pub mod slope;
pub mod smooth2d;
pub mod smooth3d_curve;
pub mod smooth3d_surface;
pub mod surface3d;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
