//! Transition probabilities for a two-level system driven through an avoided
//! crossing by a nonlinear sweep.
//!
//! Three independent routes are provided and meant to be played against each
//! other: direct integration of the Schrödinger equation ([`schrodinger`]),
//! the Dykhne-Davis-Pechukas contour method ([`ddp`]), and closed-form or
//! perturbative formulas ([`closed_form`]). [`gap_transform`] maps a
//! time-dependent gap onto an equivalent constant-gap problem.

pub mod batch;
pub mod closed_form;
pub mod ddp;
pub mod error;
pub mod gap_transform;
pub mod ode;
pub mod quadrature;
pub mod schrodinger;
pub mod sweep;

pub use error::{Error, Result};
pub use schrodinger::{Method, Readout, Settings, TransitionResult, TwoLevelState};
pub use sweep::{make_profile, Family, Sweep, SweepProfile};
