//! Soundness checking for workflow nets.

pub mod cli;
pub mod io;
pub mod petri;
pub mod promela;
pub mod spin;
pub mod statespace;
pub mod wfnet;
