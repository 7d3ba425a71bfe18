//! Small explicit bases for primitive permutation groups and classical
//! groups acting on subspaces, with independent verification and rigorous
//! checks of base-size inequalities.

pub mod error;
pub mod gf;
pub mod linalg;
pub mod forms;
pub mod permgrp;
pub mod classical;
pub mod bounds;
pub mod verify;
pub mod construct;
pub mod cli;

pub use error::{Error, Result};
