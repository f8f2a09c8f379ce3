#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod friedrichs;
pub mod grid;
pub mod hardy;
pub mod oracle;
pub mod quad;
pub mod spectral;
pub mod special;
pub mod sum;
pub mod survival;
pub mod timeop;

pub use error::{Error, Result};
