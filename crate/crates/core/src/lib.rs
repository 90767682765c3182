//! Exact truncated arithmetic for Morava E-theory of finite abelian p-groups.

pub mod coeff;
pub mod config;
pub mod error;
pub mod euler;
pub mod fgl;
pub mod golden;
pub mod groupcoh;
pub mod localize;
pub mod report;
pub mod series;
pub mod suite;

pub use error::{Error, Result};
