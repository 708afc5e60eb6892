//! Multi-period DC linear optimal power flow with storage expansion, and the
//! time series aggregation methods used to shrink it.
//!
//! The pipeline is: [`network`] data → [`tsam`] aggregation (chronological
//! hour segments or coupled representative days) → [`lpmodel`] LP emission →
//! [`solver`] → [`indicators`]. [`spatial`] reduces the bus count instead of
//! the time dimension, and [`harness`] drives parameter sweeps.

pub mod network;
pub mod lpmodel;
pub mod solver;
pub mod tsam;
pub mod spatial;
pub mod indicators;
pub mod harness;
