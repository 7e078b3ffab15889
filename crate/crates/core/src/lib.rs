// SPDX-License-Identifier: MIT OR Apache-2.0

#![forbid(unsafe_code)]

pub mod basis;
pub mod criterion;
pub mod error;
pub mod lsq;
pub mod search;
pub mod sim;
pub mod timeseries;

pub use basis::{BasisFamily, BasisSpec, DesignMatrix, Domain, KnotConfig};
pub use criterion::Penalty;
pub use error::{Error, ErrorKind, Result};
pub use lsq::{Band, LsqFit};
pub use search::{CandidateGrid, SearchConfig, Selection, SplineModel};
pub use sim::{SimReport, SimScenario};
pub use timeseries::{Align, DailySeries, Scale, SeriesFit, SeriesOptions};
