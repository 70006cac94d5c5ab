//! Scalar summaries of persistence barcodes.
//!
//! The crate computes the Topological Stability Index (TSI, the unbiased
//! sample variance of bar lifetimes), the Topological Signal Index (TSigI)
//! and the lifetime moment hierarchy, persistent and Rényi entropy, and the
//! scale-free cvTSI. It also ships the machinery to check the algebraic
//! identities and stability bounds relating these quantities, a
//! Vietoris–Rips persistence engine for degrees 0 and 1, synthetic data
//! generators, and a seeded Monte Carlo harness.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). The
//! `*64` aliases at the crate root fix the scalar to `f64`, which is what
//! the generators, the harness and the CLI use.
//!
//! ```
//! use barstat::{summaries, Barcode64};
//!
//! let b = Barcode64::from_lifetimes(1, &[0.0, 0.0, 0.0, 4.0]).unwrap();
//! assert_eq!(summaries::tsi(&b), 4.0);
//! ```

pub mod barcode;
pub mod entropy;
mod error;
pub mod harness;
pub mod incremental;
pub mod metrics;
pub mod rips;
mod scalar;
pub mod summaries;
pub mod synth;

pub use barcode::{Bar, Barcode, Diagram, InfinitePolicy, PointCloud};
pub use entropy::WeightVector;
pub use error::{Error, Result};
pub use harness::{CurvePoint, ExperimentConfig, ExperimentKind, Statistic};
pub use incremental::RunningStats;
pub use metrics::{BoundCheck, Matching, MatchTarget, PNorm};
pub use rips::{DistanceMatrix, FilteredSimplex};
pub use scalar::{compensated_sum, Scalar};
pub use summaries::SummaryReport;
pub use synth::{GbmParams, RngSeed, TrialRng};

pub type Bar64 = Bar<f64>;
pub type Barcode64 = Barcode<f64>;
pub type Diagram64 = Diagram<f64>;
pub type PointCloud64 = PointCloud<f64>;
pub type RunningStats64 = RunningStats<f64>;
pub type SummaryReport64 = SummaryReport<f64>;

pub type Bar32 = Bar<f32>;
pub type Barcode32 = Barcode<f32>;
pub type PointCloud32 = PointCloud<f32>;
