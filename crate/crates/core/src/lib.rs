//! Takayama's poverty index on income microdata.
//!
//! This crate holds the numerical core: empirical and population index
//! values, the influence kernels behind the index's asymptotic normality,
//! the plug-in and analytic asymptotic variance, confidence intervals, and
//! the statistical decomposability gap across population subgroups with
//! its limiting variance.
//!
//! It is `no_std` (it needs `alloc`). Sampling, file formats and the
//! command-line tool live in the companion `takayama` crate.
//!
//! ```
//! use takayama_core::{build_empirical, takayama_empirical, sigma_plugin};
//! use takayama_core::{confidence_interval, IncomeSample, PovertyConfig};
//!
//! let sample = IncomeSample::new(vec![1.0, 3.0, 0.5, 4.0, 2.5]).unwrap();
//! let dist = build_empirical(&sample).unwrap();
//! let config = PovertyConfig::new(2.0).unwrap();
//!
//! let index = takayama_empirical(&dist, &config);
//! let variance = sigma_plugin(&dist, &config);
//! let ci = confidence_interval(index.value, variance.total_clamped(), dist.size(), 0.95).unwrap();
//! assert!(ci.lower() <= index.value && index.value <= ci.upper());
//! ```

#![no_std]
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

pub mod bridge;
pub mod decomposition;
pub mod distribution;
mod error;
pub mod indices;
pub mod kernels;
pub mod quadrature;
pub mod representation;
pub mod sample;
pub mod special;
pub mod variance;

pub use bridge::bridge_cell_integral;
pub use decomposition::{
    decomposability_gap, decomposability_gap_by, gap_variance, gap_variance_analytic,
    gap_variance_plugin, partition, recompose_global, GapEstimate, GapHooks, GapVariance,
    GroupLaw, GroupSummary, PopulationGap, Subgroup, SubgroupPartition,
};
pub use distribution::{AnalyticDistribution, MixtureComponent, MixtureModel};
pub use error::{Error, Result};
pub use indices::{fgt_index, takayama_empirical, takayama_population, IndexKind, IndexValue};
pub use kernels::{kernel_eval, Kernel, KernelSet, Law};
pub use quadrature::{Estimate, QuadratureSettings};
pub use representation::{representation_residual, RepresentationDiagnostic, RepresentationTerms};
pub use sample::{build_empirical, EmpiricalDistribution, IncomeSample, PovertyConfig};
pub use variance::{
    confidence_interval, sigma_analytic, sigma_plugin, ConfidenceInterval, VarianceDecomposition,
};
