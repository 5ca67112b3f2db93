//! Link-level simulator for short-range line-of-sight massive-MIMO backhaul.
//!
//! Two parallel uniform linear arrays facing each other across a short
//! line-of-sight hop can spatially multiplex as many data streams as they
//! have elements, provided the aperture, wavelength, and hop distance are
//! matched. This crate models that regime end to end:
//!
//! - [`geometry`] — array layouts, deployment parameter selection (stream
//!   count and element spacing from the available mounting length), and the
//!   design-condition ratios that predict whether a link works.
//! - [`antenna`] — element amplitude-gain patterns: isotropic, analytic
//!   dipole over a ground plane, a directional composite, and sampled grids
//!   with bilinear interpolation.
//! - [`channel`] — the complex propagation matrix `H`, synthesized from free
//!   space, from an imported ray file, or from a single-bounce point
//!   scatterer model.
//! - [`schemes`] — the three spatial multiplexing schemes under comparison:
//!   DFT-SM-MRT, block DFT-SM-MRT with a spatial cyclic prefix, and SVD.
//!   Each yields an equivalent stream-domain channel `G`.
//! - [`metrics`] — per-stream SIR, capped practical spectral efficiency,
//!   scheme comparison ratios, and analytic complexity ratios.
//! - [`scenario`] — declarative scenario definitions, built-in catalogs for
//!   the reference link table, a deterministic runner, and CSV/JSON result
//!   emission.
//! - [`plot`] — static SVG summaries of a result set.
//!
//! Everything is a pure function of its inputs: a scenario run is
//! deterministic and results are safe to compare bit-for-bit across runs.

pub mod antenna;
pub mod channel;
pub mod geometry;
pub mod metrics;
pub mod plot;
pub mod scenario;
pub mod schemes;

pub use num_complex::Complex64;

pub use antenna::{AntennaPattern, PatternGrid};
pub use channel::{ChannelMatrix, PointScatterer, Provenance, Ray, RayField};
pub use geometry::{CarrierConfig, ConditionRatios, LinkGeometry, UlaSpec};
pub use metrics::{ComplexityRatios, SeBounds, StreamMetrics};
pub use scenario::{Scenario, ScenarioResult};
pub use schemes::{EquivalentChannel, SchemeConfig, SchemeKind, SvdFactors};
