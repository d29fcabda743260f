//! Tapered-whisker physical reservoir computing, end to end.
//!
//! A tapered cantilever beam excited by synthetic terrain acts as a fixed
//! dynamical reservoir; only a linear readout is trained on top of it. The
//! crate covers the full pipeline:
//!
//! - [`whisker`] — Euler–Bernoulli finite-element model of the whisker,
//!   modal analysis, and Newmark time integration under base excitation.
//! - [`terrain`] — stochastic terrain profiles per terrain class and their
//!   conversion to base-excitation signals at a traversal speed.
//! - [`readout`] — per-tap steady-state features and the ridge-regression
//!   classifier readout.
//! - [`novelty`] — eigenspace Mahalanobis novelty detector and roughness
//!   regressor for unknown terrain.
//! - [`semi`] — simplex-constrained mixture estimates over known class
//!   centroids and auto-labeling of novel terrain.
//! - [`nav`] — closed-loop terrain-following navigation on a 2D class map.
//! - [`harness`] — reproducible experiment driver behind the `whisker-rc`
//!   command line.
//!
//! Everything is deterministic: all randomness flows from explicit seeds
//! through the mixing functions in [`seed`].

pub mod harness;
pub mod nav;
pub mod novelty;
pub mod readout;
pub mod seed;
pub mod semi;
pub mod terrain;
pub mod whisker;

pub use readout::{ConfusionMatrix, FeatureVector, ReadoutModel};
pub use terrain::{ExcitationSignal, LabeledDataset, TerrainClass, TerrainProfile, Traversal};
pub use whisker::{DiscretizedWhisker, Material, ModalBasis, ReservoirSignal, ResponseTrajectory, WhiskerGeometry};
