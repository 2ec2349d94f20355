//! Near-field wireless power transfer from a physically large antenna array
//! in an indoor room with specular reflections and diffuse point scatterers.
//!
//! The crate builds first-order image sources for a box room, draws
//! reproducible scatterer fields, evaluates the resulting narrowband MISO
//! channel, and compares precoders (full-CSI MRT and random-phase beam
//! diversity) through path-gain maps, empirical CDFs and fading margins.

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod precoding;
pub mod scenario;
pub mod stochastic;

pub use channel::{ChannelVector, NoiseSpec, ReceivePhasor, TransmitSignal};
pub use config::ScenarioConfig;
pub use evaluation::{CdfResult, Domain, FadingMarginReport, PathGainMap};
pub use geometry::{ArrayGeometry, ImageSource, Point3, ReflectingPlane};
pub use precoding::{Precoder, WeightVector};
pub use scenario::Scenario;
pub use stochastic::{RngSeed, ScattererField, StreamLabel};
