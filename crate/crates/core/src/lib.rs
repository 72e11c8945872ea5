//! Simulator for ghost interference and diffraction with beam-split thermal light.
//!
//! A multimode thermal beam is split on a beam splitter; the signal arm passes
//! through a slit (or pixel-mask) aperture, the idler arm is scanned by a
//! detector. The crate computes the first-order cross-correlation g¹ between a
//! fixed diffracted signal mode and the scanned idler modes — the quantity in
//! which the "ghost" interference-diffraction pattern of the aperture appears —
//! together with the signal-arm intensity profile, which shows no pattern for
//! angularly broad sources.
//!
//! The analytic pipeline (beam-splitter transform → Fraunhofer diffraction
//! channel → normal characteristic functions → moments) is validated against
//! two independent oracles in [`oracle`]: exact second-moment propagation
//! through the linear mode network, and Monte Carlo sampling of classical
//! complex-Gaussian speckle fields.

pub mod correlation;
pub mod diffraction;
pub mod error;
pub mod modes;
pub mod optics;
pub mod oracle;

pub use correlation::{CorrelationPattern, GhostSetup};
pub use diffraction::{Aperture, DiffractionKernel, NSlit, PixelMask};
pub use error::{Error, Result};
pub use modes::{DetectorMap, ModeGrid, SourceSpectrum};
pub use optics::{BeamSplitter, ChiArgument, JointMomentTable};
pub use oracle::{FieldSample, OracleEstimate, ValidationCheck, ValidationReport};
