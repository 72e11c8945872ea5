//! Error type shared by all simulator modules.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// Mode grid needs an odd point count of at least 3.
    GridCount(usize),
    /// A parameter that must be strictly positive (and finite) was not.
    NonPositive { name: &'static str, value: f64 },
    /// Transverse extent reaches or exceeds the total wavevector 2π/λ_opt.
    KMaxOutOfRange { k_max: f64, limit: f64 },
    /// Vector length does not match the mode count of the grid.
    LengthMismatch { expected: usize, got: usize },
    /// Two components were built on different mode grids.
    GridMismatch,
    /// Detector map wavelength differs from the grid's optical wavelength.
    WavelengthMismatch { grid: f64, detector: f64 },
    /// Spectrum entries must be non-negative with at least one positive.
    InvalidSpectrum(&'static str),
    /// A value that must be finite was NaN or infinite.
    NonFinite(&'static str),
    /// Beam-splitter reflectivity outside (0, 1); a fully transmitting or
    /// reflecting splitter produces no signal/idler correlation.
    Reflectivity(f64),
    /// Slit geometry violates n ≥ 1, a > 0, or d > a for multiple slits.
    SlitGeometry { n_slits: usize, width: f64, separation: f64 },
    /// Grid spacing too coarse to resolve the aperture's diffraction lobe.
    UnresolvedKernel { spacing: f64, max_spacing: f64 },
    /// Kernel samples were all zero, nothing to normalize.
    ZeroKernel,
    /// Kernel samples do not satisfy the unit sum of squared magnitudes.
    KernelNotNormalized { sum: f64 },
    /// Energy transmissivity must lie in (0, 1].
    Transmissivity(f64),
    /// Aperture open extent exceeds the diffraction-plane extent.
    ApertureExceedsPlane { open: f64, plane: f64 },
    /// Pixel mask text was malformed.
    MaskFormat { line: usize, reason: String },
    /// Quadrature needs at least 64 points per open interval.
    TooFewQuadPoints(usize),
    /// Wavevector does not coincide with a grid mode (no interpolation).
    OffGrid(f64),
    /// Queried correlation involves a mode that carries no light.
    DarkMode(f64),
    /// Detector sweep maps outside the representable wavevector band.
    SweepOutOfBand { kx: f64, k_max: f64 },
    /// A sweep needs at least two points.
    TooFewSweepPoints(usize),
    /// Sweep bounds must be finite with x_min < x_max.
    SweepRange { x_min: f64, x_max: f64 },
    /// Monte Carlo estimator needs at least 10⁴ samples.
    TooFewSamples(u64),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GridCount(n) => {
                write!(f, "mode count must be odd and at least 3, got {n}")
            }
            Error::NonPositive { name, value } => {
                write!(f, "{name} must be strictly positive and finite, got {value}")
            }
            Error::KMaxOutOfRange { k_max, limit } => write!(
                f,
                "k_max = {k_max} rad/m must stay below the total wavevector 2π/λ_opt = {limit} rad/m"
            ),
            Error::LengthMismatch { expected, got } => {
                write!(f, "expected a vector of length {expected}, got {got}")
            }
            Error::GridMismatch => write!(f, "components were built on different mode grids"),
            Error::WavelengthMismatch { grid, detector } => write!(
                f,
                "detector map wavelength {detector} m differs from grid wavelength {grid} m"
            ),
            Error::InvalidSpectrum(why) => write!(f, "invalid source spectrum: {why}"),
            Error::NonFinite(name) => write!(f, "{name} must be finite"),
            Error::Reflectivity(r) => {
                write!(f, "reflectivity must lie strictly inside (0, 1), got {r}")
            }
            Error::SlitGeometry { n_slits, width, separation } => write!(
                f,
                "invalid slit geometry: n = {n_slits}, width = {width} m, separation = {separation} m"
            ),
            Error::UnresolvedKernel { spacing, max_spacing } => write!(
                f,
                "unresolved kernel: grid spacing {spacing} rad/m exceeds {max_spacing} rad/m \
                 needed to sample the diffraction main lobe"
            ),
            Error::ZeroKernel => write!(f, "kernel samples are all zero"),
            Error::KernelNotNormalized { sum } => {
                write!(f, "kernel squared-magnitude sum is {sum}, expected 1")
            }
            Error::Transmissivity(l) => {
                write!(f, "energy transmissivity must lie in (0, 1], got {l}")
            }
            Error::ApertureExceedsPlane { open, plane } => write!(
                f,
                "aperture open extent {open} m exceeds diffraction-plane extent {plane} m"
            ),
            Error::MaskFormat { line, reason } => {
                write!(f, "mask file, line {line}: {reason}")
            }
            Error::TooFewQuadPoints(n) => {
                write!(f, "need at least 64 quadrature points per open interval, got {n}")
            }
            Error::OffGrid(kx) => {
                write!(f, "wavevector {kx} rad/m is not a grid mode (no interpolation)")
            }
            Error::DarkMode(kx) => {
                write!(f, "dark mode: detector mode at {kx} rad/m carries no light")
            }
            Error::SweepOutOfBand { kx, k_max } => write!(
                f,
                "sweep out of band: detector position maps to {kx} rad/m, grid covers ±{k_max} rad/m"
            ),
            Error::TooFewSweepPoints(n) => {
                write!(f, "a sweep needs at least 2 points, got {n}")
            }
            Error::SweepRange { x_min, x_max } => {
                write!(f, "sweep bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]")
            }
            Error::TooFewSamples(n) => {
                write!(f, "Monte Carlo estimate needs at least 10000 samples, got {n}")
            }
            Error::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
