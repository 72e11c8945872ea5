//! Transverse-wavevector mode grid, source spectra, and the detector-plane
//! mapping.
//!
//! The simulator works on the kₓ axis only (k_y = 0): the aperture's
//! diffraction factor carries a Kronecker selection of k_y = 0, and the
//! detector is scanned along the horizontal transverse coordinate. Continuous
//! mode sums become sums over a uniform, symmetric grid of `count` points.

use crate::error::{Error, Result};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Uniform, symmetric discretization of the transverse wavevector axis.
///
/// The point count is odd so that kₓ = 0 is always a grid mode: the fixed
/// signal-arm detector sits on the axis, and that mode must exist exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    k_max: f64,
    count: usize,
    spacing: f64,
    optical_wavelength: f64,
}

impl ModeGrid {
    /// Build a grid spanning [−k_max, k_max] with `count` points (odd, ≥ 3).
    ///
    /// The transverse wavevector cannot exceed the total wavevector, so
    /// k_max < 2π/optical_wavelength is enforced.
    pub fn new(k_max: f64, count: usize, optical_wavelength: f64) -> Result<Self> {
        if count < 3 || count.is_multiple_of(2) {
            return Err(Error::GridCount(count));
        }
        if k_max <= 0.0 || !k_max.is_finite() {
            return Err(Error::NonPositive { name: "k_max", value: k_max });
        }
        if optical_wavelength <= 0.0 || !optical_wavelength.is_finite() {
            return Err(Error::NonPositive {
                name: "optical_wavelength",
                value: optical_wavelength,
            });
        }
        let limit = TWO_PI / optical_wavelength;
        if k_max >= limit {
            return Err(Error::KMaxOutOfRange { k_max, limit });
        }
        let spacing = 2.0 * k_max / (count - 1) as f64;
        Ok(ModeGrid { k_max, count, spacing, optical_wavelength })
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn optical_wavelength(&self) -> f64 {
        self.optical_wavelength
    }

    /// Index of the kₓ = 0 mode.
    pub fn center(&self) -> usize {
        (self.count - 1) / 2
    }

    /// kₓ of grid mode `i`. Evaluated as (i − center)·spacing so the grid is
    /// exactly closed under negation and kₓ(center) is exactly 0.
    pub fn kx(&self, i: usize) -> f64 {
        debug_assert!(i < self.count);
        (i as i64 - self.center() as i64) as f64 * self.spacing
    }

    pub fn kx_values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.kx(i)).collect()
    }

    /// Index of the grid mode equal to `kx`, rejecting anything that is not a
    /// grid value (no interpolation; tolerance 10⁻⁶ of one spacing).
    pub fn index_of(&self, kx: f64) -> Result<usize> {
        let steps = (kx / self.spacing).round();
        if (kx - steps * self.spacing).abs() > 1e-6 * self.spacing {
            return Err(Error::OffGrid(kx));
        }
        let i = steps as i64 + self.center() as i64;
        if i < 0 || i >= self.count as i64 {
            return Err(Error::OffGrid(kx));
        }
        Ok(i as usize)
    }

    /// Index of the grid mode nearest to `kx`, or an out-of-band error when
    /// the nearest mode does not exist.
    pub fn snap(&self, kx: f64) -> Result<usize> {
        let i = (kx / self.spacing).round() as i64 + self.center() as i64;
        if i < 0 || i >= self.count as i64 {
            return Err(Error::SweepOutOfBand { kx, k_max: self.k_max });
        }
        Ok(i as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SpectrumShape {
    Flat,
    Gaussian { sigma_k: f64 },
    Custom,
}

/// Mean photon number ⟨N_k⟩ per grid mode: the thermal source's angular
/// intensity distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpectrum {
    grid: ModeGrid,
    mean_photons: Vec<f64>,
    shape: SpectrumShape,
}

impl SourceSpectrum {
    /// Gaussian angular distribution peak·exp(−kₓ²/(2σ²)).
    ///
    /// The source's angular width is a free parameter of the model; σ relative
    /// to the kernel main lobe controls how well the ghost pattern matches the
    /// closed-form approximation.
    pub fn gaussian(grid: &ModeGrid, peak: f64, sigma_k: f64) -> Result<Self> {
        if peak <= 0.0 || !peak.is_finite() {
            return Err(Error::NonPositive { name: "peak", value: peak });
        }
        if sigma_k <= 0.0 || !sigma_k.is_finite() {
            return Err(Error::NonPositive { name: "sigma_k", value: sigma_k });
        }
        let mean_photons = (0..grid.count())
            .map(|i| {
                let kx = grid.kx(i);
                peak * (-kx * kx / (2.0 * sigma_k * sigma_k)).exp()
            })
            .collect();
        Ok(SourceSpectrum {
            grid: grid.clone(),
            mean_photons,
            shape: SpectrumShape::Gaussian { sigma_k },
        })
    }

    /// Angularly flat source: every mode carries `level` photons on average.
    /// This is the σ → ∞ limit of [`SourceSpectrum::gaussian`].
    pub fn flat(grid: &ModeGrid, level: f64) -> Result<Self> {
        if level <= 0.0 || !level.is_finite() {
            return Err(Error::NonPositive { name: "level", value: level });
        }
        Ok(SourceSpectrum {
            grid: grid.clone(),
            mean_photons: vec![level; grid.count()],
            shape: SpectrumShape::Flat,
        })
    }

    /// Arbitrary per-mode occupation; entries must be non-negative and finite
    /// with at least one strictly positive.
    pub fn from_values(grid: &ModeGrid, mean_photons: Vec<f64>) -> Result<Self> {
        if mean_photons.len() != grid.count() {
            return Err(Error::LengthMismatch {
                expected: grid.count(),
                got: mean_photons.len(),
            });
        }
        if mean_photons.iter().any(|n| !n.is_finite() || *n < 0.0) {
            return Err(Error::InvalidSpectrum("entries must be finite and non-negative"));
        }
        if !mean_photons.iter().any(|n| *n > 0.0) {
            return Err(Error::InvalidSpectrum("at least one mode must carry light"));
        }
        Ok(SourceSpectrum { grid: grid.clone(), mean_photons, shape: SpectrumShape::Custom })
    }

    pub fn grid(&self) -> &ModeGrid {
        &self.grid
    }

    pub fn mean_photons(&self) -> &[f64] {
        &self.mean_photons
    }

    /// ⟨N_k⟩ at mode `i`, clamping out-of-range indices to the nearest edge.
    /// Sums over the kernel's full offset support use this to extend the
    /// source beyond the simulated band.
    pub(crate) fn mean_photons_clamped(&self, i: i64) -> f64 {
        let last = self.mean_photons.len() - 1;
        self.mean_photons[i.clamp(0, last as i64) as usize]
    }

    /// Full width at half maximum of the angular distribution, in rad/m.
    /// Flat sources (and sampled spectra that never drop below half peak on
    /// the grid) report infinity.
    pub fn fwhm(&self) -> f64 {
        match self.shape {
            SpectrumShape::Flat => f64::INFINITY,
            SpectrumShape::Gaussian { sigma_k } => 2.0 * (2.0 * 2f64.ln()).sqrt() * sigma_k,
            SpectrumShape::Custom => {
                sampled_fwhm(&self.mean_photons, self.grid.spacing()).unwrap_or(f64::INFINITY)
            }
        }
    }
}

/// FWHM of a sampled non-negative profile, linearly interpolating the
/// half-maximum crossings on both sides of the peak.
pub(crate) fn sampled_fwhm(values: &[f64], spacing: f64) -> Option<f64> {
    let (peak_idx, peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty profile");
    if *peak <= 0.0 {
        return None;
    }
    let half = *peak / 2.0;
    let cross = |indices: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = peak_idx;
        for i in indices {
            if values[i] < half {
                let frac = (values[prev] - half) / (values[prev] - values[i]);
                let lo = prev.min(i) as f64;
                let hi = prev.max(i) as f64;
                let pos = if i > prev { lo + frac } else { hi - frac };
                return Some(pos * spacing);
            }
            prev = i;
        }
        None
    };
    let right = cross(&mut ((peak_idx + 1)..values.len()))?;
    let left = cross(&mut (0..peak_idx).rev())?;
    Some(right - left)
}

/// Maps detector positions at the focal plane of the output lens to idler
/// transverse wavevectors: kₓ = 2πx/(λ_opt·f₃).
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorMap {
    focal_length_f3: f64,
    optical_wavelength: f64,
}

impl DetectorMap {
    pub fn new(focal_length_f3: f64, optical_wavelength: f64) -> Result<Self> {
        if focal_length_f3 <= 0.0 || !focal_length_f3.is_finite() {
            return Err(Error::NonPositive {
                name: "focal_length_f3",
                value: focal_length_f3,
            });
        }
        if optical_wavelength <= 0.0 || !optical_wavelength.is_finite() {
            return Err(Error::NonPositive {
                name: "optical_wavelength",
                value: optical_wavelength,
            });
        }
        Ok(DetectorMap { focal_length_f3, optical_wavelength })
    }

    pub fn focal_length_f3(&self) -> f64 {
        self.focal_length_f3
    }

    pub fn optical_wavelength(&self) -> f64 {
        self.optical_wavelength
    }

    pub fn position_to_kx(&self, x: f64) -> f64 {
        TWO_PI * x / (self.optical_wavelength * self.focal_length_f3)
    }

    pub fn kx_to_position(&self, kx: f64) -> f64 {
        kx * self.optical_wavelength * self.focal_length_f3 / TWO_PI
    }
}
