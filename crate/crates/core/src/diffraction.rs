//! Aperture geometry and the Fraunhofer diffraction factor.
//!
//! An aperture in the signal arm acts as a linear bosonic channel: modes at
//! the open area pass undamped, modes at the screen are damped to vacuum. The
//! channel is characterized by the far-field amplitude kernel f(κ) sampled at
//! wavevector offsets κ = k′ − k, normalized so that Σ|f(κ)|² = 1, plus the
//! energy transmissivity λ_t = Σ/S (open area over plane area).
//!
//! Kernels come in two constructions that must agree: the exact N-slit closed
//! form (slit-envelope sinc times the grating sum over slit centers) and
//! midpoint quadrature of the aperture integral, which also covers arbitrary
//! pixel masks. The mask integral is taken at k_y = 0, so each pixel column
//! contributes with its open-pixel count as weight.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::ModeGrid;

/// sin(t)/t with the removable singularity filled in.
pub(crate) fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 * (1.0 - t2 / 20.0)
    } else {
        t.sin() / t
    }
}

/// Grating sum Σ_m e^{−i2um} over N centered slits: sin(Nu)/sin(u), with the
/// principal maxima (u = mπ, value ±N) evaluated through the shifted form
/// sin(Nε)/sin(ε). Identically 1 for a single slit.
pub(crate) fn grating_sum(n_slits: usize, u: f64) -> f64 {
    if n_slits == 1 {
        return 1.0;
    }
    let n = n_slits as f64;
    let m = (u / std::f64::consts::PI).round();
    let eps = u - m * std::f64::consts::PI;
    let odd = (m as i64 & 1 == 1) && (n_slits - 1) % 2 == 1;
    let sign = if odd { -1.0 } else { 1.0 };
    if eps.abs() < 1e-9 {
        sign * n * (1.0 - (n * n - 1.0) * eps * eps / 6.0)
    } else {
        sign * (n * eps).sin() / eps.sin()
    }
}

/// N equally spaced slits of equal width, centered on the optical axis.
///
/// `separation` is the center-to-center slit distance; it plays no role when
/// `n_slits == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NSlit {
    n_slits: usize,
    width: f64,
    separation: f64,
}

impl NSlit {
    pub fn new(n_slits: usize, width: f64, separation: f64) -> Result<Self> {
        let bad = n_slits < 1
            || width <= 0.0
            || !width.is_finite()
            || !separation.is_finite()
            || (n_slits > 1 && separation <= width);
        if bad {
            return Err(Error::SlitGeometry { n_slits, width, separation });
        }
        Ok(NSlit { n_slits, width, separation })
    }

    pub fn single(width: f64) -> Result<Self> {
        NSlit::new(1, width, 0.0)
    }

    pub fn n_slits(&self) -> usize {
        self.n_slits
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// Total open extent n·a along x.
    pub fn open_extent(&self) -> f64 {
        self.n_slits as f64 * self.width
    }

    fn slit_centers(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n_slits;
        let half = (n as f64 - 1.0) / 2.0;
        (0..n).map(move |m| (m as f64 - half) * self.separation)
    }
}

/// Binary pixel mask; `true` pixels are open. Pixels are square with side
/// `pitch`, columns centered about x = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelMask {
    rows: Vec<Vec<bool>>,
    pitch: f64,
}

impl PixelMask {
    pub fn new(rows: Vec<Vec<bool>>, pitch: f64) -> Result<Self> {
        if pitch <= 0.0 || !pitch.is_finite() {
            return Err(Error::NonPositive { name: "pitch", value: pitch });
        }
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::MaskFormat { line: 1, reason: "mask has no pixels".into() });
        }
        let cols = rows[0].len();
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::MaskFormat {
                line: i + 2,
                reason: format!("row has {} pixels, expected {cols}", rows[i].len()),
            });
        }
        if !rows.iter().flatten().any(|&p| p) {
            return Err(Error::MaskFormat { line: 1, reason: "mask has no open pixels".into() });
        }
        Ok(PixelMask { rows, pitch })
    }

    /// Parse the plain-text mask format: a header line `pitch=<meters>`
    /// followed by one row per line of '0'/'1' characters.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::MaskFormat {
            line: 1,
            reason: "empty file, expected `pitch=<meters>` header".into(),
        })?;
        let pitch_str = header.trim().strip_prefix("pitch=").ok_or_else(|| Error::MaskFormat {
            line: 1,
            reason: format!("expected `pitch=<meters>` header, got {header:?}"),
        })?;
        let pitch: f64 = pitch_str.trim().parse().map_err(|_| Error::MaskFormat {
            line: 1,
            reason: format!("cannot parse pitch value {pitch_str:?}"),
        })?;
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(Error::MaskFormat {
                        line: lineno + 2,
                        reason: format!("unexpected character {other:?}, rows are '0'/'1'"),
                    }),
                })
                .collect::<Result<Vec<bool>>>()?;
            rows.push(row);
        }
        PixelMask::new(rows, pitch)
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn open_pixels(&self) -> usize {
        self.rows.iter().flatten().filter(|&&p| p).count()
    }

    /// Extent of the mask along x.
    pub fn x_extent(&self) -> f64 {
        self.n_cols() as f64 * self.pitch
    }

    /// Number of open pixels per column; the k_y = 0 kernel weights each
    /// column's x-integral by this count.
    fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0usize; self.n_cols()];
        for row in &self.rows {
            for (c, &open) in row.iter().enumerate() {
                if open {
                    w[c] += 1;
                }
            }
        }
        w
    }

    fn column_center(&self, c: usize) -> f64 {
        (c as f64 - (self.n_cols() as f64 - 1.0) / 2.0) * self.pitch
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Aperture {
    NSlit(NSlit),
    Mask(PixelMask),
}

impl Aperture {
    /// Energy transmissivity λ_t = Σ/S for a diffraction plane of the given
    /// extent. In the 1-D slit model Σ = n·a and S = plane_extent; for masks
    /// both are areas, with the plane as tall as the mask.
    pub fn transmissivity(&self, plane_extent: f64) -> Result<f64> {
        if plane_extent <= 0.0 || !plane_extent.is_finite() {
            return Err(Error::NonPositive { name: "plane_extent", value: plane_extent });
        }
        match self {
            Aperture::NSlit(slits) => {
                let open = slits.open_extent();
                if open > plane_extent {
                    return Err(Error::ApertureExceedsPlane { open, plane: plane_extent });
                }
                Ok(open / plane_extent)
            }
            Aperture::Mask(mask) => {
                let open_x = mask.x_extent();
                if open_x > plane_extent {
                    return Err(Error::ApertureExceedsPlane { open: open_x, plane: plane_extent });
                }
                let open_area = mask.open_pixels() as f64 * mask.pitch() * mask.pitch();
                let plane_area = plane_extent * mask.n_rows() as f64 * mask.pitch();
                Ok(open_area / plane_area)
            }
        }
    }

    /// Finest open feature along x, used for the grid-resolution guard.
    fn finest_feature(&self) -> f64 {
        match self {
            Aperture::NSlit(s) => s.width(),
            Aperture::Mask(m) => m.pitch(),
        }
    }
}

/// Sampled Fraunhofer diffraction factor of an aperture.
///
/// `values[j]` is f at offset κ_j = (j − (M−1))·spacing, j = 0..2M−1, so that
/// f(k′ − k) exists for every pair of grid modes without interpolation. The
/// samples satisfy Σ|f|² = 1.
#[derive(Debug, Clone)]
pub struct DiffractionKernel {
    grid: ModeGrid,
    values: Vec<Complex64>,
    lambda_t: f64,
    /// Generating slit geometry when the kernel came from an N-slit aperture;
    /// the detector-plane closed form needs (N, a, d).
    slits: Option<NSlit>,
}

/// Rescale kernel samples so Σ|f|² = 1, preserving relative phases and
/// magnitude ratios. Rejects an all-zero input.
pub fn normalize_kernel(values: &[Complex64]) -> Result<Vec<Complex64>> {
    let sum: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    if sum == 0.0 || !sum.is_finite() {
        return Err(Error::ZeroKernel);
    }
    let scale = 1.0 / sum.sqrt();
    Ok(values.iter().map(|v| v * scale).collect())
}

fn check_lambda_t(lambda_t: f64) -> Result<()> {
    if lambda_t <= 0.0 || lambda_t > 1.0 || !lambda_t.is_finite() {
        return Err(Error::Transmissivity(lambda_t));
    }
    Ok(())
}

/// Reject grids that would alias the diffraction main lobe: the sinc envelope
/// must be sampled at least five times per 2π/a.
fn check_resolution(grid: &ModeGrid, finest: f64) -> Result<()> {
    let max_spacing = std::f64::consts::TAU / (5.0 * finest);
    if grid.spacing() > max_spacing {
        return Err(Error::UnresolvedKernel { spacing: grid.spacing(), max_spacing });
    }
    Ok(())
}

/// Closed-form kernel of an N-slit aperture: slit envelope sinc(κa/2) times
/// the grating sum over slit centers, sampled on the offset grid and
/// normalized to unit squared-magnitude sum.
pub fn kernel_nslit(grid: &ModeGrid, slits: &NSlit, lambda_t: f64) -> Result<DiffractionKernel> {
    check_lambda_t(lambda_t)?;
    check_resolution(grid, slits.width())?;
    let m = grid.count();
    let raw: Vec<Complex64> = (0..2 * m - 1)
        .map(|j| {
            let kappa = (j as i64 - (m as i64 - 1)) as f64 * grid.spacing();
            let envelope = sinc(kappa * slits.width() / 2.0);
            let grating = grating_sum(slits.n_slits(), kappa * slits.separation() / 2.0);
            Complex64::new(envelope * grating, 0.0)
        })
        .collect();
    Ok(DiffractionKernel {
        grid: grid.clone(),
        values: normalize_kernel(&raw)?,
        lambda_t,
        slits: Some(slits.clone()),
    })
}

/// Midpoint sum of ∫ e^{−iκx} dx over one open interval, `points` cells.
fn midpoint_interval(center: f64, width: f64, kappa: f64, points: usize) -> Complex64 {
    let h = width / points as f64;
    let x0 = center - width / 2.0 + h / 2.0;
    let step = Complex64::from_polar(1.0, -kappa * h);
    let mut phase = Complex64::from_polar(1.0, -kappa * x0);
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..points {
        acc += phase;
        phase *= step;
    }
    acc * h
}

/// Kernel of an arbitrary aperture by midpoint quadrature of the aperture
/// integral at k_y = 0, then normalized. For slit apertures this must agree
/// with [`kernel_nslit`]; quadrature error is O(h²) in the cell size.
pub fn kernel_quadrature(
    grid: &ModeGrid,
    aperture: &Aperture,
    lambda_t: f64,
    quad_points: usize,
) -> Result<DiffractionKernel> {
    check_lambda_t(lambda_t)?;
    if quad_points < 64 {
        return Err(Error::TooFewQuadPoints(quad_points));
    }
    check_resolution(grid, aperture.finest_feature())?;
    let m = grid.count();
    let raw: Vec<Complex64> = (0..2 * m - 1)
        .map(|j| {
            let kappa = (j as i64 - (m as i64 - 1)) as f64 * grid.spacing();
            match aperture {
                Aperture::NSlit(slits) => slits
                    .slit_centers()
                    .map(|c| midpoint_interval(c, slits.width(), kappa, quad_points))
                    .sum(),
                Aperture::Mask(mask) => {
                    let weights = mask.column_weights();
                    weights
                        .iter()
                        .enumerate()
                        .filter(|(_, &w)| w > 0)
                        .map(|(c, &w)| {
                            w as f64
                                * midpoint_interval(
                                    mask.column_center(c),
                                    mask.pitch(),
                                    kappa,
                                    quad_points,
                                )
                        })
                        .sum()
                }
            }
        })
        .collect();
    let slits = match aperture {
        Aperture::NSlit(s) => Some(s.clone()),
        Aperture::Mask(_) => None,
    };
    Ok(DiffractionKernel { grid: grid.clone(), values: normalize_kernel(&raw)?, lambda_t, slits })
}

impl DiffractionKernel {
    /// Wrap pre-normalized samples. The squared-magnitude sum must already be
    /// 1 within 1e−9.
    pub fn from_values(grid: &ModeGrid, values: Vec<Complex64>, lambda_t: f64) -> Result<Self> {
        check_lambda_t(lambda_t)?;
        if values.len() != 2 * grid.count() - 1 {
            return Err(Error::LengthMismatch {
                expected: 2 * grid.count() - 1,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("kernel samples"));
        }
        let sum: f64 = values.iter().map(|v| v.norm_sqr()).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::KernelNotNormalized { sum });
        }
        Ok(DiffractionKernel { grid: grid.clone(), values, lambda_t, slits: None })
    }

    /// Bypasses the normalization check; exists so tests and fault-injection
    /// hooks can build deliberately broken kernels.
    #[doc(hidden)]
    pub fn from_values_unchecked(grid: &ModeGrid, values: Vec<Complex64>, lambda_t: f64) -> Self {
        DiffractionKernel { grid: grid.clone(), values, lambda_t, slits: None }
    }

    /// Rescale every sample; breaks normalization on purpose (fault hook).
    #[doc(hidden)]
    pub fn scaled_by(&self, factor: f64) -> Self {
        DiffractionKernel {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            lambda_t: self.lambda_t,
            slits: self.slits.clone(),
        }
    }

    /// (N, slit width, slit separation) when built from an N-slit aperture.
    pub fn nslit_params(&self) -> Option<(usize, f64, f64)> {
        self.slits.as_ref().map(|s| (s.n_slits(), s.width(), s.separation()))
    }

    pub fn grid(&self) -> &ModeGrid {
        &self.grid
    }

    pub fn lambda_t(&self) -> f64 {
        self.lambda_t
    }

    /// All samples on the offset grid, length 2M−1.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn n_offsets(&self) -> usize {
        self.values.len()
    }

    /// Offset wavevector of sample `j`.
    pub fn kappa(&self, j: usize) -> f64 {
        (j as i64 - (self.grid.count() as i64 - 1)) as f64 * self.grid.spacing()
    }

    /// Sample index for the offset k′ − k between two grid modes.
    pub fn offset_index(&self, i_prime: usize, i: usize) -> usize {
        (i_prime as i64 - i as i64 + self.grid.count() as i64 - 1) as usize
    }

    /// f(k′ − k) for grid mode indices i′ and i.
    pub fn value(&self, i_prime: usize, i: usize) -> Complex64 {
        self.values[self.offset_index(i_prime, i)]
    }

    pub fn norm_sqr_sum(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// FWHM of |f| around its tallest sample, in rad/m.
    pub fn main_lobe_fwhm(&self) -> f64 {
        let abs: Vec<f64> = self.values.iter().map(|v| v.norm()).collect();
        crate::modes::sampled_fwhm(&abs, self.grid.spacing()).unwrap_or(f64::INFINITY)
    }
}
