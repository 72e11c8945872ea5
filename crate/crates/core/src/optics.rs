//! Beam-splitter transformation and normal-characteristic-function algebra.
//!
//! The input thermal modes a_k and vacuum ancillas a′_k map to signal and
//! idler modes through the canonical transformation
//!
//! ```text
//! ( b_k )   (  r  t ) ( a_k  )
//! ( c_k ) = ( −t  r ) ( a′_k )        r² + t² = 1
//! ```
//!
//! Normal characteristic functions of thermal modes are Gaussians
//! χ = exp(−Σ|ξ_k|²⟨N_k⟩); the vacuum ancillas contribute the constant 1 and
//! never appear as data. Diffraction enters as an argument substitution:
//! the diffracted-mode χ is the signal-mode χ evaluated at
//! √λ_t·Σ_{k′} ξ_{k′} f(k′−k).
//!
//! Moments are computed from the closed forms; the characteristic functions
//! exist so that tests can differentiate them numerically and confirm both
//! routes agree.

use num_complex::Complex64;

use crate::diffraction::DiffractionKernel;
use crate::error::{Error, Result};
use crate::modes::SourceSpectrum;

/// Lossless two-port beam splitter with real amplitudes, r² + t² = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    r: f64,
    t: f64,
}

impl BeamSplitter {
    /// Build from the reflectivity amplitude; t = √(1 − r²). The boundary
    /// values are rejected: a fully transmitting or reflecting splitter
    /// leaves one output dark and produces no cross-correlation.
    pub fn new(r: f64) -> Result<Self> {
        if r <= 0.0 || r >= 1.0 || !r.is_finite() {
            return Err(Error::Reflectivity(r));
        }
        Ok(BeamSplitter { r, t: (1.0 - r * r).sqrt() })
    }

    /// The 50-50 splitter, r = t = 1/√2.
    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        BeamSplitter { r: h, t: h }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Argument of a two-arm characteristic function: ξ₁ₖ attached to the
/// signal/diffracted modes, ξ₂ₖ to the idler modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiArgument {
    xi1: Vec<Complex64>,
    xi2: Vec<Complex64>,
}

impl ChiArgument {
    pub fn new(xi1: Vec<Complex64>, xi2: Vec<Complex64>) -> Result<Self> {
        if xi1.len() != xi2.len() {
            return Err(Error::LengthMismatch { expected: xi1.len(), got: xi2.len() });
        }
        if xi1.iter().chain(&xi2).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("characteristic-function argument"));
        }
        Ok(ChiArgument { xi1, xi2 })
    }

    pub fn zeros(len: usize) -> Self {
        ChiArgument { xi1: vec![Complex64::ZERO; len], xi2: vec![Complex64::ZERO; len] }
    }

    pub fn len(&self) -> usize {
        self.xi1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi1.is_empty()
    }

    pub fn xi1(&self) -> &[Complex64] {
        &self.xi1
    }

    pub fn xi2(&self) -> &[Complex64] {
        &self.xi2
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// Normal characteristic function of the multimode thermal input:
/// Π_k exp(−|ξ_k|²⟨N_k⟩). Real, in (0, 1].
pub fn chi_thermal(spectrum: &SourceSpectrum, xi: &[Complex64]) -> Result<Complex64> {
    check_len(spectrum.grid().count(), xi.len())?;
    let exponent: f64 = xi
        .iter()
        .zip(spectrum.mean_photons())
        .map(|(z, n)| z.norm_sqr() * n)
        .sum();
    Ok(Complex64::new((-exponent).exp(), 0.0))
}

/// Joint normal characteristic function of the signal and idler arms:
/// exp{−Σ_k ⟨N_k⟩·|r·ξ₁ₖ − t·ξ₂ₖ|²}. The vacuum port's contribution is
/// identically 1 and has already been dropped.
pub fn chi_output(
    bs: &BeamSplitter,
    spectrum: &SourceSpectrum,
    arg: &ChiArgument,
) -> Result<Complex64> {
    check_len(spectrum.grid().count(), arg.len())?;
    let exponent: f64 = spectrum
        .mean_photons()
        .iter()
        .zip(arg.xi1())
        .zip(arg.xi2())
        .map(|((n, z1), z2)| n * (bs.r * z1 - bs.t * z2).norm_sqr())
        .sum();
    Ok(Complex64::new((-exponent).exp(), 0.0))
}

/// The diffraction-channel argument substitution applied to ξ₁:
/// out_k = √λ_t·Σ_{k′} ξ₁ₖ′·f(k′−k). Composing [`chi_output`] with this
/// substitution reproduces [`chi_diffracted_joint`]; tests use the
/// composition as the independent route.
pub fn substitute_diffraction_argument(
    kernel: &DiffractionKernel,
    xi1: &[Complex64],
) -> Result<Vec<Complex64>> {
    let m = kernel.grid().count();
    check_len(m, xi1.len())?;
    let sqrt_lambda = kernel.lambda_t().sqrt();
    Ok((0..m)
        .map(|k| {
            let inner: Complex64 =
                (0..m).map(|kp| xi1[kp] * kernel.value(kp, k)).sum();
            sqrt_lambda * inner
        })
        .collect())
}

/// Joint normal characteristic function of the diffracted and idler modes,
/// evaluated directly:
/// exp{−Σ_k ⟨N_k⟩·|r√λ_t·Σ_{k′} ξ₁ₖ′ f(k′−k) − t·ξ₂ₖ|²}.
pub fn chi_diffracted_joint(
    bs: &BeamSplitter,
    spectrum: &SourceSpectrum,
    kernel: &DiffractionKernel,
    arg: &ChiArgument,
) -> Result<Complex64> {
    if spectrum.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    let m = spectrum.grid().count();
    check_len(m, arg.len())?;
    let sqrt_lambda = kernel.lambda_t().sqrt();
    let mut exponent = 0.0;
    for k in 0..m {
        let n = spectrum.mean_photons()[k];
        if n == 0.0 {
            continue;
        }
        let inner: Complex64 =
            (0..m).map(|kp| arg.xi1()[kp] * kernel.value(kp, k)).sum();
        exponent += n * (bs.r * sqrt_lambda * inner - bs.t * arg.xi2()[k]).norm_sqr();
    }
    Ok(Complex64::new((-exponent).exp(), 0.0))
}

/// Second moments of the diffracted and idler arms on the truncated mode
/// network.
///
/// * `cc[k]`   = ⟨c_k†c_k⟩ = t²⟨N_k⟩
/// * `dd[k′]`  = ⟨d_k′†d_k′⟩ = r²λ_t·Σ_k ⟨N_k⟩|f(k′−k)|², the sum running
///   over the simulated modes
/// * `cd[k][k′]` = ⟨c_k†d_k′⟩ = r·t·√λ_t·⟨N_k⟩·f(k′−k)
#[derive(Debug, Clone)]
pub struct JointMomentTable {
    count: usize,
    cc: Vec<f64>,
    dd: Vec<f64>,
    cd: Vec<Complex64>,
}

impl JointMomentTable {
    pub(crate) fn from_parts(cc: Vec<f64>, dd: Vec<f64>, cd: Vec<Complex64>) -> Self {
        let count = cc.len();
        debug_assert_eq!(dd.len(), count);
        debug_assert_eq!(cd.len(), count * count);
        JointMomentTable { count, cc, dd, cd }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn cc(&self) -> &[f64] {
        &self.cc
    }

    pub fn dd(&self) -> &[f64] {
        &self.dd
    }

    /// ⟨c_k†d_k′⟩ for idler mode index `k` and diffracted mode index
    /// `k_prime`.
    pub fn cd(&self, k: usize, k_prime: usize) -> Complex64 {
        self.cd[k * self.count + k_prime]
    }

    pub fn cd_entries(&self) -> &[Complex64] {
        &self.cd
    }

    /// Largest relative entrywise deviation from another table, over cc, dd
    /// and cd together.
    pub fn max_relative_deviation(&self, other: &JointMomentTable) -> f64 {
        fn rel(a: f64, b: f64) -> f64 {
            let denom = a.abs().max(b.abs());
            if denom == 0.0 {
                0.0
            } else {
                (a - b).abs() / denom
            }
        }
        fn rel_c(a: Complex64, b: Complex64) -> f64 {
            let denom = a.norm().max(b.norm());
            if denom == 0.0 {
                0.0
            } else {
                (a - b).norm() / denom
            }
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.cc.iter().zip(&other.cc) {
            worst = worst.max(rel(*a, *b));
        }
        for (a, b) in self.dd.iter().zip(&other.dd) {
            worst = worst.max(rel(*a, *b));
        }
        for (a, b) in self.cd.iter().zip(&other.cd) {
            worst = worst.max(rel_c(*a, *b));
        }
        worst
    }
}

/// Closed-form moments of the beam-split, diffracted thermal field.
pub fn analytic_moments(
    bs: &BeamSplitter,
    spectrum: &SourceSpectrum,
    kernel: &DiffractionKernel,
) -> Result<JointMomentTable> {
    if spectrum.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    let m = spectrum.grid().count();
    let n = spectrum.mean_photons();
    let lambda = kernel.lambda_t();
    let rt_sqrt_lambda = bs.r * bs.t * lambda.sqrt();
    let r2_lambda = bs.r * bs.r * lambda;
    let t2 = bs.t * bs.t;

    let cc: Vec<f64> = n.iter().map(|nk| t2 * nk).collect();
    let dd: Vec<f64> = (0..m)
        .map(|kp| {
            let sum: f64 = (0..m).map(|k| n[k] * kernel.value(kp, k).norm_sqr()).sum();
            r2_lambda * sum
        })
        .collect();
    let mut cd = vec![Complex64::ZERO; m * m];
    for k in 0..m {
        let scale = rt_sqrt_lambda * n[k];
        for kp in 0..m {
            cd[k * m + kp] = scale * kernel.value(kp, k);
        }
    }
    Ok(JointMomentTable::from_parts(cc, dd, cd))
}
