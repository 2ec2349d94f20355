//! Narrowband MISO channel: specular (image source) components, single-bounce
//! diffuse scattering, and the received phasor.
//!
//! All channel entries are dimensionless S-parameters for power waves. With
//! lossless isotropic antennas the specular entry is the square root of the
//! Friis gain times the reflection gain and a propagation phase:
//!
//! ```text
//! [h_k]_l = λ/√(4π) · 1/(√(4π) d_kl) · g_k · exp(-j 2π d_kl / λ)
//! ```
//!
//! The diffuse part follows the bistatic radar equation for amplitudes,
//! `h_sc,k^T = h_rx^T · diag(√σ_m e^{jφ_m}) · H_tx,k`.

use std::f64::consts::{PI, TAU};

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::ChannelError;
use crate::geometry::{ImageSource, Point3};
use crate::stochastic::{RngSeed, ScattererField};

/// `exp(-j 2π d / λ)`.
#[inline]
pub fn propagation_phasor(distance: f64, wavelength: f64) -> Complex64 {
    Complex64::from_polar(1.0, -TAU * distance / wavelength)
}

/// Amplitude spreading `1 / (√(4π) d)` in m⁻¹.
#[inline]
pub fn spherical_spreading(distance: f64) -> f64 {
    1.0 / ((4.0 * PI).sqrt() * distance)
}

/// Square root of the isotropic receive aperture, `λ / √(4π)` in m.
#[inline]
pub fn aperture_factor(wavelength: f64) -> f64 {
    wavelength / (4.0 * PI).sqrt()
}

/// Complex gain of a single free-space hop from an isotropic transmitter to
/// an isotropic receiver at distance `d`, excluding any reflection gain.
#[inline]
pub fn friis_amplitude(distance: f64, wavelength: f64) -> Complex64 {
    propagation_phasor(distance, wavelength)
        * (aperture_factor(wavelength) * spherical_spreading(distance))
}

fn checked_distance(a: Point3, b: Point3, what: &'static str) -> Result<f64, ChannelError> {
    let d = a.distance(b);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(ChannelError::ZeroDistance(what))
    }
}

/// Per-element channel of one source (LoS array or image) to a receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub entries: Vec<Complex64>,
    /// Index of the image source this vector belongs to.
    pub source: usize,
}

impl ChannelVector {
    pub fn new(entries: Vec<Complex64>, source: usize) -> Self {
        Self { entries, source }
    }

    pub fn zeros(len: usize, source: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len], source)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|h| h.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unconjugated inner product `h^T x`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Complex64, ChannelError> {
        if x.len() != self.len() {
            return Err(ChannelError::LengthMismatch {
                expected: self.len(),
                got: x.len(),
            });
        }
        Ok(self.entries.iter().zip(x).map(|(h, s)| h * s).sum())
    }

    /// Entry-wise sum of channel vectors; the result keeps the first source index.
    pub fn sum<'a, I>(vectors: I) -> Option<ChannelVector>
    where
        I: IntoIterator<Item = &'a ChannelVector>,
    {
        let mut iter = vectors.into_iter();
        let mut acc = iter.next()?.clone();
        for v in iter {
            assert_eq!(v.len(), acc.len(), "channel vectors of different lengths");
            for (a, b) in acc.entries.iter_mut().zip(&v.entries) {
                *a += b;
            }
        }
        Some(acc)
    }
}

/// Transmitted power waves in √W.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitSignal {
    pub entries: Vec<Complex64>,
}

impl TransmitSignal {
    pub fn power(&self) -> f64 {
        self.entries.iter().map(|s| s.norm_sqr()).sum()
    }
}

/// Complex baseband amplitude at the receiver in √W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivePhasor {
    pub y: Complex64,
}

impl ReceivePhasor {
    /// Received power `|y|²` in W.
    pub fn power(&self) -> f64 {
        self.y.norm_sqr()
    }
}

/// Complex AWGN at the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    variance: f64,
}

impl NoiseSpec {
    pub fn new(variance: f64) -> Result<Self, ChannelError> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(ChannelError::NegativeNoise(variance));
        }
        Ok(Self { variance })
    }

    pub fn noiseless() -> Self {
        Self { variance: 0.0 }
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

pub fn smc_channel_vector(
    image: &ImageSource,
    target: Point3,
    wavelength: f64,
) -> Result<ChannelVector, ChannelError> {
    let entries = image
        .positions
        .iter()
        .map(|&q| {
            let d = checked_distance(target, q, "receiver and array element")?;
            Ok(friis_amplitude(d, wavelength) * image.gain)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChannelVector::new(entries, image.index))
}

/// `N_sc x L` matrix from the elements of one image array to every scatterer,
/// in m⁻¹ (square root of the power density per unit transmitted power).
pub fn tx_scatter_matrix(
    image: &ImageSource,
    field: &ScattererField,
    wavelength: f64,
) -> Result<Array2<Complex64>, ChannelError> {
    let mut h = Array2::zeros((field.len(), image.len()));
    for (m, &sc) in field.positions.iter().enumerate() {
        for (l, &q) in image.positions.iter().enumerate() {
            let d = checked_distance(sc, q, "scatterer and array element")?;
            h[(m, l)] = propagation_phasor(d, wavelength) * spherical_spreading(d) * image.gain;
        }
    }
    Ok(h)
}

/// Scatterer-to-receiver gains, one per scatterer.
pub fn rx_scatter_vector(
    field: &ScattererField,
    target: Point3,
    wavelength: f64,
) -> Result<Vec<Complex64>, ChannelError> {
    field
        .positions
        .iter()
        .map(|&sc| {
            let d = checked_distance(sc, target, "receiver and scatterer")?;
            Ok(friis_amplitude(d, wavelength))
        })
        .collect()
}

/// Diagonal of the scattering matrix, `√σ_m · e^{jφ_m}`.
pub fn scattering_coefficients(field: &ScattererField) -> Vec<Complex64> {
    field
        .rcs
        .iter()
        .zip(&field.phases)
        .map(|(&s, &phi)| Complex64::from_polar(s.sqrt(), phi))
        .collect()
}

pub fn scatter_channel_vector(
    image: &ImageSource,
    field: &ScattererField,
    target: Point3,
    wavelength: f64,
) -> Result<ChannelVector, ChannelError> {
    if field.is_empty() {
        return Ok(ChannelVector::zeros(image.len(), image.index));
    }
    let h_tx = tx_scatter_matrix(image, field, wavelength)?;
    let h_rx = rx_scatter_vector(field, target, wavelength)?;
    let weighted: Array1<Complex64> = h_rx
        .iter()
        .zip(scattering_coefficients(field))
        .map(|(r, c)| r * c)
        .collect();
    let row = h_tx.t().dot(&weighted);
    Ok(ChannelVector::new(row.to_vec(), image.index))
}

/// `y = Σ h_k^T s + Σ h_sc,k^T s + n`.
pub fn receive_phasor(
    smc_channels: &[ChannelVector],
    scatter_channels: &[ChannelVector],
    signal: &TransmitSignal,
    noise: NoiseSpec,
    seed: RngSeed,
) -> Result<ReceivePhasor, ChannelError> {
    let mut y = Complex64::new(0.0, 0.0);
    for h in smc_channels.iter().chain(scatter_channels) {
        y += h.apply(&signal.entries)?;
    }
    if noise.variance() > 0.0 {
        let mut rng = seed.rng();
        let scale = (noise.variance() / 2.0).sqrt();
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        y += Complex64::new(re, im) * scale;
    }
    Ok(ReceivePhasor { y })
}
