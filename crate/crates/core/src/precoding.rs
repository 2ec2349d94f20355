//! Transmit precoders: maximum ratio transmission on a known channel and the
//! random-phase multi-beam scheme used before any CSI is available.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelVector, TransmitSignal};
use crate::error::{ChannelError, PrecodingError};

/// Cancellation threshold for the beam-diversity sum.
pub const BEAM_SUM_TOL: f64 = 1e-12;

/// Unit-norm complex weights, one per array element.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<Complex64>,
}

impl WeightVector {
    /// Wraps weights that must already have unit norm (within 1e-9).
    pub fn new(w: Vec<Complex64>) -> Result<Self, PrecodingError> {
        let norm = l2(&w);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(PrecodingError::NotUnitNorm(norm));
        }
        Ok(Self { w })
    }

    /// Scales `w` to unit norm.
    pub fn normalized(mut w: Vec<Complex64>) -> Result<Self, PrecodingError> {
        let norm = l2(&w);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(PrecodingError::ZeroChannel);
        }
        w.iter_mut().for_each(|v| *v /= norm);
        Ok(Self { w })
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2(&self.w)
    }
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `w = h* / ‖h‖`.
pub fn mrt_weights(h: &ChannelVector) -> Result<WeightVector, PrecodingError> {
    let norm = h.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(PrecodingError::ZeroChannel);
    }
    Ok(WeightVector {
        w: h.entries.iter().map(|v| v.conj() / norm).collect(),
    })
}

/// Equal-power superposition of per-beam MRT weights, each rotated by its
/// own phase, normalized to unit norm.
pub fn beam_diversity_weights(
    beams: &[ChannelVector],
    phases: &[f64],
) -> Result<WeightVector, PrecodingError> {
    if beams.is_empty() {
        return Err(PrecodingError::NoBeams);
    }
    if beams.len() != phases.len() {
        return Err(PrecodingError::PhaseCount {
            beams: beams.len(),
            phases: phases.len(),
        });
    }
    let len = beams[0].len();
    let mut sum = vec![Complex64::new(0.0, 0.0); len];
    for (k, (h, &phi)) in beams.iter().zip(phases).enumerate() {
        if h.len() != len {
            return Err(ChannelError::LengthMismatch {
                expected: len,
                got: h.len(),
            }
            .into());
        }
        let norm = h.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(PrecodingError::ZeroBeam(k));
        }
        let rot = Complex64::from_polar(1.0 / norm, phi);
        for (acc, v) in sum.iter_mut().zip(&h.entries) {
            *acc += v.conj() * rot;
        }
    }
    let norm = l2(&sum);
    if norm < BEAM_SUM_TOL {
        return Err(PrecodingError::VanishingBeamSum(norm));
    }
    sum.iter_mut().for_each(|v| *v /= norm);
    Ok(WeightVector { w: sum })
}

/// `s = √P_TX · w`, so that `‖s‖² = P_TX`.
pub fn transmit_signal(w: &WeightVector, p_tx: f64) -> Result<TransmitSignal, PrecodingError> {
    if !(p_tx > 0.0 && p_tx.is_finite()) {
        return Err(ChannelError::NonPositivePower(p_tx).into());
    }
    let amp = p_tx.sqrt();
    Ok(TransmitSignal {
        entries: w.w.iter().map(|v| v * amp).collect(),
    })
}

/// Precoding strategies exposed to experiments and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precoder {
    /// MRT on the full channel including scatterers (perfect CSI).
    MrtFull,
    /// MRT on the predicted specular components only.
    MrtSmc,
    /// MRT on the line-of-sight component only.
    LosOnlyMrt,
    /// Random-phase superposition of the predicted specular beams.
    BeamDiversity,
}

impl Precoder {
    pub const ALL: [Precoder; 4] = [
        Precoder::MrtFull,
        Precoder::MrtSmc,
        Precoder::LosOnlyMrt,
        Precoder::BeamDiversity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Precoder::MrtFull => "mrt-full",
            Precoder::MrtSmc => "mrt-smc",
            Precoder::LosOnlyMrt => "los-only-mrt",
            Precoder::BeamDiversity => "beam-diversity",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, Precoder::BeamDiversity)
    }
}

impl fmt::Display for Precoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Precoder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Precoder::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Precoder::ALL.iter().map(|p| p.name()).collect();
                format!(
                    "unknown precoder {s:?}, expected one of {}",
                    names.join(", ")
                )
            })
    }
}
