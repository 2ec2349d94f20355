//! A fully specified propagation environment and fast path-gain evaluation.
//!
//! For fixed transmit weights the field at the scatterers does not depend on
//! where the receiver is, so [`Scenario::illuminate`] computes it once and
//! [`Illumination::phasor`] only has to sum the specular paths and one hop per
//! scatterer for every evaluation point.

use num_complex::Complex64;

use crate::channel::{
    friis_amplitude, propagation_phasor, scatter_channel_vector, scattering_coefficients,
    smc_channel_vector, spherical_spreading, ChannelVector,
};
use crate::error::{ChannelError, PrecodingError};
use crate::geometry::{ImageSource, Point3};
use crate::precoding::{beam_diversity_weights, mrt_weights, Precoder, WeightVector};
use crate::stochastic::ScattererField;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    wavelength: f64,
    images: Vec<ImageSource>,
    field: ScattererField,
}

impl Scenario {
    /// `images[0]` must be the line-of-sight source; all images share the
    /// same element count.
    pub fn new(wavelength: f64, images: Vec<ImageSource>, field: ScattererField) -> Self {
        assert!(!images.is_empty(), "scenario needs at least the LoS source");
        assert!(images[0].is_los, "first image source must be the LoS array");
        let l = images[0].len();
        assert!(
            images.iter().all(|i| i.len() == l),
            "image sources differ in size"
        );
        Self {
            wavelength,
            images,
            field,
        }
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn images(&self) -> &[ImageSource] {
        &self.images
    }

    pub fn field(&self) -> &ScattererField {
        &self.field
    }

    /// Number of array elements `L`.
    pub fn num_elements(&self) -> usize {
        self.images[0].len()
    }

    /// Same geometry with a different scatterer realization.
    pub fn with_field(&self, field: ScattererField) -> Self {
        Self {
            field,
            ..self.clone()
        }
    }

    /// Same geometry without diffuse scattering.
    pub fn without_scatterers(&self) -> Self {
        self.with_field(ScattererField::empty())
    }

    /// Specular channel vectors at `p`, one per image source.
    pub fn smc_channels(&self, p: Point3) -> Result<Vec<ChannelVector>, ChannelError> {
        self.images
            .iter()
            .map(|img| smc_channel_vector(img, p, self.wavelength))
            .collect()
    }

    pub fn scatter_channels(&self, p: Point3) -> Result<Vec<ChannelVector>, ChannelError> {
        self.images
            .iter()
            .map(|img| scatter_channel_vector(img, &self.field, p, self.wavelength))
            .collect()
    }

    /// `Σ_k (h_k + h_sc,k)` at `p`.
    pub fn total_channel(&self, p: Point3) -> Result<ChannelVector, ChannelError> {
        let smc = self.smc_channels(p)?;
        let sc = self.scatter_channels(p)?;
        Ok(ChannelVector::sum(smc.iter().chain(&sc)).expect("at least one source"))
    }

    /// Weights for a deterministic precoder focused at `target`. Beam
    /// diversity needs phases; use [`Scenario::beam_diversity_weights`].
    pub fn precoder_weights(
        &self,
        precoder: Precoder,
        target: Point3,
    ) -> Result<WeightVector, PrecodingError> {
        match precoder {
            Precoder::MrtFull => mrt_weights(&self.total_channel(target)?),
            Precoder::MrtSmc => {
                let smc = self.smc_channels(target)?;
                mrt_weights(&ChannelVector::sum(&smc).expect("at least one source"))
            }
            Precoder::LosOnlyMrt => mrt_weights(&smc_channel_vector(
                &self.images[0],
                target,
                self.wavelength,
            )?),
            Precoder::BeamDiversity => Err(PrecodingError::PhaseCount {
                beams: self.images.len(),
                phases: 0,
            }),
        }
    }

    /// Beam-diversity weights from the predicted specular beams at `target`,
    /// one phase per image source.
    pub fn beam_diversity_weights(
        &self,
        target: Point3,
        phases: &[f64],
    ) -> Result<WeightVector, PrecodingError> {
        beam_diversity_weights(&self.smc_channels(target)?, phases)
    }

    /// Precomputes the scatterer excitation for fixed weights.
    pub fn illuminate<'a>(&'a self, w: &'a WeightVector) -> Result<Illumination<'a>, ChannelError> {
        if w.len() != self.num_elements() {
            return Err(ChannelError::LengthMismatch {
                expected: self.num_elements(),
                got: w.len(),
            });
        }
        let coeffs = scattering_coefficients(&self.field);
        let mut drive = Vec::with_capacity(self.field.len());
        for (&sc, c) in self.field.positions.iter().zip(coeffs) {
            let mut incident = Complex64::new(0.0, 0.0);
            for img in &self.images {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&q, wl) in img.positions.iter().zip(w.as_slice()) {
                    let d = sc.distance(q);
                    if d == 0.0 {
                        return Err(ChannelError::ZeroDistance("scatterer and array element"));
                    }
                    acc += propagation_phasor(d, self.wavelength) * (spherical_spreading(d)) * wl;
                }
                incident += acc * img.gain;
            }
            drive.push(incident * c);
        }
        Ok(Illumination {
            scenario: self,
            weights: w,
            scatter_drive: drive,
        })
    }

    /// `PG = |Σ_k (h_k(p) + h_sc,k(p))^T w|²` with `‖w‖ = 1`.
    pub fn path_gain(&self, w: &WeightVector, p: Point3) -> Result<f64, ChannelError> {
        self.illuminate(w)?.path_gain(p)
    }

    /// Whether any scatterer lies within `radius` of `p`.
    pub fn near_scatterer(&self, p: Point3, radius: f64) -> bool {
        self.field.positions.iter().any(|&s| s.distance(p) < radius)
    }
}

/// A scenario driven by fixed transmit weights.
#[derive(Debug, Clone)]
pub struct Illumination<'a> {
    scenario: &'a Scenario,
    weights: &'a WeightVector,
    /// `√σ_m e^{jφ_m} Σ_k [H_tx,k w]_m` for every scatterer.
    scatter_drive: Vec<Complex64>,
}

impl Illumination<'_> {
    /// Received phasor per unit √P_TX at `p`.
    pub fn phasor(&self, p: Point3) -> Result<Complex64, ChannelError> {
        let lambda = self.scenario.wavelength;
        let w = self.weights.as_slice();
        let mut y = Complex64::new(0.0, 0.0);
        for img in &self.scenario.images {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&q, wl) in img.positions.iter().zip(w) {
                let d = p.distance(q);
                if d == 0.0 {
                    return Err(ChannelError::ZeroDistance("receiver and array element"));
                }
                acc += friis_amplitude(d, lambda) * wl;
            }
            y += acc * img.gain;
        }
        for (&sc, drive) in self
            .scenario
            .field
            .positions
            .iter()
            .zip(&self.scatter_drive)
        {
            let d = p.distance(sc);
            if d == 0.0 {
                return Err(ChannelError::ZeroDistance("receiver and scatterer"));
            }
            y += friis_amplitude(d, lambda) * drive;
        }
        Ok(y)
    }

    pub fn path_gain(&self, p: Point3) -> Result<f64, ChannelError> {
        Ok(self.phasor(p)?.norm_sqr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_image_sources, ArrayGeometry, ReflectingPlane, Room, RoomSurface};
    use crate::stochastic::{
        draw_scatterer_field, RcsDistribution, RngSeed, ScatterEllipsoid, StreamLabel,
    };
    use std::f64::consts::PI;

    const LAMBDA: f64 = 0.124_913_524_166_666_67;

    fn small_scenario(with_field: bool) -> Scenario {
        let room = Room::new(Point3::new(2.5, 0.0, 0.0), Point3::new(7.5, 9.0, 3.5)).unwrap();
        let g = ReflectingPlane::gain_from_db(-3.0, 0.0);
        let planes: Vec<_> = [
            RoomSurface::WallXMin,
            RoomSurface::WallYMax,
            RoomSurface::Floor,
        ]
        .iter()
        .map(|&s| room.surface_plane(s, g).unwrap())
        .collect();
        let array =
            ArrayGeometry::new(Point3::new(5.0, 0.0, 1.0), 4, 3, LAMBDA / 2.0, LAMBDA).unwrap();
        let images = build_image_sources(&array, &planes).unwrap();
        let field = if with_field {
            let e = ScatterEllipsoid::new(Point3::new(5.0, 8.75, 1.0), [1.5, 0.5, 1.5]).unwrap();
            let rcs = RcsDistribution::new(100.0 * PI * 1e-4, 20.0 * PI * 1e-4).unwrap();
            draw_scatterer_field(&e, 2.0, &rcs, RngSeed::new(1, StreamLabel::Scatterers)).unwrap()
        } else {
            ScattererField::empty()
        };
        Scenario::new(LAMBDA, images, field)
    }

    #[test]
    fn fast_path_matches_channel_vectors() {
        let sc = small_scenario(true);
        assert!(!sc.field().is_empty());
        let target = Point3::new(5.0, 8.125, 1.0);
        let w = sc.precoder_weights(Precoder::MrtFull, target).unwrap();
        for p in [
            target,
            Point3::new(4.7, 7.9, 1.0),
            Point3::new(6.0, 3.0, 2.0),
        ] {
            let h = sc.total_channel(p).unwrap();
            let direct = h.apply(w.as_slice()).unwrap();
            let fast = sc.illuminate(&w).unwrap().phasor(p).unwrap();
            assert!(
                (direct - fast).norm() <= 1e-12 * direct.norm(),
                "{direct} vs {fast}"
            );
        }
    }

    #[test]
    fn mrt_full_reaches_channel_norm() {
        let sc = small_scenario(true);
        let target = Point3::new(5.0, 8.125, 1.0);
        let w = sc.precoder_weights(Precoder::MrtFull, target).unwrap();
        let pg = sc.path_gain(&w, target).unwrap();
        let norm = sc.total_channel(target).unwrap().norm_sqr();
        assert!((pg / norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_precoders_are_unit_norm() {
        let sc = small_scenario(true);
        let target = Point3::new(5.0, 8.125, 1.0);
        for p in [Precoder::MrtFull, Precoder::MrtSmc, Precoder::LosOnlyMrt] {
            let w = sc.precoder_weights(p, target).unwrap();
            assert!((w.norm() - 1.0).abs() < 1e-9);
        }
        assert!(sc
            .precoder_weights(Precoder::BeamDiversity, target)
            .is_err());
        let w = sc
            .beam_diversity_weights(target, &[0.1, 0.2, 0.3, 0.4])
            .unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weight_length_checked() {
        let sc = small_scenario(false);
        let w = WeightVector::normalized(vec![Complex64::new(1.0, 0.0); 3]).unwrap();
        assert!(matches!(
            sc.illuminate(&w),
            Err(ChannelError::LengthMismatch {
                expected: 12,
                got: 3
            })
        ));
    }
}
