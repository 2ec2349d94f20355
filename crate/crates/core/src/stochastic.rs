//! Random realizations: diffuse point-scatterer fields and beam phases.
//!
//! Every draw goes through a [`RngSeed`], which names a ChaCha20 substream
//! by (master seed, stream label, realization index). Two draws that differ
//! in any of those three never share generator state, so results do not
//! depend on call order or on how work is split across threads.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::StochasticError;
use crate::geometry::Point3;

/// Independent random streams used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamLabel {
    Scatterers,
    BeamPhases,
    Noise,
}

impl StreamLabel {
    fn id(self) -> u64 {
        match self {
            StreamLabel::Scatterers => 1,
            StreamLabel::BeamPhases => 2,
            StreamLabel::Noise => 3,
        }
    }
}

/// Address of one reproducible random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub master: u64,
    pub stream: StreamLabel,
    pub index: u64,
}

impl RngSeed {
    pub fn new(master: u64, stream: StreamLabel) -> Self {
        Self {
            master,
            stream,
            index: 0,
        }
    }

    pub fn with_index(self, index: u64) -> Self {
        Self { index, ..self }
    }

    /// Generator for this substream. The index occupies the low 56 bits of
    /// the ChaCha stream id and the label the top byte.
    pub fn rng(&self) -> ChaCha20Rng {
        assert!(self.index < (1 << 56), "realization index out of range");
        let mut rng = ChaCha20Rng::seed_from_u64(self.master);
        rng.set_stream((self.stream.id() << 56) | self.index);
        rng
    }
}

/// Ellipsoidal volume the scatterers are drawn in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterEllipsoid {
    center: Point3,
    semi_axes: [f64; 3],
}

impl ScatterEllipsoid {
    pub fn new(center: Point3, semi_axes: [f64; 3]) -> Result<Self, StochasticError> {
        if semi_axes.iter().any(|&r| !(r > 0.0 && r.is_finite())) || !center.is_finite() {
            return Err(StochasticError::DegenerateEllipsoid);
        }
        Ok(Self { center, semi_axes })
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn semi_axes(&self) -> [f64; 3] {
        self.semi_axes
    }

    pub fn volume(&self) -> f64 {
        let [a, b, c] = self.semi_axes;
        4.0 / 3.0 * PI * a * b * c
    }

    /// Normalized radius squared: `<= 1` inside.
    pub fn normalized_radius_sq(&self, p: Point3) -> f64 {
        let d = p - self.center;
        let [a, b, c] = self.semi_axes;
        (d.x / a).powi(2) + (d.y / b).powi(2) + (d.z / c).powi(2)
    }

    pub fn contains(&self, p: Point3) -> bool {
        self.normalized_radius_sq(p) <= 1.0
    }

    /// Uniform point inside, by rejection from the bounding box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point3 {
        let [a, b, c] = self.semi_axes;
        loop {
            let u = Point3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if u.dot(u) <= 1.0 {
                return self.center + Point3::new(u.x * a, u.y * b, u.z * c);
            }
        }
    }
}

/// Log-normal RCS law given by its linear-domain mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcsDistribution {
    mean: f64,
    std_dev: f64,
}

impl RcsDistribution {
    pub fn new(mean: f64, std_dev: f64) -> Result<Self, StochasticError> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(StochasticError::NonPositiveRcsMean(mean));
        }
        if !(std_dev >= 0.0 && std_dev.is_finite()) {
            return Err(StochasticError::NegativeRcsStd(std_dev));
        }
        Ok(Self { mean, std_dev })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    /// `(mu, sigma)` of the underlying normal.
    pub fn log_params(&self) -> (f64, f64) {
        let s2 = (1.0 + (self.std_dev / self.mean).powi(2)).ln();
        (self.mean.ln() - s2 / 2.0, s2.sqrt())
    }

    fn distribution(&self) -> LogNormal<f64> {
        let (mu, sigma) = self.log_params();
        LogNormal::new(mu, sigma).expect("validated log-normal parameters")
    }
}

/// One realization of point scatterers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScattererField {
    pub positions: Vec<Point3>,
    /// Radar cross-sections in m².
    pub rcs: Vec<f64>,
    /// Scattering phases in `[0, 2π)`.
    pub phases: Vec<f64>,
}

impl ScattererField {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Checks the field invariants: equal lengths, positive RCS, phases in range.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.positions.len();
        if self.rcs.len() != n || self.phases.len() != n {
            return Err(format!(
                "scatterer field has {} positions, {} rcs values and {} phases",
                n,
                self.rcs.len(),
                self.phases.len()
            ));
        }
        if let Some(i) = self.positions.iter().position(|p| !p.is_finite()) {
            return Err(format!("scatterer {i} has a non-finite position"));
        }
        if let Some(i) = self.rcs.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(format!("scatterer {i} has non-positive RCS"));
        }
        if let Some(i) = self.phases.iter().position(|&p| !(0.0..TAU).contains(&p)) {
            return Err(format!("scatterer {i} has a phase outside [0, 2π)"));
        }
        Ok(())
    }
}

fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let phi = rng.random::<f64>() * TAU;
    if phi >= TAU {
        0.0
    } else {
        phi
    }
}

/// Draws a Poisson number of scatterers (mean `density * volume`) uniformly
/// inside the ellipsoid with log-normal RCS and uniform phases.
pub fn draw_scatterer_field(
    ellipsoid: &ScatterEllipsoid,
    density: f64,
    rcs: &RcsDistribution,
    seed: RngSeed,
) -> Result<ScattererField, StochasticError> {
    if !(density >= 0.0 && density.is_finite()) {
        return Err(StochasticError::NegativeDensity(density));
    }
    let mut rng = seed.rng();
    let mean_count = density * ellipsoid.volume();
    let count = if mean_count > 0.0 {
        Poisson::new(mean_count)
            .expect("positive Poisson mean")
            .sample(&mut rng) as usize
    } else {
        0
    };
    let law = rcs.distribution();
    let mut field = ScattererField {
        positions: Vec::with_capacity(count),
        rcs: Vec::with_capacity(count),
        phases: Vec::with_capacity(count),
    };
    for _ in 0..count {
        field.positions.push(ellipsoid.sample(&mut rng));
        field.rcs.push(law.sample(&mut rng));
        field.phases.push(uniform_phase(&mut rng));
    }
    Ok(field)
}

/// `k` independent beam phases, uniform on `[0, 2π)`.
pub fn draw_beam_phases(k: usize, seed: RngSeed) -> Result<Vec<f64>, StochasticError> {
    if k < 1 {
        return Err(StochasticError::NoBeams);
    }
    let mut rng = seed.rng();
    Ok((0..k).map(|_| uniform_phase(&mut rng)).collect())
}
