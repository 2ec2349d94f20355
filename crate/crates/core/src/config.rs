//! Scenario configuration file and the resolved simulation it describes.
//!
//! The file is TOML with explicit units in every key. All fields have
//! defaults; an empty file is the reference indoor scenario.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::evaluation::{focal_disc_diameter, Domain};
use crate::geometry::{
    build_image_sources, ArrayGeometry, Point3, ReflectingPlane, Room, RoomSurface,
};
use crate::scenario::Scenario;
use crate::stochastic::{
    draw_scatterer_field, RcsDistribution, RngSeed, ScatterEllipsoid, ScattererField, StreamLabel,
};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Master seed for every random stream.
    pub seed: u64,
    pub frequency_ghz: f64,
    pub p_tx_watt: f64,
    pub noise_variance_watt: f64,
    pub room: RoomConfig,
    pub reflectors: Vec<ReflectorConfig>,
    pub array: ArrayConfig,
    pub device: DeviceConfig,
    pub scatterers: ScattererConfig,
    pub evaluation: EvaluationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomConfig {
    pub min_corner_m: [f64; 3],
    pub max_corner_m: [f64; 3],
}

/// A reflector is either a named room face or an explicit plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<RoomSurface>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_m: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<[f64; 3]>,
    /// Amplitude gain, `20 log10 |g|`.
    pub gain_db: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

impl ReflectorConfig {
    pub fn surface(surface: RoomSurface, gain_db: f64) -> Self {
        Self {
            surface: Some(surface),
            anchor_m: None,
            normal: None,
            gain_db,
            phase_deg: 0.0,
        }
    }

    pub fn label(&self) -> String {
        match (self.surface, self.anchor_m, self.normal) {
            (Some(s), _, _) => s.name().to_string(),
            (None, Some(a), Some(n)) => format!("plane@{:?}/n{:?}", a, n),
            _ => "invalid".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub center_m: [f64; 3],
    pub n_x: usize,
    pub n_z: usize,
    pub spacing_wavelengths: f64,
    /// Nominal aperture width, used to size the focal disc.
    pub nominal_width_m: f64,
    pub nominal_height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub position_m: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScattererConfig {
    pub center_m: [f64; 3],
    pub semi_axes_m: [f64; 3],
    /// Spatial density; the expected count is `density * ellipsoid volume`.
    pub density_per_m3: f64,
    /// Linear-domain mean of the log-normal RCS.
    pub rcs_mean_cm2: f64,
    pub rcs_std_cm2: f64,
    /// Replay a stored field instead of drawing one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_file: Option<PathBuf>,
    /// Draw a fresh field for every beam-phase realization.
    pub redraw_per_realization: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Grid spacing as a fraction of the wavelength.
    pub spacing_wavelength_frac: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane_z_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane_x_range_m: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane_y_range_m: Option<[f64; 2]>,
    /// Defaults to `distance * λ / nominal_width_m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disc_diameter_m: Option<f64>,
    pub outage: f64,
    pub n_realizations: Vec<usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            frequency_ghz: 2.4,
            p_tx_watt: 4.0,
            noise_variance_watt: 0.0,
            room: RoomConfig::default(),
            reflectors: [
                RoomSurface::WallXMin,
                RoomSurface::WallXMax,
                RoomSurface::WallYMax,
                RoomSurface::Floor,
            ]
            .into_iter()
            .map(|s| ReflectorConfig::surface(s, -3.0))
            .collect(),
            array: ArrayConfig::default(),
            device: DeviceConfig::default(),
            scatterers: ScattererConfig::default(),
            evaluation: EvaluationConfig::default(),
        }
    }
}

impl Default for RoomConfig {
    fn default() -> Self {
        Self {
            min_corner_m: [2.5, 0.0, 0.0],
            max_corner_m: [7.5, 9.0, 3.5],
        }
    }
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            center_m: [5.0, 0.0, 1.0],
            n_x: 40,
            n_z: 24,
            spacing_wavelengths: 0.5,
            nominal_width_m: 2.0,
            nominal_height_m: 1.5,
        }
    }
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            position_m: [5.0, 8.125, 1.0],
        }
    }
}

impl Default for ScattererConfig {
    fn default() -> Self {
        Self {
            center_m: [5.0, 8.75, 1.0],
            semi_axes_m: [1.5, 0.5, 1.5],
            density_per_m3: 10.0,
            rcs_mean_cm2: 100.0 * PI,
            rcs_std_cm2: 20.0 * PI,
            field_file: None,
            redraw_per_realization: false,
        }
    }
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            spacing_wavelength_frac: 0.125,
            plane_z_m: None,
            plane_x_range_m: None,
            plane_y_range_m: None,
            disc_diameter_m: None,
            outage: 0.01,
            n_realizations: vec![1, 2, 4, 8, 16],
        }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn finite3(name: &str, v: [f64; 3]) -> Result<Point3, ConfigError> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(Point3::from(v))
    } else {
        Err(invalid(format!("{name} must be finite, got {v:?}")))
    }
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(s)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Loads a TOML config, or the config echoed in a JSON run manifest.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| invalid(format!("manifest {}: {e}", path.display())))?;
            let config = manifest
                .get("config")
                .ok_or_else(|| invalid(format!("{} has no `config` entry", path.display())))?;
            serde_json::from_value(config.clone())
                .map_err(|e| invalid(format!("manifest {}: {e}", path.display())))
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / (self.frequency_ghz * 1e9)
    }

    pub fn device_position(&self) -> Point3 {
        Point3::from(self.device.position_m)
    }

    pub fn grid_spacing(&self) -> f64 {
        self.evaluation.spacing_wavelength_frac * self.wavelength()
    }

    pub fn ellipsoid(&self) -> Result<ScatterEllipsoid, ConfigError> {
        Ok(ScatterEllipsoid::new(
            finite3("scatterers.center_m", self.scatterers.center_m)?,
            self.scatterers.semi_axes_m,
        )?)
    }

    pub fn rcs_distribution(&self) -> Result<RcsDistribution, ConfigError> {
        Ok(RcsDistribution::new(
            self.scatterers.rcs_mean_cm2 * 1e-4,
            self.scatterers.rcs_std_cm2 * 1e-4,
        )?)
    }

    /// Checks everything that does not need the filesystem.
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("frequency_ghz", self.frequency_ghz)?;
        positive("p_tx_watt", self.p_tx_watt)?;
        if !(self.noise_variance_watt >= 0.0 && self.noise_variance_watt.is_finite()) {
            return Err(invalid("noise_variance_watt must be non-negative"));
        }
        self.room()?;
        for (i, r) in self.reflectors.iter().enumerate() {
            if !r.gain_db.is_finite() || r.gain_db > 0.0 {
                return Err(invalid(format!(
                    "reflectors[{i}].gain_db must be finite and <= 0 dB, got {}",
                    r.gain_db
                )));
            }
        }
        self.planes()?;
        if self.array.n_x == 0 || self.array.n_z == 0 {
            return Err(invalid("array.n_x and array.n_z must be at least 1"));
        }
        positive("array.spacing_wavelengths", self.array.spacing_wavelengths)?;
        positive("array.nominal_width_m", self.array.nominal_width_m)?;
        positive("array.nominal_height_m", self.array.nominal_height_m)?;
        finite3("array.center_m", self.array.center_m)?;
        finite3("device.position_m", self.device.position_m)?;
        self.ellipsoid()?;
        self.rcs_distribution()?;
        if !(self.scatterers.density_per_m3 >= 0.0 && self.scatterers.density_per_m3.is_finite()) {
            return Err(invalid("scatterers.density_per_m3 must be non-negative"));
        }
        positive(
            "evaluation.spacing_wavelength_frac",
            self.evaluation.spacing_wavelength_frac,
        )?;
        if let Some(d) = self.evaluation.disc_diameter_m {
            positive("evaluation.disc_diameter_m", d)?;
        }
        if !(self.evaluation.outage > 0.0 && self.evaluation.outage < 1.0) {
            return Err(invalid(format!(
                "evaluation.outage must lie in (0, 1), got {}",
                self.evaluation.outage
            )));
        }
        if self.evaluation.n_realizations.is_empty() || self.evaluation.n_realizations.contains(&0)
        {
            return Err(invalid("evaluation.n_realizations entries must be >= 1"));
        }
        // catches reflectors through the array center
        self.image_sources()?;
        Ok(())
    }

    pub fn room(&self) -> Result<Room, ConfigError> {
        Ok(Room::new(
            finite3("room.min_corner_m", self.room.min_corner_m)?,
            finite3("room.max_corner_m", self.room.max_corner_m)?,
        )?)
    }

    pub fn planes(&self) -> Result<Vec<ReflectingPlane>, ConfigError> {
        let room = self.room()?;
        self.reflectors
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let gain = ReflectingPlane::gain_from_db(r.gain_db, r.phase_deg.to_radians());
                match (r.surface, r.anchor_m, r.normal) {
                    (Some(s), None, None) => Ok(room.surface_plane(s, gain)?),
                    (None, Some(a), Some(n)) => Ok(ReflectingPlane::new(
                        finite3("reflector anchor", a)?,
                        finite3("reflector normal", n)?,
                        gain,
                    )?),
                    _ => Err(invalid(format!(
                        "reflectors[{i}] needs either `surface` or both `anchor_m` and `normal`"
                    ))),
                }
            })
            .collect()
    }

    pub fn array_geometry(&self) -> Result<ArrayGeometry, ConfigError> {
        let lambda = self.wavelength();
        Ok(ArrayGeometry::new(
            finite3("array.center_m", self.array.center_m)?,
            self.array.n_x,
            self.array.n_z,
            self.array.spacing_wavelengths * lambda,
            lambda,
        )?)
    }

    pub fn image_sources(&self) -> Result<Vec<crate::geometry::ImageSource>, ConfigError> {
        Ok(build_image_sources(
            &self.array_geometry()?,
            &self.planes()?,
        )?)
    }

    /// Scatterer realization `index` (or the replayed field file).
    pub fn scatterer_field(&self, index: u64) -> Result<ScattererField, ConfigError> {
        if let Some(path) = &self.scatterers.field_file {
            let field = crate::io::read_scatterer_field(path)
                .map_err(|e| invalid(format!("scatterer field {}: {e}", path.display())))?;
            return Ok(field);
        }
        let seed = RngSeed::new(self.seed, StreamLabel::Scatterers).with_index(index);
        Ok(draw_scatterer_field(
            &self.ellipsoid()?,
            self.scatterers.density_per_m3,
            &self.rcs_distribution()?,
            seed,
        )?)
    }

    /// Validated scenario with scatterer realization `index`.
    pub fn build(&self, index: u64) -> Result<Scenario, ConfigError> {
        self.validate()?;
        Ok(Scenario::new(
            self.wavelength(),
            self.image_sources()?,
            self.scatterer_field(index)?,
        ))
    }

    pub fn disc_diameter(&self) -> f64 {
        self.evaluation.disc_diameter_m.unwrap_or_else(|| {
            let d = Point3::from(self.array.center_m).distance(self.device_position());
            focal_disc_diameter(d, self.wavelength(), self.array.nominal_width_m)
        })
    }

    pub fn disc_domain(&self) -> Domain {
        Domain::Disc {
            center: self.device_position(),
            diameter: self.disc_diameter(),
            spacing: self.grid_spacing(),
        }
    }

    /// Cutting plane through the device, by default covering the room.
    pub fn plane_domain(&self) -> Domain {
        let ev = &self.evaluation;
        let [x0, y0, _] = self.room.min_corner_m;
        let [x1, y1, _] = self.room.max_corner_m;
        let x = ev.plane_x_range_m.unwrap_or([x0, x1]);
        let y = ev.plane_y_range_m.unwrap_or([y0, y1]);
        Domain::Plane {
            z: ev.plane_z_m.unwrap_or(self.device.position_m[2]),
            x_range: (x[0], x[1]),
            y_range: (y[0], y[1]),
            spacing: self.grid_spacing(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(
            ScenarioConfig::from_toml_str("").unwrap(),
            ScenarioConfig::default()
        );
    }

    #[test]
    fn toml_roundtrip() {
        let cfg = ScenarioConfig::default();
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            ScenarioConfig::from_toml_str("frequency_hz = 2.4e9"),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn explicit_plane_reflector() {
        let cfg = ScenarioConfig::from_toml_str(
            r#"
            [[reflectors]]
            anchor_m = [0.0, 0.0, 3.5]
            normal = [0.0, 0.0, -1.0]
            gain_db = -6.0
            "#,
        )
        .unwrap();
        let planes = cfg.planes().unwrap();
        assert_eq!(planes.len(), 1);
        assert!((planes[0].gain().norm() - 0.501_187).abs() < 1e-6);
        assert_eq!(cfg.image_sources().unwrap().len(), 2);
    }

    #[test]
    fn half_specified_reflector_rejected() {
        let cfg = ScenarioConfig::from_toml_str(
            r#"
            [[reflectors]]
            anchor_m = [0.0, 0.0, 3.5]
            gain_db = -6.0
            "#,
        )
        .unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn validation_failures() {
        let cfg = ScenarioConfig {
            frequency_ghz: -2.4,
            ..ScenarioConfig::default()
        };
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.reflectors
            .push(ReflectorConfig::surface(RoomSurface::WallYMin, -3.0));
        assert!(matches!(cfg.validate(), Err(ConfigError::Geometry(_))));

        let mut cfg = ScenarioConfig::default();
        cfg.evaluation.n_realizations = vec![0];
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.reflectors[0].gain_db = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn derived_quantities() {
        let cfg = ScenarioConfig::default();
        assert!((cfg.wavelength() - 0.124_913_524).abs() < 1e-9);
        assert!((cfg.disc_diameter() - 0.507_461).abs() < 1e-5);
        assert_eq!(cfg.array_geometry().unwrap().len(), 960);
        assert_eq!(cfg.image_sources().unwrap().len(), 5);
    }
}
