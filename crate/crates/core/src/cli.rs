//! Experiment drivers behind the `nfwpt` command line.
//!
//! Every command computes all of its artifacts in memory first and only
//! touches the output directory once the run has succeeded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ScenarioConfig;
use crate::error::{ConfigError, EvaluationError};
use crate::evaluation::{
    beam_diversity_prefix_maps, empirical_cdf, fading_margin, pg_map, realization_phases,
    strategy_map, CdfResult, Domain, FadingMarginReport, MapMetadata, MaxAccumulator, PathGainMap,
};
use crate::io::{cdf_to_csv, field_to_csv, map_to_csv};
use crate::precoding::Precoder;
use crate::scenario::Scenario;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid arguments: {0}")]
    Arguments(String),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("encoding output: {0}")]
    Encode(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(ConfigError::Read { .. }) => EXIT_IO,
            RunError::Config(_) | RunError::Arguments(_) => EXIT_VALIDATION,
            RunError::Io { .. } => EXIT_IO,
            RunError::Evaluation(_) | RunError::Encode(_) | RunError::ThreadPool(_) => {
                EXIT_NUMERICAL
            }
        }
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Encode(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Path gain on a horizontal cutting plane.
    Plane {
        precoder: Precoder,
        n_realizations: usize,
    },
    /// Path gain on the focal disc around the device.
    Disc {
        precoder: Precoder,
        n_realizations: usize,
        per_realization: bool,
    },
    /// Disc CDFs per strategy, plus a fading-margin report when `outage` is set.
    Cdf {
        precoders: Vec<Precoder>,
        n_realizations: Vec<usize>,
        outage: Option<f64>,
    },
}

impl Command {
    fn validate(&self) -> Result<(), RunError> {
        let bad = |m: &str| Err(RunError::Arguments(m.to_string()));
        match self {
            Command::Plane { n_realizations, .. } | Command::Disc { n_realizations, .. }
                if *n_realizations == 0 =>
            {
                bad("--n-realizations must be at least 1")
            }
            Command::Cdf { precoders, .. } if precoders.is_empty() => {
                bad("at least one precoder is required")
            }
            Command::Cdf { n_realizations, .. }
                if n_realizations.is_empty() || n_realizations.contains(&0) =>
            {
                bad("--n-realizations entries must be at least 1")
            }
            Command::Cdf {
                outage: Some(p), ..
            } if !(*p > 0.0 && *p < 1.0) => bad("--outage must lie in (0, 1)"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub wavelength_m: f64,
    pub num_elements: usize,
    pub array_extent_m: [f64; 2],
    pub image_sources: usize,
    pub reflectors: Vec<String>,
    pub scatter_volume_m3: f64,
    pub expected_scatterers: f64,
    pub realized_scatterers: usize,
    pub grid_spacing_m: f64,
    pub disc_diameter_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSummary {
    pub file: String,
    pub points: usize,
    pub flagged_points: usize,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: ScenarioConfig,
    pub derived: DerivedQuantities,
    pub db_convention: String,
    pub threads: usize,
    pub outputs: Vec<OutputSummary>,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// File name to contents, in write order.
    pub files: BTreeMap<String, Vec<u8>>,
    pub manifest: RunManifest,
    pub maps: BTreeMap<String, PathGainMap>,
    pub cdfs: BTreeMap<String, CdfResult>,
    pub margin: Option<FadingMarginReport>,
}

fn derived(config: &ScenarioConfig, scenario: &Scenario) -> Result<DerivedQuantities, RunError> {
    let array = config.array_geometry()?;
    let volume = config.ellipsoid()?.volume();
    Ok(DerivedQuantities {
        wavelength_m: config.wavelength(),
        num_elements: array.len(),
        array_extent_m: [array.width(), array.height()],
        image_sources: scenario.images().len(),
        reflectors: config.reflectors.iter().map(|r| r.label()).collect(),
        scatter_volume_m3: volume,
        expected_scatterers: volume * config.scatterers.density_per_m3,
        realized_scatterers: scenario.field().len(),
        grid_spacing_m: config.grid_spacing(),
        disc_diameter_m: config.disc_diameter(),
    })
}

/// Beam-diversity maps for each count in `counts`, honoring
/// `redraw_per_realization`.
fn beam_diversity_maps(
    config: &ScenarioConfig,
    scenario: &Scenario,
    domain: &Domain,
    counts: &[usize],
) -> Result<BTreeMap<usize, PathGainMap>, RunError> {
    let target = config.device_position();
    if !config.scatterers.redraw_per_realization {
        return Ok(beam_diversity_prefix_maps(
            scenario,
            target,
            domain,
            counts,
            config.seed,
        )?);
    }
    let max_n = counts.iter().copied().max().unwrap_or(0);
    let mut acc = MaxAccumulator::new();
    let mut out = BTreeMap::new();
    for r in 0..max_n {
        let sc = scenario.with_field(config.scatterer_field(r as u64)?);
        let phases = realization_phases(&sc, config.seed, r as u64)?;
        let w = sc
            .beam_diversity_weights(target, &phases)
            .map_err(EvaluationError::from)?;
        let meta = MapMetadata {
            precoder: Precoder::BeamDiversity,
            n_realizations: 1,
            master_seed: config.seed,
            flag_radius: sc.wavelength(),
        };
        acc.push(pg_map(&sc, &w, domain, meta)?)?;
        if counts.contains(&(r + 1)) {
            out.insert(r + 1, acc.clone().finish()?);
        }
    }
    Ok(out)
}

fn map_file_name(kind: &str, precoder: Precoder, n_realizations: usize) -> String {
    if precoder.is_random() {
        format!("{kind}_{precoder}_nr{n_realizations}.csv")
    } else {
        format!("{kind}_{precoder}.csv")
    }
}

/// Strategy key used in CDF file names and margin reports.
pub fn strategy_key(precoder: Precoder, n_realizations: usize) -> String {
    if precoder.is_random() {
        format!("{precoder}-nr{n_realizations}")
    } else {
        precoder.to_string()
    }
}

/// Runs `command` on `threads` workers (0 = all cores).
pub fn run(
    config: &ScenarioConfig,
    command: &Command,
    threads: usize,
) -> Result<RunOutput, RunError> {
    config.validate()?;
    command.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::ThreadPool(e.to_string()))?;
    let start = Instant::now();
    let mut out = pool.install(|| run_inner(config, command))?;
    out.manifest.threads = pool.current_num_threads();
    out.manifest.elapsed_s = start.elapsed().as_secs_f64();
    Ok(out)
}

fn run_inner(config: &ScenarioConfig, command: &Command) -> Result<RunOutput, RunError> {
    let scenario = config.build(0)?;
    let target = config.device_position();
    let mut maps = BTreeMap::new();
    let mut cdfs = BTreeMap::new();
    let mut margin = None;

    match command {
        Command::Plane {
            precoder,
            n_realizations,
        } => {
            let domain = config.plane_domain();
            let map = strategy_map(
                &scenario,
                *precoder,
                target,
                &domain,
                *n_realizations,
                config.seed,
            )?;
            maps.insert(map_file_name("plane", *precoder, *n_realizations), map);
        }
        Command::Disc {
            precoder,
            n_realizations,
            per_realization,
        } => {
            let domain = config.disc_domain();
            if precoder.is_random() {
                let counts: Vec<usize> = if *per_realization {
                    (1..=*n_realizations).collect()
                } else {
                    vec![*n_realizations]
                };
                for (n, map) in beam_diversity_maps(config, &scenario, &domain, &counts)? {
                    maps.insert(map_file_name("disc", *precoder, n), map);
                }
            } else {
                let map = strategy_map(&scenario, *precoder, target, &domain, 1, config.seed)?;
                maps.insert(map_file_name("disc", *precoder, 1), map);
            }
        }
        Command::Cdf {
            precoders,
            n_realizations,
            outage,
        } => {
            let domain = config.disc_domain();
            let mut strategies: Vec<Precoder> = precoders.clone();
            if outage.is_some() && !strategies.contains(&Precoder::MrtFull) {
                strategies.insert(0, Precoder::MrtFull);
            }
            for p in strategies {
                if p.is_random() {
                    for (n, map) in beam_diversity_maps(config, &scenario, &domain, n_realizations)?
                    {
                        cdfs.insert(strategy_key(p, n), empirical_cdf(&map)?);
                    }
                } else {
                    let map = strategy_map(&scenario, p, target, &domain, 1, config.seed)?;
                    cdfs.insert(strategy_key(p, 1), empirical_cdf(&map)?);
                }
            }
            if let Some(p) = outage {
                margin = Some(fading_margin(&cdfs, *p, Precoder::MrtFull.name())?);
            }
        }
    }

    let mut files = BTreeMap::new();
    let mut outputs = Vec::new();
    for (name, map) in &maps {
        files.insert(name.clone(), map_to_csv(map)?);
        outputs.push(OutputSummary {
            file: name.clone(),
            points: map.len(),
            flagged_points: map.flagged_count(),
        });
    }
    for (name, cdf) in &cdfs {
        let file = format!("cdf_{name}.csv");
        files.insert(file.clone(), cdf_to_csv(cdf)?);
        outputs.push(OutputSummary {
            file,
            points: cdf.len(),
            flagged_points: 0,
        });
    }
    if let Some(report) = &margin {
        let file = "margin.json".to_string();
        let bytes =
            serde_json::to_vec_pretty(report).map_err(|e| RunError::Encode(e.to_string()))?;
        files.insert(file.clone(), bytes);
        outputs.push(OutputSummary {
            file,
            points: report.entries.len(),
            flagged_points: 0,
        });
    }
    files.insert(
        "scatterers.csv".to_string(),
        field_to_csv(scenario.field())?,
    );

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.clone(),
        config: config.clone(),
        derived: derived(config, &scenario)?,
        db_convention: "pg_db = 10*log10(pg_linear); pg_linear = P_RX / P_TX".to_string(),
        threads: 0,
        outputs,
        elapsed_s: 0.0,
    };
    Ok(RunOutput {
        files,
        manifest,
        maps,
        cdfs,
        margin,
    })
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes every artifact and the manifest into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, output: &RunOutput) -> Result<(), RunError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (name, bytes) in &output.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    let path = dir.join(MANIFEST_FILE);
    let manifest =
        serde_json::to_vec_pretty(&output.manifest).map_err(|e| RunError::Encode(e.to_string()))?;
    std::fs::write(&path, manifest).map_err(io_err(&path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.array.n_x = 8;
        cfg.array.n_z = 4;
        cfg.evaluation.spacing_wavelength_frac = 0.5;
        cfg
    }

    #[test]
    fn argument_validation() {
        let cfg = small_config();
        let e = run(
            &cfg,
            &Command::Disc {
                precoder: Precoder::BeamDiversity,
                n_realizations: 0,
                per_realization: false,
            },
            1,
        )
        .unwrap_err();
        assert_eq!(e.exit_code(), EXIT_VALIDATION);
        let e = run(
            &cfg,
            &Command::Cdf {
                precoders: vec![],
                n_realizations: vec![1],
                outage: None,
            },
            1,
        )
        .unwrap_err();
        assert_eq!(e.exit_code(), EXIT_VALIDATION);
    }

    #[test]
    fn disc_per_realization_files() {
        let out = run(
            &small_config(),
            &Command::Disc {
                precoder: Precoder::BeamDiversity,
                n_realizations: 3,
                per_realization: true,
            },
            2,
        )
        .unwrap();
        for n in 1..=3 {
            assert!(out
                .files
                .contains_key(&format!("disc_beam-diversity_nr{n}.csv")));
        }
        assert!(out.files.contains_key("scatterers.csv"));
    }

    #[test]
    fn cdf_adds_reference_for_margin() {
        let out = run(
            &small_config(),
            &Command::Cdf {
                precoders: vec![Precoder::BeamDiversity],
                n_realizations: vec![1, 2],
                outage: Some(0.05),
            },
            2,
        )
        .unwrap();
        let keys: Vec<_> = out.cdfs.keys().cloned().collect();
        assert_eq!(
            keys,
            vec!["beam-diversity-nr1", "beam-diversity-nr2", "mrt-full"]
        );
        let m = out.margin.unwrap();
        assert_eq!(m.entry("mrt-full").unwrap().reduction_db, 0.0);
        assert!(out.files.contains_key("margin.json"));
    }

    #[test]
    fn redraw_changes_realizations_only() {
        let mut cfg = small_config();
        cfg.scatterers.redraw_per_realization = true;
        let cmd = Command::Disc {
            precoder: Precoder::BeamDiversity,
            n_realizations: 2,
            per_realization: true,
        };
        let redrawn = run(&cfg, &cmd, 1).unwrap();
        cfg.scatterers.redraw_per_realization = false;
        let fixed = run(&cfg, &cmd, 1).unwrap();
        let name = "disc_beam-diversity_nr1.csv";
        assert_eq!(redrawn.files[name], fixed.files[name]);
        let name = "disc_beam-diversity_nr2.csv";
        assert_ne!(redrawn.files[name], fixed.files[name]);
    }
}
