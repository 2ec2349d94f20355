//! Path-gain maps over spatial domains, max-over-realization aggregation,
//! empirical CDFs and fading-margin reports.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::EvaluationError;
use crate::geometry::Point3;
use crate::precoding::{Precoder, WeightVector};
use crate::scenario::Scenario;
use crate::stochastic::{draw_beam_phases, RngSeed, StreamLabel};

/// `10 log10(x)` for a power ratio.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Spatial domain a map is evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Horizontal rectangle at height `z`; grid starts at the lower corner.
    Plane {
        z: f64,
        x_range: (f64, f64),
        y_range: (f64, f64),
        spacing: f64,
    },
    /// Horizontal disc around `center`, on a Cartesian grid through the center.
    Disc {
        center: Point3,
        diameter: f64,
        spacing: f64,
    },
}

fn axis_samples(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    if hi < lo {
        return Vec::new();
    }
    let n = ((hi - lo) / spacing + 1e-9).floor() as usize + 1;
    (0..n).map(|i| lo + i as f64 * spacing).collect()
}

impl Domain {
    pub fn spacing(&self) -> f64 {
        match self {
            Domain::Plane { spacing, .. } | Domain::Disc { spacing, .. } => *spacing,
        }
    }

    /// Grid points, x running fastest.
    pub fn grid(&self) -> Result<Vec<Point3>, EvaluationError> {
        let spacing = self.spacing();
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(EvaluationError::NonPositiveSpacing(spacing));
        }
        let points: Vec<Point3> = match *self {
            Domain::Plane {
                z,
                x_range,
                y_range,
                spacing,
            } => {
                let xs = axis_samples(x_range.0, x_range.1, spacing);
                let ys = axis_samples(y_range.0, y_range.1, spacing);
                ys.iter()
                    .flat_map(|&y| xs.iter().map(move |&x| Point3::new(x, y, z)))
                    .collect()
            }
            Domain::Disc {
                center,
                diameter,
                spacing,
            } => {
                if !(diameter > 0.0 && diameter.is_finite()) {
                    return Err(EvaluationError::NonPositiveDiameter(diameter));
                }
                let r = diameter / 2.0;
                let n = (r / spacing + 1e-9).floor() as i64;
                let r2 = r * r * (1.0 + 1e-12);
                let mut pts = Vec::new();
                for iy in -n..=n {
                    let dy = iy as f64 * spacing;
                    for ix in -n..=n {
                        let dx = ix as f64 * spacing;
                        if dx * dx + dy * dy <= r2 {
                            pts.push(Point3::new(center.x + dx, center.y + dy, center.z));
                        }
                    }
                }
                pts
            }
        };
        if points.is_empty() {
            return Err(EvaluationError::EmptyGrid);
        }
        Ok(points)
    }
}

/// Provenance of a map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub precoder: Precoder,
    /// Number of realizations folded into the map by pointwise max.
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Points closer than this to a scatterer are flagged.
    pub flag_radius: f64,
}

/// Path gain (linear) on a grid of points.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGainMap {
    pub domain: Domain,
    pub points: Vec<Point3>,
    pub pg: Vec<f64>,
    /// `true` where the point is within `flag_radius` of a scatterer.
    pub flags: Vec<bool>,
    pub metadata: MapMetadata,
}

impl PathGainMap {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn flagged_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// Values at unflagged points.
    pub fn unflagged_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.pg
            .iter()
            .zip(&self.flags)
            .filter(|(_, &f)| !f)
            .map(|(&v, _)| v)
    }

    fn same_grid(&self, other: &PathGainMap) -> bool {
        self.points == other.points
    }
}

/// Evaluates `PG = |h(p)^T w|²` at every grid point, in parallel. The result
/// does not depend on the number of worker threads.
pub fn pg_map(
    scenario: &Scenario,
    w: &WeightVector,
    domain: &Domain,
    metadata: MapMetadata,
) -> Result<PathGainMap, EvaluationError> {
    let points = domain.grid()?;
    let lit = scenario.illuminate(w)?;
    let pg = points
        .par_iter()
        .map(|&p| lit.path_gain(p))
        .collect::<Result<Vec<_>, _>>()?;
    let flags = points
        .par_iter()
        .map(|&p| scenario.near_scatterer(p, metadata.flag_radius))
        .collect();
    Ok(PathGainMap {
        domain: domain.clone(),
        points,
        pg,
        flags,
        metadata,
    })
}

/// Plane map at height `z` over the given extents.
pub fn pg_map_plane(
    scenario: &Scenario,
    w: &WeightVector,
    z: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    spacing: f64,
    metadata: MapMetadata,
) -> Result<PathGainMap, EvaluationError> {
    let domain = Domain::Plane {
        z,
        x_range,
        y_range,
        spacing,
    };
    pg_map(scenario, w, &domain, metadata)
}

pub fn pg_map_disc(
    scenario: &Scenario,
    w: &WeightVector,
    center: Point3,
    diameter: f64,
    spacing: f64,
    metadata: MapMetadata,
) -> Result<PathGainMap, EvaluationError> {
    let domain = Domain::Disc {
        center,
        diameter,
        spacing,
    };
    pg_map(scenario, w, &domain, metadata)
}

/// Disc diameter matched to the beamwidth `d λ / aperture` at distance `d`.
pub fn focal_disc_diameter(distance: f64, wavelength: f64, aperture_width: f64) -> f64 {
    distance * wavelength / aperture_width
}

/// Streaming pointwise maximum over maps on a common grid.
#[derive(Debug, Clone, Default)]
pub struct MaxAccumulator {
    acc: Option<PathGainMap>,
}

impl MaxAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, map: PathGainMap) -> Result<(), EvaluationError> {
        match &mut self.acc {
            None => self.acc = Some(map),
            Some(acc) => {
                if !acc.same_grid(&map) {
                    return Err(EvaluationError::GridMismatch);
                }
                for (a, b) in acc.pg.iter_mut().zip(&map.pg) {
                    *a = a.max(*b);
                }
                for (a, b) in acc.flags.iter_mut().zip(&map.flags) {
                    *a |= *b;
                }
                acc.metadata.n_realizations += map.metadata.n_realizations;
            }
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.acc.as_ref().map_or(0, |m| m.metadata.n_realizations)
    }

    pub fn finish(self) -> Result<PathGainMap, EvaluationError> {
        self.acc.ok_or(EvaluationError::NoMaps)
    }
}

/// Pointwise maximum; metadata records the total realization count.
pub fn max_over_realizations(maps: &[PathGainMap]) -> Result<PathGainMap, EvaluationError> {
    let mut acc = MaxAccumulator::new();
    for m in maps {
        acc.push(m.clone())?;
    }
    acc.finish()
}

/// Beam phases of realization `index`, one per image source.
pub fn realization_phases(
    scenario: &Scenario,
    master_seed: u64,
    index: u64,
) -> Result<Vec<f64>, EvaluationError> {
    let seed = RngSeed::new(master_seed, StreamLabel::BeamPhases).with_index(index);
    draw_beam_phases(scenario.images().len(), seed).map_err(|_| EvaluationError::NoRealizations)
}

/// Map for `precoder` focused at `target`. For beam diversity this is the
/// pointwise maximum over realizations `0..n_realizations`, each with its
/// own phase draw; the other precoders ignore `n_realizations`.
pub fn strategy_map(
    scenario: &Scenario,
    precoder: Precoder,
    target: Point3,
    domain: &Domain,
    n_realizations: usize,
    master_seed: u64,
) -> Result<PathGainMap, EvaluationError> {
    let meta = MapMetadata {
        precoder,
        n_realizations: 1,
        master_seed,
        flag_radius: scenario.wavelength(),
    };
    if !precoder.is_random() {
        let w = scenario.precoder_weights(precoder, target)?;
        return pg_map(scenario, &w, domain, meta);
    }
    if n_realizations == 0 {
        return Err(EvaluationError::NoRealizations);
    }
    let mut acc = MaxAccumulator::new();
    for r in 0..n_realizations as u64 {
        let phases = realization_phases(scenario, master_seed, r)?;
        let w = scenario.beam_diversity_weights(target, &phases)?;
        acc.push(pg_map(scenario, &w, domain, meta.clone())?)?;
    }
    acc.finish()
}

/// Beam-diversity maps for several realization counts from one pass over
/// `0..max(counts)`: entry `n` is the max over the first `n` realizations.
pub fn beam_diversity_prefix_maps(
    scenario: &Scenario,
    target: Point3,
    domain: &Domain,
    counts: &[usize],
    master_seed: u64,
) -> Result<BTreeMap<usize, PathGainMap>, EvaluationError> {
    if counts.contains(&0) {
        return Err(EvaluationError::NoRealizations);
    }
    let max_n = counts.iter().copied().max().unwrap_or(0);
    let meta = MapMetadata {
        precoder: Precoder::BeamDiversity,
        n_realizations: 1,
        master_seed,
        flag_radius: scenario.wavelength(),
    };
    let mut acc = MaxAccumulator::new();
    let mut out = BTreeMap::new();
    for r in 0..max_n {
        let phases = realization_phases(scenario, master_seed, r as u64)?;
        let w = scenario.beam_diversity_weights(target, &phases)?;
        acc.push(pg_map(scenario, &w, domain, meta.clone())?)?;
        if counts.contains(&(r + 1)) {
            out.insert(r + 1, acc.clone().finish()?);
        }
    }
    Ok(out)
}

/// Empirical distribution of path gain samples (linear).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfResult {
    /// Sorted ascending.
    pub samples: Vec<f64>,
    /// `probabilities[i] = (i + 1) / n`.
    pub probabilities: Vec<f64>,
}

impl CdfResult {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self, EvaluationError> {
        if samples.is_empty() {
            return Err(EvaluationError::EmptyGrid);
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let probabilities = (1..=samples.len()).map(|i| i as f64 / n).collect();
        Ok(Self {
            samples,
            probabilities,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `F(x) = #{samples <= x} / n` (right-continuous).
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.samples.partition_point(|&s| s <= x);
        k as f64 / self.samples.len() as f64
    }

    /// Lower empirical quantile: the smallest sample with `F >= p`. Values
    /// of `p` below `1/n` resolve to the minimum sample.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.samples.len();
        let k = ((p * n as f64).ceil() as usize).clamp(1, n);
        self.samples[k - 1]
    }

    /// Whether `p` is resolvable with this many samples.
    pub fn resolves(&self, p: f64) -> bool {
        p >= 1.0 / self.samples.len() as f64
    }

    /// First-order stochastic dominance: `self(x) <= other(x)` for all x,
    /// i.e. `self` is never more likely to be low than `other`.
    pub fn dominates(&self, other: &CdfResult) -> bool {
        self.samples
            .iter()
            .chain(&other.samples)
            .all(|&x| self.eval(x) <= other.eval(x))
    }
}

/// Empirical CDF of the unflagged points of a map.
pub fn empirical_cdf(map: &PathGainMap) -> Result<CdfResult, EvaluationError> {
    if map.is_empty() {
        return Err(EvaluationError::EmptyGrid);
    }
    let samples: Vec<f64> = map.unflagged_values().collect();
    if samples.is_empty() {
        return Err(EvaluationError::AllFlagged);
    }
    CdfResult::from_samples(samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginEntry {
    pub strategy: String,
    pub pg_at_outage_db: f64,
    /// `pg_at_outage_db - reference pg_at_outage_db`; positive means less
    /// fading margin is needed than with the reference.
    pub reduction_db: f64,
    pub samples: usize,
    /// Set when the outage level is finer than `1 / samples`.
    pub resolution_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FadingMarginReport {
    pub outage: f64,
    pub reference: String,
    pub entries: Vec<MarginEntry>,
}

impl FadingMarginReport {
    pub fn entry(&self, strategy: &str) -> Option<&MarginEntry> {
        self.entries.iter().find(|e| e.strategy == strategy)
    }
}

/// Path gain at outage level `outage` for every strategy, and its
/// improvement over the reference strategy in dB.
pub fn fading_margin(
    cdfs: &BTreeMap<String, CdfResult>,
    outage: f64,
    reference: &str,
) -> Result<FadingMarginReport, EvaluationError> {
    if !(outage > 0.0 && outage < 1.0) {
        return Err(EvaluationError::InvalidOutage(outage));
    }
    if cdfs.values().any(|c| c.is_empty()) {
        return Err(EvaluationError::EmptyGrid);
    }
    let reference_db = to_db(
        cdfs.get(reference)
            .ok_or_else(|| EvaluationError::MissingReference(reference.to_string()))?
            .quantile(outage),
    );
    let entries = cdfs
        .iter()
        .map(|(name, cdf)| {
            let q = to_db(cdf.quantile(outage));
            MarginEntry {
                strategy: name.clone(),
                pg_at_outage_db: q,
                reduction_db: q - reference_db,
                samples: cdf.len(),
                resolution_warning: !cdf.resolves(outage),
            }
        })
        .collect();
    Ok(FadingMarginReport {
        outage,
        reference: reference.to_string(),
        entries,
    })
}

/// Positions of strict local minima of a sampled 1-D profile.
pub fn local_minima(coords: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(coords.len(), values.len());
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] < values[i - 1] && values[i] < values[i + 1])
        .map(|i| coords[i])
        .collect()
}
