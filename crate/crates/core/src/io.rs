//! CSV encodings of maps, CDFs and scatterer fields.
//!
//! Maps: `x_m,y_m,z_m,pg_linear,pg_db,flag` where `pg_db = 10 log10(pg_linear)`
//! and `flag` is 1 for points within one wavelength of a scatterer.
//! CDFs: `pg_db,prob`. Fields: `x_m,y_m,z_m,rcs_m2,phase_rad`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::evaluation::{to_db, CdfResult, PathGainMap};
use crate::geometry::Point3;
use crate::stochastic::ScattererField;

#[derive(Debug, Serialize, Deserialize)]
pub struct MapRow {
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub pg_linear: f64,
    pub pg_db: f64,
    pub flag: u8,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CdfRow {
    pub pg_db: f64,
    pub prob: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRow {
    x_m: f64,
    y_m: f64,
    z_m: f64,
    rcs_m2: f64,
    phase_rad: f64,
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, csv::Error> {
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn map_to_csv(map: &PathGainMap) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for ((p, &pg), &flag) in map.points.iter().zip(&map.pg).zip(&map.flags) {
        w.serialize(MapRow {
            x_m: p.x,
            y_m: p.y,
            z_m: p.z,
            pg_linear: pg,
            pg_db: to_db(pg),
            flag: flag as u8,
        })?;
    }
    finish(w)
}

pub fn read_map_rows<R: std::io::Read>(r: R) -> Result<Vec<MapRow>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}

pub fn cdf_to_csv(cdf: &CdfResult) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (&s, &p) in cdf.samples.iter().zip(&cdf.probabilities) {
        w.serialize(CdfRow {
            pg_db: to_db(s),
            prob: p,
        })?;
    }
    finish(w)
}

pub fn read_cdf_rows<R: std::io::Read>(r: R) -> Result<Vec<CdfRow>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}

pub fn field_to_csv(field: &ScattererField) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if field.is_empty() {
        w.write_record(["x_m", "y_m", "z_m", "rcs_m2", "phase_rad"])?;
    }
    for ((p, &rcs), &phase) in field.positions.iter().zip(&field.rcs).zip(&field.phases) {
        w.serialize(FieldRow {
            x_m: p.x,
            y_m: p.y,
            z_m: p.z,
            rcs_m2: rcs,
            phase_rad: phase,
        })?;
    }
    finish(w)
}

pub fn field_from_csv<R: std::io::Read>(r: R) -> Result<ScattererField, String> {
    let mut field = ScattererField::empty();
    for row in csv::Reader::from_reader(r).deserialize::<FieldRow>() {
        let row = row.map_err(|e| e.to_string())?;
        field.positions.push(Point3::new(row.x_m, row.y_m, row.z_m));
        field.rcs.push(row.rcs_m2);
        field.phases.push(row.phase_rad);
    }
    field.validate()?;
    Ok(field)
}

pub fn read_scatterer_field(path: &Path) -> Result<ScattererField, String> {
    let file = std::fs::File::open(path).map_err(|e| e.to_string())?;
    field_from_csv(file)
}
