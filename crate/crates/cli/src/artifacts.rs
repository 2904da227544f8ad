//! On-disk artifacts other than the trace dataset, in the same block container.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use bcm_core::{Reconstruction, RunReport};
use datasets::{read_container, write_container, Container};
use medium_geometry::{Grid, MediumField, Provenance};
use serde::{Deserialize, Serialize};

use crate::CliError;

const MEDIUM_KIND: &str = "bcm-medium";
const RECON_KIND: &str = "bcm-reconstruction";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MediumHeader {
    scenario: String,
    content_hash: String,
    c_star: f64,
    grid: Grid,
    params: std::collections::BTreeMap<String, f64>,
}

fn to_toml<T: Serialize>(v: &T) -> Result<String, CliError> {
    toml::to_string(v).map_err(|e| CliError::Input(e.to_string()))
}

fn from_toml<T: for<'a> Deserialize<'a>>(s: &str) -> Result<T, CliError> {
    toml::from_str(s).map_err(|e| CliError::Input(e.to_string()))
}

fn save(c: &Container, path: &Path) -> Result<(), CliError> {
    write_container(c, BufWriter::new(fs::File::create(path)?))?;
    Ok(())
}

pub fn save_medium(m: &MediumField, path: &Path) -> Result<(), CliError> {
    let header = MediumHeader {
        scenario: m.provenance().scenario.clone(),
        content_hash: m.content_hash(),
        c_star: m.c_star(),
        grid: m.grid().clone(),
        params: m.provenance().params.clone(),
    };
    save(
        &Container { kind: MEDIUM_KIND.into(), version: VERSION, header: to_toml(&header)?, blocks: vec![m.speed().to_vec()] },
        path,
    )
}

pub fn load_medium(path: &Path) -> Result<MediumField, CliError> {
    let c = read_container(fs::File::open(path)?, MEDIUM_KIND)?;
    let h: MediumHeader = from_toml(&c.header)?;
    let speed = c.blocks.into_iter().next().ok_or_else(|| CliError::Input("medium file has no speed block".into()))?;
    let m = MediumField::new(h.grid, speed, h.c_star, Provenance { scenario: h.scenario, params: h.params })
        .map_err(|e| CliError::Input(e.to_string()))?;
    if m.content_hash() != h.content_hash {
        return Err(CliError::Input("medium content does not match its recorded hash".into()));
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReconHeader {
    medium_hash: String,
    horizon: f64,
    half_width: f64,
    gammas: Vec<f64>,
    xis: Vec<f64>,
    grid: Grid,
    report: RunReport,
}

/// A reconstruction as stored: chart fields (gamma-major) and the speed on the grid.
#[derive(Clone, Debug)]
pub struct SavedReconstruction {
    pub medium_hash: String,
    pub horizon: f64,
    pub half_width: f64,
    pub gammas: Vec<f64>,
    pub xis: Vec<f64>,
    pub grid: Grid,
    pub report: RunReport,
    pub raw: [Vec<f64>; 3],
    pub smooth: [Vec<f64>; 3],
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub valid: Vec<bool>,
    pub speed: Vec<f64>,
    /// Recovered speed on grid nodes, `NaN` where the map does not reach.
    pub grid_speed: Vec<f64>,
}

impl SavedReconstruction {
    pub fn new(r: &Reconstruction, medium_hash: &str, half_width: f64, grid: &Grid, grid_speed: Vec<f64>) -> Self {
        SavedReconstruction {
            medium_hash: medium_hash.into(),
            horizon: r.horizon,
            half_width,
            gammas: r.gammas.clone(),
            xis: r.xis.clone(),
            grid: grid.clone(),
            report: r.report.clone(),
            raw: [0, 1, 2].map(|a| r.raw[a].values.clone()),
            smooth: [0, 1, 2].map(|a| r.smooth[a].values.clone()),
            x1: r.x1.clone(),
            x2: r.x2.clone(),
            valid: r.valid.clone(),
            speed: r.speed.clone(),
            grid_speed,
        }
    }
}

pub fn save_reconstruction(r: &SavedReconstruction, path: &Path) -> Result<(), CliError> {
    let header = ReconHeader {
        medium_hash: r.medium_hash.clone(),
        horizon: r.horizon,
        half_width: r.half_width,
        gammas: r.gammas.clone(),
        xis: r.xis.clone(),
        grid: r.grid.clone(),
        report: r.report.clone(),
    };
    let mut blocks: Vec<Vec<f64>> = Vec::new();
    blocks.extend(r.raw.iter().cloned());
    blocks.extend(r.smooth.iter().cloned());
    blocks.push(r.x1.clone());
    blocks.push(r.x2.clone());
    blocks.push(r.valid.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect());
    blocks.push(r.speed.clone());
    blocks.push(r.grid_speed.clone());
    save(&Container { kind: RECON_KIND.into(), version: VERSION, header: to_toml(&header)?, blocks }, path)
}

pub fn load_reconstruction(path: &Path) -> Result<SavedReconstruction, CliError> {
    let c = read_container(fs::File::open(path)?, RECON_KIND)?;
    let h: ReconHeader = from_toml(&c.header)?;
    if c.blocks.len() != 11 {
        return Err(CliError::Input(format!("reconstruction file has {} blocks, expected 11", c.blocks.len())));
    }
    let chart = h.gammas.len() * h.xis.len();
    if c.blocks[..10].iter().any(|b| b.len() != chart) || c.blocks[10].len() != h.grid.len() {
        return Err(CliError::Input("reconstruction blocks have the wrong size".into()));
    }
    let mut it = c.blocks.into_iter();
    let mut next = || it.next().expect("block count checked");
    Ok(SavedReconstruction {
        raw: [next(), next(), next()],
        smooth: [next(), next(), next()],
        x1: next(),
        x2: next(),
        valid: next().into_iter().map(|v| v != 0.0).collect(),
        speed: next(),
        grid_speed: next(),
        medium_hash: h.medium_hash,
        horizon: h.horizon,
        half_width: h.half_width,
        gammas: h.gammas,
        xis: h.xis,
        grid: h.grid,
        report: h.report,
    })
}

/// 8-bit binary PGM of a node field, rows from the boundary down; the gray
/// range spans the finite values and `NaN` maps to black.
pub fn write_pgm<W: Write>(grid: &Grid, field: &[f64], mut w: W) -> std::io::Result<(f64, f64)> {
    let finite = field.iter().filter(|v| v.is_finite());
    let lo = finite.clone().cloned().fold(f64::INFINITY, f64::min);
    let hi = finite.cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    writeln!(w, "P5")?;
    writeln!(w, "# range {lo} {hi}")?;
    writeln!(w, "{} {}", grid.n1, grid.n2)?;
    writeln!(w, "255")?;
    let bytes: Vec<u8> = field
        .iter()
        .map(|v| if v.is_finite() { (1.0 + 254.0 * (v - lo) / span).round() as u8 } else { 0 })
        .collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok((lo, hi))
}
