use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bcm_core::validate::{interior_mask, relative_errors, resample_speed, ErrorStats};
use controls::ControlBasis;
use datasets::{build_dataset, load_dataset, read_manifest, save_dataset, BuildOptions, Manifest};
use medium_geometry::{make_scenario, trace_rays, MediumField, Resolution};
use serde::{Deserialize, Serialize};
use wavefield::SolverConfig;

use crate::artifacts::{load_medium, load_reconstruction, save_medium, save_reconstruction, write_pgm, SavedReconstruction};
use crate::config::{ExportFormat, PipelineConfig};
use crate::CliError;

pub const MEDIUM_FILE: &str = "medium.bcm";
pub const RECON_FILE: &str = "reconstruction.bcm";
const RESOLVED_FILE: &str = "config.resolved.toml";

fn prepare_out(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join(RESOLVED_FILE), cfg.to_toml()?)?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// The true medium of the configured scenario on the solver grid.
pub fn make_medium(cfg: &PipelineConfig) -> Result<MediumField, CliError> {
    let sc = &cfg.scenario;
    let step = sc.horizon / cfg.basis.n_t.max(1) as f64;
    let basis = ControlBasis::new(&cfg.basis, sc.horizon, sc.half_width, step).map_err(|e| CliError::Config(e.to_string()))?;
    let res = Resolution { h: cfg.solver.h, support_half_width: basis.support_half_width(), margin: cfg.solver.margin };
    make_scenario(sc, &res).map_err(|e| CliError::Config(e.to_string()))
}

/// Forward solves for every basis control; writes the dataset, the medium and the ray chart.
pub fn simulate(cfg: &PipelineConfig) -> Result<Manifest, CliError> {
    let dir = prepare_out(cfg)?;
    let medium = make_medium(cfg)?;
    save_medium(&medium, &dir.join(MEDIUM_FILE))?;
    let opts = BuildOptions {
        solver: SolverConfig { courant: cfg.solver.courant, trace: cfg.solver.trace },
        oracle: cfg.solver.oracle,
        skip_regularity_check: cfg.solver.skip_regularity_check,
    };
    let ds = build_dataset(&medium, &cfg.basis, cfg.scenario.horizon, cfg.scenario.half_width, &opts)?;
    save_dataset(&ds, &dir.join(&cfg.output.dataset))?;
    let g = medium.grid();
    let gammas: Vec<f64> = g.columns_within(cfg.scenario.half_width).map(|i| g.x1(i)).collect();
    if let Ok(chart) = trace_rays(&medium, &gammas, g.h1, cfg.scenario.horizon) {
        chart.write_csv(create(&dir.join("chart.csv"))?)?;
    }
    if cfg.output.formats.contains(&ExportFormat::Pgm) {
        write_pgm(g, medium.speed(), create(&dir.join("medium.pgm"))?)?;
    }
    Ok(ds.manifest)
}

/// Inversion from the dataset alone.
pub fn reconstruct(cfg: &PipelineConfig, dataset: &Path) -> Result<SavedReconstruction, CliError> {
    let dir = prepare_out(cfg)?;
    let ds = load_dataset(dataset)?;
    ds.manifest.check_compatible(cfg.scenario.horizon, cfg.scenario.half_width)?;
    let inv = bcm_core::InversionConfig { mode: cfg.mode, ..cfg.inversion.clone() };
    let r = bcm_core::reconstruct(&ds, &inv)?;
    let (_, grid_speed) = resample_speed(&r, &ds.manifest.grid);
    let saved = SavedReconstruction::new(&r, &ds.manifest.medium_hash, cfg.scenario.half_width, &ds.manifest.grid, grid_speed);
    save_reconstruction(&saved, &dir.join(RECON_FILE))?;
    fs::write(dir.join("report.toml"), toml::to_string(&r.report).map_err(|e| CliError::Input(e.to_string()))?)?;
    let mut w = create(&dir.join("report.csv"))?;
    writeln!(w, "xi,order,condition,residual_pi0,residual_pi1,residual_pi2,projection_pi0,projection_pi1,projection_pi2")?;
    for x in &r.report.per_xi {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            x.xi, x.order, x.condition, x.residual[0], x.residual[1], x.residual[2], x.projection[0], x.projection[1], x.projection[2]
        )?;
    }
    w.flush()?;
    Ok(saved)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub medium_hash: String,
    /// `"tube"` for the true image of the interior chart, `"box"` when the true
    /// chart has a caustic and a coordinate box stands in for it.
    pub mask: String,
    pub stats: ErrorStats,
    pub min_fraction: f64,
    pub passed: bool,
    pub density_max_recovered: f64,
    pub density_max_true: f64,
}

/// Scores a saved reconstruction against the saved medium.
pub fn validate(cfg: &PipelineConfig, recon: &Path, medium: &Path) -> Result<ValidationReport, CliError> {
    let dir = prepare_out(cfg)?;
    let r = load_reconstruction(recon)?;
    let m = load_medium(medium)?;
    if m.content_hash() != r.medium_hash {
        return Err(CliError::Input("reconstruction was made from data of a different medium".into()));
    }
    let v = &cfg.validation;
    let g = m.grid();
    let (mask, kind) = match interior_mask(&m, &v.region, r.half_width, r.horizon) {
        Ok(mask) => (mask, "tube"),
        Err(bcm_core::CoreError::Medium(medium_geometry::MediumError::Caustic { .. })) => {
            let (x_hi, d_lo, d_hi) = (v.region.gamma_fraction * r.half_width, v.region.xi_min * r.horizon, v.region.xi_max * r.horizon);
            let mask = (0..g.len()).map(|i| g.x1(i % g.n1).abs() <= x_hi && (-d_hi..=-d_lo).contains(&g.x2(i / g.n1))).collect();
            (mask, "box")
        }
        Err(e) => return Err(CliError::Solver(e.to_string())),
    };
    let (err_map, stats) = relative_errors(&r.grid_speed, &m, &mask, v.threshold);
    let dmax = |f: &dyn Fn(usize) -> f64| (0..g.len()).filter(|&i| mask[i]).map(f).filter(|x| x.is_finite()).fold(0.0, f64::max);
    let report = ValidationReport {
        medium_hash: r.medium_hash.clone(),
        mask: kind.into(),
        passed: stats.within >= v.min_fraction,
        min_fraction: v.min_fraction,
        density_max_recovered: dmax(&|i| r.grid_speed[i].powi(-2)),
        density_max_true: dmax(&|i| m.speed()[i].powi(-2)),
        stats,
    };
    fs::write(dir.join("validation.toml"), toml::to_string(&report).map_err(|e| CliError::Input(e.to_string()))?)?;
    if cfg.output.formats.contains(&ExportFormat::Csv) {
        let mut w = create(&dir.join("error_map.csv"))?;
        writeln!(w, "x1,x2,c_true,c_recovered,relative_error")?;
        for i in (0..g.len()).filter(|&i| mask[i]) {
            let (a, b) = (i % g.n1, i / g.n1);
            writeln!(w, "{},{},{},{},{}", g.x1(a), g.x2(b), m.speed()[i], r.grid_speed[i], err_map[i])?;
        }
        w.flush()?;
    }
    if cfg.output.formats.contains(&ExportFormat::Pgm) {
        write_pgm(g, &err_map, create(&dir.join("error_map.pgm"))?)?;
    }
    if !report.passed {
        return Err(CliError::Threshold(format!(
            "{:.3} of {} nodes within {:.0}% (need {:.3})",
            report.stats.within,
            report.stats.nodes,
            100.0 * v.threshold,
            v.min_fraction
        )));
    }
    Ok(report)
}

/// Renders a saved reconstruction in the configured formats; returns the files written.
pub fn export(cfg: &PipelineConfig, recon: &Path) -> Result<Vec<PathBuf>, CliError> {
    let dir = prepare_out(cfg)?;
    let r = load_reconstruction(recon)?;
    let mut out = Vec::new();
    let nx = r.xis.len();
    if cfg.output.formats.contains(&ExportFormat::Csv) {
        let p = dir.join("images.csv");
        let mut w = create(&p)?;
        writeln!(w, "gamma,xi,pi0_raw,pi1_raw,pi2_raw,pi0,pi1,pi2")?;
        for (gi, g) in r.gammas.iter().enumerate() {
            for (l, xi) in r.xis.iter().enumerate() {
                let i = gi * nx + l;
                writeln!(w, "{g},{xi},{},{},{},{},{},{}", r.raw[0][i], r.raw[1][i], r.raw[2][i], r.smooth[0][i], r.smooth[1][i], r.smooth[2][i])?;
            }
        }
        w.flush()?;
        out.push(p);
        let p = dir.join("map.csv");
        let mut w = create(&p)?;
        writeln!(w, "gamma,xi,x1,x2,c,valid")?;
        for (gi, g) in r.gammas.iter().enumerate() {
            for (l, xi) in r.xis.iter().enumerate() {
                let i = gi * nx + l;
                writeln!(w, "{g},{xi},{},{},{},{}", r.x1[i], r.x2[i], r.speed[i], u8::from(r.valid[i]))?;
            }
        }
        w.flush()?;
        out.push(p);
        let p = dir.join("speed.csv");
        let mut w = create(&p)?;
        writeln!(w, "x1,x2,c")?;
        let gr = &r.grid;
        for (i, c) in r.grid_speed.iter().enumerate().filter(|(_, c)| c.is_finite()) {
            writeln!(w, "{},{},{c}", gr.x1(i % gr.n1), gr.x2(i / gr.n1))?;
        }
        w.flush()?;
        out.push(p);
    }
    if cfg.output.formats.contains(&ExportFormat::Pgm) {
        let p = dir.join("speed.pgm");
        write_pgm(&r.grid, &r.grid_speed, create(&p)?)?;
        out.push(p);
        let density: Vec<f64> = r.grid_speed.iter().map(|c| c.powi(-2)).collect();
        let p = dir.join("density.pgm");
        write_pgm(&r.grid, &density, create(&p)?)?;
        out.push(p);
    }
    Ok(out)
}

/// Human-readable summary of any artifact file.
pub fn inspect(path: &Path) -> Result<String, CliError> {
    let mut r = BufReader::new(fs::File::open(path)?);
    let mut first = String::new();
    r.read_line(&mut first)?;
    let kind = first.split_whitespace().next().unwrap_or("").to_string();
    let mut s = String::new();
    match kind.as_str() {
        "bcm-trace-dataset" => {
            let mf = read_manifest(&mut BufReader::new(fs::File::open(path)?))?;
            s += &format!("trace dataset, format {}\n", mf.format_version);
            s += &format!("scenario {} medium {}\n", mf.scenario, mf.medium_hash);
            s += &format!("T = {} L = {} c_star = {}\n", mf.horizon, mf.half_width, mf.c_star);
            s += &format!(
                "basis {:?} {} x {} = {} controls, dt = {} ({} steps)\n",
                mf.basis.family,
                mf.basis.n_gamma,
                mf.basis.n_t,
                mf.n_controls(),
                mf.dt,
                mf.horizon_steps
            );
            s += &format!("grid {} x {} h = {}\n", mf.grid.n1, mf.grid.n2, mf.grid.h1);
            s += &format!("oracle block: {}\n", if mf.oracle { "yes" } else { "no" });
        }
        "bcm-medium" | "bcm-reconstruction" => {
            let c = datasets::read_container(fs::File::open(path)?, &kind)?;
            s += &format!("{} version {}, {} blocks\n", c.kind, c.version, c.blocks.len());
            s += &c.header;
        }
        _ => return Err(CliError::Input(format!("{} is not a known artifact", path.display()))),
    }
    Ok(s)
}
