use std::fs;

use bcm_cli::{CliError, PipelineConfig, MEDIUM_FILE, RECON_FILE};
use bcm_core::Mode;
use medium_geometry::ScenarioKind;

fn small(dir: &std::path::Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::from_toml("[solver]\nh = 0.03125\n[basis]\nn_gamma = 8\nn_t = 8\n").unwrap();
    cfg.output.dir = dir.to_path_buf();
    cfg
}

#[test]
fn presets_fill_unset_fields() {
    let cfg = PipelineConfig::from_toml("[scenario]\nkind = \"test4\"\n").unwrap();
    let preset = PipelineConfig::for_scenario(ScenarioKind::Test4);
    assert_eq!(cfg.inversion.alpha, preset.inversion.alpha);
    assert_eq!(cfg.inversion.smoothing.sigma_gamma, preset.inversion.smoothing.sigma_gamma);
}

#[test]
fn resolved_config_round_trips() {
    let cfg = PipelineConfig::from_toml("[scenario]\nkind = \"test2\"\n").unwrap();
    let again = PipelineConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
    assert_eq!(cfg.to_toml().unwrap(), again.to_toml().unwrap());
}

#[test]
fn conflicting_basis_sizes_are_config_errors() {
    let e = PipelineConfig::from_toml("[scenario]\nn_t = 16\n[basis]\nn_t = 8\n").unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn unknown_keys_are_config_errors() {
    let e = PipelineConfig::from_toml("[inversion]\nalhpa = 1.0\n").unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn missing_dataset_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let e = bcm_cli::reconstruct(&cfg, &dir.path().join("absent.bcm")).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn pipeline_writes_its_artifacts_and_scores_against_the_right_medium() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    bcm_cli::simulate(&cfg).unwrap();
    bcm_cli::reconstruct(&cfg, &dir.path().join(&cfg.output.dataset)).unwrap();
    for f in ["config.resolved.toml", "chart.csv", "report.toml", "report.csv", MEDIUM_FILE, RECON_FILE] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let header = fs::read_to_string(dir.path().join("chart.csv")).unwrap();
    assert!(header.starts_with("gamma,xi,x1,x2,J,beta"));
    let v = match bcm_cli::validate(&cfg, &dir.path().join(RECON_FILE), &dir.path().join(MEDIUM_FILE)) {
        Ok(v) => v,
        Err(CliError::Threshold(_)) => toml::from_str(&fs::read_to_string(dir.path().join("validation.toml")).unwrap()).unwrap(),
        Err(e) => panic!("{e}"),
    };
    assert!(v.stats.nodes > 0);

    let other = tempfile::tempdir().unwrap();
    let mut cfg2 = small(other.path());
    cfg2.scenario.kind = ScenarioKind::Custom;
    cfg2.scenario.background_speed = 1.1;
    bcm_cli::simulate(&cfg2).unwrap();
    let e = bcm_cli::validate(&cfg, &dir.path().join(RECON_FILE), &other.path().join(MEDIUM_FILE)).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn pseudo_mode_without_oracle_is_an_inversion_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.solver.oracle = false;
    bcm_cli::simulate(&cfg).unwrap();
    cfg.mode = Mode::Pseudo;
    let e = bcm_cli::reconstruct(&cfg, &dir.path().join(&cfg.output.dataset)).unwrap_err();
    assert_eq!(e.exit_code(), 4);
}
