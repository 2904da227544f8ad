use std::io::Cursor;

use controls::{BasisSpec, ControlBasis};
use datasets::{build_dataset, load_dataset, read_dataset, save_dataset, write_dataset, BuildOptions, DatasetError, TraceDataset};
use medium_geometry::{make_scenario, MediumField, Resolution, ScenarioKind, ScenarioSpec};
use wavefield::{RunSpec, SeparableDrive, Solver64, SolverConfig};

fn small_basis(n_gamma: usize, n_t: usize) -> BasisSpec {
    BasisSpec { n_gamma, n_t, ..BasisSpec::default() }
}

fn medium(kind: ScenarioKind, h: f64) -> MediumField {
    let spec = ScenarioSpec::preset(kind);
    let support = 1.0 + 20.0 / 32.0;
    make_scenario(&spec, &Resolution { h, support_half_width: support, margin: 0.1 }).unwrap()
}

fn build(m: &MediumField, basis: &BasisSpec, oracle: bool) -> TraceDataset {
    build_dataset(m, basis, 1.0, 1.0, &BuildOptions { oracle, ..BuildOptions::default() }).unwrap()
}

fn bytes(ds: &TraceDataset) -> Vec<u8> {
    let mut v = Vec::new();
    write_dataset(ds, &mut v).unwrap();
    v
}

#[test]
fn paper_basis_size_gives_two_traces_per_control() {
    let m = medium(ScenarioKind::Test1, 1.0 / 16.0);
    let ds = build(&m, &small_basis(16, 16), false);
    assert_eq!(ds.len(), 256);
    assert_eq!(ds.response.len(), 16);
    assert_eq!(ds.generator.len(), 16);
    let strip = ds.manifest.strip().len();
    let support = ds.manifest.support().len();
    for k in [0, 17, 255] {
        assert_eq!(ds.response_trace(k).len(), strip * ds.n_time());
        assert_eq!(ds.integrated_trace(k).len(), support * ds.n_time_double());
    }
    assert!(!ds.manifest.truncated.is_empty());
}

#[test]
fn empty_basis_gives_empty_dataset() {
    let m = medium(ScenarioKind::Test1, 1.0 / 16.0);
    let ds = build(&m, &small_basis(0, 4), false);
    assert!(ds.is_empty());
    let back = read_dataset(Cursor::new(bytes(&ds))).unwrap();
    assert_eq!(back, ds);
}

#[test]
fn rebuild_is_bit_identical() {
    let m = medium(ScenarioKind::Test1, 1.0 / 16.0);
    let a = bytes(&build(&m, &small_basis(4, 4), true));
    let b = bytes(&build(&m, &small_basis(4, 4), true));
    assert_eq!(a, b);
}

#[test]
fn save_then_load_round_trips() {
    let m = medium(ScenarioKind::Test1, 1.0 / 16.0);
    let ds = build(&m, &small_basis(4, 4), true);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.bcm");
    save_dataset(&ds, &path).unwrap();
    let back = load_dataset(&path).unwrap();
    assert_eq!(back, ds);
    assert_eq!(back.manifest.medium_hash, m.content_hash());
}

#[test]
fn corrupted_payload_fails_checksum() {
    let m = medium(ScenarioKind::Test1, 1.0 / 16.0);
    let mut raw = bytes(&build(&m, &small_basis(2, 4), false));
    let n = raw.len();
    raw[n - 100] ^= 0x01;
    assert!(matches!(read_dataset(Cursor::new(raw)), Err(DatasetError::Checksum { .. })));
}

#[test]
fn truncated_and_foreign_files_are_rejected() {
    let m = medium(ScenarioKind::Test1, 1.0 / 16.0);
    let raw = bytes(&build(&m, &small_basis(2, 4), false));
    let cut = raw[..raw.len() - 20].to_vec();
    assert!(matches!(read_dataset(Cursor::new(cut)), Err(DatasetError::Truncated(_))));
    let mut newer = raw.clone();
    let pos = raw.iter().position(|&b| b == b'\n').unwrap();
    newer[pos - 1] = b'9';
    assert!(matches!(read_dataset(Cursor::new(newer)), Err(DatasetError::Version { found: 9, .. })));
    assert!(matches!(read_dataset(Cursor::new(b"hello\n".to_vec())), Err(DatasetError::Format(_))));
}

#[test]
fn horizon_mismatch_is_refused() {
    let m = medium(ScenarioKind::Test1, 1.0 / 16.0);
    let ds = build(&m, &small_basis(2, 4), false);
    assert!(ds.manifest.check_compatible(1.0, 1.0).is_ok());
    assert!(matches!(ds.manifest.check_compatible(1.5, 1.0), Err(DatasetError::Mismatch(_))));
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn direct_trace(m: &MediumField, ds: &TraceDataset, l: usize, signal: Vec<f64>, double: bool) -> Vec<f64> {
    let mf = &ds.manifest;
    let solver = Solver64::with_dt(m, &SolverConfig::default(), mf.dt).unwrap();
    let basis = mf.basis().unwrap();
    let cols = mf.support();
    let profile: Vec<f64> = cols.clone().map(|i| basis.spatial(l, mf.grid.x1(i))).collect();
    let drive = SeparableDrive { first_column: cols.start, profile, signal };
    let n = if double { 2 * mf.horizon_steps } else { mf.horizon_steps };
    let trace_columns = if double { cols } else { mf.strip() };
    let spec = RunSpec { drive: Some(&drive), n_steps: n, trace_columns, ..RunSpec::default() };
    solver.run(&spec, &mut |_, _| {}).unwrap().trace
}

#[test]
fn delayed_control_trace_is_shifted_trace() {
    let m = medium(ScenarioKind::Test1, 1.0 / 32.0);
    let ds = build(&m, &small_basis(3, 8), false);
    let basis: ControlBasis = ds.manifest.basis().unwrap();
    let (l, mm) = (1, 5);
    let k = basis.index(l, mm);
    let signal: Vec<f64> = (0..ds.n_time() + 1).map(|n| basis.temporal(mm, n as f64 * ds.manifest.dt)).collect();
    let direct = direct_trace(&m, &ds, l, signal, false);
    let synth = ds.response_trace(k);
    let diff: Vec<f64> = direct.iter().zip(&synth).map(|(a, b)| a - b).collect();
    assert!(max_abs(&diff) <= 1e-10 * max_abs(&direct), "{} vs {}", max_abs(&diff), max_abs(&direct));
}

#[test]
fn integrated_trace_matches_direct_solve_of_integrated_extension() {
    let m = medium(ScenarioKind::Test1, 1.0 / 32.0);
    let ds = build(&m, &small_basis(3, 8), false);
    let basis = ds.manifest.basis().unwrap();
    let mf = &ds.manifest;
    let nt = mf.horizon_steps;
    let horizon = mf.horizon;
    let l = 2;
    let trunc = *mf.truncated.first().unwrap();
    for mm in [0, 3, trunc] {
        let onset = mm as f64 * basis.step + basis.delta;
        let prim = |t: f64| controls::theta_integral(t - onset, basis.step, basis.d);
        let exact: Vec<f64> = (0..=2 * nt + 1)
            .map(|n| {
                let t = n as f64 * mf.dt;
                let s = t.min(2.0 * horizon - t).max(0.0);
                prim(s) - prim(0.0)
            })
            .collect();
        let direct = direct_trace(&m, &ds, l, exact, true);
        let synth = ds.integrated_trace(basis.index(l, mm));
        let diff: Vec<f64> = direct.iter().zip(&synth).map(|(a, b)| a - b).collect();
        let rel = max_abs(&diff) / max_abs(&direct);
        assert!(rel < 1e-8, "m = {mm}: relative difference {rel}");

        if mm != trunc {
            // trapezoid integral of the odd extension, built with the control-space algebra
            let tent: Vec<f64> = (0..=nt).map(|n| basis.temporal(mm, n as f64 * mf.dt)).collect();
            let f = controls::ControlSamples { n_gamma: 1, n_time: nt + 1, dgamma: 1.0, dt: mf.dt, values: tent };
            let mut signal = f.odd_extend().time_integrate().values;
            signal.push(*signal.last().unwrap());
            let coarse = direct_trace(&m, &ds, l, signal, true);
            let diff: Vec<f64> = coarse.iter().zip(&synth).map(|(a, b)| a - b).collect();
            let rel = max_abs(&diff) / max_abs(&coarse);
            assert!(rel < 2e-2, "m = {mm}: trapezoid route differs by {rel}");
        }
    }
}

#[test]
fn stored_traces_respect_finite_speed() {
    let m = medium(ScenarioKind::Test1, 1.0 / 32.0);
    let ds = build(&m, &small_basis(2, 4), false);
    let mf = &ds.manifest;
    let basis = mf.basis().unwrap();
    let edge = basis.support_half_width();
    let peak = ds.response.iter().map(|r| max_abs(r)).fold(0.0, f64::max);
    for r in &ds.response {
        for (q, i) in mf.strip().enumerate() {
            let dist = (mf.grid.x1(i).abs() - edge).max(0.0);
            for n in 0..ds.n_time() {
                if mf.c_star * n as f64 * mf.dt < dist - 2.0 * mf.grid.h1 {
                    assert!(r[q * ds.n_time() + n].abs() < 1e-6 * peak);
                }
            }
        }
    }
}

#[test]
fn oracle_gram_is_symmetric_positive() {
    let m = medium(ScenarioKind::Test1, 1.0 / 16.0);
    let ds = build(&m, &small_basis(3, 4), true);
    let o = ds.oracle.as_ref().unwrap();
    let n = ds.len();
    for i in 0..n {
        assert!(o.gram[i * n + i] >= 0.0);
        for j in 0..n {
            assert_eq!(o.gram[i * n + j], o.gram[j * n + i]);
        }
    }
}

#[test]
fn medium_with_caustics_is_rejected() {
    let mut spec = ScenarioSpec::preset(ScenarioKind::Test1);
    spec.a = Some(-0.8);
    spec.delta1 = Some(0.3);
    spec.delta2 = Some(0.3);
    spec.xbar2 = Some(-0.4);
    let m = make_scenario(&spec, &Resolution { h: 1.0 / 16.0, support_half_width: 1.625, margin: 0.1 }).unwrap();
    let r = build_dataset(&m, &small_basis(2, 4), 1.0, 1.0, &BuildOptions::default());
    assert!(matches!(r, Err(DatasetError::Caustic { .. })), "{r:?}");
}

#[test]
fn narrow_grid_is_rejected() {
    let spec = ScenarioSpec::preset(ScenarioKind::Test1);
    let m = make_scenario(&spec, &Resolution { h: 1.0 / 16.0, support_half_width: 1.0, margin: 0.0 }).unwrap();
    let r = build_dataset(&m, &small_basis(2, 4), 1.0, 1.0, &BuildOptions::default());
    assert!(matches!(r, Err(DatasetError::Mismatch(_))));
}

#[test]
fn generic_container_round_trips_and_checks_its_kind() {
    let c = datasets::Container {
        kind: "bcm-speed-map".into(),
        version: 3,
        header: "n = 2\n".into(),
        blocks: vec![vec![1.0, -2.5], vec![], vec![f64::MAX]],
    };
    let mut v = Vec::new();
    datasets::write_container(&c, &mut v).unwrap();
    assert_eq!(datasets::read_container(Cursor::new(&v), "bcm-speed-map").unwrap(), c);
    assert!(matches!(datasets::read_container(Cursor::new(&v), "bcm-speed"), Err(DatasetError::Format(_))));
    let last = v.len() - 9;
    v[last] ^= 1;
    assert!(matches!(datasets::read_container(Cursor::new(&v), "bcm-speed-map"), Err(DatasetError::Checksum { .. })));
}
