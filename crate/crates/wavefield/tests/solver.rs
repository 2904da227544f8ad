use medium_geometry::{Grid, MediumField, Provenance};
use proptest::prelude::*;
use wavefield::{
    inner_product_h, RunSpec, SampledDrive, SeparableDrive, Solver32, Solver64, SolverConfig, TraceStencil, WaveError,
};

fn homogeneous(half_width: f64, depth: f64, h: f64, c: f64) -> MediumField {
    let grid = Grid::symmetric(half_width, depth, h).unwrap();
    let n = grid.len();
    MediumField::new(grid, vec![c; n], c, Provenance::default()).unwrap()
}

fn pulse(t: f64) -> f64 {
    (-((t - 0.3) / 0.08).powi(2)).exp()
}

fn pulse_rate(t: f64) -> f64 {
    -2.0 * (t - 0.3) / 0.0064 * pulse(t)
}

/// Uniform drive over the whole boundary; the centre column sees the plane wave `psi(t + x2)`.
fn plane_wave_error(h: f64, stencil: TraceStencil) -> f64 {
    let medium = homogeneous(1.5, 1.0, h, 1.0);
    let cfg = SolverConfig { trace: stencil, ..SolverConfig::default() };
    let solver = Solver64::new(&medium, &cfg, 0.05).unwrap();
    let g = medium.grid();
    let n = solver.steps_for(0.8).unwrap();
    let signal: Vec<f64> = (0..=n + 1).map(|k| pulse(k as f64 * solver.dt())).collect();
    let drive = SeparableDrive { first_column: 0, profile: vec![1.0; g.n1], signal };
    let mid = g.n1 / 2;
    let spec = RunSpec { drive: Some(&drive), n_steps: n, trace_columns: mid..mid + 1, ..RunSpec::default() };
    let out = solver.run(&spec, &mut |_, _| {}).unwrap();
    let err2: f64 = (0..=n).map(|k| (out.trace_at(mid, k) - pulse_rate(k as f64 * solver.dt())).powi(2)).sum();
    let ref2: f64 = (0..=n).map(|k| pulse_rate(k as f64 * solver.dt()).powi(2)).sum();
    (err2 / ref2).sqrt()
}

#[test]
fn plane_wave_trace_converges_at_second_order() {
    for stencil in [TraceStencil::Flux, TraceStencil::OneSided] {
        let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
        let errs: Vec<f64> = hs.iter().map(|&h| plane_wave_error(h, stencil)).collect();
        let slope = (errs[0] / errs[2]).ln() / (hs[0] / hs[2]).ln();
        println!("{stencil:?}: errors {errs:?}, slope {slope:.3}");
        assert!((slope - 2.0).abs() <= 0.3, "{stencil:?} slope {slope}");
        assert!(errs[2] < 2e-2);
    }
}

#[test]
fn zero_drive_gives_zero_field() {
    let medium = homogeneous(1.0, 1.0, 1.0 / 16.0, 1.0);
    let solver = Solver64::new(&medium, &SolverConfig::default(), 0.1).unwrap();
    let drive = SeparableDrive { first_column: 3, profile: vec![0.0; 10], signal: vec![1.0; 40] };
    let spec = RunSpec { drive: Some(&drive), n_steps: 30, trace_columns: 0..33, ..RunSpec::default() };
    let out = solver.run(&spec, &mut |_, u| assert!(u.iter().all(|v| *v == 0.0))).unwrap();
    assert!(out.trace.iter().all(|v| *v == 0.0));
}

#[test]
fn energy_is_conserved_for_cauchy_data() {
    let grid = Grid::symmetric(1.0, 2.0, 1.0 / 64.0).unwrap();
    let c: Vec<f64> = (0..grid.len())
        .map(|k| {
            let (x1, x2) = (grid.x1(k % grid.n1), grid.x2(k / grid.n1));
            1.0 + 0.3 * (-(x1 * x1 + (x2 + 1.0).powi(2)) / 0.1).exp()
        })
        .collect();
    let medium = MediumField::new(grid.clone(), c, 1.3, Provenance::default()).unwrap();
    let solver = Solver64::new(&medium, &SolverConfig::default(), 0.1).unwrap();
    let u0: Vec<f64> = (0..grid.len())
        .map(|k| {
            let (x1, x2) = (grid.x1(k % grid.n1), grid.x2(k / grid.n1));
            (-((x1 - 0.2).powi(2) + (x2 + 1.0).powi(2)) / 0.02).exp()
        })
        .collect();
    let v0 = vec![0.0; grid.len()];
    let n = solver.steps_for(2.0).unwrap();
    let spec = RunSpec { initial: Some((&u0, &v0)), n_steps: n, track_energy: true, ..RunSpec::default() };
    let out = solver.run(&spec, &mut |_, _| {}).unwrap();
    let e0 = out.energy[0];
    let drift = out.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0;
    assert!(e0 > 0.0);
    assert!(drift <= 1e-4, "relative drift {drift}");
}

#[test]
fn energy_is_constant_after_the_control_ends() {
    let medium = homogeneous(2.0, 2.0, 1.0 / 64.0, 1.0);
    let solver = Solver64::new(&medium, &SolverConfig::default(), 0.05).unwrap();
    let g = medium.grid();
    let cols = g.columns_within(0.5);
    let profile: Vec<f64> = cols.clone().map(|i| (std::f64::consts::PI * g.x1(i)).cos().powi(2)).collect();
    let n = solver.steps_for(1.5).unwrap();
    let signal: Vec<f64> = (0..=n + 1).map(|k| pulse(k as f64 * solver.dt())).collect();
    let drive = SeparableDrive { first_column: cols.start, profile, signal };
    let spec = RunSpec { drive: Some(&drive), n_steps: n, track_energy: true, ..RunSpec::default() };
    let out = solver.run(&spec, &mut |_, _| {}).unwrap();
    let quiet = solver.steps_for(0.7).unwrap();
    let e0 = out.energy[quiet];
    let drift = out.energy[quiet..].iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0;
    assert!(drift <= 1e-4, "relative drift {drift}");
}

#[test]
fn traces_respect_finite_speed() {
    let medium = homogeneous(2.0, 1.5, 1.0 / 64.0, 1.0);
    let solver = Solver64::new(&medium, &SolverConfig::default(), 0.05).unwrap();
    let g = medium.grid();
    let cols = g.columns_within(0.25);
    let profile: Vec<f64> = cols.clone().map(|i| (2.0 * std::f64::consts::PI * g.x1(i)).cos().powi(2)).collect();
    let n = solver.steps_for(1.0).unwrap();
    let signal: Vec<f64> = (0..=n + 1).map(|k| pulse(k as f64 * solver.dt())).collect();
    let drive = SeparableDrive { first_column: cols.start, profile, signal };
    let far = g.column_of(0.75).unwrap();
    let spec = RunSpec { drive: Some(&drive), n_steps: n, trace_columns: cols.start..far + 1, ..RunSpec::default() };
    let out = solver.run(&spec, &mut |_, _| {}).unwrap();
    let peak = out.trace.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let before = solver.steps_for(0.5).unwrap();
    let early = out.column(far)[..before].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(early < 1e-6 * peak, "{early} vs peak {peak}");
    assert!(out.column(far)[before..].iter().any(|v| v.abs() > 1e-3 * peak));
}

#[test]
fn restricted_update_matches_full_update() {
    let medium = homogeneous(1.0, 1.0, 1.0 / 32.0, 1.0);
    let solver = Solver64::new(&medium, &SolverConfig::default(), 0.1).unwrap();
    let g = medium.grid();
    let signal: Vec<f64> = (0..80).map(|k| pulse(k as f64 * solver.dt())).collect();
    let drive = SeparableDrive { first_column: 30, profile: vec![1.0, 2.0, 1.0], signal };
    let zeros = vec![0.0; g.len()];
    let lean = RunSpec { drive: Some(&drive), n_steps: 70, trace_columns: 0..g.n1, ..RunSpec::default() };
    let full = RunSpec { initial: Some((&zeros, &zeros)), ..lean.clone() };
    let a = solver.run(&lean, &mut |_, _| {}).unwrap();
    let b = solver.run(&full, &mut |_, _| {}).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.final_u, b.final_u);
}

#[test]
fn single_precision_tracks_double_precision() {
    let medium = homogeneous(1.0, 1.0, 1.0 / 32.0, 1.0);
    let cfg = SolverConfig::default();
    let s64 = Solver64::new(&medium, &cfg, 0.1).unwrap();
    let s32 = Solver32::new(&medium, &cfg, 0.1).unwrap();
    let n = s64.steps_for(0.8).unwrap();
    let signal: Vec<f64> = (0..=n + 1).map(|k| pulse(k as f64 * s64.dt())).collect();
    let drive = SeparableDrive { first_column: 25, profile: vec![0.5, 1.0, 1.0, 1.0, 0.5], signal };
    let spec = RunSpec { drive: Some(&drive), n_steps: n, trace_columns: 20..45, ..RunSpec::default() };
    let a = s64.run(&spec, &mut |_, _| {}).unwrap();
    let b = s32.run(&spec, &mut |_, _| {}).unwrap();
    let scale = a.trace.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.trace.iter().zip(&b.trace).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff < 1e-4 * scale, "{diff} vs {scale}");
}

#[test]
fn unstable_step_is_rejected() {
    let medium = homogeneous(1.0, 1.0, 1.0 / 32.0, 1.0);
    let err = Solver64::with_dt(&medium, &SolverConfig::default(), 1.0 / 32.0).unwrap_err();
    assert!(matches!(err, WaveError::Cfl { .. }));
    let cfg = SolverConfig { courant: 1.5, ..SolverConfig::default() };
    assert!(Solver64::new(&medium, &cfg, 0.1).is_err());
    let ok = Solver64::new(&medium, &SolverConfig::default(), 0.1).unwrap();
    assert!(ok.courant() <= 0.7 + 1e-12);
    assert!(ok.steps_for(0.1).is_ok() && ok.steps_for(0.1 + 0.3 * ok.dt()).is_err());
}

#[test]
fn unit_mass_and_symmetry_of_interior_product() {
    let grid = Grid::new(33, 33, -0.5, 1.0 / 32.0, 1.0 / 32.0).unwrap();
    let n = grid.len();
    let medium = MediumField::new(grid.clone(), vec![1.0; n], 1.0, Provenance::default()).unwrap();
    let one = vec![1.0; n];
    assert!((inner_product_h(&medium, &one, &one, None).unwrap() - 1.0).abs() < 1e-14);
    let y: Vec<f64> = (0..n).map(|k| (k as f64 * 0.37).sin()).collect();
    let w: Vec<f64> = (0..n).map(|k| (k as f64 * 0.11).cos()).collect();
    assert_eq!(inner_product_h(&medium, &y, &w, None).unwrap(), inner_product_h(&medium, &w, &y, None).unwrap());
    assert!(inner_product_h(&medium, &y, &w[1..], None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn response_is_linear(
        f in prop::collection::vec(-1.0f64..1.0, 6 * 41),
        g in prop::collection::vec(-1.0f64..1.0, 6 * 41),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let medium = homogeneous(0.5, 0.5, 1.0 / 16.0, 1.0);
        let solver = Solver64::new(&medium, &SolverConfig::default(), 0.1).unwrap();
        let mk = |v: Vec<f64>| SampledDrive { first_column: 5, n_columns: 6, n_time: 41, values: v };
        let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let run = |d: &SampledDrive| {
            let spec = RunSpec { drive: Some(d), n_steps: 40, trace_columns: 0..17, ..RunSpec::default() };
            solver.run(&spec, &mut |_, _| {}).unwrap()
        };
        let (rf, rg, rc) = (run(&mk(f)), run(&mk(g)), run(&mk(combo)));
        let scale = rc.trace.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for k in 0..rc.trace.len() {
            prop_assert!((rc.trace[k] - a * rf.trace[k] - b * rg.trace[k]).abs() < 1e-10 * scale);
        }
    }
}
