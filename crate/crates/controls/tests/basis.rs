use controls::{eta, spatial_trig, theta, theta_integral, BasisSpec, ControlBasis, ControlError, SpatialFamily, TentShape};
use nalgebra::{DMatrix, SymmetricEigen};

const S: f64 = 1.0 / 32.0;

fn default_basis(family: SpatialFamily) -> ControlBasis {
    let spec = BasisSpec { family, ..BasisSpec::default() };
    ControlBasis::new(&spec, 1.0, 1.0, 1.0 / 256.0).unwrap()
}

#[test]
fn cutoff_matches_logistic() {
    for g in [-3.0, -0.1, 0.0, 0.05, 1.0] {
        let direct = 1.0 / (1.0 + (g / S).exp());
        assert!((eta(g, S) - direct).abs() < 1e-15);
    }
}

#[test]
fn first_trig_function_at_centre() {
    let direct = (1.0 + (-1.0f64 / S).exp()).powi(-2);
    assert!((spatial_trig(0, 0.0, S) - direct).abs() < 1e-15);
}

#[test]
fn odd_trig_function_vanishes_at_cosine_zero() {
    assert!(spatial_trig(1, 1.0, S).abs() < 1e-15);
}

#[test]
fn trig_functions_decay_past_cutoff() {
    let edge = 1.0 + 20.0 * S;
    for l in 0..32 {
        for g in [edge, -edge, edge + 0.1, -edge - 0.3] {
            assert!(spatial_trig(l, g, S).abs() < 1e-8, "l = {l}, g = {g}");
        }
    }
}

#[test]
fn tent_peak_and_foot() {
    let step: f64 = 1.0 / 16.0;
    let d = step / 64.0;
    let ln2 = std::f64::consts::LN_2;
    let pre = 1.0 / (1.0 - (-step / d).exp());
    assert!((theta(step, step, d) - (1.0 - 2.0 * d * ln2 / step)).abs() < 1e-12);
    assert!((theta(0.0, step, d) - d * ln2 / step * pre).abs() < 1e-12);
    assert!((theta(2.0 * step, step, d) - theta(0.0, step, d)).abs() < 1e-15);
}

#[test]
fn tent_becomes_triangle_as_smoothing_vanishes() {
    let step: f64 = 0.25;
    let mut last = f64::INFINITY;
    for k in 1..8 {
        let d = step / 2f64.powi(k);
        let err = (theta(0.5 * step, step, d) - 0.5).abs();
        assert!(err < last);
        last = err;
    }
    assert!(last < 1e-12);
}

#[test]
fn tent_mass_closed_form_against_quadrature() {
    for (step, div) in [(1.0 / 16.0, 64.0), (0.1, 4.0), (0.3, 1.5)] {
        let d = step / div;
        let shape = TentShape { step, d };
        let (a, b) = (-60.0 * d, 2.0 * step + 60.0 * d);
        let n = 400_000;
        let h = (b - a) / n as f64;
        let trap: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * theta(a + i as f64 * h, step, d)
            })
            .sum::<f64>()
            * h;
        assert!((shape.mass() - trap).abs() < 1e-9 * step, "step {step}: {} vs {trap}", shape.mass());
        assert!((theta_integral(b, step, d) - shape.mass()).abs() < 1e-12 * step);
    }
}

#[test]
fn tent_mass_regression() {
    let shape = TentShape { step: 0.1, d: 0.025 };
    assert!((shape.mass() - 0.101_865_736_036_377_4).abs() < 1e-15);
    let fine = TentShape { step: 1.0 / 16.0, d: 1.0 / 1024.0 };
    assert!((fine.mass() - 0.0625).abs() < 1e-15);
}

#[test]
fn primitive_on_grid_matches_pointwise() {
    let shape = TentShape { step: 1.0 / 16.0, d: 1.0 / 1024.0 };
    let dt = 1.0 / 256.0;
    let grid = shape.primitive_on_grid(-0.02, dt, 60);
    for (n, v) in grid.iter().enumerate() {
        let t = -0.02 + n as f64 * dt;
        assert!((v - shape.primitive(t)).abs() < 1e-13, "n = {n}");
    }
    assert!((grid[59] - shape.mass()).abs() < 1e-13);
}

#[test]
fn offset_rounds_up_to_time_step() {
    let b = default_basis(SpatialFamily::Trig);
    let raw = 2.0 * b.d * 1e6f64.ln();
    assert_eq!(b.delta_samples(), 7);
    assert!(b.delta >= raw && b.delta - raw < b.dt);
    assert_eq!(b.step_samples(), 16);
}

#[test]
fn basis_controls_vanish_at_start_and_at_segment_ends() {
    for family in [SpatialFamily::Trig, SpatialFamily::Tent] {
        let b = default_basis(family);
        let edge = b.support_half_width();
        for k in 0..b.len() {
            assert!(b.eval(k, 0.1, 0.0).abs() < 1e-6);
            let (l, _) = b.split(k);
            assert!(b.spatial(l, edge).abs() < 1e-8 && b.spatial(l, -edge).abs() < 1e-8, "{family:?} l = {l}");
        }
    }
}

#[test]
fn misaligned_time_step_is_rejected() {
    let err = ControlBasis::new(&BasisSpec::default(), 1.0, 1.0, 1.0 / 100.0).unwrap_err();
    assert!(matches!(err, ControlError::Misaligned { .. }));
    let bad = BasisSpec { n_t: 0, ..BasisSpec::default() };
    assert!(ControlBasis::new(&bad, 1.0, 1.0, 1.0 / 256.0).is_err());
}

#[test]
fn tents_form_partition_of_unity_inside() {
    let b = default_basis(SpatialFamily::Tent);
    let hs = 2.0 / b.n_gamma as f64;
    for i in 0..=200 {
        let g = -1.0 + hs + (2.0 - 2.0 * hs) * i as f64 / 200.0;
        let sum: f64 = (0..b.n_gamma).map(|l| b.spatial(l, g)).sum();
        assert!((sum - 1.0).abs() < 1e-12, "g = {g}: {sum}");
    }
}

#[test]
fn delayed_family_is_tail_block() {
    let b = default_basis(SpatialFamily::Trig);
    let fam = b.delayed_family(3);
    assert_eq!(fam.len(), 3 * 16);
    assert_eq!(fam[0], 13 * 16);
    assert_eq!(*fam.last().unwrap(), b.len() - 1);
    assert_eq!(b.delayed_family(16).len(), b.len());
}

fn min_gram_eigenvalue(b: &ControlBasis) -> f64 {
    let dg = 1.0 / 64.0;
    let ng = (2.0 * b.support_half_width() / dg).ceil() as usize + 1;
    let g0 = -0.5 * (ng - 1) as f64 * dg;
    let gammas: Vec<f64> = (0..ng).map(|i| g0 + i as f64 * dg).collect();
    let nt = (b.horizon / b.dt).round() as usize + 1;
    let samples: Vec<_> = (0..b.len()).map(|k| b.sample(k, &gammas, dg, nt)).collect();
    let n = samples.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = samples[i].inner(&samples[j]).unwrap();
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    SymmetricEigen::new(g).eigenvalues.min()
}

#[test]
fn basis_gram_is_well_posed_at_grid_scale() {
    // recorded minima: trig 1.7932e-3, tent 1.0859e-4
    let trig = min_gram_eigenvalue(&default_basis(SpatialFamily::Trig));
    let tent = min_gram_eigenvalue(&default_basis(SpatialFamily::Tent));
    println!("smallest Gram eigenvalue: trig {trig:.4e}, tent {tent:.4e}");
    assert!((trig - 1.7932e-3).abs() < 1e-6 && (tent - 1.0859e-4).abs() < 1e-7);
}
