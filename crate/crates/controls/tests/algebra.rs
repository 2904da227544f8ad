use controls::{BasisSpec, ControlBasis, ControlError, ControlSamples, SpatialFamily};
use proptest::prelude::*;

fn grid(ng: usize) -> (Vec<f64>, f64) {
    let dg = 2.0 / (ng - 1) as f64;
    ((0..ng).map(|i| -1.0 + i as f64 * dg).collect(), dg)
}

fn from_values(ng: usize, nt: usize, dg: f64, dt: f64, values: Vec<f64>) -> ControlSamples {
    ControlSamples { n_gamma: ng, n_time: nt, dgamma: dg, dt, values }
}

fn brute_inner(a: &ControlSamples, b: &ControlSamples) -> f64 {
    let mut acc = 0.0;
    for g in 0..a.n_gamma {
        let wg = if g == 0 || g + 1 == a.n_gamma { 0.5 } else { 1.0 } * a.dgamma;
        for n in 0..a.n_time {
            let wt = if n == 0 || n + 1 == a.n_time { 0.5 } else { 1.0 } * a.dt;
            acc += wg * wt * a.get(g, n) * b.get(g, n);
        }
    }
    acc
}

proptest! {
    #[test]
    fn fold_is_adjoint_of_odd_extension(
        f in prop::collection::vec(-1.0f64..1.0, 5 * 17),
        g in prop::collection::vec(-1.0f64..1.0, 5 * 33),
    ) {
        let f = from_values(5, 17, 0.25, 0.0625, f);
        let g = from_values(5, 33, 0.25, 0.0625, g);
        let lhs = brute_inner(&f.odd_extend(), &g);
        let rhs = brute_inner(&f, &g.fold_adjoint().unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn fold_of_extension_doubles(mut f in prop::collection::vec(-1.0f64..1.0, 4 * 21)) {
        for g in 0..4 {
            f[g * 21 + 20] = 0.0;
        }
        let f = from_values(4, 21, 0.5, 0.05, f);
        let back = f.fold_adjoint_of_extension();
        for (a, b) in back.values.iter().zip(&f.values) {
            prop_assert_eq!(*a, 2.0 * b);
        }
    }

    #[test]
    fn extension_is_odd_and_mean_free(f in prop::collection::vec(-1.0f64..1.0, 3 * 9)) {
        let f = from_values(3, 9, 0.5, 0.125, f);
        let s = f.odd_extend();
        prop_assert_eq!(s.n_time, 17);
        for g in 0..3 {
            for n in 0..8 {
                prop_assert_eq!(s.get(g, 16 - n), -f.get(g, n));
            }
        }
        let js = s.time_integrate();
        for g in 0..3 {
            prop_assert!(js.get(g, 16).abs() < 1e-14);
        }
    }

    #[test]
    fn delay_preserves_norm(shift in 0usize..10, f in prop::collection::vec(-1.0f64..1.0, 2 * 10)) {
        let mut v = vec![0.0; 2 * 20];
        for g in 0..2 {
            v[g * 20..g * 20 + 10].copy_from_slice(&f[g * 10..g * 10 + 10]);
        }
        let f = from_values(2, 20, 1.0, 0.1, v);
        let d = f.delayed_samples(shift).unwrap();
        let sum = |c: &ControlSamples| c.values.iter().map(|x| x * x).sum::<f64>();
        prop_assert!((sum(&d) - sum(&f)).abs() < 1e-12);
        prop_assert!((d.norm() - f.norm()).abs() < 0.6 * f.norm() + 1e-12);
    }
}

trait FoldBack {
    fn fold_adjoint_of_extension(&self) -> ControlSamples;
}

impl FoldBack for ControlSamples {
    fn fold_adjoint_of_extension(&self) -> ControlSamples {
        self.odd_extend().fold_adjoint().unwrap()
    }
}

#[test]
fn integral_of_constant_is_time() {
    let (gs, dg) = grid(3);
    let one = ControlSamples::from_fn(&gs, dg, 11, 0.1, |_, _| 1.0);
    let j = one.time_integrate();
    for n in 0..11 {
        assert!((j.get(1, n) - 0.1 * n as f64).abs() < 1e-15);
    }
}

#[test]
fn fold_of_even_function_vanishes() {
    let (gs, dg) = grid(4);
    let g = ControlSamples::from_fn(&gs, dg, 21, 0.1, |x, t| x * (t - 1.0).powi(2));
    assert!(g.fold_adjoint().unwrap().values.iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn fold_leaves_early_functions_unchanged() {
    let (gs, dg) = grid(4);
    let g = ControlSamples::from_fn(&gs, dg, 21, 0.1, |x, t| if t < 0.95 { x + t } else { 0.0 });
    let f = g.fold_adjoint().unwrap();
    for gi in 0..4 {
        assert_eq!(f.row(gi), &g.row(gi)[..11]);
    }
}

#[test]
fn fold_needs_odd_sample_count() {
    let g = ControlSamples::zeros(2, 10, 1.0, 0.1);
    assert!(matches!(g.fold_adjoint(), Err(ControlError::Shape(_))));
}

#[test]
fn zero_delay_is_identity() {
    let (gs, dg) = grid(5);
    let f = ControlSamples::from_fn(&gs, dg, 17, 1.0 / 16.0, |x, t| x * t * (1.0 - t));
    assert_eq!(f.delayed(1.0).unwrap(), f);
}

#[test]
fn delay_moves_first_tent_to_half_horizon() {
    let spec = BasisSpec { family: SpatialFamily::Trig, ..BasisSpec::default() };
    let dt = 1.0 / 256.0;
    let b = ControlBasis::new(&spec, 1.0, 1.0, dt).unwrap();
    let (gs, dg) = grid(9);
    let f = b.sample(0, &gs, dg, 257);
    let d = f.delayed(0.5).unwrap();
    let peak = |c: &ControlSamples| {
        let r = c.row(4);
        (0..r.len()).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap()
    };
    let off = b.delta_samples();
    assert_eq!(peak(&f), off + 16);
    assert_eq!(peak(&d), 128 + off + 16);
    assert!(d.row(4)[..128 + off - 3].iter().all(|v| v.abs() < 1e-6));
    assert!(d.row(4)[128 + off + 35..].iter().all(|v| v.abs() < 1e-6));
    assert!((d.norm() - f.norm()).abs() < 1e-12 * f.norm());
}

#[test]
fn delay_past_horizon_is_rejected() {
    let b = ControlBasis::new(&BasisSpec::default(), 1.0, 1.0, 1.0 / 256.0).unwrap();
    let (gs, dg) = grid(9);
    let late = b.sample(b.index(0, 10), &gs, dg, 257);
    assert!(matches!(late.delayed(0.5), Err(ControlError::ShiftOverflow { .. })));
    assert!(matches!(late.delayed(0.3), Err(ControlError::Misaligned { .. })));
    assert!(late.delayed(0.0).is_err());
}
