mod common;

use common::*;
use omx_core::esn::{esn_fit, esn_init, esn_predict, EsnConfig, EsnModel};
use omx_core::eval::correlation_score_columns;
use omx_core::matrix::{spectral_radius_estimate, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use omx_core::{DenseMatrix, RngStream};

fn scalar(w: f64) -> EsnModel {
    let cfg = EsnConfig {
        reservoir_size: 1,
        state_iters: 200,
        state_tol: 1e-14,
        ..EsnConfig::default()
    };
    EsnModel::from_weights(cfg, DenseMatrix::new(1, 1, vec![1.0]).unwrap(), DenseMatrix::new(1, 1, vec![w]).unwrap(), None)
        .unwrap()
}

/// Root of `x - tanh(1 + w x)` by bisection on [0, 1].
fn bisect_fixed_point(w: f64) -> f64 {
    let f = |x: f64| x - (1.0 + w * x).tanh();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn scalar_fixed_point_matches_bisection() {
    for w in [0.0, 0.2, 0.4, 0.9] {
        let x = scalar(w).state(&[1.0]).unwrap()[0];
        assert!((x - bisect_fixed_point(w)).abs() < 1e-12, "w={w}: {x}");
    }
}

#[test]
fn scalar_iteration_contracts() {
    let m = scalar(0.4);
    let star = bisect_fixed_point(0.4);
    let drive = m.drive(&[1.0]).unwrap();
    let mut x = vec![-0.9];
    for _ in 0..12 {
        let next = m.step(&drive, &x);
        let ratio = (next[0] - star).abs() / (x[0] - star).abs();
        assert!(ratio < 1.0, "ratio {ratio}");
        x = next;
    }
}

fn reservoir(n: usize, input: usize, seed: u64) -> EsnModel {
    esn_init(EsnConfig { reservoir_size: n, seed, ..EsnConfig::default() }, input).unwrap()
}

#[test]
fn init_hits_target_spectral_radius() {
    for (n, seed) in [(50, 1), (200, 2), (512, 3)] {
        let m = reservoir(n, 4, seed);
        let rho = spectral_radius_estimate(m.reservoir(), DEFAULT_MAX_ITERS, DEFAULT_TOL).unwrap();
        assert!((rho - 0.4).abs() <= 0.02 * 0.4, "n={n}: {rho}");
        let oracle = to_na(m.reservoir()).complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((oracle - 0.4).abs() <= 0.02 * 0.4, "n={n}: eigen {oracle}");
    }
}

#[test]
fn init_respects_scales_and_density() {
    let m = esn_init(
        EsnConfig { reservoir_size: 300, input_scale: 0.25, reservoir_density: 0.05, ..EsnConfig::default() },
        6,
    )
    .unwrap();
    assert!(m.input_weights().data().iter().all(|v| v.abs() <= 0.25));
    assert_eq!(m.input_weights().shape(), (300, 6));
    let nz = m.reservoir().data().iter().filter(|v| **v != 0.0).count() as f64 / (300.0 * 300.0);
    assert!((nz - 0.05).abs() < 0.01, "density {nz}");
}

#[test]
fn init_deterministic_under_seed() {
    assert_eq!(reservoir(40, 3, 9), reservoir(40, 3, 9));
    assert_ne!(reservoir(40, 3, 9).reservoir(), reservoir(40, 3, 10).reservoir());
}

#[test]
fn state_independent_of_initialization() {
    let m = reservoir(100, 5, 4);
    let tol = m.config().state_tol;
    let mut rng = RngStream::new(77);
    for _ in 0..100 {
        let u: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
        let x0: Vec<f64> = (0..100).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let a = m.state(&u).unwrap();
        let b = m.state_from(&u, &x0).unwrap();
        let d = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(d <= 10.0 * tol, "{d}");
    }
}

#[test]
fn reservoir_map_contracts_at_default_radius() {
    let m = reservoir(120, 3, 6);
    let mut rng = RngStream::new(3);
    let u: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
    let drive = m.drive(&u).unwrap();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..20 {
        let a: Vec<f64> = (0..120).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let b: Vec<f64> = (0..120).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let (mut a, mut b) = (a, b);
        let d0 = norm(&a.iter().zip(&b).map(|(p, q)| p - q).collect::<Vec<_>>());
        for _ in 0..25 {
            a = m.step(&drive, &a);
            b = m.step(&drive, &b);
        }
        let d1 = norm(&a.iter().zip(&b).map(|(p, q)| p - q).collect::<Vec<_>>());
        assert!((d1 / d0).powf(1.0 / 25.0) < 1.0, "{d0} -> {d1}");
    }
}

#[test]
fn states_equivariant_under_row_permutation_and_duplication() {
    let m = reservoir(60, 4, 12);
    let mut rng = RngStream::new(5);
    let x = gaussian(10, 4, &mut rng);
    let order = [3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 0];
    let s = m.states(&x).unwrap();
    let sp = m.states(&x.select_rows(&order)).unwrap();
    assert!(bitwise_eq(&sp, &s.select_rows(&order)));
}

#[test]
fn learns_linear_task() {
    let mut rng = RngStream::new(21);
    let b = gaussian(6, 4, &mut rng).scale(0.4);
    let x = gaussian(600, 6, &mut rng).scale(0.5);
    let y = x.matmul(&b).unwrap();
    let (xt, xv) = (x.select_rows(&(0..400).collect::<Vec<_>>()), x.select_rows(&(400..600).collect::<Vec<_>>()));
    let (yt, yv) = (y.select_rows(&(0..400).collect::<Vec<_>>()), y.select_rows(&(400..600).collect::<Vec<_>>()));
    let m = esn_fit(reservoir(200, 6, 2), &xt, &yt).unwrap();
    let p = esn_predict(&m, &xv).unwrap();
    let score = correlation_score_columns(&yv, &p).unwrap();
    assert!(score >= 0.9, "{score}");
}

#[test]
fn readout_shape_and_errors() {
    let mut rng = RngStream::new(1);
    let x = gaussian(20, 3, &mut rng);
    let y = gaussian(20, 2, &mut rng);
    let m = reservoir(30, 3, 0);
    assert!(esn_predict(&m, &x).is_err());
    let fitted = esn_fit(m, &x, &y).unwrap();
    assert_eq!(fitted.readout().unwrap().shape(), (31, 2));
    assert!(esn_predict(&fitted, &gaussian(2, 4, &mut rng)).is_err());
}
