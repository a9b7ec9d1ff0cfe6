use proptest::prelude::*;

use hpicp_core::experiment::{make_noisy_data, phantom_1d, ExperimentSpec};
use hpicp_core::forward::forward;
use hpicp_core::penalty::theta_value;
use hpicp_core::{
    bregman_distance, conjugate_grad, duality_map, lr_norm, pairing, ForwardModel, GridFunction, Mesh, PenaltyKind,
    PenaltySpec,
};

const N: usize = 24;

fn mesh() -> Mesh {
    Mesh::interval(N - 1).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, N)
}

fn kind() -> impl Strategy<Value = PenaltyKind> {
    prop_oneof![Just(PenaltyKind::L2), Just(PenaltyKind::L2L1), Just(PenaltyKind::L2TV)]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn duality_map_norm_identities(v in values(), r in 1.05..4.0f64) {
        let m = mesh();
        let v = GridFunction::new(&m, v).unwrap();
        let j = duality_map(&v, r).unwrap();
        let norm = lr_norm(&v, r, &m).unwrap();
        let r_star = r / (r - 1.0);
        prop_assert!(close(pairing(&j, &v, &m).unwrap(), norm.powf(r), 1e-12));
        prop_assert!(close(lr_norm(&j, r_star, &m).unwrap(), norm.powf(r - 1.0), 1e-12));
    }

    #[test]
    fn pairing_is_bilinear(a in values(), b in values(), c in values(), s in -5.0..5.0f64) {
        let m = mesh();
        let (a, b, c) = (GridFunction::new(&m, a).unwrap(), GridFunction::new(&m, b).unwrap(), GridFunction::new(&m, c).unwrap());
        let lhs = pairing(&a.lin_comb(s, &b, 1.0).unwrap(), &c, &m).unwrap();
        let rhs = s * pairing(&a, &c, &m).unwrap() + pairing(&b, &c, &m).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
        prop_assert!(close(pairing(&a, &b, &m).unwrap(), pairing(&b, &a, &m).unwrap(), 1e-15));
    }

    /// `x = grad Theta*(xi)` minimizes `Theta(z) - <xi, z>`.
    #[test]
    fn conjugate_map_minimizes(k in kind(), beta in 0.1..10.0f64, xi in values(), h in values(), eps in 1e-3..1.0f64) {
        let m = mesh();
        let spec = PenaltySpec::new(k, beta).unwrap();
        let xi = GridFunction::new(&m, xi).unwrap();
        let x = conjugate_grad(&spec, &xi, &m).unwrap();
        let z = x.lin_comb(1.0, &GridFunction::new(&m, h).unwrap(), eps).unwrap();
        let obj = |v: &GridFunction| theta_value(&spec, v, &m).unwrap() - pairing(&xi, v, &m).unwrap();
        prop_assert!(obj(&z) >= obj(&x) - 1e-10 * (1.0 + obj(&x).abs()));
    }

    /// `D_xi Theta(z, x) >= c0 ||z - x||^2` with `c0 = 1 / (2 beta)`.
    #[test]
    fn bregman_dominates_quadratic(k in kind(), beta in 0.1..10.0f64, xi in values(), z in values()) {
        let m = mesh();
        let spec = PenaltySpec::new(k, beta).unwrap();
        let xi = GridFunction::new(&m, xi).unwrap();
        let x = conjugate_grad(&spec, &xi, &m).unwrap();
        let z = GridFunction::new(&m, z).unwrap();
        let d = bregman_distance(&spec, &z, &x, &xi, &m).unwrap();
        let q = spec.convexity_constant() * lr_norm(&z.sub(&x).unwrap(), 2.0, &m).unwrap().powi(2);
        prop_assert!(d >= q - 1e-10 * (1.0 + q), "D = {d}, c0 |z-x|^2 = {q}");
    }

    #[test]
    fn conjugate_map_is_beta_lipschitz(k in kind(), beta in 0.1..10.0f64, a in values(), b in values()) {
        let m = mesh();
        let spec = PenaltySpec::new(k, beta).unwrap();
        let (a, b) = (GridFunction::new(&m, a).unwrap(), GridFunction::new(&m, b).unwrap());
        let dx = lr_norm(&conjugate_grad(&spec, &a, &m).unwrap().sub(&conjugate_grad(&spec, &b, &m).unwrap()).unwrap(), 2.0, &m).unwrap();
        let dxi = lr_norm(&a.sub(&b).unwrap(), 2.0, &m).unwrap();
        prop_assert!(dx <= beta * dxi * (1.0 + 1e-12) + 1e-14);
    }
}

/// delta_eff against a weighted sum with trapezoidal weights built from the
/// node coordinates.
#[test]
fn delta_eff_matches_trapezoid_oracle() {
    let spec = ExperimentSpec::default_1d();
    let m = Mesh::interval(spec.elements).unwrap();
    let model = ForwardModel::new(m.clone(), GridFunction::constant(&m, 1.0)).unwrap();
    let u = forward(&model, &phantom_1d(&m).unwrap()).unwrap();
    let (ud, delta) = make_noisy_data(&u, &spec, &m).unwrap();

    let xs: Vec<f64> = m.coords().iter().map(|p| p[0]).collect();
    let n = xs.len();
    let mut sum = 0.0;
    for i in 0..n {
        let lo = xs[i.saturating_sub(1)];
        let hi = xs[(i + 1).min(n - 1)];
        sum += (hi - lo) / 2.0 * (ud.values()[i] - u.values()[i]).powi(2);
    }
    assert!((sum.sqrt() - delta).abs() <= 1e-14 * delta);

    // expected size: noise_level * max|u| * |Omega|^(1/2), up to sampling spread
    let peak = u.values().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let scale = spec.noise_level * peak * 2.0_f64.sqrt();
    assert!((delta / scale - 1.0).abs() < 0.2, "delta_eff {delta} vs scale {scale}");

    let mut exact = spec.clone();
    exact.noise_level = 0.0;
    let (ud0, d0) = make_noisy_data(&u, &exact, &m).unwrap();
    assert_eq!(ud0.values(), u.values());
    assert_eq!(d0, 0.0);
}

/// Outliers land on exactly `ceil(fraction * N)` distinct nodes.
#[test]
fn outlier_count_and_amplitude() {
    let mut spec = ExperimentSpec::default_1d();
    spec.noise_model = hpicp_core::experiment::NoiseModel::Outliers;
    spec.noise_level = 0.0;
    let m = Mesh::interval(spec.elements).unwrap();
    let u = GridFunction::from_fn(&m, |p| 0.5 + 0.1 * p[0]);
    let (ud, _) = make_noisy_data(&u, &spec, &m).unwrap();
    let peak = 0.6;
    let hits: Vec<f64> = ud
        .values()
        .iter()
        .zip(u.values())
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    assert_eq!(
        hits.len(),
        (spec.outlier_fraction * m.node_count() as f64).ceil() as usize
    );
    assert!(hits.iter().all(|d| (d.abs() - 10.0 * peak).abs() < 1e-12));
}
