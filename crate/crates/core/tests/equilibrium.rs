mod common;

use common::oracle;
use kuramoto_mfg::equilibrium::{estimate_threshold, eval_map, find_fixed_points, iterate_map, refine_root, sweep_fmap, FixedPointKind};
use kuramoto_mfg::{Grid1D, MfgError};

#[test]
fn sweep_layout() {
    let g = Grid1D::physical(256).unwrap();
    let t = sweep_fmap(100.0, 21, g).unwrap();
    assert_eq!(t.a_samples.len(), t.f_values.len());
    assert!(t.a_samples.windows(2).all(|w| w[0] < w[1]) || {
        let mut s = t.a_samples.clone();
        s.sort_by(f64::total_cmp);
        s.windows(2).all(|w| w[0] < w[1])
    });
    assert!(t.a_samples.iter().any(|&a| (a - 0.995).abs() < 1e-14));
    for (a, f) in t.a_samples.iter().zip(&t.f_values) {
        if *a > 1.0 {
            let i = t.a_samples.iter().position(|b| (b - (2.0 - a)).abs() < 1e-14).unwrap();
            assert!((f - (2.0 - t.f_values[i])).abs() < 1e-14);
        }
    }
    assert!(matches!(sweep_fmap(100.0, 5, g), Err(MfgError::Precondition(_))));
}

#[test]
fn self_organizing_root_matches_oracle() {
    let g = Grid1D::physical(2048).unwrap();
    let mut bounds = Vec::new();
    for k in [50.0, 100.0, 400.0] {
        let rep = find_fixed_points(&sweep_fmap(k, 41, g).unwrap(), g).unwrap();
        assert!(rep.has_three_point_structure());
        let a = rep.self_organizing().unwrap();
        let want = oracle::self_organizing_root(k);
        assert!((a - want).abs() < 2e-6, "κ={k}: {a} vs {want}");
        let kinds: Vec<_> = rep.fixed_points.iter().map(|p| p.kind).collect();
        assert_eq!(kinds, [FixedPointKind::SelfOrganizing, FixedPointKind::Incoherent, FixedPointKind::SelfOrganizing]);
        assert!((rep.fixed_points[2].a - (2.0 - a)).abs() < 1e-14);
        bounds.push(rep.contraction_bound);
        assert!(rep.near_one_slope > 1.0);
    }
    // The slope away from 1 shrinks with κ.
    assert!(bounds[2] < bounds[1] && bounds[1] < bounds[0], "{bounds:?}");
}

#[test]
fn frozen_roots() {
    let g = Grid1D::physical(2048).unwrap();
    let (a, r) = refine_root(0.0, 0.5, 100.0, g).unwrap();
    assert!((a - 0.0513441).abs() < 2e-6);
    assert!(r.abs() < 1e-10);
}

#[test]
fn weak_coupling_has_only_incoherence() {
    let g = Grid1D::physical(256).unwrap();
    let rep = find_fixed_points(&sweep_fmap(1.0, 21, g).unwrap(), g).unwrap();
    assert_eq!(rep.count(), 1);
    assert_eq!(rep.fixed_points[0].kind, FixedPointKind::Incoherent);
    assert!(rep.self_organizing().is_none());
}

#[test]
fn threshold_scan() {
    let g = Grid1D::physical(256).unwrap();
    let est = estimate_threshold(&[1.0, 4.0, 16.0, 64.0], g, 21).unwrap();
    assert!(est.kappa0 <= 16.0 && est.kappa0 > 1.0, "{est:?}");
    assert_eq!(est.per_kappa.len(), 4);
    assert!(estimate_threshold(&[4.0, 1.0], g, 21).is_err());
}

#[test]
fn iteration_contracts_to_the_root() {
    let g = Grid1D::physical(512).unwrap();
    let orbit = iterate_map(0.5, 100.0, g, 12).unwrap();
    let root = refine_root(0.0, 0.5, 100.0, g).unwrap().0;
    assert!((orbit[12] - root).abs() < 1e-12);
    let (f, fp) = eval_map(root, 100.0, g).unwrap();
    assert!((f - root).abs() < 1e-10 && fp < 1.0);
}
