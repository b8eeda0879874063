//! Structural invariants of domains, operators and spectra.

use fsl_core::assembly::{assemble, symbol_error, GridOperator};
use fsl_core::domain::{Domain, Shape};
use fsl_core::eigen::{eigendecompose, eigenvalues, rayleigh_quotient, richardson, symmetric_eigen};
use fsl_core::laws::subordination_spectrum;
use proptest::prelude::*;

fn primitive() -> impl Strategy<Value = Domain> {
    prop_oneof![
        (-2.0..2.0f64, 0.5..3.0f64).prop_map(|(a, w)| Domain::interval(a, a + w).unwrap()),
        (-2.0..2.0f64, -2.0..2.0f64, 0.5..2.0f64, 0.5..2.0f64).prop_map(|(x, y, w, v)| Domain::rect([x, y], [x + w, y + v]).unwrap()),
        (-2.0..2.0f64, -2.0..2.0f64, 0.3..1.5f64).prop_map(|(x, y, r)| Domain::disk([x, y], r).unwrap()),
    ]
}

fn small_operator() -> impl Strategy<Value = GridOperator> {
    (primitive(), 0.1..1.9f64, 6usize..14).prop_filter_map("grid too small", |(d, alpha, per_axis)| {
        let h = d.inner_radius() * 2.0 / per_axis as f64;
        let g = d.rasterize(h).ok()?;
        (g.len() >= 3 && g.len() <= 200).then(|| assemble(&g, alpha).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_keeps_a_child_of_every_cell(d in primitive(), per_axis in 4usize..20) {
        let h = d.inner_radius() * 2.0 / per_axis as f64;
        let coarse = d.rasterize(h).unwrap();
        let fine = d.rasterize(0.5 * h).unwrap();
        let dim = d.dim();
        for i in 0..coarse.len() {
            let c = coarse.center(i);
            let mut found = 0;
            for corner in 0..(1 << dim) {
                let child: Vec<f64> = (0..dim).map(|a| c[a] + if corner >> a & 1 == 1 { 0.25 * h } else { -0.25 * h }).collect();
                if fine.ordinal_of_center(&child).is_some() {
                    found += 1;
                }
            }
            prop_assert!(found >= 1, "cell at {:?} lost on refinement", c);
        }
    }

    #[test]
    fn schwarz_ball_keeps_measure(d in primitive()) {
        let b = d.schwarz_ball();
        prop_assert!((b.measure() - d.measure()).abs() <= 1e-12 * d.measure());
    }

    #[test]
    fn boundary_distance_is_bounded_by_inner_radius(d in primitive(), u in prop::collection::vec(0.0..1.0f64, 2)) {
        let (lo, hi) = d.bounding_box();
        let x: Vec<f64> = (0..d.dim()).map(|a| lo[a] + u[a] * (hi[a] - lo[a])).collect();
        if d.contains(&x) {
            prop_assert!(d.boundary_distance(&x).unwrap() <= d.inner_radius() * (1.0 + 1e-12));
        }
        let c = d.incenter();
        let r = d.boundary_distance(&c).unwrap();
        if !matches!(d.shape(), Shape::Box { .. }) {
            prop_assert!((r - d.inner_radius()).abs() <= 1e-12 * r);
        }
    }

    #[test]
    fn operators_are_symmetric_m_matrices(op in small_operator()) {
        let n = op.n();
        let big = op.max_abs();
        prop_assert!(op.asymmetry() <= 1e-12 * big);
        for i in 0..n {
            prop_assert!(op.get(i, i) > 0.0);
            for j in 0..n {
                if i != j {
                    prop_assert!(op.get(i, j) <= 0.0);
                }
            }
        }
        let ones = op.apply(&vec![1.0; n]).unwrap();
        let kmax = op.killing.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        for (a, b) in ones.iter().zip(&op.killing) {
            prop_assert!((a - b).abs() <= 1e-10 * kmax);
        }
    }

    #[test]
    fn scaling_by_two_is_exact(d in primitive(), alpha in 0.1..1.9f64, per_axis in 4usize..10) {
        let h = d.inner_radius() * 2.0 / per_axis as f64;
        let a = assemble(&d.rasterize(h).unwrap(), alpha).unwrap();
        let b = assemble(&d.scaled(2.0).unwrap().rasterize(2.0 * h).unwrap(), alpha).unwrap();
        prop_assert_eq!(a.n(), b.n());
        let f = 2f64.powf(-alpha);
        for (x, y) in a.entries().iter().zip(b.entries()) {
            prop_assert!((y - f * x).abs() <= 1e-12 * x.abs().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn eigenpairs_are_orthonormal_with_small_residuals(op in small_operator()) {
        let k = op.n().min(10);
        let s = eigendecompose(&op, k).unwrap();
        let fro = op.frobenius_norm();
        let dim = op.grid.dim() as i32;
        for i in 0..k {
            let v = &s.eigenvectors[i];
            let hv = op.apply(v).unwrap();
            let res: f64 = hv.iter().zip(v).map(|(a, b)| (a - s.eigenvalues[i] * b).powi(2)).sum::<f64>().sqrt();
            // vectors carry the grid normalization h^{-d/2}; compare at unit Euclidean norm
            prop_assert!(res * s.h.powf(0.5 * dim as f64) <= 1e-9 * fro);
            for j in 0..k {
                let ip = s.inner(v, &s.eigenvectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - want).abs() <= 1e-8);
            }
        }
        prop_assert!(s.eigenvalues[0] > 0.0);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn ground_state_is_simple_and_sign_definite(op in small_operator()) {
        let s = eigendecompose(&op, 2).unwrap();
        prop_assert!(s.eigenvalues[0] < s.eigenvalues[1]);
        let phi = &s.eigenvectors[0];
        let big = phi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(phi.iter().all(|&x| x > -1e-12 * big));
    }

    #[test]
    fn deleting_a_cell_interlaces(alpha in 0.1..1.9f64, drop in 0usize..20) {
        let g = Domain::interval(0.0, 1.0).unwrap().rasterize(0.05).unwrap();
        prop_assert_eq!(g.len(), 20);
        let op = assemble(&g, alpha).unwrap();
        let full = eigenvalues(&op).unwrap();
        let keep: Vec<usize> = (0..20).filter(|&i| i != drop).collect();
        let sub = op.principal_submatrix(&keep);
        let (part, _) = symmetric_eigen(&sub, 19, false).unwrap();
        for k in 0..19 {
            prop_assert!(part[k] >= full[k] * (1.0 - 1e-12));
            prop_assert!(part[k] <= full[k + 1] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rayleigh_quotient_bounds(op in small_operator(), seed in prop::collection::vec(-1.0..1.0f64, 200)) {
        let n = op.n();
        let s = eigendecompose(&op, 2).unwrap();
        let l1 = s.eigenvalues[0];
        let u: Vec<f64> = seed[..n].to_vec();
        if u.iter().any(|&x| x != 0.0) {
            prop_assert!(rayleigh_quotient(&op, &u).unwrap() >= l1 - 1e-12 * l1.abs().max(1.0));
        }
        let q1 = rayleigh_quotient(&op, &s.eigenvectors[0]).unwrap();
        prop_assert!((q1 - l1).abs() <= 1e-9 * l1);
        let mix: Vec<f64> = s.eigenvectors[0].iter().zip(&s.eigenvectors[1]).map(|(a, b)| a + b).collect();
        let q = rayleigh_quotient(&op, &mix).unwrap();
        let want = 0.5 * (s.eigenvalues[0] + s.eigenvalues[1]);
        prop_assert!((q - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn richardson_recovers_geometric_sequences(limit in -5.0..5.0f64, c in 0.1..3.0f64, order in 0.3..2.9f64, h0 in 0.01..1.0f64) {
        let pts: Vec<(f64, f64)> = (0..4).map(|j| {
            let h = h0 / 2f64.powi(j);
            (h, limit + c * h.powf(order))
        }).collect();
        let e = richardson(&pts).unwrap();
        prop_assert!(e.reliable);
        prop_assert!((e.observed_order - order).abs() <= 1e-6);
        prop_assert!((e.value - limit).abs() <= 1e-8 * (1.0 + c));
    }

    #[test]
    fn subordination_preserves_order(mut v in prop::collection::vec(0.01..100.0f64, 1..20), alpha in 0.05..1.0f64, frac in 0.05..1.0f64) {
        v.sort_by(f64::total_cmp);
        let beta = (alpha / frac).min(2.0).max(alpha);
        let w = subordination_spectrum(&v, alpha, beta).unwrap();
        prop_assert!(w.windows(2).all(|p| p[0] <= p[1]));
        prop_assert_eq!(subordination_spectrum(&v, beta, beta).unwrap(), v);
    }
}

#[test]
fn symbol_error_shrinks_under_refinement() {
    for alpha in [0.5, 1.0, 1.5] {
        for xi in [1.0, 2.0] {
            let errs: Vec<f64> = (4..=9).map(|k| symbol_error(alpha, 2f64.powi(-k), xi, 64.0).unwrap()).collect();
            for w in errs.windows(2) {
                assert!(w[1] <= 1.1 * w[0], "alpha {alpha}, xi {xi}: {errs:?}");
            }
        }
    }
}
