//! Growth exponent of the discrete counting function.

use fsl_core::assembly::assemble;
use fsl_core::domain::Domain;
use fsl_core::eigen::eigenvalues;
use fsl_core::laws::weyl_fit_values;

fn exponent(domain: &Domain, h: f64, alpha: f64, count: usize) -> f64 {
    let values = eigenvalues(&assemble(&domain.rasterize(h).unwrap(), alpha).unwrap()).unwrap();
    weyl_fit_values(&values[..count]).unwrap()
}

#[test]
fn interval_counts_grow_like_one_over_alpha() {
    let d = Domain::interval(-1.0, 1.0).unwrap();
    for alpha in [0.5, 1.0, 1.5] {
        let e = exponent(&d, 2.0 / 512.0, alpha, 60);
        assert!((e - 1.0 / alpha).abs() <= 0.15, "alpha {alpha}: exponent {e}");
    }
}

#[test]
fn square_counts_grow_like_two_over_alpha() {
    let d = Domain::rect([0.0, 0.0], [1.0, 1.0]).unwrap();
    for alpha in [0.5, 1.0, 1.5] {
        let e = exponent(&d, 1.0 / 24.0, alpha, 120);
        assert!((e - 2.0 / alpha).abs() <= 0.3, "alpha {alpha}: exponent {e}");
    }
}
