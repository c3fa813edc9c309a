use num_complex::Complex64;
use proptest::prelude::*;

use gaudin_aba::bethe::{canonicalize, coverage, residual, same_root_set};
use gaudin_aba::kernel::{nu, nu_prime, omega, omega_dx};
use gaudin_aba::matrix::Matrix;
use gaudin_aba::scalar::{fmt_f64, parse_rational};
use gaudin_aba::spectral;
use gaudin_aba::{BoundaryParams, ChainConfig, Rational, Regime, Scalar};

type C = Complex64;

fn rational() -> impl Strategy<Value = Rational> {
    (-60i64..=60, 1i64..=40)
        .prop_filter("nonzero", |(n, _)| *n != 0)
        .prop_map(|(n, d)| Rational::ratio(n, d))
}

fn complex() -> impl Strategy<Value = C> {
    (0.3f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| C::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn omega_odd_under_joint_inversion(x in rational(), y in rational()) {
        if let (Ok(a), Ok(b)) = (omega(&x, &y), omega(&x.recip(), &y.recip())) {
            prop_assert_eq!(a, -b);
        }
    }

    #[test]
    fn omega_symmetric_part(x in rational(), y in rational()) {
        if let (Ok(a), Ok(b)) = (omega(&x, &y), omega(&y, &x)) {
            let xy = x.clone() * y.clone();
            let one = Rational::ratio(1, 1);
            prop_assert_eq!(a + b, Rational::ratio(2, 1) * (xy.clone() + one.clone()) / (xy - one));
        }
    }

    #[test]
    fn omega_derivative_matches_difference(x in complex(), y in complex()) {
        prop_assume!((x - y).norm() > 0.2 && (x * y - 1.0).norm() > 0.2);
        let h = 1e-5;
        let fd = (omega(&(x + h), &y).unwrap() - omega(&(x - h), &y).unwrap()) / (2.0 * h);
        let d = omega_dx(&x, &y).unwrap();
        prop_assert!((fd - d).norm() <= 1e-5 * (1.0 + d.norm()));
    }

    #[test]
    fn nu_derivative_matches_difference(z in complex()) {
        let p = BoundaryParams::new(Rational::ratio(3, 2), Rational::ratio(1, 3), Rational::ratio(-2, 5), Rational::ratio(7, 4))
            .unwrap()
            .map(C::from_rational);
        let h = 1e-5;
        let (Ok(a), Ok(b), Ok(d)) = (nu(&(z + h), &p), nu(&(z - h), &p), nu_prime(&z, &p)) else {
            return Ok(());
        };
        prop_assume!(d.norm() < 1e3);
        prop_assert!(((a - b) / (2.0 * h) - d).norm() <= 1e-4 * (1.0 + d.norm()));
    }

    #[test]
    fn even_equations_reduce_when_triangular(b in rational(), g in rational(), z0 in rational(), z1 in rational()) {
        let Ok(p) = BoundaryParams::new(Rational::ratio(3, 2), b.clone(), g, b) else { return Ok(()) };
        let c = ChainConfig::spin_half(vec![Rational::ratio(2, 1), Rational::ratio(-3, 1)]).unwrap();
        let z = [z0, z1];
        if let (Ok(e), Ok(t)) = (residual(&z, Regime::EvenModified, &p, &c), residual(&z, Regime::Triangular, &p, &c)) {
            prop_assert_eq!(e, t);
        }
    }

    #[test]
    fn rational_text_roundtrip(x in rational()) {
        prop_assert_eq!(parse_rational(&x.to_string()), Some(x));
    }

    #[test]
    fn float_text_roundtrip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn canonical_order_is_idempotent(mut z in prop::collection::vec(complex(), 1..5)) {
        let original = z.clone();
        canonicalize(&mut z);
        let once = z.clone();
        canonicalize(&mut z);
        prop_assert_eq!(&once, &z);
        prop_assert!(same_root_set(&original, &z, 1e-12));
    }

    #[test]
    fn triangular_matrix_spectrum_is_its_diagonal(diag in prop::collection::vec(complex(), 1..8), fill in complex()) {
        // strongly non-normal input would fail the trace-relative certificate
        let n = diag.len();
        let m = Matrix::from_fn(n, |i, j| if i == j { diag[i] } else if i > j { fill * 0.1 } else { C::new(0.0, 0.0) });
        let r = spectral::eigenvalues(&m, 1e-10).unwrap();
        let cov = coverage(&diag, &r.eigenvalues, 1e-8);
        prop_assert_eq!(cov.matched, n);
    }
}
