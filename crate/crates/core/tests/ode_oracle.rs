mod common;

use num_complex::Complex64;
use tdheston::{cf_coeffs_to, period_coeffs, PeriodParams, TermStructure};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn max_diff(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> f64 {
    [(a.0 - b.0), (a.1 - b.1)]
        .iter()
        .flat_map(|z| [z.re.abs(), z.im.abs()])
        .fold(0.0, f64::max)
}

fn draw(g: &mut rand_chacha::ChaCha8Rng) -> PeriodParams {
    PeriodParams::new(
        common::uniform(g, 0.0, 20.0),
        common::uniform(g, 0.0, 1.0),
        common::uniform(g, 1e-3, 1.5),
        common::uniform(g, -1.0, 1.0),
        common::uniform(g, -0.05, 0.05),
    )
    .unwrap()
}

#[test]
fn closed_form_matches_integration_with_zero_terminal_condition() {
    let mut g = common::rng(101);
    for _ in 0..100 {
        let p = draw(&mut g);
        let tau = common::uniform(&mut g, 1e-6, 10.0);
        let x = common::uniform(&mut g, -50.0, 50.0);
        let cf = period_coeffs(tau, Complex64::new(x, 0.0), ZERO, ZERO, &p).unwrap();
        let ode = common::riccati_ode(tau, x, ZERO, ZERO, &p, 1e-13);
        let err = max_diff((cf.c, cf.d2), ode);
        assert!(err <= 1e-8, "tau {tau} x {x} {p:?}: {err:e}");
    }
}

#[test]
fn closed_form_matches_integration_with_general_terminal_condition() {
    let mut g = common::rng(102);
    for _ in 0..100 {
        let p = draw(&mut g);
        let tau = common::uniform(&mut g, 1e-4, 5.0);
        let x = common::uniform(&mut g, -20.0, 20.0);
        // a variance coefficient with non-positive real part, as produced by
        // later periods
        let d0 = Complex64::new(-common::uniform(&mut g, 0.0, 5.0), common::uniform(&mut g, -5.0, 5.0));
        let c0 = Complex64::new(common::uniform(&mut g, -1.0, 0.0), common::uniform(&mut g, -3.0, 3.0));
        let cf = period_coeffs(tau, Complex64::new(x, 0.0), c0, d0, &p).unwrap();
        let ode = common::riccati_ode(tau, x, c0, d0, &p, 1e-13);
        let err = max_diff((cf.c, cf.d2), ode);
        assert!(err <= 1e-8, "tau {tau} x {x} d0 {d0} {p:?}: {err:e}");
    }
}

#[test]
fn composition_matches_chained_integration() {
    let mut g = common::rng(103);
    for _ in 0..40 {
        let n = 2 + (common::uniform(&mut g, 0.0, 3.0) as usize);
        let mut end = 0.0;
        let mut pairs = Vec::new();
        for _ in 0..n {
            end += common::uniform(&mut g, 1e-3, 3.0);
            pairs.push((end, draw(&mut g)));
        }
        let ts = TermStructure::from_pairs(0.04, pairs).unwrap();
        let t = common::uniform(&mut g, 1e-3, ts.horizon());
        let x = common::uniform(&mut g, -30.0, 30.0);
        let cf = cf_coeffs_to(&ts, t, Complex64::new(x, 0.0), ZERO).unwrap();
        let ode = common::chained_ode(&ts, t, x, 1e-13);
        let err = max_diff((cf.c, cf.d2), ode);
        assert!(err <= 1e-8, "t {t} x {x}: {err:e}");
    }
}

#[test]
fn small_vol_of_variance_and_zero_argument() {
    let p = PeriodParams::new(1.3, 0.05, 1e-3, -0.4, 0.01).unwrap();
    for x in [0.0, 1e-6, 0.5, 40.0] {
        let cf = period_coeffs(7.0, Complex64::new(x, 0.0), ZERO, ZERO, &p).unwrap();
        let ode = common::riccati_ode(7.0, x, ZERO, ZERO, &p, 1e-13);
        assert!(max_diff((cf.c, cf.d2), ode) <= 1e-9, "x {x}");
    }
}
