//! Scalar special functions entering the complex-Gaussian quotient density:
//! log-gamma, the confluent hypergeometric function 1F1, and Hermite
//! functions of negative order.
//!
//! Coverage is deliberately narrow: real arguments in the parameter ranges
//! the quotient density needs (1F1 with a in {2, 5/2, 3, ...}, b in
//! {1/2, 3/2}, z >= 0; H_nu for nu < 0). No attempt is made at a
//! general-purpose special-function library.

use crate::error::{Error, Result};
use crate::quad;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Lanczos coefficients, g = 7, 9 terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
///
/// Relative error is below 1e-13 over the positive axis (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("ln_gamma", format!("x must be > 0, got {x}")));
    }
    // Shift small arguments up; ln Gamma(x) = ln Gamma(x+1) - ln x.
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln())
}

/// Gamma function for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    Ok(ln_gamma(x)?.exp())
}

fn check_1f1_domain(b: f64) -> Result<()> {
    if b <= 0.0 && b == b.floor() {
        return Err(Error::domain(
            "confluent_1f1",
            format!("b must not be a nonpositive integer, got {b}"),
        ));
    }
    Ok(())
}

/// Power-series evaluation of 1F1(a; b; z) with compensated summation.
fn hyp1f1_series(a: f64, b: f64, z: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut comp = 0.0f64; // Kahan compensation
    for k in 0..1000 {
        let kf = k as f64;
        term *= (a + kf) * z / ((b + kf) * (kf + 1.0));
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Large-z asymptotic series factor: sum_k (b-a)_k (1-a)_k / (k! z^k).
///
/// For the parameter pairs used here one of the Pochhammer factors
/// terminates, so a handful of terms is exact up to the exponentially
/// small second Kummer component.
fn hyp1f1_asym_factor(a: f64, b: f64, z: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 0..12 {
        let kf = k as f64;
        term *= (b - a + kf) * (1.0 - a + kf) / ((kf + 1.0) * z);
        if term == 0.0 || term.abs() > prev {
            break;
        }
        prev = term.abs();
        sum += term;
    }
    sum
}

/// Confluent hypergeometric function 1F1(a; b; z) for z >= 0.
///
/// Power series up to z = 30, then the standard large-argument expansion
/// 1F1(a;b;z) ~ Gamma(b)/Gamma(a) e^z z^{a-b} with correction terms.
/// Returns +infinity once the result exceeds the representable range.
pub fn confluent_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    check_1f1_domain(b)?;
    if z < 0.0 {
        return Err(Error::domain(
            "confluent_1f1",
            format!("this implementation requires z >= 0, got {z}"),
        ));
    }
    if z <= 30.0 {
        return Ok(hyp1f1_series(a, b, z));
    }
    Ok(ln_confluent_1f1(a, b, z)?.exp())
}

/// Natural log of 1F1(a; b; z) for a, b > 0, z >= 0.
///
/// Stays finite far past the overflow point of the function value, which is
/// what the quotient density needs when the mean term is large.
pub fn ln_confluent_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    check_1f1_domain(b)?;
    if z < 0.0 {
        return Err(Error::domain(
            "ln_confluent_1f1",
            format!("this implementation requires z >= 0, got {z}"),
        ));
    }
    if z <= 30.0 {
        return Ok(hyp1f1_series(a, b, z).ln());
    }
    let lead = ln_gamma(b)? - ln_gamma(a)? + z + (a - b) * z.ln();
    Ok(lead + hyp1f1_asym_factor(a, b, z).ln())
}

/// Hermite function H_nu(z) of negative order nu < 0.
///
/// For z <= 0 both 1F1 identities add constructively and are used directly;
/// for z > 0 they cancel catastrophically, so the integral representation
/// H_nu(z) = Gamma(-nu)^{-1} \int_0^inf t^{-(nu+1)} e^{-t^2-2tz} dt
/// is evaluated by adaptive quadrature instead.
pub fn hermite_neg(nu: f64, z: f64) -> Result<f64> {
    if !(nu < 0.0) {
        return Err(Error::domain(
            "hermite_neg",
            format!("order must be negative, got {nu}"),
        ));
    }
    if z > 0.0 {
        return hermite_neg_quadrature(nu, z);
    }
    let x = -z; // x >= 0
    let z2 = x * x;
    if z2 > 700.0 {
        // e^{z^2}-sized value; not representable
        return Ok(f64::INFINITY);
    }
    // H(-x) = (S + D)/2 with
    // S = 2^{nu+1} sqrt(pi)/Gamma((1-nu)/2) 1F1(-nu/2; 1/2; x^2)
    // D = 2^{nu+2} sqrt(pi) x/Gamma(-nu/2) 1F1((1-nu)/2; 3/2; x^2)
    let s = (nu + 1.0).exp2() * SQRT_PI / gamma((1.0 - nu) / 2.0)?
        * confluent_1f1(-nu / 2.0, 0.5, z2)?;
    let d = (nu + 2.0).exp2() * SQRT_PI * x / gamma(-nu / 2.0)?
        * confluent_1f1((1.0 - nu) / 2.0, 1.5, z2)?;
    Ok(0.5 * (s + d))
}

/// Integral-representation evaluation; the ground-truth oracle path.
pub fn hermite_neg_quadrature(nu: f64, z: f64) -> Result<f64> {
    if !(nu < 0.0) {
        return Err(Error::domain(
            "hermite_neg",
            format!("order must be negative, got {nu}"),
        ));
    }
    let p = -(nu + 1.0); // t^p, p > -1
    let f = |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            (p * t.ln() - t * t - 2.0 * t * z).exp()
        }
    };
    // Substitute t = u^2 on [0, 1] so the integrand is regular at 0, then
    // integrate the remainder directly; e^{-t^2} puts everything below
    // 1e-300 past t = 40 for the z range of interest.
    let head = quad::adaptive(
        |u: f64| 2.0 * u * f(u * u),
        0.0,
        1.0,
        1e-14,
        1e-11,
    );
    let tail = quad::adaptive_panels(&f, 1.0, 40.0, 39, 1e-14, 1e-11);
    Ok((head + tail) / gamma(-nu)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_exact_points() {
        assert_relative_eq!(ln_gamma(1.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(2.0).unwrap(), 0.0, epsilon = 1e-14);
        // Gamma(1/2) = sqrt(pi)
        assert_relative_eq!(
            ln_gamma(0.5).unwrap(),
            SQRT_PI.ln(),
            max_relative = 1e-13
        );
        assert_relative_eq!(ln_gamma(6.0).unwrap(), 120.0f64.ln(), max_relative = 1e-13);
    }

    #[test]
    fn ln_gamma_against_quadrature_oracle() {
        // Gamma(7.3) = \int_0^inf t^{6.3} e^{-t} dt, adaptive quadrature.
        let oracle = quad::adaptive(|t: f64| (6.3 * t.ln() - t).exp(), 1e-300, 120.0, 1e-10, 1e-13);
        assert_relative_eq!(ln_gamma(7.3).unwrap(), oracle.ln(), max_relative = 1e-12);
        // 50-digit series oracle value (frozen)
        assert_relative_eq!(
            ln_gamma(7.3).unwrap(),
            7.147_892_523_022_249,
            max_relative = 1e-13
        );
    }

    #[test]
    fn ln_gamma_rejects_nonpositive() {
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
    }

    #[test]
    fn hyp1f1_trivial_values() {
        // 1F1(a;b;0) = 1
        assert_relative_eq!(confluent_1f1(2.0, 0.5, 0.0).unwrap(), 1.0);
        // 1F1(a;a;z) = e^z
        assert_relative_eq!(
            confluent_1f1(1.0, 1.0, 2.5).unwrap(),
            2.5f64.exp(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn hyp1f1_series_oracle_value() {
        // extended-precision power-series oracle (frozen): 1F1(2; 1/2; 4)
        assert_relative_eq!(
            confluent_1f1(2.0, 0.5, 4.0).unwrap(),
            1064.520_266_514_407,
            max_relative = 1e-12
        );
    }

    #[test]
    fn hyp1f1_series_asymptotic_consistency() {
        // both branches must agree across the z = 30 switch point
        for &(a, b) in &[(2.0, 0.5), (2.5, 0.5), (3.0, 0.5), (2.5, 1.5), (3.5, 1.5)] {
            let s = hyp1f1_series(a, b, 31.0);
            let asym = ln_confluent_1f1(a, b, 31.0).unwrap().exp();
            assert_relative_eq!(s, asym, max_relative = 1e-10);
        }
    }

    #[test]
    fn hyp1f1_overflow_guard() {
        assert!(confluent_1f1(2.0, 0.5, 720.0).unwrap().is_infinite());
        // ln form stays finite there
        assert!(ln_confluent_1f1(2.0, 0.5, 720.0).unwrap().is_finite());
    }

    #[test]
    fn hyp1f1_rejects_bad_b() {
        assert!(confluent_1f1(2.0, 0.0, 1.0).is_err());
        assert!(confluent_1f1(2.0, -3.0, 1.0).is_err());
    }

    #[test]
    fn hyp1f1_monotone_in_z() {
        let mut prev = 0.0;
        for i in 0..200 {
            let z = i as f64 * 0.5;
            let v = confluent_1f1(2.0, 0.5, z).unwrap();
            assert!(v > prev, "1F1 must be strictly increasing on z >= 0");
            prev = v;
        }
    }

    #[test]
    fn hermite_special_values() {
        // H_{-4}(0) = Gamma(2)/(2 Gamma(4)) = 1/12 via u = t^2 in the integral
        assert_relative_eq!(
            hermite_neg(-4.0, 0.0).unwrap(),
            1.0 / 12.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            hermite_neg_quadrature(-4.0, 0.0).unwrap(),
            1.0 / 12.0,
            max_relative = 1e-9
        );
        // H_{-1}(0) = \int_0^inf e^{-t^2} dt = sqrt(pi)/2
        assert_relative_eq!(
            hermite_neg(-1.0, 0.0).unwrap(),
            SQRT_PI / 2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn hermite_quadrature_oracle_values() {
        // frozen adaptive-quadrature oracle values of the integral representation
        assert_relative_eq!(
            hermite_neg(-4.0, 1.5).unwrap(),
            3.648_031_869_500_917e-3,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            hermite_neg(-4.0, -2.5).unwrap(),
            2964.872_615_875_492,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            hermite_neg(-2.5, 0.7).unwrap(),
            9.997_250_602_870_309e-2,
            max_relative = 1e-9
        );
    }

    #[test]
    fn hermite_identity_and_quadrature_agree_for_negative_z() {
        for &nu in &[-0.5, -1.5, -4.0, -6.5, -8.0] {
            for &z in &[-0.3, -2.0, -5.0, -9.0] {
                let id = hermite_neg(nu, z).unwrap();
                let qd = hermite_neg_quadrature(nu, z).unwrap();
                assert_relative_eq!(id, qd, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn hermite_rejects_nonnegative_order() {
        assert!(hermite_neg(0.0, 1.0).is_err());
        assert!(hermite_neg(2.0, 1.0).is_err());
    }

    /// Sum identity: H_nu(-z) + H_nu(z) = 2^{nu+1} sqrt(pi)/Gamma((1-nu)/2)
    /// * 1F1(-nu/2; 1/2; z^2), checked on the full grid.
    #[test]
    fn hermite_sum_identity_grid() {
        for &nu in &[-4.0, -5.0, -6.0] {
            for i in 0..50 {
                let z = 10.0 * (i as f64 + 0.5) / 50.0;
                if z * z > 650.0 {
                    continue;
                }
                let lhs = hermite_neg(nu, -z).unwrap() + hermite_neg(nu, z).unwrap();
                let rhs = (nu + 1.0).exp2() * SQRT_PI / gamma((1.0 - nu) / 2.0).unwrap()
                    * confluent_1f1(-nu / 2.0, 0.5, z * z).unwrap();
                let tol = 1e-7 * rhs.abs().max(1.0);
                assert!(
                    (lhs - rhs).abs() <= tol,
                    "sum identity nu={nu} z={z}: {lhs} vs {rhs}"
                );
            }
        }
    }

    /// Difference identity with the 3/2-parameter 1F1.
    #[test]
    fn hermite_difference_identity_grid() {
        for &nu in &[-4.0, -5.0, -6.0] {
            for i in 0..50 {
                let z = 10.0 * (i as f64 + 0.5) / 50.0;
                let lhs = hermite_neg(nu, -z).unwrap() - hermite_neg(nu, z).unwrap();
                let rhs = (nu + 2.0).exp2() * SQRT_PI * z / gamma(-nu / 2.0).unwrap()
                    * confluent_1f1((1.0 - nu) / 2.0, 1.5, z * z).unwrap();
                let tol = 1e-7 * rhs.abs().max(1.0);
                assert!(
                    (lhs - rhs).abs() <= tol,
                    "difference identity nu={nu} z={z}: {lhs} vs {rhs}"
                );
            }
        }
    }

    /// Growth envelope: 1F1(k/2+2; 1/2; x^2) stays within a fixed multiple
    /// of max(1, e^{x^2} x^{k+3}) on (0, 20].
    #[test]
    fn hyp1f1_growth_envelope() {
        for k in 0..3 {
            let a = k as f64 / 2.0 + 2.0;
            let mut m_lo = f64::INFINITY;
            let mut m_hi: f64 = 0.0;
            for i in 1..=200 {
                let x = 20.0 * i as f64 / 200.0;
                let ln_f = ln_confluent_1f1(a, 0.5, x * x).unwrap();
                let ln_env = (x * x + (k as f64 + 3.0) * x.ln()).max(0.0);
                let ratio = (ln_f - ln_env).exp();
                m_lo = m_lo.min(ratio);
                m_hi = m_hi.max(ratio);
            }
            assert!(m_lo >= 1e-3, "k={k}: observed lower envelope m={m_lo}");
            assert!(m_hi <= 1e3, "k={k}: observed upper envelope 1/m={m_hi}");
        }
    }
}
