//! q-Pochhammer symbols, theta functions, lattice theta functions and basic
//! hypergeometric series.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::root_data::Lattice;

#[derive(Debug, Error, PartialEq)]
pub enum QSeriesError {
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("series did not converge within {0} terms")]
    NotConverged(usize),
}

/// Base and truncation controls for infinite products and series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QContext {
    pub q: f64,
    pub factor_cutoff: f64,
    pub max_terms: usize,
}

impl QContext {
    pub fn new(q: f64) -> Self {
        QContext { q, factor_cutoff: 1e-15, max_terms: 20_000 }
    }
    pub fn with_base(&self, q: f64) -> Self {
        QContext { q, ..*self }
    }
}

/// (x; q)_infinity, truncated once |x q^k| drops below the factor cutoff.
pub fn qpoch_inf(x: C64, ctx: &QContext) -> C64 {
    let q = ctx.q;
    let mut prod = C64::new(1.0, 0.0);
    let mut t = x;
    for _ in 0..ctx.max_terms {
        if t.norm() < ctx.factor_cutoff * (1.0 - q) {
            break;
        }
        prod *= C64::new(1.0, 0.0) - t;
        t *= q;
    }
    prod
}

/// Product of (x_j; q)_infinity.
pub fn qpoch_inf_prod(xs: &[C64], ctx: &QContext) -> C64 {
    xs.iter().map(|&x| qpoch_inf(x, ctx)).product()
}

/// Finite Pochhammer (x; q)_k for k >= 0.
pub fn qpoch(x: C64, q: f64, k: usize) -> C64 {
    let mut prod = C64::new(1.0, 0.0);
    let mut t = x;
    for _ in 0..k {
        prod *= C64::new(1.0, 0.0) - t;
        t *= q;
    }
    prod
}

/// theta(x; q) = (x, q/x; q)_infinity.
pub fn theta(x: C64, ctx: &QContext) -> Result<C64, QSeriesError> {
    if x.norm() == 0.0 || !x.is_finite() {
        return Err(QSeriesError::Domain(format!("theta at x = {}", x)));
    }
    Ok(qpoch_inf(x, ctx) * qpoch_inf(ctx.q / x, ctx))
}

/// Product of theta(x_j; q).
pub fn theta_prod(xs: &[C64], ctx: &QContext) -> Result<C64, QSeriesError> {
    let mut p = C64::new(1.0, 0.0);
    for &x in xs {
        p *= theta(x, ctx)?;
    }
    Ok(p)
}

/// Power series coefficients of y -> (y; p)_infinity up to degree `deg`.
pub fn euler_coeffs(p: f64, deg: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(deg + 1);
    let mut pp = 1.0; // (p; p)_m
    for m in 0..=deg {
        if m > 0 {
            pp *= 1.0 - p.powi(m as i32);
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * p.powf((m * (m.saturating_sub(1))) as f64 / 2.0) / pp);
    }
    out
}

/// Value of a lattice theta function with a bound on the neglected tail.
#[derive(Clone, Copy, Debug)]
pub struct ThetaValue {
    pub value: C64,
    pub tail: f64,
    pub shells: usize,
}

/// sum over lambda in the lattice of q^{|lambda|^2/2 + (lambda, z)}, summed
/// shell by shell in the sup norm of the coefficient vectors.
pub fn lattice_theta(lat: &Lattice, z: &[C64], ctx: &QContext) -> Result<ThetaValue, QSeriesError> {
    let gens: Vec<Vec<f64>> = lat.gens.iter().map(|g| g.to_f64()).collect();
    let m = gens.len();
    let dim = gens[0].len();
    let lnq = ctx.q.ln();
    let mut sum = C64::new(0.0, 0.0);
    let mut last_shell = f64::INFINITY;
    let mut quiet = 0;
    for r in 0..200i64 {
        let mut shell_max: f64 = 0.0;
        let side = (2 * r + 1) as usize;
        let total = side.pow(m as u32);
        for code in 0..total {
            let mut c = code;
            let mut coeffs = Vec::with_capacity(m);
            let mut on_shell = false;
            for _ in 0..m {
                let x = (c % side) as i64 - r;
                c /= side;
                if x.abs() == r {
                    on_shell = true;
                }
                coeffs.push(x);
            }
            if !on_shell {
                continue;
            }
            let mut lam = vec![0.0; dim];
            for (g, &k) in gens.iter().zip(&coeffs) {
                for j in 0..dim {
                    lam[j] += g[j] * k as f64;
                }
            }
            let n2: f64 = lam.iter().map(|x| x * x).sum();
            let pair: C64 = lam.iter().zip(z).map(|(a, b)| b * *a).sum();
            let term = ((C64::new(n2 / 2.0, 0.0) + pair) * lnq).exp();
            shell_max = shell_max.max(term.norm());
            sum += term;
        }
        last_shell = shell_max;
        if r >= 2 && shell_max <= ctx.factor_cutoff * sum.norm().max(1e-300) {
            quiet += 1;
            if quiet >= 2 {
                return Ok(ThetaValue { value: sum, tail: last_shell, shells: r as usize });
            }
        } else {
            quiet = 0;
        }
    }
    let _ = last_shell;
    Err(QSeriesError::NotConverged(200))
}

/// The r+1 phi r series with the given upper and lower parameters.
pub fn phi_series(upper: &[C64], lower: &[C64], z: C64, ctx: &QContext) -> Result<C64, QSeriesError> {
    if upper.len() != lower.len() + 1 {
        return Err(QSeriesError::Domain("need r+1 upper and r lower parameters".into()));
    }
    let q = ctx.q;
    let terminating = upper.iter().any(|a| {
        let k = a.ln().re / q.ln();
        a.im.abs() < 1e-14 && a.re > 0.0 && (k - k.round()).abs() < 1e-12 && k.round() <= 0.0
    });
    if z.norm() >= 1.0 && !terminating {
        return Err(QSeriesError::Domain(format!("|z| = {} >= 1", z.norm())));
    }
    let mut sum = C64::new(1.0, 0.0);
    let mut term = C64::new(1.0, 0.0);
    let mut qk = 1.0;
    let mut quiet = 0;
    for _ in 1..ctx.max_terms {
        let mut num = z;
        let mut den = C64::new(1.0 - q * qk, 0.0);
        for a in upper {
            num *= C64::new(1.0, 0.0) - a * qk;
        }
        for b in lower {
            den *= C64::new(1.0, 0.0) - b * qk;
        }
        if den.norm() == 0.0 {
            return Err(QSeriesError::Domain("lower parameter hits a pole".into()));
        }
        term *= num / den;
        qk *= q;
        sum += term;
        if term.norm() <= ctx.factor_cutoff * sum.norm() * 0.1 {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(QSeriesError::NotConverged(ctx.max_terms))
}

/// Very-well-poised 8W7(a0; a1, ..., a5; q, z) in its defining sum form.
pub fn w8_7(a0: C64, a: [C64; 5], z: C64, ctx: &QContext) -> Result<C64, QSeriesError> {
    if z.norm() >= 1.0 {
        return Err(QSeriesError::Domain(format!("|z| = {} >= 1", z.norm())));
    }
    let q = ctx.q;
    let one = C64::new(1.0, 0.0);
    let mut sum = one;
    // ratio of consecutive Pochhammer parts; the very-well-poised factor is
    // applied separately
    let mut poch = one;
    let mut qk = 1.0;
    let mut quiet = 0;
    for r in 1..ctx.max_terms {
        let mut num = z * (one - a0 * qk);
        let mut den = C64::new(1.0 - q * qk, 0.0);
        for aj in a.iter() {
            num *= one - aj * qk;
            den *= one - q * a0 / aj * qk;
        }
        poch *= num / den;
        qk *= q;
        let wp = (one - a0 * qk * qk) / (one - a0);
        let term = poch * wp;
        sum += term;
        if r > 2 && term.norm() <= ctx.factor_cutoff * 0.1 * sum.norm() {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(QSeriesError::NotConverged(ctx.max_terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::RVec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pochhammer_small_values() {
        let ctx = QContext::new(0.5);
        // (0.5; 0.5)_infinity
        assert_relative_eq!(qpoch_inf(c(0.5, 0.0), &ctx).re, 0.288_788_095_086_602_4, epsilon = 1e-14);
        assert_eq!(qpoch(c(0.3, 0.0), 0.5, 0), c(1.0, 0.0));
        assert_relative_eq!(qpoch(c(0.5, 0.0), 0.5, 2).re, 0.5 * 0.75, epsilon = 1e-15);
    }

    #[test]
    fn euler_series_matches_product() {
        let p = 0.3;
        let coeffs = euler_coeffs(p, 60);
        let y = c(0.7, -0.4);
        let mut s = C64::new(0.0, 0.0);
        let mut yk = C64::new(1.0, 0.0);
        for a in &coeffs {
            s += yk * a;
            yk *= y;
        }
        let prod = qpoch_inf(y, &QContext::new(p));
        assert!((s - prod).norm() < 1e-13);
    }

    #[test]
    fn theta_rejects_zero() {
        assert!(theta(c(0.0, 0.0), &QContext::new(0.5)).is_err());
    }

    #[test]
    fn terminating_phi_is_finite_sum() {
        // 2phi1(q^{-2}, b; c; q, z) is a polynomial of degree 2 in z
        let q = 0.4;
        let ctx = QContext::new(q);
        let (b, cc, z) = (c(0.3, 0.1), c(0.2, 0.0), c(2.5, 0.0));
        let a = c(q.powi(-2), 0.0);
        let mut expect = C64::new(1.0, 0.0);
        let mut t = C64::new(1.0, 0.0);
        for k in 0..2 {
            let qk = q.powi(k);
            t *= (C64::new(1.0, 0.0) - a * qk) * (C64::new(1.0, 0.0) - b * qk) * z
                / ((1.0 - q * qk) * (C64::new(1.0, 0.0) - cc * qk));
            expect += t;
        }
        let got = phi_series(&[a, b], &[cc], z, &ctx).unwrap();
        assert!((got - expect).norm() < 1e-13);
    }

    #[test]
    fn q_binomial_theorem() {
        // 1phi0(a; -; q, z) = (az; q)_inf / (z; q)_inf
        let ctx = QContext::new(0.6);
        let (a, z) = (c(0.4, 0.3), c(0.5, -0.2));
        let lhs = phi_series(&[a], &[], z, &ctx).unwrap();
        let rhs = qpoch_inf(a * z, &ctx) / qpoch_inf(z, &ctx);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn jacobi_triple_product_rank_one() {
        let q = 0.35;
        let ctx = QContext::new(q);
        let lat = Lattice { gens: vec![RVec::from_ints(&[1])] };
        let z = [c(0.3, 0.7)];
        let lhs = lattice_theta(&lat, &z, &ctx).unwrap().value;
        let x = (c(0.5, 0.0) + z[0]) * q.ln();
        let rhs = qpoch_inf(c(q, 0.0), &ctx) * theta(-x.exp(), &ctx).unwrap();
        assert!((lhs - rhs).norm() < 1e-13 * lhs.norm());
    }

    #[test]
    fn w87_reduces_to_summable_case() {
        // with a5 = a0 q / a4 the 8W7 is a 6W5 (Rogers' 6phi5 summation)
        let q = 0.45;
        let ctx = QContext::new(q);
        let a0 = c(0.3, 0.1);
        let (b, cc, d) = (c(0.9, -0.1), c(-0.8, 0.05), c(0.1, 0.85));
        let e = c(0.33, 0.0);
        let f = a0 * q / e;
        let z = a0 * q / (b * cc * d);
        let lhs = w8_7(a0, [b, cc, d, e, f], z, &ctx).unwrap();
        let num = qpoch_inf_prod(&[a0 * q, a0 * q / (b * cc), a0 * q / (b * d), a0 * q / (cc * d)], &ctx);
        let den = qpoch_inf_prod(&[a0 * q / b, a0 * q / cc, a0 * q / d, a0 * q / (b * cc * d)], &ctx);
        assert!((lhs - num / den).norm() < 1e-12 * lhs.norm());
    }

    proptest! {
        #[test]
        fn theta_inversion(re in -1.5f64..1.5, im in -1.0f64..1.0, q in 0.2f64..0.8) {
            let ctx = QContext::new(q);
            let x = ((c(re, im)) * q.ln()).exp();
            let a = theta(x, &ctx).unwrap();
            let b = theta(q / x, &ctx).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            // theta(1/x) = -theta(x)/x
            let c1 = theta(C64::new(1.0, 0.0) / x, &ctx).unwrap();
            prop_assert!((c1 + a / x).norm() <= 1e-11 * a.norm().max(1.0) / x.norm().min(1.0));
        }
    }
}
