//! Quantum c-functions: the lattice theta quotient Xi_sph, the c-function
//! c_Xi built from a quasi-invariant Xi, the consistency equations between
//! c(z, xi), c(s_i z, xi) and c(s_i z, s_{i*} xi), and the three term
//! addition formula for lattice theta functions.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::connection::{guarded, m_simple, simple_args, ConnectionError};
use crate::harish_chandra::Numerics;
use crate::qseries::{lattice_theta, qpoch_inf, theta, theta_prod, QContext, QSeriesError};
use crate::root_data::{Bullet, Datum, OrbitCase, Parity, RVec};
use crate::series::plane_wave;

#[derive(Debug, Error)]
pub enum CFunctionError {
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    QSeries(#[from] QSeriesError),
    #[error("wrong datum: {0}")]
    WrongDatum(String),
    #[error("{name} is not quasi-invariant (residual {residual:.3e})")]
    NotQuasiInvariant { name: String, residual: f64 },
}

pub type Result<T> = std::result::Result<T, CFunctionError>;

/// Tolerance used when a Xi-function is screened for quasi-invariance.
pub const QUASI_TOL: f64 = 1e-8;

fn near(what: &'static str, v: C64, num: &Numerics) -> Result<C64> {
    Ok(guarded(what, v, num.pole_guard)?)
}

fn add(a: &[C64], b: &[f64], s: f64) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// theta_Lambda(z) for the lattice of the datum.
pub fn vartheta(d: &Datum, z: &[C64], num: &Numerics) -> Result<C64> {
    Ok(lattice_theta(&d.lattice, z, &num.ctx)?.value)
}

/// Product form of the theta function of Z^n through the Jacobi triple
/// product: (q; q)^n prod_j theta(-q^{1/2 + z_j}; q).
pub fn vartheta_zn_product(z: &[C64], ctx: &QContext) -> Result<C64> {
    let q = ctx.q;
    let qq = qpoch_inf(C64::new(q, 0.0), ctx);
    let mut p = C64::new(1.0, 0.0);
    for &zj in z {
        p *= qq * theta(-((zj + 0.5) * q.ln()).exp(), ctx)?;
    }
    Ok(p)
}

fn is_integral_lattice_zn(d: &Datum) -> bool {
    d.lattice.gens.len() == d.dim
        && d.lattice.gens.iter().enumerate().all(|(k, g)| *g == RVec::unit(d.dim, k))
}

/// Relative residual of the triple product identity for the theta function
/// of Z^n; needs a datum whose lattice is Z^n.
pub fn triple_product_residual(d: &Datum, z: &[C64], num: &Numerics) -> Result<f64> {
    if !is_integral_lattice_zn(d) {
        return Err(CFunctionError::WrongDatum("the lattice is not Z^n".into()));
    }
    let a = vartheta(d, z, num)?;
    let b = vartheta_zn_product(z, &num.ctx)?;
    Ok((a - b).norm() / b.norm())
}

/// Twisted equal lattice data: both lattices agree and, away from the
/// simply laced case, the datum is twisted.
pub fn require_twisted_equal(d: &Datum) -> Result<()> {
    let equal = d.lattice.gens == d.lattice_tilde.gens;
    if !equal || (d.bullet == Bullet::U && !d.simply_laced()) {
        return Err(CFunctionError::WrongDatum(format!("{} is not a twisted equal lattice datum", d.describe())));
    }
    Ok(())
}

/// (kappa_{2a_0} - kappa_0, kappa_{2a_0} - kappa_{2 psi}), the two shifts
/// along delta_s^vee entering Xi_sph.
pub fn delta_shifts(d: &Datum) -> (f64, f64) {
    let k = d.kappa(d.psi);
    (k.two_alpha1 - k.alpha1, k.two_alpha1 - k.two_alpha)
}

/// Xi_sph(z, xi).
pub fn xi_sph(d: &Datum, z: &[C64], xi: &[C64], num: &Numerics) -> Result<C64> {
    require_twisted_equal(d)?;
    let delta = d.delta_s_vee();
    let (s1, s2) = delta_shifts(d);
    let w0xi = d.weyl.apply_c(d.w0(), xi);
    let top: Vec<C64> = (0..d.dim).map(|j| d.rho[j] + s1 * delta[j] + z[j] + w0xi[j]).collect();
    let b1 = add(z, &delta, s1);
    let b2: Vec<C64> = (0..d.dim).map(|j| s2 * delta[j] - xi[j]).collect();
    let den = near("theta_Lambda denominator", vartheta(d, &b1, num)? * vartheta(d, &b2, num)?, num)?;
    Ok(vartheta(d, &top, num)? / den)
}

/// prod over positive roots of
/// theta(a~ X, b~ X, c~ X, d~ X; q_alpha^2) / theta(X^2; q_alpha^2) with
/// X = q^{alpha~(xi)}.
pub fn dual_theta_factor(d: &Datum, xi: &[C64], num: &Numerics) -> Result<C64> {
    let mut p = C64::new(1.0, 0.0);
    for r in d.positive_roots() {
        let ctx = num.ctx.with_base(d.q.powf(2.0 * d.roots[r].muf));
        let x = d.qpow(d.roots[r].tilde.pair(xi));
        let [a, b, c, dd] = d.aw_params_dual(r);
        let den = near("theta(q^{2 alpha~(xi)})", theta(x * x, &ctx)?, num)?;
        p *= theta_prod(&[a * x, b * x, c * x, dd * x], &ctx)? / den;
    }
    Ok(p)
}

/// A function Xi(z, xi) together with a name for diagnostics.
pub struct XiFunction<'a> {
    pub name: String,
    eval: Box<dyn Fn(&[C64], &[C64]) -> Result<C64> + 'a>,
}

impl<'a> XiFunction<'a> {
    pub fn new(name: &str, f: impl Fn(&[C64], &[C64]) -> Result<C64> + 'a) -> Self {
        XiFunction { name: name.to_string(), eval: Box::new(f) }
    }

    pub fn sph(d: &'a Datum, num: Numerics) -> Self {
        XiFunction::new("Xi_sph", move |z, xi| xi_sph(d, z, xi, &num))
    }

    pub fn eval(&self, z: &[C64], xi: &[C64]) -> Result<C64> {
        (self.eval)(z, xi)
    }

    /// Largest relative defect of the two quasi-invariance laws over the
    /// generators of the lattices, at the point (z, xi).
    pub fn quasi_invariance_residual(&self, d: &Datum, z: &[C64], xi: &[C64]) -> Result<f64> {
        let base = self.eval(z, xi)?;
        let w0 = d.w0();
        let mut worst: f64 = 0.0;
        for mu in &d.lattice_tilde.gens {
            let muf = mu.to_f64();
            let w0mu = d.weyl.apply_f(w0, &muf);
            let e: C64 = (0..d.dim).map(|j| (d.rho[j] - xi[j]) * w0mu[j]).sum();
            let expect = d.qpow(e) * base;
            let got = self.eval(&add(z, &muf, 1.0), xi)?;
            worst = worst.max((got - expect).norm() / expect.norm());
        }
        let w0z = d.weyl.apply_c(w0, z);
        for lam in &d.lattice.gens {
            let lf = lam.to_f64();
            let e: C64 = (0..d.dim).map(|j| (d.rho_tilde[j] - w0z[j]) * lf[j]).sum();
            let expect = d.qpow(e) * base;
            let got = self.eval(z, &add(xi, &lf, 1.0))?;
            worst = worst.max((got - expect).norm() / expect.norm());
        }
        Ok(worst)
    }

    /// Fails with `NotQuasiInvariant` when the defect at (z, xi) exceeds
    /// [`QUASI_TOL`].
    pub fn require_quasi_invariant(&self, d: &Datum, z: &[C64], xi: &[C64]) -> Result<()> {
        let r = self.quasi_invariance_residual(d, z, xi)?;
        if !(r < QUASI_TOL) {
            return Err(CFunctionError::NotQuasiInvariant { name: self.name.clone(), residual: r });
        }
        Ok(())
    }
}

/// c_Xi(z, xi) = Xi(z, xi) / W(z, xi) times the dual theta factor.
pub fn c_xi(d: &Datum, f: &XiFunction, z: &[C64], xi: &[C64], num: &Numerics) -> Result<C64> {
    Ok(f.eval(z, xi)? / plane_wave(d, z, xi) * dual_theta_factor(d, xi, num)?)
}

/// The quantum c-function c_sph of a twisted equal lattice datum.
pub fn c_sph(d: &Datum, z: &[C64], xi: &[C64], num: &Numerics) -> Result<C64> {
    Ok(xi_sph(d, z, xi, num)? / plane_wave(d, z, xi) * dual_theta_factor(d, xi, num)?)
}

/// True when (Lambda, alpha^vee) = Z for every root.
pub fn all_integral(d: &Datum) -> bool {
    d.orbits.iter().all(|o| o.lattice_parity == Parity::Z)
}

/// c_sph through the simplified expression valid when (Lambda, alpha^vee) = Z
/// for all roots.
pub fn c_sph_integral(d: &Datum, z: &[C64], xi: &[C64], num: &Numerics) -> Result<C64> {
    require_twisted_equal(d)?;
    if !all_integral(d) {
        return Err(CFunctionError::WrongDatum("(Lambda, alpha^vee) is not Z for every root".into()));
    }
    let w0xi = d.weyl.apply_c(d.w0(), xi);
    let top: Vec<C64> = (0..d.dim).map(|j| d.rho[j] + z[j] + w0xi[j]).collect();
    let den = near("theta_Lambda(z) theta_Lambda(xi)", vartheta(d, z, num)? * vartheta(d, xi, num)?, num)?;
    let mut p = vartheta(d, &top, num)? / den / plane_wave(d, z, xi);
    for r in d.positive_roots() {
        let ctx = num.ctx.with_base(d.q.powf(d.roots[r].muf));
        let x = d.qpow(d.roots[r].tilde.pair(xi));
        let k2 = d.q.powf(2.0 * d.kappa(r).alpha);
        p *= theta(k2 * x, &ctx)? / near("theta(q^{alpha(xi)})", theta(x, &ctx)?, num)?;
    }
    Ok(p)
}

fn s_z(d: &Datum, i: usize, z: &[C64]) -> Vec<C64> {
    d.weyl.apply_c(d.weyl.simple[i - 1], z)
}

/// Relative residual of
/// c(z, xi) = m_ee(z, xi) c(s_i z, xi) + m_{s_{i*},e}(z, s_{i*} xi) c(s_i z, s_{i*} xi),
/// scaled by the largest of the three terms.
pub fn relationsc_residual(
    d: &Datum,
    c: &dyn Fn(&[C64], &[C64]) -> Result<C64>,
    i: usize,
    z: &[C64],
    xi: &[C64],
    num: &Numerics,
) -> Result<f64> {
    let siz = s_z(d, i, z);
    let sxi = s_z(d, d.istar(i), xi);
    let (ee, _) = m_simple(d, i, z, xi, num)?;
    let (_, off) = m_simple(d, i, z, &sxi, num)?;
    let t0 = c(z, xi)?;
    let t1 = ee * c(&siz, xi)?;
    let t2 = off * c(&siz, &sxi)?;
    let scale = t0.norm().max(t1.norm()).max(t2.norm());
    Ok((t0 - t1 - t2).norm() / scale)
}

fn integral_ultraspherical(d: &Datum, i: usize) -> Result<()> {
    let o = &d.orbits[d.alpha(i).orbit];
    if o.case != OrbitCase::Ultraspherical {
        return Err(CFunctionError::WrongDatum(format!("alpha_{} is not of q-ultraspherical type", i)));
    }
    Ok(())
}

/// Coefficients (A, B, C) of the three term relation
/// A F(z, xi) = B F(s_i z, xi) - C F(s_i z, s_{i*} xi).
fn three_term(d: &Datum, i: usize, z: &[C64], xi: &[C64], num: &Numerics) -> Result<(C64, C64, C64)> {
    let (x, y) = simple_args(d, i, z, xi);
    let ctx = num.ctx.with_base(d.q.powf(d.alpha(i).muf));
    let k2 = C64::new(2.0 * d.kappa(d.simple[i - 1]).alpha, 0.0);
    let a = theta_prod(&[d.qpow(y), d.qpow(k2 - x)], &ctx)?;
    let b = theta_prod(&[d.qpow(k2), d.qpow(y - x)], &ctx)?;
    let c = d.qpow(y) * theta_prod(&[d.qpow(k2 - y), d.qpow(-x)], &ctx)?;
    Ok((a, b, c))
}

fn three_term_residual(a: C64, b: C64, c: C64, f0: C64, f1: C64, f2: C64) -> f64 {
    let (l, r1, r2) = (a * f0, b * f1, c * f2);
    (l - r1 + r2).norm() / l.norm().max(r1.norm()).max(r2.norm())
}

/// Residual of the three term identity between theta(q^y, q^{2k-x}; q_i)
/// Xi(z, xi), Xi(s_i z, xi) and Xi(s_i z, s_{i*} xi). Xi is screened for
/// quasi-invariance first.
pub fn towards_riemann_residual(d: &Datum, f: &XiFunction, i: usize, z: &[C64], xi: &[C64], num: &Numerics) -> Result<f64> {
    integral_ultraspherical(d, i)?;
    f.require_quasi_invariant(d, z, xi)?;
    let (a, b, c) = three_term(d, i, z, xi, num)?;
    let siz = s_z(d, i, z);
    let sxi = s_z(d, d.istar(i), xi);
    Ok(three_term_residual(a, b, c, f.eval(z, xi)?, f.eval(&siz, xi)?, f.eval(&siz, &sxi)?))
}

/// Residual of the higher rank addition formula for theta_Lambda at the
/// simple root alpha_i, which must satisfy (Lambda, alpha_i^vee) = Z.
pub fn addition_root_residual(d: &Datum, i: usize, z: &[C64], xi: &[C64], num: &Numerics) -> Result<f64> {
    require_twisted_equal(d)?;
    let o = &d.orbits[d.alpha(i).orbit];
    if o.lattice_parity != Parity::Z {
        return Err(CFunctionError::WrongDatum(format!("(Lambda, alpha_{}^vee) is not Z", i)));
    }
    let (a, b, c) = three_term(d, i, z, xi, num)?;
    let w0xi = d.weyl.apply_c(d.w0(), xi);
    let si = d.weyl.simple[i - 1];
    let siz = s_z(d, i, z);
    let sirho = d.weyl.apply_f(si, &d.rho);
    let arg = |rho: &[f64], z: &[C64]| -> Vec<C64> { (0..d.dim).map(|j| rho[j] + z[j] + w0xi[j]).collect() };
    let f0 = vartheta(d, &arg(&d.rho, z), num)?;
    let f1 = vartheta(d, &arg(&d.rho, &siz), num)?;
    let f2 = vartheta(d, &arg(&sirho, z), num)?;
    Ok(three_term_residual(a, b, c, f0, f1, f2))
}

/// Residual of the pair of reflection laws for Xi under s_i z and
/// s_{i*} xi (base q_i^2), the sufficient condition used for the
/// Askey-Wilson simple root. Xi is screened for quasi-invariance first.
pub fn alternative_residual(d: &Datum, f: &XiFunction, i: usize, z: &[C64], xi: &[C64], num: &Numerics) -> Result<f64> {
    f.require_quasi_invariant(d, z, xi)?;
    let r = d.simple[i - 1];
    let ctx = num.ctx.with_base(d.q.powf(2.0 * d.roots[r].muf));
    let (x, y) = simple_args(d, i, z, xi);
    let [a, _, _, dd] = d.aw_params(r);
    let dt = d.aw_params_dual(r)[3];
    let (qx, qy) = (d.qpow(x), d.qpow(y));
    let k = dt / a;
    let base = f.eval(z, xi)?;
    let den1 = near("alternative denominator", theta_prod(&[k * qy / qx, dd * qx], &ctx)?, num)?;
    let expect1 = theta_prod(&[k * qy * qx, dd / qx], &ctx)? / den1 * base;
    let got1 = f.eval(&s_z(d, i, z), xi)?;
    let den2 = near("alternative denominator", theta_prod(&[k * qy / qx, dt / qy], &ctx)?, num)?;
    let expect2 = theta_prod(&[k / (qy * qx), dt * qy], &ctx)? / den2 * base;
    let got2 = f.eval(z, &s_z(d, d.istar(i), xi))?;
    let r1 = (got1 - expect1).norm() / got1.norm().max(expect1.norm());
    let r2 = (got2 - expect2).norm() / got2.norm().max(expect2.norm());
    Ok(r1.max(r2))
}

/// rho + (kappa_{2 psi} - kappa_0) delta_s^vee, which equals rho~ for
/// twisted equal lattice data.
pub fn shifted_rho(d: &Datum) -> Vec<f64> {
    let k = d.kappa(d.psi);
    let delta = d.delta_s_vee();
    (0..d.dim).map(|j| d.rho[j] + (k.two_alpha - k.alpha1) * delta[j]).collect()
}

/// Xi_sph times exp(2 pi i (beta, z)); breaks quasi-invariance unless beta
/// pairs integrally with the dual lattice.
pub fn twisted_xi<'a>(d: &'a Datum, beta: Vec<f64>, num: Numerics) -> XiFunction<'a> {
    XiFunction::new("Xi_sph exp(2 pi i (beta, z))", move |z, xi| {
        let p: C64 = z.iter().zip(&beta).map(|(a, b)| a * *b).sum();
        Ok(xi_sph(d, z, xi, &num)? * (C64::new(0.0, 2.0 * std::f64::consts::PI) * p).exp())
    })
}

/// Xi_sph times an elliptic function of q^{(g, z)} with g = alpha_1 / mu,
/// which pairs integrally with the lattice translating z. Still
/// quasi-invariant, but not compatible with the reflections in general.
pub fn elliptic_xi<'a>(d: &'a Datum, num: Numerics) -> XiFunction<'a> {
    let g = d.alpha(1).tilde_coroot.to_f64();
    XiFunction::new("Xi_sph elliptic", move |z, xi| {
        let ctx = num.ctx;
        let x = d.qpow(z.iter().zip(&g).map(|(a, b)| a * b).sum());
        let (c1, c2, c3) = (C64::new(0.7, 0.2), C64::new(1.9, -0.4), C64::new(1.1, 0.6));
        let c4 = c1 * c2 / c3;
        let e = theta_prod(&[c1 * x, c2 * x], &ctx)? / near("elliptic denominator", theta_prod(&[c3 * x, c4 * x], &ctx)?, &num)?;
        Ok(xi_sph(d, z, xi, &num)? * e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::{datum, Family, Kappa, KappaSpec};
    use crate::sample::Sampler;

    fn b2() -> Datum {
        let short = Kappa { alpha: 0.3, two_alpha: 0.1, alpha1: 0.2, two_alpha1: -0.1 };
        datum(Family::Koornwinder, 2, Bullet::T, &[("long", KappaSpec::uniform(0.25)), ("short", KappaSpec::full(short))], 0.3).unwrap()
    }

    fn gl3() -> Datum {
        datum(Family::Gl, 2, Bullet::U, &[("roots", KappaSpec::uniform(0.3))], 0.4).unwrap()
    }

    #[test]
    fn shifted_rho_is_rho_tilde() {
        let d = b2();
        let s = shifted_rho(&d);
        for j in 0..d.dim {
            assert!((s[j] - d.rho_tilde[j]).abs() < 1e-12, "{:?} vs {:?}", s, d.rho_tilde);
        }
    }

    #[test]
    fn triple_product_b2() {
        let d = b2();
        let num = Numerics::new(&d, 4);
        let r = triple_product_residual(&d, &[C64::new(0.3, -0.4), C64::new(-0.7, 0.2)], &num).unwrap();
        assert!(r < 1e-12, "{}", r);
    }

    #[test]
    fn xi_sph_quasi_invariant() {
        let d = b2();
        let num = Numerics::new(&d, 4);
        let f = XiFunction::sph(&d, num);
        let mut s = Sampler::new(11);
        for _ in 0..5 {
            let z = s.point(&d, (-0.8, 0.8), (-0.8, 0.8));
            let xi = s.spectral_point(&d, (-0.8, 0.8), (-0.8, 0.8));
            let r = f.quasi_invariance_residual(&d, &z, &xi).unwrap();
            assert!(r < 1e-10, "{}", r);
        }
    }

    #[test]
    fn integral_branch_agrees() {
        let d = gl3();
        let num = Numerics::new(&d, 4);
        let mut s = Sampler::new(5);
        for _ in 0..5 {
            let z = s.point(&d, (-0.8, 0.8), (-0.8, 0.8));
            let xi = s.spectral_point(&d, (-0.8, 0.8), (-0.8, 0.8));
            let a = c_sph(&d, &z, &xi, &num).unwrap();
            let b = c_sph_integral(&d, &z, &xi, &num).unwrap();
            assert!((a - b).norm() < 1e-11 * a.norm(), "{} vs {}", a, b);
        }
    }

    #[test]
    fn c_sph_satisfies_relations() {
        for d in [b2(), gl3()] {
            let num = Numerics::new(&d, 4);
            let mut s = Sampler::new(2);
            for _ in 0..4 {
                let z = s.point(&d, (-0.8, 0.8), (-0.8, 0.8));
                let xi = s.spectral_point(&d, (-0.8, 0.8), (-0.8, 0.8));
                for i in 1..=d.rank {
                    let r = relationsc_residual(&d, &|z, xi| c_sph(&d, z, xi, &num), i, &z, &xi, &num).unwrap();
                    assert!(r < 1e-8, "{} i={} {}", d.describe(), i, r);
                }
            }
        }
    }

    #[test]
    fn addition_and_three_term() {
        let d = b2();
        let num = Numerics::new(&d, 4);
        let f = XiFunction::sph(&d, num);
        let mut s = Sampler::new(3);
        for _ in 0..4 {
            let z = s.point(&d, (-0.8, 0.8), (-0.8, 0.8));
            let xi = s.spectral_point(&d, (-0.8, 0.8), (-0.8, 0.8));
            let r = addition_root_residual(&d, 1, &z, &xi, &num).unwrap();
            assert!(r < 1e-10, "{}", r);
            let t = towards_riemann_residual(&d, &f, 1, &z, &xi, &num).unwrap();
            assert!(t < 1e-10, "{}", t);
            let a = alternative_residual(&d, &f, 2, &z, &xi, &num).unwrap();
            assert!(a < 1e-10, "{}", a);
        }
    }

    #[test]
    fn broken_quasi_invariance_is_flagged() {
        let d = b2();
        let num = Numerics::new(&d, 4);
        let f = twisted_xi(&d, vec![0.31, -0.17], num);
        let z = [C64::new(0.2, 0.1), C64::new(-0.3, 0.4)];
        let xi = [C64::new(0.1, -0.2), C64::new(0.5, 0.3)];
        match towards_riemann_residual(&d, &f, 1, &z, &xi, &num) {
            Err(CFunctionError::NotQuasiInvariant { .. }) => {}
            other => panic!("expected a quasi-invariance failure, got {:?}", other.map_err(|e| e.to_string())),
        }
    }

    #[test]
    fn elliptic_perturbation_fails_both() {
        let d = b2();
        let num = Numerics::new(&d, 4);
        let f = elliptic_xi(&d, num);
        let z = [C64::new(0.2, 0.1), C64::new(-0.3, 0.4)];
        let xi = [C64::new(0.1, -0.2), C64::new(0.5, 0.3)];
        assert!(f.quasi_invariance_residual(&d, &z, &xi).unwrap() < 1e-10);
        let t = towards_riemann_residual(&d, &f, 1, &z, &xi, &num).unwrap();
        let r = relationsc_residual(&d, &|z, xi| c_xi(&d, &f, z, xi, &num), 1, &z, &xi, &num).unwrap();
        assert!(t > 1e-4 && r > 1e-4, "{} {}", t, r);
    }
}
