//! Connection coefficients of the basic Harish-Chandra series: the theta
//! functions e_alpha, e~_alpha, the matrices M^sigma(z, xi), their cocycle
//! products and the rank one Wronskian description.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::harish_chandra::{s_tilde, w_i, Numerics};
use crate::qseries::{qpoch_inf_prod, theta, theta_prod, QSeriesError};
use crate::root_data::{Datum, DescentOrder, OrbitCase};
use crate::series::{gamma0, SeriesError};

#[derive(Debug, Error)]
pub enum ConnectionError {
    #[error("{what} = {value:.3e} is below the pole guard")]
    NearPole { what: &'static str, value: f64 },
    #[error(transparent)]
    QSeries(#[from] QSeriesError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, ConnectionError>;

pub(crate) fn guarded(what: &'static str, v: C64, tol: f64) -> Result<C64> {
    if v.norm() < tol || !v.is_finite() {
        Err(ConnectionError::NearPole { what, value: v.norm() })
    } else {
        Ok(v)
    }
}

fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// e_alpha(x, y) for the root with index `r`.
pub fn frak_e(d: &Datum, r: usize, x: C64, y: C64, num: &Numerics) -> Result<C64> {
    let k = d.kappa(r);
    let mu = d.roots[r].muf;
    let [_, _, _, dd] = d.aw_params(r);
    let [at, bt, ct, _] = d.aw_params_dual(r);
    let ctx = num.ctx.with_base(d.q.powf(2.0 * mu));
    let (qx, qy) = (d.qpow(x), d.qpow(y));
    let pref = d.qpow(-(cr(k.alpha + k.two_alpha) - x) * (cr(k.alpha + k.alpha1) - y) / (2.0 * mu));
    let den = guarded("theta(q^{2y}, d q^{-x})", theta_prod(&[qy * qy, dd / qx], &ctx)?, num.pole_guard)?;
    Ok(pref * theta_prod(&[qy * at, qy * bt, qy * ct, qy * dd / (qx * at)], &ctx)? / den)
}

/// e~_alpha(x, y) for the root with index `r`.
pub fn frak_e_tilde(d: &Datum, r: usize, x: C64, y: C64, num: &Numerics) -> Result<C64> {
    let k = d.kappa(r);
    let mu = d.roots[r].muf;
    let [a, b, c, _] = d.aw_params(r);
    let [_, _, _, dt] = d.aw_params_dual(r);
    let ctx = num.ctx.with_base(d.q.powf(2.0 * mu));
    let (qx, qy) = (d.qpow(x), d.qpow(y));
    let pref = d.qpow(-(cr(k.alpha + k.alpha1) - x) * (cr(k.alpha + k.two_alpha) - y) / (2.0 * mu));
    let den = guarded("theta(q^{2y}, d~ q^{-x})", theta_prod(&[qy * qy, dt / qx], &ctx)?, num.pole_guard)?;
    Ok(pref * theta_prod(&[qy * a, qy * b, qy * c, qy * dt / (qx * a)], &ctx)? / den)
}

/// (alpha_i(z), alpha~_{i*}(xi)).
pub fn simple_args(d: &Datum, i: usize, z: &[C64], xi: &[C64]) -> (C64, C64) {
    let x = d.alpha(i).v.pair(z);
    let y = d.alpha(d.istar(i)).tilde.pair(xi);
    (x, y)
}

/// Rank one coefficients n_+(x, y), n_-(x, y) in terms of x and
/// y = alpha~_{i*}(xi).
pub fn n_pm(d: &Datum, i: usize, x: C64, y: C64, num: &Numerics) -> Result<(C64, C64)> {
    let r = d.simple[i - 1];
    let den = guarded("e~(y, -x)", frak_e_tilde(d, r, y, -x, num)?, num.pole_guard)?;
    let ee = (frak_e(d, r, x, y, num)? - frak_e_tilde(d, r, y, x, num)?) / den;
    let off = frak_e(d, r, x, -y, num)? / den;
    Ok((ee, off))
}

/// The nonzero entries (m_{e,e}, m_{s_{i*},e}) of M^{s_i}(z, xi).
pub fn m_simple(d: &Datum, i: usize, z: &[C64], xi: &[C64], num: &Numerics) -> Result<(C64, C64)> {
    let (x, y) = simple_args(d, i, z, xi);
    n_pm(d, i, x, y, num)
}

/// The same entries through the simplified formulas available when the
/// orbit of alpha_i is of q-ultraspherical type.
pub fn m_simple_cus(d: &Datum, i: usize, z: &[C64], xi: &[C64], num: &Numerics) -> Result<(C64, C64)> {
    let r = d.simple[i - 1];
    if d.orbits[d.roots[r].orbit].case != OrbitCase::Ultraspherical {
        return Err(ConnectionError::Unsupported(format!("alpha_{} is not of q-ultraspherical type", i)));
    }
    let (x, y) = simple_args(d, i, z, xi);
    let mu = d.roots[r].muf;
    let k = d.kappa(r).alpha;
    let a = d.aw_params(r)[0];
    let ctx = num.ctx.with_base(d.q.powf(mu));
    let (qx, qy) = (d.qpow(x), d.qpow(y));
    let den_ee = guarded("theta(q^y, a q^{-x})", theta_prod(&[qy, a / qx], &ctx)?, num.pole_guard)?;
    let ee = d.qpow((cr(2.0 * k) - y) * x / mu) * theta_prod(&[cr(a), qy / qx], &ctx)? / den_ee;
    let den_off = guarded("theta(a q^{-x}, q^{-y})", theta_prod(&[a / qx, 1.0 / qy], &ctx)?, num.pole_guard)?;
    let off = d.qpow(cr(2.0 * k / mu) * (x - y)) * theta_prod(&[a / qy, 1.0 / qx], &ctx)? / den_off;
    Ok((ee, off))
}

/// Connection matrix M^sigma(z, xi) together with the word it was built from.
#[derive(Clone, Debug)]
pub struct ConnectionMatrix {
    pub sigma: usize,
    pub word: Vec<usize>,
    /// `entries[(tau1, tau2)]` = m^sigma_{tau1, tau2}(z, xi), indexed by the
    /// enumeration order of W_0.
    pub entries: DMatrix<C64>,
}

impl ConnectionMatrix {
    /// Entries with modulus above `tol`.
    pub fn nonzero(&self, tol: f64) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for t2 in 0..self.entries.ncols() {
            for t1 in 0..self.entries.nrows() {
                let v = self.entries[(t1, t2)];
                if v.norm() > tol {
                    out.push((t1, t2, v));
                }
            }
        }
        out
    }
}

/// M^{s_i}(z, xi) assembled from m_simple at the points tau^{-1} xi.
pub fn generator(d: &Datum, i: usize, z: &[C64], xi: &[C64], num: &Numerics) -> Result<DMatrix<C64>> {
    let n = d.weyl.order();
    let s = d.weyl.simple[d.istar(i) - 1];
    let mut m = DMatrix::zeros(n, n);
    for t2 in 0..n {
        let xi2 = d.weyl.apply_c(d.weyl.inv[t2], xi);
        let (ee, off) = m_simple(d, i, z, &xi2, num)?;
        m[(t2, t2)] += ee;
        m[(d.weyl.mul[t2][s], t2)] += off;
    }
    Ok(m)
}

/// Product M^{s_{i_1}}(z) M^{s_{i_2}}(s_{i_1} z) M^{s_{i_3}}(s_{i_2} s_{i_1} z) ...
/// over an arbitrary (not necessarily reduced) word of finite simple
/// reflections.
pub fn word_product(d: &Datum, word: &[usize], z: &[C64], xi: &[C64], num: &Numerics) -> Result<DMatrix<C64>> {
    let n = d.weyl.order();
    let mut m = DMatrix::identity(n, n);
    let mut zc = z.to_vec();
    for &i in word {
        m *= generator(d, i, &zc, xi, num)?;
        zc = d.weyl.apply_c(d.weyl.simple[i - 1], &zc);
    }
    Ok(m)
}

/// M^sigma(z, xi) along a reduced word of sigma.
pub fn connection_matrix(d: &Datum, sigma: usize, z: &[C64], xi: &[C64], order: DescentOrder, num: &Numerics) -> Result<ConnectionMatrix> {
    let (word, _) = d.reduced_word(&d.finite(sigma), order);
    let entries = word_product(d, &word, z, xi, num)?;
    Ok(ConnectionMatrix { sigma, word, entries })
}

/// Frobenius norm of a - b relative to max(1, |a|).
pub fn rel_frobenius(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).norm() / a.norm().max(1.0)
}

/// Residual of the braid type identity between two words for the same
/// element of W_0.
pub fn braid_residual(d: &Datum, w1: &[usize], w2: &[usize], z: &[C64], xi: &[C64], num: &Numerics) -> Result<f64> {
    let a = word_product(d, w1, z, xi, num)?;
    let b = word_product(d, w2, z, xi, num)?;
    Ok(rel_frobenius(&a, &b))
}

fn require_koornwinder(d: &Datum, min_rank: usize) -> Result<()> {
    if d.family != crate::root_data::Family::Koornwinder || d.rank < min_rank {
        return Err(ConnectionError::Unsupported(format!(
            "needs a Koornwinder datum of rank >= {}, got {}",
            min_rank,
            d.describe()
        )));
    }
    Ok(())
}

/// Dynamical Yang-Baxter residual for s_i, s_{i+1} (1 <= i <= n-2) on B_n.
pub fn yb_residual(d: &Datum, i: usize, z: &[C64], xi: &[C64], num: &Numerics) -> Result<f64> {
    require_koornwinder(d, 3)?;
    if i == 0 || i + 2 > d.rank {
        return Err(ConnectionError::Unsupported(format!("index {} outside 1..={}", i, d.rank - 2)));
    }
    braid_residual(d, &[i, i + 1, i], &[i + 1, i, i + 1], z, xi, num)
}

/// Dynamical reflection equation residual for s_{n-1}, s_n on B_n.
pub fn reflection_residual(d: &Datum, z: &[C64], xi: &[C64], num: &Numerics) -> Result<f64> {
    require_koornwinder(d, 2)?;
    let n = d.rank;
    braid_residual(d, &[n - 1, n, n - 1, n], &[n, n - 1, n, n - 1], z, xi, num)
}

/// |Phi(s_i z, xi) - m_ee Phi(z, xi) - m_off Phi(z, s_{i*} xi)| relative to
/// the largest of the three terms, with Phi supplied by the caller.
pub fn connection_identity_residual(
    d: &Datum,
    i: usize,
    z: &[C64],
    xi: &[C64],
    phi: &dyn Fn(&[C64], &[C64]) -> Result<C64>,
    num: &Numerics,
) -> Result<f64> {
    let (ee, off) = m_simple(d, i, z, xi, num)?;
    let siz = d.weyl.apply_c(d.weyl.simple[i - 1], z);
    let sxi = d.weyl.apply_c(d.weyl.simple[d.istar(i) - 1], xi);
    let lhs = phi(&siz, xi)?;
    let (t1, t2) = (ee * phi(z, xi)?, off * phi(z, &sxi)?);
    let scale = lhs.norm().max(t1.norm()).max(t2.norm());
    Ok((lhs - t1 - t2).norm() / scale)
}

// ---- rank one: Askey-Wilson operator, Wronskian ----

fn qi2(d: &Datum, i: usize) -> f64 {
    d.q.powf(2.0 * d.alpha(i).muf)
}

/// Askey-Wilson weight w_i(x).
pub fn aw_weight(d: &Datum, i: usize, x: C64, num: &Numerics) -> C64 {
    let ctx = num.ctx.with_base(qi2(d, i));
    let qx = d.qpow(x);
    let mut den = Vec::with_capacity(8);
    for c in d.aw_params(d.simple[i - 1]) {
        den.push(qx * c);
        den.push(c / qx);
    }
    qpoch_inf_prod(&[qx * qx, 1.0 / (qx * qx)], &ctx) / qpoch_inf_prod(&den, &ctx)
}

/// Coefficient A_i(x) of the Askey-Wilson second order operator.
pub fn aw_coefficient(d: &Datum, i: usize, x: C64) -> C64 {
    let r = d.simple[i - 1];
    let qm = d.qpow(-x);
    let one = cr(1.0);
    let num: C64 = d.aw_params(r).iter().map(|&c| one - qm * c).product();
    let at = d.aw_params_dual(r)[0];
    num / (at * (one - qm * qm) * (one - qm * qm * qi2(d, i)))
}

/// (M_i g)(x) = A_i(x)(g(x - 2mu_i) - g(x)) + A_i(-x)(g(x + 2mu_i) - g(x)).
pub fn aw_operator(d: &Datum, i: usize, g: &dyn Fn(C64) -> C64, x: C64) -> C64 {
    let m2 = cr(2.0 * d.alpha(i).muf);
    let g0 = g(x);
    aw_coefficient(d, i, x) * (g(x - m2) - g0) + aw_coefficient(d, i, -x) * (g(x + m2) - g0)
}

/// Eigenvalue q^y + q^{-y} - a~_i - a~_i^{-1} of M_i on Phi_i(., xi).
pub fn aw_eigenvalue(d: &Datum, i: usize, y: C64) -> C64 {
    let at = d.aw_params_dual(d.simple[i - 1])[0];
    d.qpow(y) + d.qpow(-y) - at - 1.0 / at
}

/// First order operator (N_i g)(x) = B_i(x) g(x - mu_i) + B_i(-x) g(x + mu_i),
/// available when kappa on alpha_i^(1), 2 alpha_i^(1) agrees with kappa on
/// alpha_i, 2 alpha_i.
pub fn n_operator(d: &Datum, i: usize, g: &dyn Fn(C64) -> C64, x: C64) -> Result<C64> {
    let r = d.simple[i - 1];
    let k = d.kappa(r);
    if (k.alpha1 - k.alpha).abs() > 1e-14 || (k.two_alpha1 - k.two_alpha).abs() > 1e-14 {
        return Err(ConnectionError::Unsupported("N_i needs kappa(alpha^(1)) = kappa(alpha)".into()));
    }
    let [a, b, _, _] = d.aw_params(r);
    let mu = cr(d.alpha(i).muf);
    let bcoef = |x: C64| {
        let qm = d.qpow(-x);
        (cr(1.0) - qm * a) * (cr(1.0) - qm * b) / (d.q.powf(k.alpha) * (cr(1.0) - qm * qm))
    };
    Ok(bcoef(x) * g(x - mu) + bcoef(-x) * g(x + mu))
}

pub fn n_eigenvalue(d: &Datum, y: C64) -> C64 {
    d.qpow(y / 2.0) + d.qpow(-y / 2.0)
}

/// [f, g](x) = w_i(x) A_i(x) (f(x - 2mu_i) g(x) - f(x) g(x - 2mu_i)).
pub fn wronskian(d: &Datum, i: usize, f: &dyn Fn(C64) -> C64, g: &dyn Fn(C64) -> C64, x: C64, num: &Numerics) -> C64 {
    let m2 = cr(2.0 * d.alpha(i).muf);
    aw_weight(d, i, x, num) * aw_coefficient(d, i, x) * (f(x - m2) * g(x) - f(x) * g(x - m2))
}

/// Closed form of [Phi_i(., xi), Phi_i(., s_{i*} xi)](x).
pub fn wronskian_closed_form(d: &Datum, i: usize, x: C64, xi: &[C64], num: &Numerics) -> Result<C64> {
    let r = d.simple[i - 1];
    let y = d.alpha(d.istar(i)).tilde.pair(xi);
    let sxi = d.weyl.apply_c(d.weyl.simple[d.istar(i) - 1], xi);
    let ctx = num.ctx.with_base(qi2(d, i));
    let qx = d.qpow(x);
    let [a, b, c, dd] = d.aw_params(r);
    let den = guarded(
        "theta(a q^x, b q^x, c q^x, d q^x)",
        theta_prod(&[qx * a, qx * b, qx * c, qx * dd], &ctx)?,
        num.pole_guard,
    )?;
    let top = (d.qpow(-y) - d.qpow(y))
        * w_i(d, i, x, y)
        * w_i(d, i, x, -y)
        * gamma0(d, xi, &num.ctx)
        * gamma0(d, &sxi, &num.ctx)
        * theta(qx * qx, &ctx)?;
    Ok(top / (s_tilde(d, xi, &num.ctx) * s_tilde(d, &sxi, &num.ctx) * den))
}

/// (m_ee, m_off) at x = alpha_i(z) through Wronskians of a rank one
/// evaluator `phi(x, xi)` of Phi_i.
pub fn m_from_wronskians(
    d: &Datum,
    i: usize,
    x: C64,
    xi: &[C64],
    phi: &dyn Fn(C64, &[C64]) -> Result<C64>,
    num: &Numerics,
) -> Result<(C64, C64)> {
    let sxi = d.weyl.apply_c(d.weyl.simple[d.istar(i) - 1], xi);
    let m2 = cr(2.0 * d.alpha(i).muf);
    // tabulate the six values needed
    let p = |t: C64, e: &[C64]| phi(t, e);
    let (f0, f1) = (p(x, xi)?, p(x - m2, xi)?);
    let (g0, g1) = (p(x, &sxi)?, p(x - m2, &sxi)?);
    let (h0, h1) = (p(-x, xi)?, p(-x + m2, xi)?);
    let pre = aw_weight(d, i, x, num) * aw_coefficient(d, i, x);
    let w_fg = pre * (f1 * g0 - f0 * g1);
    let w_hg = pre * (h1 * g0 - h0 * g1);
    let w_hf = pre * (h1 * f0 - h0 * f1);
    let den = guarded("Wronskian [Phi_i(xi), Phi_i(s xi)]", w_fg, num.pole_guard * 1e-8)?;
    Ok((w_hg / den, -w_hf / den))
}

// ---- reflectionless multiplicities ----

#[derive(Clone, Debug, Serialize)]
pub struct IntegralityCondition {
    pub expr: String,
    pub value: f64,
    pub modulus: f64,
    pub holds: bool,
}

fn condition(expr: &str, value: f64, modulus: f64) -> IntegralityCondition {
    let r = value / modulus;
    IntegralityCondition { expr: expr.to_string(), value, modulus, holds: (r - r.round()).abs() < 1e-9 }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitCertificate {
    pub label: String,
    pub case: OrbitCase,
    pub mu: f64,
    pub conditions: Vec<IntegralityCondition>,
    /// The reduced form of the conditions for this orbit's case.
    pub reduced: Vec<IntegralityCondition>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReflectionlessCertificate {
    pub holds: bool,
    pub orbits: Vec<OrbitCertificate>,
}

/// Whether kappa satisfies the integrality conditions under which the
/// Macdonald-Ruijsenaars operators are reflectionless, orbit by orbit.
pub fn reflectionless(d: &Datum) -> ReflectionlessCertificate {
    let mut orbits = Vec::new();
    for (o, orbit) in d.orbits.iter().enumerate() {
        let mu = d.roots.iter().find(|r| r.orbit == o).map(|r| r.muf).unwrap_or(1.0);
        let k = orbit.kappa;
        let (a, a2, a1, a21) = (k.alpha, k.two_alpha, k.alpha1, k.two_alpha1);
        let conditions = vec![
            condition("k(a) + k(a1)", a + a1, mu),
            condition("k(a) - k(a1)", a - a1, mu),
            condition("k(2a) + k(2a1)", a2 + a21, mu),
            condition("k(2a) - k(2a1)", a2 - a21, mu),
            condition("k(a) + k(2a)", a + a2, mu),
            condition("k(a) - k(2a)", a - a2, mu),
            condition("k(a1) + k(2a1)", a1 + a21, mu),
            condition("k(a1) - k(2a1)", a1 - a21, mu),
            condition("k(a) + k(2a) + k(a1) + k(2a1)", a + a2 + a1 + a21, 2.0 * mu),
        ];
        let reduced = match orbit.case {
            OrbitCase::Ultraspherical => vec![condition("k(a)", a, mu / 2.0)],
            OrbitCase::JacobiFirst => vec![
                condition("k(a)", a, mu / 2.0),
                condition("k(a1)", a1, mu / 2.0),
                condition("k(a) + k(a1)", a + a1, mu),
            ],
            OrbitCase::JacobiSecond => vec![
                condition("k(a)", a, mu / 2.0),
                condition("k(2a)", a2, mu / 2.0),
                condition("k(a) + k(2a)", a + a2, mu),
            ],
            OrbitCase::AskeyWilson => conditions.clone(),
        };
        orbits.push(OrbitCertificate { label: orbit.label.clone(), case: orbit.case, mu, conditions, reduced });
    }
    let holds = orbits.iter().all(|o| o.conditions.iter().all(|c| c.holds));
    ReflectionlessCertificate { holds, orbits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harish_chandra::{phi_rank_one, HcSeries};
    use crate::root_data::{datum, Bullet, Family, Kappa, KappaSpec};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn aw_rank_one() -> Datum {
        let k = Kappa { alpha: 0.27, two_alpha: 0.11, alpha1: 0.18, two_alpha1: -0.07 };
        datum(Family::Koornwinder, 1, Bullet::T, &[("short", KappaSpec::full(k))], 0.45).unwrap()
    }

    fn b2() -> Datum {
        let short = Kappa { alpha: 0.3, two_alpha: 0.1, alpha1: 0.2, two_alpha1: -0.1 };
        datum(Family::Koornwinder, 2, Bullet::T, &[("long", KappaSpec::uniform(0.25)), ("short", KappaSpec::full(short))], 0.3).unwrap()
    }

    #[test]
    fn e_functions_are_2mu_periodic() {
        let d = aw_rank_one();
        let num = Numerics::new(&d, 10);
        let r = d.simple[0];
        let m2 = c(2.0 * d.roots[r].muf, 0.0);
        for (x, y) in [(c(0.3, 0.2), c(-0.4, 0.7)), (c(-1.1, 0.5), c(0.25, -0.3))] {
            let e = frak_e(&d, r, x, y, &num).unwrap();
            assert!((frak_e(&d, r, x + m2, y, &num).unwrap() - e).norm() < 1e-11 * e.norm());
            assert!((frak_e(&d, r, x, y + m2, &num).unwrap() - e).norm() < 1e-11 * e.norm());
            let et = frak_e_tilde(&d, r, x, y, &num).unwrap();
            assert!((frak_e_tilde(&d, r, x + m2, y, &num).unwrap() - et).norm() < 1e-11 * et.norm());
        }
    }

    #[test]
    fn e_tilde_is_e_of_dual() {
        let d = b2();
        let dual = d.dual();
        let num = Numerics::new(&d, 10);
        for i in 1..=2 {
            let r = d.simple[i - 1];
            let rt = dual.simple[i - 1];
            let (x, y) = (c(0.31, -0.2), c(-0.45, 0.35));
            let a = frak_e_tilde(&d, r, x, y, &num).unwrap();
            let b = frak_e(&dual, rt, x, y, &num).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm());
        }
    }

    #[test]
    fn ultraspherical_simplification() {
        let d = b2();
        let num = Numerics::new(&d, 10);
        let z = [c(0.4, 0.3), c(-0.2, 0.1)];
        let xi = [c(0.15, -0.3), c(0.4, 0.1)];
        let (a, b) = m_simple(&d, 1, &z, &xi, &num).unwrap();
        let (ca, cb) = m_simple_cus(&d, 1, &z, &xi, &num).unwrap();
        assert!((a - ca).norm() < 1e-11 * a.norm().max(1.0), "{} {}", a, ca);
        assert!((b - cb).norm() < 1e-11 * b.norm().max(1.0), "{} {}", b, cb);
        assert!(m_simple_cus(&d, 2, &z, &xi, &num).is_err());
    }

    #[test]
    fn rank_one_connection_closed_form() {
        let d = aw_rank_one();
        let num = Numerics::new(&d, 30);
        for (x, y) in [(c(0.2, 0.3), c(0.35, -0.2)), (c(-0.3, -0.25), c(-0.3, 0.45)), (c(0.05, 0.6), c(0.8, 0.1))] {
            let xi = [y];
            let (ee, off) = m_simple(&d, 1, &[x], &xi, &num).unwrap();
            let p = |t: C64, e: &[C64]| phi_rank_one(&d, 1, t, e, &num.ctx).unwrap();
            let lhs = p(-x, &xi);
            let rhs = ee * p(x, &xi) + off * p(x, &[-y]);
            assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(1.0), "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn wronskian_matches_closed_form_and_m() {
        let d = aw_rank_one();
        let num = Numerics::new(&d, 40);
        let x = c(0.5, 0.2);
        let xi = [c(0.3, -0.4)];
        let sxi = [-xi[0]];
        let f = |t: C64| phi_rank_one(&d, 1, t, &xi, &num.ctx).unwrap();
        let g = |t: C64| phi_rank_one(&d, 1, t, &sxi, &num.ctx).unwrap();
        assert!(wronskian(&d, 1, &f, &f, x, &num).norm() < 1e-14);
        let w = wronskian(&d, 1, &f, &g, x, &num);
        let closed = wronskian_closed_form(&d, 1, x, &xi, &num).unwrap();
        assert!((w - closed).norm() < 1e-9 * closed.norm(), "{} vs {}", w, closed);
        let phi = |t: C64, e: &[C64]| Ok(phi_rank_one(&d, 1, t, e, &num.ctx)?);
        let (a, b) = m_from_wronskians(&d, 1, x, &xi, &phi, &num).unwrap();
        let (ea, eb) = m_simple(&d, 1, &[x], &xi, &num).unwrap();
        assert!((a - ea).norm() < 1e-8 * ea.norm().max(1.0), "{} vs {}", a, ea);
        assert!((b - eb).norm() < 1e-8 * eb.norm().max(1.0), "{} vs {}", b, eb);
    }

    #[test]
    fn askey_wilson_eigenfunction() {
        let d = aw_rank_one();
        let num = Numerics::new(&d, 40);
        let xi = [c(0.3, -0.4)];
        let f = |t: C64| phi_rank_one(&d, 1, t, &xi, &num.ctx).unwrap();
        for x in [c(-0.8, 0.3), c(-0.4, -0.5)] {
            let lhs = aw_operator(&d, 1, &f, x);
            let rhs = aw_eigenvalue(&d, 1, xi[0]) * f(x);
            assert!((lhs - rhs).norm() < 1e-10 * f(x).norm(), "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn n_operator_factorizes_long_root() {
        let d = b2();
        let num = Numerics::new(&d, 40);
        let xi = [c(0.15, -0.3), c(0.4, 0.1)];
        let y = d.alpha(d.istar(1)).tilde.pair(&xi);
        let hc = HcSeries::new(&d, &xi, &num).unwrap();
        let f = |t: C64| hc.phi_rank_one(1, t);
        let x = c(-1.5, 0.2);
        let lhs = n_operator(&d, 1, &f, x).unwrap();
        assert!((lhs - n_eigenvalue(&d, y) * f(x)).norm() < 1e-9 * f(x).norm());
        assert!(n_operator(&d, 2, &f, x).is_err());
    }

    #[test]
    fn generator_sparsity_and_involution() {
        let d = b2();
        let num = Numerics::new(&d, 10);
        let z = [c(0.4, 0.3), c(-0.2, 0.1)];
        let xi = [c(0.15, -0.3), c(0.4, 0.1)];
        for i in 1..=2 {
            let m = generator(&d, i, &z, &xi, &num).unwrap();
            for col in 0..m.ncols() {
                let nz = (0..m.nrows()).filter(|&r| m[(r, col)].norm() > 1e-300).count();
                assert!(nz <= 2);
            }
            let back = word_product(&d, &[i, i], &z, &xi, &num).unwrap();
            let id = DMatrix::<C64>::identity(8, 8);
            assert!(rel_frobenius(&back, &id) < 1e-9, "{}", rel_frobenius(&back, &id));
        }
    }

    #[test]
    fn reflectionless_predicate_cases() {
        let d = datum(Family::SemisimpleA, 1, Bullet::U, &[("roots", KappaSpec::uniform(-0.5))], 0.4).unwrap();
        let cert = reflectionless(&d);
        assert!(cert.holds);
        assert!(cert.orbits[0].reduced.iter().all(|c| c.holds));
        let d = datum(Family::SemisimpleA, 1, Bullet::U, &[("roots", KappaSpec::uniform(0.5 * 2f64.sqrt()))], 0.4).unwrap();
        assert!(!reflectionless(&d).holds);
        let num = Numerics::new(&d, 10);
        let d = datum(Family::SemisimpleA, 2, Bullet::U, &[("roots", KappaSpec::uniform(-1.0))], 0.4).unwrap();
        assert!(reflectionless(&d).holds);
        let (ee, off) = m_simple(&d, 1, &[c(0.2, 0.1), c(-0.3, 0.2), c(0.1, -0.3)], &[c(0.3, 0.1), c(0.1, -0.2), c(-0.4, 0.1)], &num).unwrap();
        assert!(ee.norm() < 1e-10 && (off - 1.0).norm() < 1e-10, "{} {}", ee, off);
    }
}
