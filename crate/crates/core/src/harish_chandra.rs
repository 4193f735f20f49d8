//! Evaluation of the Harish-Chandra series Phi(z, xi), its rank one closed
//! form, the Gamma-hat expansion and the symmetrized series.

use std::collections::HashSet;

use num_complex::Complex64 as C64;

use crate::qseries::{qpoch_inf, qpoch_inf_prod, w8_7, QContext, QSeriesError};
use crate::root_data::Datum;
use crate::series::{gamma0, plane_wave, s_factor, solve_gamma, x_coords, GammaTable, SeriesError, TruncatedLaurent};

/// Numerical controls shared by the evaluators.
#[derive(Clone, Copy, Debug)]
pub struct Numerics {
    pub trunc: usize,
    pub pole_guard: f64,
    pub ctx: QContext,
}

impl Numerics {
    pub fn new(d: &Datum, trunc: usize) -> Self {
        Numerics { trunc, pole_guard: 1e-8, ctx: QContext::new(d.q) }
    }
}

/// Phi(., xi) for a fixed spectral point, backed by its coefficient table.
#[derive(Clone, Debug)]
pub struct HcSeries<'a> {
    pub datum: &'a Datum,
    pub table: GammaTable,
    pub s_tilde: C64,
    pub ctx: QContext,
}

impl<'a> HcSeries<'a> {
    pub fn new(d: &'a Datum, xi: &[C64], num: &Numerics) -> Result<Self, SeriesError> {
        let table = solve_gamma(d, xi, num.trunc, num.pole_guard, &num.ctx)?;
        let s_tilde = s_tilde(d, xi, &num.ctx);
        Ok(HcSeries { datum: d, table, s_tilde, ctx: num.ctx })
    }

    /// Psi(z, xi) from the truncated coefficient table.
    pub fn psi(&self, z: &[C64]) -> C64 {
        self.table.psi.eval(&x_coords(self.datum, z))
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let d = self.datum;
        let w = plane_wave(d, z, &self.table.xi);
        w * self.psi(z) / (s_factor(d, z, &self.ctx) * self.s_tilde)
    }

    /// Largest term |Gamma_alpha X^alpha| at the top truncation height, a
    /// proxy for the truncation error at z.
    pub fn tail_estimate(&self, z: &[C64]) -> f64 {
        let x = x_coords(self.datum, z);
        let idx = &self.table.psi.idx;
        let top = idx.max_height;
        let mut m: f64 = 0.0;
        for (i, e) in idx.exps.iter().enumerate() {
            if idx.heights[i] == top {
                let mut t = self.table.psi.c[i].norm();
                for k in 0..idx.rank {
                    t *= x[k].norm().powi(e[k] as i32);
                }
                m = m.max(t);
            }
        }
        m
    }

    /// Psi_i(x, xi): the coefficients along the ray of alpha_i.
    pub fn psi_ray(&self, i: usize, x: C64) -> C64 {
        let idx = &self.table.psi.idx;
        let mut sum = C64::new(0.0, 0.0);
        let qx = self.datum.qpow(-x);
        let mut p = C64::new(1.0, 0.0);
        for r in 0..=idx.max_height {
            let mut e = vec![0i64; idx.rank];
            e[i - 1] = r as i64;
            sum += self.table.psi.coeff(&e) * p;
            p *= qx;
        }
        sum
    }

    /// Phi_i(x, xi) computed from the coefficient table.
    pub fn phi_rank_one(&self, i: usize, x: C64) -> C64 {
        let d = self.datum;
        let y = d.roots[d.simple[d.istar(i) - 1]].tilde.pair(&self.table.xi);
        w_i(d, i, x, y) * self.psi_ray(i, x) / (s_i(d, i, x, &self.ctx) * self.s_tilde)
    }

    /// Gamma-hat coefficients: Psi divided by the expansion of S, scaled by
    /// q^{(rho~, rho - xi)} / S~(xi).
    pub fn gamma_hat(&self) -> Result<TruncatedLaurent, SeriesError> {
        let d = self.datum;
        let s = crate::series::s_series(d, &self.table.psi.idx);
        let f = self.table.psi.divide(&s)?;
        let mut e = C64::new(0.0, 0.0);
        for j in 0..d.dim {
            e += (C64::new(d.rho[j], 0.0) - self.table.xi[j]) * d.rho_tilde[j];
        }
        Ok(f.scale(d.qpow(e) / self.s_tilde))
    }
}

/// S~(xi): the singular factor of the dual datum.
pub fn s_tilde(d: &Datum, xi: &[C64], ctx: &QContext) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    for r in d.positive_roots() {
        let q2 = d.q.powf(2.0 * d.roots[r].muf);
        let ctx2 = ctx.with_base(q2);
        let x = d.qpow(-d.roots[r].tilde.pair(xi));
        for cc in d.aw_params_dual(r) {
            p *= qpoch_inf(x * (q2 / cc), &ctx2);
        }
    }
    p
}

/// Phi(z, xi) at a single point.
pub fn phi(d: &Datum, z: &[C64], xi: &[C64], num: &Numerics) -> Result<C64, SeriesError> {
    Ok(HcSeries::new(d, xi, num)?.eval(z))
}

/// Phi of the dual datum with the roles of the arguments exchanged,
/// i.e. the right hand side of the self-duality relation.
pub fn phi_dual(dual: &Datum, z: &[C64], xi: &[C64], num: &Numerics) -> Result<C64, SeriesError> {
    phi(dual, xi, z, num)
}

/// Symmetrized series: sum over w in W_0 of Phi(z, w xi).
pub fn phi_plus(d: &Datum, z: &[C64], xi: &[C64], num: &Numerics) -> Result<C64, SeriesError> {
    let mut s = C64::new(0.0, 0.0);
    for w in 0..d.weyl.order() {
        let wxi = d.weyl.apply_c(w, xi);
        s += phi(d, z, &wxi, num)?;
    }
    Ok(s)
}

/// One-variable plane wave W_i(x, y).
pub fn w_i(d: &Datum, i: usize, x: C64, y: C64) -> C64 {
    let r = &d.roots[d.simple[i - 1]];
    let k = d.kappa(d.simple[i - 1]);
    let e = (C64::new(k.alpha + k.two_alpha, 0.0) - x) * (C64::new(k.alpha + k.alpha1, 0.0) - y) / (2.0 * r.muf);
    d.qpow(e)
}

/// S_i(x) = (q_i^2 a^{-1} q^{-x}, ..., q_i^2 d^{-1} q^{-x}; q_i^2)_inf.
pub fn s_i(d: &Datum, i: usize, x: C64, ctx: &QContext) -> C64 {
    let r = d.simple[i - 1];
    let q2 = d.q.powf(2.0 * d.roots[r].muf);
    let qx = d.qpow(-x);
    let ctx2 = ctx.with_base(q2);
    d.aw_params(r).iter().map(|c| qpoch_inf(qx * (q2 / c), &ctx2)).product()
}

/// Closed form of Phi_i(x, xi) through a very-well-poised 8W7 series;
/// needs |d_i q^{-x}| < 1.
pub fn phi_rank_one(d: &Datum, i: usize, x: C64, xi: &[C64], ctx: &QContext) -> Result<C64, QSeriesError> {
    let r = d.simple[i - 1];
    let y = d.roots[d.simple[d.istar(i) - 1]].tilde.pair(xi);
    let [a, b, c, dd] = d.aw_params(r);
    let [at, bt, ct, dt] = d.aw_params_dual(r);
    let qi2 = d.q.powf(2.0 * d.roots[r].muf);
    let c2 = ctx.with_base(qi2);
    let qx = d.qpow(-x);
    let qy = d.qpow(-y);
    let big_x = qx * qy;
    let front = w_i(d, i, x, y) * gamma0(d, xi, ctx) / (s_i(d, i, x, ctx) * s_tilde(d, xi, ctx));
    let num = qpoch_inf_prod(
        &[big_x * (qi2 * a / at), big_x * (qi2 * b / at), big_x * (qi2 * c / at), big_x * (qi2 * at / dd), qx * dd],
        &c2,
    );
    let den = qpoch_inf(qx * qy * qy * (qi2 * qi2 / dd), &c2);
    let w = w8_7(
        qx * qy * qy * (qi2 / dd),
        [qy * (qi2 / at), qy * (qi2 / dt), qy * bt, qy * ct, qx * (qi2 / dd)],
        qx * dd,
        &c2,
    )?;
    Ok(front * num / den * w)
}

/// Phi(z, xi) from a Gamma-hat table:
/// q^{-(rho + w_0 xi, z)} sum_alpha Gamma-hat_alpha q^{-alpha(z)}.
pub fn phi_from_gamma_hat(d: &Datum, gh: &TruncatedLaurent, z: &[C64], xi: &[C64]) -> C64 {
    let w0xi = d.weyl.apply_c(d.w0(), xi);
    let e: C64 = (0..d.dim).map(|j| (d.rho[j] + w0xi[j]) * z[j]).sum();
    d.qpow(-e) * gh.eval(&x_coords(d, z))
}

/// The box of exponents 1/2 sum_{beta > 0} l_beta beta with
/// 0 <= l_beta <= -4 kappa_beta / mu_beta, as doubled simple root
/// coordinates. `None` unless every bound is a nonnegative integer.
pub fn ba_box(d: &Datum) -> Option<HashSet<Vec<i64>>> {
    let pos: Vec<usize> = d.positive_roots().collect();
    let mut bounds = Vec::with_capacity(pos.len());
    for &r in &pos {
        let b = -4.0 * d.kappa(r).alpha / d.roots[r].muf;
        if b < -1e-9 || (b - b.round()).abs() > 1e-9 {
            return None;
        }
        bounds.push(b.round() as i64);
    }
    let mut out = HashSet::new();
    out.insert(vec![0i64; d.rank]);
    for (k, &r) in pos.iter().enumerate() {
        let mut next = HashSet::new();
        for v in &out {
            for l in 0..=bounds[k] {
                next.insert(v.iter().zip(&d.roots[r].coords).map(|(a, c)| a + l * c).collect::<Vec<i64>>());
            }
        }
        out = next;
    }
    Some(out)
}

/// Largest |Gamma-hat_alpha| / |Gamma-hat_0| over the exponents alpha
/// outside the box, with the offending exponent.
pub fn gamma_hat_box_defect(d: &Datum, gh: &TruncatedLaurent) -> Option<(f64, Vec<i64>)> {
    let bx = ba_box(d)?;
    let g0 = gh.coeff(&vec![0; d.rank]).norm();
    let mut worst = (0.0, vec![0; d.rank]);
    for (k, e) in gh.idx.exps.iter().enumerate() {
        let alpha: Vec<i64> = e.iter().zip(&gh.offset).map(|(a, b)| *a as i64 + b).collect();
        let doubled: Vec<i64> = alpha.iter().map(|a| 2 * a).collect();
        if bx.contains(&doubled) {
            continue;
        }
        let r = gh.c[k].norm() / g0;
        if r > worst.0 {
            worst = (r, alpha);
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::{datum, Bullet, Family, Kappa, KappaSpec};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn aw_rank_one() -> Datum {
        let k = Kappa { alpha: 0.27, two_alpha: 0.11, alpha1: 0.18, two_alpha1: -0.07 };
        datum(Family::Koornwinder, 1, Bullet::T, &[("short", KappaSpec::full(k))], 0.45).unwrap()
    }

    #[test]
    fn recurrence_matches_closed_form_rank_one() {
        let d = aw_rank_one();
        let num = Numerics::new(&d, 30);
        for (x, y) in [(c(-0.4, 0.3), c(0.35, -0.2)), (c(0.1, -0.25), c(-0.3, 0.45)), (c(-1.2, 0.1), c(0.8, 0.6))] {
            let z = [x];
            let xi = [y];
            let series = HcSeries::new(&d, &xi, &num).unwrap().eval(&z);
            let closed = phi_rank_one(&d, 1, x, &xi, &num.ctx).unwrap();
            assert!((series - closed).norm() < 1e-9 * closed.norm(), "{} vs {}", series, closed);
        }
    }

    #[test]
    fn gamma_hat_leading_coefficient() {
        let d = aw_rank_one();
        let num = Numerics::new(&d, 12);
        let xi = [c(0.2, 0.3)];
        let hc = HcSeries::new(&d, &xi, &num).unwrap();
        let gh = hc.gamma_hat().unwrap();
        let mut e = C64::new(0.0, 0.0);
        for j in 0..d.dim {
            e += (C64::new(d.rho[j], 0.0) - xi[j]) * d.rho_tilde[j];
        }
        let expect = d.qpow(e) * hc.table.gamma0 / hc.s_tilde;
        assert!((gh.c[0] - expect).norm() < 1e-13 * expect.norm());
    }

    #[test]
    fn gamma_hat_sum_reproduces_phi() {
        let d = aw_rank_one();
        let num = Numerics::new(&d, 30);
        let xi = [c(0.2, 0.3)];
        let hc = HcSeries::new(&d, &xi, &num).unwrap();
        let gh = hc.gamma_hat().unwrap();
        let z = [c(-1.5, 0.2)];
        let a = hc.eval(&z);
        let b = phi_from_gamma_hat(&d, &gh, &z, &xi);
        assert!((a - b).norm() < 1e-9 * a.norm(), "{} vs {}", a, b);
    }

    #[test]
    fn gamma_hat_vanishes_outside_box() {
        let d = datum(Family::SemisimpleA, 1, Bullet::U, &[("roots", KappaSpec::uniform(-0.5))], 0.4).unwrap();
        let num = Numerics::new(&d, 20);
        let xi = d.weyl.apply_c(0, &[c(0.37, 0.21), c(-0.37, -0.21)]);
        let gh = HcSeries::new(&d, &xi, &num).unwrap().gamma_hat().unwrap();
        let (worst, at) = gamma_hat_box_defect(&d, &gh).unwrap();
        assert!(worst < 1e-9, "{} at {:?}", worst, at);
        assert!(gh.coeff(&[1]).norm() > 1e-3 * gh.coeff(&[0]).norm());
    }

    #[test]
    fn reflectionless_phi_invariance() {
        let d = datum(Family::SemisimpleA, 2, Bullet::U, &[("roots", KappaSpec::uniform(-0.5))], 0.4).unwrap();
        assert!(crate::connection::reflectionless(&d).holds);
        let num = Numerics::new(&d, 8);
        let xi = crate::sample::point_from_values(&d, &crate::sample::dual_simple_forms(&d), &[c(0.31, 0.42), c(-0.27, 0.15)], &[]);
        let z = crate::sample::point_from_values(&d, &crate::sample::simple_forms(&d), &[c(0.6, -0.3), c(-0.2, 0.5)], &[]);
        let gh = HcSeries::new(&d, &xi, &num).unwrap().gamma_hat().unwrap();
        assert!(gamma_hat_box_defect(&d, &gh).unwrap().0 < 1e-9);
        let base = phi_from_gamma_hat(&d, &gh, &z, &xi);
        let w0 = d.w0();
        for w in 0..d.weyl.order() {
            let v = d.weyl.mul[d.weyl.mul[w0][w]][w0];
            let xi2 = d.weyl.apply_c(v, &xi);
            let gh2 = HcSeries::new(&d, &xi2, &num).unwrap().gamma_hat().unwrap();
            let val = phi_from_gamma_hat(&d, &gh2, &d.weyl.apply_c(w, &z), &xi2);
            assert!((val - base).norm() < 1e-7 * base.norm().max(1.0), "w={} {} vs {}", w, val, base);
        }
    }
}
