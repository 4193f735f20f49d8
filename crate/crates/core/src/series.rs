//! Truncated multivariate Laurent series in X_i = q^{-alpha_i(z)} and the
//! recurrence for the coefficients of the Harish-Chandra series.
//!
//! A series is an offset monomial times a power series graded by height in
//! the positive root cone; everything above `max_height` is discarded.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::qseries::{euler_coeffs, qpoch_inf, QContext};
use crate::root_data::{dot_f, dot_ff, rat_f64, Datum, RVec};

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("constant term vanishes; series is not invertible")]
    NotInvertible,
    #[error("recurrence denominator {value:.3e} at height {height} is below the pole guard")]
    NearPole { height: usize, value: f64 },
    #[error("leading exponent mismatch: residual {0:.3e}")]
    Indicial(f64),
}

/// Exponent vectors of the positive cone up to a height bound, sorted by height.
#[derive(Debug)]
pub struct MonomialIndex {
    pub rank: usize,
    pub max_height: usize,
    pub exps: Vec<Vec<u32>>,
    pub heights: Vec<usize>,
    /// `upto[h]` = number of monomials of height <= h.
    pub upto: Vec<usize>,
    dense: Vec<i32>,
}

impl MonomialIndex {
    pub fn new(rank: usize, max_height: usize) -> Arc<Self> {
        let side = max_height + 1;
        let mut exps: Vec<Vec<u32>> = Vec::new();
        let total = side.pow(rank as u32);
        for code in 0..total {
            let mut c = code;
            let e: Vec<u32> = (0..rank)
                .map(|_| {
                    let x = (c % side) as u32;
                    c /= side;
                    x
                })
                .collect();
            if e.iter().sum::<u32>() as usize <= max_height {
                exps.push(e);
            }
        }
        exps.sort_by(|a, b| {
            let ha: u32 = a.iter().sum();
            let hb: u32 = b.iter().sum();
            ha.cmp(&hb).then_with(|| b.cmp(a))
        });
        let heights: Vec<usize> = exps.iter().map(|e| e.iter().sum::<u32>() as usize).collect();
        let mut dense = vec![-1i32; total];
        for (i, e) in exps.iter().enumerate() {
            dense[Self::ravel_with(side, e)] = i as i32;
        }
        let upto = (0..=max_height).map(|h| heights.iter().filter(|&&x| x <= h).count()).collect();
        Arc::new(MonomialIndex { rank, max_height, exps, heights, upto, dense })
    }

    fn ravel_with(side: usize, e: &[u32]) -> usize {
        e.iter().rev().fold(0usize, |acc, &x| acc * side + x as usize)
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn find(&self, e: &[i64]) -> Option<usize> {
        if e.iter().any(|&x| x < 0) {
            return None;
        }
        if e.iter().sum::<i64>() as usize > self.max_height {
            return None;
        }
        let ue: Vec<u32> = e.iter().map(|&x| x as u32).collect();
        let i = self.dense[Self::ravel_with(self.max_height + 1, &ue)];
        (i >= 0).then_some(i as usize)
    }

    /// Index of the sum of two monomials, if within the truncation.
    pub fn sum_index(&self, i: usize, j: usize) -> Option<usize> {
        if self.heights[i] + self.heights[j] > self.max_height {
            return None;
        }
        let e: Vec<i64> = self.exps[i].iter().zip(&self.exps[j]).map(|(a, b)| (*a + *b) as i64).collect();
        self.find(&e)
    }

    /// Index of exps[i] - exps[j] if it lies in the positive cone.
    pub fn diff_index(&self, i: usize, j: usize) -> Option<usize> {
        let e: Vec<i64> = self.exps[i].iter().zip(&self.exps[j]).map(|(a, b)| *a as i64 - *b as i64).collect();
        self.find(&e)
    }
}

/// X^offset times a power series truncated at `idx.max_height`.
#[derive(Clone, Debug)]
pub struct TruncatedLaurent {
    pub idx: Arc<MonomialIndex>,
    pub offset: Vec<i64>,
    pub c: Vec<C64>,
}

impl TruncatedLaurent {
    pub fn zero(idx: &Arc<MonomialIndex>) -> Self {
        TruncatedLaurent { idx: idx.clone(), offset: vec![0; idx.rank], c: vec![C64::new(0.0, 0.0); idx.len()] }
    }

    pub fn one(idx: &Arc<MonomialIndex>) -> Self {
        let mut s = Self::zero(idx);
        s.c[0] = C64::new(1.0, 0.0);
        s
    }

    /// 1 - coeff X^e for an exponent vector lying in the positive or the
    /// negative cone.
    pub fn one_minus(idx: &Arc<MonomialIndex>, coeff: C64, e: &[i64]) -> Self {
        let mut s = Self::zero(idx);
        if e.iter().all(|&x| x >= 0) {
            s.c[0] = C64::new(1.0, 0.0);
            if let Some(k) = idx.find(e) {
                s.c[k] -= coeff;
            }
        } else {
            assert!(e.iter().all(|&x| x <= 0), "exponent must lie in a cone");
            // X^e (-coeff + X^{-e})
            s.offset = e.to_vec();
            s.c[0] = -coeff;
            let neg: Vec<i64> = e.iter().map(|x| -x).collect();
            if let Some(k) = idx.find(&neg) {
                s.c[k] += C64::new(1.0, 0.0);
            }
        }
        s
    }

    pub fn coeff(&self, e: &[i64]) -> C64 {
        let rel: Vec<i64> = e.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
        self.idx.find(&rel).map_or(C64::new(0.0, 0.0), |k| self.c[k])
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut o = self.clone();
        o.c.iter_mut().for_each(|x| *x *= s);
        o
    }

    pub fn mul(&self, o: &Self) -> Self {
        let idx = &self.idx;
        let mut out = Self::zero(idx);
        out.offset = self.offset.iter().zip(&o.offset).map(|(a, b)| a + b).collect();
        let n = idx.max_height;
        for i in 0..idx.len() {
            let a = self.c[i];
            if a.norm() == 0.0 {
                continue;
            }
            let lim = idx.upto[n - idx.heights[i]];
            for j in 0..lim {
                let b = o.c[j];
                if b.norm() == 0.0 {
                    continue;
                }
                if let Some(k) = idx.sum_index(i, j) {
                    out.c[k] += a * b;
                }
            }
        }
        out
    }

    /// Sum of two series; the result carries the componentwise minimum of
    /// the offsets and is truncated relative to it.
    pub fn add(&self, o: &Self) -> Self {
        let off: Vec<i64> = self.offset.iter().zip(&o.offset).map(|(a, b)| *a.min(b)).collect();
        let mut out = Self::zero(&self.idx);
        out.offset = off.clone();
        for s in [self, o] {
            let sh: Vec<i64> = s.offset.iter().zip(&off).map(|(a, b)| a - b).collect();
            for (i, e) in s.idx.exps.iter().enumerate() {
                let ne: Vec<i64> = e.iter().zip(&sh).map(|(a, b)| *a as i64 + b).collect();
                if let Some(k) = self.idx.find(&ne) {
                    out.c[k] += s.c[i];
                }
            }
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let a0 = self.c[0];
        if a0.norm() == 0.0 {
            return Err(SeriesError::NotInvertible);
        }
        let idx = &self.idx;
        let mut b = Self::zero(idx);
        b.offset = self.offset.iter().map(|x| -x).collect();
        b.c[0] = C64::new(1.0, 0.0) / a0;
        for g in 1..idx.len() {
            let mut acc = C64::new(0.0, 0.0);
            let hg = idx.heights[g];
            for j in 0..idx.upto[hg - 1] {
                if let Some(d) = idx.diff_index(g, j) {
                    acc += self.c[d] * b.c[j];
                }
            }
            b.c[g] = -acc / a0;
        }
        Ok(b)
    }

    pub fn divide(&self, o: &Self) -> Result<Self, SeriesError> {
        Ok(self.mul(&o.invert()?))
    }

    /// Effect of z -> z + mu on the series, given the values alpha_i(mu) of
    /// the simple roots: the coefficient of X^beta picks up q^{-beta(mu)}.
    pub fn shift_var(&self, q: f64, simple_at_mu: &[C64]) -> Self {
        let lnq = q.ln();
        let mut out = self.clone();
        for (i, e) in self.idx.exps.iter().enumerate() {
            let mut ex = C64::new(0.0, 0.0);
            for k in 0..self.idx.rank {
                ex += simple_at_mu[k] * (e[k] as i64 + self.offset[k]) as f64;
            }
            out.c[i] *= (-ex * lnq).exp();
        }
        out
    }

    /// Value at the point with coordinates X_i.
    pub fn eval(&self, x: &[C64]) -> C64 {
        let n = self.idx.max_height;
        let pows: Vec<Vec<C64>> = x
            .iter()
            .map(|&xi| {
                let mut p = Vec::with_capacity(n + 1);
                let mut t = C64::new(1.0, 0.0);
                for _ in 0..=n {
                    p.push(t);
                    t *= xi;
                }
                p
            })
            .collect();
        let mut sum = C64::new(0.0, 0.0);
        for (i, e) in self.idx.exps.iter().enumerate() {
            let mut m = self.c[i];
            for k in 0..self.idx.rank {
                m *= pows[k][e[k] as usize];
            }
            sum += m;
        }
        let mut off = C64::new(1.0, 0.0);
        for k in 0..self.idx.rank {
            off *= x[k].powi(self.offset[k] as i32);
        }
        sum * off
    }

    /// Largest |coefficient| among monomials of exactly the given height.
    pub fn height_norm(&self, h: usize) -> f64 {
        (0..self.idx.len()).filter(|&i| self.idx.heights[i] == h).map(|i| self.c[i].norm()).fold(0.0, f64::max)
    }
}

/// Coordinates X_i = q^{-alpha_i(z)}.
pub fn x_coords(d: &Datum, z: &[C64]) -> Vec<C64> {
    let lnq = d.q.ln();
    (1..=d.rank).map(|i| (-d.alpha(i).v.pair(z) * lnq).exp()).collect()
}

/// One linear factor (1 - coeff q^{k beta(y)}) of the operator coefficient.
#[derive(Clone, Copy, Debug)]
pub struct LinFactor {
    pub coeff: f64,
    pub root: usize,
    pub k: i64,
}

/// Numerator and denominator factors of the coefficient A of the
/// quasi-minuscule operator, as products of (1 - C q^{k beta(y)}).
pub fn a_factors(d: &Datum) -> (Vec<LinFactor>, Vec<LinFactor>) {
    let psi = d.psi;
    let [a, b, c, dd] = d.aw_params(psi);
    let qpsi = d.q.powf(d.roots[psi].muf);
    let mut num: Vec<LinFactor> = [a, b, c, dd].iter().map(|&coeff| LinFactor { coeff, root: psi, k: 1 }).collect();
    let mut den = vec![LinFactor { coeff: 1.0, root: psi, k: 2 }, LinFactor { coeff: qpsi * qpsi, root: psi, k: 2 }];
    let psit = d.psi_tilde();
    for r in d.positive_roots() {
        let p = psit.dot(&d.roots[r].tilde_coroot);
        if p == num_rational::Rational64::from_integer(1) {
            let [a, b, _, _] = d.aw_params(r);
            num.push(LinFactor { coeff: a, root: r, k: 1 });
            num.push(LinFactor { coeff: b, root: r, k: 1 });
            den.push(LinFactor { coeff: 1.0, root: r, k: 2 });
        }
    }
    (num, den)
}

/// A(y), evaluated directly.
pub fn a_coefficient(d: &Datum, y: &[C64]) -> C64 {
    let (num, den) = a_factors(d);
    let one = C64::new(1.0, 0.0);
    let f = |l: &LinFactor| one - d.qpow(d.roots[l.root].v.pair(y) * l.k as f64) * l.coeff;
    num.iter().map(f).product::<C64>() / den.iter().map(f).product::<C64>()
}

/// Series expansion of z -> A(w^{-1} z) in the variables X_i.
pub fn expand_a_shifted(d: &Datum, w: usize, idx: &Arc<MonomialIndex>) -> Result<TruncatedLaurent, SeriesError> {
    let (num, den) = a_factors(d);
    let factor = |l: &LinFactor| {
        let g = d.root_action[w][l.root];
        // q^{k gamma(z)} = X^{-k gamma}
        let e: Vec<i64> = d.roots[g].coords.iter().map(|x| -x * l.k).collect();
        TruncatedLaurent::one_minus(idx, C64::new(l.coeff, 0.0), &e)
    };
    let mut s = TruncatedLaurent::one(idx);
    for l in &num {
        s = s.mul(&factor(l));
    }
    for l in &den {
        s = s.mul(&factor(l).invert()?);
    }
    Ok(s)
}

/// S(z): product over positive roots of (q_a^2 C^{-1} q^{-alpha(z)}; q_a^2)_inf
/// for C among the Askey-Wilson parameters.
pub fn s_factor(d: &Datum, z: &[C64], ctx: &QContext) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    for r in d.positive_roots() {
        let q2 = d.q.powf(2.0 * d.roots[r].muf);
        let ctx2 = ctx.with_base(q2);
        let x = d.qpow(-d.roots[r].v.pair(z));
        for cc in d.aw_params(r) {
            p *= qpoch_inf(x * (q2 / cc), &ctx2);
        }
    }
    p
}

/// Series expansion of S(z) in the variables X_i.
pub fn s_series(d: &Datum, idx: &Arc<MonomialIndex>) -> TruncatedLaurent {
    let mut s = TruncatedLaurent::one(idx);
    for r in d.positive_roots() {
        let ht = d.roots[r].height() as usize;
        let deg = idx.max_height / ht;
        let q2 = d.q.powf(2.0 * d.roots[r].muf);
        let e = euler_coeffs(q2, deg);
        for cc in d.aw_params(r) {
            let y = q2 / cc;
            let mut f = TruncatedLaurent::zero(idx);
            let mut yk = 1.0;
            for (m, coeff) in e.iter().enumerate() {
                let ex: Vec<i64> = d.roots[r].coords.iter().map(|x| x * m as i64).collect();
                if let Some(k) = idx.find(&ex) {
                    f.c[k] += C64::new(coeff * yk, 0.0);
                }
                yk *= y;
            }
            s = s.mul(&f);
        }
    }
    s
}

/// Gamma_0(xi) = prod over positive roots of (q_a^2 q^{-2 alpha~(xi)}; q_a^2)_inf.
pub fn gamma0(d: &Datum, xi: &[C64], ctx: &QContext) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    for r in d.positive_roots() {
        let q2 = d.q.powf(2.0 * d.roots[r].muf);
        let x = d.qpow(-d.roots[r].tilde.pair(xi) * 2.0);
        p *= qpoch_inf(x * q2, &ctx.with_base(q2));
    }
    p
}

/// Eigenvalue of the quasi-minuscule operator: sum over the orbit of psi~ of q^{(w psi~, xi)}.
pub fn eigenvalue(d: &Datum, xi: &[C64]) -> C64 {
    d.orbit_of(d.psi_tilde()).iter().map(|v| d.qpow(v.pair(xi))).sum()
}

/// Solution of the coefficient recurrence at a fixed spectral point.
#[derive(Clone, Debug)]
pub struct GammaTable {
    pub xi: Vec<C64>,
    /// Power series F with Phi = W F / S~(xi); its coefficients are the
    /// Gamma-hat coefficients up to a constant.
    pub f: TruncatedLaurent,
    /// Power series Psi = S F with coefficients Gamma_alpha(xi).
    pub psi: TruncatedLaurent,
    pub gamma0: C64,
    /// Smallest |recurrence denominator| over nonzero heights.
    pub min_denominator: f64,
    /// |leading denominator| relative to the eigenvalue scale.
    pub indicial_residual: f64,
}

/// Solve the recurrence for the coefficients of the series at spectral point xi.
pub fn solve_gamma(
    d: &Datum,
    xi: &[C64],
    max_height: usize,
    pole_guard: f64,
    ctx: &QContext,
) -> Result<GammaTable, SeriesError> {
    let idx = MonomialIndex::new(d.rank, max_height);
    let reps = d.coset_reps(d.psi_tilde());
    let rho = &d.rho;
    let psit = d.psi_tilde().to_f64();
    let w0 = d.w0();
    let pref = d.q.powf(-dot_ff(rho, &psit));
    let kconst: f64 = reps.iter().map(|(_, v)| d.q.powf(-dot_ff(rho, &v.to_f64()))).sum();
    let e = eigenvalue(d, xi);
    let rho_minus_xi: Vec<C64> = rho.iter().zip(xi).map(|(r, x)| C64::new(*r, 0.0) - x).collect();

    // per coset: coefficient series and the shift multipliers t_w(alpha) = s_w(alpha) - 1
    let mut bser: Vec<TruncatedLaurent> = Vec::new();
    let mut tw: Vec<Vec<C64>> = Vec::new();
    for (w, v) in &reps {
        let a = expand_a_shifted(d, *w, &idx)?;
        debug_assert!(a.offset.iter().all(|&x| x == 0));
        bser.push(a.scale(C64::new(pref, 0.0)));
        let vf = v.to_f64();
        let w0v = d.weyl.apply_f(w0, &vf);
        let base = d.qpow(dot_f(&w0v, &rho_minus_xi));
        let simple_pair: Vec<f64> = (1..=d.rank).map(|i| dot_ff(&d.alpha(i).vf, &vf)).collect();
        let t: Vec<C64> = idx
            .exps
            .iter()
            .map(|ex| {
                let p: f64 = ex.iter().zip(&simple_pair).map(|(k, s)| *k as f64 * s).sum();
                base * d.q.powf(-p) - C64::new(1.0, 0.0)
            })
            .collect();
        tw.push(t);
    }
    let diag = |g: usize| -> C64 {
        let mut s = C64::new(kconst, 0.0) - e;
        for (b, t) in bser.iter().zip(&tw) {
            s += b.c[0] * t[g];
        }
        s
    };
    let scale = e.norm().max(kconst.abs()).max(1.0);
    let indicial = diag(0).norm() / scale;
    if indicial > 1e-9 {
        return Err(SeriesError::Indicial(indicial));
    }
    let g0 = gamma0(d, xi, ctx);
    let mut f = TruncatedLaurent::zero(&idx);
    f.c[0] = g0;
    let mut acc = vec![C64::new(0.0, 0.0); idx.len()];
    let mut min_den = f64::INFINITY;
    for g in 0..idx.len() {
        if g > 0 {
            let dg = diag(g);
            if dg.norm() < pole_guard * scale {
                return Err(SeriesError::NearPole { height: idx.heights[g], value: dg.norm() });
            }
            min_den = min_den.min(dg.norm() / scale);
            f.c[g] = -acc[g] / dg;
        }
        // push contributions of f_g to higher monomials
        let fg = f.c[g];
        if fg.norm() == 0.0 {
            continue;
        }
        let lim = idx.upto[max_height - idx.heights[g]];
        let mult: Vec<C64> = tw.iter().map(|t| t[g] * fg).collect();
        for dlt in 1..lim {
            let mut s = C64::new(0.0, 0.0);
            for (b, m) in bser.iter().zip(&mult) {
                s += b.c[dlt] * m;
            }
            if let Some(k) = idx.sum_index(g, dlt) {
                acc[k] += s;
            }
        }
    }
    let psi = s_series(d, &idx).mul(&f);
    Ok(GammaTable { xi: xi.to_vec(), f, psi, gamma0: g0, min_denominator: min_den, indicial_residual: indicial })
}

/// The plane wave W(z, xi) = q^{(rho - xi, rho~ + w_0 z)}.
pub fn plane_wave(d: &Datum, z: &[C64], xi: &[C64]) -> C64 {
    let w0z = d.weyl.apply_c(d.w0(), z);
    let mut s = C64::new(0.0, 0.0);
    for j in 0..d.dim {
        s += (C64::new(d.rho[j], 0.0) - xi[j]) * (w0z[j] + d.rho_tilde[j]);
    }
    d.qpow(s)
}

/// Helper for tests and diagnostics: values alpha_i(mu) of the simple roots at a real vector.
pub fn simple_values(d: &Datum, mu: &RVec) -> Vec<C64> {
    (1..=d.rank).map(|i| C64::new(rat_f64(&d.alpha(i).v.dot(mu)), 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::{datum, Bullet, Family, Kappa, KappaSpec};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_series(idx: &Arc<MonomialIndex>, seed: u64) -> TruncatedLaurent {
        let mut s = TruncatedLaurent::zero(idx);
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        for v in s.c.iter_mut() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((x >> 33) as f64 / (1u64 << 31) as f64) - 0.5;
            let b = ((x >> 11 & 0xfffff) as f64 / (1u64 << 20) as f64) - 0.5;
            *v = c(a, b);
        }
        s.c[0] += c(2.0, 0.0);
        s
    }

    #[test]
    fn index_sizes() {
        let idx = MonomialIndex::new(2, 24);
        assert_eq!(idx.len(), 325);
        assert_eq!(idx.heights[0], 0);
        let idx3 = MonomialIndex::new(3, 6);
        assert_eq!(idx3.len(), 84);
    }

    #[test]
    fn inverse_roundtrip() {
        let idx = MonomialIndex::new(2, 10);
        let a = random_series(&idx, 7);
        let p = a.mul(&a.invert().unwrap());
        assert!((p.c[0] - c(1.0, 0.0)).norm() < 1e-13);
        assert!(p.c[1..].iter().all(|x| x.norm() < 1e-11));
    }

    #[test]
    fn product_is_graded_exact() {
        // (1 - X1)(1 + X1) = 1 - X1^2 exactly at height 2
        let idx = MonomialIndex::new(2, 2);
        let a = TruncatedLaurent::one_minus(&idx, c(1.0, 0.0), &[1, 0]);
        let b = TruncatedLaurent::one_minus(&idx, c(-1.0, 0.0), &[1, 0]);
        let p = a.mul(&b);
        assert_eq!(p.coeff(&[2, 0]), c(-1.0, 0.0));
        assert_eq!(p.coeff(&[1, 0]), c(0.0, 0.0));
    }

    #[test]
    fn negative_cone_factor_offsets() {
        let idx = MonomialIndex::new(1, 4);
        let f = TruncatedLaurent::one_minus(&idx, c(0.5, 0.0), &[-2]);
        assert_eq!(f.offset, vec![-2]);
        let x = [c(0.3, 0.1)];
        let direct = c(1.0, 0.0) - x[0].powi(-2) * 0.5;
        assert!((f.eval(&x) - direct).norm() < 1e-13);
    }

    #[test]
    fn operator_coefficient_expansion_matches_direct_value() {
        let d = datum(
            Family::Koornwinder,
            2,
            Bullet::T,
            &[
                ("short", KappaSpec::full(Kappa { alpha: 0.3, two_alpha: 0.1, alpha1: 0.2, two_alpha1: -0.05 })),
                ("long", KappaSpec::uniform(0.2)),
            ],
            0.4,
        )
        .unwrap();
        let idx = MonomialIndex::new(2, 40);
        // deep in the negative chamber the series converges fast
        let z = [c(-3.1, 0.2), c(-1.4, -0.3)];
        let x = x_coords(&d, &z);
        for (w, _) in d.coset_reps(d.psi_tilde()) {
            let s = expand_a_shifted(&d, w, &idx).unwrap();
            assert!(s.offset.iter().all(|&o| o == 0));
            let y = d.weyl.apply_c(d.weyl.inv[w], &z);
            let direct = a_coefficient(&d, &y);
            assert!((s.eval(&x) - direct).norm() < 1e-10 * direct.norm(), "w = {}", w);
        }
    }

    #[test]
    fn s_series_matches_product() {
        let d = datum(Family::Gl, 2, Bullet::U, &[("roots", KappaSpec::uniform(0.3))], 0.45).unwrap();
        let idx = MonomialIndex::new(2, 40);
        let z = [c(-1.0, 0.1), c(0.2, -0.2), c(0.9, 0.05)];
        let x = x_coords(&d, &z);
        let ctx = QContext::new(d.q);
        let s = s_series(&d, &idx);
        let direct = s_factor(&d, &z, &ctx);
        assert!((s.eval(&x) - direct).norm() < 1e-12 * direct.norm());
    }

    proptest! {
        #[test]
        fn multiplication_commutes_and_associates(s1 in 0u64..1000, s2 in 0u64..1000, s3 in 0u64..1000) {
            let idx = MonomialIndex::new(2, 8);
            let (a, b, cc) = (random_series(&idx, s1), random_series(&idx, s2), random_series(&idx, s3));
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            let l = ab.mul(&cc);
            let r = a.mul(&b.mul(&cc));
            for i in 0..idx.len() {
                prop_assert!((ab.c[i] - ba.c[i]).norm() < 1e-12);
                prop_assert!((l.c[i] - r.c[i]).norm() < 1e-10 * (1.0 + l.c[i].norm()));
            }
        }
    }
}
