//! Difference-reflection operators: Demazure-Lusztig operators, the
//! commuting Y operators, the symmetric operators extracted from them and
//! the explicit quasi-minuscule operator.
//!
//! An operator is a finite sum sum_j c_j(z) w_j^ with (w^ f)(z) = f(w^{-1} z).
//! Its coefficients are produced together by one evaluator, so composing
//! operators costs a sum, not a product, of the factor costs.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::root_data::{dot_ff, AffRoot, Datum, DescentOrder, Ext, RVec};
use crate::series::a_coefficient;

type CoeffEval = Arc<dyn Fn(&[C64]) -> Vec<C64> + Send + Sync>;

#[derive(Clone)]
pub struct DiffReflOp {
    pub datum: Arc<Datum>,
    pub terms: Vec<Ext>,
    eval: CoeffEval,
}

impl std::fmt::Debug for DiffReflOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiffReflOp").field("terms", &self.terms.len()).finish()
    }
}

/// c_a(z; kappa) = (1 - q^{k_a + k_2a + a(z)})(1 + q^{k_a - k_2a + a(z)}) / (1 - q^{2 a(z)}).
pub fn c_affine(d: &Datum, a: &AffRoot, z: &[C64]) -> C64 {
    let (ka, k2a) = d.kappa(a.root).at_level(a.r);
    let az = d.aff_eval(a, z);
    let one = C64::new(1.0, 0.0);
    (one - d.qpow(az + (ka + k2a))) * (one + d.qpow(az + (ka - k2a))) / (one - d.qpow(az * 2.0))
}

/// c_w(z) = product of c_a over the positive affine roots a with w a negative.
pub fn c_element(d: &Datum, w: &Ext, z: &[C64]) -> C64 {
    d.inversion_set(w).iter().map(|a| c_affine(d, a, z)).product()
}

impl DiffReflOp {
    pub fn new(datum: Arc<Datum>, terms: Vec<Ext>, eval: CoeffEval) -> Self {
        DiffReflOp { datum, terms, eval }
    }

    pub fn coefficients(&self, z: &[C64]) -> Vec<C64> {
        (self.eval)(z)
    }

    pub fn identity(d: &Arc<Datum>) -> Self {
        Self::element(d, d.ext_id())
    }

    /// The operator w^ with coefficient one.
    pub fn element(d: &Arc<Datum>, w: Ext) -> Self {
        DiffReflOp::new(d.clone(), vec![w], Arc::new(|_| vec![C64::new(1.0, 0.0)]))
    }

    pub fn scale(&self, s: C64) -> Self {
        let e = self.eval.clone();
        DiffReflOp::new(self.datum.clone(), self.terms.clone(), Arc::new(move |z| e(z).into_iter().map(|c| c * s).collect()))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        let mut map = Vec::new();
        for t in &o.terms {
            match terms.iter().position(|x| x == t) {
                Some(p) => map.push(p),
                None => {
                    map.push(terms.len());
                    terms.push(t.clone());
                }
            }
        }
        let (ea, eb) = (self.eval.clone(), o.eval.clone());
        let n = terms.len();
        DiffReflOp::new(
            self.datum.clone(),
            terms,
            Arc::new(move |z| {
                let mut out = ea(z);
                out.resize(n, C64::new(0.0, 0.0));
                for (k, c) in eb(z).into_iter().enumerate() {
                    out[map[k]] += c;
                }
                out
            }),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    /// Composition self o other.
    pub fn compose(&self, o: &Self) -> Self {
        let d = self.datum.clone();
        let mut terms: Vec<Ext> = Vec::new();
        let mut lookup: HashMap<Ext, usize> = HashMap::new();
        let mut map = vec![vec![0usize; o.terms.len()]; self.terms.len()];
        for (i, a) in self.terms.iter().enumerate() {
            for (j, b) in o.terms.iter().enumerate() {
                let ab = d.compose(a, b);
                let k = *lookup.entry(ab.clone()).or_insert_with(|| {
                    terms.push(ab);
                    terms.len() - 1
                });
                map[i][j] = k;
            }
        }
        let inv: Vec<Ext> = self.terms.iter().map(|a| d.inverse(a)).collect();
        let (ea, eb) = (self.eval.clone(), o.eval.clone());
        let n = terms.len();
        let dd = d.clone();
        DiffReflOp::new(
            d,
            terms,
            Arc::new(move |z| {
                let mut out = vec![C64::new(0.0, 0.0); n];
                let ca = ea(z);
                for (i, ci) in ca.iter().enumerate() {
                    if ci.norm() == 0.0 {
                        continue;
                    }
                    let zb = dd.act(&inv[i], z);
                    for (j, cj) in eb(&zb).into_iter().enumerate() {
                        out[map[i][j]] += ci * cj;
                    }
                }
                out
            }),
        )
    }

    /// (L f)(z) = sum_j c_j(z) f(w_j^{-1} z).
    pub fn apply(&self, f: &dyn Fn(&[C64]) -> C64, z: &[C64]) -> C64 {
        let c = (self.eval)(z);
        let d = &self.datum;
        self.terms.iter().zip(c).map(|(w, cj)| if cj.norm() == 0.0 { cj } else { cj * f(&d.act_inv(w, z)) }).sum()
    }

    /// sum_j |c_j(z)| |f(w_j^{-1} z)|, the size of the terms that cancel in `apply`.
    pub fn apply_abs(&self, f: &dyn Fn(&[C64]) -> C64, z: &[C64]) -> f64 {
        let c = (self.eval)(z);
        let d = &self.datum;
        self.terms.iter().zip(c).map(|(w, cj)| if cj.norm() == 0.0 { 0.0 } else { cj.norm() * f(&d.act_inv(w, z)).norm() }).sum()
    }

    /// Collapse the finite parts: sum_j c_j tau(mu_j) sigma_j^ -> sum_j c_j tau(mu_j)^.
    pub fn translation_part(&self) -> Self {
        let d = self.datum.clone();
        let mut terms: Vec<Ext> = Vec::new();
        let mut map = Vec::new();
        for t in &self.terms {
            let tr = d.translation(&t.t);
            match terms.iter().position(|x| *x == tr) {
                Some(p) => map.push(p),
                None => {
                    map.push(terms.len());
                    terms.push(tr);
                }
            }
        }
        let e = self.eval.clone();
        let n = terms.len();
        DiffReflOp::new(
            d,
            terms,
            Arc::new(move |z| {
                let mut out = vec![C64::new(0.0, 0.0); n];
                for (k, c) in e(z).into_iter().enumerate() {
                    out[map[k]] += c;
                }
                out
            }),
        )
    }

    /// Terms whose finite part is sigma, with the finite part removed.
    pub fn finite_component(&self, sigma: usize) -> Self {
        let d = self.datum.clone();
        let keep: Vec<usize> = (0..self.terms.len()).filter(|&k| self.terms[k].w == sigma).collect();
        let terms: Vec<Ext> = keep.iter().map(|&k| d.translation(&self.terms[k].t)).collect();
        let e = self.eval.clone();
        DiffReflOp::new(d, terms, Arc::new(move |z| {
            let c = e(z);
            keep.iter().map(|&k| c[k]).collect()
        }))
    }
}

/// Demazure-Lusztig operator T_i = q^{k_i} + q^{-k_i} c_i (s_i^ - id).
pub fn t_hat(d: &Arc<Datum>, i: usize) -> DiffReflOp {
    let a = d.simple_affine(i);
    let (ka, _) = d.kappa(a.root).at_level(a.r);
    let qk = d.q.powf(ka);
    let dd = d.clone();
    DiffReflOp::new(
        d.clone(),
        vec![d.ext_id(), d.s(i)],
        Arc::new(move |z| {
            let c = c_affine(&dd, &a, z);
            vec![C64::new(qk, 0.0) - c / qk, c / qk]
        }),
    )
}

/// T_i^{-1} = T_i - q^{k_i} + q^{-k_i}.
pub fn t_hat_inv(d: &Arc<Datum>, i: usize) -> DiffReflOp {
    let a = d.simple_affine(i);
    let (ka, _) = d.kappa(a.root).at_level(a.r);
    let qk = d.q.powf(ka);
    t_hat(d, i).add(&DiffReflOp::identity(d).scale(C64::new(1.0 / qk - qk, 0.0)))
}

fn product(d: &Arc<Datum>, factors: Vec<DiffReflOp>) -> DiffReflOp {
    factors.into_iter().fold(DiffReflOp::identity(d), |acc, f| acc.compose(&f))
}

/// Y^nu for nu dominant, from a reduced expression tau(nu) = s_{i_1} ... s_{i_r} u.
pub fn y_dominant(d: &Arc<Datum>, nu: &RVec, inverse: bool) -> DiffReflOp {
    y_dominant_with(d, nu, inverse, DescentOrder::Smallest)
}

/// [`y_dominant`] with the reduced word chosen by `order`.
pub fn y_dominant_with(d: &Arc<Datum>, nu: &RVec, inverse: bool, order: DescentOrder) -> DiffReflOp {
    let (word, u) = d.reduced_word(&d.translation(nu), order);
    if !inverse {
        let mut f: Vec<DiffReflOp> = word.iter().map(|&i| t_hat(d, i)).collect();
        f.push(DiffReflOp::element(d, u));
        product(d, f)
    } else {
        let mut f = vec![DiffReflOp::element(d, d.inverse(&u))];
        f.extend(word.iter().rev().map(|&i| t_hat_inv(d, i)));
        product(d, f)
    }
}

/// Y^nu for arbitrary nu in the dual-side lattice.
pub fn y_operator(d: &Arc<Datum>, nu: &RVec) -> DiffReflOp {
    let (a, b) = d.dominant_split(nu);
    if b.is_zero() {
        return y_dominant(d, &a, false);
    }
    let mut f: Vec<DiffReflOp> = Vec::new();
    let (wa, ua) = d.reduced_word(&d.translation(&a), DescentOrder::Smallest);
    f.extend(wa.iter().map(|&i| t_hat(d, i)));
    f.push(DiffReflOp::element(d, ua));
    let (wb, ub) = d.reduced_word(&d.translation(&b), DescentOrder::Smallest);
    f.push(DiffReflOp::element(d, d.inverse(&ub)));
    f.extend(wb.iter().rev().map(|&i| t_hat_inv(d, i)));
    product(d, f)
}

/// Sum of Y^{nu'} over the W_0-orbit of nu.
pub fn y_orbit_sum(d: &Arc<Datum>, nu: &RVec) -> DiffReflOp {
    let orbit = d.orbit_of(nu);
    let mut acc: Option<DiffReflOp> = None;
    for v in &orbit {
        let y = y_operator(d, v);
        acc = Some(match acc {
            None => y,
            Some(a) => a.add(&y),
        });
    }
    acc.unwrap()
}

/// The symmetric difference operator L_nu extracted from the orbit sum of Y's.
pub fn rmkc_extract(d: &Arc<Datum>, nu: &RVec) -> DiffReflOp {
    y_orbit_sum(d, nu).translation_part()
}

/// Explicit quasi-minuscule operator
/// (L f)(z) = q^{-(rho, psi~)} sum_w A(w^{-1} z)(f(z + w psi~) - f(z)) + sum_w q^{-(rho, w psi~)} f(z).
pub fn l_explicit(d: &Arc<Datum>) -> DiffReflOp {
    let reps = d.coset_reps(d.psi_tilde());
    let psit = d.psi_tilde().to_f64();
    let pref = d.q.powf(-dot_ff(&d.rho, &psit));
    let kconst: f64 = reps.iter().map(|(_, v)| d.q.powf(-dot_ff(&d.rho, &v.to_f64()))).sum();
    let mut terms = vec![d.ext_id()];
    terms.extend(reps.iter().map(|(_, v)| d.translation(&v.neg())));
    let ws: Vec<usize> = reps.iter().map(|(w, _)| *w).collect();
    let dd = d.clone();
    DiffReflOp::new(
        d.clone(),
        terms,
        Arc::new(move |z| {
            let mut out = vec![C64::new(kconst, 0.0)];
            for &w in &ws {
                let y = dd.weyl.apply_c(dd.weyl.inv[w], z);
                let a = a_coefficient(&dd, &y) * pref;
                out[0] -= a;
                out.push(a);
            }
            out
        }),
    )
}

/// Difference between c_{tau(psi~)} and A at a point.
pub fn lemma_c_equals_a(d: &Datum, z: &[C64]) -> (C64, C64) {
    let t = d.translation(d.psi_tilde());
    (c_element(d, &t, z), a_coefficient(d, z))
}

/// Deterministic smooth test function: a ratio of exponential sums with
/// small integer frequencies in the ambient coordinates.
pub fn test_function(dim: usize, seed: u64, q: f64) -> impl Fn(&[C64]) -> C64 + Clone {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for _ in 0..4 {
        let m: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
        let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        terms.push((m, c));
    }
    let mut den = Vec::new();
    for _ in 0..2 {
        let m: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1i32..=1) as f64).collect();
        let c = C64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        den.push((m, c));
    }
    let lnq = q.ln();
    move |z: &[C64]| {
        let ex = |m: &[f64]| -> C64 { (m.iter().zip(z).map(|(a, b)| b * *a).sum::<C64>() * lnq).exp() };
        let p: C64 = terms.iter().map(|(m, c)| c * ex(m)).sum();
        let qd: C64 = C64::new(1.0, 0.0) + den.iter().map(|(m, c)| c * ex(m)).sum::<C64>();
        p / qd
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::{datum, Bullet, Family, Kappa, KappaSpec};

    fn b2() -> Arc<Datum> {
        Arc::new(
            datum(
                Family::Koornwinder,
                2,
                Bullet::T,
                &[
                    ("short", KappaSpec::full(Kappa { alpha: 0.3, two_alpha: 0.1, alpha1: 0.2, two_alpha1: -0.05 })),
                    ("long", KappaSpec::uniform(0.2)),
                ],
                0.4,
            )
            .unwrap(),
        )
    }

    fn pt(v: &[(f64, f64)]) -> Vec<C64> {
        v.iter().map(|&(a, b)| C64::new(a, b)).collect()
    }

    #[test]
    fn hecke_relation() {
        let d = b2();
        let f = test_function(d.dim, 3, d.q);
        let z = pt(&[(0.31, 0.12), (-0.22, 0.4)]);
        for i in 0..=d.rank {
            let a = d.simple_affine(i);
            let qk = d.q.powf(d.kappa(a.root).at_level(a.r).0);
            let t = t_hat(&d, i);
            let op = t
                .sub(&DiffReflOp::identity(&d).scale(C64::new(qk, 0.0)))
                .compose(&t.add(&DiffReflOp::identity(&d).scale(C64::new(1.0 / qk, 0.0))));
            assert!(op.apply(&f, &z).norm() < 1e-11, "i = {}", i);
        }
    }

    #[test]
    fn c_of_translation_is_a() {
        let d = b2();
        let z = pt(&[(0.31, 0.12), (-0.22, 0.4)]);
        let (c, a) = lemma_c_equals_a(&d, &z);
        assert!((c - a).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn extracted_operator_matches_explicit() {
        let d = b2();
        let f = test_function(d.dim, 11, d.q);
        let z = pt(&[(0.17, -0.21), (-0.35, 0.33)]);
        let l1 = rmkc_extract(&d, d.psi_tilde());
        let l2 = l_explicit(&d);
        let (a, b) = (l1.apply(&f, &z), l2.apply(&f, &z));
        assert!((a - b).norm() < 1e-10 * b.norm().max(1.0), "{} vs {}", a, b);
    }
}
