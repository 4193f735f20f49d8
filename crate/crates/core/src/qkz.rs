//! The bispectral quantum KZ cocycle C_{(w, w~)}(z, xi) on the space V with
//! basis v_sigma (sigma in W_0), and the Cherednik-Matsuo map chi.
//!
//! Basis vectors are indexed by the enumeration order of W_0 in the datum;
//! column sigma of a matrix holds the image of v_sigma.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::connection::{guarded, Result};
use crate::root_data::{AffRoot, Datum, DescentOrder, Ext, RVec};

/// Which multiplicity function enters a c-factor. The generators use
/// c_a(.; -kappa), so the sign is spelled out at every call site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KappaSign {
    Plus,
    Minus,
}

/// c_a(z; +-kappa) = (1 - q^{+-(k_a + k_2a) + a(z)})(1 + q^{+-(k_a - k_2a) + a(z)}) / (1 - q^{2a(z)}).
pub fn c_factor(d: &Datum, a: &AffRoot, z: &[C64], sign: KappaSign) -> C64 {
    let (ka, k2a) = d.kappa(a.root).at_level(a.r);
    let s = if sign == KappaSign::Plus { 1.0 } else { -1.0 };
    let az = d.aff_eval(a, z);
    let one = C64::new(1.0, 0.0);
    (one - d.qpow(az + s * (ka + k2a))) * (one + d.qpow(az + s * (ka - k2a))) / (one - d.qpow(az * 2.0))
}

/// An element (w, w~) of W x W~ with the value of C at one point.
#[derive(Clone, Debug)]
pub struct QkzMatrix {
    pub w: Ext,
    pub w_dual: Ext,
    pub value: DMatrix<C64>,
}

/// The generators and cocycle of one initial datum. `dual` carries the
/// dual datum, whose extended affine Weyl group is W~.
#[derive(Clone, Debug)]
pub struct QkzSystem {
    pub d: Datum,
    pub dual: Datum,
    /// `to_dual[w]` is the index in `dual.weyl` of the element w of `d.weyl`.
    pub to_dual: Vec<usize>,
    pub from_dual: Vec<usize>,
    /// Index of the reflection s_theta in `d.weyl`.
    pub s_theta: usize,
    pub pole_guard: f64,
}

impl QkzSystem {
    pub fn new(d: &Datum) -> Self {
        let dual = d.dual();
        let n = d.weyl.order();
        let to_dual: Vec<usize> = (0..n).map(|w| dual.weyl.lookup(&d.weyl.mats[w]).expect("same finite Weyl group")).collect();
        let mut from_dual = vec![0; n];
        for (w, &wd) in to_dual.iter().enumerate() {
            from_dual[wd] = w;
        }
        let s_theta = from_dual[dual.s(0).w];
        QkzSystem { d: d.clone(), dual, to_dual, from_dual, s_theta, pole_guard: 1e-10 }
    }

    pub fn dim(&self) -> usize {
        self.d.weyl.order()
    }

    fn c_guarded(&self, d: &Datum, a: &AffRoot, z: &[C64]) -> Result<C64> {
        let c = c_factor(d, a, z, KappaSign::Minus);
        guarded("c_a(.; -kappa)", c, self.pole_guard)
    }

    /// C_{(s_i, e)}(z, xi), 0 <= i <= n.
    pub fn left_simple(&self, i: usize, z: &[C64], xi: &[C64]) -> Result<DMatrix<C64>> {
        let d = &self.d;
        let n = self.dim();
        let a = d.simple_affine(i);
        let (k, _) = d.kappa(a.root).at_level(a.r);
        let c = self.c_guarded(d, &a, z)?;
        let qk = d.q.powf(k);
        let mut m = DMatrix::zeros(n, n);
        for sigma in 0..n {
            let sinv = d.weyl.inv[sigma];
            let (target, shift, chi) = if i == 0 {
                let s_psi = d.s(0).w;
                let sxi = d.weyl.apply_c(sigma, xi);
                let chi = !d.roots[d.root_action[sinv][d.psi]].positive;
                (d.weyl.mul[s_psi][sigma], d.qpow(d.psi_tilde().pair(&sxi)), chi)
            } else {
                let chi = d.roots[d.root_action[sinv][d.simple[i - 1]]].positive;
                (d.weyl.mul[d.weyl.simple[i - 1]][sigma], C64::new(1.0, 0.0), chi)
            };
            let e = if chi { -2.0 * k } else { 0.0 };
            m[(target, sigma)] += shift / (c * qk);
            m[(sigma, sigma)] += (c - d.q.powf(e)) / c;
        }
        Ok(m)
    }

    /// C_{(u, e)}(z, xi) for u of length zero in W.
    pub fn left_omega(&self, u: &Ext, xi: &[C64]) -> DMatrix<C64> {
        let d = &self.d;
        let n = self.dim();
        let w0nu = d.weyl.apply(d.w0(), &u.t);
        let mut m = DMatrix::zeros(n, n);
        for sigma in 0..n {
            let sxi = d.weyl.apply_c(sigma, xi);
            m[(d.weyl.mul[u.w][sigma], sigma)] = d.qpow(-w0nu.pair(&sxi));
        }
        m
    }

    /// C_{(e, s~_i)}(z, xi), 0 <= i <= n.
    pub fn right_simple(&self, i: usize, z: &[C64], xi: &[C64]) -> Result<DMatrix<C64>> {
        let d = &self.d;
        let dt = &self.dual;
        let n = self.dim();
        let a = dt.simple_affine(i);
        let (k, _) = dt.kappa(a.root).at_level(a.r);
        let c = self.c_guarded(dt, &a, xi)?;
        let qk = d.q.powf(k);
        let mut m = DMatrix::zeros(n, n);
        for sigma in 0..n {
            let (target, shift, chi) = if i == 0 {
                let sinv = d.weyl.inv[sigma];
                let zz = d.weyl.apply_c(sinv, z);
                let chi = !d.roots[d.root_action[sigma][d.theta]].positive;
                (d.weyl.mul[sigma][self.s_theta], d.qpow(d.roots[d.theta].v.pair(&zz)), chi)
            } else {
                let chi = d.roots[d.root_action[sigma][d.simple[i - 1]]].positive;
                (d.weyl.mul[sigma][d.weyl.simple[i - 1]], C64::new(1.0, 0.0), chi)
            };
            let e = if chi { -2.0 * k } else { 0.0 };
            m[(target, sigma)] += shift / (c * qk);
            m[(sigma, sigma)] += (c - d.q.powf(e)) / c;
        }
        Ok(m)
    }

    /// C_{(e, u~)}(z, xi) for u~ of length zero in W~ (an element of the dual datum).
    pub fn right_omega(&self, u: &Ext, z: &[C64]) -> DMatrix<C64> {
        let d = &self.d;
        let n = self.dim();
        let w0lam = d.weyl.apply(d.w0(), &u.t);
        // v~(lambda) = u~.w^{-1}, in the indexing of d
        let v = d.weyl.inv[self.from_dual[u.w]];
        let mut m = DMatrix::zeros(n, n);
        for sigma in 0..n {
            let zz = d.weyl.apply_c(d.weyl.inv[sigma], z);
            m[(d.weyl.mul[sigma][v], sigma)] = d.qpow(-w0lam.pair(&zz));
        }
        m
    }

    /// C_{(w, e)} along the word w = s_{i_1} ... s_{i_k} u.
    pub fn left_word(&self, word: &[usize], u: &Ext, z: &[C64], xi: &[C64]) -> Result<DMatrix<C64>> {
        let d = &self.d;
        let mut m = DMatrix::identity(self.dim(), self.dim());
        let mut zc = z.to_vec();
        for &i in word {
            m *= self.left_simple(i, &zc, xi)?;
            zc = d.act_inv(&d.s(i), &zc);
        }
        m *= self.left_omega(u, xi);
        Ok(m)
    }

    /// C_{(e, w~)} along the word w~ = s~_{i_1} ... s~_{i_k} u~.
    pub fn right_word(&self, word: &[usize], u: &Ext, z: &[C64], xi: &[C64]) -> Result<DMatrix<C64>> {
        let dt = &self.dual;
        let mut m = DMatrix::identity(self.dim(), self.dim());
        let mut xc = xi.to_vec();
        for &i in word {
            m *= self.right_simple(i, z, &xc)?;
            xc = dt.act_inv(&dt.s(i), &xc);
        }
        m *= self.right_omega(u, z);
        Ok(m)
    }

    /// C_{(w, w~)}(z, xi) = C_{(w, e)}(z, xi) C_{(e, w~)}(w^{-1} z, xi), using
    /// reduced words found with the given descent order.
    pub fn cocycle(&self, w: &Ext, w_dual: &Ext, z: &[C64], xi: &[C64], order: DescentOrder) -> Result<QkzMatrix> {
        let (lw, lu) = self.d.reduced_word(w, order);
        let (rw, ru) = self.dual.reduced_word(w_dual, order);
        let left = self.left_word(&lw, &lu, z, xi)?;
        let zi = self.d.act_inv(w, z);
        let right = self.right_word(&rw, &ru, &zi, xi)?;
        Ok(QkzMatrix { w: w.clone(), w_dual: w_dual.clone(), value: left * right })
    }

    /// (nabla(w, w~) f)(z, xi) = C_{(w, w~)}(z, xi) f(w^{-1} z, w~^{-1} xi).
    pub fn nabla(
        &self,
        w: &Ext,
        w_dual: &Ext,
        f: &dyn Fn(&[C64], &[C64]) -> Vec<C64>,
        z: &[C64],
        xi: &[C64],
    ) -> Result<Vec<C64>> {
        let c = self.cocycle(w, w_dual, z, xi, DescentOrder::Smallest)?.value;
        let v = f(&self.d.act_inv(w, z), &self.dual.act_inv(w_dual, xi));
        Ok(apply(&c, &v))
    }

    /// The Cherednik-Matsuo map chi(sum f_w v_w) = q^{k_{w0}} sum q^{-k_w} f_w.
    pub fn chi(&self, f: &[C64]) -> C64 {
        let d = &self.d;
        let kw0 = d.kappa_w(d.w0());
        (0..self.dim()).map(|w| f[w] * d.q.powf(kw0 - d.kappa_w(w))).sum()
    }

    /// R_lambda(z, xi) = q^{(rho~ + w0 z, lambda)} (C_{(e, tau(lambda))}(z, xi) v_{w0})|_{v_{w0}}.
    pub fn r_lambda(&self, lambda: &RVec, z: &[C64], xi: &[C64]) -> Result<C64> {
        let d = &self.d;
        let t = self.dual.translation(lambda);
        let (rw, ru) = self.dual.reduced_word(&t, DescentOrder::Smallest);
        let c = self.right_word(&rw, &ru, z, xi)?;
        let w0 = d.w0();
        let w0z = d.weyl.apply_c(w0, z);
        let lam = lambda.to_f64();
        let mut e = C64::new(0.0, 0.0);
        for j in 0..d.dim {
            e += (w0z[j] + d.rho_tilde[j]) * lam[j];
        }
        Ok(d.qpow(e) * c[(w0, w0)])
    }

    /// Product of c_a(xi; -kappa~)^{-1} over the positive affine roots a of
    /// the dual datum with tau(lambda)^{-1} a negative.
    pub fn r0_product(&self, lambda: &RVec, xi: &[C64]) -> Result<C64> {
        let dt = &self.dual;
        let inv = dt.inversion_set(&dt.translation(&lambda.neg()));
        let mut p = C64::new(1.0, 0.0);
        for a in inv {
            p /= self.c_guarded(dt, &a, xi)?;
        }
        Ok(p)
    }

    /// Convert an element of W (as an Ext of `d`) to the indexing of another
    /// datum with the same finite Weyl group.
    pub fn transport(from: &Datum, to: &Datum, e: &Ext) -> Ext {
        Ext { t: e.t.clone(), w: to.weyl.lookup(&from.weyl.mats[e.w]).expect("same finite Weyl group") }
    }
}

pub fn apply(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum()).collect()
}

/// Largest entry deviation |a - b| relative to max(1, max |a|).
pub fn max_entry_deviation(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let scale = a.iter().map(|x| x.norm()).fold(1.0, f64::max);
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// Residual of the duality symmetry
/// [C_{(w,w~)}(z,xi; D)]_{s,s'} = [C_{(w~,w)}(xi,z; D~)]_{s^{-1},s'^{-1}}.
pub fn duality_residual(sys: &QkzSystem, sys_t: &QkzSystem, w: &Ext, w_dual: &Ext, z: &[C64], xi: &[C64]) -> Result<f64> {
    let lhs = sys.cocycle(w, w_dual, z, xi, DescentOrder::Smallest)?.value;
    let wt = QkzSystem::transport(&sys.dual, &sys_t.d, w_dual);
    let ww = QkzSystem::transport(&sys.d, &sys_t.dual, w);
    let rhs = sys_t.cocycle(&wt, &ww, xi, z, DescentOrder::Smallest)?.value;
    let n = sys.dim();
    let idx: Vec<usize> = (0..n).map(|s| sys_t.d.weyl.lookup(&sys.d.weyl.mats[sys.d.weyl.inv[s]]).unwrap()).collect();
    let mapped = DMatrix::from_fn(n, n, |r, c| rhs[(idx[r], idx[c])]);
    Ok(max_entry_deviation(&lhs, &mapped))
}

/// Coxeter exponent m_ij of the affine simple reflections, None if infinite.
pub fn braid_order(d: &Datum, i: usize, j: usize) -> Option<usize> {
    let p = d.compose(&d.s(i), &d.s(j));
    let mut cur = p.clone();
    for m in 1..=6 {
        if cur == d.ext_id() {
            return Some(m);
        }
        cur = d.compose(&cur, &p);
    }
    None
}

/// The alternating word i j i j ... of length m.
pub fn alternating(i: usize, j: usize, m: usize) -> Vec<usize> {
    (0..m).map(|k| if k % 2 == 0 { i } else { j }).collect()
}

/// Random element of W: a translation by a small lattice vector times a
/// finite Weyl group element.
pub fn random_element(d: &Datum, s: &mut crate::sample::Sampler, span: i64) -> Ext {
    let m = d.lattice_tilde.gens.len();
    let coeffs: Vec<i64> = (0..m).map(|_| s.index((2 * span + 1) as usize) as i64 - span).collect();
    let t = d.lattice_tilde.combine(&coeffs);
    d.compose(&d.translation(&t), &d.finite(s.index(d.weyl.order())))
}

/// Random vector-valued test function with components built from
/// exponential sums in z and xi.
pub fn test_vector(d: &Datum, seed: u64) -> impl Fn(&[C64], &[C64]) -> Vec<C64> + Clone {
    let mut s = crate::sample::Sampler::new(seed);
    let n = d.weyl.order();
    let dim = d.dim;
    let coeffs: Vec<(Vec<f64>, Vec<f64>, C64, C64)> = (0..n)
        .map(|_| {
            let a: Vec<f64> = (0..dim).map(|_| s.uniform(-0.7, 0.7)).collect();
            let b: Vec<f64> = (0..dim).map(|_| s.uniform(-0.7, 0.7)).collect();
            (a, b, s.complex((-1.0, 1.0), (-1.0, 1.0)), s.complex((0.2, 0.6), (-0.2, 0.2)))
        })
        .collect();
    move |z: &[C64], xi: &[C64]| {
        coeffs
            .iter()
            .map(|(a, b, c0, c1)| {
                let e: C64 = a.iter().zip(z).map(|(x, y)| y * *x).sum::<C64>() + b.iter().zip(xi).map(|(x, y)| y * *x).sum::<C64>();
                *c0 + *c1 / (C64::new(2.0, 0.0) + e.exp())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::{datum, Bullet, Family, Kappa, KappaSpec};
    use crate::sample::Sampler;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn b2() -> Datum {
        let short = Kappa { alpha: 0.3, two_alpha: 0.1, alpha1: 0.2, two_alpha1: -0.1 };
        datum(Family::Koornwinder, 2, Bullet::T, &[("long", KappaSpec::uniform(0.25)), ("short", KappaSpec::full(short))], 0.3).unwrap()
    }

    fn pt() -> (Vec<C64>, Vec<C64>) {
        (vec![c(0.31, 0.2), c(-0.45, 0.13)], vec![c(0.17, -0.3), c(0.42, 0.11)])
    }

    #[test]
    fn zero_kappa_gives_permutations() {
        let d = datum(Family::Gl, 2, Bullet::U, &[("roots", KappaSpec::uniform(0.0))], 0.4).unwrap();
        let sys = QkzSystem::new(&d);
        let z = [c(0.3, 0.1), c(-0.2, 0.4), c(0.1, 0.0)];
        let xi = [c(0.2, -0.1), c(0.5, 0.3), c(-0.3, 0.2)];
        for i in 1..=2 {
            let m = sys.left_simple(i, &z, &xi).unwrap();
            for col in 0..m.ncols() {
                let nz: Vec<C64> = (0..m.nrows()).map(|r| m[(r, col)]).filter(|x| x.norm() > 1e-14).collect();
                assert_eq!(nz.len(), 1);
                assert!((nz[0] - 1.0).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn generators_square_to_one() {
        let d = b2();
        let sys = QkzSystem::new(&d);
        let (z, xi) = pt();
        for i in 0..=2 {
            let a = sys.left_simple(i, &z, &xi).unwrap();
            let b = sys.left_simple(i, &d.act_inv(&d.s(i), &z), &xi).unwrap();
            let id = DMatrix::<C64>::identity(8, 8);
            assert!(max_entry_deviation(&(a * b), &id) < 1e-11);
            let dt = &sys.dual;
            let a = sys.right_simple(i, &z, &xi).unwrap();
            let b = sys.right_simple(i, &z, &dt.act_inv(&dt.s(i), &xi)).unwrap();
            assert!(max_entry_deviation(&(a * b), &id) < 1e-11);
        }
    }

    #[test]
    fn theta_matches_dual_psi() {
        for d in [b2(), datum(Family::Gl, 2, Bullet::U, &[("roots", KappaSpec::uniform(0.2))], 0.4).unwrap()] {
            let dual = d.dual();
            assert_eq!(d.roots[d.theta].tilde, dual.roots[dual.psi].v);
        }
    }

    #[test]
    fn word_independence_and_duality() {
        let d = b2();
        let sys = QkzSystem::new(&d);
        let sys_t = QkzSystem::new(&d.dual());
        let (z, xi) = pt();
        let mut s = Sampler::new(11);
        for _ in 0..4 {
            let w = random_element(&d, &mut s, 1);
            let wt = random_element(&sys.dual, &mut s, 1);
            let a = sys.cocycle(&w, &wt, &z, &xi, DescentOrder::Smallest).unwrap().value;
            let b = sys.cocycle(&w, &wt, &z, &xi, DescentOrder::Largest).unwrap().value;
            assert!(max_entry_deviation(&a, &b) < 1e-10);
            let r = duality_residual(&sys, &sys_t, &w, &wt, &z, &xi).unwrap();
            assert!(r < 1e-10, "duality residual {}", r);
        }
    }

    #[test]
    fn chi_is_equivariant() {
        let d = b2();
        let sys = QkzSystem::new(&d);
        let f = test_vector(&d, 5);
        let (z, xi) = pt();
        for (w, wt) in [(3usize, 0usize), (0, 5), (6, 2)] {
            let we = d.finite(w);
            let wte = sys.dual.finite(sys.to_dual[wt]);
            let lhs = sys.chi(&sys.nabla(&we, &wte, &f, &z, &xi).unwrap());
            let rhs = sys.chi(&f(&d.act_inv(&we, &z), &sys.dual.act_inv(&wte, &xi)));
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0), "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn r0_product_rank_one() {
        let d = datum(Family::SemisimpleA, 1, Bullet::U, &[("roots", KappaSpec::uniform(0.3))], 0.4).unwrap();
        let sys = QkzSystem::new(&d);
        let z = crate::sample::point_from_values(&d, &crate::sample::simple_forms(&d), &[c(-30.0, 0.2)], &[]);
        let xi = crate::sample::point_from_values(&d, &crate::sample::dual_simple_forms(&d), &[c(0.4, 0.3)], &[]);
        let lam = d.lattice.gens[0].clone();
        let r = sys.r_lambda(&lam, &z, &xi).unwrap();
        let p = sys.r0_product(&lam, &xi).unwrap();
        assert!((r - p).norm() < 1e-8 * p.norm(), "{} vs {}", r, p);
        let zero = RVec::zero(d.dim);
        assert!((sys.r_lambda(&zero, &z, &xi).unwrap() - 1.0).norm() < 1e-14);
    }
}
