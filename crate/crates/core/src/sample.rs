//! Deterministic sampling of evaluation points.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::root_data::{rat_f64, Datum};

/// Seeded source of sample points; the seed fixes every draw.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        self.rng.gen_range(lo..hi)
    }

    pub fn complex(&mut self, re: (f64, f64), im: (f64, f64)) -> C64 {
        C64::new(self.uniform(re.0, re.1), self.uniform(im.0, im.1))
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// A point z whose simple root values alpha_i(z) are drawn from the
    /// box re x im; the component orthogonal to the roots (if E has one)
    /// is drawn from the unit box.
    pub fn point(&mut self, d: &Datum, re: (f64, f64), im: (f64, f64)) -> Vec<C64> {
        let vals: Vec<C64> = (0..d.rank).map(|_| self.complex(re, im)).collect();
        self.point_with_values(d, &simple_forms(d), &vals)
    }

    /// Same as [`Sampler::point`] with the dual simple roots, i.e. a spectral
    /// point xi with alpha~_i(xi) in the box.
    pub fn spectral_point(&mut self, d: &Datum, re: (f64, f64), im: (f64, f64)) -> Vec<C64> {
        let vals: Vec<C64> = (0..d.rank).map(|_| self.complex(re, im)).collect();
        self.point_with_values(d, &dual_simple_forms(d), &vals)
    }

    /// Point with prescribed values of the given linear forms.
    pub fn point_with_values(&mut self, d: &Datum, forms: &[Vec<f64>], vals: &[C64]) -> Vec<C64> {
        let extra = d.space.len().saturating_sub(forms.len());
        let central: Vec<C64> = (0..extra).map(|_| self.complex((-1.0, 1.0), (-1.0, 1.0))).collect();
        point_from_values(d, forms, vals, &central)
    }
}

pub fn simple_forms(d: &Datum) -> Vec<Vec<f64>> {
    d.simple.iter().map(|&r| d.roots[r].vf.clone()).collect()
}

pub fn dual_simple_forms(d: &Datum) -> Vec<Vec<f64>> {
    d.simple.iter().map(|&r| d.roots[r].tilde_f.clone()).collect()
}

/// Solve for z in E_C with forms[k](z) = vals[k]. Directions of E
/// orthogonal to the forms get the coordinates `central`; directions of
/// the ambient space outside E are set to zero.
pub fn point_from_values(d: &Datum, forms: &[Vec<f64>], vals: &[C64], central: &[C64]) -> Vec<C64> {
    let n = d.dim;
    let space: Vec<Vec<f64>> = d.space.iter().map(|v| v.0.iter().map(rat_f64).collect()).collect();
    let mut rows: Vec<Vec<f64>> = forms.to_vec();
    let mut rhs: Vec<C64> = vals.to_vec();
    // orthonormal basis of the span of the forms, then the complement
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push = |v: &[f64], basis: &mut Vec<Vec<f64>>| -> Option<Vec<f64>> {
        let mut w = v.to_vec();
        for b in basis.iter() {
            let p: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            for j in 0..n {
                w[j] -= p * b[j];
            }
        }
        let nn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nn < 1e-9 {
            return None;
        }
        let w: Vec<f64> = w.iter().map(|x| x / nn).collect();
        basis.push(w.clone());
        Some(w)
    };
    for f in forms {
        push(f, &mut basis);
    }
    let mut inside = Vec::new();
    for s in &space {
        if let Some(w) = push(s, &mut basis) {
            inside.push(w);
        }
    }
    let mut outside = Vec::new();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        if let Some(w) = push(&e, &mut basis) {
            outside.push(w);
        }
    }
    for (k, w) in inside.into_iter().enumerate() {
        rows.push(w);
        rhs.push(central.get(k).copied().unwrap_or_default());
    }
    for w in outside {
        rows.push(w);
        rhs.push(C64::new(0.0, 0.0));
    }
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lu = a.lu();
    let re = lu.solve(&DVector::from_iterator(n, rhs.iter().map(|c| c.re))).expect("independent forms");
    let im = lu.solve(&DVector::from_iterator(n, rhs.iter().map(|c| c.im))).expect("independent forms");
    (0..n).map(|j| C64::new(re[j], im[j])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::{datum, Bullet, Family, KappaSpec};

    #[test]
    fn prescribed_root_values() {
        let d = datum(Family::SemisimpleA, 2, Bullet::U, &[("roots", KappaSpec::uniform(0.2))], 0.5).unwrap();
        let mut s = Sampler::new(7);
        let z = s.point(&d, (-2.0, -1.0), (-1.0, 1.0));
        let sum: C64 = z.iter().sum();
        assert!(sum.norm() < 1e-12);
        for i in 1..=2 {
            let v = d.alpha(i).v.pair(&z);
            assert!(v.re >= -2.0 && v.re <= -1.0);
        }
    }

    #[test]
    fn seed_fixes_points() {
        let d = datum(Family::Gl, 2, Bullet::U, &[("roots", KappaSpec::uniform(0.2))], 0.5).unwrap();
        let a = Sampler::new(3).point(&d, (-1.0, 0.0), (0.0, 1.0));
        let b = Sampler::new(3).point(&d, (-1.0, 0.0), (0.0, 1.0));
        assert_eq!(a, b);
    }
}
