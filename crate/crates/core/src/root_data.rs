//! Initial data, multiplicity functions, finite and extended affine Weyl groups.
//!
//! All combinatorics is exact: roots, lattice vectors and translation parts are
//! rational vectors in the ambient coordinates of the standard realizations.
//! Words in simple reflections use the index `0` for the affine reflection
//! `s_0` and `1..=n` for the finite ones.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64 as C64;
use num_rational::Rational64 as Rat;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DatumError {
    #[error("unsupported datum: {0}")]
    UnsupportedDatum(String),
    #[error("inconsistent multiplicity function: {0}")]
    InvalidKappa(String),
    #[error("q must satisfy 0 < q < 1, got {0}")]
    InvalidQ(f64),
}

/// Exact rational vector in ambient coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RVec(pub Vec<Rat>);

impl RVec {
    pub fn zero(n: usize) -> Self {
        RVec(vec![Rat::zero(); n])
    }
    pub fn from_ints(v: &[i64]) -> Self {
        RVec(v.iter().map(|&x| Rat::from_integer(x)).collect())
    }
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.0[i] = Rat::one();
        v
    }
    pub fn dim(&self) -> usize {
        self.0.len()
    }
    pub fn dot(&self, o: &RVec) -> Rat {
        self.0.iter().zip(&o.0).map(|(a, b)| a * b).sum()
    }
    pub fn add(&self, o: &RVec) -> RVec {
        RVec(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
    pub fn sub(&self, o: &RVec) -> RVec {
        RVec(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
    pub fn scale(&self, c: Rat) -> RVec {
        RVec(self.0.iter().map(|a| a * c).collect())
    }
    pub fn neg(&self) -> RVec {
        self.scale(-Rat::one())
    }
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|a| a.is_zero())
    }
    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rat_f64).collect()
    }
    /// Bilinear pairing with a complex point.
    pub fn pair(&self, z: &[C64]) -> C64 {
        self.0.iter().zip(z).map(|(a, b)| b * rat_f64(a)).sum()
    }
}

impl fmt::Display for RVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

pub fn rat_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn rat_to_int(r: Rat) -> Option<i64> {
    if r.is_integer() {
        Some(r.to_integer())
    } else {
        None
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

pub fn dot_f(a: &[f64], z: &[C64]) -> C64 {
    a.iter().zip(z).map(|(x, y)| y * *x).sum()
}

pub fn dot_ff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// GL(n+1) with the lattice Z^{n+1} on both sides.
    Gl,
    /// Semisimple A_n with the weight lattices.
    SemisimpleA,
    /// Koornwinder datum of type B_n (n = 1 gives the Askey-Wilson rank one case).
    Koornwinder,
}

impl Family {
    pub fn parse(s: &str) -> Option<Family> {
        match s.to_ascii_lowercase().as_str() {
            "gl" => Some(Family::Gl),
            "a" | "semisimple-a" | "sl" => Some(Family::SemisimpleA),
            "b" | "koornwinder" | "koornwinder-b" => Some(Family::Koornwinder),
            _ => None,
        }
    }
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gl => "GL",
            Family::SemisimpleA => "A",
            Family::Koornwinder => "Koornwinder-B",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bullet {
    U,
    T,
}

impl Bullet {
    pub fn parse(s: &str) -> Option<Bullet> {
        match s {
            "u" | "U" => Some(Bullet::U),
            "t" | "T" => Some(Bullet::T),
            _ => None,
        }
    }
}

/// Values of a multiplicity function on one W_0-orbit: kappa at
/// `alpha`, `2 alpha`, `alpha^(1)` and `2 alpha^(1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub alpha: f64,
    pub two_alpha: f64,
    pub alpha1: f64,
    pub two_alpha1: f64,
}

impl Kappa {
    pub fn uniform(k: f64) -> Kappa {
        Kappa { alpha: k, two_alpha: k, alpha1: k, two_alpha1: k }
    }
    pub fn negate(&self) -> Kappa {
        Kappa {
            alpha: -self.alpha,
            two_alpha: -self.two_alpha,
            alpha1: -self.alpha1,
            two_alpha1: -self.two_alpha1,
        }
    }
    /// Multiplicity of the dual datum on the orbit of the dual root.
    pub fn dual(&self) -> Kappa {
        Kappa {
            alpha: self.alpha,
            two_alpha: self.alpha1,
            alpha1: self.two_alpha,
            two_alpha1: self.two_alpha1,
        }
    }
    /// (kappa_a, kappa_2a) for the affine root alpha^(r).
    pub fn at_level(&self, r: i64) -> (f64, f64) {
        if r.rem_euclid(2) == 0 {
            (self.alpha, self.two_alpha)
        } else {
            (self.alpha1, self.two_alpha1)
        }
    }
}

/// Partially specified multiplicity on one orbit; unspecified values are
/// filled in through the identifications forced by the lattices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KappaSpec {
    pub alpha: f64,
    pub two_alpha: Option<f64>,
    pub alpha1: Option<f64>,
    pub two_alpha1: Option<f64>,
}

impl KappaSpec {
    pub fn uniform(k: f64) -> Self {
        KappaSpec { alpha: k, ..Default::default() }
    }
    pub fn full(k: Kappa) -> Self {
        KappaSpec {
            alpha: k.alpha,
            two_alpha: Some(k.two_alpha),
            alpha1: Some(k.alpha1),
            two_alpha1: Some(k.two_alpha1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Z,
    TwoZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitCase {
    Ultraspherical,
    /// (Lambda, alpha^vee) = Z, (dual lattice, dual coroot) = 2Z.
    JacobiFirst,
    /// (Lambda, alpha^vee) = 2Z, (dual lattice, dual coroot) = Z.
    JacobiSecond,
    AskeyWilson,
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub label: String,
    pub norm2: Rat,
    pub kappa: Kappa,
    pub lattice_parity: Parity,
    pub dual_parity: Parity,
    pub case: OrbitCase,
}

#[derive(Clone, Debug)]
pub struct Root {
    pub v: RVec,
    pub vf: Vec<f64>,
    /// Coordinates in the basis of simple roots.
    pub coords: Vec<i64>,
    pub norm2: Rat,
    pub positive: bool,
    /// mu_alpha.
    pub mu: Rat,
    pub muf: f64,
    pub coroot: RVec,
    pub coroot_f: Vec<f64>,
    /// The dual root mu_alpha alpha^vee.
    pub tilde: RVec,
    pub tilde_f: Vec<f64>,
    /// Coroot of the dual root, equal to alpha / mu_alpha.
    pub tilde_coroot: RVec,
    pub orbit: usize,
}

impl Root {
    pub fn height(&self) -> i64 {
        self.coords.iter().sum()
    }
}

/// Lattice given by a list of rational generators.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub gens: Vec<RVec>,
}

impl Lattice {
    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.gens
            .iter()
            .map(|a| self.gens.iter().map(|b| rat_f64(&a.dot(b))).collect())
            .collect()
    }
    pub fn combine(&self, m: &[i64]) -> RVec {
        let mut v = RVec::zero(self.gens[0].dim());
        for (g, &c) in self.gens.iter().zip(m) {
            v = v.add(&g.scale(Rat::from_integer(c)));
        }
        v
    }
}

/// Finite Weyl group with full multiplication table.
#[derive(Clone, Debug)]
pub struct WeylGroup {
    pub dim: usize,
    pub mats: Vec<Vec<Rat>>,
    pub matsf: Vec<Vec<f64>>,
    /// Reduced word (finite indices 1..=n), read left to right.
    pub words: Vec<Vec<usize>>,
    pub mul: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
    pub longest: usize,
    /// `simple[i-1]` is the index of s_i.
    pub simple: Vec<usize>,
    index: HashMap<Vec<Rat>, usize>,
}

impl WeylGroup {
    pub fn order(&self) -> usize {
        self.mats.len()
    }
    pub fn identity(&self) -> usize {
        0
    }
    pub fn length(&self, w: usize) -> usize {
        self.words[w].len()
    }
    pub fn apply(&self, w: usize, v: &RVec) -> RVec {
        let m = &self.mats[w];
        let n = self.dim;
        RVec((0..n).map(|i| (0..n).map(|j| m[i * n + j] * v.0[j]).sum()).collect())
    }
    pub fn apply_c(&self, w: usize, z: &[C64]) -> Vec<C64> {
        let m = &self.matsf[w];
        let n = self.dim;
        (0..n).map(|i| (0..n).map(|j| z[j] * m[i * n + j]).sum()).collect()
    }
    pub fn apply_f(&self, w: usize, z: &[f64]) -> Vec<f64> {
        let m = &self.matsf[w];
        let n = self.dim;
        (0..n).map(|i| (0..n).map(|j| z[j] * m[i * n + j]).sum()).collect()
    }
    pub fn lookup(&self, mat: &[Rat]) -> Option<usize> {
        self.index.get(mat).copied()
    }
    pub fn from_word(&self, word: &[usize]) -> usize {
        word.iter().fold(0, |acc, &i| self.mul[acc][self.simple[i - 1]])
    }
}

fn reflection_matrix(alpha: &RVec) -> Vec<Rat> {
    let n = alpha.dim();
    let nn = alpha.dot(alpha);
    let cor = alpha.scale(Rat::from_integer(2) / nn);
    let mut m = vec![Rat::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { Rat::one() } else { Rat::zero() };
            m[i * n + j] = d - alpha.0[i] * cor.0[j];
        }
    }
    m
}

fn mat_mul(a: &[Rat], b: &[Rat], n: usize) -> Vec<Rat> {
    let mut c = vec![Rat::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn build_weyl(dim: usize, simple: &[RVec]) -> WeylGroup {
    let gens: Vec<Vec<Rat>> = simple.iter().map(reflection_matrix).collect();
    let mut id = vec![Rat::zero(); dim * dim];
    for i in 0..dim {
        id[i * dim + i] = Rat::one();
    }
    let mut mats = vec![id.clone()];
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    let mut index = HashMap::new();
    index.insert(id, 0usize);
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &w in &frontier {
            for (i, g) in gens.iter().enumerate() {
                let m = mat_mul(g, &mats[w], dim);
                if !index.contains_key(&m) {
                    let k = mats.len();
                    index.insert(m.clone(), k);
                    mats.push(m);
                    let mut word = vec![i + 1];
                    word.extend_from_slice(&words[w]);
                    words.push(word);
                    next.push(k);
                }
            }
        }
        frontier = next;
    }
    let order = mats.len();
    let mut mul = vec![vec![0usize; order]; order];
    for a in 0..order {
        for b in 0..order {
            mul[a][b] = index[&mat_mul(&mats[a], &mats[b], dim)];
        }
    }
    let inv = (0..order).map(|a| (0..order).find(|&b| mul[a][b] == 0).unwrap()).collect();
    let longest = (0..order).max_by_key(|&w| words[w].len()).unwrap();
    let simple_idx = gens.iter().map(|g| index[g]).collect();
    let matsf = mats.iter().map(|m| m.iter().map(rat_f64).collect()).collect();
    WeylGroup { dim, mats, matsf, words, mul, inv, longest, simple: simple_idx, index }
}

/// Element tau(t) w of the extended affine Weyl group, acting by z -> w z + t.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ext {
    pub t: RVec,
    pub w: usize,
}

/// Affine root alpha^(r), the function z -> mu_alpha r + (alpha, z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AffRoot {
    pub root: usize,
    pub r: i64,
}

/// Order in which descents are taken when computing reduced words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescentOrder {
    Smallest,
    Largest,
}

#[derive(Clone, Debug)]
pub struct Datum {
    pub family: Family,
    pub rank: usize,
    pub dim: usize,
    pub bullet: Bullet,
    pub q: f64,
    pub roots: Vec<Root>,
    root_index: HashMap<RVec, usize>,
    /// `simple[i-1]` is the root index of alpha_i.
    pub simple: Vec<usize>,
    pub psi: usize,
    pub theta: usize,
    pub lattice: Lattice,
    pub lattice_tilde: Lattice,
    /// Basis of the real span E of the lattices.
    pub space: Vec<RVec>,
    pub orbits: Vec<Orbit>,
    pub weyl: WeylGroup,
    /// `root_action[w][r]` is the root index of w(alpha_r).
    pub root_action: Vec<Vec<usize>>,
    pub rho: Vec<f64>,
    pub rho_tilde: Vec<f64>,
    /// alpha_{i*} = -w_0 alpha_i, stored 1-based.
    pub istar: Vec<usize>,
    pub is_dual: bool,
}

/// Orbit label used for multiplicity input: `"roots"` when all roots have
/// the same length, otherwise `"long"` and `"short"`.
pub fn orbit_labels(family: Family, rank: usize) -> Vec<&'static str> {
    match family {
        Family::Koornwinder if rank >= 2 => vec!["long", "short"],
        Family::Koornwinder => vec!["short"],
        _ => vec!["roots"],
    }
}

struct Parts {
    family: Family,
    dim: usize,
    simple: Vec<RVec>,
    bullet: Bullet,
    lattice: Lattice,
    lattice_tilde: Lattice,
    space: Vec<RVec>,
    q: f64,
    is_dual: bool,
}

enum KappaSource<'a> {
    Spec(&'a BTreeMap<String, KappaSpec>),
    Resolved(&'a dyn Fn(&RVec) -> Kappa),
}

fn standard_realization(family: Family, rank: usize) -> Result<(usize, Vec<RVec>, Lattice, Vec<RVec>), DatumError> {
    let n = rank;
    match family {
        Family::Gl => {
            if !(1..=2).contains(&n) {
                return Err(DatumError::UnsupportedDatum(format!("GL({}) is outside the supported range GL(2), GL(3)", n + 1)));
            }
            let d = n + 1;
            let simple = (0..n).map(|i| RVec::unit(d, i).sub(&RVec::unit(d, i + 1))).collect();
            let gens: Vec<RVec> = (0..d).map(|i| RVec::unit(d, i)).collect();
            Ok((d, simple, Lattice { gens: gens.clone() }, gens))
        }
        Family::SemisimpleA => {
            if !(1..=2).contains(&n) {
                return Err(DatumError::UnsupportedDatum(format!("A_{} is outside the supported range n <= 2", n)));
            }
            let d = n + 1;
            let simple: Vec<RVec> = (0..n).map(|i| RVec::unit(d, i).sub(&RVec::unit(d, i + 1))).collect();
            let gens = (1..=n)
                .map(|i| {
                    let frac = Rat::new(i as i64, d as i64);
                    RVec((0..d).map(|j| if j < i { Rat::one() - frac } else { -frac }).collect())
                })
                .collect();
            Ok((d, simple.clone(), Lattice { gens }, simple))
        }
        Family::Koornwinder => {
            if !(1..=3).contains(&n) {
                return Err(DatumError::UnsupportedDatum(format!("Koornwinder B_{} is outside the supported range n <= 3", n)));
            }
            let mut simple: Vec<RVec> = (0..n - 1).map(|i| RVec::unit(n, i).sub(&RVec::unit(n, i + 1))).collect();
            simple.push(RVec::unit(n, n - 1));
            let gens: Vec<RVec> = (0..n).map(|i| RVec::unit(n, i)).collect();
            Ok((n, simple, Lattice { gens: gens.clone() }, gens))
        }
    }
}

/// Build an initial datum with its multiplicity function.
pub fn build_datum(
    family: Family,
    rank: usize,
    bullet: Bullet,
    kappa: &BTreeMap<String, KappaSpec>,
    q: f64,
) -> Result<Datum, DatumError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(DatumError::InvalidQ(q));
    }
    if family == Family::Koornwinder && bullet == Bullet::U {
        return Err(DatumError::UnsupportedDatum("the Koornwinder datum is twisted (bullet = t)".into()));
    }
    let (dim, simple, lattice, space) = standard_realization(family, rank)?;
    let lattice_tilde = lattice.clone();
    let parts = Parts { family, dim, simple, bullet, lattice, lattice_tilde, space, q, is_dual: false };
    Datum::from_parts(parts, KappaSource::Spec(kappa))
}

/// Convenience constructor taking (label, spec) pairs.
pub fn datum(family: Family, rank: usize, bullet: Bullet, kappa: &[(&str, KappaSpec)], q: f64) -> Result<Datum, DatumError> {
    let map = kappa.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    build_datum(family, rank, bullet, &map, q)
}

fn lattice_parity(lat: &Lattice, v: &RVec) -> Result<Parity, DatumError> {
    let mut g = 0i64;
    for l in &lat.gens {
        let p = l.dot(v);
        let p = rat_to_int(p).ok_or_else(|| DatumError::UnsupportedDatum(format!("pairing {} with {} is not integral", l, v)))?;
        g = gcd(g, p);
    }
    match g {
        1 => Ok(Parity::Z),
        2 => Ok(Parity::TwoZ),
        _ => Err(DatumError::UnsupportedDatum(format!("lattice pairing with {} generates {}Z", v, g))),
    }
}

fn resolve_kappa(spec: &KappaSpec, lp: Parity, dp: Parity, label: &str) -> Result<Kappa, DatumError> {
    const EPS: f64 = 1e-12;
    let conflict = |what: &str, a: f64, b: f64| {
        DatumError::InvalidKappa(format!("orbit '{}': {} forced to equal {} but {} was given", label, what, a, b))
    };
    let k = spec.alpha;
    let mut k2 = spec.two_alpha;
    let mut k1 = spec.alpha1;
    let mut k21 = spec.two_alpha1;
    if lp == Parity::Z {
        match k2 {
            Some(v) if (v - k).abs() > EPS => return Err(conflict("kappa_2a", k, v)),
            _ => k2 = Some(k),
        }
    }
    if dp == Parity::Z {
        match k1 {
            Some(v) if (v - k).abs() > EPS => return Err(conflict("kappa_a1", k, v)),
            _ => k1 = Some(k),
        }
    }
    let k1v = k1.ok_or_else(|| DatumError::InvalidKappa(format!("orbit '{}': kappa at alpha^(1) must be given", label)))?;
    let k2v = k2.ok_or_else(|| DatumError::InvalidKappa(format!("orbit '{}': kappa at 2 alpha must be given", label)))?;
    if lp == Parity::Z {
        match k21 {
            Some(v) if (v - k1v).abs() > EPS => return Err(conflict("kappa_2a1", k1v, v)),
            _ => k21 = Some(k1v),
        }
    }
    if dp == Parity::Z {
        match k21 {
            Some(v) if (v - k2v).abs() > EPS => return Err(conflict("kappa_2a1", k2v, v)),
            _ => k21 = Some(k2v),
        }
    }
    let k21v = k21.ok_or_else(|| DatumError::InvalidKappa(format!("orbit '{}': kappa at 2 alpha^(1) must be given", label)))?;
    for v in [k, k1v, k2v, k21v] {
        if !v.is_finite() {
            return Err(DatumError::InvalidKappa(format!("orbit '{}': non-finite value", label)));
        }
    }
    Ok(Kappa { alpha: k, two_alpha: k2v, alpha1: k1v, two_alpha1: k21v })
}

impl Datum {
    fn from_parts(p: Parts, ks: KappaSource) -> Result<Datum, DatumError> {
        let dim = p.dim;
        let n = p.simple.len();
        let weyl = build_weyl(dim, &p.simple);
        // roots as the W_0-orbits of the simple roots, with simple-root coordinates
        let mut roots_v: Vec<(RVec, Vec<i64>)> = Vec::new();
        let mut seen: HashMap<RVec, usize> = HashMap::new();
        let mut stack: Vec<(RVec, Vec<i64>)> = (0..n)
            .map(|i| {
                let mut c = vec![0i64; n];
                c[i] = 1;
                (p.simple[i].clone(), c)
            })
            .collect();
        while let Some((v, c)) = stack.pop() {
            if seen.contains_key(&v) {
                continue;
            }
            seen.insert(v.clone(), roots_v.len());
            roots_v.push((v.clone(), c.clone()));
            for j in 0..n {
                let aj = &p.simple[j];
                let pairing = Rat::from_integer(2) * v.dot(aj) / aj.dot(aj);
                let k = rat_to_int(pairing).expect("Cartan integers");
                let nv = v.sub(&aj.scale(Rat::from_integer(k)));
                let mut nc = c.clone();
                nc[j] -= k;
                if !seen.contains_key(&nv) {
                    stack.push((nv, nc));
                }
            }
        }
        // positive roots first, sorted by height, then their negatives
        let mut pos: Vec<(RVec, Vec<i64>)> = roots_v.iter().filter(|(_, c)| c.iter().all(|&x| x >= 0)).cloned().collect();
        pos.sort_by(|a, b| {
            let ha: i64 = a.1.iter().sum();
            let hb: i64 = b.1.iter().sum();
            ha.cmp(&hb).then_with(|| b.1.cmp(&a.1))
        });
        let mut ordered = pos.clone();
        ordered.extend(pos.iter().map(|(v, c)| (v.neg(), c.iter().map(|x| -x).collect())));

        let mut norms: Vec<Rat> = ordered.iter().map(|(v, _)| v.dot(v)).collect();
        norms.sort();
        norms.dedup();
        let simply_laced = norms.len() == 1;
        let mut orbits_norm: Vec<Rat> = norms.clone();
        orbits_norm.reverse(); // long first
        let label_of = |nn: &Rat| -> String {
            if p.family != Family::Koornwinder {
                "roots".to_string()
            } else if simply_laced {
                "short".to_string()
            } else if *nn == norms[norms.len() - 1] {
                "long".to_string()
            } else {
                "short".to_string()
            }
        };

        let mut roots = Vec::new();
        let mut root_index = HashMap::new();
        for (v, c) in &ordered {
            let norm2 = v.dot(v);
            let mu = match p.bullet {
                Bullet::U => Rat::one(),
                Bullet::T => norm2 / Rat::from_integer(2),
            };
            let coroot = v.scale(Rat::from_integer(2) / norm2);
            let tilde = coroot.scale(mu);
            let tilde_coroot = v.scale(Rat::one() / mu);
            let orbit = orbits_norm.iter().position(|x| *x == norm2).unwrap();
            root_index.insert(v.clone(), roots.len());
            roots.push(Root {
                vf: v.to_f64(),
                v: v.clone(),
                coords: c.clone(),
                norm2,
                positive: c.iter().all(|&x| x >= 0),
                mu,
                muf: rat_f64(&mu),
                coroot_f: coroot.to_f64(),
                coroot,
                tilde_f: tilde.to_f64(),
                tilde,
                tilde_coroot,
                orbit,
            });
        }

        let mut orbits = Vec::new();
        for (oi, nn) in orbits_norm.iter().enumerate() {
            let rep = roots.iter().find(|r| r.orbit == oi && r.positive).unwrap();
            let lp = lattice_parity(&p.lattice, &rep.coroot)?;
            let dp = lattice_parity(&p.lattice_tilde, &rep.tilde_coroot)?;
            let case = match (lp, dp) {
                (Parity::Z, Parity::Z) => OrbitCase::Ultraspherical,
                (Parity::Z, Parity::TwoZ) => OrbitCase::JacobiFirst,
                (Parity::TwoZ, Parity::Z) => OrbitCase::JacobiSecond,
                (Parity::TwoZ, Parity::TwoZ) => OrbitCase::AskeyWilson,
            };
            let label = label_of(nn);
            let kappa = match &ks {
                KappaSource::Spec(map) => {
                    let spec = map.get(&label).ok_or_else(|| {
                        DatumError::InvalidKappa(format!("missing multiplicity for orbit '{}'", label))
                    })?;
                    resolve_kappa(spec, lp, dp, &label)?
                }
                KappaSource::Resolved(f) => f(&rep.v),
            };
            orbits.push(Orbit { label, norm2: *nn, kappa, lattice_parity: lp, dual_parity: dp, case });
        }
        if let KappaSource::Spec(map) = &ks {
            for k in map.keys() {
                if !orbits.iter().any(|o| &o.label == k) {
                    return Err(DatumError::InvalidKappa(format!("unknown orbit label '{}'", k)));
                }
            }
        }

        let simple: Vec<usize> = p.simple.iter().map(|v| root_index[v]).collect();
        let highest = |pred: &dyn Fn(&Root) -> bool| -> usize {
            (0..roots.len())
                .filter(|&i| roots[i].positive && pred(&roots[i]))
                .max_by_key(|&i| roots[i].height())
                .unwrap()
        };
        let min_norm = norms[0];
        let theta = highest(&|r: &Root| r.norm2 == min_norm);
        let psi = match p.bullet {
            Bullet::U => highest(&|_| true),
            Bullet::T => theta,
        };

        let root_action: Vec<Vec<usize>> = (0..weyl.order())
            .map(|w| roots.iter().map(|r| root_index[&weyl.apply(w, &r.v)]).collect())
            .collect();

        let mut rho = vec![0.0; dim];
        let mut rho_tilde = vec![0.0; dim];
        for r in roots.iter().filter(|r| r.positive) {
            let k = orbits[r.orbit].kappa;
            let tc = r.tilde_coroot.to_f64();
            for j in 0..dim {
                rho[j] += 0.5 * (k.alpha + k.alpha1) * tc[j];
                rho_tilde[j] += 0.5 * (k.alpha + k.two_alpha) * r.coroot_f[j];
            }
        }

        let w0 = weyl.longest;
        let istar = (0..n)
            .map(|i| {
                let img = weyl.apply(w0, &roots[simple[i]].v).neg();
                simple.iter().position(|&s| roots[s].v == img).unwrap() + 1
            })
            .collect();

        Ok(Datum {
            family: p.family,
            rank: n,
            dim,
            bullet: p.bullet,
            q: p.q,
            roots,
            root_index,
            simple,
            psi,
            theta,
            lattice: p.lattice,
            lattice_tilde: p.lattice_tilde,
            space: p.space,
            orbits,
            weyl,
            root_action,
            rho,
            rho_tilde,
            istar,
            is_dual: p.is_dual,
        })
    }

    /// The dual datum with the dual multiplicity function.
    pub fn dual(&self) -> Datum {
        let simple: Vec<RVec> = self.simple.iter().map(|&i| self.roots[i].tilde.clone()).collect();
        let parts = Parts {
            family: self.family,
            dim: self.dim,
            simple,
            bullet: self.bullet,
            lattice: self.lattice_tilde.clone(),
            lattice_tilde: self.lattice.clone(),
            space: self.space.clone(),
            q: self.q,
            is_dual: !self.is_dual,
        };
        let lookup = |v: &RVec| -> Kappa {
            let r = self.roots.iter().find(|r| &r.tilde == v).expect("dual root");
            self.orbits[r.orbit].kappa.dual()
        };
        Datum::from_parts(parts, KappaSource::Resolved(&lookup)).expect("dual of a valid datum")
    }

    /// Same datum with the multiplicity function replaced by its negative.
    pub fn with_negated_kappa(&self) -> Datum {
        let mut d = self.clone();
        for o in d.orbits.iter_mut() {
            o.kappa = o.kappa.negate();
        }
        let (rho, rho_tilde) = d.weighted_weyl_vectors();
        d.rho = rho;
        d.rho_tilde = rho_tilde;
        d
    }

    /// Same datum with a different multiplicity function given per orbit.
    pub fn with_kappa(&self, kappas: &[Kappa]) -> Datum {
        let mut d = self.clone();
        for (o, k) in d.orbits.iter_mut().zip(kappas) {
            o.kappa = *k;
        }
        let (rho, rho_tilde) = d.weighted_weyl_vectors();
        d.rho = rho;
        d.rho_tilde = rho_tilde;
        d
    }

    fn weighted_weyl_vectors(&self) -> (Vec<f64>, Vec<f64>) {
        let mut rho = vec![0.0; self.dim];
        let mut rho_tilde = vec![0.0; self.dim];
        for r in self.roots.iter().filter(|r| r.positive) {
            let k = self.orbits[r.orbit].kappa;
            let tc = r.tilde_coroot.to_f64();
            for j in 0..self.dim {
                rho[j] += 0.5 * (k.alpha + k.alpha1) * tc[j];
                rho_tilde[j] += 0.5 * (k.alpha + k.two_alpha) * r.coroot_f[j];
            }
        }
        (rho, rho_tilde)
    }

    pub fn root_index(&self, v: &RVec) -> Option<usize> {
        self.root_index.get(v).copied()
    }

    pub fn kappa(&self, root: usize) -> Kappa {
        self.orbits[self.roots[root].orbit].kappa
    }

    pub fn neg_root(&self, root: usize) -> usize {
        self.root_index[&self.roots[root].v.neg()]
    }

    pub fn positive_roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.roots.len()).filter(move |&i| self.roots[i].positive)
    }

    /// Simple root alpha_i, 1-based.
    pub fn alpha(&self, i: usize) -> &Root {
        &self.roots[self.simple[i - 1]]
    }

    pub fn istar(&self, i: usize) -> usize {
        self.istar[i - 1]
    }

    pub fn w0(&self) -> usize {
        self.weyl.longest
    }

    pub fn simply_laced(&self) -> bool {
        self.orbits.len() == 1
    }

    /// q^x for complex exponent x.
    pub fn qpow(&self, x: C64) -> C64 {
        (x * self.q.ln()).exp()
    }

    /// The translation vector psi-tilde.
    pub fn psi_tilde(&self) -> &RVec {
        &self.roots[self.psi].tilde
    }

    /// Askey-Wilson parameters (a, b, c, d) of a root.
    pub fn aw_params(&self, root: usize) -> [f64; 4] {
        let k = self.kappa(root);
        let q = self.q;
        let qa = q.powf(self.roots[root].muf);
        [
            q.powf(k.alpha + k.two_alpha),
            -q.powf(k.alpha - k.two_alpha),
            qa * q.powf(k.alpha1 + k.two_alpha1),
            -qa * q.powf(k.alpha1 - k.two_alpha1),
        ]
    }

    /// Dual Askey-Wilson parameters (a~, b~, c~, d~) of a root.
    pub fn aw_params_dual(&self, root: usize) -> [f64; 4] {
        let k = self.kappa(root).dual();
        let q = self.q;
        let qa = q.powf(self.roots[root].muf);
        [
            q.powf(k.alpha + k.two_alpha),
            -q.powf(k.alpha - k.two_alpha),
            qa * q.powf(k.alpha1 + k.two_alpha1),
            -qa * q.powf(k.alpha1 - k.two_alpha1),
        ]
    }

    /// kappa_w = sum of kappa_alpha over positive roots made negative by w.
    pub fn kappa_w(&self, w: usize) -> f64 {
        self.positive_roots()
            .filter(|&r| !self.roots[self.root_action[w][r]].positive)
            .map(|r| self.kappa(r).alpha)
            .sum()
    }

    pub fn is_dominant(&self, nu: &RVec) -> bool {
        self.positive_roots().all(|r| nu.dot(&self.roots[r].tilde_coroot) >= Rat::zero())
    }

    pub fn in_lattice_tilde(&self, v: &RVec) -> bool {
        lattice_contains(&self.lattice_tilde, v, self.dim)
    }

    // ---- extended affine Weyl group ----

    pub fn ext_id(&self) -> Ext {
        Ext { t: RVec::zero(self.dim), w: 0 }
    }

    pub fn translation(&self, t: &RVec) -> Ext {
        Ext { t: t.clone(), w: 0 }
    }

    pub fn finite(&self, w: usize) -> Ext {
        Ext { t: RVec::zero(self.dim), w }
    }

    pub fn compose(&self, a: &Ext, b: &Ext) -> Ext {
        Ext { t: a.t.add(&self.weyl.apply(a.w, &b.t)), w: self.weyl.mul[a.w][b.w] }
    }

    pub fn inverse(&self, a: &Ext) -> Ext {
        let wi = self.weyl.inv[a.w];
        Ext { t: self.weyl.apply(wi, &a.t).neg(), w: wi }
    }

    /// w z for w = tau(t) sigma.
    pub fn act(&self, a: &Ext, z: &[C64]) -> Vec<C64> {
        let mut v = self.weyl.apply_c(a.w, z);
        for (x, t) in v.iter_mut().zip(&a.t.0) {
            *x += rat_f64(t);
        }
        v
    }

    /// w^{-1} z.
    pub fn act_inv(&self, a: &Ext, z: &[C64]) -> Vec<C64> {
        let shifted: Vec<C64> = z.iter().zip(&a.t.0).map(|(x, t)| x - rat_f64(t)).collect();
        self.weyl.apply_c(self.weyl.inv[a.w], &shifted)
    }

    /// Simple reflection s_i of the affine Weyl group (i = 0 is affine).
    pub fn s(&self, i: usize) -> Ext {
        if i == 0 {
            let psi = &self.roots[self.psi];
            let refl = reflection_matrix(&psi.v);
            Ext { t: psi.tilde.clone(), w: self.weyl.lookup(&refl).unwrap() }
        } else {
            self.finite(self.weyl.simple[i - 1])
        }
    }

    pub fn from_word(&self, word: &[usize], omega: &Ext) -> Ext {
        let mut e = self.ext_id();
        for &i in word {
            e = self.compose(&e, &self.s(i));
        }
        self.compose(&e, omega)
    }

    /// Affine simple root a_i; a_0 = mu_psi c - psi.
    pub fn simple_affine(&self, i: usize) -> AffRoot {
        if i == 0 {
            AffRoot { root: self.neg_root(self.psi), r: 1 }
        } else {
            AffRoot { root: self.simple[i - 1], r: 0 }
        }
    }

    pub fn aff_positive(&self, a: &AffRoot) -> bool {
        a.r > 0 || (a.r == 0 && self.roots[a.root].positive)
    }

    /// Constant term mu_alpha r of an affine root.
    pub fn aff_const(&self, a: &AffRoot) -> f64 {
        self.roots[a.root].muf * a.r as f64
    }

    pub fn aff_eval(&self, a: &AffRoot, z: &[C64]) -> C64 {
        self.roots[a.root].v.pair(z) + self.aff_const(a)
    }

    /// Image w . a of an affine root.
    pub fn aff_act(&self, w: &Ext, a: &AffRoot) -> AffRoot {
        let nr = self.root_action[w.w][a.root];
        let shift = w.t.dot(&self.roots[nr].tilde_coroot);
        let k = rat_to_int(shift).expect("translation pairs integrally with dual coroots");
        AffRoot { root: nr, r: a.r - k }
    }

    /// Length by counting positive affine roots sent to negative ones, over
    /// a finite window of levels.
    pub fn length(&self, w: &Ext) -> usize {
        let mut count = 0;
        for (ri, root) in self.roots.iter().enumerate() {
            let nr = self.root_action[w.w][ri];
            let k = rat_to_int(w.t.dot(&self.roots[nr].tilde_coroot)).unwrap();
            let rmin = if root.positive { 0 } else { 1 };
            let rmax = k.abs() + 1;
            for r in rmin..=rmax.max(rmin) {
                let img = AffRoot { root: nr, r: r - k };
                if !self.aff_positive(&img) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Positive affine roots a with w a negative, i.e. R^+ cap w^{-1} R^-.
    pub fn inversion_set(&self, w: &Ext) -> Vec<AffRoot> {
        let mut out = Vec::new();
        for (ri, root) in self.roots.iter().enumerate() {
            let nr = self.root_action[w.w][ri];
            let k = rat_to_int(w.t.dot(&self.roots[nr].tilde_coroot)).unwrap();
            let rmin = if root.positive { 0 } else { 1 };
            for r in rmin..=(k.abs() + 1).max(rmin) {
                let a = AffRoot { root: ri, r };
                if !self.aff_positive(&self.aff_act(w, &a)) {
                    out.push(a);
                }
            }
        }
        out
    }

    /// Reduced expression w = s_{i_1} ... s_{i_k} u with u of length zero.
    pub fn reduced_word(&self, w: &Ext, order: DescentOrder) -> (Vec<usize>, Ext) {
        let mut cur = w.clone();
        let mut word = Vec::new();
        let idx: Vec<usize> = match order {
            DescentOrder::Smallest => (0..=self.rank).collect(),
            DescentOrder::Largest => (0..=self.rank).rev().collect(),
        };
        loop {
            let inv = self.inverse(&cur);
            let found = idx.iter().copied().find(|&i| !self.aff_positive(&self.aff_act(&inv, &self.simple_affine(i))));
            match found {
                Some(i) => {
                    word.push(i);
                    cur = self.compose(&self.s(i), &cur);
                }
                None => return (word, cur),
            }
        }
    }

    /// (u(nu), v(nu)): the minimal length element of tau(nu) W_0 and
    /// v(nu) = u(nu)^{-1} tau(nu) in W_0.
    pub fn u_v(&self, nu: &RVec) -> (Ext, usize) {
        let t = self.translation(nu);
        let (best, _) = (0..self.weyl.order())
            .map(|s| {
                let e = self.compose(&t, &self.finite(s));
                let l = self.length(&e);
                (e, l)
            })
            .min_by_key(|(_, l)| *l)
            .unwrap();
        let v = self.compose(&self.inverse(&best), &t);
        debug_assert!(v.t.is_zero());
        (best, v.w)
    }

    /// Write nu = nu1 - nu2 with nu1, nu2 dominant elements of the dual-side
    /// lattice, keeping the total translation length small.
    pub fn dominant_split(&self, nu: &RVec) -> (RVec, RVec) {
        if self.is_dominant(nu) {
            return (nu.clone(), RVec::zero(self.dim));
        }
        let gens = &self.lattice_tilde.gens;
        let m = gens.len();
        let bound = 3i64;
        let mut best: Option<(i64, RVec, RVec)> = None;
        let total = (2 * bound + 1).pow(m as u32);
        for code in 0..total {
            let mut c = code;
            let coeffs: Vec<i64> = (0..m)
                .map(|_| {
                    let x = c % (2 * bound + 1) - bound;
                    c /= 2 * bound + 1;
                    x
                })
                .collect();
            let nu2 = self.lattice_tilde.combine(&coeffs);
            if !self.is_dominant(&nu2) {
                continue;
            }
            let nu1 = nu.add(&nu2);
            if !self.is_dominant(&nu1) {
                continue;
            }
            let cost = self.dominant_length(&nu1) + self.dominant_length(&nu2);
            if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
                best = Some((cost, nu1, nu2));
            }
        }
        let (_, a, b) = best.expect("dominant split within search box");
        (a, b)
    }

    fn dominant_length(&self, nu: &RVec) -> i64 {
        self.positive_roots().map(|r| rat_to_int(nu.dot(&self.roots[r].tilde_coroot)).unwrap().abs()).sum()
    }

    /// The W_0-orbit of a vector.
    pub fn orbit_of(&self, v: &RVec) -> Vec<RVec> {
        let mut out: Vec<RVec> = Vec::new();
        for w in 0..self.weyl.order() {
            let x = self.weyl.apply(w, v);
            if !out.contains(&x) {
                out.push(x);
            }
        }
        out
    }

    /// Coset representatives of W_0 / W_{0,v}, one per orbit element, paired
    /// with the orbit element w v.
    pub fn coset_reps(&self, v: &RVec) -> Vec<(usize, RVec)> {
        let mut out: Vec<(usize, RVec)> = Vec::new();
        let mut order: Vec<usize> = (0..self.weyl.order()).collect();
        order.sort_by_key(|&w| self.weyl.length(w));
        for w in order {
            let x = self.weyl.apply(w, v);
            if !out.iter().any(|(_, y)| *y == x) {
                out.push((w, x));
            }
        }
        out
    }

    /// delta_s^vee: half the sum of the coroots of the positive short roots.
    pub fn delta_s_vee(&self) -> Vec<f64> {
        let min = self.roots.iter().map(|r| r.norm2).min().unwrap();
        let mut v = vec![0.0; self.dim];
        for r in self.positive_roots().filter(|&r| self.roots[r].norm2 == min) {
            for j in 0..self.dim {
                v[j] += 0.5 * self.roots[r].coroot_f[j];
            }
        }
        v
    }

    pub fn describe(&self) -> String {
        format!(
            "{} rank {} (bullet {:?}, q = {}), |W_0| = {}, {} roots",
            self.family.name(),
            self.rank,
            self.bullet,
            self.q,
            self.weyl.order(),
            self.roots.len()
        )
    }
}

fn lattice_contains(lat: &Lattice, v: &RVec, dim: usize) -> bool {
    // solve v = sum m_i g_i over Q by Gaussian elimination and test integrality
    let m = lat.gens.len();
    let mut a: Vec<Vec<Rat>> = (0..dim).map(|r| {
        let mut row: Vec<Rat> = lat.gens.iter().map(|g| g.0[r]).collect();
        row.push(v.0[r]);
        row
    }).collect();
    let mut piv_cols = Vec::new();
    let mut row = 0;
    for col in 0..m {
        if let Some(pr) = (row..dim).find(|&r| !a[r][col].is_zero()) {
            a.swap(row, pr);
            let p = a[row][col];
            for c in 0..=m {
                a[row][c] /= p;
            }
            for r in 0..dim {
                if r != row && !a[r][col].is_zero() {
                    let f = a[r][col];
                    for c in 0..=m {
                        let x = a[row][c];
                        a[r][c] -= f * x;
                    }
                }
            }
            piv_cols.push(col);
            row += 1;
        }
    }
    if (row..dim).any(|r| !a[r][m].is_zero()) {
        return false;
    }
    (0..row).all(|r| a[r][m].is_integer())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn koorn(n: usize) -> Datum {
        let mut k = vec![("short", KappaSpec::full(Kappa { alpha: 0.3, two_alpha: 0.1, alpha1: 0.2, two_alpha1: -0.1 }))];
        if n >= 2 {
            k.push(("long", KappaSpec::uniform(0.25)));
        }
        datum(Family::Koornwinder, n, Bullet::T, &k, 0.4).unwrap()
    }

    #[test]
    fn group_orders() {
        let a2 = datum(Family::SemisimpleA, 2, Bullet::U, &[("roots", KappaSpec::uniform(0.2))], 0.5).unwrap();
        assert_eq!(a2.weyl.order(), 6);
        assert_eq!(a2.roots.len(), 6);
        assert_eq!(koorn(2).weyl.order(), 8);
        assert_eq!(koorn(3).weyl.order(), 48);
        assert_eq!(koorn(3).roots.len(), 18);
    }

    #[test]
    fn koornwinder_short_orbit_is_askey_wilson() {
        let d = koorn(2);
        let short = d.orbits.iter().find(|o| o.label == "short").unwrap();
        assert_eq!(short.case, OrbitCase::AskeyWilson);
        let long = d.orbits.iter().find(|o| o.label == "long").unwrap();
        assert_eq!(long.case, OrbitCase::Ultraspherical);
        assert_eq!(d.roots[d.psi].v, RVec::from_ints(&[1, 0]));
    }

    #[test]
    fn rank_one_rho() {
        let d = datum(Family::Koornwinder, 1, Bullet::T, &[("short", KappaSpec::full(Kappa::uniform(0.3)))], 0.5).unwrap();
        // rho = (kappa + kappa_1) alpha~^vee / 2 with alpha~^vee = 2 e_1
        assert!((d.rho[0] - 0.6).abs() < 1e-14);
        assert!((d.rho_tilde[0] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn conflicting_kappa_rejected() {
        let bad = KappaSpec { alpha: 0.3, two_alpha: Some(0.1), alpha1: None, two_alpha1: None };
        let e = datum(Family::Gl, 2, Bullet::U, &[("roots", bad)], 0.5).unwrap_err();
        assert!(matches!(e, DatumError::InvalidKappa(_)));
        let e = datum(Family::Gl, 3, Bullet::U, &[("roots", KappaSpec::uniform(0.1))], 0.5).unwrap_err();
        assert!(matches!(e, DatumError::UnsupportedDatum(_)));
    }

    #[test]
    fn dual_is_involutive() {
        let d = koorn(2);
        let dd = d.dual().dual();
        for (a, b) in d.orbits.iter().zip(&dd.orbits) {
            assert_eq!(a.kappa, b.kappa);
        }
        let dual = d.dual();
        let s = dual.orbits.iter().find(|o| o.label == "short").unwrap().kappa;
        assert_eq!(s.two_alpha, 0.2);
        assert_eq!(s.alpha1, 0.1);
    }

    #[test]
    fn translation_word_rank_one() {
        let d = koorn(1);
        let t = d.translation(&RVec::from_ints(&[1]));
        let (word, u) = d.reduced_word(&t, DescentOrder::Smallest);
        assert_eq!(word, vec![0, 1]);
        assert_eq!(u, d.ext_id());
        assert_eq!(d.length(&t), 2);
    }

    #[test]
    fn gl2_translation_is_length_zero() {
        let d = datum(Family::Gl, 1, Bullet::U, &[("roots", KappaSpec::uniform(0.2))], 0.5).unwrap();
        let t = d.translation(&RVec::from_ints(&[1, 0]));
        let (u, v) = d.u_v(&RVec::from_ints(&[1, 0]));
        assert_eq!(d.length(&u), 0);
        assert_eq!(d.compose(&u, &d.finite(v)), t);
        let (word, _) = d.reduced_word(&u, DescentOrder::Smallest);
        assert!(word.is_empty());
    }

    #[test]
    fn lengths_agree_with_descents() {
        for d in [koorn(2), koorn(3)] {
            for a in -2..=2i64 {
                for b in -2..=2i64 {
                    let mut t = vec![a, b];
                    t.resize(d.dim, 1);
                    for w in 0..d.weyl.order() {
                        let e = Ext { t: RVec::from_ints(&t), w };
                        let (word, u) = d.reduced_word(&e, DescentOrder::Largest);
                        assert_eq!(d.length(&u), 0);
                        assert_eq!(word.len(), d.length(&e));
                        assert_eq!(d.from_word(&word, &u), e);
                    }
                }
            }
        }
    }

    #[test]
    fn braid_relations_b3() {
        let d = koorn(3);
        let s: Vec<Ext> = (0..=3).map(|i| d.s(i)).collect();
        let prod = |w: &[usize]| w.iter().fold(d.ext_id(), |acc, &i| d.compose(&acc, &s[i]));
        assert_eq!(prod(&[1, 2, 1]), prod(&[2, 1, 2]));
        assert_eq!(prod(&[2, 3, 2, 3]), prod(&[3, 2, 3, 2]));
        assert_eq!(prod(&[1, 3]), prod(&[3, 1]));
        for i in 0..=3 {
            assert_eq!(prod(&[i, i]), d.ext_id());
        }
        // s_0 is the reflection in the affine root mu_psi c - psi
        let a0 = d.simple_affine(0);
        let img = d.aff_act(&s[0], &a0);
        assert!(!d.aff_positive(&img));
    }

    #[test]
    fn istar_a2_swaps() {
        let d = datum(Family::Gl, 2, Bullet::U, &[("roots", KappaSpec::uniform(0.2))], 0.5).unwrap();
        assert_eq!(d.istar, vec![2, 1]);
        let b = koorn(2);
        assert_eq!(b.istar, vec![1, 2]);
    }

    #[test]
    fn weight_lattice_contains_roots() {
        let d = datum(Family::SemisimpleA, 2, Bullet::U, &[("roots", KappaSpec::uniform(0.2))], 0.5).unwrap();
        for r in &d.roots {
            assert!(d.in_lattice_tilde(&r.v));
        }
        let split = d.dominant_split(&d.roots[d.neg_root(d.psi)].v);
        assert!(d.is_dominant(&split.0) && d.is_dominant(&split.1));
    }
}
