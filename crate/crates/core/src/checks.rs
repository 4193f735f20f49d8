//! Verification suites. Every check samples points with a seeded sampler,
//! evaluates one identity and reports the worst residual against its
//! tolerance. Points that land near a pole are redrawn a bounded number of
//! times and counted.
//!
//! Suites run either on fixed reference data ([`run_reference`]) or on one
//! configured datum ([`run_on`]). Both go through the same samplers.

use std::sync::Arc;
use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::cfunction::{
    addition_root_residual, all_integral, alternative_residual, c_sph, c_sph_integral, c_xi, elliptic_xi,
    relationsc_residual, require_twisted_equal, towards_riemann_residual, triple_product_residual, twisted_xi,
    CFunctionError, XiFunction,
};
use crate::connection::{
    connection_identity_residual, connection_matrix, generator, m_simple, m_simple_cus, reflection_residual,
    reflectionless, rel_frobenius, word_product, yb_residual,
};
use crate::harish_chandra::{
    ba_box, gamma_hat_box_defect, phi, phi_from_gamma_hat, phi_rank_one, HcSeries, Numerics,
};
use crate::operators::{
    l_explicit, lemma_c_equals_a, rmkc_extract, t_hat, test_function, y_dominant_with, y_operator, DiffReflOp,
};
use crate::qkz::{
    alternating, braid_order, duality_residual, max_entry_deviation, random_element, test_vector, QkzSystem,
};
use crate::qseries::{lattice_theta, theta, theta_prod, QContext};
use crate::root_data::{datum, Bullet, Datum, DescentOrder, Family, Kappa, KappaSpec, OrbitCase, Parity, RVec};
use crate::sample::{dual_simple_forms, point_from_values, simple_forms, Sampler};
use crate::series::eigenvalue;

/// Whether the residual must stay below or above the tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Clone, Debug, Serialize)]
pub struct WorstPoint {
    pub z: Vec<[f64; 2]>,
    pub xi: Vec<[f64; 2]>,
}

/// One evaluated sample, kept for point dumps.
#[derive(Clone, Debug, Serialize)]
pub struct SamplePoint {
    pub residual: f64,
    pub z: Vec<[f64; 2]>,
    pub xi: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub data: Vec<String>,
    pub residual: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    pub samples: usize,
    pub resampled: usize,
    pub wall_ms: u128,
    pub worst: Option<WorstPoint>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub points: Vec<SamplePoint>,
}

/// Run-wide options: seed, sample count override, truncation override and
/// a factor applied to every tolerance.
#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub seed: u64,
    pub samples: Option<usize>,
    pub trunc: Option<usize>,
    pub tol_scale: f64,
    pub factor_cutoff: Option<f64>,
    pub pole_guard: Option<f64>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { seed: 20240531, samples: None, trunc: None, tol_scale: 1.0, factor_cutoff: None, pole_guard: None }
    }
}

impl CheckOptions {
    fn n(&self, default: usize) -> usize {
        self.samples.unwrap_or(default).max(1)
    }
    fn trunc(&self, default: usize) -> usize {
        self.trunc.unwrap_or(default)
    }
    pub fn numerics(&self, d: &Datum, trunc: usize) -> Numerics {
        let mut num = Numerics::new(d, trunc);
        if let Some(c) = self.factor_cutoff {
            num.ctx.factor_cutoff = c;
        }
        if let Some(g) = self.pole_guard {
            num.pole_guard = g;
        }
        num
    }
    /// Truncation ladder ending at the requested height.
    fn ladder(&self, top: usize) -> [usize; 3] {
        let t = self.trunc(top).max(3);
        [t / 3, 2 * t / 3, t]
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite '{0}'")]
    Unknown(String),
    #[error("suite '{suite}' does not apply to {datum}: {reason}")]
    Unsupported { suite: String, datum: String, reason: String },
}

/// Default tolerances. Names of the form `a.b.c` fall back to `a.b`.
pub const POLICY: &[(&str, f64)] = &[
    ("theta.functional_equation", 1e-10),
    ("theta.addition", 1e-11),
    ("theta.lattice_quasi_periodicity", 1e-10),
    ("theta.triple_product", 1e-10),
    ("hc.rank_one_oracle", 1e-8),
    ("hc.eigen", 1e-8),
    ("hc.bispectral", 1e-8),
    ("operators.c_translation_equals_a", 1e-12),
    ("operators.extracted_vs_explicit", 1e-10),
    ("operators.hecke", 1e-10),
    ("operators.braid", 1e-10),
    ("operators.y_commute", 1e-10),
    ("operators.y_word_independence", 1e-10),
    ("operators.l_commute", 1e-10),
    ("operators.equivariance", 1e-10),
    ("connection.rank_one_identity", 1e-9),
    ("connection.identity", 1e-6),
    ("connection.sparsity", 1e-12),
    ("connection.ultraspherical_agreement", 1e-11),
    ("connection.translation_invariance", 1e-9),
    ("connection.cocycle", 1e-8),
    ("connection.word_independence", 1e-9),
    ("yb.yang_baxter", 1e-8),
    ("yb.reflection", 1e-8),
    ("reflectionless.m_simple", 1e-10),
    ("reflectionless.phi_invariance", 1e-7),
    ("qkz.word_independence", 1e-10),
    ("qkz.duality_symmetry", 1e-10),
    ("qkz.braid_generators", 1e-10),
    ("qkz.nabla_action", 1e-10),
    ("qkz.translation_compatibility", 1e-10),
    ("qkz.r0_product", 1e-7),
    ("cfun.relationsc", 1e-8),
    ("cfun.alternative", 1e-8),
    ("cfun.quasi_invariance", 1e-10),
    ("cfun.integral_branch", 1e-11),
    ("cfun.towards_riemann", 1e-8),
    ("cfun.equivalence_chain", 0.0),
    ("cfun.negative_control", 1e-2),
    ("cfun.ridroot", 1e-8),
    ("gammahat.box", 1e-9),
    ("duality", 1e-7),
];

pub fn tolerance(name: &str) -> f64 {
    let mut key = name;
    loop {
        if let Some((_, t)) = POLICY.iter().find(|(n, _)| *n == key) {
            return *t;
        }
        match key.rfind('.') {
            Some(p) => key = &key[..p],
            None => panic!("no tolerance for {}", name),
        }
    }
}

pub const SUITES: &[&str] =
    &["theta", "eigen", "operators", "duality", "connection", "yb", "reflectionless", "qkz", "cfun", "gammahat"];

fn canonical(suite: &str) -> Result<&str, SuiteError> {
    match suite {
        "cocycle" => Ok("connection"),
        s if SUITES.contains(&s) || s == "all" => Ok(s),
        s => Err(SuiteError::Unknown(s.to_string())),
    }
}

/// Runs a suite on the fixed reference data; `all` runs every suite.
pub fn run_reference(suite: &str, opts: &CheckOptions) -> Result<Vec<CheckRecord>, SuiteError> {
    let suite = canonical(suite)?;
    if suite == "all" {
        return Ok(SUITES.iter().flat_map(|s| run_reference(s, opts).unwrap()).collect());
    }
    let mut s = Sampler::new(suite_seed(opts.seed, suite));
    Ok(match suite {
        "theta" => ref_theta(opts, &mut s),
        "eigen" => ref_eigen(opts, &mut s),
        "operators" => ref_operators(opts, &mut s),
        "duality" => ref_duality(opts, &mut s),
        "connection" => ref_connection(opts, &mut s),
        "yb" => ref_yb(opts, &mut s),
        "reflectionless" => ref_reflectionless(opts, &mut s),
        "qkz" => ref_qkz(opts, &mut s),
        "cfun" => ref_cfun(opts, &mut s),
        _ => ref_gammahat(opts, &mut s),
    })
}

/// Runs a suite on one datum. A suite that does not apply to the datum is
/// an error; `all` runs the applicable suites and lists the others in a
/// note on the first record.
pub fn run_on(suite: &str, d: &Datum, opts: &CheckOptions) -> Result<Vec<CheckRecord>, SuiteError> {
    let suite = canonical(suite)?;
    if suite == "all" {
        let mut out = Vec::new();
        let mut skipped = Vec::new();
        for name in SUITES {
            match run_on(name, d, opts) {
                Ok(r) => out.extend(r),
                Err(e) => skipped.push(e.to_string()),
            }
        }
        if let Some(first) = out.first_mut() {
            first.notes.extend(skipped.into_iter().map(|e| format!("not run: {}", e)));
        }
        return Ok(out);
    }
    let unsupported = |reason: &str| SuiteError::Unsupported {
        suite: suite.to_string(),
        datum: d.describe(),
        reason: reason.to_string(),
    };
    let mut s = Sampler::new(suite_seed(opts.seed, suite));
    let ad = Arc::new(d.clone());
    let mut out = Vec::new();
    let mut push = |t: Tally| out.push(t.finish());
    match suite {
        "theta" => {
            let mut t = Tally::new("theta.functional_equation", A_FE, opts);
            theta_fe(&mut t, (d.q, d.q), opts.n(200), &mut s);
            push(t);
            let mut t = Tally::new("theta.addition", A_RID, opts);
            theta_addition(&mut t, (d.q, d.q), opts.n(100), &mut s);
            push(t);
            let mut t = Tally::new("theta.lattice_quasi_periodicity", A_QP, opts);
            lattice_quasi_periodicity(&mut t, d, opts.n(20), &mut s);
            push(t);
            if lattice_is_zn(d) {
                let mut t = Tally::new("theta.triple_product", A_JTP, opts);
                triple_product(&mut t, d, opts.n(20), &mut s);
                push(t);
            }
        }
        "eigen" => {
            if rank_one_plain(d) {
                let mut t = Tally::new("hc.rank_one_oracle", A_ORACLE, opts);
                rank_one_oracle(&mut t, d, opts.n(20), opts.trunc(30), &mut s);
                push(t);
            }
            let mut t = Tally::new("hc.eigen", A_EE, opts);
            eigen(&mut t, &ad, opts.n(4), opts.ladder(24), (-2.5, -1.5), &mut s);
            push(t);
            let mut t = Tally::new("hc.bispectral", A_BS, opts);
            bispectral(&mut t, d, opts.n(4), opts.trunc(24), &mut s);
            push(t);
        }
        "operators" => {
            for t in operator_tallies(std::slice::from_ref(&ad), opts, &mut s, false) {
                push(t);
            }
        }
        "duality" => {
            let mut t = Tally::new("duality", A_DUAL, opts);
            duality(&mut t, d, opts.n(20), opts.trunc(24), &mut s);
            push(t);
        }
        "connection" => {
            if rank_one_plain(d) {
                let mut t = Tally::new("connection.rank_one_identity", A_CONN1, opts);
                rank_one_connection(&mut t, d, opts.n(10), &mut s);
                push(t);
            }
            let mut t = Tally::new("connection.identity", A_CONN, opts);
            for i in 1..=d.rank {
                truncated_connection(&mut t, d, i, opts.n(3), opts.ladder(24), &mut s);
            }
            push(t);
            let mut t = Tally::new("connection.sparsity", A_SPARSE, opts);
            sparsity(&mut t, d, opts.n(50), &mut s);
            push(t);
            let cus = ultraspherical_roots(d);
            if !cus.is_empty() {
                let mut t = Tally::new("connection.ultraspherical_agreement", A_CUS, opts);
                cus_agreement(&mut t, d, &cus, opts.n(10), &mut s);
                push(t);
            }
            let mut t = Tally::new("connection.translation_invariance", A_TRANS, opts);
            translation_invariance(&mut t, d, opts.n(10), &mut s);
            push(t);
            let mut t = Tally::new("connection.cocycle", A_CP, opts);
            cocycle(&mut t, d, opts.n(10), &mut s);
            push(t);
            let mut t = Tally::new("connection.word_independence", A_WORD, opts);
            connection_words(&mut t, d, opts.n(5), &mut s);
            push(t);
        }
        "yb" => {
            if d.family != Family::Koornwinder || d.rank < 2 {
                return Err(unsupported("needs a Koornwinder datum of rank at least 2"));
            }
            if d.rank >= 3 {
                let mut t = Tally::new("yb.yang_baxter", A_YB, opts);
                yang_baxter(&mut t, d, opts.n(10), &mut s);
                push(t);
            }
            let mut t = Tally::new("yb.reflection", A_RE, opts);
            reflection(&mut t, d, opts.n(10), &mut s);
            push(t);
        }
        "reflectionless" => {
            let cert = reflectionless(d);
            if !cert.holds {
                return Err(unsupported("kappa does not satisfy the reflectionless conditions"));
            }
            let mut t = Tally::new("reflectionless.m_simple", A_BA, opts);
            reflectionless_m(&mut t, d, opts.n(20), &mut s);
            push(t);
            if ba_box(d).is_some() {
                let mut t = Tally::new("reflectionless.phi_invariance", A_PHIINV, opts);
                phi_invariance(&mut t, d, opts.n(10), opts.trunc(8), &mut s);
                push(t);
            }
        }
        "qkz" => {
            let sys = QkzSystem::new(d);
            let sys_t = QkzSystem::new(&sys.dual);
            for t in qkz_tallies(&[(d, &sys, &sys_t)], opts, &mut s) {
                push(t);
            }
            let mut t = Tally::new("qkz.r0_product", A_R0, opts);
            r0_product(&mut t, d, &d.roots[d.theta].v.clone(), opts.n(3), &mut s);
            push(t);
        }
        "cfun" => {
            if let Err(e) = require_twisted_equal(d) {
                return Err(unsupported(&e.to_string()));
            }
            for t in cfun_tallies(d, opts, &mut s) {
                push(t);
            }
        }
        _ => {
            if ba_box(d).is_none() {
                return Err(unsupported("kappa_alpha is not a nonpositive multiple of mu_alpha / 4 on every root"));
            }
            let mut t = Tally::new("gammahat.box", A_BOX, opts);
            gamma_hat_box(&mut t, d, opts.n(5), opts.trunc(20), &mut s);
            push(t);
        }
    }
    Ok(out)
}

fn suite_seed(seed: u64, suite: &str) -> u64 {
    let k = SUITES.iter().position(|s| *s == suite).unwrap_or(0) as u64;
    seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k + 1))
}

// ---------------------------------------------------------------- anchors

const A_FE: &str = "theta(q^r x) against the quasi-periodicity factor";
const A_RID: &str = "three term addition formula for theta";
const A_QP: &str = "theta_Lambda(z + lambda) = q^{-|lambda|^2/2 - (lambda, z)} theta_Lambda(z)";
const A_JTP: &str = "lattice sum of Z^n against the Jacobi triple product";
const A_ORACLE: &str = "recurrence against the 8W7 closed form, rank one";
const A_EE: &str = "L Phi = eigenvalue Phi for the truncated series";
const A_BS: &str = "dual operator in xi on Phi(z, .), eigenvalue from the dual datum";
const A_CA: &str = "c_{tau(psi~)} = A";
const A_EXTRACT: &str = "translation part of the Y orbit sum = explicit L";
const A_HECKE: &str = "(T_i - q^k)(T_i + q^-k) = 0";
const A_BRAID: &str = "braid relations of the Demazure-Lusztig operators";
const A_YCOMM: &str = "[Y^nu, Y^mu] = 0";
const A_YWORD: &str = "Y^nu from two reduced words of tau(nu)";
const A_LCOMM: &str = "[L_psi~, L_mu] = 0 on symmetric functions";
const A_EQUIV: &str = "L commutes with the W_0 action";
const A_DUAL: &str = "Phi(z, xi; D) = Phi(xi, z; dual D)";
const A_CONN1: &str = "Phi(s z) = m_ee Phi(z) + m_off Phi(z, s xi), closed form";
const A_CONN: &str = "connection identity for the truncated series";
const A_SPARSE: &str = "M^{s_i} has entries only at (tau, tau) and (tau s_{i*}, tau)";
const A_CUS: &str = "general m against the q-ultraspherical simplification";
const A_TRANS: &str = "M^{w0}(z + nu, xi + lambda) = M^{w0}(z, xi)";
const A_CP: &str = "M^{s t}(z) = M^s(z) M^t(s^-1 z) for random s, t";
const A_WORD: &str = "M^{w0} from two reduced words";
const A_YB: &str = "dynamical Yang-Baxter equation";
const A_RE: &str = "dynamical reflection equation";
const A_BA: &str = "m_ee = 0 and m_off = 1 for reflectionless kappa";
const A_PHIINV: &str = "Phi(w z, w0 w w0 xi) = Phi(z, xi) from the finite Gamma-hat sum";
const A_QKZ_WORD: &str = "C_{(w, w~)} from two reduced words";
const A_QKZ_DUAL: &str = "C(z, xi; D) against C~(xi, z; dual D) with inverted indices";
const A_QKZ_BRAID: &str = "both sides of every braid relation give equal C-products";
const A_NABLA: &str = "nabla(g1) nabla(g2) = nabla(g1 g2) on test vectors";
const A_COCC: &str = "C_(tau(nu), e) and C_(e, tau(lambda)) commute as a cocycle";
const A_R0: &str = "leading coefficient of R_lambda deep in the chamber";
const A_RELC: &str = "c_sph(z, xi) = m_ee c_sph(s_i z, xi) + m_off c_sph(s_i z, s_{i*} xi)";
const A_ALT: &str = "reflection laws of Xi_sph at an Askey-Wilson simple root";
const A_QINV: &str = "lattice quasi-invariance of Xi_sph";
const A_INT: &str = "general and integral-lattice expressions of c_sph";
const A_TR: &str = "three term relation for Xi_sph at a q-ultraspherical simple root";
const A_CHAIN: &str = "relationsc and the three term relation agree on pass/fail";
const A_NEG: &str = "a non-solution violates relationsc; a non-quasi-invariant Xi is rejected";
const A_RIDROOT: &str = "higher rank addition formula for theta_Lambda";
const A_BOX: &str = "Gamma-hat vanishes outside the box";

// ---------------------------------------------------------------- data

pub fn gl3(q: f64) -> Datum {
    datum(Family::Gl, 2, Bullet::U, &[("roots", KappaSpec::uniform(0.25))], q).unwrap()
}

fn short_kappa() -> Kappa {
    Kappa { alpha: 0.3, two_alpha: 0.1, alpha1: 0.2, two_alpha1: -0.1 }
}

pub fn koornwinder(n: usize, q: f64) -> Datum {
    datum(Family::Koornwinder, n, Bullet::T, &[("long", KappaSpec::uniform(0.25)), ("short", KappaSpec::full(short_kappa()))], q)
        .unwrap()
}

pub fn aw1(k: Kappa, q: f64) -> Datum {
    datum(Family::Koornwinder, 1, Bullet::T, &[("short", KappaSpec::full(k))], q).unwrap()
}

pub fn aw1_default() -> Datum {
    aw1(Kappa { alpha: 0.27, two_alpha: 0.11, alpha1: 0.18, two_alpha1: -0.07 }, 0.45)
}

pub fn semisimple_a(n: usize, k: f64, q: f64) -> Datum {
    datum(Family::SemisimpleA, n, Bullet::U, &[("roots", KappaSpec::uniform(k))], q).unwrap()
}

/// B_2 with a multiplicity function satisfying the reflectionless conditions.
pub fn b2_reflectionless(q: f64) -> Datum {
    let short = Kappa { alpha: -0.5, two_alpha: 0.0, alpha1: -0.5, two_alpha1: 0.0 };
    datum(Family::Koornwinder, 2, Bullet::T, &[("long", KappaSpec::uniform(-0.5)), ("short", KappaSpec::full(short))], q).unwrap()
}

fn lattice_is_zn(d: &Datum) -> bool {
    d.lattice.gens.len() == d.dim && d.lattice.gens.iter().enumerate().all(|(k, g)| *g == RVec::unit(d.dim, k))
}

/// Rank one without a central direction, where Phi is a function of alpha_1(z) alone.
fn rank_one_plain(d: &Datum) -> bool {
    d.rank == 1 && d.space.len() == 1
}

fn ultraspherical_roots(d: &Datum) -> Vec<usize> {
    (1..=d.rank).filter(|&i| d.orbits[d.alpha(i).orbit].case == OrbitCase::Ultraspherical).collect()
}

// ---------------------------------------------------------------- tally

type Point = (Vec<C64>, Vec<C64>);

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

pub(crate) struct Tally {
    name: String,
    anchor: String,
    tol: f64,
    bound: Bound,
    worst: f64,
    worst_point: Option<Point>,
    samples: usize,
    resampled: usize,
    notes: Vec<String>,
    data: Vec<String>,
    points: Vec<SamplePoint>,
    failed: bool,
    opts: CheckOptions,
    start: Instant,
}

impl Tally {
    fn new(name: &str, anchor: &str, opts: &CheckOptions) -> Self {
        Tally {
            name: name.to_string(),
            anchor: anchor.to_string(),
            tol: tolerance(name) * opts.tol_scale,
            bound: Bound::Upper,
            worst: 0.0,
            worst_point: None,
            samples: 0,
            resampled: 0,
            notes: Vec::new(),
            data: Vec::new(),
            points: Vec::new(),
            failed: false,
            opts: opts.clone(),
            start: Instant::now(),
        }
    }

    fn numerics(&self, d: &Datum, trunc: usize) -> Numerics {
        self.opts.numerics(d, trunc)
    }

    fn lower(mut self) -> Self {
        self.bound = Bound::Lower;
        self.worst = f64::INFINITY;
        self
    }

    fn on(&mut self, d: &Datum) {
        let s = d.describe();
        if !self.data.contains(&s) {
            self.data.push(s);
        }
    }

    fn add(&mut self, r: f64, z: &[C64], xi: &[C64]) {
        self.samples += 1;
        let r = if r.is_nan() { f64::INFINITY } else { r };
        let worse = match self.bound {
            Bound::Upper => r >= self.worst,
            Bound::Lower => r <= self.worst,
        };
        if worse {
            self.worst = r;
            self.worst_point = Some((z.to_vec(), xi.to_vec()));
        }
        self.points.push(SamplePoint { residual: r, z: pairs(z), xi: pairs(xi) });
    }

    fn reject(&mut self, why: String) {
        self.resampled += 1;
        if self.notes.len() < 3 {
            self.notes.push(format!("resampled: {}", why));
        }
    }

    fn fail(&mut self, why: String) {
        self.failed = true;
        self.notes.push(why);
    }

    /// Draw points until `n` have been evaluated, redrawing on errors.
    fn run<F>(&mut self, n: usize, s: &mut Sampler, mut f: F)
    where
        F: FnMut(&mut Sampler, &mut Tally) -> Result<(f64, Point), String>,
    {
        let target = self.samples + n;
        let mut attempts = 0;
        while self.samples < target && attempts < 4 * n + 8 {
            attempts += 1;
            match f(s, self) {
                Ok((r, (z, xi))) => self.add(r, &z, &xi),
                Err(e) => self.reject(e),
            }
        }
        if self.samples < target {
            self.fail(format!("only {} of {} points could be evaluated", self.samples + n - target, n));
        }
    }

    fn finish(self) -> CheckRecord {
        let ok = match self.bound {
            Bound::Upper => self.worst <= self.tol,
            Bound::Lower => self.worst >= self.tol,
        };
        CheckRecord {
            pass: ok && !self.failed && self.samples > 0,
            residual: self.worst,
            tolerance: self.tol,
            bound: self.bound,
            samples: self.samples,
            resampled: self.resampled,
            wall_ms: self.start.elapsed().as_millis(),
            worst: self.worst_point.map(|(z, xi)| WorstPoint { z: pairs(&z), xi: pairs(&xi) }),
            notes: self.notes,
            data: self.data,
            points: self.points,
            name: self.name,
            anchor: self.anchor,
        }
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn rel1(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn unit_box(d: &Datum, s: &mut Sampler) -> Point {
    (s.point(d, (-0.8, 0.8), (-0.8, 0.8)), s.spectral_point(d, (-0.8, 0.8), (-0.8, 0.8)))
}

fn free_point(dim: usize, s: &mut Sampler, r: f64) -> Vec<C64> {
    (0..dim).map(|_| s.complex((-r, r), (-r, r))).collect()
}

fn seed(s: &mut Sampler) -> u64 {
    s.index(1 << 30) as u64
}

/// Decay over the truncation ladder: no step grows by more than 10x unless
/// it is below the rounding floor, and the last residual is below the first.
fn decays(r: &[f64], floor: f64) -> bool {
    r.windows(2).all(|w| w[1] <= 10.0 * w[0] || w[1] <= floor) && r[r.len() - 1] < r[0]
}

/// Rounding floors: the eigen residual has no cancellation, the connection
/// identity cancels three terms of size up to |m| |Phi|.
const EIGEN_FLOOR: f64 = 1e-13;
const CONNECTION_FLOOR: f64 = 1e-11;

// ---------------------------------------------------------------- theta

fn theta_fe(t: &mut Tally, q: (f64, f64), n: usize, s: &mut Sampler) {
    t.run(n, s, |s, _| {
        let q = s.uniform(q.0, q.1);
        let ctx = QContext::new(q);
        let x = C64::from_polar(s.uniform(q, 1.0), s.uniform(-PI, PI));
        let r = s.index(9) as i32 - 4;
        let lhs = theta(x * q.powi(r), &ctx).map_err(err)?;
        let th = theta(x, &ctx).map_err(err)?;
        let rhs = (-x / q.sqrt()).powi(-r) * q.powf(-(r * r) as f64 / 2.0) * th;
        Ok(((lhs - rhs).norm() / th.norm().max(rhs.norm()), (vec![x], vec![C64::new(q, r as f64)])))
    });
}

fn theta_addition(t: &mut Tally, q: (f64, f64), n: usize, s: &mut Sampler) {
    t.run(n, s, |s, _| {
        let q = s.uniform(q.0, q.1);
        let ctx = QContext::new(q);
        let mut v = || C64::from_polar(s.uniform(0.5, 1.5), s.uniform(-PI, PI));
        let (x, l, m, n) = (v(), v(), v(), v());
        let a = theta_prod(&[x * l, x / l, m * n, m / n], &ctx).map_err(err)?;
        let b = theta_prod(&[x * n, x / n, l * m, m / l], &ctx).map_err(err)?;
        let c = m / l * theta_prod(&[x * m, x / m, l * n, l / n], &ctx).map_err(err)?;
        let scale = a.norm().max(b.norm()).max(c.norm());
        Ok(((a - b - c).norm() / scale, (vec![x, l, m, n], vec![C64::new(q, 0.0)])))
    });
}

fn lattice_quasi_periodicity(t: &mut Tally, d: &Datum, n: usize, s: &mut Sampler) {
    t.on(d);
    let ctx = QContext::new(d.q);
    t.run(n, s, |s, _| {
        let z = free_point(d.dim, s, 1.0);
        let coeffs: Vec<i64> = (0..d.lattice.gens.len()).map(|_| s.index(5) as i64 - 2).collect();
        let lam = d.lattice.combine(&coeffs).to_f64();
        let shifted: Vec<C64> = z.iter().zip(&lam).map(|(a, b)| a + b).collect();
        let norm2: f64 = lam.iter().map(|x| x * x).sum();
        let pair: C64 = z.iter().zip(&lam).map(|(a, b)| a * b).sum();
        let lhs = lattice_theta(&d.lattice, &shifted, &ctx).map_err(err)?.value;
        let rhs = d.qpow(-pair - norm2 / 2.0) * lattice_theta(&d.lattice, &z, &ctx).map_err(err)?.value;
        Ok((rel(lhs, rhs), (z, vec![])))
    });
}

fn triple_product(t: &mut Tally, d: &Datum, n: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, 4);
    t.run(n, s, |s, _| {
        let z = free_point(d.dim, s, 1.0);
        Ok((triple_product_residual(d, &z, &num).map_err(err)?, (z, vec![])))
    });
}

fn ref_theta(opts: &CheckOptions, s: &mut Sampler) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let mut t = Tally::new("theta.functional_equation", A_FE, opts);
    theta_fe(&mut t, (0.1, 0.9), opts.n(200), s);
    out.push(t.finish());
    let mut t = Tally::new("theta.addition", A_RID, opts);
    theta_addition(&mut t, (0.1, 0.7), opts.n(100), s);
    out.push(t.finish());
    let mut t = Tally::new("theta.lattice_quasi_periodicity", A_QP, opts);
    for d in [koornwinder(2, 0.4), gl3(0.5), semisimple_a(2, 0.3, 0.6)] {
        lattice_quasi_periodicity(&mut t, &d, opts.n(20).div_ceil(3), s);
    }
    out.push(t.finish());
    let mut t = Tally::new("theta.triple_product", A_JTP, opts);
    for n in [2, 3] {
        triple_product(&mut t, &koornwinder(n, 0.4), opts.n(20), s);
    }
    out.push(t.finish());
    out
}

// ---------------------------------------------------------------- series

fn rank_one_oracle(t: &mut Tally, d: &Datum, n: usize, trunc: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, trunc);
    t.run(n, s, |s, _| {
        let x = s.complex((-1.2, 0.2), (-0.6, 0.6));
        let z = point_from_values(d, &simple_forms(d), &[x], &[]);
        let xi = s.spectral_point(d, (-0.6, 0.6), (-0.6, 0.6));
        let series = HcSeries::new(d, &xi, &num).map_err(err)?.eval(&z);
        let closed = phi_rank_one(d, 1, x, &xi, &num.ctx).map_err(err)?;
        Ok((rel(series, closed), (z, xi)))
    });
}

/// `depth` is the box for Re alpha_i(z). L moves z by up to one unit in
/// each alpha_i, and the shifted points have to stay off the walls.
fn eigen(t: &mut Tally, d: &Arc<Datum>, n: usize, ladder: [usize; 3], depth: (f64, f64), s: &mut Sampler) {
    t.on(d);
    let l = l_explicit(d);
    t.run(n, s, |s, t| {
        let z = s.point(d, depth, (-1.0, 1.0));
        let xi = s.spectral_point(d, (-0.5, 0.5), (-0.5, 0.5));
        let mut rs = Vec::new();
        for &n in &ladder {
            let num = t.numerics(d, n);
            let hc = HcSeries::new(d, &xi, &num).map_err(err)?;
            let f = |p: &[C64]| hc.eval(p);
            rs.push(rel(l.apply(&f, &z), eigenvalue(d, &xi) * hc.eval(&z)));
        }
        if !decays(&rs, EIGEN_FLOOR) {
            t.fail(format!("no decay over N = {:?}: {:?}", ladder, rs));
        }
        Ok((rs[2], (z, xi)))
    });
}

fn bispectral(t: &mut Tally, d: &Datum, n: usize, trunc: usize, s: &mut Sampler) {
    t.on(d);
    let dual = Arc::new(d.dual());
    let lt = l_explicit(&dual);
    let num = t.numerics(d, trunc);
    t.run(n, s, |s, _| {
        let z = s.point(d, (-2.0, -1.0), (-1.0, 1.0));
        let xi = s.spectral_point(d, (-0.5, 0.5), (-0.5, 0.5));
        let g = |x: &[C64]| phi(d, &z, x, &num).unwrap_or(C64::new(f64::NAN, f64::NAN));
        let lhs = lt.apply(&g, &xi);
        if !lhs.is_finite() {
            return Err("pole at a shifted spectral point".into());
        }
        let rhs = eigenvalue(&dual, &z) * phi(d, &z, &xi, &num).map_err(err)?;
        Ok((rel(lhs, rhs), (z, xi)))
    });
}

fn ref_eigen(opts: &CheckOptions, s: &mut Sampler) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let mut t = Tally::new("hc.rank_one_oracle", A_ORACLE, opts);
    let per = opts.n(20).div_ceil(2);
    for _ in 0..2 {
        let k = Kappa {
            alpha: s.uniform(0.05, 0.4),
            two_alpha: s.uniform(-0.2, 0.2),
            alpha1: s.uniform(0.05, 0.4),
            two_alpha1: s.uniform(-0.2, 0.2),
        };
        rank_one_oracle(&mut t, &aw1(k, 0.45), per, opts.trunc(30), s);
    }
    out.push(t.finish());
    for (name, d) in [("hc.eigen.gl3", gl3(0.4)), ("hc.eigen.b2", koornwinder(2, 0.4))] {
        let mut t = Tally::new(name, A_EE, opts);
        eigen(&mut t, &Arc::new(d), opts.n(4), opts.ladder(24), (-2.0, -1.0), s);
        out.push(t.finish());
    }
    let mut t = Tally::new("hc.bispectral", A_BS, opts);
    for d in [gl3(0.4), koornwinder(2, 0.4)] {
        bispectral(&mut t, &d, opts.n(4).div_ceil(2), opts.trunc(24), s);
    }
    out.push(t.finish());
    out
}

// ---------------------------------------------------------------- operators

fn symmetrized(d: &Arc<Datum>, seed: u64) -> impl Fn(&[C64]) -> C64 + Clone {
    let f = test_function(d.dim, seed, d.q);
    let d = d.clone();
    move |z: &[C64]| (0..d.weyl.order()).map(|w| f(&d.weyl.apply_c(w, z))).sum()
}

/// A dominant element of the dual lattice outside the orbit of psi~.
fn second_weight(d: &Datum) -> RVec {
    let psi = d.psi_tilde().clone();
    let orbit = d.orbit_of(&psi);
    let gens = &d.lattice_tilde.gens;
    let m = gens.len();
    for code in 1..(3usize.pow(m as u32)) {
        let mut c = code;
        let coeffs: Vec<i64> = (0..m)
            .map(|_| {
                let x = (c % 3) as i64 - 1;
                c /= 3;
                x
            })
            .collect();
        let v = d.lattice_tilde.combine(&coeffs);
        if !v.is_zero() && d.is_dominant(&v) && !orbit.contains(&v) && v != psi.scale(2.into()) {
            return v;
        }
    }
    psi.scale(2.into())
}

/// Residual of an operator identity A f = B f at a random point, relative
/// to max(1, |A f|).
fn op_pair(t: &mut Tally, d: &Arc<Datum>, a: &DiffReflOp, b: &DiffReflOp, n: usize, sym: bool, s: &mut Sampler) {
    t.run(n, s, |s, _| {
        let z = free_point(d.dim, s, 0.5);
        let (x, y) = if sym {
            let f = symmetrized(d, seed(s));
            (a.apply(&f, &z), b.apply(&f, &z))
        } else {
            let f = test_function(d.dim, seed(s), d.q);
            (a.apply(&f, &z), b.apply(&f, &z))
        };
        Ok(((x - y).norm() / x.norm().max(1.0), (z, vec![])))
    });
}

fn operator_tallies(data: &[Arc<Datum>], opts: &CheckOptions, s: &mut Sampler, require_words: bool) -> Vec<Tally> {
    let mut out = Vec::new();

    let mut t = Tally::new("operators.c_translation_equals_a", A_CA, opts);
    for d in data {
        t.on(d);
        t.run(opts.n(50), s, |s, _| {
            let z = free_point(d.dim, s, 1.0);
            let (c, a) = lemma_c_equals_a(d, &z);
            Ok((rel(c, a), (z, vec![])))
        });
    }
    out.push(t);

    let mut t = Tally::new("operators.extracted_vs_explicit", A_EXTRACT, opts);
    for d in data {
        t.on(d);
        let (l1, l2) = (rmkc_extract(d, d.psi_tilde()), l_explicit(d));
        op_pair(&mut t, d, &l1, &l2, opts.n(5), false, s);
    }
    out.push(t);

    let mut t = Tally::new("operators.hecke", A_HECKE, opts);
    for d in data {
        t.on(d);
        let id = |c: f64| DiffReflOp::identity(d).scale(C64::new(c, 0.0));
        for i in 0..=d.rank {
            let a = d.simple_affine(i);
            let qk = d.q.powf(d.kappa(a.root).at_level(a.r).0);
            let ti = t_hat(d, i);
            let op = ti.sub(&id(qk)).compose(&ti.add(&id(1.0 / qk)));
            t.run(opts.n(3), s, |s, _| {
                let f = test_function(d.dim, seed(s), d.q);
                let z = free_point(d.dim, s, 0.6);
                Ok((op.apply(&f, &z).norm() / ti.apply(&f, &z).norm().max(1.0), (z, vec![])))
            });
        }
    }
    out.push(t);

    let mut t = Tally::new("operators.braid", A_BRAID, opts);
    for d in data {
        t.on(d);
        for i in 0..=d.rank {
            for j in (i + 1)..=d.rank {
                let Some(m) = braid_order(d, i, j) else { continue };
                let word = |w: Vec<usize>| w.iter().fold(DiffReflOp::identity(d), |acc, &k| acc.compose(&t_hat(d, k)));
                let (l, r) = (word(alternating(i, j, m)), word(alternating(j, i, m)));
                op_pair(&mut t, d, &l, &r, opts.n(2), false, s);
            }
        }
    }
    // rank one affine Weyl groups are free on s_0, s_1
    if t.samples > 0 || require_words {
        out.push(t);
    }

    let mut t = Tally::new("operators.y_commute", A_YCOMM, opts);
    for d in data {
        t.on(d);
        let gens = &d.lattice_tilde.gens;
        let nu = &gens[0];
        let mu = if gens.len() > 1 { gens[1].clone() } else { nu.neg() };
        let (ya, yb) = (y_operator(d, nu), y_operator(d, &mu));
        op_pair(&mut t, d, &ya.compose(&yb), &yb.compose(&ya), opts.n(2), false, s);
    }
    out.push(t);

    let mut t = Tally::new("operators.y_word_independence", A_YWORD, opts);
    for d in data {
        t.on(d);
        for nu in [d.psi_tilde().clone(), second_weight(d)] {
            let t_nu = d.translation(&nu);
            if d.reduced_word(&t_nu, DescentOrder::Smallest).0 == d.reduced_word(&t_nu, DescentOrder::Largest).0 {
                continue;
            }
            let a = y_dominant_with(d, &nu, false, DescentOrder::Smallest);
            let b = y_dominant_with(d, &nu, false, DescentOrder::Largest);
            op_pair(&mut t, d, &a, &b, opts.n(2), false, s);
        }
    }
    if t.samples == 0 {
        if require_words {
            t.fail("no weight with two distinct reduced words".into());
        } else {
            t.notes.push("every tested tau(nu) has a single reduced word".into());
        }
    }
    if t.samples > 0 || require_words {
        out.push(t);
    }

    let mut t = Tally::new("operators.l_commute", A_LCOMM, opts);
    for d in data {
        t.on(d);
        let (la, lb) = (l_explicit(d), rmkc_extract(d, &second_weight(d)));
        op_pair(&mut t, d, &la.compose(&lb), &lb.compose(&la), opts.n(2), true, s);
    }
    out.push(t);

    let mut t = Tally::new("operators.equivariance", A_EQUIV, opts);
    for d in data {
        t.on(d);
        let l = l_explicit(d);
        t.run(opts.n(3), s, |s, _| {
            let f = test_function(d.dim, seed(s), d.q);
            let z = free_point(d.dim, s, 0.6);
            let mut worst: f64 = 0.0;
            for w in 0..d.weyl.order() {
                let winv = d.weyl.inv[w];
                let g = |p: &[C64]| f(&d.weyl.apply_c(winv, p));
                worst = worst.max(rel1(l.apply(&g, &z), l.apply(&f, &d.weyl.apply_c(winv, &z))));
            }
            Ok((worst, (z, vec![])))
        });
    }
    out.push(t);
    out
}

fn ref_operators(opts: &CheckOptions, s: &mut Sampler) -> Vec<CheckRecord> {
    let data = [Arc::new(gl3(0.4)), Arc::new(koornwinder(2, 0.4))];
    operator_tallies(&data, opts, s, true).into_iter().map(Tally::finish).collect()
}

// ---------------------------------------------------------------- duality

fn duality(t: &mut Tally, d: &Datum, n: usize, trunc: usize, s: &mut Sampler) {
    t.on(d);
    let dual = d.dual();
    let (num, num_t) = (t.numerics(d, trunc), t.numerics(&dual, trunc));
    t.run(n, s, |s, _| {
        let z = s.point(d, (-2.0, -1.0), (-1.0, 1.0));
        let xi = s.spectral_point(d, (-2.0, -1.0), (-1.0, 1.0));
        let a = phi(d, &z, &xi, &num).map_err(err)?;
        let b = phi(&dual, &xi, &z, &num_t).map_err(err)?;
        // |Phi| is often far below 1 in this box, so compare relatively
        Ok((rel(b, a), (z, xi)))
    });
}

fn ref_duality(opts: &CheckOptions, s: &mut Sampler) -> Vec<CheckRecord> {
    [("duality.gl3", gl3(0.4)), ("duality.b2", koornwinder(2, 0.4)), ("duality.aw1", aw1_default())]
        .into_iter()
        .map(|(name, d)| {
            let mut t = Tally::new(name, A_DUAL, opts);
            duality(&mut t, &d, opts.n(20), opts.trunc(24), s);
            t.finish()
        })
        .collect()
}

// ---------------------------------------------------------------- connection

fn rank_one_connection(t: &mut Tally, d: &Datum, n: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, 30);
    let forms = simple_forms(d);
    let ph = |z: &[C64], xi: &[C64]| {
        let x: C64 = forms[0].iter().zip(z).map(|(a, b)| b * *a).sum();
        Ok(phi_rank_one(d, 1, x, xi, &num.ctx)?)
    };
    t.run(n, s, |s, _| {
        let z = s.point(d, (-0.7, 0.7), (-0.6, 0.6));
        let xi = s.spectral_point(d, (-0.6, 0.6), (-0.6, 0.6));
        Ok((connection_identity_residual(d, 1, &z, &xi, &ph, &num).map_err(err)?, (z, xi)))
    });
}

/// Connection identity for the truncated series at simple root i, with
/// alpha_i(z) near the wall and the other simple roots deep in the chamber.
/// Phi is also needed at s_i z, on the far side of the wall, where the
/// series only approximates Phi up to an optimal truncation; |Re alpha_i|
/// is kept below 1/2 so that N = 24 is still below it.
fn truncated_connection(t: &mut Tally, d: &Datum, i: usize, n: usize, ladder: [usize; 3], s: &mut Sampler) {
    t.on(d);
    let forms = simple_forms(d);
    t.run(n, s, |s, t| {
        let vals: Vec<C64> = (1..=d.rank)
            .map(|j| if j == i { s.complex((-0.5, 0.5), (-0.5, 0.5)) } else { s.complex((-2.5, -1.5), (-0.5, 0.5)) })
            .collect();
        let z = s.point_with_values(d, &forms, &vals);
        let xi = s.spectral_point(d, (-0.5, 0.5), (-0.5, 0.5));
        let sxi = d.weyl.apply_c(d.weyl.simple[d.istar(i) - 1], &xi);
        let mut rs = Vec::new();
        for &n in &ladder {
            let num = t.numerics(d, n);
            let h1 = HcSeries::new(d, &xi, &num).map_err(err)?;
            let h2 = HcSeries::new(d, &sxi, &num).map_err(err)?;
            let ph = |zz: &[C64], x: &[C64]| Ok(if x == &xi[..] { h1.eval(zz) } else { h2.eval(zz) });
            rs.push(connection_identity_residual(d, i, &z, &xi, &ph, &num).map_err(err)?);
        }
        if !decays(&rs, CONNECTION_FLOOR) {
            t.fail(format!("i = {}: no decay over N = {:?}: {:?}", i, ladder, rs));
        }
        Ok((rs[2], (z, xi)))
    });
}

fn sparsity(t: &mut Tally, d: &Datum, n: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, 4);
    t.run(n, s, |s, _| {
        let (z, xi) = unit_box(d, s);
        let mut worst: f64 = 0.0;
        for i in 1..=d.rank {
            let m = generator(d, i, &z, &xi, &num).map_err(err)?;
            let si = d.weyl.simple[d.istar(i) - 1];
            for col in 0..m.ncols() {
                let allowed = [col, d.weyl.mul[col][si]];
                for row in 0..m.nrows() {
                    let v = m[(row, col)].norm();
                    if allowed.contains(&row) {
                        if v == 0.0 {
                            worst = worst.max(1.0);
                        }
                    } else {
                        worst = worst.max(v);
                    }
                }
            }
        }
        Ok((worst, (z, xi)))
    });
}

fn cus_agreement(t: &mut Tally, d: &Datum, roots: &[usize], n: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, 4);
    t.run(n, s, |s, _| {
        let (z, xi) = unit_box(d, s);
        let mut worst: f64 = 0.0;
        for &i in roots {
            let (a, b) = m_simple(d, i, &z, &xi, &num).map_err(err)?;
            let (ca, cb) = m_simple_cus(d, i, &z, &xi, &num).map_err(err)?;
            worst = worst.max(rel1(ca, a)).max(rel1(cb, b));
        }
        Ok((worst, (z, xi)))
    });
}

fn translation_invariance(t: &mut Tally, d: &Datum, n: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, 4);
    let w0 = d.w0();
    let m = |z: &[C64], xi: &[C64]| connection_matrix(d, w0, z, xi, DescentOrder::Smallest, &num).map(|c| c.entries);
    t.run(n, s, |s, _| {
        let (z, xi) = unit_box(d, s);
        let base = m(&z, &xi).map_err(err)?;
        let mut worst: f64 = 0.0;
        for nu in &d.lattice_tilde.gens {
            let zz: Vec<C64> = z.iter().zip(nu.to_f64()).map(|(a, b)| a + b).collect();
            worst = worst.max(rel_frobenius(&base, &m(&zz, &xi).map_err(err)?));
        }
        for lam in &d.lattice.gens {
            let xx: Vec<C64> = xi.iter().zip(lam.to_f64()).map(|(a, b)| a + b).collect();
            worst = worst.max(rel_frobenius(&base, &m(&z, &xx).map_err(err)?));
        }
        Ok((worst, (z, xi)))
    });
}

fn cocycle(t: &mut Tally, d: &Datum, n: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, 4);
    t.run(n, s, |s, _| {
        let (z, xi) = unit_box(d, s);
        let (s1, s2) = (s.index(d.weyl.order()), s.index(d.weyl.order()));
        let m = connection_matrix(d, d.weyl.mul[s1][s2], &z, &xi, DescentOrder::Smallest, &num).map_err(err)?.entries;
        let (w1, _) = d.reduced_word(&d.finite(s1), DescentOrder::Smallest);
        let (w2, _) = d.reduced_word(&d.finite(s2), DescentOrder::Largest);
        let a = word_product(d, &w1, &z, &xi, &num).map_err(err)?;
        let b = word_product(d, &w2, &d.weyl.apply_c(d.weyl.inv[s1], &z), &xi, &num).map_err(err)?;
        Ok((rel_frobenius(&m, &(a * b)), (z, xi)))
    });
}

fn connection_words(t: &mut Tally, d: &Datum, n: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, 4);
    let w0 = d.w0();
    t.run(n, s, |s, _| {
        let (z, xi) = unit_box(d, s);
        let a = connection_matrix(d, w0, &z, &xi, DescentOrder::Smallest, &num).map_err(err)?.entries;
        let b = connection_matrix(d, w0, &z, &xi, DescentOrder::Largest, &num).map_err(err)?.entries;
        Ok((rel_frobenius(&a, &b), (z, xi)))
    });
}

fn ref_connection(opts: &CheckOptions, s: &mut Sampler) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let b2 = koornwinder(2, 0.3);
    let b3 = koornwinder(3, 0.3);
    let g = gl3(0.4);
    let a2 = semisimple_a(2, 0.3, 0.4);

    let mut t = Tally::new("connection.rank_one_identity", A_CONN1, opts);
    rank_one_connection(&mut t, &aw1_default(), opts.n(10), s);
    out.push(t.finish());

    let mut t = Tally::new("connection.identity.b2", A_CONN, opts);
    for i in 1..=2 {
        truncated_connection(&mut t, &b2, i, opts.n(6).div_ceil(2), opts.ladder(24), s);
    }
    out.push(t.finish());

    let mut t = Tally::new("connection.sparsity", A_SPARSE, opts);
    sparsity(&mut t, &b2, opts.n(50), s);
    out.push(t.finish());

    let mut t = Tally::new("connection.ultraspherical_agreement", A_CUS, opts);
    for d in [&b2, &g] {
        cus_agreement(&mut t, d, &ultraspherical_roots(d), opts.n(10), s);
    }
    out.push(t.finish());

    let mut t = Tally::new("connection.translation_invariance", A_TRANS, opts);
    translation_invariance(&mut t, &b2, opts.n(10), s);
    out.push(t.finish());

    let mut t = Tally::new("connection.cocycle", A_CP, opts);
    for d in [&b2, &b3] {
        cocycle(&mut t, d, opts.n(10), s);
    }
    out.push(t.finish());

    let mut t = Tally::new("connection.word_independence", A_WORD, opts);
    for d in [&a2, &b2] {
        connection_words(&mut t, d, opts.n(5), s);
    }
    out.push(t.finish());
    out
}

fn yang_baxter(t: &mut Tally, d: &Datum, n: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, 4);
    t.run(n, s, |s, _| {
        let (z, xi) = unit_box(d, s);
        let mut worst: f64 = 0.0;
        for i in 1..=(d.rank - 2) {
            worst = worst.max(yb_residual(d, i, &z, &xi, &num).map_err(err)?);
        }
        Ok((worst, (z, xi)))
    });
}

fn reflection(t: &mut Tally, d: &Datum, n: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, 4);
    t.run(n, s, |s, _| {
        let (z, xi) = unit_box(d, s);
        Ok((reflection_residual(d, &z, &xi, &num).map_err(err)?, (z, xi)))
    });
}

fn ref_yb(opts: &CheckOptions, s: &mut Sampler) -> Vec<CheckRecord> {
    let d = koornwinder(3, 0.3);
    let mut t = Tally::new("yb.yang_baxter", A_YB, opts);
    yang_baxter(&mut t, &d, opts.n(10), s);
    let mut u = Tally::new("yb.reflection", A_RE, opts);
    reflection(&mut u, &d, opts.n(10), s);
    vec![t.finish(), u.finish()]
}

// ---------------------------------------------------------------- reflectionless

fn reflectionless_m(t: &mut Tally, d: &Datum, n: usize, s: &mut Sampler) {
    t.on(d);
    if !reflectionless(d).holds {
        t.fail(format!("{} does not satisfy the reflectionless conditions", d.describe()));
        return;
    }
    let num = t.numerics(d, 4);
    t.run(n, s, |s, _| {
        let (z, xi) = unit_box(d, s);
        let mut worst: f64 = 0.0;
        for i in 1..=d.rank {
            let (ee, off) = m_simple(d, i, &z, &xi, &num).map_err(err)?;
            worst = worst.max(ee.norm()).max((off - 1.0).norm());
        }
        Ok((worst, (z, xi)))
    });
}

fn phi_invariance(t: &mut Tally, d: &Datum, n: usize, trunc: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, trunc);
    let w0 = d.w0();
    t.run(n, s, |s, t| {
        let (z, xi) = unit_box(d, s);
        let gh = HcSeries::new(d, &xi, &num).map_err(err)?.gamma_hat().map_err(err)?;
        if let Some((g, at)) = gamma_hat_box_defect(d, &gh) {
            if g > 1e-9 {
                t.fail(format!("Gamma-hat not finite: {:.2e} at {:?}", g, at));
            }
        }
        let base = phi_from_gamma_hat(d, &gh, &z, &xi);
        let mut worst: f64 = 0.0;
        for w in 0..d.weyl.order() {
            let xi2 = d.weyl.apply_c(d.weyl.mul[d.weyl.mul[w0][w]][w0], &xi);
            let gh2 = HcSeries::new(d, &xi2, &num).map_err(err)?.gamma_hat().map_err(err)?;
            worst = worst.max(rel1(phi_from_gamma_hat(d, &gh2, &d.weyl.apply_c(w, &z), &xi2), base));
        }
        Ok((worst, (z, xi)))
    });
}

fn ref_reflectionless(opts: &CheckOptions, s: &mut Sampler) -> Vec<CheckRecord> {
    let mut t = Tally::new("reflectionless.m_simple", A_BA, opts);
    for d in [semisimple_a(2, -1.0, 0.4), semisimple_a(2, -0.5, 0.4), b2_reflectionless(0.3)] {
        reflectionless_m(&mut t, &d, opts.n(20), s);
    }
    let mut u = Tally::new("reflectionless.phi_invariance", A_PHIINV, opts);
    phi_invariance(&mut u, &semisimple_a(2, -0.5, 0.4), opts.n(10), opts.trunc(8), s);
    vec![t.finish(), u.finish()]
}

// ---------------------------------------------------------------- qkz

fn qkz_tallies(systems: &[(&Datum, &QkzSystem, &QkzSystem)], opts: &CheckOptions, s: &mut Sampler) -> Vec<Tally> {
    let o = DescentOrder::Smallest;
    let mut out = Vec::new();

    let mut t = Tally::new("qkz.word_independence", A_QKZ_WORD, opts);
    for &(d, sys, _) in systems {
        t.on(d);
        t.run(opts.n(20).div_ceil(systems.len()), s, |s, _| {
            let (z, xi) = unit_box(d, s);
            let (w, wt) = (random_element(d, s, 1), random_element(&sys.dual, s, 1));
            let a = sys.cocycle(&w, &wt, &z, &xi, DescentOrder::Smallest).map_err(err)?.value;
            let b = sys.cocycle(&w, &wt, &z, &xi, DescentOrder::Largest).map_err(err)?.value;
            Ok((max_entry_deviation(&a, &b), (z, xi)))
        });
    }
    out.push(t);

    let mut t = Tally::new("qkz.duality_symmetry", A_QKZ_DUAL, opts);
    for &(d, sys, sys_t) in systems {
        t.on(d);
        t.run(opts.n(10), s, |s, _| {
            let (z, xi) = unit_box(d, s);
            let (w, wt) = (random_element(d, s, 1), random_element(&sys.dual, s, 1));
            Ok((duality_residual(sys, sys_t, &w, &wt, &z, &xi).map_err(err)?, (z, xi)))
        });
    }
    out.push(t);

    let mut t = Tally::new("qkz.braid_generators", A_QKZ_BRAID, opts);
    for &(d, sys, _) in systems {
        t.on(d);
        let (id, id_t) = (d.ext_id(), sys.dual.ext_id());
        t.run(opts.n(4), s, |s, _| {
            let (z, xi) = unit_box(d, s);
            let mut worst: f64 = 0.0;
            for i in 0..=d.rank {
                for j in (i + 1)..=d.rank {
                    if let Some(m) = braid_order(d, i, j) {
                        let a = sys.left_word(&alternating(i, j, m), &id, &z, &xi).map_err(err)?;
                        let b = sys.left_word(&alternating(j, i, m), &id, &z, &xi).map_err(err)?;
                        worst = worst.max(max_entry_deviation(&a, &b));
                    }
                    if let Some(m) = braid_order(&sys.dual, i, j) {
                        let a = sys.right_word(&alternating(i, j, m), &id_t, &z, &xi).map_err(err)?;
                        let b = sys.right_word(&alternating(j, i, m), &id_t, &z, &xi).map_err(err)?;
                        worst = worst.max(max_entry_deviation(&a, &b));
                    }
                }
            }
            Ok((worst, (z, xi)))
        });
    }
    out.push(t);

    let mut t = Tally::new("qkz.nabla_action", A_NABLA, opts);
    for &(d, sys, _) in systems {
        t.on(d);
        t.run(opts.n(10).div_ceil(systems.len()), s, |s, _| {
            let (z, xi) = unit_box(d, s);
            let f = test_vector(d, seed(s));
            let (w1, w2) = (random_element(d, s, 1), random_element(d, s, 1));
            let (v1, v2) = (random_element(&sys.dual, s, 1), random_element(&sys.dual, s, 1));
            let nan = vec![C64::new(f64::NAN, 0.0); sys.dim()];
            let inner = |zz: &[C64], xx: &[C64]| sys.nabla(&w2, &v2, &f, zz, xx).unwrap_or_else(|_| nan.clone());
            let lhs = sys.nabla(&w1, &v1, &inner, &z, &xi).map_err(err)?;
            if lhs.iter().any(|x| !x.is_finite()) {
                return Err("pole at an intermediate point".into());
            }
            let rhs = sys.nabla(&d.compose(&w1, &w2), &sys.dual.compose(&v1, &v2), &f, &z, &xi).map_err(err)?;
            let scale = rhs.iter().map(|x| x.norm()).fold(1.0, f64::max);
            let dev = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            Ok((dev / scale, (z, xi)))
        });
    }
    out.push(t);

    let mut t = Tally::new("qkz.translation_compatibility", A_COCC, opts);
    for &(d, sys, _) in systems {
        t.on(d);
        let (id, id_t) = (d.ext_id(), sys.dual.ext_id());
        t.run(opts.n(10).div_ceil(systems.len()), s, |s, _| {
            let (z, xi) = unit_box(d, s);
            let nu = d.lattice_tilde.gens[s.index(d.lattice_tilde.gens.len())].clone();
            let lam = sys.dual.lattice_tilde.gens[s.index(sys.dual.lattice_tilde.gens.len())].clone();
            let (tn, tl) = (d.translation(&nu), sys.dual.translation(&lam));
            let a = sys.cocycle(&tn, &id_t, &z, &xi, o).map_err(err)?.value
                * sys.cocycle(&id, &tl, &d.act_inv(&tn, &z), &xi, o).map_err(err)?.value;
            let b = sys.cocycle(&id, &tl, &z, &xi, o).map_err(err)?.value
                * sys.cocycle(&tn, &id_t, &z, &sys.dual.act_inv(&tl, &xi), o).map_err(err)?.value;
            Ok((max_entry_deviation(&a, &b), (z, xi)))
        });
    }
    out.push(t);
    out
}

/// R_lambda against its leading product with alpha_i(z) = -30 for every i.
fn r0_product(t: &mut Tally, d: &Datum, lam: &RVec, n: usize, s: &mut Sampler) {
    t.on(d);
    let sys = QkzSystem::new(d);
    t.run(n, s, |s, _| {
        let vals: Vec<C64> = (0..d.rank).map(|_| C64::new(-30.0, s.uniform(-1.0, 1.0))).collect();
        let z = point_from_values(d, &simple_forms(d), &vals, &[]);
        let xvals: Vec<C64> = (0..d.rank).map(|_| s.complex((-0.6, 0.6), (-0.6, 0.6))).collect();
        let xi = point_from_values(d, &dual_simple_forms(d), &xvals, &[]);
        let r = sys.r_lambda(lam, &z, &xi).map_err(err)?;
        let p = sys.r0_product(lam, &xi).map_err(err)?;
        Ok((rel(r, p), (z, xi)))
    });
}

fn ref_qkz(opts: &CheckOptions, s: &mut Sampler) -> Vec<CheckRecord> {
    let b2 = koornwinder(2, 0.3);
    let g = gl3(0.4);
    let (sys, sys_t) = (QkzSystem::new(&b2), QkzSystem::new(&b2.dual()));
    let (gsys, gsys_t) = (QkzSystem::new(&g), QkzSystem::new(&g.dual()));
    let mut out: Vec<CheckRecord> =
        qkz_tallies(&[(&b2, &sys, &sys_t), (&g, &gsys, &gsys_t)], opts, s).into_iter().map(Tally::finish).collect();
    let mut t = Tally::new("qkz.r0_product", A_R0, opts);
    let a1 = semisimple_a(1, 0.3, 0.4);
    r0_product(&mut t, &a1, &a1.lattice.gens[0].clone(), opts.n(3), s);
    r0_product(&mut t, &b2, &b2.roots[b2.theta].v.clone(), opts.n(3), s);
    out.push(t.finish());
    out
}

// ---------------------------------------------------------------- c-functions

fn cfun_tallies(d: &Datum, opts: &CheckOptions, s: &mut Sampler) -> Vec<Tally> {
    let mut out = Vec::new();
    let num = opts.numerics(d, 4);
    let csph = |z: &[C64], xi: &[C64]| c_sph(d, z, xi, &num);
    let xs = XiFunction::sph(d, num);
    let cus = ultraspherical_roots(d);
    let aw: Vec<usize> = (1..=d.rank).filter(|&i| d.orbits[d.alpha(i).orbit].case == OrbitCase::AskeyWilson).collect();
    let integral: Vec<usize> =
        (1..=d.rank).filter(|&i| d.orbits[d.alpha(i).orbit].lattice_parity == Parity::Z).collect();
    let tol = tolerance("cfun.relationsc") * opts.tol_scale;

    let mut t = Tally::new("cfun.relationsc", A_RELC, opts);
    t.on(d);
    t.run(opts.n(10), s, |s, _| {
        let (z, xi) = unit_box(d, s);
        let mut worst: f64 = 0.0;
        for i in 1..=d.rank {
            worst = worst.max(relationsc_residual(d, &csph, i, &z, &xi, &num).map_err(err)?);
        }
        Ok((worst, (z, xi)))
    });
    out.push(t);

    if !aw.is_empty() {
        let mut t = Tally::new("cfun.alternative", A_ALT, opts);
        t.on(d);
        t.run(opts.n(10), s, |s, _| {
            let (z, xi) = unit_box(d, s);
            let mut worst: f64 = 0.0;
            for &i in &aw {
                worst = worst.max(alternative_residual(d, &xs, i, &z, &xi, &num).map_err(err)?);
            }
            Ok((worst, (z, xi)))
        });
        out.push(t);
    }

    let mut t = Tally::new("cfun.quasi_invariance", A_QINV, opts);
    t.on(d);
    t.run(opts.n(10), s, |s, _| {
        let (z, xi) = unit_box(d, s);
        Ok((xs.quasi_invariance_residual(d, &z, &xi).map_err(err)?, (z, xi)))
    });
    out.push(t);

    if all_integral(d) {
        let mut t = Tally::new("cfun.integral_branch", A_INT, opts);
        t.on(d);
        t.run(opts.n(10), s, |s, _| {
            let (z, xi) = unit_box(d, s);
            let a = c_sph(d, &z, &xi, &num).map_err(err)?;
            let b = c_sph_integral(d, &z, &xi, &num).map_err(err)?;
            Ok((rel(b, a), (z, xi)))
        });
        out.push(t);
    }

    if !cus.is_empty() {
        let mut t = Tally::new("cfun.towards_riemann", A_TR, opts);
        t.on(d);
        t.run(opts.n(10), s, |s, _| {
            let (z, xi) = unit_box(d, s);
            let mut worst: f64 = 0.0;
            for &i in &cus {
                worst = worst.max(towards_riemann_residual(d, &xs, i, &z, &xi, &num).map_err(err)?);
            }
            Ok((worst, (z, xi)))
        });
        out.push(t);

        // the three term relation and the c-function relation hold or fail together
        let mut t = Tally::new("cfun.equivalence_chain", A_CHAIN, opts);
        t.on(d);
        let ell = elliptic_xi(d, num);
        let i = cus[0];
        for f in [&xs, &ell] {
            t.run(opts.n(50).div_ceil(2), s, |s, _| {
                let (z, xi) = unit_box(d, s);
                let a = towards_riemann_residual(d, f, i, &z, &xi, &num).map_err(err)?;
                let b = relationsc_residual(d, &|z, xi| c_xi(d, f, z, xi, &num), i, &z, &xi, &num).map_err(err)?;
                let agree = (a < tol && b < tol) || (a > 10.0 * tol && b > 10.0 * tol);
                Ok((if agree { 0.0 } else { 1.0 }, (z, xi)))
            });
        }
        out.push(t);

        let mut t = Tally::new("cfun.negative_control", A_NEG, opts).lower();
        t.on(d);
        let beta: Vec<f64> = (0..d.dim).map(|j| 0.31 - 0.48 * j as f64).collect();
        let twisted = twisted_xi(d, beta, num);
        t.run(opts.n(5), s, |s, t| {
            let (z, xi) = unit_box(d, s);
            let bogus = |z: &[C64], xi: &[C64]| -> Result<C64, CFunctionError> {
                Ok(csph(z, xi)? * (C64::new(0.4, 0.3) * (z[0] - 0.5 * xi[xi.len() - 1])).exp())
            };
            let r = relationsc_residual(d, &bogus, i, &z, &xi, &num).map_err(err)?;
            match towards_riemann_residual(d, &twisted, i, &z, &xi, &num) {
                Err(CFunctionError::NotQuasiInvariant { .. }) => {}
                Ok(v) => t.fail(format!("twisted Xi was not rejected (residual {:.2e})", v)),
                Err(e) => return Err(err(e)),
            }
            Ok((r, (z, xi)))
        });
        out.push(t);
    }

    if !integral.is_empty() {
        let mut t = Tally::new("cfun.ridroot", A_RIDROOT, opts);
        t.on(d);
        t.run(opts.n(10), s, |s, _| {
            let z = s.point(d, (-1.5, 1.5), (-1.0, 1.0));
            let xi = s.spectral_point(d, (-1.5, 1.5), (-1.0, 1.0));
            let mut worst: f64 = 0.0;
            for &i in &integral {
                worst = worst.max(addition_root_residual(d, i, &z, &xi, &num).map_err(err)?);
            }
            Ok((worst, (z, xi)))
        });
        out.push(t);
    }
    out
}

fn ref_cfun(opts: &CheckOptions, s: &mut Sampler) -> Vec<CheckRecord> {
    let b2 = koornwinder(2, 0.3);
    let g = gl3(0.4);
    let mut out: Vec<CheckRecord> = cfun_tallies(&b2, opts, s).into_iter().map(Tally::finish).collect();
    // the integral-lattice expression needs (Lambda, alpha^vee) = Z for all roots
    let num = opts.numerics(&g, 4);
    let mut t = Tally::new("cfun.integral_branch", A_INT, opts);
    t.on(&g);
    t.run(opts.n(10), s, |s, _| {
        let (z, xi) = unit_box(&g, s);
        let a = c_sph(&g, &z, &xi, &num).map_err(err)?;
        let b = c_sph_integral(&g, &z, &xi, &num).map_err(err)?;
        Ok((rel(b, a), (z, xi)))
    });
    out.retain(|r| r.name != "cfun.integral_branch");
    out.push(t.finish());
    out
}

// ---------------------------------------------------------------- Gamma-hat

fn gamma_hat_box(t: &mut Tally, d: &Datum, n: usize, trunc: usize, s: &mut Sampler) {
    t.on(d);
    let num = t.numerics(d, trunc);
    t.run(n, s, |s, _| {
        let xi = s.spectral_point(d, (-0.8, 0.8), (-0.8, 0.8));
        let gh = HcSeries::new(d, &xi, &num).map_err(err)?.gamma_hat().map_err(err)?;
        let (r, _) = gamma_hat_box_defect(d, &gh).ok_or("kappa outside the reflectionless range")?;
        Ok((r, (vec![], xi)))
    });
}

fn ref_gammahat(opts: &CheckOptions, s: &mut Sampler) -> Vec<CheckRecord> {
    let mut t = Tally::new("gammahat.box", A_BOX, opts);
    gamma_hat_box(&mut t, &semisimple_a(1, -0.5, 0.4), opts.n(5), opts.trunc(20), s);
    vec![t.finish()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> CheckOptions {
        CheckOptions { samples: Some(2), ..Default::default() }
    }

    #[test]
    fn theta_suite_passes_with_few_samples() {
        for r in run_reference("theta", &quick()).unwrap() {
            assert!(r.pass, "{:?}", r);
        }
    }

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_reference("nope", &quick()), Err(SuiteError::Unknown(_))));
    }

    #[test]
    fn tolerance_falls_back_to_prefix() {
        assert_eq!(tolerance("hc.eigen.gl3"), 1e-8);
        assert_eq!(tolerance("duality.b2"), 1e-7);
    }

    #[test]
    fn unsupported_pairing_is_an_error() {
        let d = gl3(0.4);
        assert!(matches!(run_on("yb", &d, &quick()), Err(SuiteError::Unsupported { .. })));
        assert!(matches!(run_on("gammahat", &d, &quick()), Err(SuiteError::Unsupported { .. })));
    }

    #[test]
    fn rank_one_datum_runs_the_oracle() {
        let d = semisimple_a(1, 0.3, 0.4);
        let recs = run_on("eigen", &d, &quick()).unwrap();
        let oracle = recs.iter().find(|r| r.name == "hc.rank_one_oracle").expect("oracle record");
        assert!(oracle.pass, "{:?}", oracle);
    }

    #[test]
    fn same_seed_same_residuals() {
        let a = run_reference("qkz", &quick()).unwrap();
        let b = run_reference("qkz", &quick()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.residual.to_bits(), y.residual.to_bits());
        }
    }
}
