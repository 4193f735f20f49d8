mod config;
mod report;

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hcseries::cfunction::{c_sph, require_twisted_equal};
use hcseries::checks::{run_on, run_reference, SuiteError};
use hcseries::connection::m_simple;
use hcseries::harish_chandra::{phi_rank_one, HcSeries};
use hcseries::qkz::QkzSystem;
use hcseries::qseries::lattice_theta;
use hcseries::root_data::{Datum, DatumError, DescentOrder};
use hcseries::sample::{dual_simple_forms, point_from_values, simple_forms};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use config::RunConfig;
use report::{c, cv, rvec, CheckReport};

#[derive(Parser)]
#[command(name = "hcseries", version, about = "Harish-Chandra series, connection matrices and their consistency checks")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, env = "HCSERIES_CONFIG")]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunFlags,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunFlags {
    /// Base seed for sample points
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Truncation height N of the series.
    #[arg(long, global = true)]
    trunc: Option<usize>,
    /// Sample count per check, overriding the defaults.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Multiplies every tolerance
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
    /// Output file; stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Summary of the configured datum.
    Info,
    /// Evaluate one quantity at a point.
    Eval(EvalArgs),
    /// Run verification suites and write a report.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Phi,
    PhiRank1,
    M,
    #[value(name = "C", alias = "c")]
    C,
    CSph,
    ThetaLattice,
}

#[derive(Args)]
struct EvalArgs {
    target: Target,
    /// Ambient coordinates of z, comma separated, each `re` or `re:im`.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Ambient coordinates of xi.
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
    /// Values alpha_i(z), i = 1..n, instead of --z.
    #[arg(long, allow_hyphen_values = true)]
    z_simple: Option<String>,
    /// Values of the dual simple roots at xi, instead of --xi.
    #[arg(long, allow_hyphen_values = true)]
    xi_simple: Option<String>,
    /// Simple root index for `m` and `phi-rank1`.
    #[arg(long, default_value_t = 1)]
    i: usize,
    /// Word in the affine simple reflections s_0..s_n for `C`.
    #[arg(long, default_value = "")]
    w: String,
    /// Word in the dual affine simple reflections for `C`.
    #[arg(long, default_value = "")]
    w_dual: String,
}

#[derive(Args)]
struct CheckArgs {
    /// Suites to run (comma separated): theta, eigen, operators, duality,
    /// connection, cocycle, yb, reflectionless, qkz, cfun, gammahat, all.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    /// Also dump every sample point as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// An error with its exit status: 2 for configuration errors, 1 otherwise.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    pub fn config(kind: &'static str, message: impl Into<String>) -> Self {
        Failure { code: 2, kind, message: message.into() }
    }
    fn eval(e: impl Display) -> Self {
        Failure { code: 1, kind: "evaluation", message: e.to_string() }
    }
    pub fn from_datum(e: DatumError) -> Self {
        let kind = match e {
            DatumError::UnsupportedDatum(_) => "unsupported_datum",
            DatumError::InvalidKappa(_) => "invalid_kappa",
            DatumError::InvalidQ(_) => "invalid_q",
        };
        Failure::config(kind, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", json!({ "error": { "kind": f.kind, "message": f.message } }));
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let f = &cli.run;
    let n = &mut cfg.numerics;
    n.seed = f.seed.or(n.seed);
    n.trunc = f.trunc.or(n.trunc);
    n.samples = f.samples.or(n.samples);
    n.tol_scale = f.tol_scale.or(n.tol_scale);
    n.validate()?;
    if f.out.is_some() {
        cfg.out = f.out.clone();
    }
    let d = cfg.build_datum()?;
    match &cli.cmd {
        Cmd::Info => {
            let d = d.ok_or_else(no_datum)?;
            report::emit(&info(&d), cfg.out.as_deref())?;
            Ok(0)
        }
        Cmd::Eval(a) => {
            let d = d.ok_or_else(no_datum)?;
            let v = eval(&d, &cfg, a)?;
            report::emit(&v, cfg.out.as_deref())?;
            Ok(0)
        }
        Cmd::Check(a) => check(d.as_ref(), &mut cfg, a),
    }
}

fn no_datum() -> Failure {
    Failure::config("missing_datum", "this command needs a [datum] section in the configuration")
}

fn info(d: &Datum) -> Value {
    let orbits: Vec<Value> = d
        .orbits
        .iter()
        .enumerate()
        .map(|(o, orb)| {
            let r = (0..d.roots.len()).find(|&r| d.roots[r].orbit == o && d.roots[r].positive).unwrap();
            json!({
                "label": orb.label,
                "case": format!("{:?}", orb.case),
                "lattice_parity": format!("{:?}", orb.lattice_parity),
                "dual_parity": format!("{:?}", orb.dual_parity),
                "kappa": orb.kappa,
                "aw": d.aw_params(r),
                "aw_dual": d.aw_params_dual(r),
            })
        })
        .collect();
    let roots: Vec<Value> = d
        .roots
        .iter()
        .map(|r| json!({ "vector": rvec(&r.v), "positive": r.positive, "orbit": d.orbits[r.orbit].label, "mu": r.muf }))
        .collect();
    let weyl: Vec<Value> =
        (0..d.weyl.order()).map(|w| json!({ "index": w, "word": d.weyl.words[w] })).collect();
    json!({
        "datum": d.describe(),
        "family": d.family.name(),
        "rank": d.rank,
        "dim": d.dim,
        "bullet": d.bullet,
        "q": d.q,
        "simple_roots": d.simple.iter().map(|&r| rvec(&d.roots[r].v)).collect::<Vec<_>>(),
        "psi": rvec(&d.roots[d.psi].v),
        "theta": rvec(&d.roots[d.theta].v),
        "psi_tilde": rvec(d.psi_tilde()),
        "rho": d.rho,
        "rho_tilde": d.rho_tilde,
        "lattice": d.lattice.gens.iter().map(rvec).collect::<Vec<_>>(),
        "lattice_tilde": d.lattice_tilde.gens.iter().map(rvec).collect::<Vec<_>>(),
        "orbits": orbits,
        "weyl_order": d.weyl.order(),
        "weyl": weyl,
        "roots": roots,
    })
}

fn parse_complex_list(s: &str, what: &str) -> Result<Vec<C64>, Failure> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let mut parts = t.trim().splitn(2, ':');
            let re = parts.next().unwrap_or("");
            let im = parts.next().unwrap_or("0");
            match (re.trim().parse::<f64>(), im.trim().parse::<f64>()) {
                (Ok(a), Ok(b)) => Ok(C64::new(a, b)),
                _ => Err(Failure::config("invalid_point", format!("{}: cannot parse '{}'", what, t))),
            }
        })
        .collect()
}

fn parse_word(s: &str, rank: usize, what: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| match t.trim().parse::<usize>() {
            Ok(i) if i <= rank => Ok(i),
            _ => Err(Failure::config("invalid_word", format!("{}: '{}' is not in 0..={}", what, t, rank))),
        })
        .collect()
}

fn point(
    d: &Datum,
    ambient: &Option<String>,
    simple: &Option<String>,
    dual: bool,
    what: &str,
) -> Result<Vec<C64>, Failure> {
    match (ambient, simple) {
        (Some(s), None) => {
            let v = parse_complex_list(s, what)?;
            if v.len() != d.dim {
                return Err(Failure::config("invalid_point", format!("{} needs {} coordinates, got {}", what, d.dim, v.len())));
            }
            Ok(v)
        }
        (None, Some(s)) => {
            let v = parse_complex_list(s, what)?;
            if v.len() != d.rank {
                return Err(Failure::config("invalid_point", format!("{}-simple needs {} values, got {}", what, d.rank, v.len())));
            }
            let forms = if dual { dual_simple_forms(d) } else { simple_forms(d) };
            Ok(point_from_values(d, &forms, &v, &[]))
        }
        (Some(_), Some(_)) => Err(Failure::config("invalid_point", format!("give either --{0} or --{0}-simple", what))),
        (None, None) => Err(Failure::config("invalid_point", format!("missing --{0} (or --{0}-simple)", what))),
    }
}

fn eval(d: &Datum, cfg: &RunConfig, a: &EvalArgs) -> Result<Value, Failure> {
    let opts = cfg.check_options();
    let trunc = opts.trunc.unwrap_or(24);
    let num = opts.numerics(d, trunc);
    let z = || point(d, &a.z, &a.z_simple, false, "z");
    let xi = || point(d, &a.xi, &a.xi_simple, true, "xi");
    let check_i = || {
        if a.i == 0 || a.i > d.rank {
            Err(Failure::config("invalid_index", format!("i must lie in 1..={}", d.rank)))
        } else {
            Ok(a.i)
        }
    };
    let v = match a.target {
        Target::Phi => {
            let (z, xi) = (z()?, xi()?);
            let h = HcSeries::new(d, &xi, &num).map_err(Failure::eval)?;
            json!({ "target": "phi", "z": cv(&z), "xi": cv(&xi), "trunc": trunc,
                    "value": c(h.eval(&z)), "tail_estimate": h.tail_estimate(&z) })
        }
        Target::PhiRank1 => {
            let i = check_i()?;
            let (z, xi) = (z()?, xi()?);
            let x: C64 = d.roots[d.simple[i - 1]].vf.iter().zip(&z).map(|(a, b)| b * *a).sum();
            let v = phi_rank_one(d, i, x, &xi, &num.ctx).map_err(Failure::eval)?;
            json!({ "target": "phi-rank1", "i": i, "alpha_i(z)": c(x), "xi": cv(&xi), "value": c(v) })
        }
        Target::M => {
            let i = check_i()?;
            let (z, xi) = (z()?, xi()?);
            let (ee, off) = m_simple(d, i, &z, &xi, &num).map_err(Failure::eval)?;
            json!({ "target": "m", "i": i, "z": cv(&z), "xi": cv(&xi), "m_ee": c(ee), "m_off": c(off) })
        }
        Target::C => {
            let (z, xi) = (z()?, xi()?);
            let sys = QkzSystem::new(d);
            let w = d.from_word(&parse_word(&a.w, d.rank, "w")?, &d.ext_id());
            let wt = sys.dual.from_word(&parse_word(&a.w_dual, d.rank, "w-dual")?, &sys.dual.ext_id());
            let m = sys.cocycle(&w, &wt, &z, &xi, DescentOrder::Smallest).map_err(Failure::eval)?.value;
            let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows()).map(|r| (0..m.ncols()).map(|k| c(m[(r, k)])).collect()).collect();
            json!({ "target": "C", "w": rvec(&w.t), "w_finite": d.weyl.words[w.w], "w_dual": rvec(&wt.t),
                    "w_dual_finite": sys.dual.weyl.words[wt.w], "z": cv(&z), "xi": cv(&xi),
                    "basis": d.weyl.words, "matrix": rows })
        }
        Target::CSph => {
            require_twisted_equal(d).map_err(|e| Failure::config("unsupported_datum", e.to_string()))?;
            let (z, xi) = (z()?, xi()?);
            let v = c_sph(d, &z, &xi, &num).map_err(Failure::eval)?;
            json!({ "target": "c-sph", "z": cv(&z), "xi": cv(&xi), "value": c(v) })
        }
        Target::ThetaLattice => {
            let z = z()?;
            let t = lattice_theta(&d.lattice, &z, &num.ctx).map_err(Failure::eval)?;
            json!({ "target": "theta-lattice", "z": cv(&z), "value": c(t.value), "tail": t.tail, "shells": t.shells })
        }
    };
    Ok(v)
}

fn check(d: Option<&Datum>, cfg: &mut RunConfig, a: &CheckArgs) -> Result<u8, Failure> {
    if !a.suite.is_empty() {
        cfg.suites = a.suite.clone();
    }
    if cfg.suites.is_empty() {
        cfg.suites = vec!["all".into()];
    }
    let opts = cfg.check_options();
    let mut records = Vec::new();
    for s in &cfg.suites {
        let r = match d {
            Some(d) => run_on(s, d, &opts),
            None => run_reference(s, &opts),
        };
        records.extend(r.map_err(|e| match e {
            SuiteError::Unknown(_) => Failure::config("unknown_suite", e.to_string()),
            SuiteError::Unsupported { .. } => Failure::config("unsupported_suite", e.to_string()),
        })?);
    }
    let data = d.map(|d| d.describe()).unwrap_or_else(|| "reference data".into());
    let report = CheckReport::new(cfg, &data, &cfg.suites, &records);
    report::emit(&report, cfg.out.as_deref())?;
    if let Some(p) = &a.csv {
        report::write_csv(&records, p)?;
    }
    for r in &records {
        eprintln!("{} {} {:.3e} (tolerance {:.1e})", if r.pass { "PASS" } else { "FAIL" }, r.name, r.residual, r.tolerance);
        if !r.pass {
            eprintln!("     identity: {}", r.anchor);
            if let Some(w) = &r.worst {
                eprintln!("     at z = {:?}, xi = {:?}", w.z, w.xi);
            }
            for n in &r.notes {
                eprintln!("     {}", n);
            }
        }
    }
    let failed = records.iter().filter(|r| !r.pass).count();
    eprintln!("{} of {} checks passed", records.len() - failed, records.len());
    Ok(if failed == 0 { 0 } else { 1 })
}
