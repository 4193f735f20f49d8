//! JSON encodings and the check report.

use std::io::Write;
use std::path::Path;

use hcseries::checks::CheckRecord;
use hcseries::root_data::{rat_f64, RVec};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::Failure;

pub fn c(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn cv(z: &[C64]) -> Vec<[f64; 2]> {
    z.iter().map(|x| c(*x)).collect()
}

/// Integer array when every coordinate is integral, floats otherwise.
pub fn rvec(v: &RVec) -> Value {
    if v.0.iter().all(|x| x.is_integer()) {
        json!(v.0.iter().map(|x| *x.numer()).collect::<Vec<i64>>())
    } else {
        json!(v.0.iter().map(rat_f64).collect::<Vec<f64>>())
    }
}

#[derive(Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Serialize)]
pub struct CheckReport<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub data: &'a str,
    pub suites: &'a [String],
    pub summary: Summary,
    pub records: &'a [CheckRecord],
}

impl<'a> CheckReport<'a> {
    pub fn new(config: &'a RunConfig, data: &'a str, suites: &'a [String], records: &'a [CheckRecord]) -> Self {
        let passed = records.iter().filter(|r| r.pass).count();
        CheckReport {
            tool: "hcseries",
            version: env!("CARGO_PKG_VERSION"),
            config,
            data,
            suites,
            summary: Summary { total: records.len(), passed, failed: records.len() - passed },
            records,
        }
    }
}

pub fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable report");
    match out {
        Some(p) => std::fs::write(p, text + "\n")
            .map_err(|e| Failure::config("io", format!("cannot write {}: {}", p.display(), e))),
        None => match writeln!(std::io::stdout().lock(), "{}", text) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(Failure::config("io", format!("cannot write to stdout: {}", e)))
            }
            _ => Ok(()),
        },
    }
}

/// One row per evaluated sample point.
pub fn write_csv(records: &[CheckRecord], path: &Path) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::config("io", format!("cannot write {}: {}", path.display(), e));
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(f, "check,sample,residual,z,xi").map_err(io)?;
    let coords = |v: &[[f64; 2]]| v.iter().map(|p| format!("{}:{}", p[0], p[1])).collect::<Vec<_>>().join(" ");
    for r in records {
        for (k, p) in r.points.iter().enumerate() {
            writeln!(f, "{},{},{:e},{},{}", r.name, k, p.residual, coords(&p.z), coords(&p.xi)).map_err(io)?;
        }
    }
    f.flush().map_err(io)
}
