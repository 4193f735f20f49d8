//! Acceptance run: every criterion at its fixed tolerance and time budget.
//! Prints one line per criterion and exits nonzero if any fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use hcseries::checks::{run_reference, CheckOptions, CheckRecord, SUITES};

struct Criterion {
    id: usize,
    title: &'static str,
    checks: &'static [&'static str],
    budget_s: f64,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "theta functional equation", checks: &["theta.functional_equation"], budget_s: 1.0 },
    Criterion { id: 2, title: "theta addition formula", checks: &["theta.addition"], budget_s: 1.0 },
    Criterion { id: 3, title: "Jacobi triple product, B2/B3", checks: &["theta.triple_product"], budget_s: 5.0 },
    Criterion { id: 4, title: "rank-one oracle", checks: &["hc.rank_one_oracle"], budget_s: 10.0 },
    Criterion { id: 5, title: "eigenvalue equations, GL3 and B2", checks: &["hc.eigen.gl3", "hc.eigen.b2"], budget_s: 60.0 },
    Criterion {
        id: 6,
        title: "c_tau(psi~) = A; extracted L = explicit L",
        checks: &["operators.c_translation_equals_a", "operators.extracted_vs_explicit"],
        budget_s: 31.0,
    },
    Criterion {
        id: 7,
        title: "operator algebra",
        checks: &["operators.hecke", "operators.braid", "operators.y_commute", "operators.l_commute", "operators.equivariance"],
        budget_s: 60.0,
    },
    Criterion {
        id: 8,
        title: "connection identity",
        checks: &["connection.rank_one_identity", "connection.identity.b2"],
        budget_s: 120.0,
    },
    Criterion {
        id: 9,
        title: "connection matrix structure",
        checks: &["connection.sparsity", "connection.ultraspherical_agreement", "connection.translation_invariance"],
        budget_s: 10.0,
    },
    Criterion { id: 10, title: "dynamical Yang-Baxter and reflection, B3", checks: &["yb.yang_baxter", "yb.reflection"], budget_s: 30.0 },
    Criterion {
        id: 11,
        title: "reflectionless degeneration",
        checks: &["reflectionless.m_simple", "reflectionless.phi_invariance"],
        budget_s: 60.0,
    },
    Criterion {
        id: 12,
        title: "quantum KZ cocycle",
        checks: &["qkz.word_independence", "qkz.duality_symmetry", "qkz.r0_product"],
        budget_s: 60.0,
    },
    Criterion { id: 13, title: "quantum c-function", checks: &["cfun.relationsc", "cfun.alternative"], budget_s: 60.0 },
    Criterion { id: 14, title: "higher rank addition formula, B2", checks: &["cfun.ridroot"], budget_s: 30.0 },
    Criterion { id: 15, title: "Gamma-hat vanishing box, A1", checks: &["gammahat.box"], budget_s: 30.0 },
    Criterion { id: 16, title: "self-duality", checks: &["duality.gl3", "duality.b2", "duality.aw1"], budget_s: 120.0 },
];

fn main() -> ExitCode {
    let opts = CheckOptions::default();
    let start = Instant::now();
    let mut records: HashMap<String, CheckRecord> = HashMap::new();
    for suite in SUITES {
        for r in run_reference(suite, &opts).expect("known suite") {
            records.insert(r.name.clone(), r);
        }
    }
    let mut failed = 0;
    for c in CRITERIA {
        let rs: Vec<&CheckRecord> = c.checks.iter().map(|n| records.get(*n).unwrap_or_else(|| panic!("missing {}", n))).collect();
        let secs = rs.iter().map(|r| r.wall_ms).sum::<u128>() as f64 / 1000.0;
        let ok = rs.iter().all(|r| r.pass) && secs <= c.budget_s;
        if !ok {
            failed += 1;
        }
        let detail: Vec<String> = rs
            .iter()
            .map(|r| format!("{} {:.2e}/{:.0e}{}", r.name, r.residual, r.tolerance, if r.pass { "" } else { " FAIL" }))
            .collect();
        println!(
            "criterion {:2} {} {:<42} {:6.2}s/{:.0}s  {}",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.title,
            secs,
            c.budget_s,
            detail.join("; ")
        );
        for r in rs.iter().filter(|r| !r.pass) {
            for n in &r.notes {
                println!("    {}: {}", r.name, n);
            }
        }
    }
    println!("{} of {} criteria passed in {:.1}s", CRITERIA.len() - failed, CRITERIA.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
