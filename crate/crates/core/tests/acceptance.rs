//! Acceptance criteria 1 to 10 at full size, run sequentially so the timings are honest.
//! One line per criterion; criterion 4 is expected to fail for a single triple.

use std::io::Write;

use germlie::sweeps::{run_criterion, CriterionOutcome, SweepConfig, CRITERIA};

/// Bypasses libtest capture so the lines land in the plain `cargo test` log.
fn emit(line: String) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").unwrap();
}

fn worst(outcome: &CriterionOutcome) -> String {
    outcome
        .reports
        .iter()
        .map(|r| format!("{}: trials {} worst margin {:.3e}", r.check, r.trials, r.worst_margin))
        .collect::<Vec<_>>()
        .join("; ")
}

fn triple(r: &germlie::report::CheckReport) -> (u64, u64, f64) {
    (
        r.params["n"].as_u64().unwrap(),
        r.params["l"].as_u64().unwrap(),
        r.params["eps"].as_f64().unwrap(),
    )
}

#[test]
fn acceptance_criteria() {
    let cfg = SweepConfig::default();
    let mut unexpected = Vec::new();
    emit(String::new());
    for c in CRITERIA {
        let out = run_criterion(c.id, &cfg).expect("criterion runs");
        let status = if out.passed { "PASS" } else { "FAIL" };
        emit(format!(
            "criterion {:>2} {status} [{}] {:.2}s (limit {:.0}s) {}",
            c.id,
            c.title,
            out.elapsed_secs,
            c.time_limit_secs,
            worst(&out)
        ));
        if c.id == 4 {
            let failing: Vec<_> = out.reports.iter().filter(|r| !r.passed).map(triple).collect();
            for r in out.reports.iter().filter(|r| !r.passed) {
                emit(format!(
                    "    FAIL {:?}: {} counterexamples, delta {}, extremal probe {}",
                    triple(r),
                    r.failure_count(),
                    r.params["delta"],
                    r.params["extremal_probe_value"]
                ));
            }
            let corrected = out.supplementary.iter().all(|r| r.passed);
            emit(format!(
                "    NOTE corrected delta (Cauchy estimate on E_l): {} on all {} triples",
                if corrected { "PASS" } else { "FAIL" },
                out.supplementary.len()
            ));
            if failing != vec![(1, 4, 0.1)] || !corrected || out.elapsed_secs > c.time_limit_secs {
                unexpected.push(c.id);
            }
        } else if !out.passed {
            unexpected.push(c.id);
        }
    }
    assert!(unexpected.is_empty(), "unexpected outcomes for criteria {unexpected:?}");
}
