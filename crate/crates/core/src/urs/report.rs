use std::fmt::Write as _;
use std::time::Duration;

use crate::automata::SymbolMap;

use super::UrsReport;

/// Deterministic CSV: one row per candidate map plus a trailing summary
/// comment. Wall-clock times are kept out of this file (see
/// [`timing_csv`]) so that repeated runs are byte-identical.
pub fn report_csv(report: &UrsReport, alphabet: &[String], oracle: Option<(&str, &[SymbolMap])>) -> String {
    let mut out = String::from("alpha,survived,iterations\n");
    for o in &report.all_outcomes() {
        writeln!(out, "{},{},{}", o.map.display_with(alphabet), o.survived, o.iterations).unwrap();
    }
    write!(
        out,
        "# count={} count_without_identity={} max_iterations={} peak_dataset={}",
        report.count(),
        report.count_without_identity(),
        report.iterations,
        report.peak_dataset
    )
    .unwrap();
    if let Some((name, maps)) = oracle {
        write!(out, " oracle={name} oracle_count={} agree={}", maps.len(), maps == report.shortcuts.as_slice()).unwrap();
    }
    out.push('\n');
    out
}

pub fn timing_csv(algorithm: Duration, oracle: Option<(&str, Duration)>) -> String {
    let mut out = format!("phase,seconds\nalgorithm,{:.6}\n", algorithm.as_secs_f64());
    if let Some((name, t)) = oracle {
        writeln!(out, "oracle_{name},{:.6}", t.as_secs_f64()).unwrap();
        if algorithm.as_secs_f64() > 0.0 {
            writeln!(out, "speedup,{:.1}", t.as_secs_f64() / algorithm.as_secs_f64()).unwrap();
        }
    }
    out
}
