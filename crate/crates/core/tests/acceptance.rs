//! Acceptance suite: one verdict line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::Instant;

use pdld::verify::{criterion, CRITERIA};

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for i in 1..=CRITERIA {
        let start = Instant::now();
        match criterion(i) {
            Ok(report) => {
                println!("{} ({:.1}s)", report.line(), start.elapsed().as_secs_f64());
                for note in &report.notes {
                    println!("    note: {note}");
                }
                if !report.passed() {
                    failed.push(i);
                }
            }
            Err(e) => {
                println!("FAIL criterion-{i}: error: {e}");
                failed.push(i);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {CRITERIA} criteria pass");
        ExitCode::SUCCESS
    } else {
        println!(
            "acceptance: {} of {CRITERIA} criteria fail: {failed:?}",
            failed.len()
        );
        ExitCode::FAILURE
    }
}
