//! Acceptance suite: every criterion at full scale with its time limit.
//! Prints one PASS/FAIL line per criterion, then fails if any did.

use slp_core::selftest::{run_criterion, Level, CRITERIA};

const SEED: u64 = 0x5EED_2024;

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for (id, _, _) in CRITERIA {
        let r = run_criterion(id, Level::Full, SEED);
        println!("{}", r.line());
        for n in &r.notes {
            println!("    {}", n.replace('\n', "\n    "));
        }
        if !r.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
