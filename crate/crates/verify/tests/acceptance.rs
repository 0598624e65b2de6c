//! Acceptance criteria 1 to 9, one PASS/FAIL line each. Exits nonzero when
//! any criterion fails.

use std::process::ExitCode;

use cavsqueeze_verify::CRITERIA;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for (i, (name, f)) in CRITERIA.iter().enumerate() {
        let v = f();
        println!("criterion {}: {} {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
