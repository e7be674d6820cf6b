use std::io::Write;

use agdmm::acceptance::{run_criterion, Status};

// Lines go straight to the stderr handle so they show without --nocapture.
#[test]
fn acceptance_criteria() {
    let mut err = std::io::stderr().lock();
    let mut failures = Vec::new();
    for id in 1..=12 {
        let result = run_criterion(id);
        writeln!(err, "{result}").unwrap();
        if result.status == Status::Fail {
            failures.push(id);
        }
    }
    assert!(failures.is_empty(), "criteria failed: {failures:?}");
}
