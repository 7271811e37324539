//! Full certification gate: every advertised guarantee, one line each.
//! Run with `--nocapture` to see the per-check measurements even on success.

#[test]
fn certification_suite_passes() {
    let outcomes = ellrad::selftest::run_all();
    assert_eq!(outcomes.len(), 12);
    let mut failures = 0;
    for o in &outcomes {
        println!("{}", o.line());
        if !o.pass {
            failures += 1;
        }
    }
    assert_eq!(failures, 0, "{failures} certification check(s) failed");
}
