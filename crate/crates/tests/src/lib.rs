//! Acceptance suite driver. The checks themselves live in `firstlaw::verification`.

use firstlaw::verification::CheckResult;

/// Prints one verdict line per check and a tally; true when every check passed.
pub fn print_report(results: &[CheckResult]) -> bool {
    for r in results {
        println!("{r}");
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    passed == results.len()
}
