//! One line per acceptance criterion; exits non-zero if any criterion fails.

use std::process::ExitCode;

use firstlaw::verification::{self, Oracles};
use firstlaw_tests::print_report;

fn main() -> ExitCode {
    let oracles = Oracles::default();
    let results = vec![
        verification::check_rabi(&oracles),
        verification::check_spontaneous_emission(&oracles),
        verification::check_closure(),
        verification::check_identities(),
        verification::check_isothermal(&oracles),
        verification::check_kraus(&oracles),
        verification::check_eigensolver(&oracles),
        verification::check_heat_sign_change(&oracles),
    ];
    if print_report(&results) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
