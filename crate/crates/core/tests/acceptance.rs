use std::process::ExitCode;

use idla_core::acceptance::{run_all, AcceptanceConfig};

fn main() -> ExitCode {
    let outcomes = run_all(&AcceptanceConfig::default());
    for outcome in &outcomes {
        println!("{}", outcome.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
