//! The acceptance suite: every criterion at its default tolerance, one line each.

use std::process::ExitCode;
use std::time::Instant;

use entsearch_cli::scenario::{Tolerances, VerifySettings};
use entsearch_cli::verify::{run_criteria, VerifyContext};

fn main() -> ExitCode {
    let ctx = VerifyContext {
        settings: VerifySettings::default(),
        tolerances: Tolerances::default(),
        seed: 20_240_601,
        workers: 4,
    };
    let start = Instant::now();
    let results = match run_criteria(&ctx) {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL acceptance suite could not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    for r in &results {
        println!("{}", r.summary_line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 && results.len() == 11 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
