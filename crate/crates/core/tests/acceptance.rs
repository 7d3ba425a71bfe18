//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fail.
//! `ACCEPTANCE_ONLY=1,4` restricts the run.

use std::time::Instant;

use primbase::cli::selftest;

fn main() {
    let only: Vec<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let t = Instant::now();
    let outs = selftest::run_with(&only, |o| {
        println!("{}", o.line());
        for f in o.failures.iter().skip(1) {
            println!("    also: {f}");
        }
        for e in &o.excluded {
            println!("    excluded: {e}");
        }
    });
    let failed = outs.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed in {:.0}s", outs.len() - failed, t.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
