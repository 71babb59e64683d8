use clap::Parser;

use jointspec_cli::{run, RunConfig};

fn main() {
    let cfg = RunConfig::parse();
    let outcome = run(&cfg);
    if outcome.code != 0 {
        eprintln!("jointspec: {}", outcome.message);
    }
    std::process::exit(outcome.code);
}
