use clap::Parser;
use superquad_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let outcome = run(&cli);
    if let Some(report) = &outcome.report {
        println!(
            "{}",
            serde_json::to_string_pretty(report).expect("report serializes")
        );
    }
    if let Some(err) = &outcome.error {
        eprintln!("error: {err}");
    }
    std::process::exit(outcome.exit_code);
}
