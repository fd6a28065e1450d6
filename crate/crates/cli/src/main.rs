use std::process::ExitCode;

use clap::Parser;
use subrayleigh_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.json);
            ExitCode::from(outcome.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() })
            );
            ExitCode::from(e.exit_code())
        }
    }
}
