use clap::Parser;

use multitime::cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(report) => {
            if let Some(msg) = &report.failure {
                eprintln!("error: {msg}");
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            report.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
