use std::io::Write;

use clap::Parser;
use wgstokes::cli::{exit_code, run_command, Cli, EXIT_CONFIG};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let result = run_command(&cli.command);
    match &result {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            for f in &outcome.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            if !outcome.all_converged {
                eprintln!("warning: at least one solve did not converge");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    std::process::exit(exit_code(&result));
}
