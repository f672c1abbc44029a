use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use parity_spectrum_cli::{configure_threads, execute, Cli};

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    let threads = std::env::var("PARITY_SPECTRUM_THREADS").ok();
    let result = configure_threads(threads.as_deref()).and_then(|()| execute(&cli.command));
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).is_err() {
                return ExitCode::from(parity_spectrum_cli::run::EXIT_IO);
            }
            ExitCode::from(out.status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
