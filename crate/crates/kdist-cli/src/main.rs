use std::process::ExitCode;

use clap::Parser;
use kdist_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, out)) => {
            let written = match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(msg) => {
                    eprintln!("kdist: {msg}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("kdist: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
