use std::process::ExitCode;

fn main() -> ExitCode {
    rdkit_cli::run(std::env::args_os())
}
