use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qscada_core::cli::run_command(std::env::args_os()) as u8)
}
