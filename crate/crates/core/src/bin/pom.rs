use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pom_core::cli::run(std::env::args_os()))
}
