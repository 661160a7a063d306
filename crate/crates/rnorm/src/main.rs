use std::process::ExitCode;

fn main() -> ExitCode {
    rnorm::cli::run(std::env::args_os())
}
