use std::process::ExitCode;

fn main() -> ExitCode {
    let code = halfspace_imaging_cli::run(std::env::args_os());
    ExitCode::from(code)
}
