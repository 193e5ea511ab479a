use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(tracecodes::cli::run())
}
