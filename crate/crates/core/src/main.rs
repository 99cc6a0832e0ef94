use std::process::ExitCode;

fn main() -> ExitCode {
    spiral_acq::cli::run()
}
