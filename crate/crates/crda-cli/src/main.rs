use std::process::ExitCode;

fn main() -> ExitCode {
    crda_cli::run()
}
