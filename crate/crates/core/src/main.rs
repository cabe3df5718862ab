use std::process::ExitCode;

fn main() -> ExitCode {
    nhat::cli::main()
}
