use std::process::ExitCode;

fn main() -> ExitCode {
    bbc_capacity::cli::main_with_args(std::env::args_os())
}
