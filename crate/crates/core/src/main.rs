use std::process::ExitCode;

fn main() -> ExitCode {
    frechet_sets::cli::main_with_args(std::env::args_os())
}
