use std::process::ExitCode;

fn main() -> ExitCode {
    cg_induce::cli::main_with(std::env::args_os())
}
