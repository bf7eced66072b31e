use std::process::ExitCode;

fn main() -> ExitCode {
    lyapdim_cli::main_with(std::env::args_os())
}
