use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pt_spectra::cli::run(std::env::args_os()) as u8)
}
