use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = nrm_core::cli::dispatch(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
