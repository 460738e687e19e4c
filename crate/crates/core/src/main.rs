use std::io;
use std::process::ExitCode;

use multiverse_kit::cli;
use multiverse_kit::Limits;

fn main() -> ExitCode {
    let code = cli::run(
        std::env::args_os(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
        &Limits::from_env(),
    );
    ExitCode::from(code as u8)
}
