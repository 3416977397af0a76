use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = subsidy_game::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
