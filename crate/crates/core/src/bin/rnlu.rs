use std::io;
use std::process::ExitCode;

use rapid_nlu::cli::{run, Io};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let stdin = io::stdin();
    let mut io = Io {
        stdin: &mut stdin.lock(),
        stdout: &mut io::stdout().lock(),
        stderr: &mut io::stderr().lock(),
    };
    ExitCode::from(run(std::env::args_os(), &mut io) as u8)
}
