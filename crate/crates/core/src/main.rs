use std::process::ExitCode;

fn main() -> ExitCode {
    match emden::cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("emden: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
