use std::process::ExitCode;

fn main() -> ExitCode {
    bspr_cli::configure_threads();
    let stdout = std::io::stdout();
    match bspr_cli::run(std::env::args_os(), &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(bspr_cli::CliError::Help(msg)) => {
            print!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(2)
        }
    }
}
