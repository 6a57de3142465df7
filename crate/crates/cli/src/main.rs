use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let matches = semgraph_cli::command().get_matches();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr());
    match semgraph_cli::run_matches(&matches, &mut out, &mut err) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
