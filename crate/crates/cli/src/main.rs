use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        eprintln!("internal error: {info}");
    }));
    let (code, out, err) = match std::panic::catch_unwind(|| nclp_cli::run_args(std::env::args_os())) {
        Ok(r) => r,
        Err(_) => (nclp_cli::EXIT_USAGE, String::new(), String::new()),
    };
    let _ = std::io::stdout().write_all(out.as_bytes());
    let _ = std::io::stderr().write_all(err.as_bytes());
    ExitCode::from(code as u8)
}
