use std::process::ExitCode;

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_target(false)
        .init();
    let code = ganseval::run_cli(std::env::args_os());
    ExitCode::from(u8::try_from(code).unwrap_or(2))
}
