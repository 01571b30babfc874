use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|_| {}));
    let outcome = std::panic::catch_unwind(|| {
        let stdout = std::io::stdout();
        let stderr = std::io::stderr();
        covbound_cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(_) => {
            let _ = writeln!(
                std::io::stderr(),
                r#"{{"error":{{"kind":"internal","message":"unexpected internal failure","exit_code":3}}}}"#
            );
            ExitCode::from(3)
        }
    }
}
