use std::process::ExitCode;

fn main() -> ExitCode {
    let spec = match translab_cli::parse_args(std::env::args_os()) {
        Ok(spec) => spec,
        Err(usage) => {
            if usage.exit_code == 0 {
                print!("{usage}");
            } else {
                eprint!("{usage}");
            }
            return ExitCode::from(usage.exit_code as u8);
        }
    };
    ExitCode::from(translab_cli::run(&spec) as u8)
}
