use std::process::ExitCode;

use bgc_cli::{execute, parse_config, ConfigError};

fn main() -> ExitCode {
    let config = match parse_config(std::env::args_os()) {
        Ok(config) => config,
        Err(ConfigError::Usage(e)) => e.exit(),
        Err(e) => {
            eprintln!("bgc: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("bgc: some rows failed their correctness or bound checks");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("bgc: {e}");
            ExitCode::FAILURE
        }
    }
}
