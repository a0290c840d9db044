use clap::Parser;
use visil_cli::{run, Cli, CliError};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let err = CliError::usage("arguments", e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            std::process::exit(err.exit_code());
        }
    };
    if let Err(e) = run(cli, |k| std::env::var(k).ok()) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
