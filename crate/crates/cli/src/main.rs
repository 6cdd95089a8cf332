use clap::Parser;
use mellinfrac_cli::args::Cli;
use mellinfrac_cli::run::run;
use mellinfrac_cli::CliError;
use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let print_only = cli.print_config;
    let result = cli.resolve().and_then(|cfg| {
        cfg.validate()?;
        if print_only {
            print!("{}", cfg.to_canonical_json());
            return Ok(true);
        }
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        let passed = run(&cfg, &mut out)?;
        out.flush().map_err(CliError::from)?;
        Ok(passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("mellinfrac: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
