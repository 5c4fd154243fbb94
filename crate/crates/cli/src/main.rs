mod args;
mod commands;
mod config;
mod output;

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches};
use serde_json::Value;

use args::Cli;
use commands::{run, CliError};
use output::Manifest;

const USAGE_EXIT: u8 = 2;
const RUNTIME_EXIT: u8 = 1;

/// Raw flag values as given (or defaulted), minus flags that cannot change
/// outputs.
fn parameters(name: &str, m: &ArgMatches) -> BTreeMap<String, Value> {
    let cmd = Cli::command();
    let args: Vec<String> = cmd
        .find_subcommand(name)
        .into_iter()
        .flat_map(|c| c.get_arguments().map(|a| a.get_id().to_string()))
        .collect();
    m.ids()
        .filter(|id| args.iter().any(|a| a == id.as_str()))
        .filter(|id| !matches!(id.as_str(), "threads" | "config" | "seed"))
        .filter_map(|id| {
            let raw = m.try_get_raw(id.as_str()).ok()??;
            let vals: Vec<Value> = raw.map(|v| Value::String(v.to_string_lossy().into_owned())).collect();
            let v = match <[Value; 1]>::try_from(vals) {
                Ok([one]) => one,
                Err(many) => Value::Array(many),
            };
            Some((id.to_string(), v))
        })
        .collect()
}

fn execute(cli: &Cli, matches: &ArgMatches) -> Result<(), CliError> {
    let outcome = run(&cli.command, cli.seed)?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let manifest = Manifest {
        subcommand: name.to_string(),
        parameters: parameters(name, sub),
        inputs: outcome.inputs,
        seed: cli.seed,
    };
    manifest.write_next_to(&outcome.outputs[0])?;
    Ok(())
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_EXIT);
        }
    };
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE_EXIT } else { 0 });
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(USAGE_EXIT);
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli, &matches)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(&cli, &matches),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE_EXIT)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(RUNTIME_EXIT)
        }
    }
}
