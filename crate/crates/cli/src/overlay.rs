//! Fills flags the user left unset from `NOISEMT_*` environment variables,
//! then from the `--config` JSON file.
//!
//! The config file is an object whose keys are long flag names (dashes or
//! underscores). Keys may sit at the top level or inside an object named
//! after the subcommand; the latter win. Booleans toggle switches, arrays
//! repeat a flag.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::{Map, Value};

use crate::CliError;

pub const ENV_PREFIX: &str = "NOISEMT_";

pub fn env_name(long: &str) -> String {
    format!("{ENV_PREFIX}{}", long.replace('-', "_").to_ascii_uppercase())
}

fn explicit(matches: &[&ArgMatches], id: &str) -> bool {
    matches.iter().any(|m| {
        matches!(
            m.try_get_raw(id).ok().flatten().and_then(|_| m.value_source(id)),
            Some(ValueSource::CommandLine | ValueSource::EnvVariable)
        )
    })
}

fn overridable(arg: &Arg) -> Option<&str> {
    let long = arg.get_long()?;
    match long {
        "help" | "version" | "config" => None,
        _ if arg.is_positional() => None,
        _ => Some(long),
    }
}

fn push_value(extra: &mut Vec<OsString>, arg: &Arg, long: &str, value: &Value) -> Result<(), CliError> {
    let bad = |what: &str| CliError::Usage(format!("config value for --{long}: {what}"));
    match (arg.get_action(), value) {
        (ArgAction::SetTrue, Value::Bool(true)) => extra.push(format!("--{long}").into()),
        (ArgAction::SetTrue, Value::Bool(false)) => {}
        (ArgAction::SetTrue, _) => return Err(bad("expected true or false")),
        (ArgAction::Append, Value::Array(items)) => {
            for v in items {
                extra.push(format!("--{long}={}", scalar(v).ok_or_else(|| bad("expected scalars"))?).into());
            }
        }
        (_, v) => extra.push(format!("--{long}={}", scalar(v).ok_or_else(|| bad("expected a scalar"))?).into()),
    }
    Ok(())
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn env_truthy(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" | "" => Some(false),
        _ => None,
    }
}

fn load_config(path: &PathBuf) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Usage(format!(
            "config {} must hold a JSON object",
            path.display()
        ))),
        Err(e) => Err(CliError::Usage(format!("config {}: {e}", path.display()))),
    }
}

fn normalize(key: &str) -> String {
    key.replace('_', "-")
}

/// Arguments to append to `argv` so that a second parse sees environment and
/// config values for every flag not given on the command line.
pub fn extra_args<F>(cmd: &Command, top: &ArgMatches, env: F) -> Result<Vec<OsString>, CliError>
where
    F: Fn(&str) -> Option<String>,
{
    let Some((sub_name, sub)) = top.subcommand() else {
        return Ok(vec![]);
    };
    let sub_cmd = cmd.find_subcommand(sub_name).expect("matched subcommand exists");
    let scopes = [top, sub];

    let config_path = top
        .get_one::<PathBuf>("config")
        .or_else(|| sub.get_one::<PathBuf>("config"))
        .cloned()
        .or_else(|| env(&env_name("config")).map(PathBuf::from));
    let config = match &config_path {
        Some(p) => load_config(p)?,
        None => Map::new(),
    };
    let section = match config.get(sub_name) {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(CliError::Usage(format!("config key {sub_name:?} must be an object"))),
        None => Map::new(),
    };

    let mut args: Vec<&Arg> = sub_cmd.get_arguments().collect();
    for g in cmd.get_arguments().filter(|a| a.is_global_set()) {
        if !args.iter().any(|a| a.get_id() == g.get_id()) {
            args.push(g);
        }
    }
    let known = |key: &str| args.iter().any(|a| overridable(a) == Some(key));
    if let Some(k) = section.keys().find(|k| !known(&normalize(k))) {
        return Err(CliError::Usage(format!(
            "unknown key {k:?} in config section {sub_name:?}"
        )));
    }

    let mut extra = Vec::new();
    for arg in args {
        let Some(long) = overridable(arg) else { continue };
        if explicit(&scopes, arg.get_id().as_str()) {
            continue;
        }
        if let Some(raw) = env(&env_name(long)) {
            if matches!(arg.get_action(), ArgAction::SetTrue) {
                let on = env_truthy(&raw)
                    .ok_or_else(|| CliError::Usage(format!("{}: expected a boolean, got {raw:?}", env_name(long))))?;
                if on {
                    extra.push(format!("--{long}").into());
                }
            } else {
                extra.push(format!("--{long}={raw}").into());
            }
            continue;
        }
        let from_config = section
            .iter()
            .chain(config.iter())
            .find(|(k, _)| normalize(k) == long)
            .map(|(_, v)| v);
        if let Some(v) = from_config {
            push_value(&mut extra, arg, long, v)?;
        }
    }
    Ok(extra)
}
