//! Flat `key = value` configuration files.
//!
//! Keys are long flag names of the subcommand being run (`seed = 7` acts
//! like `--seed 7`). Flags on the command line win over the file, and the
//! file wins over built-in defaults. Lines starting with `#` are comments.
//! A key that no subcommand knows is an error; a key known only to other
//! subcommands is ignored, so one file can serve a whole pipeline.

use crate::error::{usage, CliError};
use clap::CommandFactory;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(usage(format!("config line {}: empty key", i + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(usage(format!("config line {}: repeated key {key}", i + 1)));
        }
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Splices the config file named by `--config` into `args`, right after the
/// subcommand name so that explicit flags come later and override it.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let entries = parse_config(&text)?;

    let cmd = crate::Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|c| c.get_name().to_string()).collect();
    let Some(at) = args.iter().position(|a| names.iter().any(|n| a.to_str() == Some(n))) else {
        return Ok(args);
    };
    let sub = cmd.find_subcommand(args[at].to_str().unwrap()).unwrap();
    let known_anywhere = |key: &str| {
        cmd.get_subcommands().flat_map(|c| c.get_arguments()).chain(cmd.get_arguments()).any(|a| a.get_long() == Some(key))
    };

    let mut spliced = Vec::new();
    for (key, value) in &entries {
        if key == "config" {
            return Err(usage("config files cannot include other config files"));
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            if known_anywhere(key) {
                continue;
            }
            return Err(usage(format!("unknown config key {key}")));
        };
        if arg.get_action().takes_values() {
            spliced.push(OsString::from(format!("--{key}={value}")));
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => spliced.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" => {}
                _ => return Err(usage(format!("config key {key} takes true or false, not {value:?}"))),
            }
        }
    }
    let mut out = args;
    out.splice(at + 1..at + 1, spliced);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let c = parse_config("# pipeline\nseed = 7\nsnap_radius=150\n\n").unwrap();
        assert_eq!(c["seed"], "7");
        assert_eq!(c["snap-radius"], "150");
        assert!(parse_config("seed 7").is_err());
        assert!(parse_config("a=1\na=2").is_err());
    }
}
