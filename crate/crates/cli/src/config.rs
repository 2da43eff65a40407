//! Flat `key = value` config files.
//!
//! Each key is a flag name without the leading dashes. File entries are
//! spliced into the argument list right after the subcommand, ahead of the
//! user's own flags, so that a flag given on the command line overrides the
//! file and unknown keys are rejected exactly like unknown flags.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

/// Options that take a value and may appear before the subcommand.
const GLOBAL_VALUE_FLAGS: [&str; 2] = ["--config", "--threads"];

pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`, got `{line}`", i + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        if key == "config" {
            return Err(format!("line {}: config files cannot include other config files", i + 1));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter().skip(1);
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            return iter.next().cloned();
        }
        if let Some(path) = text.strip_prefix("--config=") {
            return Some(path.into());
        }
    }
    None
}

fn subcommand_index(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let text = args[i].to_string_lossy();
        if GLOBAL_VALUE_FLAGS.contains(&text.as_ref()) {
            i += 2;
            continue;
        }
        if !text.starts_with('-') {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Returns `args` with the config file's entries spliced in.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some(at) = subcommand_index(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| format!("cannot read config file {}: {e}", Path::new(&path).display()))?;
    let mut spliced: Vec<OsString> = args[..=at].to_vec();
    for (key, value) in parse_file(&text)? {
        match value.as_str() {
            "true" => spliced.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                spliced.push(format!("--{key}").into());
                spliced.push(value.into());
            }
        }
    }
    spliced.extend_from_slice(&args[at + 1..]);
    Ok(spliced)
}
