//! Flat TOML config files.
//!
//! Every top-level key is a long flag name without the leading dashes, e.g.
//!
//! ```toml
//! seed = 1
//! n = 240
//! p0-grid = [0.01, 0.02, 0.03]
//! ```
//!
//! Arrays become comma-separated values. Flags given on the command line win
//! over config entries.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::CommandFactory;

use crate::Cli;

/// Long flag names accepted anywhere in the command tree.
fn known_flags() -> Vec<String> {
    let cmd = Cli::command();
    let mut out = Vec::new();
    let mut add = |c: &clap::Command| {
        out.extend(c.get_arguments().filter_map(|a| a.get_long()).map(str::to_owned));
    };
    add(&cmd);
    cmd.get_subcommands().for_each(&mut add);
    out
}

fn render(key: &str, value: &toml::Value) -> Result<String> {
    Ok(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => items
            .iter()
            .map(|v| render(key, v))
            .collect::<Result<Vec<_>>>()?
            .join(","),
        _ => bail!("config key `{key}` must be a string, number or array"),
    })
}

/// Path given by `--config`, if any.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(path) = s.strip_prefix("--config=") {
            return Some(path.into());
        }
    }
    None
}

fn given_on_command_line(args: &[OsString], flag: &str) -> bool {
    let long = format!("--{flag}");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == long || s.starts_with(&format!("{long}="))
    })
}

/// Appends config entries not already set on the command line.
pub fn merge(args: Vec<OsString>, path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("malformed config file {}", path.display()))?;
    let known = known_flags();
    let mut extra = Vec::new();
    for (key, value) in &table {
        if key == "config" || !known.contains(key) {
            bail!("unknown config key `{key}` in {}", path.display());
        }
        if !given_on_command_line(&args, key) {
            extra.push(OsString::from(format!("--{key}={}", render(key, value)?)));
        }
    }
    let mut merged = args;
    merged.extend(extra);
    Ok(merged)
}
