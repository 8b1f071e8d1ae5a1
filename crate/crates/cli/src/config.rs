//! `key = value` config files, spliced into argv ahead of the user's flags so
//! that explicit flags override file values.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::cli::Cli;
use crate::error::{CliError, CliResult};

/// Parsed `key = value` lines in file order. `#` starts a comment.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", idx + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", idx + 1)));
        }
        entries.push((key.to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

/// Long flags a subcommand accepts and whether each takes a value.
fn known_flags(subcommand: &str) -> Option<Vec<(String, bool)>> {
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(subcommand)?;
    Some(
        sub.get_arguments()
            .filter_map(|a| a.get_long().map(|l| (l.to_string(), a.get_action().takes_values())))
            .collect(),
    )
}

fn config_path(args: &[OsString]) -> CliResult<Option<OsString>> {
    let mut path = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let p = it
                .next()
                .ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
            path = Some(p.clone());
        } else if let Some(p) = a.to_str().and_then(|s| s.strip_prefix("--config=")) {
            path = Some(p.into());
        }
    }
    Ok(path)
}

/// Inserts config-file entries as flags right after the subcommand name.
/// Unknown keys and keys that name no flag of the subcommand are usage errors.
pub fn expand_args(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(sub_pos) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(args);
    };
    let sub_pos = sub_pos + 1;
    let Some(path) = config_path(&args[sub_pos + 1..])? else {
        return Ok(args);
    };
    let subcommand = args[sub_pos].to_string_lossy().into_owned();
    let Some(flags) = known_flags(&subcommand) else {
        // Let clap report the unknown subcommand.
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", Path::new(&path).display())))?;
    let mut seen = BTreeSet::new();
    let mut inserted: Vec<OsString> = Vec::new();
    for (key, value) in parse_config(&text)? {
        let Some((_, takes_value)) = flags.iter().find(|(name, _)| *name == key) else {
            return Err(CliError::Usage(format!("unknown config key '{key}' for {subcommand}")));
        };
        if key == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        if !seen.insert(key.clone()) {
            return Err(CliError::Usage(format!("config key '{key}' given twice")));
        }
        if *takes_value {
            inserted.push(format!("--{key}").into());
            inserted.push(value.into());
        } else {
            match value.as_str() {
                "true" => inserted.push(format!("--{key}").into()),
                "false" => {}
                other => {
                    return Err(CliError::Usage(format!(
                        "config key '{key}' expects true or false, got '{other}'"
                    )))
                }
            }
        }
    }
    let mut out: Vec<OsString> = args[..=sub_pos].to_vec();
    out.extend(inserted);
    out.extend(args[sub_pos + 1..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let e = parse_config("# header\n\nseed = 7 # trailing\nsolver=sa\n").unwrap();
        assert_eq!(e, vec![("seed".into(), "7".into()), ("solver".into(), "sa".into())]);
    }

    #[test]
    fn missing_equals_names_the_line() {
        let err = parse_config("seed = 1\nseed 2\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn flags_known_per_subcommand() {
        let f = known_flags("price").unwrap();
        assert!(f.iter().any(|(n, v)| n == "strike" && *v));
        assert!(f.iter().any(|(n, v)| n == "record-timing" && !*v));
        assert!(!f.iter().any(|(n, _)| n == "sweeps"));
        assert!(known_flags("nope").is_none());
    }
}
