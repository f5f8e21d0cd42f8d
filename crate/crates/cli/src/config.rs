use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::CommandFactory;

use crate::args::Cli;

/// Global flags that take a value, so the subcommand can be located in the
/// raw arguments.
const GLOBAL_WITH_VALUE: [&str; 2] = ["--threads", "--config"];

fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

fn subcommand_position(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if GLOBAL_WITH_VALUE.contains(&s.as_ref()) {
            i += 2;
        } else if s.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

/// Splices the entries of `--config FILE` in as flags directly after the
/// subcommand, so that later command-line flags override them.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = find_config(&args) else {
        return Ok(args);
    };
    let Some(pos) = subcommand_position(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let pairs = bvsel::io::parse_config(&text, &path).map_err(crate::usage)?;

    let root = Cli::command();
    let sub_name = args[pos].to_string_lossy().into_owned();
    let sub = root.find_subcommand(&sub_name);
    let is_switch = |key: &str| {
        let find = |c: &clap::Command| {
            c.get_arguments()
                .find(|a| a.get_long() == Some(key))
                .cloned()
        };
        sub.and_then(find)
            .or_else(|| find(&root))
            .is_some_and(|a| !a.get_action().takes_values())
    };

    let mut injected = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            continue;
        }
        let flag = OsString::from(format!("--{key}"));
        if is_switch(&key) {
            match value.as_str() {
                "" | "true" | "yes" | "1" => injected.push(flag),
                "false" | "no" | "0" => {}
                other => {
                    return Err(crate::usage(format!(
                        "{}: `{key}` is a switch, expected true or false, got {other:?}",
                        path.display()
                    )))
                }
            }
        } else {
            injected.push(flag);
            injected.push(OsString::from(value));
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
