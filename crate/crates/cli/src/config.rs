//! `key = value` config files merged under the command line.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{Context, Result};
use wikistream::Error;

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, Error> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::validation("config", format!("expected key = value, got {raw:?}"))
                .at_line(i as u64 + 1));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(Error::validation("config", "empty key").at_line(i as u64 + 1));
        }
        pairs.push((key, value));
    }
    Ok(pairs)
}

/// Turns config pairs into flags. `true` becomes a bare switch and `false`
/// drops the key.
pub fn pairs_to_args(pairs: &[(String, String)]) -> Vec<OsString> {
    let mut args = Vec::new();
    for (key, value) in pairs {
        match value.as_str() {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    args
}

/// Finds `--config PATH` (or `--config=PATH`) and splices the file's
/// settings in right after the subcommand, so later command-line flags
/// override them.
pub fn merge_config_file(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut config_path = None;
    let mut i = 1;
    while i < argv.len() {
        let arg = argv[i].to_string_lossy().into_owned();
        if arg == "--config" {
            if i + 1 >= argv.len() {
                return Err(Error::validation("config", "--config needs a path").into());
            }
            config_path = Some(argv.remove(i + 1));
            argv.remove(i);
            break;
        }
        if let Some(path) = arg.strip_prefix("--config=") {
            config_path = Some(OsString::from(path));
            argv.remove(i);
            break;
        }
        i += 1;
    }
    let Some(path) = config_path else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    if !path.is_file() {
        return Err(Error::validation("config", format!("{}: no such file", path.display())).into());
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let extra = pairs_to_args(&parse_config(&text)?);
    let Some(sub) = argv.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(argv);
    };
    let at = sub + 2;
    argv.splice(at..at, extra);
    Ok(argv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let pairs = parse_config("# run\nseed = 3\nclassifier=rf # forest\n\nbalance = true\n").unwrap();
        assert_eq!(
            pairs,
            vec![
                ("seed".into(), "3".into()),
                ("classifier".into(), "rf".into()),
                ("balance".into(), "true".into())
            ]
        );
        assert!(parse_config("seed 3").is_err());
    }

    #[test]
    fn booleans_become_switches() {
        let args = pairs_to_args(&[("balance".into(), "true".into()), ("x".into(), "false".into())]);
        assert_eq!(args, vec![OsString::from("--balance")]);
    }

    #[test]
    fn config_goes_before_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "seed = 3\n").unwrap();
        let argv: Vec<OsString> = ["wikistream", "--config", path.to_str().unwrap(), "evaluate", "--seed", "9"]
            .iter()
            .map(OsString::from)
            .collect();
        let merged = merge_config_file(argv).unwrap();
        let merged: Vec<String> = merged.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(merged, ["wikistream", "evaluate", "--seed", "3", "--seed", "9"]);
    }
}
