use std::ffi::OsString;
use std::path::Path;

use clap::Command;

use crate::CliError;

/// One `key = value` entry of a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Parses flat `key = value` text. `#` starts a comment; keys may use `_` or `-`.
pub fn parse(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(CliError::Config(format!("line {line}: expected key = value, got '{body}'")));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(CliError::Config(format!("line {line}: invalid key '{}'", k.trim())));
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(CliError::Config(format!("line {line}: '{key}' already set on line {}", prev.line)));
        }
        out.push(Entry {
            line,
            key,
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

/// Rewrites `argv` so that values from `--config FILE` precede the explicit
/// flags; with `args_override_self` the explicit flags win.
pub fn expand(cmd: &Command, argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(sub_pos) = argv.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 1) else {
        return Ok(argv);
    };
    let sub_name = argv[sub_pos].to_string_lossy().into_owned();
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(argv);
    };
    let rest = &argv[sub_pos + 1..];
    let mut path: Option<OsString> = None;
    for (i, a) in rest.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = rest.get(i + 1).cloned();
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Config(format!("{}: {e}", Path::new(&path).display())))?;
    let mut injected = Vec::new();
    for e in parse(&text)? {
        if e.key == "config" {
            return Err(CliError::Config(format!("line {}: nested config files are not supported", e.line)));
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(e.key.as_str())) else {
            return Err(CliError::Config(format!("line {}: unknown key '{}' for '{sub_name}'", e.line, e.key)));
        };
        if arg.get_action().takes_values() {
            if e.value.is_empty() {
                return Err(CliError::Config(format!("line {}: '{}' needs a value", e.line, e.key)));
            }
            injected.push(OsString::from(format!("--{}={}", e.key, e.value)));
        } else {
            match e.value.as_str() {
                "true" | "yes" | "1" => injected.push(OsString::from(format!("--{}", e.key))),
                "false" | "no" | "0" => {}
                v => {
                    return Err(CliError::Config(format!("line {}: '{}' expects true or false, got '{v}'", e.line, e.key)))
                }
            }
        }
    }
    let mut out = argv[..=sub_pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries_and_comments() {
        let e = parse("# run\ngrid = 15x15\n\nmax_steps=10 # budget\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].key, "max-steps");
        assert_eq!(e[1].value, "10");
        assert_eq!(e[1].line, 4);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("grid = 4x4\nnonsense\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = parse("seed = 1\nseed = 2\n").unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("line 1"), "{err}");
    }
}
