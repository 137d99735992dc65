//! `key = value` config files, merged into the argument list so that
//! explicit flags win.

use std::fs;

const BOOL_KEYS: [&str; 2] = ["bits", "plot"];

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
/// Keys are normalized to flag spelling (`rate_min` -> `rate-min`).
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", i + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key `{}`", i + 1, k.trim()));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn present(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("config key `{key}`: expected a boolean, got `{v}`")),
    }
}

/// Removes `--config PATH` from `args` and appends every config entry whose
/// flag is not already given.
pub fn merge(mut args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = match args[pos].strip_prefix("--config=") {
        Some(p) => {
            let p = p.to_string();
            args.remove(pos);
            p
        }
        None => {
            if pos + 1 >= args.len() {
                return Err("--config needs a file path".into());
            }
            let p = args.remove(pos + 1);
            args.remove(pos);
            p
        }
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    for (key, value) in parse(&text)? {
        if present(&args, &key) {
            continue;
        }
        if BOOL_KEYS.contains(&key.as_str()) {
            if parse_bool(&key, &value)? {
                args.push(format!("--{key}"));
            }
        } else {
            args.push(format!("--{key}={value}"));
        }
    }
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_comments_and_underscores() {
        let kv = parse("# header\nenergy = 2\n\nrate_min=0.1 # low end\n").unwrap();
        assert_eq!(kv, vec![("energy".into(), "2".into()), ("rate-min".into(), "0.1".into())]);
        assert!(parse("energy 2").is_err());
    }

    #[test]
    fn flags_win_over_config() {
        let dir = std::env::temp_dir().join(format!("qchannel-config-{}", std::process::id()));
        std::fs::write(&dir, "energy = 2\nnoise = 0.5\nbits = true\nplot = no\n").unwrap();
        let args = strings(&["qchannel", "capacity", "--energy", "3", "--config", dir.to_str().unwrap()]);
        let merged = merge(args).unwrap();
        std::fs::remove_file(&dir).unwrap();
        assert_eq!(merged, strings(&["qchannel", "capacity", "--energy", "3", "--noise=0.5", "--bits"]));
    }
}
