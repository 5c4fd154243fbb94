use std::ffi::OsString;
use std::path::Path;

use crate::args::Command;

const GLOBAL_WITH_VALUE: [&str; 3] = ["--seed", "--threads", "--config"];

/// Path given by `--config FILE` or `--config=FILE`, if any.
fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

fn subcommand_position(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if GLOBAL_WITH_VALUE.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if Command::NAMES.contains(&s.as_ref()) {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Turn `key = value` lines into flags. `true` becomes a bare flag and
/// `false` drops it. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str, origin: &Path) -> Result<Vec<OsString>, String> {
    let mut flags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("{}:{}: expected key=value", origin.display(), i + 1));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            return Err(format!("{}:{}: empty key", origin.display(), i + 1));
        }
        match value {
            "true" => flags.push(format!("--{key}").into()),
            "false" => {}
            v => {
                flags.push(format!("--{key}").into());
                flags.push(v.into());
            }
        }
    }
    Ok(flags)
}

/// Insert flags from the `--config` file right after the subcommand, so
/// flags given on the command line override them.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let flags = parse_config(&text, path)?;
    let Some(pos) = subcommand_position(&argv) else {
        return Ok(argv);
    };
    let mut out = argv;
    out.splice(pos + 1..pos + 1, flags);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_lines_become_flags() {
        let text = "# comment\nwalks = 10\nlazy=true\nkeep_authors=false\n\nalpha = inf\n";
        let flags = parse_config(text, Path::new("c")).unwrap();
        assert_eq!(flags, os(&["--walks", "10", "--lazy", "--alpha", "inf"]));
        assert!(parse_config("nonsense", Path::new("c")).is_err());
    }

    #[test]
    fn flags_land_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "walks=7\n").unwrap();
        let argv = vec![
            OsString::from("hyperlit"),
            "--seed".into(),
            "3".into(),
            "--config".into(),
            cfg.clone().into_os_string(),
            "walk".into(),
            "--walks".into(),
            "9".into(),
        ];
        let out = expand(argv).unwrap();
        let tail: Vec<_> = out[5..].iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(tail, ["walk", "--walks", "7", "--walks", "9"]);
        assert_eq!(expand(os(&["hyperlit", "walk"])).unwrap(), os(&["hyperlit", "walk"]));
    }
}
