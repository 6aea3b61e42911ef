//! `key=value` sidecars describing a run.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use crate::args::Record;
use crate::error::CliError;

pub const TOOL: &str = "brusselator";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub subcommand: String,
    pub output: PathBuf,
    pub seed: u64,
    pub args: Vec<(String, String)>,
    /// Derived values (resolved `b`, automatic horizon, ...); informational.
    pub resolved: Vec<(String, String)>,
}

impl Meta {
    pub fn new(subcommand: &str, output: &Path, seed: u64, args: Record) -> Self {
        Meta {
            subcommand: subcommand.to_string(),
            output: output.to_path_buf(),
            seed,
            args: args.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            resolved: Vec::new(),
        }
    }

    pub fn resolve(&mut self, key: &str, value: impl std::fmt::Display) {
        self.resolved.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "tool={TOOL}\nversion={VERSION}\nnoise_algorithm={}\nsubcommand={}\noutput={}\nseed={}\n",
            brusselator::noise::NOISE_ALGORITHM_VERSION,
            self.subcommand,
            self.output.display(),
            self.seed
        );
        for (k, v) in &self.args {
            s.push_str(&format!("arg.{k}={v}\n"));
        }
        for (k, v) in &self.resolved {
            s.push_str(&format!("resolved.{k}={v}\n"));
        }
        s
    }

    pub fn write(&self) -> Result<PathBuf, CliError> {
        let path = sidecar_path(&self.output);
        fs::write(&path, self.render()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self, CliError> {
        let bad = |reason: String| CliError::Meta {
            path: path.to_path_buf(),
            reason,
        };
        let mut meta = Meta {
            subcommand: String::new(),
            output: PathBuf::new(),
            seed: 0,
            args: Vec::new(),
            resolved: Vec::new(),
        };
        let mut seen_version = false;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key=value", n + 1)))?;
            match key {
                "tool" if value != TOOL => return Err(bad(format!("written by `{value}`"))),
                "noise_algorithm" if value != brusselator::noise::NOISE_ALGORITHM_VERSION.to_string() => {
                    return Err(bad(format!("noise algorithm {value} is not supported")))
                }
                "version" => seen_version = true,
                "subcommand" => meta.subcommand = value.to_string(),
                "output" => meta.output = PathBuf::from(value),
                "seed" => {
                    meta.seed = value.parse().map_err(|_| bad(format!("bad seed `{value}`")))?
                }
                _ => {
                    if let Some(k) = key.strip_prefix("arg.") {
                        meta.args.push((k.to_string(), value.to_string()));
                    } else if let Some(k) = key.strip_prefix("resolved.") {
                        meta.resolved.push((k.to_string(), value.to_string()));
                    }
                }
            }
        }
        if meta.subcommand.is_empty() {
            return Err(bad("missing `subcommand`".into()));
        }
        if meta.subcommand == "rerun" {
            return Err(bad("cannot rerun a rerun".into()));
        }
        if !seen_version {
            return Err(bad("missing `version`".into()));
        }
        Ok(meta)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Meta::parse(path, &text)
    }

    /// Command line that repeats the run, writing to `out`.
    pub fn argv(&self, out: &Path) -> Vec<OsString> {
        let mut argv: Vec<OsString> = vec![TOOL.into(), self.subcommand.clone().into()];
        for (k, v) in &self.args {
            argv.push(format!("--{k}={v}").into());
        }
        let mut flag = OsString::from("--out=");
        flag.push(out.as_os_str());
        argv.push(flag);
        argv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_round_trip() {
        let mut m = Meta::new(
            "simulate",
            Path::new("/tmp/x.csv"),
            7,
            vec![("a", "1".into()), ("x0", "-0.5".into())],
        );
        m.resolve("b", 2.5);
        let back = Meta::parse(Path::new("m"), &m.render()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn argv_uses_equals_form() {
        let m = Meta::new("simulate", Path::new("o.csv"), 1, vec![("x0", "-1".into())]);
        let argv = m.argv(Path::new("p.csv"));
        assert_eq!(argv[2], OsString::from("--x0=-1"));
        assert_eq!(argv[3], OsString::from("--out=p.csv"));
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(Meta::parse(Path::new("m"), "tool=other\nversion=1\nsubcommand=ssa\n").is_err());
        assert!(Meta::parse(Path::new("m"), "version=1\n").is_err());
        assert!(Meta::parse(Path::new("m"), "garbage\n").is_err());
    }
}
