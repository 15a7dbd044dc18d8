//! Single-file `key=value` configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// Least `m` admitting a marked-rectangle selection for `d = 1`.
pub const DEFAULT_M: i64 = 12;

/// Run parameters. Flags override the config file, which overrides the
/// defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub m: i64,
    pub d: usize,
    pub eps: f64,
    pub r0: f64,
    pub seed: u64,
    pub mesh: f64,
    pub grid: usize,
    pub n: usize,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            m: DEFAULT_M,
            d: 1,
            eps: 0.05,
            r0: 0.05,
            seed: 0,
            mesh: 0.01,
            grid: 128,
            n: 10,
            workers: 0,
            out: PathBuf::from("bony-out"),
        }
    }
}

pub const KEYS: [&str; 10] = [
    "m", "d", "eps", "r0", "seed", "mesh", "grid", "n", "workers", "out",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("invalid value `{value}` for `{key}`: {e}"))
}

impl Params {
    /// Set one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "m" => self.m = parse(key, value)?,
            "d" => self.d = parse(key, value)?,
            "eps" => self.eps = parse(key, value)?,
            "r0" => self.r0 = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "mesh" => self.mesh = parse(key, value)?,
            "grid" => self.grid = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "out" => {
                if value.is_empty() {
                    bail!("invalid value `` for `out`: empty path");
                }
                self.out = PathBuf::from(value)
            }
            _ => bail!("unknown config key `{key}`"),
        }
        Ok(())
    }

    /// Apply `key=value` lines; blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key=value", no + 1))?;
            self.set(k.trim(), v.trim())
                .with_context(|| format!("line {}", no + 1))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Params> {
        let mut p = Params::default();
        p.apply_text(text)?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Params> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Params::from_text(&text)
    }

    /// Every key, in [`KEYS`] order; floats use shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "m={}", self.m);
        let _ = writeln!(s, "d={}", self.d);
        let _ = writeln!(s, "eps={:?}", self.eps);
        let _ = writeln!(s, "r0={:?}", self.r0);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "mesh={:?}", self.mesh);
        let _ = writeln!(s, "grid={}", self.grid);
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "workers={}", self.workers);
        let _ = writeln!(s, "out={}", self.out.display());
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())
            .with_context(|| format!("cannot write config {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(Params::from_text("").unwrap(), Params::default());
        assert_eq!(
            Params::from_text("# comment\n\n").unwrap(),
            Params::default()
        );
    }

    #[test]
    fn values_and_comments() {
        let p = Params::from_text("m = 14\nd=2 # two\neps=0.03\nn=20\n").unwrap();
        assert_eq!((p.m, p.d, p.eps, p.n), (14, 2, 0.03, 20));
    }

    #[test]
    fn errors_name_the_key() {
        let e = Params::from_text("colour=blue").unwrap_err();
        assert!(format!("{e:#}").contains("colour"));
        let e = Params::from_text("eps=abc").unwrap_err();
        assert!(format!("{e:#}").contains("eps"));
        let e = Params::from_text("grid=-3").unwrap_err();
        assert!(format!("{e:#}").contains("grid"));
        assert!(Params::from_text("m").is_err());
    }

    #[test]
    fn round_trip() {
        let p = Params {
            m: 13,
            d: 3,
            eps: 0.1 + 0.2,
            r0: 0.045,
            seed: 99,
            mesh: 0.005,
            grid: 64,
            n: 7,
            workers: 3,
            out: PathBuf::from("some/dir"),
        };
        assert_eq!(Params::from_text(&p.to_text()).unwrap(), p);
    }
}
