use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Run parameters. Every key can come from the TOML config file or from
/// the flag of the same name; flags win.
#[derive(Clone, Debug, Default, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    /// Partial quotient: α = [0; a, a, …].
    #[arg(long)]
    pub a: Option<u64>,
    /// Truncation level of the return time T_{≤N}.
    #[arg(long = "N", id = "big_n")]
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// build: plot resolution; verify: extra random points per level;
    /// scan: pairs per level; probe: section pairs.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest orbit summed term by term.
    #[arg(long)]
    pub naive_cap: Option<u64>,
    /// probe: ε as a rational, e.g. 1/10.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// scan, probe: deepest tower level searched for returns.
    #[arg(long)]
    pub search_depth: Option<usize>,
    /// Output directory; without it results go to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// [`RunConfig`] with every default filled in.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Resolved {
    pub a: u64,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub samples: Option<usize>,
    pub seed: u64,
    pub naive_cap: u64,
    pub epsilon: String,
    pub search_depth: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RunConfig) -> Self {
        Self {
            a: over.a.or(self.a),
            big_n: over.big_n.or(self.big_n),
            n_min: over.n_min.or(self.n_min),
            n_max: over.n_max.or(self.n_max),
            samples: over.samples.or(self.samples),
            seed: over.seed.or(self.seed),
            naive_cap: over.naive_cap.or(self.naive_cap),
            epsilon: over.epsilon.or(self.epsilon),
            search_depth: over.search_depth.or(self.search_depth),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }

    pub fn resolve(self) -> anyhow::Result<Resolved> {
        let r = Resolved {
            a: self.a.unwrap_or(10),
            big_n: self.big_n.unwrap_or(4),
            n_min: self.n_min.unwrap_or(1),
            n_max: self.n_max.unwrap_or(2),
            samples: self.samples,
            seed: self.seed.unwrap_or(0),
            naive_cap: self.naive_cap.unwrap_or(10_000_000),
            epsilon: self.epsilon.unwrap_or_else(|| "1/10".into()),
            search_depth: self.search_depth.unwrap_or(12),
            out: self.out,
            format: self.format.unwrap_or(Format::Json),
        };
        if r.a == 0 {
            bail!("a must be at least 1");
        }
        if r.big_n == 0 {
            bail!("N must be at least 1");
        }
        if r.n_min > r.n_max {
            bail!("n-min ({}) exceeds n-max ({})", r.n_min, r.n_max);
        }
        if r.naive_cap == 0 {
            bail!("naive-cap must be positive");
        }
        Ok(r)
    }
}
