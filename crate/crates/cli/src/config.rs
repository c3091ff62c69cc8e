//! Flags, the validated run configuration and usage errors.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "radon", version, about = "Clique detection by Radon basis pursuit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Recover weighted cliques from a graph or ballot counts.
    Detect(Flags),
    /// Noise sweep on a planted instance.
    Simulate(Flags),
    /// Recovery conditions for a support or a named construction.
    Check(Flags),
    /// Solutions along an ascending delta grid.
    Path(Flags),
}

#[derive(Args, Debug, Clone)]
pub struct Flags {
    /// Graph, ballot or planted-spec file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Edgelist)]
    pub format: Format,
    /// Built-in instance used when no input is given.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Order of the observed interactions (2 = edges).
    #[arg(long, default_value_t = 2)]
    pub j: usize,
    /// Largest clique size.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eta: f64,
    /// Smallest reported clique weight.
    #[arg(long, default_value_t = 1e-5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = Mode::Dense)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Scope::Full)]
    pub scope: Scope,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for simulation trials.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Noise levels (simulate) or deltas (path): `a,b,c` or `start:stop:step`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Cliques for `check`: nodes separated by commas, cliques by semicolons.
    #[arg(long)]
    pub support: Option<String>,
    /// Named support family for `check`.
    #[arg(long, value_enum)]
    pub construction: Option<Construction>,
    /// Keep only this many nodes of largest weighted degree.
    #[arg(long)]
    pub top_nodes: Option<usize>,
    /// Node count for `check` when no graph is given.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Cliques listed per grid point in the path table.
    #[arg(long, default_value_t = 5)]
    pub top: usize,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Edgelist,
    Gml,
    Ballots,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Basketball,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Dense,
    Colgen,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    Full,
    Candidates,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    /// Every k-subset of k+j+1 nodes: a kernel vector exists.
    Rip,
    /// Pairwise overlaps of j-1 nodes.
    Tight,
    /// One pair overlapping in j nodes.
    Excess,
}

/// A rejected flag combination; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Everything that determines a run; echoed into every output file.
#[derive(Serialize, Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub input: Option<String>,
    pub format: Format,
    pub preset: Option<Preset>,
    pub j: usize,
    pub kmax: Option<usize>,
    pub delta: f64,
    pub eta: f64,
    pub threshold: f64,
    pub seed: u64,
    pub trials: usize,
    pub mode: Mode,
    pub scope: Scope,
    pub out: String,
    pub jobs: usize,
    pub grid: Option<Vec<f64>>,
    pub support: Option<String>,
    pub construction: Option<Construction>,
    pub top_nodes: Option<usize>,
    pub nodes: Option<usize>,
    pub top: usize,
}

impl RunConfig {
    pub fn validate(command: &'static str, f: &Flags) -> anyhow::Result<Self> {
        if f.j < 1 {
            return Err(usage("--j must be at least 1"));
        }
        if let Some(k) = f.kmax {
            if k < f.j {
                return Err(usage(format!("--kmax {k} is below --j {}", f.j)));
            }
        }
        for (name, v) in [("--delta", f.delta), ("--threshold", f.threshold)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(usage(format!("{name} must be finite and nonnegative")));
            }
        }
        if !(f.eta > 0.0) || !f.eta.is_finite() {
            return Err(usage("--eta must be positive"));
        }
        if f.trials == 0 {
            return Err(usage("--trials must be positive"));
        }
        if f.jobs == 0 {
            return Err(usage("--jobs must be positive"));
        }
        if f.input.is_some() && f.preset.is_some() {
            return Err(usage("--input and --preset are exclusive"));
        }
        if f.mode == Mode::Colgen && f.scope == Scope::Candidates {
            return Err(usage("--scope candidates applies to --mode dense only"));
        }
        let grid = f.grid.as_deref().map(parse_grid).transpose()?;
        if let Some(g) = &grid {
            if g.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(usage("--grid must be strictly ascending"));
            }
            if g.iter().any(|v| !(*v >= 0.0)) {
                return Err(usage("--grid values must be nonnegative"));
            }
        }
        Ok(Self {
            command,
            input: f.input.as_ref().map(|p| p.display().to_string()),
            format: f.format,
            preset: f.preset,
            j: f.j,
            kmax: f.kmax,
            delta: f.delta,
            eta: f.eta,
            threshold: f.threshold,
            seed: f.seed,
            trials: f.trials,
            mode: f.mode,
            scope: f.scope,
            out: f.out.display().to_string(),
            jobs: f.jobs,
            grid,
            support: f.support.clone(),
            construction: f.construction,
            top_nodes: f.top_nodes,
            nodes: f.nodes,
            top: f.top,
        })
    }
}

/// `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("bad grid value {s:?}")));
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, c] => {
            let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
            if !(step > 0.0) || !(stop >= start) {
                return Err(usage(format!("grid {text:?} needs step > 0 and stop >= start")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            // integer multiples keep the points free of accumulated drift
            (0..=count).map(|i| start + i as f64 * step).collect()
        }
        [_] => text.split(',').map(num).collect::<anyhow::Result<Vec<f64>>>()?,
        _ => return Err(usage(format!("cannot parse grid {text:?}"))),
    };
    if grid.is_empty() {
        return Err(usage("grid is empty"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:0.3:0.1").unwrap(), vec![0.0, 0.1, 0.2, 0.30000000000000004]);
        assert_eq!(parse_grid("1, 2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert_eq!(parse_grid("0:0.8:0.1").unwrap().len(), 9);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("a,b").is_err());
    }
}
