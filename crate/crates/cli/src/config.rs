use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bgc_core::adversary::SymmetrizationConfig;
use bgc_core::{
    AdversaryModel, DrawPolicy, MessageStrategy, ParamsError, SchemeParams, DEFAULT_ALPHABET,
};
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table_file::{TableFile, TableFileError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

fn invalid(key: &'static str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum FigureKind {
    #[serde(rename = "fig1")]
    #[value(name = "fig1")]
    Fig1,
    #[serde(rename = "appendixF-ratio")]
    #[value(name = "appendixF-ratio")]
    Ratio,
    #[serde(rename = "appendixF-convergence")]
    #[value(name = "appendixF-convergence")]
    Convergence,
}

/// `--adversary` values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdversarySpec {
    None,
    Symmetrization,
    SymmetrizationCollusive,
    SymmetrizationCoin,
    FlipFlop,
    Random,
    Malformed,
    Table(PathBuf),
}

impl AdversarySpec {
    /// The adversaries every experiment suite covers.
    pub const SUITE: [AdversarySpec; 4] = [
        Self::None,
        Self::Symmetrization,
        Self::SymmetrizationCollusive,
        Self::FlipFlop,
    ];

    pub fn model(&self, params: &SchemeParams) -> Result<AdversaryModel, TableFileError> {
        Ok(match self {
            Self::None => AdversaryModel::None,
            Self::Symmetrization => {
                AdversaryModel::Symmetrization(SymmetrizationConfig::per_index())
            }
            Self::SymmetrizationCollusive => {
                AdversaryModel::Symmetrization(SymmetrizationConfig::collusive())
            }
            Self::SymmetrizationCoin => {
                AdversaryModel::Symmetrization(SymmetrizationConfig::coin_flip())
            }
            Self::FlipFlop => AdversaryModel::MessageLevel(MessageStrategy::FlipFlop),
            Self::Random => AdversaryModel::MessageLevel(MessageStrategy::Uniform),
            Self::Malformed => AdversaryModel::MessageLevel(MessageStrategy::Malformed),
            Self::Table(path) => AdversaryModel::Table(TableFile::load(path)?.into_attack(params)?),
        })
    }
}

impl FromStr for AdversarySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "none" => Self::None,
            "symmetrization" => Self::Symmetrization,
            "symmetrization-collusive" => Self::SymmetrizationCollusive,
            "symmetrization-coin" => Self::SymmetrizationCoin,
            "flipflop" => Self::FlipFlop,
            "random" => Self::Random,
            "malformed" => Self::Malformed,
            other => match other.strip_prefix("table:") {
                Some(path) if !path.is_empty() => Self::Table(PathBuf::from(path)),
                _ => return Err(format!("unknown adversary `{other}`")),
            },
        })
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => f.write_str("none"),
            Self::Symmetrization => f.write_str("symmetrization"),
            Self::SymmetrizationCollusive => f.write_str("symmetrization-collusive"),
            Self::SymmetrizationCoin => f.write_str("symmetrization-coin"),
            Self::FlipFlop => f.write_str("flipflop"),
            Self::Random => f.write_str("random"),
            Self::Malformed => f.write_str("malformed"),
            Self::Table(path) => write!(f, "table:{}", path.display()),
        }
    }
}

impl Serialize for AdversarySpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AdversarySpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    S,
    U,
    M,
    P,
    D,
    Q,
}

/// One swept parameter, e.g. `u=1..11` (inclusive) or `p=8,16,32`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep {
    pub axis: Axis,
    pub values: Vec<u64>,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (axis, values) = s
            .split_once('=')
            .ok_or_else(|| format!("expected axis=values, got `{s}`"))?;
        let axis = match axis.trim() {
            "s" => Axis::S,
            "u" => Axis::U,
            "m" => Axis::M,
            "p" => Axis::P,
            "d" => Axis::D,
            "q" => Axis::Q,
            other => return Err(format!("cannot sweep `{other}`")),
        };
        let number = |v: &str| v.trim().parse::<u64>().map_err(|e| format!("`{v}`: {e}"));
        let values = match values.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (number(lo)?, number(hi)?);
                if lo > hi {
                    return Err(format!("empty range {lo}..{hi}"));
                }
                (lo..=hi).collect()
            }
            None => values
                .split(',')
                .map(number)
                .collect::<Result<Vec<_>, _>>()?,
        };
        Ok(Self { axis, values })
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = serde_json::to_value(self.axis).expect("axis serializes");
        let values: Vec<String> = self.values.iter().map(u64::to_string).collect();
        write!(f, "{}={}", axis.as_str().expect("string"), values.join(","))
    }
}

impl Serialize for Sweep {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Sweep {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Command-line flags. Every flag can also come from `--config`.
#[derive(Debug, Default, Parser)]
#[command(
    name = "bgc",
    version,
    about = "Byzantine-resilient gradient coding simulator"
)]
pub struct Cli {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub u: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub adversary: Option<AdversarySpec>,
    #[arg(long)]
    pub sweep: Option<Sweep>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write one JSON-lines transcript per trial into this directory.
    #[arg(long)]
    pub dump_transcripts: Option<PathBuf>,
    /// Emit analytic figure data instead of running trials.
    #[arg(long, value_enum)]
    pub figure: Option<FigureKind>,
    /// Seeded instead of lowest-index pairing in the tournament.
    #[arg(long)]
    pub seeded_draw: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// The JSON config file: same keys as the flags, all optional.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub s: Option<usize>,
    pub u: Option<usize>,
    pub m: Option<usize>,
    pub p: Option<usize>,
    pub d: Option<usize>,
    pub q: Option<u64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub adversary: Option<AdversarySpec>,
    pub sweep: Option<Sweep>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub dump_transcripts: Option<PathBuf>,
    pub figure: Option<FigureKind>,
    pub seeded_draw: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// The base point; a sweep replaces one of its fields.
    pub params: SchemeParams,
    pub adversary: AdversarySpec,
    pub trials: usize,
    pub seed: u64,
    pub sweep: Option<Sweep>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub dump_transcripts: Option<PathBuf>,
    pub figure: Option<FigureKind>,
    pub draw: DrawPolicy,
}

pub const DEFAULT_TRIALS: usize = 100;

fn params_error_key(e: &ParamsError) -> &'static str {
    match e {
        ParamsError::WorkerCount { .. } => "n",
        ParamsError::HonestSurplus(_) => "u",
        ParamsError::GroupCount(_) => "m",
        ParamsError::GroupDivisibility { .. } | ParamsError::BlockLength(_) => "p",
        ParamsError::Dimension(_) => "d",
        ParamsError::Alphabet(_) => "q",
    }
}

impl ExperimentConfig {
    /// Every sweep point; `n` is recomputed as `m (s + u)` at each.
    pub fn points(&self) -> Result<Vec<SchemeParams>, ConfigError> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![self.params]);
        };
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut p = self.params;
                let v_usize = usize::try_from(v)
                    .map_err(|_| invalid("sweep", format!("{v} is too large")))?;
                match sweep.axis {
                    Axis::S => p.s = v_usize,
                    Axis::U => p.u = v_usize,
                    Axis::M => p.m = v_usize,
                    Axis::P => p.p = v_usize,
                    Axis::D => p.d = v_usize,
                    Axis::Q => p.q = v,
                }
                SchemeParams::new(p.s, p.u, p.m, p.p, p.d, p.q)
                    .map_err(|e| invalid("sweep", format!("{sweep}: at {v}: {e}")))
            })
            .collect()
    }
}

/// Parses `argv` (including the program name), merging `--config` underneath the flags.
pub fn parse_config<I, T>(argv: I) -> Result<ExperimentConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    merge(cli, file)
}

fn merge(cli: Cli, file: FileConfig) -> Result<ExperimentConfig, ConfigError> {
    let s = cli.s.or(file.s).ok_or(ConfigError::Missing("s"))?;
    let u = cli.u.or(file.u).ok_or(ConfigError::Missing("u"))?;
    let p = cli.p.or(file.p).ok_or(ConfigError::Missing("p"))?;
    let d = cli.d.or(file.d).ok_or(ConfigError::Missing("d"))?;
    let m = cli.m.or(file.m).unwrap_or(1);
    let q = cli.q.or(file.q).unwrap_or(DEFAULT_ALPHABET);
    let sweep = cli.sweep.or(file.sweep);
    let n = cli.n.or(file.n);

    let params = SchemeParams {
        n: n.unwrap_or(m * (s + u)),
        s,
        u,
        m,
        p,
        d,
        q,
    };
    if sweep.is_none() || n.is_some() {
        params
            .validate()
            .map_err(|e| invalid(params_error_key(&e), e))?;
    }
    let trials = cli.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let config = ExperimentConfig {
        params,
        adversary: cli
            .adversary
            .or(file.adversary)
            .unwrap_or(AdversarySpec::None),
        trials,
        seed: cli.seed.or(file.seed).unwrap_or(0),
        sweep,
        out: cli.out.or(file.out),
        format: cli.format.or(file.format).unwrap_or_default(),
        dump_transcripts: cli.dump_transcripts.or(file.dump_transcripts),
        figure: cli.figure.or(file.figure),
        draw: if cli.seeded_draw || file.seeded_draw.unwrap_or(false) {
            DrawPolicy::Seeded
        } else {
            DrawPolicy::LowestIndex
        },
    };
    config.points()?;
    Ok(config)
}
