use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use heegner_lab::arith::{gcd_i64, is_prime};
use heegner_lab::quadratic::{splitting_type, weak_heegner_check, ImagQuadField, SplittingType};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Mass,
    Classes,
    Brandt,
    Cosets,
    Galois,
    Equidist,
    Surject,
    SelectEll,
    MultiEll,
    Classpoly,
    Ss,
    Goursat,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupName {
    A5,
    Psl27,
}

/// Experiments on Heegner points, supersingular reduction and Hecke orbits.
#[derive(Debug, Parser)]
#[command(name = "heegner-lab", version)]
pub struct Cli {
    pub command: Command,
    /// Prime ell; multi-ell takes a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub ell: Vec<u64>,
    /// Discriminant: fundamental for the field L, any negative discriminant for classpoly.
    #[arg(long = "D", allow_negative_numbers = true)]
    pub d: Option<i64>,
    #[arg(long)]
    pub level: Option<u64>,
    /// Explicit conductor or index list.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long = "n-max")]
    pub n_max: Option<u64>,
    /// Twist primes as signed integers (1 is the identity twist).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub twists: Vec<i64>,
    #[arg(long)]
    pub t1: Option<u64>,
    #[arg(long)]
    pub t2: Option<u64>,
    #[arg(long = "dimA")]
    pub dim_a: Option<u64>,
    #[arg(long)]
    pub r: Option<u64>,
    /// Group for goursat.
    #[arg(long, value_enum)]
    pub group: Option<GroupName>,
    /// Multiplication table file for goursat, overriding --group.
    #[arg(long = "group-file")]
    pub group_file: Option<PathBuf>,
    /// Report file; `-` writes the report to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long = "modpoly-dir")]
    pub modpoly_dir: Option<PathBuf>,
    /// Plain-text `key = value` defaults; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "inject-fault", hide = true)]
    pub inject_fault: bool,
}

/// Everything that determines the result of a run. Output location and worker
/// count are kept outside so that reports do not depend on them.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub ell: Vec<u64>,
    #[serde(rename = "D")]
    pub d: Option<i64>,
    pub level: u64,
    pub n: Vec<u64>,
    pub n_max: Option<u64>,
    pub twists: Vec<i64>,
    pub t1: u64,
    pub t2: u64,
    #[serde(rename = "dimA")]
    pub dim_a: u64,
    pub r: Option<u64>,
    pub group: GroupName,
    pub group_file: Option<PathBuf>,
    pub modpoly_dir: Option<PathBuf>,
    pub inject_fault: bool,
}

#[derive(Debug, Clone)]
pub struct Output {
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: Option<usize>,
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

macro_rules! usage {
    ($($arg:tt)*) => {
        return Err(UsageError(format!($($arg)*)))
    };
}

fn read_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            usage!("{}:{}: expected `key = value`", path.display(), k + 1);
        };
        let key = key.trim().trim_start_matches("--").to_string();
        const KNOWN: [&str; 16] = [
            "ell",
            "D",
            "level",
            "n",
            "n-max",
            "twists",
            "t1",
            "t2",
            "dimA",
            "r",
            "group",
            "group-file",
            "out",
            "format",
            "workers",
            "modpoly-dir",
        ];
        if !KNOWN.contains(&key.as_str()) {
            usage!("{}:{}: unknown key `{key}`", path.display(), k + 1);
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, UsageError>
where
    T::Err: fmt::Display,
{
    raw.parse().map_err(|e| UsageError(format!("config key `{key}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, raw: &str) -> Result<Vec<T>, UsageError>
where
    T::Err: fmt::Display,
{
    raw.split(',').map(|s| parse_value(key, s.trim())).collect()
}

fn parse_enum<T: ValueEnum>(key: &str, raw: &str) -> Result<T, UsageError> {
    T::from_str(raw, true).map_err(|e| UsageError(format!("config key `{key}`: {e}")))
}

/// Merges flags over config-file defaults and validates cross-parameter
/// constraints before anything runs.
pub fn resolve(cli: Cli) -> Result<(RunConfig, Output), UsageError> {
    let file = match &cli.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let get = |k: &str| file.get(k).map(String::as_str);
    macro_rules! pick {
        ($flag:expr, $key:literal, $parse:ident) => {
            match $flag {
                Some(v) => Some(v),
                None => get($key).map(|raw| $parse($key, raw)).transpose()?,
            }
        };
    }
    macro_rules! pick_list {
        ($flag:expr, $key:literal) => {
            if !$flag.is_empty() {
                $flag
            } else {
                get($key)
                    .map(|raw| parse_list($key, raw))
                    .transpose()?
                    .unwrap_or_default()
            }
        };
    }
    let cfg = RunConfig {
        command: cli.command,
        ell: pick_list!(cli.ell, "ell"),
        d: pick!(cli.d, "D", parse_value),
        level: pick!(cli.level, "level", parse_value).unwrap_or(1),
        n: pick_list!(cli.n, "n"),
        n_max: pick!(cli.n_max, "n-max", parse_value),
        twists: pick_list!(cli.twists, "twists"),
        t1: pick!(cli.t1, "t1", parse_value).unwrap_or(1),
        t2: pick!(cli.t2, "t2", parse_value).unwrap_or(1),
        dim_a: pick!(cli.dim_a, "dimA", parse_value).unwrap_or(1),
        r: pick!(cli.r, "r", parse_value),
        group: pick!(cli.group, "group", parse_enum).unwrap_or(GroupName::A5),
        group_file: pick!(cli.group_file, "group-file", parse_value),
        modpoly_dir: pick!(cli.modpoly_dir, "modpoly-dir", parse_value),
        inject_fault: cli.inject_fault,
    };
    let output = Output {
        out: pick!(cli.out, "out", parse_value),
        format: pick!(cli.format, "format", parse_enum).unwrap_or(Format::Json),
        workers: pick!(cli.workers, "workers", parse_value),
    };
    if output.workers == Some(0) {
        usage!("--workers must be positive");
    }
    validate(&cfg)?;
    Ok((cfg, output))
}

fn require_ell(cfg: &RunConfig) -> Result<u64, UsageError> {
    match cfg.ell.as_slice() {
        [ell] => Ok(*ell),
        [] => usage!("{} needs --ell", cfg.command),
        _ => usage!("{} takes a single --ell", cfg.command),
    }
}

fn require_field(cfg: &RunConfig) -> Result<ImagQuadField, UsageError> {
    match cfg.d {
        Some(d) => ImagQuadField::new(d).map_err(|e| UsageError(format!("--D {d}: {e}"))),
        None => usage!("{} needs --D", cfg.command),
    }
}

fn check_inert(ell: u64, field: &ImagQuadField) -> Result<(), UsageError> {
    if splitting_type(field, ell) != SplittingType::Inert {
        usage!("ell = {ell} is not inert in {field}; the construction requires ell inert in L");
    }
    Ok(())
}

pub fn validate(cfg: &RunConfig) -> Result<(), UsageError> {
    use Command::*;
    for &ell in &cfg.ell {
        if !is_prime(ell) {
            usage!("--ell {ell} is not prime");
        }
        if ell == 2 && cfg.command != SelectEll {
            usage!("--ell 2 is not supported; use an odd prime");
        }
        if cfg.level.is_multiple_of(ell) {
            usage!("level N = {} must be coprime to ell = {ell}", cfg.level);
        }
    }
    if cfg.level == 0 {
        usage!("--level must be positive");
    }
    if cfg.t1 == 0 || cfg.t2 == 0 || cfg.dim_a == 0 {
        usage!("t1, t2 and dimA must be positive");
    }
    if cfg.n.contains(&0) || cfg.n_max == Some(0) {
        usage!("conductors and indices must be positive");
    }
    if cfg.twists.contains(&0) {
        usage!("0 is not a twist");
    }
    let needs_field = matches!(cfg.command, Cosets | Galois | Surject | SelectEll | MultiEll);
    let field = match (cfg.command, cfg.d) {
        (Classpoly, Some(d)) => {
            if d >= 0 || d.rem_euclid(4) > 1 {
                usage!("--D {d} is not a negative discriminant");
            }
            None
        }
        (Classpoly, None) => usage!("classpoly needs --D"),
        (_, Some(_)) => Some(require_field(cfg)?),
        (_, None) if needs_field => Some(require_field(cfg)?),
        _ => None,
    };
    match cfg.command {
        Mass | Classes | Brandt | Equidist | Ss | Cosets | Galois | Surject => {
            require_ell(cfg)?;
        }
        MultiEll if cfg.ell.is_empty() => usage!("multi-ell needs --ell with a list of primes"),
        Classpoly if cfg.ell.len() > 1 => usage!("classpoly takes at most one --ell"),
        _ => {}
    }
    if let Some(field) = &field {
        if cfg.command != SelectEll {
            for &ell in &cfg.ell {
                check_inert(ell, field)?;
            }
        }
        if cfg.level > 1 {
            match weak_heegner_check(field, cfg.level) {
                Ok(true) => {}
                Ok(false) => usage!(
                    "level N = {} fails the Heegner hypothesis eps_L(N) = 1 for {field}",
                    cfg.level
                ),
                Err(e) => usage!("{e}"),
            }
        }
        if matches!(cfg.command, Cosets | Galois | Surject | MultiEll) {
            let bad = cfg.ell.iter().product::<u64>() as i64 * cfg.level as i64 * field.disc();
            for &n in &cfg.n {
                if gcd_i64(n as i64, bad) != 1 {
                    usage!("n = {n} must be coprime to ell * N * D_L = {}", bad.abs());
                }
                for &t in cfg.twists.iter().filter(|&&t| t != 1) {
                    let p = t.unsigned_abs();
                    if !is_prime(p) {
                        usage!("twist {t} is neither 1 nor plus/minus a prime");
                    }
                    if (n * cfg.level).is_multiple_of(p) || cfg.ell.contains(&p) {
                        usage!("twist prime {p} divides ell * N * n for n = {n}");
                    }
                }
            }
        }
    }
    if cfg.command == Goursat {
        if let Some(r) = cfg.r {
            if !(1..=3).contains(&r) {
                usage!("goursat supports r = 1, 2, 3");
            }
        }
    } else if cfg.r == Some(0) {
        usage!("--r must be positive");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> Result<RunConfig, UsageError> {
        let cli = Cli::try_parse_from(std::iter::once("heegner-lab").chain(args.split_whitespace()))
            .map_err(|e| UsageError(e.to_string()))?;
        resolve(cli).map(|(c, _)| c)
    }

    #[test]
    fn examples() {
        let c = parse("mass --ell 11").unwrap();
        assert_eq!((c.command, c.ell.clone(), c.level), (Command::Mass, vec![11], 1));
        let c = parse("equidist --ell 11 --D -3 --n-max 200").unwrap();
        assert_eq!((c.d, c.n_max), (Some(-3), Some(200)));
        let e = parse("equidist --ell 13 --D -3").unwrap_err();
        assert!(e.0.contains("inert"), "{e}");
    }

    #[test]
    fn constraint_violations() {
        assert!(parse("mass --ell 12").is_err());
        assert!(parse("galois --ell 11 --D -3 --n 3").is_err());
        assert!(parse("galois --ell 11 --D -12 --n 5").is_err());
        assert!(parse("classpoly --D -5").is_err());
        assert!(parse("classpoly --D -75").is_ok());
        assert!(parse("goursat --r 4").is_err());
        assert!(parse("mass --ell 11 --level 11").is_err());
        assert!(parse("multi-ell --ell 11,23 --D -3").is_ok());
        assert!(parse("mass --ell 11,23").is_err());
        assert!(parse("mass --ell 11 --bogus 1").is_err());
        assert!(parse("galois --ell 11 --D -3 --n 7 --twists 1,7").is_err());
        assert!(parse("galois --ell 11 --D -3 --n 5 --twists 1,-7").is_ok());
    }
}
