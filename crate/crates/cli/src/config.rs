use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use weil_core::catmap::LatticeAutomorphism;
use weil_core::gfq::is_prime;

use crate::{Cli, Command, Fail};

/// Optional JSON file given with `--config`. Flags win over its fields.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "A")]
    a: Option<Vec<Vec<i64>>>,
    primes: Option<PrimeWindow>,
    xi_window: Option<XiWindow>,
    seed: Option<u64>,
    p: Option<String>,
    m: Option<usize>,
    #[serde(rename = "N")]
    n: Option<usize>,
    torus: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrimeWindow {
    max: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct XiWindow {
    max_coeff: u64,
}

/// Fully resolved run parameters, echoed into every report header.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub p: Vec<u64>,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub torus: String,
    #[serde(rename = "A")]
    pub a: Option<Vec<Vec<i64>>>,
    pub max_prime: u64,
    pub xi_max: Option<u64>,
    pub seed: u64,
    pub samples: usize,
    pub quick: bool,
    #[serde(skip)]
    pub jobs: Option<usize>,
    #[serde(skip)]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn automorphism(&self) -> Result<LatticeAutomorphism, Fail> {
        let a = self
            .a
            .clone()
            .ok_or_else(|| Fail::Config(format!("{} needs an integer matrix: pass --A <file.json>", self.subcommand)))?;
        LatticeAutomorphism::new(a).map_err(|e| Fail::Config(format!("A: {e}")))
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail::Config(format!("{what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Fail::Config(format!("{what} {}: {e}", path.display())))
}

/// Parse `5`, `5,7,11` or `5..23` (odd primes in the closed range).
pub fn parse_primes(s: &str) -> Result<Vec<u64>, Fail> {
    let bad = || Fail::Config(format!("--p: cannot parse {s:?}"));
    let out: Vec<u64> = if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        (lo..=hi).filter(|&p| p > 2 && is_prime(p)).collect()
    } else {
        s.split(',').map(|t| t.trim().parse::<u64>().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(Fail::Config(format!("--p: {s:?} contains no odd prime")));
    }
    if let Some(&p) = out.iter().find(|&&p| p == 2 || !is_prime(p)) {
        return Err(Fail::Config(format!("--p: {p} is not an odd prime")));
    }
    Ok(out)
}

pub fn resolve(cli: &Cli) -> Result<RunConfig, Fail> {
    let file: FileConfig = match &cli.config {
        Some(path) => read_json(path, "config")?,
        None => FileConfig::default(),
    };
    let (subcommand, quick) = match &cli.command {
        Command::Selftest { quick } => ("selftest", *quick),
        c => (c.name(), false),
    };
    let default_p = match cli.command {
        Command::SelfReducibility => "3,5,7",
        _ => "5,7,11,13",
    };
    let default_torus = match cli.command {
        Command::SelfReducibility => "irreducible",
        _ => "all",
    };
    let default_max_prime = match cli.command {
        Command::RankDensity => 100_000,
        _ => 97,
    };
    let p_spec = cli.p.clone().or(file.p).unwrap_or_else(|| default_p.to_string());
    let a = match &cli.a {
        Some(path) => Some(read_json::<Vec<Vec<i64>>>(path, "matrix")?),
        None => file.a,
    };
    let m = cli.m.or(file.m).unwrap_or(1);
    let default_n = if cli.command == Command::SelfReducibility { 2 } else { 1 };
    let n = cli.n.or(file.n).unwrap_or(default_n);
    if m == 0 || n == 0 {
        return Err(Fail::Config("--m and --N must be positive".into()));
    }
    let max_prime = cli.max_prime.or(file.primes.map(|w| w.max)).unwrap_or(default_max_prime);
    if max_prime < 3 {
        return Err(Fail::Config("--max-prime must be at least 3".into()));
    }
    if cli.jobs == Some(0) {
        return Err(Fail::Config("--jobs must be positive".into()));
    }
    Ok(RunConfig {
        subcommand: subcommand.to_string(),
        p: parse_primes(&p_spec)?,
        m,
        n,
        torus: cli.torus.clone().or(file.torus).unwrap_or_else(|| default_torus.to_string()),
        a,
        max_prime,
        xi_max: cli.xi_max.or(file.xi_window.map(|w| w.max_coeff)),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        samples: cli.samples.unwrap_or(match cli.command {
            Command::VerifyBounds => weil_core::sums::DEFAULT_SAMPLES,
            Command::SelfReducibility => 8,
            Command::Selftest { quick: true } => 25,
            _ => 100,
        }),
        quick,
        jobs: cli.jobs,
        out: cli.out.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_lists() {
        assert_eq!(parse_primes("5..23").unwrap(), vec![5, 7, 11, 13, 17, 19, 23]);
        assert_eq!(parse_primes("3, 7").unwrap(), vec![3, 7]);
        assert!(parse_primes("9").is_err());
        assert!(parse_primes("2").is_err());
        assert!(parse_primes("24..28").is_err());
        assert!(parse_primes("x").is_err());
    }
}
