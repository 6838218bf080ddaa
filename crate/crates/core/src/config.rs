//! Job configuration: JSON config file merged with command-line flags.
//!
//! Precedence is flags, then the config file, then defaults (empty a-sequence, i.e.
//! the Lubin-Tate law, and degree 2 p^n).

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exactnum::{is_p_unit, parse_rational, Prime, Rational};

/// Largest degree bound accepted from any input.
pub const MAX_DEGREE: u32 = 64;

/// Contents of a config file; every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub p: Option<u64>,
    pub n: Option<u32>,
    pub a_seq: Option<Vec<String>>,
    pub degree: Option<u32>,
}

/// Parses a config file without resolving defaults.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let cfg: ConfigFile = serde_json::from_str(text)?;
    if let Some(a) = &cfg.a_seq {
        for s in a {
            parse_rational(s)?;
        }
    }
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobConfig {
    pub p: Prime,
    pub n: u32,
    pub a_seq: Vec<Rational>,
    pub degree: u32,
}

impl JobConfig {
    /// Resolves flags over `file` over defaults and validates the result.
    pub fn resolve(flags: &ConfigFile, file: Option<&ConfigFile>) -> Result<Self> {
        let empty = ConfigFile::default();
        let file = file.unwrap_or(&empty);
        let p = flags
            .p
            .or(file.p)
            .ok_or_else(|| Error::InvalidInput("the prime p is required".into()))?;
        let p = Prime::new(p)?;
        let n = flags
            .n
            .or(file.n)
            .ok_or_else(|| Error::InvalidInput("the height n is required".into()))?;
        if n == 0 || n > MAX_DEGREE {
            return Err(Error::InvalidInput(format!("height n = {n} out of range 1..={MAX_DEGREE}")));
        }
        let a_seq = flags
            .a_seq
            .as_ref()
            .or(file.a_seq.as_ref())
            .map(|v| v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .transpose()?
            .unwrap_or_default();
        for a in &a_seq {
            if !is_p_unit(a, p) {
                return Err(Error::NotAUnit {
                    value: crate::exactnum::format_rational(a),
                    p: p.get(),
                });
            }
        }
        let degree = match flags.degree.or(file.degree) {
            Some(d) => d,
            None => p
                .get()
                .checked_pow(n)
                .and_then(|q| q.checked_mul(2))
                .filter(|&d| d <= MAX_DEGREE as u64)
                .ok_or_else(|| Error::InvalidInput("default degree 2 p^n is too large".into()))?
                as u32,
        };
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::InvalidInput(format!(
                "degree {degree} out of range 1..={MAX_DEGREE}"
            )));
        }
        Ok(JobConfig { p, n, a_seq, degree })
    }
}
