use std::io::Read;

use serde_json::Value;
use toda_core::coords::{w_from_divisor, DivisorQuasimomentum};
use toda_core::random;
use toda_core::spectral::weyl;
use toda_core::weyl::{from_quotient, to_quotient};
use toda_core::{JacobiMatrix, PolyQuotient, RationalHerglotz, SpectralData};

use crate::CliError;

/// Any of the document shapes the subcommands accept, told apart by keys.
#[derive(Debug, Clone)]
pub enum Input {
    Matrix(JacobiMatrix),
    Spectral(SpectralData),
    Weyl(RationalHerglotz),
    Quotient(PolyQuotient),
    Divisor(DivisorQuasimomentum),
}

impl Input {
    /// `--in` value: inline JSON if it starts with `{`, `-` for stdin, else a path.
    /// Without `--in` a random matrix is drawn from `seed` and `n`.
    pub fn load(source: Option<&str>, seed: u64, n: usize) -> Result<Self, CliError> {
        let text = match source {
            None => {
                if n == 0 {
                    return Err(CliError::Input("--N must be at least 1".into()));
                }
                log::info!("random matrix, seed {seed}, N = {n}");
                return Ok(Input::Matrix(random::jacobi(&mut random::rng(seed), n)));
            }
            Some(s) if s.trim_start().starts_with('{') => s.to_string(),
            Some("-") => {
                let mut buf = String::new();
                std::io::stdin().read_to_string(&mut buf)?;
                buf
            }
            Some(path) => std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?,
        };
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("malformed JSON: {e}")))?;
        let has = |k: &str| value.get(k).is_some();
        let input = if has("v") && has("c") {
            Input::Matrix(decode(value)?)
        } else if has("lambdas") && has("rhos") {
            Input::Spectral(decode(value)?)
        } else if has("poles") && has("residues") {
            Input::Weyl(decode(value)?)
        } else if has("p") && has("q") {
            Input::Quotient(decode(value)?)
        } else if has("gammas") && has("pis") && has("casimir") {
            Input::Divisor(decode(value)?)
        } else {
            return Err(CliError::Input(
                "expected one of {v,c}, {lambdas,rhos}, {poles,residues}, {p,q}, {gammas,pis,casimir}"
                    .into(),
            ));
        };
        Ok(input)
    }

    pub fn weyl(&self) -> Result<RationalHerglotz, CliError> {
        Ok(match self {
            Input::Matrix(l) => weyl(l)?,
            Input::Spectral(sd) => RationalHerglotz::from_spectral(sd),
            Input::Weyl(w) => w.clone(),
            Input::Quotient(pq) => from_quotient(pq)?,
            Input::Divisor(dq) => w_from_divisor(dq)?,
        })
    }

    pub fn quotient(&self) -> Result<PolyQuotient, CliError> {
        match self {
            Input::Quotient(pq) => Ok(pq.clone()),
            other => Ok(to_quotient(&other.weyl()?)),
        }
    }

    pub fn matrix(&self) -> Option<&JacobiMatrix> {
        match self {
            Input::Matrix(l) => Some(l),
            _ => None,
        }
    }
}

fn decode<T: serde::de::DeserializeOwned>(value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Input(e.to_string()))
}
