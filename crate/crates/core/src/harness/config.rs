//! Instance configuration: JSON ingestion with arbitrary-size integers
//! accepted as decimal strings, and coefficients written as integer
//! polynomials in the canonical field generator `g`.

use crate::padic::{FqCtx, FqElem};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("cannot parse integer {0:?}")]
    BadInteger(String),
    #[error("coordinate {0} does not fit the supported range")]
    CoordinateRange(String),
    #[error("cannot parse coefficient polynomial {0:?}")]
    BadCoefficient(String),
    #[error("{0} must be positive")]
    NotPositive(&'static str),
}

/// An integer that deserializes from a JSON number or a decimal string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct FlexInt(pub i64);

impl<'de> Deserialize<'de> for FlexInt {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(i64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(FlexInt(v)),
            Raw::Str(s) => {
                let big: BigInt = s
                    .trim()
                    .parse()
                    .map_err(|_| D::Error::custom(format!("bad integer {s:?}")))?;
                big.to_i64()
                    .map(FlexInt)
                    .ok_or_else(|| D::Error::custom(format!("integer {s} out of range")))
            }
        }
    }
}

/// One support term: lattice point and its coefficient polynomial in `g`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub u: Vec<FlexInt>,
    pub a: String,
}

/// A full instance: polytope, field, Laurent coefficients, precisions, and
/// run flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub n: usize,
    pub vertices: Vec<Vec<FlexInt>>,
    pub p: FlexInt,
    #[serde(default = "default_one")]
    pub b: usize,
    #[serde(default)]
    pub coefficients: Vec<CoefficientEntry>,
    pub m_target: u32,
    /// T-precision `N`.
    pub t_precision: usize,
    /// s-precision `K`.
    pub s_precision: usize,
    #[serde(default = "default_true")]
    pub run_direct: bool,
    #[serde(default = "default_true")]
    pub run_dwork: bool,
    #[serde(default)]
    pub specialize_m: Vec<u32>,
    #[serde(default)]
    pub polygon_only: bool,
}

fn default_one() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl InstanceConfig {
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn vertices_i64(&self) -> Vec<Vec<i64>> {
        self.vertices
            .iter()
            .map(|v| v.iter().map(|c| c.0).collect())
            .collect()
    }

    pub fn prime(&self) -> Result<u64, ConfigError> {
        if self.p.0 <= 1 {
            return Err(ConfigError::NotPositive("p"));
        }
        Ok(self.p.0 as u64)
    }

    /// Parses the coefficient table into field elements.
    pub fn coefficient_terms(&self, field: &FqCtx) -> Result<Vec<(Vec<i64>, FqElem)>, ConfigError> {
        self.coefficients
            .iter()
            .map(|entry| {
                let u: Vec<i64> = entry.u.iter().map(|c| c.0).collect();
                let a = parse_coefficient(&entry.a, field)?;
                Ok((u, a))
            })
            .collect()
    }
}

/// Parses an integer-coefficient polynomial in `g`, e.g. `"2*g^3 + g + 11"`.
pub fn parse_coefficient(text: &str, field: &FqCtx) -> Result<FqElem, ConfigError> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(ConfigError::BadCoefficient(text.to_string()));
    }
    let mut acc = field.zero();
    let mut rest = cleaned.as_str();
    let mut sign = 1i64;
    loop {
        if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        } else if let Some(r) = rest.strip_prefix('-') {
            sign = -sign;
            rest = r;
        }
        let term_end = rest
            .char_indices()
            .find(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        let (term, tail) = rest.split_at(term_end);
        let (coeff, power) = parse_term(term, text)?;
        let scalar = reduce_signed(&(BigInt::from(sign) * coeff), field.p);
        let mut mono = field.from_scalar(scalar);
        if power > 0 {
            let g = field.gen_class();
            mono = field.mul(&mono, &field.pow(&g, power));
        }
        acc = field.add(&acc, &mono);
        if tail.is_empty() {
            return Ok(acc);
        }
        rest = tail;
        sign = 1;
    }
}

fn parse_term(term: &str, original: &str) -> Result<(BigInt, u64), ConfigError> {
    let bad = || ConfigError::BadCoefficient(original.to_string());
    if term.is_empty() {
        return Err(bad());
    }
    if let Some(g_pos) = term.find('g') {
        let (num_part, g_part) = term.split_at(g_pos);
        let num_part = num_part.strip_suffix('*').unwrap_or(num_part);
        let coeff: BigInt = if num_part.is_empty() {
            BigInt::from(1)
        } else {
            num_part.parse().map_err(|_| bad())?
        };
        let power = match g_part.strip_prefix('g') {
            Some("") => 1u64,
            Some(rest) => rest
                .strip_prefix('^')
                .ok_or_else(bad)?
                .parse()
                .map_err(|_| bad())?,
            None => return Err(bad()),
        };
        Ok((coeff, power))
    } else {
        Ok((term.parse().map_err(|_| bad())?, 0))
    }
}

fn reduce_signed(v: &BigInt, p: u64) -> u64 {
    let p_big = BigInt::from(p);
    let mut r = v % &p_big;
    if r.is_negative() {
        r += &p_big;
    }
    debug_assert!(!r.is_negative() && r < p_big);
    r.to_u64().unwrap_or_else(|| {
        debug_assert!(r.is_zero());
        0
    })
}
