//! Problem files: the symbol as `am = [a0, a-1, …]`, `ap = [a0, a1, …]`, and an
//! optional correction `E`, either dense or as 1-based triplets.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use qteig::qt::{Correction, QTMatrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// A complex entry, written `[re, im]` or as a plain real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Real(f64),
    Pair([f64; 2]),
}

impl Num {
    pub fn to_complex(self) -> Complex64 {
        match self {
            Num::Real(x) => Complex64::new(x, 0.0),
            Num::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    /// Row major.
    pub values: Vec<Num>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triplet {
    pub i: usize,
    pub j: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorrectionSpec {
    Dense(Dense),
    Triplets(Vec<Triplet>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProblemFile {
    pub am: Vec<Num>,
    pub ap: Vec<Num>,
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub e: Option<CorrectionSpec>,
}

/// A problem file that failed to load, with the offending field when known.
#[derive(Debug)]
pub struct ParseError {
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "field `{field}`: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

fn err(field: Option<&str>, message: impl Into<String>) -> ParseError {
    ParseError {
        field: field.map(str::to_owned),
        message: message.into(),
    }
}

fn take<T: DeserializeOwned>(obj: &mut Map<String, Value>, key: &str) -> Result<Option<T>, ParseError> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v).map(Some).map_err(|e| err(Some(key), e.to_string())),
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let value: Value = serde_json::from_str(text).map_err(|e| err(None, format!("not valid JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(err(None, "top level must be an object"));
        };
        let am: Vec<Num> = take(&mut obj, "am")?.ok_or_else(|| err(Some("am"), "missing"))?;
        let ap: Vec<Num> = take(&mut obj, "ap")?.ok_or_else(|| err(Some("ap"), "missing"))?;
        let e: Option<CorrectionSpec> = take(&mut obj, "E")?;
        if let Some(extra) = obj.keys().next() {
            return Err(err(Some(extra), "unknown field"));
        }
        let p = ProblemFile { am, ap, e };
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(None, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), ParseError> {
        for (name, list) in [("am", &self.am), ("ap", &self.ap)] {
            if list.len() < 2 {
                return Err(err(Some(name), "needs at least two coefficients"));
            }
            if list.iter().map(|x| x.to_complex()).any(|z| !z.is_finite()) {
                return Err(err(Some(name), "coefficients must be finite"));
            }
        }
        if self.am[0].to_complex() != self.ap[0].to_complex() {
            return Err(err(Some("am[0]/ap[0]"), "constant terms differ"));
        }
        match &self.e {
            Some(CorrectionSpec::Dense(d)) if d.values.len() != d.rows * d.cols => Err(err(
                Some("E.values"),
                format!("expected rows·cols = {} entries, found {}", d.rows * d.cols, d.values.len()),
            )),
            Some(CorrectionSpec::Triplets(t)) if t.iter().any(|t| t.i == 0 || t.j == 0) => {
                Err(err(Some("E"), "triplet indices are 1-based"))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<QTMatrix, ParseError> {
        let cplx = |v: &[Num]| v.iter().map(|x| x.to_complex()).collect::<Vec<_>>();
        let correction = match &self.e {
            None => Ok(Correction::zero()),
            Some(CorrectionSpec::Dense(d)) => Correction::from_dense(d.rows, d.cols, &cplx(&d.values)),
            Some(CorrectionSpec::Triplets(t)) => {
                Correction::from_triplets(t.iter().map(|t| (t.i, t.j, Complex64::new(t.re, t.im))))
            }
        }
        .map_err(|e| err(Some("E"), e.to_string()))?;
        qteig::qt::qt_new(cplx(&self.am), cplx(&self.ap), correction).map_err(|e| {
            let field = match e {
                qteig::QtError::InconsistentConstant => "am[0]/ap[0]",
                _ => "am/ap",
            };
            err(Some(field), e.to_string())
        })
    }
}
