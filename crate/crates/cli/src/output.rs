//! JSON and CSV emission. Floats carry 17 significant digits.

use std::io::{self, Write};

use num_complex::Complex64;
use qteig::qt::EigRecord;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Pretty printing with every float in `{:.16e}` form.
struct Sci<'a>(PrettyFormatter<'a>);

impl Formatter for Sci<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sci(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// `{:.16e}` for CSV cells.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
pub struct EigenvalueEntry {
    pub re: f64,
    pub im: f64,
    /// `null` when the run was not accepted.
    pub residual: Option<f64>,
    pub iterations: usize,
    pub status: &'static str,
}

impl From<&EigRecord> for EigenvalueEntry {
    fn from(r: &EigRecord) -> Self {
        Self {
            re: r.lambda.re,
            im: r.lambda.im,
            residual: r.residual.is_finite().then_some(r.residual),
            iterations: r.iterations,
            status: r.status.as_str(),
        }
    }
}

#[derive(Serialize)]
pub struct EigAllOutput {
    pub section_size: usize,
    pub eigenvalues: Vec<EigenvalueEntry>,
    pub continuous_components_detected: bool,
}

#[derive(Serialize)]
pub struct EigSingleOutput {
    #[serde(flatten)]
    pub eigenvalue: EigenvalueEntry,
    /// Leading eigenvector components as `[re, im]`, rotated so the largest is real and positive.
    pub eigenvector: Vec<[f64; 2]>,
    /// Modulus of the last reported component.
    pub tail: f64,
}

impl From<&EigRecord> for EigSingleOutput {
    fn from(r: &EigRecord) -> Self {
        Self {
            eigenvalue: r.into(),
            eigenvector: r.vec_prefix.iter().map(|z| [z.re, z.im]).collect(),
            tail: r.tail,
        }
    }
}

#[derive(Serialize)]
pub struct BasinLabel {
    pub label: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Serialize)]
pub struct BasinSidecar {
    pub labels: Vec<BasinLabel>,
    pub nonconverged: i64,
    pub continuous_set: i64,
}

pub fn labels(eigenvalues: &[Complex64]) -> Vec<BasinLabel> {
    eigenvalues
        .iter()
        .enumerate()
        .map(|(k, z)| BasinLabel {
            label: k as i64 + 1,
            re: z.re,
            im: z.im,
        })
        .collect()
}
