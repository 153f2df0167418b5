//! File formats and report serialisation.
//!
//! Kernel files: `{"dim": d, "order": n, "entries": [{"idx": [i₁ ≤ … ≤ iₙ], "val": x}, …]}`.
//! Target files: `{"name": "gamma", "params": {"a": 2, "lambda": 1}}` or
//! `{"name": "custom", "density": [[x, p], …], "support": [l | null, u | null]}`.
//! Every float is written with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::gaussian::SymmetricKernel;
use crate::stein::{grid_target, NamedTarget, TargetMeasure};

pub const SCHEMA_VERSION: &str = "1";

/// `x` with 17 significant digits (round-trips every `f64`).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

/// Pretty JSON with 17-significant-digit floats; non-finite floats become `null`.
struct ReportFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for ReportFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        w.write_all(format!("{value:.8e}").as_bytes())
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialise `value` as a pretty report.
pub fn to_report_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ReportFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types serialise");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// `{"schema_version": "1", "command": …, "result": …}`.
pub fn report<T: Serialize + ?Sized>(command: &str, result: &T) -> String {
    #[derive(Serialize)]
    struct Envelope<'a, T: ?Sized> {
        schema_version: &'static str,
        command: &'a str,
        result: &'a T,
    }
    to_report_string(&Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        result,
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Malformed(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Malformed(format!("cannot write {}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelFile {
    dim: usize,
    order: usize,
    entries: Vec<KernelEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelEntry {
    idx: Vec<usize>,
    val: f64,
}

pub fn kernel_from_json(text: &str) -> Result<SymmetricKernel<f64>> {
    let file: KernelFile = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("kernel file: {e}")))?;
    SymmetricKernel::from_entries(file.dim, file.order, file.entries.into_iter().map(|e| (e.idx, e.val)))
}

/// Canonical text: entries in multi-index order, one per line.
pub fn kernel_to_json(k: &SymmetricKernel<f64>) -> String {
    let mut s = format!("{{\n  \"dim\": {},\n  \"order\": {},\n  \"entries\": [", k.dim(), k.order());
    let mut first = true;
    for (idx, val) in k.entries() {
        let idx = idx.iter().map(usize::to_string).collect::<Vec<_>>().join(", ");
        let sep = if first { "" } else { "," };
        let _ = write!(s, "{sep}\n    {{\"idx\": [{idx}], \"val\": {}}}", fmt_f64(*val));
        first = false;
    }
    s.push_str(if first { "]\n}\n" } else { "\n  ]\n}\n" });
    s
}

pub fn load_kernel(path: impl AsRef<Path>) -> Result<SymmetricKernel<f64>> {
    kernel_from_json(&read(path.as_ref())?)
}

pub fn save_kernel(path: impl AsRef<Path>, k: &SymmetricKernel<f64>) -> Result<()> {
    write(path.as_ref(), &kernel_to_json(k))
}

/// A parsed target file.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Named(NamedTarget),
    Custom {
        density: Vec<(f64, f64)>,
        lower: Option<f64>,
        upper: Option<f64>,
    },
}

impl TargetSpec {
    pub fn to_target(&self) -> Result<TargetMeasure> {
        match self {
            Self::Named(t) => t.target(),
            Self::Custom { density, lower, upper } => grid_target(density, *lower, *upper),
        }
    }

    pub fn named(&self) -> Option<&NamedTarget> {
        match self {
            Self::Named(t) => Some(t),
            Self::Custom { .. } => None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    name: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    density: Option<Vec<(f64, f64)>>,
    support: Option<(Option<f64>, Option<f64>)>,
}

pub fn target_spec_from_json(text: &str) -> Result<TargetSpec> {
    let file: TargetFile = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("target file: {e}")))?;
    if file.name == "custom" {
        let density = file
            .density
            .ok_or_else(|| Error::param("density", "required for a custom target"))?;
        if !file.params.is_empty() {
            return Err(Error::param("params", "not used by a custom target"));
        }
        let (lower, upper) = file.support.unwrap_or((None, None));
        return Ok(TargetSpec::Custom { density, lower, upper });
    }
    if file.density.is_some() || file.support.is_some() {
        return Err(Error::param("density", format!("only custom targets take a density grid, not `{}`", file.name)));
    }
    let t = NamedTarget::from_params(&file.name, |p| file.params.get(p).copied())?;
    let known: Vec<&str> = t.params().iter().map(|(k, _)| *k).collect();
    if let Some(extra) = file.params.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::param(extra, format!("not a parameter of target `{}`", file.name)));
    }
    t.validate()?;
    Ok(TargetSpec::Named(t))
}

pub fn load_target_spec(path: impl AsRef<Path>) -> Result<TargetSpec> {
    target_spec_from_json(&read(path.as_ref())?)
}

pub fn load_target(path: impl AsRef<Path>) -> Result<TargetMeasure> {
    load_target_spec(path)?.to_target()
}

/// Sample dump: `#`-prefixed header lines holding `header` as pretty JSON,
/// then one value per line.
pub fn sample_dump<T: Serialize + ?Sized>(header: &T, samples: &[f64]) -> String {
    let mut s = String::new();
    for line in to_report_string(header).lines() {
        let _ = writeln!(s, "# {line}");
    }
    for &x in samples {
        s.push_str(&fmt_f64(x));
        s.push('\n');
    }
    s
}

/// Values of a sample dump, skipping `#` lines.
pub fn parse_sample_dump(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.trim().parse::<f64>().map_err(|e| Error::Malformed(format!("sample `{l}`: {e}"))))
        .collect()
}
