//! Run configurations for the command-line front end.
//!
//! A [`RunConfig`] names one command and a kernel (or a list of kernels for
//! `table`), plus numeric knobs. [`run`] writes its artifacts into the output
//! directory and returns the list of files written.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::discretize::{asymptotics_fit, spectral_report, AsymptoticsFit, GalerkinOptions, Sign};
use crate::error::{Error, Result};
use crate::grid::{fmt17, Axis};
use crate::kernels::{eval_kernel, KernelSpec};
use crate::signdef::{classify, finite_rank_counts, indefiniteness_witness, Count, WitnessSearch};
use crate::transforms::{b_function, reconstruct_at};
use crate::verify::{sign_function_for, verify_matrix, IdentityOptions, TestBump, VerificationCase};

pub const BASIS_RANGE: (usize, usize) = (4, 4096);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Analyze,
    Spectrum,
    Identity,
    Reconstruct,
    Witness,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}; expected csv or json"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for the artifacts; created if missing.
    pub path: PathBuf,
    pub format: Format,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { path: PathBuf::from("out"), format: Format::Csv }
    }
}

/// Uniform grid `lo, …, hi` with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn axis(&self) -> Result<Axis> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Config(format!("grid needs finite lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if !(2..=1_000_000).contains(&self.points) {
            return Err(Error::Config(format!("grid needs 2..=1000000 points, got {}", self.points)));
        }
        Ok(Axis::span(self.lo, self.hi, self.points))
    }
}

fn default_basis() -> usize {
    128
}
fn default_tol() -> f64 {
    1e-8
}
fn default_sign_grid() -> GridSpec {
    GridSpec { lo: -10.0, hi: 10.0, points: 2001 }
}
fn default_t_grid() -> GridSpec {
    GridSpec { lo: 0.1, hi: 5.0, points: 50 }
}
fn default_xi_grid() -> GridSpec {
    GridSpec { lo: -30.0, hi: 30.0, points: 16385 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    /// Kernels for `table`.
    #[serde(default)]
    pub kernels: Vec<KernelSpec>,
    #[serde(default = "default_basis")]
    pub basis_size: usize,
    #[serde(default = "default_tol")]
    pub tol_rel: f64,
    #[serde(default)]
    pub galerkin: GalerkinOptions,
    /// Add power-law fits of both eigenvalue branches to `spectrum`.
    #[serde(default)]
    pub fit: bool,
    /// x-grid for the sign-function samples written by `analyze`.
    #[serde(default = "default_sign_grid")]
    pub sign_grid: GridSpec,
    /// t-grid for `reconstruct`.
    #[serde(default = "default_t_grid")]
    pub t_grid: GridSpec,
    /// ξ-grid for numeric b-functions (`witness`).
    #[serde(default = "default_xi_grid")]
    pub xi_grid: GridSpec,
    #[serde(default = "TestBump::default_set")]
    pub bumps: Vec<TestBump>,
    #[serde(default)]
    pub identity: IdentityOptions,
    #[serde(default)]
    pub witness: WitnessSearch,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Minimal config for `command` on `kernel`, everything else at defaults.
    pub fn new(command: Command, kernel: KernelSpec) -> Self {
        let mut c: Self = serde_json::from_value(serde_json::json!({ "command": command })).expect("defaults deserialise");
        c.kernel = Some(kernel);
        c
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = BASIS_RANGE;
        if !(lo..=hi).contains(&self.basis_size) {
            return Err(Error::Config(format!("basis_size = {} outside [{lo}, {hi}]", self.basis_size)));
        }
        if !(self.tol_rel > 0.0 && self.tol_rel < 0.1) {
            return Err(Error::Config(format!("tol_rel = {} outside (0, 0.1)", self.tol_rel)));
        }
        if let Some(s) = self.galerkin.scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("galerkin.scale = {s} must be positive")));
            }
        }
        let (a, b) = self.galerkin.window;
        if !(a < b) {
            return Err(Error::Config("galerkin.window needs lo < hi".into()));
        }
        self.sign_grid.axis()?;
        self.xi_grid.axis()?;
        self.t_grid.axis()?;
        if self.t_grid.lo <= 0.0 {
            return Err(Error::Config("t_grid must lie in t > 0".into()));
        }
        for bump in &self.bumps {
            bump.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.witness.r_seq.len() != self.witness.sigma_seq.len() || self.witness.r_seq.is_empty() {
            return Err(Error::Config("witness.r_seq and witness.sigma_seq must be non-empty and of equal length".into()));
        }
        match self.command {
            Command::Table => {
                if self.kernels.is_empty() {
                    return Err(Error::Config("table needs a non-empty `kernels` list".into()));
                }
                for k in &self.kernels {
                    k.validate()?;
                }
            }
            _ => match &self.kernel {
                None => return Err(Error::Config("missing `kernel`".into())),
                Some(k) => k.validate()?,
            },
        }
        Ok(())
    }

    fn kernel(&self) -> Result<&KernelSpec> {
        self.kernel.as_ref().ok_or_else(|| Error::Config("missing `kernel`".into()))
    }
}

/// Files written by a run, in the order written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub command: Command,
    pub files: Vec<PathBuf>,
}

struct Sink {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Sink {
    fn new(dir: &FsPath) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display())))?;
        self.files.push(p);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).expect("report serialises");
        s.push('\n');
        self.write(name, &s)
    }
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Executes the command, writing artifacts to `config.output.path`.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mut sink = Sink::new(&config.output.path)?;
    let fmt = config.output.format;
    match config.command {
        Command::Analyze => analyze(config, &mut sink)?,
        Command::Spectrum => spectrum(config, &mut sink, fmt)?,
        Command::Identity => identity(config, &mut sink, fmt)?,
        Command::Reconstruct => reconstruct(config, &mut sink, fmt)?,
        Command::Witness => witness(config, &mut sink, fmt)?,
        Command::Table => table(config, &mut sink, fmt)?,
    }
    Ok(RunOutcome { command: config.command, files: sink.files })
}

fn analyze(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let spec = config.kernel()?;
    sink.json("classification.json", &classify(spec))?;
    let s = sign_function_for(spec)?;
    let axis = config.sign_grid.axis()?;
    let mut rows = Vec::new();
    for x in axis.points() {
        if let Ok(v) = s.smooth_value(x) {
            if v.is_finite() {
                rows.push(vec![fmt17(x), fmt17(v)]);
            }
        }
    }
    sink.write("sign_function.csv", &csv_text(&["x", "s"], &rows)?)?;
    if !s.atoms.is_empty() {
        let rows: Vec<Vec<String>> =
            s.atoms.iter().map(|a| vec![fmt17(a.location), fmt17(a.weight), a.order.to_string()]).collect();
        sink.write("sign_atoms.csv", &csv_text(&["location", "weight", "order"], &rows)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    report: &'a crate::discretize::SpectralReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<Fits>,
}

#[derive(Serialize, Clone, Copy)]
struct Fits {
    plus: Option<AsymptoticsFit>,
    minus: Option<AsymptoticsFit>,
}

fn spectrum(config: &RunConfig, sink: &mut Sink, fmt: Format) -> Result<()> {
    let spec = config.kernel()?;
    let report = spectral_report(spec, config.basis_size, config.tol_rel, &config.galerkin)?;
    let fit = config.fit.then(|| Fits {
        plus: asymptotics_fit(&report, Sign::Plus).ok(),
        minus: asymptotics_fit(&report, Sign::Minus).ok(),
    });
    match fmt {
        Format::Json => sink.json("spectrum.json", &SpectrumJson { report: &report, fit })?,
        Format::Csv => {
            sink.write("spectrum.csv", &report.to_csv())?;
            let summary = vec![vec![
                report.basis_size.to_string(),
                report.n_plus.to_string(),
                report.n_minus.to_string(),
                fmt17(report.max_abs),
                fmt17(report.tol),
                report.scale.map(fmt17).unwrap_or_default(),
                serde_json::to_value(report.path).expect("path").as_str().unwrap_or("").to_string(),
            ]];
            sink.write(
                "spectrum_summary.csv",
                &csv_text(&["basis_size", "n_plus", "n_minus", "max_abs", "tol", "scale", "path"], &summary)?,
            )?;
            if let Some(f) = fit {
                let mut rows = Vec::new();
                for (name, v) in [("plus", f.plus), ("minus", f.minus)] {
                    if let Some(v) = v {
                        rows.push(vec![
                            name.to_string(),
                            fmt17(v.c),
                            fmt17(v.p),
                            fmt17(v.residual),
                            v.first.to_string(),
                            v.last.to_string(),
                        ]);
                    }
                }
                sink.write("asymptotics.csv", &csv_text(&["branch", "c", "p", "residual", "first", "last"], &rows)?)?;
            }
        }
    }
    Ok(())
}

fn identity(config: &RunConfig, sink: &mut Sink, fmt: Format) -> Result<()> {
    let spec = config.kernel()?.clone();
    let cases: Vec<VerificationCase> = verify_matrix(&[spec], &config.bumps, &config.identity)?;
    match fmt {
        Format::Json => sink.json("identity.json", &cases),
        Format::Csv => {
            let rows: Vec<Vec<String>> = cases
                .iter()
                .map(|c| {
                    vec![
                        c.spec.label(),
                        fmt17(c.bump.center),
                        fmt17(c.bump.width),
                        fmt17(c.bump.amplitude),
                        fmt17(c.lhs),
                        fmt17(c.rhs_s),
                        fmt17(c.rhs_hnat),
                        fmt17(c.residuals.max),
                    ]
                })
                .collect();
            let head = ["kernel", "center", "width", "amplitude", "lhs", "rhs_s", "rhs_hnat", "max_rel_residual"];
            sink.write("identity.csv", &csv_text(&head, &rows)?)
        }
    }
}

#[derive(Serialize)]
struct RoundTripRow {
    t: f64,
    h: f64,
    reconstructed: f64,
    abs_error: f64,
}

fn reconstruct(config: &RunConfig, sink: &mut Sink, fmt: Format) -> Result<()> {
    let spec = config.kernel()?;
    let s = sign_function_for(spec)?;
    let mut rows = Vec::new();
    for t in config.t_grid.axis()?.points() {
        let h = eval_kernel(spec, t)?;
        let r = reconstruct_at(&s, t)?;
        rows.push(RoundTripRow { t, h, reconstructed: r, abs_error: (h - r).abs() });
    }
    match fmt {
        Format::Json => sink.json("reconstruct.json", &rows),
        Format::Csv => {
            let text: Vec<Vec<String>> =
                rows.iter().map(|r| vec![fmt17(r.t), fmt17(r.h), fmt17(r.reconstructed), fmt17(r.abs_error)]).collect();
            sink.write("reconstruct.csv", &csv_text(&["t", "h", "reconstructed", "abs_error"], &text)?)
        }
    }
}

fn witness(config: &RunConfig, sink: &mut Sink, fmt: Format) -> Result<()> {
    let spec = config.kernel()?;
    let b = b_function(spec, &config.xi_grid.axis()?)?;
    let report = indefiniteness_witness(&b, &config.witness)?;
    match fmt {
        Format::Json => sink.json("witness.json", &report),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .witness_params
                .iter()
                .map(|w| vec![w.n.to_string(), fmt17(w.r), fmt17(w.sigma), fmt17(w.q_plus), fmt17(w.q_minus)])
                .collect();
            sink.write("witness.csv", &csv_text(&["n", "r", "sigma", "q_plus", "q_minus"], &rows)?)
        }
    }
}

/// One row of the `table` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub kernel: String,
    pub n_plus: Count,
    pub n_minus: Count,
}

/// `N₊`, `N₋` for each kernel: exact counts for finite rank, the classifier's otherwise.
pub fn count_table(kernels: &[KernelSpec]) -> Result<Vec<TableRow>> {
    kernels
        .iter()
        .map(|k| {
            let (p, m) = match k.as_finite_rank() {
                Some(fr) => {
                    let (p, m) = finite_rank_counts(&fr)?;
                    (Count::Finite(p as u64), Count::Finite(m as u64))
                }
                None => {
                    let c = classify(k);
                    (c.n_plus, c.n_minus)
                }
            };
            Ok(TableRow { kernel: k.label(), n_plus: p, n_minus: m })
        })
        .collect()
}

fn count_str(c: Count) -> String {
    match c {
        Count::Finite(n) => n.to_string(),
        Count::Infinite => "inf".into(),
        Count::Unknown => "unknown".into(),
    }
}

fn table(config: &RunConfig, sink: &mut Sink, fmt: Format) -> Result<()> {
    let rows = count_table(&config.kernels)?;
    match fmt {
        Format::Json => sink.json("table.json", &rows),
        Format::Csv => {
            let text: Vec<Vec<String>> =
                rows.iter().map(|r| vec![r.kernel.clone(), count_str(r.n_plus), count_str(r.n_minus)]).collect();
            sink.write("table.csv", &csv_text(&["kernel", "n_plus", "n_minus"], &text)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c = RunConfig::from_json(r#"{"command":"analyze","kernel":{"family":"carleman"}}"#).unwrap();
        assert_eq!(c.basis_size, 128);
        c.validate().unwrap();
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);

        let mut bad = c.clone();
        bad.basis_size = 3;
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        bad.basis_size = 4097;
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.tol_rel = 0.1;
        assert!(bad.validate().is_err());
        bad.tol_rel = 0.0;
        assert!(bad.validate().is_err());

        assert!(matches!(RunConfig::from_json(r#"{"command":"nope"}"#), Err(Error::Parse(_))));
        assert!(RunConfig::from_json(r#"{"command":"table","kernels":[],"extra":1}"#).is_err());
        let t = RunConfig::from_json(r#"{"command":"table"}"#).unwrap();
        assert!(t.validate().is_err());
    }

    #[test]
    fn finite_rank_table_rows() {
        let rows = count_table(&[KernelSpec::power_exp(1.0, 1.0), KernelSpec::power_exp(2.0, 1.0)]).unwrap();
        assert_eq!((rows[0].n_plus, rows[0].n_minus), (Count::Finite(1), Count::Finite(1)));
        assert_eq!((rows[1].n_plus, rows[1].n_minus), (Count::Finite(2), Count::Finite(1)));
    }
}
