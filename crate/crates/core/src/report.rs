//! File-level pipeline behind the command-line tool.
//!
//! `analyze` runs parse → tokenize → rank → fit → chi-square on one file and
//! writes `report.json`, `ranks.csv` (`rank,observed,predicted`) and
//! `spectrum.csv` (`n,w`). `compare` does the same for several files and
//! orders them by fitted `nu`. `simulate_report` wraps the simulator.
//!
//! Floats are written with Rust's shortest round-trip decimal formatting
//! (the same digits `serde_json` emits), so outputs reparse to the exact
//! `f64` values and are byte-stable across runs.

use std::fmt::Display;
use std::fs;
use std::hash::Hash;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freq_stats::{
    count_tokens, fit_spectrum_gamma, rank_slope, spectrum, OccurrenceSpectrum, RankTable,
    DEFAULT_N_MAX,
};
use crate::note_tokenizer::{tokenize, TokenizeOptions};
use crate::simon_fit::{fit_counts, FitOptions, SimonFit};
use crate::simon_sim::{simulate, verify_zipf, SimConfig, ZipfReport};
use crate::smf_parser::{pair_notes, parse_smf, SmfDiagnostics};
use crate::text_tokenizer::tokenize_bytes;
use crate::GammaEstimate;

/// Smallest rank used for the large-rank Zipf slope.
pub const SLOPE_MIN_RANK: usize = 10;
/// Ranks with fewer occurrences than this are left out of the Zipf slope.
pub const SLOPE_MIN_COUNT: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Midi,
    Text,
    Tokens,
}

impl FromStr for InputKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midi" => Ok(InputKind::Midi),
            "text" => Ok(InputKind::Text),
            "tokens" => Ok(InputKind::Tokens),
            other => Err(Error::Domain(format!("unknown input kind {other:?}"))),
        }
    }
}

/// `MThd` magic means MIDI, a `.tokens` extension means a token stream,
/// anything else is text.
pub fn detect_kind(path: &Path, bytes: &[u8]) -> InputKind {
    if bytes.starts_with(b"MThd") {
        InputKind::Midi
    } else if path.extension().is_some_and(|e| e == "tokens") {
        InputKind::Tokens
    } else {
        InputKind::Text
    }
}

/// One token label per line; surrounding whitespace is trimmed and blank
/// lines are skipped.
pub fn read_token_stream(bytes: &[u8]) -> Result<Vec<String>> {
    let text = std::str::from_utf8(bytes)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// Writes a token stream in the format `read_token_stream` reads.
pub fn write_token_stream<W: Write, D: Display>(
    mut out: W,
    tokens: impl IntoIterator<Item = D>,
) -> Result<()> {
    for t in tokens {
        writeln!(out, "{t}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    /// Forces the input kind instead of detecting it.
    pub kind: Option<InputKind>,
    pub tokenize: TokenizeOptions,
    /// Where the grid came from, echoed in the report.
    pub grid_path: Option<PathBuf>,
    pub fit: FitOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Source {
    pub path: String,
    pub kind: InputKind,
}

/// Non-fatal failure recorded in a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for Warning {
    fn from(e: &Error) -> Self {
        Warning {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smf: Option<SmfDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub division: Option<u16>,
    /// Notes removed by the grace-note filter.
    pub dropped_short: usize,
    /// Durations outside the grid's range.
    pub clamped_durations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptionsEcho {
    pub kind_forced: bool,
    pub min_ticks: u64,
    pub grid_path: Option<String>,
    pub grid: Vec<String>,
    pub residuals: crate::simon_fit::Residuals,
    pub dof: crate::simon_fit::DofConvention,
    pub nu_min: f64,
    pub nu_max: f64,
    pub spectrum_n_max: u64,
}

impl OptionsEcho {
    fn new(opts: &AnalyzeOptions) -> Self {
        OptionsEcho {
            kind_forced: opts.kind.is_some(),
            min_ticks: opts.tokenize.min_ticks,
            grid_path: opts.grid_path.as_ref().map(|p| p.display().to_string()),
            grid: opts
                .tokenize
                .grid
                .classes()
                .iter()
                .map(|c| c.ratio.to_string())
                .collect(),
            residuals: opts.fit.residuals,
            dof: opts.fit.dof,
            nu_min: opts.fit.nu_min,
            nu_max: opts.fit.nu_max,
            spectrum_n_max: DEFAULT_N_MAX,
        }
    }
}

/// Per-file result, serialized as `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub source: Source,
    #[serde(rename = "V")]
    pub distinct: usize,
    #[serde(rename = "T")]
    pub total: u64,
    pub fit: Option<SimonFit<f64>>,
    pub fit_warning: Option<Warning>,
    /// Direct log-log fit of the occurrence spectrum.
    pub spectrum_gamma: Option<GammaEstimate>,
    /// Large-rank slope `z` of `n(r) ~ r^-z`.
    pub zipf_slope: Option<f64>,
    pub diagnostics: Diagnostics,
    pub options: OptionsEcho,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: AnalysisReport,
    /// Token labels in rank order.
    pub table: RankTable<String>,
    pub spectrum: OccurrenceSpectrum,
}

fn rank_labels<K: Ord + Hash + Display>(
    tokens: impl IntoIterator<Item = K>,
) -> Result<RankTable<String>> {
    Ok(count_tokens(tokens)?.map_tokens(|k| k.to_string()))
}

/// Runs the pipeline on an in-memory file.
pub fn analyze_bytes(path: &Path, bytes: &[u8], opts: &AnalyzeOptions) -> Result<Analysis> {
    let kind = opts.kind.unwrap_or_else(|| detect_kind(path, bytes));
    let mut diagnostics = Diagnostics::default();
    let table = match kind {
        InputKind::Midi => {
            let smf = parse_smf(bytes)?;
            let (notes, pairing) = pair_notes(&smf.tracks);
            let mut diag = smf.diagnostics.clone();
            diag.merge(&pairing);
            let out = tokenize(&notes, smf.header.division, &opts.tokenize)?;
            diagnostics.smf = Some(diag);
            diagnostics.division = Some(smf.header.division);
            diagnostics.dropped_short = out.dropped;
            diagnostics.clamped_durations = out.clamped;
            rank_labels(out.tokens)?
        }
        InputKind::Text => rank_labels(tokenize_bytes(bytes)?)?,
        InputKind::Tokens => rank_labels(read_token_stream(bytes)?)?,
    };
    let spec = spectrum(&table);
    let counts = table.counts();
    let (fit, fit_warning) = match fit_counts::<f64>(&counts, &opts.fit) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(Warning::from(&e))),
    };
    let report = AnalysisReport {
        source: Source {
            path: path.display().to_string(),
            kind,
        },
        distinct: table.distinct(),
        total: table.total(),
        fit,
        fit_warning,
        spectrum_gamma: fit_spectrum_gamma(&spec, DEFAULT_N_MAX).ok(),
        zipf_slope: rank_slope::<f64, _>(&table, SLOPE_MIN_RANK, SLOPE_MIN_COUNT)
            .ok()
            .map(|f| f.slope),
        diagnostics,
        options: OptionsEcho::new(opts),
    };
    Ok(Analysis {
        report,
        table,
        spectrum: spec,
    })
}

/// Reads and analyzes one file; errors carry the path.
pub fn analyze(path: &Path, opts: &AnalyzeOptions) -> Result<Analysis> {
    let wrap = |e| Error::in_file(path.display().to_string(), e);
    let bytes = fs::read(path).map_err(|e| wrap(e.into()))?;
    analyze_bytes(path, &bytes, opts).map_err(wrap)
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

impl Analysis {
    /// `rank,observed,predicted`; `predicted` is empty when there is no fit.
    pub fn write_ranks_csv<W: Write>(&self, out: W) -> Result<()> {
        let law = self.report.fit.as_ref().map(SimonFit::law);
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "observed", "predicted"])?;
        for (i, (_, c)) in self.table.entries().iter().enumerate() {
            let rank = i + 1;
            let pred = law
                .map(|l| fmt_f64(l.predict(rank as f64)))
                .unwrap_or_default();
            w.write_record([rank.to_string(), c.to_string(), pred])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn report_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.report)? + "\n")
    }

    /// Writes `report.json`, `ranks.csv` and `spectrum.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.report_json()?)?;
        self.write_ranks_csv(fs::File::create(dir.join("ranks.csv"))?)?;
        self.spectrum
            .write_csv(fs::File::create(dir.join("spectrum.csv"))?)?;
        Ok(())
    }
}

/// One file's line in a comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub path: String,
    pub kind: InputKind,
    #[serde(rename = "V")]
    pub distinct: usize,
    #[serde(rename = "T")]
    pub total: u64,
    pub nu: Option<f64>,
    pub z: Option<f64>,
    pub n0: Option<f64>,
    pub chi2: Option<f64>,
    pub dof: Option<u64>,
    pub p_value: Option<f64>,
    pub boundary_warning: Option<bool>,
    pub fit_warning: Option<String>,
}

impl CompareRow {
    fn from_report(r: &AnalysisReport) -> Self {
        let f = r.fit.as_ref();
        CompareRow {
            path: r.source.path.clone(),
            kind: r.source.kind,
            distinct: r.distinct,
            total: r.total,
            nu: f.map(|f| f.nu),
            z: f.map(|f| f.z),
            n0: f.map(|f| f.n0),
            chi2: f.map(|f| f.chi2),
            dof: f.map(|f| f.dof),
            p_value: f.map(|f| f.p_value),
            boundary_warning: f.map(|f| f.boundary_warning),
            fit_warning: r.fit_warning.as_ref().map(|w| w.kind.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompareError {
    pub path: String,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// Ascending in `nu`; files without a fit come last.
    pub rows: Vec<CompareRow>,
    pub errors: Vec<CompareError>,
}

/// Analyzes every file (in parallel) and sorts the survivors by `nu`.
pub fn compare(paths: &[PathBuf], opts: &AnalyzeOptions) -> Comparison {
    let results: Vec<(String, Result<Analysis>)> = paths
        .par_iter()
        .map(|p| (p.display().to_string(), analyze(p, opts)))
        .collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (path, res) in results {
        match res {
            Ok(a) => rows.push(CompareRow::from_report(&a.report)),
            Err(e) => {
                let inner = match &e {
                    Error::InFile { source, .. } => source.to_string(),
                    other => other.to_string(),
                };
                errors.push(CompareError {
                    path,
                    kind: e.kind().to_string(),
                    message: inner,
                })
            }
        }
    }
    rows.sort_by(|a, b| match (a.nu, b.nu) {
        (Some(x), Some(y)) => x.total_cmp(&y).then_with(|| a.path.cmp(&b.path)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.path.cmp(&b.path),
    });
    Comparison { rows, errors }
}

impl Comparison {
    /// Columns: `path,kind,V,T,nu,z,n0,chi2,dof,p_value,boundary_warning,fit_warning`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "path",
            "kind",
            "V",
            "T",
            "nu",
            "z",
            "n0",
            "chi2",
            "dof",
            "p_value",
            "boundary_warning",
            "fit_warning",
        ])?;
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        for r in &self.rows {
            let kind = serde_json::to_value(r.kind)?
                .as_str()
                .unwrap_or_default()
                .to_string();
            w.write_record([
                r.path.clone(),
                kind,
                r.distinct.to_string(),
                r.total.to_string(),
                opt(r.nu),
                opt(r.z),
                opt(r.n0),
                opt(r.chi2),
                r.dof.map(|d| d.to_string()).unwrap_or_default(),
                opt(r.p_value),
                r.boundary_warning
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
                r.fit_warning.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `compare.json` and `compare.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join("compare.json"),
            serde_json::to_string_pretty(self)? + "\n",
        )?;
        self.write_csv(fs::File::create(dir.join("compare.csv"))?)?;
        Ok(())
    }
}

/// Simulation run as written to `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub config: SimConfig,
    #[serde(rename = "V")]
    pub distinct: u32,
    #[serde(rename = "T")]
    pub steps: u64,
    pub verify: Option<ZipfReport<f64>>,
    pub verify_warning: Option<Warning>,
}

pub struct Simulation {
    pub report: SimulationReport,
    pub tokens: Vec<u32>,
}

pub fn simulate_report(config: &SimConfig) -> Result<Simulation> {
    let result = simulate(config)?;
    let (verify, verify_warning) = match verify_zipf::<f64>(&result) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(Warning::from(&e))),
    };
    Ok(Simulation {
        report: SimulationReport {
            config: *config,
            distinct: result.distinct,
            steps: result.steps,
            verify,
            verify_warning,
        },
        tokens: result.tokens,
    })
}

impl Simulation {
    pub fn report_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.report)? + "\n")
    }

    /// Writes `report.json`, and `tokens.txt` (one id per line) when asked.
    pub fn write_outputs(&self, dir: &Path, with_tokens: bool) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.report_json()?)?;
        if with_tokens {
            let f = std::io::BufWriter::new(fs::File::create(dir.join("tokens.txt"))?);
            write_token_stream(f, &self.tokens)?;
        }
        Ok(())
    }
}
