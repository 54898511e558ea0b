//! Data export and config loading.
//!
//! Columnar files are comma-separated with one header row and every value
//! printed as `{:.16e}` (17 significant digits). Column orders:
//!
//! | file        | columns                                          |
//! |-------------|--------------------------------------------------|
//! | profile     | `x,Q`                                            |
//! | history     | `iteration,error,stabilizer_error,residual`      |
//! | series      | `t,h1_norm,energy,momentum,sup_amplitude`        |
//! | snapshots   | `t,x,u,v`                                        |
//! | convergence | `resolution,step,linf_error`                     |
//! | probes      | `amplitude,class,outcome,outcome_time,peak_h1`   |
//! | kernel      | `x,K`                                            |
//!
//! Reports are pretty-printed JSON. Nothing time-dependent is written, so
//! identical inputs give byte-identical files.

use std::fmt::LowerExp;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{DiagnosticsSeries, Outcome, OutcomeClass, Snapshot};
use crate::experiments::{ConvergenceReport, Probe};
use crate::petviashvili::IterationErrors;
use crate::scalar::Real;
use crate::spectral::{GridSpec, RealField};

/// Environment variable naming the default output root.
pub const OUTPUT_DIR_ENV: &str = "GBQ_OUTPUT_DIR";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes `header` and one line per row, all values as `{:.16e}`.
pub fn write_columns<T: LowerExp>(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<T>>) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let body = || -> std::io::Result<()> {
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()
    };
    body().map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn export_profile<T: Real>(path: &Path, grid: &GridSpec<T>, field: &RealField<T>) -> Result<()> {
    if field.len() != grid.n_points() {
        return Err(Error::invalid("field", "length does not match grid"));
    }
    write_columns(
        path,
        &["x", "Q"],
        field.iter().enumerate().map(|(j, &q)| vec![grid.node(j), q]),
    )
}

pub fn export_history<T: Real>(path: &Path, history: &[IterationErrors<T>]) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "iteration,error,stabilizer_error,residual")?;
        for (i, h) in history.iter().enumerate() {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e}",
                i + 1,
                h.error,
                h.stabilizer_error,
                h.residual
            )?;
        }
        w.flush()
    };
    body().map_err(io_err(path))
}

pub fn export_series<T: Real>(path: &Path, series: &DiagnosticsSeries<T>) -> Result<()> {
    write_columns(
        path,
        &["t", "h1_norm", "energy", "momentum", "sup_amplitude"],
        (0..series.len()).map(|i| {
            vec![
                series.times[i],
                series.h1_norm[i],
                series.energy[i],
                series.momentum[i],
                series.sup_amplitude[i],
            ]
        }),
    )
}

pub fn export_snapshots<T: Real>(path: &Path, grid: &GridSpec<T>, snapshots: &[Snapshot<T>]) -> Result<()> {
    write_columns(
        path,
        &["t", "x", "u", "v"],
        snapshots
            .iter()
            .flat_map(|s| (0..s.state.len()).map(move |j| vec![s.t, grid.node(j), s.state.u[j], s.state.v[j]])),
    )
}

pub fn export_convergence<T: Real>(path: &Path, report: &ConvergenceReport<T>) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "resolution,step,linf_error")?;
        for i in 0..report.resolutions.len() {
            writeln!(
                w,
                "{},{:.16e},{:.16e}",
                report.resolutions[i], report.step_sizes[i], report.linf_errors[i]
            )?;
        }
        w.flush()
    };
    body().map_err(io_err(path))
}

pub fn export_probes<T: Real>(path: &Path, probes: &[Probe<T>]) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "amplitude,class,outcome,outcome_time,peak_h1")?;
        for p in probes {
            let class = match p.class {
                OutcomeClass::GlobalCandidate => "global_candidate",
                OutcomeClass::Blowup => "blowup",
            };
            let (outcome, t) = match p.outcome {
                Outcome::Completed => ("completed", String::new()),
                Outcome::BlowupAt(t) => ("blowup_at", format!("{t:.16e}")),
                Outcome::NonfiniteAt(t) => ("nonfinite_at", format!("{t:.16e}")),
            };
            writeln!(w, "{:.16e},{class},{outcome},{t},{:.16e}", p.amplitude, p.peak_h1)?;
        }
        w.flush()
    };
    body().map_err(io_err(path))
}

/// Pretty JSON followed by a newline.
pub fn export_report<R: Serialize>(path: &Path, report: &R) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).map_err(|source| Error::Format {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

/// Reads a JSON document. When the document is a report carrying a
/// `config` member, that member is returned instead, so a report can be
/// fed back as a config.
pub fn read_config<C: DeserializeOwned>(path: &Path) -> Result<C> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let fmt_err = |source| Error::Format {
        path: path.to_path_buf(),
        source,
    };
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(fmt_err)?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(fmt_err)
}

/// Output root: explicit value, else `$GBQ_OUTPUT_DIR`, else `gbq-output`.
pub fn resolve_output_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gbq-output"))
}
