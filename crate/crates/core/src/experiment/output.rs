use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, OutputFormat, SchemeKind};
use super::runs::{GapModel, Table};
use crate::error::{Error, Result};

pub const SWEEP_HEADER: &str = "n_sites,p,h,depth,scheme,critical_depth,collapse,h_c,n_restarts,n_failed,\
n_converged,residual_mean,residual_std,residual_std_of_mean,residual_min,residual_max,iters_mean,iters_std,\
annealing_time_mean,fidelity_mean,error";

pub const ITERATIONS_HEADER: &str = "n_sites,p,h,depth,n_restarts,n_failed,n_converged,iters_mean,iters_std,\
iters_std_of_mean,iters_min,iters_max,residual_max,error";

pub const P1_HEADER: &str = "p,n_sites,gamma,beta,fidelity,residual,annealing_time,note";

pub const GAP_HEADER: &str = "p,n_sites,h_at_min,min_gap,fit_model,fit_slope,fit_intercept,fit_r_squared,error";

/// JSON artifact: the table together with the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub config: ExperimentConfig,
    pub table: Table,
}

/// 17 significant digits, enough to round-trip any double.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn scheme_label(s: SchemeKind) -> &'static str {
    match s {
        SchemeKind::Random => "r",
        SchemeKind::Linear => "l",
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let header = match table {
        Table::Sweep(_) => SWEEP_HEADER,
        Table::Iterations(_) => ITERATIONS_HEADER,
        Table::P1(_) => P1_HEADER,
        Table::Gap(_) => GAP_HEADER,
    };
    w.write_record(header.split(',')).map_err(csv_err)?;
    match table {
        Table::Sweep(rows) => {
            for r in rows {
                let res = r.residual;
                let it = r.iterations;
                w.write_record([
                    r.n_sites.to_string(),
                    r.p_exponent.to_string(),
                    num(r.field),
                    r.depth.to_string(),
                    scheme_label(r.scheme).to_string(),
                    r.critical_depth.to_string(),
                    num(r.collapse),
                    opt(r.critical_field),
                    r.n_restarts.to_string(),
                    r.n_failed.to_string(),
                    r.n_converged.to_string(),
                    opt(res.map(|s| s.mean)),
                    opt(res.map(|s| s.std)),
                    opt(res.map(|s| s.std_of_mean)),
                    opt(res.map(|s| s.min)),
                    opt(res.map(|s| s.max)),
                    opt(it.map(|s| s.mean)),
                    opt(it.map(|s| s.std)),
                    opt(r.annealing_time_mean),
                    opt(r.fidelity_mean),
                    r.error.clone().unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
        }
        Table::Iterations(rows) => {
            for r in rows {
                let it = r.iterations;
                w.write_record([
                    r.n_sites.to_string(),
                    r.p_exponent.to_string(),
                    num(r.field),
                    r.depth.to_string(),
                    r.n_restarts.to_string(),
                    r.n_failed.to_string(),
                    r.n_converged.to_string(),
                    opt(it.map(|s| s.mean)),
                    opt(it.map(|s| s.std)),
                    opt(it.map(|s| s.std_of_mean)),
                    opt(it.map(|s| s.min)),
                    opt(it.map(|s| s.max)),
                    opt(r.residual_max),
                    r.error.clone().unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
        }
        Table::P1(rows) => {
            for r in rows {
                w.write_record([
                    r.p_exponent.to_string(),
                    r.n_sites.to_string(),
                    opt(r.gamma),
                    opt(r.beta),
                    opt(r.fidelity),
                    opt(r.residual),
                    opt(r.annealing_time),
                    r.note.clone().unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
        }
        Table::Gap(t) => {
            for r in &t.rows {
                let fit = t.fits.iter().find(|f| f.p_exponent == r.p_exponent);
                let model = fit.map(|f| match f.model {
                    GapModel::PowerLaw => "power-law",
                    GapModel::Exponential => "exponential",
                });
                let lf = fit.and_then(|f| f.fit);
                w.write_record([
                    r.p_exponent.to_string(),
                    r.n_sites.to_string(),
                    num(r.field_at_min),
                    num(r.min_gap),
                    model.unwrap_or_default().to_string(),
                    opt(lf.map(|f| f.slope)),
                    opt(lf.map(|f| f.intercept)),
                    opt(lf.map(|f| f.r_squared)),
                    r.error.clone().unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::InvalidConfig(format!("csv output: {e}")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidConfig(format!("csv output: {e}"))
}

pub fn write_json<W: Write>(table: &Table, config: &ExperimentConfig, out: W) -> Result<()> {
    let doc = ResultsDocument { config: config.clone(), table: table.clone() };
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, &doc)
        .and_then(|_| out.write_all(b"\n").map_err(serde_json::Error::io))
        .map_err(|e| Error::InvalidConfig(format!("json output: {e}")))
}

/// Writes `table` to `path` (stdout when `None`) in `format`.
pub fn emit_results(table: &Table, config: &ExperimentConfig, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    if table.is_empty() {
        return Err(Error::InvalidConfig("refusing to emit an empty table".into()));
    }
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io { path: path.into(), source })?;
            let mut w = BufWriter::new(file);
            write_table(table, config, format, &mut w)?;
            w.flush().map_err(|source| Error::Io { path: path.into(), source })
        }
        None => write_table(table, config, format, io::stdout().lock()),
    }
}

fn write_table<W: Write>(table: &Table, config: &ExperimentConfig, format: OutputFormat, w: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(table, w),
        OutputFormat::Json => write_json(table, config, w),
    }
}

pub fn read_results(path: &Path) -> Result<ResultsDocument> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}
