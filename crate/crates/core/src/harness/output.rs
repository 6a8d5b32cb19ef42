//! CSV and JSON artifacts. Every CSV starts with a `#schema=` line naming
//! its fixed column set.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::harness::experiments::{Fig2Row, Fig3Row, Fig4Row, TrajectorySummary};
use crate::qubit::BlochVector;

pub const FIG2_SCHEMA: &str = "#schema=fig2/v1";
pub const FIG3_SCHEMA: &str = "#schema=fig3_fidelity/v1";
pub const FIG4_SCHEMA: &str = "#schema=fig4/v1";
pub const TRAJECTORY_SCHEMA: &str = "#schema=trajectory/v1";

fn csv_writer<W: Write>(schema: &str, mut w: W) -> Result<csv::Writer<W>> {
    writeln!(w, "{schema}")?;
    Ok(csv::Writer::from_writer(w))
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn bloch_fields(b: Option<&BlochVector>) -> [String; 3] {
    match b {
        Some(b) => [num(b.x), num(b.y), num(b.z)],
        None => Default::default(),
    }
}

/// `state,p,status,fidelity,{init,coll,rec}_{x,y,z},detail`; failed rows
/// leave the numeric columns empty and carry the error in `detail`.
pub fn write_fig2_csv<W: Write>(rows: &[Fig2Row], w: W) -> Result<()> {
    let mut out = csv_writer(FIG2_SCHEMA, w)?;
    out.write_record([
        "state", "p", "status", "fidelity", "init_x", "init_y", "init_z", "coll_x", "coll_y", "coll_z", "rec_x",
        "rec_y", "rec_z", "detail",
    ])?;
    for r in rows {
        let mut rec = vec![r.state_label.clone(), num(r.p)];
        match &r.outcome {
            Ok(v) => {
                rec.push("ok".into());
                rec.push(num(v.fidelity_initial_vs_recovered));
                for b in [&v.bloch_initial, &v.bloch_collapsed, &v.bloch_recovered] {
                    rec.extend(bloch_fields(Some(b)));
                }
                rec.push(String::new());
            }
            Err(e) => {
                rec.push("failed".into());
                rec.push(String::new());
                for _ in 0..3 {
                    rec.extend(bloch_fields(None));
                }
                rec.push(e.clone());
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// `p,status,process_fidelity,detail`
pub fn write_fig3_csv<W: Write>(rows: &[Fig3Row], w: W) -> Result<()> {
    let mut out = csv_writer(FIG3_SCHEMA, w)?;
    out.write_record(["p", "status", "process_fidelity", "detail"])?;
    for r in rows {
        let (status, detail) = match &r.outcome {
            Ok(_) => ("ok", String::new()),
            Err(e) => ("failed", e.clone()),
        };
        out.write_record([num(r.p), status.into(), opt(r.process_fidelity()), detail])?;
    }
    out.flush()?;
    Ok(())
}

/// `p,g1_analytic,g2_analytic,g1_mc,g2_mc,g1_stderr,g2_stderr`
pub fn write_fig4_csv<W: Write>(rows: &[Fig4Row], w: W) -> Result<()> {
    let mut out = csv_writer(FIG4_SCHEMA, w)?;
    out.write_record([
        "p",
        "g1_analytic",
        "g2_analytic",
        "g1_mc",
        "g2_mc",
        "g1_stderr",
        "g2_stderr",
    ])?;
    for r in rows {
        out.write_record(
            [
                r.p,
                r.g1_analytic,
                r.g2_analytic,
                r.g1_mc,
                r.g2_mc,
                r.g1_stderr,
                r.g2_stderr,
            ]
            .map(num),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// `outcome,count,frequency,expected`, one row per outcome. `expected` is
/// filled for the success row only.
pub fn write_trajectory_csv<W: Write>(s: &TrajectorySummary, w: W) -> Result<()> {
    let mut out = csv_writer(TRAJECTORY_SCHEMA, w)?;
    out.write_record(["outcome", "count", "frequency", "expected"])?;
    let freq = |n: u64| num(n as f64 / s.trials as f64);
    out.write_record([
        "lost_at_measurement".into(),
        s.lost_at_measurement.to_string(),
        freq(s.lost_at_measurement),
        String::new(),
    ])?;
    out.write_record([
        "lost_at_reversal".into(),
        s.lost_at_reversal.to_string(),
        freq(s.lost_at_reversal),
        String::new(),
    ])?;
    out.write_record([
        "reversed".into(),
        s.reversed.to_string(),
        freq(s.reversed),
        num(s.expected_success),
    ])?;
    out.flush()?;
    Ok(())
}

/// Name of the χ file for strength `p`, e.g. `fig3_chi_p0.895.json`.
pub fn chi_file_name(p: f64) -> String {
    format!("fig3_chi_p{p}.json")
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Creates `dir/name`, hands a buffered writer to `f`, and returns the path.
pub fn write_file<F>(dir: &Path, name: &str, f: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(path)
}
