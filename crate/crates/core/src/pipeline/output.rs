use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::ClusteringKind;
use super::monitor::MonitorReport;
use super::run::RunOutput;
use super::sweep::{SweepAxis, SweepPoint};
use crate::error::{Error, Result};
use crate::evaluation::CorrelationCdf;
use crate::fmt::sig9;
use crate::VERSION;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_lines<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Key-value manifest: effective config, code version, trace shape and the
/// headline results.
pub fn manifest_text(out: &RunOutput) -> String {
    let mut s = String::new();
    s.push_str(&format!("version = {VERSION}\n"));
    s.push_str(&out.config.to_kv_string());
    s.push_str(&format!("n_nodes = {}\n", out.n_nodes));
    s.push_str(&format!("n_steps = {}\n", out.n_steps));
    s.push_str(&format!("resources = {}\n", out.resource_names.join(",")));
    s.push_str(&format!("channels = {}\n", out.channels.join(",")));
    s.push_str(&format!(
        "offline = {}\n",
        out.config.clustering == ClusteringKind::Static
    ));
    s.push_str(&format!(
        "warmup_steps = 1..{}\n",
        out.config.w_init.saturating_sub(1)
    ));
    s.push_str(&format!("aggregates_include_warmup = {}\n", out.config.include_warmup));
    let agg = &out.aggregate;
    for (name, v) in &agg.objective {
        s.push_str(&format!("objective.{name} = {}\n", sig9(*v)));
    }
    for (name, v) in &agg.intermediate_rmse {
        s.push_str(&format!("intermediate_rmse.{name} = {}\n", sig9(*v)));
    }
    let mean_freq = agg.frequencies.iter().sum::<f64>() / agg.frequencies.len() as f64;
    s.push_str(&format!("mean_frequency = {}\n", sig9(mean_freq)));
    s.push_str(&format!("clamp_checked = {}\n", out.clamp_audit.checked));
    s.push_str(&format!("clamp_violations = {}\n", out.clamp_audit.violations));
    s.push_str(&format!("clamp_degenerate = {}\n", out.clamp_audit.degenerate));
    s.push_str(&format!("degraded_fits = {}\n", out.degraded_fits));
    s
}

/// Writes `manifest`, `metrics.csv`, `aggregate.csv`, `frequencies.csv` and,
/// when enabled, `assignments.csv` and `forecasts.csv` into `dir`.
pub fn write_run(out: &RunOutput, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = dir.join("manifest");
    fs::write(&manifest, manifest_text(out)).map_err(|e| Error::io(&manifest, e))?;

    write_lines(&dir.join("metrics.csv"), |w| {
        writeln!(w, "t,h,resource,rmse")?;
        for m in &out.metrics {
            writeln!(w, "{},{},{},{}", m.t, m.h, m.resource, sig9(m.rmse))?;
        }
        Ok(())
    })?;
    write_lines(&dir.join("aggregate.csv"), |w| {
        writeln!(w, "h,resource,time_avg_rmse,objective_contrib")?;
        for r in &out.aggregate.rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.h,
                r.resource,
                sig9(r.time_avg_rmse),
                sig9(r.objective_contrib)
            )?;
        }
        Ok(())
    })?;
    write_lines(&dir.join("frequencies.csv"), |w| {
        writeln!(w, "node,sent,frequency,slack")?;
        let agg = &out.aggregate;
        for (i, (&sent, &f)) in agg.sent.iter().zip(&agg.frequencies).enumerate() {
            writeln!(w, "{i},{sent},{},{}", sig9(f), sig9(f - agg.budget))?;
        }
        Ok(())
    })?;
    if out.config.write_assignments {
        write_lines(&dir.join("assignments.csv"), |w| {
            writeln!(w, "t,node,resource,label")?;
            for a in &out.assignments {
                writeln!(w, "{},{},{},{}", a.t, a.node, out.channels[a.channel], a.label)?;
            }
            Ok(())
        })?;
    }
    if out.config.write_forecasts {
        write_lines(&dir.join("forecasts.csv"), |w| {
            writeln!(w, "t,h,node,resource,forecast,true")?;
            for f in &out.forecasts {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    f.t,
                    f.h,
                    f.node,
                    out.resource_names[f.resource],
                    sig9(f.forecast),
                    sig9(f.truth)
                )?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

/// Tidy sweep table: one row per (value, reported horizon, resource).
pub fn write_sweep(points: &[SweepPoint], axis: SweepAxis, path: impl AsRef<Path>) -> Result<()> {
    write_lines(path.as_ref(), |w| {
        writeln!(w, "axis,value,h,resource,time_avg_rmse,objective,intermediate_rmse")?;
        for p in points {
            let agg = &p.aggregate;
            for row in agg.rows.iter().filter(|r| p.config.horizons.contains(&r.h)) {
                writeln!(
                    w,
                    "{axis},{},{},{},{},{},{}",
                    p.value,
                    row.h,
                    row.resource,
                    sig9(row.time_avg_rmse),
                    sig9(agg.objective(&row.resource).unwrap_or(f64::NAN)),
                    sig9(agg.intermediate(&row.resource).unwrap_or(f64::NAN))
                )?;
            }
        }
        Ok(())
    })
}

pub fn write_monitor(report: &MonitorReport, path: impl AsRef<Path>) -> Result<()> {
    write_lines(path.as_ref(), |w| {
        writeln!(w, "resource,test_rmse")?;
        for (name, v) in &report.rmse {
            writeln!(w, "{name},{}", sig9(*v))?;
        }
        Ok(())
    })
}

pub fn write_correlation_cdf(cdf: &CorrelationCdf, path: impl AsRef<Path>) -> Result<()> {
    write_lines(path.as_ref(), |w| {
        writeln!(w, "value,cdf")?;
        for (v, c) in &cdf.points {
            writeln!(w, "{},{}", sig9(*v), sig9(*c))?;
        }
        Ok(())
    })
}
