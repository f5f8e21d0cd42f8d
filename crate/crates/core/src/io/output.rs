use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

use crate::diagnostics::{run_summary, RunOutput, StepSummary};
use crate::error::Result;

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// `variable_index,variable_name,pip_empirical,pip_rb`; a missing estimate
/// is written as an empty field. Indices are 1-based.
pub fn write_pips(
    path: &Path,
    names: &[String],
    empirical: Option<&[f64]>,
    rb: Option<&[f64]>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["variable_index", "variable_name", "pip_empirical", "pip_rb"])?;
    let cell = |v: Option<&[f64]>, j: usize| v.map(|v| format_f64(v[j])).unwrap_or_default();
    for (j, name) in names.iter().enumerate() {
        w.write_record([
            (j + 1).to_string(),
            name.clone(),
            cell(empirical, j),
            cell(rb, j),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `iteration,chain,accepted,acceptance_prob,model_size,n_flips,log_posterior`.
pub fn write_trace(path: &Path, steps: &[StepSummary]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "iteration,chain,accepted,acceptance_prob,model_size,n_flips,log_posterior"
    )?;
    for s in steps {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            s.iteration,
            s.chain,
            s.accepted as u8,
            format_f64(s.acceptance_prob),
            s.model_size,
            s.n_flips,
            format_f64(s.log_posterior)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Summary statistics, the configuration, resolved defaults, seed and
/// version. Wall-clock times sit under the top-level `timings` key only.
pub fn summary_json(out: &RunOutput) -> Value {
    let s = run_summary(out);
    let mut summary = serde_json::to_value(&s).expect("summary serializes");
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("timings");
    }
    let a = &out.config.adapt;
    json!({
        "summary": summary,
        "config": out.config,
        "seed": out.config.seed,
        "version": out.version,
        "defaults": {
            "tau_l": a.tau_l,
            "tau_u": a.tau_u,
            "tau": a.tau,
            "kappa": a.kappa,
            "eps": a.eps_for(out.p),
            "lambda": a.lambda,
            "phi_scale": a.phi_scale,
        },
        "timings": s.timings,
    })
}

pub fn write_summary(path: &Path, value: &Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
