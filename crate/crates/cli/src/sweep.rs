use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::Args;
use mipt_core::circuit::Model;
use mipt_core::store::{format_key_values, sweep_table, write_atomic};
use mipt_core::sweep::{run_sweep, CellOutcome, SweepSpec};

use crate::{config, core_err, UsageError};

#[derive(Args)]
pub struct SweepArgs {
    /// Config file with keys model, L, p, T, trajectories, seed, cut_fraction.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Sizes, comma separated.
    #[arg(long = "L")]
    l: Option<String>,
    /// Rates, comma separated or `lo:hi:step`.
    #[arg(long)]
    p: Option<String>,
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long)]
    traj: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    cut_fraction: Option<String>,
    /// Keep every trajectory's time series in the cell manifests.
    #[arg(long)]
    keep_trajectories: bool,
}

fn build_spec(a: &SweepArgs) -> Result<SweepSpec> {
    let map = config::merge(
        a.config.as_deref(),
        &[
            ("model", a.model.clone()),
            ("L", a.l.clone()),
            ("p", a.p.clone()),
            ("T", a.t.clone()),
            ("trajectories", a.traj.clone()),
            ("seed", a.seed.clone()),
            ("cut_fraction", a.cut_fraction.clone()),
        ],
    )?;
    let known = ["model", "L", "p", "T", "trajectories", "seed", "cut_fraction"];
    if let Some(k) = map.keys().find(|k| !known.contains(&k.as_str())) {
        bail!(UsageError(format!("unknown sweep key {k:?}")));
    }
    let need = |k: &str| map.get(k).ok_or_else(|| UsageError(format!("sweep needs {k}")));
    let parse = |k: &str, v: &str| UsageError(format!("cannot parse {k} = {v:?}"));
    let model: Model = need("model")?.parse().map_err(core_err)?;
    let mut spec = SweepSpec::new(model, config::parse_sizes("L", need("L")?)?, config::parse_values("p", need("p")?)?);
    if let Some(v) = map.get("T") {
        spec.periods = Some(v.parse().map_err(|_| parse("T", v))?);
    }
    if let Some(v) = map.get("trajectories") {
        spec.trajectories = v.parse().map_err(|_| parse("trajectories", v))?;
    }
    if let Some(v) = map.get("seed") {
        spec.seed = v.parse().map_err(|_| parse("seed", v))?;
    }
    if let Some(v) = map.get("cut_fraction") {
        spec.cut_fraction = v.parse().map_err(|_| parse("cut_fraction", v))?;
    }
    spec.validate().map_err(core_err)?;
    Ok(spec)
}

pub fn run(a: SweepArgs, out: &Path) -> Result<()> {
    let spec = build_spec(&a)?;
    let cells_dir = out.join("cells");
    let n = spec.cells().len();
    let mut done = 0;
    let report = run_sweep(&spec, &cells_dir, a.keep_trajectories, |l, p, outcome, cell| {
        done += 1;
        match (outcome, cell) {
            (CellOutcome::Failed(e), _) => eprintln!("[{done}/{n}] L={l} p={p}: failed: {e}"),
            (o, Some(c)) => eprintln!(
                "[{done}/{n}] L={l} p={p}: S = {:.4} ± {:.4}{}",
                c.steady_mean,
                c.steady_stderr,
                if *o == CellOutcome::Resumed { " (resumed)" } else { "" }
            ),
            _ => {}
        }
    })
    .map_err(core_err)?;
    let csv = out.join("sweep.csv");
    sweep_table(&report.dataset, spec.to_meta()).write(&csv)?;
    let mut manifest = spec.to_meta();
    manifest.insert("cells".into(), n.to_string());
    manifest.insert("cells_done".into(), report.cells.len().to_string());
    let failures: Vec<String> = report.failures().iter().map(|((l, p), _)| format!("L{l}_p{p}")).collect();
    manifest.insert("cells_failed".into(), failures.join(" "));
    write_atomic(&out.join("sweep.manifest"), &format_key_values(&manifest))?;
    println!("{}: {} of {n} cells", csv.display(), report.cells.len());
    if !failures.is_empty() {
        bail!("{} cells failed: {}", failures.len(), failures.join(", "));
    }
    Ok(())
}
