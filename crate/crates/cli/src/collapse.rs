use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use mipt_core::circuit::Model;
use mipt_core::scaling::{derived_exponents, fit_static_collapse, side_diagnostics, StaticFitOptions, SweepDataset, SweepPoint};
use mipt_core::store::{collapsed_table, read_sweep, write_atomic};
use mipt_core::sweep::{cell_path, load_cell, SweepSpec};

use crate::{config, core_err};

#[derive(Args)]
pub struct CollapseArgs {
    /// Sweep CSV written by `mipt sweep`.
    dataset: PathBuf,
    /// Fit window `lo:hi` in p (default from the model).
    #[arg(long)]
    window: Option<String>,
    /// Restrict to these sizes, comma separated.
    #[arg(long = "L")]
    sizes: Option<String>,
    #[arg(long)]
    p_c_bounds: Option<String>,
    #[arg(long)]
    nu_bounds: Option<String>,
    #[arg(long)]
    gamma_bounds: Option<String>,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Replaces parametric errors with trajectory samples when the sweep's cell
/// manifests sit next to the CSV.
fn attach_trajectories(data: SweepDataset, csv: &Path) -> SweepDataset {
    let (Some(model), Some(dir)) = (data.model, csv.parent()) else {
        return data;
    };
    let cells = dir.join("cells");
    let meta = std::fs::read_to_string(csv).ok();
    let seed = meta
        .as_deref()
        .and_then(|t| t.lines().find_map(|l| l.strip_prefix("# seed=")))
        .and_then(|s| s.trim().parse().ok());
    let trajectories = meta
        .as_deref()
        .and_then(|t| t.lines().find_map(|l| l.strip_prefix("# trajectories=")))
        .and_then(|s| s.trim().parse().ok());
    let (Some(seed), Some(trajectories)) = (seed, trajectories) else {
        return data;
    };
    let mut spec = SweepSpec::new(model, Vec::new(), Vec::new());
    spec.seed = seed;
    spec.trajectories = trajectories;
    spec.periods = Some(data.periods);
    spec.cut_fraction = data.cut_fraction;
    let mut attached = 0;
    let points: Vec<SweepPoint> = data
        .points()
        .iter()
        .map(|pt| match load_cell(&spec.cell_config(pt.l, pt.p), &cell_path(&cells, pt.l, pt.p)) {
            Some(c) if c.steady_per_trajectory.len() == pt.n_samples => {
                attached += 1;
                c.sweep_point()
            }
            _ => pt.clone(),
        })
        .collect();
    if attached > 0 {
        eprintln!("trajectory bootstrap: {attached} of {} cells", points.len());
    }
    SweepDataset::new(data.model, data.cut_fraction, data.periods, points).unwrap_or(data)
}

pub fn run(a: CollapseArgs, out: &Path) -> Result<()> {
    let data = read_sweep(&a.dataset).map_err(core_err).with_context(|| format!("loading {}", a.dataset.display()))?;
    let data = attach_trajectories(data, &a.dataset);
    let data = match &a.sizes {
        Some(s) => data.restrict((0.0, 1.0), &config::parse_sizes("L", s)?),
        None => data,
    };
    let mut opts = match (&a.window, data.model) {
        (Some(w), _) => StaticFitOptions::for_window(config::parse_range("window", w)?),
        (None, Some(m)) => StaticFitOptions::for_model(m),
        (None, None) => StaticFitOptions::for_model(Model::B1),
    };
    if let Some(v) = &a.p_c_bounds {
        opts.p_c_bounds = config::parse_range("p_c_bounds", v)?;
    }
    if let Some(v) = &a.nu_bounds {
        opts.nu_bounds = config::parse_range("nu_bounds", v)?;
    }
    if let Some(v) = &a.gamma_bounds {
        opts.gamma_bounds = config::parse_range("gamma_bounds", v)?;
    }
    opts.restarts = a.restarts;
    opts.bootstrap = a.bootstrap;
    opts.seed = a.seed;

    let r = fit_static_collapse(&data, &opts).map_err(core_err)?;
    let d = derived_exponents(&r);
    let mut report = format!("dataset = {}\n", a.dataset.display());
    report += &r.report();
    report += &format!("volume_side_exponent = {:.4}\nvolume_side_ci = [{:.4}, {:.4}]\n", d.volume_side.value, d.volume_side.ci.lo, d.volume_side.ci.hi);
    report += &format!("area_side_exponent = {:.4}\narea_side_ci = [{:.4}, {:.4}]\n", d.area_side.value, d.area_side.ci.lo, d.area_side.ci.hi);
    for s in side_diagnostics(&data, 2) {
        report += &format!("slope p={} = {:.4} (curvature {:+.4})\n", s.p, s.top_slope, s.curvature);
    }
    write_atomic(&out.join("collapse_report.txt"), &report)?;
    collapsed_table(&data, &r).write(&out.join("collapsed.csv"))?;
    print!("{report}");
    Ok(())
}
