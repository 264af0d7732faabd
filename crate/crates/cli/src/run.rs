use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use mipt_core::circuit::{run_channel, run_ensemble, CircuitConfig};
use mipt_core::store::{ensemble_table, format_key_values, write_atomic, CsvKind, CsvTable};
use mipt_core::sweep::CODE_VERSION;

use crate::{config, core_err};

#[derive(Args)]
pub struct RunArgs {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// A1, A2, B1 or B2.
    #[arg(long)]
    model: Option<String>,
    /// Number of qubits.
    #[arg(long = "L")]
    l: Option<String>,
    /// Measurement rate.
    #[arg(long)]
    p: Option<String>,
    /// Number of time periods.
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long)]
    traj: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    cut_fraction: Option<String>,
    /// Comma-separated periods at which to record.
    #[arg(long)]
    record_times: Option<String>,
    #[arg(long)]
    record_mid_period: Option<String>,
    #[arg(long)]
    record_profile: Option<String>,
    #[arg(long)]
    steady_fraction: Option<String>,
    /// stabilizer or dense.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    allow_large_dense: Option<String>,
    /// Evolve the outcome-averaged density matrix and record its entropy instead.
    #[arg(long)]
    channel: bool,
    /// Base name of the output files (default derived from the config).
    #[arg(long)]
    name: Option<String>,
}

pub fn build_config(a: &RunArgs) -> Result<CircuitConfig> {
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
            ("record_times", a.record_times.clone()),
            ("record_mid_period", a.record_mid_period.clone()),
            ("record_profile", a.record_profile.clone()),
            ("steady_fraction", a.steady_fraction.clone()),
            ("backend", a.backend.clone()),
            ("allow_large_dense", a.allow_large_dense.clone()),
        ],
    )?;
    CircuitConfig::from_key_values(map.iter().map(|(k, v)| (k.as_str(), v.as_str()))).map_err(core_err)
}

pub fn run(a: RunArgs, out: &Path) -> Result<()> {
    let cfg = build_config(&a)?;
    let name = a.name.clone().unwrap_or_else(|| {
        format!("{}_L{}_p{}_seed{}{}", cfg.model, cfg.n_qubits, cfg.p, cfg.master_seed, if a.channel { "_channel" } else { "" })
    });
    let start = Instant::now();
    let (table, steady) = if a.channel {
        let s = run_channel(&cfg).map_err(core_err)?;
        let mut t = CsvTable::new(CsvKind::Ensemble);
        for (k, v) in cfg.to_key_values() {
            t.meta.insert(format!("config.{k}"), v);
        }
        t.meta.insert("config_hash".into(), cfg.config_hash());
        t.meta.insert("quantity".into(), "thermal_renyi2".into());
        t.meta.insert("steady_mean".into(), s.steady_mean.to_string());
        t.meta.insert("steady_stderr".into(), s.steady_stderr.to_string());
        for k in 0..s.times.len() {
            t.rows.push(vec![s.times[k].to_string(), s.mean[k].to_string(), s.stderr[k].to_string(), s.n_realizations.to_string()]);
        }
        (t, (s.steady_mean, s.steady_stderr))
    } else {
        let s = run_ensemble(&cfg).map_err(core_err)?;
        let mut t = ensemble_table(&s);
        t.meta.insert("quantity".into(), "entanglement_renyi2".into());
        (t, (s.steady_mean, s.steady_stderr))
    };
    let wall = start.elapsed().as_secs_f64();
    let csv = out.join(format!("{name}.csv"));
    table.write(&csv)?;

    let mut manifest = BTreeMap::new();
    for (k, v) in cfg.to_key_values() {
        manifest.insert(format!("config.{k}"), v);
    }
    manifest.insert("config_hash".to_string(), cfg.config_hash());
    manifest.insert("master_seed".to_string(), cfg.master_seed.to_string());
    manifest.insert("trajectory_streams".to_string(), format!("0..{}", cfg.n_trajectories));
    manifest.insert("code_version".to_string(), CODE_VERSION.to_string());
    manifest.insert("wall_seconds".to_string(), format!("{wall:.3}"));
    manifest.insert("output".to_string(), csv.file_name().unwrap().to_string_lossy().into_owned());
    manifest.insert("mode".to_string(), if a.channel { "channel" } else { "trajectories" }.to_string());
    manifest.insert("steady_mean".to_string(), steady.0.to_string());
    manifest.insert("steady_stderr".to_string(), steady.1.to_string());
    write_atomic(&out.join(format!("{name}.manifest")), &format_key_values(&manifest))?;
    println!("{}: steady S = {:.4} ± {:.4} bits ({wall:.1}s)", csv.display(), steady.0, steady.1);
    Ok(())
}
