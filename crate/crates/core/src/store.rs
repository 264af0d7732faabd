//! Versioned CSV tables and flat key-value manifests.
//!
//! Every CSV starts with `# schema=v1`, `# kind=...` and `# units=bits`,
//! followed by `# key=value` metadata lines, the column header, and rows.
//! Numbers are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::circuit::{EnsembleSummary, Model};
use crate::scaling::{CollapseResult, Curve, SweepDataset, SweepPoint};
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsvKind {
    Ensemble,
    Sweep,
    Collapsed,
}

impl CsvKind {
    pub fn name(self) -> &'static str {
        match self {
            CsvKind::Ensemble => "ensemble",
            CsvKind::Sweep => "sweep",
            CsvKind::Collapsed => "collapsed",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            CsvKind::Ensemble => &["t", "mean_S", "stderr", "n"],
            CsvKind::Sweep => &["model", "L", "p", "LA", "S_mean", "S_err", "n_traj", "T"],
            CsvKind::Collapsed => &["L", "p", "x", "y", "y_err"],
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [CsvKind::Ensemble, CsvKind::Sweep, CsvKind::Collapsed].into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub kind: CsvKind,
    pub meta: BTreeMap<String, String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(kind: CsvKind) -> Self {
        Self { kind, meta: BTreeMap::new(), rows: Vec::new() }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# schema=v{SCHEMA_VERSION}\n# kind={}\n# units=bits\n", self.kind.name());
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out += &self.kind.columns().join(",");
        out.push('\n');
        for row in &self.rows {
            out += &row.join(",");
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let bad = |m: String| Error::Dataset(m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut meta = BTreeMap::new();
        let mut header = None;
        for line in lines.by_ref() {
            match line.strip_prefix('#') {
                Some(rest) => {
                    let (k, v) = rest.split_once('=').ok_or_else(|| bad(format!("comment line without '=': {line:?}")))?;
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                None => {
                    header = Some(line);
                    break;
                }
            }
        }
        match meta.remove("schema").as_deref() {
            Some("v1") => {}
            Some(v) => return Err(bad(format!("unsupported schema version {v:?} (this build reads v{SCHEMA_VERSION})"))),
            None => return Err(bad("missing '# schema=' header".into())),
        }
        match meta.remove("units").as_deref() {
            Some("bits") => {}
            other => return Err(bad(format!("expected units=bits, found {other:?}"))),
        }
        let kind_name = meta.remove("kind").ok_or_else(|| bad("missing '# kind=' header".into()))?;
        let kind = CsvKind::from_name(&kind_name).ok_or_else(|| bad(format!("unknown table kind {kind_name:?}")))?;
        let header = header.ok_or_else(|| bad("missing column header".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != kind.columns() {
            return Err(bad(format!("columns {cols:?} do not match {} schema {:?}", kind.name(), kind.columns())));
        }
        let rows = lines
            .enumerate()
            .map(|(k, l)| {
                let row: Vec<String> = l.split(',').map(|s| s.trim().to_string()).collect();
                if row.len() == cols.len() {
                    Ok(row)
                } else {
                    Err(bad(format!("data row {} has {} fields, expected {}", k + 1, row.len(), cols.len())))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { kind, meta, rows })
    }

    pub fn read(path: &Path, kind: CsvKind) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let table = Self::parse(&text).map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
        if table.kind != kind {
            return Err(Error::Dataset(format!("{}: expected a {} table, found {}", path.display(), kind.name(), table.kind.name())));
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        write_atomic(path, &self.to_text())
    }
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn field<T: std::str::FromStr>(row: &[String], k: usize, name: &str) -> Result<T, Error> {
    row[k].parse().map_err(|_| Error::Dataset(format!("cannot parse {name} = {:?}", row[k])))
}

/// Ensemble series table with the full config embedded as metadata.
pub fn ensemble_table(s: &EnsembleSummary) -> CsvTable {
    let mut t = CsvTable::new(CsvKind::Ensemble);
    for (k, v) in s.config.to_key_values() {
        t.meta.insert(format!("config.{k}"), v);
    }
    t.meta.insert("config_hash".into(), s.config.config_hash());
    t.meta.insert("steady_mean".into(), s.steady_mean.to_string());
    t.meta.insert("steady_stderr".into(), s.steady_stderr.to_string());
    t.meta.insert("steady_start".into(), s.config.steady_start().to_string());
    t.meta.insert("LA".into(), s.config.cut().to_string());
    for k in 0..s.times.len() {
        t.rows.push(vec![s.times[k].to_string(), s.mean[k].to_string(), s.stderr[k].to_string(), s.n_trajectories.to_string()]);
    }
    t
}

/// `(t, mean, stderr, n)` rows of an ensemble table.
pub fn ensemble_rows(t: &CsvTable) -> Result<Vec<(f64, f64, f64, usize)>, Error> {
    t.rows
        .iter()
        .map(|r| Ok((field(r, 0, "t")?, field(r, 1, "mean_S")?, field(r, 2, "stderr")?, field(r, 3, "n")?)))
        .collect()
}

/// Sweep table; `meta` should carry the grid description and seed.
pub fn sweep_table(d: &SweepDataset, meta: BTreeMap<String, String>) -> CsvTable {
    let mut t = CsvTable::new(CsvKind::Sweep);
    t.meta = meta;
    t.meta.insert("cut_fraction".into(), d.cut_fraction.to_string());
    let model = d.model.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
    let mut points: Vec<&SweepPoint> = d.points().iter().collect();
    points.sort_by(|a, b| a.l.cmp(&b.l).then(a.p.total_cmp(&b.p)));
    for pt in points {
        let la = (d.cut_fraction * pt.l as f64).round() as usize;
        t.rows.push(vec![
            model.clone(),
            pt.l.to_string(),
            pt.p.to_string(),
            la.to_string(),
            pt.s_mean.to_string(),
            pt.s_err.to_string(),
            pt.n_samples.to_string(),
            d.periods.to_string(),
        ]);
    }
    t
}

pub fn read_sweep(path: &Path) -> Result<SweepDataset, Error> {
    let t = CsvTable::read(path, CsvKind::Sweep)?;
    let mut model = None;
    let mut periods = 0;
    let mut points = Vec::with_capacity(t.rows.len());
    for r in &t.rows {
        if r[0] != "-" {
            model = Some(r[0].parse::<Model>()?);
        }
        periods = field(r, 7, "T")?;
        points.push(SweepPoint::new(field(r, 1, "L")?, field(r, 2, "p")?, field(r, 4, "S_mean")?, field(r, 5, "S_err")?, field(r, 6, "n_traj")?));
    }
    let cut_fraction = t.meta.get("cut_fraction").and_then(|v| v.parse().ok()).unwrap_or(crate::circuit::DEFAULT_CUT_FRACTION);
    SweepDataset::new(model, cut_fraction, periods, points)
}

/// Collapsed coordinates under a fitted result, one row per point in the fit window.
pub fn collapsed_table(d: &SweepDataset, r: &CollapseResult) -> CsvTable {
    let mut t = CsvTable::new(CsvKind::Collapsed);
    t.meta.insert("p_c".into(), r.p_c.to_string());
    t.meta.insert("nu".into(), r.nu.to_string());
    t.meta.insert("gamma".into(), r.gamma.to_string());
    let window = d.restrict(r.p_window, &[]);
    let mut points: Vec<&SweepPoint> = window.points().iter().collect();
    points.sort_by(|a, b| a.l.cmp(&b.l).then(a.p.total_cmp(&b.p)));
    for pt in points {
        let lf = pt.l as f64;
        let sy = lf.powf(-r.gamma);
        let x = (pt.p - r.p_c) * lf.powf(1.0 / r.nu);
        t.rows.push(vec![pt.l.to_string(), pt.p.to_string(), x.to_string(), (pt.s_mean * sy).to_string(), (pt.s_err * sy).to_string()]);
    }
    t
}

/// Collapsed curves read back from a collapsed table.
pub fn collapsed_curves(t: &CsvTable) -> Result<Vec<Curve>, Error> {
    let mut by_size: BTreeMap<usize, Vec<crate::scaling::CollapsedPoint>> = BTreeMap::new();
    for r in &t.rows {
        by_size.entry(field(r, 0, "L")?).or_default().push(crate::scaling::CollapsedPoint {
            x: field(r, 2, "x")?,
            y: field(r, 3, "y")?,
            dy: field(r, 4, "y_err")?,
        });
    }
    Ok(by_size.into_iter().map(|(l, pts)| Curve::new(l, pts)).collect())
}

/// Flat `key = value` document; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", n + 1)))?;
        if out.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(Error::InvalidConfig(format!("line {}: duplicate key {:?}", n + 1, k.trim())));
        }
    }
    Ok(out)
}

pub fn format_key_values(map: &BTreeMap<String, String>) -> String {
    map.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
