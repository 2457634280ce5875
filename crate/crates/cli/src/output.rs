//! Tabular writers for every result type, and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use pointbin::fitting::{FilterOutcome, SpeciesIndices, ThomasFit};
use pointbin::kernel::IntensityRaster;
use pointbin::secondstats::{CurveEstimate, EnvelopeBand};
use pointbin::{LogPosteriorSurface, OptimalHistogram};

use crate::error::{CliError, CliResult};

/// Seventeen significant digits: parsing the text gives back the same bits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Tables are rendered in memory so the caller can digest exactly the bytes
/// that reach the disk.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> CliResult<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_bytes(self) -> CliResult<Vec<u8>> {
        self.writer.into_inner().map_err(|e| CliError::io("<table>", e.into_error()))
    }
}

pub fn histogram_table(hist: &OptimalHistogram) -> CliResult<Vec<u8>> {
    let mut t = Table::new(&["ix", "iy", "count", "mu", "sigma2"])?;
    for k in 0..hist.grid.m() {
        let (ix, iy) = hist.grid.cell(k);
        t.row([
            ix.to_string(),
            iy.to_string(),
            hist.counts[k].to_string(),
            fmt_f64(hist.heights_mean[k]),
            fmt_f64(hist.heights_var[k]),
        ])?;
    }
    t.into_bytes()
}

pub fn surface_table(surface: &LogPosteriorSurface) -> CliResult<Vec<u8>> {
    let mut t = Table::new(&["m_x", "m_y", "log_posterior"])?;
    for (m_x, m_y, v) in surface.iter() {
        t.row([m_x.to_string(), m_y.to_string(), fmt_f64(v)])?;
    }
    t.into_bytes()
}

pub fn curve_table(curve: &CurveEstimate) -> CliResult<Vec<u8>> {
    let mut t = Table::new(&["r", "value"])?;
    for (r, v) in curve.r.iter().zip(&curve.values) {
        t.row([fmt_f64(*r), fmt_f64(*v)])?;
    }
    t.into_bytes()
}

pub fn envelope_table(observed: &CurveEstimate, band: &EnvelopeBand) -> CliResult<Vec<u8>> {
    let mut t = Table::new(&["r", "value", "lower", "upper", "theory"])?;
    for i in 0..band.r.len() {
        t.row([
            fmt_f64(band.r[i]),
            fmt_f64(observed.value_at(band.r[i])),
            fmt_f64(band.lower[i]),
            fmt_f64(band.upper[i]),
            fmt_f64(band.theory[i]),
        ])?;
    }
    t.into_bytes()
}

pub fn raster_table(raster: &IntensityRaster) -> CliResult<Vec<u8>> {
    let mut t = Table::new(&["x", "y", "intensity"])?;
    for iy in 0..raster.ny {
        for ix in 0..raster.nx {
            let c = raster.cell_center(ix, iy);
            t.row([fmt_f64(c.x), fmt_f64(c.y), fmt_f64(raster.get(ix, iy))])?;
        }
    }
    t.into_bytes()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub species: String,
    pub fit: ThomasFit,
    pub outcome: FilterOutcome,
    pub clump_area_ok: Option<bool>,
}

pub fn fits_table(rows: &[FitRow]) -> CliResult<Vec<u8>> {
    let mut t = Table::new(&["species", "rho", "sigma", "mu", "contrast", "accept", "reason"])?;
    for r in rows {
        let (accept, reason) = match (r.outcome, r.clump_area_ok) {
            (FilterOutcome::Reject(why), _) => (false, why.label().to_string()),
            (FilterOutcome::Accept, Some(false)) => (false, "clump-area".to_string()),
            (FilterOutcome::Accept, _) => (true, String::new()),
        };
        t.row([
            r.species.clone(),
            fmt_f64(r.fit.rho_hat),
            fmt_f64(r.fit.sigma_hat),
            fmt_f64(r.fit.mu_hat),
            fmt_f64(r.fit.contrast),
            accept.to_string(),
            reason,
        ])?;
    }
    t.into_bytes()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRow {
    pub species: String,
    pub indices: SpeciesIndices,
    pub delta_tail: Option<bool>,
    pub abundance: usize,
}

pub fn indices_table(rows: &[IndexRow]) -> CliResult<Vec<u8>> {
    let mut t = Table::new(&[
        "species",
        "a",
        "equivalent_radius",
        "binning_diameter",
        "I_an",
        "delta",
        "delta_tail",
        "omega",
        "abundance",
    ])?;
    for r in rows {
        let i = &r.indices;
        t.row([
            r.species.clone(),
            fmt_f64(i.bin_area),
            fmt_f64(i.equivalent_radius),
            fmt_f64(i.binning_diameter),
            fmt_f64(i.anisotropy),
            fmt_opt(i.delta),
            r.delta_tail.map(|b| b.to_string()).unwrap_or_default(),
            fmt_opt(i.omega),
            r.abundance.to_string(),
        ])?;
    }
    t.into_bytes()
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeciesStatus {
    pub species: String,
    pub abundance: usize,
    /// `ok`, `skipped` or `error`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub seed: u64,
    pub delta_convention: String,
    pub config: serde_json::Value,
    pub species: Vec<SpeciesStatus>,
    pub outputs: Vec<OutputEntry>,
}

/// Collects output files, writing each and recording its digest.
pub struct OutputSink {
    root: PathBuf,
    entries: Vec<OutputEntry>,
}

impl OutputSink {
    pub fn new(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), entries: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, relative: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.root.join(relative);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.entries.push(OutputEntry { path: relative.to_string(), sha256: hex::encode(Sha256::digest(bytes)) });
        Ok(())
    }

    pub fn finish(mut self, mut manifest: Manifest) -> CliResult<PathBuf> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        manifest.outputs = self.entries;
        let path = self.root.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Directory-safe form of a species id.
pub fn species_dir(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}
