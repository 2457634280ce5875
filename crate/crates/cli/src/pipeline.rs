//! Runs the configured analyses over every species and writes the outputs.
//!
//! Random streams: a generated input pattern draws from `seed`; species `i`
//! (in sorted id order) owns the base `seed + (i + 1)·2³²`. Envelope
//! statistic `t` simulates from base `+ (t + 1)·2²⁴` (simulation `j` adding
//! `j`), and fitted-model realizations for Δ from base `+ 2³¹ + k`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use pointbin::fitting::{
    abundance_in_range, clump_area_filter, delta_in_tail, difference_index, fit_thomas, species_filter,
    SpeciesIndices,
};
use pointbin::generators::{gen_thomas, ThomasMode, ThomasParams};
use pointbin::kernel::{default_bandwidth, epanechnikov_intensity, histogram_intensity};
use pointbin::knuth::{optimal_binning, optimal_binning_1d};
use pointbin::secondstats::{
    csr_envelope, default_g_bandwidth, default_k2_bandwidth, evaluate_statistic, k2_index, l_function,
    linear_grid, max_valid_distance, pair_correlation, relative_neighbourhood_density, ripley_k,
    SummaryStatistic,
};
use pointbin::stone::stone_optimal_bins;
use pointbin::{KnuthSearchConfig, OptimalHistogram, PointPattern, RandomStream};

use crate::census::read_census_csv;
use crate::config::{Analysis, EnvelopeStatistic, RunConfig};
use crate::error::CliResult;
use crate::output::{
    curve_table, envelope_table, fits_table, histogram_table, indices_table, raster_table, species_dir,
    surface_table, FitRow, IndexRow, Manifest, OutputSink, SpeciesStatus, Table,
};

/// Species id of a generated pattern.
pub const GENERATED_ID: &str = "generated";

#[derive(Debug)]
pub struct RunReport {
    pub statuses: Vec<SpeciesStatus>,
    pub failures: usize,
    pub manifest: std::path::PathBuf,
}

impl RunReport {
    /// 0 when every species succeeded, 2 when some failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 {
            2
        } else {
            0
        }
    }
}

#[derive(Default)]
struct SpeciesOutput {
    files: Vec<(String, Vec<u8>)>,
    fit: Option<FitRow>,
    index: Option<IndexRow>,
}

enum SpeciesResult {
    Done(SpeciesOutput),
    Skipped,
    Failed(String),
}

pub fn load_patterns(config: &RunConfig) -> CliResult<BTreeMap<String, PointPattern>> {
    if let Some(path) = &config.input {
        return read_census_csv(path, config.window_override()?)?.patterns();
    }
    let pattern = config.generator.generate(&mut RandomStream::new(config.seed))?;
    let pattern = match config.window_override()? {
        Some(w) => pattern.with_window(w)?,
        None => pattern,
    };
    Ok(BTreeMap::from([(GENERATED_ID.to_string(), pattern)]))
}

fn species_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64 + 1) << 32)
}

fn summary_statistic(stat: EnvelopeStatistic, g_bw: f64, k2_bw: f64) -> SummaryStatistic {
    match stat {
        EnvelopeStatistic::K => SummaryStatistic::K,
        EnvelopeStatistic::L => SummaryStatistic::L,
        EnvelopeStatistic::G => SummaryStatistic::G { bandwidth: g_bw },
        EnvelopeStatistic::K2 => SummaryStatistic::K2 { g_bandwidth: g_bw, k2_bandwidth: k2_bw },
    }
}

fn knuth(pattern: &PointPattern, config: &RunConfig) -> CliResult<OptimalHistogram> {
    let search = KnuthSearchConfig::new(config.knuth_cap_x, config.knuth_cap_y)?;
    Ok(optimal_binning(pattern, &search, None)?.0)
}

fn analyze_species(
    id: &str,
    dir: &str,
    pattern: &PointPattern,
    seed: u64,
    config: &RunConfig,
) -> CliResult<SpeciesOutput> {
    let mut out = SpeciesOutput::default();
    let mut files = Vec::new();
    let mut file = |name: &str, bytes: Vec<u8>| files.push((format!("{dir}/{name}"), bytes));
    let n = pattern.len();
    let window = *pattern.window();

    let hist = if config.has(Analysis::Knuth) || config.has(Analysis::Kernel) || config.has(Analysis::Indices) {
        let search = KnuthSearchConfig::new(config.knuth_cap_x, config.knuth_cap_y)?;
        Some(optimal_binning(pattern, &search, None)?)
    } else {
        None
    };
    if config.has(Analysis::Knuth) {
        let (h, surface) = hist.as_ref().expect("computed above");
        file("histogram.csv", histogram_table(h)?);
        file("posterior_surface.csv", surface_table(surface)?);
    }

    if config.has(Analysis::Kernel) {
        let bw = match config.kernel_bandwidth {
            Some(b) => b,
            None => default_bandwidth(pattern)?,
        };
        let raster = epanechnikov_intensity(pattern, bw, config.raster_nx, config.raster_ny)?;
        file("raster.csv", raster_table(&raster)?);
        let (h, _) = hist.as_ref().expect("computed above");
        let knuth_raster = histogram_intensity(h, window, config.raster_nx, config.raster_ny)?;
        file("knuth_raster.csv", raster_table(&knuth_raster)?);
    }

    let needs_curves = [Analysis::K, Analysis::L, Analysis::G, Analysis::K2, Analysis::Envelope]
        .iter()
        .any(|a| config.has(*a));
    if needs_curves {
        let g_bw = config.g_bandwidth.unwrap_or_else(|| default_g_bandwidth(pattern));
        let r_lo = config.r_min.unwrap_or(g_bw);
        let r_hi = config.r_max.unwrap_or_else(|| max_valid_distance(pattern));
        let r = linear_grid(r_lo, r_hi, config.r_points);
        if config.has(Analysis::K) || config.has(Analysis::L) {
            let k = ripley_k(pattern, &r)?;
            if config.has(Analysis::K) {
                file("K.csv", curve_table(&k)?);
            }
            if config.has(Analysis::L) {
                file("L.csv", curve_table(&l_function(&k)?)?);
            }
        }
        let mut k2_bw = config.k2_bandwidth.unwrap_or(0.0);
        if config.has(Analysis::G) || config.has(Analysis::K2) || config.has(Analysis::Envelope) {
            let g = pair_correlation(pattern, &r, g_bw)?;
            if config.k2_bandwidth.is_none() {
                k2_bw = default_k2_bandwidth(&g);
            }
            if config.has(Analysis::G) {
                file("g.csv", curve_table(&g)?);
            }
            if config.has(Analysis::K2) {
                file("K2.csv", curve_table(&k2_index(&g, k2_bw)?)?);
            }
        }
        if config.has(Analysis::Envelope) {
            for (t, &stat) in config.envelope_statistics.iter().enumerate() {
                let summary = summary_statistic(stat, g_bw, k2_bw);
                let rng = RandomStream::new(seed.wrapping_add((t as u64 + 1) << 24));
                let band = csr_envelope(pattern, &summary, &r, config.n_sims, config.level, &rng)?;
                let observed = evaluate_statistic(pattern, &summary, &r)?;
                file(&format!("envelope_{}.csv", stat.name()), envelope_table(&observed, &band)?);
            }
        }
    }

    let fit = if config.has(Analysis::FitThomas) {
        let fit = fit_thomas(pattern, config.d_max, config.fit_step)?;
        out.fit = Some(FitRow {
            species: id.to_string(),
            fit,
            outcome: species_filter(&fit, n, window.area()),
            clump_area_ok: config.clump_area_filter.then(|| clump_area_filter(&fit)),
        });
        Some(fit)
    } else {
        None
    };

    if config.has(Analysis::Indices) {
        let (h, _) = hist.as_ref().expect("computed above");
        let mut indices = SpeciesIndices::from_histogram(h);
        indices.omega = relative_neighbourhood_density(pattern, config.omega_radius).ok();
        let mut delta_tail = None;
        if let Some(fit) = fit {
            let params = ThomasParams::new(fit.rho_hat, fit.sigma_hat, fit.mu_hat)?;
            let mut total = 0.0;
            for k in 0..config.delta_realizations {
                let mut rng = RandomStream::new(seed.wrapping_add(1 << 31).wrapping_add(k as u64));
                let model = gen_thomas(&window, &params, ThomasMode::FixedN(n), &mut rng)?;
                total += knuth(&model, config)?.grid.bin_area();
            }
            let a_mtp = total / config.delta_realizations as f64;
            indices.delta = Some(difference_index(a_mtp, indices.bin_area)?);
            delta_tail = Some(delta_in_tail(a_mtp, indices.bin_area));
        }
        out.index = Some(IndexRow { species: id.to_string(), indices, delta_tail, abundance: n });
    }

    if config.has(Analysis::StoneCompare) {
        let mut t = Table::new(&["axis", "m_knuth", "m_stone"])?;
        for (axis, values) in [("x", pattern.xs()), ("y", pattern.ys())] {
            let m_knuth = optimal_binning_1d(&values, config.stone_cap)?.m_hat;
            let (m_stone, _) = stone_optimal_bins(&values, config.stone_cap)?;
            t.row([axis.to_string(), m_knuth.to_string(), m_stone.to_string()])?;
        }
        file("stone_compare.csv", t.into_bytes()?);
    }
    out.files = files;
    Ok(out)
}

/// Unique directory names, in the order of `ids`.
fn directories(ids: &[&String]) -> Vec<String> {
    let mut used = BTreeSet::new();
    ids.iter()
        .map(|id| {
            let base = species_dir(id);
            let mut name = base.clone();
            let mut k = 1;
            while !used.insert(name.clone()) {
                k += 1;
                name = format!("{base}-{k}");
            }
            name
        })
        .collect()
}

pub fn run_pipeline(config: &RunConfig) -> CliResult<RunReport> {
    config.validate()?;
    let patterns = load_patterns(config)?;
    let ids: Vec<&String> = patterns.keys().collect();
    let dirs = directories(&ids);

    let results: Vec<SpeciesResult> = ids
        .par_iter()
        .zip(dirs.par_iter())
        .enumerate()
        .map(|(i, (id, dir))| {
            let pattern = &patterns[*id];
            if config.abundance_filter && !abundance_in_range(pattern.len()) {
                return SpeciesResult::Skipped;
            }
            match analyze_species(id, dir, pattern, species_seed(config.seed, i), config) {
                Ok(out) => SpeciesResult::Done(out),
                Err(e) => SpeciesResult::Failed(e.to_string()),
            }
        })
        .collect();

    let mut sink = OutputSink::new(&config.output)?;
    let mut statuses = Vec::new();
    let mut fits = Vec::new();
    let mut indices = Vec::new();
    let mut failures = 0;
    for (id, result) in ids.iter().zip(results) {
        let abundance = patterns[*id].len();
        let (status, error) = match result {
            SpeciesResult::Done(out) => {
                for (path, bytes) in &out.files {
                    sink.write(path, bytes)?;
                }
                fits.extend(out.fit);
                indices.extend(out.index);
                ("ok", None)
            }
            SpeciesResult::Skipped => ("skipped", None),
            SpeciesResult::Failed(msg) => {
                failures += 1;
                ("error", Some(msg))
            }
        };
        statuses.push(SpeciesStatus { species: (*id).clone(), abundance, status: status.into(), error });
    }
    if config.has(Analysis::FitThomas) {
        sink.write("fits.csv", &fits_table(&fits)?)?;
    }
    if config.has(Analysis::Indices) {
        sink.write("indices.csv", &indices_table(&indices)?)?;
    }

    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let delta_convention = if config.delta_realizations == 1 {
        "one fitted-model realization per species".to_string()
    } else {
        format!("mean bin area over {} fitted-model realizations per species", config.delta_realizations)
    };
    let manifest = Manifest {
        tool: "pointbin".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp: format!("unix:{timestamp}"),
        seed: config.seed,
        delta_convention,
        config: serde_json::to_value(config)?,
        species: statuses.clone(),
        outputs: Vec::new(),
    };
    let manifest = sink.finish(manifest)?;
    Ok(RunReport { statuses, failures, manifest })
}
