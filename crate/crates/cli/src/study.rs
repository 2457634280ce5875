//! One-dimensional Knuth-versus-Stone study: repeated samples from a known
//! density, the bin count each rule picks, and each histogram's L² distance
//! to the true density.

use std::f64::consts::PI;

use clap::ValueEnum;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pointbin::knuth::optimal_binning_1d;
use pointbin::stone::{histogram_density_distance, stone_optimal_bins};
use pointbin::{Histogram1D, RandomStream};

use crate::error::CliResult;
use crate::output::{fmt_f64, Table};

pub const QUADRATURE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Density {
    /// Standard normal.
    Gaussian,
    /// Uniform on [0, 1].
    Uniform,
    /// Piecewise constant on [0, 4] with relative heights 1, 3, 2, 4.
    FourStep,
}

const STEP_MASS: [f64; 4] = [0.1, 0.3, 0.2, 0.4];

impl Density {
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Density::Gaussian => (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
            Density::Uniform => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            Density::FourStep => {
                if (0.0..=4.0).contains(&x) {
                    STEP_MASS[(x.floor() as usize).min(3)]
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, n: usize, rng: &mut RandomStream) -> Vec<f64> {
        (0..n)
            .map(|_| match self {
                Density::Gaussian => StandardNormal.sample(rng),
                Density::Uniform => rng.random::<f64>(),
                Density::FourStep => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut k = 3;
                    for (i, m) in STEP_MASS.iter().enumerate() {
                        acc += m;
                        if u < acc {
                            k = i;
                            break;
                        }
                    }
                    k as f64 + rng.random::<f64>()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningComparison {
    pub run: usize,
    pub m_knuth: usize,
    pub m_stone: usize,
    pub l2_knuth: f64,
    pub l2_stone: f64,
}

/// Run `i` samples from `RandomStream::new(seed).derive(i)`.
pub fn compare_binning(
    density: Density,
    samples: usize,
    runs: usize,
    cap: usize,
    seed: u64,
) -> CliResult<Vec<BinningComparison>> {
    let base = RandomStream::new(seed);
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = base.derive(run as u64);
            let data = density.sample(samples, &mut rng);
            let knuth = optimal_binning_1d(&data, cap)?;
            let (m_stone, _) = stone_optimal_bins(&data, cap)?;
            let stone = Histogram1D::empirical(&data, m_stone)?;
            let pdf = |x: f64| density.pdf(x);
            Ok(BinningComparison {
                run,
                m_knuth: knuth.m_hat,
                m_stone,
                l2_knuth: histogram_density_distance(&knuth.histogram, pdf, 2, QUADRATURE_STEP)?,
                l2_stone: histogram_density_distance(&stone, pdf, 2, QUADRATURE_STEP)?,
            })
        })
        .collect()
}

pub fn comparison_table(rows: &[BinningComparison]) -> CliResult<Vec<u8>> {
    let mut t = Table::new(&["run", "m_knuth", "m_stone", "l2_knuth", "l2_stone"])?;
    for r in rows {
        t.row([
            r.run.to_string(),
            r.m_knuth.to_string(),
            r.m_stone.to_string(),
            fmt_f64(r.l2_knuth),
            fmt_f64(r.l2_stone),
        ])?;
    }
    t.into_bytes()
}
