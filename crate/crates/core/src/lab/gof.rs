//! Chi-square goodness-of-fit of the samplers against exact laws.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::event::gem_log_density;
use crate::error::{domain, usage, Result};
use crate::exact::{check_theta, esf_log_pmf, kn_log_pmf};
use crate::partition::enumerate_partitions;
use crate::quad::integrate;
use crate::samplers::{
    sample_dirichlet_symmetric, sample_ewens_partition, sample_gem, sample_kn, SeedSpec,
};
use crate::simplex::{order_stat_log_density, OrderStatPoint};

pub const SIGNIFICANCE: f64 = 1e-3;
pub const MIN_EXPECTED: f64 = 5.0;

/// Edges of the GEM cells in `x_1` and in `x_2 / (1 - x_1)`.
pub const GEM_X1_EDGES: [f64; 5] = [0.0, 0.1, 0.25, 0.45, 1.0];
pub const GEM_V2_EDGES: [f64; 6] = [0.0, 0.05, 0.15, 0.3, 0.5, 1.0];
pub const DIRICHLET_MAX_BINS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "kebab-case")]
pub enum GofTarget {
    /// Ewens partitions against the sampling formula.
    Ewens { theta: f64, n: u32 },
    /// `K_n` against its exact law.
    Kn { theta: f64, n: u32 },
    /// First two GEM weights against their joint density.
    Gem { theta: f64 },
    /// Largest coordinate of a uniform point of the `K`-simplex.
    DirichletMax { alleles: u64 },
}

impl GofTarget {
    pub fn name(&self) -> &'static str {
        match self {
            GofTarget::Ewens { .. } => "ewens",
            GofTarget::Kn { .. } => "kn",
            GofTarget::Gem { .. } => "gem",
            GofTarget::DirichletMax { .. } => "dirichlet-max",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub sampler: String,
    pub samples: u64,
    pub cells: usize,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub min_expected: f64,
    pub pass: bool,
}

fn bin_of(edges: &[f64], x: f64) -> usize {
    let idx = edges.partition_point(|&e| e <= x);
    idx.clamp(1, edges.len() - 1) - 1
}

fn gem_cell_probabilities(theta: f64) -> Vec<f64> {
    let density = |x1: f64, v2: f64| {
        gem_log_density(theta, &[x1, v2 * (1.0 - x1)])
            .map(|l| l.exp() * (1.0 - x1))
            .unwrap_or(0.0)
    };
    let mut probs = Vec::new();
    for w1 in GEM_X1_EDGES.windows(2) {
        for w2 in GEM_V2_EDGES.windows(2) {
            probs.push(integrate(
                |x1| integrate(|v2| density(x1, v2), w2[0], w2[1], 16, 1),
                w1[0],
                w1[1],
                16,
                2,
            ));
        }
    }
    probs
}

fn dirichlet_max_edges(alleles: u64) -> Vec<f64> {
    let lo = 1.0 / alleles as f64;
    (0..=DIRICHLET_MAX_BINS)
        .map(|i| lo + (1.0 - lo) * i as f64 / DIRICHLET_MAX_BINS as f64)
        .collect()
}

fn dirichlet_max_probabilities(alleles: u64) -> Result<Vec<f64>> {
    let edges = dirichlet_max_edges(alleles);
    let g = |p: f64| {
        OrderStatPoint::new(vec![p], alleles)
            .and_then(|pt| order_stat_log_density(&pt))
            .map(|l| l.exp())
            .unwrap_or(0.0)
    };
    // the density is a polynomial between consecutive points 1/j
    let breaks: Vec<f64> = (1..=alleles).map(|j| 1.0 / j as f64).collect();
    Ok(edges
        .windows(2)
        .map(|w| {
            let mut cuts: Vec<f64> = breaks
                .iter()
                .copied()
                .filter(|&b| b > w[0] && b < w[1])
                .collect();
            cuts.push(w[0]);
            cuts.push(w[1]);
            cuts.sort_by(f64::total_cmp);
            cuts.windows(2)
                .map(|c| integrate(g, c[0], c[1], 16, 1))
                .sum()
        })
        .collect())
}

fn histogram(samples: u64, cells: usize, cell: impl Fn(u64) -> usize + Sync) -> Vec<u64> {
    (0..samples)
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut acc, i| {
                acc[cell(i)] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Draws `samples` replicates on consecutive streams from `seed` and
/// compares cell counts with exact cell probabilities.
pub fn gof_validate(target: GofTarget, samples: u64, seed: SeedSpec) -> Result<GofReport> {
    let (probs, counts) = match target {
        GofTarget::Ewens { theta, n } => {
            check_theta(theta)?;
            let parts = enumerate_partitions(n)?;
            let index: HashMap<Vec<u32>, usize> = parts
                .iter()
                .enumerate()
                .map(|(i, a)| (a.counts().to_vec(), i))
                .collect();
            let probs = parts
                .iter()
                .map(|a| esf_log_pmf(theta, a).map(|l| l.exp()))
                .collect::<Result<Vec<_>>>()?;
            let counts = histogram(samples, parts.len(), |i| {
                let a = sample_ewens_partition(theta, n, seed.replicate(i)).expect("validated");
                index[a.counts()]
            });
            (probs, counts)
        }
        GofTarget::Kn { theta, n } => {
            check_theta(theta)?;
            let probs = (1..=n)
                .map(|k| kn_log_pmf(theta, n, k).map(|l| l.exp()))
                .collect::<Result<Vec<_>>>()?;
            let counts = histogram(samples, n as usize, |i| {
                sample_kn(theta, u64::from(n), seed.replicate(i)).expect("validated") as usize - 1
            });
            (probs, counts)
        }
        GofTarget::Gem { theta } => {
            check_theta(theta)?;
            let probs = gem_cell_probabilities(theta);
            let width = GEM_V2_EDGES.len() - 1;
            let counts = histogram(samples, probs.len(), |i| {
                let x = sample_gem(theta, 2, seed.replicate(i)).expect("validated");
                let x1 = x.atoms()[0];
                let v2 = x.atoms()[1] / (1.0 - x1);
                bin_of(&GEM_X1_EDGES, x1) * width + bin_of(&GEM_V2_EDGES, v2)
            });
            (probs, counts)
        }
        GofTarget::DirichletMax { alleles } => {
            if alleles < 3 {
                return domain("dirichlet-max needs K >= 3");
            }
            let probs = dirichlet_max_probabilities(alleles)?;
            let edges = dirichlet_max_edges(alleles);
            let counts = histogram(samples, probs.len(), |i| {
                let p = sample_dirichlet_symmetric(alleles as usize, 1.0, seed.replicate(i))
                    .expect("validated");
                bin_of(&edges, p.iter().copied().fold(0.0, f64::max))
            });
            (probs, counts)
        }
    };
    chi_square(target.name(), samples, &probs, &counts)
}

fn chi_square(name: &str, samples: u64, probs: &[f64], counts: &[u64]) -> Result<GofReport> {
    let n = samples as f64;
    let min_expected = probs.iter().map(|p| p * n).fold(f64::INFINITY, f64::min);
    if min_expected < MIN_EXPECTED {
        return usage(format!(
            "{samples} samples give an expected cell count of {min_expected:.3} < {MIN_EXPECTED}"
        ));
    }
    let statistic: f64 = probs
        .iter()
        .zip(counts)
        .map(|(&p, &c)| {
            let e = p * n;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let dof = probs.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| crate::error::Error::Domain(e.to_string()))?
        .sf(statistic);
    Ok(GofReport {
        sampler: name.to_string(),
        samples,
        cells: probs.len(),
        statistic,
        dof,
        p_value,
        min_expected,
        pass: p_value > SIGNIFICANCE,
    })
}
