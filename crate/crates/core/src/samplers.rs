//! Seeded generators for stick-breaking (GEM) weights, Poisson–Dirichlet
//! atoms, symmetric Dirichlet vectors and their size-biased permutation,
//! Ewens partitions and the allele count `K_n`.
//!
//! Every sampler is a pure function of its parameters and a [`SeedSpec`].
//! A seed maps to a ChaCha20 generator keyed by `master_seed` and positioned
//! on stream `stream_index` (`seed_from_u64` followed by `set_stream`), so
//! distinct stream indices give non-overlapping keystreams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exact::check_theta;
use crate::mass::{AtomOrder, MassVector};
use crate::partition::AllelePartition;

/// Upper limit on the number of sticks one `sample_pd` call may break.
pub const MAX_STICKS: usize = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Seed of the `i`-th replicate of a Monte Carlo run based at `self`.
    pub fn replicate(&self, i: u64) -> SeedSpec {
        SeedSpec::new(self.master_seed, self.stream_index.wrapping_add(i))
    }
}

/// Uniform on `(0, 1]`.
#[inline]
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// `ln` of a `Gamma(shape, 1)` variate. Small shapes use
/// `G(a) = G(a+1)·U^{1/a}` in log space so the result never underflows.
fn ln_gamma_variate<R: Rng>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("valid gamma shape");
        g.sample(rng).ln()
    } else {
        let g = Gamma::new(shape + 1.0, 1.0).expect("valid gamma shape");
        g.sample(rng).ln() + open_unit(rng).ln() / shape
    }
}

/// `(V, 1 - V)` for `V ~ Beta(a, b)`, both computed without cancellation.
fn beta_pair<R: Rng>(a: f64, b: f64, rng: &mut R) -> (f64, f64) {
    let lx = ln_gamma_variate(a, rng);
    let ly = ln_gamma_variate(b, rng);
    let v = 1.0 / (1.0 + (ly - lx).exp());
    let w = 1.0 / (1.0 + (lx - ly).exp());
    (v, w)
}

/// Breaks sticks with `Beta(1, θ)` fractions until `stop(count, remaining)`
/// says so. Returns the pieces and the unbroken remainder.
fn break_sticks<R: Rng>(
    theta: f64,
    rng: &mut R,
    mut stop: impl FnMut(usize, f64) -> bool,
) -> (Vec<f64>, f64) {
    let mut atoms = Vec::new();
    let mut remaining = 1.0f64;
    while !stop(atoms.len(), remaining) {
        // U = 1 - V^{1/θ} by inversion
        let log_keep = open_unit(rng).ln() / theta;
        let fraction = -log_keep.exp_m1();
        atoms.push(remaining * fraction);
        remaining *= log_keep.exp();
    }
    (atoms, remaining)
}

/// First `count` GEM weights `X_1 = U_1`, `X_k = (1-U_1)···(1-U_{k-1})U_k`.
/// The tail bound is the unbroken remainder `Π (1 - U_k)`.
pub fn sample_gem(theta: f64, count: usize, seed: SeedSpec) -> Result<MassVector> {
    check_theta(theta)?;
    if count == 0 {
        return domain("GEM sample needs count >= 1");
    }
    let mut rng = seed.rng();
    let (atoms, remaining) = break_sticks(theta, &mut rng, |len, _| len == count);
    MassVector::new(atoms, AtomOrder::Stick, remaining)
}

/// Truncated Poisson–Dirichlet sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdSample {
    /// Largest atoms, descending; `tail_bound` is the unbroken stick mass.
    pub masses: MassVector,
    /// True when the reported atoms are exactly the top atoms of the full
    /// sequence: the smallest reported atom exceeds `eps`, and every atom
    /// not generated is smaller than the remainder, which is below `eps`.
    pub certified: bool,
    pub atoms_generated: usize,
    /// Mass of generated atoms ranked below `top_m`.
    pub discarded_mass: f64,
}

/// Breaks GEM sticks until the remainder drops below `eps`, sorts, and keeps
/// the `top_m` largest atoms.
pub fn sample_pd(theta: f64, top_m: usize, eps: f64, seed: SeedSpec) -> Result<PdSample> {
    check_theta(theta)?;
    if top_m == 0 {
        return domain("top_m must be at least 1");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps must lie in (0, 1), got {eps}"));
    }
    let mut rng = seed.rng();
    let mut overflow = false;
    let (mut atoms, remaining) = break_sticks(theta, &mut rng, |len, rem| {
        if len >= MAX_STICKS {
            overflow = true;
        }
        rem < eps || overflow
    });
    if overflow {
        return Err(Error::Size {
            what: "stick-breaking steps",
            value: MAX_STICKS as u64,
            cap: MAX_STICKS as u64,
        });
    }
    let generated = atoms.len();
    atoms.sort_by(|a, b| b.total_cmp(a));
    let discarded_mass = atoms.iter().skip(top_m).sum();
    atoms.truncate(top_m);
    let certified = atoms.len() == top_m && atoms[top_m - 1] > eps;
    Ok(PdSample {
        masses: MassVector::new(atoms, AtomOrder::Descending, remaining)?,
        certified,
        atoms_generated: generated,
        discarded_mass,
    })
}

/// `K` normalized `Gamma(α)` variates.
pub fn sample_dirichlet_symmetric(alleles: usize, alpha: f64, seed: SeedSpec) -> Result<Vec<f64>> {
    if alleles < 2 {
        return domain("symmetric Dirichlet needs K >= 2");
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return domain(format!("alpha must be finite and positive, got {alpha}"));
    }
    let mut rng = seed.rng();
    let logs: Vec<f64> = (0..alleles)
        .map(|_| ln_gamma_variate(alpha, &mut rng))
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// Stick fractions `V_i ~ Beta(θ/K + 1, (K-i)θ/K)`, `i = 1..K-1`, with their
/// complements.
pub(crate) fn size_biased_fractions(theta: f64, alleles: usize, seed: SeedSpec) -> Vec<(f64, f64)> {
    let mut rng = seed.rng();
    let alpha = theta / alleles as f64;
    (1..alleles)
        .map(|i| beta_pair(alpha + 1.0, (alleles - i) as f64 * alpha, &mut rng))
        .collect()
}

/// Size-biased permutation of `Dirichlet(θ/K, …, θ/K)`:
/// `Y_1 = V_1`, `Y_i = (1-V_1)···(1-V_{i-1})V_i`.
pub fn sample_size_biased_dirichlet(
    theta: f64,
    alleles: usize,
    seed: SeedSpec,
) -> Result<Vec<f64>> {
    check_theta(theta)?;
    if alleles < 2 {
        return domain("size-biased Dirichlet needs K >= 2");
    }
    let mut remaining = 1.0;
    Ok(size_biased_fractions(theta, alleles, seed)
        .into_iter()
        .map(|(v, w)| {
            let y = remaining * v;
            remaining *= w;
            y
        })
        .collect())
}

/// Sequential construction: the `i`-th draw starts a new allele with
/// probability `θ/(θ+i-1)`, otherwise copies a uniformly chosen earlier draw.
pub fn sample_ewens_partition(theta: f64, n: u32, seed: SeedSpec) -> Result<AllelePartition> {
    check_theta(theta)?;
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    let mut rng = seed.rng();
    let mut labels: Vec<u32> = Vec::with_capacity(n as usize);
    let mut sizes: Vec<u32> = Vec::new();
    for i in 0..n {
        let fresh = theta / (theta + i as f64);
        let label = if i == 0 || rng.random::<f64>() < fresh {
            sizes.push(0);
            sizes.len() as u32 - 1
        } else {
            labels[rng.random_range(0..i as usize)]
        };
        sizes[label as usize] += 1;
        labels.push(label);
    }
    AllelePartition::from_block_sizes(n, &sizes)
}

/// `K_n = Σ_{i=1}^n Bernoulli(θ/(θ+i-1))`.
pub fn sample_kn(theta: f64, n: u64, seed: SeedSpec) -> Result<u64> {
    check_theta(theta)?;
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    let mut rng = seed.rng();
    let mut k = 1;
    for i in 1..n {
        if rng.random::<f64>() < theta / (theta + i as f64) {
            k += 1;
        }
    }
    Ok(k)
}
