use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Slack allowed on `Σ atoms + tail_bound <= 1`.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomOrder {
    /// Non-increasing, a point of the ordered simplex.
    Descending,
    /// Stick-breaking (size-biased) order.
    Stick,
}

/// A finite prefix of an allele-frequency vector, with a bound on the mass
/// that is not represented by the atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassVector {
    atoms: Vec<f64>,
    order: AtomOrder,
    tail_bound: f64,
}

impl MassVector {
    pub fn new(atoms: Vec<f64>, order: AtomOrder, tail_bound: f64) -> Result<Self> {
        if atoms.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return domain("atoms must be finite and non-negative");
        }
        if !(tail_bound >= 0.0) {
            return domain(format!("tail bound must be non-negative, got {tail_bound}"));
        }
        let total: f64 = atoms.iter().sum();
        if total + tail_bound > 1.0 + MASS_TOLERANCE {
            return domain(format!(
                "atoms sum to {total} and tail bound is {tail_bound}: total exceeds 1"
            ));
        }
        if order == AtomOrder::Descending && atoms.windows(2).any(|w| w[0] < w[1]) {
            return domain("descending mass vector has an increasing pair");
        }
        Ok(MassVector {
            atoms,
            order,
            tail_bound,
        })
    }

    /// Descending vector with no unrepresented mass beyond `1 - Σ atoms`.
    pub fn descending(mut atoms: Vec<f64>) -> Result<Self> {
        atoms.sort_by(|a, b| b.total_cmp(a));
        MassVector::new(atoms, AtomOrder::Descending, 0.0)
    }

    /// `m` atoms of mass `1/m`.
    pub fn uniform(m: usize) -> Self {
        MassVector {
            atoms: vec![1.0 / m as f64; m],
            order: AtomOrder::Descending,
            tail_bound: 0.0,
        }
    }

    #[inline]
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    #[inline]
    pub fn order(&self) -> AtomOrder {
        self.order
    }

    #[inline]
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().sum()
    }

    pub fn into_atoms(self) -> Vec<f64> {
        self.atoms
    }
}
