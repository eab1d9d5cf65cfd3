//! Couplings `n(θ)` between sample size and mutation rate, and the speeds
//! attached to each regime.

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::rates::RegimeCase;

/// Rule giving the sample size at each `θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Coupling {
    Constant {
        n: u64,
    },
    /// `n = ⌊scale · θ^exponent⌋`.
    Power {
        scale: f64,
        exponent: f64,
    },
}

impl Coupling {
    pub fn n_at(&self, theta: f64) -> Result<u64> {
        match *self {
            Coupling::Constant { n } => Ok(n),
            Coupling::Power { scale, exponent } => {
                // relative nudge so that e.g. (10^9)^{1/3} lands on 1000
                let v = scale * theta.powf(exponent) * (1.0 + 1e-12);
                if !(v >= 1.0) || v > 9.0e15 {
                    return domain(format!("coupling gives n = {v} at θ = {theta}"));
                }
                Ok(v.floor() as u64)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedKind {
    Alpha,
    Beta,
    Gamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRegime {
    pub case: RegimeCase,
    pub coupling: Coupling,
}

impl ScalingRegime {
    /// Case A with fixed `n`.
    pub fn case_a(n: u64) -> Self {
        ScalingRegime {
            case: RegimeCase::A { n },
            coupling: Coupling::Constant { n },
        }
    }

    /// Case B with `n = ⌊scale · θ^b⌋`, `b < 1`.
    pub fn case_b(scale: f64, b: f64) -> Result<Self> {
        if !(b < 1.0) {
            return usage(format!("case B needs exponent < 1, got {b}"));
        }
        Ok(ScalingRegime {
            case: RegimeCase::B,
            coupling: Coupling::Power { scale, exponent: b },
        })
    }

    /// Case C with `n = ⌊θ/c⌋`.
    pub fn case_c(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return usage(format!("case C needs c > 0, got {c}"));
        }
        Ok(ScalingRegime {
            case: RegimeCase::C { c },
            coupling: Coupling::Power {
                scale: 1.0 / c,
                exponent: 1.0,
            },
        })
    }

    /// Case D with `n = ⌊scale · θ^d⌋`, `d > 1`.
    pub fn case_d(scale: f64, d: f64) -> Result<Self> {
        if !(d > 1.0) {
            return usage(format!("case D needs exponent > 1, got {d}"));
        }
        Ok(ScalingRegime {
            case: RegimeCase::D,
            coupling: Coupling::Power { scale, exponent: d },
        })
    }

    /// Power coupling through the point `(θ0, n0)` with the given exponent.
    pub fn through(case: RegimeCase, theta0: f64, n0: u64, exponent: f64) -> Self {
        let coupling = match case {
            RegimeCase::A { n } => Coupling::Constant { n },
            _ => Coupling::Power {
                scale: n0 as f64 / theta0.powf(exponent),
                exponent,
            },
        };
        ScalingRegime { case, coupling }
    }

    pub fn n_at(&self, theta: f64) -> Result<u64> {
        self.coupling.n_at(theta)
    }

    /// Warnings for grids along which `θ/n(θ)` does not behave as the case
    /// requires.
    pub fn check_grid(&self, grid: &[f64]) -> Result<Vec<String>> {
        let ratios: Vec<f64> = grid
            .iter()
            .map(|&t| Ok(t / self.n_at(t)? as f64))
            .collect::<Result<_>>()?;
        let mut warnings = Vec::new();
        let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
        let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
        match self.case {
            RegimeCase::A { n } => {
                if grid.iter().any(|&t| self.n_at(t).ok() != Some(n)) {
                    warnings.push("case A coupling does not keep n fixed".into());
                }
            }
            RegimeCase::B if !increasing => {
                warnings.push("θ/n is not increasing along the grid (case B)".into());
            }
            RegimeCase::C { c } => {
                let last = ratios.last().copied().unwrap_or(c);
                if (last - c).abs() > 0.01 * c {
                    warnings.push(format!("θ/n = {last} at the end of the grid, expected {c}"));
                }
            }
            RegimeCase::D if !decreasing => {
                warnings.push("θ/n is not decreasing along the grid (case D)".into());
            }
            _ => {}
        }
        Ok(warnings)
    }
}

/// `α(θ)`, `β(θ)` or `γ(θ)` for the regime, evaluated at `(θ, n(θ))`.
pub fn speed(regime: &ScalingRegime, which: SpeedKind, theta: f64) -> Result<f64> {
    let n = regime.n_at(theta)? as f64;
    speed_at(&regime.case, which, theta, n)
}

pub fn speed_at(case: &RegimeCase, which: SpeedKind, theta: f64, n: f64) -> Result<f64> {
    use SpeedKind::*;
    let v = match (case, which) {
        (RegimeCase::A { .. }, _) => theta.ln(),
        (RegimeCase::B, Alpha | Gamma) => n * (theta / n).ln(),
        (RegimeCase::B, Beta) => (theta / n).ln(),
        (RegimeCase::C { .. }, Alpha | Gamma) => theta,
        (RegimeCase::C { .. }, Beta) => theta / n,
        (RegimeCase::D, Alpha) => theta * (n / theta).ln(),
        (RegimeCase::D, Beta) => 1.0,
        (RegimeCase::D, Gamma) => theta,
    };
    if !(v > 0.0) || !v.is_finite() {
        return usage(format!(
            "speed {which:?} is not positive for case {} at θ = {theta}, n = {n}",
            case.letter()
        ));
    }
    Ok(v)
}

/// Normalization of `K_n` under which the regime's LDP is stated.
pub fn kn_normalizer(case: &RegimeCase, theta: f64, n: f64) -> f64 {
    match case {
        RegimeCase::A { .. } => 1.0,
        RegimeCase::B | RegimeCase::C { .. } => n,
        RegimeCase::D => theta * (n / theta).ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_examples() {
        let a = ScalingRegime::case_a(5);
        assert!((speed(&a, SpeedKind::Alpha, std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        let c = ScalingRegime::case_c(1.0).unwrap();
        assert_eq!(speed(&c, SpeedKind::Alpha, 1e4).unwrap(), 1e4);
        assert_eq!(speed(&c, SpeedKind::Beta, 1e4).unwrap(), 1.0);
        let d = speed_at(&RegimeCase::D, SpeedKind::Alpha, 1e2, 1e6).unwrap();
        assert!((d - 100.0 * 1e4f64.ln()).abs() < 1e-12);
        assert_eq!(
            speed_at(&RegimeCase::D, SpeedKind::Gamma, 1e2, 1e6).unwrap(),
            1e2
        );
        assert!(speed_at(&RegimeCase::B, SpeedKind::Beta, 10.0, 100.0).is_err());
    }

    #[test]
    fn couplings() {
        let b = ScalingRegime::case_b(1.0, 1.0 / 3.0).unwrap();
        assert_eq!(b.n_at(1e9).unwrap(), 1000);
        assert_eq!(
            ScalingRegime::case_c(1.0).unwrap().n_at(1e4).unwrap(),
            10_000
        );
        let d = ScalingRegime::through(RegimeCase::D, 50.0, 1_000_000, 2.0);
        assert_eq!(d.n_at(50.0).unwrap(), 1_000_000);
        assert!(ScalingRegime::case_b(1.0, 1.5).is_err());
        assert!(ScalingRegime::case_d(1.0, 0.5).is_err());
    }

    #[test]
    fn grid_coherence() {
        let grid: Vec<f64> = (2..=10).map(|e| 10f64.powi(e)).collect();
        let regimes = [
            ScalingRegime::case_a(6),
            ScalingRegime::case_b(1.0, 0.5).unwrap(),
            ScalingRegime::case_c(2.0).unwrap(),
            ScalingRegime::case_d(1.0, 1.5).unwrap(),
        ];
        for r in &regimes {
            assert!(r.check_grid(&grid).unwrap().is_empty(), "{r:?}");
        }
        // a case B label on a case D coupling is flagged
        let wrong = ScalingRegime {
            case: RegimeCase::B,
            coupling: Coupling::Power {
                scale: 1.0,
                exponent: 1.5,
            },
        };
        assert!(!wrong.check_grid(&grid).unwrap().is_empty());
    }
}
