//! Empirical rate curves, cumulant-limit tables and law-of-large-numbers
//! tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::event::{event_log_prob, EventSpec, KnScale};
use super::regime::{speed, ScalingRegime, SpeedKind};
use crate::error::{usage, Result};
use crate::exact::{dirichlet_k_log_pmf, kn_log_mgf, kn_mean};
use crate::partition::AllelePartition;
use crate::rates::{
    cgf_limit, kn_lln_limit, rate_ageclass_regime, rate_esf, rate_kn_regime, RegimeCase,
};
use crate::table::Table;

pub const FIT_MODEL: &str = "rate = r_inf + C / speed (least squares)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub theta: f64,
    pub n: u64,
    pub speed: f64,
    pub log_prob: f64,
    pub empirical_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub target_rate: f64,
    /// Fitted `r_inf`.
    pub extrapolated: f64,
    /// Fitted `C`.
    pub correction: f64,
    pub residual_rms: f64,
    pub model: String,
}

impl ConvergenceTable {
    fn from_rows(rows: Vec<ConvergenceRow>, target_rate: f64) -> Self {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (1.0 / r.speed, r.empirical_rate))
            .collect();
        let (extrapolated, correction, residual_rms) = fit_line(&points);
        ConvergenceTable {
            rows,
            target_rate,
            extrapolated,
            correction,
            residual_rms,
            model: FIT_MODEL.to_string(),
        }
    }

    /// `|C| / speed` at the smallest speed on the grid.
    pub fn correction_scale(&self) -> f64 {
        let min_speed = self
            .rows
            .iter()
            .map(|r| r.speed)
            .fold(f64::INFINITY, f64::min);
        self.correction.abs() / min_speed
    }

    /// Residual RMS within 10% of the largest fitted correction.
    pub fn residuals_ok(&self) -> bool {
        self.residual_rms <= 0.1 * self.correction_scale()
    }

    pub fn error(&self) -> f64 {
        (self.extrapolated - self.target_rate).abs()
    }

    pub fn to_table(&self, title: &str) -> Table {
        let mut t = Table::new(
            title,
            &["theta", "n", "speed", "log_prob", "empirical_rate"],
        );
        for r in &self.rows {
            t.push(vec![
                r.theta,
                r.n as f64,
                r.speed,
                r.log_prob,
                r.empirical_rate,
            ]);
        }
        t.set_meta("target_rate", self.target_rate);
        t.set_meta("extrapolated", self.extrapolated);
        t.set_meta("correction", self.correction);
        t.set_meta("residual_rms", self.residual_rms);
        t.set_meta("model", &self.model);
        t
    }
}

/// Least-squares line `y = a + b x`; returns `(a, b, residual rms)`.
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let ss: f64 = points.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
    (a, b, (ss / n).sqrt())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 4 {
        return usage(format!("grid needs at least 4 points, got {}", grid.len()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
        return usage("grid must be positive and strictly increasing");
    }
    Ok(())
}

/// Rate the regime assigns to the event (at the ball centre for balls).
pub fn event_target_rate(case: &RegimeCase, ev: &EventSpec) -> Result<f64> {
    match ev {
        EventSpec::PartitionPoint { a } => Ok(rate_esf(a) as f64),
        EventSpec::KnPoint { k } => rate_kn_regime(case, *k as f64),
        EventSpec::KnBall { center, .. } => rate_kn_regime(case, *center),
        EventSpec::AgeClassPoint { ks } => {
            let args: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
            rate_ageclass_regime(case, &args)
        }
        EventSpec::AgeClassBall { center, .. } => rate_ageclass_regime(case, &[*center]),
        EventSpec::AgeClassJointBall { centers, .. } => rate_ageclass_regime(case, centers),
    }
}

/// Empirical rates `-ln P(event)/speed` along a `θ` grid with their
/// `1/speed` extrapolation. Age-class events use `γ`, the others `α`.
pub fn rate_curve(
    regime: &ScalingRegime,
    ev: &EventSpec,
    theta_grid: &[f64],
) -> Result<ConvergenceTable> {
    check_grid(theta_grid)?;
    let which = if ev.is_age_class() {
        SpeedKind::Gamma
    } else {
        SpeedKind::Alpha
    };
    let target = event_target_rate(&regime.case, ev)?;
    let rows = theta_grid
        .par_iter()
        .map(|&theta| {
            let n = regime.n_at(theta)?;
            let s = speed(regime, which, theta)?;
            let lp = event_log_prob(theta, n, ev)?.ln();
            Ok(ConvergenceRow {
                theta,
                n,
                speed: s,
                log_prob: lp,
                empirical_rate: -lp / s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_rows(rows, target))
}

/// How `θ` grows with the number of alleles `K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ThetaOfK {
    /// `θ = c K`.
    Proportional { c: f64 },
    /// `θ = K^e`.
    Power { exponent: f64 },
}

impl ThetaOfK {
    pub fn theta(&self, alleles: f64) -> f64 {
        match *self {
            ThetaOfK::Proportional { c } => c * alleles,
            ThetaOfK::Power { exponent } => alleles.powf(exponent),
        }
    }
}

/// Empirical rates `-ln P(A_n = a)/ln K` under the `K`-allele Dirichlet
/// sampling formula; the `theta` column holds `θ(K)` and `n` holds `K`.
pub fn dirichlet_rate_curve(
    a: &AllelePartition,
    k_grid: &[u64],
    coupling: ThetaOfK,
) -> Result<ConvergenceTable> {
    let as_f: Vec<f64> = k_grid.iter().map(|&k| k as f64).collect();
    check_grid(&as_f)?;
    let rows = k_grid
        .par_iter()
        .map(|&k| {
            let theta = coupling.theta(k as f64);
            let s = (k as f64).ln();
            let lp = dirichlet_k_log_pmf(theta, k, a)?.ln();
            Ok(ConvergenceRow {
                theta,
                n: k,
                speed: s,
                log_prob: lp,
                empirical_rate: -lp / s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_rows(rows, rate_esf(a) as f64))
}

/// Rows `(t, (1/α) ln M(βt), Λ(t), difference)` at one `θ`.
pub fn mgf_limit_curve(regime: &ScalingRegime, t_grid: &[f64], theta: f64) -> Result<Table> {
    let n = regime.n_at(theta)?;
    let alpha = speed(regime, SpeedKind::Alpha, theta)?;
    let beta = speed(regime, SpeedKind::Beta, theta)?;
    let rows = t_grid
        .par_iter()
        .map(|&t| {
            let lhs = kn_log_mgf(theta, n, beta * t)? / alpha;
            let lim = cgf_limit(&regime.case, t)?;
            Ok(vec![t, lhs, lim, lhs - lim])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(
        format!("cumulant limit, case {}", regime.case.letter()),
        &["t", "scaled_log_mgf", "limit", "difference"],
    );
    let max_diff = rows.iter().map(|r| r[3].abs()).fold(0.0, f64::max);
    for r in rows {
        table.push(r);
    }
    table.set_meta("theta", theta);
    table.set_meta("n", n);
    table.set_meta("alpha", alpha);
    table.set_meta("beta", beta);
    table.set_meta("max_abs_difference", max_diff);
    Ok(table)
}

/// Rows `(θ, n, normalized E K_n, limit, difference)`.
pub fn lln_table(regime: &ScalingRegime, theta_grid: &[f64]) -> Result<Table> {
    let scale = KnScale::for_case(&regime.case);
    let target = kn_lln_limit(&regime.case);
    let mut table = Table::new(
        format!("mean of K_n, case {}", regime.case.letter()),
        &["theta", "n", "normalized_mean", "limit", "difference"],
    );
    for &theta in theta_grid {
        let n = regime.n_at(theta)?;
        let mean = kn_mean(theta, n)? / scale.normalizer(theta, n);
        table.push(vec![theta, n as f64, mean, target, mean - target]);
    }
    Ok(table)
}

/// `θ_0 · factor^i`, `i = 0..count`.
pub fn geometric_grid(start: f64, factor: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start * factor.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decades(from: i32, to: i32) -> Vec<f64> {
        (from..=to).map(|e| 10f64.powi(e)).collect()
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
        let (a, b, rms) = fit_line(&pts);
        assert!((a - 2.0).abs() < 1e-14 && (b + 0.5).abs() < 1e-14 && rms < 1e-14);
    }

    #[test]
    fn esf_point_curve() {
        let a = AllelePartition::new(vec![0, 2, 0, 0]).unwrap();
        let table = rate_curve(
            &ScalingRegime::case_a(4),
            &EventSpec::PartitionPoint { a },
            &decades(2, 10),
        )
        .unwrap();
        assert_eq!(table.target_rate, 2.0);
        assert!(table.error() <= 0.02, "{}", table.extrapolated);
        // the leading correction is -ln 3
        assert!((table.correction + 3f64.ln()).abs() < 0.1);
        assert!(table.residuals_ok());
        assert!(table.rows.windows(2).all(|w| w[0].theta < w[1].theta));
    }

    #[test]
    fn kn_and_ageclass_curves() {
        let kn = rate_curve(
            &ScalingRegime::case_a(6),
            &EventSpec::KnPoint { k: 3 },
            &decades(2, 10),
        )
        .unwrap();
        assert!((kn.extrapolated - 3.0).abs() <= 0.02);
        let age = rate_curve(
            &ScalingRegime::case_a(8),
            &EventSpec::AgeClassPoint { ks: vec![3] },
            &decades(2, 10),
        )
        .unwrap();
        assert!((age.extrapolated - 2.0).abs() <= 0.05);
    }

    #[test]
    fn grid_validation() {
        let r = ScalingRegime::case_a(4);
        let ev = EventSpec::KnPoint { k: 2 };
        assert!(rate_curve(&r, &ev, &[10.0, 100.0, 1000.0]).is_err());
        assert!(rate_curve(&r, &ev, &[10.0, 100.0, 50.0, 1000.0]).is_err());
    }

    #[test]
    fn dirichlet_curves() {
        let grid: Vec<u64> = (2..=8).map(|e| 10u64.pow(e)).collect();
        let a = AllelePartition::new(vec![2, 1, 0, 0]).unwrap();
        for coupling in [
            ThetaOfK::Proportional { c: 1.0 },
            ThetaOfK::Power { exponent: 2.0 },
        ] {
            let t = dirichlet_rate_curve(&a, &grid, coupling).unwrap();
            assert!(t.error() <= 0.05, "{coupling:?} {}", t.extrapolated);
        }
    }

    #[test]
    fn mgf_case_c() {
        let regime = ScalingRegime::case_c(1.0).unwrap();
        let ts: Vec<f64> = (0..=20).map(|i| -2.0 + 0.2 * i as f64).collect();
        let table = mgf_limit_curve(&regime, &ts, 1e4).unwrap();
        let worst = table
            .column("difference")
            .unwrap()
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()));
        assert!(worst <= 0.01, "{worst}");
    }

    #[test]
    fn mgf_case_a_at_one() {
        let table = mgf_limit_curve(&ScalingRegime::case_a(10), &[1.0], 1e8).unwrap();
        assert!(table.rows[0][3].abs() <= 0.05);
    }

    #[test]
    fn lln_examples() {
        let c = lln_table(&ScalingRegime::case_c(1.0).unwrap(), &[1e4]).unwrap();
        assert!(c.rows[0][4].abs() <= 1e-3);
        let a = lln_table(&ScalingRegime::case_a(5), &[1e6]).unwrap();
        assert!(a.rows[0][2] >= 4.99);
        let d = ScalingRegime::through(RegimeCase::D, 1e2, 100_000_000, 2.0);
        let d = lln_table(&d, &[1e2]).unwrap();
        assert_eq!(d.rows[0][1], 1e8);
        assert!(d.rows[0][4].abs() <= 0.02);
    }

    #[test]
    fn grid_helper() {
        let g = geometric_grid(1e2, 10.0, 9);
        assert_eq!(g.len(), 9);
        assert!((g[8] - 1e10).abs() < 1e-3);
    }
}
