//! Equilibration and spectral analysis of probability trajectories.
//!
//! Every function here works on probability rows `p[t][i]` (step `t`, basis
//! state `i`), so synthetic series can be analysed the same way as
//! [`Trajectory::probabilities`](crate::qca::Trajectory).

use std::io::Write;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct AnalysisConfig {
    /// Absolute per-basis-state probability change regarded as quiet.
    pub epsilon: f64,
    /// Number of consecutive quiet transitions required.
    pub window: usize,
    /// Latest step at which equilibration may be detected.
    pub horizon: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            window: 5,
            horizon: 500,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon {} must be > 0",
                self.epsilon
            )));
        }
        if self.window == 0 {
            return Err(Error::InvalidArgument("window must be >= 1".into()));
        }
        if self.horizon < self.window {
            return Err(Error::InvalidArgument(format!(
                "horizon {} shorter than window {}",
                self.horizon, self.window
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EquilibrationReport {
    pub equilibrated: bool,
    pub t_eq: Option<usize>,
    /// Mean of the `window + 1` rows starting at `t_eq`, or of the final
    /// `window + 1` rows when no equilibration was found.
    pub equilibrium_probabilities: Vec<f64>,
    pub epsilon_used: f64,
    pub window_used: usize,
}

fn max_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn mean_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let dim = rows[0].len();
    let mut acc = vec![0.0; dim];
    for row in rows {
        for (a, p) in acc.iter_mut().zip(row) {
            *a += p;
        }
    }
    acc.iter().map(|a| a / rows.len() as f64).collect()
}

fn check_rows(rows: &[Vec<f64>]) -> Result<()> {
    let Some(first) = rows.first() else {
        return Err(Error::TrajectoryTooShort("no probability rows".into()));
    };
    if rows.iter().any(|r| r.len() != first.len()) || first.is_empty() {
        return Err(Error::DimensionMismatch(
            "probability rows differ in length".into(),
        ));
    }
    Ok(())
}

/// Smallest `t ≤ horizon` after which `window` consecutive transitions all
/// change every probability by less than `epsilon`.
pub fn equilibration_time(rows: &[Vec<f64>], cfg: &AnalysisConfig) -> Result<EquilibrationReport> {
    cfg.validate()?;
    check_rows(rows)?;
    let w = cfg.window;
    if rows.len() < w + 1 {
        return Err(Error::TrajectoryTooShort(format!(
            "{} rows, window {w} needs at least {}",
            rows.len(),
            w + 1
        )));
    }
    let changes: Vec<f64> = rows.windows(2).map(|p| max_change(&p[0], &p[1])).collect();
    let mut quiet_run = 0usize;
    let mut t_eq = None;
    for (s, &c) in changes.iter().enumerate() {
        quiet_run = if c < cfg.epsilon { quiet_run + 1 } else { 0 };
        if quiet_run == w {
            let t = s + 1 - w;
            if t <= cfg.horizon {
                t_eq = Some(t);
            }
            break;
        }
    }
    let span = match t_eq {
        Some(t) => &rows[t..=t + w],
        None => &rows[rows.len() - (w + 1)..],
    };
    Ok(EquilibrationReport {
        equilibrated: t_eq.is_some(),
        t_eq,
        equilibrium_probabilities: mean_rows(span),
        epsilon_used: cfg.epsilon,
        window_used: w,
    })
}

/// `d(t) = ‖p(t) − p̄‖₂` where `p̄` is the mean of the final `window + 1`
/// rows (all rows if fewer).
pub fn l2_convergence(rows: &[Vec<f64>], window: usize) -> Result<Vec<f64>> {
    check_rows(rows)?;
    let tail = (window + 1).min(rows.len());
    let mean = mean_rows(&rows[rows.len() - tail..]);
    Ok(rows
        .iter()
        .map(|r| {
            r.iter()
                .zip(&mean)
                .map(|(p, m)| (p - m).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

pub fn write_series_csv<W: Write>(header: [&str; 2], values: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for (t, v) in values.iter().enumerate() {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub const DEFAULT_DOMINANT_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumReport {
    /// Number of samples `T` fed to the transform.
    pub samples: usize,
    /// Bin indices `0..=T/2`; bin `k` is `k/T` cycles per step.
    pub frequencies: Vec<usize>,
    /// One-sided power per bin, summed over basis states and scaled by `1/T`
    /// so that the total equals the mean-subtracted sum of squares.
    pub power: Vec<f64>,
    /// Non-DC bins above `threshold_fraction` of the largest non-DC power.
    pub dominant: Vec<usize>,
    pub threshold_fraction: f64,
}

impl SpectrumReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin", "power"])?;
        for (k, p) in self.frequencies.iter().zip(&self.power) {
            w.write_record([k.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Power spectrum of the mean-subtracted probability series over all rows.
pub fn fourier_spectrum(rows: &[Vec<f64>], threshold_fraction: f64) -> Result<SpectrumReport> {
    check_rows(rows)?;
    let t_len = rows.len();
    if t_len < 8 {
        return Err(Error::TrajectoryTooShort(format!(
            "{t_len} samples, spectrum needs at least 8"
        )));
    }
    let dim = rows[0].len();
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(t_len);
    let bins = t_len / 2 + 1;
    let mut power = vec![0.0; bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); t_len];
    for i in 0..dim {
        let mean = rows.iter().map(|r| r[i]).sum::<f64>() / t_len as f64;
        for (b, r) in buf.iter_mut().zip(rows) {
            *b = Complex64::new(r[i] - mean, 0.0);
        }
        fft.process(&mut buf);
        for (k, p) in power.iter_mut().enumerate() {
            let mirror = t_len - k;
            let mut sq = buf[k].norm_sqr();
            if k != 0 && mirror != k {
                sq += buf[mirror].norm_sqr();
            }
            *p += sq / t_len as f64;
        }
    }
    let peak = power[1..].iter().cloned().fold(0.0, f64::max);
    let dominant = if peak > 0.0 {
        (1..bins)
            .filter(|&k| power[k] > threshold_fraction * peak)
            .collect()
    } else {
        Vec::new()
    };
    Ok(SpectrumReport {
        samples: t_len,
        frequencies: (0..bins).collect(),
        power,
        dominant,
        threshold_fraction,
    })
}

/// Shannon entropy in bits, with `0·log 0 = 0`. Inputs are renormalized.
pub fn shannon_entropy(probabilities: &[f64]) -> Result<f64> {
    if probabilities.is_empty() {
        return Err(Error::InvalidArgument(
            "entropy of an empty distribution".into(),
        ));
    }
    if let Some(p) = probabilities.iter().find(|&&p| !(p >= -1e-12)) {
        return Err(Error::InvalidArgument(format!("negative probability {p}")));
    }
    let total: f64 = probabilities.iter().map(|p| p.max(0.0)).sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "probabilities sum to {total}"
        )));
    }
    let h = probabilities
        .iter()
        .map(|p| p.max(0.0) / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>();
    Ok(h.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qca::{build_global_operator, evolve, LocalRule};
    use crate::qlin::StateVector;
    use proptest::prelude::*;

    fn constant(t: usize) -> Vec<Vec<f64>> {
        vec![vec![0.25, 0.75]; t]
    }

    #[test]
    fn constant_trajectory_equilibrates_immediately() {
        let r = equilibration_time(&constant(20), &AnalysisConfig::default()).unwrap();
        assert_eq!(r.t_eq, Some(0));
        assert_eq!(r.equilibrium_probabilities, vec![0.25, 0.75]);
    }

    #[test]
    fn cnot_fixed_point_equilibrates_immediately() {
        let g = build_global_operator(&LocalRule::cnot(), 3).unwrap();
        let traj = evolve(&StateVector::basis(3, 0).unwrap(), &g, 10).unwrap();
        let r = equilibration_time(&traj.probabilities, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.t_eq, Some(0));
    }

    #[test]
    fn single_jump_then_quiet() {
        let mut rows = Vec::new();
        for t in 0..12 {
            rows.push(if t <= 3 {
                vec![0.5, 0.5]
            } else {
                vec![0.6, 0.4]
            });
        }
        let r = equilibration_time(&rows, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.t_eq, Some(4));
        assert!(r.equilibrated);
        // the quiet run before the jump is only three transitions long
        let r = equilibration_time(
            &rows,
            &AnalysisConfig {
                window: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.t_eq, Some(0));
    }

    #[test]
    fn horizon_censors() {
        let mut rows: Vec<Vec<f64>> = (0..30)
            .map(|t| vec![0.5 + 0.1 * (t % 2) as f64, 0.5 - 0.1 * (t % 2) as f64])
            .collect();
        rows.extend(vec![vec![0.5, 0.5]; 10]);
        let cfg = AnalysisConfig {
            horizon: 10,
            ..Default::default()
        };
        let r = equilibration_time(&rows, &cfg).unwrap();
        assert!(!r.equilibrated && r.t_eq.is_none());
        assert!((r.equilibrium_probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let r = equilibration_time(&rows, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.t_eq, Some(30));
    }

    #[test]
    fn too_short_or_bad_config() {
        assert!(matches!(
            equilibration_time(&constant(5), &AnalysisConfig::default()),
            Err(Error::TrajectoryTooShort(_))
        ));
        assert!(equilibration_time(&constant(6), &AnalysisConfig::default()).is_ok());
        let bad = AnalysisConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(equilibration_time(&constant(20), &bad).is_err());
    }

    #[test]
    fn l2_examples() {
        assert!(l2_convergence(&constant(10), 5)
            .unwrap()
            .iter()
            .all(|&d| d == 0.0));
        let mut rows = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        rows.extend(vec![vec![0.2, 0.8]; 10]);
        let d = l2_convergence(&rows, 5).unwrap();
        assert!(d[2..].iter().all(|&x| x < 1e-15));
        assert!(d[0] > 0.0);

        // period-6 cosine: the 6-row tail averages to exactly (0.5, 0.5)
        let a = 0.1;
        let rows: Vec<Vec<f64>> = (0..24)
            .map(|t| {
                let c = a * (std::f64::consts::TAU * t as f64 / 6.0).cos();
                vec![0.5 + c, 0.5 - c]
            })
            .collect();
        let d = l2_convergence(&rows, 5).unwrap();
        for (t, dt) in d.iter().enumerate() {
            let expect = 2f64.sqrt() * a * (std::f64::consts::TAU * t as f64 / 6.0).cos().abs();
            assert!((dt - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_of_constant_is_empty() {
        let s = fourier_spectrum(&constant(16), DEFAULT_DOMINANT_FRACTION).unwrap();
        assert!(s.power[1..].iter().all(|&p| p == 0.0));
        assert!(s.dominant.is_empty());
        assert_eq!(s.frequencies.len(), 9);
        assert!(fourier_spectrum(&constant(7), 0.1).is_err());
    }

    #[test]
    fn spectrum_of_period_four_cosine() {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|t| {
                let c = 0.1 * (std::f64::consts::TAU * t as f64 / 4.0).cos();
                vec![0.5 + c, 0.5 - c]
            })
            .collect();
        let s = fourier_spectrum(&rows, DEFAULT_DOMINANT_FRACTION).unwrap();
        assert_eq!(s.dominant, vec![2]);
    }

    fn direct_sum_of_squares(rows: &[Vec<f64>]) -> f64 {
        let t = rows.len() as f64;
        (0..rows[0].len())
            .map(|i| {
                let m = rows.iter().map(|r| r[i]).sum::<f64>() / t;
                rows.iter().map(|r| (r[i] - m).powi(2)).sum::<f64>()
            })
            .sum()
    }

    proptest! {
        #[test]
        fn parseval(len in 8usize..40, seed in any::<u64>()) {
            let mut x = seed | 1;
            let mut next = || { x ^= x << 13; x ^= x >> 7; x ^= x << 17; (x >> 11) as f64 / (1u64 << 53) as f64 };
            let rows: Vec<Vec<f64>> = (0..len).map(|_| { let a = next(); let b = next(); vec![a, b, 1.0 - a - b] }).collect();
            let s = fourier_spectrum(&rows, 0.1).unwrap();
            let total: f64 = s.power.iter().sum();
            let direct = direct_sum_of_squares(&rows);
            prop_assert!((total - direct).abs() <= 1e-8 * direct.max(1e-300));
        }

        #[test]
        fn equilibration_monotone_in_epsilon(steps in proptest::collection::vec(0.0f64..0.01, 10..60), e1 in 1e-4f64..5e-3, e2 in 1e-4f64..5e-3) {
            let mut p = 0.5;
            let rows: Vec<Vec<f64>> = std::iter::once(vec![0.5, 0.5]).chain(steps.iter().map(|s| { p = (p + s) % 1.0; vec![p, 1.0 - p] })).collect();
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let cfg = |e| AnalysisConfig { epsilon: e, window: 3, horizon: 1000 };
            let t_lo = equilibration_time(&rows, &cfg(lo)).unwrap().t_eq.unwrap_or(usize::MAX);
            let t_hi = equilibration_time(&rows, &cfg(hi)).unwrap().t_eq.unwrap_or(usize::MAX);
            prop_assert!(t_lo >= t_hi);
        }

        #[test]
        fn entropy_is_permutation_invariant(raw in proptest::collection::vec(0.0f64..1.0, 8), rot in 0usize..8) {
            let total: f64 = raw.iter().sum::<f64>() + 1e-9;
            let p: Vec<f64> = raw.iter().map(|x| (x + 1e-9 / 8.0) / total).collect();
            let mut q = p.clone();
            q.rotate_left(rot);
            let (a, b) = (shannon_entropy(&p).unwrap(), shannon_entropy(&q).unwrap());
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=3.0 + 1e-12).contains(&a));
        }
    }

    #[test]
    fn equilibrium_stable_under_extension() {
        let mut rows = vec![vec![1.0, 0.0], vec![0.7, 0.3], vec![0.6, 0.4]];
        rows.extend(vec![vec![0.6, 0.4]; 8]);
        let a = equilibration_time(&rows, &AnalysisConfig::default()).unwrap();
        rows.extend(vec![vec![0.6, 0.4]; 20]);
        let b = equilibration_time(&rows, &AnalysisConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn entropy_examples() {
        let mut e = vec![0.0; 8];
        e[0] = 1.0;
        assert_eq!(shannon_entropy(&e).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.125; 8]).unwrap() - 3.0).abs() < 1e-12);
        assert!((shannon_entropy(&[0.5, 0.5, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(shannon_entropy(&[1.1, -0.1]).is_err());
        assert!(shannon_entropy(&[0.3, 0.3]).is_err());
    }
}
