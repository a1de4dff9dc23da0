//! Warm-start advantage statistics and scaling-law extrapolation.
//!
//! Epoch-ratio points compare how many epochs cold- and warm-started runs
//! need between an initial and a final approximation-ratio target, paired by
//! rank after sorting both sides by initial Hamming distance. The fitted
//! ratio model, the epoch-to-solution law, and the per-epoch timing law
//! combine into a total-processing-time model that is inverted to bound the
//! graph size solvable within a fixed compute budget.

use serde::{Deserialize, Serialize};

use crate::annealer::{InitKind, RunRecord};
use crate::error::{Error, Result};

/// Epoch-ratio model: `y(x) = 1 / (c1 (exp(beta x) - 1))` for `x = HD/N`.
pub fn epoch_ratio_model(x: f64, c1: f64, beta: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::ZeroHammingDistance);
    }
    if x < 0.0 || c1 <= 0.0 || beta <= 0.0 {
        return Err(Error::InvalidParam(
            "epoch ratio model requires x > 0, c1 > 0, beta > 0".into(),
        ));
    }
    Ok(1.0 / (c1 * ((beta * x).exp() - 1.0)))
}

/// Where a ratio point's warm-start side came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioSource {
    ModelPipeline,
    Aqc,
    Qe,
}

impl RatioSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            RatioSource::ModelPipeline => "model_pipeline",
            RatioSource::Aqc => "aqc",
            RatioSource::Qe => "qe",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "model_pipeline" => Ok(RatioSource::ModelPipeline),
            "aqc" => Ok(RatioSource::Aqc),
            "qe" => Ok(RatioSource::Qe),
            other => Err(Error::Format(format!("unknown ratio source {other:?}"))),
        }
    }
}

impl From<InitKind> for RatioSource {
    fn from(kind: InitKind) -> Self {
        match kind {
            InitKind::WarmStartAqc => RatioSource::Aqc,
            InitKind::WarmStartQe => RatioSource::Qe,
            InitKind::RandomMatched | InitKind::Explicit => RatioSource::ModelPipeline,
        }
    }
}

/// One cold/warm epoch-count comparison.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RatioPoint {
    pub hd_over_n: f64,
    pub epoch_ratio: f64,
    pub n: u32,
    pub source: RatioSource,
}

/// Builds epoch-ratio points from cold (`sa`) and warm-started run records.
///
/// For each initial target `alpha_i`, every record contributes the epoch
/// difference between its first `alpha_final` crossing and its first
/// `alpha_i` crossing. The cold differences are paired with the warm
/// differences after sorting both sides by initial Hamming distance,
/// truncating to the shorter list. Records that never cross a target, or
/// whose difference is zero, are excluded.
pub fn build_ratio_points(
    sa_records: &[RunRecord],
    warm_records: &[RunRecord],
    alpha_initials: &[f64],
    alpha_final: f64,
) -> Vec<RatioPoint> {
    let mut points = Vec::new();
    for &alpha_i in alpha_initials {
        // HD ties break on the record seed, a key independent of the epoch
        // difference, so tie blocks cannot impose an artificial ordering on
        // the paired differences.
        let collect = |records: &[RunRecord]| -> Vec<(u32, u32, u32, RatioSource)> {
            let mut keyed: Vec<(u32, u64, u32, u32, RatioSource)> = records
                .iter()
                .filter_map(|r| {
                    let at_initial = r.first_crossing(alpha_i)?;
                    let at_final = r.first_crossing(alpha_final)?;
                    let diff = at_final.checked_sub(at_initial)?;
                    (diff > 0).then_some((
                        r.initial_hd,
                        r.seed,
                        diff,
                        r.n() as u32,
                        RatioSource::from(r.init_kind),
                    ))
                })
                .collect();
            keyed.sort_by_key(|&(hd, seed, _, _, _)| (hd, seed));
            keyed
                .into_iter()
                .map(|(hd, _, diff, n, source)| (hd, diff, n, source))
                .collect()
        };
        let sa_diffs = collect(sa_records);
        let warm_diffs = collect(warm_records);
        for (&(_, sa_diff, _, _), &(hd, warm_diff, n, source)) in
            sa_diffs.iter().zip(&warm_diffs)
        {
            points.push(RatioPoint {
                hd_over_n: hd as f64 / n as f64,
                epoch_ratio: sa_diff as f64 / warm_diff as f64,
                n,
                source,
            });
        }
    }
    points
}

/// Fitted parameters of the epoch-ratio model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochRatioFit {
    pub c1: f64,
    pub beta: f64,
    pub r2_adj: f64,
}

/// Fits the epoch-ratio model by least squares on the transformed relation
/// `ln(1/y + c1) = ln c1 + beta x`: a 1-D search over `c1` alternates with a
/// fixed-intercept linear regression for `beta`. The adjusted R^2 is
/// computed on the untransformed residuals.
pub fn fit_epoch_ratio(points: &[RatioPoint]) -> Result<EpochRatioFit> {
    if points.len() < 3 {
        return Err(Error::FitFailed(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.hd_over_n).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.epoch_ratio).collect();
    if ys.iter().any(|&y| !(y > 0.0) || !y.is_finite()) {
        return Err(Error::FitFailed("ratios must be positive and finite".into()));
    }
    let x0 = xs[0];
    if xs.iter().all(|&x| x == x0) {
        return Err(Error::FitFailed("degenerate x values".into()));
    }
    let sum_x2: f64 = xs.iter().map(|x| x * x).sum();
    if sum_x2 == 0.0 {
        return Err(Error::FitFailed("degenerate x values".into()));
    }

    // beta by regression of ln(1/y + c1) on x with the intercept pinned at
    // ln(c1); the 1-D search over ln(c1) scores candidates on the
    // untransformed residuals (the transformed residuals degenerate as
    // c1 grows, since every z is squeezed toward ln(c1)).
    let beta_for = |c1: f64| -> f64 {
        let ln_c1 = c1.ln();
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| x * ((1.0 / y + c1).ln() - ln_c1))
            .sum::<f64>()
            / sum_x2
    };
    let sse_for = |c1: f64| -> f64 {
        let beta = beta_for(c1);
        if beta <= 0.0 {
            return f64::INFINITY;
        }
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let r = y - 1.0 / (c1 * ((beta * x).exp() - 1.0));
                r * r
            })
            .sum()
    };

    // Coarse grid over ln(c1), then golden-section refinement.
    let (ln_lo, ln_hi) = ((1e-6f64).ln(), (1e3f64).ln());
    let grid = 240usize;
    let mut best_k = 0usize;
    let mut best_sse = f64::INFINITY;
    for k in 0..=grid {
        let ln_c1 = ln_lo + (ln_hi - ln_lo) * k as f64 / grid as f64;
        let sse = sse_for(ln_c1.exp());
        if sse < best_sse {
            best_sse = sse;
            best_k = k;
        }
    }
    let step = (ln_hi - ln_lo) / grid as f64;
    let mut a = ln_lo + step * (best_k.saturating_sub(1)) as f64;
    let mut b = (ln_lo + step * (best_k + 1) as f64).min(ln_hi);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (sse_for(c.exp()), sse_for(d.exp()));
    while (b - a).abs() > 1e-13 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = sse_for(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = sse_for(d.exp());
        }
    }
    let c1 = (0.5 * (a + b)).exp();
    let beta = beta_for(c1);
    if !(c1 > 0.0 && beta > 0.0) {
        return Err(Error::FitFailed(format!(
            "fit did not converge to positive parameters (c1={c1}, beta={beta})"
        )));
    }

    let predicted: Vec<f64> = xs
        .iter()
        .map(|&x| epoch_ratio_model(x, c1, beta))
        .collect::<Result<_>>()?;
    let r2_adj = adjusted_r2(&ys, &predicted, 2);
    Ok(EpochRatioFit { c1, beta, r2_adj })
}

/// Adjusted coefficient of determination with `p` model parameters.
pub fn adjusted_r2(observed: &[f64], predicted: &[f64], p: usize) -> f64 {
    let m = observed.len();
    let mean = observed.iter().sum::<f64>() / m as f64;
    let ss_tot: f64 = observed.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(y, f)| (y - f).powi(2))
        .sum();
    if ss_res == 0.0 {
        return 1.0;
    }
    if ss_tot == 0.0 || m <= p + 1 {
        return f64::NAN;
    }
    let r2 = 1.0 - ss_res / ss_tot;
    1.0 - (1.0 - r2) * (m - 1) as f64 / (m - p - 1) as f64
}

/// Epoch-to-solution law: `a n b^sqrt(n)`.
pub fn ets_model(n: u32, a: f64, b: f64) -> f64 {
    a * n as f64 * b.powf((n as f64).sqrt())
}

fn linear_regression(xs: &[f64], zs: &[f64]) -> Result<(f64, f64)> {
    let m = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_z = zs.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailed("degenerate x values".into()));
    }
    let sxz: f64 = xs
        .iter()
        .zip(zs)
        .map(|(x, z)| (x - mean_x) * (z - mean_z))
        .sum();
    let slope = sxz / sxx;
    Ok((mean_z - slope * mean_x, slope))
}

fn require_distinct_n(series: &[(u32, f64)]) -> Result<()> {
    let mut ns: Vec<u32> = series.iter().map(|&(n, _)| n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::FitFailed(format!(
            "need at least 3 distinct n, got {}",
            ns.len()
        )));
    }
    Ok(())
}

/// Fits the epoch-to-solution law by regressing `ln(epochs/n)` on `sqrt(n)`;
/// returns `(a, b, r2_adj)` with the adjusted R^2 on the log scale.
pub fn fit_ets(series: &[(u32, f64)]) -> Result<(f64, f64, f64)> {
    require_distinct_n(series)?;
    if series.iter().any(|&(n, e)| n == 0 || e <= 0.0) {
        return Err(Error::FitFailed("epochs must be positive".into()));
    }
    let xs: Vec<f64> = series.iter().map(|&(n, _)| (n as f64).sqrt()).collect();
    let zs: Vec<f64> = series
        .iter()
        .map(|&(n, e)| (e / n as f64).ln())
        .collect();
    let (intercept, slope) = linear_regression(&xs, &zs)?;
    let predicted: Vec<f64> = xs.iter().map(|x| intercept + slope * x).collect();
    Ok((intercept.exp(), slope.exp(), adjusted_r2(&zs, &predicted, 2)))
}

/// Fits the per-epoch timing law `t = c n^d` by log-log regression; returns
/// `(c, d, r2_adj)` with `c` in the units of the input times.
pub fn fit_t_step(timings: &[(u32, f64)]) -> Result<(f64, f64, f64)> {
    require_distinct_n(timings)?;
    if timings.iter().any(|&(n, t)| n == 0 || t <= 0.0) {
        return Err(Error::FitFailed("times must be positive".into()));
    }
    let xs: Vec<f64> = timings.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let zs: Vec<f64> = timings.iter().map(|&(_, t)| t.ln()).collect();
    let (intercept, slope) = linear_regression(&xs, &zs)?;
    let predicted: Vec<f64> = xs.iter().map(|x| intercept + slope * x).collect();
    Ok((intercept.exp(), slope, adjusted_r2(&zs, &predicted, 2)))
}

/// Total processing time in seconds: `(a n b^sqrt(n)) * (c_us n^d)`, with
/// the per-epoch coefficient `c_us` in microseconds.
pub fn t_processing(n: u32, a: f64, b: f64, c_us: f64, d: f64) -> f64 {
    ets_model(n, a, b) * c_us * 1e-6 * (n as f64).powf(d)
}

/// Fitted scaling constants for one run series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub a: f64,
    pub b: f64,
    /// Per-epoch time coefficient, microseconds.
    pub c_us: f64,
    pub d: f64,
    pub r2_adj_ets: f64,
    pub r2_adj_tstep: f64,
    pub label: String,
}

impl ScalingFit {
    pub fn t_processing(&self, n: u32) -> f64 {
        t_processing(n, self.a, self.b, self.c_us, self.d)
    }
}

/// Largest graph size whose projected processing time fits the budget,
/// found by exponential bracketing plus bisection.
pub fn extrapolate_nc(budget_seconds: f64, fit: &ScalingFit) -> Result<u64> {
    if !(fit.a > 0.0 && fit.c_us > 0.0 && fit.b >= 1.0) {
        return Err(Error::InvalidParam(
            "scaling fit requires a > 0, c > 0, b >= 1".into(),
        ));
    }
    if budget_seconds <= fit.t_processing(1) {
        return Err(Error::InvalidParam(format!(
            "budget {budget_seconds} s is below the single-vertex processing time {}",
            fit.t_processing(1)
        )));
    }
    let mut hi: u64 = 2;
    while fit.t_processing(hi as u32) <= budget_seconds {
        hi *= 2;
        if hi > 1 << 40 {
            return Err(Error::InvalidParam("budget admits unboundedly large graphs".into()));
        }
    }
    let mut lo = hi / 2; // t(lo) <= budget < t(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fit.t_processing(mid as u32) <= budget_seconds {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Fraction of pairs where the warm-started alpha strictly beats the cold
/// one; ties count one half.
pub fn advantage_fraction(paired_results: &[(f64, f64)]) -> Result<f64> {
    if paired_results.is_empty() {
        return Err(Error::InvalidParam("no paired results".into()));
    }
    let score: f64 = paired_results
        .iter()
        .map(|&(warm, cold)| {
            if warm > cold {
                1.0
            } else if warm == cold {
                0.5
            } else {
                0.0
            }
        })
        .sum();
    Ok(score / paired_results.len() as f64)
}
