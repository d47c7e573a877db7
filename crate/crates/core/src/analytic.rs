//! Closed-form relevance-complexity region evaluators for the binary and
//! scalar Gaussian source models, symmetric-rate tradeoff curves, and
//! threshold-point detection.
//!
//! Stage indices are 1-based throughout (`stage 1` is the coarsest
//! description).

use crate::error::{Error, Result};
use crate::prob::{h2, h2_inv, star};

// ---------------------------------------------------------------------------
// Models and region containers
// ---------------------------------------------------------------------------

/// Uniform binary source observed through a symmetric flip with crossover
/// probability `p`: `X = Y xor N`, `N ~ Bern(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryModel {
    p: f64,
    stages: usize,
}

impl BinaryModel {
    pub fn new(p: f64, stages: usize) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::OutOfRange(format!(
                "crossover probability must lie in [0, 1/2], got {p}"
            )));
        }
        if stages == 0 {
            return Err(Error::OutOfRange("stage count must be positive".into()));
        }
        Ok(Self { p, stages })
    }

    pub fn crossover(&self) -> f64 {
        self.p
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    /// Largest achievable relevance, `1 - h2(p)`.
    pub fn max_relevance(&self) -> f64 {
        1.0 - h2(self.p).expect("crossover validated")
    }
}

/// Scalar Gaussian source observed in Gaussian noise: `Y = X + W` with
/// `X ~ N(0, sigma_x2)` and `W ~ N(0, sigma_w2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel {
    sigma_x2: f64,
    sigma_w2: f64,
    stages: usize,
}

impl GaussianModel {
    pub fn new(sigma_x2: f64, sigma_w2: f64, stages: usize) -> Result<Self> {
        if !(sigma_x2 > 0.0) || !(sigma_w2 > 0.0) {
            return Err(Error::OutOfRange(format!(
                "variances must be positive, got sigma_x2={sigma_x2}, sigma_w2={sigma_w2}"
            )));
        }
        if stages == 0 {
            return Err(Error::OutOfRange("stage count must be positive".into()));
        }
        Ok(Self {
            sigma_x2,
            sigma_w2,
            stages,
        })
    }

    /// Model with the given linear signal-to-noise ratio and unit noise.
    pub fn from_snr(snr: f64, stages: usize) -> Result<Self> {
        Self::new(snr, 1.0, stages)
    }

    pub fn sigma_x2(&self) -> f64 {
        self.sigma_x2
    }

    pub fn sigma_w2(&self) -> f64 {
        self.sigma_w2
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn snr(&self) -> f64 {
        self.sigma_x2 / self.sigma_w2
    }

    /// Largest achievable relevance, `(1/2) log2(1 + snr)`.
    pub fn max_relevance(&self) -> f64 {
        0.5 * (1.0 + self.snr()).log2()
    }
}

/// A `(rates, relevances)` tuple of per-stage values in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    pub rates: Vec<f64>,
    pub relevances: Vec<f64>,
}

impl RegionPoint {
    pub fn new(rates: Vec<f64>, relevances: Vec<f64>) -> Result<Self> {
        if rates.len() != relevances.len() || rates.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "rates ({}) and relevances ({}) must have equal positive length",
                rates.len(),
                relevances.len()
            )));
        }
        if rates.iter().any(|&r| !(r >= 0.0)) {
            return Err(Error::OutOfRange("rates must be nonnegative".into()));
        }
        Ok(Self { rates, relevances })
    }

    pub fn stages(&self) -> usize {
        self.rates.len()
    }

    /// Whether the relevances are nondecreasing in the stage index, the
    /// ordering satisfied by every boundary point of the analytic regions.
    pub fn relevances_ordered(&self, tol: f64) -> bool {
        self.relevances.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// Cumulative rate through stage `t` (1-based).
    pub fn cumulative_rate(&self, t: usize) -> f64 {
        self.rates[..t].iter().sum()
    }
}

/// The point on a symmetric-rate tradeoff curve where the binding constraint
/// switches stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPoint {
    pub rate: f64,
    pub relevance: f64,
}

/// Ordered `(rate, relevance)` samples of one stage's tradeoff curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    /// The swept (free) stage, 1-based.
    pub stage: usize,
    /// Samples sorted by rate, relevance nondecreasing along the curve.
    pub samples: Vec<(f64, f64)>,
    pub threshold: Option<ThresholdPoint>,
}

/// Binary test-channel parameters `alpha_t`, nonincreasing in `t` and within
/// `[0, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaParam {
    values: Vec<f64>,
}

impl AlphaParam {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&a| !(0.0..=0.5).contains(&a)) {
            return Err(Error::OutOfRange(
                "alpha parameters must lie in [0, 1/2]".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] > w[0] + 1e-12) {
            return Err(Error::OutOfRange(
                "alpha parameters must be nonincreasing in the stage index".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Gaussian test-channel noise parameters `gamma_t`, nonincreasing in `t` and
/// bounded below by the observation noise variance. A stage with zero
/// cumulative rate carries `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaParam {
    values: Vec<f64>,
}

impl GammaParam {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

// ---------------------------------------------------------------------------
// Region evaluators
// ---------------------------------------------------------------------------

fn check_rates(rates: &[f64], stages: usize) -> Result<()> {
    if rates.len() != stages {
        return Err(Error::DimensionMismatch(format!(
            "expected {stages} per-stage rates, got {}",
            rates.len()
        )));
    }
    if rates.iter().any(|&r| !(r >= 0.0)) {
        return Err(Error::OutOfRange("rates must be nonnegative".into()));
    }
    Ok(())
}

/// Per-stage maximal relevance of the binary model at the given rate vector:
/// `Delta_t = 1 - h2(h2_inv(1 - sum_{l<=t} R_l) * p)`.
///
/// Cumulative rates beyond one bit saturate at `1 - h2(p)`.
///
/// ```
/// use sib_core::analytic::{binary_max_relevance, BinaryModel};
///
/// let model = BinaryModel::new(0.2, 2).unwrap();
/// let deltas = binary_max_relevance(&model, &[10.0, 10.0]).unwrap();
/// assert!((deltas[1] - model.max_relevance()).abs() < 1e-9);
/// ```
pub fn binary_max_relevance(model: &BinaryModel, rates: &[f64]) -> Result<Vec<f64>> {
    check_rates(rates, model.stages)?;
    let mut out = Vec::with_capacity(rates.len());
    let mut cum = 0.0;
    for &r in rates {
        cum += r;
        // Rate past one bit buys nothing; clamp the inverse-entropy argument.
        let arg = (1.0 - cum).clamp(0.0, 1.0);
        let alpha = h2_inv(arg).expect("argument clamped to [0, 1]");
        let crossover = star(alpha, model.p).expect("convolution inputs in range");
        out.push(1.0 - h2(crossover).expect("convolution output in range"));
    }
    Ok(out)
}

/// Per-stage maximal relevance of the scalar Gaussian model:
/// `Delta_t = (1/2) log2((sx2 + sw2) / (2^(-2 sum R) sx2 + sw2))`.
pub fn gaussian_max_relevance(model: &GaussianModel, rates: &[f64]) -> Result<Vec<f64>> {
    check_rates(rates, model.stages)?;
    let mut out = Vec::with_capacity(rates.len());
    let mut cum = 0.0;
    for &r in rates {
        cum += r;
        let shrink = (-2.0 * cum).exp2();
        let ratio = (model.sigma_x2 + model.sigma_w2) / (shrink * model.sigma_x2 + model.sigma_w2);
        out.push(0.5 * ratio.log2());
    }
    Ok(out)
}

/// Binary test-channel parameters induced by a rate vector:
/// `alpha_t = h2_inv(1 - sum_{l<=t} R_l)`, clamped at saturation.
pub fn alpha_from_rates(model: &BinaryModel, rates: &[f64]) -> Result<AlphaParam> {
    check_rates(rates, model.stages)?;
    let mut values = Vec::with_capacity(rates.len());
    let mut cum = 0.0;
    for &r in rates {
        cum += r;
        values.push(h2_inv((1.0 - cum).clamp(0.0, 1.0)).expect("argument clamped"));
    }
    AlphaParam::new(values)
}

/// Gaussian test-channel noise variances induced by a rate vector:
/// `gamma_t = (2^(-2 sum R) sx2 + sw2) / (1 - 2^(-2 sum R))`.
///
/// A zero cumulative rate yields `f64::INFINITY`.
pub fn gamma_from_rates(model: &GaussianModel, rates: &[f64]) -> Result<GammaParam> {
    check_rates(rates, model.stages)?;
    let mut values = Vec::with_capacity(rates.len());
    let mut cum = 0.0;
    for &r in rates {
        cum += r;
        if cum == 0.0 {
            values.push(f64::INFINITY);
        } else {
            let shrink = (-2.0 * cum).exp2();
            values.push((shrink * model.sigma_x2 + model.sigma_w2) / (1.0 - shrink));
        }
    }
    Ok(GammaParam { values })
}

// ---------------------------------------------------------------------------
// Symmetric-rate tradeoff curves (two stages, R_1 = R_2 = R)
// ---------------------------------------------------------------------------

/// Uniformly spaced grid of `n` relevance samples on `[0, max]`; the endpoint
/// is included only when `include_end` is set (the Gaussian feasible interval
/// is open at the top).
pub fn uniform_grid(max: f64, n: usize, include_end: bool) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![0.0];
    }
    let denom = if include_end { (n - 1) as f64 } else { n as f64 };
    (0..n).map(|i| max * i as f64 / denom).collect()
}

fn binary_rate_term(delta: f64, p: f64, stage: usize) -> f64 {
    // alpha upper bound from the stage constraint, mapped back through the
    // cascade: z = (h2_inv(1 - delta) - p) / (1 - 2p).
    let z = ((h2_inv(1.0 - delta).expect("delta validated") - p) / (1.0 - 2.0 * p))
        .clamp(0.0, 0.5);
    let h = h2(z).expect("z clamped");
    match stage {
        1 => 1.0 - h,
        2 => 0.5 - 0.5 * h,
        _ => unreachable!("two-stage tradeoff"),
    }
}

fn gaussian_rate_term(delta: f64, snr: f64, stage: usize) -> f64 {
    let inner = (1.0 + snr) * (-2.0 * delta).exp2() - 1.0;
    let log = (snr / inner).log2();
    match stage {
        1 => 0.5 * log,
        2 => 0.25 * log,
        _ => unreachable!("two-stage tradeoff"),
    }
}

fn check_two_stage(stages: usize, fixed_stage: usize) -> Result<usize> {
    if stages != 2 {
        return Err(Error::DimensionMismatch(format!(
            "symmetric-rate tradeoff is defined for two stages, model has {stages}"
        )));
    }
    match fixed_stage {
        1 => Ok(2),
        2 => Ok(1),
        s => Err(Error::OutOfRange(format!(
            "fixed stage must be 1 or 2, got {s}"
        ))),
    }
}

/// Minimal symmetric rate `R = R_1 = R_2` of the two-stage binary model, as
/// one stage's relevance sweeps `grid` while the other is pinned.
///
/// Each sample takes the larger of the two stage constraints; the threshold
/// marks where the swept stage's constraint overtakes the fixed one.
pub fn binary_symmetric_tradeoff(
    model: &BinaryModel,
    delta_fixed: (usize, f64),
    grid: &[f64],
) -> Result<TradeoffCurve> {
    let (fixed_stage, fixed_delta) = delta_fixed;
    let free_stage = check_two_stage(model.stages, fixed_stage)?;
    if model.p >= 0.5 {
        return Err(Error::Infeasible(
            "crossover 1/2 makes the observation independent of the source; \
             the rate requirement is undefined"
                .into(),
        ));
    }
    let dmax = model.max_relevance();
    let feasible = |d: f64| (0.0..=dmax + 1e-12).contains(&d);
    if !feasible(fixed_delta) {
        return Err(Error::Infeasible(format!(
            "fixed relevance {fixed_delta} outside feasible interval [0, {dmax:.6}]"
        )));
    }
    if let Some(&bad) = grid.iter().find(|&&d| !feasible(d)) {
        return Err(Error::Infeasible(format!(
            "relevance sample {bad} outside feasible interval [0, {dmax:.6}]"
        )));
    }
    let p = model.p;
    let fixed_rate = binary_rate_term(fixed_delta.min(dmax), p, fixed_stage);
    let free_term = |d: f64| binary_rate_term(d.min(dmax), p, free_stage);

    let mut samples: Vec<(f64, f64)> = grid
        .iter()
        .map(|&d| (free_term(d).max(fixed_rate), d))
        .collect();
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let threshold = find_threshold(free_term, fixed_rate, (0.0, dmax));
    Ok(TradeoffCurve {
        stage: free_stage,
        samples,
        threshold,
    })
}

/// Minimal symmetric rate of the two-stage scalar Gaussian model; the
/// Gaussian analogue of [`binary_symmetric_tradeoff`].
pub fn gaussian_symmetric_tradeoff(
    model: &GaussianModel,
    delta_fixed: (usize, f64),
    grid: &[f64],
) -> Result<TradeoffCurve> {
    let (fixed_stage, fixed_delta) = delta_fixed;
    let free_stage = check_two_stage(model.stages, fixed_stage)?;
    let snr = model.snr();
    let dmax = model.max_relevance();
    // Feasibility requires (1 + snr) 2^(-2 delta) > 1, i.e. delta < dmax.
    let feasible = |d: f64| d >= 0.0 && (1.0 + snr) * (-2.0 * d).exp2() - 1.0 > 0.0;
    if !feasible(fixed_delta) {
        return Err(Error::Infeasible(format!(
            "fixed relevance {fixed_delta} outside feasible interval [0, {dmax:.6})"
        )));
    }
    if let Some(&bad) = grid.iter().find(|&&d| !feasible(d)) {
        return Err(Error::Infeasible(format!(
            "relevance sample {bad} outside feasible interval [0, {dmax:.6})"
        )));
    }
    let fixed_rate = gaussian_rate_term(fixed_delta, snr, fixed_stage);
    let free_term = move |d: f64| gaussian_rate_term(d, snr, free_stage);

    let mut samples: Vec<(f64, f64)> = grid
        .iter()
        .map(|&d| (free_term(d).max(fixed_rate), d))
        .collect();
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    // Stay strictly inside the open interval when bracketing.
    let threshold = find_threshold(free_term, fixed_rate, (0.0, dmax * (1.0 - 1e-9)));
    Ok(TradeoffCurve {
        stage: free_stage,
        samples,
        threshold,
    })
}

/// Locate the relevance at which a monotone rate term crosses the fixed
/// stage's constant rate requirement.
///
/// Scans `[lo, hi]` to bracket a sign change of `term(delta) - constant`,
/// then bisects to an absolute tolerance of 1e-8 in the relevance. Returns
/// `None` when the curve is governed by a single term throughout.
pub fn find_threshold(
    term: impl Fn(f64) -> f64,
    constant: f64,
    interval: (f64, f64),
) -> Option<ThresholdPoint> {
    let (lo, hi) = interval;
    if term(lo) >= constant {
        // The swept term already binds at the left edge (e.g. a zero fixed
        // constraint): the switch happens immediately.
        return Some(ThresholdPoint {
            rate: term(lo).max(constant),
            relevance: lo,
        });
    }
    const SCAN: usize = 512;
    let mut a = lo;
    let mut b = None;
    for i in 1..=SCAN {
        let d = lo + (hi - lo) * i as f64 / SCAN as f64;
        if term(d) >= constant {
            b = Some(d);
            break;
        }
        a = d;
    }
    let mut b = b?;
    while b - a > 1e-8 {
        let mid = 0.5 * (a + b);
        if term(mid) < constant {
            a = mid;
        } else {
            b = mid;
        }
    }
    let delta = 0.5 * (a + b);
    Some(ThresholdPoint {
        rate: constant,
        relevance: delta,
    })
}
