//! Blahut-Arimoto type solver for the multi-stage bottleneck objective
//! `I(U^T;Y) - sum_l beta_l I(U_l;X)` over encoders `p(u^T|y)` of a known
//! discrete source, plus region-point extraction and multiplier sweeps.
//!
//! The fixed-point update is evaluated entirely in the log domain with a
//! per-observation max subtraction, and every distribution entering a
//! denominator or logarithm is floored and renormalized, so the iteration
//! stays in the interior of the simplex.

use crate::analytic::RegionPoint;
use crate::error::{Error, Result};
use crate::prob::{
    conditional_mi, mutual_information_between, ConditionalPmf, JointPmf, Marginal,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which exponent the encoder update uses. The two coincide for a single
/// stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// Per-stage terms `eta(l,x) - gamma(l,x)` where each stage's reward is
    /// divided by the companion-description conditional `p(u_rest | x, u_l)`
    /// and offset by `beta_l p(u_l, x) / p(u^T)`.
    CompanionScaled,
    /// Plain stationarity exponent of the Lagrangian,
    /// `sum_l beta_l sum_x p(x|y) log2(p(u_l|x) / p(u_l))`.
    #[default]
    Stationary,
}

/// Solver hyperparameters.
#[derive(Debug, Clone)]
pub struct BaConfig {
    /// Per-stage Lagrange multipliers, nonnegative.
    pub betas: Vec<f64>,
    /// Per-stage description alphabet sizes.
    pub u_sizes: Vec<usize>,
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Convergence tolerance: max over `y` of the total-variation distance
    /// between successive encoder slices.
    pub tol: f64,
    /// Floor applied to distributions entering denominators or logarithms.
    pub prob_floor: f64,
    /// Base seed; restart `i` uses `seed + i`.
    pub seed: u64,
    /// Random restarts; the best objective is kept.
    pub restarts: usize,
    /// Mixing factor in (0, 1]: 1 replaces the encoder outright, smaller
    /// values blend with the previous iterate. Dropped to 0.5 automatically
    /// when the iteration oscillates.
    pub damping: f64,
    pub update_rule: UpdateRule,
}

impl BaConfig {
    pub fn new(betas: Vec<f64>, u_sizes: Vec<usize>) -> Result<Self> {
        if betas.is_empty() || betas.len() != u_sizes.len() {
            return Err(Error::DimensionMismatch(format!(
                "need matching nonempty multiplier and alphabet lists, got {} and {}",
                betas.len(),
                u_sizes.len()
            )));
        }
        if betas.iter().any(|&b| !(b >= 0.0)) {
            return Err(Error::OutOfRange("multipliers must be nonnegative".into()));
        }
        if u_sizes.contains(&0) {
            return Err(Error::OutOfRange(
                "description alphabets must be nonempty".into(),
            ));
        }
        Ok(Self {
            betas,
            u_sizes,
            max_iters: 2000,
            tol: 1e-8,
            prob_floor: 1e-12,
            seed: 0,
            restarts: 8,
            damping: 1.0,
            update_rule: UpdateRule::default(),
        })
    }

    /// Default description cardinality `|U_t| = |Y|` for every stage.
    pub fn for_source(betas: Vec<f64>, source: &JointPmf) -> Result<Self> {
        let t = betas.len();
        Self::new(betas, vec![source.y_size(); t])
    }

    /// Same hyperparameters with different multipliers.
    pub fn with_betas(&self, betas: Vec<f64>) -> Result<Self> {
        if betas.len() != self.u_sizes.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} multipliers, got {}",
                self.u_sizes.len(),
                betas.len()
            )));
        }
        if betas.iter().any(|&b| !(b >= 0.0)) {
            return Err(Error::OutOfRange("multipliers must be nonnegative".into()));
        }
        let mut config = self.clone();
        config.betas = betas;
        Ok(config)
    }

    pub fn stages(&self) -> usize {
        self.betas.len()
    }
}

// ---------------------------------------------------------------------------
// Tuple layout and source statistics
// ---------------------------------------------------------------------------

/// Index bookkeeping for the flattened description tuple `u^T`.
#[derive(Debug, Clone)]
pub(crate) struct TupleLayout {
    pub(crate) sizes: Vec<usize>,
    pub(crate) total: usize,
    /// `coord[t][u]` = stage-`t` symbol of the flat tuple `u`.
    pub(crate) coord: Vec<Vec<usize>>,
    /// `rest[t][u]` = flat index of the tuple with stage `t` removed.
    pub(crate) rest: Vec<Vec<usize>>,
    /// Companion alphabet size per stage (1 when there is a single stage).
    pub(crate) rest_total: Vec<usize>,
}

impl TupleLayout {
    pub(crate) fn new(sizes: &[usize]) -> Self {
        let t = sizes.len();
        let total: usize = sizes.iter().product();
        let mut strides = vec![1usize; t];
        for d in (0..t.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * sizes[d + 1];
        }
        let mut coord = vec![vec![0usize; total]; t];
        let mut rest = vec![vec![0usize; total]; t];
        let rest_total: Vec<usize> = (0..t).map(|l| total / sizes[l]).collect();
        for u in 0..total {
            let coords: Vec<usize> = (0..t).map(|d| (u / strides[d]) % sizes[d]).collect();
            for l in 0..t {
                coord[l][u] = coords[l];
                let mut idx = 0usize;
                for d in 0..t {
                    if d != l {
                        idx = idx * sizes[d] + coords[d];
                    }
                }
                rest[l][u] = idx;
            }
        }
        Self {
            sizes: sizes.to_vec(),
            total,
            coord,
            rest,
            rest_total,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SourceStats {
    pub(crate) x_size: usize,
    pub(crate) y_size: usize,
    pub(crate) px: Vec<f64>,
    pub(crate) py: Vec<f64>,
    /// `x_given_y[y][x]`; all-zero row where `p(y) = 0`.
    pub(crate) x_given_y: Vec<Vec<f64>>,
    /// `y_given_x[x][y]`; all-zero row where `p(x) = 0`.
    pub(crate) y_given_x: Vec<Vec<f64>>,
}

impl SourceStats {
    pub(crate) fn new(source: &JointPmf) -> Self {
        let (nx, ny) = (source.x_size(), source.y_size());
        let px = source.x_marginal().probs().to_vec();
        let py = source.y_marginal().probs().to_vec();
        let mut x_given_y = vec![vec![0.0; nx]; ny];
        let mut y_given_x = vec![vec![0.0; ny]; nx];
        for x in 0..nx {
            for y in 0..ny {
                let p = source.prob(x, y);
                if py[y] > 0.0 {
                    x_given_y[y][x] = p / py[y];
                }
                if px[x] > 0.0 {
                    y_given_x[x][y] = p / px[x];
                }
            }
        }
        Self {
            x_size: nx,
            y_size: ny,
            px,
            py,
            x_given_y,
            y_given_x,
        }
    }
}

fn floor_and_renormalize(probs: &mut [f64], floor: f64) {
    for p in probs.iter_mut() {
        if *p < floor {
            *p = floor;
        }
    }
    let sum: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= sum;
    }
}

// ---------------------------------------------------------------------------
// Solver state
// ---------------------------------------------------------------------------

/// One iterate of the solver: the encoder and every distribution derived
/// from it, floored away from the simplex boundary.
#[derive(Debug, Clone)]
pub struct BaState {
    /// `p(u^T | y)`.
    pub encoder: ConditionalPmf,
    /// `p(u^T)` under the floored encoder.
    pub marginal_ut: Marginal,
    /// `p(u_t)` per stage.
    pub stage_marginals: Vec<Marginal>,
    /// `p(u_t | x)` per stage.
    pub stage_given_x: Vec<ConditionalPmf>,
    /// `p(u_rest | x, u_t)` per stage, conditioned on the flattened pair
    /// `x * |U_t| + u_t`.
    pub companions: Vec<ConditionalPmf>,
    pub iteration: usize,
    /// Objective value after each iterate, starting with the initializer.
    pub objective_trace: Vec<f64>,
}

impl BaState {
    /// Derive all marginals from an encoder and record the objective.
    fn from_encoder(
        encoder: ConditionalPmf,
        source: &JointPmf,
        stats: &SourceStats,
        layout: &TupleLayout,
        config: &BaConfig,
        iteration: usize,
        mut objective_trace: Vec<f64>,
    ) -> Result<Self> {
        let floor = config.prob_floor;
        let total = layout.total;
        let stages = layout.sizes.len();

        // p(u^T) and p(u^T | x).
        let mut p_ut = vec![0.0; total];
        let mut ut_given_x = vec![vec![0.0; total]; stats.x_size];
        for y in 0..stats.y_size {
            let row = encoder.row(y);
            for u in 0..total {
                p_ut[u] += stats.py[y] * row[u];
            }
            for x in 0..stats.x_size {
                let w = stats.y_given_x[x][y];
                if w > 0.0 {
                    for u in 0..total {
                        ut_given_x[x][u] += w * row[u];
                    }
                }
            }
        }
        floor_and_renormalize(&mut p_ut, floor);

        let mut stage_marginals = Vec::with_capacity(stages);
        let mut stage_given_x = Vec::with_capacity(stages);
        let mut companions = Vec::with_capacity(stages);
        for l in 0..stages {
            let s = layout.sizes[l];
            let rest_n = layout.rest_total[l];

            let mut p_ul = vec![0.0; s];
            for u in 0..total {
                p_ul[layout.coord[l][u]] += p_ut[u];
            }
            floor_and_renormalize(&mut p_ul, floor);
            stage_marginals.push(Marginal::new(vec![s], p_ul)?);

            let mut ul_given_x = vec![0.0; stats.x_size * s];
            let mut comp = vec![0.0; stats.x_size * s * rest_n];
            for x in 0..stats.x_size {
                for u in 0..total {
                    let ul = layout.coord[l][u];
                    ul_given_x[x * s + ul] += ut_given_x[x][u];
                    comp[(x * s + ul) * rest_n + layout.rest[l][u]] += ut_given_x[x][u];
                }
            }
            for x in 0..stats.x_size {
                floor_and_renormalize(&mut ul_given_x[x * s..(x + 1) * s], floor);
            }
            for slice in comp.chunks_mut(rest_n) {
                floor_and_renormalize(slice, floor);
            }
            stage_given_x.push(ConditionalPmf::new(stats.x_size, vec![s], ul_given_x)?);
            let rest_shape = if stages == 1 {
                vec![1]
            } else {
                let mut shape = layout.sizes.clone();
                shape.remove(l);
                shape
            };
            companions.push(ConditionalPmf::new(stats.x_size * s, rest_shape, comp)?);
        }

        let objective = ib_objective(source, &encoder, &config.betas)?;
        if !objective.is_finite() {
            return Err(Error::NumericalFailure {
                iteration,
                message: "objective is not finite".into(),
            });
        }
        objective_trace.push(objective);

        Ok(Self {
            encoder,
            marginal_ut: Marginal::new(vec![total], p_ut)?,
            stage_marginals,
            stage_given_x,
            companions,
            iteration,
            objective_trace,
        })
    }

    fn init_random(
        source: &JointPmf,
        stats: &SourceStats,
        layout: &TupleLayout,
        config: &BaConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let total = layout.total;
        let mut probs = vec![0.0; stats.y_size * total];
        for row in probs.chunks_mut(total) {
            // Symmetric Dirichlet(1) via normalized unit exponentials.
            loop {
                let mut sum = 0.0;
                for p in row.iter_mut() {
                    *p = -(1.0 - rng.random::<f64>()).ln();
                    sum += *p;
                }
                if sum > 0.0 {
                    for p in row.iter_mut() {
                        *p /= sum;
                    }
                    break;
                }
            }
            floor_and_renormalize(row, config.prob_floor);
        }
        let encoder = ConditionalPmf::new(stats.y_size, layout.sizes.clone(), probs)?;
        Self::from_encoder(encoder, source, stats, layout, config, 0, Vec::new())
    }

    /// Current objective value.
    pub fn objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("trace has the initializer entry")
    }
}

// ---------------------------------------------------------------------------
// Objective and region extraction
// ---------------------------------------------------------------------------

/// Joint over `(X, Y, U_1, ..., U_T)` induced by the Markov chain
/// `X - Y - U^T`: axis 0 is `X`, axis 1 is `Y`, axis `1 + t` is stage `t`.
pub fn full_joint(source: &JointPmf, encoder: &ConditionalPmf) -> Result<Marginal> {
    if encoder.given_size() != source.y_size() {
        return Err(Error::DimensionMismatch(format!(
            "encoder conditions on {} symbols but the observation alphabet has {}",
            encoder.given_size(),
            source.y_size()
        )));
    }
    let total = encoder.out_len();
    let mut shape = vec![source.x_size(), source.y_size()];
    shape.extend_from_slice(encoder.out_shape());
    let mut probs = vec![0.0; source.x_size() * source.y_size() * total];
    for x in 0..source.x_size() {
        for y in 0..source.y_size() {
            let pxy = source.prob(x, y);
            let row = encoder.row(y);
            let base = (x * source.y_size() + y) * total;
            for u in 0..total {
                probs[base + u] = pxy * row[u];
            }
        }
    }
    Marginal::new(shape, probs)
}

/// The solver objective `I(U^T;Y) - sum_l beta_l I(U_l;X)` of an encoder.
pub fn ib_objective(source: &JointPmf, encoder: &ConditionalPmf, betas: &[f64]) -> Result<f64> {
    let stages = encoder.out_shape().len();
    if betas.len() != stages {
        return Err(Error::DimensionMismatch(format!(
            "{} multipliers for {stages} stages",
            betas.len()
        )));
    }
    let joint = full_joint(source, encoder)?;
    let u_axes: Vec<usize> = (0..stages).map(|t| 2 + t).collect();
    let mut y_and_u = vec![1usize];
    y_and_u.extend_from_slice(&u_axes);
    let i_uy = mutual_information_between(&joint.marginalize_keep(&y_and_u), 1);
    let mut objective = i_uy;
    for (l, &beta) in betas.iter().enumerate() {
        if beta == 0.0 {
            continue;
        }
        let i_ux = mutual_information_between(&joint.marginalize_keep(&[0, 2 + l]), 1);
        objective -= beta * i_ux;
    }
    Ok(objective)
}

/// Rates and relevances of an encoder: `R_t = I(Y;U_t|U_1..U_{t-1})` and
/// `Delta_t = I(X;U_t)`, all computed from the induced joint.
pub fn extract_region_point(encoder: &ConditionalPmf, source: &JointPmf) -> Result<RegionPoint> {
    let joint = full_joint(source, encoder)?;
    let stages = encoder.out_shape().len();
    let mut rates = Vec::with_capacity(stages);
    let mut relevances = Vec::with_capacity(stages);
    for t in 0..stages {
        let mut axes = vec![1usize, 2 + t];
        axes.extend((0..t).map(|s| 2 + s));
        rates.push(conditional_mi(&joint.marginalize_keep(&axes)));
        relevances.push(mutual_information_between(
            &joint.marginalize_keep(&[0, 2 + t]),
            1,
        ));
    }
    RegionPoint::new(rates, relevances)
}

/// Cumulative-description relevance variant `I(X; U_1, ..., U_t)`.
pub fn extract_joint_relevances(
    encoder: &ConditionalPmf,
    source: &JointPmf,
) -> Result<Vec<f64>> {
    let joint = full_joint(source, encoder)?;
    let stages = encoder.out_shape().len();
    let mut out = Vec::with_capacity(stages);
    for t in 1..=stages {
        let mut axes = vec![0usize];
        axes.extend((0..t).map(|s| 2 + s));
        out.push(mutual_information_between(
            &joint.marginalize_keep(&axes),
            1,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Fixed-point update
// ---------------------------------------------------------------------------

/// One fixed-point sweep: rebuild the stage marginals from the current
/// encoder, replace the encoder through the log-domain update exponent
/// (renormalized exactly per observation), floor, and blend with the old
/// encoder by the configured damping factor.
pub fn ba_update(state: &BaState, source: &JointPmf, config: &BaConfig) -> Result<BaState> {
    let stats = SourceStats::new(source);
    let layout = TupleLayout::new(&config.u_sizes);
    if state.encoder.given_size() != stats.y_size || state.encoder.out_len() != layout.total {
        return Err(Error::DimensionMismatch(
            "encoder does not match the source and configured alphabets".into(),
        ));
    }
    // Steps recomputing p(u_t), p(u_t|x), p(u_rest|x,u_t) from the current
    // encoder live in the state constructor; reuse the state's copies.
    let stages = layout.sizes.len();
    let total = layout.total;
    let iteration = state.iteration + 1;

    let mut exponents = vec![0.0f64; total];
    let mut new_probs = vec![0.0f64; stats.y_size * total];
    for y in 0..stats.y_size {
        for (u, e) in exponents.iter_mut().enumerate() {
            let p_ut = state.marginal_ut.probs()[u];
            let mut acc = p_ut.log2();
            for l in 0..stages {
                let beta = config.betas[l];
                if beta == 0.0 {
                    continue;
                }
                let s = layout.sizes[l];
                let ul = layout.coord[l][u];
                let p_ul = state.stage_marginals[l].probs()[ul];
                for x in 0..stats.x_size {
                    let p_ul_x = state.stage_given_x[l].prob(x, ul);
                    let log_ratio = (p_ul_x / p_ul).log2();
                    match config.update_rule {
                        UpdateRule::Stationary => {
                            acc += beta * stats.x_given_y[y][x] * log_ratio;
                        }
                        UpdateRule::CompanionScaled => {
                            let comp = state.companions[l].prob(x * s + ul, layout.rest[l][u]);
                            let eta =
                                beta * stats.x_given_y[y][x] * (1.0 + log_ratio) / comp;
                            let gamma = beta * stats.px[x] * p_ul_x / p_ut;
                            acc += eta - gamma;
                        }
                    }
                }
            }
            if acc.is_nan() {
                return Err(Error::NumericalFailure {
                    iteration,
                    message: format!("update exponent is NaN for observation {y}"),
                });
            }
            *e = acc;
        }
        let max = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let row = &mut new_probs[y * total..(y + 1) * total];
        let mut sum = 0.0;
        for (q, &e) in row.iter_mut().zip(exponents.iter()) {
            *q = (e - max).exp2();
            sum += *q;
        }
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::NumericalFailure {
                iteration,
                message: format!("normalization failed for observation {y}"),
            });
        }
        let theta = config.damping;
        let old = state.encoder.row(y);
        for (u, q) in row.iter_mut().enumerate() {
            *q = theta * (*q / sum) + (1.0 - theta) * old[u];
        }
        floor_and_renormalize(row, config.prob_floor);
    }

    let encoder = ConditionalPmf::new(stats.y_size, layout.sizes.clone(), new_probs)?;
    BaState::from_encoder(
        encoder,
        source,
        &stats,
        &layout,
        config,
        iteration,
        state.objective_trace.clone(),
    )
}

fn max_total_variation(a: &ConditionalPmf, b: &ConditionalPmf) -> f64 {
    let mut worst: f64 = 0.0;
    for g in 0..a.given_size() {
        let tv: f64 = a
            .row(g)
            .iter()
            .zip(b.row(g))
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
            * 0.5;
        worst = worst.max(tv);
    }
    worst
}

// ---------------------------------------------------------------------------
// Full runs and sweeps
// ---------------------------------------------------------------------------

/// Converged solver artifacts.
#[derive(Debug, Clone)]
pub struct BaResult {
    pub encoder: ConditionalPmf,
    /// Per-stage `(R_t, Delta_t)` with `Delta_t = I(X;U_t)`.
    pub region_point: RegionPoint,
    /// Diagnostic relevance variant `I(X; U_1..U_t)`.
    pub relevances_joint: Vec<f64>,
    /// Final value of `I(U^T;Y) - sum_l beta_l I(U_l;X)`.
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

fn single_run(source: &JointPmf, config: &BaConfig, seed: u64) -> Result<BaResult> {
    let stats = SourceStats::new(source);
    let layout = TupleLayout::new(&config.u_sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = BaState::init_random(source, &stats, &layout, config, &mut rng)?;

    let mut effective = config.clone();
    let mut converged = false;
    let mut last_tv = f64::INFINITY;
    let mut stale_steps = 0usize;
    for _ in 0..config.max_iters {
        let next = ba_update(&state, source, &effective)?;
        let tv = max_total_variation(&state.encoder, &next.encoder);
        state = next;
        if tv < config.tol {
            converged = true;
            break;
        }
        // Oscillation guard: a TV distance that refuses to shrink for 50
        // straight iterations triggers half-step damping.
        if tv >= last_tv {
            stale_steps += 1;
            if stale_steps >= 50 && effective.damping > 0.5 {
                effective.damping = 0.5;
                stale_steps = 0;
            }
        } else {
            stale_steps = 0;
        }
        last_tv = tv;
    }

    let region_point = extract_region_point(&state.encoder, source)?;
    let relevances_joint = extract_joint_relevances(&state.encoder, source)?;
    Ok(BaResult {
        objective: state.objective(),
        encoder: state.encoder,
        region_point,
        relevances_joint,
        converged,
        iterations: state.iteration,
        objective_trace: state.objective_trace,
    })
}

/// Run the solver with multi-restart initialization and keep the best
/// objective. Deterministic given the config seed.
///
/// Non-convergence within the iteration cap is reported through the
/// `converged` flag of the (still returned) best iterate.
///
/// ```
/// use sib_core::ba::{ba_run, BaConfig};
/// use sib_core::prob::JointPmf;
///
/// let source = JointPmf::binary_symmetric(0.1).unwrap();
/// let config = BaConfig::new(vec![4.0, 8.0], vec![2, 2]).unwrap();
/// let result = ba_run(&source, &config).unwrap();
/// assert!(result.converged);
/// assert!(result.region_point.relevances[1] > 0.5);
/// ```
pub fn ba_run(source: &JointPmf, config: &BaConfig) -> Result<BaResult> {
    let restarts = config.restarts.max(1);
    let mut best: Option<BaResult> = None;
    for restart in 0..restarts {
        let result = single_run(source, config, config.seed.wrapping_add(restart as u64))?;
        let better = match &best {
            None => true,
            Some(b) => result.objective < b.objective,
        };
        if better {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// One solver run per multiplier vector, results ordered as the grid.
/// Per-entry failures are reported in place without aborting the sweep.
pub fn beta_sweep(
    source: &JointPmf,
    beta_grid: &[Vec<f64>],
    template: &BaConfig,
) -> Vec<Result<BaResult>> {
    beta_grid
        .iter()
        .map(|betas| {
            let config = template.with_betas(betas.clone())?;
            ba_run(source, &config)
        })
        .collect()
}

/// Pareto filter of `(sum rate, relevance)` pairs: keeps the points not
/// dominated by any other (lower-or-equal rate and higher relevance), sorted
/// by sum rate. The surviving relevances are strictly increasing.
pub fn pareto_front_rate_relevance(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite rates")
            .then(b.1.partial_cmp(&a.1).expect("finite relevances"))
    });
    let mut front: Vec<(f64, f64)> = Vec::new();
    for &(rate, relevance) in &sorted {
        if front.last().is_none_or(|&(_, d)| relevance > d) {
            front.push((rate, relevance));
        }
    }
    front
}
