//! Brute-force reference optimizer for tiny instances: exhaustive lattice
//! search over encoders, used to certify solver outputs and to generate
//! ground-truth region points.
//!
//! The encoder simplex is covered by an exact composition lattice (no random
//! sampling), so results are reproducible without seeds.

use crate::analytic::RegionPoint;
use crate::ba::{extract_region_point, SourceStats, TupleLayout};
use crate::error::{Error, Result};
use crate::prob::{ConditionalPmf, JointPmf};

/// Largest supported number of continuous encoder degrees of freedom.
pub const MAX_DOF: usize = 12;

/// Exhaustive-search parameters.
#[derive(Debug, Clone)]
pub struct GridSpec {
    /// Lattice points per simplex dimension; step is `1 / (resolution - 1)`.
    pub resolution: usize,
    /// Per-stage description alphabet sizes.
    pub u_sizes: Vec<usize>,
    /// Search deterministic (point-mass) encoders only.
    pub deterministic_only: bool,
}

impl GridSpec {
    pub fn new(resolution: usize, u_sizes: Vec<usize>) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::OutOfRange(format!(
                "grid resolution must be at least 2, got {resolution}"
            )));
        }
        if u_sizes.is_empty() || u_sizes.contains(&0) {
            return Err(Error::OutOfRange(
                "description alphabets must be nonempty".into(),
            ));
        }
        Ok(Self {
            resolution,
            u_sizes,
            deterministic_only: false,
        })
    }

    /// Default lattice: 21 points per dimension (step 0.05).
    pub fn with_default_resolution(u_sizes: Vec<usize>) -> Result<Self> {
        Self::new(21, u_sizes)
    }

    pub fn deterministic_only(mut self, flag: bool) -> Self {
        self.deterministic_only = flag;
        self
    }
}

/// All compositions of `total` into `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn recurse(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for take in 0..=remaining {
            prefix.push(take);
            recurse(remaining - take, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    recurse(total, parts, &mut Vec::new(), &mut out);
    out
}

/// Candidate encoder slices for one observation value.
fn candidate_rows(spec: &GridSpec, out_len: usize) -> Vec<Vec<f64>> {
    if spec.deterministic_only {
        (0..out_len)
            .map(|u| {
                let mut row = vec![0.0; out_len];
                row[u] = 1.0;
                row
            })
            .collect()
    } else {
        let steps = spec.resolution - 1;
        compositions(steps, out_len)
            .into_iter()
            .map(|comp| comp.iter().map(|&k| k as f64 / steps as f64).collect())
            .collect()
    }
}

fn check_size(source: &JointPmf, spec: &GridSpec) -> Result<usize> {
    let total: usize = spec.u_sizes.iter().product();
    let dof = source.y_size() * (total - 1);
    if dof > MAX_DOF {
        return Err(Error::TooLarge(format!(
            "{dof} encoder degrees of freedom exceed the supported {MAX_DOF}"
        )));
    }
    Ok(total)
}

/// Allocation-free objective evaluator for flat `y x u^T` encoder arrays.
struct Evaluator {
    stats: SourceStats,
    layout: TupleLayout,
    betas: Vec<f64>,
    p_u: Vec<f64>,
    ut_given_x: Vec<f64>,
    p_ul: Vec<f64>,
    p_ul_x: Vec<f64>,
}

impl Evaluator {
    fn new(source: &JointPmf, betas: &[f64], u_sizes: &[usize]) -> Self {
        let stats = SourceStats::new(source);
        let layout = TupleLayout::new(u_sizes);
        let max_s = *u_sizes.iter().max().expect("nonempty");
        Self {
            p_u: vec![0.0; layout.total],
            ut_given_x: vec![0.0; stats.x_size * layout.total],
            p_ul: vec![0.0; max_s],
            p_ul_x: vec![0.0; stats.x_size * max_s],
            stats,
            layout,
            betas: betas.to_vec(),
        }
    }

    /// `I(U^T;Y) - sum_l beta_l I(U_l;X)` of the encoder given as row-major
    /// `y_size x total` probabilities.
    fn objective(&mut self, encoder: &[f64]) -> f64 {
        let total = self.layout.total;
        let (nx, ny) = (self.stats.x_size, self.stats.y_size);

        self.p_u.iter_mut().for_each(|v| *v = 0.0);
        self.ut_given_x.iter_mut().for_each(|v| *v = 0.0);
        for y in 0..ny {
            let row = &encoder[y * total..(y + 1) * total];
            let py = self.stats.py[y];
            for u in 0..total {
                self.p_u[u] += py * row[u];
            }
            for x in 0..nx {
                let w = self.stats.y_given_x[x][y];
                if w > 0.0 {
                    for u in 0..total {
                        self.ut_given_x[x * total + u] += w * row[u];
                    }
                }
            }
        }

        let mut i_uy = 0.0;
        for y in 0..ny {
            let py = self.stats.py[y];
            if py == 0.0 {
                continue;
            }
            let row = &encoder[y * total..(y + 1) * total];
            for u in 0..total {
                if row[u] > 0.0 && self.p_u[u] > 0.0 {
                    i_uy += py * row[u] * (row[u] / self.p_u[u]).log2();
                }
            }
        }

        let mut objective = i_uy;
        for l in 0..self.layout.sizes.len() {
            let beta = self.betas[l];
            if beta == 0.0 {
                continue;
            }
            let s = self.layout.sizes[l];
            self.p_ul[..s].iter_mut().for_each(|v| *v = 0.0);
            self.p_ul_x[..nx * s].iter_mut().for_each(|v| *v = 0.0);
            for u in 0..total {
                let ul = self.layout.coord[l][u];
                self.p_ul[ul] += self.p_u[u];
                for x in 0..nx {
                    self.p_ul_x[x * s + ul] += self.ut_given_x[x * total + u];
                }
            }
            let mut i_ux = 0.0;
            for x in 0..nx {
                let px = self.stats.px[x];
                if px == 0.0 {
                    continue;
                }
                for ul in 0..s {
                    let c = self.p_ul_x[x * s + ul];
                    if c > 0.0 && self.p_ul[ul] > 0.0 {
                        i_ux += px * c * (c / self.p_ul[ul]).log2();
                    }
                }
            }
            objective -= beta * i_ux;
        }
        objective
    }
}

/// Visit every encoder on the lattice; `visit` receives the flat encoder.
fn for_each_grid_encoder(
    rows: &[Vec<f64>],
    y_size: usize,
    total: usize,
    mut visit: impl FnMut(&[f64]),
) {
    let mut choice = vec![0usize; y_size];
    let mut flat = vec![0.0; y_size * total];
    loop {
        for y in 0..y_size {
            flat[y * total..(y + 1) * total].copy_from_slice(&rows[choice[y]]);
        }
        visit(&flat);
        // Odometer increment.
        let mut pos = y_size;
        for y in (0..y_size).rev() {
            choice[y] += 1;
            if choice[y] < rows.len() {
                pos = y;
                break;
            }
            choice[y] = 0;
        }
        if pos == y_size {
            break;
        }
    }
}

/// Exhaustive minimum of the solver objective over the encoder lattice, with
/// greedy coordinate-descent refinement (step/10, projected back onto the
/// simplex) around the best grid point.
///
/// Refuses instances above [`MAX_DOF`] degrees of freedom.
pub fn oracle_min_objective(
    source: &JointPmf,
    betas: &[f64],
    spec: &GridSpec,
) -> Result<(f64, ConditionalPmf)> {
    if betas.len() != spec.u_sizes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} multipliers for {} stages",
            betas.len(),
            spec.u_sizes.len()
        )));
    }
    if betas.iter().any(|&b| !(b >= 0.0)) {
        return Err(Error::OutOfRange("multipliers must be nonnegative".into()));
    }
    let total = check_size(source, spec)?;
    let rows = candidate_rows(spec, total);
    let mut evaluator = Evaluator::new(source, betas, &spec.u_sizes);

    let mut best_obj = f64::INFINITY;
    let mut best = vec![0.0; source.y_size() * total];
    for_each_grid_encoder(&rows, source.y_size(), total, |flat| {
        let obj = evaluator.objective(flat);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(flat);
        }
    });

    if !spec.deterministic_only {
        let step = 1.0 / ((spec.resolution - 1) as f64) / 10.0;
        refine(&mut best, &mut best_obj, &mut evaluator, source.y_size(), total, step);
    }

    let encoder = ConditionalPmf::new(source.y_size(), spec.u_sizes.clone(), best)?;
    Ok((best_obj, encoder))
}

/// Greedy per-coordinate moves of size `step`, renormalizing the touched
/// slice; stops after 100 sweeps or when no move improves.
fn refine(
    encoder: &mut [f64],
    best_obj: &mut f64,
    evaluator: &mut Evaluator,
    y_size: usize,
    total: usize,
    step: f64,
) {
    let mut scratch = encoder.to_vec();
    for _ in 0..100 {
        let mut improved = false;
        for y in 0..y_size {
            for u in 0..total {
                for sign in [1.0, -1.0] {
                    scratch.copy_from_slice(encoder);
                    let row = &mut scratch[y * total..(y + 1) * total];
                    let moved = row[u] + sign * step;
                    if moved < 0.0 {
                        continue;
                    }
                    row[u] = moved;
                    let sum: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= sum);
                    let obj = evaluator.objective(&scratch);
                    if obj < *best_obj - 1e-15 {
                        *best_obj = obj;
                        encoder.copy_from_slice(&scratch);
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
}

fn dominates(a: &RegionPoint, b: &RegionPoint) -> bool {
    let mut strict = false;
    for (ra, rb) in a.rates.iter().zip(&b.rates) {
        if ra > rb {
            return false;
        }
        if ra < rb {
            strict = true;
        }
    }
    for (da, db) in a.relevances.iter().zip(&b.relevances) {
        if da < db {
            return false;
        }
        if da > db {
            strict = true;
        }
    }
    strict
}

/// Pareto-maximal region points (relevances up, rates down) over the encoder
/// lattice, sorted by sum rate. The deterministic sweep order makes the
/// result reproducible.
pub fn oracle_region_frontier(source: &JointPmf, spec: &GridSpec) -> Result<Vec<RegionPoint>> {
    let total = check_size(source, spec)?;
    let rows = candidate_rows(spec, total);
    let mut front: Vec<RegionPoint> = Vec::new();
    let mut failure: Option<Error> = None;
    for_each_grid_encoder(&rows, source.y_size(), total, |flat| {
        if failure.is_some() {
            return;
        }
        let encoder = match ConditionalPmf::new(source.y_size(), spec.u_sizes.clone(), flat.to_vec())
        {
            Ok(e) => e,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        let point = match extract_region_point(&encoder, source) {
            Ok(p) => p,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        if front.iter().any(|q| dominates(q, &point) || *q == point) {
            return;
        }
        front.retain(|q| !dominates(&point, q));
        front.push(point);
    });
    if let Some(e) = failure {
        return Err(e);
    }
    front.sort_by(|a, b| {
        let sa: f64 = a.rates.iter().sum();
        let sb: f64 = b.rates.iter().sum();
        sa.partial_cmp(&sb)
            .expect("finite rates")
            .then_with(|| a.rates.partial_cmp(&b.rates).expect("finite rates"))
    });
    Ok(front)
}
