//! Exact finite-probability primitives: pmf containers, entropies, mutual
//! information, binary entropy and its inverse, binary convolution.
//!
//! All information quantities are in bits (log base 2). The convention
//! `0 * log 0 = 0` is applied throughout, and probabilities below
//! [`ZERO_PROB`] are treated as exact zeros in entropy sums.

use crate::error::{Error, Result};

/// Probabilities below this threshold are treated as exact zeros.
pub const ZERO_PROB: f64 = 1e-15;

/// Tiny negative information values above this are rounded to zero;
/// anything more negative is an internal-consistency violation.
const NEG_INFO_TOL: f64 = -1e-12;

/// Absolute tolerance on the total mass of a joint pmf.
const JOINT_SUM_TOL: f64 = 1e-12;

/// Absolute tolerance on the mass of a marginal or a conditional slice.
const SLICE_SUM_TOL: f64 = 1e-10;

fn clamp_information(value: f64, what: &str) -> f64 {
    if value >= 0.0 {
        value
    } else if value > NEG_INFO_TOL {
        0.0
    } else {
        panic!("internal consistency: {what} = {value} is negative beyond tolerance");
    }
}

// ---------------------------------------------------------------------------
// Containers
// ---------------------------------------------------------------------------

/// A probability distribution over a (possibly multi-symbol) finite alphabet.
///
/// Stored row-major over `shape`; a shape of `[4]` is a plain pmf, a shape of
/// `[2, 3]` is a joint pmf over a product alphabet, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    shape: Vec<usize>,
    probs: Vec<f64>,
}

impl Marginal {
    pub fn new(shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::InvalidDistribution(format!(
                "marginal shape must be nonempty with positive extents, got {shape:?}"
            )));
        }
        let cells: usize = shape.iter().product();
        if probs.len() != cells {
            return Err(Error::DimensionMismatch(format!(
                "marginal over shape {shape:?} needs {cells} entries, got {}",
                probs.len()
            )));
        }
        if let Some(&bad) = probs.iter().find(|&&p| !(p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "marginal contains negative or NaN entry {bad}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SLICE_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "marginal mass is {sum}, expected 1 within {SLICE_SUM_TOL}"
            )));
        }
        Ok(Self { shape, probs })
    }

    /// Uniform distribution over `n` symbols.
    pub fn uniform(n: usize) -> Self {
        Self {
            shape: vec![n],
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass on symbol `at` of an `n`-symbol alphabet.
    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self {
            shape: vec![n],
            probs,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Row-major strides of the shape.
    fn strides(&self) -> Vec<usize> {
        strides_of(&self.shape)
    }

    /// Sum out every axis not listed in `keep`; the output axes appear in the
    /// order given (so this also permutes).
    pub fn marginalize_keep(&self, keep: &[usize]) -> Marginal {
        assert!(
            keep.iter().all(|&a| a < self.shape.len()),
            "axis out of range in marginalize_keep"
        );
        let out_shape: Vec<usize> = keep.iter().map(|&a| self.shape[a]).collect();
        let out_strides = strides_of(&out_shape);
        let in_strides = self.strides();
        let mut out = vec![0.0; out_shape.iter().product()];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut idx = 0;
            for (k, &axis) in keep.iter().enumerate() {
                let coord = (flat / in_strides[axis]) % self.shape[axis];
                idx += coord * out_strides[k];
            }
            out[idx] += p;
        }
        Marginal {
            shape: out_shape,
            probs: out,
        }
    }

    /// View the same mass as a two-axis joint: the first `split` axes are
    /// flattened into one symbol, the remaining axes into the other.
    pub fn group_axes(&self, split: usize) -> Marginal {
        assert!(
            split > 0 && split < self.shape.len(),
            "group_axes split must be interior"
        );
        let head: usize = self.shape[..split].iter().product();
        let tail: usize = self.shape[split..].iter().product();
        Marginal {
            shape: vec![head, tail],
            probs: self.probs.clone(),
        }
    }
}

fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; shape.len()];
    for d in (0..shape.len().saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * shape[d + 1];
    }
    strides
}

/// A joint distribution of the source `X` and the observation `Y`.
///
/// Entries are indexed `(x, y)` row-major. This is the ground-truth input of
/// the solver; it also supplies `p(x)`, `p(y)`, `p(x|y)` and `p(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    x_size: usize,
    y_size: usize,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(x_size: usize, y_size: usize, probs: Vec<f64>) -> Result<Self> {
        if x_size == 0 || y_size == 0 {
            return Err(Error::InvalidDistribution(
                "alphabet sizes must be positive".into(),
            ));
        }
        if probs.len() != x_size * y_size {
            return Err(Error::DimensionMismatch(format!(
                "joint over {x_size}x{y_size} needs {} entries, got {}",
                x_size * y_size,
                probs.len()
            )));
        }
        if let Some(&bad) = probs.iter().find(|&&p| !(p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "joint contains negative or NaN entry {bad}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > JOINT_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "joint mass is {sum}, expected 1 within {JOINT_SUM_TOL}"
            )));
        }
        Ok(Self {
            x_size,
            y_size,
            probs,
        })
    }

    /// Uniform binary `Y` observed through a crossover-`p` symmetric flip:
    /// `X = Y xor N`, `N ~ Bern(p)`.
    pub fn binary_symmetric(crossover: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&crossover) {
            return Err(Error::OutOfRange(format!(
                "crossover probability must lie in [0, 1/2], got {crossover}"
            )));
        }
        let same = 0.5 * (1.0 - crossover);
        let diff = 0.5 * crossover;
        Self::new(2, 2, vec![same, diff, diff, same])
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.y_size + y]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `p(x)` as a one-axis marginal.
    pub fn x_marginal(&self) -> Marginal {
        let mut px = vec![0.0; self.x_size];
        for x in 0..self.x_size {
            for y in 0..self.y_size {
                px[x] += self.prob(x, y);
            }
        }
        Marginal {
            shape: vec![self.x_size],
            probs: px,
        }
    }

    /// `p(y)` as a one-axis marginal.
    pub fn y_marginal(&self) -> Marginal {
        let mut py = vec![0.0; self.y_size];
        for x in 0..self.x_size {
            for y in 0..self.y_size {
                py[y] += self.prob(x, y);
            }
        }
        Marginal {
            shape: vec![self.y_size],
            probs: py,
        }
    }

    /// The same mass as a two-axis `Marginal` over `(x, y)`.
    pub fn as_marginal(&self) -> Marginal {
        Marginal {
            shape: vec![self.x_size, self.y_size],
            probs: self.probs.clone(),
        }
    }
}

/// A conditional distribution `p(out-tuple | given)`.
///
/// `out_shape` may have several axes, supporting multi-symbol outputs such as
/// the description tuple `(u_1, ..., u_T)`. Entries are indexed by the
/// conditioning value first, then row-major over the output tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPmf {
    given_size: usize,
    out_shape: Vec<usize>,
    probs: Vec<f64>,
}

impl ConditionalPmf {
    pub fn new(given_size: usize, out_shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if given_size == 0 || out_shape.is_empty() || out_shape.contains(&0) {
            return Err(Error::InvalidDistribution(
                "conditional pmf needs positive alphabet sizes".into(),
            ));
        }
        let out_len: usize = out_shape.iter().product();
        if probs.len() != given_size * out_len {
            return Err(Error::DimensionMismatch(format!(
                "conditional over {given_size} x {out_shape:?} needs {} entries, got {}",
                given_size * out_len,
                probs.len()
            )));
        }
        if let Some(&bad) = probs.iter().find(|&&p| !(p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "conditional contains negative or NaN entry {bad}"
            )));
        }
        for g in 0..given_size {
            let sum: f64 = probs[g * out_len..(g + 1) * out_len].iter().sum();
            if (sum - 1.0).abs() > SLICE_SUM_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "conditional slice for value {g} has mass {sum}, expected 1 within {SLICE_SUM_TOL}"
                )));
            }
        }
        Ok(Self {
            given_size,
            out_shape,
            probs,
        })
    }

    pub fn given_size(&self) -> usize {
        self.given_size
    }

    pub fn out_shape(&self) -> &[usize] {
        &self.out_shape
    }

    pub fn out_len(&self) -> usize {
        self.out_shape.iter().product()
    }

    /// The slice `p(. | given)`.
    pub fn row(&self, given: usize) -> &[f64] {
        let n = self.out_len();
        &self.probs[given * n..(given + 1) * n]
    }

    pub fn prob(&self, given: usize, out_flat: usize) -> f64 {
        self.probs[given * self.out_len() + out_flat]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

// ---------------------------------------------------------------------------
// Information measures
// ---------------------------------------------------------------------------

/// Shannon entropy of a marginal, in bits.
pub fn entropy(m: &Marginal) -> f64 {
    neg_sum_p_log2_p(m.probs())
}

fn neg_sum_p_log2_p(probs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in probs {
        if p > ZERO_PROB {
            h -= p * p.log2();
        }
    }
    clamp_information(h, "entropy")
}

/// Binary entropy `h2(p) = -p log2 p - (1-p) log2 (1-p)`, in bits.
///
/// ```
/// assert_eq!(sib_core::prob::h2(0.5).unwrap(), 1.0);
/// assert!((sib_core::prob::h2(0.2).unwrap() - 0.721928).abs() < 1e-6);
/// ```
pub fn h2(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!(
            "binary entropy argument must lie in [0, 1], got {p}"
        )));
    }
    Ok(h2_unchecked(p))
}

fn h2_unchecked(p: f64) -> f64 {
    let mut h = 0.0;
    if p > ZERO_PROB {
        h -= p * p.log2();
    }
    let q = 1.0 - p;
    if q > ZERO_PROB {
        h -= q * q.log2();
    }
    h
}

/// Inverse of the binary entropy function restricted to `[0, 1/2]`.
///
/// Located by bisection to bracket width 1e-12; the endpoints `v = 0` and
/// `v = 1` map exactly to 0 and 1/2.
pub fn h2_inv(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange(format!(
            "binary entropy value must lie in [0, 1], got {v}"
        )));
    }
    if v <= 0.0 {
        return Ok(0.0);
    }
    if v >= 1.0 {
        return Ok(0.5);
    }
    // h2 is strictly increasing on [0, 1/2]; plain bisection is robust where
    // the derivative blows up (near 0) or vanishes (near 1/2).
    let mut lo = 0.0f64;
    let mut hi = 0.5f64;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h2_unchecked(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Binary convolution `a * b = a(1-b) + b(1-a)`: the crossover probability of
/// two cascaded symmetric flips.
pub fn star(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::OutOfRange(format!(
            "binary convolution arguments must lie in [0, 1], got ({a}, {b})"
        )));
    }
    Ok(a * (1.0 - b) + b * (1.0 - a))
}

/// Mutual information `I(X;Y) = H(X) + H(Y) - H(X,Y)` of a joint pmf, in bits.
pub fn mutual_information(j: &JointPmf) -> f64 {
    mutual_information_between(&j.as_marginal(), 1)
}

/// Mutual information between the first `split` axes and the remaining axes
/// of a multi-axis joint.
pub fn mutual_information_between(m: &Marginal, split: usize) -> f64 {
    let grouped = if m.shape().len() == 2 && split == 1 {
        m.clone()
    } else {
        m.group_axes(split)
    };
    let ha = entropy(&grouped.marginalize_keep(&[0]));
    let hb = entropy(&grouped.marginalize_keep(&[1]));
    let hab = entropy(&grouped);
    clamp_information(ha + hb - hab, "mutual information")
}

/// Conditional mutual information `I(A;B|C)` of a joint over `(A, B, C...)`:
/// axis 0 is `A`, axis 1 is `B`, and all remaining axes jointly form `C`.
///
/// Computed as `H(A,C) + H(B,C) - H(C) - H(A,B,C)`, which equals the weighted
/// per-`c` mutual information. With no `C` axes this is plain `I(A;B)`.
pub fn conditional_mi(joint: &Marginal) -> f64 {
    let axes = joint.shape().len();
    assert!(axes >= 2, "conditional_mi needs at least two axes");
    if axes == 2 {
        return mutual_information_between(joint, 1);
    }
    let c_axes: Vec<usize> = (2..axes).collect();
    let mut ac_axes = vec![0];
    ac_axes.extend_from_slice(&c_axes);
    let mut bc_axes = vec![1];
    bc_axes.extend_from_slice(&c_axes);

    let h_ac = entropy(&joint.marginalize_keep(&ac_axes));
    let h_bc = entropy(&joint.marginalize_keep(&bc_axes));
    let h_c = entropy(&joint.marginalize_keep(&c_axes));
    let h_abc = entropy(joint);
    clamp_information(h_ac + h_bc - h_c - h_abc, "conditional mutual information")
}
