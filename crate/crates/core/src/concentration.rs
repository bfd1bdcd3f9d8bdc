//! Anti-concentration for `Z = Phi(X_1, ..., X_N)` with independent `X_j`
//! and `Phi` satisfying a monotone gap condition: a Monte Carlo estimator
//! of `Q_Z(eps) = sup_x P(Z in [x, x + eps])`, an exact enumerator for small
//! discrete instances, and the bound `4/sqrt(N) sqrt(1/p+ + 1/p-)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::antichain::{compensated_sum, Antichain};
use crate::error::{Error, Result};
use crate::measure::{EmpiricalSample, ProbabilityMeasure};

/// Monte Carlo draws per shard; shard `i` is seeded with `seed + i`.
pub const SHARD_SIZE: usize = 1 << 16;
/// Probe pairs per coordinate used by [`MonotoneGapFunction::certify`].
pub const DEFAULT_PROBES: usize = 10_000;
/// Largest number of outcomes [`exact_q_discrete`] will enumerate.
pub const MAX_OUTCOMES: usize = 531_441; // 3^12

/// `4/sqrt(N) * sqrt(1/p+ + 1/p-)`, uncapped.
pub fn theorem_bound(n: usize, p_minus: f64, p_plus: f64) -> f64 {
    4.0 / (n as f64).sqrt() * (1.0 / p_plus + 1.0 / p_minus).sqrt()
}

/// The bound for `Phi` increasing in some coordinates and decreasing in
/// others: both margins replaced by `min{p+, p-}`.
pub fn theorem_bound_mixed(n: usize, p_minus: f64, p_plus: f64) -> f64 {
    let p = p_minus.min(p_plus);
    theorem_bound(n, p, p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginAssumption {
    pub x_minus: f64,
    pub x_plus: f64,
    pub p_minus: f64,
    pub p_plus: f64,
}

impl MarginAssumption {
    pub fn new(x_minus: f64, x_plus: f64, p_minus: f64, p_plus: f64) -> Result<Self> {
        if !(x_minus < x_plus) || !x_minus.is_finite() || !x_plus.is_finite() {
            return Err(Error::Domain(format!(
                "margins need x- < x+, got {x_minus} and {x_plus}"
            )));
        }
        if !(p_minus > 0.0 && p_minus <= 1.0 && p_plus > 0.0 && p_plus < 1.0) {
            return Err(Error::Domain(format!(
                "margin probabilities out of range: p- = {p_minus}, p+ = {p_plus}"
            )));
        }
        Ok(MarginAssumption {
            x_minus,
            x_plus,
            p_minus,
            p_plus,
        })
    }

    pub fn width(&self) -> f64 {
        self.x_plus - self.x_minus
    }

    /// Why `mu` fails the assumption, if it does. The upper inequality is
    /// strict and checked without tolerance.
    pub fn violation(&self, mu: &ProbabilityMeasure) -> Option<String> {
        let below = mu.cdf(self.x_minus);
        let above = 1.0 - mu.cdf(self.x_plus);
        if !(below >= self.p_minus) {
            Some(format!(
                "P(X <= {}) = {below} < {}",
                self.x_minus, self.p_minus
            ))
        } else if !(above > self.p_plus) {
            Some(format!(
                "P(X > {}) = {above} is not above {}",
                self.x_plus, self.p_plus
            ))
        } else {
            None
        }
    }
}

pub fn check_margins(mus: &[ProbabilityMeasure], m: &MarginAssumption) -> bool {
    mus.iter().all(|mu| m.violation(mu).is_none())
}

type PhiFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Built-in evaluators, plus a plug-in slot for user functions.
#[derive(Clone)]
pub enum Phi {
    /// `sum_j u_j`
    Sum,
    /// `sum_j w_j u_j` with every `w_j > 0`.
    WeightedSum(Vec<f64>),
    /// `sum_j (a u_j + c u_j^3)` with `a > 0`, `c >= 0`.
    PolyMono { a: f64, c: f64 },
    /// `sum_j u_j + max_j u_j`
    MaxPlus,
    /// `sum_j w_j u_j` with nonzero weights of either sign; decreasing in
    /// the coordinates with `w_j < 0`.
    Signed(Vec<f64>),
    /// User function, assumed non-decreasing in every coordinate.
    Custom { name: String, f: PhiFn },
}

impl fmt::Debug for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Sum => f.write_str("Sum"),
            Phi::WeightedSum(w) => f.debug_tuple("WeightedSum").field(w).finish(),
            Phi::PolyMono { a, c } => f
                .debug_struct("PolyMono")
                .field("a", a)
                .field("c", c)
                .finish(),
            Phi::MaxPlus => f.write_str("MaxPlus"),
            Phi::Signed(w) => f.debug_tuple("Signed").field(w).finish(),
            Phi::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

impl Phi {
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Phi::Sum => u.iter().sum(),
            Phi::WeightedSum(w) | Phi::Signed(w) => w.iter().zip(u).map(|(w, x)| w * x).sum(),
            Phi::PolyMono { a, c } => u.iter().map(|x| a * x + c * x * x * x).sum(),
            Phi::MaxPlus => {
                u.iter().sum::<f64>() + u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
            Phi::Custom { f, .. } => f(u),
        }
    }

    /// Number of coordinates the evaluator is tied to, if any.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Phi::WeightedSum(w) | Phi::Signed(w) => Some(w.len()),
            _ => None,
        }
    }

    /// True if some coordinate enters decreasingly.
    pub fn is_mixed(&self) -> bool {
        matches!(self, Phi::Signed(w) if w.iter().any(|&x| x < 0.0))
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Domain(msg.to_string()));
        match self {
            Phi::WeightedSum(w)
                if w.is_empty() || w.iter().any(|x| !(*x > 0.0) || !x.is_finite()) =>
            {
                bad("weighted sum needs finite positive weights")
            }
            Phi::Signed(w) if w.is_empty() || w.iter().any(|x| *x == 0.0 || !x.is_finite()) => {
                bad("signed sum needs finite nonzero weights")
            }
            Phi::PolyMono { a, c }
                if !(*a > 0.0 && *c >= 0.0 && a.is_finite() && c.is_finite()) =>
            {
                bad("monotone polynomial needs a > 0 and c >= 0")
            }
            _ => Ok(()),
        }
    }
}

/// Outcome of the randomized spot-check of the gap condition.
#[derive(Clone, Debug, PartialEq)]
pub struct Certification {
    pub probes: usize,
    pub violations: usize,
    /// Smallest observed `|Phi(u + v e_j) - Phi(u)|`.
    pub min_gap: f64,
}

impl Certification {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `Phi` together with the claimed gap parameters: for every `u`, `j` and
/// `v >= v_threshold`, `|Phi(u + v e_j) - Phi(u)| > epsilon`.
#[derive(Clone, Debug)]
pub struct MonotoneGapFunction {
    pub phi: Phi,
    pub v_threshold: f64,
    pub epsilon: f64,
}

impl MonotoneGapFunction {
    pub fn new(phi: Phi, v_threshold: f64, epsilon: f64) -> Result<Self> {
        phi.validate()?;
        if !(v_threshold > 0.0 && v_threshold.is_finite() && epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!(
                "gap parameters must be positive: v = {v_threshold}, eps = {epsilon}"
            )));
        }
        Ok(MonotoneGapFunction {
            phi,
            v_threshold,
            epsilon,
        })
    }

    /// Spot-checks the gap condition on `probes` random pairs per
    /// coordinate, with `u` uniform in `[lo, hi]^N` and `v` either the
    /// threshold itself or uniform in `[v, v + (hi - lo)]`.
    pub fn certify(&self, n: usize, lo: f64, hi: f64, probes: usize, seed: u64) -> Certification {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = vec![0.0; n];
        let mut count = 0;
        let mut violations = 0;
        let mut min_gap = f64::INFINITY;
        for j in 0..n {
            for k in 0..probes {
                for x in u.iter_mut() {
                    *x = rng.gen_range(lo..=hi);
                }
                let v = if k == 0 {
                    self.v_threshold
                } else {
                    self.v_threshold + rng.gen_range(0.0..=(hi - lo))
                };
                let base = self.phi.eval(&u);
                u[j] += v;
                let gap = (self.phi.eval(&u) - base).abs();
                count += 1;
                min_gap = min_gap.min(gap);
                if !(gap > self.epsilon) {
                    violations += 1;
                }
            }
        }
        Certification {
            probes: count,
            violations,
            min_gap,
        }
    }
}

/// Largest fraction of the sample in a closed window `[z_i, z_i + eps]`
/// anchored at a sample point; equals the plug-in `sup_x`.
pub fn estimate_q(sample: &EmpiricalSample, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "window width {epsilon} must be positive"
        )));
    }
    let v = sample.values();
    let mut best = 0usize;
    let mut hi = 0usize;
    for (i, &z) in v.iter().enumerate() {
        hi = hi.max(i);
        while hi < v.len() && v[hi] <= z + epsilon {
            hi += 1;
        }
        best = best.max(hi - i);
    }
    Ok(best as f64 / v.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationReport {
    pub epsilon: f64,
    pub q_hat: f64,
    pub bound: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub n: usize,
    /// `sqrt(q (1 - q) / n)`; a heuristic, since the window is chosen after
    /// seeing the data.
    pub std_error: f64,
    /// Exact `Q_Z(eps)` when the instance is small enough to enumerate.
    pub exact_q: Option<f64>,
}

impl ConcentrationReport {
    pub const CSV_HEADER: &'static str = "epsilon,q_hat,bound,n_samples,seed,N,std_error,exact_q";

    pub fn csv_row(&self) -> String {
        let exact = self.exact_q.map(|q| q.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.epsilon,
            self.q_hat,
            self.bound,
            self.n_samples,
            self.seed,
            self.n,
            self.std_error,
            exact
        )
    }

    pub fn within_bound(&self) -> bool {
        self.q_hat <= self.bound && self.exact_q.is_none_or(|q| q <= self.bound)
    }
}

fn check_instance(
    phi: &MonotoneGapFunction,
    mus: &[ProbabilityMeasure],
    m: &MarginAssumption,
) -> Result<()> {
    if mus.is_empty() {
        return Err(Error::Domain("need at least one coordinate".into()));
    }
    if let Some(k) = phi.phi.arity() {
        if k != mus.len() {
            return Err(Error::MixedDimensions);
        }
    }
    for (j, mu) in mus.iter().enumerate() {
        if let Some(why) = m.violation(mu) {
            return Err(Error::MarginViolation(format!(
                "coordinate {}: {why}",
                j + 1
            )));
        }
    }
    if phi.v_threshold > m.width() {
        return Err(Error::GapMismatch {
            v_threshold: phi.v_threshold,
            width: m.width(),
        });
    }
    Ok(())
}

fn bound_for(phi: &MonotoneGapFunction, n: usize, m: &MarginAssumption) -> f64 {
    if phi.phi.is_mixed() {
        theorem_bound_mixed(n, m.p_minus, m.p_plus)
    } else {
        theorem_bound(n, m.p_minus, m.p_plus)
    }
}

/// `n` draws of `Z`, generated in shards of [`SHARD_SIZE`] so that the
/// result does not depend on the number of worker threads.
pub fn sample_z(phi: &Phi, mus: &[ProbabilityMeasure], n: usize, seed: u64) -> Vec<f64> {
    let samplers: Vec<_> = mus.iter().map(ProbabilityMeasure::sampler).collect();
    let shards = n.div_ceil(SHARD_SIZE);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
            let count = SHARD_SIZE.min(n - s * SHARD_SIZE);
            let mut u = vec![0.0; samplers.len()];
            (0..count)
                .map(|_| {
                    for (x, sampler) in u.iter_mut().zip(&samplers) {
                        *x = sampler.draw(&mut rng);
                    }
                    phi.eval(&u)
                })
                .collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>()
        .concat()
}

pub fn monte_carlo_report(
    phi: &MonotoneGapFunction,
    mus: &[ProbabilityMeasure],
    m: &MarginAssumption,
    n_samples: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if n_samples < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    check_instance(phi, mus, m)?;
    let z = EmpiricalSample::new(sample_z(&phi.phi, mus, n_samples, seed))?;
    let q_hat = estimate_q(&z, phi.epsilon)?;
    Ok(ConcentrationReport {
        epsilon: phi.epsilon,
        q_hat,
        bound: bound_for(phi, mus.len(), m),
        n_samples,
        seed,
        n: mus.len(),
        std_error: (q_hat * (1.0 - q_hat) / n_samples as f64).sqrt(),
        exact_q: None,
    })
}

/// True when [`exact_q_discrete`] accepts the instance.
pub fn is_small_discrete(mus: &[ProbabilityMeasure]) -> bool {
    mus.len() <= 12
        && mus.iter().all(|m| m.is_atomic() && m.atoms().len() <= 3)
        && outcome_count(mus).is_some_and(|c| c <= MAX_OUTCOMES)
}

fn outcome_count(mus: &[ProbabilityMeasure]) -> Option<usize> {
    mus.iter()
        .try_fold(1usize, |acc, m| acc.checked_mul(m.atoms().len()))
}

/// Exact `sup_x P(Z in [x, x + eps])` by enumerating every outcome.
pub fn exact_q_discrete(phi: &Phi, mus: &[ProbabilityMeasure], epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "window width {epsilon} must be positive"
        )));
    }
    if mus.is_empty() {
        return Err(Error::Domain("need at least one coordinate".into()));
    }
    if let Some(m) = mus.iter().find(|m| !m.is_atomic()) {
        return Err(Error::Domain(format!(
            "exact enumeration needs atomic measures, got {} segments",
            m.segments().len()
        )));
    }
    if !is_small_discrete(mus) {
        return Err(Error::TooLarge(
            "exact enumeration supports N <= 12 with at most 3 atoms each".into(),
        ));
    }
    let n = mus.len();
    let mut idx = vec![0usize; n];
    let mut u = vec![0.0; n];
    let mut outcomes: Vec<(f64, f64)> = Vec::new();
    'outer: loop {
        let mut prob = 1.0;
        for j in 0..n {
            let a = mus[j].atoms()[idx[j]];
            u[j] = a.location;
            prob *= a.mass;
        }
        outcomes.push((phi.eval(&u), prob));
        for j in 0..n {
            idx[j] += 1;
            if idx[j] < mus[j].atoms().len() {
                continue 'outer;
            }
            idx[j] = 0;
        }
        break;
    }
    outcomes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut best = 0.0f64;
    let mut hi = 0usize;
    for i in 0..outcomes.len() {
        if i > 0 && outcomes[i].0 == outcomes[i - 1].0 {
            continue;
        }
        hi = hi.max(i);
        while hi < outcomes.len() && outcomes[hi].0 <= outcomes[i].0 + epsilon {
            hi += 1;
        }
        best = best.max(compensated_sum(outcomes[i..hi].iter().map(|o| o.1)));
    }
    Ok(best)
}

/// `eps [sum_j eps_j^2 (1 - q_j)]^{-1/2}`, without any leading constant.
pub fn rogozin_functional(epsilon: f64, eps_j: &[f64], q_j: &[f64]) -> Result<f64> {
    if eps_j.len() != q_j.len() {
        return Err(Error::Domain(format!(
            "{} widths but {} concentration values",
            eps_j.len(),
            q_j.len()
        )));
    }
    if q_j.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err(Error::Domain(
            "concentration values must lie in [0,1]".into(),
        ));
    }
    let s: f64 = eps_j.iter().zip(q_j).map(|(e, q)| e * e * (1.0 - q)).sum();
    if !(s > 0.0) {
        return Err(Error::Domain(
            "the functional's denominator vanishes".into(),
        ));
    }
    Ok(epsilon / s.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultisetQ {
    /// `P(tau in A)`.
    pub probability: f64,
    /// The concentration bound at window width 1/2 with the derived margins.
    pub bound: f64,
    pub margins: MarginAssumption,
}

/// Probability of a multiset antichain under independent integer-valued
/// `tau_j`, and the concentration bound it is subject to.
///
/// The margins are `x- = m`, `x+ = m + 1/2` for the integer level `m`
/// giving the smallest bound, with `p- = min_j P(tau_j <= m)` and
/// `p+ = min_j P(tau_j > m)`. The latter is the limit of admissible values
/// for the strict inequality; the bound is continuous in `p+`, so it holds
/// there as well.
pub fn multiset_antichain_q(a: &Antichain, mus: &[ProbabilityMeasure]) -> Result<MultisetQ> {
    if a.n() != mus.len() {
        return Err(Error::MixedDimensions);
    }
    for mu in mus {
        if !mu.is_atomic()
            || mu
                .atoms()
                .iter()
                .any(|at| at.location < 0.0 || at.location.fract() != 0.0)
        {
            return Err(Error::MarginDerivationFailed(
                "every coordinate must be atomic on non-negative integers".into(),
            ));
        }
    }
    let top = mus
        .iter()
        .map(|mu| mu.support().1 as u64)
        .max()
        .unwrap_or(0);
    let mut best: Option<MarginAssumption> = None;
    for m in 0..top {
        let x = m as f64;
        let p_minus = mus.iter().map(|mu| mu.cdf(x)).fold(1.0, f64::min);
        let p_plus = mus.iter().map(|mu| 1.0 - mu.cdf(x)).fold(1.0, f64::min);
        if p_minus > 0.0 && p_plus > 0.0 {
            let cand = MarginAssumption {
                x_minus: x,
                x_plus: x + 0.5,
                p_minus,
                p_plus,
            };
            let better = best.is_none_or(|b| {
                theorem_bound(a.n(), p_minus, p_plus) < theorem_bound(a.n(), b.p_minus, b.p_plus)
            });
            if better {
                best = Some(cand);
            }
        }
    }
    let margins = best.ok_or_else(|| {
        Error::MarginDerivationFailed("no integer level splits every coordinate".into())
    })?;
    let probability = compensated_sum(a.members().iter().map(|c| {
        c.values()
            .iter()
            .zip(mus)
            .map(|(&v, mu)| mu.atom_mass(v as f64))
            .product::<f64>()
    }));
    Ok(MultisetQ {
        probability,
        bound: theorem_bound(a.n(), margins.p_minus, margins.p_plus),
        margins,
    })
}

/// Which coordinates a `dist` line applies to.
#[derive(Clone, Debug, PartialEq)]
pub enum DistTarget {
    All,
    /// 1-based coordinate index.
    Coordinate(usize),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub phi: Phi,
    pub dims: Option<usize>,
    pub dists: Vec<(DistTarget, String)>,
    pub margins: MarginAssumption,
    pub epsilon: f64,
    pub samples: usize,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    /// Default Monte Carlo sample count.
    pub const DEFAULT_SAMPLES: usize = 1_000_000;

    /// The distribution file for each coordinate, in order.
    pub fn coordinate_files(&self) -> Result<Vec<String>> {
        let all = self
            .dists
            .iter()
            .find(|(t, _)| *t == DistTarget::All)
            .map(|d| &d.1);
        let max_index = self
            .dists
            .iter()
            .filter_map(|(t, _)| match t {
                DistTarget::Coordinate(j) => Some(*j),
                DistTarget::All => None,
            })
            .max();
        let n = self
            .dims
            .or(self.phi.arity())
            .or(max_index)
            .ok_or_else(|| Error::parse(0, "cannot infer the number of coordinates; add 'dims'"))?;
        let mut files: Vec<Option<String>> = vec![all.cloned(); n];
        for (t, path) in &self.dists {
            if let DistTarget::Coordinate(j) = t {
                if *j > n {
                    return Err(Error::parse(0, format!("dist {j} exceeds dims {n}")));
                }
                files[j - 1] = Some(path.clone());
            }
        }
        files
            .into_iter()
            .enumerate()
            .map(|(j, f)| {
                f.ok_or_else(|| Error::parse(0, format!("no dist for coordinate {}", j + 1)))
            })
            .collect()
    }

    pub fn gap_function(&self) -> Result<MonotoneGapFunction> {
        MonotoneGapFunction::new(self.phi.clone(), self.margins.width(), self.epsilon)
    }
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::parse(line, format!("'{tok}' is not a finite number")))
}

/// Parses an experiment description: `phi`, `dims`, `dist`, `margins`,
/// `epsilon`, `samples`, `seed` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut phi = None;
    let mut dims = None;
    let mut dists = Vec::new();
    let mut margins = None;
    let mut epsilon = None;
    let mut samples = ExperimentConfig::DEFAULT_SAMPLES;
    let mut seed = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks: Vec<&str> = raw
            .split('#')
            .next()
            .unwrap_or("")
            .split_whitespace()
            .collect();
        let Some((&key, args)) = toks.split_first() else {
            continue;
        };
        let nums = || {
            args.iter()
                .map(|t| parse_f64(line, t))
                .collect::<Result<Vec<f64>>>()
        };
        let count = |want: usize| {
            if args.len() == want {
                Ok(())
            } else {
                Err(Error::parse(
                    line,
                    format!("'{key}' takes {want} argument(s)"),
                ))
            }
        };
        match key {
            "phi" => {
                let (&kind, rest) = args
                    .split_first()
                    .ok_or_else(|| Error::parse(line, "'phi' needs a kind"))?;
                let w = || {
                    rest.iter()
                        .map(|t| parse_f64(line, t))
                        .collect::<Result<Vec<f64>>>()
                };
                let p = match (kind, rest.len()) {
                    ("sum", 0) => Phi::Sum,
                    ("maxplus", 0) => Phi::MaxPlus,
                    ("wsum", k) if k > 0 => Phi::WeightedSum(w()?),
                    ("signed", k) if k > 0 => Phi::Signed(w()?),
                    ("polymono", 2) => {
                        let v = w()?;
                        Phi::PolyMono { a: v[0], c: v[1] }
                    }
                    _ => {
                        return Err(Error::parse(
                            line,
                            format!("bad phi specification '{}'", args.join(" ")),
                        ))
                    }
                };
                p.validate()
                    .map_err(|e| Error::parse(line, e.to_string()))?;
                phi = Some(p);
            }
            "dims" => {
                count(1)?;
                dims = Some(
                    args[0]
                        .parse::<usize>()
                        .ok()
                        .filter(|&n| n > 0)
                        .ok_or_else(|| Error::parse(line, "dims must be a positive integer"))?,
                );
            }
            "dist" => {
                count(2)?;
                let target = if args[0] == "all" {
                    DistTarget::All
                } else {
                    DistTarget::Coordinate(
                        args[0]
                            .parse::<usize>()
                            .ok()
                            .filter(|&j| j > 0)
                            .ok_or_else(|| {
                                Error::parse(line, "dist index must be 'all' or a positive integer")
                            })?,
                    )
                };
                dists.push((target, args[1].to_string()));
            }
            "margins" => {
                count(4)?;
                let v = nums()?;
                margins = Some(
                    MarginAssumption::new(v[0], v[1], v[2], v[3])
                        .map_err(|e| Error::parse(line, e.to_string()))?,
                );
            }
            "epsilon" => {
                count(1)?;
                epsilon = Some(nums()?[0]);
            }
            "samples" => {
                count(1)?;
                samples = args[0]
                    .parse()
                    .map_err(|_| Error::parse(line, "samples must be a non-negative integer"))?;
            }
            "seed" => {
                count(1)?;
                seed = Some(
                    args[0]
                        .parse()
                        .map_err(|_| Error::parse(line, "seed must be a non-negative integer"))?,
                );
            }
            other => return Err(Error::parse(line, format!("unknown key '{other}'"))),
        }
    }
    let missing = |what: &str| Error::parse(0, format!("missing '{what}' line"));
    if dists.is_empty() {
        return Err(missing("dist"));
    }
    Ok(ExperimentConfig {
        phi: phi.ok_or_else(|| missing("phi"))?,
        dims,
        dists,
        margins: margins.ok_or_else(|| missing("margins"))?,
        epsilon: epsilon.ok_or_else(|| missing("epsilon"))?,
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antichain::Configuration;

    fn bern() -> ProbabilityMeasure {
        ProbabilityMeasure::atomic(&[(0.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn unif() -> ProbabilityMeasure {
        ProbabilityMeasure::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn bound_formula() {
        assert!((theorem_bound(100, 0.25, 0.2) - 1.2).abs() < 1e-12);
        assert!((theorem_bound(10_000, 0.25, 0.2) - 0.12).abs() < 1e-12);
        assert_eq!(theorem_bound(1, 0.5, 0.5), 8.0);
        assert!((theorem_bound_mixed(100, 0.25, 0.2) - 0.4 * 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn margin_examples() {
        let m = MarginAssumption::new(0.25, 0.75, 0.25, 0.2).unwrap();
        assert!(check_margins(&[unif()], &m));
        let strict = MarginAssumption::new(0.25, 0.75, 0.25, 0.25).unwrap();
        assert!(!check_margins(&[unif()], &strict));
        let m = MarginAssumption::new(0.0, 0.5, 0.5, 0.4).unwrap();
        assert!(check_margins(&[bern()], &m));
        assert!(MarginAssumption::new(1.0, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn window_estimator() {
        let s = |v: &[f64]| EmpiricalSample::new(v.to_vec()).unwrap();
        assert_eq!(estimate_q(&s(&[0.0, 1.0, 2.0, 3.0]), 1.0).unwrap(), 0.5);
        assert_eq!(estimate_q(&s(&[2.0; 5]), 0.1).unwrap(), 1.0);
        assert_eq!(estimate_q(&s(&[0.0, 10.0, 20.0, 30.0]), 1.0).unwrap(), 0.25);
        assert!(estimate_q(&s(&[0.0, 1.0]), 0.0).is_err());
    }

    #[test]
    fn exact_examples() {
        assert_eq!(
            exact_q_discrete(&Phi::Sum, &vec![bern(); 4], 0.5).unwrap(),
            0.375
        );
        assert_eq!(exact_q_discrete(&Phi::Sum, &[bern()], 0.5).unwrap(), 0.5);
        // Phi values 0, 2, 2, 3
        assert_eq!(
            exact_q_discrete(&Phi::MaxPlus, &vec![bern(); 2], 0.5).unwrap(),
            0.5
        );
        assert_eq!(
            exact_q_discrete(&Phi::MaxPlus, &vec![bern(); 2], 1.0).unwrap(),
            0.75
        );
        assert!(matches!(
            exact_q_discrete(&Phi::Sum, &vec![bern(); 13], 0.5),
            Err(Error::TooLarge(_))
        ));
        assert!(exact_q_discrete(&Phi::Sum, &[unif()], 0.5).is_err());
    }

    #[test]
    fn monte_carlo_small() {
        let phi = MonotoneGapFunction::new(Phi::Sum, 0.5, 0.5).unwrap();
        let m = MarginAssumption::new(0.0, 0.5, 0.5, 0.4).unwrap();
        let r = monte_carlo_report(&phi, &vec![bern(); 4], &m, 100_000, 11).unwrap();
        assert!((r.q_hat - 0.375).abs() < 4.0 * r.std_error);
        assert!((r.bound - 2.0 * 4.5f64.sqrt()).abs() < 1e-12);
        assert!(monte_carlo_report(&phi, &vec![bern(); 4], &m, 0, 11).is_err());
        let r2 = monte_carlo_report(&phi, &vec![bern(); 4], &m, 100_000, 11).unwrap();
        assert_eq!(r, r2);
    }

    #[test]
    fn monte_carlo_errors() {
        let phi = MonotoneGapFunction::new(Phi::Sum, 0.6, 0.4).unwrap();
        let m = MarginAssumption::new(0.25, 0.75, 0.25, 0.2).unwrap();
        assert_eq!(
            monte_carlo_report(&phi, &[unif()], &m, 10, 1),
            Err(Error::GapMismatch {
                v_threshold: 0.6,
                width: 0.5
            })
        );
        let phi = MonotoneGapFunction::new(Phi::Sum, 0.5, 0.4).unwrap();
        let strict = MarginAssumption::new(0.25, 0.75, 0.25, 0.25).unwrap();
        assert!(matches!(
            monte_carlo_report(&phi, &[unif()], &strict, 10, 1),
            Err(Error::MarginViolation(_))
        ));
    }

    #[test]
    fn certification() {
        let phi = MonotoneGapFunction::new(Phi::Sum, 0.5, 0.4).unwrap();
        let c = phi.certify(3, 0.0, 1.0, 1000, 5);
        assert_eq!((c.probes, c.violations), (3000, 0));
        assert!((c.min_gap - 0.5).abs() < 1e-12);
        // gap exactly equal to eps at the threshold is not enough
        let edge = MonotoneGapFunction::new(Phi::Sum, 0.5, 0.5).unwrap();
        assert!(!edge.certify(2, 0.0, 1.0, 100, 5).passed());
        let poly = MonotoneGapFunction::new(Phi::PolyMono { a: 1.0, c: 0.5 }, 0.5, 0.4).unwrap();
        assert!(poly.certify(4, -1.0, 2.0, 1000, 5).passed());
        let signed = MonotoneGapFunction::new(Phi::Signed(vec![1.0, -1.0]), 0.5, 0.4).unwrap();
        assert!(signed.certify(2, 0.0, 1.0, 1000, 5).passed());
        assert!(MonotoneGapFunction::new(Phi::WeightedSum(vec![1.0, 0.0]), 0.5, 0.4).is_err());
    }

    #[test]
    fn rogozin_examples() {
        assert!((rogozin_functional(1.0, &[1.0; 9], &[0.0; 9]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(rogozin_functional(1.0, &[1.0; 3], &[1.0; 3]).is_err());
        let v = rogozin_functional(0.4, &[0.4; 100], &[0.4; 100]).unwrap();
        assert!((v - 0.12909944487358).abs() < 1e-12);
    }

    #[test]
    fn multiset_examples() {
        let middle = Antichain::layer(4, 2).unwrap();
        let r = multiset_antichain_q(&middle, &vec![bern(); 4]).unwrap();
        assert_eq!(r.probability, 0.375);
        assert_eq!(r.bound, 4.0);

        let third = 1.0 / 3.0;
        let tri = ProbabilityMeasure::atomic(&[(0.0, third), (1.0, third), (2.0, third)]).unwrap();
        let cfg = |v: &[u32]| Configuration::new(v.to_vec()).unwrap();
        let a = Antichain::new(vec![cfg(&[0, 2]), cfg(&[1, 1]), cfg(&[2, 0])]).unwrap();
        let r = multiset_antichain_q(&a, &vec![tri.clone(); 2]).unwrap();
        assert!((r.probability - third).abs() < 1e-15);
        assert!(r.probability <= r.bound);

        let r = multiset_antichain_q(&Antichain::empty(2), &vec![tri; 2]).unwrap();
        assert_eq!(r.probability, 0.0);

        let point = ProbabilityMeasure::atomic(&[(1.0, 1.0)]).unwrap();
        assert!(matches!(
            multiset_antichain_q(&Antichain::empty(1), &[point]),
            Err(Error::MarginDerivationFailed(_))
        ));
    }

    #[test]
    fn config_parsing() {
        let text = "# demo\nphi sum\ndims 3\ndist all u.txt\ndist 2 b.txt\nmargins 0.25 0.75 0.25 0.2\nepsilon 0.4\nsamples 1000\nseed 7\n";
        let c = parse_config(text).unwrap();
        assert_eq!(
            c.coordinate_files().unwrap(),
            vec!["u.txt", "b.txt", "u.txt"]
        );
        assert_eq!((c.samples, c.seed, c.epsilon), (1000, Some(7), 0.4));
        assert_eq!(c.gap_function().unwrap().v_threshold, 0.5);

        let c = parse_config("phi wsum 1 2\ndist 1 a\ndist 2 b\nmargins 0 1 0.5 0.1\nepsilon 0.5")
            .unwrap();
        assert_eq!(c.coordinate_files().unwrap(), vec!["a", "b"]);
        assert_eq!(c.samples, ExperimentConfig::DEFAULT_SAMPLES);

        let c =
            parse_config("phi sum\ndims 2\ndist 1 a\nmargins 0 1 0.5 0.1\nepsilon 0.5").unwrap();
        assert!(c.coordinate_files().is_err());
        assert!(matches!(
            parse_config("phi cube\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("phi sum\nwidth 3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_config("phi sum\ndist 1 a\nepsilon 0.5").is_err());
    }
}
