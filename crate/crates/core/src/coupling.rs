//! Distribution-function side of the optimal coupling problem.
//!
//! Everything here works on CDFs directly and never touches quantile
//! functions, so it serves as an independent route to the chasing gap and as
//! the engine of the brute-force coupling oracle.

use crate::error::{Error, Result};
use crate::measure::ProbabilityMeasure;

const TOL: f64 = 1e-12;

/// A right-continuous, non-decreasing, piecewise-linear distribution
/// function: vertices `x_i` with `F(x_i-)` and `F(x_i)`, linear in between,
/// 0 before the first vertex and 1 after the last.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCdf {
    xs: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl LinearCdf {
    fn from_fn(mut xs: Vec<f64>, f: impl Fn(f64) -> f64, f_left: impl Fn(f64) -> f64) -> Self {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let left = xs.iter().map(|&x| f_left(x)).collect();
        let right = xs.iter().map(|&x| f(x)).collect();
        LinearCdf { xs, left, right }
    }

    /// Step CDF of finitely many weighted points; zero weights are dropped.
    pub fn atomic(points: &[(f64, f64)]) -> Self {
        let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(_, w)| w > 0.0).collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let total: f64 = pts.iter().map(|p| p.1).sum();
        let mut xs = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut acc = 0.0;
        for (x, w) in pts {
            if xs.last() == Some(&x) {
                acc += w / total;
                *right.last_mut().unwrap() = acc;
                continue;
            }
            xs.push(x);
            left.push(acc);
            acc += w / total;
            right.push(acc);
        }
        if let Some(last) = right.last_mut() {
            *last = 1.0;
        }
        LinearCdf { xs, left, right }
    }

    pub fn vertices(&self) -> &[f64] {
        &self.xs
    }

    /// `F(x)`, snapping to a vertex within tolerance.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_sided(x, false)
    }

    /// `F(x-)`, snapping to a vertex within tolerance.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.eval_sided(x, true)
    }

    fn eval_sided(&self, x: f64, left_limit: bool) -> f64 {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&v| v < x - TOL);
        if i < n && (self.xs[i] - x).abs() <= TOL {
            return if left_limit {
                self.left[i]
            } else {
                self.right[i]
            };
        }
        if i == 0 {
            return 0.0;
        }
        if i == n {
            return 1.0;
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (f0, f1) = (self.right[i - 1], self.left[i]);
        if f0 == f1 {
            f0
        } else {
            f0 + (f1 - f0) * ((x - x0) / (x1 - x0))
        }
    }

    /// `inf{z : F(z) >= y}` for `y` in (0, 1].
    fn first_reaching(&self, y: f64) -> Option<f64> {
        if !(y > 0.0) {
            return None;
        }
        for i in 0..self.xs.len() {
            if i > 0 {
                let (a, b) = (self.right[i - 1], self.left[i]);
                if b >= y && b > a {
                    let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                    return Some(x0 + (x1 - x0) * ((y - a) / (b - a)));
                }
            }
            if self.right[i] >= y {
                return Some(self.xs[i]);
            }
        }
        None
    }

    /// `sup{z : F(z-) <= y}` for `y` in [0, 1).
    fn last_below(&self, y: f64) -> Option<f64> {
        if !(y < 1.0) {
            return None;
        }
        let n = self.xs.len();
        for i in (0..n).rev() {
            if i + 1 < n {
                let (a, b) = (self.right[i], self.left[i + 1]);
                if a <= y && b > a {
                    let (x0, x1) = (self.xs[i], self.xs[i + 1]);
                    return Some(x0 + (x1 - x0) * ((y - a) / (b - a)));
                }
            }
            if self.left[i] <= y {
                return Some(self.xs[i]);
            }
        }
        None
    }
}

/// Does `F1(x) >= F2(x + b)` hold for every real `x` (up to `TOL`)?
///
/// Between consecutive points of the merged vertex set the difference is
/// affine, so it suffices to check both one-sided limits at those points.
pub fn dominates(f1: &LinearCdf, f2: &LinearCdf, b: f64) -> bool {
    // (x, index into f1 vertices, index into f2 vertices)
    let mut pts: Vec<(f64, Option<usize>, Option<usize>)> = f1
        .xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, Some(i), None))
        .chain(
            f2.xs
                .iter()
                .enumerate()
                .map(|(j, &z)| (z - b, None, Some(j))),
        )
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, Option<usize>, Option<usize>)> = Vec::with_capacity(pts.len());
    for p in pts {
        match merged.last_mut() {
            Some(last) if (p.0 - last.0).abs() <= TOL => {
                if p.1.is_some() {
                    last.0 = p.0;
                    last.1 = p.1;
                }
                if p.2.is_some() {
                    last.2 = p.2;
                }
            }
            _ => merged.push(p),
        }
    }
    merged.iter().all(|&(x, i1, i2)| {
        let (l1, r1) = match i1 {
            Some(i) => (f1.left[i], f1.right[i]),
            None => (f1.eval_left(x), f1.eval(x)),
        };
        let (l2, r2) = match i2 {
            Some(j) => (f2.left[j], f2.right[j]),
            None => (f2.eval_left(x + b), f2.eval(x + b)),
        };
        l1 >= l2 - TOL && r1 >= r2 - TOL
    })
}

/// `sup{b : F1(x) >= F2(x + b) for all x}`, the largest essential-infimum gap
/// `Y2 - Y1` achievable by any coupling of the two marginals.
///
/// The supremum is attained and, at the optimum, the shifted graphs touch at
/// a vertex of one of the two functions, so the candidates are the shifts
/// that bring a vertex level of one function onto the other.
pub fn domination_sup(f1: &LinearCdf, f2: &LinearCdf) -> f64 {
    let mut cands = vec![0.0];
    for (i, &x1) in f1.xs.iter().enumerate() {
        for y in [f1.left[i], f1.right[i]] {
            cands.extend(f2.first_reaching(y).map(|z| z - x1));
            cands.extend(f2.last_below(y).map(|z| z - x1));
        }
    }
    for (j, &x2) in f2.xs.iter().enumerate() {
        for y in [f2.left[j], f2.right[j]] {
            cands.extend(f1.first_reaching(y).map(|x| x2 - x));
            cands.extend(f1.last_below(y).map(|x| x2 - x));
        }
    }
    if f1.xs.len() * f2.xs.len() <= 10_000 {
        for &x1 in &f1.xs {
            for &x2 in &f2.xs {
                cands.push(x2 - x1);
            }
        }
    }
    cands.retain(|c| c.is_finite());
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cands.dedup();
    // Validity is monotone in b: the valid set is (-inf, sup].
    let first_invalid = cands.partition_point(|&b| dominates(f1, f2, b));
    if first_invalid == 0 {
        // b = 0 always dominates for marginals of a decomposition
        return f64::NEG_INFINITY;
    }
    cands[first_invalid - 1]
}

/// Distribution functions of the two chasing marginals,
/// `F1 = min{F, 1-p} / (1-p)` and `F2 = max{F + p - 1, 0} / p`.
pub fn chasing_marginal_cdfs(mu: &ProbabilityMeasure, p: f64) -> (LinearCdf, LinearCdf) {
    let q = 1.0 - p;
    let mut xs: Vec<f64> = mu.atoms().iter().map(|a| a.location).collect();
    for s in mu.segments() {
        xs.push(s.left);
        xs.push(s.right);
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    // Where F crosses the level 1-p inside a linear stretch, add a vertex.
    for w in xs.clone().windows(2) {
        let (a, b) = (mu.cdf(w[0]), mu.cdf_left(w[1]));
        if a < q && q < b {
            xs.push(w[0] + (w[1] - w[0]) * ((q - a) / (b - a)));
        }
    }
    let f1 = LinearCdf::from_fn(
        xs.clone(),
        |x| mu.cdf(x).min(q) / q,
        |x| mu.cdf_left(x).min(q) / q,
    );
    let f2 = LinearCdf::from_fn(
        xs,
        |x| (mu.cdf(x) - q).max(0.0) / p,
        |x| (mu.cdf_left(x) - q).max(0.0) / p,
    );
    (f1, f2)
}

/// Chasing gap computed from the distribution function alone.
pub fn beta_plus_by_cdf(mu: &ProbabilityMeasure, p: f64) -> Result<f64> {
    crate::decomposition::validate_p(p)?;
    if mu.is_degenerate() {
        return Err(Error::DegenerateMeasure);
    }
    let (f1, f2) = chasing_marginal_cdfs(mu, p);
    Ok(domination_sup(&f1, &f2))
}

/// Budget and resolution of the brute-force coupling oracle.
#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub grid: usize,
    pub max_atoms: usize,
    pub max_grid: usize,
    pub budget: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid: 10,
            max_atoms: 4,
            max_grid: 20,
            budget: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Largest achievable essential-infimum gap over the enumerated splittings.
    pub max_beta: f64,
    /// Number of feasible splittings examined.
    pub splittings: usize,
    /// Discretization slack `diameter / grid`.
    pub slack: f64,
}

/// Brute-force maximum of `beta_*` over grid-discretized Bernoulli
/// decompositions of a purely atomic measure.
///
/// Each atom's mass is split between the two marginals; all atoms but the
/// last take one of `grid + 1` levels and the last one absorbs whatever the
/// marginal identity requires. For each feasible pair of marginals the best
/// coupling is the monotone one, whose gap is the domination supremum.
pub fn coupling_oracle_beta_star(
    mu: &ProbabilityMeasure,
    p: f64,
    config: OracleConfig,
) -> Result<OracleResult> {
    crate::decomposition::validate_p(p)?;
    if !mu.is_atomic() {
        return Err(Error::Domain(
            "coupling oracle needs a purely atomic measure".into(),
        ));
    }
    let atoms: Vec<(f64, f64)> = mu.atoms().iter().map(|a| (a.location, a.mass)).collect();
    let n = atoms.len();
    if n > config.max_atoms {
        return Err(Error::TooLarge(format!(
            "{n} atoms exceed the oracle limit of {}",
            config.max_atoms
        )));
    }
    if config.grid == 0 || config.grid > config.max_grid {
        return Err(Error::TooLarge(format!(
            "grid {} outside 1..={}",
            config.grid, config.max_grid
        )));
    }
    let cases = (config.grid + 1).pow(n.saturating_sub(1) as u32);
    if cases > config.budget {
        return Err(Error::TooLarge(format!(
            "{cases} splittings exceed the budget of {}",
            config.budget
        )));
    }
    let q = 1.0 - p;
    let mut best = f64::NEG_INFINITY;
    let mut feasible = 0;
    let mut levels = vec![0usize; n.saturating_sub(1)];
    loop {
        // Mass of each atom routed to the first marginal, weighted by 1-p.
        let mut first: Vec<f64> = levels
            .iter()
            .zip(&atoms)
            .map(|(&k, &(_, m))| m * k as f64 / config.grid as f64)
            .collect();
        let rest = q - first.iter().sum::<f64>();
        let last_mass = atoms[n - 1].1;
        if rest >= -TOL && rest <= last_mass + TOL {
            first.push(rest.clamp(0.0, last_mass));
            let rho1: Vec<(f64, f64)> = atoms
                .iter()
                .zip(&first)
                .map(|(&(x, _), &a)| (x, if a > TOL { a / q } else { 0.0 }))
                .collect();
            let rho2: Vec<(f64, f64)> = atoms
                .iter()
                .zip(&first)
                .map(|(&(x, m), &a)| (x, if m - a > TOL { (m - a) / p } else { 0.0 }))
                .collect();
            let beta = domination_sup(&LinearCdf::atomic(&rho1), &LinearCdf::atomic(&rho2));
            best = best.max(beta);
            feasible += 1;
        }
        // odometer
        let mut k = 0;
        while k < levels.len() {
            levels[k] += 1;
            if levels[k] <= config.grid {
                break;
            }
            levels[k] = 0;
            k += 1;
        }
        if k == levels.len() {
            break;
        }
    }
    Ok(OracleResult {
        max_beta: best,
        splittings: feasible,
        slack: mu.diameter() / config.grid as f64,
    })
}
