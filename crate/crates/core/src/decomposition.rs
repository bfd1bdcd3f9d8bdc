//! Bernoulli decompositions `X = Y(t) + delta(t) * eta` built by the two
//! Pac-Man couplings, and the gap quantities attached to them.
//!
//! With `G` the quantile function of `mu`, both variants use
//! `Y1(t) = G((1-p) t)`. The chasing variant pairs it with
//! `Y2(t) = G(1 - p + p t)` (both markers move right), the colliding variant
//! with `Y2(t) = G(1 - p t)` (markers move toward each other). In either case
//! `delta = Y2 - Y1` and the marginals satisfy `(1-p) rho1 + p rho2 = mu`.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::{EmpiricalSample, ProbabilityMeasure};
use crate::piecewise::{PiecewiseAffine, BREAK_TOL};

/// Distance from 0 and 1 below which a Bernoulli parameter is rejected.
pub const P_EDGE: f64 = 1e-12;

pub fn validate_p(p: f64) -> Result<()> {
    if p.is_finite() && p > P_EDGE && p < 1.0 - P_EDGE {
        Ok(())
    } else {
        Err(Error::Domain(format!("p = {p} is not inside (0,1)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Chasing,
    Colliding,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Chasing => "chasing",
            Variant::Colliding => "colliding",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chasing" => Ok(Variant::Chasing),
            "colliding" => Ok(Variant::Colliding),
            other => Err(Error::Domain(format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliDecomposition {
    pub p: f64,
    pub variant: Variant,
    pub y1: PiecewiseAffine,
    pub y2: PiecewiseAffine,
    pub delta: PiecewiseAffine,
}

impl BernoulliDecomposition {
    /// The baseline `Y_p = Y1`.
    pub fn y(&self) -> &PiecewiseAffine {
        &self.y1
    }
}

fn build(mu: &ProbabilityMeasure, p: f64, variant: Variant) -> Result<BernoulliDecomposition> {
    validate_p(p)?;
    if mu.is_degenerate() {
        return Err(Error::DegenerateMeasure);
    }
    let g = mu.quantile();
    let y1 = g.compose_affine(1.0 - p, 0.0)?;
    let y2 = match variant {
        Variant::Chasing => g.compose_affine(p, 1.0 - p)?,
        Variant::Colliding => g.compose_affine(-p, 1.0)?,
    };
    let delta = y2.sub(&y1)?;
    Ok(BernoulliDecomposition {
        p,
        variant,
        y1,
        y2,
        delta,
    })
}

/// Chasing Pac-Men: `Y2(t) = G(1 - p + p t)`; the gap is bounded below
/// uniformly for suitable `p`.
pub fn chasing(mu: &ProbabilityMeasure, p: f64) -> Result<BernoulliDecomposition> {
    build(mu, p, Variant::Chasing)
}

/// Colliding Pac-Men: `Y2(t) = G(1 - p t)`; the gap is non-increasing and
/// its essential supremum is the diameter of the support.
pub fn colliding(mu: &ProbabilityMeasure, p: f64) -> Result<BernoulliDecomposition> {
    build(mu, p, Variant::Colliding)
}

pub fn decompose(
    mu: &ProbabilityMeasure,
    p: f64,
    variant: Variant,
) -> Result<BernoulliDecomposition> {
    build(mu, p, variant)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Marginals {
    pub rho1: ProbabilityMeasure,
    pub rho2: ProbabilityMeasure,
    /// `sup_x |(1-p) F1(x) + p F2(x) - F(x)|` over the check grid, both
    /// one-sided limits included.
    pub max_cdf_residual: f64,
}

/// Reconstructs the laws of `Y1` and `Y2` and measures how far
/// `(1-p) rho1 + p rho2` is from `mu`.
pub fn marginals(d: &BernoulliDecomposition, mu: &ProbabilityMeasure) -> Result<Marginals> {
    let rho1 = ProbabilityMeasure::pushforward_uniform(&d.y1)?;
    let rho2 = ProbabilityMeasure::pushforward_uniform(&d.y2)?;
    let mut grid: Vec<f64> = Vec::new();
    for m in [mu, &rho1, &rho2] {
        grid.extend(m.atoms().iter().map(|a| a.location));
        for s in m.segments() {
            grid.extend([s.left, s.right]);
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let mids: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let (lo, hi) = mu.support();
    let span = (hi - lo).max(1.0);
    grid.extend(mids);
    grid.extend((0..=256).map(|k| lo - 0.1 * span + 1.2 * span * k as f64 / 256.0));

    let p = d.p;
    let q = 1.0 - p;
    let residual = grid
        .iter()
        .map(|&x| {
            let right = (q * rho1.cdf(x) + p * rho2.cdf(x) - mu.cdf(x)).abs();
            let left = (q * rho1.cdf_left(x) + p * rho2.cdf_left(x) - mu.cdf_left(x)).abs();
            right.max(left)
        })
        .fold(0.0, f64::max);
    Ok(Marginals {
        rho1,
        rho2,
        max_cdf_residual: residual,
    })
}

/// `inf_t delta+(t)`, scanning both one-sided limits at every breakpoint
/// and the endpoint limits of every piece.
pub fn beta_plus_by_inf(d: &BernoulliDecomposition) -> Result<f64> {
    if d.variant != Variant::Chasing {
        return Err(Error::Domain(
            "the chasing gap is defined for the chasing variant".into(),
        ));
    }
    Ok(d.delta.inf())
}

/// Chasing gap at `p` via the quantile construction.
pub fn beta_plus(mu: &ProbabilityMeasure, p: f64) -> Result<f64> {
    beta_plus_by_inf(&chasing(mu, p)?)
}

pub use crate::coupling::beta_plus_by_cdf as beta_plus_by_f;

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub p: f64,
    /// Infimum of the chasing gap.
    pub beta_plus: f64,
    /// Essential supremum of the colliding gap; the largest over all
    /// decompositions, equal to the support diameter.
    pub beta_sharp: f64,
    /// Essential supremum of the chasing gap.
    pub chasing_sup: f64,
    /// Arrival time of `Y1` at `G(1-p)`.
    pub t1: f64,
    /// Departure time of `Y2` from `G(1-p+0)`.
    pub t2: f64,
    /// `min{G(1-p) - G((1-p)/2), G((2-p)/2) - G(1-p)}`.
    pub halftime_lower_bound: f64,
    pub diameter: f64,
    /// `T1 > T2` implies `beta_plus > 0`; false only if that implication fails.
    pub arrival_departure_ok: bool,
}

/// `inf{t : f(t) = target}` for a non-decreasing `f` bounded above by
/// `target`; 1 when the value is never attained inside (0,1).
fn arrival_time(f: &PiecewiseAffine, target: f64) -> f64 {
    let near = |v: f64| (v - target).abs() <= BREAK_TOL;
    let breaks = f.breaks();
    for (i, piece) in f.pieces().iter().enumerate() {
        if i > 0 && near(f.break_values()[i - 1]) {
            return breaks[i];
        }
        if piece.is_constant() && near(piece.start) {
            return breaks[i];
        }
    }
    1.0
}

/// `sup{t : f(t) = target}` for a non-decreasing `f` bounded below by
/// `target`; 0 when never attained.
fn departure_time(f: &PiecewiseAffine, target: f64) -> f64 {
    let near = |v: f64| (v - target).abs() <= BREAK_TOL;
    let breaks = f.breaks();
    for (i, piece) in f.pieces().iter().enumerate().rev() {
        if piece.is_constant() && near(piece.start) {
            return breaks[i + 1];
        }
        if i > 0 && near(f.break_values()[i - 1]) {
            return breaks[i];
        }
    }
    0.0
}

/// Halftime lower bound on the chasing gap.
pub fn halftime_lower_bound(g: &PiecewiseAffine, p: f64) -> Result<f64> {
    let mid = g.eval_snapped(1.0 - p)?;
    Ok((mid - g.eval_snapped((1.0 - p) / 2.0)?).min(g.eval_snapped((2.0 - p) / 2.0)? - mid))
}

pub fn gap_report(mu: &ProbabilityMeasure, p: f64) -> Result<GapReport> {
    let chase = chasing(mu, p)?;
    let collide = colliding(mu, p)?;
    let g = mu.quantile();
    let g_mid = g.eval_snapped(1.0 - p)?;
    let g_mid_plus = g.right_limit_snapped(1.0 - p)?;
    let beta_plus = beta_plus_by_inf(&chase)?;
    let t1 = arrival_time(&chase.y1, g_mid);
    let t2 = departure_time(&chase.y2, g_mid_plus);
    Ok(GapReport {
        p,
        beta_plus,
        beta_sharp: collide.delta.ess_sup(),
        chasing_sup: chase.delta.ess_sup(),
        t1,
        t2,
        halftime_lower_bound: halftime_lower_bound(&g, p)?,
        diameter: mu.diameter(),
        arrival_departure_ok: !(t1 > t2) || beta_plus > 0.0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositiveP {
    pub p: f64,
    /// Certified lower bound on the chasing gap at `p`.
    pub beta_lower: f64,
    /// The chasing gap actually achieved at `p`.
    pub beta_plus: f64,
    /// Split point used for the certificate, if any.
    pub x_hat: Option<f64>,
}

/// Finds a `p` with a uniformly positive chasing gap and certifies it.
///
/// * two-point support: `p` is the mass of the upper point and the gap is
///   the distance between the points;
/// * no atoms: `p = 1/2` with the halftime bound;
/// * otherwise: candidate split points `x_hat` (atoms, segment right ends,
///   segment quarter points) with `F(x) < F(x_hat)` for `x < x_hat` and
///   `0 < F(x_hat-) <= F(x_hat) < 1`; `p = 1 - F(x_hat-)` and the bound
///   `min{x_hat - G((1-p) t), G(1-p+pt) - x_hat}` is evaluated at
///   `t = (mu({x_hat})/p + 1)/2`. The candidate with the largest bound wins,
///   ties going to the smaller `x_hat`.
pub fn find_positive_p(mu: &ProbabilityMeasure) -> Result<PositiveP> {
    if mu.is_degenerate() {
        return Err(Error::DegenerateMeasure);
    }
    let g = mu.quantile();
    let (p, beta_lower, x_hat) = if mu.is_atomic() && mu.atoms().len() == 2 {
        let lower = mu.atoms()[0];
        let upper = mu.atoms()[1];
        (upper.mass, upper.location - lower.location, None)
    } else if mu.atoms().is_empty() {
        (0.5, halftime_lower_bound(&g, 0.5)?, None)
    } else {
        let mut cands: Vec<f64> = mu.atoms().iter().map(|a| a.location).collect();
        for s in mu.segments() {
            cands.push(s.right);
            for k in 1..4 {
                cands.push(s.left + (s.right - s.left) * k as f64 / 4.0);
            }
        }
        cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cands.dedup();
        let mut best: Option<(f64, f64, f64)> = None;
        for x in cands {
            let below = mu.cdf_left(x);
            let upto = mu.cdf(x);
            let p = 1.0 - below;
            if !(below > 0.0 && upto < 1.0) || validate_p(p).is_err() {
                continue;
            }
            let t = (mu.atom_mass(x) / p + 1.0) / 2.0;
            let bound =
                (x - g.eval_snapped((1.0 - p) * t)?).min(g.eval_snapped(1.0 - p + p * t)? - x);
            if best.is_none_or(|(_, b, _)| bound > b) {
                best = Some((p, bound, x));
            }
        }
        let (p, bound, x) =
            best.ok_or_else(|| Error::ConditionViolated("no admissible split point found".into()))?;
        (p, bound, Some(x))
    };
    let beta_plus = beta_plus(mu, p)?;
    if !(beta_lower > 0.0) || beta_plus < beta_lower - BREAK_TOL {
        return Err(Error::ConditionViolated(format!(
            "certificate failed at p = {p}: bound {beta_lower}, gap {beta_plus}"
        )));
    }
    Ok(PositiveP {
        p,
        beta_lower,
        beta_plus,
        x_hat,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapWitness {
    pub p: f64,
    /// Lebesgue measure of `{t : delta-(t) > x+ - x-}`.
    pub prob_mass: f64,
    /// The guaranteed lower bound `p- + p+`.
    pub required: f64,
}

/// For `P(X <= x-) >= p-` and `P(X > x+) > p+`, the colliding gap at
/// `p = p+ / (p- + p+)` exceeds `x+ - x-` on a set of `t` of measure at
/// least `p- + p+`.
pub fn colliding_gap_witness(
    mu: &ProbabilityMeasure,
    x_minus: f64,
    x_plus: f64,
    p_minus: f64,
    p_plus: f64,
) -> Result<GapWitness> {
    if !(x_minus < x_plus) || !(p_minus > 0.0) || !(p_plus > 0.0) {
        return Err(Error::Domain("need x- < x+ and positive p-, p+".into()));
    }
    if !(mu.cdf(x_minus) >= p_minus) {
        return Err(Error::ConditionViolated(format!(
            "P(X <= {x_minus}) = {} < {p_minus}",
            mu.cdf(x_minus)
        )));
    }
    if !(1.0 - mu.cdf(x_plus) > p_plus) {
        return Err(Error::ConditionViolated(format!(
            "P(X > {x_plus}) = {} is not above {p_plus}",
            1.0 - mu.cdf(x_plus)
        )));
    }
    let p = p_plus / (p_minus + p_plus);
    let d = colliding(mu, p)?;
    let prob_mass = d.delta.measure_above(x_plus - x_minus);
    let required = p_minus + p_plus;
    if prob_mass < required - BREAK_TOL {
        return Err(Error::ConditionViolated(format!(
            "gap mass {prob_mass} below {required}"
        )));
    }
    Ok(GapWitness {
        p,
        prob_mass,
        required,
    })
}

/// One affine stretch of the map `w -> b(w)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BStretch {
    pub w_start: f64,
    pub w_end: f64,
    pub b_start: f64,
    pub b_end: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WForm {
    /// `W = Y + delta/2`.
    pub w: PiecewiseAffine,
    pub stretches: Vec<BStretch>,
}

impl WForm {
    /// `(w, b)` pairs at the ends of every stretch, consecutive duplicates
    /// removed.
    pub fn table(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for s in &self.stretches {
            for pair in [(s.w_start, s.b_start), (s.w_end, s.b_end)] {
                if out.last() != Some(&pair) {
                    out.push(pair);
                }
            }
        }
        out
    }

    /// `b(w)` for a value `w` in the range of `W`.
    pub fn b_of(&self, w: f64) -> Option<f64> {
        self.stretches.iter().find_map(|s| {
            if s.w_start == s.w_end {
                (w == s.w_start).then_some(s.b_start)
            } else if s.w_start <= w && w <= s.w_end {
                let f = (w - s.w_start) / (s.w_end - s.w_start);
                Some(s.b_start + (s.b_end - s.b_start) * f)
            } else {
                None
            }
        })
    }
}

/// Rewrites a chasing decomposition as `X = W + b(W) sigma` with
/// `sigma = 2 eta - 1`.
pub fn w_form(d: &BernoulliDecomposition) -> Result<WForm> {
    if d.variant != Variant::Chasing {
        return Err(Error::Domain("the W form needs the chasing variant".into()));
    }
    let w = PiecewiseAffine::linear_combination(&d.y1, 0.5, &d.y2, 0.5)?;
    let half = PiecewiseAffine::linear_combination(&d.delta, 0.5, &d.delta, 0.0)?;
    if !w.is_non_decreasing(BREAK_TOL) {
        return Err(Error::ConditionViolated("W is not monotone".into()));
    }
    let mut stretches: Vec<BStretch> = Vec::with_capacity(w.num_pieces());
    for (i, wp) in w.pieces().iter().enumerate() {
        let (t0, t1) = w.interval(i);
        let mid = 0.5 * (t0 + t1);
        let b_start = half.right_limit(t0)?;
        let b_end = half.left_limit(t1)?;
        if wp.is_constant() && (b_start - b_end).abs() > BREAK_TOL {
            return Err(Error::ConditionViolated(format!(
                "delta varies on a constancy interval of W around t = {mid}"
            )));
        }
        let s = BStretch {
            w_start: wp.start,
            w_end: wp.end,
            b_start,
            b_end,
        };
        // Adjacent constancy intervals at the same level must carry the same b.
        if let Some(prev) = stretches.last() {
            if prev.w_start == prev.w_end && s.w_start == s.w_end && prev.w_end == s.w_start {
                if (prev.b_end - s.b_start).abs() > BREAK_TOL {
                    return Err(Error::ConditionViolated(format!(
                        "delta varies on a constancy interval of W at level {}",
                        s.w_start
                    )));
                }
                continue;
            }
        }
        stretches.push(s);
    }
    Ok(WForm { w, stretches })
}

/// Two-stage sampling: `t` uniform, `eta ~ Bernoulli(p)`, independent;
/// returns `Y(t) + delta(t) eta`.
pub fn sample_decomposed(
    d: &BernoulliDecomposition,
    n: usize,
    seed: u64,
) -> Result<EmpiricalSample> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let t: f64 = rng.sample(Open01);
        let eta = rng.gen::<f64>() < d.p;
        let y = d.y1.eval(t)?;
        values.push(if eta { y + d.delta.eval(t)? } else { y });
    }
    EmpiricalSample::new(values)
}

/// CSV export: header `t,side,Y,delta,Y1,Y2`. Every interior breakpoint
/// contributes an `L` row (left limits) and an `R` row (right limits); grid
/// points `k/(grid+1)` contribute `G` rows with point values.
pub fn decomposition_csv(d: &BernoulliDecomposition, grid: usize) -> Result<String> {
    #[derive(PartialEq, PartialOrd)]
    struct Row(f64, u8, [f64; 4]);
    let fs = [&d.y1, &d.delta, &d.y1, &d.y2];
    let mut rows: Vec<Row> = Vec::new();
    for &b in d.delta.interior_breaks() {
        let l: Vec<f64> = fs.iter().map(|f| f.left_limit(b)).collect::<Result<_>>()?;
        let r: Vec<f64> = fs.iter().map(|f| f.right_limit(b)).collect::<Result<_>>()?;
        rows.push(Row(b, 0, [l[0], l[1], l[2], l[3]]));
        rows.push(Row(b, 2, [r[0], r[1], r[2], r[3]]));
    }
    for k in 1..=grid {
        let t = k as f64 / (grid + 1) as f64;
        let v: Vec<f64> = fs.iter().map(|f| f.eval(t)).collect::<Result<_>>()?;
        rows.push(Row(t, 1, [v[0], v[1], v[2], v[3]]));
    }
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = String::from("t,side,Y,delta,Y1,Y2\n");
    for Row(t, side, v) in rows {
        let side = ["L", "G", "R"][side as usize];
        out.push_str(&format!("{t},{side},{},{},{},{}\n", v[0], v[1], v[2], v[3]));
    }
    Ok(out)
}
