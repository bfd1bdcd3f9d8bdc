//! Alloy-type random potentials `V(x) = sum_xi omega_xi u(x - xi)` on a
//! periodic box in `Z^d`, with the couplings written as
//! `omega_xi = Y(t_xi) + delta(t_xi) eta_xi` through the chasing
//! decomposition. The potential then splits into a background
//! `U_t(x) = sum_xi Y(t_xi) u(x - xi)` and a Bernoulli part whose
//! coefficients are bounded below by the chasing gap.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decomposition::{beta_plus_by_inf, chasing};
use crate::error::{Error, Result};
use crate::measure::{ks_statistic, EmpiricalSample, ProbabilityMeasure};

/// Critical value of the KS regression check, scaled by `1/sqrt(n)`.
pub const KS_CRITICAL: f64 = 1.95;

/// Non-negative single-site profile on a finite stencil.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleSiteProfile {
    offsets: Vec<Vec<i64>>,
    values: Vec<f64>,
}

impl SingleSiteProfile {
    pub fn new(entries: Vec<(Vec<i64>, f64)>) -> Result<Self> {
        let d = entries
            .first()
            .map(|e| e.0.len())
            .ok_or_else(|| Error::Domain("empty stencil".into()))?;
        if d == 0 || entries.iter().any(|e| e.0.len() != d) {
            return Err(Error::MixedDimensions);
        }
        if entries.iter().any(|e| !(e.1 >= 0.0) || !e.1.is_finite()) {
            return Err(Error::Domain(
                "profile values must be finite and non-negative".into(),
            ));
        }
        let mut entries = entries;
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("repeated stencil offset".into()));
        }
        let origin = entries.iter().find(|e| e.0.iter().all(|&c| c == 0));
        if !origin.is_some_and(|e| e.1 > 0.0) {
            return Err(Error::Domain(
                "profile must be positive at the origin".into(),
            ));
        }
        let (offsets, values) = entries.into_iter().unzip();
        Ok(SingleSiteProfile { offsets, values })
    }

    /// `u = 1` at the origin only.
    pub fn kronecker(d: usize) -> Self {
        SingleSiteProfile {
            offsets: vec![vec![0; d]],
            values: vec![1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.offsets[0].len()
    }

    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest `|offset|_inf`.
    pub fn radius(&self) -> i64 {
        self.offsets
            .iter()
            .flat_map(|o| o.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `sup_x sum_xi u(x - xi)` on any periodic box: every offset is hit
    /// exactly once from each point.
    pub fn tiling_sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Parses a stencil: one `offset_1 ... offset_d value` line per entry,
/// `#` comments.
pub fn parse_stencil(text: &str) -> Result<SingleSiteProfile> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let toks: Vec<&str> = raw
            .split('#')
            .next()
            .unwrap_or("")
            .split_whitespace()
            .collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 2 {
            return Err(Error::parse(i + 1, "expected offsets followed by a value"));
        }
        let (value, offs) = toks.split_last().unwrap();
        let offsets = offs
            .iter()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| Error::parse(i + 1, format!("'{t}' is not an integer offset")))
            })
            .collect::<Result<Vec<i64>>>()?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("'{value}' is not a number")))?;
        entries.push((offsets, value));
    }
    SingleSiteProfile::new(entries).map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::parse(0, other.to_string()),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSplit {
    pub dims: Vec<usize>,
    pub m: f64,
    pub p: f64,
    pub t: Vec<f64>,
    pub eta: Vec<bool>,
    /// `Y(t_xi)`.
    pub y: Vec<f64>,
    /// `delta(t_xi)`.
    pub delta: Vec<f64>,
    /// `U_t(x)`, one entry per lattice point.
    pub background: Vec<f64>,
    pub profile: SingleSiteProfile,
    pub u_plus: f64,
    pub b_minus: f64,
    pub b_plus: f64,
}

impl PotentialSplit {
    pub fn sites(&self) -> usize {
        self.t.len()
    }

    /// `omega_xi = Y(t_xi) + delta(t_xi) eta_xi`.
    pub fn omega(&self) -> Vec<f64> {
        self.y
            .iter()
            .zip(&self.delta)
            .zip(&self.eta)
            .map(|((&y, &d), &e)| if e { y + d } else { y })
            .collect()
    }

    /// Coordinates of site `index` (first coordinate varies slowest).
    pub fn coordinates(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        let mut out = vec![0; self.dims.len()];
        for (k, &len) in self.dims.iter().enumerate().rev() {
            out[k] = rest % len;
            rest /= len;
        }
        out
    }

    /// `sum_o f(x - o) u(o)` at every `x`, accumulated in stencil order.
    pub fn convolve(&self, field: &[f64]) -> Vec<f64> {
        convolve(&self.dims, &self.profile, field)
    }

    pub fn total_potential(&self) -> Vec<f64> {
        self.convolve(&self.omega())
    }

    /// `sum_xi delta(t_xi) eta_xi u(x - xi)`.
    pub fn bernoulli_part(&self) -> Vec<f64> {
        let field: Vec<f64> = self
            .delta
            .iter()
            .zip(&self.eta)
            .map(|(&d, &e)| if e { d } else { 0.0 })
            .collect();
        self.convolve(&field)
    }

    /// CSV with header comments; one row per site.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# M={}\n# p={}\n# U_plus={}\n# b_minus={}\n# b_plus={}\nxi,t,eta,Y,delta,omega\n",
            self.m, self.p, self.u_plus, self.b_minus, self.b_plus
        );
        for (i, w) in self.omega().iter().enumerate() {
            let xi: Vec<String> = self.coordinates(i).iter().map(|c| c.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                xi.join(":"),
                self.t[i],
                u8::from(self.eta[i]),
                self.y[i],
                self.delta[i],
                w
            ));
        }
        out
    }
}

fn convolve(dims: &[usize], profile: &SingleSiteProfile, field: &[f64]) -> Vec<f64> {
    let total: usize = dims.iter().product();
    let mut coords = vec![0usize; dims.len()];
    let mut out = Vec::with_capacity(total);
    for x in 0..total {
        let mut rest = x;
        for k in (0..dims.len()).rev() {
            coords[k] = rest % dims[k];
            rest /= dims[k];
        }
        let mut acc = 0.0;
        for (o, &u) in profile.offsets.iter().zip(&profile.values) {
            let mut site = 0usize;
            for k in 0..dims.len() {
                let len = dims[k] as i64;
                let c = (coords[k] as i64 - o[k]).rem_euclid(len) as usize;
                site = site * dims[k] + c;
            }
            acc += field[site] * u;
        }
        out.push(acc);
    }
    out
}

/// Per-site uniform `t` and Bernoulli `eta`; site `i` uses its own stream
/// of the seeded generator, so the field does not depend on traversal order.
pub fn site_draws(sites: usize, p: f64, seed: u64) -> (Vec<f64>, Vec<bool>) {
    (0..sites)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let t: f64 = rng.sample(Open01);
            let eta = rng.gen::<f64>() < p;
            (t, eta)
        })
        .unzip()
}

/// Draws a split of the potential with couplings distributed as `mu`,
/// supported in `[0, m]`.
pub fn split_potential(
    mu: &ProbabilityMeasure,
    p: f64,
    m: f64,
    profile: &SingleSiteProfile,
    dims: &[usize],
    seed: u64,
) -> Result<PotentialSplit> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Domain("box sides must be positive".into()));
    }
    if dims.len() != profile.dim() {
        return Err(Error::MixedDimensions);
    }
    let (lo, hi) = mu.support();
    if !(lo >= 0.0 && hi <= m) {
        return Err(Error::SupportViolation { max: m });
    }
    if lo > 0.0 || hi < m {
        log::warn!("support [{lo}, {hi}] does not reach both 0 and M = {m}");
    }
    let d = chasing(mu, p)?;
    let beta = beta_plus_by_inf(&d)?;
    if !(beta > 0.0) {
        return Err(Error::GapViolation { p, beta });
    }
    let sites: usize = dims.iter().product();
    let (t, eta) = site_draws(sites, p, seed);
    let y: Vec<f64> = t.iter().map(|&s| d.y1.eval(s)).collect::<Result<_>>()?;
    let delta: Vec<f64> = t.iter().map(|&s| d.delta.eval(s)).collect::<Result<_>>()?;
    let background = convolve(dims, profile, &y);
    Ok(PotentialSplit {
        dims: dims.to_vec(),
        m,
        p,
        t,
        eta,
        y,
        delta,
        background,
        profile: profile.clone(),
        u_plus: m * profile.tiling_sum(),
        b_minus: beta,
        b_plus: m,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitReport {
    pub min_background: f64,
    pub max_background: f64,
    pub min_delta: f64,
    pub max_delta: f64,
    /// `max_x |V(x) - U_t(x) - sum_xi delta eta u(x - xi)|`.
    pub reconstruction_error: f64,
    pub ks: f64,
    pub ks_threshold: f64,
    pub violations: Vec<Error>,
}

impl SplitReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every bound of the split on this realization, the reconstruction
/// identity to within `tolerance`, and the KS distance of the couplings
/// from `mu`.
pub fn verify_split(s: &PotentialSplit, mu: &ProbabilityMeasure, tolerance: f64) -> SplitReport {
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut violations = Vec::new();
    let (min_bg, max_bg) = (min(&s.background), max(&s.background));
    if !(min_bg >= 0.0 && max_bg <= s.u_plus) {
        violations.push(Error::ConditionViolated(format!(
            "background range [{min_bg}, {max_bg}] leaves [0, {}]",
            s.u_plus
        )));
    }
    let (min_d, max_d) = (min(&s.delta), max(&s.delta));
    if !(min_d >= s.b_minus) {
        violations.push(Error::GapViolation {
            p: s.p,
            beta: min_d,
        });
    }
    if !(max_d <= s.b_plus) {
        violations.push(Error::ConditionViolated(format!(
            "gap {max_d} exceeds b_plus = {}",
            s.b_plus
        )));
    }
    let total = s.total_potential();
    let split = s.bernoulli_part();
    let reconstruction_error = total
        .iter()
        .zip(&s.background)
        .zip(&split)
        .map(|((v, u), b)| (v - u - b).abs())
        .fold(0.0, f64::max);
    if !(reconstruction_error <= tolerance) {
        violations.push(Error::ConditionViolated(format!(
            "reconstruction error {reconstruction_error} above {tolerance}"
        )));
    }
    let omega = EmpiricalSample::new(s.omega()).expect("finite couplings");
    let ks = ks_statistic(&omega, mu);
    let ks_threshold = KS_CRITICAL / (omega.len() as f64).sqrt();
    if !(ks < ks_threshold) {
        violations.push(Error::ConditionViolated(format!(
            "KS distance {ks} not below {ks_threshold}"
        )));
    }
    SplitReport {
        min_background: min_bg,
        max_background: max_bg,
        min_delta: min_d,
        max_delta: max_d,
        reconstruction_error,
        ks,
        ks_threshold,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> ProbabilityMeasure {
        ProbabilityMeasure::atomic(&[(0.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn unif() -> ProbabilityMeasure {
        ProbabilityMeasure::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn two_point_split() {
        let u = SingleSiteProfile::kronecker(1);
        let s = split_potential(&two_point(), 0.5, 1.0, &u, &[8], 1).unwrap();
        assert!(s.background.iter().all(|&v| v == 0.0));
        assert!(s.delta.iter().all(|&v| v == 1.0));
        assert_eq!(s.total_potential(), s.omega());
        let r = verify_split(&s, &two_point(), 0.0);
        assert_eq!(r.reconstruction_error, 0.0);
        assert!(r
            .violations
            .iter()
            .all(|e| !matches!(e, Error::GapViolation { .. })));
    }

    #[test]
    fn uniform_split() {
        let u = SingleSiteProfile::kronecker(1);
        let s = split_potential(&unif(), 0.5, 1.0, &u, &[8], 2).unwrap();
        for i in 0..8 {
            assert!((s.background[i] - s.t[i] / 2.0).abs() < 1e-15);
            assert!((s.delta[i] - 0.5).abs() < 1e-15);
        }
        assert!(s.background.iter().all(|&v| (0.0..=0.5).contains(&v)));
        assert_eq!(s.b_minus, 0.5);
    }

    #[test]
    fn overlapping_stencil() {
        let u =
            SingleSiteProfile::new(vec![(vec![-1], 1.0), (vec![0], 1.0), (vec![1], 1.0)]).unwrap();
        let s = split_potential(&unif(), 0.5, 1.0, &u, &[8], 3).unwrap();
        assert_eq!(s.u_plus, 3.0);
        for x in 0..8 {
            let direct: f64 = [7, 0, 1].iter().map(|o| s.y[(x + o) % 8]).sum();
            assert!((s.background[x] - direct).abs() < 1e-15);
        }
        let r = verify_split(&s, &unif(), 1e-12);
        assert!(r.max_background <= 3.0 && r.min_background >= 0.0);
    }

    #[test]
    fn tampering_is_detected() {
        let u = SingleSiteProfile::kronecker(2);
        let mut s = split_potential(&unif(), 0.5, 1.0, &u, &[4, 4], 4).unwrap();
        s.delta[5] = s.b_minus - 1e-9;
        let r = verify_split(&s, &unif(), 1e-12);
        assert!(r
            .violations
            .iter()
            .any(|e| matches!(e, Error::GapViolation { .. })));
        let mut s = split_potential(&unif(), 0.5, 1.0, &u, &[4, 4], 4).unwrap();
        s.background[0] = -1e-12;
        assert!(!verify_split(&s, &unif(), 1e-12).passed());
    }

    #[test]
    fn input_validation() {
        let u = SingleSiteProfile::kronecker(1);
        assert_eq!(
            split_potential(&unif(), 0.5, 0.5, &u, &[8], 1),
            Err(Error::SupportViolation { max: 0.5 })
        );
        let three = ProbabilityMeasure::atomic(&[(0.0, 0.25), (1.0, 0.5), (2.0, 0.25)]).unwrap();
        // at p = 0.9 the chasing pair still collides on the middle atom
        assert!(matches!(
            split_potential(&three, 0.9, 2.0, &u, &[8], 1),
            Err(Error::GapViolation { .. })
        ));
        assert!(split_potential(&unif(), 0.5, 1.0, &u, &[4, 4], 1).is_err());
        assert!(SingleSiteProfile::new(vec![(vec![1], 1.0)]).is_err());
        assert!(SingleSiteProfile::new(vec![(vec![0], 1.0), (vec![1], -1.0)]).is_err());
    }

    #[test]
    fn draws_are_per_site() {
        let (t1, e1) = site_draws(10, 0.5, 9);
        let (t2, e2) = site_draws(20, 0.5, 9);
        assert_eq!(&t2[..10], &t1[..]);
        assert_eq!(&e2[..10], &e1[..]);
        assert_ne!(t1[0], t1[1]);
    }

    #[test]
    fn stencil_parsing() {
        let u = parse_stencil("# 2d cross\n0 0 2\n1 0 0.5\n-1 0 0.5\n").unwrap();
        assert_eq!(u.dim(), 2);
        assert_eq!(u.tiling_sum(), 3.0);
        assert_eq!(u.radius(), 1);
        assert_eq!(u.max_value(), 2.0);
        assert!(matches!(
            parse_stencil("0 x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_stencil("1 1\n").is_err());
    }

    #[test]
    fn csv_layout() {
        let u = SingleSiteProfile::kronecker(2);
        let s = split_potential(&two_point(), 0.5, 1.0, &u, &[2, 2], 1).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[5], "xi,t,eta,Y,delta,omega");
        assert_eq!(lines.len(), 6 + 4);
        assert!(lines[7].starts_with("0:1,"));
    }
}
