//! Antichains in `{0,...,K}^N` under the coordinatewise order, their
//! probabilities under product Bernoulli measures, and Sperner-type bounds.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// Largest `N` accepted by [`max_weight_antichain`].
pub const MAX_FLOW_N: usize = 16;
/// Largest `N` accepted by [`enumerate_antichains`].
pub const MAX_ENUM_N: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration(Vec<u32>);

impl Configuration {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("a configuration needs N >= 1 entries".into()));
        }
        Ok(Configuration(values))
    }

    /// The Boolean configuration whose coordinate `j` is bit `N-1-j` of
    /// `mask`, so that numeric order on masks is lexicographic order.
    pub fn from_mask(mask: u32, n: usize) -> Self {
        Configuration((0..n).map(|j| (mask >> (n - 1 - j)) & 1).collect())
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_entry(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `|eta|`, the sum of the entries.
    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Coordinatewise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn comparable(&self, other: &Self) -> bool {
        self.le(other) || other.le(self)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// First comparable pair among distinct members, in input order.
fn comparable_pair(configs: &[Configuration]) -> Option<(usize, usize)> {
    for i in 0..configs.len() {
        for j in i + 1..configs.len() {
            if configs[i] != configs[j] && configs[i].comparable(&configs[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

fn check_dimensions(configs: &[Configuration]) -> Result<()> {
    match configs.first() {
        Some(c) if configs.iter().any(|d| d.len() != c.len()) => Err(Error::MixedDimensions),
        _ => Ok(()),
    }
}

/// True iff no two distinct configurations are comparable. Duplicates are
/// ignored.
pub fn is_antichain(configs: &[Configuration]) -> Result<bool> {
    check_dimensions(configs)?;
    Ok(comparable_pair(configs).is_none())
}

/// A validated antichain; members are deduplicated and kept in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Antichain {
    n: usize,
    members: Vec<Configuration>,
}

impl Antichain {
    pub fn new(configs: Vec<Configuration>) -> Result<Self> {
        let n = configs
            .first()
            .map(Configuration::len)
            .ok_or_else(|| Error::Domain("use Antichain::empty for the empty family".into()))?;
        Self::with_n(configs, n)
    }

    /// Like [`new`](Self::new) but also accepts an empty family.
    pub fn with_n(mut configs: Vec<Configuration>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("N must be at least 1".into()));
        }
        if configs.iter().any(|c| c.len() != n) {
            return Err(Error::MixedDimensions);
        }
        if let Some((i, j)) = comparable_pair(&configs) {
            return Err(Error::NotAntichain {
                first: configs[i].0.clone(),
                second: configs[j].0.clone(),
            });
        }
        configs.sort();
        configs.dedup();
        Ok(Antichain {
            n,
            members: configs,
        })
    }

    pub fn empty(n: usize) -> Self {
        Antichain {
            n,
            members: Vec::new(),
        }
    }

    /// The layer `{eta in {0,1}^N : |eta| = k}`.
    pub fn layer(n: usize, k: usize) -> Result<Self> {
        if n == 0 || n > 30 || k > n {
            return Err(Error::Domain(format!("no layer {k} in {{0,1}}^{n}")));
        }
        let members = (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| Configuration::from_mask(m, n))
            .collect();
        Ok(Antichain { n, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest entry over all members (at least 1).
    pub fn k(&self) -> u32 {
        self.members
            .iter()
            .map(Configuration::max_entry)
            .max()
            .unwrap_or(0)
            .max(1)
    }

    pub fn members(&self) -> &[Configuration] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn require_boolean(&self) -> Result<()> {
        if self.k() > 1 {
            return Err(Error::Domain(
                "operation needs a {0,1}-valued antichain".into(),
            ));
        }
        Ok(())
    }
}

/// Success probabilities of independent Bernoulli coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliProfile {
    ps: Vec<f64>,
}

impl BernoulliProfile {
    pub fn new(ps: Vec<f64>) -> Result<Self> {
        if ps.is_empty() {
            return Err(Error::Domain(
                "profile needs at least one coordinate".into(),
            ));
        }
        if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::Domain(format!("p = {p} is not inside (0,1)")));
        }
        Ok(BernoulliProfile { ps })
    }

    pub fn iid(n: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    pub fn len(&self) -> usize {
        self.ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ps.is_empty()
    }

    /// `min_j min{p_j, 1 - p_j}`.
    pub fn alpha(&self) -> f64 {
        self.ps.iter().map(|&p| p.min(1.0 - p)).fold(0.5, f64::min)
    }

    /// Probability of one Boolean configuration.
    pub fn weight_of(&self, c: &Configuration) -> f64 {
        c.values()
            .iter()
            .zip(&self.ps)
            .map(|(&e, &p)| if e == 1 { p } else { 1.0 - p })
            .product()
    }
}

/// Kahan–Babuska compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    binomial(n, k).to_f64().unwrap_or(f64::INFINITY)
}

/// `Sum_{eta in A} 1 / C(N, |eta|)`.
pub fn lym_sum(a: &Antichain) -> Result<f64> {
    a.require_boolean()?;
    let n = a.n() as u64;
    Ok(compensated_sum(
        a.members()
            .iter()
            .map(|c| 1.0 / binomial_f64(n, c.weight() as u64)),
    ))
}

/// Probability of an arbitrary set of Boolean configurations; duplicates
/// are counted once.
pub fn set_probability(configs: &[Configuration], profile: &BernoulliProfile) -> Result<f64> {
    check_dimensions(configs)?;
    if configs.iter().any(|c| c.len() != profile.len()) {
        return Err(Error::MixedDimensions);
    }
    if configs.iter().any(|c| c.max_entry() > 1) {
        return Err(Error::Domain("configurations must be {0,1}-valued".into()));
    }
    let mut sorted = configs.to_vec();
    sorted.sort();
    sorted.dedup();
    Ok(compensated_sum(sorted.iter().map(|c| profile.weight_of(c))))
}

pub fn antichain_probability(a: &Antichain, profile: &BernoulliProfile) -> Result<f64> {
    a.require_boolean()?;
    if a.n() != profile.len() {
        return Err(Error::MixedDimensions);
    }
    Ok(compensated_sum(
        a.members().iter().map(|c| profile.weight_of(c)),
    ))
}

/// `2 sqrt(2) / (sqrt(p(1-p)) sqrt(N))`.
pub fn sperner_bound_iid(n: usize, p: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 / ((p * (1.0 - p)).sqrt() * (n as f64).sqrt())
}

/// `4 / (alpha sqrt(N))`.
pub fn sperner_bound_varied(profile: &BernoulliProfile) -> f64 {
    4.0 / (profile.alpha() * (profile.len() as f64).sqrt())
}

/// `b(k; N, p)`.
pub fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let (n64, k64) = (n as u64, k as u64);
    let direct = binomial_f64(n64, k64) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    if direct.is_finite() && direct > 1e-290 {
        return direct;
    }
    let ln_c = ln_binomial(n64, k64);
    (ln_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    let c = binomial_f64(n, k);
    if c.is_finite() {
        return c.ln();
    }
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Mode of the binomial law: smallest maximiser `k*` and `b(k*; N, p)`.
pub fn binomial_mode_mass(n: usize, p: f64) -> (usize, f64) {
    // b(k+1)/b(k) = (N-k) p / ((k+1) q); the first k where this is <= 1 is
    // the smallest maximiser.
    let q = 1.0 - p;
    let k_star = (0..n)
        .find(|&k| (n - k) as f64 * p <= (k + 1) as f64 * q)
        .unwrap_or(n);
    (k_star, binomial_pmf(n, k_star, p))
}

/// `p_xi = p_eta / p_chi`, so that `xi * chi` has the law of `eta`.
pub fn double_sampling_split(p_eta: f64, p_chi: f64) -> Result<f64> {
    if !(p_eta > 0.0 && p_eta <= p_chi && p_chi < 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < p_eta <= p_chi < 1, got p_eta = {p_eta}, p_chi = {p_chi}"
        )));
    }
    Ok(p_eta / p_chi)
}

struct FlowNetwork {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

const NONE: usize = usize::MAX;

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![NONE; nodes],
            next: Vec::new(),
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: f64) {
        for (a, b, c) in [(u, v, c), (v, u, 0.0)] {
            self.to.push(b);
            self.cap.push(c);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }

    fn levels(&self, s: usize) -> Vec<u32> {
        let mut level = vec![u32::MAX; self.head.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let mut e = self.head[u];
            while e != NONE {
                let v = self.to[e];
                if self.cap[e] > 0.0 && level[v] == u32::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
                e = self.next[e];
            }
        }
        level
    }

    fn push(&mut self, u: usize, t: usize, limit: f64, level: &[u32], iter: &mut [usize]) -> f64 {
        if u == t {
            return limit;
        }
        while iter[u] != NONE {
            let e = iter[u];
            let v = self.to[e];
            if self.cap[e] > 0.0 && level[v] == level[u] + 1 {
                let got = self.push(v, t, limit.min(self.cap[e]), level, iter);
                if got > 0.0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            iter[u] = self.next[e];
        }
        0.0
    }

    /// Dinic's algorithm; returns the value of a maximum flow.
    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let level = self.levels(s);
            if level[t] == u32::MAX {
                return total;
            }
            let mut iter = self.head.clone();
            loop {
                let f = self.push(s, t, f64::INFINITY, &level, &mut iter);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
    }
}

/// A maximum-probability antichain of `{0,1}^N` under `profile`, and its
/// probability.
///
/// Each element `v` is split into `v_in`, `v_out` with `v_in -> v_out`
/// uncapacitated; the source feeds `v_out` and `v_in` drains to the sink,
/// both with capacity `w(v)`, and every cover `v < x` gives an uncapacitated
/// edge `v_out -> x_in`. For a minimum cut `(S, T)` the elements with
/// `v_out in S`, `v_in in T` form an antichain of weight `sum w - cut`.
pub fn max_weight_antichain(profile: &BernoulliProfile) -> Result<(Antichain, f64)> {
    let n = profile.len();
    if n > MAX_FLOW_N {
        return Err(Error::TooLarge(format!(
            "max-weight antichain supports N <= {MAX_FLOW_N}, got {n}"
        )));
    }
    let size = 1usize << n;
    let weights: Vec<f64> = (0..size)
        .map(|m| profile.weight_of(&Configuration::from_mask(m as u32, n)))
        .collect();
    let (source, sink) = (0, 1);
    let v_in = |v: usize| 2 + 2 * v;
    let v_out = |v: usize| 3 + 2 * v;
    let mut net = FlowNetwork::new(2 + 2 * size);
    for (v, &w) in weights.iter().enumerate() {
        net.add_edge(source, v_out(v), w);
        net.add_edge(v_in(v), v_out(v), f64::INFINITY);
        net.add_edge(v_in(v), sink, w);
        for bit in 0..n {
            if v & (1 << bit) == 0 {
                net.add_edge(v_out(v), v_in(v | 1 << bit), f64::INFINITY);
            }
        }
    }
    net.max_flow(source, sink);
    let reachable = net.levels(source);
    let members: Vec<Configuration> = (0..size)
        .filter(|&v| reachable[v_out(v)] != u32::MAX && reachable[v_in(v)] == u32::MAX)
        .map(|v| Configuration::from_mask(v as u32, n))
        .collect();
    let a = Antichain::with_n(members, n)?;
    let weight = antichain_probability(&a, profile)?;
    Ok((a, weight))
}

/// All antichains of `{0,1}^N`, the empty one included, in lexicographic
/// order.
pub fn enumerate_antichains(n: usize) -> Result<Vec<Antichain>> {
    if n == 0 || n > MAX_ENUM_N {
        return Err(Error::TooLarge(format!(
            "enumeration supports 1 <= N <= {MAX_ENUM_N}, got {n}"
        )));
    }
    let size = 1u32 << n;
    let mut out: Vec<Vec<u32>> = Vec::new();
    let mut chosen: Vec<u32> = Vec::new();
    fn rec(next: u32, size: u32, chosen: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(chosen.clone());
        for m in next..size {
            // masks are comparable iff one is a subset of the other
            if chosen.iter().all(|&c| c & m != c && c & m != m) {
                chosen.push(m);
                rec(m + 1, size, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(0, size, &mut chosen, &mut out);
    out.sort();
    Ok(out
        .into_iter()
        .map(|masks| Antichain {
            n,
            members: masks
                .into_iter()
                .map(|m| Configuration::from_mask(m, n))
                .collect(),
        })
        .collect())
}

/// `(N, w* sigma sqrt(2 pi N))` with `w*` the maximum antichain probability
/// under iid `Bernoulli(p)`, which is the mass of the largest layer.
pub fn engel_trend(ns: &[usize], p: f64) -> Vec<(usize, f64)> {
    let sigma = (p * (1.0 - p)).sqrt();
    ns.iter()
        .map(|&n| {
            let (_, w) = binomial_mode_mass(n, p);
            (
                n,
                w * sigma * (2.0 * std::f64::consts::PI * n as f64).sqrt(),
            )
        })
        .collect()
}

/// Parses configuration blocks: one configuration per line as
/// whitespace-separated non-negative integers; blank lines separate blocks,
/// `#` starts a comment. All configurations must share one length.
pub fn parse_configurations(text: &str) -> Result<Vec<Vec<Configuration>>> {
    let mut blocks: Vec<Vec<Configuration>> = Vec::new();
    let mut current: Vec<Configuration> = Vec::new();
    let mut n: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            // a comment-only line does not end a block
            if raw.trim().is_empty() && !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u32>().map_err(|_| {
                    Error::parse(i + 1, format!("'{tok}' is not a non-negative integer"))
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        match n {
            None => n = Some(values.len()),
            Some(n) if n != values.len() => {
                return Err(Error::parse(
                    i + 1,
                    format!("expected {n} entries, found {}", values.len()),
                ))
            }
            _ => {}
        }
        current.push(Configuration(values));
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    if blocks.is_empty() {
        return Err(Error::parse(0, "no configurations found"));
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(v: &[u32]) -> Configuration {
        Configuration::new(v.to_vec()).unwrap()
    }

    #[test]
    fn antichain_checks() {
        let middle = Antichain::layer(4, 2).unwrap();
        assert_eq!(middle.len(), 6);
        assert!(is_antichain(middle.members()).unwrap());
        assert!(!is_antichain(&[cfg(&[0, 0]), cfg(&[0, 1])]).unwrap());
        assert!(is_antichain(&[cfg(&[0, 2]), cfg(&[1, 1]), cfg(&[2, 0])]).unwrap());
        assert_eq!(
            is_antichain(&[cfg(&[0, 1]), cfg(&[0, 1, 1])]),
            Err(Error::MixedDimensions)
        );
        assert_eq!(
            Antichain::new(vec![cfg(&[1, 0]), cfg(&[1, 1])]),
            Err(Error::NotAntichain {
                first: vec![1, 0],
                second: vec![1, 1]
            })
        );
    }

    #[test]
    fn members_are_sorted_and_deduplicated() {
        let a = Antichain::new(vec![cfg(&[1, 0]), cfg(&[0, 1]), cfg(&[1, 0])]).unwrap();
        assert_eq!(a.members(), &[cfg(&[0, 1]), cfg(&[1, 0])]);
    }

    #[test]
    fn lym_examples() {
        assert_eq!(lym_sum(&Antichain::layer(4, 2).unwrap()).unwrap(), 1.0);
        assert_eq!(lym_sum(&Antichain::empty(3)).unwrap(), 0.0);
        let single = Antichain::new(vec![cfg(&[1, 1, 0, 0, 0])]).unwrap();
        assert_eq!(lym_sum(&single).unwrap(), 0.1);
    }

    #[test]
    fn probability_examples() {
        let half = BernoulliProfile::iid(4, 0.5).unwrap();
        let middle = Antichain::layer(4, 2).unwrap();
        assert_eq!(antichain_probability(&middle, &half).unwrap(), 0.375);
        assert_eq!(
            antichain_probability(&Antichain::empty(4), &half).unwrap(),
            0.0
        );
        let varied = BernoulliProfile::new(vec![0.2, 0.5, 0.8]).unwrap();
        let layer = Antichain::layer(3, 1).unwrap();
        assert!((antichain_probability(&layer, &varied).unwrap() - 0.42).abs() < 1e-15);
        let chain = [cfg(&[0, 0]), cfg(&[1, 1])];
        let p = BernoulliProfile::iid(2, 0.5).unwrap();
        assert_eq!(set_probability(&chain, &p).unwrap(), 0.5);
    }

    #[test]
    fn bound_formulas() {
        assert!((sperner_bound_iid(4, 0.5) - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!((sperner_bound_iid(64, 0.5) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((sperner_bound_iid(100, 0.1) - 0.9428090415820634).abs() < 1e-12);
        let p = BernoulliProfile::iid(4, 0.5).unwrap();
        assert_eq!(sperner_bound_varied(&p), 4.0);
        assert_eq!(
            sperner_bound_varied(&BernoulliProfile::iid(1, 0.5).unwrap()),
            8.0
        );
    }

    #[test]
    fn binomial_mode_examples() {
        assert_eq!(binomial_mode_mass(4, 0.5), (2, 0.375));
        assert_eq!(binomial_mode_mass(1, 0.3), (0, 0.7));
        let (k, m) = binomial_mode_mass(10, 0.3);
        assert_eq!(k, 3);
        assert!((m - 0.266827932).abs() < 1e-9);
        assert_eq!(binomial_mode_mass(1, 0.5), (0, 0.5));
        assert_eq!(binomial(64, 32).to_string(), "1832624140942590534");
    }

    #[test]
    fn double_sampling_examples() {
        assert!((double_sampling_split(0.3, 0.75).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(double_sampling_split(0.4, 0.4).unwrap(), 1.0);
        assert!(double_sampling_split(0.1, 0.05).is_err());
    }

    #[test]
    fn max_weight_examples() {
        let (a, w) = max_weight_antichain(&BernoulliProfile::iid(4, 0.5).unwrap()).unwrap();
        assert_eq!(w, 0.375);
        assert!(is_antichain(a.members()).unwrap());
        let (a, w) = max_weight_antichain(&BernoulliProfile::iid(1, 0.7).unwrap()).unwrap();
        assert_eq!((a.members(), w), (&[cfg(&[1])][..], 0.7));
        let (_, w) = max_weight_antichain(&BernoulliProfile::iid(5, 0.5).unwrap()).unwrap();
        assert_eq!(w, 0.3125);
        assert!(matches!(
            max_weight_antichain(&BernoulliProfile::iid(17, 0.5).unwrap()),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn enumeration_small() {
        let one = enumerate_antichains(1).unwrap();
        assert_eq!(one.len(), 3);
        assert!(one[0].is_empty());
        assert_eq!(one[1].members(), &[cfg(&[0])]);
        assert_eq!(one[2].members(), &[cfg(&[1])]);
        assert_eq!(enumerate_antichains(2).unwrap().len(), 6);
        assert_eq!(enumerate_antichains(4).unwrap().len(), 168);
        assert!(enumerate_antichains(6).is_err());
    }

    #[test]
    fn engel_values() {
        let t = engel_trend(&[4, 16, 64], 0.5);
        assert!((t[0].1 - 0.9399856).abs() < 1e-6);
        assert!((t[1].1 - 0.9845064).abs() < 1e-6);
        assert!((t[2].1 - 0.9961015).abs() < 1e-6);
    }

    #[test]
    fn parse_blocks() {
        let text = "# two blocks\n1 1 0 0\n0 1 1 0\n\n1 0\n";
        assert_eq!(
            parse_configurations(text),
            Err(Error::parse(5, "expected 4 entries, found 2"))
        );
        let text = "1 1 0\n# note\n0 1 1\n\n\n1 0 0\n";
        let blocks = parse_configurations(text).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].len(), 2);
        assert!(matches!(
            parse_configurations("1 x"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_configurations("# nothing").is_err());
    }
}
