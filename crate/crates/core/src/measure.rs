//! Probability measures on the real line made of finitely many atoms and
//! uniform-density segments, together with their distribution and quantile
//! functions.
//!
//! The class is closed under every construction in this crate: quantile
//! functions are piecewise affine, and pushing Lebesgue measure on (0,1)
//! forward through a monotone piecewise-affine map lands back in the class.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::piecewise::{Piece, PiecewiseAffine};

/// Accepted deviation of the total input mass from 1 before renormalizing.
pub const MASS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Uniform density `mass / (right - left)` on `(left, right)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub left: f64,
    pub right: f64,
    pub mass: f64,
}

/// A mass-carrying item after segments have been split at interior atoms.
/// Items are ordered along the line and have pairwise disjoint interiors.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Item {
    Atom(f64),
    Segment(f64, f64),
}

impl Item {
    fn start(&self) -> f64 {
        match *self {
            Item::Atom(x) => x,
            Item::Segment(l, _) => l,
        }
    }

    fn end(&self) -> f64 {
        match *self {
            Item::Atom(x) => x,
            Item::Segment(_, r) => r,
        }
    }

    fn order_key(&self) -> (f64, u8) {
        match *self {
            Item::Atom(x) => (x, 0),
            Item::Segment(l, _) => (l, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMeasure {
    atoms: Vec<Atom>,
    segments: Vec<Segment>,
    items: Vec<Item>,
    /// `cum[i]` is the mass of all items before item `i`; `cum[len] == 1`.
    cum: Vec<f64>,
}

impl ProbabilityMeasure {
    /// Validates and renormalizes. Inputs may come in any order; atom
    /// locations must be distinct and segments must not overlap.
    pub fn new(mut atoms: Vec<Atom>, mut segments: Vec<Segment>) -> Result<Self> {
        if atoms.is_empty() && segments.is_empty() {
            return Err(Error::InvalidMeasure("no atoms or segments".into()));
        }
        for a in &atoms {
            if !a.location.is_finite() || !a.mass.is_finite() || a.mass <= 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {} with mass {} (mass must be positive and finite)",
                    a.location, a.mass
                )));
            }
        }
        for s in &segments {
            if !s.left.is_finite() || !s.right.is_finite() || !(s.left < s.right) {
                return Err(Error::InvalidMeasure(format!(
                    "segment [{}, {}] must have finite ends with left < right",
                    s.left, s.right
                )));
            }
            if !s.mass.is_finite() || s.mass <= 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "segment [{}, {}] has non-positive mass {}",
                    s.left, s.right, s.mass
                )));
            }
        }
        atoms.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap());
        segments.sort_by(|a, b| a.left.partial_cmp(&b.left).unwrap());
        if let Some(w) = atoms.windows(2).find(|w| w[0].location == w[1].location) {
            return Err(Error::InvalidMeasure(format!(
                "duplicate atom location {}",
                w[0].location
            )));
        }
        if let Some(w) = segments.windows(2).find(|w| w[0].right > w[1].left) {
            return Err(Error::InvalidMeasure(format!(
                "segments [{}, {}] and [{}, {}] overlap",
                w[0].left, w[0].right, w[1].left, w[1].right
            )));
        }

        let total: f64 = atoms.iter().map(|a| a.mass).sum::<f64>()
            + segments.iter().map(|s| s.mass).sum::<f64>();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "total mass {total} differs from 1 by more than {MASS_TOL}"
            )));
        }
        for a in &mut atoms {
            a.mass /= total;
        }
        for s in &mut segments {
            s.mass /= total;
        }

        // Split segments at atoms lying strictly inside them.
        let mut weighted: Vec<(Item, f64)> = atoms
            .iter()
            .map(|a| (Item::Atom(a.location), a.mass))
            .collect();
        for s in &segments {
            let inner: Vec<f64> = atoms
                .iter()
                .map(|a| a.location)
                .filter(|&x| s.left < x && x < s.right)
                .collect();
            let mut left = s.left;
            let width = s.right - s.left;
            for x in inner.into_iter().chain(std::iter::once(s.right)) {
                let m = if left == s.left && x == s.right {
                    s.mass
                } else {
                    s.mass * ((x - left) / width)
                };
                weighted.push((Item::Segment(left, x), m));
                left = x;
            }
        }
        weighted.sort_by(|a, b| a.0.order_key().partial_cmp(&b.0.order_key()).unwrap());

        let mut cum = Vec::with_capacity(weighted.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for (_, m) in &weighted[..weighted.len() - 1] {
            acc += m;
            cum.push(acc);
        }
        cum.push(1.0);
        if cum.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidMeasure(
                "an item carries mass below floating-point resolution".into(),
            ));
        }
        let items = weighted.into_iter().map(|(it, _)| it).collect();
        Ok(ProbabilityMeasure {
            atoms,
            segments,
            items,
            cum,
        })
    }

    pub fn atomic(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            atoms
                .iter()
                .map(|&(location, mass)| Atom { location, mass })
                .collect(),
            Vec::new(),
        )
    }

    pub fn uniform(left: f64, right: f64) -> Result<Self> {
        Self::new(
            Vec::new(),
            vec![Segment {
                left,
                right,
                mass: 1.0,
            }],
        )
    }

    /// Atoms (renormalized), sorted by location.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Segments (renormalized), sorted by left end.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_atomic(&self) -> bool {
        self.segments.is_empty()
    }

    /// True when the support is a single point.
    pub fn is_degenerate(&self) -> bool {
        self.segments.is_empty() && self.atoms.len() == 1
    }

    /// Smallest and largest point of the support.
    pub fn support(&self) -> (f64, f64) {
        (
            self.items[0].start(),
            self.items[self.items.len() - 1].end(),
        )
    }

    /// Diameter of the (essential) support.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.support();
        hi - lo
    }

    /// Mass of the atom at exactly `x`, or 0.
    pub fn atom_mass(&self, x: f64) -> f64 {
        self.items
            .iter()
            .position(|it| *it == Item::Atom(x))
            .map(|i| self.cum[i + 1] - self.cum[i])
            .unwrap_or(0.0)
    }

    /// `F(x) = mu((-inf, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let k = self.items.partition_point(|it| it.end() <= x);
        self.cdf_from(k, x)
    }

    /// `F(x-) = mu((-inf, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let k = self.items.partition_point(|it| it.end() < x);
        self.cdf_from(k, x)
    }

    fn cdf_from(&self, k: usize, x: f64) -> f64 {
        let mut f = self.cum[k];
        if let Some(&Item::Segment(l, r)) = self.items.get(k) {
            if l < x {
                let m = self.cum[k + 1] - self.cum[k];
                f += m * ((x - l) / (r - l));
            }
        }
        f
    }

    /// The generalized inverse `G(t) = inf{u : F(u) >= t}` as an exact
    /// piecewise-affine function: atoms give constant pieces, segments give
    /// affine pieces, and gaps in the support give jumps.
    pub fn quantile(&self) -> PiecewiseAffine {
        let pieces = self
            .items
            .iter()
            .map(|it| match *it {
                Item::Atom(x) => Piece::constant(x),
                Item::Segment(l, r) => Piece { start: l, end: r },
            })
            .collect();
        PiecewiseAffine::left_continuous(self.cum.clone(), pieces)
            .expect("cumulative masses are strictly increasing from 0 to 1")
    }

    /// Law of `f(t)` for `t` uniform on (0,1), where `f` is monotone.
    pub fn pushforward_uniform(f: &PiecewiseAffine) -> Result<Self> {
        let mut atoms: Vec<Atom> = Vec::new();
        let mut segments = Vec::new();
        for (i, p) in f.pieces().iter().enumerate() {
            let (t0, t1) = f.interval(i);
            let w = t1 - t0;
            if p.is_constant() {
                atoms.push(Atom {
                    location: p.start,
                    mass: w,
                });
            } else {
                segments.push(Segment {
                    left: p.start.min(p.end),
                    right: p.start.max(p.end),
                    mass: w,
                });
            }
        }
        atoms.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap());
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.location == a.location => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        Self::new(merged, segments)
    }

    /// `n` inverse-transform draws `G(u)`, `u` uniform on (0,1).
    pub fn sample(&self, n: usize, seed: u64) -> Result<EmpiricalSample> {
        if n == 0 {
            return Err(Error::Domain("sample size must be at least 1".into()));
        }
        let sampler = self.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EmpiricalSample::new((0..n).map(|_| sampler.draw(&mut rng)).collect())
    }

    pub fn sampler(&self) -> Sampler {
        Sampler { g: self.quantile() }
    }
}

/// Inverse-transform sampler for one measure; draws are returned in the
/// order they are made.
#[derive(Clone, Debug)]
pub struct Sampler {
    g: PiecewiseAffine,
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.g.eval(u).expect("Open01 draws lie in (0,1)")
    }
}

/// Largest `|lambda{t : G(t) <= c} - F(c)|` over the grid, for `G` the
/// quantile function of `mu`.
pub fn pushforward_check(mu: &ProbabilityMeasure, g: &PiecewiseAffine, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&c| (g.level_crossing(c) - mu.cdf(c)).abs())
        .fold(0.0, f64::max)
}

/// Sorted real sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sample contains a non-finite value".into()));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalSample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Empirical measure: one atom of mass `count / n` per distinct value.
    pub fn to_measure(&self) -> Result<ProbabilityMeasure> {
        let n = self.values.len() as f64;
        let mut atoms: Vec<Atom> = Vec::new();
        for &v in &self.values {
            match atoms.last_mut() {
                Some(a) if a.location == v => a.mass += 1.0,
                _ => atoms.push(Atom {
                    location: v,
                    mass: 1.0,
                }),
            }
        }
        for a in &mut atoms {
            a.mass /= n;
        }
        ProbabilityMeasure::new(atoms, Vec::new())
    }
}

/// Kolmogorov-Smirnov distance between the empirical CDF of the sample and
/// the CDF of `mu`, checking both one-sided limits at every sample point.
pub fn ks_statistic(sample: &EmpiricalSample, mu: &ProbabilityMeasure) -> f64 {
    let v = sample.values();
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let x = v[i];
        let mut j = i;
        while j < v.len() && v[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        d = d
            .max((upto - mu.cdf(x)).abs())
            .max((mu.cdf_left(x) - below).abs());
        i = j;
    }
    d
}

/// Parses the line-oriented distribution format:
/// `atom <x> <mass>`, `segment <a> <b> <mass>`, `#` comments.
pub fn parse_measure(text: &str) -> Result<ProbabilityMeasure> {
    let mut atoms = Vec::new();
    let mut segments = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let kind = fields.next().unwrap();
        let nums: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("cannot parse number '{f}'")))
            })
            .collect::<Result<_>>()?;
        match (kind, nums.as_slice()) {
            ("atom", &[location, mass]) => atoms.push(Atom { location, mass }),
            ("segment", &[left, right, mass]) => segments.push(Segment { left, right, mass }),
            ("atom", _) => return Err(Error::parse(line_no, "expected 'atom <x> <mass>'")),
            ("segment", _) => {
                return Err(Error::parse(line_no, "expected 'segment <a> <b> <mass>'"))
            }
            (other, _) => {
                return Err(Error::parse(
                    line_no,
                    format!("unknown directive '{other}'"),
                ))
            }
        }
        let ok = nums.iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::parse(line_no, "non-finite number"));
        }
    }
    ProbabilityMeasure::new(atoms, segments)
}

/// Parses one real per line (blank lines and `#` comments allowed).
pub fn parse_empirical(text: &str) -> Result<EmpiricalSample> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("cannot parse number '{line}'")))?;
        if !v.is_finite() {
            return Err(Error::parse(idx + 1, "non-finite number"));
        }
        values.push(v);
    }
    EmpiricalSample::new(values)
}
