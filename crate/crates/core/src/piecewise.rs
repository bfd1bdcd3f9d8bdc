//! Piecewise-affine functions on the open unit interval.
//!
//! A [`PiecewiseAffine`] is stored as a strictly increasing list of
//! breakpoints `0 = b_0 < b_1 < ... < b_m = 1`, one affine piece per open
//! interval `(b_i, b_{i+1})` given by its two one-sided endpoint limits, and
//! an explicit value at every interior breakpoint. Jumps are allowed at
//! breakpoints. Quantile functions use the left-continuous convention (the
//! value at a breakpoint is the left limit); functions obtained by composing
//! with a decreasing map inherit the right limit instead, which is why point
//! values are stored rather than implied.

use crate::error::{Error, Result};

/// Absolute tolerance used when breakpoints coming from different functions
/// are merged.
pub const BREAK_TOL: f64 = 1e-12;

/// One affine piece, described by its limits at the two ends of its interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    /// Limit of the function at the left end of the interval (from the right).
    pub start: f64,
    /// Limit of the function at the right end of the interval (from the left).
    pub end: f64,
}

impl Piece {
    pub fn constant(v: f64) -> Self {
        Piece { start: v, end: v }
    }

    pub fn is_constant(&self) -> bool {
        self.start == self.end
    }

    fn lo(&self) -> f64 {
        self.start.min(self.end)
    }

    fn hi(&self) -> f64 {
        self.start.max(self.end)
    }

    /// Linear interpolation on `[t0, t1]`, clamped to the range of the piece.
    fn at(&self, t0: f64, t1: f64, t: f64) -> f64 {
        if self.start == self.end {
            return self.start;
        }
        if t <= t0 {
            return self.start;
        }
        if t >= t1 {
            return self.end;
        }
        let v = self.start + (self.end - self.start) * ((t - t0) / (t1 - t0));
        v.clamp(self.lo(), self.hi())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseAffine {
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
    at_break: Vec<f64>,
}

/// Which one-sided limit a value refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl PiecewiseAffine {
    /// Builds a function from breakpoints (including 0 and 1), pieces, and
    /// the values taken at the interior breakpoints.
    pub fn new(breaks: Vec<f64>, pieces: Vec<Piece>, at_break: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::Domain(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if pieces.len() != breaks.len() - 1 || at_break.len() != breaks.len() - 2 {
            return Err(Error::Domain(
                "piece count does not match breakpoints".into(),
            ));
        }
        let finite = pieces
            .iter()
            .all(|p| p.start.is_finite() && p.end.is_finite())
            && at_break.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain(
                "non-finite value in piecewise function".into(),
            ));
        }
        Ok(PiecewiseAffine {
            breaks,
            pieces,
            at_break,
        })
    }

    /// Left-continuous function: the value at each interior breakpoint is the
    /// left limit.
    pub fn left_continuous(breaks: Vec<f64>, pieces: Vec<Piece>) -> Result<Self> {
        let at_break = pieces
            .iter()
            .take(pieces.len().saturating_sub(1))
            .map(|p| p.end)
            .collect();
        Self::new(breaks, pieces, at_break)
    }

    pub fn constant(v: f64) -> Self {
        PiecewiseAffine {
            breaks: vec![0.0, 1.0],
            pieces: vec![Piece::constant(v)],
            at_break: Vec::new(),
        }
    }

    /// All breakpoints including 0 and 1.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Interior breakpoints only.
    pub fn interior_breaks(&self) -> &[f64] {
        &self.breaks[1..self.breaks.len() - 1]
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Values taken at the interior breakpoints.
    pub fn break_values(&self) -> &[f64] {
        &self.at_break
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    /// Interval `(b_i, b_{i+1})` of piece `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.breaks[i], self.breaks[i + 1])
    }

    /// Piece `i` written as `t -> a*t + c`.
    pub fn coefficients(&self, i: usize) -> (f64, f64) {
        let (t0, t1) = self.interval(i);
        let p = self.pieces[i];
        let a = (p.end - p.start) / (t1 - t0);
        (a, p.start - a * t0)
    }

    fn piece_at(&self, i: usize, t: f64) -> f64 {
        let (t0, t1) = self.interval(i);
        self.pieces[i].at(t0, t1, t)
    }

    /// Index of the piece whose open interval contains `t`, if `t` is not a
    /// breakpoint.
    fn locate(&self, t: f64) -> std::result::Result<usize, usize> {
        // Ok(j): t == breaks[j]; Err(i): t lies inside piece i.
        let idx = self.breaks.partition_point(|&b| b < t);
        if idx < self.breaks.len() && self.breaks[idx] == t {
            Ok(idx)
        } else {
            Err(idx - 1)
        }
    }

    /// Value at `t` in the open interval (0, 1).
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("evaluation point {t} outside (0,1)")));
        }
        Ok(match self.locate(t) {
            Ok(j) => self.at_break[j - 1],
            Err(i) => self.piece_at(i, t),
        })
    }

    /// Like [`eval`](Self::eval), but a `t` within `BREAK_TOL` of a
    /// breakpoint is read as that breakpoint.
    pub fn eval_snapped(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("evaluation point {t} outside (0,1)")));
        }
        Ok(self.value_snapped(t))
    }

    /// Right limit, with `t` within `BREAK_TOL` of a breakpoint read as
    /// that breakpoint.
    pub fn right_limit_snapped(&self, t: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(format!("right limit at {t} outside [0,1)")));
        }
        let idx = self.breaks.partition_point(|&b| b < t - BREAK_TOL);
        if idx < self.breaks.len() - 1 && (self.breaks[idx] - t).abs() <= BREAK_TOL {
            return Ok(self.pieces[idx].start);
        }
        self.right_limit(t)
    }

    /// `lim_{s -> t-} f(s)`, defined for `t` in (0, 1].
    pub fn left_limit(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain(format!("left limit at {t} outside (0,1]")));
        }
        Ok(match self.locate(t) {
            Ok(j) => self.pieces[j - 1].end,
            Err(i) => self.piece_at(i, t),
        })
    }

    /// `lim_{s -> t+} f(s)`, defined for `t` in [0, 1).
    pub fn right_limit(&self, t: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(format!("right limit at {t} outside [0,1)")));
        }
        Ok(match self.locate(t) {
            Ok(j) => self.pieces[j].start,
            Err(i) => self.piece_at(i, t),
        })
    }

    pub fn limit(&self, t: f64, side: Side) -> Result<f64> {
        match side {
            Side::Left => self.left_limit(t),
            Side::Right => self.right_limit(t),
        }
    }

    /// Value of the piece containing `t` (`t` inside `[b_i, b_{i+1}]`),
    /// snapping to the stored endpoint limits when `t` is within tolerance of
    /// one of them.
    fn piece_value_snapped(&self, i: usize, t: f64) -> f64 {
        let (t0, t1) = self.interval(i);
        if (t - t0).abs() <= BREAK_TOL {
            self.pieces[i].start
        } else if (t - t1).abs() <= BREAK_TOL {
            self.pieces[i].end
        } else {
            self.pieces[i].at(t0, t1, t)
        }
    }

    /// Point value at `t`, treating `t` as one of this function's own
    /// breakpoints when it is within tolerance of one.
    fn value_snapped(&self, t: f64) -> f64 {
        let idx = self.breaks.partition_point(|&b| b < t - BREAK_TOL);
        if idx > 0 && idx < self.breaks.len() - 1 && (self.breaks[idx] - t).abs() <= BREAK_TOL {
            return self.at_break[idx - 1];
        }
        let i = self
            .breaks
            .partition_point(|&b| b <= t)
            .clamp(1, self.pieces.len())
            - 1;
        self.pieces[i].at(self.breaks[i], self.breaks[i + 1], t)
    }

    fn piece_index_containing(&self, t: f64) -> usize {
        let idx = self.breaks.partition_point(|&b| b <= t);
        idx.clamp(1, self.pieces.len()) - 1
    }

    /// `t -> f(scale * t + shift)`; the image of (0,1) must lie in [0,1].
    ///
    /// Composition with a decreasing map turns the stored left limits into
    /// right limits in the new variable, so point values are carried over
    /// from the original breakpoints unchanged.
    pub fn compose_affine(&self, scale: f64, shift: f64) -> Result<Self> {
        let lo = shift.min(scale + shift);
        let hi = shift.max(scale + shift);
        if scale == 0.0 || lo < -BREAK_TOL || hi > 1.0 + BREAK_TOL {
            return Err(Error::Domain(format!(
                "affine map t -> {scale}*t + {shift} does not send (0,1) into (0,1)"
            )));
        }
        // Original breakpoints strictly inside the image, mapped back to t.
        let mut inner: Vec<(f64, usize)> = self
            .breaks
            .iter()
            .enumerate()
            .skip(1)
            .take(self.breaks.len() - 2)
            .filter(|&(_, &b)| b > lo + BREAK_TOL && b < hi - BREAK_TOL)
            .map(|(j, &b)| ((b - shift) / scale, j))
            .collect();
        if scale < 0.0 {
            inner.reverse();
        }
        let mut breaks = Vec::with_capacity(inner.len() + 2);
        breaks.push(0.0);
        breaks.extend(inner.iter().map(|&(t, _)| t));
        breaks.push(1.0);
        // Ends of each new piece, as either an original breakpoint index or a
        // raw s-value at the domain boundary.
        enum End {
            Orig(usize),
            Raw(f64),
        }
        let mut ends = Vec::with_capacity(breaks.len());
        ends.push(End::Raw(shift));
        ends.extend(inner.iter().map(|&(_, j)| End::Orig(j)));
        ends.push(End::Raw(scale + shift));

        let mut pieces = Vec::with_capacity(breaks.len() - 1);
        for k in 0..breaks.len() - 1 {
            let s_mid = scale * (0.5 * (breaks[k] + breaks[k + 1])) + shift;
            let i = self.piece_index_containing(s_mid);
            let val = |e: &End| match *e {
                End::Orig(j) if j == i => self.pieces[i].start,
                End::Orig(j) if j == i + 1 => self.pieces[i].end,
                End::Orig(j) => self.piece_value_snapped(i, self.breaks[j]),
                End::Raw(s) => self.piece_value_snapped(i, s),
            };
            pieces.push(Piece {
                start: val(&ends[k]),
                end: val(&ends[k + 1]),
            });
        }
        let at_break = inner.iter().map(|&(_, j)| self.at_break[j - 1]).collect();
        Self::new(breaks, pieces, at_break)
    }

    /// `cf * f + cg * g` on the merged breakpoint grid.
    pub fn linear_combination(f: &Self, cf: f64, g: &Self, cg: f64) -> Result<Self> {
        let mut all: Vec<f64> = f
            .interior_breaks()
            .iter()
            .chain(g.interior_breaks())
            .copied()
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut breaks = vec![0.0];
        for b in all {
            if b - *breaks.last().unwrap() > BREAK_TOL {
                breaks.push(b);
            }
        }
        if 1.0 - *breaks.last().unwrap() <= BREAK_TOL && breaks.len() > 1 {
            breaks.pop();
        }
        breaks.push(1.0);

        let mut pieces = Vec::with_capacity(breaks.len() - 1);
        for k in 0..breaks.len() - 1 {
            let (t0, t1) = (breaks[k], breaks[k + 1]);
            let mid = 0.5 * (t0 + t1);
            let fi = f.piece_index_containing(mid);
            let gi = g.piece_index_containing(mid);
            let start = cf * f.piece_value_snapped(fi, t0) + cg * g.piece_value_snapped(gi, t0);
            let end = cf * f.piece_value_snapped(fi, t1) + cg * g.piece_value_snapped(gi, t1);
            pieces.push(Piece { start, end });
        }
        let at_break = breaks[1..breaks.len() - 1]
            .iter()
            .map(|&b| cf * f.value_snapped(b) + cg * g.value_snapped(b))
            .collect();
        Self::new(breaks, pieces, at_break)
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(self, 1.0, other, -1.0)
    }

    /// Essential infimum: the smallest one-sided limit over all pieces.
    pub fn ess_inf(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.lo())
            .fold(f64::INFINITY, f64::min)
    }

    /// Essential supremum.
    pub fn ess_sup(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.hi())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Infimum over the open interval, including values at breakpoints.
    pub fn inf(&self) -> f64 {
        self.at_break.iter().copied().fold(self.ess_inf(), f64::min)
    }

    pub fn sup(&self) -> f64 {
        self.at_break.iter().copied().fold(self.ess_sup(), f64::max)
    }

    /// Non-decreasing across pieces, jumps, and point values (up to `tol`).
    pub fn is_non_decreasing(&self, tol: f64) -> bool {
        self.pieces.iter().all(|p| p.end >= p.start - tol)
            && (0..self.at_break.len()).all(|j| {
                let l = self.pieces[j].end;
                let r = self.pieces[j + 1].start;
                let v = self.at_break[j];
                l <= v + tol && v <= r + tol
            })
    }

    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.pieces.iter().all(|p| p.end <= p.start + tol)
            && (0..self.at_break.len()).all(|j| {
                let l = self.pieces[j].end;
                let r = self.pieces[j + 1].start;
                let v = self.at_break[j];
                l + tol >= v && v + tol >= r
            })
    }

    /// Lebesgue measure of `{t in (0,1) : f(t) > threshold}`.
    pub fn measure_above(&self, threshold: f64) -> f64 {
        let mut total = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let (t0, t1) = self.interval(i);
            let w = t1 - t0;
            if p.is_constant() {
                if p.start > threshold {
                    total += w;
                }
            } else if p.lo() >= threshold {
                // at most an endpoint touches the threshold
                total += w;
            } else if p.hi() > threshold {
                let frac = (p.hi() - threshold) / (p.hi() - p.lo());
                total += w * frac;
            }
        }
        total
    }

    /// For a non-decreasing function: `sup{t : f(t) <= c}`, i.e. the
    /// Lebesgue measure of `{t : f(t) <= c}`.
    pub fn level_crossing(&self, c: f64) -> f64 {
        let mut crossing = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let (t0, t1) = self.interval(i);
            if p.start > c {
                break;
            }
            if p.end <= c {
                crossing = t1;
            } else {
                // start <= c < end on an increasing piece
                crossing = t0 + (t1 - t0) * ((c - p.start) / (p.end - p.start));
                break;
            }
        }
        crossing
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step() -> PiecewiseAffine {
        // 0 on (0,1/2], 1 on (1/2,1)
        PiecewiseAffine::left_continuous(
            vec![0.0, 0.5, 1.0],
            vec![Piece::constant(0.0), Piece::constant(1.0)],
        )
        .unwrap()
    }

    #[test]
    fn eval_is_left_continuous() {
        let f = step();
        assert_eq!(f.eval(0.5).unwrap(), 0.0);
        assert_eq!(f.right_limit(0.5).unwrap(), 1.0);
        assert_eq!(f.left_limit(0.5).unwrap(), 0.0);
        assert_eq!(f.eval(0.75).unwrap(), 1.0);
    }

    #[test]
    fn endpoints_are_rejected() {
        let f = step();
        assert!(f.eval(0.0).is_err());
        assert!(f.eval(1.0).is_err());
        assert!(f.left_limit(0.0).is_err());
        assert!(f.right_limit(1.0).is_err());
        assert_eq!(f.left_limit(1.0).unwrap(), 1.0);
        assert_eq!(f.right_limit(0.0).unwrap(), 0.0);
    }

    #[test]
    fn affine_coefficients() {
        let f = PiecewiseAffine::left_continuous(
            vec![0.0, 1.0],
            vec![Piece {
                start: 0.25,
                end: 0.75,
            }],
        )
        .unwrap();
        assert_eq!(f.coefficients(0), (0.5, 0.25));
        assert_eq!(f.eval(0.5).unwrap(), 0.5);
    }

    #[test]
    fn rejects_bad_breaks() {
        assert!(PiecewiseAffine::new(vec![0.0, 0.5], vec![Piece::constant(0.0)], vec![]).is_err());
        assert!(PiecewiseAffine::new(
            vec![0.0, 0.5, 0.5, 1.0],
            vec![Piece::constant(0.0); 3],
            vec![0.0; 2]
        )
        .is_err());
    }

    #[test]
    fn decreasing_composition_takes_right_limits() {
        // h(t) = step(1 - t/2): s in (1/2, 1); s = 1/2 at t = 1 only.
        let h = step().compose_affine(-0.5, 1.0).unwrap();
        assert_eq!(h.num_pieces(), 1);
        assert_eq!(h.eval(0.999).unwrap(), 1.0);
        // h(t) = step(1 - t): jump at t = 1/2, where the value is step(1/2) = 0.
        let h = step().compose_affine(-1.0, 1.0).unwrap();
        assert_eq!(h.eval(0.5).unwrap(), 0.0);
        assert_eq!(h.left_limit(0.5).unwrap(), 1.0);
        assert_eq!(h.right_limit(0.5).unwrap(), 0.0);
        assert!(h.is_non_increasing(0.0));
    }

    #[test]
    fn combination_merges_close_breaks() {
        let f = step();
        let g = PiecewiseAffine::left_continuous(
            vec![0.0, 0.5 + 1e-15, 1.0],
            vec![Piece::constant(2.0), Piece::constant(3.0)],
        )
        .unwrap();
        let d = g.sub(&f).unwrap();
        assert_eq!(d.num_pieces(), 2);
        assert_eq!(d.inf(), 2.0);
        assert_eq!(d.sup(), 2.0);
    }

    #[test]
    fn measure_above_and_level_crossing() {
        let f = PiecewiseAffine::left_continuous(
            vec![0.0, 1.0],
            vec![Piece {
                start: 1.0,
                end: 0.0,
            }],
        )
        .unwrap();
        assert!((f.measure_above(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(f.measure_above(1.0), 0.0);
        let g = step();
        assert_eq!(g.level_crossing(0.0), 0.5);
        assert_eq!(g.level_crossing(-1.0), 0.0);
        assert_eq!(g.level_crossing(1.0), 1.0);
    }
}
