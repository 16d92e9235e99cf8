//! Piecewise representation of quantile functions and virtual-value
//! profiles: evaluation, exact integration, monotone inversion, and the
//! JSON wire format.
//!
//! A market composition is stored as its lower quantile `Q : [0,1] -> [0,1]`.
//! Segments are constant, linear, or analytic. The analytic family is the
//! rational form `(c0 + c1 u + c2 u^2) / (1 - u)`, which covers
//! equal-revenue tails `a/(1-u)`, their shifted variants, and every tail
//! integral of a piecewise-linear virtual value profile. The family is
//! closed under the two rank remaps the engines need (mixing with a zero
//! atom, and restriction to a top-aligned rank band), so those operations
//! stay exact.

use serde::{Deserialize, Serialize};

use crate::config::ANALYTIC_SAMPLES;
use crate::error::{Error, Result};

const TILE_TOL: f64 = 1e-12;
const MONO_TOL: f64 = 1e-9;

/// Named closed forms for analytic segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticForm {
    /// `shift + a/(1-u)`; the workhorse equal-revenue tail.
    EqualRevenue { a: f64, shift: f64 },
    /// `(c0 + c1 u + c2 u^2) / (1-u)`.
    RationalQuad { c0: f64, c1: f64, c2: f64 },
}

impl AnalyticForm {
    /// Canonical rational coefficients (c0, c1, c2).
    pub fn coeffs(&self) -> (f64, f64, f64) {
        match *self {
            AnalyticForm::EqualRevenue { a, shift } => (a + shift, -shift, 0.0),
            AnalyticForm::RationalQuad { c0, c1, c2 } => (c0, c1, c2),
        }
    }

    /// Numerator evaluated at u = 1; zero means the form is a polynomial
    /// (no pole at the top rank).
    pub fn numerator_at_one(&self) -> f64 {
        let (c0, c1, c2) = self.coeffs();
        c0 + c1 + c2
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (_, c1, c2) = self.coeffs();
        let n1 = self.numerator_at_one();
        // Stable rearrangement: v(u) = n1/(1-u) - (c1 + c2 + c2 u).
        if n1 == 0.0 {
            -(c1 + c2) - c2 * u
        } else {
            n1 / (1.0 - u) - (c1 + c2 + c2 * u)
        }
    }

    pub fn deriv(&self, u: f64) -> f64 {
        let (_, _, c2) = self.coeffs();
        let n1 = self.numerator_at_one();
        n1 / ((1.0 - u) * (1.0 - u)) - c2
    }

    /// Exact antiderivative evaluated as a definite integral on [lo, hi].
    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        let (_, c1, c2) = self.coeffs();
        let n1 = self.numerator_at_one();
        if n1 != 0.0 && hi >= 1.0 {
            return Err(Error::Domain(
                "analytic segment with a pole at u = 1 cannot be integrated up to 1".into(),
            ));
        }
        let poly = |u: f64| -(c1 + c2) * u - 0.5 * c2 * u * u;
        let log_part = if n1 == 0.0 {
            0.0
        } else {
            -n1 * ((1.0 - hi).ln() - (1.0 - lo).ln())
        };
        Ok(log_part + poly(hi) - poly(lo))
    }

    /// Remap under `u = alpha * u' + beta` with `1 - u = gamma * (1 - u')`,
    /// scaling the value by `1/gamma`... the result is the form expressed in
    /// the new rank variable. Only valid when the affine rank map satisfies
    /// `1 - (alpha u' + beta) = alpha (1 - u')`, i.e. `alpha + beta = 1`.
    pub fn remap_top_aligned(&self, alpha: f64, beta: f64) -> AnalyticForm {
        debug_assert!((alpha + beta - 1.0).abs() < 1e-12);
        let (c0, c1, c2) = self.coeffs();
        // v'(u') = N(alpha u' + beta) / (alpha (1 - u'))
        let d0 = c0 + c1 * beta + c2 * beta * beta;
        let d1 = c1 * alpha + 2.0 * c2 * alpha * beta;
        let d2 = c2 * alpha * alpha;
        AnalyticForm::RationalQuad {
            c0: d0 / alpha,
            c1: d1 / alpha,
            c2: d2 / alpha,
        }
    }
}

/// Interpolation rule of one rank segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind {
    Constant(f64),
    Linear { v0: f64, v1: f64 },
    Analytic(AnalyticForm),
}

/// One segment of a piecewise function on ranks `[u0, u1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub u0: f64,
    pub u1: f64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn constant(u0: f64, u1: f64, v: f64) -> Segment {
        Segment {
            u0,
            u1,
            kind: SegmentKind::Constant(v),
        }
    }

    pub fn linear(u0: f64, u1: f64, v0: f64, v1: f64) -> Segment {
        if v0 == v1 {
            Segment::constant(u0, u1, v0)
        } else {
            Segment {
                u0,
                u1,
                kind: SegmentKind::Linear { v0, v1 },
            }
        }
    }

    pub fn analytic(u0: f64, u1: f64, form: AnalyticForm) -> Segment {
        Segment {
            u0,
            u1,
            kind: SegmentKind::Analytic(form),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self.kind {
            SegmentKind::Constant(v) => v,
            SegmentKind::Linear { v0, v1 } => {
                if self.u1 == self.u0 {
                    v0
                } else {
                    v0 + (v1 - v0) * (u - self.u0) / (self.u1 - self.u0)
                }
            }
            SegmentKind::Analytic(form) => form.eval(u),
        }
    }

    pub fn value_start(&self) -> f64 {
        self.eval(self.u0)
    }

    pub fn value_end(&self) -> f64 {
        self.eval(self.u1)
    }

    /// Exact integral over `[lo, hi] ⊆ [u0, u1]`.
    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        match self.kind {
            SegmentKind::Constant(v) => Ok(v * (hi - lo)),
            SegmentKind::Linear { .. } => Ok(0.5 * (self.eval(lo) + self.eval(hi)) * (hi - lo)),
            SegmentKind::Analytic(form) => form.integral(lo, hi),
        }
    }

    fn is_nondecreasing(&self) -> bool {
        match self.kind {
            SegmentKind::Constant(_) => true,
            SegmentKind::Linear { v0, v1 } => v1 >= v0 - MONO_TOL,
            SegmentKind::Analytic(form) => {
                let n1 = form.numerator_at_one();
                // v'(u) = n1/(1-u)^2 - c2 is monotone in u, so its minimum
                // over the segment sits at an endpoint.
                let d0 = form.deriv(self.u0);
                let d1 = form.deriv(self.u1.min(1.0 - 1e-13));
                let min = if n1 >= 0.0 { d0.min(d1) } else { d1.min(d0) };
                min >= -MONO_TOL
            }
        }
    }
}

/// A piecewise function whose segments tile a rank interval exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFn {
    segments: Vec<Segment>,
}

impl PiecewiseFn {
    pub fn new(segments: Vec<Segment>) -> Result<PiecewiseFn> {
        if segments.is_empty() {
            return Err(Error::InvalidInput(
                "piecewise function needs at least one segment".into(),
            ));
        }
        let mut segs = segments;
        for (w, seg) in segs.iter().enumerate() {
            if !seg.u0.is_finite() || !seg.u1.is_finite() || seg.u1 <= seg.u0 - TILE_TOL {
                return Err(Error::InvalidInput(format!(
                    "segment {w} has invalid rank bounds [{}, {}]",
                    seg.u0, seg.u1
                )));
            }
        }
        for w in 1..segs.len() {
            let gap = segs[w].u0 - segs[w - 1].u1;
            if gap.abs() > TILE_TOL {
                return Err(Error::InvalidInput(format!(
                    "segments must tile the rank axis exactly: gap of {gap:e} before segment {w}"
                )));
            }
            // Snap shared breakpoints so downstream arithmetic sees one value.
            let shared = segs[w - 1].u1;
            segs[w].u0 = shared;
        }
        Ok(PiecewiseFn { segments: segs })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn domain(&self) -> (f64, f64) {
        (
            self.segments[0].u0,
            self.segments[self.segments.len() - 1].u1,
        )
    }

    fn segment_index_at(&self, u: f64) -> usize {
        // Right-continuous convention: at an interior breakpoint take the
        // segment that starts there; at the domain top take the last.
        let n = self.segments.len();
        if u >= self.segments[n - 1].u0 {
            return n - 1;
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.segments[mid].u1 <= u {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (lo, hi) = self.domain();
        let u = u.clamp(lo, hi);
        self.segments[self.segment_index_at(u)].eval(u)
    }

    /// Exact integral on constant/linear segments, closed-form on analytic
    /// ones.
    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        let (d0, d1) = self.domain();
        if lo > hi {
            return Err(Error::Domain(format!(
                "integration bounds out of order: [{lo}, {hi}]"
            )));
        }
        if lo < d0 - TILE_TOL || hi > d1 + TILE_TOL {
            return Err(Error::Domain(format!(
                "integration bounds [{lo}, {hi}] outside domain [{d0}, {d1}]"
            )));
        }
        let lo = lo.max(d0);
        let hi = hi.min(d1);
        let mut acc = 0.0;
        for seg in &self.segments {
            let a = seg.u0.max(lo);
            let b = seg.u1.min(hi);
            if b > a {
                acc += seg.integral(a, b)?;
            }
        }
        Ok(acc)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.segments.iter().map(|s| s.u0).collect();
        pts.push(self.segments[self.segments.len() - 1].u1);
        pts
    }

    fn is_nondecreasing(&self) -> bool {
        let mut prev_end = f64::NEG_INFINITY;
        for seg in &self.segments {
            if !seg.is_nondecreasing() {
                return false;
            }
            if seg.value_start() < prev_end - MONO_TOL {
                return false;
            }
            prev_end = seg.value_end();
        }
        true
    }
}

/// Lower quantile of a market composition: nondecreasing, values in
/// `[0,1]`, ranks tiling `[0,1]` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFn {
    inner: PiecewiseFn,
}

impl QuantileFn {
    pub fn new(segments: Vec<Segment>) -> Result<QuantileFn> {
        let inner =
            PiecewiseFn::new(segments).map_err(|e| Error::InvalidQuantile(e.to_string()))?;
        let (d0, d1) = inner.domain();
        if d0.abs() > TILE_TOL || (d1 - 1.0).abs() > TILE_TOL {
            return Err(Error::InvalidQuantile(format!(
                "ranks must tile [0,1] exactly, got [{d0}, {d1}]"
            )));
        }
        if !inner.is_nondecreasing() {
            return Err(Error::InvalidQuantile(
                "quantile values must be nondecreasing in rank".into(),
            ));
        }
        for (i, seg) in inner.segments().iter().enumerate() {
            if let SegmentKind::Analytic(f) = seg.kind {
                if f.numerator_at_one() != 0.0 && seg.u1 >= 1.0 - TILE_TOL {
                    return Err(Error::InvalidQuantile(format!(
                        "segment {i}: analytic form has a pole at u = 1"
                    )));
                }
            }
            let top = seg.value_end().max(seg.value_start());
            let bot = seg.value_start().min(seg.value_end());
            if bot < -MONO_TOL || top > 1.0 + MONO_TOL {
                return Err(Error::InvalidQuantile(format!(
                    "segment {i}: values [{bot}, {top}] leave [0,1]"
                )));
            }
        }
        Ok(QuantileFn { inner })
    }

    /// Degenerate market at a single value.
    pub fn degenerate(v: f64) -> Result<QuantileFn> {
        QuantileFn::new(vec![Segment::constant(0.0, 1.0, v)])
    }

    pub fn delta_one() -> QuantileFn {
        QuantileFn::degenerate(1.0).expect("delta_1 is a valid market")
    }

    /// Step quantile from (value, mass) atoms; masses must sum to 1.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<QuantileFn> {
        if atoms.is_empty() {
            return Err(Error::InvalidQuantile("atom list is empty".into()));
        }
        let total: f64 = atoms.iter().map(|&(_, m)| m).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidQuantile(format!(
                "atom masses sum to {total}, expected 1"
            )));
        }
        if atoms.iter().any(|&(_, m)| m < 0.0) {
            return Err(Error::InvalidQuantile("negative atom mass".into()));
        }
        let mut sorted: Vec<(f64, f64)> = atoms.iter().copied().filter(|&(_, m)| m > 0.0).collect();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut segs = Vec::new();
        let mut u = 0.0;
        for (i, &(v, m)) in sorted.iter().enumerate() {
            let next = if i + 1 == sorted.len() { 1.0 } else { u + m };
            segs.push(Segment::constant(u, next, v));
            u = next;
        }
        QuantileFn::new(segs)
    }

    /// Piecewise-linear quantile through the given (rank, value) points.
    pub fn from_points(points: &[(f64, f64)]) -> Result<QuantileFn> {
        if points.len() < 2 {
            return Err(Error::InvalidQuantile("need at least two points".into()));
        }
        let mut segs = Vec::with_capacity(points.len() - 1);
        for w in points.windows(2) {
            segs.push(Segment::linear(w[0].0, w[1].0, w[0].1, w[1].1));
        }
        QuantileFn::new(segs)
    }

    pub fn segments(&self) -> &[Segment] {
        self.inner.segments()
    }

    pub fn as_piecewise(&self) -> &PiecewiseFn {
        &self.inner
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.inner.eval(u)
    }

    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        self.inner.integral(lo, hi)
    }

    pub fn mean(&self) -> f64 {
        self.inner
            .integral(0.0, 1.0)
            .expect("quantile integrable on [0,1]")
    }

    /// Tail integral of the quantile from rank t to 1.
    pub fn tail_integral(&self, t: f64) -> f64 {
        self.inner
            .integral(t, 1.0)
            .expect("quantile integrable on its domain")
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    /// Lowest generalized inverse: `inf { u : Q(u) >= v }`, 1 if never.
    pub fn rank_of_value(&self, v: f64) -> f64 {
        if self.eval(0.0) >= v {
            return 0.0;
        }
        for seg in self.segments() {
            let end = seg.value_end();
            if end < v {
                continue;
            }
            let start = seg.value_start();
            if start >= v {
                return seg.u0;
            }
            // value crosses v inside this segment
            return match seg.kind {
                SegmentKind::Constant(_) => seg.u1, // start < v <= end impossible for constants
                SegmentKind::Linear { v0, v1 } => seg.u0 + (v - v0) / (v1 - v0) * (seg.u1 - seg.u0),
                SegmentKind::Analytic(form) => {
                    // Solve N(u) = v (1 - u): quadratic in u.
                    let (c0, c1, c2) = form.coeffs();
                    solve_quadratic_in_range(c2, c1 + v, c0 - v, seg.u0, seg.u1).unwrap_or(seg.u1)
                }
            };
        }
        1.0
    }

    /// Survival at value v: mass of buyers with valuation >= v.
    pub fn survival(&self, v: f64) -> f64 {
        1.0 - self.rank_of_value(v)
    }

    /// Expected clipped excess E[(V - r)^+], integrated exactly in rank
    /// space.
    pub fn expected_excess(&self, r: f64) -> f64 {
        let cross = self.rank_of_value(r);
        if cross >= 1.0 {
            return 0.0;
        }
        self.tail_integral(cross) - r * (1.0 - cross)
    }

    /// Mass of the terminal atom at v = 1 (length of the maximal trailing
    /// run where the quantile is identically 1).
    pub fn top_atom_mass(&self) -> f64 {
        let mut start = 1.0;
        for seg in self.segments().iter().rev() {
            let flat_one = match seg.kind {
                SegmentKind::Constant(v) => (v - 1.0).abs() <= 1e-12,
                SegmentKind::Linear { v0, v1 } => {
                    (v0 - 1.0).abs() <= 1e-12 && (v1 - 1.0).abs() <= 1e-12
                }
                SegmentKind::Analytic(form) => {
                    (form.eval(seg.u0) - 1.0).abs() <= 1e-12
                        && (form.eval(0.5 * (seg.u0 + seg.u1)) - 1.0).abs() <= 1e-12
                }
            };
            if flat_one {
                start = seg.u0;
            } else {
                break;
            }
        }
        1.0 - start
    }

    /// Lower support endpoint Q(0).
    pub fn lower_value(&self) -> f64 {
        self.eval(0.0)
    }

    /// Distinct segment-endpoint values; the support points that matter for
    /// posted-price candidate sets.
    pub fn endpoint_values(&self) -> Vec<f64> {
        let mut vals = Vec::new();
        for seg in self.segments() {
            vals.push(seg.value_start());
            vals.push(seg.value_end());
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);
        vals
    }

    /// Mixture `(1-theta) δ_0 + theta G`: zero-value mass below rank
    /// `1-theta`, then this market compressed into the top band. Exact for
    /// every segment kind.
    pub fn mix_with_zero(&self, theta: f64) -> Result<QuantileFn> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidInput(format!(
                "theta must lie in [0,1], got {theta}"
            )));
        }
        if theta == 1.0 {
            return Ok(self.clone());
        }
        if theta == 0.0 {
            return QuantileFn::degenerate(0.0);
        }
        let base = 1.0 - theta;
        let mut segs = vec![Segment::constant(0.0, base, 0.0)];
        for seg in self.segments() {
            let u0 = base + theta * seg.u0;
            let u1 = base + theta * seg.u1;
            let kind = match seg.kind {
                SegmentKind::Constant(v) => SegmentKind::Constant(v),
                SegmentKind::Linear { v0, v1 } => SegmentKind::Linear { v0, v1 },
                SegmentKind::Analytic(form) => {
                    // u_old = (u_new - base)/theta = alpha u_new + beta with
                    // alpha = 1/theta, beta = -base/theta; alpha + beta = 1.
                    SegmentKind::Analytic(form.remap_top_aligned(1.0 / theta, -base / theta))
                }
            };
            segs.push(Segment { u0, u1, kind });
        }
        QuantileFn::new(segs)
    }

    /// Conditional market on the rank band `[t0, t1]`, renormalized to `[0,1]`.
    /// Constant and linear segments remap exactly; analytic segments remap
    /// exactly when the band is top-aligned (t1 = 1), otherwise they are
    /// sampled into linear pieces.
    pub fn restrict_ranks(&self, t0: f64, t1: f64) -> Result<QuantileFn> {
        if !(0.0..1.0).contains(&t0) || !(t0 < t1 && t1 <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "invalid rank band [{t0}, {t1}]"
            )));
        }
        let width = t1 - t0;
        let top_aligned = (t1 - 1.0).abs() <= TILE_TOL;
        let mut segs: Vec<Segment> = Vec::new();
        for seg in self.segments() {
            let a = seg.u0.max(t0);
            let b = seg.u1.min(t1);
            if b <= a {
                continue;
            }
            let n0 = (a - t0) / width;
            let n1 = (b - t0) / width;
            match seg.kind {
                SegmentKind::Constant(v) => segs.push(Segment::constant(n0, n1, v)),
                SegmentKind::Linear { .. } => {
                    segs.push(Segment::linear(n0, n1, seg.eval(a), seg.eval(b)))
                }
                SegmentKind::Analytic(form) => {
                    if top_aligned {
                        // u_old = t0 + u_new * width: alpha = width,
                        // beta = t0, alpha + beta = 1.
                        segs.push(Segment::analytic(n0, n1, form.remap_top_aligned(width, t0)));
                    } else {
                        let n = ((ANALYTIC_SAMPLES as f64) * (b - a)).ceil().max(16.0) as usize;
                        for i in 0..n {
                            let ua = a + (b - a) * i as f64 / n as f64;
                            let ub = a + (b - a) * (i + 1) as f64 / n as f64;
                            segs.push(Segment::linear(
                                (ua - t0) / width,
                                (ub - t0) / width,
                                seg.eval(ua),
                                seg.eval(ub),
                            ));
                        }
                    }
                }
            }
        }
        // Snap the outer bounds exactly to [0,1].
        if let Some(first) = segs.first_mut() {
            first.u0 = 0.0;
        }
        if let Some(last) = segs.last_mut() {
            last.u1 = 1.0;
        }
        QuantileFn::new(segs)
    }

    /// Piecewise-linear resampling on n uniform rank cells (terminal flats
    /// at 1 are preserved exactly).
    pub fn sample_linear(&self, n: usize) -> Result<QuantileFn> {
        let atom = self.top_atom_mass();
        let b = 1.0 - atom;
        let mut pts = Vec::with_capacity(n + 2);
        if b > 0.0 {
            for i in 0..=n {
                let u = b * i as f64 / n as f64;
                pts.push((u, self.eval(u).clamp(0.0, 1.0)));
            }
        } else {
            pts.push((0.0, 1.0));
        }
        let mut segs: Vec<Segment> = pts
            .windows(2)
            .map(|w| Segment::linear(w[0].0, w[1].0, w[0].1, w[1].1))
            .collect();
        if atom > 0.0 {
            segs.push(Segment::constant(b, 1.0, 1.0));
        }
        QuantileFn::new(segs)
    }

    pub fn to_json(&self) -> QuantileJson {
        QuantileJson {
            segments: self
                .segments()
                .iter()
                .map(SegmentJson::from_segment)
                .collect(),
        }
    }

    pub fn from_json(json: &QuantileJson) -> Result<QuantileFn> {
        let segs = json
            .segments
            .iter()
            .map(SegmentJson::to_segment)
            .collect::<Result<Vec<_>>>()?;
        QuantileFn::new(segs)
    }
}

/// Ironed virtual value profile: nondecreasing, right-continuous, values in
/// (-inf, 1]. Stored with the same segment machinery as quantiles but
/// without the `[0,1]` value constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualValueProfile {
    inner: PiecewiseFn,
}

impl VirtualValueProfile {
    pub fn new(segments: Vec<Segment>) -> Result<VirtualValueProfile> {
        let inner = PiecewiseFn::new(segments)?;
        let (d0, d1) = inner.domain();
        if d0.abs() > TILE_TOL || (d1 - 1.0).abs() > TILE_TOL {
            return Err(Error::InvalidInput(format!(
                "virtual value profile must cover [0,1], got [{d0}, {d1}]"
            )));
        }
        if !inner.is_nondecreasing() {
            return Err(Error::InvalidInput(
                "virtual values must be nondecreasing".into(),
            ));
        }
        for seg in inner.segments() {
            if seg.value_start().max(seg.value_end()) > 1.0 + 1e-9 {
                return Err(Error::InvalidInput(
                    "virtual values must not exceed 1".into(),
                ));
            }
        }
        Ok(VirtualValueProfile { inner })
    }

    pub fn segments(&self) -> &[Segment] {
        self.inner.segments()
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.inner.eval(u)
    }

    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        self.inner.integral(lo, hi)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    /// Ranks where the profile crosses the given level, for splitting
    /// integrals at kinks of `q(phi)`.
    pub fn level_crossings(&self, level: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for seg in self.segments() {
            if let SegmentKind::Linear { v0, v1 } = seg.kind {
                if (v0 - level) * (v1 - level) < 0.0 {
                    out.push(seg.u0 + (level - v0) / (v1 - v0) * (seg.u1 - seg.u0));
                }
            }
        }
        out
    }
}

fn solve_quadratic_in_range(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Option<f64> {
    // a u^2 + b u + c = 0, smallest root in [lo, hi]
    let mut roots = Vec::new();
    if a.abs() < 1e-300 {
        if b.abs() > 1e-300 {
            roots.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        // Numerically stable pair
        let q = -0.5 * (b + b.signum() * sq);
        if q != 0.0 {
            roots.push(q / a);
            roots.push(c / q);
        } else {
            roots.push(0.0);
        }
    }
    roots
        .into_iter()
        .filter(|r| (lo - 1e-12..=hi + 1e-12).contains(r))
        .map(|r| r.clamp(lo, hi))
        .min_by(|x, y| x.partial_cmp(y).unwrap())
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

/// Wire form of a quantile: `{"segments":[{"u0":..,"u1":..,"interp":..,
/// "v0":..,"v1":..,"form":..,"params":[..]}]}`; ranks must tile `[0,1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantileJson {
    pub segments: Vec<SegmentJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentJson {
    pub u0: f64,
    pub u1: f64,
    pub interp: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
}

impl SegmentJson {
    pub fn from_segment(seg: &Segment) -> SegmentJson {
        match seg.kind {
            SegmentKind::Constant(v) => SegmentJson {
                u0: seg.u0,
                u1: seg.u1,
                interp: "constant".into(),
                v0: Some(v),
                v1: Some(v),
                form: None,
                params: None,
            },
            SegmentKind::Linear { v0, v1 } => SegmentJson {
                u0: seg.u0,
                u1: seg.u1,
                interp: "linear".into(),
                v0: Some(v0),
                v1: Some(v1),
                form: None,
                params: None,
            },
            SegmentKind::Analytic(form) => {
                let (name, params) = match form {
                    AnalyticForm::EqualRevenue { a, shift } => {
                        ("equal-revenue".to_string(), vec![a, shift])
                    }
                    AnalyticForm::RationalQuad { c0, c1, c2 } => {
                        ("rational-quad".to_string(), vec![c0, c1, c2])
                    }
                };
                SegmentJson {
                    u0: seg.u0,
                    u1: seg.u1,
                    interp: "analytic".into(),
                    v0: Some(seg.value_start()),
                    v1: Some(seg.value_end()),
                    form: Some(name),
                    params: Some(params),
                }
            }
        }
    }

    pub fn to_segment(&self) -> Result<Segment> {
        match self.interp.as_str() {
            "constant" => {
                let v = self
                    .v0
                    .ok_or_else(|| Error::InvalidQuantile("constant segment needs v0".into()))?;
                Ok(Segment::constant(self.u0, self.u1, v))
            }
            "linear" => {
                let v0 = self
                    .v0
                    .ok_or_else(|| Error::InvalidQuantile("linear segment needs v0".into()))?;
                let v1 = self
                    .v1
                    .ok_or_else(|| Error::InvalidQuantile("linear segment needs v1".into()))?;
                Ok(Segment::linear(self.u0, self.u1, v0, v1))
            }
            "analytic" => {
                let name = self.form.as_deref().ok_or_else(|| {
                    Error::InvalidQuantile("analytic segment needs a form name".into())
                })?;
                let params = self.params.clone().unwrap_or_default();
                let form = match name {
                    "equal-revenue" => {
                        let a = *params.first().ok_or_else(|| {
                            Error::InvalidQuantile(
                                "equal-revenue needs params [a] or [a, shift]".into(),
                            )
                        })?;
                        let shift = params.get(1).copied().unwrap_or(0.0);
                        AnalyticForm::EqualRevenue { a, shift }
                    }
                    "rational-quad" => {
                        if params.len() != 3 {
                            return Err(Error::InvalidQuantile(
                                "rational-quad needs params [c0, c1, c2]".into(),
                            ));
                        }
                        AnalyticForm::RationalQuad {
                            c0: params[0],
                            c1: params[1],
                            c2: params[2],
                        }
                    }
                    other => {
                        return Err(Error::InvalidQuantile(format!(
                            "unknown analytic form '{other}'"
                        )))
                    }
                };
                Ok(Segment::analytic(self.u0, self.u1, form))
            }
            other => Err(Error::InvalidQuantile(format!(
                "unknown interp kind '{other}'"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_step() -> QuantileFn {
        QuantileFn::from_atoms(&[(0.3, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn integrate_constant_and_linear_exactly() {
        let f = PiecewiseFn::new(vec![Segment::constant(0.0, 1.0, 1.0)]).unwrap();
        assert_eq!(f.integral(0.0, 1.0).unwrap(), 1.0);

        let g = PiecewiseFn::new(vec![Segment::linear(0.0, 1.0, 0.0, 1.0)]).unwrap();
        assert_eq!(g.integral(0.0, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn equal_revenue_integral_matches_antiderivative() {
        // 0.5/(1-u) on [0, 0.5] integrates to 0.5 ln 2
        let f = PiecewiseFn::new(vec![Segment::analytic(
            0.0,
            0.5,
            AnalyticForm::EqualRevenue { a: 0.5, shift: 0.0 },
        )])
        .unwrap();
        let v = f.integral(0.0, 0.5).unwrap();
        assert!((v - 0.5 * std::f64::consts::LN_2).abs() < 1e-14, "got {v}");
    }

    #[test]
    fn integral_additive_across_split() {
        let q = two_step();
        for &m in &[0.1, 0.25, 0.5, 0.77] {
            let whole = q.integral(0.0, 1.0).unwrap();
            let parts = q.integral(0.0, m).unwrap() + q.integral(m, 1.0).unwrap();
            assert!((whole - parts).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_is_nondecreasing_on_dense_grid() {
        let q = QuantileFn::new(vec![
            Segment::linear(0.0, 0.4, 0.1, 0.3),
            Segment::constant(0.4, 0.7, 0.3),
            Segment::analytic(
                0.7,
                0.9,
                AnalyticForm::EqualRevenue {
                    a: 0.09,
                    shift: 0.0,
                },
            ),
            Segment::constant(0.9, 1.0, 1.0),
        ])
        .unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=10_000 {
            let v = q.eval(i as f64 / 10_000.0);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn rank_of_value_inverts_linear_and_analytic() {
        let q = QuantileFn::from_points(&[(0.0, 0.2), (1.0, 0.8)]).unwrap();
        assert!((q.rank_of_value(0.5) - 0.5).abs() < 1e-12);
        assert_eq!(q.rank_of_value(0.1), 0.0);
        assert_eq!(q.rank_of_value(0.9), 1.0);

        let er = QuantileFn::new(vec![
            Segment::analytic(0.0, 0.5, AnalyticForm::EqualRevenue { a: 0.5, shift: 0.0 }),
            Segment::constant(0.5, 1.0, 1.0),
        ])
        .unwrap();
        // a/(1-u) = v  =>  u = 1 - a/v
        assert!((er.rank_of_value(0.8) - (1.0 - 0.5 / 0.8)).abs() < 1e-12);
    }

    #[test]
    fn top_atom_detection() {
        let q = two_step();
        assert!((q.top_atom_mass() - 0.5).abs() < 1e-12);
        assert_eq!(QuantileFn::delta_one().top_atom_mass(), 1.0);
        let no_atom = QuantileFn::from_points(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(no_atom.top_atom_mass(), 0.0);
    }

    #[test]
    fn mix_with_zero_scales_tail_integrals() {
        let q = two_step();
        let mixed = q.mix_with_zero(0.5).unwrap();
        assert_eq!(mixed.eval(0.25), 0.0);
        assert!((mixed.mean() - 0.5 * q.mean()).abs() < 1e-12);
        // analytic segment survives the remap exactly
        let er = QuantileFn::new(vec![
            Segment::analytic(0.0, 0.5, AnalyticForm::EqualRevenue { a: 0.5, shift: 0.0 }),
            Segment::constant(0.5, 1.0, 1.0),
        ])
        .unwrap();
        let m = er.mix_with_zero(0.25).unwrap();
        assert!((m.mean() - 0.25 * er.mean()).abs() < 1e-12);
        assert!((m.eval(0.875) - er.eval(0.5)).abs() < 1e-12);
    }

    #[test]
    fn restrict_ranks_renormalizes() {
        let q = two_step();
        let top = q.restrict_ranks(0.5, 1.0).unwrap();
        assert_eq!(top.eval(0.5), 1.0);
        let bottom = q.restrict_ranks(0.0, 0.5).unwrap();
        assert_eq!(bottom.eval(0.9), 0.3);
    }

    #[test]
    fn json_round_trip_is_identity() {
        let q = QuantileFn::new(vec![
            Segment::linear(0.0, 0.6, 0.05, 0.4),
            Segment::analytic(
                0.6,
                0.8,
                AnalyticForm::EqualRevenue {
                    a: 0.16,
                    shift: 0.2,
                },
            ),
            Segment::constant(0.8, 1.0, 1.0),
        ])
        .unwrap();
        let text = serde_json::to_string(&q.to_json()).unwrap();
        let parsed: QuantileJson = serde_json::from_str(&text).unwrap();
        let q2 = QuantileFn::from_json(&parsed).unwrap();
        let text2 = serde_json::to_string(&q2.to_json()).unwrap();
        assert_eq!(text, text2);
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            assert!((q.eval(u) - q2.eval(u)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_monotone_and_bad_tiling() {
        assert!(QuantileFn::from_points(&[(0.0, 0.5), (1.0, 0.2)]).is_err());
        assert!(QuantileFn::new(vec![
            Segment::constant(0.0, 0.4, 0.1),
            Segment::constant(0.5, 1.0, 0.9),
        ])
        .is_err());
        assert!(QuantileFn::new(vec![Segment::constant(0.0, 0.9, 0.5)]).is_err());
    }
}
