//! The quantile-space reduction: raw revenue curve, least concave majorant,
//! ironed virtual value, nonnegative truncation, and regularization.
//!
//! The raw revenue curve of every representable quantile is piecewise
//! quadratic in rank (constant segments give lines, linear segments give
//! concave parabolas, analytic segments give their numerator polynomial),
//! so the least concave majorant is computed exactly by a monotone scan
//! over arcs with closed-form bridge (common tangent) steps. No sampling
//! is involved; hulling a regular curve returns it bit-for-bit, which is
//! what makes `regularize` idempotent at machine precision.

use crate::error::{Error, Result};
use crate::piecewise::{AnalyticForm, QuantileFn, Segment, SegmentKind, VirtualValueProfile};

const GEOM_TOL: f64 = 1e-11;

/// One concave quadratic piece of a revenue curve:
/// `r(u) = c0 + c1 u + c2 u^2` on `[u0, u1]` with `c2 <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueArc {
    pub u0: f64,
    pub u1: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl RevenueArc {
    fn eval(&self, u: f64) -> f64 {
        self.c0 + u * (self.c1 + u * self.c2)
    }

    fn slope(&self, u: f64) -> f64 {
        self.c1 + 2.0 * self.c2 * u
    }

    fn is_point(&self) -> bool {
        self.u1 - self.u0 <= 1e-15
    }

    /// Support point and value: argmax and max of `f(x) - s x` over the
    /// arc domain. `prefer_high` resolves ties (flat directions on linear
    /// arcs) toward the right end.
    fn support(&self, s: f64, prefer_high: bool) -> (f64, f64) {
        let x = if self.c2 < 0.0 {
            ((s - self.c1) / (2.0 * self.c2)).clamp(self.u0, self.u1)
        } else {
            // linear arc: slope comparison decides the endpoint
            match self.c1.partial_cmp(&s) {
                Some(std::cmp::Ordering::Greater) => self.u1,
                Some(std::cmp::Ordering::Less) => self.u0,
                _ => {
                    if prefer_high {
                        self.u1
                    } else {
                        self.u0
                    }
                }
            }
        };
        (x, self.eval(x) - s * x)
    }
}

/// Least concave majorant of a raw revenue curve, stored as contiguous
/// arcs with nonincreasing slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveRevenue {
    arcs: Vec<RevenueArc>,
}

impl ConcaveRevenue {
    pub fn arcs(&self) -> &[RevenueArc] {
        &self.arcs
    }

    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(self.arcs[0].u0, self.arcs[self.arcs.len() - 1].u1);
        for arc in &self.arcs {
            if u <= arc.u1 {
                return arc.eval(u);
            }
        }
        self.arcs[self.arcs.len() - 1].eval(u)
    }

    /// Ironed virtual value: negative right-derivative of the hull, linear
    /// on each arc, clamped into (-inf, 1].
    pub fn virtual_values(&self) -> Result<VirtualValueProfile> {
        let mut segs: Vec<Segment> = Vec::with_capacity(self.arcs.len());
        let mut prev_end = f64::NEG_INFINITY;
        for arc in &self.arcs {
            if arc.is_point() {
                continue;
            }
            let mut v0 = -arc.slope(arc.u0);
            let mut v1 = -arc.slope(arc.u1);
            if v0 > 1.0 + 1e-9 || v1 > 1.0 + 1e-9 {
                return Err(Error::Numerical(format!(
                    "virtual value exceeds 1 on [{}, {}]: [{v0}, {v1}]",
                    arc.u0, arc.u1
                )));
            }
            v0 = v0.min(1.0);
            v1 = v1.min(1.0);
            // Concavity makes phi nondecreasing; snap fp noise at junctions.
            if v0 < prev_end && prev_end - v0 < 1e-10 {
                v0 = prev_end;
            }
            if v1 < v0 {
                v1 = v0;
            }
            segs.push(Segment::linear(arc.u0, arc.u1, v0, v1));
            prev_end = v1;
        }
        VirtualValueProfile::new(segs)
    }

    /// The regularized quantile R(u)/(1-u).
    pub fn to_quantile(&self) -> Result<QuantileFn> {
        let mut segs: Vec<Segment> = Vec::with_capacity(self.arcs.len());
        for arc in &self.arcs {
            if arc.is_point() {
                continue;
            }
            let n1 = arc.c0 + arc.c1 + arc.c2;
            let scale = arc.c0.abs().max(arc.c1.abs()).max(arc.c2.abs()).max(1e-3);
            if n1.abs() <= 1e-12 * scale {
                // (1-u) divides the numerator: the quantile is affine.
                let v = |u: f64| (-(arc.c1 + arc.c2) - arc.c2 * u).clamp(0.0, 1.0);
                segs.push(Segment::linear(arc.u0, arc.u1, v(arc.u0), v(arc.u1)));
            } else {
                segs.push(Segment::analytic(
                    arc.u0,
                    arc.u1,
                    AnalyticForm::RationalQuad {
                        c0: arc.c0,
                        c1: arc.c1,
                        c2: arc.c2,
                    },
                ));
            }
        }
        QuantileFn::new(segs)
    }
}

/// Raw revenue arcs of a quantile: u -> (1-u) Q(u) piece by piece. Convex
/// analytic pieces (which can only come from hand-written rational
/// segments) are replaced by their chord, which leaves the majorant
/// unchanged.
fn raw_revenue_arcs(q: &QuantileFn) -> Vec<RevenueArc> {
    let mut arcs = Vec::with_capacity(q.segments().len());
    for seg in q.segments() {
        let (u0, u1) = (seg.u0, seg.u1);
        let arc = match seg.kind {
            SegmentKind::Constant(v) => RevenueArc {
                u0,
                u1,
                c0: v,
                c1: -v,
                c2: 0.0,
            },
            SegmentKind::Linear { v0, .. } => {
                // Q = alpha + beta u with alpha = v0 - beta u0
                let beta = seg.slope();
                let alpha = v0 - beta * u0;
                RevenueArc {
                    u0,
                    u1,
                    c0: alpha,
                    c1: beta - alpha,
                    c2: -beta,
                }
            }
            SegmentKind::Analytic(form) => {
                let (c0, c1, c2) = form.coeffs();
                if c2 > 0.0 {
                    // cav of a convex arc over an interval is its chord
                    let y0 = c0 + u0 * (c1 + u0 * c2);
                    let y1 = c0 + u1 * (c1 + u1 * c2);
                    let s = (y1 - y0) / (u1 - u0);
                    RevenueArc {
                        u0,
                        u1,
                        c0: y0 - s * u0,
                        c1: s,
                        c2: 0.0,
                    }
                } else {
                    RevenueArc { u0, u1, c0, c1, c2 }
                }
            }
        };
        arcs.push(arc);
    }
    arcs
}

impl Segment {
    fn slope(&self) -> f64 {
        match self.kind {
            SegmentKind::Linear { v0, v1 } => (v1 - v0) / (self.u1 - self.u0),
            _ => 0.0,
        }
    }
}

/// Computes the concavified revenue curve and the ironed virtual value of a
/// market composition.
pub fn concavified_revenue(q: &QuantileFn) -> Result<(ConcaveRevenue, VirtualValueProfile)> {
    let hull = upper_concave_envelope(raw_revenue_arcs(q))?;
    let phi = hull.virtual_values()?;
    Ok((hull, phi))
}

/// Truncates negative virtual values and rebuilds the implied quantile
/// `Q+(u) = (1/(1-u)) ∫_u^1 max(phi, 0)`.
pub fn truncate_nonneg(phi: &VirtualValueProfile) -> Result<(VirtualValueProfile, QuantileFn)> {
    // Split at the zero crossing and clip below.
    let mut plus_segs: Vec<Segment> = Vec::new();
    for seg in phi.segments() {
        match seg.kind {
            SegmentKind::Constant(v) => {
                plus_segs.push(Segment::constant(seg.u0, seg.u1, v.max(0.0)));
            }
            SegmentKind::Linear { v0, v1 } => {
                if v0 >= 0.0 {
                    plus_segs.push(*seg);
                } else if v1 <= 0.0 {
                    plus_segs.push(Segment::constant(seg.u0, seg.u1, 0.0));
                } else {
                    let cross = seg.u0 + (0.0 - v0) / (v1 - v0) * (seg.u1 - seg.u0);
                    plus_segs.push(Segment::constant(seg.u0, cross, 0.0));
                    plus_segs.push(Segment::linear(cross, seg.u1, 0.0, v1));
                }
            }
            SegmentKind::Analytic(_) => {
                return Err(Error::InvalidInput(
                    "virtual value profiles are piecewise constant/linear".into(),
                ));
            }
        }
    }
    let phi_plus = VirtualValueProfile::new(plus_segs.clone())?;

    // Tail integrals right-to-left; each segment yields one rational piece.
    let mut q_segs: Vec<Segment> = Vec::with_capacity(plus_segs.len());
    let mut tail = 0.0; // ∫_{u1}^{1} phi+
    for seg in plus_segs.iter().rev() {
        let (p, qlin) = match seg.kind {
            SegmentKind::Constant(v) => (v, 0.0),
            SegmentKind::Linear { v0, v1 } => {
                let s = (v1 - v0) / (seg.u1 - seg.u0);
                (v0 - s * seg.u0, s)
            }
            SegmentKind::Analytic(_) => unreachable!(),
        };
        // T(u) = tail + ∫_u^{u1} (p + qlin t) dt
        let d0 = tail + p * seg.u1 + 0.5 * qlin * seg.u1 * seg.u1;
        let d1 = -p;
        let d2 = -0.5 * qlin;
        let n1 = d0 + d1 + d2;
        let scale = d0.abs().max(d1.abs()).max(d2.abs()).max(1e-3);
        let piece = if n1.abs() <= 1e-13 * scale {
            let v = |u: f64| (-(d1 + d2) - d2 * u).clamp(0.0, 1.0);
            Segment::linear(seg.u0, seg.u1, v(seg.u0), v(seg.u1))
        } else if d1 == 0.0 && d2 == 0.0 {
            Segment::analytic(
                seg.u0,
                seg.u1,
                AnalyticForm::EqualRevenue { a: d0, shift: 0.0 },
            )
        } else {
            Segment::analytic(
                seg.u0,
                seg.u1,
                AnalyticForm::RationalQuad {
                    c0: d0,
                    c1: d1,
                    c2: d2,
                },
            )
        };
        q_segs.push(piece);
        tail = d0 + d1 * seg.u0 + d2 * seg.u0 * seg.u0;
    }
    q_segs.reverse();
    let q_plus = QuantileFn::new(q_segs)?;
    Ok((phi_plus, q_plus))
}

/// Without-loss regularization: replaces Q by R(u)/(1-u), whose raw revenue
/// curve is already concave.
pub fn regularize(q: &QuantileFn) -> Result<QuantileFn> {
    let (hull, _) = concavified_revenue(q)?;
    hull.to_quantile()
}

// ---------------------------------------------------------------------------
// Upper concave envelope over arcs
// ---------------------------------------------------------------------------

fn upper_concave_envelope(raw: Vec<RevenueArc>) -> Result<ConcaveRevenue> {
    if raw.is_empty() {
        return Err(Error::InvalidInput("no arcs to hull".into()));
    }
    let anchor = RevenueArc {
        u0: raw[0].u0,
        u1: raw[0].u0,
        c0: raw[0].eval(raw[0].u0),
        c1: 0.0,
        c2: 0.0,
    };
    let mut stack: Vec<RevenueArc> = vec![anchor];
    for arc in raw {
        push_arc(&mut stack, arc)?;
    }
    let arcs: Vec<RevenueArc> = stack.into_iter().filter(|a| !a.is_point()).collect();
    if arcs.is_empty() {
        return Err(Error::Numerical("hull degenerated to a point".into()));
    }
    Ok(ConcaveRevenue { arcs })
}

fn push_arc(stack: &mut Vec<RevenueArc>, arc: RevenueArc) -> Result<()> {
    loop {
        let last = *stack.last().expect("stack holds the anchor");

        // Fast path: abutting continuous junction with nonincreasing slope
        // needs no bridge. This is what keeps hulling a regular curve exact.
        if (last.u1 - arc.u0).abs() <= 1e-14 {
            let gap = arc.eval(arc.u0) - last.eval(last.u1);
            let slope_ok = if last.is_point() {
                stack.len() == 1
            } else {
                last.slope(last.u1) >= arc.slope(arc.u0) - GEOM_TOL
            };
            if gap.abs() <= GEOM_TOL && slope_ok {
                stack.push(arc);
                return Ok(());
            }
        }

        let (xl_raw, xn, s) = bridge(&last, &arc)?;
        if xl_raw <= last.u0 + 1e-14 && stack.len() > 1 {
            stack.pop();
            continue;
        }
        let xl = xl_raw.max(last.u0);
        let y_at = last.eval(xl);
        stack.last_mut().expect("stack nonempty").u1 = xl;
        if xn > xl + 1e-15 {
            stack.push(RevenueArc {
                u0: xl,
                u1: xn,
                c0: y_at - s * xl,
                c1: s,
                c2: 0.0,
            });
        }
        if arc.u1 > xn + 1e-15 {
            let mut rest = arc;
            rest.u0 = xn;
            stack.push(rest);
        }
        return Ok(());
    }
}

/// Upper common support line of two concave arcs with l entirely to the
/// left of n: bisection on the slope of `h_l(s) - h_n(s)`, where `h` is
/// each arc's support function. The difference is monotone in s because
/// the support points are ordered, so the root is the unique common
/// support slope; the resulting line majorizes both arcs by construction,
/// at every scale, with no tolerance tuning.
///
/// Returns (touch on l, touch on n, slope).
fn bridge(l: &RevenueArc, n: &RevenueArc) -> Result<(f64, f64, f64)> {
    let g = |s: f64| l.support(s, true).1 - n.support(s, false).1;

    // bracket the root: g -> +inf as s -> +inf (support points separate),
    // g -> -inf as s -> -inf
    let scale = 1.0 + l.slope(l.u0).abs().max(n.slope(n.u1).abs());
    let mut lo = -4.0 * scale;
    let mut hi = 4.0 * scale;
    let mut tries = 0;
    while g(lo) > 0.0 {
        lo *= 4.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::Numerical(
                "hull bridge bracket failed (low side)".into(),
            ));
        }
    }
    while g(hi) < 0.0 {
        hi *= 4.0;
        tries += 1;
        if tries > 120 {
            return Err(Error::Numerical(
                "hull bridge bracket failed (high side)".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= f64::EPSILON * scale {
            break;
        }
        if g(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    // ties toward keeping the left arc and preserving the right arc
    let (xl, _) = l.support(s, true);
    let (xn, _) = n.support(s, false);
    if xn > xl + 1e-15 {
        // sharpen the slope through the actual touch points
        let s_exact = (n.eval(xn) - l.eval(xl)) / (xn - xl);
        // only adopt the sharpened slope if both supports are endpoint-
        // clamped (otherwise s is already tangent-exact)
        let l_interior = l.c2 < 0.0 && xl > l.u0 && xl < l.u1;
        let n_interior = n.c2 < 0.0 && xn > n.u0 && xn < n.u1;
        if !l_interior && !n_interior && s_exact.is_finite() {
            return Ok((xl, xn, s_exact));
        }
    }
    Ok((xl, xn, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::AnalyticForm;

    fn phi_values(phi: &VirtualValueProfile, us: &[f64]) -> Vec<f64> {
        us.iter().map(|&u| phi.eval(u)).collect()
    }

    #[test]
    fn delta_one_is_already_concave() {
        let q = QuantileFn::delta_one();
        let (hull, phi) = concavified_revenue(&q).unwrap();
        for i in 0..=10 {
            let u = i as f64 / 10.0;
            assert!((hull.eval(u) - (1.0 - u)).abs() < 1e-14);
            if u < 1.0 {
                assert!((phi.eval(u) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_step_low_high() {
        // Q = 0.3 on (0, 0.5], 1 on (0.5, 1]: hull through (0,.3),(.5,.5),(1,0)
        let q = QuantileFn::from_atoms(&[(0.3, 0.5), (1.0, 0.5)]).unwrap();
        let (hull, phi) = concavified_revenue(&q).unwrap();
        assert!((hull.eval(0.0) - 0.3).abs() < 1e-13);
        assert!((hull.eval(0.5) - 0.5).abs() < 1e-13);
        assert!(hull.eval(1.0).abs() < 1e-13);
        let vals = phi_values(&phi, &[0.1, 0.4, 0.6, 0.9]);
        assert!(
            (vals[0] + 0.4).abs() < 1e-12,
            "phi below cutoff: {}",
            vals[0]
        );
        assert!((vals[1] + 0.4).abs() < 1e-12);
        assert!((vals[2] - 1.0).abs() < 1e-12);
        assert!((vals[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_step_high_pair() {
        // Q = 0.8 / 0.9: hull of (0,.8),(.5,.45),(1,0) keeps all vertices
        let q = QuantileFn::from_atoms(&[(0.8, 0.5), (0.9, 0.5)]).unwrap();
        let (_, phi) = concavified_revenue(&q).unwrap();
        let vals = phi_values(&phi, &[0.2, 0.45, 0.55, 0.95]);
        assert!((vals[0] - 0.7).abs() < 1e-12);
        assert!((vals[1] - 0.7).abs() < 1e-12);
        assert!((vals[2] - 0.9).abs() < 1e-12);
        assert!((vals[3] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn hull_keeps_concave_parabola() {
        // uniform on [0,1]: revenue u(1-u) is concave, hull must equal it
        let q = QuantileFn::from_points(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        let (hull, phi) = concavified_revenue(&q).unwrap();
        for i in 0..=20 {
            let u = i as f64 / 20.0;
            assert!((hull.eval(u) - u * (1.0 - u)).abs() < 1e-14);
        }
        // phi = -(d/du)[u - u^2] = 2u - 1
        assert!((phi.eval(0.25) + 0.5).abs() < 1e-13);
        assert!((phi.eval(0.75) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn hull_slopes_are_nonincreasing() {
        let q = QuantileFn::new(vec![
            Segment::linear(0.0, 0.3, 0.05, 0.4),
            Segment::constant(0.3, 0.55, 0.4),
            Segment::linear(0.55, 0.8, 0.55, 0.9),
            Segment::constant(0.8, 1.0, 1.0),
        ])
        .unwrap();
        let (hull, _) = concavified_revenue(&q).unwrap();
        let mut prev = f64::INFINITY;
        for arc in hull.arcs() {
            assert!(arc.slope(arc.u0) <= prev + 1e-10);
            assert!(arc.slope(arc.u1) <= arc.slope(arc.u0) + 1e-12);
            prev = arc.slope(arc.u1);
        }
        // hull majorizes the raw curve
        for i in 0..=1000 {
            let u = i as f64 / 1000.0;
            assert!(hull.eval(u) >= (1.0 - u) * q.eval(u) - 1e-11);
        }
        assert!(hull.eval(1.0).abs() < 1e-12);
    }

    #[test]
    fn truncate_two_step() {
        let q = QuantileFn::from_atoms(&[(0.3, 0.5), (1.0, 0.5)]).unwrap();
        let (_, phi) = concavified_revenue(&q).unwrap();
        let (plus, q_plus) = truncate_nonneg(&phi).unwrap();
        assert_eq!(plus.eval(0.2), 0.0);
        assert!((plus.eval(0.7) - 1.0).abs() < 1e-12);
        // Q+ = 0.5/(1-u) below the cutoff, 1 after
        assert!((q_plus.eval(0.0) - 0.5).abs() < 1e-12);
        assert!((q_plus.eval(0.25) - 0.5 / 0.75).abs() < 1e-12);
        assert!((q_plus.eval(0.75) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncate_identity_when_nonnegative() {
        let q = QuantileFn::from_atoms(&[(0.8, 0.5), (0.9, 0.5)]).unwrap();
        let (_, phi) = concavified_revenue(&q).unwrap();
        let (plus, q_plus) = truncate_nonneg(&phi).unwrap();
        for i in 0..100 {
            let u = i as f64 / 100.0;
            assert!((plus.eval(u) - phi.eval(u)).abs() < 1e-13);
        }
        // Q+ equals the regularized quantile of the original
        let reg = regularize(&q).unwrap();
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            assert!((q_plus.eval(u) - reg.eval(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn truncate_all_negative() {
        let phi = VirtualValueProfile::new(vec![Segment::constant(0.0, 1.0, -0.2)]).unwrap();
        let (plus, q_plus) = truncate_nonneg(&phi).unwrap();
        assert_eq!(plus.eval(0.5), 0.0);
        assert_eq!(q_plus.eval(0.5), 0.0);
    }

    #[test]
    fn regularize_two_step() {
        let q = QuantileFn::from_atoms(&[(0.8, 0.5), (0.9, 0.5)]).unwrap();
        let reg = regularize(&q).unwrap();
        // (0.8 - 0.7u)/(1-u) on [0, 0.5], then 0.9
        for &u in &[0.0, 0.2, 0.4999] {
            assert!((reg.eval(u) - (0.8 - 0.7 * u) / (1.0 - u)).abs() < 1e-12);
        }
        assert!((reg.eval(0.7) - 0.9).abs() < 1e-12);
        assert!((reg.eval(1.0) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn regularize_is_idempotent() {
        let cases = vec![
            QuantileFn::from_atoms(&[(0.3, 0.5), (1.0, 0.5)]).unwrap(),
            QuantileFn::from_atoms(&[(0.8, 0.5), (0.9, 0.5)]).unwrap(),
            QuantileFn::from_points(&[(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)]).unwrap(),
            QuantileFn::new(vec![
                Segment::analytic(0.0, 0.6, AnalyticForm::EqualRevenue { a: 0.4, shift: 0.0 }),
                Segment::constant(0.6, 1.0, 1.0),
            ])
            .unwrap(),
        ];
        for q in cases {
            let once = regularize(&q).unwrap();
            let twice = regularize(&once).unwrap();
            for i in 0..=500 {
                let u = i as f64 / 500.0;
                assert!(
                    (once.eval(u) - twice.eval(u)).abs() < 1e-10,
                    "idempotence failed at u = {u}"
                );
                assert!(
                    once.eval(u) >= q.eval(u) - 1e-10,
                    "regularization must dominate"
                );
            }
            // raw curve of a regularized quantile equals its own hull
            let (hull, _) = concavified_revenue(&once).unwrap();
            for i in 0..=500 {
                let u = i as f64 / 500.0;
                assert!((hull.eval(u) - (1.0 - u) * once.eval(u)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn delta_regularizes_to_itself() {
        let q = QuantileFn::delta_one();
        let reg = regularize(&q).unwrap();
        for i in 0..=10 {
            assert!((reg.eval(i as f64 / 10.0) - 1.0).abs() < 1e-13);
        }
    }
}
