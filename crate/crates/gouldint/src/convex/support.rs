//! Support functions and the piecewise-sinusoid engine over the unit circle.
//!
//! A convex body embeds as its support function `h_A(u) = sup_{x in A} <x,u>`.
//! On the unit circle every quantity this library needs — sup-norm distances,
//! tag-sum envelopes, oscillation spreads — is a sum of terms of the form
//! `c(u) * h_A(u)` where `c` is piecewise constant on the merged normal fan.
//! Such sums are single sinusoids on each arc of a refined fan, so their
//! extrema have closed forms; [`CircleFn`] represents them and maximizes them
//! without sampling.

use super::{ConvexBody, ConvexError, Pt2};
use crate::rat::{Mag, Rat};
use num::bigint::BigInt;
use num::traits::{Signed, Zero};
use std::collections::BTreeSet;
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

/// The support function of a body, or the unit element (constantly one on
/// the circle, the image of the unit ball).
#[derive(Debug, Clone, PartialEq)]
pub struct SupportFn {
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Body(ConvexBody),
    /// The function constantly equal to one on the unit circle (planar only;
    /// on the line the unit element is the embedded interval `[-1, 1]`).
    Unit2,
}

impl SupportFn {
    pub fn of_body(body: ConvexBody) -> SupportFn {
        SupportFn {
            kind: Kind::Body(body),
        }
    }

    /// The unit element `u` of the embedding target.
    pub fn unit(dim: u8) -> SupportFn {
        match dim {
            1 => SupportFn::of_body(ConvexBody::Interval {
                lo: -Rat::from_integer(1.into()),
                hi: Rat::from_integer(1.into()),
            }),
            _ => SupportFn { kind: Kind::Unit2 },
        }
    }

    pub fn dim(&self) -> u8 {
        match &self.kind {
            Kind::Body(b) => b.dim(),
            Kind::Unit2 => 2,
        }
    }

    pub fn body(&self) -> Option<&ConvexBody> {
        match &self.kind {
            Kind::Body(b) => Some(b),
            Kind::Unit2 => None,
        }
    }

    /// Exact evaluation on the line at the directions `+1` / `-1`.
    pub fn eval_sign(&self, positive: bool) -> Rat {
        let body = self.body().expect("line support function");
        let (lo, hi) = body.endpoints().expect("interval body");
        if positive {
            hi.clone()
        } else {
            -lo.clone()
        }
    }

    /// Planar evaluation at the unit direction of angle `theta`.
    pub fn eval_angle(&self, theta: f64) -> f64 {
        match &self.kind {
            Kind::Unit2 => 1.0,
            Kind::Body(b) => {
                let verts = b.vertices().expect("planar body");
                let (c, s) = (theta.cos(), theta.sin());
                verts
                    .iter()
                    .map(|v| {
                        let (x, y) = v.to_f64();
                        x * c + y * s
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Support value in an unnormalized rational direction; exact for
    /// body-backed functions, `|u|` (approximate) for the unit element.
    pub fn support_dir2(&self, u: &Pt2) -> Mag {
        match &self.kind {
            Kind::Body(b) => Mag::Exact(b.support_2d(u)),
            Kind::Unit2 => Mag::Approx(crate::rat::rat_to_f64(&u.norm_sq()).sqrt()),
        }
    }

    /// Sup-norm distance between two support functions. Exact on the line;
    /// computed by closed-form arc maximization over the merged fan in the
    /// plane.
    pub fn sup_norm_diff(&self, other: &SupportFn) -> Result<Mag, ConvexError> {
        if self.dim() != other.dim() {
            return Err(ConvexError::DimMismatch(self.dim(), other.dim()));
        }
        if self.dim() == 1 {
            let d_pos = (self.eval_sign(true) - other.eval_sign(true)).abs();
            let d_neg = (self.eval_sign(false) - other.eval_sign(false)).abs();
            return Ok(Mag::Exact(d_pos.max(d_neg)));
        }
        let f = self.circle_fn(1.0).add(&other.circle_fn(-1.0));
        Ok(Mag::Approx(f.sup_abs()))
    }

    fn circle_fn(&self, weight: f64) -> CircleFn {
        match &self.kind {
            Kind::Body(b) => CircleFn::weighted_body(b, weight),
            Kind::Unit2 => CircleFn::constant(weight),
        }
    }
}

/// Sup-norm distance of the support functions of two planar bodies.
pub(crate) fn support_sup_diff(a: &ConvexBody, b: &ConvexBody) -> f64 {
    CircleFn::weighted_body(a, 1.0)
        .add(&CircleFn::weighted_body(b, -1.0))
        .sup_abs()
}

/// Merged outward-normal directions of two planar bodies, as canonical
/// coprime integer vectors. Two bodies are equal exactly when their support
/// functions agree on this set, which is what makes it sufficient for exact
/// comparisons.
pub fn merged_direction_set(a: &ConvexBody, b: &ConvexBody) -> Vec<Pt2> {
    let mut set: BTreeSet<(BigInt, BigInt)> = BTreeSet::new();
    for body in [a, b] {
        if let Some(verts) = body.vertices() {
            for d in normal_dirs_exact(verts) {
                set.insert(d);
            }
        }
    }
    if set.is_empty() {
        // Two points: any pair of opposite axes certifies equality.
        set.insert((BigInt::from(1), BigInt::from(0)));
        set.insert((BigInt::from(-1), BigInt::from(0)));
        set.insert((BigInt::from(0), BigInt::from(1)));
        set.insert((BigInt::from(0), BigInt::from(-1)));
    }
    set.into_iter()
        .map(|(x, y)| Pt2::new(Rat::from_integer(x), Rat::from_integer(y)))
        .collect()
}

/// Exact outward edge normals reduced to coprime integer vectors.
fn normal_dirs_exact(verts: &[Pt2]) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::new();
    let n = verts.len();
    if n < 2 {
        return out;
    }
    let edges: Vec<(Pt2, Pt2)> = if n == 2 {
        vec![
            (verts[0].clone(), verts[1].clone()),
            (verts[1].clone(), verts[0].clone()),
        ]
    } else {
        (0..n)
            .map(|i| (verts[i].clone(), verts[(i + 1) % n].clone()))
            .collect()
    };
    for (a, b) in edges {
        let e = b.sub(&a);
        // Outward normal of a CCW edge.
        let nx = e.y.clone();
        let ny = -e.x.clone();
        // Clear denominators, then divide by the gcd.
        let scale = nx.denom().clone() * ny.denom();
        let ix = nx.numer() * (&scale / nx.denom());
        let iy = ny.numer() * (&scale / ny.denom());
        let g = num::integer::gcd(ix.clone(), iy.clone());
        if g.is_zero() {
            continue;
        }
        out.push((ix / &g, iy / &g));
    }
    out
}

/// One term of a tag-sum envelope: a block's body with the extreme integrand
/// values over the block. The upper envelope uses `whi` where the support is
/// nonnegative and `wlo` where it is negative; the lower envelope swaps them.
#[derive(Debug, Clone)]
pub(crate) struct EnvelopeTerm {
    pub verts: Vec<(f64, f64)>,
    pub wlo: f64,
    pub whi: f64,
}

impl EnvelopeTerm {
    pub fn new(body: &ConvexBody, wlo: f64, whi: f64) -> Self {
        let verts = body
            .vertices()
            .expect("planar body")
            .iter()
            .map(Pt2::to_f64)
            .collect();
        EnvelopeTerm { verts, wlo, whi }
    }
}

/// A function on the unit circle that is a single sinusoid
/// `cx cos t + cy sin t + c` on each arc of a finite fan.
#[derive(Debug, Clone)]
pub(crate) struct CircleFn {
    /// Arcs sorted by start angle, jointly covering one full turn.
    arcs: Vec<Arc>,
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    a0: f64,
    a1: f64,
    cx: f64,
    cy: f64,
    c: f64,
}

fn norm_angle(t: f64) -> f64 {
    let mut t = t % TAU;
    if t < 0.0 {
        t += TAU;
    }
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// Active-vertex lookup: the index maximizing the dot product with the unit
/// direction of angle `theta`.
fn argmax_vertex(verts: &[(f64, f64)], theta: f64) -> usize {
    let (c, s) = (theta.cos(), theta.sin());
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, (x, y)) in verts.iter().enumerate() {
        let v = x * c + y * s;
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    best
}

/// Break angles of the normal fan of a vertex set.
fn fan_angles(verts: &[(f64, f64)]) -> Vec<f64> {
    let n = verts.len();
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    if n == 2 {
        let (ex, ey) = (verts[1].0 - verts[0].0, verts[1].1 - verts[0].1);
        let a = norm_angle(f64::atan2(-ex, ey));
        out.push(a);
        out.push(norm_angle(a + PI));
        return out;
    }
    for i in 0..n {
        let (ax, ay) = verts[i];
        let (bx, by) = verts[(i + 1) % n];
        let (ex, ey) = (bx - ax, by - ay);
        out.push(norm_angle(f64::atan2(-ex, ey)));
    }
    out
}

fn arcs_from_breaks(mut breaks: Vec<f64>) -> Vec<(f64, f64)> {
    breaks.retain(|b| b.is_finite());
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    if breaks.is_empty() {
        return vec![(0.0, TAU)];
    }
    let mut arcs = Vec::with_capacity(breaks.len());
    for i in 0..breaks.len() {
        let a0 = breaks[i];
        let a1 = if i + 1 < breaks.len() {
            breaks[i + 1]
        } else {
            breaks[0] + TAU
        };
        if a1 > a0 {
            arcs.push((a0, a1));
        }
    }
    arcs
}

impl CircleFn {
    pub fn constant(c: f64) -> CircleFn {
        CircleFn {
            arcs: vec![Arc {
                a0: 0.0,
                a1: TAU,
                cx: 0.0,
                cy: 0.0,
                c,
            }],
        }
    }

    /// `w * h_body` as a circle function.
    pub fn weighted_body(body: &ConvexBody, w: f64) -> CircleFn {
        let verts: Vec<(f64, f64)> = body
            .vertices()
            .expect("planar body")
            .iter()
            .map(Pt2::to_f64)
            .collect();
        Self::from_term(&verts, w, w, true)
    }

    /// Sum of envelope terms: upper picks `whi` where the support is
    /// nonnegative, lower picks `wlo` there.
    pub fn envelope(terms: &[EnvelopeTerm], upper: bool) -> CircleFn {
        let mut acc = CircleFn::constant(0.0);
        for t in terms {
            acc = acc.add(&Self::from_term(&t.verts, t.wlo, t.whi, upper));
        }
        acc
    }

    fn from_term(verts: &[(f64, f64)], wlo: f64, whi: f64, upper: bool) -> CircleFn {
        let mut breaks = fan_angles(verts);
        if wlo != whi {
            // Sign of the support can flip inside an arc; split there.
            for (a0, a1) in arcs_from_breaks(breaks.clone()) {
                let mid = 0.5 * (a0 + a1);
                let (vx, vy) = verts[argmax_vertex(verts, mid)];
                let base = f64::atan2(vy, vx);
                for z in [base + PI / 2.0, base - PI / 2.0] {
                    let z0 = norm_angle(z);
                    for cand in [z0, z0 + TAU] {
                        if cand > a0 && cand < a1 {
                            breaks.push(norm_angle(cand));
                        }
                    }
                }
            }
        }
        let mut arcs = Vec::new();
        for (a0, a1) in arcs_from_breaks(breaks) {
            let mid = 0.5 * (a0 + a1);
            let (vx, vy) = verts[argmax_vertex(verts, mid)];
            let h_mid = vx * mid.cos() + vy * mid.sin();
            let w = match (upper, h_mid >= 0.0) {
                (true, true) | (false, false) => whi,
                _ => wlo,
            };
            arcs.push(Arc {
                a0,
                a1,
                cx: w * vx,
                cy: w * vy,
                c: 0.0,
            });
        }
        CircleFn { arcs }
    }

    fn coeff_at(&self, theta: f64) -> (f64, f64, f64) {
        let t = norm_angle(theta);
        for arc in &self.arcs {
            if (t >= arc.a0 && t < arc.a1) || (t + TAU >= arc.a0 && t + TAU < arc.a1) {
                return (arc.cx, arc.cy, arc.c);
            }
        }
        // Boundary fallback: angles on a break belong to the following arc.
        let arc = self.arcs.last().expect("nonempty arc cover");
        (arc.cx, arc.cy, arc.c)
    }

    pub fn add(&self, other: &CircleFn) -> CircleFn {
        let mut breaks: Vec<f64> = Vec::new();
        for arc in self.arcs.iter().chain(other.arcs.iter()) {
            breaks.push(norm_angle(arc.a0));
        }
        let mut arcs = Vec::new();
        for (a0, a1) in arcs_from_breaks(breaks) {
            let mid = 0.5 * (a0 + a1);
            let (ax, ay, ac) = self.coeff_at(mid);
            let (bx, by, bc) = other.coeff_at(mid);
            arcs.push(Arc {
                a0,
                a1,
                cx: ax + bx,
                cy: ay + by,
                c: ac + bc,
            });
        }
        CircleFn { arcs }
    }

    pub fn scale(&self, w: f64) -> CircleFn {
        CircleFn {
            arcs: self
                .arcs
                .iter()
                .map(|a| Arc {
                    a0: a.a0,
                    a1: a.a1,
                    cx: a.cx * w,
                    cy: a.cy * w,
                    c: a.c * w,
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &CircleFn) -> CircleFn {
        self.add(&other.scale(-1.0))
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let (cx, cy, c) = self.coeff_at(theta);
        cx * theta.cos() + cy * theta.sin() + c
    }

    /// Global extrema over the circle, per-arc in closed form: each arc's
    /// sinusoid attains extremes at the arc ends or at its own peak/trough.
    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for arc in &self.arcs {
            let eval = |t: f64| arc.cx * t.cos() + arc.cy * t.sin() + arc.c;
            let mut consider = |t: f64| {
                let v = eval(t);
                if v < lo {
                    lo = v;
                }
                if v > hi {
                    hi = v;
                }
            };
            consider(arc.a0);
            consider(arc.a1);
            let peak = f64::atan2(arc.cy, arc.cx);
            for ext in [peak, peak + PI] {
                let e0 = norm_angle(ext);
                for cand in [e0, e0 + TAU] {
                    if cand >= arc.a0 && cand <= arc.a1 {
                        consider(cand);
                    }
                }
            }
        }
        (lo, hi)
    }

    pub fn sup_abs(&self) -> f64 {
        let (lo, hi) = self.min_max();
        lo.abs().max(hi.abs())
    }

    /// Largest value of `self - other`; nonpositive means `self <= other`
    /// everywhere on the circle.
    pub fn max_excess_over(&self, other: &CircleFn) -> f64 {
        self.sub(other).min_max().1
    }
}
