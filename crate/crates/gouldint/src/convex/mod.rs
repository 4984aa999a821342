//! Nonempty compact convex subsets of the line and the plane, with exact
//! rational arithmetic for every combinatorial decision.
//!
//! Bodies are the values of set-valued measures. One-dimensional bodies are
//! closed intervals with rational endpoints and stay exact end to end.
//! Two-dimensional bodies are convex polygons with rational vertices in
//! counter-clockwise order, canonicalized so that equal bodies compare equal
//! structurally; double precision appears only where a square root is forced
//! (distances, support values on the unit circle).

mod support;

pub use support::{merged_direction_set, SupportFn};
pub(crate) use support::{CircleFn, EnvelopeTerm};

use crate::rat::{fmt_rat, parse_rat, rat_to_f64, Mag, Rat};
use num::traits::{Signed, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

/// Default tolerance for the internal agreement check between the two
/// Hausdorff-distance routes in the plane.
pub const METRIC_SELF_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvexError {
    #[error("a convex body needs at least one point (lo <= hi for intervals)")]
    EmptyBody,
    #[error("operands have different dimensions ({0} vs {1})")]
    DimMismatch(u8, u8),
    #[error("scaling a convex body by a negative factor is undefined")]
    NegativeScale,
    #[error("sequence is not increasing under inclusion at index {0}")]
    NotIncreasing(usize),
    #[error("sequence element {0} is not contained in the prescribed bound")]
    UnboundedSequence(usize),
    #[error("metric self-check failed: excess route {excess} vs support route {support}")]
    SelfCheckFailed { excess: f64, support: f64 },
    #[error("internal geometry invariant violated: {0}")]
    Internal(&'static str),
}

/// A point of the plane with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pt2 {
    pub x: Rat,
    pub y: Rat,
}

impl Pt2 {
    pub fn new(x: Rat, y: Rat) -> Self {
        Pt2 { x, y }
    }

    pub fn origin() -> Self {
        Pt2::new(Rat::zero(), Rat::zero())
    }

    pub fn add(&self, other: &Pt2) -> Pt2 {
        Pt2::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn sub(&self, other: &Pt2) -> Pt2 {
        Pt2::new(&self.x - &other.x, &self.y - &other.y)
    }

    pub fn scale(&self, c: &Rat) -> Pt2 {
        Pt2::new(&self.x * c, &self.y * c)
    }

    pub fn dot(&self, other: &Pt2) -> Rat {
        &self.x * &other.x + &self.y * &other.y
    }

    pub fn cross(&self, other: &Pt2) -> Rat {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn norm_sq(&self) -> Rat {
        self.dot(self)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (rat_to_f64(&self.x), rat_to_f64(&self.y))
    }
}

/// Orientation of the triple `(o, a, b)`: positive for a left turn.
fn orient(o: &Pt2, a: &Pt2, b: &Pt2) -> Rat {
    a.sub(o).cross(&b.sub(o))
}

/// A nonempty compact convex subset of the line or the plane.
///
/// Equality is structural on the canonical form and therefore exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConvexBody {
    /// `[lo, hi]` with `lo <= hi`.
    Interval { lo: Rat, hi: Rat },
    /// Convex polygon: vertices in counter-clockwise order, no duplicate or
    /// collinear triple, starting from the lexicographically smallest vertex.
    /// One vertex is a point, two are a segment.
    Polygon { verts: Vec<Pt2> },
}

impl ConvexBody {
    pub fn dim(&self) -> u8 {
        match self {
            ConvexBody::Interval { .. } => 1,
            ConvexBody::Polygon { .. } => 2,
        }
    }

    /// The singleton `{0}` of the given dimension.
    pub fn zero(dim: u8) -> ConvexBody {
        match dim {
            1 => ConvexBody::Interval {
                lo: Rat::zero(),
                hi: Rat::zero(),
            },
            _ => ConvexBody::Polygon {
                verts: vec![Pt2::origin()],
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        self == &ConvexBody::zero(self.dim())
    }

    pub fn interval(lo: Rat, hi: Rat) -> Result<ConvexBody, ConvexError> {
        if lo > hi {
            return Err(ConvexError::EmptyBody);
        }
        Ok(ConvexBody::Interval { lo, hi })
    }

    pub fn singleton1(x: Rat) -> ConvexBody {
        ConvexBody::Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn singleton2(p: Pt2) -> ConvexBody {
        ConvexBody::Polygon { verts: vec![p] }
    }

    /// Convex hull of a nonempty set of rationals on the line.
    pub fn hull_1d(points: &[Rat]) -> Result<ConvexBody, ConvexError> {
        let lo = points.iter().min().ok_or(ConvexError::EmptyBody)?;
        let hi = points.iter().max().ok_or(ConvexError::EmptyBody)?;
        Ok(ConvexBody::Interval {
            lo: lo.clone(),
            hi: hi.clone(),
        })
    }

    /// Convex hull of a nonempty set of plane points (monotone chain with
    /// exact orientation predicates; collinear points are dropped).
    pub fn hull_2d(points: &[Pt2]) -> Result<ConvexBody, ConvexError> {
        if points.is_empty() {
            return Err(ConvexError::EmptyBody);
        }
        let mut pts: Vec<Pt2> = points.to_vec();
        pts.sort();
        pts.dedup();
        if pts.len() == 1 {
            return Ok(ConvexBody::Polygon { verts: pts });
        }
        // Lower and upper chains with strict left turns.
        let chain = |iter: &mut dyn Iterator<Item = &Pt2>| -> Vec<Pt2> {
            let mut out: Vec<Pt2> = Vec::new();
            for p in iter {
                while out.len() >= 2
                    && orient(&out[out.len() - 2], &out[out.len() - 1], p) <= Rat::zero()
                {
                    out.pop();
                }
                out.push(p.clone());
            }
            out
        };
        let lower = chain(&mut pts.iter());
        let upper = chain(&mut pts.iter().rev());
        let mut verts = lower;
        verts.pop();
        verts.extend(upper);
        verts.pop();
        if verts.len() < 3 {
            // All points collinear: the extremes remain.
            return Ok(ConvexBody::Polygon {
                verts: vec![pts.first().unwrap().clone(), pts.last().unwrap().clone()],
            });
        }
        Self::polygon_from_ccw_cycle(verts)
    }

    /// Builds a polygon from vertices assumed to trace a convex CCW cycle,
    /// cleaning consecutive duplicates and collinear middles, then rotating
    /// to the canonical start. Fails if the cleaned cycle is not convex.
    fn polygon_from_ccw_cycle(mut verts: Vec<Pt2>) -> Result<ConvexBody, ConvexError> {
        verts.dedup();
        while verts.len() > 1 && verts.first() == verts.last() {
            verts.pop();
        }
        if verts.is_empty() {
            return Err(ConvexError::EmptyBody);
        }
        // Drop collinear middle vertices, cyclically, until stable.
        loop {
            let n = verts.len();
            if n < 3 {
                break;
            }
            let keep: Vec<Pt2> = (0..n)
                .filter(|&i| {
                    let prev = &verts[(i + n - 1) % n];
                    let next = &verts[(i + 1) % n];
                    !orient(prev, &verts[i], next).is_zero()
                })
                .map(|i| verts[i].clone())
                .collect();
            if keep.is_empty() {
                // Degenerate cycle: every point on one line.
                let lo = verts.iter().min().unwrap().clone();
                let hi = verts.iter().max().unwrap().clone();
                verts = if lo == hi { vec![lo] } else { vec![lo, hi] };
                break;
            }
            let stable = keep.len() == n;
            verts = keep;
            if stable {
                break;
            }
        }
        if verts.len() >= 3 {
            let n = verts.len();
            for i in 0..n {
                if orient(&verts[i], &verts[(i + 1) % n], &verts[(i + 2) % n]) <= Rat::zero() {
                    return Err(ConvexError::Internal("cycle is not strictly convex"));
                }
            }
            let start = verts
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            verts.rotate_left(start);
        } else if verts.len() == 2 && verts[0] > verts[1] {
            verts.swap(0, 1);
        }
        Ok(ConvexBody::Polygon { verts })
    }

    /// Constructs a polygon from arbitrary vertices by taking their hull.
    pub fn polygon(verts: Vec<Pt2>) -> Result<ConvexBody, ConvexError> {
        Self::hull_2d(&verts)
    }

    pub fn endpoints(&self) -> Option<(&Rat, &Rat)> {
        match self {
            ConvexBody::Interval { lo, hi } => Some((lo, hi)),
            _ => None,
        }
    }

    pub fn vertices(&self) -> Option<&[Pt2]> {
        match self {
            ConvexBody::Polygon { verts } => Some(verts),
            _ => None,
        }
    }

    fn check_dims(&self, other: &ConvexBody) -> Result<(), ConvexError> {
        if self.dim() != other.dim() {
            return Err(ConvexError::DimMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    /// Exact Minkowski sum. Polygon pairs with at least three vertices each
    /// are merged edge-by-edge in angular order; degenerate operands (points
    /// and segments) fall back to hulling the pairwise vertex sums.
    pub fn minkowski_sum(&self, other: &ConvexBody) -> Result<ConvexBody, ConvexError> {
        self.check_dims(other)?;
        match (self, other) {
            (ConvexBody::Interval { lo: a, hi: b }, ConvexBody::Interval { lo: c, hi: d }) => {
                Ok(ConvexBody::Interval {
                    lo: a + c,
                    hi: b + d,
                })
            }
            (ConvexBody::Polygon { verts: p }, ConvexBody::Polygon { verts: q }) => {
                if p.len() < 3 || q.len() < 3 {
                    let mut sums = Vec::with_capacity(p.len() * q.len());
                    for a in p {
                        for b in q {
                            sums.push(a.add(b));
                        }
                    }
                    return Self::hull_2d(&sums);
                }
                Self::polygon_from_ccw_cycle(minkowski_merge(p, q))
            }
            _ => unreachable!(),
        }
    }

    /// `{r x : x in self}` for a nonnegative rational `r`.
    pub fn scale(&self, r: &Rat) -> Result<ConvexBody, ConvexError> {
        if r.is_negative() {
            return Err(ConvexError::NegativeScale);
        }
        if r.is_zero() {
            return Ok(ConvexBody::zero(self.dim()));
        }
        Ok(match self {
            ConvexBody::Interval { lo, hi } => ConvexBody::Interval {
                lo: lo * r,
                hi: hi * r,
            },
            ConvexBody::Polygon { verts } => ConvexBody::Polygon {
                verts: verts.iter().map(|v| v.scale(r)).collect(),
            },
        })
    }

    /// Translation by a vector; used mostly by invariance tests.
    pub fn translate(&self, by: &Pt2) -> ConvexBody {
        match self {
            ConvexBody::Interval { lo, hi } => ConvexBody::Interval {
                lo: lo + &by.x,
                hi: hi + &by.x,
            },
            ConvexBody::Polygon { verts } => {
                let mut vs: Vec<Pt2> = verts.iter().map(|v| v.add(by)).collect();
                if vs.len() > 2 {
                    let start = vs
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.cmp(b.1))
                        .map(|(i, _)| i)
                        .unwrap();
                    vs.rotate_left(start);
                } else {
                    vs.sort();
                }
                ConvexBody::Polygon { verts: vs }
            }
        }
    }

    /// Exact membership test.
    pub fn contains_point2(&self, p: &Pt2) -> bool {
        match self {
            ConvexBody::Interval { .. } => false,
            ConvexBody::Polygon { verts } => match verts.len() {
                1 => &verts[0] == p,
                2 => {
                    let d = verts[1].sub(&verts[0]);
                    let w = p.sub(&verts[0]);
                    d.cross(&w).is_zero() && {
                        let t = d.dot(&w);
                        !t.is_negative() && t <= d.norm_sq()
                    }
                }
                n => (0..n).all(|i| !orient(&verts[i], &verts[(i + 1) % n], p).is_negative()),
            },
        }
    }

    /// Exact inclusion test `self` is a subset of `other`.
    pub fn subset_of(&self, other: &ConvexBody) -> Result<bool, ConvexError> {
        self.check_dims(other)?;
        Ok(match (self, other) {
            (ConvexBody::Interval { lo: a, hi: b }, ConvexBody::Interval { lo: c, hi: d }) => {
                c <= a && b <= d
            }
            (ConvexBody::Polygon { verts }, _) => {
                verts.iter().all(|v| other.contains_point2(v))
            }
            _ => unreachable!(),
        })
    }

    /// Exact squared distance from a point to the body.
    pub fn dist_sq_to_point2(&self, p: &Pt2) -> Rat {
        if self.contains_point2(p) {
            return Rat::zero();
        }
        let verts = self.vertices().expect("planar body");
        match verts.len() {
            1 => p.sub(&verts[0]).norm_sq(),
            _ => {
                let n = verts.len();
                let edges = if n == 2 { 1 } else { n };
                let mut best: Option<Rat> = None;
                for i in 0..edges {
                    let d = segment_dist_sq(&verts[i], &verts[(i + 1) % n], p);
                    best = Some(match best {
                        Some(b) if b <= d => b,
                        _ => d,
                    });
                }
                best.unwrap()
            }
        }
    }

    /// Distance from a point to the body (double precision).
    pub fn dist_to_point2(&self, p: &Pt2) -> f64 {
        rat_to_f64(&self.dist_sq_to_point2(p)).sqrt()
    }

    /// Largest squared vertex-to-body distance from `self` to `other`; the
    /// excess is its square root. Exact rational.
    fn excess_sq(&self, other: &ConvexBody) -> Result<Rat, ConvexError> {
        match (self, other) {
            (ConvexBody::Interval { lo: a, hi: b }, ConvexBody::Interval { lo: c, hi: d }) => {
                let zero = Rat::zero();
                let mut e = zero.clone();
                for x in [a, b] {
                    let dist = if x < c {
                        c - x
                    } else if x > d {
                        x - d
                    } else {
                        zero.clone()
                    };
                    if dist > e {
                        e = dist;
                    }
                }
                Ok(&e * &e)
            }
            (ConvexBody::Polygon { verts }, _) => {
                let mut best = Rat::zero();
                for v in verts {
                    let d = other.dist_sq_to_point2(v);
                    if d > best {
                        best = d;
                    }
                }
                Ok(best)
            }
            _ => Err(ConvexError::DimMismatch(self.dim(), other.dim())),
        }
    }

    /// Excess `e(self, other) = sup_{a in self} d(a, other)`, attained at a
    /// vertex by convexity. Exact on the line.
    pub fn excess(&self, other: &ConvexBody) -> Result<Mag, ConvexError> {
        self.check_dims(other)?;
        match self.dim() {
            1 => {
                let (a, b) = self.endpoints().unwrap();
                let (c, d) = other.endpoints().unwrap();
                let zero = Rat::zero();
                let mut e = zero.clone();
                for x in [a, b] {
                    let dist = if x < c {
                        c - x
                    } else if x > d {
                        x - d
                    } else {
                        zero.clone()
                    };
                    if dist > e {
                        e = dist;
                    }
                }
                Ok(Mag::Exact(e))
            }
            _ => Ok(Mag::Approx(rat_to_f64(&self.excess_sq(other)?).sqrt())),
        }
    }

    /// Hausdorff distance, the maximum of the two excesses. In the plane the
    /// value is additionally recomputed as the sup-norm distance of support
    /// functions over the merged normal fan; the two routes must agree within
    /// [`METRIC_SELF_CHECK_TOL`] or the call fails rather than answer.
    pub fn hausdorff(&self, other: &ConvexBody) -> Result<Mag, ConvexError> {
        self.check_dims(other)?;
        match (self, other) {
            (ConvexBody::Interval { lo: a, hi: b }, ConvexBody::Interval { lo: c, hi: d }) => {
                let e1 = (a - c).abs();
                let e2 = (b - d).abs();
                Ok(Mag::Exact(e1.max(e2)))
            }
            _ => {
                let e_sq = self.excess_sq(other)?.max(other.excess_sq(self)?);
                let excess_route = rat_to_f64(&e_sq).sqrt();
                let support_route = support::support_sup_diff(self, other);
                if (excess_route - support_route).abs() > METRIC_SELF_CHECK_TOL {
                    return Err(ConvexError::SelfCheckFailed {
                        excess: excess_route,
                        support: support_route,
                    });
                }
                Ok(Mag::Approx(excess_route))
            }
        }
    }

    /// Hausdorff distance without the dual-route self-check; used in inner
    /// loops where the checked version has already validated the geometry.
    pub(crate) fn hausdorff_fast(&self, other: &ConvexBody) -> Result<Mag, ConvexError> {
        self.check_dims(other)?;
        match self.dim() {
            1 => self.hausdorff(other),
            _ => {
                let e_sq = self.excess_sq(other)?.max(other.excess_sq(self)?);
                Ok(Mag::Approx(rat_to_f64(&e_sq).sqrt()))
            }
        }
    }

    /// `|A|_h = h(A, {0}) = sup { |x| : x in A }`, attained at a vertex.
    pub fn norm_h(&self) -> Mag {
        match self {
            ConvexBody::Interval { lo, hi } => Mag::Exact(lo.abs().max(hi.abs())),
            ConvexBody::Polygon { verts } => {
                let m = verts
                    .iter()
                    .map(Pt2::norm_sq)
                    .max()
                    .expect("nonempty polygon");
                Mag::Approx(rat_to_f64(&m).sqrt())
            }
        }
    }

    /// Exact largest squared norm over the body.
    pub fn norm_h_sq(&self) -> Rat {
        match self {
            ConvexBody::Interval { lo, hi } => {
                let m = lo.abs().max(hi.abs());
                &m * &m
            }
            ConvexBody::Polygon { verts } => {
                verts.iter().map(Pt2::norm_sq).max().expect("nonempty")
            }
        }
    }

    /// Convex hull of the union; its support function is the pointwise
    /// maximum of the two support functions.
    pub fn hull_union(&self, other: &ConvexBody) -> Result<ConvexBody, ConvexError> {
        self.check_dims(other)?;
        match (self, other) {
            (ConvexBody::Interval { lo: a, hi: b }, ConvexBody::Interval { lo: c, hi: d }) => {
                Ok(ConvexBody::Interval {
                    lo: a.min(c).clone(),
                    hi: b.max(d).clone(),
                })
            }
            (ConvexBody::Polygon { verts: p }, ConvexBody::Polygon { verts: q }) => {
                let mut all = p.clone();
                all.extend(q.iter().cloned());
                Self::hull_2d(&all)
            }
            _ => unreachable!(),
        }
    }

    /// Exact support value `sup { <x, u> : x in self }` in an unnormalized
    /// rational direction. On the line, `u` is a single rational.
    pub fn support_1d(&self, u: &Rat) -> Rat {
        let (lo, hi) = self.endpoints().expect("interval body");
        if u.is_negative() {
            lo * u
        } else {
            hi * u
        }
    }

    /// Exact planar support value in an unnormalized rational direction.
    pub fn support_2d(&self, u: &Pt2) -> Rat {
        let verts = self.vertices().expect("planar body");
        verts.iter().map(|v| v.dot(u)).max().expect("nonempty")
    }

    /// Embeds the body as its support function.
    pub fn embed(&self) -> SupportFn {
        SupportFn::of_body(self.clone())
    }

    /// Limit of an increasing, uniformly bounded sequence of bodies: the hull
    /// of the union, together with the Hausdorff distances `h(A_n, J)`, which
    /// are non-increasing and reach zero at the final index.
    pub fn increasing_limit(
        seq: &[ConvexBody],
        bound: &ConvexBody,
    ) -> Result<(ConvexBody, Vec<Mag>), ConvexError> {
        if seq.is_empty() {
            return Err(ConvexError::EmptyBody);
        }
        for (i, a) in seq.iter().enumerate() {
            if i + 1 < seq.len() && !a.subset_of(&seq[i + 1])? {
                return Err(ConvexError::NotIncreasing(i + 1));
            }
            if !a.subset_of(bound)? {
                return Err(ConvexError::UnboundedSequence(i));
            }
        }
        let mut hull = seq[0].clone();
        for a in &seq[1..] {
            hull = hull.hull_union(a)?;
        }
        let mut dists = Vec::with_capacity(seq.len());
        for a in seq {
            dists.push(a.hausdorff(&hull)?);
        }
        Ok((hull, dists))
    }
}

/// Minkowski sum of two strictly convex CCW polygons by angular edge merge.
fn minkowski_merge(p: &[Pt2], q: &[Pt2]) -> Vec<Pt2> {
    let reorder = |v: &[Pt2]| -> Vec<Pt2> {
        // Start at the bottom-most (then left-most) vertex.
        let start = v
            .iter()
            .enumerate()
            .min_by(|a, b| (&a.1.y, &a.1.x).cmp(&(&b.1.y, &b.1.x)))
            .map(|(i, _)| i)
            .unwrap();
        let mut out = v.to_vec();
        out.rotate_left(start);
        out
    };
    let p = reorder(p);
    let q = reorder(q);
    let (n, m) = (p.len(), q.len());
    let mut out = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0usize, 0usize);
    while i < n || j < m {
        out.push(p[i % n].add(&q[j % m]));
        if i >= n {
            j += 1;
            continue;
        }
        if j >= m {
            i += 1;
            continue;
        }
        let ep = p[(i + 1) % n].sub(&p[i % n]);
        let eq = q[(j + 1) % m].sub(&q[j % m]);
        let cr = ep.cross(&eq);
        if cr.is_positive() {
            i += 1;
        } else if cr.is_negative() {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

/// Exact squared distance from `p` to the segment `[a, b]`.
fn segment_dist_sq(a: &Pt2, b: &Pt2, p: &Pt2) -> Rat {
    let d = b.sub(a);
    let w = p.sub(a);
    let len_sq = d.norm_sq();
    if len_sq.is_zero() {
        return w.norm_sq();
    }
    let mut t = d.dot(&w) / &len_sq;
    if t.is_negative() {
        t = Rat::zero();
    } else if t > Rat::from_integer(1.into()) {
        t = Rat::from_integer(1.into());
    }
    let proj = a.add(&d.scale(&t));
    p.sub(&proj).norm_sq()
}

// JSON form: {"dim":1,"lo":"p/q","hi":"p/q"} or
// {"dim":2,"vertices":[["p/q","p/q"],...]} with rationals as strings.
impl Serialize for ConvexBody {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(None)?;
        match self {
            ConvexBody::Interval { lo, hi } => {
                map.serialize_entry("dim", &1u8)?;
                map.serialize_entry("lo", &fmt_rat(lo))?;
                map.serialize_entry("hi", &fmt_rat(hi))?;
            }
            ConvexBody::Polygon { verts } => {
                map.serialize_entry("dim", &2u8)?;
                let vs: Vec<[String; 2]> = verts
                    .iter()
                    .map(|v| [fmt_rat(&v.x), fmt_rat(&v.y)])
                    .collect();
                map.serialize_entry("vertices", &vs)?;
            }
        }
        map.end()
    }
}

#[derive(Deserialize)]
struct BodyJson {
    dim: u8,
    lo: Option<String>,
    hi: Option<String>,
    vertices: Option<Vec<[String; 2]>>,
}

impl<'de> Deserialize<'de> for ConvexBody {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BodyJson::deserialize(deserializer)?;
        match raw.dim {
            1 => {
                let lo = raw
                    .lo
                    .ok_or_else(|| D::Error::custom("interval body missing 'lo'"))?;
                let hi = raw
                    .hi
                    .ok_or_else(|| D::Error::custom("interval body missing 'hi'"))?;
                let lo = parse_rat(&lo).map_err(D::Error::custom)?;
                let hi = parse_rat(&hi).map_err(D::Error::custom)?;
                ConvexBody::interval(lo, hi).map_err(D::Error::custom)
            }
            2 => {
                let vs = raw
                    .vertices
                    .ok_or_else(|| D::Error::custom("polygon body missing 'vertices'"))?;
                let mut pts = Vec::with_capacity(vs.len());
                for [x, y] in vs {
                    pts.push(Pt2::new(
                        parse_rat(&x).map_err(D::Error::custom)?,
                        parse_rat(&y).map_err(D::Error::custom)?,
                    ));
                }
                ConvexBody::hull_2d(&pts).map_err(D::Error::custom)
            }
            d => Err(D::Error::custom(format!("unsupported dimension {d}"))),
        }
    }
}

impl fmt::Display for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexBody::Interval { lo, hi } => write!(f, "[{}, {}]", fmt_rat(lo), fmt_rat(hi)),
            ConvexBody::Polygon { verts } => {
                write!(f, "poly{{")?;
                for (i, v) in verts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "({}, {})", fmt_rat(&v.x), fmt_rat(&v.y))?;
                }
                write!(f, "}}")
            }
        }
    }
}

#[cfg(test)]
mod tests;
