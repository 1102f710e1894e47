//! Hodge and arithmetic polygons, Newton point sets, and exact polygon
//! comparison.
//!
//! A polygon is stored as its slope list: slope `j` is the increment of the
//! value between abscissae `j-1` and `j`, so values are prefix sums. All
//! comparisons are exact rational comparisons.

use crate::polytope::ConeData;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PolygonError {
    #[error("insufficient T-precision: no finite Newton points")]
    NoFinitePoints,
    #[error("polygon only defined up to abscissa {len}, requested {requested}")]
    TooShort { len: usize, requested: usize },
}

/// Convex piecewise-linear function on `[0, len]` given by its slope list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polygon {
    slopes: Vec<BigRational>,
}

impl Polygon {
    pub fn from_slopes(slopes: Vec<BigRational>) -> Self {
        Polygon { slopes }
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn slopes(&self) -> &[BigRational] {
        &self.slopes
    }

    /// `value(m) = Σ_{j ≤ m} slopes[j]`, with `value(0) = 0`.
    pub fn value(&self, m: usize) -> BigRational {
        assert!(m <= self.slopes.len(), "abscissa beyond polygon");
        self.slopes[..m].iter().sum()
    }

    pub fn values(&self) -> Vec<BigRational> {
        let mut out = Vec::with_capacity(self.slopes.len() + 1);
        let mut acc = BigRational::zero();
        out.push(acc.clone());
        for s in &self.slopes {
            acc += s;
            out.push(acc.clone());
        }
        out
    }

    pub fn scaled(&self, factor: &BigRational) -> Polygon {
        Polygon {
            slopes: self.slopes.iter().map(|s| s * factor).collect(),
        }
    }

    pub fn slopes_nondecreasing(&self) -> bool {
        self.slopes.windows(2).all(|w| w[0] <= w[1])
    }

    /// CSV lines `m,value_numerator,value_denominator`, exact.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,value_numerator,value_denominator\n");
        for (m, v) in self.values().iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", m, v.numer(), v.denom()));
        }
        out
    }

    /// Slopes as `"num/den"` strings for JSON output.
    pub fn slope_strings(&self) -> Vec<String> {
        self.slopes
            .iter()
            .map(|s| format!("{}/{}", s.numer(), s.denom()))
            .collect()
    }
}

/// First abscissa where `P.value(m) ≥ Q.value(m)` fails, with both values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolygonViolation {
    pub m: usize,
    pub lhs: BigRational,
    pub rhs: BigRational,
}

/// Checks `P.value(m) ≥ Q.value(m)` for all `0 ≤ m ≤ up_to`.
pub fn polygon_geq(
    p: &Polygon,
    q: &Polygon,
    up_to: usize,
) -> Result<Result<(), PolygonViolation>, PolygonError> {
    for (name, poly) in [("lhs", p), ("rhs", q)] {
        if poly.len() < up_to {
            let _ = name;
            return Err(PolygonError::TooShort {
                len: poly.len(),
                requested: up_to,
            });
        }
    }
    let mut lhs = BigRational::zero();
    let mut rhs = BigRational::zero();
    for m in 1..=up_to {
        lhs += &p.slopes[m - 1];
        rhs += &q.slopes[m - 1];
        if lhs < rhs {
            return Ok(Err(PolygonViolation { m, lhs, rhs }));
        }
    }
    Ok(Ok(()))
}

/// The modified fractional part `{x}' = x - ⌈x⌉ + 1 ∈ (0, 1]`.
pub fn modified_frac(x: &BigRational) -> BigRational {
    x - x.ceil() + BigRational::one()
}

/// `r_C` for a finite set of cone points.
pub fn r_of_points(points: &[crate::polytope::LatticePoint], p: u64, d: u64) -> u64 {
    let degrees: Vec<BigRational> = points
        .iter()
        .map(|pt| pt.degree.as_finite().expect("points of C lie in the cone").clone())
        .collect();
    r_of_set(&degrees, p, d)
}

/// The correction term `r_C` of a finite set of cone points, given their
/// degrees: the maximum over `β` of
/// `#{a : {deg(pa)}' ≥ β} - #{a : {deg(a)}' ≥ β}`.
///
/// All modified fractional parts lie in `{j/D : 1 ≤ j ≤ D}`, so the maximum
/// is attained on that finite candidate set.
pub fn r_of_set(degrees: &[BigRational], p: u64, d: u64) -> u64 {
    let p_big = BigInt::from(p);
    let fracs_a: Vec<BigRational> = degrees.iter().map(modified_frac).collect();
    let fracs_pa: Vec<BigRational> = degrees
        .iter()
        .map(|deg| modified_frac(&(deg * &p_big)))
        .collect();
    let mut best: i64 = 0;
    for j in 1..=d {
        let beta = BigRational::new(BigInt::from(j), BigInt::from(d));
        let count_pa = fracs_pa.iter().filter(|f| **f >= beta).count() as i64;
        let count_a = fracs_a.iter().filter(|f| **f >= beta).count() as i64;
        best = best.max(count_pa - count_a);
    }
    debug_assert!(best >= 0, "r_C must be nonnegative");
    best as u64
}

/// Hodge polygon of the cone: slope `j` is the degree of the `j`-th point of
/// `M(Δ)` in canonical order.
pub fn hodge_polygon(cone: &ConeData, m_max: usize) -> Polygon {
    let pts = cone.canonical_points(m_max);
    let slopes = pts
        .into_iter()
        .map(|p| p.degree.as_finite().expect("cone point has finite degree").clone())
        .collect();
    Polygon::from_slopes(slopes)
}

/// Arithmetic polygon: `value(m) = Σ_{j≤m}(⌈p·deg a_j⌉ - ⌈deg a_j⌉) + r_{C_m}`
/// with `C_m` the first `m` points of `M(Δ)` in canonical order; slopes are
/// the increments. All slopes are integers.
pub fn arithmetic_polygon(cone: &ConeData, p: u64, m_max: usize) -> Polygon {
    let pts = cone.canonical_points(m_max);
    let degrees: Vec<BigRational> = pts
        .iter()
        .map(|pt| pt.degree.as_finite().expect("cone point").clone())
        .collect();
    let p_big = BigInt::from(p);
    let mut slopes = Vec::with_capacity(m_max);
    let mut prev_value = BigRational::zero();
    let mut ceil_sum = BigInt::zero();
    for m in 1..=m_max {
        let deg = &degrees[m - 1];
        ceil_sum += (deg * &p_big).ceil().to_integer() - deg.ceil().to_integer();
        let r = r_of_set(&degrees[..m], p, cone.d());
        let value = BigRational::from(&ceil_sum + BigInt::from(r));
        let slope = &value - &prev_value;
        debug_assert!(slope.is_integer(), "arithmetic slopes are integers");
        slopes.push(slope);
        prev_value = value;
    }
    Polygon::from_slopes(slopes)
}

/// An ordinate that is either pinned at the working precision or only known
/// to exceed the `T`-precision window `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrdEntry {
    Finite(i64),
    /// All stored coefficients vanished; nothing visible below `T^N`.
    AtLeast(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPoint {
    pub abscissa: usize,
    pub ord: OrdEntry,
}

/// Newton points `(m, ord)` with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPointSet {
    pub points: Vec<NewtonPoint>,
}

impl NewtonPointSet {
    pub fn new(points: Vec<NewtonPoint>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0].abscissa < w[1].abscissa));
        NewtonPointSet { points }
    }

    pub fn finite_points(&self) -> Vec<(usize, i64)> {
        self.points
            .iter()
            .filter_map(|p| match p.ord {
                OrdEntry::Finite(o) => Some((p.abscissa, o)),
                OrdEntry::AtLeast(_) => None,
            })
            .collect()
    }
}

/// Lower convex hull of the finite points, plus the abscissa up to which the
/// hull is certified against the `≥ N` markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullResult {
    /// Unit-step slope list of the hull, defined up to the last finite
    /// abscissa.
    pub polygon: Polygon,
    /// Hull vertices `(abscissa, ordinate)`.
    pub vertices: Vec<(usize, i64)>,
    /// Largest abscissa up to which no marker undercuts the hull.
    pub certified_up_to: usize,
    /// Markers whose bound lies strictly below the hull value (abscissa,
    /// bound, hull value at that abscissa).
    pub marker_conflicts: Vec<(usize, u32, BigRational)>,
}

/// Lower convex hull with the one-sided marker semantics: markers never pin
/// the hull, they only certify (or fail to certify) abscissae.
pub fn lower_convex_hull(set: &NewtonPointSet) -> Result<HullResult, PolygonError> {
    let mut finite = set.finite_points();
    if finite.is_empty() {
        return Err(PolygonError::NoFinitePoints);
    }
    if !finite.iter().any(|&(x, _)| x == 0) {
        // abscissa 0 with ordinate 0 is always part of the hull
        finite.insert(0, (0, 0));
    }
    finite.sort();
    // monotone chain, lower hull
    let mut hull: Vec<(usize, i64)> = Vec::new();
    for &(x, y) in &finite {
        while hull.len() >= 2 {
            let (x0, y0) = hull[hull.len() - 2];
            let (x1, y1) = hull[hull.len() - 1];
            let cross = (x1 as i128 - x0 as i128) * (y as i128 - y0 as i128)
                - (y1 as i128 - y0 as i128) * (x as i128 - x0 as i128);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let mut slopes = Vec::new();
    for w in hull.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let slope = BigRational::new(BigInt::from(y1 - y0), BigInt::from((x1 - x0) as i64));
        for _ in x0..x1 {
            slopes.push(slope.clone());
        }
    }
    let polygon = Polygon::from_slopes(slopes);
    let last_finite = hull.last().map(|&(x, _)| x).unwrap_or(0);
    let mut certified_up_to = last_finite;
    let mut marker_conflicts = Vec::new();
    for p in &set.points {
        if let OrdEntry::AtLeast(n) = p.ord {
            if p.abscissa >= last_finite {
                continue;
            }
            let hull_value = polygon.value(p.abscissa);
            if BigRational::from(BigInt::from(n)) < hull_value {
                marker_conflicts.push((p.abscissa, n, hull_value));
                certified_up_to = certified_up_to.min(p.abscissa.saturating_sub(1));
            }
        }
    }
    Ok(HullResult {
        polygon,
        vertices: hull,
        certified_up_to,
        marker_conflicts,
    })
}
