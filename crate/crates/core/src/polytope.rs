//! Exact lattice geometry of an integral convex polytope containing the origin.
//!
//! Everything here is integer or rational arithmetic: facets are found by
//! brute-force hyperplane enumeration over vertex subsets (the supported
//! dimension is small), the degree function is the gauge of the polytope on
//! its cone, and the normalized volume comes from a pulling triangulation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

/// Largest ambient dimension accepted by the facet enumeration.
pub const MAX_DIMENSION: usize = 4;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("dimension unsupported: n = {0} exceeds {MAX_DIMENSION}")]
    DimensionUnsupported(usize),
    #[error("degenerate polytope: convex hull has dimension below the ambient dimension")]
    Degenerate,
    #[error("origin not contained in the polytope")]
    OriginOutside,
    #[error("polytope must properly contain the origin (no non-origin vertex found)")]
    OriginOnly,
    #[error("vertex list is empty")]
    Empty,
    #[error("vertex has wrong dimension: expected {expected}, got {got}")]
    WrongVertexDimension { expected: usize, got: usize },
    #[error("coordinate overflow during exact facet computation")]
    Overflow,
}

/// An integral convex polytope `Δ ⊂ R^n` with `0 ∈ Δ` and `Δ ⊋ {0}`.
///
/// The stored vertex list is canonical: duplicates and non-extreme input
/// points are dropped (recorded in [`Polytope::warnings`]), and the origin is
/// listed only when it is itself a vertex.
#[derive(Debug, Clone)]
pub struct Polytope {
    n: usize,
    vertices: Vec<Vec<i64>>,
    non_origin_vertices: Vec<Vec<i64>>,
    origin_is_vertex: bool,
    warnings: Vec<String>,
}

impl Polytope {
    /// Builds a polytope from a list of integer points, canonicalizing to the
    /// extreme points of their convex hull.
    pub fn new(n: usize, points: Vec<Vec<i64>>) -> Result<Self, PolytopeError> {
        if n == 0 || n > MAX_DIMENSION {
            return Err(PolytopeError::DimensionUnsupported(n));
        }
        if points.is_empty() {
            return Err(PolytopeError::Empty);
        }
        for p in &points {
            if p.len() != n {
                return Err(PolytopeError::WrongVertexDimension {
                    expected: n,
                    got: p.len(),
                });
            }
        }
        let mut warnings = Vec::new();
        let mut dedup: Vec<Vec<i64>> = Vec::new();
        for p in points {
            if dedup.contains(&p) {
                warnings.push(format!("dropped duplicate point {p:?}"));
            } else {
                dedup.push(p);
            }
        }
        if affine_rank(&dedup) < n {
            return Err(PolytopeError::Degenerate);
        }
        let facets = facet_hyperplanes(&to_i128(&dedup))?;
        // 0 ∈ Δ iff every oriented facet inequality a·x ≤ c has c ≥ 0.
        if facets.iter().any(|f| f.offset < 0) {
            return Err(PolytopeError::OriginOutside);
        }
        let mut vertices: Vec<Vec<i64>> = Vec::new();
        for p in &dedup {
            if is_extreme(p, &facets) {
                vertices.push(p.clone());
            } else {
                warnings.push(format!("dropped non-extreme point {p:?}"));
            }
        }
        vertices.sort();
        let origin = vec![0i64; n];
        let origin_is_vertex = vertices.contains(&origin);
        let non_origin_vertices: Vec<Vec<i64>> =
            vertices.iter().filter(|v| **v != origin).cloned().collect();
        if non_origin_vertices.is_empty() {
            return Err(PolytopeError::OriginOnly);
        }
        Ok(Polytope {
            n,
            vertices,
            non_origin_vertices,
            origin_is_vertex,
            warnings,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Extreme points, sorted lexicographically.
    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    /// The vertex set `I`: extreme points different from the origin.
    pub fn non_origin_vertices(&self) -> &[Vec<i64>] {
        &self.non_origin_vertices
    }

    pub fn origin_is_vertex(&self) -> bool {
        self.origin_is_vertex
    }

    /// Canonicalization notes (duplicates or non-extreme points dropped).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// A facet inequality `normal · x ≤ offset` of the polytope, with primitive
/// integer normal. `offset = 0` exactly for facets through the origin;
/// `offset > 0` for the rest, whose linear form `normal · x / offset` equals
/// one on the facet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FacetForm {
    pub normal: Vec<i128>,
    pub offset: i128,
}

impl FacetForm {
    pub fn contains_origin(&self) -> bool {
        self.offset == 0
    }

    /// `normal · u / offset` as an exact rational (only for `offset > 0`).
    pub fn form_value(&self, u: &[i64]) -> BigRational {
        debug_assert!(self.offset > 0);
        BigRational::new(BigInt::from(dot_i128(&self.normal, u)), BigInt::from(self.offset))
    }
}

/// The degree of a lattice point: finite on the cone `C(Δ)`, infinite off it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    Finite(BigRational),
    Infinite,
}

impl Degree {
    pub fn as_finite(&self) -> Option<&BigRational> {
        match self {
            Degree::Finite(r) => Some(r),
            Degree::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Degree::Finite(_))
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Finite(r) => write!(f, "{r}"),
            Degree::Infinite => write!(f, "inf"),
        }
    }
}

/// A lattice point together with its degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePoint {
    pub coords: Vec<i64>,
    pub degree: Degree,
}

/// Facet data of `Δ` and of its cone, the degree denominator `D`, and the
/// normalized volume `n!Vol(Δ)`.
#[derive(Debug, Clone)]
pub struct ConeData {
    n: usize,
    vertices: Vec<Vec<i64>>,
    delta_facets: Vec<FacetForm>,
    cone_facets: Vec<Vec<i128>>,
    d: u64,
    normalized_volume: u64,
}

impl ConeData {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn delta_facets(&self) -> &[FacetForm] {
        &self.delta_facets
    }

    /// Homogeneous forms `h` with `h · x ≤ 0` on `C(Δ)`.
    pub fn cone_facets(&self) -> &[Vec<i128>] {
        &self.cone_facets
    }

    /// Least positive integer with `D · deg(M(Δ)) ⊆ Z`.
    pub fn d(&self) -> u64 {
        self.d
    }

    /// `n! Vol(Δ)`.
    pub fn normalized_volume(&self) -> u64 {
        self.normalized_volume
    }

    /// Membership in the cone `C(Δ)`.
    pub fn in_cone(&self, u: &[i64]) -> bool {
        self.cone_facets.iter().all(|h| dot_i128(h, u) <= 0)
    }

    /// Membership in `Δ` itself.
    pub fn in_polytope(&self, u: &[i64]) -> bool {
        self.delta_facets
            .iter()
            .all(|f| dot_i128(&f.normal, u) <= f.offset)
    }

    /// The degree function: the gauge of `Δ` on `C(Δ)`, `+∞` off the cone.
    pub fn degree(&self, u: &[i64]) -> Degree {
        if !self.in_cone(u) {
            return Degree::Infinite;
        }
        let mut best = BigRational::zero();
        for f in &self.delta_facets {
            if f.contains_origin() {
                continue;
            }
            let v = f.form_value(u);
            if v > best {
                best = v;
            }
        }
        Degree::Finite(best)
    }

    /// All points of `C(Δ) ∩ Z^n` with degree at most `deg_bound`, in the
    /// canonical order (degree ascending, then lexicographic).
    pub fn enumerate_lattice_points(&self, deg_bound: &BigRational) -> Vec<LatticePoint> {
        assert!(!deg_bound.is_negative(), "deg_bound must be nonnegative");
        let mut lo = vec![0i64; self.n];
        let mut hi = vec![0i64; self.n];
        for i in 0..self.n {
            let min_c = self.vertices.iter().map(|v| v[i]).min().unwrap().min(0);
            let max_c = self.vertices.iter().map(|v| v[i]).max().unwrap().max(0);
            lo[i] = ceil_ratio(&(deg_bound * BigInt::from(min_c)));
            hi[i] = floor_ratio(&(deg_bound * BigInt::from(max_c)));
        }
        let mut out = Vec::new();
        let mut cur = lo.clone();
        'scan: loop {
            if self.in_cone(&cur) {
                if let Degree::Finite(d) = self.degree(&cur) {
                    if &d <= deg_bound {
                        out.push(LatticePoint {
                            coords: cur.clone(),
                            degree: Degree::Finite(d),
                        });
                    }
                }
            }
            // odometer over the box
            for i in (0..self.n).rev() {
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    cur[(i + 1)..self.n].copy_from_slice(&lo[(i + 1)..self.n]);
                    continue 'scan;
                }
            }
            break;
        }
        out.sort_by(|a, b| {
            let da = a.degree.as_finite().unwrap();
            let db = b.degree.as_finite().unwrap();
            da.cmp(db).then_with(|| a.coords.cmp(&b.coords))
        });
        out
    }

    /// First `m_max` points of `M(Δ)` in canonical order.
    pub fn canonical_points(&self, m_max: usize) -> Vec<LatticePoint> {
        let mut bound = BigRational::one();
        loop {
            let pts = self.enumerate_lattice_points(&bound);
            if pts.len() >= m_max {
                return pts.into_iter().take(m_max).collect();
            }
            bound *= BigInt::from(2);
        }
    }
}

/// Computes facet forms of `Δ` and `C(Δ)`, the degree denominator `D`, and
/// the normalized volume.
pub fn build_cone_data(poly: &Polytope) -> Result<ConeData, PolytopeError> {
    let n = poly.n;
    let facets = facet_hyperplanes(&to_i128(&poly.vertices))?;
    debug_assert!(facets.iter().all(|f| f.offset >= 0));
    let cone_facets: Vec<Vec<i128>> = facets
        .iter()
        .filter(|f| f.contains_origin())
        .map(|f| f.normal.clone())
        .collect();
    let mut d: u64 = 1;
    for f in &facets {
        if !f.contains_origin() {
            let c = u64::try_from(f.offset).map_err(|_| PolytopeError::Overflow)?;
            d = lcm_u64(d, c);
        }
    }
    let normalized_volume = normalized_volume(poly)?;
    Ok(ConeData {
        n,
        vertices: poly.vertices.clone(),
        delta_facets: facets,
        cone_facets,
        d,
        normalized_volume,
    })
}

/// `n! Vol(Δ)` by a pulling triangulation: cone the lexicographically least
/// vertex over recursively triangulated facets and sum `|det|` of edge
/// matrices.
pub fn normalized_volume(poly: &Polytope) -> Result<u64, PolytopeError> {
    let pts = to_i128(&poly.vertices);
    let simplices = triangulate(&pts)?;
    let mut total: i128 = 0;
    for s in &simplices {
        let base = &pts[s[0]];
        let edges: Vec<Vec<i128>> = s[1..]
            .iter()
            .map(|&i| sub_vec(&pts[i], base))
            .collect();
        total = total
            .checked_add(det(&edges).abs())
            .ok_or(PolytopeError::Overflow)?;
    }
    u64::try_from(total).map_err(|_| PolytopeError::Overflow)
}

fn to_i128(pts: &[Vec<i64>]) -> Vec<Vec<i128>> {
    pts.iter()
        .map(|p| p.iter().map(|&x| x as i128).collect())
        .collect()
}

fn sub_vec(a: &[i128], b: &[i128]) -> Vec<i128> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot_i128(a: &[i128], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(x, &y)| x * y as i128).sum()
}

fn dot_full(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd_i128(a as i128, b as i128) as u64 * b
}

fn floor_ratio(r: &BigRational) -> i64 {
    let f = r.floor();
    i64::try_from(f.to_integer()).expect("box bound fits i64")
}

fn ceil_ratio(r: &BigRational) -> i64 {
    let c = r.ceil();
    i64::try_from(c.to_integer()).expect("box bound fits i64")
}

/// Determinant of a small square integer matrix by cofactor expansion.
fn det(m: &[Vec<i128>]) -> i128 {
    let k = m.len();
    match k {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let mut acc: i128 = 0;
            for j in 0..k {
                if m[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                acc += sign * m[0][j] * det(&minor);
            }
            acc
        }
    }
}

/// Primitive normal of the hyperplane spanned by `k` edge vectors in `R^{k+1}`
/// (generalized cross product); `None` if they do not span a hyperplane.
fn cross_normal(edges: &[Vec<i128>]) -> Option<Vec<i128>> {
    let n = edges.len() + 1;
    let mut normal = vec![0i128; n];
    for i in 0..n {
        let minor: Vec<Vec<i128>> = edges
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != i)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        let sign = if i % 2 == 0 { 1 } else { -1 };
        normal[i] = sign * det(&minor);
    }
    if normal.iter().all(|&x| x == 0) {
        return None;
    }
    let g = normal.iter().fold(0i128, |acc, &x| gcd_i128(acc, x));
    for x in normal.iter_mut() {
        *x /= g;
    }
    Some(normal)
}

/// All facet inequalities `a · x ≤ c` of `conv(points)`, primitive `a`,
/// oriented so the inequality holds on every point. Requires the hull to be
/// full-dimensional in the coordinates given.
fn facet_hyperplanes(points: &[Vec<i128>]) -> Result<Vec<FacetForm>, PolytopeError> {
    let n = points[0].len();
    let mut seen: BTreeSet<(Vec<i128>, i128)> = BTreeSet::new();
    let mut out = Vec::new();
    let idx: Vec<usize> = (0..points.len()).collect();
    for subset in subsets(&idx, n) {
        let base = &points[subset[0]];
        let edges: Vec<Vec<i128>> = subset[1..]
            .iter()
            .map(|&i| sub_vec(&points[i], base))
            .collect();
        let Some(mut normal) = cross_normal(&edges) else {
            continue;
        };
        let mut c = dot_full(&normal, base);
        let mut above = false;
        let mut below = false;
        for p in points {
            let v = dot_full(&normal, p);
            if v > c {
                above = true;
            }
            if v < c {
                below = true;
            }
        }
        if above && below {
            continue;
        }
        if above {
            // flip so all points satisfy a·x ≤ c
            for x in normal.iter_mut() {
                *x = -*x;
            }
            c = -c;
        }
        if seen.insert((normal.clone(), c)) {
            out.push(FacetForm { normal, offset: c });
        }
    }
    if out.is_empty() {
        return Err(PolytopeError::Degenerate);
    }
    Ok(out)
}

/// `p` is extreme iff the normals of its active facets span `R^n`.
fn is_extreme(p: &[i64], facets: &[FacetForm]) -> bool {
    let active: Vec<Vec<i128>> = facets
        .iter()
        .filter(|f| dot_i128(&f.normal, p) == f.offset)
        .map(|f| f.normal.clone())
        .collect();
    rank_i128(&active) == p.len()
}

fn affine_rank(points: &[Vec<i64>]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let pts = to_i128(points);
    let base = &pts[0];
    let rows: Vec<Vec<i128>> = pts[1..].iter().map(|p| sub_vec(p, base)).collect();
    rank_i128(&rows)
}

/// Rank by fraction-free elimination.
fn rank_i128(rows: &[Vec<i128>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from(BigInt::from(x))).collect())
        .collect();
    let cols = m[0].len();
    let mut rank = 0;
    let mut col = 0;
    while rank < m.len() && col < cols {
        let pivot = (rank..m.len()).find(|&i| !m[i][col].is_zero());
        let Some(pivot) = pivot else {
            col += 1;
            continue;
        };
        m.swap(rank, pivot);
        let pv = m[rank][col].clone();
        for i in rank + 1..m.len() {
            if !m[i][col].is_zero() {
                let factor = &m[i][col] / &pv;
                for j in col..cols {
                    let delta = &factor * &m[rank][j];
                    m[i][j] = &m[i][j] - delta;
                }
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

/// Triangulation (as index tuples) of a full-dimensional hull, recursing on
/// projected facets.
fn triangulate(points: &[Vec<i128>]) -> Result<Vec<Vec<usize>>, PolytopeError> {
    let k = points[0].len();
    if k == 1 {
        let mut idx: Vec<usize> = (0..points.len()).collect();
        idx.sort_by_key(|&i| points[i][0]);
        return Ok(idx.windows(2).map(|w| vec![w[0], w[1]]).collect());
    }
    let facets = facet_hyperplanes(points)?;
    let v0 = (0..points.len())
        .min_by(|&a, &b| points[a].cmp(&points[b]))
        .unwrap();
    let mut simplices = Vec::new();
    for f in &facets {
        if dot_full(&f.normal, &points[v0]) == f.offset {
            continue;
        }
        let on: Vec<usize> = (0..points.len())
            .filter(|&i| dot_full(&f.normal, &points[i]) == f.offset)
            .collect();
        let j = f.normal.iter().position(|&x| x != 0).unwrap();
        let proj: Vec<Vec<i128>> = on
            .iter()
            .map(|&i| {
                points[i]
                    .iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        for s in triangulate(&proj)? {
            let mut simplex: Vec<usize> = s.iter().map(|&t| on[t]).collect();
            simplex.push(v0);
            simplices.push(simplex);
        }
    }
    Ok(simplices)
}
