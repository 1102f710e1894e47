//! Direct computation of the T-adic power sums `S_f(k, T)`, assembly of the
//! C- and L-functions, their Newton point sets, the product identities
//! relating the two, and specialization at `T = ζ_{p^m} - 1`.
//!
//! Point sums run over `(F_{q^k}^×)^n` through discrete logs of a fixed
//! multiplicative generator, with all Teichmüller monomials updated
//! incrementally. Because every trace value lives in `Z/p^{M_c}`, the sum is
//! folded through a histogram of trace residues, so the binomial series
//! `(1+T)^c` is expanded once per residue rather than once per point.

use crate::padic::{build_field_tower, FqCtx, FqElem, RingElem, UnramifiedRing, Zpm, ZpmCtx};
use crate::polygons::{lower_convex_hull, HullResult, NewtonPoint, NewtonPointSet, OrdEntry};
use crate::tseries::{
    binomial_power, exp_divided_sum, DividedExp, SPolynomial, SeriesCtx, TruncatedSeries,
    TseriesError,
};
use crate::polytope::ConeData;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SumsError {
    #[error("point has a zero coordinate")]
    ZeroCoordinate,
    #[error("point budget exceeded: (q^k-1)^n = {points} > {budget}")]
    PointBudget { points: u128, budget: u64 },
    #[error("histogram budget exceeded: p^{{M_c}} = {size}")]
    HistogramBudget { size: u128 },
    #[error("support point {0:?} lies outside the polytope")]
    SupportOutsidePolytope(String),
    #[error("vertex {0:?} must have a nonzero coefficient")]
    VertexCoefficientZero(String),
    #[error("product identity {identity} fails first at s^{s_index}, T^{t_index}")]
    IdentityMismatch { identity: &'static str, s_index: usize, t_index: usize },
    #[error("cyclotomic degree {0} exceeds the desk-scale budget")]
    CyclotomicBudget(usize),
    #[error(transparent)]
    Tseries(#[from] TseriesError),
    #[error(transparent)]
    Padic(#[from] crate::padic::PadicError),
}

/// The Laurent polynomial `f = Σ a_u x^u` with coefficients in `F_q`.
/// Zero-coefficient terms are dropped at construction.
#[derive(Debug, Clone)]
pub struct LaurentData {
    pub n: usize,
    pub terms: Vec<(Vec<i64>, FqElem)>,
}

impl LaurentData {
    pub fn new(n: usize, field: &FqCtx, terms: Vec<(Vec<i64>, FqElem)>) -> Self {
        let terms = terms
            .into_iter()
            .filter(|(_, a)| !field.is_zero(a))
            .collect();
        LaurentData { n, terms }
    }

    /// Support must lie in `Δ` and every non-origin vertex must carry a
    /// nonzero coefficient.
    pub fn validate(&self, cone: &ConeData, vertices_i: &[Vec<i64>]) -> Result<(), SumsError> {
        for (u, _) in &self.terms {
            if !cone.in_polytope(u) {
                return Err(SumsError::SupportOutsidePolytope(format!("{u:?}")));
            }
        }
        for v in vertices_i {
            if !self.terms.iter().any(|(u, _)| u == v) {
                return Err(SumsError::VertexCoefficientZero(format!("{v:?}")));
            }
        }
        Ok(())
    }
}

/// Precision and budget parameters threaded through the direct engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SumParams {
    pub p: u64,
    pub b: usize,
    pub n: usize,
    pub m_target: u32,
    pub n_len: usize,
    pub k_max: usize,
    pub mw_exp: u32,
    pub mc_exp: u32,
    pub point_budget: u64,
}

impl SumParams {
    pub fn q(&self) -> u64 {
        self.p.pow(self.b as u32)
    }

    pub fn series_ctx(&self) -> SeriesCtx {
        SeriesCtx::new(
            ZpmCtx::new(self.p, self.mw_exp).expect("working precision fits"),
            self.n_len,
        )
    }
}

/// `Tr_{Z_{q^k}/Z_p}(f(x))` for one point, coordinates as field elements.
/// `base_root` realizes the embedding of the coefficient field.
pub fn witt_trace_at_point(
    f: &LaurentData,
    x: &[FqElem],
    field: &FqCtx,
    ring: &UnramifiedRing,
    base_field: &FqCtx,
    base_root: &FqElem,
) -> Result<Zpm, SumsError> {
    if x.iter().any(|c| field.is_zero(c)) {
        return Err(SumsError::ZeroCoordinate);
    }
    let teich_x: Vec<RingElem> = x
        .iter()
        .map(|c| ring.teichmuller(c))
        .collect::<Result<_, _>>()?;
    let inv_x: Vec<RingElem> = teich_x
        .iter()
        .map(|t| ring.inv(t))
        .collect::<Result<_, _>>()?;
    let mut total = ring.zero();
    for (u, a) in &f.terms {
        let a_emb = if base_field.r == field.r {
            a.clone()
        } else {
            field.embed(a, base_root)
        };
        let mut mon = ring.teichmuller(&a_emb)?;
        for (j, &e) in u.iter().enumerate() {
            let base = if e >= 0 { &teich_x[j] } else { &inv_x[j] };
            mon = ring.mul(&mon, &ring.pow(base, e.unsigned_abs()));
        }
        total = ring.add(&total, &mon);
    }
    Ok(ring.trace(&total))
}

/// `S_f(k, T) = Σ_x (1+T)^{Tr(f(x))}` over `(F_{q^k}^×)^n`, reduced mod
/// `(p^{M_w}, T^N)`.
pub fn s_sum(f: &LaurentData, k: usize, params: &SumParams) -> Result<TruncatedSeries, SumsError> {
    let (field, ring) = build_field_tower(params.p, params.b, k, params.mc_exp)?;
    let order = field.order() - 1;
    let points = (order as u128).pow(params.n as u32);
    if points > params.point_budget as u128 {
        return Err(SumsError::PointBudget { points, budget: params.point_budget });
    }
    let hist_size = ring.scalars.modulus as u128;
    if hist_size > (1 << 24) {
        return Err(SumsError::HistogramBudget { size: hist_size });
    }

    let base_field = FqCtx::new(params.p, params.b)?;
    let base_root = if base_field.r == field.r {
        base_field.gen_class()
    } else {
        field.subfield_root(&base_field)
    };
    let g = field.multiplicative_generator();
    let tg = ring.teichmuller(&g)?;

    // Teichmüller coefficient of each support term in the big ring.
    let coeffs: Vec<RingElem> = f
        .terms
        .iter()
        .map(|(_, a)| {
            let a_emb = if base_field.r == field.r {
                a.clone()
            } else {
                field.embed(a, &base_root)
            };
            ring.teichmuller(&a_emb)
        })
        .collect::<Result<_, _>>()?;
    // Per support term, the generator power stepping the innermost coordinate.
    let inner_steps: Vec<RingElem> = f
        .terms
        .iter()
        .map(|(u, _)| ring.pow(&tg, u[params.n - 1].rem_euclid(order as i64) as u64))
        .collect();

    let mut histogram = vec![0u64; ring.scalars.modulus as usize];

    let n = params.n;
    let mut outer_exp = vec![0u64; n - 1];
    let mut outer_pow = vec![ring.one(); n - 1];
    loop {
        // monomial value of each term with the innermost exponent at zero
        let mut cur: Vec<RingElem> = Vec::with_capacity(f.terms.len());
        for ((u, _), coeff) in f.terms.iter().zip(&coeffs) {
            let mut mon = coeff.clone();
            for j in 0..n - 1 {
                let e = u[j].rem_euclid(order as i64) as u64;
                if e != 0 {
                    mon = ring.mul(&mon, &ring.pow(&outer_pow[j], e));
                }
            }
            cur.push(mon);
        }
        for _ in 0..order {
            let mut value = ring.zero();
            for mon in &cur {
                value = ring.add(&value, mon);
            }
            histogram[ring.trace(&value).value as usize] += 1;
            for (mon, step) in cur.iter_mut().zip(&inner_steps) {
                *mon = ring.mul(mon, step);
            }
        }
        // odometer over the outer coordinates
        let mut carried = true;
        for j in (0..n - 1).rev() {
            outer_exp[j] += 1;
            outer_pow[j] = ring.mul(&outer_pow[j], &tg);
            if outer_exp[j] < order {
                carried = false;
                break;
            }
            outer_exp[j] = 0;
            outer_pow[j] = ring.one();
        }
        if carried {
            break;
        }
    }

    let out_ctx = params.series_ctx();
    let mut sum = TruncatedSeries::zero(out_ctx);
    for (v, &count) in histogram.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let series = binomial_power(Zpm::new(ring.scalars, v as u64), out_ctx)?;
        sum = sum.add(&series.scalar_mul(count % out_ctx.scalars.modulus));
    }
    // T = 0 specialization counts the points
    debug_assert_eq!(
        sum.coeffs[0],
        out_ctx.scalars.reduce_u128(points),
        "S_f(k, 0) = (q^k - 1)^n"
    );
    Ok(sum)
}

/// All power sums `S_f(k, T)` for `k = 1..=K`.
pub fn power_sums(f: &LaurentData, params: &SumParams) -> Result<Vec<TruncatedSeries>, SumsError> {
    (1..=params.k_max).map(|k| s_sum(f, k, params)).collect()
}

/// The C-function with its precision ledger.
#[derive(Debug, Clone)]
pub struct CFunctionApprox {
    pub params: SumParams,
    /// Raw coefficients of `s^i` at the working precision.
    pub series: SPolynomial,
    /// Guaranteed p-precision exponent per `s`-index.
    pub precision: Vec<u32>,
}

impl CFunctionApprox {
    /// Coefficient `c_i` under the alternating-sign convention
    /// `C = Σ (-1)^i c_i s^i`, reduced to the target precision.
    pub fn c_signed(&self, i: usize) -> TruncatedSeries {
        let raw = self.series.coeffs[i].truncate_precision(self.params.m_target);
        if i % 2 == 0 {
            raw
        } else {
            raw.neg()
        }
    }

    /// Raw series reduced to the target precision.
    pub fn reduced(&self) -> SPolynomial {
        self.series.reduced(self.params.m_target, self.params.n_len)
    }
}

/// `C_f = exp(Σ_k -(q^k-1)^{-n} S_f(k,T) s^k / k)`, with the integrality of
/// every coefficient asserted by the divided-power assembly.
pub fn c_function(
    s_sums: &[TruncatedSeries],
    params: &SumParams,
) -> Result<CFunctionApprox, SumsError> {
    let z = params.series_ctx().scalars;
    let mut terms = Vec::with_capacity(s_sums.len());
    for (idx, s) in s_sums.iter().enumerate() {
        let k = idx + 1;
        let qk_minus_1 = z.sub(z.pow(params.q() % z.modulus, k as u64), 1);
        let scale = z.neg(z.pow(z.inv(qk_minus_1).expect("q^k - 1 is a unit"), params.n as u64));
        terms.push((scale, s.clone()));
    }
    let out = exp_divided_sum(params.series_ctx(), &terms, params.m_target)?;
    Ok(CFunctionApprox { params: *params, series: out.series, precision: out.precision })
}

/// `L_f = exp(Σ_k S_f(k,T) s^k / k)`.
pub fn l_function(s_sums: &[TruncatedSeries], params: &SumParams) -> Result<DividedExp, SumsError> {
    let terms: Vec<(u64, TruncatedSeries)> = s_sums.iter().map(|s| (1, s.clone())).collect();
    Ok(exp_divided_sum(params.series_ctx(), &terms, params.m_target)?)
}

/// Outcome of the two product identities tying `L_f` to `C_f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcReport {
    /// Number of `L(q^j s)` factors used for the second identity.
    pub second_cutoff: usize,
    /// Comparison precision exponent.
    pub compared_at: u32,
}

fn binom_i64(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn first_difference(a: &SPolynomial, b: &SPolynomial) -> Option<(usize, usize)> {
    for i in 0..a.coeffs.len().min(b.coeffs.len()) {
        for t in 0..a.coeffs[i].coeffs.len().min(b.coeffs[i].coeffs.len()) {
            if a.coeffs[i].coeffs[t] != b.coeffs[i].coeffs[t] {
                return Some((i, t));
            }
        }
    }
    None
}

/// Verifies `L_f(s) = ∏_{i=0}^n C_f(q^i s)^{(-1)^{n-i+1} C(n,i)}` exactly and
/// `C_f(s) = ∏_{j≥0} L_f(q^j s)^{(-1)^{n-1} C(n+j-1,j)}` with the product cut
/// off once `q^{j}` vanishes at the comparison precision.
pub fn check_lc_identities(
    c: &CFunctionApprox,
    l: &DividedExp,
    params: &SumParams,
) -> Result<LcReport, SumsError> {
    let m_cmp = params.m_target;
    let q = params.q();
    let n = params.n as i64;

    // first identity
    let mut rhs = SPolynomial::one(c.series.ctx(), params.k_max);
    for i in 0..=n {
        let exponent = if (n - i + 1) % 2 == 0 { 1 } else { -1 } * binom_i64(n, i);
        if exponent == 0 {
            continue;
        }
        let factor = c
            .series
            .rescale_s(c.series.ctx().scalars.pow(q % c.series.ctx().scalars.modulus, i as u64))
            .pow(exponent)?;
        rhs = rhs.mul(&factor);
    }
    let lhs = l.series.reduced(m_cmp, params.n_len);
    let rhs = rhs.reduced(m_cmp, params.n_len);
    if let Some((s_index, t_index)) = first_difference(&lhs, &rhs) {
        return Err(SumsError::IdentityMismatch { identity: "L-from-C", s_index, t_index });
    }

    // second identity: factors with b·j ≥ m_cmp are ≡ 1 at the comparison precision
    let cutoff = (m_cmp as usize).div_ceil(params.b);
    let mut rhs2 = SPolynomial::one(c.series.ctx(), params.k_max);
    let sign = if (n - 1) % 2 == 0 { 1 } else { -1 };
    for j in 0..cutoff as i64 {
        let exponent = sign * binom_i64(n + j - 1, j);
        if exponent == 0 {
            continue;
        }
        let factor = l
            .series
            .rescale_s(c.series.ctx().scalars.pow(q % c.series.ctx().scalars.modulus, j as u64))
            .pow(exponent)?;
        rhs2 = rhs2.mul(&factor);
    }
    let lhs2 = c.series.reduced(m_cmp, params.n_len);
    let rhs2 = rhs2.reduced(m_cmp, params.n_len);
    if let Some((s_index, t_index)) = first_difference(&lhs2, &rhs2) {
        return Err(SumsError::IdentityMismatch { identity: "C-from-L", s_index, t_index });
    }

    Ok(LcReport { second_cutoff: cutoff, compared_at: m_cmp })
}

/// Newton points `(i, ord_T(c_i))` of an `s`-polynomial at the target
/// precision, plus their lower hull.
pub fn newton_polygon_of_c(
    series: &SPolynomial,
    m_target: u32,
) -> Result<(NewtonPointSet, HullResult), crate::polygons::PolygonError> {
    let points: Vec<NewtonPoint> = series
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| NewtonPoint { abscissa: i, ord: c.ord_t(m_target) })
        .collect();
    let set = NewtonPointSet::new(points);
    let hull = lower_convex_hull(&set)?;
    Ok((set, hull))
}

/// `Z/p^M [y] / (Φ_{p^m}(1+y))`: the ring of integers of the `p^m`-th
/// cyclotomic field at finite precision, with `y` standing for
/// `π_m = ζ_{p^m} - 1`.
#[derive(Debug, Clone)]
pub struct CyclotomicQuotient {
    pub z: ZpmCtx,
    pub degree: usize,
    /// Monic modulus of degree `degree`, index = power of `y`.
    pub modulus: Vec<u64>,
}

impl CyclotomicQuotient {
    pub fn new(p: u64, m: u32, exp: u32) -> Result<Self, SumsError> {
        let z = ZpmCtx::new(p, exp)?;
        let degree = (p.pow(m - 1) * (p - 1)) as usize;
        if degree > 4096 {
            return Err(SumsError::CyclotomicBudget(degree));
        }
        // Φ_{p^m}(X) = Σ_{j<p} X^{j p^{m-1}} evaluated at X = 1 + y
        let one_plus_y = vec![1 % z.modulus, 1 % z.modulus];
        let mut modulus = vec![0u64; degree + 1];
        let step = p.pow(m - 1);
        let mut power = vec![1 % z.modulus]; // (1+y)^{j·step}
        let step_poly = poly_pow(&z, &one_plus_y, step);
        for _ in 0..p {
            for (i, &c) in power.iter().enumerate() {
                modulus[i] = z.add(modulus[i], c);
            }
            power = poly_mul(&z, &power, &step_poly);
        }
        debug_assert_eq!(modulus[degree], 1 % z.modulus, "Φ_{{p^m}}(1+y) is monic");
        debug_assert_eq!(modulus[0], p % z.modulus, "constant term is p");
        Ok(CyclotomicQuotient { z, degree, modulus })
    }

    fn reduce(&self, mut poly: Vec<u64>) -> Vec<u64> {
        for i in (self.degree..poly.len()).rev() {
            let c = poly[i];
            if c == 0 {
                continue;
            }
            poly[i] = 0;
            for j in 0..self.degree {
                let sub = self.z.mul(c, self.modulus[j]);
                poly[i - self.degree + j] = self.z.sub(poly[i - self.degree + j], sub);
            }
        }
        poly.resize(self.degree, 0);
        poly
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.reduce(poly_mul(&self.z, a, b))
    }

    /// Substitutes `y` for `T` in a truncated series.
    pub fn eval_series(&self, s: &TruncatedSeries) -> Vec<u64> {
        let y = vec![0, 1 % self.z.modulus];
        let mut acc = vec![0u64; self.degree];
        for &c in s.coeffs.iter().rev() {
            acc = self.mul(&acc, &y);
            acc[0] = self.z.add(acc[0], c % self.z.modulus);
        }
        acc
    }

    /// `ord_{π_m}` normalized with `ord(π_m) = 1`: the minimum of
    /// `degree·v_p(z_j) + j` over nonzero residues. `None` when everything
    /// vanishes at the stored precision.
    pub fn ord_pi(&self, elem: &[u64]) -> Option<u64> {
        elem.iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| self.degree as u64 * self.z.valuation(c) as u64 + j as u64)
            .min()
    }
}

fn poly_mul(z: &ZpmCtx, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = z.add(out[i + j], z.mul(x, y));
        }
    }
    out
}

fn poly_pow(z: &ZpmCtx, base: &[u64], mut e: u64) -> Vec<u64> {
    let mut acc = vec![1 % z.modulus];
    let mut cur = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul(z, &acc, &cur);
        }
        e >>= 1;
        if e > 0 {
            cur = poly_mul(z, &cur, &cur);
        }
    }
    acc
}

/// Specialization of the C-function at `T = π_m`: Newton points in
/// `π_m`-units. Ordinates are exact while they stay under the certification
/// window `min(N, deg(Φ)·M_target)`.
#[derive(Debug, Clone)]
pub struct SpecializedNp {
    pub m: u32,
    pub window: u64,
    pub points: NewtonPointSet,
}

pub fn specialize_cyclotomic(
    cfa: &CFunctionApprox,
    m: u32,
) -> Result<SpecializedNp, SumsError> {
    let ring = CyclotomicQuotient::new(cfa.params.p, m, cfa.params.m_target)?;
    let window = (cfa.params.n_len as u64).min(ring.degree as u64 * cfa.params.m_target as u64);
    let mut points = Vec::new();
    for (i, coeff) in cfa.series.coeffs.iter().enumerate() {
        let value = ring.eval_series(&coeff.truncate_precision(cfa.params.m_target));
        let ord = ring.ord_pi(&value).filter(|&o| o < window);
        points.push(NewtonPoint {
            abscissa: i,
            ord: match ord {
                Some(o) => OrdEntry::Finite(o as i64),
                None => OrdEntry::AtLeast(window as u32),
            },
        });
    }
    Ok(SpecializedNp { m, window, points: NewtonPointSet::new(points) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{build_cone_data, Polytope};

    fn interval_params(p: u64, b: usize, m_target: u32, n_len: usize, k_max: usize) -> SumParams {
        let mc = m_target
            + crate::tseries::vp_factorial(p, n_len as u64 - 1)
            + crate::tseries::vp_factorial(p, k_max as u64)
            + (k_max as u32) / (p as u32 - 1);
        let mw = m_target
            + crate::tseries::vp_factorial(p, k_max as u64)
            + (k_max as u32) / (p as u32 - 1);
        SumParams {
            p,
            b,
            n: 1,
            m_target,
            n_len,
            k_max,
            mw_exp: mw,
            mc_exp: mc,
            point_budget: 10_000_000,
        }
    }

    fn f_x_over(p: u64) -> (LaurentData, FqCtx) {
        let field = FqCtx::new(p, 1).unwrap();
        let f = LaurentData::new(1, &field, vec![(vec![1], field.one())]);
        (f, field)
    }

    #[test]
    fn witt_trace_simple_cases() {
        let params = interval_params(2, 1, 2, 4, 1);
        let (f, field) = f_x_over(2);
        let (big, ring) = build_field_tower(2, 1, 1, params.mc_exp).unwrap();
        let tr = witt_trace_at_point(&f, &[big.one()], &big, &ring, &field, &field.gen_class())
            .unwrap();
        assert_eq!(tr.value, 1);

        let params = interval_params(3, 1, 2, 4, 1);
        let (f, field) = f_x_over(3);
        let (big, ring) = build_field_tower(3, 1, 1, params.mc_exp).unwrap();
        let two = big.from_scalar(2);
        let tr =
            witt_trace_at_point(&f, &[two], &big, &ring, &field, &field.gen_class()).unwrap();
        assert_eq!(tr.value, ring.scalars.modulus - 1); // teich(2) = -1
    }

    #[test]
    fn witt_trace_x3_plus_x_over_f11() {
        // teich(3) mod 121 is 3 itself (3^11 ≡ 3), so the trace is 3³ + 3.
        let field = FqCtx::new(11, 1).unwrap();
        let f = LaurentData::new(
            1,
            &field,
            vec![(vec![3], field.one()), (vec![1], field.one())],
        );
        let (big, ring) = build_field_tower(11, 1, 1, 2).unwrap();
        let three = big.from_scalar(3);
        let tr =
            witt_trace_at_point(&f, &[three], &big, &ring, &field, &field.gen_class()).unwrap();
        assert_eq!(ring.pow(&ring.from_scalar(3), 11), ring.from_scalar(3));
        assert_eq!(tr.value, 30);
    }

    #[test]
    fn witt_trace_rejects_zero_coordinate() {
        let (f, field) = f_x_over(3);
        let (big, ring) = build_field_tower(3, 1, 1, 2).unwrap();
        let err = witt_trace_at_point(&f, &[big.zero()], &big, &ring, &field, &field.gen_class())
            .unwrap_err();
        assert_eq!(err, SumsError::ZeroCoordinate);
    }

    #[test]
    fn s_sum_f2_single_point() {
        let params = interval_params(2, 1, 2, 5, 2);
        let (f, _) = f_x_over(2);
        let s1 = s_sum(&f, 1, &params).unwrap();
        // only x = 1: (1+T)^1
        assert_eq!(s1.coeffs[0], 1);
        assert_eq!(s1.coeffs[1], 1);
        assert!(s1.coeffs[2..].iter().all(|&c| c == 0));
    }

    #[test]
    fn s_sum_f3_matches_hand_series() {
        let params = interval_params(3, 1, 2, 6, 2);
        let (f, _) = f_x_over(3);
        let s1 = s_sum(&f, 1, &params).unwrap();
        // (1+T) + (1+T)^{-1} = 2 + T² - T³ + T⁴ - …
        let z = s1.ctx.scalars;
        assert_eq!(s1.coeffs[0], 2);
        assert_eq!(s1.coeffs[1], 0);
        assert_eq!(s1.coeffs[2], 1);
        assert_eq!(s1.coeffs[3], z.neg(1));
        assert_eq!(s1.coeffs[4], 1);
        assert_eq!(s1.coeffs[5], z.neg(1));
    }

    #[test]
    fn s_sum_constant_term_counts_points() {
        let params = interval_params(5, 1, 2, 4, 3);
        let field = FqCtx::new(5, 1).unwrap();
        let f = LaurentData::new(
            1,
            &field,
            vec![(vec![2], field.from_scalar(3)), (vec![1], field.one())],
        );
        for k in 1..=3 {
            let s = s_sum(&f, k, &params).unwrap();
            let z = s.ctx.scalars;
            assert_eq!(s.coeffs[0], z.reduce_u128(5u128.pow(k as u32) - 1));
        }
    }

    #[test]
    fn s_sum_invariant_under_frobenius_twist() {
        // replacing every coefficient by its p-th power permutes the points
        let p = 3u64;
        let field = FqCtx::new(p, 2).unwrap();
        let g = field.gen_class();
        let g_cubed = field.pow(&g, 3);
        let params = SumParams {
            p,
            b: 2,
            n: 1,
            m_target: 2,
            n_len: 5,
            k_max: 2,
            mw_exp: 3,
            mc_exp: 4,
            point_budget: 1_000_000,
        };
        let f1 = LaurentData::new(1, &field, vec![(vec![2], g), (vec![1], field.one())]);
        let f2 = LaurentData::new(1, &field, vec![(vec![2], g_cubed), (vec![1], field.one())]);
        for k in 1..=2 {
            assert_eq!(s_sum(&f1, k, &params).unwrap(), s_sum(&f2, k, &params).unwrap());
        }
    }

    #[test]
    fn c_function_first_coefficient_convention() {
        let params = interval_params(3, 1, 2, 6, 2);
        let (f, _) = f_x_over(3);
        let sums = power_sums(&f, &params).unwrap();
        let c = c_function(&sums, &params).unwrap();
        // c_1 (signed) = (q-1)^{-n} S_f(1,T) = S_f(1,T)/2
        let z = params.series_ctx().scalars;
        let expected = sums[0].scalar_mul(z.inv(2).unwrap()).truncate_precision(2);
        assert_eq!(c.c_signed(1), expected);
        assert_eq!(c.series.coeffs[0], TruncatedSeries::one(params.series_ctx()));
        // 1 + (T² - T³ + …)/2: constant term 1, T² coefficient = inv(2)
        assert_eq!(c.c_signed(1).coeffs[0], 1);
        assert_eq!(c.c_signed(1).coeffs[2], ZpmCtx::new(3, 2).unwrap().inv(2).unwrap());
    }

    #[test]
    fn l_function_first_coefficient_is_s1() {
        let params = interval_params(3, 1, 2, 6, 2);
        let (f, _) = f_x_over(3);
        let sums = power_sums(&f, &params).unwrap();
        let l = l_function(&sums, &params).unwrap();
        assert_eq!(l.series.coeffs[0], TruncatedSeries::one(params.series_ctx()));
        assert_eq!(l.series.coeffs[1], sums[0]);
    }

    #[test]
    fn lc_identities_hold_for_f3() {
        let params = interval_params(3, 1, 2, 6, 3);
        let (f, _) = f_x_over(3);
        let sums = power_sums(&f, &params).unwrap();
        let c = c_function(&sums, &params).unwrap();
        let l = l_function(&sums, &params).unwrap();
        let report = check_lc_identities(&c, &l, &params).unwrap();
        assert_eq!(report.compared_at, 2);
        assert!(report.second_cutoff >= 2);
    }

    #[test]
    fn lc_identities_hold_for_n2() {
        // n = 2 on the unit simplex, f = x + y over F_5
        let field = FqCtx::new(5, 1).unwrap();
        let f = LaurentData::new(
            2,
            &field,
            vec![(vec![1, 0], field.one()), (vec![0, 1], field.one())],
        );
        let poly = Polytope::new(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
        let cone = build_cone_data(&poly).unwrap();
        f.validate(&cone, poly.non_origin_vertices()).unwrap();
        let params = SumParams {
            p: 5,
            b: 1,
            n: 2,
            m_target: 2,
            n_len: 5,
            k_max: 2,
            mw_exp: 2,
            mc_exp: 3,
            point_budget: 1_000_000,
        };
        let sums = power_sums(&f, &params).unwrap();
        let c = c_function(&sums, &params).unwrap();
        let l = l_function(&sums, &params).unwrap();
        check_lc_identities(&c, &l, &params).unwrap();
    }

    #[test]
    fn lc_identity_detects_corruption() {
        let params = interval_params(3, 1, 2, 6, 2);
        let (f, _) = f_x_over(3);
        let sums = power_sums(&f, &params).unwrap();
        let c = c_function(&sums, &params).unwrap();
        let mut l = l_function(&sums, &params).unwrap();
        l.series.coeffs[1].coeffs[0] = l.series.coeffs[1].ctx.scalars.add(
            l.series.coeffs[1].coeffs[0],
            1,
        );
        let err = check_lc_identities(&c, &l, &params).unwrap_err();
        assert!(matches!(err, SumsError::IdentityMismatch { identity: "L-from-C", .. }));
    }

    #[test]
    fn newton_points_trivial_examples() {
        let ctx = SeriesCtx::new(ZpmCtx::new(3, 2).unwrap(), 4);
        // C = 1 + T²·s
        let mut series = SPolynomial::one(ctx, 1);
        series.coeffs[1] = {
            let mut t2 = TruncatedSeries::zero(ctx);
            t2.coeffs[2] = 1;
            t2
        };
        let (set, hull) = newton_polygon_of_c(&series, 2).unwrap();
        assert_eq!(set.finite_points(), vec![(0, 0), (1, 2)]);
        assert_eq!(hull.vertices, vec![(0, 0), (1, 2)]);

        // C = 1 + s + T·s²: hull slopes [0, 1]
        let mut series = SPolynomial::one(ctx, 2);
        series.coeffs[1] = TruncatedSeries::one(ctx);
        series.coeffs[2] = TruncatedSeries::t(ctx);
        let (_, hull) = newton_polygon_of_c(&series, 2).unwrap();
        let slopes = hull.polygon.slopes();
        assert_eq!(slopes.len(), 2);
        assert_eq!(slopes[0], num_rational::BigRational::from(num_bigint::BigInt::from(0)));
        assert_eq!(slopes[1], num_rational::BigRational::from(num_bigint::BigInt::from(1)));
    }

    #[test]
    fn cyclotomic_quotient_smallest_cases() {
        // p=2, m=1: Φ_2(1+y) = 2 + y
        let ring = CyclotomicQuotient::new(2, 1, 4).unwrap();
        assert_eq!(ring.degree, 1);
        assert_eq!(ring.modulus, vec![2, 1]);
        // p=11, m=1: degree 10, Eisenstein with constant term 11
        let ring = CyclotomicQuotient::new(11, 1, 2).unwrap();
        assert_eq!(ring.degree, 10);
        assert_eq!(ring.modulus[0], 11);
        assert_eq!(ring.modulus[10], 1);
        for j in 1..10 {
            assert_eq!(ring.modulus[j] % 11, 0, "Eisenstein middle coefficient {j}");
        }
    }

    #[test]
    fn specialize_t_times_s() {
        // C = 1 + T·s at p=3, m=1: the point (1, ord(π_1)) = (1, 1)
        let p = 3;
        let params = SumParams {
            p,
            b: 1,
            n: 1,
            m_target: 2,
            n_len: 4,
            k_max: 1,
            mw_exp: 2,
            mc_exp: 3,
            point_budget: 100,
        };
        let ctx = params.series_ctx();
        let mut series = SPolynomial::one(ctx, 1);
        series.coeffs[1] = TruncatedSeries::t(ctx);
        let cfa = CFunctionApprox { params, series, precision: vec![2, 2] };
        let sp = specialize_cyclotomic(&cfa, 1).unwrap();
        assert_eq!(sp.points.finite_points(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn cyclotomic_ord_handles_p_multiples() {
        let ring = CyclotomicQuotient::new(3, 1, 3).unwrap(); // degree 2
        // p itself has ord = degree
        let p_elem = vec![3u64, 0];
        assert_eq!(ring.ord_pi(&p_elem), Some(2));
        // p·y has ord degree + 1
        let py = vec![0u64, 3];
        assert_eq!(ring.ord_pi(&py), Some(3));
        assert_eq!(ring.ord_pi(&[0u64, 0]), None);
    }
}
