//! The truncated Dwork operator: expansion of `E_f`, the matrix of the
//! `b`-iterate `Ψ^b` on the scaled monomial basis `{π^{deg u} x^u}`, its
//! characteristic series `det(1 - Ψ^b s)` by the division-free Berkowitz
//! algorithm, Newton-point extraction, and the entry-estimate checks.
//!
//! Everything runs over `Z_q mod p^M` with ρ-exponent bookkeeping
//! (`ρ^D = π`, all exponents integers). No step divides, so coefficients
//! stay exact at the working precision; only the basis truncation is
//! approximate, and that is handled by stabilization plus re-verification.

use crate::padic::{build_field_tower, FqCtx, RingElem, UnramifiedRing};
use crate::polygons::{NewtonPoint, NewtonPointSet};
use crate::polytope::{ConeData, Degree, LatticePoint};
use crate::sums::LaurentData;
use crate::tseries::{
    artin_hasse, pi_from_t, RamifiedSeries, SPolynomial, SeriesCtx, TruncatedSeries, TseriesError,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum DworkError {
    #[error("truncation did not stabilize below the degree cap {cap}; last error: {last:?}")]
    NoStabilization { cap: u32, last: Option<String> },
    #[error("ψ-matrix size {0} exceeds the desk-scale cap")]
    MatrixTooLarge(usize),
    #[error(transparent)]
    Tseries(#[from] TseriesError),
    #[error(transparent)]
    Padic(#[from] crate::padic::PadicError),
    #[error(transparent)]
    Sums(#[from] crate::sums::SumsError),
}

/// Parameters for the operator engine. The working p-precision equals the
/// target precision: the pipeline is division-free.
#[derive(Debug, Clone, Copy)]
pub struct DworkParams {
    pub p: u64,
    pub b: usize,
    pub n: usize,
    pub m_target: u32,
    pub n_len: usize,
    pub k_max: usize,
    /// Hard cap on the basis degree bound for stabilization.
    pub bound_cap: u32,
}

/// Shared state: the coefficient ring `Z_q mod p^M`, Teichmüller lifts of
/// the coefficients of `f`, the Artin–Hasse coefficients, and `π(T)`.
pub struct DworkCtx<'a> {
    pub params: DworkParams,
    pub cone: &'a ConeData,
    pub ring: UnramifiedRing,
    pub d: usize,
    teich_terms: Vec<(Vec<i64>, RingElem)>,
    lambda: Vec<u64>,
    pi: TruncatedSeries,
}

/// One twisted expansion `E_f^{σ^i}(x^{p^i}) = Σ_v γ_v x^v`, keyed by the
/// (substituted) monomial. `floor` is the provable π-ord lower bound
/// `⌈deg(v) / p^i⌉` for every stored γ.
pub struct EfExpansion {
    pub twist: usize,
    pub gamma: BTreeMap<Vec<i64>, RamifiedSeries>,
    pub floor: BTreeMap<Vec<i64>, u32>,
}

/// Product of the `b` twisted expansions, with chain floors
/// `min Σ_i ⌈deg w_i⌉` over decompositions `v = Σ p^i w_i`.
pub struct ProductExpansion {
    pub gamma: BTreeMap<Vec<i64>, RamifiedSeries>,
    pub chain_floor: BTreeMap<Vec<i64>, u32>,
}

/// The truncated matrix of `Ψ^b` on basis points of degree ≤ bound, entries
/// scaled by `π^{deg w - deg u}` into `Z_q[[ρ]]`.
pub struct PsiMatrix {
    pub bound: u32,
    pub basis: Vec<LatticePoint>,
    pub entries: Vec<Vec<RamifiedSeries>>,
    /// ρ-window the entries are stored in.
    pub window: usize,
    /// For each (u, w) with a cone-interior key: the lookup key and its
    /// chain floor (π-units).
    pub entry_keys: Vec<Vec<Option<(Vec<i64>, u32)>>>,
}

impl<'a> DworkCtx<'a> {
    pub fn new(
        f: &LaurentData,
        base_field: &FqCtx,
        cone: &'a ConeData,
        params: DworkParams,
    ) -> Result<Self, DworkError> {
        let (_, ring) = build_field_tower(params.p, params.b, 1, params.m_target)?;
        let mut teich_terms = Vec::with_capacity(f.terms.len());
        for (u, a) in &f.terms {
            debug_assert_eq!(base_field.r, ring.r);
            teich_terms.push((u.clone(), ring.teichmuller(a)?));
        }
        let d = cone.d() as usize;
        // λ and π long enough for the largest window used below the cap
        let lambda_len = params.n_len + params.bound_cap as usize + 2;
        let lambda = artin_hasse(ring.scalars, lambda_len)?.coeffs;
        let pi = pi_from_t(ring.scalars, params.n_len)?;
        Ok(DworkCtx { params, cone, ring, d, teich_terms, lambda, pi })
    }

    fn window_for(&self, bound: u32) -> usize {
        self.d * (self.params.n_len + bound as usize + 1)
    }

    fn deg(&self, v: &[i64]) -> Option<BigRational> {
        match self.cone.degree(v) {
            Degree::Finite(r) => Some(r),
            Degree::Infinite => None,
        }
    }

    /// `⌈deg(v)/p^i⌉`, or `None` off the cone.
    fn floor_for(&self, v: &[i64], twist: usize) -> Option<u32> {
        let deg = self.deg(v)?;
        let scaled = deg / BigRational::from(BigInt::from(self.params.p.pow(twist as u32)));
        Some(scaled.ceil().to_integer().to_u32().expect("desk-scale degree"))
    }

    /// Expands `E_f^{σ^i}(x^{p^i})`, keeping monomials whose provable π-ord
    /// floor is visible inside the window.
    pub fn expand_ef(&self, twist: usize, window: usize) -> EfExpansion {
        let ring = &self.ring;
        let p_pow = self.params.p.pow(twist as u32);
        // terms with π-power j only touch stored indices when D·j < window
        let j_max = (window - 1) / self.d;
        assert!(j_max < self.lambda.len(), "Artin–Hasse table covers the window");
        let mut gamma: BTreeMap<Vec<i64>, RamifiedSeries> = BTreeMap::new();
        let mut one = RamifiedSeries::zero(ring, window);
        one.coeffs[0] = ring.one();
        gamma.insert(vec![0i64; self.params.n], one);
        for (u, teich) in &self.teich_terms {
            // substituted support step and σ^i-twisted Teichmüller coefficient
            let step: Vec<i64> = u.iter().map(|&c| c * p_pow as i64).collect();
            let coeff = ring.pow(teich, p_pow);
            let mut next: BTreeMap<Vec<i64>, RamifiedSeries> = BTreeMap::new();
            for (w, series) in &gamma {
                let mut coeff_pow = ring.one();
                for j in 0..=j_max {
                    if j > 0 {
                        coeff_pow = ring.mul(&coeff_pow, &coeff);
                    }
                    let lam = self.lambda[j];
                    if lam == 0 && j > 0 {
                        // invisible at the working precision, so the term
                        // contributes nothing representable
                        continue;
                    }
                    let key: Vec<i64> = w.iter().zip(&step).map(|(&a, &b)| a + b * j as i64).collect();
                    let Some(floor) = self.floor_for(&key, twist) else {
                        continue;
                    };
                    if self.d * floor as usize >= window {
                        continue;
                    }
                    let scalar = ring.scalar_mul(lam, &coeff_pow);
                    let mut term = RamifiedSeries::zero(ring, window);
                    for (idx, c) in series.coeffs.iter().enumerate() {
                        if ring.is_zero(c) {
                            continue;
                        }
                        let target = idx + self.d * j;
                        if target < window {
                            term.coeffs[target] = ring.mul(c, &scalar);
                        }
                    }
                    if term.is_zero(ring) {
                        continue;
                    }
                    next.entry(key)
                        .and_modify(|acc| *acc = acc.add(ring, &term))
                        .or_insert(term);
                }
            }
            gamma = next;
        }
        gamma.retain(|_, s| !s.is_zero(ring));
        let floor = gamma
            .keys()
            .map(|v| (v.clone(), self.floor_for(v, twist).expect("cone key")))
            .collect();
        EfExpansion { twist, gamma, floor }
    }

    /// `∏_{i=0}^{b-1} E_f^{σ^i}(x^{p^i})` with chain floors.
    pub fn product_expansion(&self, window: usize) -> ProductExpansion {
        let ring = &self.ring;
        let p_top = self.params.p.pow(self.params.b as u32 - 1);
        let visible = |v: &[i64]| -> Option<u32> {
            let deg = self.deg(v)?;
            let scaled = deg / BigRational::from(BigInt::from(p_top));
            let floor = scaled.ceil().to_integer().to_u32().expect("desk-scale degree");
            ((self.d * floor as usize) < window).then_some(floor)
        };
        let first = self.expand_ef(0, window);
        let mut acc = ProductExpansion {
            gamma: first.gamma,
            chain_floor: first.floor,
        };
        for i in 1..self.params.b {
            let factor = self.expand_ef(i, window);
            let mut gamma: BTreeMap<Vec<i64>, RamifiedSeries> = BTreeMap::new();
            let mut chain: BTreeMap<Vec<i64>, u32> = BTreeMap::new();
            for (va, sa) in &acc.gamma {
                let fa = acc.chain_floor[va];
                for (vb, sb) in &factor.gamma {
                    let key: Vec<i64> = va.iter().zip(vb).map(|(&a, &b)| a + b).collect();
                    if visible(&key).is_none() {
                        continue;
                    }
                    let fb = factor.floor[vb];
                    let prod = sa.mul(ring, sb);
                    gamma
                        .entry(key.clone())
                        .and_modify(|x| *x = x.add(ring, &prod))
                        .or_insert(prod);
                    chain
                        .entry(key)
                        .and_modify(|x| *x = (*x).min(fa + fb))
                        .or_insert(fa + fb);
                }
            }
            gamma.retain(|_, s| !s.is_zero(ring));
            acc = ProductExpansion { gamma, chain_floor: chain };
        }
        acc
    }

    /// Builds the matrix of `Ψ^b` on the basis of cone points with degree at
    /// most `bound`: `entry(u, w) = π^{deg w - deg u} γ_{p^b u - w}`.
    pub fn build_psi_matrix(&self, bound: u32) -> Result<PsiMatrix, DworkError> {
        let window = self.window_for(bound);
        let expansion = self.product_expansion(window);
        let basis = self
            .cone
            .enumerate_lattice_points(&BigRational::from(BigInt::from(bound)));
        if basis.len() > 128 {
            return Err(DworkError::MatrixTooLarge(basis.len()));
        }
        let p_b = self.params.p.pow(self.params.b as u32);
        let scaled_deg: Vec<i64> = basis
            .iter()
            .map(|pt| {
                let deg = pt.degree.as_finite().expect("basis point");
                (deg * BigInt::from(self.d as i64)).to_integer().to_i64().unwrap()
            })
            .collect();
        let mut entries = Vec::with_capacity(basis.len());
        let mut entry_keys = Vec::with_capacity(basis.len());
        for (ui, u_pt) in basis.iter().enumerate() {
            let mut row = Vec::with_capacity(basis.len());
            let mut row_keys = Vec::with_capacity(basis.len());
            for (wi, w_pt) in basis.iter().enumerate() {
                let key: Vec<i64> = u_pt
                    .coords
                    .iter()
                    .zip(&w_pt.coords)
                    .map(|(&u, &w)| u * p_b as i64 - w)
                    .collect();
                match expansion.gamma.get(&key) {
                    None => {
                        row.push(RamifiedSeries::zero(&self.ring, window));
                        row_keys.push(None);
                    }
                    Some(g) => {
                        let delta = scaled_deg[wi] - scaled_deg[ui];
                        let scaled = g.shift(&self.ring, delta)?;
                        row_keys.push(Some((key.clone(), expansion.chain_floor[&key])));
                        row.push(scaled);
                    }
                }
            }
            entries.push(row);
            entry_keys.push(row_keys);
        }
        Ok(PsiMatrix { bound, basis, entries, window, entry_keys })
    }

    /// `det(1 - Ψ^b s)` up to `s^K` over the ρ-series ring (division-free
    /// Berkowitz), then converted to `T`-series at the target precision with
    /// grid and Galois-invariance checks.
    pub fn char_series(&self, mat: &PsiMatrix) -> Result<SPolynomial, DworkError> {
        let raw = self.berkowitz(&mat.entries, mat.window);
        let k = self.params.k_max;
        let ctx = SeriesCtx::new(
            crate::padic::ZpmCtx::new(self.params.p, self.params.m_target)?,
            self.params.n_len,
        );
        let mut coeffs = Vec::with_capacity(k + 1);
        for i in 0..=k {
            match raw.get(i) {
                Some(r) => coeffs.push(r.to_t_series(
                    &self.ring,
                    self.d,
                    &self.pi,
                    self.params.m_target,
                )?),
                None => coeffs.push(TruncatedSeries::zero(ctx)),
            }
        }
        Ok(SPolynomial { coeffs })
    }

    /// Characteristic-polynomial coefficients of `det(1 - M s)` by the
    /// Samuelson–Berkowitz recurrence; index = power of `s`.
    fn berkowitz(&self, m: &[Vec<RamifiedSeries>], window: usize) -> Vec<RamifiedSeries> {
        let ring = &self.ring;
        let n = m.len();
        let one = {
            let mut s = RamifiedSeries::zero(ring, window);
            s.coeffs[0] = ring.one();
            s
        };
        if n == 0 {
            return vec![one];
        }
        let neg = |s: &RamifiedSeries| {
            RamifiedSeries { coeffs: s.coeffs.iter().map(|c| ring.neg(c)).collect() }
        };
        let mut c = vec![one.clone(), neg(&m[0][0])];
        for i in 1..n {
            // Toeplitz column: t_0 = 1, t_1 = -a, t_k = -(R · M_prev^{k-2} · C)
            let mut t = Vec::with_capacity(i + 2);
            t.push(one.clone());
            t.push(neg(&m[i][i]));
            let mut v: Vec<RamifiedSeries> = (0..i).map(|r| m[r][i].clone()).collect();
            for k in 2..=(i + 1) {
                if k > 2 {
                    // v ← M_prev · v
                    let mut next = Vec::with_capacity(i);
                    for r in 0..i {
                        let mut acc = RamifiedSeries::zero(ring, window);
                        for (col, item) in v.iter().enumerate() {
                            if m[r][col].is_zero(ring) || item.is_zero(ring) {
                                continue;
                            }
                            acc = acc.add(ring, &m[r][col].mul(ring, item));
                        }
                        next.push(acc);
                    }
                    v = next;
                }
                let mut dot = RamifiedSeries::zero(ring, window);
                for (col, item) in v.iter().enumerate() {
                    if m[i][col].is_zero(ring) || item.is_zero(ring) {
                        continue;
                    }
                    dot = dot.add(ring, &m[i][col].mul(ring, item));
                }
                t.push(neg(&dot));
            }
            let mut next_c = vec![RamifiedSeries::zero(ring, window); i + 2];
            for (mi, item) in next_c.iter_mut().enumerate() {
                for (ki, tk) in t.iter().enumerate().take(mi + 1) {
                    if mi - ki >= c.len() {
                        continue;
                    }
                    if tk.is_zero(ring) || c[mi - ki].is_zero(ring) {
                        continue;
                    }
                    *item = item.add(ring, &tk.mul(ring, &c[mi - ki]));
                }
            }
            c = next_c;
        }
        c
    }
}

/// Outcome of the stabilization loop: the adopted characteristic series and
/// the bounds at which it was seen unchanged.
pub struct StabilizedSeries {
    /// First bound at which the series matched the previous one.
    pub bound: u32,
    /// The extra re-verification bound (`bound + 1`), also matching.
    pub reverified_at: u32,
    pub series: SPolynomial,
    pub matrix: PsiMatrix,
}

/// Grows the basis degree bound until the first `K` coefficients of the
/// characteristic series stop changing mod `(p^{M_target}, T^N)`, then
/// re-verifies at one more bound.
pub fn stabilize_truncation(ctx: &DworkCtx) -> Result<StabilizedSeries, DworkError> {
    if ctx.params.k_max == 0 {
        // nothing beyond the constant coefficient: the series is 1
        let mat = ctx.build_psi_matrix(1)?;
        let series = ctx.char_series(&mat)?;
        return Ok(StabilizedSeries { bound: 1, reverified_at: 1, series, matrix: mat });
    }
    let cap = ctx.params.bound_cap;
    let mut last_err: Option<String> = None;
    let mut prev: Option<(u32, SPolynomial, PsiMatrix)> = None;
    for bound in 1..=cap {
        let mat = ctx.build_psi_matrix(bound)?;
        match ctx.char_series(&mat) {
            Ok(series) => {
                if let Some((_, prev_series, _)) = &prev {
                    if *prev_series == series {
                        // re-verify once more
                        let mat_next = ctx.build_psi_matrix(bound + 1)?;
                        let series_next = ctx.char_series(&mat_next)?;
                        if series_next == series {
                            return Ok(StabilizedSeries {
                                bound,
                                reverified_at: bound + 1,
                                series,
                                matrix: mat,
                            });
                        }
                        last_err = Some("re-verification at bound+1 changed the series".into());
                    }
                }
                prev = Some((bound, series, mat));
            }
            Err(DworkError::Tseries(e))
                if matches!(
                    e,
                    TseriesError::OffGridCoefficient { .. }
                        | TseriesError::NonScalarCoefficient { .. }
                ) =>
            {
                // truncation still too small for the tail to clear the window
                last_err = Some(e.to_string());
                prev = None;
            }
            Err(e) => return Err(e),
        }
    }
    Err(DworkError::NoStabilization { cap, last: last_err })
}

/// The reindexing view for a norm-form series: keep abscissae divisible by
/// `b` and divide them by `b`.
pub fn np_from_norm_form(points: &NewtonPointSet, b: usize) -> NewtonPointSet {
    NewtonPointSet::new(
        points
            .points
            .iter()
            .filter(|p| p.abscissa % b == 0)
            .map(|p| NewtonPoint { abscissa: p.abscissa / b, ord: p.ord })
            .collect(),
    )
}

/// One failed entry estimate.
#[derive(Debug, Clone)]
pub struct EntryFinding {
    pub kind: &'static str,
    pub location: String,
    pub observed_ord: Option<usize>,
    pub required: usize,
}

/// Result of checking the `⌈deg⌉` estimates on every stored γ and matrix
/// entry. Violations are findings, not errors.
#[derive(Debug, Default)]
pub struct EntryBoundReport {
    pub gamma_checked: usize,
    pub entries_checked: usize,
    pub zero_entries: usize,
    pub findings: Vec<EntryFinding>,
}

/// Checks, at the target precision:
/// - every γ of every twisted expansion has `ord_π ≥ ⌈deg(w)⌉` (in the
///   substituted variables, `ord_π ≥ ⌈deg(v)/p^i⌉`);
/// - every matrix entry's unscaled γ has `ord_π` at least its chain floor
///   (`= ⌈deg(p·u - w)⌉` when `b = 1`).
pub fn verify_entry_bounds(ctx: &DworkCtx, mat: &PsiMatrix) -> EntryBoundReport {
    let mut report = EntryBoundReport::default();
    let window = mat.window;
    for twist in 0..ctx.params.b {
        let expansion = ctx.expand_ef(twist, window);
        for (v, series) in &expansion.gamma {
            report.gamma_checked += 1;
            let floor = expansion.floor[v] as usize * ctx.d;
            let ord = series.ord_rho(&ctx.ring, ctx.params.m_target);
            if let Some(o) = ord {
                if o < floor {
                    report.findings.push(EntryFinding {
                        kind: "gamma-floor",
                        location: format!("twist {twist}, monomial {v:?}"),
                        observed_ord: Some(o),
                        required: floor,
                    });
                }
            }
        }
    }
    let expansion = ctx.product_expansion(window);
    for (ui, _) in mat.basis.iter().enumerate() {
        for (wi, _) in mat.basis.iter().enumerate() {
            match &mat.entry_keys[ui][wi] {
                None => report.zero_entries += 1,
                Some((key, chain_floor)) => {
                    report.entries_checked += 1;
                    let floor = *chain_floor as usize * ctx.d;
                    let ord = expansion.gamma[key].ord_rho(&ctx.ring, ctx.params.m_target);
                    if let Some(o) = ord {
                        if o < floor {
                            report.findings.push(EntryFinding {
                                kind: "entry-chain-floor",
                                location: format!("entry ({ui}, {wi}), key {key:?}"),
                                observed_ord: Some(o),
                                required: floor,
                            });
                        }
                    }
                }
            }
        }
    }
    report
}

/// Newton points `(m, ord_T(c_m))` of the stabilized series.
pub fn newton_points(series: &SPolynomial, m_target: u32) -> NewtonPointSet {
    NewtonPointSet::new(
        series
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| NewtonPoint { abscissa: i, ord: c.ord_t(m_target) })
            .collect(),
    )
}
