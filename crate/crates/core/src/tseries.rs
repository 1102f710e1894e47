//! Truncated power series over `Z/p^M`: the ring `(Z/p^M)[[T]]/(T^N)`, its
//! ramified variant in `ρ` with `ρ^D = π`, the Artin–Hasse series, the
//! uniformizer `π` with `E(π) = 1 + T`, p-adic binomial powers of `1 + T`,
//! and the exp-assembly used to build C- and L-functions.
//!
//! Multiplication is schoolbook; the truncation lengths in play never make
//! that a bottleneck.

use crate::padic::{RingElem, UnramifiedRing, Zpm, ZpmCtx};
use crate::polygons::OrdEntry;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TseriesError {
    #[error("series metadata mismatch: {0}")]
    MetadataMismatch(String),
    #[error("Artin–Hasse coefficient has p in its reduced denominator (index {0})")]
    NonIntegralArtinHasse(usize),
    #[error("p-precision too low for T-precision: need exponent ≥ {required}, have {have}")]
    PrecisionTooLow { required: u32, have: u32 },
    #[error("non-integral series: coefficient of s^{s_index} not divisible by p^{needed}")]
    NonIntegral { s_index: usize, needed: u32 },
    #[error("series inverse requires a unit constant term")]
    NotInvertible,
    #[error("ρ-exponent {rho_index} is not a multiple of the ramification in a final coefficient")]
    OffGridCoefficient { rho_index: usize },
    #[error("coefficient at ρ^{rho_index} is not Galois-invariant within precision")]
    NonScalarCoefficient { rho_index: usize },
    #[error("negative ρ-shift hit a nonzero coefficient (entry bound broken)")]
    NegativeShiftNonzero,
    #[error(transparent)]
    Padic(#[from] crate::padic::PadicError),
}

/// Metadata of a truncated series: coefficients in `Z/p^M`, `len` stored
/// `T`-powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesCtx {
    pub scalars: ZpmCtx,
    pub len: usize,
}

impl SeriesCtx {
    pub fn new(scalars: ZpmCtx, len: usize) -> Self {
        assert!(len >= 1);
        SeriesCtx { scalars, len }
    }
}

/// An element of `(Z/p^M)[[T]]/(T^N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    pub ctx: SeriesCtx,
    pub coeffs: Vec<u64>,
}

impl TruncatedSeries {
    pub fn zero(ctx: SeriesCtx) -> Self {
        TruncatedSeries { ctx, coeffs: vec![0; ctx.len] }
    }

    pub fn one(ctx: SeriesCtx) -> Self {
        let mut s = Self::zero(ctx);
        s.coeffs[0] = 1 % ctx.scalars.modulus;
        s
    }

    pub fn from_coeffs(ctx: SeriesCtx, mut coeffs: Vec<u64>) -> Self {
        coeffs.resize(ctx.len, 0);
        for c in coeffs.iter_mut() {
            *c %= ctx.scalars.modulus;
        }
        TruncatedSeries { ctx, coeffs }
    }

    pub fn t(ctx: SeriesCtx) -> Self {
        let mut s = Self::zero(ctx);
        if ctx.len > 1 {
            s.coeffs[1] = 1 % ctx.scalars.modulus;
        }
        s
    }

    fn check_ctx(&self, other: &Self) {
        assert_eq!(
            self.ctx, other.ctx,
            "mixing series with different (p, M, N) is an error"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_ctx(other);
        let z = self.ctx.scalars;
        TruncatedSeries {
            ctx: self.ctx,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| z.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_ctx(other);
        let z = self.ctx.scalars;
        TruncatedSeries {
            ctx: self.ctx,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| z.sub(a, b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        let z = self.ctx.scalars;
        TruncatedSeries {
            ctx: self.ctx,
            coeffs: self.coeffs.iter().map(|&a| z.neg(a)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_ctx(other);
        let z = self.ctx.scalars;
        let n = self.ctx.len;
        let mut out = vec![0u64; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().take(n - i).enumerate() {
                if b == 0 {
                    continue;
                }
                out[i + j] = z.add(out[i + j], z.mul(a, b));
            }
        }
        TruncatedSeries { ctx: self.ctx, coeffs: out }
    }

    pub fn scalar_mul(&self, c: u64) -> Self {
        let z = self.ctx.scalars;
        TruncatedSeries {
            ctx: self.ctx,
            coeffs: self.coeffs.iter().map(|&a| z.mul(a, c)).collect(),
        }
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn inverse(&self) -> Result<Self, TseriesError> {
        let z = self.ctx.scalars;
        let inv0 = z.inv(self.coeffs[0]).map_err(|_| TseriesError::NotInvertible)?;
        let mut out = vec![0u64; self.ctx.len];
        out[0] = inv0;
        for j in 1..self.ctx.len {
            let mut acc = 0u64;
            for i in 1..=j {
                acc = z.add(acc, z.mul(self.coeffs[i], out[j - i]));
            }
            out[j] = z.neg(z.mul(inv0, acc));
        }
        Ok(TruncatedSeries { ctx: self.ctx, coeffs: out })
    }

    /// Substitutes `inner` (zero constant term) into this series.
    pub fn compose(&self, inner: &Self) -> Self {
        self.check_ctx(inner);
        assert_eq!(inner.coeffs[0], 0, "composition needs a zero constant term");
        let mut acc = TruncatedSeries::zero(self.ctx);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] = self.ctx.scalars.add(acc.coeffs[0], c);
        }
        acc
    }

    /// First index with a residue that is nonzero mod `p^{target}`; a marker
    /// `≥ len` when all stored coefficients vanish at that precision. A
    /// finite answer certifies the true `ord_T` is at most that index.
    pub fn ord_t(&self, target_exp: u32) -> OrdEntry {
        let t_mod = self.ctx.scalars.p.pow(target_exp);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c % t_mod != 0 {
                return OrdEntry::Finite(i as i64);
            }
        }
        OrdEntry::AtLeast(self.ctx.len as u32)
    }

    /// Reduces coefficients to a coarser p-precision.
    pub fn truncate_precision(&self, target_exp: u32) -> Self {
        let z = ZpmCtx::new(self.ctx.scalars.p, target_exp).expect("coarser precision");
        TruncatedSeries {
            ctx: SeriesCtx::new(z, self.ctx.len),
            coeffs: self.coeffs.iter().map(|&c| c % z.modulus).collect(),
        }
    }

    /// Shortens the T-window.
    pub fn truncate_len(&self, len: usize) -> Self {
        assert!(len <= self.ctx.len);
        TruncatedSeries {
            ctx: SeriesCtx::new(self.ctx.scalars, len),
            coeffs: self.coeffs[..len].to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// `v_p(n!)` by Legendre's formula.
pub fn vp_factorial(p: u64, n: u64) -> u32 {
    let mut total = 0u64;
    let mut q = p;
    while q <= n {
        total += n / q;
        match q.checked_mul(p) {
            Some(next) => q = next,
            None => break,
        }
    }
    total as u32
}

fn reduce_rational(x: &BigRational, z: &ZpmCtx) -> Option<u64> {
    let p = BigInt::from(z.p);
    let m = BigInt::from(z.modulus);
    let denom = x.denom();
    if (denom % &p).is_zero() {
        return None;
    }
    let num = ((x.numer() % &m) + &m) % &m;
    let den = ((denom % &m) + &m) % &m;
    let num_u: u64 = num.try_into().expect("reduced numerator fits u64");
    let den_u: u64 = den.try_into().expect("reduced denominator fits u64");
    Some(z.mul(num_u, z.inv(den_u).expect("denominator prime to p")))
}

/// The Artin–Hasse exponential `E(t) = exp(Σ_i t^{p^i}/p^i)` to `len` terms,
/// computed exactly over the rationals and reduced mod `p^M`.
pub fn artin_hasse(scalars: ZpmCtx, len: usize) -> Result<TruncatedSeries, TseriesError> {
    let lambdas = artin_hasse_rational(scalars.p, len);
    let mut coeffs = Vec::with_capacity(len);
    for (i, lam) in lambdas.iter().enumerate() {
        let r = reduce_rational(lam, &scalars).ok_or(TseriesError::NonIntegralArtinHasse(i))?;
        coeffs.push(r);
    }
    Ok(TruncatedSeries::from_coeffs(SeriesCtx::new(scalars, len), coeffs))
}

/// Exact rational coefficients of `E(t)` up to `t^{len-1}`.
pub fn artin_hasse_rational(p: u64, len: usize) -> Vec<BigRational> {
    // g(t) = Σ t^{p^i}/p^i, then exp by the ODE recurrence k·e_k = Σ j·g_j·e_{k-j}.
    let mut g = vec![BigRational::zero(); len];
    let mut q: u128 = 1;
    while (q as usize) < len {
        g[q as usize] = BigRational::new(BigInt::one(), BigInt::from(q));
        match q.checked_mul(p as u128) {
            Some(next) => q = next,
            None => break,
        }
    }
    let mut e = vec![BigRational::zero(); len];
    e[0] = BigRational::one();
    for k in 1..len {
        let mut acc = BigRational::zero();
        for j in 1..=k {
            if !g[j].is_zero() {
                acc += &g[j] * BigRational::from(BigInt::from(j)) * &e[k - j];
            }
        }
        e[k] = acc / BigRational::from(BigInt::from(k));
    }
    e
}

/// The uniformizer `π` as a series in `T`, defined by `E(π) = 1 + T`;
/// obtained by reverting `E(t) - 1` term by term (`λ_1 = 1` makes every step
/// division-free).
pub fn pi_from_t(scalars: ZpmCtx, len: usize) -> Result<TruncatedSeries, TseriesError> {
    let e = artin_hasse(scalars, len)?;
    let ctx = SeriesCtx::new(scalars, len);
    let target = {
        let mut t = TruncatedSeries::one(ctx);
        if len > 1 {
            t.coeffs[1] = 1 % scalars.modulus;
        }
        t
    };
    let mut pi = TruncatedSeries::t(ctx);
    for j in 2..len {
        let err = e.compose(&pi).sub(&target);
        // ∂(coefficient j)/∂π_j = λ_1 = 1
        pi.coeffs[j] = scalars.sub(pi.coeffs[j], err.coeffs[j]);
    }
    debug_assert!(e.compose(&pi).sub(&target).is_zero());
    Ok(pi)
}

/// `(1 + T)^c = Σ_i C(c, i) T^i` for a p-adic integer `c` given mod
/// `p^{M_c}`. Needs `M_c ≥ out_exp + v_p((len-1)!)` so every binomial
/// coefficient is determined at the output precision.
pub fn binomial_power(c: Zpm, out: SeriesCtx) -> Result<TruncatedSeries, TseriesError> {
    let zc = c.ctx;
    assert_eq!(zc.p, out.scalars.p);
    let required = out.scalars.exp + vp_factorial(zc.p, out.len as u64 - 1);
    if zc.exp < required {
        return Err(TseriesError::PrecisionTooLow { required, have: zc.exp });
    }
    let mut coeffs = vec![0u64; out.len];
    coeffs[0] = 1 % out.scalars.modulus;
    let mut falling = 1u64; // c(c-1)…(c-i+1) mod p^{M_c}
    let mut unit_fact = 1u64; // i! / p^{v_p(i!)} mod p^{M_c}
    let mut vp_fact = 0u32;
    for i in 1..out.len as u64 {
        let term = zc.sub(c.value, zc.reduce_u128((i - 1) as u128));
        falling = zc.mul(falling, term);
        let mut ii = i;
        while ii % zc.p == 0 {
            ii /= zc.p;
            vp_fact += 1;
        }
        unit_fact = zc.mul(unit_fact, zc.reduce_u128(ii as u128));
        let q = zc
            .div_pow_p(falling, vp_fact)
            .expect("falling factorial divisible by p^{v_p(i!)}");
        let binom = zc.mul(q, zc.inv(unit_fact).expect("unit part of factorial"));
        coeffs[i as usize] = binom % out.scalars.modulus;
    }
    Ok(TruncatedSeries { ctx: out, coeffs })
}

/// Polynomial in `s` with truncated-series coefficients; `coeffs[i]` is the
/// raw coefficient of `s^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SPolynomial {
    pub coeffs: Vec<TruncatedSeries>,
}

impl SPolynomial {
    pub fn one(ctx: SeriesCtx, k: usize) -> Self {
        let mut coeffs = vec![TruncatedSeries::zero(ctx); k + 1];
        coeffs[0] = TruncatedSeries::one(ctx);
        SPolynomial { coeffs }
    }

    pub fn ctx(&self) -> SeriesCtx {
        self.coeffs[0].ctx
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Product truncated at the common `s`-degree bound.
    pub fn mul(&self, other: &Self) -> Self {
        let k = self.degree_bound().min(other.degree_bound());
        let ctx = self.ctx();
        let mut out = vec![TruncatedSeries::zero(ctx); k + 1];
        for i in 0..=k {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(k - i) {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&self.coeffs[i].mul(&other.coeffs[j]));
            }
        }
        SPolynomial { coeffs: out }
    }

    /// Inverse as a power series in `s` (constant term must be invertible).
    pub fn inverse(&self) -> Result<Self, TseriesError> {
        let k = self.degree_bound();
        let inv0 = self.coeffs[0].inverse()?;
        let mut out = vec![TruncatedSeries::zero(self.ctx()); k + 1];
        out[0] = inv0.clone();
        for j in 1..=k {
            let mut acc = TruncatedSeries::zero(self.ctx());
            for i in 1..=j {
                acc = acc.add(&self.coeffs[i].mul(&out[j - i]));
            }
            out[j] = inv0.mul(&acc).neg();
        }
        Ok(SPolynomial { coeffs: out })
    }

    /// Integer power, negative exponents through the series inverse.
    pub fn pow(&self, e: i64) -> Result<Self, TseriesError> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = SPolynomial::one(self.ctx(), self.degree_bound());
        let mut cur = base;
        let mut e = e.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&cur);
            }
            e >>= 1;
            if e > 0 {
                cur = cur.mul(&cur);
            }
        }
        Ok(acc)
    }

    /// Substitutes `s ↦ factor·s`.
    pub fn rescale_s(&self, factor: u64) -> Self {
        let z = self.ctx().scalars;
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut f = 1u64 % z.modulus;
        for c in &self.coeffs {
            out.push(c.scalar_mul(f));
            f = z.mul(f, factor % z.modulus);
        }
        SPolynomial { coeffs: out }
    }

    /// Reduces every coefficient mod `(p^{target}, T^{len})`.
    pub fn reduced(&self, target_exp: u32, len: usize) -> Self {
        SPolynomial {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.truncate_len(len.min(c.ctx.len)).truncate_precision(target_exp))
                .collect(),
        }
    }
}

/// Result of the divided-power exponential: the `s`-polynomial at the full
/// working precision and the guaranteed p-precision exponent per `s`-index.
#[derive(Debug, Clone)]
pub struct DividedExp {
    pub series: SPolynomial,
    pub precision: Vec<u32>,
}

/// `exp(Σ_k scale_k · b_k · s^k / k)` truncated at `s^K` with `K` the number
/// of terms (the empty product gives 1), by the recurrence
/// `j·c_j = Σ_k (scale_k b_k)·c_{j-k}`. Division by `j` costs `v_p(j)`
/// p-digits; the per-index ledger records the guarantee. Every division must
/// come out exact at the stored precision; a failure means the true series
/// is not integral there or the padding was insufficient.
pub fn exp_divided_sum(
    ctx: SeriesCtx,
    terms: &[(u64, TruncatedSeries)],
    m_target: u32,
) -> Result<DividedExp, TseriesError> {
    for (_, b) in terms {
        if b.ctx != ctx {
            return Err(TseriesError::MetadataMismatch("exp_divided_sum inputs".into()));
        }
    }
    let z = ctx.scalars;
    let k_max = terms.len();
    let mut coeffs = vec![TruncatedSeries::zero(ctx); k_max + 1];
    coeffs[0] = TruncatedSeries::one(ctx);
    let mut precision = vec![z.exp; k_max + 1];
    for j in 1..=k_max {
        let mut sum = TruncatedSeries::zero(ctx);
        for k in 1..=j {
            let (scale, b) = &terms[k - 1];
            sum = sum.add(&b.scalar_mul(*scale).mul(&coeffs[j - k]));
        }
        let mut vj = 0u32;
        let mut jj = j as u64;
        while jj % z.p == 0 {
            jj /= z.p;
            vj += 1;
        }
        let unit = z.inv(jj % z.modulus).expect("unit part of j");
        let mut c = TruncatedSeries::zero(ctx);
        for (i, &s) in sum.coeffs.iter().enumerate() {
            let q = z
                .div_pow_p(s, vj)
                .ok_or(TseriesError::NonIntegral { s_index: j, needed: vj })?;
            c.coeffs[i] = z.mul(q, unit);
        }
        precision[j] = precision[j - 1].saturating_sub(vj);
        coeffs[j] = c;
    }
    if let Some(&min) = precision.iter().min() {
        if min < m_target {
            return Err(TseriesError::PrecisionTooLow { required: m_target, have: min });
        }
    }
    Ok(DividedExp { series: SPolynomial { coeffs }, precision })
}

/// A series in `ρ` (with `ρ^D = π`) whose coefficients live in an unramified
/// ring; index = ρ-power, truncated at the window length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamifiedSeries {
    pub coeffs: Vec<RingElem>,
}

impl RamifiedSeries {
    pub fn zero(ring: &UnramifiedRing, window: usize) -> Self {
        RamifiedSeries { coeffs: vec![ring.zero(); window] }
    }

    pub fn window(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self, ring: &UnramifiedRing) -> bool {
        self.coeffs.iter().all(|c| ring.is_zero(c))
    }

    pub fn add(&self, ring: &UnramifiedRing, other: &Self) -> Self {
        debug_assert_eq!(self.window(), other.window());
        RamifiedSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| ring.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, ring: &UnramifiedRing, other: &Self) -> Self {
        debug_assert_eq!(self.window(), other.window());
        RamifiedSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| ring.sub(a, b))
                .collect(),
        }
    }

    pub fn mul(&self, ring: &UnramifiedRing, other: &Self) -> Self {
        debug_assert_eq!(self.window(), other.window());
        let w = self.window();
        let mut out = RamifiedSeries::zero(ring, w);
        for (i, a) in self.coeffs.iter().enumerate() {
            if ring.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(w - i).enumerate() {
                if ring.is_zero(b) {
                    continue;
                }
                let prod = ring.mul(a, b);
                out.coeffs[i + j] = ring.add(&out.coeffs[i + j], &prod);
            }
        }
        out
    }

    /// Shifts all exponents by `delta` ρ-powers. Coefficients pushed below
    /// zero must vanish; anything pushed past the window is truncated.
    pub fn shift(&self, ring: &UnramifiedRing, delta: i64) -> Result<Self, TseriesError> {
        let w = self.window();
        let mut out = RamifiedSeries::zero(ring, w);
        for (i, c) in self.coeffs.iter().enumerate() {
            if ring.is_zero(c) {
                continue;
            }
            let target = i as i64 + delta;
            if target < 0 {
                return Err(TseriesError::NegativeShiftNonzero);
            }
            if (target as usize) < w {
                out.coeffs[target as usize] = c.clone();
            }
        }
        Ok(out)
    }

    /// Smallest ρ-exponent whose coefficient is nonzero mod `p^{target}`.
    pub fn ord_rho(&self, ring: &UnramifiedRing, target_exp: u32) -> Option<usize> {
        let t_mod = ring.scalars.p.pow(target_exp);
        self.coeffs
            .iter()
            .position(|c| c.iter().any(|&x| x % t_mod != 0))
    }

    /// Converts a ρ-series that is supported on the `D`-grid with scalar
    /// (Galois-invariant) coefficients into a `T`-series, substituting the
    /// uniformizer series `π(T)`. Both checks happen at the target precision.
    pub fn to_t_series(
        &self,
        ring: &UnramifiedRing,
        d: usize,
        pi: &TruncatedSeries,
        target_exp: u32,
    ) -> Result<TruncatedSeries, TseriesError> {
        let t_mod = ring.scalars.p.pow(target_exp);
        let n_len = pi.ctx.len;
        let mut pi_coeffs = vec![0u64; n_len];
        // indices at or beyond ρ^{D·N} sit outside the T-window and carry no
        // information at this precision
        for (i, c) in self.coeffs.iter().enumerate().take(d * n_len) {
            let visible_scalar = c[0] % t_mod != 0;
            let visible_higher = c[1..].iter().any(|&x| x % t_mod != 0);
            if i % d != 0 {
                if visible_scalar || visible_higher {
                    return Err(TseriesError::OffGridCoefficient { rho_index: i });
                }
                continue;
            }
            if visible_higher {
                return Err(TseriesError::NonScalarCoefficient { rho_index: i });
            }
            pi_coeffs[i / d] = c[0] % t_mod;
        }
        // substitute π(T) into the polynomial in π
        let out_ctx = SeriesCtx::new(ZpmCtx::new(ring.scalars.p, target_exp)?, n_len);
        let pi_t = pi.truncate_precision(target_exp);
        let poly = TruncatedSeries::from_coeffs(out_ctx, pi_coeffs);
        Ok(poly.compose(&pi_t))
    }
}
