//! Exact arithmetic in `Z/p^M`, finite fields `F_{p^r}`, and unramified
//! extensions `Z_q mod p^M` in a fixed polynomial basis.
//!
//! The extension modulus is always the lexicographically smallest monic
//! irreducible polynomial of the requested degree over `F_p` (constant term
//! compared last), lifted coefficientwise to `[0, p)`. This gives
//! reproducible towers without external polynomial tables.

use std::fmt;

/// Residue fields larger than this are rejected up front.
pub const RESIDUE_FIELD_BUDGET: u64 = 10_000_000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p^M = {p}^{exp} does not fit the word-sized residue representation")]
    PrecisionOverflow { p: u64, exp: u32 },
    #[error("residue field size p^r = {size} exceeds the budget {RESIDUE_FIELD_BUDGET}")]
    BudgetExceeded { size: u128 },
    #[error("Teichmüller lift of zero is not defined here")]
    ZeroTeichmuller,
    #[error("element is not a unit")]
    NotAUnit,
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d as u128 * d as u128 <= n as u128 {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// The context `(p, M)` of the ring `Z/p^M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZpmCtx {
    pub p: u64,
    pub exp: u32,
    pub modulus: u64,
}

impl ZpmCtx {
    pub fn new(p: u64, exp: u32) -> Result<Self, PadicError> {
        if !is_prime_u64(p) {
            return Err(PadicError::NotPrime(p));
        }
        let mut modulus: u64 = 1;
        for _ in 0..exp {
            modulus = modulus
                .checked_mul(p)
                .filter(|&m| m < (1u64 << 62))
                .ok_or(PadicError::PrecisionOverflow { p, exp })?;
        }
        Ok(ZpmCtx { p, exp, modulus })
    }

    pub fn reduce_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.modulus as i64) as u64
    }

    pub fn reduce_u128(&self, v: u128) -> u64 {
        (v % self.modulus as u128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a as u128 * b as u128 % self.modulus as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1u64 % self.modulus;
        base %= self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit (residue prime to `p`).
    pub fn inv(&self, a: u64) -> Result<u64, PadicError> {
        if a % self.p == 0 {
            return Err(PadicError::NotAUnit);
        }
        // extended Euclid on (a, p^M)
        let (mut r0, mut r1) = (self.modulus as i128, (a % self.modulus) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        Ok(s0.rem_euclid(self.modulus as i128) as u64)
    }

    /// `v_p` of a residue; `exp` when the residue is zero.
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.exp;
        }
        let mut v = 0;
        let mut a = a;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// Exact division by `p^k`; the residue must be divisible.
    pub fn div_pow_p(&self, a: u64, k: u32) -> Option<u64> {
        let mut a = a;
        for _ in 0..k {
            if a % self.p != 0 {
                return None;
            }
            a /= self.p;
        }
        Some(a)
    }

    /// Reduce a residue to a coarser precision over the same prime.
    pub fn truncate_to(&self, a: u64, target: &ZpmCtx) -> u64 {
        debug_assert_eq!(self.p, target.p);
        debug_assert!(target.exp <= self.exp);
        a % target.modulus
    }
}

/// An element of `Z/p^M`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Zpm {
    pub ctx: ZpmCtx,
    pub value: u64,
}

impl fmt::Debug for Zpm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.value, self.ctx.p, self.ctx.exp)
    }
}

impl Zpm {
    pub fn new(ctx: ZpmCtx, value: u64) -> Self {
        Zpm { ctx, value: value % ctx.modulus }
    }
}

/// The finite field `F_{p^r}` in the basis `1, x, …, x^{r-1}` modulo the
/// canonical irreducible polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqCtx {
    pub p: u64,
    pub r: usize,
    /// Monic, length `r + 1`, coefficients mod `p`, index = degree.
    pub modulus: Vec<u64>,
}

/// Field element: coefficient vector of length `r`, index = power of the
/// generator.
pub type FqElem = Vec<u64>;

impl FqCtx {
    /// Field with the lexicographically smallest monic irreducible modulus of
    /// degree `r`.
    pub fn new(p: u64, r: usize) -> Result<Self, PadicError> {
        if !is_prime_u64(p) {
            return Err(PadicError::NotPrime(p));
        }
        let size = (p as u128).pow(r as u32);
        if size > RESIDUE_FIELD_BUDGET as u128 {
            return Err(PadicError::BudgetExceeded { size });
        }
        let modulus = smallest_irreducible(p, r);
        Ok(FqCtx { p, r, modulus })
    }

    pub fn order(&self) -> u64 {
        (self.p).pow(self.r as u32)
    }

    pub fn zero(&self) -> FqElem {
        vec![0; self.r]
    }

    pub fn one(&self) -> FqElem {
        let mut e = vec![0; self.r];
        e[0] = 1;
        e
    }

    /// The class of `x` (zero in the prime-field case, where the modulus is
    /// `x` itself).
    pub fn gen_class(&self) -> FqElem {
        let mut e = vec![0; self.r];
        if self.r > 1 {
            e[1] = 1;
        }
        e
    }

    pub fn from_scalar(&self, c: u64) -> FqElem {
        let mut e = vec![0; self.r];
        e[0] = c % self.p;
        e
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        a.iter().map(|&x| if x == 0 { 0 } else { self.p - x }).collect()
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let mut prod = vec![0u64; 2 * self.r - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        self.reduce(prod)
    }

    fn reduce(&self, mut prod: Vec<u64>) -> FqElem {
        for i in (self.r..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..self.r {
                let sub = c * self.modulus[j] % self.p;
                prod[i - self.r + j] = (prod[i - self.r + j] + self.p - sub) % self.p;
            }
        }
        prod.truncate(self.r);
        prod
    }

    pub fn pow(&self, a: &FqElem, mut e: u64) -> FqElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FqElem) -> Result<FqElem, PadicError> {
        if self.is_zero(a) {
            return Err(PadicError::NotAUnit);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// Evaluates a polynomial with `F_p` coefficients at a field element.
    pub fn eval_poly(&self, poly: &[u64], at: &FqElem) -> FqElem {
        let mut acc = self.zero();
        for &c in poly.iter().rev() {
            acc = self.mul(&acc, at);
            acc[0] = (acc[0] + c) % self.p;
        }
        acc
    }

    /// Element with the given enumeration index: base-`p` digits, constant
    /// coefficient fastest.
    pub fn element_from_index(&self, mut idx: u64) -> FqElem {
        let mut e = vec![0; self.r];
        for c in e.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        e
    }

    /// Smallest-index element of full multiplicative order.
    pub fn multiplicative_generator(&self) -> FqElem {
        let order = self.order() - 1;
        let factors = factor_u64(order);
        'outer: for idx in 1..self.order() {
            let g = self.element_from_index(idx);
            for &(l, _) in &factors {
                if self.pow(&g, order / l) == self.one() {
                    continue 'outer;
                }
            }
            return g;
        }
        unreachable!("a finite field has a multiplicative generator");
    }

    /// Lex-smallest root in this field of the canonical modulus of the
    /// subfield with `sub_degree | r`. Realizes the embedding
    /// `F_{p^sub} → F_{p^r}` by mapping the subfield generator to the root.
    pub fn subfield_root(&self, sub: &FqCtx) -> FqElem {
        debug_assert_eq!(self.p, sub.p);
        debug_assert_eq!(self.r % sub.r, 0);
        if sub.r == 1 {
            // prime-field modulus is x: the root is 0 and the embedding is scalar
            return self.zero();
        }
        let g = self.multiplicative_generator();
        let sub_order = self.p.pow(sub.r as u32) - 1;
        let step = (self.order() - 1) / sub_order;
        let g0 = self.pow(&g, step);
        let mut roots = Vec::new();
        let mut z = self.one();
        for _ in 0..sub_order {
            if self.is_zero(&self.eval_poly(&sub.modulus, &z)) {
                roots.push(z.clone());
            }
            z = self.mul(&z, &g0);
        }
        assert!(!roots.is_empty(), "subfield modulus must have a root");
        roots
            .into_iter()
            .min_by_key(|root| element_index(self.p, root))
            .unwrap()
    }

    /// Applies the embedding determined by `root` to a subfield element.
    pub fn embed(&self, sub_elem: &FqElem, root: &FqElem) -> FqElem {
        self.eval_poly(sub_elem, root)
    }
}

fn element_index(p: u64, e: &FqElem) -> u64 {
    e.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Lexicographically smallest monic irreducible polynomial of degree `r`
/// over `F_p`, comparing `(c_{r-1}, …, c_1, c_0)`.
fn smallest_irreducible(p: u64, r: usize) -> Vec<u64> {
    if r == 1 {
        return vec![0, 1]; // x
    }
    let mut digits = vec![0u64; r]; // digits[i] compared first for i = 0 → c_{r-1}
    loop {
        let mut poly = vec![0u64; r + 1];
        poly[r] = 1;
        for (i, &d) in digits.iter().enumerate() {
            poly[r - 1 - i] = d;
        }
        if is_irreducible(p, &poly) {
            return poly;
        }
        // odometer: last digit (the constant term) varies fastest
        let mut i = r;
        loop {
            assert!(i > 0, "no irreducible polynomial found");
            i -= 1;
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Irreducibility over `F_p`: `x^{p^r} ≡ x (mod f)` and
/// `gcd(x^{p^{r/ℓ}} - x, f) = 1` for each prime `ℓ | r`.
fn is_irreducible(p: u64, poly: &[u64]) -> bool {
    let r = poly.len() - 1;
    let xq = |levels: u32| -> Vec<u64> {
        // x^(p^levels) mod poly by repeated p-th powering
        let mut cur = vec![0u64, 1]; // x
        for _ in 0..levels {
            cur = fp_powmod(p, &cur, p, poly);
        }
        cur
    };
    let x = vec![0u64, 1];
    if fp_poly_sub(p, &xq(r as u32), &x).iter().any(|&c| c != 0) {
        return false;
    }
    for (l, _) in factor_u64(r as u64) {
        let sub = fp_poly_sub(p, &xq((r as u64 / l) as u32), &x);
        let g = fp_poly_gcd(p, &sub, poly);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn fp_poly_trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn fp_poly_sub(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let len = a.len().max(b.len());
    let mut out = vec![0u64; len];
    for i in 0..len {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out[i] = (x + p - y) % p;
    }
    fp_poly_trim(&mut out);
    out
}

fn fp_poly_mulmod(p: u64, a: &[u64], b: &[u64], modulus: &[u64]) -> Vec<u64> {
    let r = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for i in (r..prod.len()).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for j in 0..r {
            let sub = c * modulus[j] % p;
            prod[i - r + j] = (prod[i - r + j] + p - sub) % p;
        }
    }
    prod.truncate(r.max(1));
    fp_poly_trim(&mut prod);
    prod
}

fn fp_powmod(p: u64, base: &[u64], mut e: u64, modulus: &[u64]) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut base = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = fp_poly_mulmod(p, &acc, &base, modulus);
        }
        base = fp_poly_mulmod(p, &base, &base, modulus);
        e >>= 1;
    }
    acc
}

fn fp_poly_gcd(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_poly_trim(&mut a);
    fp_poly_trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let r = fp_poly_rem(p, &a, &b);
        a = b;
        b = r;
    }
    // normalize monic
    let lead = *a.last().unwrap();
    if lead != 0 && lead != 1 {
        let inv = mod_inv_prime(lead, p);
        for c in a.iter_mut() {
            *c = *c * inv % p;
        }
    }
    a
}

fn fp_poly_rem(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut rem = a.to_vec();
    fp_poly_trim(&mut rem);
    let db = b.len() - 1;
    let lead_inv = mod_inv_prime(*b.last().unwrap(), p);
    while !(rem.len() == 1 && rem[0] == 0) && rem.len() > db {
        let shift = rem.len() - 1 - db;
        let factor = *rem.last().unwrap() * lead_inv % p;
        for j in 0..=db {
            let sub = factor * b[j] % p;
            rem[shift + j] = (rem[shift + j] + p - sub) % p;
        }
        fp_poly_trim(&mut rem);
    }
    rem
}

fn mod_inv_prime(a: u64, p: u64) -> u64 {
    // Fermat
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// The unramified ring `Z_{p^r} mod p^M` in the basis `1, x, …, x^{r-1}`,
/// with the canonical modulus lifted coefficientwise from `F_p`.
#[derive(Debug, Clone)]
pub struct UnramifiedRing {
    pub scalars: ZpmCtx,
    pub r: usize,
    /// Monic, length `r + 1`, coefficients in `[0, p)` reduced mod `p^M`.
    pub min_poly: Vec<u64>,
    residue_order: u64,
    trace_form: Vec<u64>,
    frobenius_root: Vec<u64>,
}

/// Ring element: coefficient vector of length `r` over `Z/p^M`.
pub type RingElem = Vec<u64>;

impl UnramifiedRing {
    pub fn new(field: &FqCtx, exp: u32) -> Result<Self, PadicError> {
        let scalars = ZpmCtx::new(field.p, exp)?;
        let min_poly = field.modulus.clone();
        let residue_order = field.order();
        let mut ring = UnramifiedRing {
            scalars,
            r: field.r,
            min_poly,
            residue_order,
            trace_form: Vec::new(),
            frobenius_root: Vec::new(),
        };
        ring.trace_form = ring.compute_trace_form();
        ring.frobenius_root = ring.compute_frobenius_root();
        Ok(ring)
    }

    pub fn residue_field(&self) -> FqCtx {
        FqCtx {
            p: self.scalars.p,
            r: self.r,
            modulus: self.min_poly.clone(),
        }
    }

    pub fn zero(&self) -> RingElem {
        vec![0; self.r]
    }

    pub fn one(&self) -> RingElem {
        let mut e = vec![0; self.r];
        e[0] = 1 % self.scalars.modulus;
        e
    }

    pub fn from_scalar(&self, c: u64) -> RingElem {
        let mut e = vec![0; self.r];
        e[0] = c % self.scalars.modulus;
        e
    }

    pub fn from_fq(&self, a: &FqElem) -> RingElem {
        a.clone()
    }

    pub fn to_fq(&self, a: &RingElem) -> FqElem {
        a.iter().map(|&c| c % self.scalars.p).collect()
    }

    pub fn is_zero(&self, a: &RingElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        a.iter().zip(b).map(|(&x, &y)| self.scalars.add(x, y)).collect()
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> RingElem {
        a.iter().zip(b).map(|(&x, &y)| self.scalars.sub(x, y)).collect()
    }

    pub fn neg(&self, a: &RingElem) -> RingElem {
        a.iter().map(|&x| self.scalars.neg(x)).collect()
    }

    pub fn scalar_mul(&self, c: u64, a: &RingElem) -> RingElem {
        a.iter().map(|&x| self.scalars.mul(c, x)).collect()
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let r = self.r;
        if r == 1 {
            return vec![self.scalars.mul(a[0], b[0])];
        }
        let mut prod = vec![0u64; 2 * r - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = self.scalars.add(prod[i + j], self.scalars.mul(x, y));
            }
        }
        self.reduce(prod)
    }

    fn reduce(&self, mut prod: Vec<u64>) -> RingElem {
        let r = self.r;
        for i in (r..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..r {
                let sub = self.scalars.mul(c, self.min_poly[j]);
                prod[i - r + j] = self.scalars.sub(prod[i - r + j], sub);
            }
        }
        prod.truncate(r);
        prod
    }

    pub fn pow(&self, a: &RingElem, mut e: u64) -> RingElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit, by inversion in the residue field plus Hensel
    /// lifting `x ← x(2 - ax)`.
    pub fn inv(&self, a: &RingElem) -> Result<RingElem, PadicError> {
        let field = self.residue_field();
        let a0 = self.to_fq(a);
        let inv0 = field.inv(&a0)?;
        let mut x = self.from_fq(&inv0);
        let two = self.from_scalar(2);
        let mut prec = 1u32;
        while prec < self.scalars.exp {
            let ax = self.mul(a, &x);
            let corr = self.sub(&two, &ax);
            x = self.mul(&x, &corr);
            prec *= 2;
        }
        debug_assert_eq!(self.mul(a, &x), self.one());
        Ok(x)
    }

    /// Teichmüller lift: the fixed point of `t ↦ t^{p^r}` congruent to `a`.
    pub fn teichmuller(&self, a: &FqElem) -> Result<RingElem, PadicError> {
        let field = self.residue_field();
        if field.is_zero(a) {
            return Err(PadicError::ZeroTeichmuller);
        }
        let mut t = self.from_fq(a);
        for _ in 0..self.scalars.exp {
            t = self.pow(&t, self.residue_order);
        }
        debug_assert_eq!(self.pow(&t, self.residue_order), t);
        Ok(t)
    }

    /// Trace of the multiplication-by-`a` endomorphism, reduced mod `p^M`.
    /// Equals the sum of the Frobenius conjugates.
    pub fn trace(&self, a: &RingElem) -> Zpm {
        let mut acc = 0u64;
        for (j, &c) in a.iter().enumerate() {
            acc = self.scalars.add(acc, self.scalars.mul(c, self.trace_form[j]));
        }
        Zpm::new(self.scalars, acc)
    }

    fn compute_trace_form(&self) -> Vec<u64> {
        // tr_j = trace of multiplication by x^j = Σ_i coeff_i(x^{i+j})
        let mut powers: Vec<RingElem> = Vec::with_capacity(2 * self.r);
        let mut cur = self.one();
        for _ in 0..(2 * self.r - 1) {
            powers.push(cur.clone());
            cur = self.mul_by_x(&cur);
        }
        (0..self.r)
            .map(|j| {
                let mut tr = 0u64;
                for i in 0..self.r {
                    tr = self.scalars.add(tr, powers[i + j][i]);
                }
                tr
            })
            .collect()
    }

    fn mul_by_x(&self, a: &RingElem) -> RingElem {
        let mut prod = vec![0u64; self.r + 1];
        prod[1..=self.r].copy_from_slice(a);
        self.reduce(prod)
    }

    /// The Frobenius `σ`: the ring automorphism lifting `x ↦ x^p`, realized
    /// by sending the basis root to the Hensel lift of its `p`-th power.
    /// Satisfies `σ(ζ) = ζ^p` on Teichmüller representatives.
    pub fn frobenius(&self, a: &RingElem) -> RingElem {
        if self.r == 1 {
            return a.clone();
        }
        // evaluate a at the Frobenius image of the root
        let mut acc = self.zero();
        for &c in a.iter().rev() {
            acc = self.mul(&acc, &self.frobenius_root);
            acc[0] = self.scalars.add(acc[0], c);
        }
        acc
    }

    fn compute_frobenius_root(&self) -> RingElem {
        if self.r == 1 {
            return self.zero();
        }
        // Newton-lift the root of min_poly congruent to x^p mod p.
        let x = {
            let mut e = self.zero();
            e[1] = 1;
            e
        };
        let mut y = self.pow(&x, self.scalars.p);
        loop {
            let fy = self.eval_min_poly(&y);
            if self.is_zero(&fy) {
                break;
            }
            let dfy = self.eval_min_poly_derivative(&y);
            let step = self.mul(&fy, &self.inv(&dfy).expect("separable modulus"));
            y = self.sub(&y, &step);
        }
        y
    }

    fn eval_min_poly(&self, at: &RingElem) -> RingElem {
        let mut acc = self.zero();
        for &c in self.min_poly.iter().rev() {
            acc = self.mul(&acc, at);
            acc[0] = self.scalars.add(acc[0], c % self.scalars.modulus);
        }
        acc
    }

    fn eval_min_poly_derivative(&self, at: &RingElem) -> RingElem {
        let mut acc = self.zero();
        for i in (1..self.min_poly.len()).rev() {
            let c = self.scalars.mul(i as u64 % self.scalars.modulus, self.min_poly[i]);
            acc = self.mul(&acc, at);
            acc[0] = self.scalars.add(acc[0], c);
        }
        acc
    }

    /// Truncates every coefficient to a coarser precision.
    pub fn truncate_elem(&self, a: &RingElem, target: &ZpmCtx) -> RingElem {
        a.iter().map(|&c| self.scalars.truncate_to(c, target)).collect()
    }
}

/// Builds `F_{q^k}` (with `q = p^b`) and the matching unramified ring
/// `Z_{q^k} mod p^M`, both over the canonical degree-`bk` modulus.
pub fn build_field_tower(
    p: u64,
    b: usize,
    k: usize,
    exp: u32,
) -> Result<(FqCtx, UnramifiedRing), PadicError> {
    let field = FqCtx::new(p, b * k)?;
    let ring = UnramifiedRing::new(&field, exp)?;
    Ok((field, ring))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_irreducible_examples() {
        assert_eq!(smallest_irreducible(2, 1), vec![0, 1]); // x
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0, 1]); // x² + 1
        assert_eq!(smallest_irreducible(5, 2), vec![2, 0, 1]); // x² + 2
        assert_eq!(smallest_irreducible(2, 2), vec![1, 1, 1]); // x² + x + 1
    }

    #[test]
    fn irreducibility_is_checked() {
        // x² + 1 factors over F_5 (roots 2, 3)
        assert!(!is_irreducible(5, &[1, 0, 1]));
        assert!(is_irreducible(5, &[2, 0, 1]));
        // x³ + x + 1 over F_2 is the classic irreducible cubic
        assert!(is_irreducible(2, &[1, 1, 0, 1]));
        assert!(!is_irreducible(2, &[1, 0, 0, 1])); // x³+1 = (x+1)(x²+x+1)
    }

    #[test]
    fn teichmuller_57_mod_125() {
        let (field, ring) = build_field_tower(5, 1, 1, 3).unwrap();
        let t = ring.teichmuller(&field.from_scalar(2)).unwrap();
        assert_eq!(t, vec![57]);
        assert_eq!(ring.pow(&t, 2), vec![124]); // 57² ≡ -1
        assert_eq!(ring.pow(&t, 4), vec![1]);
    }

    #[test]
    fn teichmuller_trivial_cases() {
        let (field, ring) = build_field_tower(3, 1, 1, 2).unwrap();
        assert_eq!(ring.teichmuller(&field.one()).unwrap(), vec![1]);
        assert_eq!(ring.teichmuller(&field.from_scalar(2)).unwrap(), vec![8]);
        assert_eq!(
            ring.teichmuller(&field.zero()),
            Err(PadicError::ZeroTeichmuller)
        );
    }

    #[test]
    fn teichmuller_is_multiplicative_and_torsion() {
        // residue fields up to p^r = 343
        for (p, r) in [(2u64, 3usize), (3, 2), (5, 2), (7, 1), (2, 8), (7, 3)] {
            let (field, ring) = build_field_tower(p, r, 1, 3).unwrap();
            let order = field.order() - 1;
            for ia in 1..field.order() {
                let a = field.element_from_index(ia);
                let ta = ring.teichmuller(&a).unwrap();
                assert_eq!(ring.pow(&ta, order), ring.one(), "torsion p={p} r={r}");
            }
            // multiplicativity on a few pairs
            for (ia, ib) in [(1, 2), (2, 3), (3, 5 % field.order().max(1))] {
                let a = field.element_from_index(ia % field.order());
                let b = field.element_from_index(ib % field.order());
                if field.is_zero(&a) || field.is_zero(&b) {
                    continue;
                }
                let lhs = ring.teichmuller(&field.mul(&a, &b)).unwrap();
                let rhs = ring.mul(
                    &ring.teichmuller(&a).unwrap(),
                    &ring.teichmuller(&b).unwrap(),
                );
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn trace_basics() {
        let (_, ring) = build_field_tower(3, 2, 1, 2).unwrap();
        assert_eq!(ring.min_poly, vec![1, 0, 1]); // x² + 1
        assert_eq!(ring.trace(&ring.one()).value, 2); // r = 2
        assert_eq!(ring.trace(&ring.from_scalar(5)).value, 1); // 2·5 mod 9
        // α = x, conjugates x and -x
        let x = vec![0, 1];
        assert_eq!(ring.trace(&x).value, 0);
    }

    #[test]
    fn trace_is_linear_and_frobenius_invariant() {
        let (field, ring) = build_field_tower(3, 2, 1, 3).unwrap();
        for ia in 0..9 {
            for ib in 0..9 {
                let a = ring.from_fq(&field.element_from_index(ia));
                let b = ring.from_fq(&field.element_from_index(ib));
                let sum = ring.add(&a, &b);
                assert_eq!(
                    ring.trace(&sum).value,
                    ring.scalars.add(ring.trace(&a).value, ring.trace(&b).value)
                );
            }
            let a = ring.from_fq(&field.element_from_index(ia));
            assert_eq!(ring.trace(&ring.frobenius(&a)).value, ring.trace(&a).value);
        }
    }

    #[test]
    fn trace_equals_conjugate_sum() {
        let (field, ring) = build_field_tower(5, 2, 1, 3).unwrap();
        for idx in [1u64, 2, 7, 11, 24] {
            let a = ring.teichmuller(&field.element_from_index(idx)).unwrap();
            let mut conj_sum = ring.zero();
            let mut cur = a.clone();
            for _ in 0..ring.r {
                conj_sum = ring.add(&conj_sum, &cur);
                cur = ring.frobenius(&cur);
            }
            assert_eq!(cur, a, "σ^r = id");
            assert!(conj_sum[1..].iter().all(|&c| c == 0), "conjugate sum is scalar");
            assert_eq!(ring.trace(&a).value, conj_sum[0]);
        }
    }

    #[test]
    fn frobenius_on_teichmuller_is_p_power() {
        let (field, ring) = build_field_tower(3, 2, 1, 3).unwrap();
        for idx in 1..9u64 {
            let a = field.element_from_index(idx);
            let t = ring.teichmuller(&a).unwrap();
            let lhs = ring.frobenius(&t);
            let rhs = ring.teichmuller(&field.pow(&a, 3)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn tower_trace_compatibility() {
        // α in Z_q ⊂ Z_{q^k}: Tr_{Z_{q^k}/Z_p}(α) = k · Tr_{Z_q/Z_p}(α)
        let p = 3u64;
        let (small_field, small_ring) = build_field_tower(p, 2, 1, 2).unwrap();
        let (big_field, big_ring) = build_field_tower(p, 2, 2, 2).unwrap();
        let root = big_field.subfield_root(&small_field);
        assert!(big_field.is_zero(&big_field.eval_poly(&small_field.modulus, &root)));
        for idx in 1..9u64 {
            let a = small_field.element_from_index(idx);
            let a_big = big_field.embed(&a, &root);
            let tr_small = small_ring.trace(&small_ring.teichmuller(&a).unwrap()).value;
            let tr_big = big_ring.trace(&big_ring.teichmuller(&a_big).unwrap()).value;
            assert_eq!(tr_big, small_ring.scalars.mul(2, tr_small));
        }
    }

    #[test]
    fn ring_inverse_round_trip() {
        let (field, ring) = build_field_tower(5, 2, 1, 3).unwrap();
        for idx in [1u64, 3, 8, 13, 24] {
            let a = ring.from_fq(&field.element_from_index(idx));
            let inv = ring.inv(&a).unwrap();
            assert_eq!(ring.mul(&a, &inv), ring.one());
        }
        assert_eq!(ring.inv(&ring.zero()), Err(PadicError::NotAUnit));
    }

    #[test]
    fn zpm_basic_arithmetic() {
        let ctx = ZpmCtx::new(3, 4).unwrap();
        assert_eq!(ctx.modulus, 81);
        assert_eq!(ctx.mul(ctx.inv(2).unwrap(), 2), 1);
        assert_eq!(ctx.valuation(54), 3); // 54 = 2·27
        assert_eq!(ctx.valuation(0), 4);
        assert_eq!(ctx.div_pow_p(54, 3), Some(2));
        assert_eq!(ctx.div_pow_p(54, 4), None);
        assert!(ZpmCtx::new(4, 2).is_err());
    }

    #[test]
    fn generator_has_full_order() {
        for (p, r) in [(3u64, 2usize), (5, 1), (2, 4)] {
            let field = FqCtx::new(p, r).unwrap();
            let g = field.multiplicative_generator();
            let order = field.order() - 1;
            let mut cur = field.one();
            let mut seen = std::collections::BTreeSet::new();
            for _ in 0..order {
                cur = field.mul(&cur, &g);
                seen.insert(cur.clone());
            }
            assert_eq!(seen.len(), order as usize);
            assert_eq!(cur, field.one());
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            FqCtx::new(2, 30),
            Err(PadicError::BudgetExceeded { .. })
        ));
    }
}
