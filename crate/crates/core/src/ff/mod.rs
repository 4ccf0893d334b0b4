//! Finite-field tower GF(q) ⊂ GF(q^s) and linear algebra over both levels.
//!
//! Elements of GF(q^s) are stored in the polynomial basis: `s` coefficients
//! over GF(q), packed low-to-high into a single `u64`. The base field
//! GF(q) = GF(p^b) runs on exp/log tables built at construction time, so the
//! tower is field-size-agnostic up to the packing limits (q ≤ 2^16,
//! s·ceil(log2 q) ≤ 64), which covers far more than the code sizes this crate
//! is used with.

mod matrix;

pub use matrix::{
    nullspace, random_matrix, random_matrix_of_rank, solve_linear, BaseMatrix, ExtMatrix,
    LinearSolution,
};

use thiserror::Error;

/// Code of a GF(q) element: base-p digit packing of its GF(p) coefficients.
pub type BaseElem = u16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("field too large for the packed representation ({0})")]
    TooLarge(String),
    #[error("modulus must be monic of degree {expected}, got degree {got}")]
    BadModulusShape { expected: usize, got: usize },
    #[error("modulus is reducible over GF({q})")]
    ReducibleModulus { q: u64 },
    #[error("coefficient {0} out of range for GF({1})")]
    CoeffRange(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("requested rank {r} out of range for a {rows}x{cols} matrix")]
    RankRange { r: usize, rows: usize, cols: usize },
}

/// Arithmetic for the base field GF(q), q = p^b.
#[derive(Debug, Clone)]
pub struct BaseField {
    p: u64,
    b: usize,
    q: u64,
    /// exp[i] = g^i for a multiplicative generator g; exp has length q-1.
    exp: Vec<BaseElem>,
    /// log[code] for code != 0; log[0] unused.
    log: Vec<u32>,
    /// Irreducible degree-b modulus over GF(p), low-to-high (only for b > 1).
    base_modulus: Vec<u64>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl BaseField {
    /// GF(p^b) with the given degree-b modulus over GF(p) (low-to-high, monic).
    /// For b = 1 the modulus is ignored.
    pub fn new(p: u64, b: usize, base_modulus: Option<&[u64]>) -> Result<Self, FfError> {
        if !is_prime(p) {
            return Err(FfError::NotPrime(p));
        }
        if b == 0 {
            return Err(FfError::TooLarge("base degree must be >= 1".into()));
        }
        let q = p.checked_pow(b as u32).filter(|&q| q <= 1 << 16).ok_or_else(|| {
            FfError::TooLarge(format!("base field order p^b = {p}^{b} exceeds 2^16"))
        })?;
        let modulus: Vec<u64> = if b == 1 {
            vec![0, 1]
        } else {
            match base_modulus {
                Some(m) => {
                    let m: Vec<u64> = m.iter().map(|&c| c % p).collect();
                    if m.len() != b + 1 || m[b] != 1 {
                        return Err(FfError::BadModulusShape {
                            expected: b,
                            got: m.len().saturating_sub(1),
                        });
                    }
                    m
                }
                None => default_base_modulus(p, b),
            }
        };
        let mut field = BaseField { p, b, q, exp: Vec::new(), log: Vec::new(), base_modulus: modulus };
        if b > 1 && !field.base_modulus_irreducible() {
            return Err(FfError::ReducibleModulus { q: p });
        }
        field.build_tables()?;
        Ok(field)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    fn digits(&self, code: BaseElem) -> Vec<u64> {
        let mut v = vec![0u64; self.b];
        let mut c = code as u64;
        for d in v.iter_mut() {
            *d = c % self.p;
            c /= self.p;
        }
        v
    }

    fn from_digits(&self, digits: &[u64]) -> BaseElem {
        let mut c = 0u64;
        for &d in digits.iter().rev() {
            c = c * self.p + (d % self.p);
        }
        c as BaseElem
    }

    /// Raw polynomial multiplication mod the base modulus (used only to build tables).
    fn poly_mul(&self, a: BaseElem, b: BaseElem) -> BaseElem {
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u64; 2 * self.b];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        for d in (self.b..2 * self.b).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for j in 0..self.b {
                let sub = (c * self.base_modulus[j]) % self.p;
                prod[d - self.b + j] = (prod[d - self.b + j] + self.p - sub) % self.p;
            }
        }
        self.from_digits(&prod[..self.b])
    }

    fn base_modulus_irreducible(&self) -> bool {
        // Root check plus trial division; the base degree is always tiny.
        let p = self.p;
        let b = self.b;
        let eval = |x: u64| -> u64 {
            let mut acc = 0u64;
            for &c in self.base_modulus.iter().rev() {
                acc = (acc * x + c) % p;
            }
            acc
        };
        if (0..p).any(|x| eval(x) == 0) {
            return false;
        }
        if b <= 3 {
            return true; // no roots suffices up to degree 3
        }
        // trial division by monic polynomials of degree 2..=b/2 over GF(p)
        for d in 2..=b / 2 {
            let count = p.pow(d as u32);
            'cand: for idx in 0..count {
                let mut div = vec![0u64; d + 1];
                let mut t = idx;
                for c in div.iter_mut().take(d) {
                    *c = t % p;
                    t /= p;
                }
                div[d] = 1;
                // long division of base_modulus by div over GF(p)
                let mut rem: Vec<u64> = self.base_modulus.clone();
                while rem.len() > d && rem.iter().rposition(|&c| c != 0).map_or(false, |deg| deg >= d)
                {
                    let deg = rem.iter().rposition(|&c| c != 0).unwrap();
                    let lead = rem[deg];
                    for j in 0..=d {
                        let sub = (lead * div[j]) % p;
                        rem[deg - d + j] = (rem[deg - d + j] + p - sub) % p;
                    }
                    if rem[deg] != 0 {
                        continue 'cand; // should not happen (div monic)
                    }
                }
                if rem.iter().all(|&c| c == 0) {
                    return false;
                }
            }
        }
        true
    }

    fn build_tables(&mut self) -> Result<(), FfError> {
        let q = self.q;
        // find a multiplicative generator by trial
        'outer: for g in 1..q {
            let g = g as BaseElem;
            let mut seen = vec![false; q as usize];
            let mut x: BaseElem = 1;
            let mut order = 0u64;
            loop {
                if seen[x as usize] {
                    break;
                }
                seen[x as usize] = true;
                order += 1;
                x = self.poly_mul(x, g);
                if x == 1 {
                    break;
                }
            }
            if order == q - 1 {
                self.exp = Vec::with_capacity((q - 1) as usize);
                self.log = vec![0; q as usize];
                let mut x: BaseElem = 1;
                for i in 0..q - 1 {
                    self.exp.push(x);
                    self.log[x as usize] = i as u32;
                    x = self.poly_mul(x, g);
                }
                return Ok(());
            }
            if order > q - 1 {
                break 'outer;
            }
        }
        Err(FfError::TooLarge("no multiplicative generator found".into()))
    }

    pub fn add(&self, a: BaseElem, b: BaseElem) -> BaseElem {
        if self.b == 1 {
            (((a as u64) + (b as u64)) % self.p) as BaseElem
        } else if self.p == 2 {
            a ^ b
        } else {
            let da = self.digits(a);
            let db = self.digits(b);
            let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
            self.from_digits(&sum)
        }
    }

    pub fn neg(&self, a: BaseElem) -> BaseElem {
        if self.p == 2 {
            return a;
        }
        if self.b == 1 {
            ((self.p - a as u64) % self.p) as BaseElem
        } else {
            let da = self.digits(a);
            let neg: Vec<u64> = da.iter().map(|&x| (self.p - x) % self.p).collect();
            self.from_digits(&neg)
        }
    }

    pub fn sub(&self, a: BaseElem, b: BaseElem) -> BaseElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: BaseElem, b: BaseElem) -> BaseElem {
        if a == 0 || b == 0 {
            return 0;
        }
        let la = self.log[a as usize] as u64;
        let lb = self.log[b as usize] as u64;
        self.exp[((la + lb) % (self.q - 1)) as usize]
    }

    pub fn inv(&self, a: BaseElem) -> Result<BaseElem, FfError> {
        if a == 0 {
            return Err(FfError::DivisionByZero);
        }
        let la = self.log[a as usize] as u64;
        Ok(self.exp[((self.q - 1 - la) % (self.q - 1)) as usize])
    }
}

/// Lexicographically smallest monic irreducible of degree b over GF(p).
fn default_base_modulus(p: u64, b: usize) -> Vec<u64> {
    let count = p.pow(b as u32);
    for idx in 0..count {
        let mut m = vec![0u64; b + 1];
        let mut t = idx;
        for c in m.iter_mut().take(b) {
            *c = t % p;
            t /= p;
        }
        m[b] = 1;
        let probe = BaseField { p, b, q: count, exp: vec![], log: vec![], base_modulus: m.clone() };
        if probe.base_modulus_irreducible() {
            return m;
        }
    }
    unreachable!("irreducible polynomials of every degree exist")
}

/// An element of GF(q^s): `s` GF(q) coefficients, packed low-to-high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }

    /// Raw packed value; layout is owned by the [`FieldSpec`].
    pub fn raw(&self) -> u64 {
        self.0
    }
}

/// GF(q^s) with an explicit irreducible modulus over GF(q).
#[derive(Debug, Clone)]
pub struct FieldSpec {
    base: BaseField,
    s: usize,
    /// degree-s monic modulus over GF(q), low-to-high, length s+1
    modulus: Vec<BaseElem>,
    cbits: u32,
    cmask: u64,
    /// q = 2 fast path: modulus as a bitmask including the top bit
    bin_modulus: u64,
}

impl FieldSpec {
    /// Build GF(q^s) with q = p^b. `modulus` lists s+1 GF(q) coefficient codes
    /// low-to-high and must be monic and irreducible over GF(q).
    pub fn new(p: u64, b: usize, s: usize, modulus: &[u64]) -> Result<Self, FfError> {
        Self::with_base_modulus(p, b, s, modulus, None)
    }

    pub fn with_base_modulus(
        p: u64,
        b: usize,
        s: usize,
        modulus: &[u64],
        base_modulus: Option<&[u64]>,
    ) -> Result<Self, FfError> {
        let base = BaseField::new(p, b, base_modulus)?;
        if s == 0 {
            return Err(FfError::TooLarge("extension degree must be >= 1".into()));
        }
        let q = base.q();
        let cbits = 64 - (q - 1).leading_zeros();
        let cbits = cbits.max(1);
        if (s as u32) * cbits > 64 {
            return Err(FfError::TooLarge(format!(
                "s * ceil(log2 q) = {} * {} exceeds 64 bits",
                s, cbits
            )));
        }
        if modulus.len() != s + 1 || modulus[s] != 1 {
            return Err(FfError::BadModulusShape {
                expected: s,
                got: modulus.len().saturating_sub(1),
            });
        }
        let mut mv = Vec::with_capacity(s + 1);
        for &c in modulus {
            if c >= q {
                return Err(FfError::CoeffRange(c, q));
            }
            mv.push(c as BaseElem);
        }
        let mut bin_modulus = 0u64;
        if q == 2 {
            for (i, &c) in mv.iter().enumerate() {
                bin_modulus |= (c as u64) << i;
            }
        }
        let spec = FieldSpec {
            base,
            s,
            modulus: mv,
            cbits,
            cmask: if cbits == 64 { u64::MAX } else { (1u64 << cbits) - 1 },
            bin_modulus,
        };
        if !spec.modulus_irreducible() {
            return Err(FfError::ReducibleModulus { q });
        }
        Ok(spec)
    }

    pub fn base(&self) -> &BaseField {
        &self.base
    }

    pub fn q(&self) -> u64 {
        self.base.q()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Field order q^s. Errors out at construction if this would overflow.
    pub fn order(&self) -> u128 {
        (self.q() as u128).pow(self.s as u32)
    }

    pub fn modulus(&self) -> Vec<u64> {
        self.modulus.iter().map(|&c| c as u64).collect()
    }

    // ---- element construction / inspection -------------------------------

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    /// Coefficient `i` (0-based, low-to-high) of `a`.
    pub fn coeff(&self, a: FieldElement, i: usize) -> BaseElem {
        debug_assert!(i < self.s);
        ((a.0 >> (i as u32 * self.cbits)) & self.cmask) as BaseElem
    }

    pub fn coeffs(&self, a: FieldElement) -> Vec<BaseElem> {
        (0..self.s).map(|i| self.coeff(a, i)).collect()
    }

    pub fn from_coeffs(&self, coeffs: &[BaseElem]) -> Result<FieldElement, FfError> {
        if coeffs.len() > self.s {
            return Err(FfError::CoeffRange(coeffs.len() as u64, self.s as u64));
        }
        let mut v = 0u64;
        for (i, &c) in coeffs.iter().enumerate() {
            if (c as u64) >= self.q() {
                return Err(FfError::CoeffRange(c as u64, self.q()));
            }
            v |= (c as u64) << (i as u32 * self.cbits);
        }
        Ok(FieldElement(v))
    }

    /// Embed a GF(q) scalar as the constant element.
    pub fn embed_base(&self, c: BaseElem) -> FieldElement {
        debug_assert!((c as u64) < self.q());
        FieldElement(c as u64)
    }

    /// The class of z (denoted α throughout): a root of the modulus.
    /// Its powers 1, α, α², … α^{s-1} form the polynomial basis.
    pub fn alpha(&self) -> FieldElement {
        FieldElement(1u64 << self.cbits)
    }

    /// α^e for e ≥ 0.
    pub fn alpha_pow(&self, e: u64) -> FieldElement {
        self.pow(self.alpha(), e)
    }

    pub fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let q = self.q();
        let mut v = 0u64;
        for i in 0..self.s {
            let c = rng.gen_range(0..q);
            v |= c << (i as u32 * self.cbits);
        }
        FieldElement(v)
    }

    pub fn random_nonzero<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        loop {
            let x = self.random(rng);
            if !x.is_zero() {
                return x;
            }
        }
    }

    /// Iterate over all q^s elements (small fields only; used by exhaustive tests).
    pub fn iter_all(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let q = self.q();
        let total = self.order();
        (0..total as u64).map(move |idx| {
            let mut v = 0u64;
            let mut t = idx;
            for i in 0..self.s {
                v |= (t % q) << (i as u32 * self.cbits);
                t /= q;
            }
            FieldElement(v)
        })
    }

    // ---- arithmetic -------------------------------------------------------

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.q() == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        let mut v = 0u64;
        for i in 0..self.s {
            let c = self.base.add(self.coeff(a, i), self.coeff(b, i));
            v |= (c as u64) << (i as u32 * self.cbits);
        }
        FieldElement(v)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if self.base.p() == 2 {
            return a;
        }
        let mut v = 0u64;
        for i in 0..self.s {
            let c = self.base.neg(self.coeff(a, i));
            v |= (c as u64) << (i as u32 * self.cbits);
        }
        FieldElement(v)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.q() == 2 {
            // carryless multiply with interleaved reduction
            let mut acc = 0u64;
            let mut x = a.0;
            let mut y = b.0;
            let top = 1u64 << self.s;
            while y != 0 {
                if y & 1 != 0 {
                    acc ^= x;
                }
                y >>= 1;
                x <<= 1;
                if x & top != 0 {
                    x ^= self.bin_modulus;
                }
            }
            return FieldElement(acc);
        }
        // schoolbook over GF(q) with top-down reduction
        let s = self.s;
        let mut prod = [0 as BaseElem; 128];
        for i in 0..s {
            let ai = self.coeff(a, i);
            if ai == 0 {
                continue;
            }
            for j in 0..s {
                let bj = self.coeff(b, j);
                if bj == 0 {
                    continue;
                }
                prod[i + j] = self.base.add(prod[i + j], self.base.mul(ai, bj));
            }
        }
        for d in (s..2 * s - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for j in 0..s {
                let t = self.base.mul(c, self.modulus[j]);
                prod[d - s + j] = self.base.sub(prod[d - s + j], t);
            }
        }
        let mut v = 0u64;
        for (i, &c) in prod.iter().enumerate().take(s) {
            v |= (c as u64) << (i as u32 * self.cbits);
        }
        FieldElement(v)
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FfError> {
        if a.is_zero() {
            return Err(FfError::DivisionByZero);
        }
        let order = self.order();
        debug_assert!(order <= u64::MAX as u128 + 1);
        Ok(self.pow(a, (order - 2) as u64))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// a^(q^i), the i-fold q-power Frobenius; i is reduced mod s.
    pub fn frobenius(&self, a: FieldElement, i: usize) -> FieldElement {
        let i = i % self.s;
        let mut x = a;
        for _ in 0..i {
            x = self.qth_power(x);
        }
        x
    }

    /// Inverse Frobenius: the unique y with frobenius(y, i) = a.
    pub fn frobenius_inv(&self, a: FieldElement, i: usize) -> FieldElement {
        let i = i % self.s;
        self.frobenius(a, (self.s - i) % self.s)
    }

    fn qth_power(&self, a: FieldElement) -> FieldElement {
        let q = self.q();
        if q == 2 {
            return self.mul(a, a);
        }
        // a^q = a^(p^b): apply the p-power map b times
        let mut x = a;
        for _ in 0..self.base.b() {
            x = self.pow(x, self.base.p());
        }
        let _ = q;
        x
    }

    /// Multiply by a GF(q) scalar.
    pub fn scale_base(&self, c: BaseElem, a: FieldElement) -> FieldElement {
        if self.q() == 2 {
            return if c & 1 == 1 { a } else { FieldElement(0) };
        }
        let mut v = 0u64;
        for i in 0..self.s {
            let x = self.base.mul(c, self.coeff(a, i));
            v |= (x as u64) << (i as u32 * self.cbits);
        }
        FieldElement(v)
    }

    fn modulus_irreducible(&self) -> bool {
        // Root check over GF(q).
        let q = self.q();
        for code in 0..q {
            let x = code as BaseElem;
            // evaluate modulus at x with Horner over GF(q)
            let mut acc: BaseElem = 0;
            for &c in self.modulus.iter().rev() {
                acc = self.base.add(self.base.mul(acc, x), c);
            }
            if acc == 0 {
                return false;
            }
        }
        if self.s <= 3 {
            return true;
        }
        // Trial division by all monic divisors of degree 2..=s/2 when enumerable.
        let budget = 1u64 << 20;
        for d in 2..=self.s / 2 {
            match q.checked_pow(d as u32) {
                Some(count) if count <= budget => {
                    for idx in 0..count {
                        if self.divides_modulus(idx, d) {
                            return false;
                        }
                    }
                }
                _ => break, // enumeration too large; root check already done
            }
        }
        true
    }

    /// Does the monic degree-d polynomial with code `idx` divide the modulus?
    fn divides_modulus(&self, idx: u64, d: usize) -> bool {
        let q = self.q();
        let mut div = vec![0 as BaseElem; d + 1];
        let mut t = idx;
        for c in div.iter_mut().take(d) {
            *c = (t % q) as BaseElem;
            t /= q;
        }
        div[d] = 1;
        let mut rem: Vec<BaseElem> = self.modulus.clone();
        loop {
            let deg = match rem.iter().rposition(|&c| c != 0) {
                Some(deg) if deg >= d => deg,
                _ => break,
            };
            let lead = rem[deg];
            for j in 0..=d {
                let sub = self.base.mul(lead, div[j]);
                rem[deg - d + j] = self.base.sub(rem[deg - d + j], sub);
            }
        }
        rem.iter().all(|&c| c == 0)
    }

    /// Render an element as a polynomial in α, high terms first (e.g. "a^3+a^2+1").
    pub fn format_element(&self, a: FieldElement) -> String {
        if a.is_zero() {
            return "0".to_string();
        }
        let mut terms = Vec::new();
        for i in (0..self.s).rev() {
            let c = self.coeff(a, i);
            if c == 0 {
                continue;
            }
            let coeff_str = if c == 1 || i == 0 { format!("{c}") } else { format!("{c}*") };
            let term = match i {
                0 => coeff_str,
                1 => {
                    if c == 1 {
                        "a".to_string()
                    } else {
                        format!("{coeff_str}a")
                    }
                }
                _ => {
                    if c == 1 {
                        format!("a^{i}")
                    } else {
                        format!("{coeff_str}a^{i}")
                    }
                }
            };
            terms.push(term);
        }
        terms.join("+")
    }
}

/// The three fields the test-suite defaults to.
pub mod presets {
    use super::{FfError, FieldSpec};

    /// GF(2^3) with modulus z^3 + z + 1.
    pub fn gf8() -> Result<FieldSpec, FfError> {
        FieldSpec::new(2, 1, 3, &[1, 1, 0, 1])
    }

    /// GF(2^4) with modulus z^4 + z + 1.
    pub fn gf16() -> Result<FieldSpec, FfError> {
        FieldSpec::new(2, 1, 4, &[1, 1, 0, 0, 1])
    }

    /// GF(2^5) with modulus z^5 + z^2 + 1.
    pub fn gf32() -> Result<FieldSpec, FfError> {
        FieldSpec::new(2, 1, 5, &[1, 0, 1, 0, 0, 1])
    }

    /// GF(2^8) with modulus z^8 + z^4 + z^3 + z^2 + 1.
    pub fn gf256() -> Result<FieldSpec, FfError> {
        FieldSpec::new(2, 1, 8, &[1, 0, 1, 1, 1, 0, 0, 0, 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf32_alpha_fifth_power() {
        // z^5 + z^2 + 1: a^5 = a^2 + 1
        let f = presets::gf32().unwrap();
        let a5 = f.alpha_pow(5);
        assert_eq!(a5, f.from_coeffs(&[1, 0, 1]).unwrap());
    }

    #[test]
    fn gf32_alpha_eighth_power() {
        // a^4 * a^4 = a^8 = a^3 + a^2 + 1
        let f = presets::gf32().unwrap();
        let a4 = f.alpha_pow(4);
        let a8 = f.mul(a4, a4);
        assert_eq!(a8, f.from_coeffs(&[1, 0, 1, 1]).unwrap());
    }

    #[test]
    fn gf32_three_term_sum() {
        // a^3 + a^2 + 1 has coefficient vector (1,0,1,1,0)
        let f = presets::gf32().unwrap();
        let x = f.add(f.add(f.alpha_pow(3), f.alpha_pow(2)), f.one());
        assert_eq!(f.coeffs(x), vec![1, 0, 1, 1, 0]);
    }

    #[test]
    fn additive_identities() {
        let f = presets::gf8().unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(7, 13);
        for _ in 0..64 {
            let a = f.random(&mut rng);
            assert_eq!(f.add(a, f.zero()), a);
            assert_eq!(f.add(a, a), f.zero(), "characteristic 2 self-inverse");
        }
    }

    #[test]
    fn inverse_of_one() {
        let f = presets::gf256().unwrap();
        assert_eq!(f.inv(f.one()).unwrap(), f.one());
        assert!(f.inv(f.zero()).is_err());
    }

    #[test]
    fn frobenius_identity_and_order() {
        let f = presets::gf32().unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(3, 11);
        for _ in 0..32 {
            let a = f.random(&mut rng);
            assert_eq!(f.frobenius(a, 0), a);
            assert_eq!(f.frobenius(a, f.s()), a);
        }
        // a^(2^3) = a^8 = a^3 + a^2 + 1
        assert_eq!(f.frobenius(f.alpha(), 3), f.from_coeffs(&[1, 0, 1, 1]).unwrap());
    }

    #[test]
    fn reducible_modulus_rejected() {
        // z^2 + 1 = (z+1)^2 over GF(2)
        assert!(matches!(
            FieldSpec::new(2, 1, 2, &[1, 0, 1]),
            Err(FfError::ReducibleModulus { .. })
        ));
        // z^4 + z^2 + 1 = (z^2+z+1)^2 has no roots but is reducible
        assert!(matches!(
            FieldSpec::new(2, 1, 4, &[1, 0, 1, 0, 1]),
            Err(FfError::ReducibleModulus { .. })
        ));
    }

    #[test]
    fn odd_characteristic_field_axioms() {
        // GF(3^2), modulus z^2 + 1 (irreducible over GF(3))
        let f = FieldSpec::new(3, 1, 2, &[1, 0, 1]).unwrap();
        let elems: Vec<_> = f.iter_all().collect();
        assert_eq!(elems.len(), 9);
        for &a in &elems {
            for &b in &elems {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                if !b.is_zero() {
                    let r = f.div(f.mul(a, b), b).unwrap();
                    assert_eq!(r, a);
                }
            }
        }
    }

    #[test]
    fn nonprime_base_field_tables() {
        // GF(8) as a base field: p=2, b=3; extension GF(8^2)
        let f = FieldSpec::new(2, 3, 2, &[2, 1, 1]).unwrap_or_else(|_| {
            // fall back to another degree-2 modulus over GF(8) if z^2+z+2 is reducible
            for c0 in 1..8u64 {
                for c1 in 0..8u64 {
                    if let Ok(f) = FieldSpec::new(2, 3, 2, &[c0, c1, 1]) {
                        return f;
                    }
                }
            }
            panic!("no irreducible degree-2 modulus over GF(8)");
        });
        assert_eq!(f.q(), 8);
        let mut rng = rand::rngs::mock::StepRng::new(5, 17);
        for _ in 0..64 {
            let a = f.random(&mut rng);
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            }
        }
    }
}
