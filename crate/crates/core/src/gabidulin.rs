//! Gabidulin codes: Moore-matrix encoding, star-product code formation, and
//! error/erasure decoding in the rank metric.
//!
//! A code G(n,k) over GF(q^s) evaluates linearized polynomials of q-degree
//! < k at n GF(q)-linearly-independent points. These codes are MRD: the
//! minimum rank distance is d = n−k+1.

use crate::ff::{nullspace, solve_linear, ExtMatrix, FfError, FieldElement, FieldSpec};
use crate::linpoly::LinearizedPoly;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("code length {n} exceeds extension degree {s}")]
    LengthExceedsExtension { n: usize, s: usize },
    #[error("dimension {k} out of range for length {n}")]
    DimensionRange { k: usize, n: usize },
    #[error("evaluation points are not GF(q)-linearly independent")]
    DependentPoints,
    #[error("star product requires identical evaluation points")]
    PointMismatch,
    #[error("star dimension {dim} exceeds length {n}")]
    DimensionOverflow { dim: usize, n: usize },
    #[error("message length {got} does not match dimension {k}")]
    MessageLength { got: usize, k: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("received word length {got}, expected {n}")]
    WordLength { got: usize, n: usize },
    #[error("{erased} erasures exceed the budget {budget}")]
    TooManyErasures { erased: usize, budget: usize },
    #[error("decoding budget violated: 2*{eps} + {erased} > d-1 = {dm1}")]
    BudgetExceeded { eps: usize, erased: usize, dm1: usize },
    #[error("non-erased coordinates are inconsistent with every codeword")]
    Inconsistent,
    #[error("no codeword within rank radius {eps} of the received word")]
    NoCodewordInRadius { eps: usize },
    #[error(transparent)]
    Field(#[from] FfError),
}

/// Rank weight of a word: the GF(q)-rank of its Φ expansion.
pub fn rank_weight(word: &[FieldElement], f: &FieldSpec) -> usize {
    let m = ExtMatrix::from_rows(vec![word.to_vec()]).expect("single row");
    m.rank_base(f)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GabidulinCode {
    points: Vec<FieldElement>,
    k: usize,
}

/// Result of erasure decoding: the codeword, its message, and the value
/// (received − codeword) at each erased coordinate.
#[derive(Debug, Clone)]
pub struct ErasureDecoding {
    pub codeword: Vec<FieldElement>,
    pub message: Vec<FieldElement>,
    pub discrepancies: Vec<(usize, FieldElement)>,
}

impl GabidulinCode {
    pub fn new(points: Vec<FieldElement>, k: usize, f: &FieldSpec) -> Result<Self, CodeError> {
        let n = points.len();
        if n > f.s() {
            return Err(CodeError::LengthExceedsExtension { n, s: f.s() });
        }
        if k == 0 || k > n {
            return Err(CodeError::DimensionRange { k, n });
        }
        let row = ExtMatrix::from_rows(vec![points.clone()]).expect("single row");
        if row.rank_base(f) != n {
            return Err(CodeError::DependentPoints);
        }
        Ok(GabidulinCode { points, k })
    }

    /// Standard points (α^0, α^1, …, α^{n−1}).
    pub fn with_alpha_powers(n: usize, k: usize, f: &FieldSpec) -> Result<Self, CodeError> {
        let points = (0..n).map(|i| f.alpha_pow(i as u64)).collect();
        Self::new(points, k, f)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Minimum rank distance n − k + 1 (MRD).
    pub fn d(&self) -> usize {
        self.n() - self.k + 1
    }

    pub fn points(&self) -> &[FieldElement] {
        &self.points
    }

    /// k×n Moore matrix: row i, column j holds α_j^{q^i}.
    pub fn generator_matrix(&self, f: &FieldSpec) -> ExtMatrix {
        let rows = (0..self.k)
            .map(|i| self.points.iter().map(|&p| f.frobenius(p, i)).collect())
            .collect();
        ExtMatrix::from_rows(rows).expect("rectangular")
    }

    pub fn encode(&self, message: &[FieldElement], f: &FieldSpec) -> Result<Vec<FieldElement>, CodeError> {
        if message.len() != self.k {
            return Err(CodeError::MessageLength { got: message.len(), k: self.k });
        }
        let poly = LinearizedPoly::from_coeffs(message.to_vec());
        Ok(self.encode_poly(&poly, f))
    }

    /// Evaluate an arbitrary linearized polynomial at the code points.
    pub fn encode_poly(&self, poly: &LinearizedPoly, f: &FieldSpec) -> Vec<FieldElement> {
        self.points.iter().map(|&p| poly.eval(p, f)).collect()
    }

    /// Star product: the code evaluating f(g(z)) for f from `self` and g from
    /// `other`; a Gabidulin code of dimension k_C + k_D − 1 on the same points.
    pub fn star(&self, other: &GabidulinCode) -> Result<GabidulinCode, CodeError> {
        if self.points != other.points {
            return Err(CodeError::PointMismatch);
        }
        let dim = self.k + other.k - 1;
        if dim > self.n() {
            return Err(CodeError::DimensionOverflow { dim, n: self.n() });
        }
        Ok(GabidulinCode { points: self.points.clone(), k: dim })
    }

    /// Membership test by solving the Moore system.
    pub fn contains(&self, word: &[FieldElement], f: &FieldSpec) -> bool {
        if word.len() != self.n() {
            return false;
        }
        let gen_t = self.generator_matrix(f).transpose();
        let rhs = ExtMatrix::from_rows(word.iter().map(|&x| vec![x]).collect()).expect("column");
        solve_linear(&gen_t, &rhs, f).is_ok()
    }

    /// Interpolate the message polynomial from exactly k (coordinate, value)
    /// pairs; any k coordinates form an information set.
    pub fn interpolate(
        &self,
        coords: &[usize],
        values: &[FieldElement],
        f: &FieldSpec,
    ) -> Result<Vec<FieldElement>, DecodeError> {
        if coords.len() != self.k || values.len() != self.k {
            return Err(DecodeError::WordLength { got: coords.len(), n: self.k });
        }
        let rows: Vec<Vec<FieldElement>> = coords
            .iter()
            .map(|&c| (0..self.k).map(|i| f.frobenius(self.points[c], i)).collect())
            .collect();
        let a = ExtMatrix::from_rows(rows).expect("rectangular");
        let b = ExtMatrix::from_rows(values.iter().map(|&v| vec![v]).collect()).expect("column");
        let sol = solve_linear(&a, &b, f).map_err(|e| match e {
            FfError::Inconsistent => DecodeError::Inconsistent,
            other => DecodeError::Field(other),
        })?;
        Ok(sol.x.col(0))
    }

    /// Recover the unique codeword agreeing with `received` on all non-erased
    /// coordinates, plus the discrepancy (received − codeword) at each erased
    /// coordinate. Fails if the non-erased coordinates are inconsistent.
    pub fn erasure_decode(
        &self,
        received: &[FieldElement],
        erased: &BTreeSet<usize>,
        f: &FieldSpec,
    ) -> Result<ErasureDecoding, DecodeError> {
        let n = self.n();
        if received.len() != n {
            return Err(DecodeError::WordLength { got: received.len(), n });
        }
        if erased.len() > n - self.k {
            return Err(DecodeError::TooManyErasures { erased: erased.len(), budget: n - self.k });
        }
        let kept: Vec<usize> = (0..n).filter(|c| !erased.contains(c)).collect();
        let info = &kept[..self.k];
        let values: Vec<FieldElement> = info.iter().map(|&c| received[c]).collect();
        let message = self.interpolate(info, &values, f)?;
        let poly = LinearizedPoly::from_coeffs(message.clone());
        let codeword = self.encode_poly(&poly, f);
        for &c in &kept[self.k..] {
            if codeword[c] != received[c] {
                return Err(DecodeError::Inconsistent);
            }
        }
        let discrepancies = erased
            .iter()
            .map(|&c| (c, f.sub(received[c], codeword[c])))
            .collect();
        Ok(ErasureDecoding { codeword, message, discrepancies })
    }

    /// Error-erasure decoding: the unique codeword within rank distance
    /// `eps_max` of the received word on the non-erased coordinates, found by
    /// linearized Welch–Berlekamp interpolation on the punctured code.
    pub fn error_erasure_decode(
        &self,
        received: &[FieldElement],
        erased: &BTreeSet<usize>,
        eps_max: usize,
        f: &FieldSpec,
    ) -> Result<ErasureDecoding, DecodeError> {
        let n = self.n();
        if received.len() != n {
            return Err(DecodeError::WordLength { got: received.len(), n });
        }
        let dm1 = self.d() - 1;
        if 2 * eps_max + erased.len() > dm1 {
            return Err(DecodeError::BudgetExceeded { eps: eps_max, erased: erased.len(), dm1 });
        }
        if eps_max == 0 {
            return self.erasure_decode(received, erased, f);
        }
        let kept: Vec<usize> = (0..n).filter(|c| !erased.contains(c)).collect();
        let message = self.wb_decode(&kept, received, eps_max, f)?;
        let poly = LinearizedPoly::from_coeffs(message.clone());
        let codeword = self.encode_poly(&poly, f);
        let discrepancies = erased
            .iter()
            .map(|&c| (c, f.sub(received[c], codeword[c])))
            .collect();
        Ok(ErasureDecoding { codeword, message, discrepancies })
    }

    /// Welch–Berlekamp on the coordinates `kept`: find (V, N) with
    /// deg_q V ≤ eps, deg_q N ≤ k+eps−1 and V(r_c) = N(α_c), then the message
    /// is the left quotient V \ N, verified by a residual rank check.
    fn wb_decode(
        &self,
        kept: &[usize],
        received: &[FieldElement],
        eps: usize,
        f: &FieldSpec,
    ) -> Result<Vec<FieldElement>, DecodeError> {
        let k = self.k;
        let nv = eps + 1;
        let nn = k + eps;
        let rows: Vec<Vec<FieldElement>> = kept
            .iter()
            .map(|&c| {
                let mut row = Vec::with_capacity(nv + nn);
                for i in 0..nv {
                    row.push(f.frobenius(received[c], i));
                }
                for j in 0..nn {
                    row.push(f.neg(f.frobenius(self.points[c], j)));
                }
                row
            })
            .collect();
        let a = ExtMatrix::from_rows(rows).expect("rectangular");
        let candidates = nullspace(&a, f);
        for cand in &candidates {
            let v = LinearizedPoly::from_coeffs(cand[..nv].to_vec());
            let nf = LinearizedPoly::from_coeffs(cand[nv..].to_vec());
            if v.is_zero() {
                continue;
            }
            let Some(msg_poly) = left_divide(&v, &nf, k.saturating_sub(1), f) else {
                continue;
            };
            let cw: Vec<FieldElement> =
                kept.iter().map(|&c| msg_poly.eval(self.points[c], f)).collect();
            let diff: Vec<FieldElement> =
                kept.iter().zip(&cw).map(|(&c, &y)| f.sub(received[c], y)).collect();
            if rank_weight(&diff, f) <= eps {
                let mut message = msg_poly.coeffs().to_vec();
                message.resize(k, FieldElement::ZERO);
                return Ok(message);
            }
        }
        Err(DecodeError::NoCodewordInRadius { eps })
    }
}

/// Solve V ∘ f = N for f with deg_q f ≤ max_deg; None when V does not divide N
/// on the left or the quotient degree is out of range.
fn left_divide(
    v: &LinearizedPoly,
    n: &LinearizedPoly,
    max_deg: usize,
    f: &FieldSpec,
) -> Option<LinearizedPoly> {
    let dv = v.q_degree()?;
    if n.is_zero() {
        return Some(LinearizedPoly::zero());
    }
    let dn = n.q_degree().expect("nonzero");
    if dn < dv {
        return None;
    }
    let df = dn - dv;
    if df > max_deg {
        return None;
    }
    let v_top_inv = f.inv(v.coeff(dv)).ok()?;
    let mut fc = vec![FieldElement::ZERO; df + 1];
    for m in (dv..=dn).rev() {
        let j = m - dv;
        let mut acc = n.coeff(m);
        for i in 0..=dv.min(m) {
            let jj = m - i;
            if i == dv && jj == j {
                continue;
            }
            if jj <= df && !v.coeff(i).is_zero() {
                let t = f.mul(v.coeff(i), f.frobenius(fc[jj], i));
                acc = f.sub(acc, t);
            }
        }
        fc[j] = f.frobenius_inv(f.mul(acc, v_top_inv), dv);
    }
    // low-order consistency: coefficients below q-degree dv must also match
    for m in 0..dv {
        let mut acc = FieldElement::ZERO;
        for i in 0..=m {
            let jj = m - i;
            if jj <= df && !v.coeff(i).is_zero() {
                acc = f.add(acc, f.mul(v.coeff(i), f.frobenius(fc[jj], i)));
            }
        }
        if acc != n.coeff(m) {
            return None;
        }
    }
    Some(LinearizedPoly::from_coeffs(fc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::presets;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generator_first_row_is_points() {
        let f = presets::gf32().unwrap();
        let code = GabidulinCode::with_alpha_powers(5, 4, &f).unwrap();
        let g = code.generator_matrix(&f);
        for j in 0..5 {
            assert_eq!(g[(0, j)], f.alpha_pow(j as u64));
        }
    }

    #[test]
    fn generator_small_known_rows() {
        // G(3,2) over GF(2^3) on (1, a, a^2): rows (1, a, a^2) and (1, a^2, a^2+a)
        let f = presets::gf8().unwrap();
        let code = GabidulinCode::with_alpha_powers(3, 2, &f).unwrap();
        let g = code.generator_matrix(&f);
        assert_eq!(g.row(0), &[f.one(), f.alpha(), f.alpha_pow(2)]);
        let a2_plus_a = f.add(f.alpha_pow(2), f.alpha());
        assert_eq!(g.row(1), &[f.one(), f.alpha_pow(2), a2_plus_a]);
    }

    #[test]
    fn encode_zero_and_unit() {
        let f = presets::gf8().unwrap();
        let code = GabidulinCode::with_alpha_powers(3, 2, &f).unwrap();
        let zero = code.encode(&[f.zero(), f.zero()], &f).unwrap();
        assert!(zero.iter().all(FieldElement::is_zero));
        let unit = code.encode(&[f.one(), f.zero()], &f).unwrap();
        assert_eq!(unit, code.points().to_vec());
    }

    #[test]
    fn dependent_points_rejected() {
        let f = presets::gf8().unwrap();
        let pts = vec![f.one(), f.alpha(), f.add(f.one(), f.alpha())];
        assert_eq!(GabidulinCode::new(pts, 2, &f), Err(CodeError::DependentPoints));
    }

    #[test]
    fn star_dimensions() {
        let f = presets::gf32().unwrap();
        let c = GabidulinCode::with_alpha_powers(5, 3, &f).unwrap();
        let d = GabidulinCode::with_alpha_powers(5, 2, &f).unwrap();
        let star = c.star(&d).unwrap();
        assert_eq!(star.k(), 4);
        assert_eq!(star.n(), 5);
        let overflow = GabidulinCode::with_alpha_powers(5, 4, &f).unwrap();
        assert!(matches!(c.star(&overflow.star(&d).unwrap()), Err(CodeError::DimensionOverflow { .. })));
    }

    #[test]
    fn star_with_identity_query_is_same_code() {
        // D = G(n,1) with g(z) = g0 z: composed codewords are exactly the
        // codewords of C, so the star code has the same codeword set.
        let f = presets::gf8().unwrap();
        let c = GabidulinCode::with_alpha_powers(3, 2, &f).unwrap();
        let d = GabidulinCode::with_alpha_powers(3, 1, &f).unwrap();
        let star = c.star(&d).unwrap();
        assert_eq!(star.k(), c.k());
        for m0 in f.iter_all() {
            for m1 in f.iter_all() {
                let w = c.encode(&[m0, m1], &f).unwrap();
                assert!(star.contains(&w, &f));
            }
        }
    }

    #[test]
    fn mrd_exhaustive_tiny() {
        let f = presets::gf8().unwrap();
        let code = GabidulinCode::with_alpha_powers(3, 2, &f).unwrap();
        let mut min_weight = usize::MAX;
        let mut count = 0;
        for m0 in f.iter_all() {
            for m1 in f.iter_all() {
                let w = code.encode(&[m0, m1], &f).unwrap();
                count += 1;
                let wt = rank_weight(&w, &f);
                if wt > 0 {
                    min_weight = min_weight.min(wt);
                }
            }
        }
        assert_eq!(count, 64);
        assert_eq!(min_weight, code.d());
    }

    #[test]
    fn any_k_coordinates_determine_codeword() {
        let f = presets::gf8().unwrap();
        let code = GabidulinCode::with_alpha_powers(3, 2, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let msg = vec![f.random(&mut rng), f.random(&mut rng)];
            let cw = code.encode(&msg, &f).unwrap();
            for a in 0..3 {
                for b in (a + 1)..3 {
                    let got = code.interpolate(&[a, b], &[cw[a], cw[b]], &f).unwrap();
                    assert_eq!(got, msg);
                }
            }
        }
    }

    #[test]
    fn erasure_decode_roundtrip() {
        let f = presets::gf8().unwrap();
        let code = GabidulinCode::with_alpha_powers(3, 2, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let msg = vec![f.random(&mut rng), f.random(&mut rng)];
            let cw = code.encode(&msg, &f).unwrap();

            // no erasures: codeword comes back as-is
            let dec = code.erasure_decode(&cw, &BTreeSet::new(), &f).unwrap();
            assert_eq!(dec.codeword, cw);
            assert!(dec.discrepancies.is_empty());

            // single known corruption recovered with its discrepancy
            let pos = rng.gen_range(0..3);
            let corruption = f.random_nonzero(&mut rng);
            let mut word = cw.clone();
            word[pos] = f.add(word[pos], corruption);
            let erased: BTreeSet<usize> = [pos].into();
            let dec = code.erasure_decode(&word, &erased, &f).unwrap();
            assert_eq!(dec.codeword, cw);
            assert_eq!(dec.discrepancies, vec![(pos, corruption)]);

            // corruption outside the declared erasures must be caught; with no
            // erasures there is a spare coordinate for the consistency check
            let other = (pos + 1) % 3;
            let mut word2 = cw.clone();
            word2[other] = f.add(word2[other], corruption);
            assert!(matches!(
                code.erasure_decode(&word2, &BTreeSet::new(), &f),
                Err(DecodeError::Inconsistent)
            ));
        }
    }

    #[test]
    fn erasure_budget_enforced() {
        let f = presets::gf8().unwrap();
        let code = GabidulinCode::with_alpha_powers(3, 2, &f).unwrap();
        let cw = code.encode(&[f.one(), f.one()], &f).unwrap();
        let erased: BTreeSet<usize> = [0, 1].into();
        assert!(matches!(
            code.erasure_decode(&cw, &erased, &f),
            Err(DecodeError::TooManyErasures { .. })
        ));
    }

    #[test]
    fn error_erasure_zero_budget_matches_erasure_decode() {
        let f = presets::gf256().unwrap();
        let code = GabidulinCode::with_alpha_powers(8, 6, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let msg: Vec<_> = (0..6).map(|_| f.random(&mut rng)).collect();
            let cw = code.encode(&msg, &f).unwrap();
            let mut word = cw.clone();
            let erased: BTreeSet<usize> = [2, 5].into();
            for &c in &erased {
                word[c] = f.random(&mut rng);
            }
            let a = code.erasure_decode(&word, &erased, &f).unwrap();
            let b = code.error_erasure_decode(&word, &erased, 0, &f).unwrap();
            assert_eq!(a.codeword, b.codeword);
            assert_eq!(a.codeword, cw);
        }
    }

    /// Random word of rank weight exactly `r`.
    fn random_rank_vec(
        rng: &mut ChaCha8Rng,
        f: &FieldSpec,
        n: usize,
        r: usize,
    ) -> Vec<FieldElement> {
        loop {
            let gens: Vec<FieldElement> = (0..r).map(|_| f.random_nonzero(rng)).collect();
            if rank_weight(&gens, f) != r {
                continue;
            }
            let q = f.q();
            let word: Vec<FieldElement> = (0..n)
                .map(|_| {
                    let mut acc = FieldElement::ZERO;
                    for &g in &gens {
                        let c = rng.gen_range(0..q) as crate::ff::BaseElem;
                        acc = f.add(acc, f.scale_base(c, g));
                    }
                    acc
                })
                .collect();
            if rank_weight(&word, f) == r {
                return word;
            }
        }
    }

    #[test]
    fn error_decoding_within_radius() {
        let f = presets::gf16().unwrap();
        let code = GabidulinCode::with_alpha_powers(4, 1, &f).unwrap();
        assert_eq!(code.d(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..100 {
            let msg = vec![f.random(&mut rng)];
            let cw = code.encode(&msg, &f).unwrap();
            let err = random_rank_vec(&mut rng, &f, 4, 1);
            let word: Vec<_> = cw.iter().zip(&err).map(|(&a, &b)| f.add(a, b)).collect();
            let dec = code.error_erasure_decode(&word, &BTreeSet::new(), 1, &f).unwrap();
            assert_eq!(dec.codeword, cw);
        }
    }

    #[test]
    fn beyond_budget_rejected_and_miscorrection_exists() {
        let f = presets::gf16().unwrap();
        let code = GabidulinCode::with_alpha_powers(4, 1, &f).unwrap();
        // budget violation is rejected up front
        let cw = code.encode(&[f.one()], &f).unwrap();
        assert!(matches!(
            code.error_erasure_decode(&cw, &BTreeSet::new(), 2, &f),
            Err(DecodeError::BudgetExceeded { .. })
        ));
        // at 2e + tau = d, a constructed received word decodes to a different
        // codeword: received = c1 + (c2 - c1) restricted to a rank-1-from-c2 gap
        let c1 = code.encode(&[f.one()], &f).unwrap();
        let c2 = code.encode(&[f.alpha()], &f).unwrap();
        // received = c2 + e2 where rank(e2) = 1 <= eps, but rank(received - c1) >= d - 1
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let e2 = random_rank_vec(&mut rng, &f, 4, 1);
        let word: Vec<_> = c2.iter().zip(&e2).map(|(&a, &b)| f.add(a, b)).collect();
        let dec = code.error_erasure_decode(&word, &BTreeSet::new(), 1, &f).unwrap();
        assert_eq!(dec.codeword, c2, "decoder lands on the nearer codeword, not c1");
        assert_ne!(dec.codeword, c1);
    }
}
