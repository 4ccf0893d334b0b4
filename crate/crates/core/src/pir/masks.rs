//! Admissible mask and selector pattern spaces.
//!
//! A query mask row x ∈ F_{q^s}^n multiplies storage codeword symbols
//! coordinate-wise, so the response contribution of a stripe with data
//! polynomial f is Σ_e f_e · (x_c·α_c^{q^e})_c. For that contribution to stay
//! inside a target evaluation span for *every* data polynomial, x must satisfy
//! (x_c·α_c^{q^e})_c ∈ span for each e below the storage dimension. Those are
//! F_{q^s}-linear conditions, so the admissible set is the nullspace of a
//! stacked parity system. The space always contains the constant vectors
//! (e ranges below k and the span covers q-degrees up to k+tρ−2), hence every
//! single-coordinate projection is the full field — which is what makes the
//! per-cell marginals of the delivered queries uniform regardless of the
//! requested index.

use crate::ff::{nullspace, ExtMatrix, FieldElement, FieldSpec};
use crate::gabidulin::GabidulinCode;

/// Basis of {x : (x_c·α_c^{q^e})_c ∈ row-span(G) for e = 0..k_data−1}.
pub fn admissible_mask_basis(
    span_code: &GabidulinCode,
    k_data: usize,
    f: &FieldSpec,
) -> Vec<Vec<FieldElement>> {
    let g = span_code.generator_matrix(f);
    let parity = nullspace(&g, f);
    masked_nullspace(span_code.points(), k_data, &parity, f)
}

/// Basis of {x : (x_c·α_c^{q^e})_c ∈ span{(α_c^{q^(g_deg+e)})_c} for e = 0..k_data−1}:
/// patterns whose product with any data codeword lands on the single q-degree
/// g_deg+e per data coefficient e.
pub fn selector_pattern_basis(
    points: &[FieldElement],
    k_data: usize,
    g_deg: usize,
    f: &FieldSpec,
) -> Vec<Vec<FieldElement>> {
    let n = points.len();
    let mut all_rows = Vec::new();
    for e in 0..k_data {
        let target: Vec<FieldElement> =
            points.iter().map(|&p| f.frobenius(p, g_deg + e)).collect();
        let row_matrix = ExtMatrix::from_rows(vec![target]).expect("single row");
        let duals = nullspace(&row_matrix, f);
        debug_assert_eq!(duals.len(), n - 1);
        for h in duals {
            let row: Vec<FieldElement> = (0..n)
                .map(|c| f.mul(h[c], f.frobenius(points[c], e)))
                .collect();
            all_rows.push(row);
        }
    }
    let a = ExtMatrix::from_rows(all_rows).expect("rectangular");
    nullspace(&a, f)
}

fn masked_nullspace(
    points: &[FieldElement],
    k_data: usize,
    parity: &[Vec<FieldElement>],
    f: &FieldSpec,
) -> Vec<Vec<FieldElement>> {
    let n = points.len();
    let mut rows = Vec::with_capacity(k_data * parity.len());
    for e in 0..k_data {
        for h in parity {
            let row: Vec<FieldElement> = (0..n)
                .map(|c| f.mul(h[c], f.frobenius(points[c], e)))
                .collect();
            rows.push(row);
        }
    }
    if rows.is_empty() {
        // no parity constraints: every vector is admissible
        return (0..n)
            .map(|c| {
                let mut v = vec![FieldElement::ZERO; n];
                v[c] = f.one();
                v
            })
            .collect();
    }
    let a = ExtMatrix::from_rows(rows).expect("rectangular");
    nullspace(&a, f)
}

/// Sample a uniform element of the space spanned by `basis`.
pub fn sample_from_basis<R: rand::Rng + ?Sized>(
    rng: &mut R,
    basis: &[Vec<FieldElement>],
    n: usize,
    f: &FieldSpec,
) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::ZERO; n];
    for b in basis {
        let c = f.random(rng);
        if c.is_zero() {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(b) {
            *o = f.add(*o, f.mul(c, x));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::presets;
    use crate::linpoly::LinearizedPoly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mask_space_contains_constants_and_products_stay_in_span() {
        // storage G(3,2), query dim 1 over GF(2^3): span window is q-degrees 0..1
        let f = presets::gf8().unwrap();
        let star = GabidulinCode::with_alpha_powers(3, 2, &f).unwrap();
        let basis = admissible_mask_basis(&star, 2, &f);
        assert!(!basis.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mask = sample_from_basis(&mut rng, &basis, 3, &f);
            // product with a random storage codeword must lie in the span code
            let data = LinearizedPoly::from_coeffs(vec![f.random(&mut rng), f.random(&mut rng)]);
            let word: Vec<FieldElement> = star
                .points()
                .iter()
                .zip(&mask)
                .map(|(&p, &m)| f.mul(m, data.eval(p, &f)))
                .collect();
            assert!(star.contains(&word, &f));
        }
        // constants are admissible
        let ones = vec![f.one(); 3];
        let a = ExtMatrix::from_rows(basis.clone()).unwrap();
        let stacked = ExtMatrix::from_rows(
            basis.iter().cloned().chain(std::iter::once(ones)).collect(),
        )
        .unwrap();
        assert_eq!(a.rank_ext(&f), stacked.rank_ext(&f));
    }

    #[test]
    fn selector_pattern_lands_on_single_degree() {
        // k_data = 1 storage over GF(2^8), n = 8: target degree 2
        let f = presets::gf256().unwrap();
        let points: Vec<FieldElement> = (0..8).map(|i| f.alpha_pow(i)).collect();
        let basis = selector_pattern_basis(&points, 1, 2, &f);
        assert!(!basis.is_empty());
        let pattern = &basis[0];
        // (pattern_c * f0 * α_c)_c must equal λ·(α_c^{q^2})_c for any f0
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f0 = f.random_nonzero(&mut rng);
        let lambda = f
            .div(f.mul(pattern[0], f.mul(f0, points[0])), f.frobenius(points[0], 2))
            .unwrap();
        for c in 0..8 {
            let lhs = f.mul(pattern[c], f.mul(f0, points[c]));
            let rhs = f.mul(lambda, f.frobenius(points[c], 2));
            assert_eq!(lhs, rhs);
        }
    }
}
