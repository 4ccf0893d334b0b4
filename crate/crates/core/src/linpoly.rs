//! Linearized (q-)polynomials Σ f_i z^{q^i}.
//!
//! These are GF(q)-linear as maps on GF(q^s). Composition f(g(z)) is again
//! linearized with coefficients h_k = Σ_{i+j=k} f_i · g_j^{q^i}; the Frobenius
//! twist on g_j is what makes composition agree with pointwise evaluation.

use crate::ff::{BaseElem, FieldElement, FieldSpec};

/// Dense coefficient list indexed by q-degree; trailing zeros trimmed, so the
/// zero polynomial is the empty list (q-degree −1 by convention).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearizedPoly {
    coeffs: Vec<FieldElement>,
}

impl LinearizedPoly {
    pub fn zero() -> Self {
        LinearizedPoly { coeffs: Vec::new() }
    }

    /// The identity map z (coefficient 1 at q-degree 0).
    pub fn identity(f: &FieldSpec) -> Self {
        LinearizedPoly { coeffs: vec![f.one()] }
    }

    pub fn from_coeffs(coeffs: Vec<FieldElement>) -> Self {
        let mut p = LinearizedPoly { coeffs };
        p.trim();
        p
    }

    /// Single term c·z^{q^e}.
    pub fn monomial(c: FieldElement, e: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![FieldElement::ZERO; e + 1];
        coeffs[e] = c;
        LinearizedPoly { coeffs }
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, FieldElement::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// q-degree; `None` for the zero polynomial (conventionally −1).
    pub fn q_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).copied().unwrap_or(FieldElement::ZERO)
    }

    /// Σ_i f_i · x^{q^i}.
    pub fn eval(&self, x: FieldElement, f: &FieldSpec) -> FieldElement {
        let mut acc = FieldElement::ZERO;
        let mut xq = x;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                xq = f.frobenius(xq, 1);
            }
            if !c.is_zero() {
                acc = f.add(acc, f.mul(c, xq));
            }
        }
        acc
    }

    pub fn add(&self, other: &LinearizedPoly, f: &FieldSpec) -> LinearizedPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect();
        LinearizedPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: FieldElement, f: &FieldSpec) -> LinearizedPoly {
        let coeffs = self.coeffs.iter().map(|&x| f.mul(c, x)).collect();
        LinearizedPoly::from_coeffs(coeffs)
    }

    pub fn scale_base(&self, c: BaseElem, f: &FieldSpec) -> LinearizedPoly {
        let coeffs = self.coeffs.iter().map(|&x| f.scale_base(c, x)).collect();
        LinearizedPoly::from_coeffs(coeffs)
    }

    /// h = f∘g with h_k = Σ_{i+j=k} f_i · g_j^{q^i}, so that
    /// h.eval(x) = f.eval(g.eval(x)) for every x.
    pub fn compose(&self, g: &LinearizedPoly, f: &FieldSpec) -> LinearizedPoly {
        if self.is_zero() || g.is_zero() {
            return LinearizedPoly::zero();
        }
        let df = self.coeffs.len() - 1;
        let dg = g.coeffs.len() - 1;
        let mut out = vec![FieldElement::ZERO; df + dg + 1];
        for (i, &fi) in self.coeffs.iter().enumerate() {
            if fi.is_zero() {
                continue;
            }
            for (j, &gj) in g.coeffs.iter().enumerate() {
                if gj.is_zero() {
                    continue;
                }
                let t = f.mul(fi, f.frobenius(gj, i));
                out[i + j] = f.add(out[i + j], t);
            }
        }
        LinearizedPoly::from_coeffs(out)
    }
}
