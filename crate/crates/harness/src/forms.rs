//! Closed-form probabilities and rates for the uniform per-sub-server channel
//! model: per round, each of the n coordinates carries two independent
//! uniform transfer scalars, so a coordinate survives with probability
//! (1 − 1/q^s)^2.

use rankpir_core::ff::FieldSpec;
use rankpir_core::storage::SystemParams;

#[derive(Debug, Clone)]
pub struct ClosedForms {
    pub q_s: f64,
    /// Lower bound on P(rk(A) = n) for one uniform n×n matrix.
    pub full_rank_bound: f64,
    /// Per-round probability that every coordinate survives both directions.
    pub round_full: f64,
    /// P_δ for δ = 1..=β: all non-band coordinates clean and exactly β−δ band
    /// coordinates erased; the δ = 0 entry is the complement (a round that
    /// yields nothing, whatever the failure pattern).
    pub p_delta: Vec<f64>,
    /// Average realized per-round download rate Σ P_δ·δ/n.
    pub avg_realized_rate: f64,
    /// File error probability, printed exponent 2n+k.
    pub file_error_2n_plus_k: f64,
    /// File error probability with the per-round-per-coordinate exponent 2nk.
    pub file_error_2nk: f64,
    /// Closed-form PIR rate β/n = 1 − (k+tρ−1)/n.
    pub rate: f64,
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

pub fn closed_forms(params: &SystemParams, field: &FieldSpec) -> ClosedForms {
    let q_s = field.order() as f64;
    let n = params.n;
    let k = params.k;
    let beta = params.beta();
    let x = 1.0 / q_s;
    let coord_ok = (1.0 - x) * (1.0 - x);
    let pi = 1.0 - coord_ok;
    let mut p_delta: Vec<f64> = (0..=beta)
        .map(|delta| {
            coord_ok.powi((n - beta) as i32)
                * binom(beta, delta)
                * coord_ok.powi(delta as i32)
                * pi.powi((beta - delta) as i32)
        })
        .collect();
    p_delta[0] = 1.0 - p_delta[1..].iter().sum::<f64>();
    let avg_realized_rate =
        p_delta.iter().enumerate().map(|(d, p)| p * d as f64 / n as f64).sum();
    ClosedForms {
        q_s,
        full_rank_bound: (1.0 - x).powi(n as i32),
        round_full: (1.0 - x).powi(2 * n as i32),
        p_delta,
        avg_realized_rate,
        file_error_2n_plus_k: 1.0 - (1.0 - x).powi((2 * n + k) as i32),
        file_error_2nk: 1.0 - (1.0 - x).powi((2 * n * k) as i32),
        rate: beta as f64 / n as f64,
    }
}
