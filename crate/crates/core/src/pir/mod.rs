//! The retrieval protocol: per-round query generation, oblivious server
//! responses, aggregation, per-round retrieval, and multi-round orchestration
//! for the error-free and errored network variants.

mod masks;
mod protocol;
mod round;

pub use masks::{admissible_mask_basis, sample_from_basis, selector_pattern_basis};
pub use protocol::{
    colluder_view, pir_rate, PirSession, ProtocolOptions, ProtocolRun, RateReport, Ratio,
    RoundRecord, Transcript,
};
pub use round::{
    aggregate, band_selector, build_query_round, build_random_part, default_band, lift_query,
    plan_selector, server_respond, unscramble, Aggregated, QueryRound, ResponsePacket,
    RoundValues,
};

use crate::channel::ChannelError;
use crate::ff::{FfError, FieldElement, FieldSpec};
use crate::gabidulin::{CodeError, DecodeError, GabidulinCode};
use crate::storage::{ParamsError, StorageError, SystemParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PirError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Field(#[from] FfError),
    #[error("selector schedule inadmissible: {0}")]
    SelectorInadmissible(String),
    #[error("file index {f} out of range 1..={m}")]
    FileIndex { f: usize, m: usize },
    #[error("duplicate equation for stripe {stripe} at coordinate {coord}")]
    DuplicateEquation { stripe: usize, coord: usize },
    #[error("no fresh coordinate left for stripe {stripe}")]
    NoFreshCoordinate { stripe: usize },
    #[error("stage budget {stages} exhausted before full recovery")]
    StageBudgetExhausted { stages: usize },
    #[error("round {round} undecodable: {source}")]
    RoundDecode { round: usize, source: DecodeError },
}

/// One selector pattern of the errored variant: stripe δ is requested through
/// a pattern whose product with the stripe's codeword lands on the single
/// q-degrees g+e, scaled by the known factors λ_e.
#[derive(Debug, Clone)]
pub struct SelectorEntry {
    pub delta: usize,
    pub g_deg: usize,
    pub pattern: Vec<FieldElement>,
    pub lambdas: Vec<FieldElement>,
}

/// Validated q-degree schedule for the errored variant, plus the accumulated
/// linear system that maps decoded top-window coefficients back to stripe data.
#[derive(Debug, Clone)]
pub struct SelectorPlan {
    /// rounds[i-1] lists the active selector entries of round i.
    pub rounds: Vec<Vec<SelectorEntry>>,
    /// (k·β)×(β·k) system: row (i−1)·β + (D − top_lo) over unknowns (δ−1)·k + e.
    pub system: crate::ff::ExtMatrix,
    pub top_lo: usize,
    pub top_hi: usize,
}

/// Precomputed protocol context: codes, mask basis, and (for the errored
/// variant) the validated selector plan.
#[derive(Debug, Clone)]
pub struct PirContext {
    field: FieldSpec,
    params: SystemParams,
    storage_code: GabidulinCode,
    star_code: GabidulinCode,
    decode_code: GabidulinCode,
    mask_basis: Vec<Vec<FieldElement>>,
    selector_plan: Option<SelectorPlan>,
}

impl PirContext {
    pub fn new(field: FieldSpec, params: SystemParams) -> Result<Self, PirError> {
        params.validate(&field)?;
        let storage_code = params.storage_code(&field)?;
        let query_code = GabidulinCode::with_alpha_powers(params.n, params.query_dim(), &field)?;
        let star_code = storage_code.star(&query_code)?;
        let mask_basis = admissible_mask_basis(&star_code, params.k, &field);
        debug_assert!(!mask_basis.is_empty(), "constants are always admissible");
        let (decode_code, selector_plan) = match params.variant {
            crate::storage::SchemeVariant::ErrorFree => (star_code.clone(), None),
            crate::storage::SchemeVariant::Errored { .. } => {
                let dim = params.k + params.query_dim() + params.beta() - 1;
                let code = GabidulinCode::with_alpha_powers(params.n, dim, &field)?;
                let plan = build_selector_plan(&field, &params, &code)?;
                (code, Some(plan))
            }
        };
        Ok(PirContext {
            field,
            params,
            storage_code,
            star_code,
            decode_code,
            mask_basis,
            selector_plan,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn storage_code(&self) -> &GabidulinCode {
        &self.storage_code
    }

    /// Code containing the masked response's random part (dimension k+tρ−1).
    pub fn star_code(&self) -> &GabidulinCode {
        &self.star_code
    }

    /// Code the per-round retrieval decodes over.
    pub fn decode_code(&self) -> &GabidulinCode {
        &self.decode_code
    }

    pub fn mask_basis(&self) -> &[Vec<FieldElement>] {
        &self.mask_basis
    }

    pub fn selector_plan(&self) -> Option<&SelectorPlan> {
        self.selector_plan.as_ref()
    }

    /// Error budget the per-round decoder absorbs (errored variant).
    pub fn eps_budget(&self) -> usize {
        match self.params.variant {
            crate::storage::SchemeVariant::ErrorFree => 0,
            crate::storage::SchemeVariant::Errored { eps, .. } => eps,
        }
    }
}

/// Exponent of the selector monomial for (round i, stripe δ), 1-based.
fn selector_degree(params: &SystemParams, i: usize, delta: usize) -> isize {
    (i * params.beta()) as isize - (delta * params.k) as isize
        + (params.k + params.query_dim()) as isize
        - 1
}

fn build_selector_plan(
    field: &FieldSpec,
    params: &SystemParams,
    decode_code: &GabidulinCode,
) -> Result<SelectorPlan, PirError> {
    let k = params.k;
    let beta = params.beta();
    let top_lo = params.k + params.query_dim() - 1;
    let top_hi = decode_code.k() - 1; // k + tρ + β − 2
    let points: Vec<FieldElement> = (0..params.n).map(|i| field.alpha_pow(i as u64)).collect();
    let mut rounds = Vec::with_capacity(k);
    let mut system = crate::ff::ExtMatrix::zeros(k * beta, beta * k);
    for i in 1..=k {
        let active = (i * beta).div_ceil(k).min(beta);
        let mut entries = Vec::new();
        for delta in 1..=active {
            let g = selector_degree(params, i, delta);
            if g < 0 {
                return Err(PirError::SelectorInadmissible(format!(
                    "round {i} stripe {delta}: exponent {g} is negative"
                )));
            }
            let g = g as usize;
            if g + k - 1 > top_hi {
                return Err(PirError::SelectorInadmissible(format!(
                    "round {i} stripe {delta}: q-degree {} exceeds the decodable window {top_hi}",
                    g + k - 1
                )));
            }
            let basis = selector_pattern_basis(&points, k, g, field);
            let Some(pattern) = basis.into_iter().next() else {
                return Err(PirError::SelectorInadmissible(format!(
                    "round {i} stripe {delta}: empty pattern space at exponent {g}"
                )));
            };
            let lambdas: Vec<FieldElement> = (0..k)
                .map(|e| {
                    let num = field.mul(pattern[0], field.frobenius(points[0], e));
                    field.div(num, field.frobenius(points[0], g + e)).expect("points nonzero")
                })
                .collect();
            for (e, &lambda) in lambdas.iter().enumerate() {
                let deg = g + e;
                if deg < top_lo {
                    continue; // lands below the window; covered by another round
                }
                let row = (i - 1) * beta + (deg - top_lo);
                let col = (delta - 1) * k + e;
                system[(row, col)] = field.add(system[(row, col)], lambda);
            }
            entries.push(SelectorEntry { delta, g_deg: g, pattern, lambdas });
        }
        rounds.push(entries);
    }
    if system.rank_ext(field) != beta * k {
        return Err(PirError::SelectorInadmissible(format!(
            "accumulated coefficient system has rank {} < {}",
            system.rank_ext(field),
            beta * k
        )));
    }
    Ok(SelectorPlan { rounds, system, top_lo, top_hi })
}
