//! Random-linear-network channel simulator.
//!
//! Transfer matrices act per sub-server (diagonal blocks): the retrieval's
//! per-coordinate unscrambling relies on Y ⋆ (A·M) = A·(Y ⋆ M), which holds
//! exactly for diagonal A, and the per-coordinate full-rank probability
//! accounting (16 independent scalars in the two-matrices-per-round model)
//! is what the closed forms count. Rank-bounded additive errors are injected
//! as row-supported noise so the end-to-end perturbation rank the decoder
//! must absorb stays within the configured budget.

use crate::ff::{ExtMatrix, FieldElement, FieldSpec};
use crate::storage::SystemParams;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChannelError {
    #[error("rank profile needs one target per server ({l}), got {got}")]
    ProfileLength { l: usize, got: usize },
    #[error("rank target {r} exceeds block size {rho}")]
    RankTarget { r: usize, rho: usize },
    #[error("error budgets eps_up {eps_up} + eps_down {eps_down} exceed the scheme's eps {eps}")]
    ErrorBudget { eps_up: usize, eps_down: usize, eps: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelMode {
    /// Degenerate baseline: every transfer scalar is 1.
    Identity,
    /// Every transfer scalar i.i.d. uniform over GF(q^s) (zero included).
    Uniform,
    /// Per-server diagonal blocks of exactly the requested ranks.
    RankProfile { uplink_ranks: Vec<usize>, downlink_ranks: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelConfig {
    pub mode: ChannelMode,
    /// Rank budget for uplink error injection (rows of the query corrupted).
    pub eps_up: usize,
    /// Rank budget for downlink error injection (rows of the response corrupted).
    pub eps_down: usize,
    /// Erasure budget the scheme is provisioned for (informational; erasures
    /// are realized through rank-deficient transfer scalars).
    pub tau: usize,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn identity() -> Self {
        ChannelConfig { mode: ChannelMode::Identity, eps_up: 0, eps_down: 0, tau: 0, seed: 0 }
    }

    pub fn uniform(seed: u64) -> Self {
        ChannelConfig { mode: ChannelMode::Uniform, eps_up: 0, eps_down: 0, tau: 0, seed }
    }

    pub fn validate(&self, params: &SystemParams) -> Result<(), ChannelError> {
        if let ChannelMode::RankProfile { uplink_ranks, downlink_ranks } = &self.mode {
            for ranks in [uplink_ranks, downlink_ranks] {
                if ranks.len() != params.l {
                    return Err(ChannelError::ProfileLength { l: params.l, got: ranks.len() });
                }
                if let Some(&r) = ranks.iter().find(|&&r| r > params.rho()) {
                    return Err(ChannelError::RankTarget { r, rho: params.rho() });
                }
            }
        }
        if let crate::storage::SchemeVariant::Errored { eps, .. } = params.variant {
            if self.eps_up + self.eps_down > eps {
                return Err(ChannelError::ErrorBudget {
                    eps_up: self.eps_up,
                    eps_down: self.eps_down,
                    eps,
                });
            }
        }
        Ok(())
    }
}

/// A noise row: uniform additive corruption of one matrix row, addressed by
/// global sub-server coordinate.
#[derive(Debug, Clone)]
pub struct NoiseRow {
    pub coord: usize,
    pub row: Vec<FieldElement>,
}

/// One round's channel draw.
#[derive(Debug, Clone)]
pub struct LinkRealization {
    /// Per-sub-server uplink transfer scalar a_c (diagonal of A).
    pub uplink: Vec<FieldElement>,
    /// Per-sub-server downlink transfer scalar a'_c (diagonal of A').
    pub downlink: Vec<FieldElement>,
    /// Row-supported uplink noise, width ρ+mβ.
    pub uplink_noise: Vec<NoiseRow>,
    /// Row-supported downlink noise, width 2ρ+mβ.
    pub downlink_noise: Vec<NoiseRow>,
}

impl LinkRealization {
    /// Ranks of the per-server diagonal blocks, uplink then downlink.
    pub fn block_ranks(&self, params: &SystemParams) -> (Vec<usize>, Vec<usize>) {
        let rho = params.rho();
        let count = |diag: &[FieldElement]| {
            (0..params.l)
                .map(|j| diag[j * rho..(j + 1) * rho].iter().filter(|x| !x.is_zero()).count())
                .collect()
        };
        (count(&self.uplink), count(&self.downlink))
    }
}

fn sample_diag<R: rand::Rng + ?Sized>(
    rng: &mut R,
    f: &FieldSpec,
    params: &SystemParams,
    mode_ranks: Option<&[usize]>,
    uniform: bool,
) -> Vec<FieldElement> {
    let n = params.n;
    let rho = params.rho();
    match (mode_ranks, uniform) {
        (Some(ranks), _) => {
            let mut diag = vec![FieldElement::ZERO; n];
            for (j, &r) in ranks.iter().enumerate() {
                let mut idx: Vec<usize> = (0..rho).collect();
                // choose r positions to be nonzero
                for i in 0..rho {
                    let pick = rng.gen_range(i..rho);
                    idx.swap(i, pick);
                }
                for &local in idx.iter().take(r) {
                    diag[j * rho + local] = f.random_nonzero(rng);
                }
            }
            diag
        }
        (None, true) => (0..n).map(|_| f.random(rng)).collect(),
        (None, false) => vec![f.one(); n],
    }
}

/// Fresh per-round channel realization.
pub fn sample_links<R: rand::Rng + ?Sized>(
    rng: &mut R,
    config: &ChannelConfig,
    params: &SystemParams,
    f: &FieldSpec,
) -> LinkRealization {
    let (uplink, downlink) = match &config.mode {
        ChannelMode::Identity => (
            sample_diag(rng, f, params, None, false),
            sample_diag(rng, f, params, None, false),
        ),
        ChannelMode::Uniform => (
            sample_diag(rng, f, params, None, true),
            sample_diag(rng, f, params, None, true),
        ),
        ChannelMode::RankProfile { uplink_ranks, downlink_ranks } => (
            sample_diag(rng, f, params, Some(uplink_ranks), false),
            sample_diag(rng, f, params, Some(downlink_ranks), false),
        ),
    };
    let mbeta = params.mbeta();
    let rho = params.rho();
    let up_live: Vec<bool> = uplink.iter().map(|a| !a.is_zero()).collect();
    let both_live: Vec<bool> = uplink
        .iter()
        .zip(&downlink)
        .map(|(a, b)| !a.is_zero() && !b.is_zero())
        .collect();
    let uplink_noise =
        sample_noise(rng, f, params, &uplink, &up_live, config.eps_up, rho + mbeta, 0);
    let downlink_noise =
        sample_noise(rng, f, params, &downlink, &both_live, config.eps_down, 2 * rho + mbeta, rho);
    LinkRealization { uplink, downlink, uplink_noise, downlink_noise }
}

/// Choose `count` distinct live coordinates and a uniform noise row for each.
/// Noise stays off erased coordinates (corrupting a dead row would turn an
/// erasure into an unlocated error and double-count the decoding budget), and
/// rows are resampled if they would zero the lifting scalar the retrieval
/// reads (the converse substitution).
fn sample_noise<R: rand::Rng + ?Sized>(
    rng: &mut R,
    f: &FieldSpec,
    params: &SystemParams,
    diag: &[FieldElement],
    live: &[bool],
    count: usize,
    width: usize,
    lift_offset: usize,
) -> Vec<NoiseRow> {
    if count == 0 {
        return Vec::new();
    }
    let rho = params.rho();
    let mut coords: Vec<usize> = (0..params.n).filter(|&c| live[c]).collect();
    let alive = coords.len();
    let count = count.min(alive);
    for i in 0..count {
        let pick = rng.gen_range(i..alive);
        coords.swap(i, pick);
    }
    coords.truncate(count);
    coords.sort_unstable();
    coords
        .into_iter()
        .map(|coord| {
            let local = coord % rho;
            loop {
                let row: Vec<FieldElement> = (0..width).map(|_| f.random(rng)).collect();
                let lift_col = lift_offset + local;
                if !f.add(diag[coord], row[lift_col]).is_zero() {
                    return NoiseRow { coord, row };
                }
            }
        })
        .collect()
}

/// Apply the uplink channel to server j's lifted query (ρ×(ρ+mβ)):
/// left-multiply by the diagonal block, then add noise rows.
pub fn transmit_uplink(
    query: &ExtMatrix,
    realization: &LinkRealization,
    j: usize,
    params: &SystemParams,
    f: &FieldSpec,
) -> ExtMatrix {
    apply_block(query, &realization.uplink, &realization.uplink_noise, j, params, f)
}

/// Apply the downlink channel to server j's response (ρ×(2ρ+mβ)).
pub fn transmit_downlink(
    response: &ExtMatrix,
    realization: &LinkRealization,
    j: usize,
    params: &SystemParams,
    f: &FieldSpec,
) -> ExtMatrix {
    apply_block(response, &realization.downlink, &realization.downlink_noise, j, params, f)
}

fn apply_block(
    m: &ExtMatrix,
    diag: &[FieldElement],
    noise: &[NoiseRow],
    j: usize,
    params: &SystemParams,
    f: &FieldSpec,
) -> ExtMatrix {
    let rho = params.rho();
    let mut out = ExtMatrix::zeros(m.rows(), m.cols());
    for local in 0..rho {
        let a = diag[j * rho + local];
        for c in 0..m.cols() {
            out[(local, c)] = f.mul(a, m[(local, c)]);
        }
    }
    for nr in noise {
        if nr.coord / rho == j {
            let local = nr.coord % rho;
            for c in 0..m.cols() {
                out[(local, c)] = f.add(out[(local, c)], nr.row[c]);
            }
        }
    }
    out
}
