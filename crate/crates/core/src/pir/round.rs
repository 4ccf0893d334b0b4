//! Single-round machinery: query construction, the oblivious server
//! projection, response aggregation, and channel unscrambling.

use super::masks::sample_from_basis;
use super::PirContext;
use crate::ff::{ExtMatrix, FieldElement, FieldSpec};
use crate::storage::{stripe_row, SystemParams};

/// One round's query material. `band` lists the (coordinate, stripe-row)
/// impulse positions of the error-free selector; the errored variant carries
/// its selector patterns instead and leaves `band` empty.
#[derive(Debug, Clone)]
pub struct QueryRound {
    pub round: usize,
    pub stage: usize,
    pub band: Vec<(usize, usize)>,
    pub masks: ExtMatrix,
    pub d_q: ExtMatrix,
    pub lifted: Vec<ExtMatrix>,
}

/// Default error-free band of round i: stripe δ of file f is requested at
/// coordinate (i−1)+(δ−1).
pub fn default_band(params: &SystemParams, file: usize, round: usize) -> Vec<(usize, usize)> {
    (1..=params.beta())
        .map(|delta| (round - 1 + delta - 1, stripe_row(params, file, delta)))
        .collect()
}

/// Selector matrix E (n×mβ) with a 1 at each (coordinate, stripe-row) impulse.
pub fn band_selector(params: &SystemParams, band: &[(usize, usize)], f: &FieldSpec) -> ExtMatrix {
    let mut e = ExtMatrix::zeros(params.n, params.mbeta());
    for &(coord, row) in band {
        e[(coord, row)] = f.one();
    }
    e
}

/// Selector matrix of the errored variant for round i: pattern columns at the
/// requested file's stripe rows.
pub fn plan_selector(ctx: &PirContext, file: usize, round: usize) -> ExtMatrix {
    let params = ctx.params();
    let f = ctx.field();
    let plan = ctx.selector_plan().expect("errored variant");
    let mut e = ExtMatrix::zeros(params.n, params.mbeta());
    for entry in &plan.rounds[round - 1] {
        let col = stripe_row(params, file, entry.delta);
        for c in 0..params.n {
            e[(c, col)] = f.add(e[(c, col)], entry.pattern[c]);
        }
    }
    e
}

/// Fresh mask matrix: every stripe row drawn uniformly from the admissible
/// mask space.
pub fn build_random_part<R: rand::Rng + ?Sized>(rng: &mut R, ctx: &PirContext) -> ExtMatrix {
    let params = ctx.params();
    let f = ctx.field();
    let rows = (0..params.mbeta())
        .map(|_| sample_from_basis(rng, ctx.mask_basis(), params.n, f))
        .collect();
    ExtMatrix::from_rows(rows).expect("rectangular")
}

/// Per-server lifted query blocks Q_j = (I_ρ | rows jρ..(j+1)ρ−1 of D_Q).
pub fn lift_query(d_q: &ExtMatrix, params: &SystemParams, f: &FieldSpec) -> Vec<ExtMatrix> {
    let rho = params.rho();
    (0..params.l)
        .map(|j| {
            let block = d_q.slice_rows(j * rho, (j + 1) * rho);
            ExtMatrix::identity(rho, f).hstack(&block).expect("row counts match")
        })
        .collect()
}

/// Build a full query round. For the error-free variant pass the impulse
/// `band`; for the errored variant pass the requested file and an empty band.
pub fn build_query_round<R: rand::Rng + ?Sized>(
    rng: &mut R,
    ctx: &PirContext,
    file: usize,
    round: usize,
    stage: usize,
    band: Option<Vec<(usize, usize)>>,
) -> QueryRound {
    let params = ctx.params();
    let f = ctx.field();
    let masks = build_random_part(rng, ctx);
    let (selector, band) = match (&band, ctx.selector_plan()) {
        (Some(b), _) => (band_selector(params, b, f), b.clone()),
        (None, Some(_)) => (plan_selector(ctx, file, round), Vec::new()),
        (None, None) => {
            let b = default_band(params, file, round);
            (band_selector(params, &b, f), b)
        }
    };
    let mt = masks.transpose();
    let d_q = mt.add(&selector, f).expect("shapes agree");
    let lifted = lift_query(&d_q, params, f);
    QueryRound { round, stage, band, masks, d_q, lifted }
}

/// Server response packet: (I_ρ | Â_j | projection), where the projection's
/// entry (c, w) is received[c, ρ+w] · Y_j[w, c].
#[derive(Debug, Clone)]
pub struct ResponsePacket {
    pub server: usize,
    pub matrix: ExtMatrix,
}

/// The oblivious projection. Returns None when the received query is all
/// zero: such a server sends nothing back.
pub fn server_respond(
    server: usize,
    y_block: &ExtMatrix,
    received: &ExtMatrix,
    f: &FieldSpec,
) -> Option<ResponsePacket> {
    let rho = received.rows();
    let mbeta = received.cols() - rho;
    let all_zero = (0..rho)
        .all(|r| (0..received.cols()).all(|c| received[(r, c)].is_zero()));
    if all_zero {
        return None;
    }
    let mut out = ExtMatrix::zeros(rho, 2 * rho + mbeta);
    for r in 0..rho {
        out[(r, r)] = f.one();
        for c in 0..rho {
            out[(r, rho + c)] = received[(r, c)];
        }
        for w in 0..mbeta {
            out[(r, 2 * rho + w)] = f.mul(received[(r, rho + w)], y_block[(w, r)]);
        }
    }
    Some(ResponsePacket { server, matrix: out })
}

/// Aggregated responses: block-diagonal placement of the per-server blocks
/// into the n×(2n+mβ) matrix, plus per-coordinate availability flags.
#[derive(Debug, Clone)]
pub struct Aggregated {
    pub r_rec: ExtMatrix,
    pub present: Vec<bool>,
}

pub fn aggregate(
    packets: &[Option<ResponsePacket>],
    params: &SystemParams,
) -> Aggregated {
    let n = params.n;
    let rho = params.rho();
    let mbeta = params.mbeta();
    let mut r_rec = ExtMatrix::zeros(n, 2 * n + mbeta);
    let mut present = vec![false; n];
    for (j, packet) in packets.iter().enumerate() {
        let Some(packet) = packet else { continue };
        let m = &packet.matrix;
        for local in 0..rho {
            let c = j * rho + local;
            present[c] = true;
            for cc in 0..rho {
                r_rec[(c, j * rho + cc)] = m[(local, cc)];
                r_rec[(c, n + j * rho + cc)] = m[(local, rho + cc)];
            }
            for w in 0..mbeta {
                r_rec[(c, 2 * n + w)] = m[(local, 2 * rho + w)];
            }
        }
    }
    Aggregated { r_rec, present }
}

/// Per-coordinate unscrambled response values; None marks an erased
/// coordinate (missing packet or non-invertible transfer scalar).
#[derive(Debug, Clone)]
pub struct RoundValues {
    pub values: Vec<Option<FieldElement>>,
}

impl RoundValues {
    pub fn erased(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(c, v)| v.is_none().then_some(c))
            .collect()
    }

    pub fn available(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

/// Undo the channel action per coordinate: a'_c from the first lifted block,
/// the composite a'_c·â_c from the second, then divide the payload row sum.
pub fn unscramble(agg: &Aggregated, params: &SystemParams, f: &FieldSpec) -> RoundValues {
    let n = params.n;
    let mbeta = params.mbeta();
    let values = (0..n)
        .map(|c| {
            if !agg.present[c] {
                return None;
            }
            let a_down = agg.r_rec[(c, c)];
            if a_down.is_zero() {
                return None;
            }
            let composite = agg.r_rec[(c, n + c)];
            let a_up = f.div(composite, a_down).expect("a_down nonzero");
            if a_up.is_zero() {
                return None;
            }
            let mut sum = FieldElement::ZERO;
            for w in 0..mbeta {
                sum = f.add(sum, agg.r_rec[(c, 2 * n + w)]);
            }
            let scale = f.inv(f.mul(a_down, a_up)).expect("both nonzero");
            Some(f.mul(scale, sum))
        })
        .collect();
    RoundValues { values }
}
