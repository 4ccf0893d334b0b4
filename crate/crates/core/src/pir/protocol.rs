//! Multi-round orchestration: retrieval state, staged re-querying, rate
//! accounting, transcripts, and the colluder view extractor.

use super::round::{
    aggregate, build_query_round, server_respond, unscramble, QueryRound, ResponsePacket,
    RoundValues,
};
use super::{PirContext, PirError};
use crate::channel::{sample_links, transmit_downlink, transmit_uplink, ChannelConfig};
use crate::ff::{solve_linear, ExtMatrix, FieldElement};
use crate::gabidulin::DecodeError;
use crate::storage::{encode_storage, stripe_files, stripe_row, EncodedStorage, FileSet};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Exact rational, reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0);
        let g = gcd(num.max(1), den);
        let g = if num == 0 { den } else { g };
        Ratio { num: num / g, den: den / g }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One transcript record per round sent.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub stage: usize,
    pub round: usize,
    pub uplink_ranks: Vec<usize>,
    pub downlink_ranks: Vec<usize>,
    pub erased: Vec<usize>,
    /// Payload symbols received (ρ per responding server).
    pub downloaded: usize,
    /// (stripe δ, coordinate) equations recovered this round (error-free).
    pub recovered: Vec<(usize, usize)>,
    pub delta: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Transcript {
    pub rounds: Vec<RoundRecord>,
    pub seed_note: String,
}

impl Transcript {
    pub fn total_downloaded(&self) -> usize {
        self.rounds.iter().map(|r| r.downloaded).sum()
    }

    pub fn stages_used(&self) -> usize {
        self.rounds.iter().map(|r| r.stage).max().unwrap_or(0)
    }

    /// One structured text record per round.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        if !self.seed_note.is_empty() {
            out.push_str(&format!("# {}\n", self.seed_note));
        }
        for r in &self.rounds {
            out.push_str(&format!(
                "stage={} round={} up_ranks={:?} down_ranks={:?} erased={:?} downloaded={} delta={} recovered={:?}\n",
                r.stage, r.round, r.uplink_ranks, r.downlink_ranks, r.erased, r.downloaded,
                r.delta, r.recovered
            ));
        }
        out
    }
}

/// A completed run: the recovered stripes of the requested file plus the
/// transcript.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub stripes: Vec<Vec<FieldElement>>,
    pub transcript: Transcript,
    pub queries: Vec<QueryRound>,
}

#[derive(Debug, Clone, Copy)]
pub struct ProtocolOptions {
    /// Maximum number of stages (the primary pass is stage 1).
    pub max_stages: usize,
    /// Record the query rounds in the run output (needed by privacy tests).
    pub keep_queries: bool,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions { max_stages: 4, keep_queries: false }
    }
}

/// Download-rate report: counted from the transcript and the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateReport {
    pub retrieved_symbols: u64,
    pub downloaded_symbols: u64,
    pub counted: Ratio,
    pub closed_form: Ratio,
}

/// Definitional rate (retrieved / downloaded) next to the closed form β/n.
pub fn pir_rate(transcript: &Transcript, ctx: &PirContext) -> RateReport {
    let params = ctx.params();
    let retrieved = (params.beta() * params.k) as u64;
    let downloaded = transcript.total_downloaded() as u64;
    let counted =
        if downloaded == 0 { Ratio::new(0, 1) } else { Ratio::new(retrieved, downloaded) };
    RateReport {
        retrieved_symbols: retrieved,
        downloaded_symbols: downloaded,
        counted,
        closed_form: Ratio::new(params.beta() as u64, params.n as u64),
    }
}

/// The joint query content delivered to a set of (whole) servers: for each
/// round, the lifted rows those servers received, stacked.
pub fn colluder_view(rounds: &[QueryRound], servers: &[usize]) -> Vec<ExtMatrix> {
    rounds
        .iter()
        .map(|qr| {
            let rows: Vec<Vec<FieldElement>> = servers
                .iter()
                .flat_map(|&j| {
                    let q = &qr.lifted[j];
                    (0..q.rows()).map(move |r| q.row(r).to_vec())
                })
                .collect();
            ExtMatrix::from_rows(rows).expect("rectangular")
        })
        .collect()
}

/// A storage deployment plus protocol context, ready to serve retrieval runs.
pub struct PirSession<'a> {
    ctx: &'a PirContext,
    storage: EncodedStorage,
}

/// Result of a single error-free round: equations recovered, or why not.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub values: RoundValues,
    /// (stripe row, coordinate, value) equations extracted from the band.
    pub equations: Vec<(usize, usize, FieldElement)>,
    pub delta: usize,
    pub downloaded: usize,
    pub decode_failed: bool,
}

impl<'a> PirSession<'a> {
    pub fn new(ctx: &'a PirContext, files: &FileSet) -> Result<Self, PirError> {
        let x = stripe_files(files, ctx.params())?;
        let storage = encode_storage(&x, ctx.storage_code(), ctx.params(), ctx.field())?;
        Ok(PirSession { ctx, storage })
    }

    pub fn storage(&self) -> &EncodedStorage {
        &self.storage
    }

    /// Push one query round through the channel and the servers, then
    /// unscramble. Returns the per-coordinate values and download count.
    fn exchange<R: rand::Rng + ?Sized>(
        &self,
        qr: &QueryRound,
        channel_cfg: &ChannelConfig,
        channel_rng: &mut R,
    ) -> (RoundValues, usize, Vec<usize>, Vec<usize>) {
        let ctx = self.ctx;
        let params = ctx.params();
        let f = ctx.field();
        let real = sample_links(channel_rng, channel_cfg, params, f);
        let (up_ranks, down_ranks) = real.block_ranks(params);
        let mut downloaded = 0usize;
        let packets: Vec<Option<ResponsePacket>> = (0..params.l)
            .map(|j| {
                let rec = transmit_uplink(&qr.lifted[j], &real, j, params, f);
                server_respond(j, &self.storage.block(j), &rec, f).map(|p| {
                    downloaded += params.rho();
                    ResponsePacket {
                        server: j,
                        matrix: transmit_downlink(&p.matrix, &real, j, params, f),
                    }
                })
            })
            .collect();
        let agg = aggregate(&packets, params);
        let values = unscramble(&agg, params, f);
        (values, downloaded, up_ranks, down_ranks)
    }

    /// Error-free per-round retrieval: erasure-decode the star code with the
    /// band and channel-erased coordinates erased; band discrepancies are the
    /// requested storage symbols.
    pub fn retrieve_round_errorfree(
        &self,
        values: &RoundValues,
        band: &[(usize, usize)],
    ) -> RoundOutcome {
        let ctx = self.ctx;
        let f = ctx.field();
        let n = ctx.params().n;
        let mut erased: BTreeSet<usize> = values.erased().into_iter().collect();
        for &(coord, _) in band {
            erased.insert(coord);
        }
        let word: Vec<FieldElement> =
            (0..n).map(|c| values.values[c].unwrap_or(FieldElement::ZERO)).collect();
        let decoded = match ctx.star_code().erasure_decode(&word, &erased, f) {
            Ok(d) => d,
            Err(_) => {
                return RoundOutcome {
                    values: values.clone(),
                    equations: Vec::new(),
                    delta: 0,
                    downloaded: 0,
                    decode_failed: true,
                }
            }
        };
        let disc: BTreeMap<usize, FieldElement> = decoded.discrepancies.into_iter().collect();
        let mut equations = Vec::new();
        for &(coord, row) in band {
            if values.values[coord].is_some() {
                equations.push((row, coord, disc[&coord]));
            }
        }
        let delta = equations.len();
        RoundOutcome {
            values: values.clone(),
            equations,
            delta,
            downloaded: 0,
            decode_failed: false,
        }
    }

    /// Run one error-free round end to end (used by the probability harness).
    pub fn probe_round<R: rand::Rng + ?Sized>(
        &self,
        file: usize,
        round: usize,
        channel_cfg: &ChannelConfig,
        mask_rng: &mut R,
        channel_rng: &mut R,
    ) -> Result<RoundOutcome, PirError> {
        let ctx = self.ctx;
        self.check_file(file)?;
        let qr = build_query_round(mask_rng, ctx, file, round, 1, None);
        let (values, downloaded, _, _) = self.exchange(&qr, channel_cfg, channel_rng);
        let mut outcome = self.retrieve_round_errorfree(&values, &qr.band);
        outcome.downloaded = downloaded;
        Ok(outcome)
    }

    fn check_file(&self, file: usize) -> Result<(), PirError> {
        let m = self.ctx.params().m;
        if file == 0 || file > m {
            return Err(PirError::FileIndex { f: file, m });
        }
        Ok(())
    }

    /// Full multi-round retrieval of file `file` (1-based).
    pub fn run<R: rand::Rng + ?Sized>(
        &self,
        file: usize,
        channel_cfg: &ChannelConfig,
        mask_rng: &mut R,
        channel_rng: &mut R,
        options: ProtocolOptions,
    ) -> Result<ProtocolRun, PirError> {
        self.check_file(file)?;
        match self.ctx.selector_plan() {
            None => self.run_errorfree(file, channel_cfg, mask_rng, channel_rng, options),
            Some(_) => self.run_errored(file, channel_cfg, mask_rng, channel_rng, options),
        }
    }

    fn run_errorfree<R: rand::Rng + ?Sized>(
        &self,
        file: usize,
        channel_cfg: &ChannelConfig,
        mask_rng: &mut R,
        channel_rng: &mut R,
        options: ProtocolOptions,
    ) -> Result<ProtocolRun, PirError> {
        let ctx = self.ctx;
        let params = ctx.params();
        let f = ctx.field();
        let beta = params.beta();
        let k = params.k;
        // per-stripe equation sets, keyed by coordinate; at most one equation
        // per (stripe, coordinate) pair across all rounds and stages
        let mut state: Vec<BTreeMap<usize, FieldElement>> = vec![BTreeMap::new(); beta];
        let mut transcript = Transcript::default();
        let mut queries = Vec::new();
        let mut round_counter = 0usize;

        let send = |band: Vec<(usize, usize)>,
                        stage: usize,
                        mask_rng: &mut R,
                        channel_rng: &mut R,
                        state: &mut Vec<BTreeMap<usize, FieldElement>>,
                        transcript: &mut Transcript,
                        queries: &mut Vec<QueryRound>,
                        round_counter: &mut usize|
         -> Result<(), PirError> {
            *round_counter += 1;
            let qr = build_query_round(mask_rng, ctx, file, *round_counter, stage, Some(band));
            let (values, downloaded, up_ranks, down_ranks) =
                self.exchange(&qr, channel_cfg, channel_rng);
            let outcome = self.retrieve_round_errorfree(&values, &qr.band);
            let mut recovered = Vec::new();
            for &(row, coord, value) in &outcome.equations {
                let delta = row - stripe_row(params, file, 1) + 1;
                let slot = &mut state[delta - 1];
                if slot.contains_key(&coord) {
                    return Err(PirError::DuplicateEquation { stripe: delta, coord });
                }
                slot.insert(coord, value);
                recovered.push((delta, coord));
            }
            transcript.rounds.push(RoundRecord {
                stage,
                round: *round_counter,
                uplink_ranks: up_ranks,
                downlink_ranks: down_ranks,
                erased: values.erased(),
                downloaded,
                recovered,
                delta: outcome.delta,
            });
            if options.keep_queries {
                queries.push(qr);
            }
            Ok(())
        };

        // primary pass: k rounds with the sliding band
        for i in 1..=k {
            let band = super::round::default_band(params, file, i);
            send(
                band,
                1,
                mask_rng,
                channel_rng,
                &mut state,
                &mut transcript,
                &mut queries,
                &mut round_counter,
            )?;
        }
        // staged re-querying: each stage sweeps every stripe still short of k
        // equations once, always at a coordinate it has not been asked at
        let mut stage = 2;
        loop {
            let needy: Vec<usize> = (0..beta).filter(|&d| state[d].len() < k).collect();
            if needy.is_empty() {
                break;
            }
            if stage > options.max_stages {
                return Err(PirError::StageBudgetExhausted { stages: options.max_stages });
            }
            for batch in needy.chunks(beta) {
                let mut band = Vec::new();
                let mut taken: BTreeSet<usize> = BTreeSet::new();
                for &d in batch {
                    let fresh = (0..params.n)
                        .find(|c| !state[d].contains_key(c) && !taken.contains(c));
                    let Some(coord) = fresh else {
                        return Err(PirError::NoFreshCoordinate { stripe: d + 1 });
                    };
                    taken.insert(coord);
                    band.push((coord, stripe_row(params, file, d + 1)));
                }
                send(
                    band,
                    stage,
                    mask_rng,
                    channel_rng,
                    &mut state,
                    &mut transcript,
                    &mut queries,
                    &mut round_counter,
                )?;
            }
            stage += 1;
        }
        // solve each stripe from any k of its equations
        let mut stripes = Vec::with_capacity(beta);
        for eqs in &state {
            let coords: Vec<usize> = eqs.keys().copied().take(k).collect();
            let vals: Vec<FieldElement> = coords.iter().map(|c| eqs[c]).collect();
            let msg = ctx.storage_code().interpolate(&coords, &vals, f).map_err(|e| {
                PirError::RoundDecode { round: round_counter, source: e }
            })?;
            stripes.push(msg);
        }
        Ok(ProtocolRun { stripes, transcript, queries })
    }

    fn run_errored<R: rand::Rng + ?Sized>(
        &self,
        file: usize,
        channel_cfg: &ChannelConfig,
        mask_rng: &mut R,
        channel_rng: &mut R,
        options: ProtocolOptions,
    ) -> Result<ProtocolRun, PirError> {
        let ctx = self.ctx;
        let params = ctx.params();
        let f = ctx.field();
        let beta = params.beta();
        let k = params.k;
        let plan = ctx.selector_plan().expect("errored variant");
        let eps_budget = ctx.eps_budget();
        let dm1 = ctx.decode_code().d() - 1;
        let mut transcript = Transcript::default();
        let mut queries = Vec::new();
        let mut rhs = vec![FieldElement::ZERO; k * beta];
        for i in 1..=k {
            let qr = build_query_round(mask_rng, ctx, file, i, 1, None);
            let (values, downloaded, up_ranks, down_ranks) =
                self.exchange(&qr, channel_cfg, channel_rng);
            let erased: BTreeSet<usize> = values.erased().into_iter().collect();
            let word: Vec<FieldElement> = (0..params.n)
                .map(|c| values.values[c].unwrap_or(FieldElement::ZERO))
                .collect();
            // the correctable error radius adapts to the observed erasures:
            // 2ε + |erased| ≤ d−1, capped by the provisioned budget
            let eps = eps_budget.min(dm1.saturating_sub(erased.len()) / 2);
            let decoded = ctx
                .decode_code()
                .error_erasure_decode(&word, &erased, eps, f)
                .map_err(|e| PirError::RoundDecode { round: i, source: e })?;
            for d in plan.top_lo..=plan.top_hi {
                rhs[(i - 1) * beta + (d - plan.top_lo)] = decoded.message[d];
            }
            transcript.rounds.push(RoundRecord {
                stage: 1,
                round: i,
                uplink_ranks: up_ranks,
                downlink_ranks: down_ranks,
                erased: erased.iter().copied().collect(),
                downloaded,
                recovered: Vec::new(),
                delta: beta,
            });
            if options.keep_queries {
                queries.push(qr);
            }
        }
        // solve the accumulated coefficient system for the stripe data
        let b = ExtMatrix::from_rows(rhs.into_iter().map(|v| vec![v]).collect())
            .expect("column vector");
        let sol = solve_linear(&plan.system, &b, f).map_err(|e| PirError::RoundDecode {
            round: k,
            source: DecodeError::Field(e),
        })?;
        let u = sol.x.col(0);
        let stripes = (0..beta)
            .map(|d| (0..k).map(|e| u[d * k + e]).collect())
            .collect();
        Ok(ProtocolRun { stripes, transcript, queries })
    }
}
