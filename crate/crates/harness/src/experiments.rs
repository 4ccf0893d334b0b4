//! Experiment drivers: Monte-Carlo round trips, success probabilities,
//! privacy tests, decoder-region scans, and rate sweeps.

use crate::config::{ConfigError, ExperimentConfig};
use crate::forms::{closed_forms, ClosedForms};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankpir_core::channel::{ChannelConfig, ChannelMode};
use rankpir_core::ff::FieldSpec;
use rankpir_core::pir::{
    build_query_round, colluder_view, pir_rate, PirContext, PirError, PirSession,
    ProtocolOptions, Ratio,
};
use rankpir_core::storage::{FileSet, SchemeVariant, SystemParams};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pir(#[from] PirError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("experiment not supported for this configuration: {0}")]
    Unsupported(String),
}

/// One measurement: a point estimate next to its closed form, with the
/// binomial standard error for Monte-Carlo rows. Output files carry exactly
/// these fields so identical (config, seed) runs are bit-identical.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub digest: String,
    pub label: String,
    pub trials: u64,
    pub measured: f64,
    pub closed_form: Option<f64>,
    pub std_error: Option<f64>,
}

impl ResultRow {
    fn mc(digest: &str, label: &str, trials: u64, measured: f64, closed_form: Option<f64>) -> Self {
        let std_error = Some((measured * (1.0 - measured).max(0.0) / trials as f64).sqrt());
        ResultRow { digest: digest.into(), label: label.into(), trials, measured, closed_form, std_error }
    }

    fn exact(digest: &str, label: &str, value: f64, closed_form: Option<f64>) -> Self {
        ResultRow {
            digest: digest.into(),
            label: label.into(),
            trials: 0,
            measured: value,
            closed_form,
            std_error: None,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "digest,label,trials,measured,closed_form,std_error")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.digest,
            r.label,
            r.trials,
            r.measured,
            r.closed_form.map_or(String::new(), |v| v.to_string()),
            r.std_error.map_or(String::new(), |v| v.to_string())
        )?;
    }
    Ok(())
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut w: W) -> std::io::Result<()> {
    let arr: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "digest": r.digest,
                "label": r.label,
                "trials": r.trials,
                "measured": r.measured,
                "closed_form": r.closed_form,
                "std_error": r.std_error,
            })
        })
        .collect();
    writeln!(w, "{}", serde_json::to_string_pretty(&arr).expect("serializable"))
}

fn mask_seed(base: u64, trial: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(2 * trial + 1)
}

fn channel_seed(base: u64, trial: u64) -> u64 {
    base.wrapping_mul(0xC2B2_AE3D_27D4_EB4F).wrapping_add(2 * trial)
}

/// Ground-truth deployment shared by every trial of an experiment.
pub struct Deployment {
    pub ctx: PirContext,
    pub files: FileSet,
    pub channel: ChannelConfig,
    pub closed: ClosedForms,
}

pub fn deploy(cfg: &ExperimentConfig) -> Result<Deployment, HarnessError> {
    let (field, params, channel) = cfg.validate()?;
    let closed = closed_forms(&params, &field);
    let ctx = PirContext::new(field, params)?;
    let files = match &cfg.experiment.files {
        crate::config::FilesConfig::Random => {
            let mut frng = ChaCha8Rng::seed_from_u64(cfg.experiment.seed);
            FileSet::random(&mut frng, ctx.params(), ctx.field())
        }
        crate::config::FilesConfig::Blob { path } => {
            let bytes = std::fs::read(path)?;
            FileSet::from_blob(&bytes, ctx.params(), ctx.field())
                .map_err(|e| HarnessError::Unsupported(format!("file blob: {e}")))?
        }
    };
    Ok(Deployment { ctx, files, channel, closed })
}

/// Full-protocol round trips with staging enabled; reports exact-recovery
/// frequency, stage usage, and the average counted download rate.
pub fn roundtrip(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let digest = cfg.digest();
    let dep = deploy(cfg)?;
    let session = PirSession::new(&dep.ctx, &dep.files)?;
    let trials = cfg.experiment.trials;
    let file = cfg.experiment.file_index;
    let mut exact = 0u64;
    let mut staged = 0u64;
    let mut rate_sum = 0.0f64;
    let mut completed = 0u64;
    for trial in 0..trials {
        let mut mrng = ChaCha8Rng::seed_from_u64(mask_seed(cfg.experiment.seed, trial));
        let mut crng = ChaCha8Rng::seed_from_u64(channel_seed(dep.channel.seed, trial));
        match session.run(file, &dep.channel, &mut mrng, &mut crng, ProtocolOptions::default()) {
            Ok(run) => {
                completed += 1;
                let ok = (1..=dep.ctx.params().beta())
                    .all(|d| run.stripes[d - 1] == dep.files.stripe(file, d));
                if ok {
                    exact += 1;
                }
                if run.transcript.stages_used() > 1 {
                    staged += 1;
                }
                rate_sum += pir_rate(&run.transcript, &dep.ctx).counted.to_f64();
            }
            Err(PirError::StageBudgetExhausted { .. }) | Err(PirError::RoundDecode { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let rows = vec![
        ResultRow::mc(&digest, "exact_recovery", trials, exact as f64 / trials as f64, None),
        ResultRow::mc(&digest, "staged_runs", trials, staged as f64 / trials as f64, None),
        ResultRow::exact(
            &digest,
            "avg_counted_rate",
            if completed > 0 { rate_sum / completed as f64 } else { 0.0 },
            Some(dep.closed.rate),
        ),
    ];
    Ok(rows)
}

/// Success-probability measurement: single-stage protocol runs. Records the
/// per-file success frequency and the per-round retrieved-stripe distribution
/// P_δ, against both closed forms.
pub struct ProbabilityOutcome {
    pub rows: Vec<ResultRow>,
    pub file_success: f64,
    pub round_samples: u64,
    pub delta_freq: Vec<f64>,
    pub avg_realized_rate: f64,
}

pub fn success_probability(cfg: &ExperimentConfig) -> Result<ProbabilityOutcome, HarnessError> {
    let digest = cfg.digest();
    let dep = deploy(cfg)?;
    if matches!(dep.ctx.params().variant, SchemeVariant::Errored { .. }) {
        return Err(HarnessError::Unsupported(
            "success-probability runs measure the error-free variant; use decoder-region".into(),
        ));
    }
    let session = PirSession::new(&dep.ctx, &dep.files)?;
    let params = dep.ctx.params();
    let trials = cfg.experiment.trials;
    let file = cfg.experiment.file_index;
    let beta = params.beta();
    let single_stage = ProtocolOptions { max_stages: 1, keep_queries: false };
    let mut file_ok = 0u64;
    let mut delta_counts = vec![0u64; beta + 1];
    let mut round_samples = 0u64;
    for trial in 0..trials {
        let mut mrng = ChaCha8Rng::seed_from_u64(mask_seed(cfg.experiment.seed, trial));
        let mut crng = ChaCha8Rng::seed_from_u64(channel_seed(dep.channel.seed, trial));
        match session.run(file, &dep.channel, &mut mrng, &mut crng, single_stage) {
            Ok(run) => {
                let ok = (1..=beta).all(|d| run.stripes[d - 1] == dep.files.stripe(file, d));
                if ok {
                    file_ok += 1;
                }
                for rec in &run.transcript.rounds {
                    delta_counts[rec.delta] += 1;
                    round_samples += 1;
                }
            }
            Err(PirError::StageBudgetExhausted { .. }) => {
                // the k primary rounds were still sent; count their deltas by
                // re-running deterministically is unnecessary: staged-out runs
                // reach here only after all k rounds, whose deltas were lost
                // with the error. Re-run the rounds individually instead.
                let mut mrng =
                    ChaCha8Rng::seed_from_u64(mask_seed(cfg.experiment.seed, trial));
                let mut crng =
                    ChaCha8Rng::seed_from_u64(channel_seed(dep.channel.seed, trial));
                for round in 1..=params.k {
                    let out = session.probe_round(file, round, &dep.channel, &mut mrng, &mut crng)?;
                    delta_counts[out.delta] += 1;
                    round_samples += 1;
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    let file_success = file_ok as f64 / trials as f64;
    let delta_freq: Vec<f64> =
        delta_counts.iter().map(|&c| c as f64 / round_samples as f64).collect();
    let avg_realized_rate = delta_counts
        .iter()
        .enumerate()
        .map(|(d, &c)| d as f64 * c as f64)
        .sum::<f64>()
        / (round_samples as f64 * params.n as f64);
    let mut rows = vec![
        ResultRow::mc(&digest, "file_success", trials, file_success, Some(1.0 - dep.closed.file_error_2nk)),
        ResultRow::mc(
            &digest,
            "file_failure",
            trials,
            1.0 - file_success,
            Some(dep.closed.file_error_2nk),
        ),
        ResultRow::exact(
            &digest,
            "file_error_closed_form_2n_plus_k",
            dep.closed.file_error_2n_plus_k,
            None,
        ),
        ResultRow::exact(&digest, "file_error_closed_form_2nk", dep.closed.file_error_2nk, None),
    ];
    for d in (0..=beta).rev() {
        rows.push(ResultRow::mc(
            &digest,
            &format!("round_delta_{d}"),
            round_samples,
            delta_freq[d],
            Some(dep.closed.p_delta[d]),
        ));
    }
    rows.push(ResultRow::mc(
        &digest,
        "avg_realized_rate",
        round_samples,
        avg_realized_rate,
        Some(dep.closed.avg_realized_rate),
    ));
    Ok(ProbabilityOutcome { rows, file_success, round_samples, delta_freq, avg_realized_rate })
}

/// Chi-square privacy test on the delivered query payload cells: for every
/// whole-server collusion set of size t, compare per-cell symbol frequencies
/// between f = 1 and f = 2 over fresh query draws.
pub struct PrivacyOutcome {
    pub rows: Vec<ResultRow>,
    pub min_p: f64,
    pub tests: usize,
    pub rejected: bool,
}

pub fn privacy(cfg: &ExperimentConfig) -> Result<PrivacyOutcome, HarnessError> {
    let digest = cfg.digest();
    let dep = deploy(cfg)?;
    let ctx = &dep.ctx;
    let params = ctx.params();
    if params.m < 2 {
        return Err(HarnessError::Unsupported("privacy test needs at least two files".into()));
    }
    let trials = cfg.experiment.trials;
    // all whole-server collusion sets of size t
    let subsets = server_subsets(params.l, params.t);
    let rho = params.rho();
    let mbeta = params.mbeta();
    let cells = subsets.len() * params.t * rho * mbeta;
    // counts[subset][row][col] : symbol -> count, per file
    let mut counts: Vec<Vec<BTreeMap<u64, u64>>> =
        vec![vec![BTreeMap::new(); params.t * rho * mbeta]; 2 * subsets.len()];
    for file in 1..=2usize {
        for trial in 0..trials {
            let seed = mask_seed(cfg.experiment.seed, trial * 2 + file as u64 - 1);
            let mut mrng = ChaCha8Rng::seed_from_u64(seed);
            let qr = build_query_round(&mut mrng, ctx, file, 1, 1, None);
            for (si, subset) in subsets.iter().enumerate() {
                let views = colluder_view(std::slice::from_ref(&qr), subset);
                let view = &views[0];
                for r in 0..view.rows() {
                    for w in 0..mbeta {
                        // payload columns only; the lifting identity is constant
                        let sym = view[(r, rho + w)];
                        let cell = r * mbeta + w;
                        *counts[(file - 1) * subsets.len() + si][cell]
                            .entry(sym.raw())
                            .or_insert(0) += 1;
                    }
                }
            }
        }
    }
    let mut min_p = 1.0f64;
    for si in 0..subsets.len() {
        for cell in 0..params.t * rho * mbeta {
            let a = &counts[si][cell];
            let b = &counts[subsets.len() + si][cell];
            let p = chi_square_homogeneity(a, b, trials, trials);
            if p < min_p {
                min_p = p;
            }
        }
    }
    let alpha = 0.01 / cells as f64; // Bonferroni across cells
    let rejected = min_p < alpha;
    let rows = vec![
        ResultRow::exact(&digest, "privacy_min_p_value", min_p, None),
        ResultRow::exact(&digest, "privacy_bonferroni_threshold", alpha, None),
        ResultRow::exact(&digest, "privacy_rejected", if rejected { 1.0 } else { 0.0 }, Some(0.0)),
    ];
    Ok(PrivacyOutcome { rows, min_p, tests: cells, rejected })
}

fn server_subsets(l: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..t).collect();
    loop {
        out.push(idx.clone());
        // next combination
        let mut i = t;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + l - t {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..t {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Two-sample chi-square homogeneity p-value over symbol categories.
fn chi_square_homogeneity(
    a: &BTreeMap<u64, u64>,
    b: &BTreeMap<u64, u64>,
    na: u64,
    nb: u64,
) -> f64 {
    let mut cats: Vec<u64> = a.keys().chain(b.keys()).copied().collect();
    cats.sort_unstable();
    cats.dedup();
    if cats.len() < 2 {
        return 1.0;
    }
    let total = (na + nb) as f64;
    let mut stat = 0.0f64;
    for &v in &cats {
        let ca = *a.get(&v).unwrap_or(&0) as f64;
        let cb = *b.get(&v).unwrap_or(&0) as f64;
        let row = ca + cb;
        let ea = row * na as f64 / total;
        let eb = row * nb as f64 / total;
        if ea > 0.0 {
            stat += (ca - ea) * (ca - ea) / ea;
        }
        if eb > 0.0 {
            stat += (cb - eb) * (cb - eb) / eb;
        }
    }
    let df = (cats.len() - 1) as f64;
    let dist = ChiSquared::new(df).expect("df >= 1");
    1.0 - dist.cdf(stat)
}

/// One decoder-region cell: injected budgets and observed outcomes.
#[derive(Debug, Clone)]
pub struct RegionCell {
    pub eps: usize,
    pub tau: usize,
    pub inside: bool,
    pub trials: u64,
    pub successes: u64,
    pub rate_exact: bool,
}

pub struct RegionOutcome {
    pub rows: Vec<ResultRow>,
    pub cells: Vec<RegionCell>,
    pub budget: usize,
}

/// Scan (ε, τ) injection cells for the errored variant. Inside the region
/// (2ε+τ ≤ d−1, the provisioned budget) every trial must recover exactly at
/// the closed-form rate; the boundary-exceeding row 2ε+τ = d is reported
/// informationally.
pub fn decoder_region(cfg: &ExperimentConfig) -> Result<RegionOutcome, HarnessError> {
    let digest = cfg.digest();
    let dep = deploy(cfg)?;
    let ctx = &dep.ctx;
    let params = *ctx.params();
    let SchemeVariant::Errored { eps: eps_prov, tau: tau_prov } = params.variant else {
        return Err(HarnessError::Unsupported("decoder-region needs the errored variant".into()));
    };
    let budget = 2 * eps_prov + tau_prov; // = d − 1 of the decoded code
    let session = PirSession::new(&dep.ctx, &dep.files)?;
    let trials = cfg.experiment.trials;
    let file = cfg.experiment.file_index;
    let closed_rate = Ratio::new(params.beta() as u64, params.n as u64);
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    let mut cell_list: Vec<(usize, usize, bool)> = Vec::new();
    for eps in 0..=budget / 2 {
        for tau in 0..=(budget - 2 * eps) {
            cell_list.push((eps, tau, true));
        }
    }
    // one informational row just past the boundary
    cell_list.push((0, budget + 1, false));
    for (eps, tau, inside) in cell_list {
        let mut successes = 0u64;
        let mut rate_exact = true;
        for trial in 0..trials {
            let mut crng =
                ChaCha8Rng::seed_from_u64(channel_seed(dep.channel.seed, trial));
            // mix the error budget across uplink and downlink
            let eps_up = (trial as usize + eps) % (eps + 1);
            let eps_down = eps - eps_up;
            let channel = ChannelConfig {
                mode: tau_profile(&params, tau, &mut crng),
                eps_up,
                eps_down,
                tau,
                seed: dep.channel.seed,
            };
            let mut mrng = ChaCha8Rng::seed_from_u64(mask_seed(cfg.experiment.seed, trial));
            match session.run(file, &channel, &mut mrng, &mut crng, ProtocolOptions::default()) {
                Ok(run) => {
                    let ok = (1..=params.beta())
                        .all(|d| run.stripes[d - 1] == dep.files.stripe(file, d));
                    if ok {
                        successes += 1;
                        if pir_rate(&run.transcript, ctx).counted != closed_rate {
                            rate_exact = false;
                        }
                    }
                }
                Err(PirError::RoundDecode { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        rows.push(ResultRow::mc(
            &digest,
            &format!("region_eps{eps}_tau{tau}{}", if inside { "" } else { "_outside" }),
            trials,
            successes as f64 / trials as f64,
            inside.then_some(1.0),
        ));
        cells.push(RegionCell { eps, tau, inside, trials, successes, rate_exact });
    }
    Ok(RegionOutcome { rows, cells, budget })
}

/// Downlink rank profile erasing exactly `tau` coordinates at random servers.
fn tau_profile(params: &SystemParams, tau: usize, rng: &mut ChaCha8Rng) -> ChannelMode {
    use rand::Rng;
    if tau == 0 {
        return ChannelMode::Identity;
    }
    let rho = params.rho();
    let mut down = vec![rho; params.l];
    let mut placed = 0;
    while placed < tau {
        let j = rng.gen_range(0..params.l);
        if down[j] > 0 {
            down[j] -= 1;
            placed += 1;
        }
    }
    ChannelMode::RankProfile { uplink_ranks: vec![rho; params.l], downlink_ranks: down }
}

/// Identity-channel rate verification plus an informational field-size sweep
/// of the closed-form versus measured file success probability.
pub fn rate_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let digest = cfg.digest();
    let dep = deploy(cfg)?;
    let session = PirSession::new(&dep.ctx, &dep.files)?;
    let file = cfg.experiment.file_index;
    let mut mrng = ChaCha8Rng::seed_from_u64(mask_seed(cfg.experiment.seed, 0));
    let mut crng = ChaCha8Rng::seed_from_u64(0);
    let run = session.run(
        file,
        &ChannelConfig::identity(),
        &mut mrng,
        &mut crng,
        ProtocolOptions::default(),
    )?;
    let rate = pir_rate(&run.transcript, &dep.ctx);
    let mut rows = vec![
        ResultRow::exact(&digest, "counted_rate", rate.counted.to_f64(), Some(dep.closed.rate)),
        ResultRow::exact(&digest, "closed_form_rate", dep.closed.rate, None),
    ];
    // field-size trend: same shape G(3,2), l=3, t=1 over growing fields;
    // the measured file success tracks the closed form and tends to 1
    let sweep: &[(usize, &[u64])] = &[
        (3, &[1, 1, 0, 1]),
        (6, &[1, 1, 0, 0, 0, 0, 1]),
        (8, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    ];
    let sub_trials = cfg.experiment.trials.min(20_000).max(1);
    for &(s, modulus) in sweep {
        let field = FieldSpec::new(2, 1, s, modulus).map_err(ConfigError::Field)?;
        let params =
            SystemParams { m: s, l: 3, n: 3, k: 2, t: 1, variant: SchemeVariant::ErrorFree };
        let q_s = field.order() as f64;
        let closed = 1.0 - (1.0 - 1.0 / q_s).powi((2 * params.n * params.k) as i32);
        let ctx = PirContext::new(field, params)?;
        let mut frng = ChaCha8Rng::seed_from_u64(cfg.experiment.seed);
        let files = FileSet::random(&mut frng, ctx.params(), ctx.field());
        let sub = PirSession::new(&ctx, &files)?;
        let cfg_channel = ChannelConfig::uniform(dep.channel.seed);
        let single_stage = ProtocolOptions { max_stages: 1, keep_queries: false };
        let mut fails = 0u64;
        for trial in 0..sub_trials {
            let mut mrng = ChaCha8Rng::seed_from_u64(mask_seed(cfg.experiment.seed, trial));
            let mut crng = ChaCha8Rng::seed_from_u64(channel_seed(cfg_channel.seed, trial));
            match sub.run(1, &cfg_channel, &mut mrng, &mut crng, single_stage) {
                Ok(run) => {
                    if run.stripes[0] != files.stripe(1, 1) {
                        fails += 1;
                    }
                }
                Err(PirError::StageBudgetExhausted { .. }) => fails += 1,
                Err(e) => return Err(e.into()),
            }
        }
        rows.push(ResultRow::mc(
            &digest,
            &format!("file_failure_qs{}", 1u64 << s),
            sub_trials,
            fails as f64 / sub_trials as f64,
            Some(closed),
        ));
    }
    Ok(rows)
}
