//! End-to-end protocol integration: multi-seed round trips for both variants,
//! degraded-channel partial retrieval, redundancy bookkeeping, and exhaustive
//! privacy at tiny parameters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankpir_core::channel::{ChannelConfig, ChannelMode};
use rankpir_core::ff::{presets, ExtMatrix, FieldElement, FieldSpec};
use rankpir_core::pir::{
    band_selector, colluder_view, default_band, lift_query, pir_rate, PirContext, PirSession,
    Ratio,
};
use rankpir_core::storage::{FileSet, SchemeVariant, SystemParams};
use std::collections::BTreeMap;

fn ctx_small() -> PirContext {
    let f = presets::gf8().unwrap();
    let params = SystemParams { m: 3, l: 3, n: 3, k: 2, t: 1, variant: SchemeVariant::ErrorFree };
    PirContext::new(f, params).unwrap()
}

fn ctx_large() -> PirContext {
    let f = presets::gf256().unwrap();
    let params = SystemParams { m: 4, l: 4, n: 8, k: 3, t: 2, variant: SchemeVariant::ErrorFree };
    PirContext::new(f, params).unwrap()
}

#[test]
fn roundtrip_full_rank_channels_100_seeds() {
    for ctx in [ctx_small(), ctx_large()] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let files = FileSet::random(&mut rng, ctx.params(), ctx.field());
        let session = PirSession::new(&ctx, &files).unwrap();
        let mut exact = 0usize;
        let mut total = 0usize;
        for seed in 0..100u64 {
            let file = (seed as usize % ctx.params().m) + 1;
            let mut mrng = ChaCha8Rng::seed_from_u64(seed);
            let mut crng = ChaCha8Rng::seed_from_u64(10_000 + seed);
            // uniform channels, but retry staging lets most runs finish;
            // identity channels must always finish in exactly k rounds
            let run = session
                .run(file, &ChannelConfig::identity(), &mut mrng, &mut crng, Default::default())
                .unwrap();
            total += 1;
            let ok = (1..=ctx.params().beta())
                .all(|d| run.stripes[d - 1] == files.stripe(file, d));
            if ok {
                exact += 1;
            }
            assert_eq!(run.transcript.rounds.len(), ctx.params().k);
        }
        assert_eq!(exact, total);
    }
}

#[test]
fn errored_roundtrip_100_seeds() {
    let f = presets::gf256().unwrap();
    let params = SystemParams {
        m: 4,
        l: 8,
        n: 8,
        k: 1,
        t: 1,
        variant: SchemeVariant::Errored { eps: 2, tau: 1 },
    };
    let ctx = PirContext::new(f, params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let files = FileSet::random(&mut rng, ctx.params(), ctx.field());
    let session = PirSession::new(&ctx, &files).unwrap();
    let cfg = ChannelConfig {
        mode: ChannelMode::Identity,
        eps_up: 1,
        eps_down: 1,
        tau: 0,
        seed: 0,
    };
    for seed in 0..100u64 {
        let file = (seed as usize % 4) + 1;
        let mut mrng = ChaCha8Rng::seed_from_u64(seed);
        let mut crng = ChaCha8Rng::seed_from_u64(20_000 + seed);
        let run = session.run(file, &cfg, &mut mrng, &mut crng, Default::default()).unwrap();
        for d in 1..=ctx.params().beta() {
            assert_eq!(run.stripes[d - 1], files.stripe(file, d), "seed {seed}");
        }
    }
}

#[test]
fn degraded_round_inside_band_recovers_one_stripe() {
    // rank deficiency of one landing inside the selector band: the round still
    // yields one of the two stripes
    let ctx = ctx_large();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let files = FileSet::random(&mut rng, ctx.params(), ctx.field());
    let session = PirSession::new(&ctx, &files).unwrap();
    // round 1 band sits at coordinates 0 and 1 = server 0; drop its downlink rank to 1
    let cfg = ChannelConfig {
        mode: ChannelMode::RankProfile {
            uplink_ranks: vec![2; 4],
            downlink_ranks: vec![1, 2, 2, 2],
        },
        eps_up: 0,
        eps_down: 0,
        tau: 1,
        seed: 0,
    };
    for seed in 0..20u64 {
        let mut mrng = ChaCha8Rng::seed_from_u64(seed);
        let mut crng = ChaCha8Rng::seed_from_u64(30_000 + seed);
        let out = session.probe_round(1, 1, &cfg, &mut mrng, &mut crng).unwrap();
        assert_eq!(out.delta, 1, "exactly one stripe part recovered");
        let (row, coord, value) = out.equations[0];
        assert_eq!(value, session.storage().y()[(row, coord)]);
    }
}

#[test]
fn degraded_round_outside_band_fails() {
    // deficiency on a non-band coordinate exceeds the erasure budget: nothing
    // is recovered from the round
    let ctx = ctx_large();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let files = FileSet::random(&mut rng, ctx.params(), ctx.field());
    let session = PirSession::new(&ctx, &files).unwrap();
    let cfg = ChannelConfig {
        mode: ChannelMode::RankProfile {
            uplink_ranks: vec![2; 4],
            downlink_ranks: vec![2, 2, 1, 2],
        },
        eps_up: 0,
        eps_down: 0,
        tau: 1,
        seed: 0,
    };
    for seed in 0..20u64 {
        let mut mrng = ChaCha8Rng::seed_from_u64(seed);
        let mut crng = ChaCha8Rng::seed_from_u64(40_000 + seed);
        let out = session.probe_round(1, 1, &cfg, &mut mrng, &mut crng).unwrap();
        assert_eq!(out.delta, 0);
        assert!(out.decode_failed);
    }
}

#[test]
fn no_redundant_equations_across_stages() {
    // with degraded channels and staging, every recovered (stripe, coordinate)
    // pair appears at most once across the whole run
    let ctx = ctx_large();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let files = FileSet::random(&mut rng, ctx.params(), ctx.field());
    let session = PirSession::new(&ctx, &files).unwrap();
    let cfg = ChannelConfig::uniform(0);
    let mut completed = 0usize;
    for seed in 0..60u64 {
        let mut mrng = ChaCha8Rng::seed_from_u64(seed);
        let mut crng = ChaCha8Rng::seed_from_u64(50_000 + seed);
        match session.run(1, &cfg, &mut mrng, &mut crng, Default::default()) {
            Ok(run) => {
                completed += 1;
                let mut seen = BTreeMap::new();
                for rec in &run.transcript.rounds {
                    for &(delta, coord) in &rec.recovered {
                        let prev = seen.insert((delta, coord), rec.round);
                        assert!(prev.is_none(), "duplicate equation for {:?}", (delta, coord));
                    }
                }
                for d in 1..=2 {
                    assert_eq!(run.stripes[d - 1], files.stripe(1, d));
                }
            }
            Err(rankpir_core::pir::PirError::StageBudgetExhausted { .. }) => {}
            Err(e) => panic!("unexpected failure: {e}"),
        }
    }
    assert!(completed > 40, "most uniform-channel runs complete: {completed}/60");
}

#[test]
fn counted_rate_matches_closed_form_without_staging() {
    let ctx = ctx_large();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let files = FileSet::random(&mut rng, ctx.params(), ctx.field());
    let session = PirSession::new(&ctx, &files).unwrap();
    let mut mrng = ChaCha8Rng::seed_from_u64(7);
    let mut crng = ChaCha8Rng::seed_from_u64(8);
    let run = session
        .run(3, &ChannelConfig::identity(), &mut mrng, &mut crng, Default::default())
        .unwrap();
    let rate = pir_rate(&run.transcript, &ctx);
    assert_eq!(rate.counted, rate.closed_form);
    assert_eq!(rate.closed_form, Ratio::new(1, 4));
}

/// Enumerate every mask draw at tiny parameters and compare the exact view
/// distribution a single server (t = 1) sees for f = 1 versus f = 2.
#[test]
fn privacy_exhaustive_tiny_parameters() {
    let f = FieldSpec::new(2, 1, 2, &[1, 1, 1]).unwrap(); // GF(4), z^2+z+1
    let params = SystemParams { m: 2, l: 2, n: 2, k: 1, t: 1, variant: SchemeVariant::ErrorFree };
    let ctx = PirContext::new(f, params).unwrap();
    let f = ctx.field();
    let params = ctx.params();
    let basis = ctx.mask_basis();
    let mbeta = params.mbeta();
    let n = params.n;
    let dims = basis.len() * mbeta;
    let order = f.order() as u64;
    let total = order.pow(dims as u32);
    assert!(total <= 1 << 16, "enumeration stays tiny");

    // distribution of each single server's delivered rows, per requested file
    let mut dists: Vec<BTreeMap<Vec<FieldElement>, u64>> = vec![BTreeMap::new(); 2 * params.l];
    for file in 1..=2usize {
        for draw in 0..total {
            // decode the draw into one coefficient per (stripe, basis vector)
            let mut idx = draw;
            let mut rows = Vec::with_capacity(mbeta);
            for _ in 0..mbeta {
                let mut row = vec![FieldElement::ZERO; n];
                for b in basis {
                    let code = idx % order;
                    idx /= order;
                    let coeff = f
                        .iter_all()
                        .nth(code as usize)
                        .expect("coefficient in range");
                    for (r, &x) in row.iter_mut().zip(b) {
                        *r = f.add(*r, f.mul(coeff, x));
                    }
                }
                rows.push(row);
            }
            let masks = ExtMatrix::from_rows(rows).unwrap();
            let band = default_band(params, file, 1);
            let e = band_selector(params, &band, f);
            let d_q = masks.transpose().add(&e, f).unwrap();
            let lifted = lift_query(&d_q, params, f);
            for j in 0..params.l {
                let view = colluder_view(&[rankpir_core::pir::QueryRound {
                    round: 1,
                    stage: 1,
                    band: band.clone(),
                    masks: masks.clone(),
                    d_q: d_q.clone(),
                    lifted: lifted.clone(),
                }], &[j]);
                let flat: Vec<FieldElement> =
                    (0..view[0].rows()).flat_map(|r| view[0].row(r).to_vec()).collect();
                *dists[(file - 1) * params.l + j].entry(flat).or_insert(0) += 1;
            }
        }
    }
    for j in 0..params.l {
        assert_eq!(
            dists[j], dists[params.l + j],
            "server {j}: view distribution differs between f=1 and f=2"
        );
    }
}

#[test]
fn privacy_exhaustive_small_field_two_rounds() {
    // GF(2^3) system with k = 2 rounds: each round's single-server view is
    // exhaustively uniform and identical across requested files
    let ctx = ctx_small();
    let f = ctx.field();
    let params = ctx.params();
    let basis = ctx.mask_basis();
    let mbeta = params.mbeta();
    let n = params.n;
    // enumerate one round's draws: order^(basis.len() * mbeta) = 8^3 = 512
    let order = f.order() as u64;
    let total = order.pow((basis.len() * mbeta) as u32);
    assert_eq!(total, 512);
    for round in 1..=2usize {
        let mut dists: Vec<BTreeMap<Vec<FieldElement>, u64>> =
            vec![BTreeMap::new(); 2 * params.l];
        for file in 1..=2usize {
            for draw in 0..total {
                let mut idx = draw;
                let mut rows = Vec::with_capacity(mbeta);
                for _ in 0..mbeta {
                    let mut row = vec![FieldElement::ZERO; n];
                    for b in basis {
                        let code = idx % order;
                        idx /= order;
                        let coeff = f.iter_all().nth(code as usize).unwrap();
                        for (r, &x) in row.iter_mut().zip(b) {
                            *r = f.add(*r, f.mul(coeff, x));
                        }
                    }
                    rows.push(row);
                }
                let masks = ExtMatrix::from_rows(rows).unwrap();
                let band = default_band(params, file, round);
                let e = band_selector(params, &band, f);
                let d_q = masks.transpose().add(&e, f).unwrap();
                for j in 0..params.l {
                    let row = d_q.row(j).to_vec();
                    *dists[(file - 1) * params.l + j].entry(row).or_insert(0) += 1;
                }
            }
        }
        for j in 0..params.l {
            assert_eq!(
                dists[j], dists[params.l + j],
                "round {round} server {j}: view distributions differ"
            );
        }
    }
}
