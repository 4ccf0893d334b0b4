//! Bundled example scenarios and their golden values: the composed-code
//! generator matrix over GF(2^5), the small three-server system over GF(2^3),
//! and the four-server two-stripe system over GF(2^8).

use crate::config::{
    ChannelConfigSection, ChannelModeConfig, ExperimentConfig, ExperimentKind, ExperimentSection,
    FieldConfig, ParamsConfig, VariantConfig,
};
use crate::experiments::HarnessError;
use crate::forms::closed_forms;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankpir_core::channel::ChannelConfig;
use rankpir_core::ff::{presets as field_presets, FieldSpec};
use rankpir_core::gabidulin::GabidulinCode;
use rankpir_core::pir::{pir_rate, PirContext, PirSession, ProtocolOptions, Ratio};
use rankpir_core::storage::FileSet;

/// Expected generator matrix of star(G(5,3), G(5,2)) over GF(2^5) with
/// modulus z^5+z^2+1 and points (1, α, α², α³, α⁴): coefficient vectors
/// low-to-high per entry.
pub const STAR_GENERATOR_GOLDEN: [[[u16; 5]; 5]; 4] = [
    [
        [1, 0, 0, 0, 0], // 1
        [0, 1, 0, 0, 0], // a
        [0, 0, 1, 0, 0], // a^2
        [0, 0, 0, 1, 0], // a^3
        [0, 0, 0, 0, 1], // a^4
    ],
    [
        [1, 0, 0, 0, 0], // 1
        [0, 0, 1, 0, 0], // a^2
        [0, 0, 0, 0, 1], // a^4
        [0, 1, 0, 1, 0], // a^3 + a
        [1, 0, 1, 1, 0], // a^3 + a^2 + 1
    ],
    [
        [1, 0, 0, 0, 0], // 1
        [0, 0, 0, 0, 1], // a^4
        [1, 0, 1, 1, 0], // a^3 + a^2 + 1
        [0, 1, 1, 1, 0], // a^3 + a^2 + a
        [1, 1, 0, 1, 1], // a^4 + a^3 + a + 1
    ],
    [
        [1, 0, 0, 0, 0], // 1
        [1, 0, 1, 1, 0], // a^3 + a^2 + 1
        [1, 1, 0, 1, 1], // a^4 + a^3 + a + 1
        [0, 1, 1, 1, 1], // a^4 + a^3 + a^2 + a
        [0, 1, 0, 0, 0], // a
    ],
];

/// Expected generator of G(3,2) over GF(2^3) on (1, α, α²).
pub const SMALL_GENERATOR_GOLDEN: [[[u16; 3]; 3]; 2] = [
    [[1, 0, 0], [0, 1, 0], [0, 0, 1]],          // 1, a, a^2
    [[1, 0, 0], [0, 0, 1], [0, 1, 1]],          // 1, a^2, a^2 + a
];

/// Small three-server system: G(3,2) over GF(2^3), l = 3, t = 1.
pub fn small_system(kind: ExperimentKind, trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        field: FieldConfig { p: 2, b: 1, s: 3, modulus: vec![1, 1, 0, 1], base_modulus: None },
        params: ParamsConfig { m: 3, l: 3, n: 3, k: 2, t: 1, variant: VariantConfig::Errorfree },
        channel: ChannelConfigSection {
            mode: ChannelModeConfig::Uniform,
            eps_up: 0,
            eps_down: 0,
            tau: 0,
            seed,
        },
        experiment: ExperimentSection { kind, trials, seed, file_index: 1, files: Default::default() },
    }
}

/// Four-server two-stripe system: G(8,3) over GF(2^8), l = 4, t = 2.
pub fn large_system(kind: ExperimentKind, trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        field: FieldConfig {
            p: 2,
            b: 1,
            s: 8,
            modulus: vec![1, 0, 1, 1, 1, 0, 0, 0, 1],
            base_modulus: None,
        },
        params: ParamsConfig { m: 4, l: 4, n: 8, k: 3, t: 2, variant: VariantConfig::Errorfree },
        channel: ChannelConfigSection {
            mode: ChannelModeConfig::Uniform,
            eps_up: 0,
            eps_down: 0,
            tau: 0,
            seed,
        },
        experiment: ExperimentSection { kind, trials, seed, file_index: 1, files: Default::default() },
    }
}

/// Errored-variant region system: G(8,1) storage over GF(2^8), l = 8, t = 1,
/// provisioned for eps = 2 errors and tau = 1 erasures (β = 2, d−1 = 5).
pub fn region_system(trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        field: FieldConfig {
            p: 2,
            b: 1,
            s: 8,
            modulus: vec![1, 0, 1, 1, 1, 0, 0, 0, 1],
            base_modulus: None,
        },
        params: ParamsConfig {
            m: 4,
            l: 8,
            n: 8,
            k: 1,
            t: 1,
            variant: VariantConfig::Errored { eps: 2, tau: 1 },
        },
        channel: ChannelConfigSection {
            mode: ChannelModeConfig::Identity,
            eps_up: 0,
            eps_down: 0,
            tau: 0,
            seed,
        },
        experiment: ExperimentSection { kind: ExperimentKind::DecoderRegion, trials, seed, file_index: 1, files: Default::default() },
    }
}

pub struct ExampleReport {
    pub lines: Vec<String>,
    pub ok: bool,
}

fn check(lines: &mut Vec<String>, ok_all: &mut bool, label: &str, ok: bool, detail: String) {
    *ok_all &= ok;
    lines.push(format!("[{}] {label}: {detail}", if ok { "ok" } else { "MISMATCH" }));
}

/// Reproduce the bundled examples and compare them against their goldens.
pub fn run_examples(seed: u64) -> Result<ExampleReport, HarnessError> {
    let mut lines = Vec::new();
    let mut ok = true;

    // --- composed-code generator matrix over GF(2^5) ---
    let f32 = field_presets::gf32().expect("preset field");
    let c = GabidulinCode::with_alpha_powers(5, 3, &f32).expect("valid code");
    let d = GabidulinCode::with_alpha_powers(5, 2, &f32).expect("valid code");
    let star = c.star(&d).expect("same points");
    check(
        &mut lines,
        &mut ok,
        "star dimensions",
        star.k() == 4 && star.n() == 5,
        format!("star(G(5,3), G(5,2)) = G({},{})", star.n(), star.k()),
    );
    let g = star.generator_matrix(&f32);
    lines.push("generator matrix of star(G(5,3), G(5,2)) over GF(2^5):".into());
    let mut matrix_ok = true;
    for r in 0..4 {
        let mut row = Vec::new();
        for cidx in 0..5 {
            let want = f32.from_coeffs(&STAR_GENERATOR_GOLDEN[r][cidx]).expect("golden coeffs");
            if g[(r, cidx)] != want {
                matrix_ok = false;
            }
            row.push(f32.format_element(g[(r, cidx)]));
        }
        lines.push(format!("  z^{}: [{}]", 1 << r, row.join(", ")));
    }
    check(&mut lines, &mut ok, "star generator golden", matrix_ok, "entry-for-entry".into());

    // field identities exercised by the matrix
    let a5 = f32.alpha_pow(5);
    check(
        &mut lines,
        &mut ok,
        "a^5 = a^2 + 1",
        a5 == f32.from_coeffs(&[1, 0, 1]).expect("coeffs"),
        f32.format_element(a5),
    );
    let a8 = f32.mul(f32.alpha_pow(4), f32.alpha_pow(4));
    check(
        &mut lines,
        &mut ok,
        "a^4 * a^4 = a^3 + a^2 + 1",
        a8 == f32.from_coeffs(&[1, 0, 1, 1]).expect("coeffs"),
        f32.format_element(a8),
    );

    // --- small system ---
    let small_cfg = small_system(ExperimentKind::Roundtrip, 1, seed);
    let (field, params, _) = small_cfg.validate()?;
    let gc = params.storage_code(&field).expect("valid storage code");
    let g = gc.generator_matrix(&field);
    let mut gc_ok = true;
    for r in 0..2 {
        for cidx in 0..3 {
            let want = field.from_coeffs(&SMALL_GENERATOR_GOLDEN[r][cidx]).expect("coeffs");
            if g[(r, cidx)] != want {
                gc_ok = false;
            }
        }
    }
    check(&mut lines, &mut ok, "small-system generator golden", gc_ok, "G(3,2) over GF(2^3)".into());

    let ctx = PirContext::new(field, params)?;
    let mut frng = ChaCha8Rng::seed_from_u64(seed);
    let files = FileSet::random(&mut frng, ctx.params(), ctx.field());
    let session = PirSession::new(&ctx, &files)?;
    let mut mrng = ChaCha8Rng::seed_from_u64(seed + 1);
    let mut crng = ChaCha8Rng::seed_from_u64(0);
    let run = session.run(1, &ChannelConfig::identity(), &mut mrng, &mut crng, ProtocolOptions::default())?;
    let rate = pir_rate(&run.transcript, &ctx);
    check(
        &mut lines,
        &mut ok,
        "small-system retrieval",
        run.stripes[0] == *files.stripe(1, 1) && run.transcript.rounds.len() == 2,
        format!("exact in {} rounds", run.transcript.rounds.len()),
    );
    check(
        &mut lines,
        &mut ok,
        "small-system rate 1/3",
        rate.counted == Ratio::new(1, 3) && rate.closed_form == Ratio::new(1, 3),
        format!("counted {} closed {}", rate.counted, rate.closed_form),
    );
    let cf = closed_forms(ctx.params(), ctx.field());
    check(
        &mut lines,
        &mut ok,
        "small-system failure probability 1-(7/8)^12",
        (cf.file_error_2nk - 0.798582762).abs() < 1e-9,
        format!(
            "{:.9} (printed-exponent candidate 1-(7/8)^(2n+k) = {:.9})",
            cf.file_error_2nk, cf.file_error_2n_plus_k
        ),
    );

    // --- large system ---
    let large_cfg = large_system(ExperimentKind::Roundtrip, 1, seed);
    let (field, params, _) = large_cfg.validate()?;
    let ctx = PirContext::new(field, params)?;
    let mut frng = ChaCha8Rng::seed_from_u64(seed);
    let files = FileSet::random(&mut frng, ctx.params(), ctx.field());
    let session = PirSession::new(&ctx, &files)?;
    let mut mrng = ChaCha8Rng::seed_from_u64(seed + 2);
    let mut crng = ChaCha8Rng::seed_from_u64(0);
    let run = session.run(1, &ChannelConfig::identity(), &mut mrng, &mut crng, ProtocolOptions::default())?;
    let rate = pir_rate(&run.transcript, &ctx);
    let exact = (1..=2).all(|d| run.stripes[d - 1] == *files.stripe(1, d));
    check(
        &mut lines,
        &mut ok,
        "large-system retrieval",
        exact && run.transcript.rounds.len() == 3,
        format!("exact in {} rounds", run.transcript.rounds.len()),
    );
    check(
        &mut lines,
        &mut ok,
        "large-system rate 1/4",
        rate.counted == Ratio::new(1, 4),
        format!("counted {} = 1 - (k+t*rho-1)/n", rate.counted),
    );
    let cf = closed_forms(ctx.params(), ctx.field());
    let p2 = cf.p_delta[2];
    let p1 = cf.p_delta[1];
    check(
        &mut lines,
        &mut ok,
        "large-system P_2 = (255/256)^16",
        (p2 - (255.0f64 / 256.0).powi(16)).abs() < 1e-12 && (p2 - 0.9394).abs() < 1e-3,
        format!("{p2:.4}"),
    );
    check(&mut lines, &mut ok, "large-system P_1", (p1 - 0.0148).abs() < 5e-4, format!("{p1:.4}"));
    check(
        &mut lines,
        &mut ok,
        "large-system average realized rate",
        (cf.avg_realized_rate - (p2 * 0.25 + p1 * 0.125)).abs() < 1e-12
            && (cf.avg_realized_rate - 0.24).abs() < 5e-3,
        format!("{:.4}", cf.avg_realized_rate),
    );

    Ok(ExampleReport { lines, ok })
}

/// The GF(2^5) field used by the star-product demo.
pub fn star_demo_field() -> FieldSpec {
    field_presets::gf32().expect("preset field")
}
