//! Decoder equivalence against a brute-force nearest-codeword-in-rank-metric
//! oracle on a fully enumerable code.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankpir_core::ff::{presets, FieldElement, FieldSpec};
use rankpir_core::gabidulin::{rank_weight, GabidulinCode};
use std::collections::BTreeSet;

fn all_codewords(code: &GabidulinCode, f: &FieldSpec) -> Vec<(FieldElement, Vec<FieldElement>)> {
    f.iter_all()
        .map(|m| (m, code.encode(&[m], f).unwrap()))
        .collect()
}

/// Unique codeword within rank radius eps of `word` on the non-erased
/// coordinates, by exhaustive search.
fn brute_nearest(
    codewords: &[(FieldElement, Vec<FieldElement>)],
    word: &[FieldElement],
    erased: &BTreeSet<usize>,
    eps: usize,
    f: &FieldSpec,
) -> Option<FieldElement> {
    let mut hits = Vec::new();
    for (m, cw) in codewords {
        let diff: Vec<FieldElement> = word
            .iter()
            .zip(cw)
            .enumerate()
            .filter(|(c, _)| !erased.contains(c))
            .map(|(_, (&a, &b))| f.sub(a, b))
            .collect();
        let w = rank_weight(&diff, f);
        if w <= eps {
            hits.push((w, *m));
        }
    }
    hits.sort_by_key(|&(w, _)| w);
    match hits.as_slice() {
        [] => None,
        [(_, m)] => Some(*m),
        [(w0, m), (w1, _), ..] if w0 < w1 => Some(*m),
        _ => None, // ambiguous
    }
}

fn random_rank_error(
    rng: &mut ChaCha8Rng,
    f: &FieldSpec,
    n: usize,
    r: usize,
) -> Vec<FieldElement> {
    loop {
        let gens: Vec<FieldElement> = (0..r).map(|_| f.random_nonzero(rng)).collect();
        if rank_weight(&gens, f) != r {
            continue;
        }
        let err: Vec<FieldElement> = (0..n)
            .map(|_| {
                let mut acc = FieldElement::ZERO;
                for &g in &gens {
                    if rng.gen_bool(0.5) {
                        acc = f.add(acc, g);
                    }
                }
                acc
            })
            .collect();
        if rank_weight(&err, f) == r {
            return err;
        }
    }
}

#[test]
fn decoder_agrees_with_brute_force_oracle() {
    // G(4,1) over GF(2^4): d = 4, so every (eps, tau) with 2eps+tau <= 3 decodes
    let f = presets::gf16().unwrap();
    let code = GabidulinCode::with_alpha_powers(4, 1, &f).unwrap();
    let codewords = all_codewords(&code, &f);
    let cells = [(0usize, 0usize), (0, 1), (0, 2), (0, 3), (1, 0), (1, 1)];
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0);
    for trial in 0..200 {
        let (eps, tau) = cells[trial % cells.len()];
        let msg = f.random(&mut rng);
        let cw = code.encode(&[msg], &f).unwrap();
        let mut word = cw.clone();
        if eps > 0 {
            let err = random_rank_error(&mut rng, &f, 4, eps);
            for (w, e) in word.iter_mut().zip(&err) {
                *w = f.add(*w, *e);
            }
        }
        let mut coords: Vec<usize> = (0..4).collect();
        for i in 0..4 {
            let j = rng.gen_range(i..4);
            coords.swap(i, j);
        }
        let erased: BTreeSet<usize> = coords[..tau].iter().copied().collect();
        for &c in &erased {
            word[c] = f.random(&mut rng);
        }
        let got = code
            .error_erasure_decode(&word, &erased, eps, &f)
            .ok()
            .map(|d| d.message[0]);
        let want = brute_nearest(&codewords, &word, &erased, eps, &f);
        assert_eq!(got, want, "trial {trial} eps {eps} tau {tau}");
        assert_eq!(got, Some(msg), "within-radius decoding is exact");
    }
}

#[test]
fn erasure_only_decoder_matches_on_larger_code() {
    // G(8,6) over GF(2^8) corrects up to 2 erasures; cross-check the dedicated
    // erasure decoder against the error-erasure decoder at eps = 0
    let f = presets::gf256().unwrap();
    let code = GabidulinCode::with_alpha_powers(8, 6, &f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB1);
    for _ in 0..50 {
        let msg: Vec<FieldElement> = (0..6).map(|_| f.random(&mut rng)).collect();
        let cw = code.encode(&msg, &f).unwrap();
        let mut word = cw.clone();
        let erased: BTreeSet<usize> = [1usize, 6].into();
        for &c in &erased {
            word[c] = f.random(&mut rng);
        }
        let a = code.erasure_decode(&word, &erased, &f).unwrap();
        let b = code.error_erasure_decode(&word, &erased, 0, &f).unwrap();
        assert_eq!(a.message, msg);
        assert_eq!(b.message, msg);
        assert_eq!(a.discrepancies, b.discrepancies);
    }
}
