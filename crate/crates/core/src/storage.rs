//! Distributed storage model: file striping, storage encoding, and the
//! partition of the encoded matrix into per-server column blocks.

use crate::ff::{ExtMatrix, FieldElement, FieldSpec};
use crate::gabidulin::{CodeError, GabidulinCode};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamsError {
    #[error("number of servers {l} does not divide code length {n}")]
    ServersDontDivide { l: usize, n: usize },
    #[error("stripe count would be {beta}; need at least 1")]
    NoStripes { beta: isize },
    #[error("extension degree {s} does not divide m*beta = {mbeta}")]
    Divisibility { s: usize, mbeta: usize },
    #[error("code length {n} exceeds extension degree {s}")]
    LengthExceedsExtension { n: usize, s: usize },
    #[error("{what} must be at least 1")]
    Zero { what: &'static str },
    #[error("selector q-degree schedule inadmissible: {0}")]
    SelectorSchedule(String),
}

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("file set shape mismatch: {0}")]
    Shape(String),
    #[error("bad file blob: {0}")]
    Blob(String),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Which retrieval scheme the system is configured for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeVariant {
    ErrorFree,
    /// Network introduces up to `eps` rank errors and `tau` erasures.
    Errored { eps: usize, tau: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemParams {
    /// number of files
    pub m: usize,
    /// number of servers
    pub l: usize,
    /// code length / number of sub-servers
    pub n: usize,
    /// storage code dimension
    pub k: usize,
    /// colluding servers tolerated
    pub t: usize,
    pub variant: SchemeVariant,
}

impl SystemParams {
    /// Columns stored per server.
    pub fn rho(&self) -> usize {
        self.n / self.l
    }

    /// Query code dimension tρ.
    pub fn query_dim(&self) -> usize {
        self.t * self.rho()
    }

    fn beta_signed(&self) -> isize {
        let base = self.n as isize - self.k as isize - self.query_dim() as isize + 1;
        match self.variant {
            SchemeVariant::ErrorFree => base,
            SchemeVariant::Errored { eps, tau } => base - 2 * eps as isize - tau as isize,
        }
    }

    /// Stripes per file.
    pub fn beta(&self) -> usize {
        self.beta_signed().max(0) as usize
    }

    pub fn mbeta(&self) -> usize {
        self.m * self.beta()
    }

    /// μ = mβ/s.
    pub fn mu(&self, s: usize) -> usize {
        self.mbeta() / s
    }

    pub fn validate(&self, f: &FieldSpec) -> Result<(), ParamsError> {
        for (v, what) in [(self.m, "m"), (self.l, "l"), (self.n, "n"), (self.k, "k"), (self.t, "t")]
        {
            if v == 0 {
                return Err(ParamsError::Zero { what });
            }
        }
        if self.n % self.l != 0 {
            return Err(ParamsError::ServersDontDivide { l: self.l, n: self.n });
        }
        if self.n > f.s() {
            return Err(ParamsError::LengthExceedsExtension { n: self.n, s: f.s() });
        }
        if self.beta_signed() < 1 {
            return Err(ParamsError::NoStripes { beta: self.beta_signed() });
        }
        if self.mbeta() % f.s() != 0 {
            return Err(ParamsError::Divisibility { s: f.s(), mbeta: self.mbeta() });
        }
        Ok(())
    }

    pub fn storage_code(&self, f: &FieldSpec) -> Result<GabidulinCode, CodeError> {
        GabidulinCode::with_alpha_powers(self.n, self.k, f)
    }
}

/// m files, each β stripes, each stripe a length-k vector over GF(q^s).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileSet {
    files: Vec<Vec<Vec<FieldElement>>>,
}

impl FileSet {
    pub fn new(files: Vec<Vec<Vec<FieldElement>>>) -> Self {
        FileSet { files }
    }

    pub fn files(&self) -> &[Vec<Vec<FieldElement>>] {
        &self.files
    }

    /// Stripe δ (1-based) of file `file` (1-based).
    pub fn stripe(&self, file: usize, delta: usize) -> &[FieldElement] {
        &self.files[file - 1][delta - 1]
    }

    pub fn random<R: rand::Rng + ?Sized>(
        rng: &mut R,
        params: &SystemParams,
        f: &FieldSpec,
    ) -> FileSet {
        let files = (0..params.m)
            .map(|_| {
                (0..params.beta())
                    .map(|_| (0..params.k).map(|_| f.random(rng)).collect())
                    .collect()
            })
            .collect();
        FileSet { files }
    }

    fn check_shape(&self, params: &SystemParams) -> Result<(), StorageError> {
        if self.files.len() != params.m {
            return Err(StorageError::Shape(format!(
                "expected {} files, got {}",
                params.m,
                self.files.len()
            )));
        }
        for (fi, file) in self.files.iter().enumerate() {
            if file.len() != params.beta() {
                return Err(StorageError::Shape(format!(
                    "file {} has {} stripes, expected {}",
                    fi + 1,
                    file.len(),
                    params.beta()
                )));
            }
            for (d, stripe) in file.iter().enumerate() {
                if stripe.len() != params.k {
                    return Err(StorageError::Shape(format!(
                        "file {} stripe {} has {} symbols, expected {}",
                        fi + 1,
                        d + 1,
                        stripe.len(),
                        params.k
                    )));
                }
            }
        }
        Ok(())
    }

    /// Serialize as a raw GF(q) symbol stream (row-major) behind a small header.
    pub fn to_blob(&self, params: &SystemParams, f: &FieldSpec) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RKPF");
        out.extend_from_slice(&1u32.to_le_bytes());
        for v in [
            f.base().p() as u32,
            f.base().b() as u32,
            f.s() as u32,
            params.m as u32,
            params.beta() as u32,
            params.k as u32,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for file in &self.files {
            for stripe in file {
                for &sym in stripe {
                    for sig in 0..f.s() {
                        out.extend_from_slice(&f.coeff(sym, sig).to_le_bytes());
                    }
                }
            }
        }
        out
    }

    pub fn from_blob(
        bytes: &[u8],
        params: &SystemParams,
        f: &FieldSpec,
    ) -> Result<FileSet, StorageError> {
        let bad = |msg: &str| StorageError::Blob(msg.to_string());
        if bytes.len() < 32 || &bytes[0..4] != b"RKPF" {
            return Err(bad("missing RKPF magic"));
        }
        let mut off = 4;
        let mut read_u32 = |bytes: &[u8]| -> u32 {
            let v = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            off += 4;
            v
        };
        let version = read_u32(bytes);
        let p = read_u32(bytes);
        let b = read_u32(bytes);
        let s = read_u32(bytes);
        let m = read_u32(bytes);
        let beta = read_u32(bytes);
        let k = read_u32(bytes);
        if version != 1 {
            return Err(bad("unsupported version"));
        }
        if p as u64 != f.base().p() || b as usize != f.base().b() || s as usize != f.s() {
            return Err(bad("field header does not match the configured field"));
        }
        if m as usize != params.m || beta as usize != params.beta() || k as usize != params.k {
            return Err(bad("shape header does not match the configured parameters"));
        }
        let per_sym = f.s() * 2;
        let need = (m * beta * k) as usize * per_sym;
        if bytes.len() != off + need {
            return Err(bad("payload length mismatch"));
        }
        let mut files = Vec::with_capacity(m as usize);
        for _ in 0..m {
            let mut stripes = Vec::with_capacity(beta as usize);
            for _ in 0..beta {
                let mut stripe = Vec::with_capacity(k as usize);
                for _ in 0..k {
                    let mut coeffs = Vec::with_capacity(f.s());
                    for _ in 0..f.s() {
                        let c = u16::from_le_bytes(bytes[off..off + 2].try_into().unwrap());
                        off += 2;
                        coeffs.push(c);
                    }
                    let sym = f
                        .from_coeffs(&coeffs)
                        .map_err(|e| StorageError::Blob(format!("bad symbol: {e}")))?;
                    stripe.push(sym);
                }
                stripes.push(stripe);
            }
            files.push(stripes);
        }
        Ok(FileSet { files })
    }
}

/// Row index (0-based) of stripe δ (1-based) of file f (1-based): β(f−1)+δ−1.
pub fn stripe_row(params: &SystemParams, file: usize, delta: usize) -> usize {
    params.beta() * (file - 1) + delta - 1
}

/// Stack stripes into the mβ×k message matrix X.
pub fn stripe_files(files: &FileSet, params: &SystemParams) -> Result<ExtMatrix, StorageError> {
    files.check_shape(params)?;
    let rows = files
        .files
        .iter()
        .flat_map(|file| file.iter().cloned())
        .collect::<Vec<_>>();
    ExtMatrix::from_rows(rows).map_err(|e| StorageError::Shape(e.to_string()))
}

/// Inverse layout of [`stripe_files`].
pub fn unstripe(x: &ExtMatrix, params: &SystemParams) -> FileSet {
    let beta = params.beta();
    let files = (0..params.m)
        .map(|fi| {
            (0..beta)
                .map(|d| x.row(beta * fi + d).to_vec())
                .collect()
        })
        .collect();
    FileSet { files }
}

/// The encoded array Y = X·G and its partition into server blocks.
#[derive(Debug, Clone)]
pub struct EncodedStorage {
    y: ExtMatrix,
    rho: usize,
    l: usize,
}

impl EncodedStorage {
    pub fn y(&self) -> &ExtMatrix {
        &self.y
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn servers(&self) -> usize {
        self.l
    }

    /// Block j (0-based server index): columns jρ .. (j+1)ρ−1 of Y.
    pub fn block(&self, j: usize) -> ExtMatrix {
        self.y.slice_cols(j * self.rho, (j + 1) * self.rho)
    }

    /// Column c of Y: the view of sub-server c (0-based).
    pub fn sub_server_view(&self, c: usize) -> Vec<FieldElement> {
        self.y.col(c)
    }
}

/// Encode every stripe row with the storage code: Y = X·G.
pub fn encode_storage(
    x: &ExtMatrix,
    code: &GabidulinCode,
    params: &SystemParams,
    f: &FieldSpec,
) -> Result<EncodedStorage, StorageError> {
    let g = code.generator_matrix(f);
    let y = x.mul(&g, f).map_err(|e| StorageError::Shape(e.to_string()))?;
    Ok(EncodedStorage { y, rho: params.rho(), l: params.l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::presets;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn small_params() -> SystemParams {
        // G(3,2) over GF(2^3), l = 3, t = 1: beta = 1, mbeta = 3
        SystemParams { m: 3, l: 3, n: 3, k: 2, t: 1, variant: SchemeVariant::ErrorFree }
    }

    #[test]
    fn params_validation() {
        let f = presets::gf8().unwrap();
        let p = small_params();
        p.validate(&f).unwrap();
        assert_eq!(p.rho(), 1);
        assert_eq!(p.beta(), 1);
        assert_eq!(p.mu(3), 1);

        let bad = SystemParams { l: 2, ..p };
        assert!(matches!(bad.validate(&f), Err(ParamsError::ServersDontDivide { .. })));
        let bad = SystemParams { m: 2, ..p };
        assert!(matches!(bad.validate(&f), Err(ParamsError::Divisibility { .. })));
        let bad = SystemParams { k: 3, ..p };
        assert!(matches!(bad.validate(&f), Err(ParamsError::NoStripes { .. })));
    }

    #[test]
    fn stripe_layout_and_roundtrip() {
        let f = presets::gf8().unwrap();
        let p = small_params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fs = FileSet::random(&mut rng, &p, &f);
        let x = stripe_files(&fs, &p).unwrap();
        assert_eq!(x.rows(), 3);
        assert_eq!(x.cols(), 2);
        for file in 1..=3 {
            assert_eq!(stripe_row(&p, file, 1), file - 1);
            assert_eq!(x.row(stripe_row(&p, file, 1)), fs.stripe(file, 1));
        }
        assert_eq!(unstripe(&x, &p), fs);
    }

    #[test]
    fn single_stripe_single_file() {
        let f = presets::gf8().unwrap();
        // m=3 required by divisibility for this field; simulate m=1,beta=1 by
        // checking the layout rule directly on a 1-stripe set
        let p = SystemParams { m: 3, l: 3, n: 3, k: 2, t: 1, variant: SchemeVariant::ErrorFree };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fs = FileSet::random(&mut rng, &p, &f);
        let x = stripe_files(&fs, &p).unwrap();
        assert_eq!(x.row(0), fs.stripe(1, 1));
    }

    #[test]
    fn encoded_blocks_partition_y() {
        let f = presets::gf8().unwrap();
        let p = small_params();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fs = FileSet::random(&mut rng, &p, &f);
        let x = stripe_files(&fs, &p).unwrap();
        let code = p.storage_code(&f).unwrap();
        let enc = encode_storage(&x, &code, &p, &f).unwrap();
        assert_eq!(enc.y().rows(), 3);
        assert_eq!(enc.y().cols(), 3);
        // every block is one column here (rho = 1)
        for j in 0..3 {
            let block = enc.block(j);
            assert_eq!(block.cols(), 1);
            assert_eq!(block.col(0), enc.sub_server_view(j));
        }
        // zero data encodes to zero
        let zero = ExtMatrix::zeros(3, 2);
        let enc0 = encode_storage(&zero, &code, &p, &f).unwrap();
        assert_eq!(enc0.y(), &ExtMatrix::zeros(3, 3));
    }

    #[test]
    fn block_layout_two_columns_per_server() {
        // G(8,3) over GF(2^8), l = 4: rho = 2 columns per server
        let f = presets::gf256().unwrap();
        let p = SystemParams { m: 4, l: 4, n: 8, k: 3, t: 2, variant: SchemeVariant::ErrorFree };
        p.validate(&f).unwrap();
        assert_eq!(p.rho(), 2);
        assert_eq!(p.beta(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let fs = FileSet::random(&mut rng, &p, &f);
        let x = stripe_files(&fs, &p).unwrap();
        let code = p.storage_code(&f).unwrap();
        let enc = encode_storage(&x, &code, &p, &f).unwrap();
        for j in 0..4 {
            let block = enc.block(j);
            assert_eq!(block.cols(), 2);
            assert_eq!(block.col(0), enc.sub_server_view(2 * j));
            assert_eq!(block.col(1), enc.sub_server_view(2 * j + 1));
        }
    }

    #[test]
    fn any_k_views_determine_a_stripe() {
        let f = presets::gf8().unwrap();
        let p = small_params();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fs = FileSet::random(&mut rng, &p, &f);
        let x = stripe_files(&fs, &p).unwrap();
        let code = p.storage_code(&f).unwrap();
        let enc = encode_storage(&x, &code, &p, &f).unwrap();
        for row in 0..3 {
            for a in 0..3 {
                for b in (a + 1)..3 {
                    let got = code
                        .interpolate(&[a, b], &[enc.y()[(row, a)], enc.y()[(row, b)]], &f)
                        .unwrap();
                    assert_eq!(got, x.row(row));
                }
            }
        }
    }

    #[test]
    fn every_row_erasure_decodes_back() {
        let f = presets::gf8().unwrap();
        let p = small_params();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let fs = FileSet::random(&mut rng, &p, &f);
        let x = stripe_files(&fs, &p).unwrap();
        let code = p.storage_code(&f).unwrap();
        let enc = encode_storage(&x, &code, &p, &f).unwrap();
        let erased: BTreeSet<usize> = [2].into();
        for row in 0..3 {
            let word = enc.y().row(row).to_vec();
            let dec = code.erasure_decode(&word, &erased, &f).unwrap();
            assert_eq!(dec.message, x.row(row));
        }
        // storage overhead is n/k in symbols
        assert_eq!(enc.y().cols() * x.rows(), x.cols() * enc.y().rows() * 3 / 2);
    }

    #[test]
    fn blob_roundtrip() {
        let f = presets::gf8().unwrap();
        let p = small_params();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fs = FileSet::random(&mut rng, &p, &f);
        let blob = fs.to_blob(&p, &f);
        let back = FileSet::from_blob(&blob, &p, &f).unwrap();
        assert_eq!(back, fs);
        // header mismatch is caught
        let f16 = presets::gf16().unwrap();
        assert!(FileSet::from_blob(&blob, &p, &f16).is_err());
        // deterministic generation
        let mut rng1 = ChaCha8Rng::seed_from_u64(10);
        let mut rng2 = ChaCha8Rng::seed_from_u64(10);
        assert_eq!(
            FileSet::random(&mut rng1, &p, &f),
            FileSet::random(&mut rng2, &p, &f)
        );
    }
}
