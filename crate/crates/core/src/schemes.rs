//! Spatial multiplexing schemes and their equivalent stream channels.
//!
//! Every scheme composes a spatial precoder, the propagation matrix `H`,
//! and a spatial decoder into an equivalent channel `G` whose diagonal
//! carries the wanted streams and whose off-diagonal carries inter-stream
//! leakage:
//!
//! - **DFT-SM-MRT** precodes with `H^H * IDFT` and decodes with the DFT:
//!   `G = rho * DFT * H * H^H * IDFT`.
//! - **Block DFT-SM-MRT** applies the (I)DFT per block of `N_D` streams
//!   and optionally replicates each block's last `N_CP` symbols onto extra
//!   cyclic-prefix antennas in front of the block: `G = rho * R * H * H^H * T`
//!   with block-diagonal mapping matrices `T` and `R`. With one block and
//!   no prefix it reduces exactly to DFT-SM-MRT.
//! - **SVD** diagonalizes the Hermitian product `H * H^H = U * D * U^H`,
//!   precodes with `H^H * U` and decodes with `U^H`, giving `G = rho * D`
//!   with no inter-stream leakage at all.
//!
//! `rho` scales each precoder to the transmit power budget; it cancels in
//! every SIR-derived metric.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::channel::ChannelMatrix;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("stream count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("block count {blocks} does not divide stream count {streams}")]
    BlockMismatch { blocks: usize, streams: usize },
    #[error("cyclic prefix {cp} exceeds block size {block}")]
    CpTooLong { cp: usize, block: usize },
    #[error("power budget must be positive, got {0}")]
    InvalidPower(f64),
    #[error("channel is {rows}x{cols} but the scheme needs {expected}x{expected}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("scheme kind {0:?} cannot be evaluated by this operation")]
    WrongKind(SchemeKind),
    #[error("scheme kind {0:?} requires a single block and no cyclic prefix")]
    KindForbidsBlocks(SchemeKind),
    #[error("precoder has zero Frobenius norm; cannot satisfy a power constraint")]
    ZeroPrecoder,
    #[error("channel contains non-finite entries; decomposition aborted")]
    NonFinite,
}

/// Which spatial multiplexing scheme to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SchemeKind {
    #[serde(rename = "dft")]
    DftSmMrt,
    #[serde(rename = "bdft")]
    BlockDftSmMrt,
    #[serde(rename = "svd")]
    Svd,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::DftSmMrt => "dft",
            SchemeKind::BlockDftSmMrt => "bdft",
            SchemeKind::Svd => "svd",
        }
    }
}

/// Scheme dimensioning: stream count, block partition, cyclic prefix, and
/// power budget. Fully determines precoder and decoder shapes.
///
/// `num_antennas = num_blocks * (block_size + cp_len)`; only the block
/// scheme with a prefix uses more antennas than streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    kind: SchemeKind,
    num_streams: usize,
    num_blocks: usize,
    cp_len: usize,
    power: f64,
}

impl SchemeConfig {
    /// Full-array DFT-SM-MRT over `num_streams` streams.
    pub fn dft(num_streams: usize, power: f64) -> Result<Self, SchemeError> {
        Self::new(SchemeKind::DftSmMrt, num_streams, 1, 0, power)
    }

    /// SVD multiplexing over `num_streams` streams.
    pub fn svd(num_streams: usize, power: f64) -> Result<Self, SchemeError> {
        Self::new(SchemeKind::Svd, num_streams, 1, 0, power)
    }

    /// Block DFT-SM-MRT with `num_blocks` blocks and a per-block spatial
    /// cyclic prefix of `cp_len` symbols.
    pub fn block(
        num_streams: usize,
        num_blocks: usize,
        cp_len: usize,
        power: f64,
    ) -> Result<Self, SchemeError> {
        Self::new(
            SchemeKind::BlockDftSmMrt,
            num_streams,
            num_blocks,
            cp_len,
            power,
        )
    }

    pub fn new(
        kind: SchemeKind,
        num_streams: usize,
        num_blocks: usize,
        cp_len: usize,
        power: f64,
    ) -> Result<Self, SchemeError> {
        if !num_streams.is_power_of_two() {
            return Err(SchemeError::NotPowerOfTwo(num_streams));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(SchemeError::InvalidPower(power));
        }
        let (num_blocks, cp_len) = match kind {
            SchemeKind::DftSmMrt | SchemeKind::Svd => {
                if num_blocks != 1 || cp_len != 0 {
                    return Err(SchemeError::KindForbidsBlocks(kind));
                }
                (1, 0)
            }
            SchemeKind::BlockDftSmMrt => (num_blocks, cp_len),
        };
        if num_blocks == 0 || !num_streams.is_multiple_of(num_blocks) {
            return Err(SchemeError::BlockMismatch {
                blocks: num_blocks,
                streams: num_streams,
            });
        }
        let block_size = num_streams / num_blocks;
        if cp_len > block_size {
            return Err(SchemeError::CpTooLong {
                cp: cp_len,
                block: block_size,
            });
        }
        Ok(Self {
            kind,
            num_streams,
            num_blocks,
            cp_len,
            power,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    /// Number of multiplexed data streams (`N_U`).
    pub fn num_streams(&self) -> usize {
        self.num_streams
    }

    /// Number of DFT blocks (`N_S`).
    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    /// Data streams per block (`N_D`).
    pub fn block_size(&self) -> usize {
        self.num_streams / self.num_blocks
    }

    /// Cyclic prefix length per block (`N_CP`).
    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    /// Antennas per block including the prefix (`N_E`).
    pub fn extended_block(&self) -> usize {
        self.block_size() + self.cp_len
    }

    /// Total antennas on each side (`N`).
    pub fn num_antennas(&self) -> usize {
        self.num_blocks * self.extended_block()
    }

    /// Transmit power budget, W.
    pub fn power(&self) -> f64 {
        self.power
    }
}

/// Transmit/receive stream-to-antenna mappings of the block scheme, with
/// the constituent per-block matrices.
#[derive(Debug, Clone)]
pub struct BlockMapping {
    /// Cyclic-prefix insertion (`N_E x N_D`): copies the block's last
    /// `N_CP` symbols in front of it.
    pub cp_insert: DMatrix<Complex64>,
    /// Cyclic-prefix removal (`N_D x N_E`): drops the first `N_CP` symbols.
    pub cp_strip: DMatrix<Complex64>,
    /// Per-block transmit processing: insertion after the block IDFT.
    pub block_precode: DMatrix<Complex64>,
    /// Per-block receive processing: block DFT after stripping.
    pub block_decode: DMatrix<Complex64>,
    /// Full transmit mapping `T` (`N x N_U`), block diagonal.
    pub transmit: DMatrix<Complex64>,
    /// Full receive mapping `R` (`N_U x N`), block diagonal; `R * T = I`.
    pub receive: DMatrix<Complex64>,
}

/// Scheme output: the equivalent stream-domain channel `G`, the power
/// normalization that produced it, and the configuration it came from.
#[derive(Debug, Clone)]
pub struct EquivalentChannel {
    pub matrix: DMatrix<Complex64>,
    pub rho: f64,
    pub config: SchemeConfig,
}

impl EquivalentChannel {
    pub fn num_streams(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Eigenstructure of the Hermitian product `H * H^H`: a unitary basis and
/// the nonnegative eigenvalues, sorted descending.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub basis: DMatrix<Complex64>,
    pub eigenvalues: DVector<f64>,
}

/// Unitary DFT (Butler) matrix: entry `(k, l)` is
/// `exp(-j*2*pi*k*l/n) / sqrt(n)`.
pub fn butler(n: usize) -> DMatrix<Complex64> {
    assert!(n >= 1, "Butler matrix needs a positive size");
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |k, l| {
        let phase = -2.0 * std::f64::consts::PI * (k * l) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    })
}

/// Unitary inverse DFT matrix, the adjoint of [`butler`].
pub fn butler_inverse(n: usize) -> DMatrix<Complex64> {
    butler(n).adjoint()
}

/// Build the block transmit/receive mappings for a block scheme
/// configuration (a plain DFT config yields `T = IDFT`, `R = DFT`).
pub fn build_block_mapping(cfg: &SchemeConfig) -> Result<BlockMapping, SchemeError> {
    if cfg.kind() == SchemeKind::Svd {
        return Err(SchemeError::WrongKind(cfg.kind()));
    }
    let block = cfg.block_size();
    let cp = cfg.cp_len();
    let extended = cfg.extended_block();
    let blocks = cfg.num_blocks();

    let one = Complex64::new(1.0, 0.0);
    let mut cp_insert = DMatrix::<Complex64>::zeros(extended, block);
    for k in 0..cp {
        cp_insert[(k, block - cp + k)] = one;
    }
    for k in 0..block {
        cp_insert[(cp + k, k)] = one;
    }
    let mut cp_strip = DMatrix::<Complex64>::zeros(block, extended);
    for k in 0..block {
        cp_strip[(k, cp + k)] = one;
    }

    let block_precode = &cp_insert * butler_inverse(block);
    let block_decode = butler(block) * &cp_strip;

    let mut transmit = DMatrix::<Complex64>::zeros(cfg.num_antennas(), cfg.num_streams());
    let mut receive = DMatrix::<Complex64>::zeros(cfg.num_streams(), cfg.num_antennas());
    for b in 0..blocks {
        transmit
            .view_mut((b * extended, b * block), (extended, block))
            .copy_from(&block_precode);
        receive
            .view_mut((b * block, b * extended), (block, extended))
            .copy_from(&block_decode);
    }

    Ok(BlockMapping {
        cp_insert,
        cp_strip,
        block_precode,
        block_decode,
        transmit,
        receive,
    })
}

/// DFT-SM-MRT: precode with `H^H * IDFT`, decode with the DFT.
pub fn dft_sm_mrt(h: &ChannelMatrix, power: f64) -> Result<EquivalentChannel, SchemeError> {
    let n = require_square(h)?;
    let config = SchemeConfig::dft(n, power)?;
    let precoder = h.entries.adjoint() * butler_inverse(n);
    let rho = normalize_power(&precoder, power)?;
    let matrix = butler(n) * &h.entries * precoder * Complex64::from(rho);
    Ok(EquivalentChannel {
        matrix,
        rho,
        config,
    })
}

/// Block DFT-SM-MRT: precode with `H^H * T`, decode with `R`.
pub fn bdft_sm_mrt(
    h: &ChannelMatrix,
    cfg: &SchemeConfig,
) -> Result<EquivalentChannel, SchemeError> {
    let n = require_square(h)?;
    if n != cfg.num_antennas() {
        return Err(SchemeError::DimensionMismatch {
            rows: h.n_rx(),
            cols: h.n_tx(),
            expected: cfg.num_antennas(),
        });
    }
    let mapping = build_block_mapping(cfg)?;
    let precoder = h.entries.adjoint() * &mapping.transmit;
    let rho = normalize_power(&precoder, cfg.power())?;
    let matrix = &mapping.receive * &h.entries * precoder * Complex64::from(rho);
    Ok(EquivalentChannel {
        matrix,
        rho,
        config: *cfg,
    })
}

/// SVD multiplexing: diagonalize `H * H^H`, precode with `H^H * U`, decode
/// with `U^H`. The equivalent channel is exactly diagonal.
pub fn svd_scheme(
    h: &ChannelMatrix,
    power: f64,
) -> Result<(EquivalentChannel, SvdFactors), SchemeError> {
    let n = require_square(h)?;
    let config = SchemeConfig::svd(n, power)?;
    if h.entries
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(SchemeError::NonFinite);
    }
    let gram = &h.entries * h.entries.adjoint();
    let eig = nalgebra::linalg::SymmetricEigen::new(gram);

    // Gram eigenvalues are nonnegative in exact arithmetic; roundoff can
    // flip a numerically-zero one negative, which would otherwise read as
    // a dead eigenchannel. Fold the sign back into the magnitude.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .total_cmp(&eig.eigenvalues[a].abs())
    });
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i].abs()));
    let mut basis = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        basis.set_column(dst, &eig.eigenvectors.column(src));
    }

    let precoder = h.entries.adjoint() * &basis;
    let rho = normalize_power(&precoder, power)?;
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(rho * eigenvalues[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok((
        EquivalentChannel {
            matrix,
            rho,
            config,
        },
        SvdFactors { basis, eigenvalues },
    ))
}

/// Scale factor `rho = sqrt(power) / ||precoder||_F`, so that the scaled
/// precoder radiates `power` over unit-variance independent streams.
pub fn normalize_power(precoder: &DMatrix<Complex64>, power: f64) -> Result<f64, SchemeError> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(SchemeError::InvalidPower(power));
    }
    let fro = precoder.norm();
    if fro == 0.0 || !fro.is_finite() {
        return Err(SchemeError::ZeroPrecoder);
    }
    Ok(power.sqrt() / fro)
}

fn require_square(h: &ChannelMatrix) -> Result<usize, SchemeError> {
    if h.n_rx() != h.n_tx() {
        return Err(SchemeError::DimensionMismatch {
            rows: h.n_rx(),
            cols: h.n_tx(),
            expected: h.n_rx(),
        });
    }
    Ok(h.n_rx())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Provenance;
    use crate::geometry::CarrierConfig;

    fn channel_from(entries: DMatrix<Complex64>) -> ChannelMatrix {
        ChannelMatrix::new(
            entries,
            CarrierConfig::new(26e9).unwrap(),
            Provenance::Synthetic,
        )
        .unwrap()
    }

    fn identity_channel(n: usize) -> ChannelMatrix {
        channel_from(DMatrix::identity(n, n))
    }

    /// Deterministic pseudo-random complex matrix (splitmix64 driven).
    fn random_channel(n: usize, seed: u64) -> ChannelMatrix {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z = z ^ (z >> 31);
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        channel_from(DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(next(), next())
        }))
    }

    fn rel_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn butler_size_one_and_two() {
        let m1 = butler(1);
        assert!((m1[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let m2 = butler(2);
        let s = 1.0 / 2f64.sqrt();
        let want = [[s, s], [s, -s]];
        for k in 0..2 {
            for l in 0..2 {
                assert!((m2[(k, l)] - Complex64::new(want[k][l], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn butler_is_unitary() {
        for n in [1usize, 2, 3, 4, 8, 16, 64] {
            let product = butler(n) * butler_inverse(n);
            let eye = DMatrix::<Complex64>::identity(n, n);
            assert!((product - eye).norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn mapping_without_blocks_is_plain_dft() {
        let cfg = SchemeConfig::dft(4, 1.0).unwrap();
        let m = build_block_mapping(&cfg).unwrap();
        assert!((m.transmit - butler_inverse(4)).norm() < 1e-15);
        assert!((m.receive - butler(4)).norm() < 1e-15);
    }

    #[test]
    fn cp_matrices_match_hand_example() {
        // Block of 2 with a prefix of 1: insertion copies the last symbol
        // in front, removal drops the first antenna.
        let cfg = SchemeConfig::block(2, 1, 1, 1.0).unwrap();
        let m = build_block_mapping(&cfg).unwrap();
        let a: Vec<f64> = m.cp_insert.iter().map(|z| z.re).collect();
        // Column-major 3x2: col0 = (0,1,0), col1 = (1,0,1).
        assert_eq!(a, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let b: Vec<f64> = m.cp_strip.iter().map(|z| z.re).collect();
        // Column-major 2x3: col0 = (0,0), col1 = (1,0), col2 = (0,1).
        assert_eq!(b, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let strip_insert = &m.cp_strip * &m.cp_insert;
        assert!((strip_insert - DMatrix::<Complex64>::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn receive_transmit_is_identity() {
        for &(streams, blocks, cp) in &[
            (4usize, 1usize, 0usize),
            (4, 2, 1),
            (8, 2, 0),
            (8, 4, 2),
            (16, 4, 1),
            (32, 8, 4),
        ] {
            let cfg = SchemeConfig::block(streams, blocks, cp, 1.0).unwrap();
            let m = build_block_mapping(&cfg).unwrap();
            let rt = &m.receive * &m.transmit;
            let eye = DMatrix::<Complex64>::identity(streams, streams);
            assert!(
                (rt - eye).norm() < 1e-12,
                "R*T != I for N_U={streams}, N_S={blocks}, N_CP={cp}"
            );
        }
    }

    #[test]
    fn transmit_is_block_diagonal_with_exact_zeros() {
        let cfg = SchemeConfig::block(8, 2, 1, 1.0).unwrap();
        let m = build_block_mapping(&cfg).unwrap();
        let (extended, block) = (cfg.extended_block(), cfg.block_size());
        let mut inside = 0usize;
        for r in 0..m.transmit.nrows() {
            for c in 0..m.transmit.ncols() {
                let same_block = r / extended == c / block;
                if same_block {
                    inside += 1;
                } else {
                    assert_eq!(m.transmit[(r, c)], Complex64::new(0.0, 0.0));
                }
            }
        }
        assert_eq!(inside, cfg.num_blocks() * extended * block);
    }

    #[test]
    fn dft_on_identity_channel_is_scaled_identity() {
        let eq = dft_sm_mrt(&identity_channel(2), 1.0).unwrap();
        let eye = DMatrix::<Complex64>::identity(2, 2) * Complex64::from(eq.rho);
        assert!((&eq.matrix - eye).norm() < 1e-14);
    }

    #[test]
    fn dft_on_unitary_channel_is_scaled_identity() {
        // A Butler matrix is itself unitary, so H * H^H = I.
        let h = channel_from(butler(8));
        let eq = dft_sm_mrt(&h, 1.0).unwrap();
        let eye = DMatrix::<Complex64>::identity(8, 8) * Complex64::from(eq.rho);
        assert!((&eq.matrix - eye).norm() < 1e-13);
    }

    #[test]
    fn dft_equivalent_channel_is_hermitian_psd() {
        for seed in 0..20 {
            let h = random_channel(8, seed);
            let eq = dft_sm_mrt(&h, 1.0).unwrap();
            let herm_gap = (&eq.matrix - eq.matrix.adjoint()).norm();
            assert!(herm_gap <= 1e-10 * eq.matrix.norm(), "seed {seed}");
            for i in 0..8 {
                assert!(eq.matrix[(i, i)].re >= -1e-12, "seed {seed}");
            }
        }
    }

    #[test]
    fn bdft_reduces_to_dft() {
        for (i, &n) in [4usize, 8, 16, 32, 64].iter().enumerate() {
            let h = random_channel(n, 1000 + i as u64);
            let cfg = SchemeConfig::block(n, 1, 0, 1.0).unwrap();
            let a = bdft_sm_mrt(&h, &cfg).unwrap();
            let b = dft_sm_mrt(&h, 1.0).unwrap();
            assert!(rel_diff(&a.matrix, &b.matrix) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn bdft_identity_channel_without_cp() {
        let cfg = SchemeConfig::block(4, 2, 0, 1.0).unwrap();
        let eq = bdft_sm_mrt(&identity_channel(4), &cfg).unwrap();
        let eye = DMatrix::<Complex64>::identity(4, 4) * Complex64::from(eq.rho);
        assert!((&eq.matrix - eye).norm() < 1e-14);
    }

    #[test]
    fn bdft_identity_channel_with_cp() {
        // N_D = 2, N_CP = 1, one block: G = rho * B' * A' = rho * I.
        let cfg = SchemeConfig::block(2, 1, 1, 1.0).unwrap();
        let eq = bdft_sm_mrt(&identity_channel(3), &cfg).unwrap();
        let eye = DMatrix::<Complex64>::identity(2, 2) * Complex64::from(eq.rho);
        assert!((&eq.matrix - eye).norm() < 1e-14);
    }

    #[test]
    fn bdft_rejects_wrong_channel_size() {
        let cfg = SchemeConfig::block(4, 2, 1, 1.0).unwrap();
        assert!(matches!(
            bdft_sm_mrt(&identity_channel(4), &cfg),
            Err(SchemeError::DimensionMismatch { expected: 6, .. })
        ));
    }

    #[test]
    fn svd_diagonal_channel() {
        let h = channel_from(DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(2.0, 0.0),
        ])));
        let (eq, factors) = svd_scheme(&h, 1.0).unwrap();
        assert!((factors.eigenvalues[0] - 9.0).abs() < 1e-12);
        assert!((factors.eigenvalues[1] - 4.0).abs() < 1e-12);
        assert!((eq.matrix[(0, 0)].re - eq.rho * 9.0).abs() < 1e-12);
        assert!((eq.matrix[(1, 1)].re - eq.rho * 4.0).abs() < 1e-12);
        assert_eq!(eq.matrix[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn svd_unitary_channel_gives_flat_gains() {
        let h = channel_from(butler(4));
        let (eq, factors) = svd_scheme(&h, 1.0).unwrap();
        for i in 0..4 {
            assert!((factors.eigenvalues[i] - 1.0).abs() < 1e-12);
            assert!((eq.matrix[(i, i)].re - eq.rho).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_factors_reconstruct_gram() {
        for seed in 0..20 {
            let h = random_channel(4, 40 + seed);
            let (eq, f) = svd_scheme(&h, 1.0).unwrap();
            let gram = &h.entries * h.entries.adjoint();
            let eye = DMatrix::<Complex64>::identity(4, 4);
            assert!((&f.basis * f.basis.adjoint() - &eye).norm() <= 1e-10);
            let delta = f.basis.adjoint() * &gram * &f.basis;
            for i in 0..4 {
                assert!((delta[(i, i)].re - f.eigenvalues[i]).abs() <= 1e-10 * gram.norm());
            }
            // Eigenvalues sorted descending; off-diagonal structurally zero.
            for w in f.eigenvalues.as_slice().windows(2) {
                assert!(w[0] >= w[1]);
            }
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        assert_eq!(eq.matrix[(i, j)], Complex64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut entries = DMatrix::<Complex64>::identity(2, 2);
        entries[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        let h = ChannelMatrix {
            entries,
            carrier: CarrierConfig::new(26e9).unwrap(),
            provenance: Provenance::Synthetic,
        };
        assert!(matches!(svd_scheme(&h, 1.0), Err(SchemeError::NonFinite)));
    }

    #[test]
    fn normalize_power_reference_values() {
        let eye = DMatrix::<Complex64>::identity(4, 4);
        assert!((normalize_power(&eye, 4.0).unwrap() - 1.0).abs() < 1e-15);
        let doubled = &eye * Complex64::new(2.0, 0.0);
        let rho = normalize_power(&eye, 1.0).unwrap();
        let rho2 = normalize_power(&doubled, 1.0).unwrap();
        assert!((rho2 - rho / 2.0).abs() < 1e-15);
    }

    #[test]
    fn normalized_precoder_meets_power_budget() {
        for seed in 0..10 {
            let h = random_channel(6, 90 + seed);
            let precoder = h.entries.adjoint() * butler_inverse(6);
            for &power in &[0.5, 1.0, 7.3] {
                let rho = normalize_power(&precoder, power).unwrap();
                let scaled = &precoder * Complex64::from(rho);
                let radiated = scaled.norm().powi(2);
                assert!((radiated - power).abs() <= 1e-12 * power);
            }
        }
    }

    #[test]
    fn normalize_power_rejects_zero_precoder() {
        let zero = DMatrix::<Complex64>::zeros(3, 3);
        assert!(matches!(
            normalize_power(&zero, 1.0),
            Err(SchemeError::ZeroPrecoder)
        ));
    }

    #[test]
    fn config_validates_shape() {
        assert!(SchemeConfig::dft(12, 1.0).is_err());
        assert!(SchemeConfig::block(8, 3, 0, 1.0).is_err());
        assert!(SchemeConfig::block(8, 2, 5, 1.0).is_err());
        assert!(SchemeConfig::dft(8, 0.0).is_err());
        let cfg = SchemeConfig::block(8, 2, 1, 1.0).unwrap();
        assert_eq!(cfg.num_antennas(), 10);
        assert_eq!(cfg.extended_block(), 5);
        assert_eq!(cfg.num_streams(), 8);
    }
}
