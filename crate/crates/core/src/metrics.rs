//! Stream metrics: SIR, spectral efficiency, and complexity ratios.
//!
//! The pipeline is noise-free and interference-limited: each stream's SIR
//! is its diagonal power over its row leakage in the equivalent channel,
//! `c = log2(1 + sir)` is the unconstrained efficiency, and the practical
//! efficiency caps `c` at the densest supported modulation and zeroes
//! streams that cannot even sustain the sparsest one.

use thiserror::Error;

use crate::schemes::{EquivalentChannel, SchemeConfig, SchemeKind};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("spectral efficiency bounds must satisfy 0 < min <= max, got ({min}, {max})")]
    InvalidBounds { min: f64, max: f64 },
    #[error("{0} spectral efficiency is zero; ratio undefined")]
    ZeroDenominator(&'static str),
}

/// Modulation-and-coding limits on per-stream spectral efficiency,
/// bits/s/Hz. The defaults are 1 (QPSK, rate 1/2) and 8 (256-QAM, rate 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeBounds {
    pub min: f64,
    pub max: f64,
}

impl SeBounds {
    pub fn new(min: f64, max: f64) -> Result<Self, MetricsError> {
        if !(min > 0.0 && min <= max && max.is_finite()) {
            return Err(MetricsError::InvalidBounds { min, max });
        }
        Ok(Self { min, max })
    }
}

impl Default for SeBounds {
    fn default() -> Self {
        Self { min: 1.0, max: 8.0 }
    }
}

/// Per-stream SIR and spectral efficiencies of one equivalent channel.
#[derive(Debug, Clone)]
pub struct StreamMetrics {
    pub sir: Vec<f64>,
    pub capacity: Vec<f64>,
    pub practical: Vec<f64>,
    pub total: f64,
}

/// Scheme-versus-reference spectral efficiency ratios, percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiRatios {
    /// Share of the SVD upper bound achieved.
    pub svd_pct: f64,
    /// Share of the same scheme's free-space performance achieved.
    pub fs_pct: f64,
}

/// How many times cheaper the scheme is than SVD, per the analytic
/// scaling laws, at the transmitter and the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityRatios {
    pub tx: f64,
    pub rx: f64,
}

impl ComplexityRatios {
    pub fn tx_rounded(&self) -> i64 {
        self.tx.round() as i64
    }

    pub fn rx_rounded(&self) -> i64 {
        self.rx.round() as i64
    }
}

/// Per-stream signal-to-interference ratio of the equivalent channel:
/// diagonal power over the rest of the row. A zero row reads as a dead
/// stream (0); a clean diagonal with no leakage reads as infinite.
pub fn sir(eq: &EquivalentChannel) -> Vec<f64> {
    let g = &eq.matrix;
    let n = g.nrows();
    (0..n)
        .map(|row| {
            let wanted = g[(row, row)].norm_sqr();
            let leakage: f64 = (0..n)
                .filter(|&p| p != row)
                .map(|p| g[(row, p)].norm_sqr())
                .sum();
            if leakage == 0.0 {
                if wanted == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                wanted / leakage
            }
        })
        .collect()
}

/// Unconstrained per-stream efficiency `c = log2(1 + sir)`, bits/s/Hz.
pub fn stream_se(sir: &[f64]) -> Vec<f64> {
    sir.iter().map(|&s| (1.0 + s).log2()).collect()
}

/// Practical per-stream efficiency: `min(c, max)` when that exceeds `min`
/// (strictly), else 0.
pub fn practical_se(capacity: &[f64], bounds: &SeBounds) -> Vec<f64> {
    capacity
        .iter()
        .map(|&c| {
            let capped = c.min(bounds.max);
            if capped > bounds.min {
                capped
            } else {
                0.0
            }
        })
        .collect()
}

/// Total spectral efficiency: the sum of the practical per-stream values.
pub fn total_se(practical: &[f64]) -> f64 {
    practical.iter().sum()
}

/// All stream metrics of one equivalent channel in one pass.
pub fn stream_metrics(eq: &EquivalentChannel, bounds: &SeBounds) -> StreamMetrics {
    let sir = sir(eq);
    let capacity = stream_se(&sir);
    let practical = practical_se(&capacity, bounds);
    let total = total_se(&practical);
    StreamMetrics {
        sir,
        capacity,
        practical,
        total,
    }
}

/// Spectral efficiency ratios of a scheme against the SVD upper bound and
/// against the same scheme in free space, percent.
pub fn phi_ratios(
    scheme_se: f64,
    svd_se: f64,
    scheme_fs_se: f64,
) -> Result<PhiRatios, MetricsError> {
    if svd_se <= 0.0 {
        return Err(MetricsError::ZeroDenominator("SVD"));
    }
    if scheme_fs_se <= 0.0 {
        return Err(MetricsError::ZeroDenominator("free-space"));
    }
    Ok(PhiRatios {
        svd_pct: 100.0 * scheme_se / svd_se,
        fs_pct: 100.0 * scheme_se / scheme_fs_se,
    })
}

/// Analytic complexity ratios (SVD cost over scheme cost) from the scaling
/// laws, unit constants:
///
/// ```text
/// SVD:    tx = N^3 + 2N^2          rx = N^3 + N^2
/// DFT:    tx = N*log2(N) + N^2     rx = N*log2(N)
/// B-DFT:  tx = (N + S*CP)^2 + N*log2(N/S)
///         rx = N*log2(N/S)
/// ```
///
/// with `N` the stream count and `S` the block count. Meaningful for
/// `N >= 2` (a single stream needs no receive processing at all).
pub fn complexity_ratios(cfg: &SchemeConfig) -> ComplexityRatios {
    let n = cfg.num_streams() as f64;
    let log2_n = cfg.num_streams().trailing_zeros() as f64;
    let svd_tx = n.powi(3) + 2.0 * n.powi(2);
    let svd_rx = n.powi(3) + n.powi(2);
    let (scheme_tx, scheme_rx) = match cfg.kind() {
        SchemeKind::DftSmMrt => (n * log2_n + n.powi(2), n * log2_n),
        SchemeKind::BlockDftSmMrt => {
            let log2_block = cfg.block_size().trailing_zeros() as f64;
            let antennas = (cfg.num_streams() + cfg.num_blocks() * cfg.cp_len()) as f64;
            (antennas.powi(2) + n * log2_block, n * log2_block)
        }
        SchemeKind::Svd => (svd_tx, svd_rx),
    };
    ComplexityRatios {
        tx: svd_tx / scheme_tx,
        rx: svd_rx / scheme_rx,
    }
}
