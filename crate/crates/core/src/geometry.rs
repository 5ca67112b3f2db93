//! Array geometry and deployment parameter selection.
//!
//! A link is two uniform linear arrays (ULAs) facing each other across a
//! line-of-sight hop of length `D`. The deployment rules pick the stream
//! count `N_U` (largest power of two whose aperture fits the mounting
//! structure) and the element spacing `d` (quantized to the positioning
//! step), so that `(N_U * d)^2 / (lambda * D)` is as close to `N_U` as the
//! hardware allows.

use std::sync::Arc;

use nalgebra::{DMatrix, Point3, Vector3};
use thiserror::Error;

use crate::antenna::AntennaPattern;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default antenna positioning step, m (0.1 mm).
pub const DEFAULT_POSITIONING_STEP: f64 = 1e-4;

/// Tolerance for unit-vector invariants on array axes and boresights.
const UNIT_TOL: f64 = 1e-12;

/// Errors raised by geometry construction and deployment computations.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be a unit vector, got norm {norm}")]
    NotUnit { name: &'static str, norm: f64 },
    #[error("array must have at least one element")]
    EmptyArray,
    #[error("no stream deployable: L^2/(lambda*D) = {0} < 1")]
    NoDeployableStream(f64),
    #[error("stream count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("rx element {rx} and tx element {tx} coincide")]
    CoincidentElements { rx: usize, tx: usize },
    #[error("block count {blocks} does not divide stream count {streams}")]
    BlockMismatch { blocks: usize, streams: usize },
}

/// Carrier frequency and the propagation speed it is paired with.
///
/// The wavelength is always derived as `c / f`, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierConfig {
    pub frequency_hz: f64,
    pub speed_of_light: f64,
}

impl CarrierConfig {
    /// Carrier at `frequency_hz` with the vacuum speed of light.
    pub fn new(frequency_hz: f64) -> Result<Self, GeometryError> {
        Self::with_speed_of_light(frequency_hz, SPEED_OF_LIGHT)
    }

    /// Carrier with an explicit propagation speed, for sensitivity studies.
    pub fn with_speed_of_light(
        frequency_hz: f64,
        speed_of_light: f64,
    ) -> Result<Self, GeometryError> {
        ensure_positive("carrier frequency", frequency_hz)?;
        ensure_positive("speed of light", speed_of_light)?;
        Ok(Self {
            frequency_hz,
            speed_of_light,
        })
    }

    /// Wavelength `lambda = c / f`, m.
    pub fn wavelength(&self) -> f64 {
        self.speed_of_light / self.frequency_hz
    }
}

/// One uniform linear array: element positions plus element orientation.
#[derive(Debug, Clone)]
pub struct UlaSpec {
    /// Position of the first element, m.
    pub anchor: Point3<f64>,
    /// Direction along which elements are laid out (unit).
    pub axis: Vector3<f64>,
    /// Number of elements.
    pub element_count: usize,
    /// Inter-element spacing, m.
    pub spacing: f64,
    /// Element orientation (unit); the pattern's peak-gain direction.
    pub boresight: Vector3<f64>,
    /// Amplitude gain pattern shared by every element.
    pub pattern: Arc<AntennaPattern>,
}

impl UlaSpec {
    pub fn new(
        anchor: Point3<f64>,
        axis: Vector3<f64>,
        element_count: usize,
        spacing: f64,
        boresight: Vector3<f64>,
        pattern: Arc<AntennaPattern>,
    ) -> Result<Self, GeometryError> {
        ensure_unit("array axis", &axis)?;
        ensure_unit("boresight", &boresight)?;
        ensure_positive("element spacing", spacing)?;
        if element_count == 0 {
            return Err(GeometryError::EmptyArray);
        }
        Ok(Self {
            anchor,
            axis,
            element_count,
            spacing,
            boresight,
            pattern,
        })
    }

    /// Element positions: element `k` (0-based) sits at `anchor + k*d*axis`.
    pub fn positions(&self) -> Vec<Point3<f64>> {
        (0..self.element_count)
            .map(|k| self.anchor + self.axis * (k as f64 * self.spacing))
            .collect()
    }

    /// Deployment length `N * d`, m (the convention used by the design
    /// rules, slightly larger than the physical end-to-end extent).
    pub fn aperture(&self) -> f64 {
        self.element_count as f64 * self.spacing
    }

    /// Copy of this array truncated to its first `count` elements.
    pub fn truncated(&self, count: usize) -> Result<Self, GeometryError> {
        if count == 0 || count > self.element_count {
            return Err(GeometryError::EmptyArray);
        }
        let mut u = self.clone();
        u.element_count = count;
        Ok(u)
    }
}

/// A transmit/receive ULA pair with the true and estimated hop distance.
///
/// `estimated_distance` is what the deployment rules see; `true_distance`
/// is what the propagation sees. They differ when studying the impact of
/// imperfect distance measurement.
#[derive(Debug, Clone)]
pub struct LinkGeometry {
    pub tx: UlaSpec,
    pub rx: UlaSpec,
    pub true_distance: f64,
    pub estimated_distance: f64,
    pub positioning_step: f64,
}

impl LinkGeometry {
    pub fn new(
        tx: UlaSpec,
        rx: UlaSpec,
        true_distance: f64,
        estimated_distance: f64,
        positioning_step: f64,
    ) -> Result<Self, GeometryError> {
        ensure_positive("true distance", true_distance)?;
        ensure_positive("estimated distance", estimated_distance)?;
        ensure_positive("positioning step", positioning_step)?;
        Ok(Self {
            tx,
            rx,
            true_distance,
            estimated_distance,
            positioning_step,
        })
    }

    /// The standard deployment picture: two parallel ULAs along z, centers
    /// aligned, boresights facing each other across `distance` on the x
    /// axis. The transmit array sits at x = 0, the receive array at
    /// x = `distance`.
    pub fn broadside(
        n_tx: usize,
        n_rx: usize,
        spacing: f64,
        distance: f64,
        tx_pattern: Arc<AntennaPattern>,
        rx_pattern: Arc<AntennaPattern>,
    ) -> Result<Self, GeometryError> {
        let centered_anchor =
            |x: f64, n: usize| Point3::new(x, 0.0, -((n as f64 - 1.0) / 2.0) * spacing);
        let tx = UlaSpec::new(
            centered_anchor(0.0, n_tx),
            Vector3::z(),
            n_tx,
            spacing,
            Vector3::x(),
            tx_pattern,
        )?;
        let rx = UlaSpec::new(
            centered_anchor(distance, n_rx),
            Vector3::z(),
            n_rx,
            spacing,
            -Vector3::x(),
            rx_pattern,
        )?;
        Self::new(tx, rx, distance, distance, DEFAULT_POSITIONING_STEP)
    }

    pub fn with_estimated_distance(mut self, d_hat: f64) -> Result<Self, GeometryError> {
        ensure_positive("estimated distance", d_hat)?;
        self.estimated_distance = d_hat;
        Ok(self)
    }

    pub fn with_positioning_step(mut self, step: f64) -> Result<Self, GeometryError> {
        ensure_positive("positioning step", step)?;
        self.positioning_step = step;
        Ok(self)
    }
}

/// Closeness of a link to the two stream-multiplexing design conditions.
///
/// `r1` compares the aperture to the ideal `(N*d)^2 = lambda * D * N`
/// (ideal value 1). `r2 = D/(d*N)` measures how far the hop is into the
/// "distance much larger than aperture" regime for the whole array, and
/// `r2_block` the same for one block of a block-partitioned scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionRatios {
    pub r1: f64,
    pub r2: f64,
    pub r2_block: f64,
}

/// Largest power-of-two stream count deployable in length `length` at the
/// given wavelength and estimated hop distance.
///
/// Returns `2^K` with `K = max{k : 2^k <= L^2/(lambda*D)}`.
pub fn compute_num_streams(
    length: f64,
    wavelength: f64,
    estimated_distance: f64,
) -> Result<usize, GeometryError> {
    ensure_positive("deployment length", length)?;
    ensure_positive("wavelength", wavelength)?;
    ensure_positive("estimated distance", estimated_distance)?;
    let ratio = length * length / (wavelength * estimated_distance);
    if ratio < 1.0 {
        return Err(GeometryError::NoDeployableStream(ratio));
    }
    let mut streams = 1usize;
    while (streams as f64) * 2.0 <= ratio {
        streams *= 2;
    }
    Ok(streams)
}

/// Element spacing for `num_streams` streams, quantized to the positioning
/// step: `d = (step/N) * ceil(sqrt(lambda*D*N) / step)`.
///
/// The quantized aperture satisfies
/// `sqrt(lambda*D*N) <= d*N < sqrt(lambda*D*N) + step`.
pub fn compute_spacing(
    wavelength: f64,
    estimated_distance: f64,
    num_streams: usize,
    step: f64,
) -> Result<f64, GeometryError> {
    ensure_positive("wavelength", wavelength)?;
    ensure_positive("estimated distance", estimated_distance)?;
    ensure_positive("positioning step", step)?;
    if !num_streams.is_power_of_two() {
        return Err(GeometryError::NotPowerOfTwo(num_streams));
    }
    let target = (wavelength * estimated_distance * num_streams as f64).sqrt();
    let ticks = (target / step).ceil();
    Ok(step * ticks / num_streams as f64)
}

/// Matrix of Euclidean distances between every receive element (row) and
/// every transmit element (column), m.
pub fn pairwise_distances(g: &LinkGeometry) -> Result<DMatrix<f64>, GeometryError> {
    let tx = g.tx.positions();
    let rx = g.rx.positions();
    let mut out = DMatrix::zeros(rx.len(), tx.len());
    for (n, rp) in rx.iter().enumerate() {
        for (q, tp) in tx.iter().enumerate() {
            let dist = (rp - tp).norm();
            if dist == 0.0 {
                return Err(GeometryError::CoincidentElements { rx: n, tx: q });
            }
            out[(n, q)] = dist;
        }
    }
    Ok(out)
}

/// Condition ratios of a link, computed on the transmit array, for a scheme
/// splitting the streams into `num_blocks` blocks.
pub fn condition_ratios(
    g: &LinkGeometry,
    carrier: &CarrierConfig,
    num_blocks: usize,
) -> Result<ConditionRatios, GeometryError> {
    let streams = g.tx.element_count;
    if num_blocks == 0 || !streams.is_multiple_of(num_blocks) {
        return Err(GeometryError::BlockMismatch {
            blocks: num_blocks,
            streams,
        });
    }
    let lambda = carrier.wavelength();
    let d = g.tx.spacing;
    let d_hat = g.estimated_distance;
    let aperture = g.tx.aperture();
    let block_size = streams / num_blocks;
    Ok(ConditionRatios {
        r1: aperture * aperture / (lambda * d_hat) / streams as f64,
        r2: d_hat / (d * streams as f64),
        r2_block: d_hat / (d * block_size as f64),
    })
}

fn ensure_positive(name: &'static str, value: f64) -> Result<(), GeometryError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::NonPositive { name, value })
    }
}

fn ensure_unit(name: &'static str, v: &Vector3<f64>) -> Result<(), GeometryError> {
    let norm = v.norm();
    if (norm - 1.0).abs() <= UNIT_TOL {
        Ok(())
    } else {
        Err(GeometryError::NotUnit { name, norm })
    }
}
