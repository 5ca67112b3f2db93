//! Propagation channel synthesis.
//!
//! The channel between an `N_tx`-element transmit array and an
//! `N_rx`-element receive array is a complex matrix `H` whose `(n, m)`
//! entry sums the contributions of every ray connecting transmit element
//! `m` to receive element `n`:
//!
//! ```text
//! H[n][m] = sum_r alpha_r * gain_tx(dod_r) * gain_rx(doa_r)
//! ```
//!
//! Three sources of rays are supported: the closed-form free-space
//! coefficient, an imported ray file, and a synthetic single-bounce point
//! scatterer model. Ray directions use the propagation convention: `dod`
//! points away from the transmit element along the departing ray, `doa`
//! points along the arriving ray into the receive element. Receive gain is
//! therefore evaluated toward the ray's origin, i.e. against `-doa`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::antenna::{AntennaError, AntennaPattern};
use crate::geometry::{pairwise_distances, CarrierConfig, GeometryError, LinkGeometry};

/// Ray-file direction vectors must be unit within this tolerance.
const DIRECTION_TOL: f64 = 1e-6;

/// Expected ray-file header.
pub const RAY_FILE_HEADER: &str =
    "rx_index,tx_index,alpha_re,alpha_im,doa_x,doa_y,doa_z,dod_x,dod_y,dod_z";

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Antenna(#[from] AntennaError),
    #[error("ray field is {got_rx}x{got_tx} but the link is {want_rx}x{want_tx}")]
    DimensionMismatch {
        got_rx: usize,
        got_tx: usize,
        want_rx: usize,
        want_tx: usize,
    },
    #[error("scatterer {index} coincides with an array element")]
    ScattererOnElement { index: usize },
    #[error("scatterer {index} reflection magnitude {magnitude} exceeds 1")]
    ReflectionTooLarge { index: usize, magnitude: f64 },
    #[error("ray index ({rx}, {tx}) outside the {n_rx}x{n_tx} ray field")]
    IndexOutOfRange {
        rx: usize,
        tx: usize,
        n_rx: usize,
        n_tx: usize,
    },
    #[error("ray {which} must be a unit vector, got norm {norm}")]
    NonUnitDirection { which: &'static str, norm: f64 },
    #[error("ray file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("channel matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("ray file: {0}")]
    Io(#[from] std::io::Error),
}

/// One propagation ray: complex path gain plus arrival/departure directions
/// (unit vectors, propagation convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub alpha: Complex64,
    pub doa: Vector3<f64>,
    pub dod: Vector3<f64>,
}

impl Ray {
    pub fn new(
        alpha: Complex64,
        doa: Vector3<f64>,
        dod: Vector3<f64>,
    ) -> Result<Self, ChannelError> {
        for (v, which) in [(&doa, "doa"), (&dod, "dod")] {
            let norm = v.norm();
            if (norm - 1.0).abs() > DIRECTION_TOL {
                return Err(ChannelError::NonUnitDirection { which, norm });
            }
        }
        Ok(Self { alpha, doa, dod })
    }
}

/// How a channel matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FreeSpace,
    RayFile,
    Synthetic,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::FreeSpace => "free_space",
            Provenance::RayFile => "ray_file",
            Provenance::Synthetic => "synthetic",
        }
    }
}

/// A bundle of rays per (receive element, transmit element) pair. Pairs may
/// carry any number of rays, including none.
#[derive(Debug, Clone)]
pub struct RayField {
    pairs: Vec<Vec<Ray>>,
    n_rx: usize,
    n_tx: usize,
    source: Provenance,
}

impl RayField {
    pub fn new(n_rx: usize, n_tx: usize, source: Provenance) -> Self {
        Self {
            pairs: vec![Vec::new(); n_rx * n_tx],
            n_rx,
            n_tx,
            source,
        }
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn source(&self) -> Provenance {
        self.source
    }

    /// Add a ray for 0-based pair `(rx, tx)`.
    pub fn push(&mut self, rx: usize, tx: usize, ray: Ray) -> Result<(), ChannelError> {
        if rx >= self.n_rx || tx >= self.n_tx {
            return Err(ChannelError::IndexOutOfRange {
                rx,
                tx,
                n_rx: self.n_rx,
                n_tx: self.n_tx,
            });
        }
        self.pairs[rx * self.n_tx + tx].push(ray);
        Ok(())
    }

    pub fn rays(&self, rx: usize, tx: usize) -> &[Ray] {
        &self.pairs[rx * self.n_tx + tx]
    }

    pub fn total_rays(&self) -> usize {
        self.pairs.iter().map(Vec::len).sum()
    }
}

/// A single-bounce point scatterer with a complex reflection coefficient of
/// magnitude at most 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointScatterer {
    pub position: nalgebra::Point3<f64>,
    pub reflection: Complex64,
}

impl PointScatterer {
    pub fn new(position: nalgebra::Point3<f64>, reflection: Complex64) -> Self {
        Self {
            position,
            reflection,
        }
    }
}

/// The propagation matrix with its carrier and origin.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    pub entries: DMatrix<Complex64>,
    pub carrier: CarrierConfig,
    pub provenance: Provenance,
}

impl ChannelMatrix {
    pub fn new(
        entries: DMatrix<Complex64>,
        carrier: CarrierConfig,
        provenance: Provenance,
    ) -> Result<Self, ChannelError> {
        for row in 0..entries.nrows() {
            for col in 0..entries.ncols() {
                let z = entries[(row, col)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(ChannelError::NonFinite { row, col });
                }
            }
        }
        Ok(Self {
            entries,
            carrier,
            provenance,
        })
    }

    pub fn n_rx(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.entries.ncols()
    }

    /// Channel restricted to the first `n` receive and transmit elements.
    pub fn leading_submatrix(&self, n: usize) -> Result<Self, ChannelError> {
        let entries = self.entries.view((0, 0), (n, n)).into_owned();
        Self::new(entries, self.carrier, self.provenance)
    }
}

/// Free-space path coefficient `(lambda / (4*pi*dist)) * exp(-j*2*pi*dist/lambda)`.
fn fs_coefficient(dist: f64, lambda: f64) -> Complex64 {
    let magnitude = lambda / (4.0 * PI * dist);
    let phase = -2.0 * PI * dist / lambda;
    Complex64::from_polar(magnitude, phase)
}

/// Pure line-of-sight channel: every entry is the free-space coefficient of
/// its element pair distance.
pub fn fs_channel(
    g: &LinkGeometry,
    carrier: &CarrierConfig,
) -> Result<ChannelMatrix, ChannelError> {
    let distances = pairwise_distances(g)?;
    let lambda = carrier.wavelength();
    let entries = distances.map(|dist| fs_coefficient(dist, lambda));
    ChannelMatrix::new(entries, *carrier, Provenance::FreeSpace)
}

/// Channel from an explicit ray set: each entry sums
/// `alpha * gain_tx(dod) * gain_rx(toward ray origin)` over that pair's rays.
/// Pairs with no rays produce an exact zero.
pub fn ray_channel(
    rays: &RayField,
    tx_pattern: &AntennaPattern,
    rx_pattern: &AntennaPattern,
    tx_boresight: &Vector3<f64>,
    rx_boresight: &Vector3<f64>,
    carrier: &CarrierConfig,
) -> Result<ChannelMatrix, ChannelError> {
    let mut entries = DMatrix::<Complex64>::zeros(rays.n_rx, rays.n_tx);
    for rx in 0..rays.n_rx {
        for tx in 0..rays.n_tx {
            let mut sum = Complex64::new(0.0, 0.0);
            for ray in rays.rays(rx, tx) {
                let depart = tx_pattern.gain(&ray.dod, tx_boresight)?;
                let arrive = rx_pattern.gain(&(-ray.doa), rx_boresight)?;
                sum += ray.alpha * depart * arrive;
            }
            entries[(rx, tx)] = sum;
        }
    }
    ChannelMatrix::new(entries, *carrier, rays.source)
}

/// Synthesize a ray field from the link geometry: one line-of-sight ray per
/// element pair, plus one single-bounce ray per scatterer with path gain
/// `reflection * (lambda/(4*pi*l)) * exp(-j*2*pi*l/lambda)` over the total
/// path length `l`.
pub fn synth_rays(
    g: &LinkGeometry,
    scatterers: &[PointScatterer],
    carrier: &CarrierConfig,
) -> Result<RayField, ChannelError> {
    for (index, s) in scatterers.iter().enumerate() {
        let magnitude = s.reflection.norm();
        if magnitude > 1.0 + 1e-12 {
            return Err(ChannelError::ReflectionTooLarge { index, magnitude });
        }
    }
    let lambda = carrier.wavelength();
    let tx_positions = g.tx.positions();
    let rx_positions = g.rx.positions();
    let mut field = RayField::new(
        rx_positions.len(),
        tx_positions.len(),
        Provenance::Synthetic,
    );
    for (n, rp) in rx_positions.iter().enumerate() {
        for (m, tp) in tx_positions.iter().enumerate() {
            let los = rp - tp;
            let dist = los.norm();
            if dist == 0.0 {
                return Err(GeometryError::CoincidentElements { rx: n, tx: m }.into());
            }
            let direction = los / dist;
            field.push(
                n,
                m,
                Ray {
                    alpha: fs_coefficient(dist, lambda),
                    doa: direction,
                    dod: direction,
                },
            )?;
            for (index, s) in scatterers.iter().enumerate() {
                let leg_out = s.position - tp;
                let leg_in = rp - s.position;
                let (l1, l2) = (leg_out.norm(), leg_in.norm());
                if l1 == 0.0 || l2 == 0.0 {
                    return Err(ChannelError::ScattererOnElement { index });
                }
                field.push(
                    n,
                    m,
                    Ray {
                        alpha: s.reflection * fs_coefficient(l1 + l2, lambda),
                        doa: leg_in / l2,
                        dod: leg_out / l1,
                    },
                )?;
            }
        }
    }
    Ok(field)
}

/// Load a ray field from CSV (see [`RAY_FILE_HEADER`]); indices are 1-based
/// and multiple rows per pair accumulate. Pairs absent from the file stay
/// empty. An empty file is a valid, empty field.
pub fn load_rays(path: &Path, n_rx: usize, n_tx: usize) -> Result<RayField, ChannelError> {
    rays_from_reader(File::open(path)?, n_rx, n_tx)
}

pub fn rays_from_reader<R: Read>(
    reader: R,
    n_rx: usize,
    n_tx: usize,
) -> Result<RayField, ChannelError> {
    let mut field = RayField::new(n_rx, n_tx, Provenance::RayFile);
    for row in RayFileRows::new(reader) {
        let (line, rx, tx, ray) = row?;
        if rx >= n_rx || tx >= n_tx {
            return Err(ChannelError::Parse {
                line,
                message: format!(
                    "pair ({}, {}) outside the {n_rx}x{n_tx} link",
                    rx + 1,
                    tx + 1
                ),
            });
        }
        field.push(rx, tx, ray)?;
    }
    Ok(field)
}

/// Write a ray field in the ray-file CSV format.
pub fn save_rays(field: &RayField, path: &Path) -> Result<(), ChannelError> {
    let mut out = Vec::new();
    rays_to_writer(field, &mut out)?;
    std::fs::write(path, out)?;
    Ok(())
}

pub fn rays_to_writer<W: Write>(field: &RayField, writer: &mut W) -> Result<(), ChannelError> {
    writeln!(writer, "{RAY_FILE_HEADER}")?;
    for rx in 0..field.n_rx {
        for tx in 0..field.n_tx {
            for ray in field.rays(rx, tx) {
                writeln!(
                    writer,
                    "{},{},{},{},{},{},{},{},{},{}",
                    rx + 1,
                    tx + 1,
                    ray.alpha.re,
                    ray.alpha.im,
                    ray.doa.x,
                    ray.doa.y,
                    ray.doa.z,
                    ray.dod.x,
                    ray.dod.y,
                    ray.dod.z
                )?;
            }
        }
    }
    Ok(())
}

/// One reported defect in a ray file.
#[derive(Debug, Clone)]
pub struct RayFileViolation {
    pub line: usize,
    pub message: String,
}

/// Summary of a ray-file validation pass.
#[derive(Debug, Clone, Default)]
pub struct RayFileReport {
    pub total_rays: usize,
    pub distinct_pairs: usize,
    pub max_rx_index: usize,
    pub max_tx_index: usize,
    pub violations: Vec<RayFileViolation>,
}

impl RayFileReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Validate a ray file without binding it to a link, collecting every
/// defect instead of stopping at the first.
pub fn validate_rays(path: &Path) -> Result<RayFileReport, ChannelError> {
    validate_rays_reader(File::open(path)?)
}

pub fn validate_rays_reader<R: Read>(reader: R) -> Result<RayFileReport, ChannelError> {
    let mut report = RayFileReport::default();
    let mut pairs = std::collections::BTreeSet::new();
    for row in RayFileRows::new(reader) {
        match row {
            Ok((_, rx, tx, _)) => {
                report.total_rays += 1;
                report.max_rx_index = report.max_rx_index.max(rx + 1);
                report.max_tx_index = report.max_tx_index.max(tx + 1);
                pairs.insert((rx, tx));
            }
            Err(ChannelError::Parse { line, message }) => {
                report.violations.push(RayFileViolation { line, message });
            }
            Err(other) => return Err(other),
        }
    }
    report.distinct_pairs = pairs.len();
    Ok(report)
}

/// Iterator over parsed ray-file rows as `(line, rx, tx, ray)` with 0-based
/// indices. Parse problems surface per row so callers can collect them.
struct RayFileRows<R: Read> {
    lines: std::iter::Enumerate<std::io::Lines<BufReader<R>>>,
    header_checked: bool,
}

impl<R: Read> RayFileRows<R> {
    fn new(reader: R) -> Self {
        Self {
            lines: BufReader::new(reader).lines().enumerate(),
            header_checked: false,
        }
    }
}

impl<R: Read> Iterator for RayFileRows<R> {
    type Item = Result<(usize, usize, usize, Ray), ChannelError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let (idx, line) = self.lines.next()?;
            let lineno = idx + 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            if !self.header_checked {
                self.header_checked = true;
                if line.trim() != RAY_FILE_HEADER {
                    return Some(Err(ChannelError::Parse {
                        line: lineno,
                        message: format!("expected header `{RAY_FILE_HEADER}`, got `{line}`"),
                    }));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            return Some(parse_ray_row(lineno, &line));
        }
    }
}

fn parse_ray_row(lineno: usize, line: &str) -> Result<(usize, usize, usize, Ray), ChannelError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 10 {
        return Err(ChannelError::Parse {
            line: lineno,
            message: format!("expected 10 fields, got {}", fields.len()),
        });
    }
    let index = |i: usize, name: &str| -> Result<usize, ChannelError> {
        let v: usize = fields[i].trim().parse().map_err(|e| ChannelError::Parse {
            line: lineno,
            message: format!("bad {name} `{}`: {e}", fields[i]),
        })?;
        if v == 0 {
            return Err(ChannelError::Parse {
                line: lineno,
                message: format!("{name} is 1-based, got 0"),
            });
        }
        Ok(v - 1)
    };
    let number = |i: usize, name: &str| -> Result<f64, ChannelError> {
        fields[i].trim().parse().map_err(|e| ChannelError::Parse {
            line: lineno,
            message: format!("bad {name} `{}`: {e}", fields[i]),
        })
    };
    let rx = index(0, "rx_index")?;
    let tx = index(1, "tx_index")?;
    let alpha = Complex64::new(number(2, "alpha_re")?, number(3, "alpha_im")?);
    let doa = Vector3::new(
        number(4, "doa_x")?,
        number(5, "doa_y")?,
        number(6, "doa_z")?,
    );
    let dod = Vector3::new(
        number(7, "dod_x")?,
        number(8, "dod_y")?,
        number(9, "dod_z")?,
    );
    for (v, which) in [(&doa, "doa"), (&dod, "dod")] {
        let norm = v.norm();
        if (norm - 1.0).abs() > DIRECTION_TOL {
            return Err(ChannelError::Parse {
                line: lineno,
                message: format!("{which} must be unit within {DIRECTION_TOL}, got norm {norm}"),
            });
        }
    }
    Ok((lineno, rx, tx, Ray { alpha, doa, dod }))
}
