//! Element amplitude-gain patterns.
//!
//! A pattern maps a direction to a real, nonnegative amplitude factor.
//! Four variants are supported: an isotropic element, an analytic
//! `cos^p` dipole over a ground plane (back hemisphere fully attenuated),
//! a directional composite (a base pattern times the coherent array factor
//! of a small collinear subarray), and a sampled grid evaluated by
//! bilinear interpolation. Patterns carry amplitude only; phase lives in
//! the per-ray path gains.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use nalgebra::Vector3;
use thiserror::Error;

/// Direction unit tolerance; matches the ray-file import tolerance.
const UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum AntennaError {
    #[error("direction must be a unit vector, got norm {0}")]
    NotUnit(f64),
    #[error("invalid pattern grid: {0}")]
    InvalidGrid(String),
    #[error("pattern file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("pattern file: {0}")]
    Io(#[from] std::io::Error),
}

/// Real amplitude gain pattern of one antenna element.
#[derive(Debug, Clone)]
pub enum AntennaPattern {
    /// Unit gain in every direction.
    Isotropic,
    /// `max(cos theta, 0)^exponent` where `theta` is the angle off
    /// boresight; the ground plane kills the back hemisphere.
    DipoleOnGround { exponent: f64 },
    /// Base pattern multiplied by the coherent array factor of `elements`
    /// units spaced `spacing_wavelengths` apart.
    DirectionalComposite {
        base: Box<AntennaPattern>,
        elements: usize,
        spacing_wavelengths: f64,
    },
    /// Sampled gains on an azimuth/elevation grid in the boresight frame,
    /// bilinearly interpolated.
    Sampled(PatternGrid),
}

impl AntennaPattern {
    /// The default basic element: a dipole over a ground plane.
    pub fn basic() -> Self {
        AntennaPattern::DipoleOnGround { exponent: 1.0 }
    }

    /// The directional element: five basic units spaced 1.5 wavelengths.
    pub fn directional() -> Self {
        AntennaPattern::DirectionalComposite {
            base: Box::new(Self::basic()),
            elements: 5,
            spacing_wavelengths: 1.5,
        }
    }

    /// Amplitude gain toward `direction` for an element oriented along
    /// `boresight`. Both vectors must be unit length.
    pub fn gain(
        &self,
        direction: &Vector3<f64>,
        boresight: &Vector3<f64>,
    ) -> Result<f64, AntennaError> {
        ensure_unit(direction)?;
        ensure_unit(boresight)?;
        Ok(self.gain_unchecked(direction, boresight))
    }

    fn gain_unchecked(&self, direction: &Vector3<f64>, boresight: &Vector3<f64>) -> f64 {
        match self {
            AntennaPattern::Isotropic => 1.0,
            AntennaPattern::DipoleOnGround { exponent } => {
                let cos_theta = direction.dot(boresight);
                cos_theta.max(0.0).powf(*exponent)
            }
            AntennaPattern::DirectionalComposite {
                base,
                elements,
                spacing_wavelengths,
            } => {
                let cos_theta = direction.dot(boresight).clamp(-1.0, 1.0);
                let theta = cos_theta.acos();
                base.gain_unchecked(direction, boresight)
                    * array_factor(*elements, *spacing_wavelengths, theta)
            }
            AntennaPattern::Sampled(grid) => {
                let (az, el) = boresight_angles(direction, boresight);
                grid.interpolate(az, el)
            }
        }
    }
}

impl fmt::Display for AntennaPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AntennaPattern::Isotropic => write!(f, "isotropic"),
            AntennaPattern::DipoleOnGround { exponent } => write!(f, "dipole(p={exponent})"),
            AntennaPattern::DirectionalComposite {
                elements,
                spacing_wavelengths,
                ..
            } => write!(f, "directional({elements}x{spacing_wavelengths}lambda)"),
            AntennaPattern::Sampled(g) => {
                write!(f, "sampled({}x{})", g.azimuth.len(), g.elevation.len())
            }
        }
    }
}

/// Coherent amplitude of `n` elements spaced `spacing_wavelengths` apart,
/// steered broadside, observed at angle `theta` off broadside:
/// `|sum_k exp(j*2*pi*s*k*sin(theta))|`. Peaks at `n` for `theta = 0`.
pub fn array_factor(n: usize, spacing_wavelengths: f64, theta: f64) -> f64 {
    assert!(n >= 1, "array factor needs at least one element");
    let phase_step = 2.0 * PI * spacing_wavelengths * theta.sin();
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for k in 0..n {
        let phi = phase_step * k as f64;
        re += phi.cos();
        im += phi.sin();
    }
    re.hypot(im)
}

/// Rectangular azimuth/elevation gain table.
///
/// Azimuth samples live in `[-pi, pi)` and wrap across the seam; elevation
/// samples live in `[-pi/2, pi/2]` and clamp at the edges. Gains are
/// stored row-major with azimuth as the slow index.
#[derive(Debug, Clone)]
pub struct PatternGrid {
    pub azimuth: Vec<f64>,
    pub elevation: Vec<f64>,
    gains: Vec<f64>,
}

impl PatternGrid {
    pub fn new(
        azimuth: Vec<f64>,
        elevation: Vec<f64>,
        gains: Vec<f64>,
    ) -> Result<Self, AntennaError> {
        if azimuth.len() < 2 || elevation.len() < 2 {
            return Err(AntennaError::InvalidGrid(
                "need at least two samples per axis".into(),
            ));
        }
        ensure_strictly_increasing("azimuth", &azimuth)?;
        ensure_strictly_increasing("elevation", &elevation)?;
        if azimuth[0] < -PI || *azimuth.last().unwrap() >= PI {
            return Err(AntennaError::InvalidGrid(
                "azimuth samples must lie in [-pi, pi)".into(),
            ));
        }
        let el_tol = 1e-9;
        if elevation[0] < -FRAC_PI_2 - el_tol || *elevation.last().unwrap() > FRAC_PI_2 + el_tol {
            return Err(AntennaError::InvalidGrid(
                "elevation samples must lie in [-pi/2, pi/2]".into(),
            ));
        }
        if gains.len() != azimuth.len() * elevation.len() {
            return Err(AntennaError::InvalidGrid(format!(
                "expected {} gain values for a {}x{} grid, got {}",
                azimuth.len() * elevation.len(),
                azimuth.len(),
                elevation.len(),
                gains.len()
            )));
        }
        if let Some(bad) = gains.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(AntennaError::InvalidGrid(format!(
                "gain values must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(Self {
            azimuth,
            elevation,
            gains,
        })
    }

    pub fn value(&self, az_index: usize, el_index: usize) -> f64 {
        self.gains[az_index * self.elevation.len() + el_index]
    }

    /// Bilinear interpolation at `(az, el)` radians. Azimuth wraps around
    /// the circle; elevation clamps to the sampled range.
    pub fn interpolate(&self, az: f64, el: f64) -> f64 {
        let (ia, t_az) = self.bracket_azimuth(az);
        let (ie, t_el) = bracket_clamped(&self.elevation, el);
        let ia1 = (ia + 1) % self.azimuth.len();
        let v00 = self.value(ia, ie);
        let v01 = self.value(ia, ie + 1);
        let v10 = self.value(ia1, ie);
        let v11 = self.value(ia1, ie + 1);
        let low = v00 + (v01 - v00) * t_el;
        let high = v10 + (v11 - v10) * t_el;
        low + (high - low) * t_az
    }

    fn bracket_azimuth(&self, az: f64) -> (usize, f64) {
        let az = wrap_azimuth(az);
        let n = self.azimuth.len();
        if az < self.azimuth[0] || az >= self.azimuth[n - 1] {
            // Seam segment from the last sample back around to the first.
            let span = self.azimuth[0] + 2.0 * PI - self.azimuth[n - 1];
            let offset = if az >= self.azimuth[n - 1] {
                az - self.azimuth[n - 1]
            } else {
                az + 2.0 * PI - self.azimuth[n - 1]
            };
            return (n - 1, (offset / span).clamp(0.0, 1.0));
        }
        let (i, t) = bracket_clamped(&self.azimuth, az);
        (i, t)
    }

    /// Load a grid from CSV with header `az_rad,el_rad,gain`, one row per
    /// node, covering a complete rectangular grid in any row order.
    pub fn load_csv(path: &Path) -> Result<Self, AntennaError> {
        Self::from_reader(File::open(path)?)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, AntennaError> {
        let mut lines = BufReader::new(reader).lines().enumerate();
        match lines.next() {
            Some((_, Ok(header))) if header.trim() == "az_rad,el_rad,gain" => {}
            Some((_, Ok(header))) => {
                return Err(AntennaError::Parse {
                    line: 1,
                    message: format!("expected header `az_rad,el_rad,gain`, got `{header}`"),
                })
            }
            Some((_, Err(e))) => return Err(e.into()),
            None => {
                return Err(AntennaError::Parse {
                    line: 1,
                    message: "empty pattern file".into(),
                })
            }
        }
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(AntennaError::Parse {
                    line: lineno,
                    message: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let mut vals = [0.0f64; 3];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.trim().parse().map_err(|e| AntennaError::Parse {
                    line: lineno,
                    message: format!("bad number `{f}`: {e}"),
                })?;
            }
            rows.push((vals[0], vals[1], vals[2]));
        }
        let mut azimuth = dedup_sorted(rows.iter().map(|r| r.0));
        let mut elevation = dedup_sorted(rows.iter().map(|r| r.1));
        azimuth.sort_by(f64::total_cmp);
        elevation.sort_by(f64::total_cmp);
        if rows.len() != azimuth.len() * elevation.len() {
            return Err(AntennaError::InvalidGrid(format!(
                "grid incomplete: {} rows cannot tile {} azimuths x {} elevations",
                rows.len(),
                azimuth.len(),
                elevation.len()
            )));
        }
        let mut gains = vec![f64::NAN; rows.len()];
        for (az, el, gain) in rows {
            let ia = azimuth.binary_search_by(|a| a.total_cmp(&az)).unwrap();
            let ie = elevation.binary_search_by(|e| e.total_cmp(&el)).unwrap();
            let slot = &mut gains[ia * elevation.len() + ie];
            if !slot.is_nan() {
                return Err(AntennaError::InvalidGrid(format!(
                    "duplicate grid node at az={az}, el={el}"
                )));
            }
            *slot = gain;
        }
        Self::new(azimuth, elevation, gains)
    }
}

/// Azimuth and elevation of `direction` in the frame whose x axis is the
/// boresight. The frame's z axis is the global z axis projected orthogonal
/// to the boresight (global x when the boresight is nearly vertical), so a
/// given boresight always yields the same frame.
pub fn boresight_angles(direction: &Vector3<f64>, boresight: &Vector3<f64>) -> (f64, f64) {
    let x = boresight;
    let reference = if x.z.abs() < 0.9 {
        Vector3::z()
    } else {
        Vector3::x()
    };
    let z = (reference - x * reference.dot(x)).normalize();
    let y = z.cross(x);
    let mut az = direction.dot(&y).atan2(direction.dot(x));
    if az >= PI {
        az -= 2.0 * PI;
    }
    let el = direction.dot(&z).clamp(-1.0, 1.0).asin();
    (az, el)
}

fn wrap_azimuth(az: f64) -> f64 {
    let mut a = az;
    while a < -PI {
        a += 2.0 * PI;
    }
    while a >= PI {
        a -= 2.0 * PI;
    }
    a
}

/// Index `i` and fraction `t` such that the query sits at `t` between
/// samples `i` and `i+1`; queries outside the range clamp to the edges.
fn bracket_clamped(samples: &[f64], query: f64) -> (usize, f64) {
    let n = samples.len();
    if query <= samples[0] {
        return (0, 0.0);
    }
    if query >= samples[n - 1] {
        return (n - 2, 1.0);
    }
    let i = match samples.binary_search_by(|s| s.total_cmp(&query)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    };
    let t = (query - samples[i]) / (samples[i + 1] - samples[i]);
    (i, t.clamp(0.0, 1.0))
}

fn ensure_strictly_increasing(name: &str, samples: &[f64]) -> Result<(), AntennaError> {
    for w in samples.windows(2) {
        if w[1] <= w[0] || w[0].is_nan() || w[1].is_nan() {
            return Err(AntennaError::InvalidGrid(format!(
                "{name} samples must be strictly increasing"
            )));
        }
    }
    Ok(())
}

fn dedup_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn ensure_unit(v: &Vector3<f64>) -> Result<(), AntennaError> {
    let norm = v.norm();
    if (norm - 1.0).abs() <= UNIT_TOL {
        Ok(())
    } else {
        Err(AntennaError::NotUnit(norm))
    }
}
