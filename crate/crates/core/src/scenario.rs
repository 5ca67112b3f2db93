//! Declarative scenarios and the deterministic runner.
//!
//! A scenario bundles a link (a built-in preset or an explicit geometry),
//! a propagation environment, a scheme configuration, antenna selections,
//! efficiency bounds, and a carrier. Running it synthesizes the channel,
//! evaluates the configured scheme both on that channel and on the
//! free-space channel of the same geometry, evaluates the SVD upper bound
//! on a stream-count array, and assembles every metric into one record.
//!
//! The built-in `table2-fs` catalog replays the reference scenario table
//! under free-space propagation. Scenario configs load from JSON; results
//! emit to CSV or JSON (the JSON form round-trips bit-exactly).

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use nalgebra::{Point3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::{AntennaError, AntennaPattern, PatternGrid};
use crate::channel::{
    fs_channel, load_rays, ray_channel, synth_rays, ChannelError, ChannelMatrix, PointScatterer,
};
use crate::geometry::{
    condition_ratios, CarrierConfig, GeometryError, LinkGeometry, UlaSpec, DEFAULT_POSITIONING_STEP,
};
use crate::metrics::{
    complexity_ratios, phi_ratios, stream_metrics, MetricsError, SeBounds, StreamMetrics,
};
use crate::schemes::{bdft_sm_mrt, dft_sm_mrt, svd_scheme, SchemeConfig, SchemeError, SchemeKind};

/// Default carrier for built-in presets, Hz.
pub const DEFAULT_CARRIER_HZ: f64 = 26e9;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config: {0}")]
    Config(String),
    #[error("config parse: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unknown link preset id {0}")]
    UnknownPreset(u32),
    #[error("unknown catalog `{0}`; available: table2-fs")]
    UnknownCatalog(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Antenna(#[from] AntennaError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("scenario `{name}`: {source}")]
    InScenario {
        name: String,
        #[source]
        source: Box<ScenarioError>,
    },
}

impl ScenarioError {
    /// True for failures of the numerical pipeline itself, as opposed to
    /// bad inputs; drives the CLI exit-code split.
    pub fn is_numerical(&self) -> bool {
        match self {
            ScenarioError::Scheme(_) | ScenarioError::Metrics(_) => true,
            ScenarioError::InScenario { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

/// One row of the built-in link table: the printed deployment parameters
/// of a reference hop.
#[derive(Debug, Clone, Deserialize)]
pub struct LinkPreset {
    pub id: u32,
    #[serde(rename = "estimated_distance_m")]
    pub estimated_distance: f64,
    /// Mounting length the stream count was derived from, when it was.
    #[serde(rename = "deploy_length_m")]
    pub deploy_length: Option<f64>,
    pub num_streams: usize,
    #[serde(rename = "spacing_mm")]
    spacing_mm: f64,
    /// False where the printed parameters contradict the deployment
    /// formulas; such rows are carried verbatim, not repaired.
    pub formula_consistent: bool,
    pub note: Option<String>,
}

impl LinkPreset {
    /// Element spacing, m (the table prints millimeters).
    pub fn spacing(&self) -> f64 {
        self.spacing_mm * 1e-3
    }
}

#[derive(Debug, Deserialize)]
struct PresetData {
    links: Vec<LinkPreset>,
    scenarios: Vec<CatalogRow>,
}

#[derive(Debug, Deserialize)]
struct CatalogRow {
    name: String,
    link: u32,
    kind: SchemeKind,
    n_s: usize,
    n_cp: usize,
}

fn preset_data() -> &'static PresetData {
    static DATA: OnceLock<PresetData> = OnceLock::new();
    DATA.get_or_init(|| {
        serde_json::from_str(include_str!("../data/table_presets.json"))
            .expect("embedded preset table is well-formed")
    })
}

/// The built-in link presets, in table order.
pub fn link_presets() -> &'static [LinkPreset] {
    &preset_data().links
}

/// Look up one built-in link preset by id.
pub fn link_preset(id: u32) -> Result<&'static LinkPreset, ScenarioError> {
    link_presets()
        .iter()
        .find(|p| p.id == id)
        .ok_or(ScenarioError::UnknownPreset(id))
}

/// Propagation environment of a scenario.
#[derive(Debug, Clone)]
pub enum Environment {
    FreeSpace,
    RayFile(PathBuf),
    Synthetic(Vec<PointScatterer>),
}

/// Explicit ULA description used when a scenario bypasses the presets.
#[derive(Debug, Clone)]
pub struct UlaBlueprint {
    pub anchor: Point3<f64>,
    pub axis: Vector3<f64>,
    pub count: usize,
    pub spacing: f64,
    pub boresight: Vector3<f64>,
}

/// Explicit link geometry: two blueprints plus the distances the design
/// rules and metrics should use.
#[derive(Debug, Clone)]
pub struct ExplicitLink {
    pub tx: UlaBlueprint,
    pub rx: UlaBlueprint,
    pub estimated_distance: f64,
    pub true_distance: Option<f64>,
    pub positioning_step: f64,
}

/// Where a scenario's geometry comes from.
#[derive(Debug, Clone)]
pub enum LinkSpec {
    Preset(LinkPreset),
    Explicit(ExplicitLink),
}

/// A fully resolved, runnable scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub link: LinkSpec,
    pub environment: Environment,
    pub scheme: SchemeConfig,
    pub tx_pattern: Arc<AntennaPattern>,
    pub rx_pattern: Arc<AntennaPattern>,
    pub bounds: SeBounds,
    pub carrier: CarrierConfig,
    /// Added to the preset's estimated distance to form the true hop
    /// length, for distance-measurement sensitivity runs.
    pub distance_error: f64,
}

impl Scenario {
    /// Free-space scenario on a built-in link preset with isotropic
    /// elements, unit power, and default bounds.
    pub fn from_preset(
        name: impl Into<String>,
        link_id: u32,
        kind: SchemeKind,
        num_blocks: usize,
        cp_len: usize,
    ) -> Result<Self, ScenarioError> {
        let preset = link_preset(link_id)?.clone();
        let scheme = SchemeConfig::new(kind, preset.num_streams, num_blocks, cp_len, 1.0)?;
        Ok(Self {
            name: name.into(),
            link: LinkSpec::Preset(preset),
            environment: Environment::FreeSpace,
            scheme,
            tx_pattern: Arc::new(AntennaPattern::Isotropic),
            rx_pattern: Arc::new(AntennaPattern::Isotropic),
            bounds: SeBounds::default(),
            carrier: CarrierConfig::new(DEFAULT_CARRIER_HZ)?,
            distance_error: 0.0,
        })
    }

    pub fn with_environment(mut self, environment: Environment) -> Self {
        self.environment = environment;
        self
    }

    pub fn with_patterns(mut self, tx: Arc<AntennaPattern>, rx: Arc<AntennaPattern>) -> Self {
        self.tx_pattern = tx;
        self.rx_pattern = rx;
        self
    }

    pub fn with_bounds(mut self, bounds: SeBounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_carrier(mut self, carrier: CarrierConfig) -> Self {
        self.carrier = carrier;
        self
    }

    pub fn with_distance_error(mut self, error: f64) -> Self {
        self.distance_error = error;
        self
    }

    /// Build the link geometry with `elements` antennas per side.
    fn build_geometry(&self, elements: usize) -> Result<LinkGeometry, ScenarioError> {
        match &self.link {
            LinkSpec::Preset(preset) => {
                let true_distance = preset.estimated_distance + self.distance_error;
                if true_distance <= 0.0 {
                    return Err(ScenarioError::Config(format!(
                        "distance error {} collapses the {} m hop",
                        self.distance_error, preset.estimated_distance
                    )));
                }
                Ok(LinkGeometry::broadside(
                    elements,
                    elements,
                    preset.spacing(),
                    true_distance,
                    self.tx_pattern.clone(),
                    self.rx_pattern.clone(),
                )?
                .with_estimated_distance(preset.estimated_distance)?)
            }
            LinkSpec::Explicit(link) => {
                if self.distance_error != 0.0 {
                    return Err(ScenarioError::Config(
                        "distance_error requires a link preset".into(),
                    ));
                }
                let build = |bp: &UlaBlueprint, pattern: &Arc<AntennaPattern>| {
                    UlaSpec::new(
                        bp.anchor,
                        bp.axis,
                        bp.count,
                        bp.spacing,
                        bp.boresight,
                        pattern.clone(),
                    )
                };
                let mut tx = build(&link.tx, &self.tx_pattern)?;
                let mut rx = build(&link.rx, &self.rx_pattern)?;
                if elements != tx.element_count {
                    tx = tx.truncated(elements)?;
                    rx = rx.truncated(elements)?;
                }
                let true_distance = link.true_distance.unwrap_or_else(|| {
                    let center = |u: &UlaSpec| {
                        u.anchor + u.axis * ((u.element_count as f64 - 1.0) / 2.0 * u.spacing)
                    };
                    (center(&rx) - center(&tx)).norm()
                });
                Ok(LinkGeometry::new(
                    tx,
                    rx,
                    true_distance,
                    link.estimated_distance,
                    link.positioning_step,
                )?)
            }
        }
    }

    /// Synthesize the channel this scenario's environment produces on the
    /// given geometry.
    fn environment_channel(&self, g: &LinkGeometry) -> Result<ChannelMatrix, ScenarioError> {
        match &self.environment {
            Environment::FreeSpace => Ok(fs_channel(g, &self.carrier)?),
            Environment::RayFile(path) => {
                let field = load_rays(path, g.rx.element_count, g.tx.element_count)
                    .map_err(|e| annotate_io(e, path))?;
                Ok(ray_channel(
                    &field,
                    &g.tx.pattern,
                    &g.rx.pattern,
                    &g.tx.boresight,
                    &g.rx.boresight,
                    &self.carrier,
                )?)
            }
            Environment::Synthetic(scatterers) => {
                let field = synth_rays(g, scatterers, &self.carrier)?;
                Ok(ray_channel(
                    &field,
                    &g.tx.pattern,
                    &g.rx.pattern,
                    &g.tx.boresight,
                    &g.rx.boresight,
                    &self.carrier,
                )?)
            }
        }
    }

    fn apply_scheme(
        &self,
        h: &ChannelMatrix,
    ) -> Result<crate::schemes::EquivalentChannel, ScenarioError> {
        Ok(match self.scheme.kind() {
            SchemeKind::DftSmMrt => dft_sm_mrt(h, self.scheme.power())?,
            SchemeKind::BlockDftSmMrt => bdft_sm_mrt(h, &self.scheme)?,
            SchemeKind::Svd => svd_scheme(h, self.scheme.power())?.0,
        })
    }
}

fn annotate_io(e: ChannelError, path: &Path) -> ScenarioError {
    match e {
        ChannelError::Io(source) => ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => ScenarioError::Channel(other),
    }
}

/// Everything measured on one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub scheme: String,
    pub n_u: usize,
    pub n_s: usize,
    pub n_d: usize,
    pub n_cp: usize,
    pub n_antennas: usize,
    /// Deployed array length `N * d`, m.
    pub aperture_m: f64,
    /// Per-stream SIR (may be infinite on leakage-free streams).
    #[serde(with = "float_or_label")]
    pub sir: Vec<f64>,
    /// Per-stream practical spectral efficiency, bits/s/Hz.
    pub c_practical: Vec<f64>,
    pub total_se: f64,
    pub phi_fs_pct: f64,
    pub phi_svd_pct: f64,
    pub mu_tx: f64,
    pub mu_rx: f64,
    pub r1: f64,
    pub r2: f64,
    pub r2_block: f64,
    pub provenance: String,
}

/// Run one scenario; failures are annotated with the scenario name.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioResult, ScenarioError> {
    run_inner(sc).map_err(|e| ScenarioError::InScenario {
        name: sc.name.clone(),
        source: Box::new(e),
    })
}

fn run_inner(sc: &Scenario) -> Result<ScenarioResult, ScenarioError> {
    let scheme = &sc.scheme;
    let antennas = scheme.num_antennas();
    let streams = scheme.num_streams();

    let scheme_geometry = sc.build_geometry(antennas)?;
    let h = sc.environment_channel(&scheme_geometry)?;
    let h_fs = fs_channel(&scheme_geometry, &sc.carrier)?;
    let eq = sc.apply_scheme(&h)?;
    let eq_fs = sc.apply_scheme(&h_fs)?;

    // The SVD reference always runs on a stream-count array, even when the
    // scheme spends extra antennas on cyclic prefixes. A ray file binds to
    // the scheme array, so the reference then takes the leading subarray.
    let h_svd = if antennas == streams {
        h.clone()
    } else if matches!(sc.environment, Environment::RayFile(_)) {
        h.leading_submatrix(streams)?
    } else {
        let stream_geometry = sc.build_geometry(streams)?;
        sc.environment_channel(&stream_geometry)?
    };
    let (eq_svd, _) = svd_scheme(&h_svd, scheme.power())?;

    let measured = stream_metrics(&eq, &sc.bounds);
    let measured_fs = stream_metrics(&eq_fs, &sc.bounds);
    let measured_svd = stream_metrics(&eq_svd, &sc.bounds);
    let phi = phi_ratios(measured.total, measured_svd.total, measured_fs.total)?;
    let mu = complexity_ratios(scheme);

    let stream_geometry = sc.build_geometry(streams)?;
    let ratios = condition_ratios(&stream_geometry, &sc.carrier, scheme.num_blocks())?;

    let StreamMetrics {
        sir,
        practical,
        total,
        ..
    } = measured;
    Ok(ScenarioResult {
        name: sc.name.clone(),
        scheme: scheme.kind().as_str().to_string(),
        n_u: streams,
        n_s: scheme.num_blocks(),
        n_d: scheme.block_size(),
        n_cp: scheme.cp_len(),
        n_antennas: antennas,
        aperture_m: scheme_geometry.tx.aperture(),
        sir,
        c_practical: practical,
        total_se: total,
        phi_fs_pct: phi.fs_pct,
        phi_svd_pct: phi.svd_pct,
        mu_tx: mu.tx,
        mu_rx: mu.rx,
        r1: ratios.r1,
        r2: ratios.r2,
        r2_block: ratios.r2_block,
        provenance: h.provenance.as_str().to_string(),
    })
}

/// One scenario's failure inside a suite run.
#[derive(Debug)]
pub struct SuiteFailure {
    pub scenario: String,
    pub error: ScenarioError,
}

/// Outcome of a suite run: completed results plus collected failures.
#[derive(Debug, Default)]
pub struct SuiteReport {
    pub results: Vec<ScenarioResult>,
    pub failures: Vec<SuiteFailure>,
}

/// Run every scenario, collecting per-scenario failures instead of
/// aborting. Scenarios are independent; output order follows input order.
pub fn run_suite(scenarios: &[Scenario]) -> SuiteReport {
    let mut report = SuiteReport::default();
    for sc in scenarios {
        match run_scenario(sc) {
            Ok(result) => report.results.push(result),
            Err(error) => report.failures.push(SuiteFailure {
                scenario: sc.name.clone(),
                error,
            }),
        }
    }
    report
}

/// A named built-in scenario catalog. `table2-fs` replays the reference
/// scenario table under free-space propagation.
pub fn builtin_catalog(name: &str) -> Result<Vec<Scenario>, ScenarioError> {
    if name != "table2-fs" {
        return Err(ScenarioError::UnknownCatalog(name.to_string()));
    }
    preset_data()
        .scenarios
        .iter()
        .map(|row| Scenario::from_preset(row.name.clone(), row.link, row.kind, row.n_s, row.n_cp))
        .collect()
}

/// Output format for [`emit_results`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultFormat {
    Csv,
    Json,
}

/// Serialize results to the chosen format and write them to `path`.
pub fn emit_results(
    results: &[ScenarioResult],
    format: ResultFormat,
    path: &Path,
) -> Result<(), ScenarioError> {
    let text = match format {
        ResultFormat::Csv => results_to_csv(results),
        ResultFormat::Json => results_to_json(results)?,
    };
    std::fs::write(path, text).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// CSV summary, one row per scenario.
pub fn results_to_csv(results: &[ScenarioResult]) -> String {
    let mut out = String::from(
        "scenario,N_U,N_S,N_D,N_CP,se_bits_s_hz,phi_fs_pct,phi_svd_pct,mu_tx,mu_rx,r2_block\n",
    );
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.n_u,
            r.n_s,
            r.n_d,
            r.n_cp,
            r.total_se,
            r.phi_fs_pct,
            r.phi_svd_pct,
            r.mu_tx,
            r.mu_rx,
            r.r2_block
        ));
    }
    out
}

/// JSON mirror of the full result records; parses back bit-exactly.
pub fn results_to_json(results: &[ScenarioResult]) -> Result<String, ScenarioError> {
    Ok(serde_json::to_string_pretty(results)?)
}

pub fn results_from_json(text: &str) -> Result<Vec<ScenarioResult>, ScenarioError> {
    Ok(serde_json::from_str(text)?)
}

/// Serialize nonfinite floats as labels so infinite SIRs survive JSON.
mod float_or_label {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[f64], ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(values.len()))?;
        for &v in values {
            if v.is_finite() {
                seq.serialize_element(&v)?;
            } else if v.is_nan() {
                seq.serialize_element("nan")?;
            } else if v > 0.0 {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element("-inf")?;
            }
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<f64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Entry {
            Number(f64),
            Label(String),
        }
        let entries = Vec::<Entry>::deserialize(de)?;
        entries
            .into_iter()
            .map(|e| match e {
                Entry::Number(v) => Ok(v),
                Entry::Label(s) => match s.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    other => Err(serde::de::Error::custom(format!(
                        "expected a number or inf/-inf/nan, got `{other}`"
                    ))),
                },
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Scenario config files
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(Box<ScenarioFile>),
    Many(Vec<ScenarioFile>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    link_preset: Option<u32>,
    geometry: Option<GeometryFile>,
    environment: Option<EnvironmentFile>,
    scheme: SchemeFile,
    antenna: Option<AntennaFile>,
    bounds: Option<BoundsFile>,
    carrier: Option<CarrierFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    tx: UlaFile,
    rx: UlaFile,
    estimated_distance: f64,
    true_distance: Option<f64>,
    positioning_step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UlaFile {
    anchor: [f64; 3],
    axis: [f64; 3],
    count: usize,
    spacing: f64,
    boresight: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum EnvironmentFile {
    FreeSpace,
    RayFile { path: PathBuf },
    Synthetic { scatterers: Vec<ScattererFile> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScattererFile {
    position: [f64; 3],
    reflection: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    kind: SchemeKind,
    #[serde(default = "one")]
    n_s: usize,
    #[serde(default)]
    n_cp: usize,
    #[serde(default = "unit_power")]
    power: f64,
}

fn one() -> usize {
    1
}

fn unit_power() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AntennaFile {
    tx: AntennaSelect,
    rx: AntennaSelect,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum AntennaSelect {
    Isotropic,
    Dipole {
        #[serde(default = "unit_power")]
        exponent: f64,
    },
    Directional,
    Sampled {
        path: PathBuf,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsFile {
    s_min: f64,
    s_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CarrierFile {
    f_hz: f64,
}

/// Load one or more scenarios from a JSON config file. Relative ray-file
/// and pattern paths resolve against the config file's directory.
pub fn load_scenario_file(path: &Path) -> Result<Vec<Scenario>, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    scenarios_from_json(&text, base)
}

/// Parse scenarios from JSON text; `base_dir` anchors relative paths.
pub fn scenarios_from_json(text: &str, base_dir: &Path) -> Result<Vec<Scenario>, ScenarioError> {
    let parsed: OneOrMany = serde_json::from_str(text)?;
    let files = match parsed {
        OneOrMany::One(f) => vec![*f],
        OneOrMany::Many(v) => v,
    };
    files
        .into_iter()
        .map(|f| build_scenario(f, base_dir))
        .collect()
}

fn build_scenario(file: ScenarioFile, base_dir: &Path) -> Result<Scenario, ScenarioError> {
    let carrier = match file.carrier {
        Some(c) => CarrierConfig::new(c.f_hz)?,
        None => CarrierConfig::new(DEFAULT_CARRIER_HZ)?,
    };
    let bounds = match file.bounds {
        Some(b) => SeBounds::new(b.s_min, b.s_max)?,
        None => SeBounds::default(),
    };
    let (tx_pattern, rx_pattern) = match file.antenna {
        Some(a) => (
            build_pattern(a.tx, base_dir)?,
            build_pattern(a.rx, base_dir)?,
        ),
        None => (
            Arc::new(AntennaPattern::Isotropic),
            Arc::new(AntennaPattern::Isotropic),
        ),
    };
    let environment = match file.environment {
        None | Some(EnvironmentFile::FreeSpace) => Environment::FreeSpace,
        Some(EnvironmentFile::RayFile { path }) => Environment::RayFile(resolve(base_dir, path)),
        Some(EnvironmentFile::Synthetic { scatterers }) => Environment::Synthetic(
            scatterers
                .into_iter()
                .map(|s| {
                    PointScatterer::new(
                        Point3::new(s.position[0], s.position[1], s.position[2]),
                        Complex64::new(s.reflection[0], s.reflection[1]),
                    )
                })
                .collect(),
        ),
    };

    let (link, num_streams) = match (file.link_preset, file.geometry) {
        (Some(id), None) => {
            let preset = link_preset(id)?.clone();
            let streams = preset.num_streams;
            (LinkSpec::Preset(preset), streams)
        }
        (None, Some(geom)) => {
            if geom.tx.count != geom.rx.count {
                return Err(ScenarioError::Config(format!(
                    "geometry.tx.count = {} and geometry.rx.count = {} must match",
                    geom.tx.count, geom.rx.count
                )));
            }
            let antennas = geom.tx.count;
            let overhead = file.scheme.n_s * file.scheme.n_cp;
            let streams = antennas
                .checked_sub(overhead)
                .filter(|s| *s > 0)
                .ok_or_else(|| {
                    ScenarioError::Config(format!(
                    "scheme.n_s * scheme.n_cp = {overhead} leaves no streams on {antennas} antennas"
                ))
                })?;
            let to_blueprint = |u: UlaFile| UlaBlueprint {
                anchor: Point3::new(u.anchor[0], u.anchor[1], u.anchor[2]),
                axis: Vector3::new(u.axis[0], u.axis[1], u.axis[2]),
                count: u.count,
                spacing: u.spacing,
                boresight: Vector3::new(u.boresight[0], u.boresight[1], u.boresight[2]),
            };
            (
                LinkSpec::Explicit(ExplicitLink {
                    tx: to_blueprint(geom.tx),
                    rx: to_blueprint(geom.rx),
                    estimated_distance: geom.estimated_distance,
                    true_distance: geom.true_distance,
                    positioning_step: geom.positioning_step.unwrap_or(DEFAULT_POSITIONING_STEP),
                }),
                streams,
            )
        }
        (Some(_), Some(_)) => {
            return Err(ScenarioError::Config(
                "give either link_preset or geometry, not both".into(),
            ))
        }
        (None, None) => {
            return Err(ScenarioError::Config(
                "one of link_preset or geometry is required".into(),
            ))
        }
    };

    if file.scheme.n_s == 0 || num_streams % file.scheme.n_s != 0 {
        return Err(ScenarioError::Config(format!(
            "scheme.n_s = {} does not divide the stream count {num_streams}",
            file.scheme.n_s
        )));
    }
    let scheme = SchemeConfig::new(
        file.scheme.kind,
        num_streams,
        file.scheme.n_s,
        file.scheme.n_cp,
        file.scheme.power,
    )?;

    Ok(Scenario {
        name: file.name,
        link,
        environment,
        scheme,
        tx_pattern,
        rx_pattern,
        bounds,
        carrier,
        distance_error: 0.0,
    })
}

fn build_pattern(
    select: AntennaSelect,
    base_dir: &Path,
) -> Result<Arc<AntennaPattern>, ScenarioError> {
    Ok(Arc::new(match select {
        AntennaSelect::Isotropic => AntennaPattern::Isotropic,
        AntennaSelect::Dipole { exponent } => AntennaPattern::DipoleOnGround { exponent },
        AntennaSelect::Directional => AntennaPattern::directional(),
        AntennaSelect::Sampled { path } => {
            let resolved = resolve(base_dir, path);
            AntennaPattern::Sampled(PatternGrid::load_csv(&resolved)?)
        }
    }))
}

fn resolve(base_dir: &Path, path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        path
    } else {
        base_dir.join(path)
    }
}
