use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bundle::BundleSpec;
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::metric::MetricSpec;

/// Version of the configuration and report schema documented in `docs/schema.md`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Curvature,
    Gauduchon,
    Normalize,
    BundleCert,
    Identities,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Curvature => "curvature",
            Self::Gauduchon => "gauduchon",
            Self::Normalize => "normalize",
            Self::BundleCert => "bundle-cert",
            Self::Identities => "identities",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "curvature" => Ok(Self::Curvature),
            "gauduchon" => Ok(Self::Gauduchon),
            "normalize" => Ok(Self::Normalize),
            "bundle-cert" => Ok(Self::BundleCert),
            "identities" => Ok(Self::Identities),
            other => Err(Error::Config(format!(
                "unknown command {other:?}; expected curvature, gauduchon, normalize, bundle-cert or identities"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Samples per real axis.
    pub samples: usize,
}

/// Either a full bundle spec or `{ canonical = m }` for `mK_M` with `det(g)^{-m}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BundleConfig {
    Canonical { canonical: u32 },
    Spec(BundleSpec),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalShortcut {
    canonical: u32,
}

impl<'de> Deserialize<'de> for BundleConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let value = serde_json::Value::deserialize(d)?;
        if value.get("canonical").is_some() {
            let c: CanonicalShortcut = serde_json::from_value(value).map_err(|e| D::Error::custom(format!("bundle: {e}")))?;
            Ok(Self::Canonical { canonical: c.canonical })
        } else {
            serde_json::from_value(value).map(Self::Spec).map_err(|e| D::Error::custom(format!("bundle: {e}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Target of the Gauduchon inverse iteration.
    pub solver: f64,
    /// Relative max-norm target of Poisson solves.
    pub poisson: f64,
    pub berger: f64,
    pub berger_sigmas: f64,
    pub hermitian: f64,
    pub scalar_change: f64,
    pub trace: f64,
    pub gauduchon: f64,
    pub idempotence: f64,
    pub normalization: f64,
    pub integral: f64,
    pub spread: f64,
    pub spread_abs: f64,
    pub identity: f64,
    pub comparison: f64,
    pub adjoint: f64,
    pub curvature_identity: f64,
    pub conformal_bundle: f64,
    /// Scaling invariance of the Gauduchon factor.
    pub invariance: f64,
    pub certificate_integral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solver: 1e-11,
            poisson: 1e-10,
            berger: 1e-8,
            berger_sigmas: 3.0,
            hermitian: 1e-9,
            scalar_change: 1e-8,
            trace: 1e-8,
            gauduchon: 1e-7,
            idempotence: 1e-8,
            normalization: 1e-8,
            integral: 1e-9,
            spread: 1e-6,
            spread_abs: 1e-8,
            identity: 1e-6,
            comparison: 1e-6,
            adjoint: 1e-7,
            curvature_identity: 1e-7,
            conformal_bundle: 1e-7,
            invariance: 1e-9,
            certificate_integral: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    /// Grid points for the Berger check.
    pub berger_points: usize,
    /// Monte-Carlo directions per Berger point; zero skips the Monte-Carlo path.
    pub monte_carlo: usize,
    pub hsc_points: usize,
    pub hsc_directions: usize,
    /// Random fields per integral identity.
    pub random_fields: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { berger_points: 20, monte_carlo: 100_000, hsc_points: 64, hsc_directions: 64, random_fields: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FieldFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub emit_fields: bool,
    pub field_format: FieldFormat,
    /// Also write 2D slices through the origin for each `(axis, axis)` pair.
    pub slices: Vec<[usize; 2]>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), emit_fields: false, field_format: FieldFormat::Csv, slices: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub command: Option<Command>,
    pub grid: GridConfig,
    pub metric: MetricSpec,
    #[serde(default)]
    pub bundle: Option<BundleConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn new(samples: usize, metric: MetricSpec) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: None,
            grid: GridConfig { samples },
            metric,
            bundle: None,
            seed: 0,
            tolerances: Tolerances::default(),
            sampling: Sampling::default(),
            output: OutputConfig::default(),
        }
    }

    /// TOML unless the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let config = if is_json { Self::from_json(&text) } else { Self::from_toml(&text) }?;
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.metric.validate()?;
        self.grid()?;
        match &self.bundle {
            Some(BundleConfig::Spec(spec)) => spec.validate(self.metric.dim)?,
            Some(BundleConfig::Canonical { canonical: 0 }) => {
                return Err(Error::Config("bundle.canonical must be positive".into()))
            }
            _ => {}
        }
        let t = &self.tolerances;
        let all = [
            t.solver, t.poisson, t.berger, t.berger_sigmas, t.hermitian, t.scalar_change, t.trace, t.gauduchon,
            t.idempotence, t.normalization, t.integral, t.spread, t.spread_abs, t.identity, t.comparison, t.adjoint,
            t.curvature_identity, t.conformal_bundle, t.invariance, t.certificate_integral,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("tolerances must be positive and finite".into()));
        }
        for s in &self.output.slices {
            if s[0] == s[1] || s.iter().any(|&a| a >= 2 * self.metric.dim) {
                return Err(Error::Config(format!("slice axes {s:?} invalid for real dimension {}", 2 * self.metric.dim)));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.metric.dim, self.grid.samples).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON encoding, excluding the output section.
    pub fn digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output");
        }
        let json = serde_json::to_string(&value).expect("config serializes");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}
