//! Pipeline configuration, read from a single TOML file. Every table rejects unknown
//! keys and every section is optional; see `configs/pipeline.toml` for a full example.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use subscale_core::range::{FACTOR_LIMITS, FACTOR_NAMES};
use subscale_core::scaling::{CostWeights, DesignVector, ScalingBounds};
use subscale_core::space::{BaseSampler, ParameterDef, ParameterSpace};
use subscale_core::study::{default_structures, study_space};
use subscale_core::surrogate::term_count;

use crate::baseline::Baseline;
use crate::error::CliError;

/// Inputs the aeroelastic model accepts as uncertain parameters.
pub const AEROSTRUCT_INPUTS: [&str; 5] = ["alpha", "mach", "altitude", "rear_spar", "young_modulus"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub model: ModelConfig,
    /// Defaults to the chosen model's own parameter set.
    #[serde(default)]
    pub parameters: Option<Vec<ParameterDef>>,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub surrogate: SurrogateConfig,
    #[serde(default)]
    pub study: StudyConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            output_dir: default_output_dir(),
            model: ModelConfig::default(),
            parameters: None,
            sampler: SamplerConfig::default(),
            surrogate: SurrogateConfig::default(),
            study: StudyConfig::default(),
            scaling: ScalingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Breguet range of the lumped airframe, in metres.
    LumpedRange {},
    /// L/D of one wing structure at the baseline cruise point.
    Aerostruct {
        #[serde(default = "default_structure")]
        structure: String,
    },
    /// Ishigami test function (a = 7, b = 0.1) on the first three parameters; any
    /// further parameters are ignored.
    Ishigami {},
    Constant {
        value: f64,
    },
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::LumpedRange {}
    }
}

fn default_structure() -> String {
    "wingbox_medium".into()
}

impl ModelConfig {
    pub fn name(&self) -> String {
        match self {
            ModelConfig::LumpedRange {} => "lumped_range".into(),
            ModelConfig::Aerostruct { structure } => format!("aerostruct:{structure}"),
            ModelConfig::Ishigami {} => "ishigami".into(),
            ModelConfig::Constant { .. } => "constant".into(),
        }
    }

    pub fn default_space(&self) -> Option<ParameterSpace> {
        match self {
            ModelConfig::LumpedRange {} => Some(ParameterSpace::lumped_range_default()),
            ModelConfig::Aerostruct { .. } => Some(study_space()),
            ModelConfig::Ishigami {} => {
                let pi = std::f64::consts::PI;
                let p = |n: &str| ParameterDef::uniform(n, -pi, pi, 0.0).unwrap();
                Some(ParameterSpace::new(vec![p("x1"), p("x2"), p("x3")]).unwrap())
            }
            ModelConfig::Constant { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub base_n: usize,
    pub seed: u64,
    pub second_order: bool,
    pub sampler: BaseSampler,
    /// Bootstrap replicates for the confidence intervals; 0 turns them off.
    pub bootstrap: usize,
    /// Parameters with total index at or above this are reported as critical.
    pub critical_threshold: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            base_n: 256,
            seed: 2024,
            second_order: false,
            sampler: BaseSampler::Sobol,
            bootstrap: 100,
            critical_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateConfig {
    /// Shares of the evaluated design used to train one surrogate each. `1.0` is the
    /// full-data surrogate.
    pub fractions: Vec<f64>,
    pub interactions: bool,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            fractions: vec![1.0, 0.1],
            interactions: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    /// Labels `<tubular|wingbox>_<coarse|medium|fine>`.
    pub structures: Vec<String>,
    /// Shared rows over `(alpha, mach, rear_spar, young_modulus)`.
    pub rows: usize,
    pub bins: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            structures: default_structures().into_iter().map(|s| s.label).collect(),
            rows: 200,
            bins: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    /// Full-scale wing; the sub-scale model is its geometric scaling.
    #[serde(default = "default_structure")]
    pub structure: String,
    #[serde(default = "DesignVector::default_start")]
    pub x0: DesignVector,
    #[serde(default)]
    pub weights: CostWeights,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

/// Per-variable `[lower, upper]` overrides; missing entries keep the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub n: Option<(f64, f64)>,
    pub alpha: Option<(f64, f64)>,
    pub mach: Option<(f64, f64)>,
    pub altitude: Option<(f64, f64)>,
    pub young_modulus: Option<(f64, f64)>,
}

impl BoundsConfig {
    pub fn resolve(&self) -> ScalingBounds {
        let d = ScalingBounds::standard(Baseline::embedded().material.young_modulus);
        ScalingBounds {
            n: self.n.unwrap_or(d.n),
            alpha: self.alpha.unwrap_or(d.alpha),
            mach: self.mach.unwrap_or(d.mach),
            altitude: self.altitude.unwrap_or(d.altitude),
            young_modulus: self.young_modulus.unwrap_or(d.young_modulus),
        }
    }
}

fn default_max_iterations() -> usize {
    200
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            structure: default_structure(),
            x0: DesignVector::default_start(),
            weights: CostWeights::default(),
            bounds: BoundsConfig::default(),
            max_iterations: default_max_iterations(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// SHA-256 of the effective configuration (after command-line overrides), output
    /// directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("config serialises");
        hex::encode(Sha256::digest(&json))
    }

    pub fn space(&self) -> Result<ParameterSpace, CliError> {
        match &self.parameters {
            Some(p) => ParameterSpace::new(p.clone()).map_err(|e| CliError::Config(e.to_string())),
            None => self.model.default_space().ok_or_else(|| {
                CliError::Config(format!(
                    "model `{}` needs an explicit [[parameters]] list",
                    self.model.name()
                ))
            }),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let space = self.space()?;
        let baseline = Baseline::embedded();
        match &self.model {
            ModelConfig::LumpedRange {} => {
                for p in space.params() {
                    if !FACTOR_NAMES.contains(&p.name.as_str()) {
                        return bad(format!(
                            "`{}` is not a lumped-range factor (expected one of {FACTOR_NAMES:?})",
                            p.name
                        ));
                    }
                    let (lo, hi) = if p.name.starts_with("RSP") {
                        (0.0, 1.0)
                    } else {
                        FACTOR_LIMITS
                    };
                    if p.lower < lo || p.upper > hi {
                        return bad(format!(
                            "`{}` range [{}, {}] leaves [{lo}, {hi}]",
                            p.name, p.lower, p.upper
                        ));
                    }
                }
            }
            ModelConfig::Aerostruct { structure } => {
                if baseline.wing_by_label(structure).is_none() {
                    return bad(format!("unknown structure `{structure}`"));
                }
                for p in space.params() {
                    if !AEROSTRUCT_INPUTS.contains(&p.name.as_str()) {
                        return bad(format!(
                            "`{}` is not an aerostruct input (expected one of {AEROSTRUCT_INPUTS:?})",
                            p.name
                        ));
                    }
                }
            }
            ModelConfig::Ishigami {} => {
                if space.dimension() < 3 {
                    return bad("ishigami needs at least three parameters".into());
                }
            }
            ModelConfig::Constant { value } => {
                if !value.is_finite() {
                    return bad("constant model value must be finite".into());
                }
            }
        }

        let s = &self.sampler;
        if s.base_n < 2 {
            return bad(format!("sampler.base_n must be at least 2, got {}", s.base_n));
        }
        if !(s.critical_threshold >= 0.0 && s.critical_threshold <= 1.0) {
            return bad("sampler.critical_threshold must lie in [0, 1]".into());
        }

        let total = s.base_n * (space.dimension() + 2);
        let terms = term_count(space.dimension(), self.surrogate.interactions);
        for (i, &f) in self.surrogate.fractions.iter().enumerate() {
            if self.surrogate.fractions[..i].contains(&f) {
                return bad(format!("surrogate fraction {f} listed twice"));
            }
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("surrogate fraction {f} outside (0, 1]"));
            }
            let rows = (total as f64 * f) as usize;
            if rows < terms {
                return bad(format!("surrogate fraction {f} leaves {rows} rows for {terms} terms"));
            }
        }

        let st = &self.study;
        if st.structures.is_empty() || st.rows == 0 || st.bins == 0 {
            return bad("study needs structures, rows > 0 and bins > 0".into());
        }
        for (i, l) in st.structures.iter().enumerate() {
            if baseline.wing_by_label(l).is_none() {
                return bad(format!("unknown study structure `{l}`"));
            }
            if st.structures[..i].contains(l) {
                return bad(format!("study structure `{l}` listed twice"));
            }
        }

        let sc = &self.scaling;
        if baseline.wing_by_label(&sc.structure).is_none() {
            return bad(format!("unknown scaling structure `{}`", sc.structure));
        }
        sc.bounds
            .resolve()
            .to_bounds()
            .map_err(|e| CliError::Config(format!("scaling bounds: {e}")))?;
        let w = sc.weights;
        if !(w.ld > 0.0 && w.re > 0.0 && w.ma > 0.0) {
            return bad("scaling weights must be positive".into());
        }
        if !sc.x0.is_finite() {
            return bad("scaling.x0 must be finite".into());
        }
        if sc.max_iterations == 0 {
            return bad("scaling.max_iterations must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = PipelineConfig::from_toml("").unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert_eq!(c.space().unwrap().dimension(), 9);
        assert_eq!(c.hash(), PipelineConfig::default().hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn shipped_example_parses() {
        let c = PipelineConfig::from_toml(include_str!("../configs/pipeline.toml")).unwrap();
        assert_eq!(c.scaling.bounds.resolve(), ScalingConfig::default().bounds.resolve());
        assert_eq!(c.sampler.base_n, 256);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            "outptu_dir = \"x\"",
            "[sampler]\nbase_m = 3",
            "[model]\nkind = \"lumped_range\"\nfoo = 1",
            "[scaling.bounds]\nn = [0.001, 0.2]\nq = [0, 1]",
            "[[parameters]]\nname = \"WENG\"\nlower = 0.9\nupper = 1.1\nnominal = 1.0\nshape = 2",
        ] {
            assert!(
                matches!(PipelineConfig::from_toml(text), Err(CliError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn semantic_checks() {
        for text in [
            "[scaling.bounds]\nmach = [0.87, 0.8]",
            "[[parameters]]\nname = \"XYZ\"\nlower = 0.9\nupper = 1.1\nnominal = 1.0",
            "[[parameters]]\nname = \"WENG\"\nlower = 0.5\nupper = 1.1\nnominal = 1.0",
            "[model]\nkind = \"aerostruct\"\nstructure = \"wingbox_huge\"",
            "[model]\nkind = \"constant\"\nvalue = 1.0",
            "[surrogate]\nfractions = [0.0]",
            "[surrogate]\nfractions = [0.01]",
            "[study]\nstructures = [\"wingbox_fine\", \"wingbox_fine\"]",
            "[sampler]\nbase_n = 1",
            "[scaling.weights]\nld = 0.0\nre = 30.0\nma = 3000.0",
        ] {
            assert!(
                matches!(PipelineConfig::from_toml(text), Err(CliError::Config(_))),
                "{text}"
            );
        }
        let ok = "[model]\nkind = \"aerostruct\"\n";
        assert_eq!(PipelineConfig::from_toml(ok).unwrap().space().unwrap().dimension(), 4);
    }
}
