use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::HarnessError;
use crate::geometry::Domain;
use crate::kernel::{Kernel, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Rfk,
    Schatten,
    Triangle,
    Steiner,
    Bll,
    Zeta,
    Convergence,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Rfk,
        Experiment::Schatten,
        Experiment::Triangle,
        Experiment::Steiner,
        Experiment::Bll,
        Experiment::Zeta,
        Experiment::Convergence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Rfk => "rfk",
            Experiment::Schatten => "schatten",
            Experiment::Triangle => "triangle",
            Experiment::Steiner => "steiner",
            Experiment::Bll => "bll",
            Experiment::Zeta => "zeta",
            Experiment::Convergence => "convergence",
        }
    }

    /// Experiments whose verdicts need a two-resolution error budget.
    pub fn needs_budget(&self) -> bool {
        matches!(
            self,
            Experiment::Rfk | Experiment::Schatten | Experiment::Triangle | Experiment::Steiner
        )
    }

    /// Experiments that emit data but no verdicts.
    pub fn report_only(&self) -> bool {
        matches!(self, Experiment::Zeta | Experiment::Convergence)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment `{s}`")))
    }
}

/// A Schatten exponent `p ≥ 1`, possibly infinite. Serialized as a JSON
/// number, or the string `"inf"` for the operator norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Exponent {
    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }

    /// The exponent as an integer, when it is one.
    pub fn as_integer(&self) -> Option<u32> {
        (self.0.is_finite() && self.0.fract() == 0.0 && self.0 >= 1.0 && self.0 <= u32::MAX as f64)
            .then_some(self.0 as u32)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let v = match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => f64::INFINITY,
            _ => t
                .parse::<f64>()
                .map_err(|_| HarnessError::Config(format!("invalid exponent `{s}`")))?,
        };
        if v.is_nan() || v < 1.0 {
            return Err(HarnessError::Config(format!("exponent {s} must be ≥ 1")));
        }
        Ok(Exponent(v))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Num(v) => v.to_string(),
            Raw::Text(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteinerSettings {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_max_steps() -> usize {
    200
}

impl Default for SteinerSettings {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_steps: default_max_steps(),
        }
    }
}

fn default_p_list() -> Vec<Exponent> {
    vec![Exponent(2.0)]
}

fn default_samples() -> usize {
    1_000_000
}

fn default_indices() -> Vec<usize> {
    vec![1, 2, 3]
}

fn default_scale() -> f64 {
    1.0
}

/// One experiment run. See `configs/SCHEMA.md` for field semantics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub kernel: String,
    pub domains: Vec<String>,
    /// Comparison domain for the triangle experiment; defaults to an
    /// equilateral triangle of the common area.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// Common measure every domain is rescaled to; defaults to the measure
    /// of the first domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<f64>,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<Exponent>,
    #[serde(default)]
    pub resolutions: Vec<usize>,
    #[serde(default)]
    pub zeta_list: Vec<f64>,
    #[serde(default)]
    pub t_list: Vec<f64>,
    /// Integer exponents for which heat, resolvent and shifted sums are compared.
    #[serde(default)]
    pub functional_p: Vec<u32>,
    #[serde(default = "default_indices")]
    pub eigen_indices: Vec<usize>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub steiner: SteinerSettings,
    /// Multiplies every error budget; a diagnostic knob, 1 for real runs.
    #[serde(default = "default_scale")]
    pub budget_scale: f64,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub resolutions: Option<Vec<usize>>,
    pub p_list: Option<Vec<Exponent>>,
    pub kernel: Option<String>,
    pub domains: Option<Vec<String>>,
    pub output: Option<PathBuf>,
}

/// Parsed and cross-checked form of a config.
#[derive(Debug, Clone)]
pub struct Validated {
    pub kernel: KernelSpec,
    pub domains: Vec<Domain>,
    pub reference: Option<Domain>,
    pub dimension: usize,
}

impl ExperimentConfig {
    /// Config with every optional field at its default.
    pub fn new(experiment: Experiment, kernel: impl Into<String>, domains: Vec<String>) -> Self {
        Self {
            experiment,
            kernel: kernel.into(),
            domains,
            reference: None,
            measure: None,
            p_list: default_p_list(),
            resolutions: vec![],
            zeta_list: vec![],
            t_list: vec![],
            functional_p: vec![],
            eigen_indices: default_indices(),
            n_samples: default_samples(),
            seed: 0,
            steiner: SteinerSettings::default(),
            budget_scale: default_scale(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(e) = o.experiment {
            self.experiment = e;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(r) = o.resolutions {
            self.resolutions = r;
        }
        if let Some(p) = o.p_list {
            self.p_list = p;
        }
        if let Some(k) = o.kernel {
            self.kernel = k;
        }
        if let Some(d) = o.domains {
            self.domains = d;
        }
        if let Some(out) = o.output {
            self.output = Some(out);
        }
    }

    pub fn validate(&self) -> Result<Validated, HarnessError> {
        let cfg = |m: String| HarnessError::Config(m);
        let kernel: Kernel = self
            .kernel
            .parse()
            .map_err(|e| cfg(format!("kernel: {e}")))?;
        if self.domains.is_empty() {
            return Err(cfg("at least one domain is required".into()));
        }
        let domains = self
            .domains
            .iter()
            .map(|s| s.parse::<Domain>().map_err(|e| cfg(format!("domain: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let dimension = domains[0].dimension();
        if let Some(d) = domains.iter().find(|d| d.dimension() != dimension) {
            return Err(cfg(format!(
                "domain {d} does not have dimension {dimension}"
            )));
        }
        let kernel = KernelSpec::new(kernel, dimension).map_err(|e| cfg(format!("kernel: {e}")))?;
        let reference = self
            .reference
            .as_deref()
            .map(|s| {
                s.parse::<Domain>()
                    .map_err(|e| cfg(format!("reference: {e}")))
            })
            .transpose()?;

        if self.p_list.is_empty() {
            return Err(cfg("p_list must not be empty".into()));
        }
        if self.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(cfg("resolutions must be strictly ascending".into()));
        }
        if let Some(&n) = self.resolutions.iter().find(|&&n| n < 4) {
            return Err(cfg(format!("resolution {n} is below the minimum of 4")));
        }
        if self.experiment != Experiment::Bll && self.resolutions.is_empty() {
            return Err(cfg("resolutions must not be empty".into()));
        }
        if self.experiment.needs_budget() && self.resolutions.len() < 2 {
            return Err(cfg(format!(
                "experiment `{}` needs at least two resolutions for its error budget",
                self.experiment
            )));
        }
        if let Some(m) = self.measure {
            if !(m > 0.0 && m.is_finite()) {
                return Err(cfg(format!("measure {m} must be positive")));
            }
        }
        if !self.budget_scale.is_finite() {
            return Err(cfg("budget_scale must be finite".into()));
        }
        if self.t_list.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(cfg("t_list entries must be positive".into()));
        }
        if self.zeta_list.iter().any(|z| !z.is_finite()) {
            return Err(cfg("zeta_list entries must be finite".into()));
        }
        if self.functional_p.contains(&0) {
            return Err(cfg("functional_p entries must be ≥ 1".into()));
        }

        let integer_p = || -> Result<(), HarnessError> {
            match self.p_list.iter().find(|p| p.as_integer().is_none()) {
                Some(p) => Err(cfg(format!(
                    "experiment `{}` needs integer p, got {p}",
                    self.experiment
                ))),
                None => Ok(()),
            }
        };
        match self.experiment {
            Experiment::Triangle => {
                let not_triangle = domains
                    .iter()
                    .chain(reference.iter())
                    .find(|d| d.as_triangle().is_none());
                if let Some(d) = not_triangle {
                    return Err(HarnessError::NotATriangle(d.to_string()));
                }
            }
            Experiment::Steiner => {
                if domains.len() != 1 || domains[0].as_triangle().is_none() {
                    return Err(HarnessError::NotATriangle(self.domains.join(" ")));
                }
                integer_p()?;
                if !(self.steiner.tol > 0.0) {
                    return Err(cfg("steiner.tol must be positive".into()));
                }
            }
            Experiment::Bll => {
                integer_p()?;
                if self.p_list.iter().any(|p| p.0 < 2.0) {
                    return Err(cfg("bll needs p ≥ 2".into()));
                }
                if kernel.kernel.is_singular() {
                    return Err(cfg(format!(
                        "bll needs a bounded kernel, got {}",
                        kernel.label
                    )));
                }
                if self.n_samples < crate::trace::MIN_SAMPLES {
                    return Err(cfg(format!(
                        "n_samples must be at least {}",
                        crate::trace::MIN_SAMPLES
                    )));
                }
            }
            Experiment::Zeta => {
                if !matches!(kernel.kernel, Kernel::Peierls { .. }) {
                    return Err(cfg("zeta needs a peierls kernel".into()));
                }
                if self.eigen_indices.is_empty() || self.eigen_indices.contains(&0) {
                    return Err(cfg("eigen_indices must be 1-based and non-empty".into()));
                }
                if self.zeta_list.iter().any(|&z| z < 0.0) {
                    return Err(cfg("zeta shifts must be non-negative".into()));
                }
            }
            _ => {}
        }
        Ok(Validated {
            kernel,
            domains,
            reference,
            dimension,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"experiment": "schatten", "kernel": "gauss:s=1",
                "domains": ["box:d=2,lo=0,0,hi=1,1"], "resolutions": [8, 16],
                "p_list": [1, 2.5, "inf"]}"#,
        )
        .unwrap()
    }

    #[test]
    fn parses_with_defaults() {
        let c = base();
        assert_eq!(
            c.p_list,
            vec![Exponent(1.0), Exponent(2.5), Exponent(f64::INFINITY)]
        );
        assert_eq!(c.n_samples, 1_000_000);
        assert_eq!(c.budget_scale, 1.0);
        assert_eq!(c.eigen_indices, vec![1, 2, 3]);
        let mut d = ExperimentConfig::new(Experiment::Schatten, "gauss:s=1", c.domains.clone());
        d.resolutions = vec![8, 16];
        d.p_list = c.p_list.clone();
        assert_eq!(d, c);
        let v = c.validate().unwrap();
        assert_eq!(v.dimension, 2);
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut c = base();
        c.kernel = "peierls:b=-1".into();
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        let mut c = base();
        c.resolutions = vec![16, 8];
        assert!(c.validate().is_err());
        let mut c = base();
        c.resolutions = vec![16];
        assert!(c.validate().is_err());
        let mut c = base();
        c.domains.push("ball:d=3,r=1".into());
        assert!(c.validate().is_err());
        let mut c = base();
        c.experiment = Experiment::Triangle;
        assert!(matches!(c.validate(), Err(HarnessError::NotATriangle(_))));
        let mut c = base();
        c.experiment = Experiment::Bll;
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "rfk"}"#).is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"experiment": "nope", "kernel": "", "domains": []}"#
        )
        .is_err());
        assert!("0.5".parse::<Exponent>().is_err());
    }

    #[test]
    fn overrides_replace_fields() {
        let mut c = base();
        c.apply(Overrides {
            seed: Some(9),
            resolutions: Some(vec![10, 20]),
            p_list: Some(vec![Exponent(3.0)]),
            domains: Some(vec!["ball:d=2,r=1".into()]),
            ..Default::default()
        });
        assert_eq!(c.seed, 9);
        assert_eq!(c.resolutions, vec![10, 20]);
        assert_eq!(c.p_list, vec![Exponent(3.0)]);
        assert_eq!(c.domains, vec!["ball:d=2,r=1".to_string()]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn exponent_formats() {
        assert_eq!(Exponent(2.0).to_string(), "2");
        assert_eq!(Exponent(2.5).to_string(), "2.5");
        assert_eq!(Exponent(f64::INFINITY).to_string(), "inf");
        assert_eq!(Exponent(3.0).as_integer(), Some(3));
        assert_eq!(Exponent(2.5).as_integer(), None);
        assert_eq!("∞".parse::<Exponent>().unwrap(), Exponent(f64::INFINITY));
    }
}
