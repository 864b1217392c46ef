//! Run configuration: TOML sections, defaults and field-level validation.

use std::fmt;
use std::path::Path;

use pairquench::quench::reference_model;
use pairquench::{Backend, Branch};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ThreeSite,
    Band,
    Spectrum,
    Quench,
    Sweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ThreeSite => "three-site",
            Experiment::Band => "band",
            Experiment::Spectrum => "spectrum",
            Experiment::Quench => "quench",
            Experiment::Sweep => "sweep",
        }
    }

    /// Sections a config file must provide for this experiment.
    fn sections(self) -> &'static [Section] {
        match self {
            Experiment::ThreeSite => &[MODEL, THREE_SITE],
            Experiment::Band => &[MODEL],
            Experiment::Spectrum => &[MODEL, SPECTRUM],
            Experiment::Quench => &[MODEL, PACKET, QUENCH],
            Experiment::Sweep => &[MODEL, PACKET, SWEEP],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Integer,
    Number,
    Text,
}

struct Section {
    name: &'static str,
    required: &'static [(&'static str, Kind)],
    optional: &'static [(&'static str, Kind)],
}

const MODEL: Section = Section {
    name: "model",
    required: &[
        ("sites", Kind::Integer),
        ("hopping", Kind::Number),
        ("onsite", Kind::Number),
        ("nearest", Kind::Number),
    ],
    optional: &[],
};

const PACKET: Section = Section {
    name: "packet",
    required: &[
        ("k0", Kind::Number),
        ("alpha", Kind::Number),
        ("center", Kind::Number),
        ("branch", Kind::Text),
    ],
    optional: &[],
};

const THREE_SITE: Section = Section {
    name: "three_site",
    required: &[
        ("field", Kind::Number),
        ("t_max", Kind::Number),
        ("dt", Kind::Number),
    ],
    optional: &[],
};

const SPECTRUM: Section = Section {
    name: "spectrum",
    required: &[
        ("f_start", Kind::Number),
        ("f_stop", Kind::Number),
        ("f_step", Kind::Number),
        ("threshold", Kind::Number),
    ],
    optional: &[
        ("window_center", Kind::Number),
        ("window_width", Kind::Number),
    ],
};

const QUENCH: Section = Section {
    name: "quench",
    required: &[
        ("field", Kind::Number),
        ("t_max", Kind::Number),
        ("dt", Kind::Number),
        ("backend", Kind::Text),
    ],
    optional: &[],
};

const SWEEP: Section = Section {
    name: "sweep",
    required: &[
        ("f_start", Kind::Number),
        ("f_stop", Kind::Number),
        ("f_step", Kind::Number),
        ("t_final", Kind::Number),
    ],
    optional: &[],
};

/// Problems found while checking a config file, one per field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for p in &self.problems {
            writeln!(f, "  {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn single(msg: impl Into<String>) -> Self {
        Self {
            problems: vec![msg.into()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub sites: usize,
    pub hopping: f64,
    pub onsite: f64,
    pub nearest: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub k0: f64,
    pub alpha: f64,
    pub center: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeSiteConfig {
    pub field: f64,
    pub t_max: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub f_start: f64,
    pub f_stop: f64,
    pub f_step: f64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchConfig {
    pub field: f64,
    pub t_max: f64,
    pub dt: f64,
    pub backend: Backend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub f_start: f64,
    pub f_stop: f64,
    pub f_step: f64,
    pub t_final: f64,
}

/// Fully resolved configuration of one run. Only the sections the
/// experiment needs are present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub packet: Option<PacketConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub three_site: Option<ThreeSiteConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quench: Option<QuenchConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn headline_model() -> ModelConfig {
    let m = reference_model();
    ModelConfig {
        sites: m.sites,
        hopping: m.hopping,
        onsite: m.onsite,
        nearest: m.nearest,
    }
}

fn default_packet() -> PacketConfig {
    let p = pairquench::WavePacketSpec::default();
    PacketConfig {
        k0: p.k0,
        alpha: p.alpha,
        center: p.center,
        branch: p.branch,
    }
}

impl RunConfig {
    /// Configuration used when no file is given.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut cfg = RunConfig::default();
        match experiment {
            Experiment::ThreeSite => {
                cfg.model = Some(ModelConfig {
                    sites: 3,
                    hopping: 0.4,
                    onsite: -6.0,
                    nearest: -6.0,
                });
                cfg.three_site = Some(ThreeSiteConfig {
                    field: -3.0,
                    t_max: 200.0,
                    dt: 0.1,
                });
            }
            Experiment::Band => cfg.model = Some(headline_model()),
            Experiment::Spectrum => {
                cfg.model = Some(headline_model());
                // pair ladder rung near the packet centre: U + F (2 x 36)
                let center = -6.24 + (-0.0975) * 72.0;
                cfg.spectrum = Some(SpectrumConfig {
                    f_start: -0.100,
                    f_stop: -0.095,
                    f_step: 1e-4,
                    threshold: pairquench::spectrum::DEFAULT_RBAR_THRESHOLD,
                    window_center: Some(center),
                    window_width: Some(10.0),
                });
            }
            Experiment::Quench => {
                cfg.model = Some(headline_model());
                cfg.packet = Some(default_packet());
                cfg.quench = Some(QuenchConfig {
                    field: -0.097120,
                    t_max: 800.0,
                    dt: 1.0,
                    backend: Backend::Chebyshev,
                });
            }
            Experiment::Sweep => {
                cfg.model = Some(headline_model());
                cfg.packet = Some(default_packet());
                cfg.sweep = Some(SweepConfig {
                    f_start: -0.0995,
                    f_stop: -0.0950,
                    f_step: 7.5e-5,
                    t_final: 800.0,
                });
            }
        }
        cfg
    }

    pub fn from_file(path: &Path, experiment: Experiment) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::single(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, experiment)
    }

    /// Parses and validates a config. Every required field of every section
    /// the experiment uses must be present; all problems are reported at once.
    pub fn parse(text: &str, experiment: Experiment) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            ConfigError::single(format!("malformed TOML: {}", e.message()))
        })?;
        let mut problems = Vec::new();
        let wanted = experiment.sections();
        for key in table.keys() {
            if !wanted.iter().any(|s| s.name == key) {
                problems.push(format!(
                    "{key}: section not used by `{}`",
                    experiment.name()
                ));
            }
        }
        for section in wanted {
            let entries = match table.get(section.name) {
                None => {
                    for (field, _) in section.required {
                        problems.push(format!("{}.{field}: missing", section.name));
                    }
                    continue;
                }
                Some(toml::Value::Table(t)) => t,
                Some(_) => {
                    problems.push(format!("{}: expected a section", section.name));
                    continue;
                }
            };
            for (field, kind) in section.required {
                match entries.get(*field) {
                    None => problems.push(format!("{}.{field}: missing", section.name)),
                    Some(v) => check_kind(&mut problems, section.name, field, *kind, v),
                }
            }
            for (field, kind) in section.optional {
                if let Some(v) = entries.get(*field) {
                    check_kind(&mut problems, section.name, field, *kind, v);
                }
            }
            for key in entries.keys() {
                let known = section
                    .required
                    .iter()
                    .chain(section.optional)
                    .any(|(f, _)| f == key);
                if !known {
                    problems.push(format!("{}.{key}: unknown field", section.name));
                }
            }
        }
        if !problems.is_empty() {
            return Err(ConfigError { problems });
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::single(e.message().to_string()))?;
        cfg.check_ranges(experiment)?;
        Ok(cfg)
    }

    /// Value checks that do not depend on the file layout.
    pub fn check_ranges(&self, experiment: Experiment) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        let mut require = |ok: bool, msg: &str| {
            if !ok {
                problems.push(msg.to_string());
            }
        };
        if let Some(m) = &self.model {
            require(m.sites >= 2, "model.sites: must be at least 2");
            require(m.hopping >= 0.0, "model.hopping: must be non-negative");
        }
        if let Some(p) = &self.packet {
            require(p.alpha > 0.0, "packet.alpha: must be positive");
            require(
                p.k0.abs() <= std::f64::consts::PI,
                "packet.k0: must lie in [-pi, pi]",
            );
        }
        if let Some(t) = &self.three_site {
            require(t.dt > 0.0, "three_site.dt: must be positive");
            require(t.t_max >= 0.0, "three_site.t_max: must be non-negative");
        }
        if let Some(s) = &self.spectrum {
            require(s.f_step > 0.0, "spectrum.f_step: must be positive");
            require(
                s.f_stop >= s.f_start,
                "spectrum.f_stop: must not precede f_start",
            );
            require(
                s.window_center.is_some() == s.window_width.is_some(),
                "spectrum.window_width: window_center and window_width go together",
            );
            require(
                s.window_width.is_none_or(|w| w > 0.0),
                "spectrum.window_width: must be positive",
            );
        }
        if let Some(q) = &self.quench {
            require(q.dt > 0.0, "quench.dt: must be positive");
            require(q.t_max > 0.0, "quench.t_max: must be positive");
            require(q.field != 0.0, "quench.field: must be nonzero");
        }
        if let Some(s) = &self.sweep {
            require(s.f_step > 0.0, "sweep.f_step: must be positive");
            require(
                s.f_stop >= s.f_start,
                "sweep.f_stop: must not precede f_start",
            );
            require(s.t_final > 0.0, "sweep.t_final: must be positive");
        }
        for section in experiment.sections() {
            let present = match section.name {
                "model" => self.model.is_some(),
                "packet" => self.packet.is_some(),
                "three_site" => self.three_site.is_some(),
                "spectrum" => self.spectrum.is_some(),
                "quench" => self.quench.is_some(),
                _ => self.sweep.is_some(),
            };
            if !present {
                problems.push(format!("{}: missing", section.name));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { problems })
        }
    }
}

fn check_kind(problems: &mut Vec<String>, section: &str, field: &str, kind: Kind, v: &toml::Value) {
    let ok = match kind {
        Kind::Integer => v.as_integer().is_some_and(|i| i >= 0),
        Kind::Number => v.as_float().is_some_and(f64::is_finite) || v.as_integer().is_some(),
        Kind::Text => v.is_str(),
    };
    if !ok {
        let expected = match kind {
            Kind::Integer => "a non-negative integer",
            Kind::Number => "a finite number",
            Kind::Text => "a string",
        };
        problems.push(format!("{section}.{field}: expected {expected}"));
    }
}
