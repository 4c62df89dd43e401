use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::besov::BesovParams;
use crate::fields::Preset;

use super::HarnessError;

pub const DEFAULT_N: usize = 256;
pub const DEFAULT_L: f64 = 8.0;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T: f64 = 1.0;
pub const DEFAULT_T_CAP: f64 = 20.0;
pub const DEFAULT_N_MAX: usize = 10;
pub const DEFAULT_J_MAX: usize = 6;
pub const DEFAULT_AMPLITUDE: f64 = 0.1;
pub const DEFAULT_AMPLITUDES: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
pub const DEFAULT_DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const DEFAULT_OUTPUT_DIR: &str = "fwlab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Norm,
    PartitionCheck,
    Transport,
    Simulate,
    Iterate,
    #[serde(alias = "lifespan")]
    LifespanSweep,
    Stability,
    Continuity,
    Verify,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Norm,
        ExperimentKind::PartitionCheck,
        ExperimentKind::Transport,
        ExperimentKind::Simulate,
        ExperimentKind::Iterate,
        ExperimentKind::LifespanSweep,
        ExperimentKind::Stability,
        ExperimentKind::Continuity,
        ExperimentKind::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Norm => "norm",
            ExperimentKind::PartitionCheck => "partition-check",
            ExperimentKind::Transport => "transport",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Iterate => "iterate",
            ExperimentKind::LifespanSweep => "lifespan-sweep",
            ExperimentKind::Stability => "stability",
            ExperimentKind::Continuity => "continuity",
            ExperimentKind::Verify => "verify",
        }
    }

    /// Kinds that run the nonlinear system and so need `s > max{2 + 1/p, 5/2}`, `r < ∞`.
    pub fn needs_well_posedness(self) -> bool {
        !matches!(
            self,
            ExperimentKind::Norm | ExperimentKind::PartitionCheck | ExperimentKind::Transport
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "lifespan" {
            return Ok(ExperimentKind::LifespanSweep);
        }
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment kind '{s}'")))
    }
}

/// A field given either by a named shape or by a CSV file with columns `x, value`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FieldSource {
    Zero,
    Sine,
    Cosine,
    Gauss,
    Csv(PathBuf),
}

impl FieldSource {
    pub fn parse(text: &str) -> FieldSource {
        match text {
            "zero" => FieldSource::Zero,
            "sine" => FieldSource::Sine,
            "cosine" => FieldSource::Cosine,
            "gauss" => FieldSource::Gauss,
            path => FieldSource::Csv(PathBuf::from(path)),
        }
    }
}

impl fmt::Display for FieldSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSource::Zero => f.write_str("zero"),
            FieldSource::Sine => f.write_str("sine"),
            FieldSource::Cosine => f.write_str("cosine"),
            FieldSource::Gauss => f.write_str("gauss"),
            FieldSource::Csv(p) => write!(f, "{}", p.display()),
        }
    }
}

impl From<FieldSource> for String {
    fn from(src: FieldSource) -> String {
        src.to_string()
    }
}

impl TryFrom<String> for FieldSource {
    type Error = String;

    fn try_from(text: String) -> Result<Self, String> {
        if text.is_empty() {
            return Err("empty field source".into());
        }
        Ok(FieldSource::parse(&text))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    /// Horizon of the lifespan sweep.
    pub t_cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    /// Lifespan constant; calibrated from a seeded transport family when absent.
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub preset: Preset,
    pub amplitude: f64,
    /// CSV overrides for the initial `u₀` and `ρ₀`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0: Option<PathBuf>,
    pub velocity: FieldSource,
    pub forcing: FieldSource,
    pub fit_constant: bool,
    pub amplitudes: Vec<f64>,
    pub deltas: Vec<f64>,
    pub j_max: usize,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub besov: BesovParams,
    pub scheme: SchemeSection,
    pub experiment: ExperimentConfig,
    /// Dotted keys that were filled from defaults while parsing.
    #[serde(skip)]
    pub defaulted: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    grid: Option<RawGrid>,
    time: Option<RawTime>,
    besov: Option<RawBesov>,
    scheme: Option<RawScheme>,
    experiment: Option<RawExperiment>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "L")]
    scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    dt: Option<f64>,
    #[serde(rename = "T")]
    t_end: Option<f64>,
    t_cap: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBesov {
    s: Option<f64>,
    p: Option<f64>,
    r: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    #[serde(rename = "C")]
    c: Option<f64>,
    n_max: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: Option<ExperimentKind>,
    preset: Option<Preset>,
    amplitude: Option<f64>,
    u0: Option<PathBuf>,
    rho0: Option<PathBuf>,
    velocity: Option<FieldSource>,
    forcing: Option<FieldSource>,
    fit_constant: Option<bool>,
    amplitudes: Option<Vec<f64>>,
    deltas: Option<Vec<f64>>,
    j_max: Option<usize>,
}

struct Filler(Vec<String>);

impl Filler {
    fn take<T>(&mut self, key: &str, value: Option<T>, default: impl FnOnce() -> T) -> T {
        value.unwrap_or_else(|| {
            self.0.push(key.to_string());
            default()
        })
    }
}

/// Parses a TOML run configuration. Unknown keys are fatal, missing keys
/// take their defaults (listed in `defaulted`), and the result is validated.
pub fn parse_config(text: &str) -> Result<RunConfig, HarnessError> {
    let raw: RawConfig = toml::from_str(text)?;
    let mut fill = Filler(Vec::new());
    let g = raw.grid.unwrap_or_default();
    let t = raw.time.unwrap_or_default();
    let b = raw.besov.unwrap_or_default();
    let sc = raw.scheme.unwrap_or_default();
    let e = raw.experiment.unwrap_or_default();
    let cfg = RunConfig {
        seed: fill.take("seed", raw.seed, || 0),
        output_dir: fill.take("output_dir", raw.output_dir, || PathBuf::from(DEFAULT_OUTPUT_DIR)),
        grid: GridConfig {
            n: fill.take("grid.N", g.n, || DEFAULT_N),
            scale: fill.take("grid.L", g.scale, || DEFAULT_L),
        },
        time: TimeConfig {
            dt: fill.take("time.dt", t.dt, || DEFAULT_DT),
            t_end: fill.take("time.T", t.t_end, || DEFAULT_T),
            t_cap: fill.take("time.t_cap", t.t_cap, || DEFAULT_T_CAP),
        },
        besov: BesovParams {
            s: fill.take("besov.s", b.s, || 3.0),
            p: fill.take("besov.p", b.p, || 2.0),
            r: fill.take("besov.r", b.r, || 2.0),
        },
        scheme: SchemeSection {
            c: sc.c,
            n_max: fill.take("scheme.n_max", sc.n_max, || DEFAULT_N_MAX),
        },
        experiment: ExperimentConfig {
            kind: fill.take("experiment.kind", e.kind, || ExperimentKind::Simulate),
            preset: fill.take("experiment.preset", e.preset, || Preset::Sine),
            amplitude: fill.take("experiment.amplitude", e.amplitude, || DEFAULT_AMPLITUDE),
            u0: e.u0,
            rho0: e.rho0,
            velocity: fill.take("experiment.velocity", e.velocity, || FieldSource::Sine),
            forcing: fill.take("experiment.forcing", e.forcing, || FieldSource::Zero),
            fit_constant: fill.take("experiment.fit_constant", e.fit_constant, || false),
            amplitudes: fill.take("experiment.amplitudes", e.amplitudes, || DEFAULT_AMPLITUDES.to_vec()),
            deltas: fill.take("experiment.deltas", e.deltas, || DEFAULT_DELTAS.to_vec()),
            j_max: fill.take("experiment.j_max", e.j_max, || DEFAULT_J_MAX),
        },
        defaulted: fill.0,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = parse_config("").expect("defaults are valid");
        cfg.defaulted.clear();
        cfg
    }
}

impl RunConfig {
    /// Full TOML rendering; parsing it back yields the same configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.grid.n < 4 || !self.grid.n.is_multiple_of(2) {
            return bad(format!("grid.N must be even and at least 4, got {}", self.grid.n));
        }
        if !(self.grid.scale > 0.0 && self.grid.scale.is_finite()) {
            return bad(format!("grid.L must be positive, got {}", self.grid.scale));
        }
        for (key, v) in [("time.dt", self.time.dt), ("time.T", self.time.t_end), ("time.t_cap", self.time.t_cap)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{key} must be positive, got {v}"));
            }
        }
        let b = &self.besov;
        BesovParams::new(b.s, b.p, b.r).map_err(|e| HarnessError::Config(e.to_string()))?;
        let kind = self.experiment.kind;
        if kind.needs_well_posedness() {
            b.check_well_posedness()
                .map_err(|why| HarnessError::Config(format!("inadmissible (s, p, r) for {kind}: {why}")))?;
        } else if kind == ExperimentKind::Transport {
            b.check_transport()
                .map_err(|why| HarnessError::Config(format!("inadmissible (s, p, r) for transport: {why}")))?;
        }
        if let Some(c) = self.scheme.c {
            if !(c > 0.0 && c.is_finite()) {
                return bad(format!("scheme.C must be positive, got {c}"));
            }
        }
        if self.scheme.n_max < 1 {
            return bad("scheme.n_max must be at least 1".into());
        }
        let e = &self.experiment;
        if !e.amplitude.is_finite() {
            return bad(format!("experiment.amplitude must be finite, got {}", e.amplitude));
        }
        if e.amplitudes.is_empty() || e.amplitudes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return bad("experiment.amplitudes must be a nonempty list of positive numbers".into());
        }
        if e.deltas.is_empty() || e.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return bad("experiment.deltas must be a nonempty list of positive numbers".into());
        }
        if e.j_max < 3 {
            return bad(format!("experiment.j_max must be at least 3, got {}", e.j_max));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("[grid]\nN = 256\nL = 8.0\n[besov]\ns = 3.0\np = 2.0\nr = 2.0\n").unwrap();
        assert_eq!(cfg.grid.n, 256);
        assert_eq!(cfg.experiment.kind, ExperimentKind::Simulate);
        assert!(cfg.defaulted.contains(&"time.dt".to_string()));
        assert!(!cfg.defaulted.contains(&"grid.N".to_string()));
        assert!(cfg.scheme.c.is_none());
    }

    #[test]
    fn low_regularity_names_the_bound() {
        let err = parse_config("[besov]\ns = 2.4\np = 2.0\nr = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("s > 5/2"), "{err}");
        let err = parse_config("[besov]\ns = 2.9\np = 1.0\nr = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("2 + 1/p"), "{err}");
    }

    #[test]
    fn infinite_r_rejected_for_scheme_kinds() {
        let err = parse_config("[besov]\ns = 3.0\np = 2.0\nr = inf\n[experiment]\nkind = \"iterate\"\n").unwrap_err();
        assert!(err.to_string().contains("r = ∞"), "{err}");
        let ok = parse_config("[besov]\ns = 3.0\np = 2.0\nr = inf\n[experiment]\nkind = \"norm\"\n").unwrap();
        assert!(ok.besov.r.is_infinite());
    }

    #[test]
    fn unknown_keys_are_fatal() {
        assert!(parse_config("[grid]\nN = 64\nLL = 2.0\n").is_err());
        assert!(parse_config("sede = 3\n").is_err());
        assert!(parse_config("[experiment]\nkind = \"bogus\"\n").is_err());
    }

    #[test]
    fn round_trip() {
        let mut cfg = parse_config(
            "seed = 9\n[scheme]\nC = 1.5\n[experiment]\nkind = \"transport\"\nvelocity = \"data/v.csv\"\n",
        )
        .unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert!(again.defaulted.is_empty());
        cfg.defaulted.clear();
        assert_eq!(again, cfg);
        assert_eq!(cfg.experiment.velocity, FieldSource::Csv(PathBuf::from("data/v.csv")));
    }

    #[test]
    fn kind_names_parse() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert_eq!("lifespan".parse::<ExperimentKind>().unwrap(), ExperimentKind::LifespanSweep);
    }
}
