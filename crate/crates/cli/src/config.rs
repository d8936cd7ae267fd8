use std::path::{Path, PathBuf};

use sarfa_agents::{OracleConfig, SearchLimit};
use sarfa_core::{Combiner, Method};
use sarfa_eval::Normalization;
use sarfa_image::BlurSpec;
use sarfa_render::{Colormap, HeatmapStyle};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliError};

/// `SARFA_` followed by the key in upper snake case.
pub fn env_name(key: &str) -> String {
    format!("SARFA_{}", key.replace('-', "_").to_uppercase())
}

macro_rules! settings {
    ($( $(#[$attr:meta])* $name:ident : $ty:ty ),* $(,)?) => {
        /// One layer of settings. Every key is optional so layers can be merged.
        #[derive(Debug, Clone, Default, PartialEq, clap::Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct Settings {
            $(
                $(#[$attr])*
                #[arg(long, global = true)]
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $name: Option<$ty>,
            )*
        }

        impl Settings {
            pub fn from_env(get: impl Fn(&str) -> Option<String>) -> Result<Self, CliError> {
                let mut s = Settings::default();
                $(
                    let key = env_name(stringify!($name));
                    if let Some(raw) = get(&key) {
                        s.$name = Some(raw.parse::<$ty>().map_err(|e| invalid(format!("{key}: {e}")))?);
                    }
                )*
                Ok(s)
            }

            /// Keys set in `self` win over `lower`.
            pub fn over(self, lower: Settings) -> Settings {
                Settings { $( $name: self.$name.or(lower.$name), )* }
            }
        }
    };
}

settings! {
    /// UCI engine executable
    engine: PathBuf,
    /// Extra engine arguments, shell-quoted
    #[arg(allow_hyphen_values = true)]
    engine_args: String,
    /// Search depth per position
    depth: u32,
    /// Search time per position in milliseconds; overrides depth
    movetime: u64,
    /// Number of principal variations requested
    multipv: u32,
    /// Pawn units per 100 centipawns
    q_scale: f64,
    /// Largest Q magnitude (mate in one)
    q_cap: f64,
    /// Centipawn saturation point; mates score above it
    mate_base: f64,
    /// Time allowed for the engine or agent to start up
    handshake_timeout_ms: u64,
    /// Time allowed per evaluation
    eval_timeout_ms: u64,
    /// Softmax temperature of the policy baseline
    temperature: f64,
    /// Saliency method: sarfa, iyer, greydanus_policy, greydanus_value or a combiner name
    method: Method,
    /// Combiner used with --method sarfa
    combiner: Combiner,
    /// Seed for random choices
    seed: u64,
    /// Parallel agent sessions
    workers: usize,
    /// Score rescaling before ROC: global or per_puzzle
    normalization: Normalization,
    /// Blur radius of the perturbed frame, in pixels
    sigma_blur: f64,
    /// Radius of the perturbation mask, in pixels
    sigma_mask: f64,
    /// Pixels between perturbation centers
    stride: usize,
    /// Heatmap colors: red_alpha or viridis
    colormap: Colormap,
    /// Heatmap opacity at full score
    opacity: f64,
    /// SARFA score below which a piece counts as non-salient in robustness runs
    nonsalient_threshold: f64,
    /// JSON Lines file of completed puzzles, reused on restart
    journal: PathBuf,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
    }
}

/// Fully resolved settings, written into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub engine: Option<PathBuf>,
    pub engine_args: Vec<String>,
    pub depth: u32,
    pub movetime: Option<u64>,
    pub multipv: u32,
    pub q_scale: f64,
    pub q_cap: f64,
    pub mate_base: f64,
    pub handshake_timeout_ms: u64,
    pub eval_timeout_ms: u64,
    pub temperature: f64,
    pub method: Method,
    pub seed: Option<u64>,
    pub workers: usize,
    pub normalization: Normalization,
    pub blur: BlurSpec,
    pub style: HeatmapStyle,
    pub nonsalient_threshold: f64,
    pub journal: Option<PathBuf>,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)
}

impl RunConfig {
    /// Merges flag, environment and file layers over the defaults.
    pub fn resolve(flags: Settings, env: Settings, file: Settings) -> Result<Self, CliError> {
        let s = flags.over(env).over(file);
        let oracle = OracleConfig::default();
        let blur_default = BlurSpec::default();
        let style_default = HeatmapStyle::default();
        let method = match (s.method.unwrap_or_default(), s.combiner) {
            (Method::Sarfa(_), Some(c)) if s.method.is_none_or(|m| m == Method::default()) => Method::Sarfa(c),
            (m, Some(_)) => return Err(invalid(format!("--combiner only applies to --method sarfa, not {m}"))),
            (m, None) => m,
        };
        let engine_args = match &s.engine_args {
            Some(raw) => shlex::split(raw).ok_or_else(|| invalid(format!("cannot split engine arguments `{raw}`")))?,
            None => Vec::new(),
        };
        let cfg = RunConfig {
            engine: s.engine,
            engine_args,
            depth: s.depth.unwrap_or(12),
            movetime: s.movetime,
            multipv: s.multipv.unwrap_or(oracle.multipv),
            q_scale: s.q_scale.unwrap_or(oracle.q_scale),
            q_cap: s.q_cap.unwrap_or(oracle.q_cap),
            mate_base: s.mate_base.unwrap_or(oracle.mate_base),
            handshake_timeout_ms: s.handshake_timeout_ms.unwrap_or(oracle.handshake_timeout_ms),
            eval_timeout_ms: s.eval_timeout_ms.unwrap_or(oracle.eval_timeout_ms),
            temperature: s.temperature.unwrap_or(sarfa_core::DEFAULT_TEMPERATURE),
            method,
            seed: s.seed,
            workers: s.workers.unwrap_or_else(default_workers),
            normalization: s.normalization.unwrap_or_default(),
            blur: BlurSpec {
                sigma_blur: s.sigma_blur.unwrap_or(blur_default.sigma_blur),
                sigma_mask: s.sigma_mask.unwrap_or(blur_default.sigma_mask),
                stride: s.stride.unwrap_or(blur_default.stride),
            },
            style: HeatmapStyle {
                colormap: s.colormap.unwrap_or(style_default.colormap),
                opacity: s.opacity.unwrap_or(style_default.opacity),
                ..style_default
            },
            nonsalient_threshold: s.nonsalient_threshold.unwrap_or(0.1),
            journal: s.journal,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.workers == 0 {
            return Err(invalid("--workers must be at least 1"));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(invalid("--temperature must be positive"));
        }
        if !self.nonsalient_threshold.is_finite() {
            return Err(invalid("--nonsalient-threshold must be finite"));
        }
        self.blur.validate().map_err(invalid)?;
        self.style.validate().map_err(invalid)?;
        self.oracle(None).validate().map_err(invalid)
    }

    /// Agent settings; `external` replaces the UCI engine with an external agent command line.
    pub fn oracle(&self, external: Option<(PathBuf, Vec<String>)>) -> OracleConfig {
        let base = match external {
            Some((program, args)) => OracleConfig::external(program, args),
            None => OracleConfig {
                executable_path: self.engine.clone(),
                args: self.engine_args.clone(),
                ..OracleConfig::default()
            },
        };
        OracleConfig {
            search_limit: match self.movetime {
                Some(ms) => SearchLimit::MoveTimeMs(ms),
                None => SearchLimit::Depth(self.depth),
            },
            multipv: self.multipv,
            q_scale: self.q_scale,
            q_cap: self.q_cap,
            mate_base: self.mate_base,
            handshake_timeout_ms: self.handshake_timeout_ms,
            eval_timeout_ms: self.eval_timeout_ms,
            ..base
        }
    }
}
