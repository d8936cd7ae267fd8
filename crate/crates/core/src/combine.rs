use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Ways of merging the probability drop and the remainder similarity into a
/// single score. `Harmonic` is the SARFA score; the rest exist for ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combiner {
    Harmonic,
    ArithmeticMean,
    GeometricMean,
    Minimum,
    DpOnly,
    KOnly,
}

impl Combiner {
    pub const ALL: [Combiner; 6] = [
        Combiner::Harmonic,
        Combiner::ArithmeticMean,
        Combiner::GeometricMean,
        Combiner::Minimum,
        Combiner::DpOnly,
        Combiner::KOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Combiner::Harmonic => "harmonic",
            Combiner::ArithmeticMean => "arithmetic_mean",
            Combiner::GeometricMean => "geometric_mean",
            Combiner::Minimum => "minimum",
            Combiner::DpOnly => "dp_only",
            Combiner::KOnly => "k_only",
        }
    }
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Combiner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Combiner::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown combiner `{s}`"))
    }
}

/// `delta_p` must already be clamped to [0, 1] and `k_sim` lie in (0, 1].
pub fn combine(delta_p: f64, k_sim: f64, mode: Combiner) -> f64 {
    match mode {
        Combiner::Harmonic => {
            if delta_p <= 0.0 {
                0.0
            } else {
                2.0 * k_sim * delta_p / (k_sim + delta_p)
            }
        }
        Combiner::ArithmeticMean => {
            if delta_p <= 0.0 {
                0.0
            } else {
                (delta_p + k_sim) / 2.0
            }
        }
        Combiner::GeometricMean => (delta_p * k_sim).sqrt(),
        Combiner::Minimum => delta_p.min(k_sim),
        Combiner::DpOnly => delta_p,
        Combiner::KOnly => k_sim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(combine(0.5, 0.5, Combiner::ArithmeticMean), 0.5);
        assert!((combine(0.2310585786300049, 1.0, Combiner::GeometricMean) - 0.48068552987374696).abs() < 1e-12);
        for mode in Combiner::ALL {
            if mode != Combiner::KOnly {
                assert_eq!(combine(0.0, 0.7, mode), 0.0, "{mode}");
            }
        }
        assert_eq!(combine(0.0, 0.7, Combiner::KOnly), 0.7);
        assert_eq!(combine(0.3, 0.6, Combiner::Minimum), 0.3);
        assert!((combine(0.5, 0.5, Combiner::Harmonic) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn names_round_trip() {
        for mode in Combiner::ALL {
            assert_eq!(mode.name().parse::<Combiner>().unwrap(), mode);
        }
        assert!("median".parse::<Combiner>().is_err());
    }
}
