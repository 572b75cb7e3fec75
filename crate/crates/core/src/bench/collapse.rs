//! Rescaled accuracy curves and their crossing points.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Predicted transition rates; curves are plotted against `beta / rate(n, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rescale {
    /// `sqrt(ln n / n)`
    OneHopDense,
    /// `ln n / (n p)`
    OneHopSparse,
    /// `ln n / (n^2 p^2)`
    TwoHopT1,
    /// `sqrt(ln n / n)`
    TwoHopT2,
    /// `sqrt(n p^3 ln n)`
    TwoHopT3,
}

impl Rescale {
    pub const ALL: [Rescale; 5] = [
        Rescale::OneHopDense,
        Rescale::OneHopSparse,
        Rescale::TwoHopT1,
        Rescale::TwoHopT2,
        Rescale::TwoHopT3,
    ];

    pub fn rate(self, n: f64, p: f64) -> f64 {
        let l = n.ln();
        match self {
            Rescale::OneHopDense | Rescale::TwoHopT2 => (l / n).sqrt(),
            Rescale::OneHopSparse => l / (n * p),
            Rescale::TwoHopT1 => l / (n * n * p * p),
            Rescale::TwoHopT3 => (n * p.powi(3) * l).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rescale::OneHopDense => "one_hop_dense",
            Rescale::OneHopSparse => "one_hop_sparse",
            Rescale::TwoHopT1 => "two_hop_t1",
            Rescale::TwoHopT2 => "two_hop_t2",
            Rescale::TwoHopT3 => "two_hop_t3",
        }
    }

    /// Axis label for plots.
    pub fn axis_label(self) -> &'static str {
        match self {
            Rescale::OneHopDense | Rescale::TwoHopT2 => "beta / sqrt(log n / n)",
            Rescale::OneHopSparse => "beta / (log n / (n p))",
            Rescale::TwoHopT1 => "beta / (log n / (n^2 p^2))",
            Rescale::TwoHopT3 => "beta / sqrt(n p^3 log n)",
        }
    }
}

impl fmt::Display for Rescale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rescale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rescale::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown rescaling `{s}`")))
    }
}

/// Accuracy-versus-beta curve of one `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub n: usize,
    pub p: f64,
    /// `(beta, accuracy)` sorted by beta.
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(n: usize, p: f64, mut points: Vec<(f64, f64)>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Curve { n, p, points }
    }

    /// Smallest beta at which the piecewise-linear curve first reaches `level`
    /// from below. `None` when the grid does not bracket the crossing.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let ((b0, a0), (b1, a1)) = (w[0], w[1]);
            (a0 < level && a1 >= level).then(|| b0 + (level - a0) / (a1 - a0) * (b1 - b0))
        })
    }

    pub fn rescaled(&self, scale: Rescale) -> Vec<(f64, f64)> {
        let rate = scale.rate(self.n as f64, self.p);
        self.points.iter().map(|&(b, a)| (b / rate, a)).collect()
    }
}

/// Relative spread `max / min - 1` of positive values; 0 for a single value.
pub fn spread(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    Some(max / min - 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelReport {
    pub level: f64,
    /// Per curve: `(n, raw crossing, rescaled crossing)`.
    pub crossings: Vec<(usize, Option<f64>, Option<f64>)>,
    /// Defined only when every curve crosses.
    pub spread: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseReport {
    pub rescale: Rescale,
    pub curves: Vec<(usize, Vec<(f64, f64)>)>,
    pub levels: Vec<LevelReport>,
    pub warnings: Vec<String>,
}

impl CollapseReport {
    pub fn level(&self, level: f64) -> Option<&LevelReport> {
        self.levels.iter().find(|l| l.level == level)
    }
}

pub const CROSSING_LEVELS: [f64; 2] = [0.5, 0.95];

pub fn collapse_analysis(curves: &[Curve], rescale: Rescale) -> Result<CollapseReport> {
    if curves.len() < 2 {
        return Err(Error::domain("collapse analysis needs curves for at least two n values"));
    }
    let mut warnings = Vec::new();
    let levels = CROSSING_LEVELS
        .iter()
        .map(|&level| {
            let crossings: Vec<_> = curves
                .iter()
                .map(|c| {
                    let raw = c.crossing(level);
                    if raw.is_none() {
                        warnings.push(format!("n = {}: accuracy {level} not bracketed by the beta grid", c.n));
                    }
                    (c.n, raw, raw.map(|b| b / rescale.rate(c.n as f64, c.p)))
                })
                .collect();
            let rescaled: Option<Vec<f64>> = crossings.iter().map(|c| c.2).collect();
            LevelReport {
                level,
                spread: rescaled.as_deref().and_then(spread),
                crossings,
            }
        })
        .collect();
    Ok(CollapseReport {
        rescale,
        curves: curves.iter().map(|c| (c.n, c.rescaled(rescale))).collect(),
        levels,
        warnings,
    })
}
