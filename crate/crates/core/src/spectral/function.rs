use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SpectralError;

const MAX_DEGREE: usize = 64;

/// A test function `φ` applied to an operator through its spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// Coefficients in increasing degree.
    Polynomial { coefficients: Vec<f64> },
    /// Indicator of the closed interval `[lo, hi]`.
    Indicator { lo: f64, hi: f64 },
    /// Piecewise-linear through the knots, zero outside them.
    Table { knots: Vec<(f64, f64)> },
}

impl TestFunction {
    pub fn one() -> Self {
        Self::Polynomial {
            coefficients: vec![1.0],
        }
    }

    pub fn identity() -> Self {
        Self::Polynomial {
            coefficients: vec![0.0, 1.0],
        }
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self, SpectralError> {
        Self::Polynomial { coefficients }.checked()
    }

    pub fn indicator(lo: f64, hi: f64) -> Result<Self, SpectralError> {
        Self::Indicator { lo, hi }.checked()
    }

    /// Indicator of `(-∞, t]`, with the lower end at the most negative
    /// finite float.
    pub fn step(t: f64) -> Result<Self, SpectralError> {
        Self::indicator(f64::MIN, t)
    }

    /// Indicator of `[t - tol, t + tol]`.
    pub fn window(t: f64, tol: f64) -> Result<Self, SpectralError> {
        Self::indicator(t - tol, t + tol)
    }

    pub fn table(mut knots: Vec<(f64, f64)>) -> Result<Self, SpectralError> {
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self::Table { knots }.checked()
    }

    fn checked(self) -> Result<Self, SpectralError> {
        let bad = |m: &str| Err(SpectralError::InvalidTestFunction(m.to_string()));
        match &self {
            Self::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.len() > MAX_DEGREE + 1 {
                    return bad("polynomial needs 1 to 65 coefficients");
                }
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return bad("coefficients must be finite");
                }
            }
            Self::Indicator { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || lo > hi {
                    return bad("interval needs finite endpoints with lo <= hi");
                }
            }
            Self::Table { knots } => {
                if knots.len() < 2 {
                    return bad("table needs at least two knots");
                }
                if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                    return bad("knots must be finite");
                }
                if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return bad("knot abscissae must be strictly increasing");
                }
            }
        }
        Ok(self)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            Self::Indicator { lo, hi } => {
                if *lo <= x && x <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Table { knots } => {
                let (first, last) = (knots[0], knots[knots.len() - 1]);
                if x < first.0 || x > last.0 {
                    return 0.0;
                }
                let i = knots.partition_point(|k| k.0 <= x).clamp(1, knots.len() - 1);
                let ((x0, y0), (x1, y1)) = (knots[i - 1], knots[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(",");
        match self {
            Self::Polynomial { coefficients } => {
                write!(f, "poly:{}", join(&mut coefficients.iter().map(|c| c.to_string())))
            }
            Self::Indicator { lo, hi } if *lo == f64::MIN => write!(f, "step:{hi}"),
            Self::Indicator { lo, hi } => write!(f, "ind:{lo},{hi}"),
            Self::Table { knots } => {
                write!(f, "table:{}", join(&mut knots.iter().map(|(x, y)| format!("{x}:{y}"))))
            }
        }
    }
}

fn numbers(s: &str) -> Result<Vec<f64>, SpectralError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| SpectralError::InvalidTestFunction(format!("not a number: {x:?}")))
        })
        .collect()
}

/// `one`, `x`, `poly:c0,c1,..`, `step:t`, `ind:lo,hi`, `table:x0:y0,x1:y1,..`.
impl FromStr for TestFunction {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "one" if rest.is_empty() => Ok(Self::one()),
            "x" if rest.is_empty() => Ok(Self::identity()),
            "poly" => Self::polynomial(numbers(rest)?),
            "step" => match numbers(rest)?.as_slice() {
                [t] => Self::step(*t),
                _ => Err(SpectralError::InvalidTestFunction("step takes one value".into())),
            },
            "ind" => match numbers(rest)?.as_slice() {
                [lo, hi] => Self::indicator(*lo, *hi),
                _ => Err(SpectralError::InvalidTestFunction("ind takes two values".into())),
            },
            "table" => {
                let knots = rest
                    .split(',')
                    .map(|k| match numbers(&k.replacen(':', ",", 1))?.as_slice() {
                        [x, y] => Ok((*x, *y)),
                        _ => Err(SpectralError::InvalidTestFunction(format!("bad knot {k:?}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Self::table(knots)
            }
            _ => Err(SpectralError::InvalidTestFunction(format!("unknown function {s:?}"))),
        }
    }
}
