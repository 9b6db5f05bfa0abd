//! Student-t, normal and chi-square distributions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::special::{inc_beta, inc_gamma_lower, inc_gamma_upper, invert_survival, ln_gamma};
use crate::error::{Error, Result};

/// A probability strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Probability(value))
        } else {
            Err(Error::domain(format!(
                "probability must lie in (0, 1), got {value}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    pub fn complement(self) -> Probability {
        Probability(1.0 - self.0)
    }

    /// The `1 - alpha/2` level used by two-sided intervals when `self` is alpha.
    pub fn upper_half(self) -> Probability {
        Probability(1.0 - 0.5 * self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

fn check_df(df: usize) -> Result<f64> {
    if df == 0 {
        Err(Error::domain("degrees of freedom must be at least 1"))
    } else {
        Ok(df as f64)
    }
}

/// Density of Student's t with `df` degrees of freedom.
pub fn t_pdf(df: usize, x: f64) -> f64 {
    let v = df as f64;
    let ln_norm = ln_gamma(0.5 * (v + 1.0)) - ln_gamma(0.5 * v) - 0.5 * (v * PI).ln();
    (ln_norm - 0.5 * (v + 1.0) * (x * x / v).ln_1p()).exp()
}

/// P(T > x) for x >= 0, computed without cancellation.
fn t_upper_tail(v: f64, x: f64) -> f64 {
    let x2 = x * x;
    if x2 < v {
        0.5 - 0.5 * inc_beta(0.5, 0.5 * v, x2 / (v + x2))
    } else {
        0.5 * inc_beta(0.5 * v, 0.5, v / (v + x2))
    }
}

/// CDF of Student's t.
pub fn t_cdf(df: usize, x: f64) -> f64 {
    let v = df as f64;
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 0.0 {
        1.0 - t_upper_tail(v, x)
    } else {
        t_upper_tail(v, -x)
    }
}

/// Quantile of Student's t: the `x` with `t_cdf(df, x) = p`.
pub fn t_quantile(df: usize, p: Probability) -> Result<f64> {
    let v = check_df(df)?;
    let p = p.value();
    if p == 0.5 {
        return Ok(0.0);
    }
    let (tail, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };
    let start = normal_quantile_raw(1.0 - tail).max(1e-3);
    let x = invert_survival(tail, start, |x| t_upper_tail(v, x), |x| t_pdf(df, x));
    Ok(sign * x)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    let z = 0.5 * x * x;
    if x < 0.0 {
        0.5 * inc_gamma_upper(0.5, z)
    } else {
        0.5 + 0.5 * inc_gamma_lower(0.5, z)
    }
}

/// Standard normal quantile.
pub fn normal_quantile(p: Probability) -> f64 {
    normal_quantile_raw(p.value())
}

fn normal_quantile_raw(p: f64) -> f64 {
    // Acklam's rational approximation followed by one Halley step.
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p == 0.5 {
        return 0.0;
    }
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement of Φ(x) - p, evaluated on the smaller tail.
    let e = if x < 0.0 {
        normal_cdf(x) - p
    } else {
        (1.0 - p) - 0.5 * inc_gamma_upper(0.5, 0.5 * x * x)
    };
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// `erf` expressed through the incomplete gamma function.
pub fn erf(x: f64) -> f64 {
    let v = inc_gamma_lower(0.5, x * x);
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Chi-square CDF with `df` degrees of freedom.
pub fn chi_square_cdf(df: usize, x: f64) -> f64 {
    inc_gamma_lower(0.5 * df as f64, 0.5 * x)
}

fn chi_square_pdf(v: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = 0.5 * v;
    ((k - 1.0) * x.ln() - 0.5 * x - k * 2f64.ln() - ln_gamma(k)).exp()
}

/// Chi-square quantile.
pub fn chi_square_quantile(df: usize, p: Probability) -> Result<f64> {
    let v = check_df(df)?;
    let tail = 1.0 - p.value();
    let x = invert_survival(
        tail,
        v,
        |x| inc_gamma_upper(0.5 * v, 0.5 * x),
        |x| chi_square_pdf(v, x),
    );
    Ok(x)
}
