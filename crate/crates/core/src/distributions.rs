//! Heavy-tailed laws used as truncated and truncating variables.
//!
//! All three families are Pareto-type: the survival function is regularly
//! varying at infinity with index `-1/tail_index`.
//!
//! | family  | survival                                  | support   |
//! |---------|-------------------------------------------|-----------|
//! | Burr    | `(1 + x^(1/delta))^(-delta/tail_index)`  | `x >= 0`  |
//! | Pareto  | `x^(-1/tail_index)`                       | `x >= 1`  |
//! | Fréchet | `1 - exp(-x^(-1/tail_index))`             | `x > 0`   |

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Burr { delta: f64 },
    Pareto,
    Frechet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HeavyTailModel {
    family: Family,
    tail_index: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and positive, got {v}")))
    }
}

impl HeavyTailModel {
    pub fn burr(delta: f64, tail_index: f64) -> Result<Self> {
        check_positive("delta", delta)?;
        check_positive("tail index", tail_index)?;
        Ok(Self { family: Family::Burr { delta }, tail_index })
    }

    pub fn pareto(tail_index: f64) -> Result<Self> {
        check_positive("tail index", tail_index)?;
        Ok(Self { family: Family::Pareto, tail_index })
    }

    pub fn frechet(tail_index: f64) -> Result<Self> {
        check_positive("tail index", tail_index)?;
        Ok(Self { family: Family::Frechet, tail_index })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn tail_index(&self) -> f64 {
        self.tail_index
    }

    pub fn delta(&self) -> Option<f64> {
        match self.family {
            Family::Burr { delta } => Some(delta),
            _ => None,
        }
    }

    /// Survival function `P(X > x)`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(domain(format!("survival argument must be finite, got {x}")));
        }
        Ok(self.sf(x))
    }

    /// Distribution function `P(X <= x)`.
    pub fn df(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(domain(format!("df argument must be finite, got {x}")));
        }
        Ok(self.cdf(x))
    }

    pub(crate) fn sf(&self, x: f64) -> f64 {
        let g = self.tail_index;
        match self.family {
            Family::Burr { delta } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-(delta / g) * x.powf(1.0 / delta).ln_1p()).exp()
                }
            }
            Family::Pareto => {
                if x <= 1.0 {
                    1.0
                } else {
                    x.powf(-1.0 / g)
                }
            }
            Family::Frechet => {
                if x <= 0.0 {
                    1.0
                } else {
                    -(-x.powf(-1.0 / g)).exp_m1()
                }
            }
        }
    }

    pub(crate) fn cdf(&self, x: f64) -> f64 {
        let g = self.tail_index;
        match self.family {
            Family::Burr { delta } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(delta / g) * x.powf(1.0 / delta).ln_1p()).exp_m1()
                }
            }
            Family::Pareto => {
                if x <= 1.0 {
                    0.0
                } else {
                    -(-x.ln() / g).exp_m1()
                }
            }
            Family::Frechet => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-x.powf(-1.0 / g)).exp()
                }
            }
        }
    }

    /// Probability density.
    pub fn pdf(&self, x: f64) -> f64 {
        let g = self.tail_index;
        match self.family {
            Family::Burr { delta } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let w = x.powf(1.0 / delta);
                (1.0 / g) * w / x * (-(delta / g + 1.0) * w.ln_1p()).exp()
            }
            Family::Pareto => {
                if x < 1.0 {
                    0.0
                } else {
                    x.powf(-1.0 / g - 1.0) / g
                }
            }
            Family::Frechet => {
                if x <= 0.0 {
                    return 0.0;
                }
                let w = x.powf(-1.0 / g);
                w / (g * x) * (-w).exp()
            }
        }
    }

    /// Returns `x` with `df(x) = u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("quantile level must lie in (0, 1), got {u}")));
        }
        Ok(self.inverse_cdf(u))
    }

    pub(crate) fn inverse_cdf(&self, u: f64) -> f64 {
        let g = self.tail_index;
        match self.family {
            Family::Burr { delta } => (-(g / delta) * (-u).ln_1p()).exp_m1().powf(delta),
            Family::Pareto => (-g * (-u).ln_1p()).exp(),
            Family::Frechet => (-u.ln()).powf(-g),
        }
    }

    /// Inverse-transform sample of `count` values, deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(domain("sample count must be at least 1"));
        }
        let mut rng = rng::stream(seed, rng::purpose::SAMPLE);
        Ok((0..count).map(|_| self.draw(&mut rng)).collect())
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.inverse_cdf(u)
    }

    /// Second-order parameter of the tail quantile function.
    ///
    /// Burr gives `-tail_index/delta`, Fréchet `-1`. An exact power law has
    /// no second-order term; Pareto returns `-inf`.
    pub fn second_order_tau(&self) -> f64 {
        match self.family {
            Family::Burr { delta } => -self.tail_index / delta,
            Family::Pareto => f64::NEG_INFINITY,
            Family::Frechet => -1.0,
        }
    }
}

impl fmt::Display for HeavyTailModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Burr { delta } => write!(f, "burr:delta={},gamma={}", delta, self.tail_index),
            Family::Pareto => write!(f, "pareto:gamma={}", self.tail_index),
            Family::Frechet => write!(f, "frechet:gamma={}", self.tail_index),
        }
    }
}

impl FromStr for HeavyTailModel {
    type Err = Error;

    /// Parses `burr:delta=0.25,gamma=0.6`, `pareto:gamma=0.5` or
    /// `frechet:gamma=0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| domain(format!("model spec '{s}' lacks a ':'")))?;
        let mut delta = None;
        let mut gamma = None;
        for kv in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| domain(format!("parameter '{kv}' is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| domain(format!("parameter '{kv}' is not a number")))?;
            match k.trim() {
                "delta" => delta = Some(v),
                "gamma" => gamma = Some(v),
                other => return Err(domain(format!("unknown parameter '{other}'"))),
            }
        }
        let gamma = gamma.ok_or_else(|| domain(format!("model spec '{s}' lacks gamma")))?;
        match name.trim().to_ascii_lowercase().as_str() {
            "burr" => {
                let delta = delta.ok_or_else(|| domain("burr model needs delta"))?;
                Self::burr(delta, gamma)
            }
            "pareto" | "frechet" if delta.is_some() => {
                Err(domain(format!("{name} model takes no delta")))
            }
            "pareto" => Self::pareto(gamma),
            "frechet" | "fréchet" => Self::frechet(gamma),
            other => Err(domain(format!("unknown family '{other}'"))),
        }
    }
}

impl TryFrom<String> for HeavyTailModel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<HeavyTailModel> for String {
    fn from(m: HeavyTailModel) -> String {
        m.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burr() -> HeavyTailModel {
        HeavyTailModel::burr(0.25, 0.6).unwrap()
    }

    #[test]
    fn burr_survival_values() {
        assert_eq!(burr().survival(0.0).unwrap(), 1.0);
        // 2^(-0.25/0.6)
        let expected = 2f64.powf(-0.25 / 0.6);
        assert!((burr().survival(1.0).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.74916).abs() < 1e-5);
    }

    #[test]
    fn pareto_survival_and_quantile() {
        let m = HeavyTailModel::pareto(0.5).unwrap();
        assert!((m.survival(4.0).unwrap() - 0.0625).abs() < 1e-15);
        assert_eq!(m.survival(0.5).unwrap(), 1.0);
        assert!((m.quantile(0.75).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn burr_quantile_median() {
        let expected = (2f64.powf(2.4) - 1.0).powf(0.25);
        assert!((burr().quantile(0.5).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 1.43817).abs() < 1e-5);
    }

    #[test]
    fn quantile_near_zero_hits_support_infimum() {
        let u = 1e-300;
        let q = burr().quantile(u).unwrap();
        assert!((q / (2.4e-300f64).powf(0.25) - 1.0).abs() < 1e-12);
        assert!((HeavyTailModel::pareto(0.5).unwrap().quantile(u).unwrap() - 1.0).abs() < 1e-15);
        assert!(HeavyTailModel::frechet(0.5).unwrap().quantile(u).unwrap() < 0.1);
    }

    #[test]
    fn domain_errors() {
        assert!(burr().survival(f64::NAN).is_err());
        assert!(burr().survival(f64::INFINITY).is_err());
        assert!(burr().quantile(0.0).is_err());
        assert!(burr().quantile(1.0).is_err());
        assert!(HeavyTailModel::burr(0.0, 0.5).is_err());
        assert!(HeavyTailModel::pareto(-1.0).is_err());
        assert!(burr().sample(0, 1).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = burr().sample(100, 42).unwrap();
        let b = burr().sample(100, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, burr().sample(100, 43).unwrap());
        assert_eq!(burr().sample(1, 0).unwrap().len(), 1);
    }

    #[test]
    fn sample_exceedance_fraction_matches_survival() {
        let xs = burr().sample(100_000, 9).unwrap();
        let frac = xs.iter().filter(|&&x| x > 1.0).count() as f64 / xs.len() as f64;
        assert!((frac - 0.74916).abs() < 0.005, "fraction {frac}");
    }

    #[test]
    fn tau_values() {
        assert!((burr().second_order_tau() + 2.4).abs() < 1e-15);
        assert!((HeavyTailModel::burr(0.25, 0.8).unwrap().second_order_tau() + 3.2).abs() < 1e-15);
        assert_eq!(HeavyTailModel::burr(1.0, 1.0).unwrap().second_order_tau(), -1.0);
        assert_eq!(HeavyTailModel::pareto(1.0).unwrap().second_order_tau(), f64::NEG_INFINITY);
        assert_eq!(HeavyTailModel::frechet(1.0).unwrap().second_order_tau(), -1.0);
    }

    #[test]
    fn spec_strings() {
        let m: HeavyTailModel = "burr:delta=0.25,gamma=0.6".parse().unwrap();
        assert_eq!(m, burr());
        assert_eq!(m.to_string(), "burr:delta=0.25,gamma=0.6");
        let p: HeavyTailModel = "pareto:gamma=0.5".parse().unwrap();
        assert_eq!(p, HeavyTailModel::pareto(0.5).unwrap());
        let f: HeavyTailModel = "frechet:gamma=0.5".parse().unwrap();
        assert_eq!(f.to_string().parse::<HeavyTailModel>().unwrap(), f);
        assert!("burr:gamma=0.6".parse::<HeavyTailModel>().is_err());
        assert!("weibull:gamma=1".parse::<HeavyTailModel>().is_err());
        assert!("pareto:gamma=0.5,delta=1".parse::<HeavyTailModel>().is_err());
        assert!("pareto".parse::<HeavyTailModel>().is_err());
    }

    #[test]
    fn density_integrates_to_df() {
        use crate::quadrature::{integrate, Tolerance};
        for m in [
            burr(),
            HeavyTailModel::pareto(0.5).unwrap(),
            HeavyTailModel::frechet(0.7).unwrap(),
        ] {
            let lo = if matches!(m.family(), Family::Pareto) { 1.0 } else { 1e-9 };
            let r = integrate(|x| m.pdf(x), lo, 3.0, 8, Tolerance::relative(1e-12)).unwrap();
            assert!((r.value - (m.cdf(3.0) - m.cdf(lo))).abs() < 1e-10, "{m}");
        }
    }
}
