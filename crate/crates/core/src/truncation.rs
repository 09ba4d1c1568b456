//! The random right-truncation model.
//!
//! A pair `(X, Y)` of independent heavy-tailed variables is drawn and kept
//! only when `X <= Y`. The retained pairs are the observed data; their
//! marginals `F`, `G` and the at-risk function `C(z) = P(X <= z <= Y)`
//! follow from the underlying laws by one-dimensional integrals.

use serde::{Deserialize, Serialize};

use crate::distributions::{Family, HeavyTailModel};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_positive_axis, Tolerance};
use crate::rng;

const MARGINAL_TOLERANCE: f64 = 1e-8;

/// Where a sample came from, when it was simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub requested: usize,
    pub seed: u64,
}

/// Observed pairs `(x, y)` with `0 < x <= y`. `y` may be `+inf` to encode
/// complete (untruncated) data.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSample {
    pairs: Vec<(f64, f64)>,
    provenance: Option<Provenance>,
}

impl TruncatedSample {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidSample("sample has no pairs".into()));
        }
        for (i, &(x, y)) in pairs.iter().enumerate() {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidSample(format!(
                    "pair {i}: x = {x} must be finite and positive"
                )));
            }
            if y.is_nan() || y < x {
                return Err(Error::InvalidSample(format!("pair {i}: x = {x} exceeds y = {y}")));
            }
        }
        Ok(Self { pairs, provenance: None })
    }

    /// Complete data: every `y` is `+inf`.
    pub fn complete(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| (x, f64::INFINITY)).collect())
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    /// Multiplies every observation by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.pairs.iter().map(|&(x, y)| (c * x, c * y)).collect())
    }
}

/// Values of the observed marginals at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservedMarginals {
    /// `F(x)`, df of the observed X's.
    pub df_x: f64,
    /// `G(x)`, df of the observed Y's.
    pub df_y: f64,
    /// `C(x) = F(x) - G(x)`.
    pub c: f64,
    pub survival_x: f64,
    pub survival_y: f64,
}

#[derive(Debug, Clone)]
pub struct TruncationModel {
    truncated: HeavyTailModel,
    truncation: HeavyTailModel,
    p: f64,
    warnings: Vec<String>,
}

impl TruncationModel {
    /// `truncated` is the law of X (index gamma1), `truncation` the law of
    /// the truncating Y (index gamma2).
    pub fn new(truncated: HeavyTailModel, truncation: HeavyTailModel) -> Result<Self> {
        let mut warnings = Vec::new();
        if truncated.tail_index() >= truncation.tail_index() {
            warnings.push(format!(
                "gamma1 = {} >= gamma2 = {}: the truncation is too heavy for reliable tail estimation",
                truncated.tail_index(),
                truncation.tail_index()
            ));
        }
        let mut model = Self { truncated, truncation, p: f64::NAN, warnings };
        model.p = match model.closed_form_probability() {
            Some(p) => p,
            None => model.truncation_probability_quadrature()?,
        };
        Ok(model)
    }

    /// Both laws Burr with a shared `delta`, tail indices `gamma1`, `gamma2`.
    pub fn burr_pair(delta: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        Self::new(HeavyTailModel::burr(delta, gamma1)?, HeavyTailModel::burr(delta, gamma2)?)
    }

    pub fn truncated(&self) -> &HeavyTailModel {
        &self.truncated
    }

    pub fn truncation(&self) -> &HeavyTailModel {
        &self.truncation
    }

    pub fn gamma1(&self) -> f64 {
        self.truncated.tail_index()
    }

    pub fn gamma2(&self) -> f64 {
        self.truncation.tail_index()
    }

    /// Tail index of the observed X's, `gamma1 gamma2 / (gamma1 + gamma2)`.
    pub fn gamma(&self) -> f64 {
        let (g1, g2) = (self.gamma1(), self.gamma2());
        g1 * g2 / (g1 + g2)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `p = P(X <= Y)`, the expected observed fraction.
    pub fn truncation_probability(&self) -> f64 {
        self.p
    }

    fn closed_form_probability(&self) -> Option<f64> {
        if self.truncated == self.truncation {
            return Some(0.5);
        }
        match (self.truncated.family(), self.truncation.family()) {
            (Family::Burr { delta: d1 }, Family::Burr { delta: d2 }) if d1 == d2 => {
                Some(self.gamma2() / (self.gamma1() + self.gamma2()))
            }
            _ => None,
        }
    }

    /// `p` by adaptive quadrature of `int F(z) dG... = int Gbar(z) dF(z)`,
    /// ignoring any closed form.
    pub fn truncation_probability_quadrature(&self) -> Result<f64> {
        let (f, g) = (self.truncated, self.truncation);
        Ok(integrate_positive_axis(
            |z| f.pdf(z) * g.sf(z),
            0.0,
            Tolerance::relative(MARGINAL_TOLERANCE),
        )?
        .value)
    }

    /// `Fbar(x) = p^-1 int_x^inf Gbar(z) dF(z)`.
    pub fn observed_survival_x(&self, x: f64) -> Result<f64> {
        self.check_point(x)?;
        let (f, g) = (self.truncated, self.truncation);
        let v = integrate_positive_axis(
            |z| f.pdf(z) * g.sf(z),
            x,
            Tolerance::relative(MARGINAL_TOLERANCE),
        )?
        .value;
        Ok((v / self.p).clamp(0.0, 1.0))
    }

    /// `Gbar(y) = p^-1 int_y^inf F(z) dG(z)`.
    pub fn observed_survival_y(&self, y: f64) -> Result<f64> {
        self.check_point(y)?;
        let (f, g) = (self.truncated, self.truncation);
        let v = integrate_positive_axis(
            |z| g.pdf(z) * f.cdf(z),
            y,
            Tolerance::relative(MARGINAL_TOLERANCE),
        )?
        .value;
        Ok((v / self.p).clamp(0.0, 1.0))
    }

    pub fn observed_marginals(&self, x: f64) -> Result<ObservedMarginals> {
        let survival_x = self.observed_survival_x(x)?;
        let survival_y = self.observed_survival_y(x)?;
        // F - G == Gbar - Fbar; the tail form keeps precision far out.
        let c = (survival_y - survival_x).clamp(0.0, 1.0);
        Ok(ObservedMarginals {
            df_x: 1.0 - survival_x,
            df_y: 1.0 - survival_y,
            c,
            survival_x,
            survival_y,
        })
    }

    /// Tail quantile of the observed X's: the `x` with `Fbar(x) = 1/t`.
    pub fn observed_tail_quantile(&self, t: f64) -> Result<f64> {
        if !(t > 1.0 && t.is_finite()) {
            return Err(domain(format!("tail quantile needs finite t > 1, got {t}")));
        }
        let target = 1.0 / t;
        let mut lo = 1.0;
        let mut hi = 1.0;
        while self.observed_survival_x(lo)? <= target {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::Numeric("tail quantile bracket underflow".into()));
            }
        }
        while self.observed_survival_x(hi)? > target {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Numeric("tail quantile bracket overflow".into()));
            }
        }
        let (mut a, mut b) = (lo.ln(), hi.ln());
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if self.observed_survival_x(mid.exp())? > target {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-13 * (1.0 + a.abs()) {
                break;
            }
        }
        Ok((0.5 * (a + b)).exp())
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if x.is_finite() && x > 0.0 {
            Ok(())
        } else {
            Err(domain(format!("marginal argument must be finite and positive, got {x}")))
        }
    }

    /// Draws `big_n` pairs and keeps those with `x <= y`.
    pub fn sample_truncated(&self, big_n: usize, seed: u64) -> Result<TruncatedSample> {
        if big_n == 0 {
            return Err(domain("N must be at least 1"));
        }
        let mut rng = rng::stream(seed, rng::purpose::TRUNCATED_PAIRS);
        let mut pairs = Vec::with_capacity(big_n);
        for _ in 0..big_n {
            let x = self.truncated.draw(&mut rng);
            let y = self.truncation.draw(&mut rng);
            // x == 0 only through underflow in the far left tail.
            if x <= y && x > 0.0 {
                pairs.push((x, y));
            }
        }
        if pairs.is_empty() {
            return Err(Error::EmptySample { requested: big_n });
        }
        Ok(TruncatedSample { pairs, provenance: Some(Provenance { requested: big_n, seed }) })
    }
}

/// Solves `p = gamma2 / (gamma1 + gamma2)` for `gamma2`.
pub fn gamma2_for_target_p(gamma1: f64, p: f64) -> Result<f64> {
    if !(gamma1.is_finite() && gamma1 > 0.0) {
        return Err(domain(format!("gamma1 must be positive, got {gamma1}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(p * gamma1 / (1.0 - p))
}
