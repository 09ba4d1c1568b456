//! Adaptive Gauss–Kronrod (7/15) integration.
//!
//! [`integrate_positive_axis`] handles integrals over `(lower, inf)` of
//! smooth heavy-tailed integrands by moving to a logarithmic axis and
//! cutting the domain where the integrand falls below `1e-14` of its peak.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;
const LOG_AXIS_LIMIT: f64 = 700.0;
const LOG_AXIS_STEP: f64 = 0.25;
const TAIL_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
}

impl Tolerance {
    pub fn relative(relative: f64) -> Self {
        Self { relative, absolute: 0.0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok((value, error))
}

/// Integrates `f` over `[a, b]`, starting from `pieces` equal subintervals.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    pieces: usize,
    tol: Tolerance,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, intervals: 0 });
    }
    let pieces = pieces.max(1);
    let width = (b - a) / pieces as f64;
    let mut heap = BinaryHeap::with_capacity(pieces * 4);
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        let (value, error) = kronrod15(&mut f, lo, hi)?;
        heap.push(Segment { a: lo, b: hi, value, error });
    }
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if error <= tol.absolute.max(tol.relative * value.abs()) {
            return Ok(Integral { value, error, intervals: heap.len() });
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Numeric(format!(
                "quadrature did not converge on [{a}, {b}]: estimate {value:e}, \
                 error {error:e}, {} intervals",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Numeric(format!(
                "quadrature interval [{}, {}] cannot be bisected further (estimate {value:e}, error {error:e})",
                worst.a, worst.b
            )));
        }
        let (v1, e1) = kronrod15(&mut f, worst.a, mid)?;
        let (v2, e2) = kronrod15(&mut f, mid, worst.b)?;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

/// Integrates `f(z)` over `z in (lower, inf)` with `lower >= 0`.
///
/// The substitution `z = e^t` turns power-law tails into exponential
/// decay; the `t` range is cut where `|f(e^t) e^t|` drops below
/// `1e-14` of its maximum over a coarse scan.
pub fn integrate_positive_axis<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    tol: Tolerance,
) -> Result<Integral> {
    if !(lower >= 0.0) || !lower.is_finite() {
        return Err(Error::Domain(format!("lower bound {lower} must be finite and >= 0")));
    }
    let t_start = if lower == 0.0 { -LOG_AXIS_LIMIT } else { lower.ln() };
    if t_start >= LOG_AXIS_LIMIT {
        return Err(Error::Domain(format!("lower bound {lower} too large")));
    }
    let g = |t: f64| {
        let z = t.exp();
        f(z) * z
    };

    let steps = ((LOG_AXIS_LIMIT - t_start) / LOG_AXIS_STEP).ceil() as usize;
    // Non-finite values (e.g. `inf * 0` at the extremes of the axis) are
    // tolerated only outside the retained range.
    let samples: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let t = (t_start + LOG_AXIS_STEP * i as f64).min(LOG_AXIS_LIMIT);
            (t, g(t).abs())
        })
        .collect();
    let peak = samples.iter().map(|s| s.1).filter(|v| v.is_finite()).fold(0.0, f64::max);
    if peak == 0.0 {
        if let Some(bad) = samples.iter().find(|s| !s.1.is_finite()) {
            return Err(Error::Numeric(format!("integrand not finite at z = {:e}", bad.0.exp())));
        }
        return Ok(Integral { value: 0.0, error: 0.0, intervals: 0 });
    }
    let cut = peak * TAIL_CUTOFF;
    let first = samples.iter().position(|s| s.1.is_finite() && s.1 >= cut).unwrap();
    let last = samples.iter().rposition(|s| s.1.is_finite() && s.1 >= cut).unwrap();
    if let Some(bad) = samples[first..=last].iter().find(|s| !s.1.is_finite()) {
        return Err(Error::Numeric(format!("integrand not finite at z = {:e}", bad.0.exp())));
    }
    let first = if first > 0 && samples[first - 1].1.is_finite() { first - 1 } else { first };
    let last = if last + 1 < samples.len() && samples[last + 1].1.is_finite() { last + 1 } else { last };
    let (a, b) = (samples[first].0, samples[last].0);
    let pieces = ((b - a) / 1.0).ceil().max(1.0) as usize;
    integrate(g, a, b, pieces, tol)
}
