//! Shared numerical kernels: the standard normal CDF, adaptive Gauss–Kronrod
//! quadrature on finite and semi-infinite ranges, inversion of monotone
//! decreasing functions, and the `sup { τ : g(τ) ≤ γ }` threshold search.
//!
//! Every routine here is a pure function of its inputs and may be called
//! concurrently from any number of threads.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use statrs::function::erf;

use crate::error::NumericsError;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF `Ψ(x)`.
///
/// Evaluated through the complementary error function so both tails keep
/// full relative precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Inverse of [`std_normal_cdf`] for `p ∈ (0, 1)`; returns `±∞` at the ends.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    -SQRT_2 * erf::erfc_inv(2.0 * p)
}

/// Tolerances for the adaptive quadrature routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_floor: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-8,
            absolute_floor: 1e-14,
            max_subdivisions: 400,
        }
    }
}

impl QuadratureSpec {
    pub fn new(relative_tolerance: f64, absolute_floor: f64, max_subdivisions: usize) -> Result<Self, NumericsError> {
        let spec = Self {
            relative_tolerance,
            absolute_floor,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.relative_tolerance > 0.0) || !self.relative_tolerance.is_finite() {
            return Err(NumericsError::InvalidSpec("relative_tolerance must be positive"));
        }
        if !(self.absolute_floor >= 0.0) {
            return Err(NumericsError::InvalidSpec("absolute_floor must be non-negative"));
        }
        if self.max_subdivisions == 0 {
            return Err(NumericsError::InvalidSpec("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    /// Same limits with a different relative tolerance.
    pub fn with_relative(mut self, rel: f64) -> Self {
        self.relative_tolerance = rel;
        self
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const ROUNDOFF_STALLS: usize = 20;
const ROUNDOFF_RELATIVE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut values = [0.0f64; 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[2 * j] = f1;
        values[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((values[2 * j] - mean).abs() + (values[2 * j + 1] - mean).abs());
    }
    let result = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel {
        a,
        b,
        value: result,
        error: err,
    }
}

/// Result of an adaptive integration with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel: f64,
    abs: f64,
    max_subdivisions: usize,
    mut sink: Option<&mut Vec<(f64, f64)>>,
) -> Result<Integral, NumericsError> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let first = gauss_kronrod_15(f, a, b);
    if !first.value.is_finite() {
        return Err(NumericsError::NonFinite { at: 0.5 * (a + b) });
    }
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut total_err = first.error;
    heap.push(first);
    let mut subdivisions = 1;
    let mut frozen: Vec<(f64, f64)> = Vec::new();
    let mut stalled = 0usize;
    loop {
        let tol = abs.max(rel * total.abs());
        // Bisection stopped paying off: the remaining error is integrand roundoff.
        let noisy = stalled >= ROUNDOFF_STALLS && total_err <= ROUNDOFF_RELATIVE * total.abs();
        let done = total_err <= tol || noisy || heap.is_empty();
        if done {
            if let Some(out) = sink.as_deref_mut() {
                out.extend(frozen.iter().copied());
                out.extend(heap.iter().map(|p| (p.a, p.b)));
            }
            return Ok(Integral {
                value: total,
                error: total_err,
            });
        }
        let Some(worst) = heap.pop() else { unreachable!() };
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if (worst.b - worst.a).abs() <= 64.0 * f64::EPSILON * scale {
            // Too narrow to split further; its error stays in the total.
            frozen.push((worst.a, worst.b));
            continue;
        }
        if subdivisions >= max_subdivisions {
            return Err(NumericsError::NonConvergent {
                lower: a,
                upper: b,
                estimate: total,
                error: total_err,
            });
        }
        let left = gauss_kronrod_15(f, worst.a, mid);
        let right = gauss_kronrod_15(f, mid, worst.b);
        if !left.value.is_finite() || !right.value.is_finite() {
            return Err(NumericsError::NonFinite { at: mid });
        }
        let pair = left.value + right.value;
        let pair_err = left.error + right.error;
        if pair_err >= 0.99 * worst.error && (pair - worst.value).abs() <= 1e-5 * pair.abs() {
            stalled += 1;
        }
        total += pair - worst.value;
        total_err += pair_err - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64, NumericsError> {
    spec.validate()?;
    adaptive(&f, a, b, spec.relative_tolerance, spec.absolute_floor, spec.max_subdivisions, None).map(|i| i.value)
}

/// Integral over `[a, b]` split at the supplied interior breakpoints.
///
/// Breakpoints outside `(a, b)` are ignored, duplicates are merged.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64, NumericsError> {
    finite_with_breaks(&f, a, b, breaks, spec, None)
}

fn finite_with_breaks<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
    mut sink: Option<&mut Vec<(f64, f64)>>,
) -> Result<f64, NumericsError> {
    spec.validate()?;
    let nodes = sorted_nodes(a, b, breaks);
    let mut total = 0.0;
    for w in nodes.windows(2) {
        total += adaptive(
            &f,
            w[0],
            w[1],
            spec.relative_tolerance,
            spec.absolute_floor,
            spec.max_subdivisions,
            sink.as_deref_mut(),
        )?
        .value;
    }
    Ok(total)
}

fn sorted_nodes(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(breaks.len() + 2);
    nodes.push(a);
    nodes.extend(breaks.iter().copied().filter(|&x| x.is_finite() && x > a && x < b));
    nodes.push(b);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// `∫_lower^∞ f(t) dt` for integrands decaying at least like `t^{-1-ε}`.
///
/// The half-line is covered by panels of doubling width. Panel
/// contributions of an integrable power-law tail shrink geometrically, so
/// integration stops once the geometric remainder estimate is below the
/// tolerance, and that remainder is added to the result. A tail whose panel
/// contributions stop shrinking is reported as [`NumericsError::NonConvergent`].
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, lower: f64, spec: &QuadratureSpec) -> Result<f64, NumericsError> {
    integrate_semi_infinite_with_breaks(f, lower, &[], spec)
}

/// [`integrate_semi_infinite`] with interior breakpoints (kinks, jumps).
pub fn integrate_semi_infinite_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64, NumericsError> {
    semi_infinite(&f, lower, breaks, spec, None)
}

fn semi_infinite<F: Fn(f64) -> f64>(
    f: &F,
    lower: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
    mut sink: Option<&mut Vec<(f64, f64)>>,
) -> Result<f64, NumericsError> {
    spec.validate()?;
    if !lower.is_finite() {
        return if lower == f64::INFINITY {
            Ok(0.0)
        } else {
            Err(NumericsError::InvalidSpec("lower limit must be finite"))
        };
    }
    let rel = spec.relative_tolerance;
    let max_break = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lower)
        .fold(lower, f64::max);

    // Everything up to the last breakpoint is a finite integral.
    let mut total = 0.0;
    let mut start = lower;
    if max_break > lower {
        total = finite_with_breaks(f, lower, max_break, breaks, spec, sink.as_deref_mut())?;
        start = max_break;
    }

    const MAX_PANELS: usize = 900;
    let mut width = 1.0f64.max(0.25 * (start - lower));
    let mut prev: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut growing = 0usize;
    for _ in 0..MAX_PANELS {
        let end = start + width;
        let abs_tol = spec.absolute_floor.max(0.1 * rel * total.abs());
        let panel = adaptive(f, start, end, rel, abs_tol, spec.max_subdivisions, sink.as_deref_mut())?.value;
        total += panel;
        start = end;
        width *= 2.0;

        let c = panel.abs();
        if let Some(p) = prev {
            if c == 0.0 && p == 0.0 {
                if total == 0.0 && start < lower + 1e6 {
                    prev = Some(c);
                    continue;
                }
                return Ok(total);
            }
            if p > 0.0 {
                let ratio = c / p;
                if ratio < 1.0 {
                    growing = 0;
                    let remainder = c * ratio / (1.0 - ratio);
                    let stable = prev_ratio.is_some_and(|r: f64| (r - ratio).abs() <= 1e-6 * ratio.max(1e-300));
                    let tol = spec.absolute_floor.max(0.5 * rel * total.abs());
                    if remainder <= tol || (stable && remainder <= 1e-2 * total.abs()) {
                        return Ok(total + panel.signum() * remainder);
                    }
                } else if start > 1e3 * (1.0 + lower.abs()) {
                    growing += 1;
                    if growing >= 20 {
                        return Err(NumericsError::NonConvergent {
                            lower,
                            upper: f64::INFINITY,
                            estimate: total,
                            error: f64::INFINITY,
                        });
                    }
                }
                prev_ratio = Some(ratio);
            }
        }
        prev = Some(c);
    }
    Err(NumericsError::NonConvergent {
        lower,
        upper: f64::INFINITY,
        estimate: total,
        error: f64::INFINITY,
    })
}

/// Fixed nodes and weights reusable across many integrands.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// 15-point Kronrod nodes on each panel, panels sorted by left end.
    pub fn from_panels(mut panels: Vec<(f64, f64)>) -> Self {
        panels.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut rule = QuadratureRule::default();
        for (a, b) in panels {
            let center = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            rule.nodes.push(center);
            rule.weights.push(WGK[7] * half);
            for j in 0..7 {
                rule.nodes.push(center - half * XGK[j]);
                rule.weights.push(WGK[j] * half);
                rule.nodes.push(center + half * XGK[j]);
                rule.weights.push(WGK[j] * half);
            }
        }
        rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Panels chosen by [`integrate_semi_infinite_with_breaks`] for `f`, with
/// the integral.
///
/// The tail remainder beyond the last panel is not covered, so the panels
/// suit integrands with fast decaying tails.
pub fn semi_infinite_panels<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<(Vec<(f64, f64)>, f64), NumericsError> {
    let mut panels = Vec::new();
    let value = semi_infinite(&f, lower, breaks, spec, Some(&mut panels))?;
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok((panels, value))
}

/// `inf { x ≥ 0 : g(x) = y }` for a continuous non-increasing `g`.
///
/// Returns `0` when `y` exceeds `g(0)`, `+∞` for `y ≤ 0` and `+∞` when `g`
/// never falls to `y`. `hint` is an initial bracket guess `(lo, hi)` and
/// only affects speed.
pub fn invert_monotone_decreasing<G: Fn(f64) -> f64>(g: G, y: f64, hint: (f64, f64)) -> f64 {
    let g0 = g(0.0);
    if y >= g0 {
        return 0.0;
    }
    if y <= 0.0 {
        return f64::INFINITY;
    }
    let mut lo = hint.0.max(0.0);
    if g(lo) <= y {
        lo = 0.0;
    }
    let mut hi = hint.1.max(lo + 1.0);
    while g(hi) > y {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    // g(lo) > y >= g(hi)
    for _ in 0..2000 {
        let tol = 1e-12f64.max(4.0 * f64::EPSILON * hi);
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Settings for [`sup_threshold`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSearch {
    /// First probe of the geometric bracket expansion.
    pub initial_step: f64,
    /// Probing beyond this value reports [`NumericsError::Unbounded`].
    pub cap: f64,
    /// Bisection stops when the bracket is below `relative_tolerance · max(τ, 1)`.
    pub relative_tolerance: f64,
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        Self {
            initial_step: 1e-6,
            cap: 50.0,
            relative_tolerance: 1e-7,
        }
    }
}

/// `sup { τ ≥ 0 : g(τ) ≤ γ }` for a non-decreasing `g`.
pub fn sup_threshold<G: FnMut(f64) -> Result<f64, NumericsError>>(
    mut g: G,
    gamma: f64,
    search: &ThresholdSearch,
) -> Result<f64, NumericsError> {
    if g(0.0)? > gamma {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = search.initial_step;
    loop {
        if g(hi)? > gamma {
            break;
        }
        lo = hi;
        if hi >= search.cap {
            return Err(NumericsError::Unbounded { probed: hi });
        }
        hi = (hi * 2.0).min(search.cap);
    }
    while hi - lo > search.relative_tolerance * lo.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if g(mid)? <= gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
