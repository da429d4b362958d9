//! Adaptive Gauss–Kronrod quadrature of positive integrands supplied in log
//! form.
//!
//! Every panel is evaluated relative to its own largest node value and panels
//! are combined with log-sum-exp, so integrands such as `(1 - r²)^{500}` or
//! `exp(800 λ r)` never under- or overflow. The clustered driver substitutes
//! `r = p + u²` / `r = q - u²` on each half of every interval so that algebraic
//! endpoint factors `(1 ∓ r)^α` become smooth in `u`.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::real::{log_sum_exp, Real};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Value and error of a one-dimensional integral held in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T> {
    /// Natural log of the integral.
    pub log_value: T,
    /// Estimated absolute error of `log_value`, i.e. the relative error of the
    /// integral itself.
    pub abs_error_estimate: T,
    /// Number of panels in the final partition.
    pub subdivisions: usize,
}

impl<T: Real> QuadratureResult<T> {
    pub fn value(&self) -> T {
        self.log_value.exp()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    /// Target relative error of the integral.
    pub rel_tol: T,
    pub max_subdivisions: usize,
    /// Panels created per transformed half-interval before adaptation starts.
    pub initial_panels: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-12).max(T::epsilon() * T::lit(64.0)),
            max_subdivisions: 4000,
            initial_panels: 4,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Map<T> {
    Identity,
    /// `r = origin + u²`
    FromLeft(T),
    /// `r = origin - u²`
    FromRight(T),
}

impl<T: Real> Map<T> {
    /// Returns `(r, log |dr/du|)`.
    #[inline]
    fn apply(self, u: T) -> (T, T) {
        match self {
            Map::Identity => (u, T::zero()),
            Map::FromLeft(p) => (p + u * u, (u + u).ln()),
            Map::FromRight(q) => (q - u * u, (u + u).ln()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    map: Map<T>,
    lo: T,
    hi: T,
    log_value: T,
    log_error: T,
    splittable: bool,
}

fn eval_panel<T: Real, F: Fn(T) -> T>(log_f: &F, map: Map<T>, lo: T, hi: T) -> Result<Panel<T>> {
    let half = (hi - lo) * T::lit(0.5);
    let center = (hi + lo) * T::lit(0.5);
    let mut logs = [T::zero(); 21];
    let eval = |u: T| -> Result<T> {
        let (r, log_jac) = map.apply(u);
        let v = log_f(r) + log_jac;
        if v.is_nan() || v == T::infinity() {
            return Err(Error::Domain(format!("integrand log-value {v} at r = {r}")));
        }
        Ok(v)
    };
    logs[10] = eval(center)?;
    for j in 0..10 {
        let dx = half * T::lit(XGK[j]);
        logs[j] = eval(center - dx)?;
        logs[20 - j] = eval(center + dx)?;
    }
    let m = logs.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return Ok(Panel {
            map,
            lo,
            hi,
            log_value: T::neg_infinity(),
            log_error: T::neg_infinity(),
            splittable: true,
        });
    }
    let f: Vec<T> = logs.iter().map(|&l| (l - m).exp()).collect();
    let mut kronrod = f[10] * T::lit(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let pair = f[j] + f[20 - j];
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    let mean = kronrod * T::lit(0.5);
    let mut asc = T::lit(WGK[10]) * (f[10] - mean).abs();
    for j in 0..10 {
        asc = asc + T::lit(WGK[j]) * ((f[j] - mean).abs() + (f[20 - j] - mean).abs());
    }
    // QUADPACK error scaling, in units of exp(m) * half.
    let mut err = (kronrod - gauss).abs();
    if asc > T::zero() && err > T::zero() {
        err = asc * T::one().min((T::lit(200.0) * err / asc).powf(T::lit(1.5)));
    }
    err = err.max(T::lit(50.0) * T::epsilon() * kronrod);
    let log_half = half.ln();
    Ok(Panel {
        map,
        lo,
        hi,
        log_value: m + log_half + kronrod.ln(),
        log_error: m + log_half + err.ln(),
        splittable: true,
    })
}

fn adapt<T: Real, F: Fn(T) -> T>(
    log_f: &F,
    mut panels: Vec<Panel<T>>,
    opts: &QuadOptions<T>,
) -> Result<QuadratureResult<T>> {
    let log_tol = opts.rel_tol.ln();
    loop {
        let vals: Vec<T> = panels.iter().map(|p| p.log_value).collect();
        let errs: Vec<T> = panels.iter().map(|p| p.log_error).collect();
        let log_value = log_sum_exp(&vals);
        let log_error = log_sum_exp(&errs);
        let rel_err = if log_value == T::neg_infinity() {
            T::zero()
        } else {
            (log_error - log_value).exp()
        };
        if log_value == T::neg_infinity() || log_error - log_value <= log_tol {
            return Ok(QuadratureResult {
                log_value,
                abs_error_estimate: rel_err,
                subdivisions: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .max_by(|a, b| a.1.log_error.partial_cmp(&b.1.log_error).expect("finite log errors"))
            .map(|(i, _)| i);
        let Some(i) = worst.filter(|_| panels.len() < opts.max_subdivisions) else {
            return Err(Error::Quadrature {
                partial_log_value: log_value.as_f64(),
                log_error_estimate: rel_err.as_f64(),
                subdivisions: panels.len(),
            });
        };
        let p = panels[i];
        let mid = (p.lo + p.hi) * T::lit(0.5);
        if !(mid > p.lo && mid < p.hi) || (p.hi - p.lo) <= T::epsilon() * T::lit(8.0) * mid.abs() {
            panels[i].splittable = false;
            continue;
        }
        panels[i] = eval_panel(log_f, p.map, p.lo, mid)?;
        panels.push(eval_panel(log_f, p.map, mid, p.hi)?);
    }
}

fn uniform_panels<T: Real, F: Fn(T) -> T>(
    log_f: &F,
    map: Map<T>,
    lo: T,
    hi: T,
    count: usize,
    out: &mut Vec<Panel<T>>,
) -> Result<()> {
    let count = count.max(1);
    let width = (hi - lo) / T::from_count(count);
    for k in 0..count {
        let a = lo + width * T::from_count(k);
        let b = if k + 1 == count { hi } else { a + width };
        out.push(eval_panel(log_f, map, a, b)?);
    }
    Ok(())
}

/// `log ∫_a^b exp(log_f(r)) dr` on a finite interval, without endpoint
/// transformation.
pub fn integrate_log<T, F>(log_f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<QuadratureResult<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("integration interval ({a}, {b}) is empty or unbounded")));
    }
    let mut panels = Vec::new();
    uniform_panels(&log_f, Map::Identity, a, b, opts.initial_panels, &mut panels)?;
    adapt(&log_f, panels, opts)
}

/// `log ∫ exp(log_f(r)) dr` over `[breaks[0], breaks[last]]`, clustering
/// nodes quadratically towards every break point.
///
/// Suited to integrands with algebraic behaviour `(r - p)^α` at the breaks;
/// the integrand is never evaluated at a break point itself.
pub fn integrate_log_clustered<T, F>(log_f: F, breaks: &[T], opts: &QuadOptions<T>) -> Result<QuadratureResult<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    if breaks.len() < 2 {
        return Err(Error::Domain("at least two break points required".into()));
    }
    let mut panels = Vec::new();
    for w in breaks.windows(2) {
        let (p, q) = (w[0], w[1]);
        if !(p < q) || !p.is_finite() || !q.is_finite() {
            return Err(Error::Domain(format!("break points must increase, got {p} then {q}")));
        }
        let mid = (p + q) * T::lit(0.5);
        let left = (mid - p).sqrt();
        let right = (q - mid).sqrt();
        uniform_panels(&log_f, Map::FromLeft(p), T::zero(), left, opts.initial_panels, &mut panels)?;
        uniform_panels(&log_f, Map::FromRight(q), T::zero(), right, opts.initial_panels, &mut panels)?;
    }
    adapt(&log_f, panels, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_integrate_constants() {
        let s: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_and_gaussian() {
        let opts = QuadOptions::default();
        // ∫_0^2 x^3 dx = 4
        let r = integrate_log(|x: f64| 3.0 * x.ln(), 0.0, 2.0, &opts).unwrap();
        assert!((r.value() - 4.0).abs() < 1e-12);
        // ∫ e^{-x²/2} over [-12, 12] = √(2π)
        let r = integrate_log(|x: f64| -0.5 * x * x, -12.0, 12.0, &opts).unwrap();
        assert!((r.log_value - 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
        assert!(r.abs_error_estimate <= 1e-12);
    }

    #[test]
    fn huge_exponents_stay_finite() {
        // ∫_{-1}^{1} (1-r²)^{600} dr = √π Γ(601) / Γ(601.5)
        let opts = QuadOptions::default();
        let r = integrate_log_clustered(|r: f64| 600.0 * (1.0 - r * r).ln(), &[-1.0, 1.0], &opts).unwrap();
        let expect = 0.5 * std::f64::consts::PI.ln()
            + crate::specfun::log_gamma_ratio(601.0_f64, 601.5).unwrap();
        assert!((r.log_value - expect).abs() < 1e-11, "{} vs {}", r.log_value, expect);
        // exp(800 r) on [0, 1]
        let r = integrate_log(|r: f64| 800.0 * r, 0.0, 1.0, &opts).unwrap();
        let expect = 800.0 + (-(-800.0_f64).exp_m1()).ln() - 800f64.ln();
        assert!((r.log_value - expect).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularities() {
        // ∫_0^1 t^{-1/2} (1-t)^{-1/2} dt = π
        let opts = QuadOptions::default();
        let r = integrate_log_clustered(
            |t: f64| -0.5 * t.ln() - 0.5 * (1.0 - t).ln(),
            &[0.0, 1.0],
            &opts,
        )
        .unwrap();
        assert!((r.value() - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_nan_and_bad_intervals() {
        let opts = QuadOptions::default();
        assert!(integrate_log(|_x: f64| f64::NAN, 0.0, 1.0, &opts).is_err());
        assert!(integrate_log(|x: f64| x, 1.0, 1.0, &opts).is_err());
        assert!(integrate_log_clustered(|x: f64| x, &[0.0], &opts).is_err());
    }

    #[test]
    fn exhausted_budget_reports_partial_value() {
        let opts = QuadOptions { rel_tol: 1e-15, max_subdivisions: 3, initial_panels: 1 };
        let err = integrate_log(|x: f64| (x.sin().abs() + 1e-3).ln(), 0.0, 200.0, &opts).unwrap_err();
        match err {
            Error::Quadrature { partial_log_value, subdivisions, .. } => {
                assert!(partial_log_value.is_finite());
                assert_eq!(subdivisions, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
