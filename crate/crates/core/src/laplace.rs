//! Laplace-method asymptotics for `∫ exp(x p(t)) q(t) dt` around an interior
//! maximum `t₀` of the phase `p`.
//!
//! The expansion coefficients are
//!
//! ```text
//! c_N = √(2π/|p''|) Σ_{k=0}^{2N} C(2N,k) q^{(2N-k)}
//!         Σ_{m=0}^{k} B_{k,m}(y_1, ..., y_{k-m+1}) (2m+2N-1)!! / |p''|^{m+N},
//! y_i = p^{(i+2)} / ((i+1)(i+2)),
//! ```
//!
//! all derivatives taken at `t₀`, and the integral behaves like
//! `exp(x p(t₀)) Σ_N c_N / ((2N)! x^{N+1/2})`.
//!
//! Callers supply derivatives analytically through [`DerivativeJet`]. The
//! engine cannot check the global integrability of `exp(x p) |q|`; that stays
//! with the caller.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::specfun::{bell_table, binomial_rows, odd_double_factorial_real};

/// Derivatives `derivs[j] = f^{(j)}(point)` of a smooth function.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeJet<T> {
    pub point: T,
    pub derivs: Vec<T>,
}

impl<T: Real> DerivativeJet<T> {
    pub fn new(point: T, derivs: Vec<T>) -> Self {
        assert!(!derivs.is_empty(), "a jet carries at least the function value");
        Self { point, derivs }
    }

    /// Highest derivative order held.
    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn value(&self) -> T {
        self.derivs[0]
    }

    pub fn constant(point: T, c: T, order: usize) -> Self {
        let mut derivs = vec![T::zero(); order + 1];
        derivs[0] = c;
        Self { point, derivs }
    }

    /// Jet of `a + b t`.
    pub fn affine(point: T, a: T, b: T, order: usize) -> Self {
        let mut derivs = vec![T::zero(); order + 1];
        derivs[0] = a + b * point;
        if order >= 1 {
            derivs[1] = b;
        }
        Self { point, derivs }
    }

    /// Jet of `ln(a + b t)`; requires `a + b t > 0`.
    pub fn ln_affine(point: T, a: T, b: T, order: usize) -> Self {
        let base = a + b * point;
        let mut derivs = Vec::with_capacity(order + 1);
        derivs.push(base.ln());
        // d^k/dt^k ln(a+bt) = (-1)^{k-1} (k-1)! (b/(a+bt))^k
        let ratio = b / base;
        let mut term = ratio;
        for k in 1..=order {
            derivs.push(term);
            term = -term * ratio * T::from_count(k);
        }
        Self { point, derivs }
    }

    /// Jet of `(a + b t)^α`; requires `a + b t > 0`.
    pub fn pow_affine(point: T, a: T, b: T, alpha: T, order: usize) -> Self {
        let base = a + b * point;
        let mut derivs = Vec::with_capacity(order + 1);
        let mut falling = T::one();
        for k in 0..=order {
            let kf = T::from_count(k);
            derivs.push(falling * b.powi(k as i32) * base.powf(alpha - kf));
            falling = falling * (alpha - kf);
        }
        Self { point, derivs }
    }

    fn check_same_point(&self, other: &Self) {
        debug_assert!(
            self.point == other.point,
            "jets taken at different points: {} vs {}",
            self.point,
            other.point
        );
    }

    /// Jet of the sum, truncated to the smaller order.
    pub fn add(&self, other: &Self) -> Self {
        self.check_same_point(other);
        let derivs = self.derivs.iter().zip(&other.derivs).map(|(&a, &b)| a + b).collect();
        Self { point: self.point, derivs }
    }

    pub fn scale(&self, c: T) -> Self {
        Self { point: self.point, derivs: self.derivs.iter().map(|&d| d * c).collect() }
    }

    /// Jet of the product by the Leibniz rule, truncated to the smaller order.
    pub fn product(&self, other: &Self) -> Self {
        self.check_same_point(other);
        let order = self.order().min(other.order());
        let binom = binomial_rows::<T>(order);
        let derivs = (0..=order)
            .map(|k| (0..=k).map(|j| binom[k][j] * self.derivs[j] * other.derivs[k - j]).sum())
            .collect();
        Self { point: self.point, derivs }
    }

    /// Checks that the jet describes a non-degenerate interior maximum.
    pub fn validate_phase(&self) -> Result<()> {
        if self.order() < 2 {
            return Err(Error::JetOrder { needed: 2, have: self.order() });
        }
        let d1 = self.derivs[1];
        let d2 = self.derivs[2];
        if !(d2 < T::zero()) {
            return Err(Error::Domain(format!("phase second derivative {d2} is not negative")));
        }
        let tol = T::epsilon().sqrt() * (T::one() + d2.abs());
        if d1.abs() > tol {
            return Err(Error::Domain(format!("phase first derivative {d1} is not zero at t0")));
        }
        Ok(())
    }
}

/// Expansion coefficients `c[0..=N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceCoefficients<T> {
    pub c: Vec<T>,
}

impl<T: Real> LaplaceCoefficients<T> {
    /// Partial sum `Σ_j c_j / ((2j)! x^{j+1/2})`.
    pub fn partial_sum(&self, x: T) -> T {
        let mut fact = T::one();
        let mut sum = T::zero();
        for (j, &c) in self.c.iter().enumerate() {
            if j > 0 {
                fact = fact * T::from_count(2 * j - 1) * T::from_count(2 * j);
            }
            sum = sum + c / (fact * x.powf(T::from_count(j) + T::lit(0.5)));
        }
        sum
    }
}

const ROOT_MAX_ITER: usize = 400;

/// Locates the interior maximum of a phase on the open interval `(lo, hi)`
/// from its first derivative `d1` by bracketed root refinement (bisection
/// with safeguarded secant steps). `d2` is only used to flag a non-concave
/// stationary point.
pub fn find_interior_max<T, D1, D2>(d1: D1, d2: D2, lo: T, hi: T) -> Result<T>
where
    T: Real,
    D1: Fn(T) -> T,
    D2: Fn(T) -> T,
{
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty bracket ({lo}, {hi})")));
    }
    let inset = (hi - lo) * T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    let (mut a, mut b) = (lo + inset, hi - inset);
    let (mut fa, mut fb) = (d1(a), d1(b));
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    let mut x = (a + b) * T::lit(0.5);
    let mut last_width = b - a;
    for iter in 0..ROOT_MAX_ITER {
        let width = b - a;
        // Secant inside the bracket; fall back to bisection when the bracket
        // stops shrinking fast enough.
        let secant = b - fb * (b - a) / (fb - fa);
        let use_bisection = iter % 3 == 2 || width > last_width * T::lit(0.5);
        x = if !use_bisection && secant > a && secant < b {
            secant
        } else {
            (a + b) * T::lit(0.5)
        };
        last_width = width;
        let fx = d1(x);
        if fx.abs() <= tol || width <= T::epsilon() * T::lit(4.0) * x.abs().max(T::one()) {
            break;
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    if !(d2(x) < T::zero()) {
        log::warn!("stationary point {x} is not a strict maximum (second derivative {})", d2(x));
    }
    Ok(x)
}

fn check_orders<T: Real>(n: usize, phase: &DerivativeJet<T>, amp: &DerivativeJet<T>) -> Result<()> {
    let need_phase = 2 * n + 2;
    if phase.order() < need_phase {
        return Err(Error::JetOrder { needed: need_phase, have: phase.order() });
    }
    if amp.order() < 2 * n {
        return Err(Error::JetOrder { needed: 2 * n, have: amp.order() });
    }
    phase.validate_phase()
}

/// Inner double sum of `c_N` without the `√(2π/|p''|)` factor, reusing a
/// precomputed Bell table of order at least `2N`.
fn coefficient_sum<T: Real>(
    n: usize,
    curvature: T,
    amp: &DerivativeJet<T>,
    bell: &[Vec<T>],
    binom: &[T],
) -> T {
    let mut total = T::zero();
    for k in 0..=2 * n {
        let q = amp.derivs[2 * n - k];
        if q == T::zero() {
            continue;
        }
        let mut inner = T::zero();
        for (m, &b) in bell[k].iter().enumerate().take(k + 1) {
            if b == T::zero() {
                continue;
            }
            inner = inner
                + b * odd_double_factorial_real::<T>(m + n) / curvature.powi((m + n) as i32);
        }
        total = total + binom[k] * q * inner;
    }
    total
}

fn scaled_phase_args<T: Real>(phase: &DerivativeJet<T>, count: usize) -> Vec<T> {
    (1..=count)
        .map(|i| phase.derivs[i + 2] / T::from_count((i + 1) * (i + 2)))
        .collect()
}

/// Coefficient `c_N` of the Laplace expansion.
pub fn laplace_coefficient<T: Real>(n: usize, phase: &DerivativeJet<T>, amp: &DerivativeJet<T>) -> Result<T> {
    check_orders(n, phase, amp)?;
    let curvature = phase.derivs[2].abs();
    let args = scaled_phase_args(phase, 2 * n);
    let bell = bell_table(2 * n, &args)?;
    let binom = binomial_rows::<T>(2 * n);
    Ok((T::TAU() / curvature).sqrt() * coefficient_sum(n, curvature, amp, &bell, &binom[2 * n]))
}

/// Coefficients `c_0, ..., c_N`.
pub fn laplace_coefficients<T: Real>(
    n: usize,
    phase: &DerivativeJet<T>,
    amp: &DerivativeJet<T>,
) -> Result<LaplaceCoefficients<T>> {
    check_orders(n, phase, amp)?;
    let curvature = phase.derivs[2].abs();
    let args = scaled_phase_args(phase, 2 * n);
    let bell = bell_table(2 * n, &args)?;
    let binom = binomial_rows::<T>(2 * n);
    let front = (T::TAU() / curvature).sqrt();
    let c = (0..=n)
        .map(|j| front * coefficient_sum(j, curvature, amp, &bell, &binom[2 * j]))
        .collect();
    Ok(LaplaceCoefficients { c })
}

/// Log of the order-`N` Laplace approximation
/// `exp(x p(t₀)) Σ_{j≤N} c_j / ((2j)! x^{j+1/2})`.
pub fn laplace_expand<T: Real>(x: T, phase: &DerivativeJet<T>, amp: &DerivativeJet<T>, n: usize) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("Laplace expansion needs x > 0, got {x}")));
    }
    let coeffs = laplace_coefficients(n, phase, amp)?;
    let sum = coeffs.partial_sum(x);
    if !(sum > T::zero()) {
        return Err(Error::NegativeExpansion(sum.as_f64()));
    }
    Ok(x * phase.value() + sum.ln())
}
