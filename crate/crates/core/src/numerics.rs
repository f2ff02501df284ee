//! Tolerances, compensated summation and rational reconstruction.

use std::ops::Mul;

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Exact rational used for weights, Welch constants and snapped roots.
pub type Rational = Ratio<i64>;

/// Double-double real (about 32 significant digits).
pub type Dd = TwoFloat;

/// Complex number over [`Dd`].
pub type ComplexDd = Complex<TwoFloat>;

/// Numerical tolerance policy shared across the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative tolerance for equality tests.
    pub rel_eq: f64,
    /// Largest denominator accepted by [`snap_to_rational`].
    pub snap_denom_max: u64,
    /// Decimal digits kept in quantized dedup keys.
    pub dedup_digits: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel_eq: 1e-9,
            snap_denom_max: 1_000_000,
            dedup_digits: 8,
        }
    }
}

impl Tolerance {
    pub fn new(rel_eq: f64, snap_denom_max: u64, dedup_digits: u32) -> Result<Self> {
        let tol = Tolerance {
            rel_eq,
            snap_denom_max,
            dedup_digits,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_eq.is_finite() && self.rel_eq > 0.0) {
            return Err(Error::InvalidInput(format!(
                "rel_eq must be positive, got {}",
                self.rel_eq
            )));
        }
        if self.snap_denom_max < 1 {
            return Err(Error::InvalidInput("snap_denom_max must be at least 1".into()));
        }
        // 10^15 is the last power of ten whose grid is finer than f64 spacing near 1.
        if !(1..=15).contains(&self.dedup_digits) {
            return Err(Error::InvalidInput(format!(
                "dedup_digits must lie in 1..=15, got {}",
                self.dedup_digits
            )));
        }
        Ok(())
    }

    /// Scale factor applied before rounding in quantized keys.
    pub fn key_scale(&self) -> f64 {
        10f64.powi(self.dedup_digits as i32)
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a stream, deterministic for a fixed input order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> Result<f64> {
    let acc: NeumaierSum = terms.into_iter().collect();
    let v = acc.value();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericRange(format!("compensated sum overflowed to {v}")))
    }
}

/// `|a - b| <= rel_eq * max(1, |a|, |b|)`.
pub fn approx_eq(a: f64, b: f64, tol: &Tolerance) -> bool {
    (a - b).abs() <= tol.rel_eq * 1f64.max(a.abs()).max(b.abs())
}

/// Smallest-denominator continued-fraction convergent of `x` within tolerance.
pub fn snap_to_rational(x: f64, tol: &Tolerance) -> Option<Rational> {
    if !x.is_finite() || x.abs() >= i64::MAX as f64 / 2.0 {
        return None;
    }
    let eps = tol.rel_eq * 1f64.max(x.abs());
    let qmax = tol.snap_denom_max as i128;

    // Convergents h_k / k_k built from the partial quotients of x.
    let (mut h_prev, mut h) = (1i128, x.floor() as i128);
    let (mut k_prev, mut k) = (0i128, 1i128);
    let mut frac = x - x.floor();
    loop {
        if k > qmax {
            return None;
        }
        if (x - h as f64 / k as f64).abs() <= eps {
            let num = i64::try_from(h).ok()?;
            let den = i64::try_from(k).ok()?;
            return Some(Rational::new(num, den));
        }
        if frac <= f64::EPSILON {
            return None;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        if a >= 1e15 {
            return None;
        }
        let a = a as i128;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
    }
}

/// Parses `p/q`, `p` or a decimal literal into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Ok(p) = s.parse::<i64>() {
        return Ok(Rational::from_integer(p));
    }
    // Terminating decimals such as `0.25` or `-1.5`.
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').ok_or_else(bad)?;
    if frac.len() > 17 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let den = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    let f: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int
        .checked_mul(den)
        .and_then(|v| v.checked_add(f))
        .ok_or_else(bad)?;
    Ok(Rational::new(if neg { -num } else { num }, den))
}

pub fn format_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `x^t` by repeated squaring over the bits of `t`.
#[inline]
pub fn pow_by_squaring<T: Copy + Mul<Output = T> + One>(x: T, t: u32) -> T {
    let mut base = x;
    let mut e = t;
    let mut acc = T::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        e >>= 1;
        if e > 0 {
            base = base * base;
        }
    }
    acc
}

/// Scalar trait that lets generator recipes be evaluated in f64 or double-double.
pub trait Real:
    num_traits::Float + num_traits::FloatConst + Send + Sync + std::fmt::Debug + 'static
{
    fn from_ratio(p: i64, q: i64) -> Self;

    /// `exp(2 pi i k / m)`.
    fn unit_root(k: i64, m: i64) -> Complex<Self>;

    fn to_f64_lossy(self) -> f64;

    fn from_f64_exact(x: f64) -> Self;

    /// Division at full working precision.
    fn quot(self, rhs: Self) -> Self;
}

/// Quarter turns are returned exactly; everything else goes through cos/sin.
fn unit_root_f64(k: i64, m: i64) -> Complex<f64> {
    let k = k.rem_euclid(m);
    if (4 * k) % m == 0 {
        return match 4 * k / m {
            0 => Complex::new(1.0, 0.0),
            1 => Complex::new(0.0, 1.0),
            2 => Complex::new(-1.0, 0.0),
            _ => Complex::new(0.0, -1.0),
        };
    }
    if (8 * k) % m == 0 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        return match 8 * k / m {
            1 => Complex::new(h, h),
            3 => Complex::new(-h, h),
            5 => Complex::new(-h, -h),
            _ => Complex::new(h, -h),
        };
    }
    let theta = std::f64::consts::TAU * k as f64 / m as f64;
    Complex::new(theta.cos(), theta.sin())
}

impl Real for f64 {
    fn from_ratio(p: i64, q: i64) -> Self {
        p as f64 / q as f64
    }

    fn unit_root(k: i64, m: i64) -> Complex<Self> {
        unit_root_f64(k, m)
    }

    fn to_f64_lossy(self) -> f64 {
        self
    }

    fn from_f64_exact(x: f64) -> Self {
        x
    }

    fn quot(self, rhs: Self) -> Self {
        self / rhs
    }
}

impl Real for TwoFloat {
    fn from_ratio(p: i64, q: i64) -> Self {
        dd_div(TwoFloat::from(p as f64), TwoFloat::from(q as f64))
    }

    fn unit_root(k: i64, m: i64) -> Complex<Self> {
        let k = k.rem_euclid(m);
        let start = unit_root_f64(k, m);
        if (8 * k) % m == 0 && (4 * k) % m == 0 {
            return Complex::new(TwoFloat::from(start.re), TwoFloat::from(start.im));
        }
        // twofloat's trig is only f64-accurate; polish with Newton on z^m = 1.
        let mut z = Complex::new(TwoFloat::from(start.re), TwoFloat::from(start.im));
        let one = Complex::new(TwoFloat::from(1.0), TwoFloat::zero());
        let mm = TwoFloat::from(m as f64);
        for _ in 0..3 {
            let zm1 = pow_by_squaring(z, (m - 1) as u32);
            let f = zm1 * z - one;
            let df = zm1 * Complex::new(mm, TwoFloat::zero());
            let n = df.norm_sqr();
            let step = f * df.conj();
            z -= Complex::new(dd_div(step.re, n), dd_div(step.im, n));
        }
        z
    }

    fn to_f64_lossy(self) -> f64 {
        f64::from(self)
    }

    fn from_f64_exact(x: f64) -> Self {
        TwoFloat::from(x)
    }

    fn quot(self, rhs: Self) -> Self {
        dd_div(self, rhs)
    }
}

/// Double-double quotient by three rounds of long division.
///
/// twofloat's own `/` is only about f64-accurate.
pub fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * TwoFloat::from(q1);
    let q2 = r.hi() / b.hi();
    let r = r - b * TwoFloat::from(q2);
    let q3 = r.hi() / b.hi();
    TwoFloat::from(q1) + TwoFloat::from(q2) + TwoFloat::from(q3)
}

pub fn lift_complex(z: Complex<f64>) -> ComplexDd {
    Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

pub fn lower_complex(z: ComplexDd) -> Complex<f64> {
    Complex::new(f64::from(z.re), f64::from(z.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_sums() {
        assert_eq!(compensated_sum([1.0, 2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(compensated_sum(std::iter::empty()).unwrap(), 0.0);
    }

    #[test]
    fn million_tenths() {
        // exact value: 10^6 * (1/10) = 100000
        let s = compensated_sum(std::iter::repeat_n(0.1, 1_000_000)).unwrap();
        let exact = (1_000_000i64 / 10) as f64;
        assert!((s - exact).abs() <= 1e-9 * exact);
        let naive: f64 = std::iter::repeat_n(0.1, 1_000_000).sum();
        assert!((s - exact).abs() < (naive - exact).abs());
    }

    #[test]
    fn overflow_reported() {
        assert!(matches!(
            compensated_sum([f64::MAX, f64::MAX]),
            Err(Error::NumericRange(_))
        ));
    }

    #[test]
    fn dd_division_is_full_precision() {
        for (p, q) in [(1.0, 3.0), (1.0, 7.0), (22.0, 6.0f64.sqrt())] {
            let (a, b) = (TwoFloat::from(p), TwoFloat::from(q));
            let back = dd_div(a, b) * b - a;
            assert!(f64::from(back).abs() < 1e-30, "{p}/{q}");
        }
        let s = TwoFloat::from(12.0).sqrt();
        let err = dd_div(TwoFloat::from(1.0), s) * s - TwoFloat::from(1.0);
        assert!(f64::from(err).abs() < 1e-30);
    }

    #[test]
    fn snapping_examples() {
        let tol = Tolerance::default();
        assert_eq!(snap_to_rational(0.2, &tol), Some(Rational::new(1, 5)));
        assert_eq!(snap_to_rational(0.7142857142857, &tol), Some(Rational::new(5, 7)));
        assert_eq!(snap_to_rational(0.35714285714, &tol), Some(Rational::new(5, 14)));
        assert_eq!(snap_to_rational(-1.5, &tol), Some(Rational::new(-3, 2)));
        assert_eq!(snap_to_rational(3.0, &tol), Some(Rational::from_integer(3)));
        // 355/113 misses by 2.7e-7; the next convergent lands inside 1e-9.
        assert_eq!(snap_to_rational(std::f64::consts::PI, &tol), Some(Rational::new(103993, 33102)));
        let coarse = Tolerance { snap_denom_max: 1000, ..tol };
        assert_eq!(snap_to_rational(std::f64::consts::PI, &coarse), None);
    }

    #[test]
    fn snapping_respects_denominator_cap() {
        let tol = Tolerance { snap_denom_max: 100, ..Tolerance::default() };
        assert_eq!(snap_to_rational(1.0 / 101.0, &tol), None);
        assert_eq!(snap_to_rational(1.0 / 99.0, &tol), Some(Rational::new(1, 99)));
    }

    #[test]
    fn exhaustive_small_fractions() {
        let tol = Tolerance::default();
        for q in (1..=10_000i64).step_by(97) {
            for p in -10_000i64..=10_000 {
                if p % 13 != 0 {
                    continue;
                }
                let r = Rational::new(p, q);
                assert_eq!(snap_to_rational(p as f64 / q as f64, &tol), Some(r));
            }
        }
    }

    #[test]
    fn approx_eq_examples() {
        let tol = Tolerance::default();
        assert!(approx_eq(1.0, 1.0, &tol));
        assert!(approx_eq(1.0, 1.0 + 1e-12, &tol));
        assert!(!approx_eq(1.0 / 3.0, 0.25, &tol));
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 10, 8).is_err());
        assert!(Tolerance::new(1e-9, 0, 8).is_err());
        assert!(Tolerance::new(1e-9, 10, 0).is_err());
        assert!(Tolerance::new(1e-9, 10, 8).is_ok());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("5/14").unwrap(), Rational::new(5, 14));
        assert_eq!(parse_rational("-3").unwrap(), Rational::from_integer(-3));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&Rational::new(-8, 5)), "-8/5");
        assert_eq!(format_rational(&Rational::from_integer(1)), "1");
    }

    #[test]
    fn squaring_power() {
        assert_eq!(pow_by_squaring(3.0f64, 0), 1.0);
        assert_eq!(pow_by_squaring(3.0f64, 5), 243.0);
        assert_eq!(pow_by_squaring(0.5f64, 12), 0.5f64.powi(12));
    }

    #[test]
    fn dd_roots_of_unity() {
        for m in [3i64, 5, 7, 8, 10, 12] {
            let z = TwoFloat::unit_root(1, m);
            let zm = pow_by_squaring(z, m as u32);
            let err = (zm.re - TwoFloat::from(1.0)).abs() + zm.im.abs();
            assert!(f64::from(err) < 1e-29, "m={m} err={err:?}");
        }
        // cos(2 pi / 5) = (sqrt5 - 1) / 4
        let c = TwoFloat::unit_root(1, 5).re;
        let exact = dd_div(TwoFloat::from(5.0).sqrt() - TwoFloat::from(1.0), TwoFloat::from(4.0));
        assert!(f64::from((c - exact).abs()) < 1e-30);
    }

    proptest! {
        #[test]
        fn snap_recovers_fractions(p in -10_000i64..=10_000, q in 1i64..=10_000) {
            let tol = Tolerance::default();
            prop_assert_eq!(snap_to_rational(p as f64 / q as f64, &tol), Some(Rational::new(p, q)));
        }

        #[test]
        fn sum_order_stability(mut xs in proptest::collection::vec(-1.0f64..1.0, 1..2000)) {
            let a = compensated_sum(xs.iter().copied()).unwrap();
            xs.reverse();
            let b = compensated_sum(xs.iter().copied()).unwrap();
            let scale = xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }
}
