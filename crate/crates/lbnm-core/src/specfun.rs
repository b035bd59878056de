//! Bessel functions of the first kind and Hankel functions of the first
//! kind, integer order, complex argument.
//!
//! `J_n` uses the ascending series where it converges without cancellation
//! and Miller's backward recurrence otherwise, normalized with the
//! generating-function identity `e^{∓iz} = J_0 + 2 Σ (∓i)^k J_k` (the sign
//! is chosen so no term is exponentially larger than the sum). The
//! recurrence carries a running power-of-ten scale, so values far below the
//! double range are still available in log form through [`bessel_j_log`]
//! and [`bessel_j_batch_log`].
//!
//! `H_0^{(1)}` and `H_1^{(1)}` come from `J + iY` with the logarithmic
//! series for `|z| ≤ 2`, and from a trapezoidal rule on Hankel's integral
//! representation elsewhere; higher orders follow by forward recurrence.
//! Computing `H^{(1)}` directly rather than as `J + iY` avoids the
//! `e^{2 Im z}` cancellation in the upper half plane.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::C64;

/// Largest `|n|` accepted.
pub const MAX_ORDER: i64 = 2000;
/// Largest `|z|` accepted.
pub const MAX_MODULUS: f64 = 5000.0;
/// Largest `|Im z|` accepted; beyond it `J_n` overflows.
pub const MAX_IMAG: f64 = 700.0;
/// Magnitudes below this are returned as exact zero.
pub const UNDERFLOW: f64 = 1e-300;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const LN_UNDERFLOW: f64 = -690.775_527_898_213_7;
const RESCALE: f64 = 1e250;
const LN_RESCALE: f64 = 575.646_273_248_511_4;
const INTEGRAL_MIN_MODULUS: f64 = 2.0;

/// A validated, finite complex argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexArg(C64);

impl ComplexArg {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(C64::new(re, im))
    }

    pub fn from_complex(z: C64) -> Result<Self> {
        if z.re.is_finite() && z.im.is_finite() {
            Ok(ComplexArg(z))
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn value(self) -> C64 {
        self.0
    }
}

impl TryFrom<C64> for ComplexArg {
    type Error = Error;
    fn try_from(z: C64) -> Result<Self> {
        Self::from_complex(z)
    }
}

/// A complex number stored as `(ln|w|, arg w)`.
///
/// Zero is `ln_abs = -inf`. Used to form ratios such as
/// `J_n(kr) / |J_n(kρ)|` whose numerator and denominator underflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln_abs: f64::NEG_INFINITY,
        arg: 0.0,
    };
    pub const ONE: LogValue = LogValue {
        ln_abs: 0.0,
        arg: 0.0,
    };

    pub fn from_complex(w: C64) -> Self {
        let m = w.norm();
        if m == 0.0 {
            Self::ZERO
        } else {
            LogValue {
                ln_abs: m.ln(),
                arg: w.arg(),
            }
        }
    }

    pub fn is_zero(self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    /// Converts back, flushing magnitudes below [`UNDERFLOW`] to zero.
    pub fn to_complex(self) -> C64 {
        if self.ln_abs < LN_UNDERFLOW {
            C64::new(0.0, 0.0)
        } else {
            C64::from_polar(self.ln_abs.exp(), self.arg)
        }
    }

    pub fn mul(self, other: LogValue) -> LogValue {
        LogValue {
            ln_abs: self.ln_abs + other.ln_abs,
            arg: self.arg + other.arg,
        }
    }
}

fn check_range(n: i64, z: C64) -> Result<()> {
    ComplexArg::from_complex(z)?;
    let modulus = z.norm();
    if n.abs() > MAX_ORDER || modulus > MAX_MODULUS || z.im.abs() > MAX_IMAG {
        return Err(Error::OutOfRange { order: n, modulus });
    }
    Ok(())
}

fn neg_if(sign_flip: bool, w: C64) -> C64 {
    if sign_flip {
        -w
    } else {
        w
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Whether the ascending series for `J_n(z)` has no cancellation: the
/// first term ratio `|z|²/(4(n+1))` is at most one half.
fn series_is_safe(n: u32, z: C64) -> bool {
    z.norm_sqr() * 0.25 <= 0.5 * (n as f64 + 1.0)
}

/// `Σ_m (-z²/4)^m / (m! (n+1)_m)`; the sum multiplying `(z/2)^n / n!`.
fn series_tail(n: u32, z: C64) -> C64 {
    let q = -(z * z) * 0.25;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for m in 1..2000u32 {
        term *= q / ((m as f64) * ((n + m) as f64));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn series_log(n: u32, z: C64) -> LogValue {
    if z.norm() == 0.0 {
        return if n == 0 { LogValue::ONE } else { LogValue::ZERO };
    }
    let half = z * 0.5;
    let prefix = LogValue {
        ln_abs: n as f64 * half.norm().ln() - ln_factorial(n),
        arg: n as f64 * half.arg(),
    };
    prefix.mul(LogValue::from_complex(series_tail(n, z)))
}

fn miller_start(n_max: u32, modulus: f64) -> usize {
    let base = (n_max as f64).max(modulus.ceil());
    (base + (12.0 * modulus.cbrt()).ceil() + 20.0) as usize
}

/// Backward recurrence for `J_0..=J_{n_max}` in log form. Requires `z ≠ 0`.
fn miller_log(n_max: u32, z: C64) -> Vec<LogValue> {
    let start = miller_start(n_max, z.norm());
    let keep = n_max as usize;
    let two_over_z = C64::new(2.0, 0.0) / z;
    // Normalization weights (∓i)^k for e^{∓iz}; upper sign when Im z ≥ 0.
    let upper = z.im >= 0.0;
    let unit = if upper {
        C64::new(0.0, -1.0)
    } else {
        C64::new(0.0, 1.0)
    };
    let mut weight = C64::new(1.0, 0.0);
    let mut weights_pow = [C64::new(0.0, 0.0); 4];
    for w in weights_pow.iter_mut() {
        *w = weight;
        weight *= unit;
    }

    let mut stored = vec![C64::new(0.0, 0.0); keep + 1];
    let mut scale = vec![0i32; keep + 1];
    let mut above = C64::new(0.0, 0.0);
    let mut current = C64::new(1e-30, 0.0);
    let mut level = 0i32;
    let mut sum = C64::new(0.0, 0.0);

    let mut n = start;
    if n <= keep {
        stored[n] = current;
    }
    sum += weights_pow[n % 4] * current * 2.0;
    while n > 0 {
        let mut below = two_over_z * (n as f64) * current - above;
        if below.norm() > RESCALE {
            below /= RESCALE;
            current /= RESCALE;
            sum /= RESCALE;
            level += 1;
        }
        above = current;
        current = below;
        n -= 1;
        if n <= keep {
            stored[n] = current;
            scale[n] = level;
        }
        let w = if n == 0 { 1.0 } else { 2.0 };
        sum += weights_pow[n % 4] * current * w;
    }

    let target = if upper {
        LogValue {
            ln_abs: z.im,
            arg: -z.re,
        }
    } else {
        LogValue {
            ln_abs: -z.im,
            arg: z.re,
        }
    };
    let norm = LogValue::from_complex(sum);
    stored
        .iter()
        .zip(scale.iter())
        .map(|(&f, &s)| {
            if f.norm() == 0.0 {
                return LogValue::ZERO;
            }
            let v = LogValue::from_complex(f);
            LogValue {
                ln_abs: v.ln_abs + target.ln_abs - norm.ln_abs
                    + LN_RESCALE * f64::from(s - level),
                arg: v.arg + target.arg - norm.arg,
            }
        })
        .collect()
}

/// `J_n(z)` in log form, no underflow.
pub fn bessel_j_log(n: i64, z: C64) -> Result<LogValue> {
    check_range(n, z)?;
    let m = n.unsigned_abs() as u32;
    let mut v = if z.norm() == 0.0 || series_is_safe(m, z) {
        series_log(m, z)
    } else {
        miller_log(m, z)[m as usize]
    };
    if n < 0 && m % 2 == 1 && !v.is_zero() {
        v.arg += PI;
    }
    Ok(v)
}

/// `J_n(z)` for integer `n`, `|n| ≤ 2000`, `|z| ≤ 5000`.
///
/// Negative orders go through `J_{-n} = (-1)^n J_n`, so the reflection is
/// bitwise exact.
pub fn bessel_j(n: i64, z: C64) -> Result<C64> {
    check_range(n, z)?;
    let m = n.unsigned_abs() as u32;
    let v = if z.norm() == 0.0 || series_is_safe(m, z) {
        series_log(m, z)
    } else {
        miller_log(m, z)[m as usize]
    };
    Ok(neg_if(n < 0 && m % 2 == 1, v.to_complex()))
}

/// `J_0(z) ..= J_{n_max}(z)` in log form.
pub fn bessel_j_batch_log(n_max: usize, z: C64) -> Result<Vec<LogValue>> {
    check_range(n_max as i64, z)?;
    let n_max = n_max as u32;
    if z.norm() == 0.0 || series_is_safe(0, z) {
        Ok((0..=n_max).map(|n| series_log(n, z)).collect())
    } else {
        Ok(miller_log(n_max, z))
    }
}

/// `J_0(z) ..= J_{n_max}(z)`.
pub fn bessel_j_batch(n_max: usize, z: C64) -> Result<Vec<C64>> {
    Ok(bessel_j_batch_log(n_max, z)?
        .into_iter()
        .map(LogValue::to_complex)
        .collect())
}

/// `J_n'(z) = (n/z) J_n(z) - J_{n+1}(z)`, with the limits at `z = 0`.
pub fn bessel_j_prime(n: i64, z: C64) -> Result<C64> {
    check_range(n, z)?;
    if z.norm() == 0.0 {
        return Ok(match n {
            1 => C64::new(0.5, 0.0),
            -1 => C64::new(-0.5, 0.0),
            _ => C64::new(0.0, 0.0),
        });
    }
    if n == 0 {
        return Ok(-bessel_j(1, z)?);
    }
    let jn = bessel_j(n, z)?;
    let jn1 = bessel_j(n + 1, z)?;
    Ok(jn * (n as f64) / z - jn1)
}

/// `Y_0, Y_1` from the ascending series with the logarithmic term.
/// Only used for `|z| ≤ 2`.
fn bessel_y01_series(z: C64) -> (C64, C64) {
    let half = z * 0.5;
    let q = -(half * half);
    let log_term = half.ln() + EULER_GAMMA;
    let (j0, j1) = (series_tail(0, z), half * series_tail(1, z));

    // Y_0 = (2/π)[(ln(z/2)+γ) J_0 + Σ_{m≥1} (-1)^{m+1} H_m (z²/4)^m/(m!)²]
    let mut term = C64::new(1.0, 0.0);
    let mut harmonic = 0.0;
    let mut s0 = C64::new(0.0, 0.0);
    for m in 1..200u32 {
        term *= q / ((m * m) as f64);
        harmonic += 1.0 / m as f64;
        let add = -term * harmonic;
        s0 += add;
        if add.norm() <= 1e-17 * s0.norm().max(1e-300) {
            break;
        }
    }
    let y0 = (log_term * j0 + s0) * (2.0 / PI);

    // Y_1 = (2/π) ln(z/2) J_1 - 2/(πz)
    //       - (1/π) Σ_{m≥0} (-1)^m (ψ(m+1)+ψ(m+2)) (z/2)^{2m+1}/(m!(m+1)!)
    let mut term = half;
    let mut h_m = 0.0;
    let mut s1 = C64::new(0.0, 0.0);
    for m in 0..200u32 {
        if m > 0 {
            term *= q / ((m * (m + 1)) as f64);
            h_m += 1.0 / m as f64;
        }
        let h_m1 = h_m + 1.0 / (m as f64 + 1.0);
        let add = term * (h_m + h_m1 - 2.0 * EULER_GAMMA);
        s1 += add;
        if add.norm() <= 1e-17 * s1.norm().max(1e-300) {
            break;
        }
    }
    let y1 = j1 * half.ln() * (2.0 / PI) - C64::new(2.0 / PI, 0.0) / z - s1 / PI;
    (y0, y1)
}

/// `H_0^{(1)}, H_1^{(1)}` from
/// `H_ν(z) = (2/πz)^{1/2} e^{i(z-νπ/2-π/4)} / Γ(ν+1/2) ∫_0^∞ e^{-u} u^{ν-1/2} (1 + iu/2z)^{ν-1/2} du`
/// with `u = s²` and the trapezoidal rule on the whole line.
fn hankel01_integral(z: C64) -> (C64, C64) {
    const STEP: f64 = 0.125;
    const NODES: usize = 56;
    let c = C64::new(0.0, 1.0) / (z * 2.0);
    let mut sum0 = C64::new(1.0, 0.0);
    let mut sum1 = C64::new(0.0, 0.0);
    for j in 1..=NODES {
        let s2 = (j as f64 * STEP).powi(2);
        let w = (-s2).exp();
        let g = (c * s2 + 1.0).sqrt();
        sum0 += g.inv() * (2.0 * w);
        sum1 += g * (2.0 * w * s2);
    }
    let amp = (C64::new(2.0 / PI, 0.0) / z).sqrt();
    let sqrt_pi = PI.sqrt();
    let i = C64::new(0.0, 1.0);
    let h0 = amp * (i * (z - FRAC_PI_4)).exp() * sum0 * (STEP / sqrt_pi);
    let h1 = amp * (i * (z - 3.0 * FRAC_PI_4)).exp() * sum1 * (2.0 * STEP / sqrt_pi);
    (h0, h1)
}

fn hankel01(z: C64) -> (C64, C64) {
    if z.norm() <= INTEGRAL_MIN_MODULUS {
        let (y0, y1) = bessel_y01_series(z);
        let j0 = series_tail(0, z);
        let j1 = z * 0.5 * series_tail(1, z);
        let i = C64::new(0.0, 1.0);
        (j0 + i * y0, j1 + i * y1)
    } else {
        hankel01_integral(z)
    }
}

fn check_hankel(n: i64, z: C64) -> Result<()> {
    check_range(n, z)?;
    if z.norm() == 0.0 {
        return Err(Error::Singular("Hankel function at z = 0"));
    }
    if z.im < 0.0 {
        return Err(Error::OutOfRange {
            order: n,
            modulus: z.norm(),
        });
    }
    Ok(())
}

/// `H_0^{(1)}(z) ..= H_{n_max}^{(1)}(z)` for `Im z ≥ 0`, `z ≠ 0`.
///
/// Fails with `OutOfRange` if the forward recurrence overflows.
pub fn hankel1_batch(n_max: usize, z: C64) -> Result<Vec<C64>> {
    check_hankel(n_max as i64, z)?;
    let (h0, h1) = hankel01(z);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(h0);
    if n_max >= 1 {
        out.push(h1);
    }
    let two_over_z = C64::new(2.0, 0.0) / z;
    for n in 1..n_max {
        let next = two_over_z * (n as f64) * out[n] - out[n - 1];
        if !(next.re.is_finite() && next.im.is_finite()) {
            return Err(Error::OutOfRange {
                order: n as i64 + 1,
                modulus: z.norm(),
            });
        }
        out.push(next);
    }
    Ok(out)
}

/// `H_n^{(1)}(z) = J_n(z) + i Y_n(z)`.
pub fn hankel1(n: i64, z: C64) -> Result<C64> {
    check_hankel(n, z)?;
    let m = n.unsigned_abs() as usize;
    let h = hankel1_batch(m, z)?[m];
    Ok(neg_if(n < 0 && m % 2 == 1, h))
}
