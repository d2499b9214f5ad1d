//! Special functions: log-gamma, the Gauss and generalized hypergeometric families,
//! the connection coefficients and the Huber-kernel building blocks.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::{HpComplex, PrecisionContext};
use crate::quad::{integrate, QuadOptions};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;
const SERIES_EPS: f64 = 1e-17;
const SERIES_MAX_TERMS: usize = 20_000;
/// Bits of cancellation tolerated in an f64 series before it is redone in MPFR.
const CANCELLATION_BITS: f64 = 10.0;

/// B_{2k} / (2k(2k-1)) for k = 1..10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// B_{2k} / (2k) for k = 1..8.
const DIGAMMA_ASYM: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn fmt_c(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn near_nonpositive_integer(z: C64, tol: f64) -> bool {
    z.re < 0.5 && z.im.abs() <= tol && (z.re - z.re.round()).abs() <= tol
}

fn check_finite(z: C64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what}: non-finite argument {}", fmt_c(z))))
    }
}

// ---------------------------------------------------------------------------
// log-gamma and digamma, double precision

fn stirling_shifted(z: C64) -> C64 {
    let mut shift = C64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 10.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut pw = inv;
    let mut series = C64::new(0.0, 0.0);
    for k in STIRLING {
        series += pw * k;
        pw *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift
}

/// ln(sin(pi z)) continuous on the closed upper half-plane.
fn ln_sin_pi_upper(z: C64) -> C64 {
    let i = c(0.0, 1.0);
    let e = (2.0 * PI * i * z).exp();
    -i * PI * z + c(-std::f64::consts::LN_2, FRAC_PI_2) + (1.0 - e).ln()
}

/// Principal-branch log Gamma.
pub fn log_gamma(z: C64) -> Result<C64> {
    check_finite(z, "log_gamma")?;
    if near_nonpositive_integer(z, 1e-14) {
        return Err(Error::Pole {
            function: "log_gamma",
            at: fmt_c(z),
        });
    }
    if z.re >= 0.5 {
        return Ok(stirling_shifted(z));
    }
    if z.im < 0.0 {
        return Ok(log_gamma(z.conj())?.conj());
    }
    Ok(LN_PI - ln_sin_pi_upper(z) - stirling_shifted(1.0 - z))
}

/// log Gamma of a real argument, returning the real part (log |Gamma|).
pub fn log_gamma_real(x: f64) -> Result<f64> {
    Ok(log_gamma(c(x, 0.0))?.re)
}

/// Digamma psi(z).
pub fn digamma(z: C64) -> Result<C64> {
    check_finite(z, "digamma")?;
    if near_nonpositive_integer(z, 1e-14) {
        return Err(Error::Pole {
            function: "digamma",
            at: fmt_c(z),
        });
    }
    if z.re < 0.5 {
        return Ok(digamma(1.0 - z)? - PI / (PI * z).tan());
    }
    let mut shift = C64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 10.0 {
        shift += w.inv();
        w += 1.0;
    }
    let inv2 = (w * w).inv();
    let mut pw = inv2;
    let mut series = C64::new(0.0, 0.0);
    for k in DIGAMMA_ASYM {
        series += pw * k;
        pw *= inv2;
    }
    Ok(w.ln() - 0.5 / w - series - shift)
}

/// 1/Gamma(z), exactly zero at the poles of Gamma.
pub fn recip_gamma(z: C64) -> Result<C64> {
    Ok(ln_recip_gamma(z)?.map_or(C64::new(0.0, 0.0), |l| l.exp()))
}

/// -log Gamma(z), or `None` where 1/Gamma vanishes.
fn ln_recip_gamma(z: C64) -> Result<Option<C64>> {
    if near_nonpositive_integer(z, 1e-13) {
        return Ok(None);
    }
    Ok(Some(-log_gamma(z)?))
}

/// exp(sum of logs) where any vanishing reciprocal factor zeroes the product.
fn exp_log_sum(parts: &[Option<C64>]) -> C64 {
    if parts.iter().any(Option::is_none) {
        return C64::new(0.0, 0.0);
    }
    parts.iter().flatten().sum::<C64>().exp()
}

// ---------------------------------------------------------------------------
// log-gamma, arbitrary precision

fn bernoulli_cache() -> &'static Mutex<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![Rational::from(1)]))
}

/// Bernoulli number B_n (with B_1 = -1/2).
pub fn bernoulli(n: usize) -> Rational {
    let mut b = bernoulli_cache().lock().expect("bernoulli cache poisoned");
    while b.len() <= n {
        let m = b.len();
        // B_m = -1/(m+1) * sum_{j<m} C(m+1, j) B_j
        let mut binom = Integer::from(1);
        let mut acc = Rational::new();
        for (j, bj) in b.iter().enumerate() {
            acc += Rational::from(bj * &binom);
            binom *= (m + 1 - j) as u64;
            binom /= (j + 1) as u64;
        }
        acc /= -((m + 1) as i64);
        b.push(acc);
    }
    b[n].clone()
}

fn hp_c(p: u32, re: &Float, im: &Float) -> HpComplex {
    HpComplex::new(Float::with_val(p, re), Float::with_val(p, im))
}

fn hp_pole_check(z: &HpComplex, ctx: &PrecisionContext) -> Result<()> {
    let tol = ctx.tol_eq();
    let re = z.re.to_f64();
    if re <= tol {
        let rounded = Float::with_val(z.prec(), z.re.round_ref());
        let dist = Float::with_val(z.prec(), &z.re - &rounded).abs().to_f64();
        if dist <= tol && z.im.clone().abs().to_f64() <= tol {
            return Err(Error::Pole {
                function: "log_gamma",
                at: format!("{}", rounded.to_f64()),
            });
        }
    }
    Ok(())
}

/// log Gamma by upward recurrence and Stirling's series; valid away from poles in any half-plane.
pub fn log_gamma_hp_recurrence(z: &HpComplex, ctx: &PrecisionContext) -> Result<HpComplex> {
    hp_pole_check(z, ctx)?;
    let bits = ctx.bits();
    let p = bits + 32;
    let target = 0.2 * bits as f64 + 10.0;
    let mut w = hp_c(p, &z.re, &z.im);
    let mut shift = HpComplex::real(Float::with_val(p, 0));
    let one = Float::with_val(p, 1);
    while w.re.to_f64() < target {
        shift = shift.add(&w.ln());
        w.re += &one;
    }
    let lnw = w.ln();
    let half = Float::with_val(p, 0.5);
    let mut wm = w.clone();
    wm.re -= &half;
    let ln2pi = Float::with_val(p, rug::float::Constant::Pi) * 2u32;
    let mut sum = wm.mul(&lnw).sub(&w);
    sum.re += ln2pi.ln() / 2u32;
    let inv = w.recip();
    let inv2 = inv.mul(&inv);
    let mut pw = inv;
    let eps = Float::with_val(p, Float::u_exp(1, -(bits as i32) - 16));
    for k in 1..=600usize {
        let b = bernoulli(2 * k);
        let coef = Float::with_val(p, &b) / ((2 * k * (2 * k - 1)) as u64);
        let term = pw.scale(&coef);
        sum = sum.add(&term);
        if term.abs() < eps {
            let out = sum.sub(&shift);
            return Ok(hp_c(bits, &out.re, &out.im));
        }
        pw = pw.mul(&inv2);
    }
    Err(Error::NonConvergence {
        what: "log_gamma_hp",
        detail: "Stirling series did not reach working precision".into(),
    })
}

/// Principal-branch log Gamma at context precision, reflecting for Re z < 1/2.
pub fn log_gamma_hp(z: &HpComplex, ctx: &PrecisionContext) -> Result<HpComplex> {
    hp_pole_check(z, ctx)?;
    let bits = ctx.bits();
    let p = bits + 32;
    if z.re >= 0.5 {
        return log_gamma_hp_recurrence(z, ctx);
    }
    if z.im.is_sign_negative() && !z.im.is_zero() {
        let conj = HpComplex::new(z.re.clone(), -z.im.clone());
        let r = log_gamma_hp(&conj, ctx)?;
        return Ok(HpComplex::new(r.re, -r.im));
    }
    let zz = hp_c(p, &z.re, &z.im);
    let pi = Float::with_val(p, rug::float::Constant::Pi);
    // ln sin(pi z) = -i pi z + ln(1/2) + i pi/2 + ln(1 - e^{2 pi i z})
    let i_pi_z = HpComplex::new(-Float::with_val(p, &zz.im * &pi), Float::with_val(p, &zz.re * &pi));
    let e = i_pi_z.scale(&Float::with_val(p, 2)).exp();
    let one_minus = HpComplex::new(Float::with_val(p, 1) - &e.re, -e.im.clone());
    let mut ln_sin = i_pi_z.neg().add(&one_minus.ln());
    ln_sin.re -= Float::with_val(p, 2).ln();
    ln_sin.im += Float::with_val(p, &pi / 2u32);
    let reflected = HpComplex::new(Float::with_val(p, 1) - &zz.re, -zz.im.clone());
    let wide = PrecisionContext::new(p)?;
    let lg = log_gamma_hp_recurrence(&reflected, &wide)?;
    let mut out = ln_sin.add(&lg).neg();
    out.re += pi.ln();
    Ok(hp_c(bits, &out.re, &out.im))
}

/// Gamma(z) Gamma(1-z) sin(pi z) / pi - 1 using the recurrence route for both factors.
pub fn reflection_defect_hp(z: &HpComplex, ctx: &PrecisionContext) -> Result<Float> {
    let p = ctx.bits() + 32;
    let wide = PrecisionContext::new(p)?;
    let zz = hp_c(p, &z.re, &z.im);
    let w = HpComplex::new(Float::with_val(p, 1) - &zz.re, -zz.im.clone());
    let l = log_gamma_hp_recurrence(&zz, &wide)?.add(&log_gamma_hp_recurrence(&w, &wide)?);
    let pi = Float::with_val(p, rug::float::Constant::Pi);
    let s = zz.scale(&pi).sin();
    let mut v = l.exp().mul(&s);
    v.re /= &pi;
    v.im /= &pi;
    v.re -= 1u32;
    Ok(Float::with_val(ctx.bits(), v.abs()))
}

/// Both sides of 2 sin^2(pi (1-s)/2) = 1 - i sinh(pi t) at s = 1/2 + i t.
pub fn signs_identity_hp(t: f64, ctx: &PrecisionContext) -> (HpComplex, HpComplex) {
    let p = ctx.bits() + 16;
    let pi = Float::with_val(p, rug::float::Constant::Pi);
    let tt = Float::with_val(p, t);
    // pi (1 - s) / 2 = pi/4 - i pi t / 2
    let arg = HpComplex::new(Float::with_val(p, &pi / 4u32), -Float::with_val(p, &pi * &tt) / 2u32);
    let s = arg.sin();
    let lhs = s.mul(&s).scale(&Float::with_val(p, 2));
    let sh = Float::with_val(p, &pi * &tt).sinh();
    let rhs = HpComplex::new(Float::with_val(p, 1), -sh);
    (hp_c(ctx.bits(), &lhs.re, &lhs.im), hp_c(ctx.bits(), &rhs.re, &rhs.im))
}

// ---------------------------------------------------------------------------
// hypergeometric series

fn nonpositive_integer_param(x: C64) -> bool {
    near_nonpositive_integer(x, 1e-12)
}

fn series_pfq(num: &[C64], den: &[C64], z: C64, what: &'static str) -> Result<C64> {
    if z == C64::new(0.0, 0.0) {
        return Ok(c(1.0, 0.0));
    }
    let scale: f64 = num.iter().chain(den).map(|p| p.norm()).sum();
    let mut term = c(1.0, 0.0);
    let mut sum = c(1.0, 0.0);
    let mut peak: f64 = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let mut ratio = z / (kf + 1.0);
        for &a in num {
            ratio *= a + kf;
        }
        for &b in den {
            ratio /= b + kf;
        }
        term *= ratio;
        sum += term;
        peak = peak.max(term.norm());
        if term.norm() == 0.0 {
            break;
        }
        if !sum.re.is_finite() || !sum.im.is_finite() {
            return Err(Error::NonConvergence {
                what,
                detail: format!("series at z = {} overflowed", fmt_c(z)),
            });
        }
        if kf + 1.0 > 2.0 * scale && ratio.norm() < 1.0 && term.norm() <= SERIES_EPS * sum.norm() {
            let lost = (peak / sum.norm()).log2();
            if lost > CANCELLATION_BITS {
                return series_pfq_hp(num, den, z, lost, what);
            }
            return Ok(sum);
        }
    }
    if term.norm() == 0.0 {
        return Ok(sum);
    }
    Err(Error::NonConvergence {
        what,
        detail: format!("series at z = {} did not converge", fmt_c(z)),
    })
}

/// The same series at enough MPFR precision to absorb `lost` bits of cancellation.
fn series_pfq_hp(num: &[C64], den: &[C64], z: C64, lost: f64, what: &'static str) -> Result<C64> {
    let prec = 64 + lost.ceil().min(1e5) as u32 + 32;
    let ctx = PrecisionContext::new(prec)?;
    let hp = |v: C64| HpComplex::from_f64(&ctx, v.re, v.im);
    let zh = hp(z);
    let one = HpComplex::from_f64(&ctx, 1.0, 0.0);
    let mut term = one.clone();
    let mut sum = one;
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32)));
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let inv = Float::with_val(prec, 1) / (kf + 1.0);
        let mut ratio = zh.scale(&inv);
        for &a in num {
            ratio = ratio.mul(&hp(a + kf));
        }
        for &b in den {
            ratio = ratio.div(&hp(b + kf));
        }
        term = term.mul(&ratio);
        sum = sum.add(&term);
        if term.re.is_zero() && term.im.is_zero() {
            return Ok(sum.to_c64());
        }
        let small = Float::with_val(prec, &eps * sum.abs());
        if kf > 2.0 * num.iter().chain(den).map(|p| p.norm()).sum::<f64>() && term.abs() <= small {
            return Ok(sum.to_c64());
        }
    }
    Err(Error::NonConvergence {
        what,
        detail: format!("extended-precision series at z = {} did not converge", fmt_c(z)),
    })
}

/// Gauss hypergeometric function with continuation to the negative real axis.
pub fn gauss_2f1(a: C64, b: C64, cc: C64, z: C64) -> Result<C64> {
    if nonpositive_integer_param(cc) {
        return Err(Error::Pole {
            function: "gauss_2f1",
            at: format!("c = {}", fmt_c(cc)),
        });
    }
    if z == C64::new(0.0, 0.0) {
        return Ok(c(1.0, 0.0));
    }
    if z.norm() <= 0.5 {
        return series_pfq(&[a, b], &[cc], z, "gauss_2f1");
    }
    let real_negative = z.im == 0.0 && z.re < 0.0;
    if real_negative && z.re >= -2.0 {
        return pfaff(a, b, cc, z);
    }
    if real_negative {
        return connection_inverse(a, b, cc, z);
    }
    if z.norm() < 1.0 {
        let w = z / (z - 1.0);
        if w.norm() < z.norm() {
            return pfaff(a, b, cc, z);
        }
        return series_pfq(&[a, b], &[cc], z, "gauss_2f1");
    }
    Err(Error::NonConvergence {
        what: "gauss_2f1",
        detail: format!("argument {} outside the supported region", fmt_c(z)),
    })
}

fn pfaff(a: C64, b: C64, cc: C64, z: C64) -> Result<C64> {
    let w = z / (z - 1.0);
    let inner = series_pfq(&[a, cc - b], &[cc], w, "gauss_2f1")?;
    Ok((1.0 - z).powc(-a) * inner)
}

/// 1/z connection for real z < -2.
fn connection_inverse(a: C64, b: C64, cc: C64, z: C64) -> Result<C64> {
    let d = a - b;
    let near_int = (d.re - d.re.round()).abs() < 1e-9 && d.im.abs() < 1e-9;
    if near_int && d.re.round() == 0.0 {
        return degenerate_equal(a, cc, z);
    }
    if near_int {
        let w = z / (z - 1.0);
        if w.norm() <= 0.95 {
            return pfaff(a, b, cc, z);
        }
        return Err(Error::NonConvergence {
            what: "gauss_2f1",
            detail: "integer a - b with |z| too large for the Pfaff route".into(),
        });
    }
    let mz = -z;
    let inv = z.inv();
    let lg_c = log_gamma(cc)?;
    let t1 = {
        let coef = exp_log_sum(&[Some(lg_c + log_gamma(b - a)?), ln_recip_gamma(b)?, ln_recip_gamma(cc - a)?]);
        coef * mz.powc(-a) * series_pfq(&[a, a - cc + 1.0], &[a - b + 1.0], inv, "gauss_2f1")?
    };
    let t2 = {
        let coef = exp_log_sum(&[Some(lg_c + log_gamma(a - b)?), ln_recip_gamma(a)?, ln_recip_gamma(cc - b)?]);
        coef * mz.powc(-b) * series_pfq(&[b, b - cc + 1.0], &[b - a + 1.0], inv, "gauss_2f1")?
    };
    Ok(t1 + t2)
}

/// F(a, a; c; z) for real z < -2 (logarithmic case of the 1/z connection).
fn degenerate_equal(a: C64, cc: C64, z: C64) -> Result<C64> {
    let mz = -z;
    let inv = z.inv();
    let ln_mz = mz.ln();
    let pre = exp_log_sum(&[Some(log_gamma(cc)?), ln_recip_gamma(a)?, ln_recip_gamma(cc - a)?]) * mz.powc(-a);
    let mut poch = c(1.0, 0.0);
    let mut sum = c(0.0, 0.0);
    let a1 = 1.0 - cc + a;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        if k > 0 {
            poch *= (a + kf - 1.0) * (a1 + kf - 1.0) / (kf * kf) * inv;
        }
        let psi_sum = 2.0 * digamma(c(kf + 1.0, 0.0))? - digamma(a + kf)? - digamma_or_reflect(cc - a - kf)?;
        let term = poch * (ln_mz + psi_sum);
        sum += term;
        if poch.norm() == 0.0 || (k > 4 && term.norm() <= SERIES_EPS * sum.norm()) {
            return Ok(pre * sum);
        }
    }
    Err(Error::NonConvergence {
        what: "gauss_2f1",
        detail: "logarithmic connection series".into(),
    })
}

/// psi(x) where x may hit a pole; the pole's contribution is then multiplied by a zero
/// reciprocal-gamma prefactor, so a large finite stand-in is harmless.
fn digamma_or_reflect(x: C64) -> Result<C64> {
    match digamma(x) {
        Err(Error::Pole { .. }) => Ok(c(0.0, 0.0)),
        other => other,
    }
}

/// Generalized 3F2 by direct series (|z| < 1).
pub fn hyp_3f2(a1: C64, a2: C64, a3: C64, b1: C64, b2: C64, z: C64) -> Result<C64> {
    for b in [b1, b2] {
        if nonpositive_integer_param(b) {
            return Err(Error::Pole {
                function: "hyp_3f2",
                at: format!("denominator parameter {}", fmt_c(b)),
            });
        }
    }
    if z.norm() >= 1.0 {
        return Err(Error::NonConvergence {
            what: "hyp_3f2",
            detail: format!("|z| = {} outside the series disc", z.norm()),
        });
    }
    series_pfq(&[a1, a2, a3], &[b1, b2], z, "hyp_3f2")
}

// ---------------------------------------------------------------------------
// connection coefficients and F_s

/// -1/((s-2)(s+1)).
pub fn coeff_gamma1(s: C64) -> Result<C64> {
    let den = (s - 2.0) * (s + 1.0);
    if den.norm() < 1e-14 {
        return Err(Error::Pole {
            function: "coeff_gamma1",
            at: fmt_c(s),
        });
    }
    Ok(-den.inv())
}

/// pi Gamma(1-s/2) Gamma(1/2-s) / ((1-s) Gamma((1-s)/2)^3).
pub fn coeff_gamma2(s: C64) -> Result<C64> {
    if (s - 1.0).norm() < 1e-14 {
        return Err(Error::Pole {
            function: "coeff_gamma2",
            at: fmt_c(s),
        });
    }
    let lg = log_gamma(1.0 - s / 2.0)
        .and_then(|x| Ok(x + log_gamma(0.5 - s)?))
        .map_err(|_| Error::Pole {
            function: "coeff_gamma2",
            at: fmt_c(s),
        })?;
    let rg = ln_recip_gamma((1.0 - s) / 2.0)?.map(|l| 3.0 * l);
    Ok(PI * exp_log_sum(&[Some(lg), rg]) / (1.0 - s))
}

/// F(s, u) = u^{1/2-s} 2F1((s+1)/2, (s-1)/2; s+1/2; -u^{-2}).
pub fn f_su(s: C64, u: f64) -> Result<C64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::InvalidInput(format!("f_su needs u > 0, got {u}")));
    }
    let f = gauss_2f1((s + 1.0) / 2.0, (s - 1.0) / 2.0, s + 0.5, c(-1.0 / (u * u), 0.0))?;
    Ok(c(u, 0.0).powc(0.5 - s) * f)
}

fn near_exceptional(s: C64, tol: f64) -> bool {
    [0.0, 0.5, 1.0].iter().any(|&v| (s - v).norm() <= tol)
}

/// 3F2(1, 3/2, 1/2; 2 - s/2, (3+s)/2; z) for real z in [-2, 0) through its Euler integral.
fn connection_3f2(s: C64, z: f64) -> Result<C64> {
    if z > -0.9 {
        return hyp_3f2(c(1.0, 0.0), c(1.5, 0.0), c(0.5, 0.0), 2.0 - s / 2.0, (3.0 + s) / 2.0, c(z, 0.0));
    }
    let cb = 2.0 - s / 2.0;
    let pre = (log_gamma((3.0 + s) / 2.0)? - log_gamma(1.0 + s / 2.0)?).exp() / PI.sqrt();
    let err = std::cell::Cell::new(None);
    let r = integrate(
        |phi: f64| {
            let sn = phi.sin();
            let cs = phi.cos();
            if cs <= 0.0 {
                return c(0.0, 0.0);
            }
            let w = c(cs, 0.0).powc(s + 1.0) * 2.0;
            match gauss_2f1(c(1.0, 0.0), c(1.5, 0.0), cb, c(z * sn * sn, 0.0)) {
                Ok(f) => w * f,
                Err(e) => {
                    err.set(Some(e.to_string()));
                    c(0.0, 0.0)
                }
            }
        },
        0.0,
        FRAC_PI_2,
        &QuadOptions::new(1e-14, 1e-13),
    )?;
    if let Some(e) = err.take() {
        return Err(Error::NonConvergence {
            what: "f_s_eval",
            detail: e,
        });
    }
    Ok(pre * r.value)
}

/// Series branch of F_s: sqrt(y-1) 3F2(1, s/2, (1-s)/2; 3/2, 1/2; 1-y).
pub fn f_s_series(s: C64, y: f64) -> Result<C64> {
    let v = hyp_3f2(c(1.0, 0.0), s / 2.0, (1.0 - s) / 2.0, c(1.5, 0.0), c(0.5, 0.0), c(1.0 - y, 0.0))?;
    Ok((y - 1.0).sqrt() * v)
}

/// Connection branch of F_s at y = A^2 + 1.
pub fn f_s_expansion(s: C64, y: f64, tol_eq: f64) -> Result<C64> {
    if near_exceptional(s, tol_eq) {
        return Err(Error::BranchGap(format!(
            "s = {} is an exceptional value of the connection formula",
            fmt_c(s)
        )));
    }
    let a = (y - 1.0).sqrt();
    let head = -coeff_gamma1(s)? / a * connection_3f2(s, -1.0 / (a * a))?;
    let sa = a.sqrt();
    let s2 = 1.0 - s;
    Ok(head + coeff_gamma2(s)? * sa * f_su(s, a)? + coeff_gamma2(s2)? * sa * f_su(s2, a)?)
}

/// F_s(y) for y >= 1, switching from the series to the connection branch at |1-y| = 1/2.
pub fn f_s_eval(s: C64, y: f64, ctx: &PrecisionContext) -> Result<C64> {
    if !(y >= 1.0) || !y.is_finite() {
        return Err(Error::InvalidInput(format!("f_s_eval needs y >= 1, got {y}")));
    }
    if y == 1.0 {
        return Ok(c(0.0, 0.0));
    }
    if y - 1.0 <= 0.5 {
        f_s_series(s, y)
    } else {
        f_s_expansion(s, y, ctx.tol_eq())
    }
}

/// Real-valued F_s for s on the critical line or in (1/2, 1]; the imaginary part is checked.
pub fn f_s_real(s: C64, y: f64, ctx: &PrecisionContext) -> Result<f64> {
    let v = f_s_eval(s, y, ctx)?;
    let tol = ctx.tol_quad() * v.re.abs().max(1.0);
    if v.im.abs() > tol {
        return Err(Error::NonConvergence {
            what: "f_s_eval",
            detail: format!("imaginary part {:e} exceeds tolerance at y = {y}", v.im),
        });
    }
    Ok(v.re)
}

/// G(s) = (2pi)^{3/2} s^{-1/2} Gamma(1-s/2) Gamma(1/2-s) Gamma(s+1/2)
///        / (2 (1-s) Gamma((1-s)/2)^3 Gamma(s/2-1/2) Gamma(s/2+1)).
pub fn big_g(s: C64) -> Result<C64> {
    if s.norm() < 1e-14 || (s - 1.0).norm() < 1e-14 {
        return Err(Error::Pole {
            function: "big_g",
            at: fmt_c(s),
        });
    }
    let pole = |_| Error::Pole {
        function: "big_g",
        at: fmt_c(s),
    };
    let num = log_gamma(1.0 - s / 2.0).map_err(pole)?
        + log_gamma(0.5 - s).map_err(pole)?
        + log_gamma(s + 0.5).map_err(pole)?;
    let parts = [
        Some(num),
        ln_recip_gamma((1.0 - s) / 2.0)?.map(|l| 3.0 * l),
        ln_recip_gamma(s / 2.0 - 0.5)?,
        ln_recip_gamma(s / 2.0 + 1.0)?,
    ];
    let pre = (2.0 * PI).powf(1.5) * s.powf(-0.5) / (2.0 * (1.0 - s));
    Ok(pre * exp_log_sum(&parts))
}

/// Large-|r| main term of 2F1(r+c, r+b-c-1/2; 2r+b; z) for z <= 0:
/// sqrt(pi) r^{-1/2} Gamma(2r+b) / (Gamma(r+c) Gamma(r+b-c)) q^{b-c-1/2} (1+q)^{1-b-2r}, q = sqrt(1-z).
pub fn luke_asymptotic_2f1(r: C64, b: C64, cc: C64, z: f64) -> Result<C64> {
    if z > 0.0 {
        return Err(Error::InvalidInput(format!("luke_asymptotic_2f1 needs z <= 0, got {z}")));
    }
    let q = (1.0 - z).sqrt();
    let lg = log_gamma(2.0 * r + b)? - log_gamma(r + cc)? - log_gamma(r + b - cc)?;
    let pre = PI.sqrt() * r.powf(-0.5) * lg.exp();
    Ok(pre * c(q, 0.0).powc(b - cc - 0.5) * c(1.0 + q, 0.0).powc(1.0 - b - 2.0 * r))
}

/// D(s) = Gamma((2s-1)/2) Gamma((s+1)/2) / (Gamma(s/2)^2 Gamma((s+2)/2)) for s in (1/2, 1].
pub fn d_coeff(s: f64) -> Result<f64> {
    if !(s > 0.5 && s <= 1.0) {
        if (s - 0.5).abs() < 1e-15 {
            return Err(Error::Pole {
                function: "d_coeff",
                at: "1/2".into(),
            });
        }
        return Err(Error::InvalidInput(format!("d_coeff needs s in (1/2, 1], got {s}")));
    }
    let l = log_gamma_real(s - 0.5)? + log_gamma_real((s + 1.0) / 2.0)?
        - 2.0 * log_gamma_real(s / 2.0)?
        - log_gamma_real((s + 2.0) / 2.0)?;
    Ok(l.exp())
}

/// (4/pi) P X 3F2(1, 1/4, 1/4; 3/2, 1/2; -X^2).
///
/// Below X = 0.9 the series is summed directly; above, the equivalent integral
/// (4/pi) P X int_0^{pi/2} sin(theta) 2F1(1/4, 1/4; 1/2; -X^2 sin^2 theta) dtheta is used.
pub fn a_half(x: f64, period_sum: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() || !(period_sum >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "a_half needs X > 0 and period_sum >= 0, got X = {x}, P = {period_sum}"
        )));
    }
    if period_sum == 0.0 {
        return Ok(0.0);
    }
    let q = c(0.25, 0.0);
    let v = if x < 0.9 {
        hyp_3f2(c(1.0, 0.0), q, q, c(1.5, 0.0), c(0.5, 0.0), c(-x * x, 0.0))?.re
    } else {
        let err = std::cell::Cell::new(None);
        let mut points = vec![0.0];
        let mut th = (1.0 / x).min(0.5);
        while th < FRAC_PI_2 / 2.0 {
            points.push(th);
            th *= 4.0;
        }
        points.push(FRAC_PI_2);
        let r = crate::quad::integrate_pieces(
            |theta: f64| {
                let sn = theta.sin();
                match gauss_2f1(q, q, c(0.5, 0.0), c(-x * x * sn * sn, 0.0)) {
                    Ok(f) => sn * f.re,
                    Err(e) => {
                        err.set(Some(e.to_string()));
                        0.0
                    }
                }
            },
            &points,
            &QuadOptions::new(1e-13, 1e-12),
        )?;
        if let Some(e) = err.take() {
            return Err(Error::NonConvergence { what: "a_half", detail: e });
        }
        r.value
    };
    let out = 4.0 / PI * period_sum * x * v;
    if !(out > 0.0) {
        return Err(Error::NonConvergence {
            what: "a_half",
            detail: format!("non-positive value {out} at X = {x}"),
        });
    }
    Ok(out)
}
