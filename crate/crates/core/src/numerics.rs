//! Configurable-precision scalars, unimodular 2x2 matrices and the
//! geometric oracles used to cross-check algebraic identities.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Constant;
use rug::ops::{NegAssign, Pow};
use rug::{Float, Integer};

use crate::error::{Error, Result};

pub const DEFAULT_BITS: u32 = 128;

/// Working precision and the tolerances derived from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    bits: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { bits: DEFAULT_BITS }
    }
}

impl PrecisionContext {
    pub fn new(bits: u32) -> Result<Self> {
        if !(32..=2000).contains(&bits) {
            return Err(Error::InvalidInput(format!(
                "precision must lie in 32..=2000 bits, got {bits}"
            )));
        }
        Ok(PrecisionContext { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// 2^(-bits/2)
    pub fn tol_eq(&self) -> f64 {
        (-(self.bits as f64) / 2.0).exp2()
    }

    /// 2^(-bits/4)
    pub fn tol_quad(&self) -> f64 {
        (-(self.bits as f64) / 4.0).exp2()
    }

    pub fn tol_eq_float(&self) -> Float {
        self.float(self.tol_eq())
    }

    /// Largest admissible matrix entry, 2^(bits/2).
    pub fn overflow_limit(&self) -> Float {
        Float::with_val(self.bits, 1u32) << (self.bits / 2)
    }

    pub fn float<T>(&self, v: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits, v)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits, Constant::Pi)
    }

    pub fn parse(&self, s: &str) -> Result<Float> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::InvalidInput(format!("bad decimal '{s}': {e}")))?;
        Ok(Float::with_val(self.bits, parsed))
    }
}

/// Real 2x2 matrix of determinant one, stored as a PSL(2,R) representative.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat2 {
    a: Float,
    b: Float,
    c: Float,
    d: Float,
}

impl Mat2 {
    /// Builds a matrix, checks unimodularity and sign-normalizes.
    ///
    /// The determinant check is relative to the size of `ad` and `bc`, since
    /// cancellation in `ad - bc` loses that many bits.
    pub fn new(ctx: &PrecisionContext, a: Float, b: Float, c: Float, d: Float) -> Result<Mat2> {
        let bits = ctx.bits();
        let mut m = Mat2 {
            a: Float::with_val(bits, a),
            b: Float::with_val(bits, b),
            c: Float::with_val(bits, c),
            d: Float::with_val(bits, d),
        };
        let dev = m.det_deviation();
        if !(dev <= ctx.tol_eq()) {
            return Err(Error::NotUnimodular { deviation: dev });
        }
        m.check_overflow(ctx)?;
        m.normalize_sign(ctx);
        Ok(m)
    }

    pub fn from_f64(ctx: &PrecisionContext, a: f64, b: f64, c: f64, d: f64) -> Result<Mat2> {
        Mat2::new(ctx, ctx.float(a), ctx.float(b), ctx.float(c), ctx.float(d))
    }

    pub fn parse(ctx: &PrecisionContext, entries: [&str; 4]) -> Result<Mat2> {
        Mat2::new(
            ctx,
            ctx.parse(entries[0])?,
            ctx.parse(entries[1])?,
            ctx.parse(entries[2])?,
            ctx.parse(entries[3])?,
        )
    }

    pub fn identity(ctx: &PrecisionContext) -> Mat2 {
        Mat2 {
            a: ctx.float(1),
            b: ctx.float(0),
            c: ctx.float(0),
            d: ctx.float(1),
        }
    }

    /// diag(m, 1/m)
    pub fn diag(ctx: &PrecisionContext, m: &Float) -> Result<Mat2> {
        let inv = Float::with_val(ctx.bits(), 1u32 / m);
        Mat2::new(ctx, m.clone(), ctx.float(0), ctx.float(0), inv)
    }

    /// Rotation by angle theta (as a matrix, acting by angle 2 theta on the disc).
    pub fn rotation(ctx: &PrecisionContext, theta: &Float) -> Mat2 {
        let (s, c) = Float::with_val(ctx.bits(), theta).sin_cos(ctx.float(0));
        let mut m = Mat2 {
            a: c.clone(),
            b: Float::with_val(ctx.bits(), -&s),
            c: s,
            d: c,
        };
        m.normalize_sign(ctx);
        m
    }

    /// (cosh x, sinh x; sinh x, cosh x)
    pub fn boost(ctx: &PrecisionContext, x: &Float) -> Mat2 {
        let (sh, ch) = Float::with_val(ctx.bits(), x).sinh_cosh(ctx.float(0));
        let mut m = Mat2 {
            a: ch.clone(),
            b: sh.clone(),
            c: sh,
            d: ch,
        };
        m.normalize_sign(ctx);
        m
    }

    pub fn a(&self) -> &Float {
        &self.a
    }
    pub fn b(&self) -> &Float {
        &self.b
    }
    pub fn c(&self) -> &Float {
        &self.c
    }
    pub fn d(&self) -> &Float {
        &self.d
    }

    pub fn entries(&self) -> [&Float; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn prec(&self) -> u32 {
        self.a.prec()
    }

    pub fn to_f64(&self) -> [f64; 4] {
        [
            self.a.to_f64(),
            self.b.to_f64(),
            self.c.to_f64(),
            self.d.to_f64(),
        ]
    }

    fn det_deviation(&self) -> f64 {
        let p = self.prec();
        let ad = Float::with_val(p, &self.a * &self.d);
        let bc = Float::with_val(p, &self.b * &self.c);
        let scale = (Float::with_val(p, ad.abs_ref()) + Float::with_val(p, bc.abs_ref())).max(&Float::with_val(p, 1));
        let dev = Float::with_val(p, &ad - &bc) - 1u32;
        (dev.abs() / scale).to_f64()
    }

    pub fn det(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, &self.a * &self.d) - Float::with_val(p, &self.b * &self.c)
    }

    fn check_overflow(&self, ctx: &PrecisionContext) -> Result<()> {
        let lim = ctx.overflow_limit();
        for e in self.entries() {
            if !e.is_finite() || *e.as_abs() > lim {
                return Err(Error::PrecisionOverflow {
                    limit_bits: ctx.bits() / 2,
                });
            }
        }
        Ok(())
    }

    /// Makes the first entry exceeding tol_eq in magnitude positive.
    pub fn normalize_sign(&mut self, ctx: &PrecisionContext) {
        let tol = ctx.tol_eq();
        let lead = [&self.a, &self.b, &self.c, &self.d]
            .into_iter()
            .find(|e| e.as_abs().to_f64() > tol)
            .map(|e| e.is_sign_negative());
        if lead == Some(true) {
            self.a.neg_assign();
            self.b.neg_assign();
            self.c.neg_assign();
            self.d.neg_assign();
        }
    }

    pub fn mul(&self, y: &Mat2, ctx: &PrecisionContext) -> Result<Mat2> {
        let p = ctx.bits();
        let dot = |x1: &Float, y1: &Float, x2: &Float, y2: &Float| {
            let mut r = Float::with_val(p, x1 * y1);
            r += Float::with_val(p, x2 * y2);
            r
        };
        let mut m = Mat2 {
            a: dot(&self.a, &y.a, &self.b, &y.c),
            b: dot(&self.a, &y.b, &self.b, &y.d),
            c: dot(&self.c, &y.a, &self.d, &y.c),
            d: dot(&self.c, &y.b, &self.d, &y.d),
        };
        m.check_overflow(ctx)?;
        m.normalize_sign(ctx);
        Ok(m)
    }

    /// Exact inverse (d, -b; -c, a).
    pub fn inverse(&self, ctx: &PrecisionContext) -> Mat2 {
        let mut m = Mat2 {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        };
        m.normalize_sign(ctx);
        m
    }

    pub fn pow(&self, k: i64, ctx: &PrecisionContext) -> Result<Mat2> {
        let base = if k < 0 { self.inverse(ctx) } else { self.clone() };
        let mut acc = Mat2::identity(ctx);
        let mut sq = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq, ctx)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq, ctx)?;
            }
        }
        Ok(acc)
    }

    pub fn trace(&self) -> Float {
        Float::with_val(self.prec(), &self.a + &self.d)
    }

    /// B = ad + bc.
    pub fn b_invariant(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, &self.a * &self.d) + Float::with_val(p, &self.b * &self.c)
    }

    /// Squared Frobenius norm, equal to 2 cosh d(i, g i).
    pub fn frob_sq(&self) -> Float {
        let p = self.prec();
        let mut s = Float::with_val(p, self.a.square_ref());
        s += Float::with_val(p, self.b.square_ref());
        s += Float::with_val(p, self.c.square_ref());
        s += Float::with_val(p, self.d.square_ref());
        s
    }

    /// Entries rounded to the tol_eq grid.
    pub fn grid_key(&self, ctx: &PrecisionContext) -> [Integer; 4] {
        let shift = ctx.bits() / 2;
        let key = |x: &Float| {
            let scaled = Float::with_val(ctx.bits() + 8, x) << shift;
            scaled.round().to_integer().unwrap_or_default()
        };
        [key(&self.a), key(&self.b), key(&self.c), key(&self.d)]
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Mat2) -> Float {
        let p = self.prec();
        let mut best = Float::with_val(p, 0);
        for (x, y) in self.entries().into_iter().zip(other.entries()) {
            let diff = Float::with_val(p, x - y).abs();
            if diff > best {
                best = diff;
            }
        }
        best
    }

    /// Entrywise equality with tolerance `tol * max(1, |entry|)`.
    pub fn approx_eq(&self, other: &Mat2, tol: f64) -> bool {
        self.entries()
            .into_iter()
            .zip(other.entries())
            .all(|(x, y)| {
                let p = x.prec();
                let scale = Float::with_val(p, &*x.as_abs()).max(&Float::with_val(p, 1));
                let diff = Float::with_val(p, x - y).abs();
                diff <= scale * tol
            })
    }
}

/// Decimal scientific notation carrying every significant digit of the precision.
pub fn to_decimal(x: &Float) -> String {
    let digits = ((x.prec() as f64) * std::f64::consts::LOG10_2).floor() as usize;
    format!("{:.*e}", digits, x)
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.prec() as f64) * std::f64::consts::LOG10_2).floor() as usize;
        write!(
            f,
            "({:.*e}, {:.*e}; {:.*e}, {:.*e})",
            digits, self.a, digits, self.b, digits, self.c, digits, self.d
        )
    }
}

/// Relative position of the image geodesic g·I with respect to I.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisRelation {
    Disjoint,
    Crossing,
    /// g·I shares an endpoint with I; the distance is zero.
    Degenerate,
}

#[derive(Clone, Debug)]
pub struct AxisDistance {
    pub cosh: Float,
    pub relation: AxisRelation,
}

/// Cosh of the hyperbolic distance between the imaginary axis I and g·I,
/// computed from the boundary endpoints of g·I and the feet of the common
/// perpendicular.
pub fn geodesic_axis_distance(g: &Mat2, ctx: &PrecisionContext) -> AxisDistance {
    let p = ctx.bits();
    let tol = ctx.tol_eq();
    let one = ctx.float(1);
    let small = |x: &Float| x.as_abs().to_f64() <= tol;
    // Endpoints g(0) = b/d and g(inf) = a/c.
    if small(g.c()) || small(g.d()) || small(g.a()) || small(g.b()) {
        return AxisDistance {
            cosh: one,
            relation: AxisRelation::Degenerate,
        };
    }
    let e0 = Float::with_val(p, g.b() / g.d());
    let e1 = Float::with_val(p, g.a() / g.c());
    if e0.is_sign_negative() != e1.is_sign_negative() {
        return AxisDistance {
            cosh: one,
            relation: AxisRelation::Crossing,
        };
    }
    let (x0, x1) = {
        let u = e0.abs();
        let v = e1.abs();
        if u <= v {
            (u, v)
        } else {
            (v, u)
        }
    };
    let sum = Float::with_val(p, &x0 + &x1);
    let r = Float::with_val(p, &x0 * &x1).sqrt();
    // Foot on I is i*r; foot on the image is r*(cos th + i sin th).
    let cos_th = Float::with_val(p, &r * 2u32) / &sum;
    let sin_th = Float::with_val(p, &x1 - &x0) / &sum;
    if sin_th.is_zero() {
        return AxisDistance {
            cosh: one,
            relation: AxisRelation::Degenerate,
        };
    }
    let wx = Float::with_val(p, &r * &cos_th);
    let wy = Float::with_val(p, &r * &sin_th);
    let dy = Float::with_val(p, &r - &wy);
    let chord2 = Float::with_val(p, wx.square_ref()) + Float::with_val(p, dy.square_ref());
    let denom = Float::with_val(p, &r * &wy) * 2u32;
    let cosh = chord2 / denom + 1u32;
    AxisDistance {
        cosh,
        relation: AxisRelation::Disjoint,
    }
}

/// Conjugator P and multiplier m > 1 with P g P^{-1} = diag(m, 1/m).
pub fn diagonalize_primitive_hyperbolic(g: &Mat2, ctx: &PrecisionContext) -> Result<(Mat2, Float)> {
    let p = ctx.bits();
    let tol = ctx.tol_eq();
    let tr = g.trace();
    if Float::with_val(p, &*tr.as_abs()) <= 2.0 + tol {
        return Err(Error::NotHyperbolic {
            trace: tr.as_abs().to_f64(),
        });
    }
    // Work with the representative of positive trace.
    let (a, b, c, d, t) = if tr.is_sign_negative() {
        (
            Float::with_val(p, -g.a()),
            Float::with_val(p, -g.b()),
            Float::with_val(p, -g.c()),
            Float::with_val(p, -g.d()),
            Float::with_val(p, -&tr),
        )
    } else {
        (g.a().clone(), g.b().clone(), g.c().clone(), g.d().clone(), tr)
    };
    let disc = (Float::with_val(p, t.square_ref()) - 4u32).sqrt();
    let m = Float::with_val(p, &t + &disc) / 2u32;
    let m_inv = Float::with_val(p, 1u32 / &m);
    let small = |x: &Float| x.as_abs().to_f64() <= tol;
    // Columns (v1 | v2) are eigenvectors for m and 1/m.
    let (v1, v2) = if !small(&c) {
        (
            (Float::with_val(p, &m - &d), c.clone()),
            (Float::with_val(p, &m_inv - &d), c.clone()),
        )
    } else if !small(&b) {
        (
            (b.clone(), Float::with_val(p, &m - &a)),
            (b.clone(), Float::with_val(p, &m_inv - &a)),
        )
    } else if a > d {
        ((ctx.float(1), ctx.float(0)), (ctx.float(0), ctx.float(1)))
    } else {
        ((ctx.float(0), ctx.float(1)), (ctx.float(-1), ctx.float(0)))
    };
    let (s11, s21) = v1;
    let (mut s12, mut s22) = v2;
    let mut det = Float::with_val(p, &s11 * &s22) - Float::with_val(p, &s12 * &s21);
    if det.is_sign_negative() {
        s12 = -s12;
        s22 = -s22;
        det = -det;
    }
    let scale = det.sqrt();
    // P = S^{-1} with S normalized to determinant one.
    let pa = Float::with_val(p, &s22 / &scale);
    let pb = Float::with_val(p, -&s12) / &scale;
    let pc = Float::with_val(p, -&s21) / &scale;
    let pd = Float::with_val(p, &s11 / &scale);
    let conj = Mat2::new(ctx, pa, pb, pc, pd)?;
    Ok((conj, m))
}

/// m^k at context precision.
pub fn float_pow(m: &Float, k: i64) -> Float {
    let p = m.prec();
    if k >= 0 {
        Float::with_val(p, m.pow(k as u64))
    } else {
        Float::with_val(p, 1u32) / Float::with_val(p, m.pow(k.unsigned_abs()))
    }
}

/// Total order on floats that treats NaN as equal (callers never pass NaN).
pub fn cmp_float(x: &Float, y: &Float) -> Ordering {
    x.partial_cmp(y).unwrap_or(Ordering::Equal)
}

/// Complex number with both parts at context precision.
#[derive(Clone, Debug, PartialEq)]
pub struct HpComplex {
    pub re: Float,
    pub im: Float,
}

impl HpComplex {
    pub fn new(re: Float, im: Float) -> Self {
        HpComplex { re, im }
    }

    pub fn from_f64(ctx: &PrecisionContext, re: f64, im: f64) -> Self {
        HpComplex::new(ctx.float(re), ctx.float(im))
    }

    pub fn real(x: Float) -> Self {
        let p = x.prec();
        HpComplex::new(x, Float::with_val(p, 0))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn add(&self, o: &HpComplex) -> HpComplex {
        let p = self.prec();
        HpComplex::new(
            Float::with_val(p, &self.re + &o.re),
            Float::with_val(p, &self.im + &o.im),
        )
    }

    pub fn sub(&self, o: &HpComplex) -> HpComplex {
        let p = self.prec();
        HpComplex::new(
            Float::with_val(p, &self.re - &o.re),
            Float::with_val(p, &self.im - &o.im),
        )
    }

    pub fn mul(&self, o: &HpComplex) -> HpComplex {
        let p = self.prec();
        let rr = Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im);
        let ii = Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re);
        HpComplex::new(rr, ii)
    }

    pub fn scale(&self, k: &Float) -> HpComplex {
        let p = self.prec();
        HpComplex::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    pub fn neg(&self) -> HpComplex {
        HpComplex::new(-self.re.clone(), -self.im.clone())
    }

    pub fn norm_sq(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    pub fn recip(&self) -> HpComplex {
        let n = self.norm_sq();
        let p = self.prec();
        HpComplex::new(
            Float::with_val(p, &self.re / &n),
            Float::with_val(p, -&self.im) / &n,
        )
    }

    pub fn div(&self, o: &HpComplex) -> HpComplex {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> HpComplex {
        let p = self.prec();
        let r = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        HpComplex::new(Float::with_val(p, &r * &c), r * s)
    }

    /// Principal logarithm.
    pub fn ln(&self) -> HpComplex {
        let p = self.prec();
        let modulus = self.abs().ln();
        let arg = Float::with_val(p, self.im.atan2_ref(&self.re));
        HpComplex::new(modulus, arg)
    }

    /// sin(x + iy) = sin x cosh y + i cos x sinh y
    pub fn sin(&self) -> HpComplex {
        let p = self.prec();
        let (s, c) = self.re.clone().sin_cos(Float::new(p));
        let (sh, ch) = self.im.clone().sinh_cosh(Float::new(p));
        HpComplex::new(s * ch, c * sh)
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// Pairwise (tree) summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2..=8 => xs.iter().sum(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn tolerances_follow_bits() {
        let c = ctx();
        assert_eq!(c.tol_eq(), 2f64.powi(-64));
        assert_eq!(c.tol_quad(), 2f64.powi(-32));
        assert!(c.tol_eq() < c.tol_quad() && c.tol_quad() < 1.0);
        assert!(PrecisionContext::new(8).is_err());
    }

    #[test]
    fn identity_squared() {
        let c = ctx();
        let i = Mat2::identity(&c);
        assert_eq!(i.mul(&i, &c).unwrap(), i);
    }

    #[test]
    fn diag_squared() {
        let c = ctx();
        let m = c.float(3);
        let g = Mat2::diag(&c, &m).unwrap();
        let g2 = g.mul(&g, &c).unwrap();
        let want = Mat2::diag(&c, &c.float(9)).unwrap();
        assert!(g2.approx_eq(&want, c.tol_eq()));
    }

    #[test]
    fn quarter_turn_squares_to_identity_in_psl() {
        let c = ctx();
        let s = Mat2::from_f64(&c, 0.0, 1.0, -1.0, 0.0).unwrap();
        assert_eq!(s.mul(&s, &c).unwrap(), Mat2::identity(&c));
    }

    #[test]
    fn b_invariant_examples() {
        let c = ctx();
        assert_eq!(Mat2::identity(&c).b_invariant(), 1);
        let g = Mat2::diag(&c, &c.float(5)).unwrap();
        assert!((g.b_invariant() - 1u32).abs() < c.tol_eq());
        let s = Mat2::from_f64(&c, 0.0, 1.0, -1.0, 0.0).unwrap();
        assert_eq!(s.b_invariant(), -1);
    }

    #[test]
    fn sign_normalization_and_rejection() {
        let c = ctx();
        let g = Mat2::from_f64(&c, -2.0, -1.0, -1.0, -1.0).unwrap();
        assert_eq!(g.to_f64(), [2.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            Mat2::from_f64(&c, 2.0, 0.0, 0.0, 1.0),
            Err(Error::NotUnimodular { .. })
        ));
    }

    #[test]
    fn overflow_is_reported() {
        let c = PrecisionContext::new(64).unwrap();
        let big = c.float(1u64 << 20);
        let g = Mat2::diag(&c, &big).unwrap();
        assert!(matches!(
            g.pow(3, &c),
            Err(Error::PrecisionOverflow { .. })
        ));
    }

    #[test]
    fn distance_rotation_crosses() {
        let c = ctx();
        let th = c.pi() / 6u32;
        let g = Mat2::rotation(&c, &th);
        let d = geodesic_axis_distance(&g, &c);
        assert_eq!(d.relation, AxisRelation::Crossing);
        assert_eq!(d.cosh, 1);
    }

    #[test]
    fn distance_boost_matches_cosh_2a() {
        let c = ctx();
        let g = Mat2::boost(&c, &c.float(0.5));
        let d = geodesic_axis_distance(&g, &c);
        assert_eq!(d.relation, AxisRelation::Disjoint);
        let want = c.float(1.0).cosh();
        let rel = (Float::with_val(128, &d.cosh - &want) / &want).abs();
        assert!(rel < 1e-30, "{rel}");
        let b = g.b_invariant();
        assert!((Float::with_val(128, &b - &want)).abs() < 1e-30);
    }

    #[test]
    fn distance_diag_preserves_axis() {
        let c = ctx();
        let g = Mat2::diag(&c, &c.float(3)).unwrap();
        let d = geodesic_axis_distance(&g, &c);
        assert_eq!(d.relation, AxisRelation::Degenerate);
        assert_eq!(d.cosh, 1);
    }

    #[test]
    fn diagonalize_examples() {
        let c = ctx();
        let g = Mat2::diag(&c, &c.float(2)).unwrap();
        let (p, m) = diagonalize_primitive_hyperbolic(&g, &c).unwrap();
        assert_eq!(p, Mat2::identity(&c));
        assert_eq!(m, 2);

        let g = Mat2::from_f64(&c, 2.0, 1.0, 1.0, 1.0).unwrap();
        let (p, m) = diagonalize_primitive_hyperbolic(&g, &c).unwrap();
        let want = (c.float(5).sqrt() + 3u32) / 2u32;
        assert!(Float::with_val(128, &m - &want).abs() < c.tol_eq());
        let rec = p.mul(&g, &c).unwrap().mul(&p.inverse(&c), &c).unwrap();
        assert!(rec.max_abs_diff(&Mat2::diag(&c, &m).unwrap()) < c.tol_eq());

        let g = Mat2::boost(&c, &c.float(1));
        let (_, m) = diagonalize_primitive_hyperbolic(&g, &c).unwrap();
        let e = c.float(1).exp();
        assert!(Float::with_val(128, &m - &e).abs() < c.tol_eq());
    }

    #[test]
    fn diagonalize_negative_trace_and_lower_triangular() {
        let c = ctx();
        let g = Mat2::from_f64(&c, 1.0, 0.0, 5.0, 1.0).unwrap();
        assert!(matches!(
            diagonalize_primitive_hyperbolic(&g, &c),
            Err(Error::NotHyperbolic { .. })
        ));
        let g = Mat2::from_f64(&c, 0.5, 0.0, 3.0, 2.0).unwrap();
        let (p, m) = diagonalize_primitive_hyperbolic(&g, &c).unwrap();
        let rec = p.mul(&g, &c).unwrap().mul(&p.inverse(&c), &c).unwrap();
        assert!(rec.max_abs_diff(&Mat2::diag(&c, &m).unwrap()) < c.tol_eq());
        let g = Mat2::from_f64(&c, 1.0, 2.0, -3.0, -5.0).unwrap();
        let (p, m) = diagonalize_primitive_hyperbolic(&g, &c).unwrap();
        let rec = p.mul(&g, &c).unwrap().mul(&p.inverse(&c), &c).unwrap();
        assert!(rec.max_abs_diff(&Mat2::diag(&c, &m).unwrap()) < c.tol_eq());
    }

    #[test]
    fn hp_complex_sin_and_log() {
        let c = ctx();
        let z = HpComplex::from_f64(&c, 0.3, 0.7);
        let e = z.ln().exp();
        assert!(e.sub(&z).abs() < 1e-35);
        let s = z.sin().to_c64();
        let w = num_complex::Complex64::new(0.3, 0.7).sin();
        assert!((s - w).norm() < 1e-15);
    }
}
