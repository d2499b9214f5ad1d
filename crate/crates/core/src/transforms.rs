//! Mollifier, the Weyl transform pair between f and g, and the Huber transform d_t(f).

use std::f64::consts::{FRAC_1_PI, PI};
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_pieces, integrate_to_infinity, QuadOptions, QuadResult};
use crate::specfun::{big_g, f_s_real, gauss_2f1};
use crate::numerics::PrecisionContext;

const PIECES: usize = 128;
const DEGREE: usize = 24;

/// Standard bump exp(-1/(1-4x^2)) on (-1/2, 1/2).
pub fn bump(x: f64) -> f64 {
    let q = 1.0 - 4.0 * x * x;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

fn fine_quad() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-17,
        rel_tol: 1e-14,
        max_intervals: 4000,
    }
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        integrate(bump, -0.5, 0.5, &fine_quad())
            .expect("bump integral converges")
            .value
    })
}

/// Beyond this frequency the normalized bump transform is below 1e-20.
const HAT_CUTOFF: f64 = 5000.0;

/// Cosine transform of the bump, unnormalized.
fn bump_hat(t: f64) -> f64 {
    let t = t.abs();
    if t == 0.0 {
        return bump_mass();
    }
    if t > HAT_CUTOFF {
        return 0.0;
    }
    let n = (t / 20.0).ceil().max(1.0) as usize;
    let pts: Vec<f64> = (0..=n).map(|k| 0.5 * k as f64 / n as f64).collect();
    let opts = QuadOptions {
        abs_tol: 1e-17 * n as f64,
        rel_tol: 1e-14,
        max_intervals: 400,
    };
    integrate_pieces(|x: f64| 2.0 * bump(x) * (t * x).cos(), &pts, &opts)
        .expect("bump transform converges")
        .value
}

struct ChebTable {
    coeffs: Vec<[f64; DEGREE]>,
}

impl ChebTable {
    fn build(f: impl Fn(f64) -> f64) -> Self {
        let h = 1.0 / PIECES as f64;
        let coeffs = (0..PIECES)
            .map(|j| {
                let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
                let vals: Vec<f64> = (0..DEGREE)
                    .map(|k| {
                        let x = (PI * (k as f64 + 0.5) / DEGREE as f64).cos();
                        f(0.5 * (a + b) + 0.5 * (b - a) * x)
                    })
                    .collect();
                let mut c = [0.0; DEGREE];
                for (n, cn) in c.iter_mut().enumerate() {
                    let s: f64 = vals
                        .iter()
                        .enumerate()
                        .map(|(k, v)| v * (PI * n as f64 * (k as f64 + 0.5) / DEGREE as f64).cos())
                        .sum();
                    *cn = 2.0 * s / DEGREE as f64;
                }
                c
            })
            .collect();
        ChebTable { coeffs }
    }

    fn eval(&self, x: f64) -> f64 {
        let j = ((x * PIECES as f64) as usize).min(PIECES - 1);
        let h = 1.0 / PIECES as f64;
        let a = j as f64 * h;
        let u = 2.0 * (x - a) / h - 1.0;
        let c = &self.coeffs[j];
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        u * b1 - b2 + 0.5 * c[0]
    }
}

fn psi_table() -> &'static ChebTable {
    static TABLE: OnceLock<ChebTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let z2 = bump_mass() * bump_mass();
        ChebTable::build(|x| {
            if x >= 1.0 {
                return 0.0;
            }
            let r = integrate(|y: f64| bump(y) * bump(x - y), x - 0.5, 0.5, &fine_quad())
                .expect("bump self-convolution converges");
            r.value / z2
        })
    })
}

/// Unit-scale mollifier psi = (bump * bump) / (int bump)^2, supported in [-1, 1].
pub fn psi(x: f64) -> f64 {
    let a = x.abs();
    if a >= 1.0 {
        0.0
    } else {
        psi_table().eval(a).max(0.0)
    }
}

/// Fourier transform of psi; equals (bump_hat(t) / bump_hat(0))^2.
pub fn psi_hat(t: f64) -> f64 {
    let r = bump_hat(t) / bump_mass();
    (r * r).clamp(0.0, 1.0)
}

/// sup_t psi_hat(t) |t|^k, sampled on a logarithmic grid over [1, 5000].
pub fn psi_hat_decay_constant(k: u32) -> f64 {
    static CACHE: Mutex<BTreeMap<u32, f64>> = Mutex::new(BTreeMap::new());
    if let Some(&v) = CACHE.lock().expect("cache lock").get(&k) {
        return v;
    }
    let v = (0..=400)
        .map(|j| {
            let t = 5000f64.powf(j as f64 / 400.0);
            psi_hat(t) * t.powi(k as i32)
        })
        .fold(0.0, f64::max);
    CACHE.lock().expect("cache lock").insert(k, v);
    v
}

/// Largest tau with psi_hat(t) > 1/2 for all |t| < tau.
pub fn tau() -> f64 {
    static TAU: OnceLock<f64> = OnceLock::new();
    *TAU.get_or_init(|| {
        let (mut lo, mut hi) = (0.0, 1.0);
        while psi_hat(hi) > 0.5 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if psi_hat(mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifierConfig {
    pub epsilon: f64,
    pub fourier_k: u32,
    pub quad: QuadOptions,
}

impl MollifierConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        Ok(MollifierConfig {
            epsilon,
            fourier_k: 2,
            quad: QuadOptions::new(1e-13, 1e-12),
        })
    }
}

/// psi_eps(x) = psi(x / eps) / eps.
pub fn mollifier_eval(cfg: &MollifierConfig, x: f64) -> f64 {
    psi(x / cfg.epsilon) / cfg.epsilon
}

/// psi_eps hat (t) = psi_hat(eps t).
pub fn mollifier_hat(cfg: &MollifierConfig, t: f64) -> f64 {
    psi_hat(cfg.epsilon * t)
}

/// The smoothed-count pair: g(cosh^2 x) = int_x^inf psi_eps(R - Y) / sqrt(sinh Y) dY and its Weyl preimage f.
#[derive(Clone, Copy, Debug)]
pub struct SmoothedCount {
    pub r: f64,
    pub cfg: MollifierConfig,
}

impl SmoothedCount {
    pub fn new(r: f64, cfg: MollifierConfig) -> Result<Self> {
        if !(r > cfg.epsilon) || !r.is_finite() {
            return Err(Error::InvalidInput(format!("R must exceed epsilon, got R = {r}")));
        }
        Ok(SmoothedCount { r, cfg })
    }

    fn lo(&self) -> f64 {
        self.r - self.cfg.epsilon
    }

    fn hi(&self) -> f64 {
        self.r + self.cfg.epsilon
    }

    /// g is constant below this point.
    pub fn flat_end(&self) -> f64 {
        self.lo().cosh().powi(2)
    }

    /// g and f vanish above this point.
    pub fn support_end(&self) -> f64 {
        self.hi().cosh().powi(2)
    }

    pub fn g(&self, u: f64) -> Result<f64> {
        if u >= self.support_end() {
            return Ok(0.0);
        }
        let x0 = if u <= 1.0 { 0.0 } else { u.sqrt().acosh() }.max(self.lo());
        let r = integrate(
            |y: f64| mollifier_eval(&self.cfg, self.r - y) / y.sinh().sqrt(),
            x0,
            self.hi(),
            &self.cfg.quad,
        )?;
        Ok(r.value)
    }

    /// g'(u), from sinh(2x) g'(cosh^2 x) = -psi_eps(R - x) / sqrt(sinh x).
    pub fn dg(&self, u: f64) -> f64 {
        if u <= self.flat_end() || u >= self.support_end() {
            return 0.0;
        }
        let x = u.sqrt().acosh();
        -mollifier_eval(&self.cfg, self.r - x) / (x.sinh().sqrt() * (2.0 * x).sinh())
    }

    /// The f paired with g through g(y) = int_y^inf f(t) / (sqrt(t-y) sqrt(t-1)) dt,
    /// i.e. the Weyl preimage of g/2.
    pub fn f(&self, u: f64) -> Result<f64> {
        let dg = |y: f64| 0.5 * self.dg(y);
        weyl_f_from_g(&WeylG::analytic(&dg, (self.flat_end(), self.support_end())), u).map(|w| w.value)
    }
}

/// A test function f on [1, inf) with declared exponential decay rate.
#[derive(Clone)]
pub enum TestFunction {
    SmoothedCount(SmoothedCount),
    Generic {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        decay_rate: f64,
    },
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::SmoothedCount(s) => fm.debug_tuple("SmoothedCount").field(s).finish(),
            TestFunction::Generic { decay_rate, .. } => {
                fm.debug_struct("Generic").field("decay_rate", decay_rate).finish()
            }
        }
    }
}

impl TestFunction {
    pub fn smoothed_count(r: f64, cfg: MollifierConfig) -> Result<Self> {
        Ok(TestFunction::SmoothedCount(SmoothedCount::new(r, cfg)?))
    }

    pub fn generic(f: impl Fn(f64) -> f64 + Send + Sync + 'static, decay_rate: f64) -> Result<Self> {
        if !(decay_rate > 0.0) || !decay_rate.is_finite() {
            return Err(Error::InvalidInput(format!(
                "test functions must declare a positive exponential decay rate, got {decay_rate}"
            )));
        }
        Ok(TestFunction::Generic {
            f: Arc::new(f),
            decay_rate,
        })
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        match self {
            TestFunction::SmoothedCount(s) => s.f(u),
            TestFunction::Generic { f, .. } => Ok(f(u)),
        }
    }

    /// f vanishes for u beyond this point, when known.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            TestFunction::SmoothedCount(s) => Some(s.support_end()),
            TestFunction::Generic { .. } => None,
        }
    }

    fn quad(&self) -> QuadOptions {
        match self {
            TestFunction::SmoothedCount(s) => s.cfg.quad,
            TestFunction::Generic { .. } => QuadOptions::new(1e-13, 1e-12),
        }
    }
}

/// g for the Weyl inversion: the value function is not needed, only g' (analytic or numeric).
pub struct WeylG<'a> {
    pub g: Option<&'a dyn Fn(f64) -> f64>,
    pub dg: Option<&'a dyn Fn(f64) -> f64>,
    /// g' vanishes outside this interval, when known.
    pub support: Option<(f64, f64)>,
}

impl<'a> WeylG<'a> {
    pub fn analytic(dg: &'a dyn Fn(f64) -> f64, support: (f64, f64)) -> Self {
        WeylG {
            g: None,
            dg: Some(dg),
            support: Some(support),
        }
    }

    pub fn values_only(g: &'a dyn Fn(f64) -> f64, support: Option<(f64, f64)>) -> Self {
        WeylG {
            g: Some(g),
            dg: None,
            support,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylValue {
    pub value: f64,
    /// Set when g' came from Richardson-extrapolated differences.
    pub numeric_derivative: bool,
}

fn richardson_derivative(g: &dyn Fn(f64) -> f64, y: f64) -> f64 {
    let mut h = 1e-2 * y.abs().max(1.0);
    let d = |h: f64| (g(y + h) - g(y - h)) / (2.0 * h);
    let mut prev = d(h);
    let mut best = prev;
    let mut best_err = f64::INFINITY;
    for _ in 0..6 {
        h *= 0.5;
        let cur = d(h);
        let extrap = cur + (cur - prev) / 3.0;
        let err = (extrap - best).abs();
        if err < best_err {
            best_err = err;
            best = extrap;
        }
        prev = cur;
    }
    best
}

/// Inverse of `weyl_g_from_f`: f(u) = -(2 sqrt(u-1)/pi) int_u^inf g'(y) / sqrt(y-u) dy for u >= 1.
pub fn weyl_f_from_g(g: &WeylG<'_>, u: f64) -> Result<WeylValue> {
    if !(u >= 1.0) {
        return Err(Error::InvalidInput(format!("weyl_f_from_g needs u >= 1, got {u}")));
    }
    if u == 1.0 {
        return Ok(WeylValue {
            value: 0.0,
            numeric_derivative: g.dg.is_none(),
        });
    }
    let numeric = g.dg.is_none();
    let deriv = |y: f64| -> f64 {
        match (g.dg, g.g) {
            (Some(d), _) => d(y),
            (None, Some(gv)) => richardson_derivative(gv, y),
            (None, None) => f64::NAN,
        }
    };
    if g.dg.is_none() && g.g.is_none() {
        return Err(Error::InvalidInput("g has neither values nor derivative".into()));
    }
    let opts = QuadOptions::new(1e-14, 1e-12);
    let h = |w: f64| 2.0 * deriv(u + w * w);
    let integral = match g.support {
        Some((_, end)) if end <= u => 0.0,
        Some((start, end)) => {
            let lo = (start - u).max(0.0).sqrt();
            integrate(h, lo, (end - u).sqrt(), &opts)?.value
        }
        None => integrate_to_infinity(h, 0.0, &opts)?.value,
    };
    Ok(WeylValue {
        value: -2.0 * (u - 1.0).sqrt() * FRAC_1_PI * integral,
        numeric_derivative: numeric,
    })
}

/// g(u) = int_{sqrt(max(0,u-1))}^inf f(x^2+1) / sqrt(x^2 - (u-1)) dx.
pub fn weyl_g_from_f(f: &TestFunction, u: f64) -> Result<f64> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::InvalidInput(format!("weyl_g_from_f needs u >= 0, got {u}")));
    }
    let opts = f.quad();
    let end = f.support_end();
    let trap = Trap::new();
    if u < 1.0 {
        // no singularity: integrate in x directly
        let h = trap.wrap(|x: f64| f.eval(x * x + 1.0).map(|v| v / (x * x + 1.0 - u).sqrt()));
        let r = match end {
            Some(e) => integrate(h, 0.0, (e - 1.0).max(0.0).sqrt(), &opts),
            None => integrate_to_infinity(h, 0.0, &opts),
        };
        return trap.finish(r);
    }
    // x^2 - (u-1) = w^2
    let h = trap.wrap(|w: f64| f.eval(u + w * w).map(|v| v / (u - 1.0 + w * w).sqrt()));
    let r = match (end, f) {
        (Some(e), _) if e <= u => return Ok(0.0),
        (Some(e), TestFunction::SmoothedCount(s)) => {
            let mut pts = vec![0.0];
            let flat = s.flat_end();
            if flat > u {
                pts.push((flat - u).sqrt());
            }
            pts.push((e - u).sqrt());
            integrate_pieces(h, &pts, &opts)
        }
        (Some(e), _) => integrate(h, 0.0, (e - u).sqrt(), &opts),
        (None, _) => integrate_to_infinity(h, 0.0, &opts),
    };
    trap.finish(r)
}

/// Collects the first integrand failure during a quadrature.
struct Trap(RefCell<Option<Error>>);

impl Trap {
    fn new() -> Self {
        Trap(RefCell::new(None))
    }

    fn wrap<'a>(&'a self, h: impl Fn(f64) -> Result<f64> + 'a) -> impl Fn(f64) -> f64 + 'a {
        move |x| match h(x) {
            Ok(v) => v,
            Err(e) => {
                let mut slot = self.0.borrow_mut();
                if slot.is_none() {
                    *slot = Some(e);
                }
                0.0
            }
        }
    }

    fn finish(self, r: Result<QuadResult<f64>>) -> Result<f64> {
        if let Some(e) = self.0.into_inner() {
            return Err(e);
        }
        Ok(r?.value)
    }
}

/// Kernel 2F1(s/2, (1-s)/2; 1/2; -x^2) at s = 1/2 + it.
fn huber_kernel(t: f64, x: f64) -> Result<f64> {
    let s = Complex64::new(0.5, t);
    let v = gauss_2f1(s / 2.0, (1.0 - s) / 2.0, Complex64::new(0.5, 0.0), Complex64::new(-x * x, 0.0))?;
    Ok(v.re)
}

/// d_t(f) = int_0^inf f(x^2+1) 2F1(s/2, (1-s)/2; 1/2; -x^2) dx, s = 1/2 + it, by direct quadrature.
pub fn huber_dt_definition(f: &TestFunction, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("huber_dt needs t >= 0, got {t}")));
    }
    let opts = f.quad();
    // x = sinh w
    let trap = Trap::new();
    let h = trap.wrap(|w: f64| -> Result<f64> {
        let x = w.sinh();
        let fv = f.eval(x * x + 1.0)?;
        if fv == 0.0 {
            return Ok(0.0);
        }
        Ok(fv * huber_kernel(t, x)? * w.cosh())
    });
    let r = match f {
        TestFunction::SmoothedCount(s) => {
            let lo = s.lo();
            let mut pts: Vec<f64> = (0..=((lo / 1.0).ceil() as usize))
                .map(|k| (k as f64).min(lo))
                .collect();
            pts.dedup();
            pts.push(s.hi());
            integrate_pieces(h, &pts, &opts)
        }
        TestFunction::Generic { .. } => integrate_to_infinity(h, 0.0, &opts),
    };
    trap.finish(r)
}

/// d_t for the smoothed-count test function through F_s:
/// (1/pi) int_{R-eps}^{R+eps} sinh(x)^{-1/2} F_s(cosh^2 x) psi_eps(R - x) dx.
pub fn huber_dt_fs_route(sc: &SmoothedCount, t: f64, ctx: &PrecisionContext) -> Result<f64> {
    let s = Complex64::new(0.5, t);
    let trap = Trap::new();
    let h = trap.wrap(|x: f64| -> Result<f64> {
        let w = mollifier_eval(&sc.cfg, sc.r - x);
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok(w * f_s_real(s, x.cosh().powi(2), ctx)? / x.sinh().sqrt())
    });
    let r = integrate(h, sc.lo(), sc.hi(), &sc.cfg.quad);
    let v = trap.finish(r)?;
    Ok(v * FRAC_1_PI)
}

/// d_t(f); for the smoothed-count function both routes are computed and must agree within 10 tol_quad.
pub fn huber_dt(f: &TestFunction, t: f64, ctx: &PrecisionContext) -> Result<f64> {
    let d = huber_dt_definition(f, t)?;
    if let TestFunction::SmoothedCount(sc) = f {
        if t > 0.0 {
            let alt = huber_dt_fs_route(sc, t, ctx)?;
            if (d - alt).abs() > 10.0 * ctx.tol_quad() {
                return Err(Error::RouteDisagreement(format!(
                    "d_t at t = {t}: definition {d:e} vs F_s route {alt:e}"
                )));
            }
        }
    }
    Ok(d)
}

/// Main term (2/pi) Re(G(1/2+it) e^{-iRt}) psi_eps hat (t).
pub fn huber_dt_approx(r: f64, cfg: &MollifierConfig, t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(Error::InvalidInput(format!("huber_dt_approx needs t >= 1, got {t}")));
    }
    let w = mollifier_hat(cfg, t);
    if w == 0.0 {
        return Ok(0.0);
    }
    let g = big_g(Complex64::new(0.5, t))?;
    let phase = Complex64::new(0.0, -r * t).exp();
    Ok(2.0 * FRAC_1_PI * (g * phase).re * w)
}
