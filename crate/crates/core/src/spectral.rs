//! Spectral data (from files or synthesized), period-sum laws, the main term M(X),
//! the error terms E and E~, and the spectral side of the smoothed error e_eps(R).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuchsian::{count_n, CountOptions, GroupPresentation};
use crate::numerics::{pairwise_sum, PrecisionContext};
use crate::specfun::{a_half, d_coeff};
use crate::transforms::{
    huber_dt, huber_dt_approx, psi_hat_decay_constant, MollifierConfig, TestFunction,
};

/// Lower end of the range on which the partial-sum law is checked.
pub const LAW_X0: f64 = 10.0;
/// Upper bound for sqrt(t) |G(1/2 + it)| used in tail estimates.
pub const SQRT_T_G_SUP: f64 = 0.64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpectralParameter {
    /// s = 1/2 + it with t >= 0; t = 0 is the bottom of the continuous range.
    Principal(f64),
    /// Real s in (1/2, 1).
    Exceptional(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDatum {
    pub param: SpectralParameter,
    pub period_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpectrumSource {
    File(String),
    Synthetic { seed: u64, density_c: f64 },
}

/// Observed deviation of sum_{t_j <= X} period_sq / ((len_l/pi) X) from 1 over [x0, t_max].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawCheck {
    pub x0: f64,
    pub sigma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    data: Vec<SpectralDatum>,
    len_l: f64,
    t_max: f64,
    source: SpectrumSource,
    law: LawCheck,
}

impl Spectrum {
    /// Validates, sorts (exceptional by s, then principal by t) and measures the partial-sum law.
    pub fn from_data(mut data: Vec<SpectralDatum>, len_l: f64, source: SpectrumSource, t_max: f64) -> Result<Self> {
        let origin = match &source {
            SpectrumSource::File(p) => p.clone(),
            SpectrumSource::Synthetic { seed, .. } => format!("synthetic seed {seed}"),
        };
        let bad = |detail: String| Error::Schema { origin: origin.clone(), detail };
        if !(len_l > 0.0 && len_l.is_finite()) {
            return Err(bad(format!("len_l must be positive, got {len_l}")));
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(bad(format!("t_max must be finite and non-negative, got {t_max}")));
        }
        for d in &data {
            if !(d.period_sq >= 0.0 && d.period_sq.is_finite()) {
                return Err(bad(format!("negative or non-finite period {}", d.period_sq)));
            }
            match d.param {
                SpectralParameter::Principal(t) if !(t >= 0.0 && t <= t_max) => {
                    return Err(bad(format!("principal t = {t} outside [0, t_max = {t_max}]")));
                }
                SpectralParameter::Exceptional(s) if !(s > 0.5 && s < 1.0) => {
                    return Err(bad(format!("exceptional s = {s} outside (1/2, 1)")));
                }
                _ => {}
            }
        }
        data.sort_by(|a, b| key(a).partial_cmp(&key(b)).expect("validated finite"));
        let law = law_check(&data, len_l, t_max);
        Ok(Spectrum { data, len_l, t_max, source, law })
    }

    pub fn data(&self) -> &[SpectralDatum] {
        &self.data
    }

    pub fn len_l(&self) -> f64 {
        self.len_l
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn source(&self) -> &SpectrumSource {
        &self.source
    }

    pub fn law(&self) -> LawCheck {
        self.law
    }

    /// (t, period_sq) for the principal entries, ascending in t.
    pub fn principal(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.data.iter().filter_map(|d| match d.param {
            SpectralParameter::Principal(t) => Some((t, d.period_sq)),
            SpectralParameter::Exceptional(_) => None,
        })
    }

    /// (s, period_sq) for the exceptional entries.
    pub fn exceptional(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.data.iter().filter_map(|d| match d.param {
            SpectralParameter::Exceptional(s) => Some((s, d.period_sq)),
            SpectralParameter::Principal(_) => None,
        })
    }

    /// Total period mass sitting at t = 0.
    pub fn bottom_period_sum(&self) -> f64 {
        self.principal().filter(|d| d.0 == 0.0).map(|d| d.1).sum()
    }

    /// Principal parameters in (0, m].
    pub fn frequencies_up_to(&self, m: f64) -> Vec<f64> {
        self.principal().map(|d| d.0).filter(|&t| t > 0.0 && t <= m).collect()
    }

    /// Copy with every period multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Spectrum> {
        let data = self
            .data
            .iter()
            .map(|d| SpectralDatum { param: d.param, period_sq: k * d.period_sq })
            .collect();
        Spectrum::from_data(data, self.len_l, self.source.clone(), self.t_max)
    }
}

fn key(d: &SpectralDatum) -> (u8, f64) {
    match d.param {
        SpectralParameter::Exceptional(s) => (0, s),
        SpectralParameter::Principal(t) => (1, t),
    }
}

fn law_check(data: &[SpectralDatum], len_l: f64, t_max: f64) -> LawCheck {
    let pts: Vec<(f64, f64)> = data
        .iter()
        .filter_map(|d| match d.param {
            SpectralParameter::Principal(t) => Some((t, d.period_sq)),
            SpectralParameter::Exceptional(_) => None,
        })
        .collect();
    if pts.is_empty() || t_max < LAW_X0 {
        return LawCheck { x0: LAW_X0, sigma: None };
    }
    let rate = len_l / PI;
    let mut acc = 0.0;
    let mut i = 0;
    while i < pts.len() && pts[i].0 <= LAW_X0 {
        acc += pts[i].1;
        i += 1;
    }
    // The partial sum is a step function, so extremes of the ratio sit at the jumps.
    let mut sigma: f64 = (acc / (rate * LAW_X0) - 1.0).abs();
    while i < pts.len() {
        let (t, w) = pts[i];
        sigma = sigma.max((acc / (rate * t) - 1.0).abs());
        acc += w;
        sigma = sigma.max((acc / (rate * t) - 1.0).abs());
        i += 1;
    }
    sigma = sigma.max((acc / (rate * t_max) - 1.0).abs());
    LawCheck { x0: LAW_X0, sigma: Some(sigma) }
}

/// Reads a spectrum file: `len_l <v>` and optional `t_max <v>` headers, then
/// lines `principal <t> <period_sq>` or `exceptional <s> <period_sq>`; `#` starts a comment.
pub fn load_spectrum(path: &Path) -> Result<Spectrum> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.display().to_string()),
        _ => Error::Io(e),
    })?;
    parse_spectrum(&text, &path.display().to_string())
}

pub fn parse_spectrum(text: &str, origin: &str) -> Result<Spectrum> {
    let bad = |line: usize, detail: String| Error::Schema {
        origin: origin.to_string(),
        detail: format!("line {line}: {detail}"),
    };
    let mut len_l = None;
    let mut t_max = None;
    let mut data = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(i + 1, format!("not a finite decimal: {s:?}")))
        };
        match (fields[0], fields.len()) {
            ("len_l", 2) => len_l = Some(num(fields[1])?),
            ("t_max", 2) => t_max = Some(num(fields[1])?),
            ("principal", 3) | ("exceptional", 3) => {
                let v = num(fields[1])?;
                let w = num(fields[2])?;
                if w < 0.0 {
                    return Err(bad(i + 1, format!("negative period {w}")));
                }
                let param = if fields[0] == "principal" {
                    SpectralParameter::Principal(v)
                } else {
                    SpectralParameter::Exceptional(v)
                };
                data.push(SpectralDatum { param, period_sq: w });
            }
            _ => return Err(bad(i + 1, format!("unrecognized record {line:?}"))),
        }
    }
    let len_l = len_l.ok_or_else(|| Error::Schema {
        origin: origin.to_string(),
        detail: "missing len_l header".into(),
    })?;
    let t_max = t_max.unwrap_or_else(|| {
        data.iter()
            .filter_map(|d| match d.param {
                SpectralParameter::Principal(t) => Some(t),
                SpectralParameter::Exceptional(_) => None,
            })
            .fold(0.0, f64::max)
    });
    Spectrum::from_data(data, len_l, SpectrumSource::File(origin.to_string()), t_max)
}

/// Text form read back bit-identically by `parse_spectrum`.
pub fn format_spectrum(sp: &Spectrum) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "len_l {}", sp.len_l);
    let _ = writeln!(out, "t_max {}", sp.t_max);
    for d in &sp.data {
        let (kind, v) = match d.param {
            SpectralParameter::Principal(t) => ("principal", t),
            SpectralParameter::Exceptional(s) => ("exceptional", s),
        };
        let _ = writeln!(out, "{kind} {v} {}", d.period_sq);
    }
    out
}

pub fn write_spectrum(sp: &Spectrum, path: &Path) -> Result<()> {
    std::fs::write(path, format_spectrum(sp))?;
    Ok(())
}

/// Synthetic spectrum with counting function ~ density_c t^2 and windowed period mass len_l/pi per unit t.
///
/// t_j = sqrt((j + u_j) / density_c) with u_j uniform in (-0.3, 0.3). Each t_j carries the mass of
/// its Voronoi cell in [0, t_max], scaled by 1 + d_j; the d_j come in pairs (d, -d) with |d| < 0.1.
pub fn synth_spectrum(len_l: f64, t_max: f64, density_c: f64, seed: u64) -> Result<Spectrum> {
    if !(t_max >= 1.0 && t_max.is_finite()) {
        return Err(Error::InvalidInput(format!("t_max must be at least 1, got {t_max}")));
    }
    if !(density_c > 0.0 && density_c.is_finite()) {
        return Err(Error::InvalidInput(format!("density_c must be positive, got {density_c}")));
    }
    if !(len_l > 0.0 && len_l.is_finite()) {
        return Err(Error::InvalidInput(format!("len_l must be positive, got {len_l}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ts = Vec::new();
    for j in 1u64.. {
        let t = ((j as f64 + rng.gen_range(-0.3..0.3)) / density_c).sqrt();
        if t > t_max {
            break;
        }
        ts.push(t);
    }
    let rate = len_l / PI;
    let mut data = Vec::with_capacity(ts.len());
    let mut left = 0.0;
    let mut jitter = 0.0;
    for (i, &t) in ts.iter().enumerate() {
        let right = ts.get(i + 1).map_or(t_max, |&n| 0.5 * (t + n));
        jitter = if i % 2 == 0 { rng.gen_range(-0.1..0.1) } else { -jitter };
        data.push(SpectralDatum {
            param: SpectralParameter::Principal(t),
            period_sq: rate * (right - left) * (1.0 + jitter),
        });
        left = right;
    }
    Spectrum::from_data(data, len_l, SpectrumSource::Synthetic { seed, density_c }, t_max)
}

/// sum_{0 < t_j <= T} t_j^a period_sq, or the tail sum over t_j > T when `tail` (requires a < -1).
pub fn weighted_period_sum(sp: &Spectrum, a: f64, t: f64, tail: bool) -> Result<f64> {
    if a == -1.0 {
        return Err(Error::InvalidInput("the exponent a = -1 is excluded".into()));
    }
    if tail && !(a < -1.0) {
        return Err(Error::InvalidInput(format!("tail sums need a < -1, got {a}")));
    }
    let terms: Vec<f64> = sp
        .principal()
        .filter(|&(tj, _)| tj > 0.0 && if tail { tj > t } else { tj <= t })
        .map(|(tj, w)| tj.powf(a) * w)
        .collect();
    Ok(pairwise_sum(&terms))
}

/// M(X) = 2 len_l^2 / (pi covolume) X + sum over exceptional s_j of D(s_j) period_sq X^{s_j}.
pub fn main_term(sp: &Spectrum, covolume: f64, len_l: f64, x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::InvalidInput(format!("main_term needs X >= 1, got {x}")));
    }
    if !(covolume > 0.0) {
        return Err(Error::InvalidInput(format!("covolume must be positive, got {covolume}")));
    }
    let mut v = 2.0 * len_l * len_l / (PI * covolume) * x;
    for (s, w) in sp.exceptional() {
        v += d_coeff(s)? * w * x.powf(s);
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorTerms {
    pub x: f64,
    pub count: usize,
    pub main: f64,
    pub a_half: f64,
    pub e: f64,
    pub e_tilde: f64,
}

/// E(X) = N(X) - M(X) and E~(X) = E(X) - a_{1/2}(X).
pub fn error_terms(group: &GroupPresentation, sp: &Spectrum, x: f64, opts: &CountOptions) -> Result<ErrorTerms> {
    let n = count_n(group, x, opts)?;
    error_terms_from_count(group, sp, x, n.count)
}

/// As `error_terms`, for a count already in hand.
pub fn error_terms_from_count(group: &GroupPresentation, sp: &Spectrum, x: f64, count: usize) -> Result<ErrorTerms> {
    let main = main_term(sp, group.covolume(), group.len_l().to_f64(), x)?;
    let e = count as f64 - main;
    let ah = a_half(x, sp.bottom_period_sum())?;
    Ok(ErrorTerms { x, count, main, a_half: ah, e, e_tilde: e - ah })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSum {
    pub value: f64,
    /// c sum_{t_j > t_cut} (eps t_j)^{-k} t_j^{-1/2} period_sq.
    pub tail_bound: f64,
    pub terms: usize,
}

/// e_eps(R) = 2 sum_{0 < t_j <= t_cut} d_{t_j} period_sq with d_t from the large-t approximation.
///
/// Parameters below 1, where that approximation is not available, use the exact transform.
pub fn spectral_e_eps(sp: &Spectrum, r: f64, cfg: &MollifierConfig, t_cut: f64) -> Result<SpectralSum> {
    if !(t_cut <= sp.t_max()) {
        return Err(Error::InvalidInput(format!(
            "t_cut = {t_cut} exceeds the spectrum range t_max = {}",
            sp.t_max()
        )));
    }
    let lines: Vec<(f64, f64)> = sp.principal().filter(|&(t, _)| t > 0.0 && t <= t_cut).collect();
    let exact = if lines.iter().any(|&(t, _)| t < 1.0) {
        Some(TestFunction::smoothed_count(r, *cfg)?)
    } else {
        None
    };
    let ctx = PrecisionContext::default();
    let terms = lines
        .par_iter()
        .map(|&(t, w)| {
            let d = match &exact {
                Some(f) if t < 1.0 => huber_dt(f, t, &ctx)?,
                _ => huber_dt_approx(r, cfg, t)?,
            };
            Ok(2.0 * d * w)
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = cfg.fourier_k;
    let c = 2.0 * (2.0 / PI) * SQRT_T_G_SUP * psi_hat_decay_constant(k);
    let tail: Vec<f64> = sp
        .principal()
        .filter(|&(t, _)| t > t_cut)
        .map(|(t, w)| (cfg.epsilon * t).powi(-(k as i32)) * t.powf(-0.5) * w)
        .collect();
    Ok(SpectralSum {
        value: pairwise_sum(&terms),
        tail_bound: c * pairwise_sum(&tail),
        terms: lines.len(),
    })
}

/// Default spectral cutoff M = eps^{k/(1/2-k)}.
pub fn default_cutoff(epsilon: f64, k: u32) -> f64 {
    let k = k as f64;
    epsilon.powf(k / (0.5 - k))
}
