//! Simultaneous resonance: a radius R in [M, M T^n] with every |e^{i r_j R} - 1| < 4 pi / T.
//!
//! The pigeonhole search splits the torus [0,1)^n into floor(T)^n boxes, drops the points
//! <r_j k M / 2pi> for k = 0, 1, 2, ... into them and stops at the first box hit twice.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::PrecisionContext;

pub const FIND_BUDGET: f64 = 1e8;
pub const BRUTE_BUDGET: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceRequest {
    rs: Vec<f64>,
    m: f64,
    t: f64,
}

impl ResonanceRequest {
    pub fn new(rs: Vec<f64>, m: f64, t: f64) -> Result<Self> {
        if rs.is_empty() {
            return Err(Error::InvalidInput("at least one frequency is required".into()));
        }
        if let Some(bad) = rs.iter().find(|r| !r.is_finite()) {
            return Err(Error::InvalidInput(format!("frequency {bad} is not finite")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidInput(format!("M must be positive, got {m}")));
        }
        if !(t > 1.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("T must exceed 1, got {t}")));
        }
        Ok(ResonanceRequest { rs, m, t })
    }

    pub fn rs(&self) -> &[f64] {
        &self.rs
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// 4 pi / T
    pub fn defect_bound(&self) -> f64 {
        4.0 * PI / self.t
    }

    fn check_distinct(&self) -> Result<()> {
        let tol = PrecisionContext::default().tol_eq();
        let mut sorted = self.rs.clone();
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            if (w[1] - w[0]).abs() <= tol * w[0].abs().max(1.0) {
                return Err(Error::Degenerate(format!("frequency {} appears twice", w[0])));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pigeonhole,
    Brute,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceResult {
    pub r: f64,
    /// R = multiplier * M.
    pub multiplier: u64,
    pub max_defect: f64,
    pub method: Method,
}

/// Fractional parts of r_j M / (2 pi), computed at 128 bits.
fn base_angles(req: &ResonanceRequest) -> Vec<f64> {
    let ctx = PrecisionContext::new(128).expect("valid precision");
    let two_pi = Float::with_val(128, ctx.pi() * 2u32);
    req.rs
        .iter()
        .map(|&r| {
            let x = Float::with_val(128, Float::with_val(128, r) * req.m) / &two_pi;
            let fl = Float::with_val(128, x.floor_ref());
            Float::with_val(128, x - fl).to_f64()
        })
        .collect()
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// max_j |e^{i r_j R} - 1| for R = k M, evaluated at 128 bits.
pub fn max_defect(rs: &[f64], m: f64, k: u64) -> f64 {
    let r = Float::with_val(128, m) * Float::with_val(128, k);
    rs.iter()
        .map(|&x| {
            let half = Float::with_val(128, &r * x) / 2u32;
            2.0 * half.sin().to_f64().abs()
        })
        .fold(0.0, f64::max)
}

fn finish(req: &ResonanceRequest, k: u64, method: Method) -> Result<ResonanceResult> {
    let r = k as f64 * req.m;
    let max_defect = max_defect(&req.rs, req.m, k);
    let top = req.m * req.t.powi(req.rs.len() as i32);
    if !(r >= req.m && r <= top * (1.0 + 1e-12)) || !(max_defect < req.defect_bound()) {
        return Err(Error::NonConvergence {
            what: "resonance postcondition",
            detail: format!("R = {r} with defect {max_defect:e} violates the guarantee"),
        });
    }
    Ok(ResonanceResult { r, multiplier: k, max_defect, method })
}

/// Pigeonhole search; the first repeated box in ascending k gives R = (k2 - k1) M.
pub fn resonance_find(req: &ResonanceRequest) -> Result<ResonanceResult> {
    req.check_distinct()?;
    let side = req.t.floor() as u64;
    let n = req.rs.len();
    let boxes = (side as f64).powi(n as i32);
    if boxes > FIND_BUDGET {
        return Err(Error::BudgetExceeded { boxes, budget: FIND_BUDGET });
    }
    let alpha = base_angles(req);
    let mut seen: HashMap<u64, u64> = HashMap::new();
    for k in 0..=boxes as u64 {
        let mut key = 0u64;
        for &a in &alpha {
            let cell = ((frac(k as f64 * a) * side as f64) as u64).min(side - 1);
            key = key * side + cell;
        }
        if let Some(&k1) = seen.get(&key) {
            return finish(req, k - k1, Method::Pigeonhole);
        }
        seen.insert(key, k);
    }
    Err(Error::Exhausted(format!(
        "no repeated box among {} points in {boxes} boxes",
        boxes as u64 + 1
    )))
}

/// Scans R = k M for k = 1..ceil(T^n) and returns the first R meeting the defect bound.
pub fn resonance_brute(req: &ResonanceRequest) -> Result<ResonanceResult> {
    req.check_distinct()?;
    let n = req.rs.len() as i32;
    let span = req.t.powi(n);
    if span > BRUTE_BUDGET {
        return Err(Error::BudgetExceeded { boxes: span, budget: BRUTE_BUDGET });
    }
    let alpha = base_angles(req);
    let bound = req.defect_bound();
    // A small guard keeps f64 rounding from accepting a k that fails at full precision.
    let accept = bound * (1.0 - 1e-9);
    let last = span.ceil() as u64;
    let hit = (1..=last).into_par_iter().find_first(|&k| {
        alpha
            .iter()
            .all(|&a| 2.0 * (PI * frac(k as f64 * a)).sin().abs() < accept)
    });
    match hit {
        Some(k) => finish(req, k, Method::Brute),
        None => Err(Error::Exhausted(format!("no k <= {last} meets the defect bound {bound}"))),
    }
}

/// (|e^{2 pi i x} - 1|, 2 pi <x>) where <x> is the distance to the nearest integer.
pub fn chord_bound(x: f64) -> (f64, f64) {
    let lhs = 2.0 * (PI * x).sin().abs();
    let dist = (x - x.round()).abs();
    (lhs, 2.0 * PI * dist)
}
