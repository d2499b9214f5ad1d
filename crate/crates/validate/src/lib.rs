//! Acceptance criteria for the counting lab, each returning a pass flag and a one-line summary.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use hypcount::experiments::{
    error_series, log_grid, mean_value_report, omega_experiment, specfun_suite, OmegaOptions, Verdict,
    A_HALF_WINDOW, HUBER_C,
};
use hypcount::fuchsian::{
    bridge_norm_bound, canonical_rep, coset_table, count_n, enumerate_ball, same_double_coset, CountOptions,
    EnumerationOptions, GroupPresentation,
};
use hypcount::numerics::{geodesic_axis_distance, Mat2, PrecisionContext};
use hypcount::resonance::{resonance_brute, resonance_find, ResonanceRequest, ResonanceResult};
use hypcount::specfun::{a_half, big_g, d_coeff};
use hypcount::spectral::{synth_spectrum, Spectrum, SpectrumSource};
use hypcount::transforms::{
    huber_dt, huber_dt_approx, huber_dt_definition, huber_dt_fs_route, weyl_f_from_g, weyl_g_from_f,
    MollifierConfig, SmoothedCount, TestFunction, WeylG,
};
use hypcount::Result;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {} ({:.1}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Runs `f`, turning a library error into a failure and enforcing the time limit.
pub fn run(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let start = Instant::now();
    let (mut pass, mut detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error {}: {e}", e.code())),
    };
    let elapsed = start.elapsed();
    if let Some(l) = limit {
        if elapsed > l {
            pass = false;
            detail = format!("{detail}; exceeded {}s", l.as_secs());
        }
    }
    Outcome { name: name.to_string(), pass, detail, elapsed }
}

fn bolza() -> Result<GroupPresentation> {
    GroupPresentation::bolza(&PrecisionContext::default())
}

fn empty_spectrum(group: &GroupPresentation) -> Result<Spectrum> {
    Spectrum::from_data(vec![], group.len_l().to_f64(), SpectrumSource::File("none".into()), 1.0)
}

/// cosh d(gI, I) from the endpoint geometry against max(|B|, 1) on random unimodular matrices.
pub fn distance_identity() -> Result<(bool, String)> {
    let ctx = PrecisionContext::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let th = ctx.float(rng.gen_range(0.0..2.0 * PI));
        let ph = ctx.float(rng.gen_range(0.0..2.0 * PI));
        let x = ctx.float(rng.gen_range(0.0..3.0));
        let g = Mat2::rotation(&ctx, &th)
            .mul(&Mat2::boost(&ctx, &x), &ctx)?
            .mul(&Mat2::rotation(&ctx, &ph), &ctx)?;
        let want = g.b_invariant().abs().max(&ctx.float(1));
        let got = geodesic_axis_distance(&g, &ctx).cosh;
        let rel = (Float::with_val(ctx.bits(), &got - &want) / &want).abs().to_f64();
        worst = worst.max(rel);
    }
    Ok((worst <= 1e-20, format!("max relative error {worst:.3e} over 1000 matrices")))
}

fn random_word(group: &GroupPresentation, rng: &mut ChaCha8Rng, max_len: usize) -> Result<Mat2> {
    let ctx = *group.ctx();
    let gens = group.generators();
    let mut g = Mat2::identity(&ctx);
    for _ in 0..rng.gen_range(1..=max_len) {
        g = g.mul(&gens[rng.gen_range(0..gens.len())], &ctx)?;
    }
    Ok(g)
}

/// canonical_rep is idempotent and constant along gamma1^k g gamma1^l.
pub fn double_coset_soundness() -> Result<(bool, String)> {
    let group = bolza()?;
    let ctx = *group.ctx();
    let m = group.m().clone();
    let gamma = group.gamma1();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    for _ in 0..100 {
        let h = random_word(&group, &mut rng, 6)?;
        let r = canonical_rep(&h, &m, &ctx)?;
        if canonical_rep(&r, &m, &ctx)?.grid_key(&ctx) != r.grid_key(&ctx) {
            failures += 1;
        }
        for _ in 0..4 {
            let k = rng.gen_range(-5i64..=5);
            let l = rng.gen_range(-5i64..=5);
            let t = gamma.pow(k, &ctx)?.mul(&h, &ctx)?.mul(&gamma.pow(l, &ctx)?, &ctx)?;
            let rt = canonical_rep(&t, &m, &ctx)?;
            if !rt.approx_eq(&r, ctx.tol_eq()) || !same_double_coset(&h, &t, &m, &ctx)? {
                failures += 1;
            }
        }
    }
    Ok((failures == 0, format!("{failures} failures over 100 elements and 400 twists")))
}

fn twist_equivalent(g1: &[f64; 4], g2: &[f64; 4], m: f64, kmax: i32) -> bool {
    for k in -kmax..=kmax {
        for l in -kmax..=kmax {
            let u = m.powi(k + l);
            let v = m.powi(k - l);
            let t = [g1[0] * u, g1[1] * v, g1[2] / v, g1[3] / u];
            for sign in [1.0, -1.0] {
                if t.iter().zip(g2).all(|(x, y)| (sign * x - y).abs() <= 1e-9 * y.abs().max(1.0)) {
                    return true;
                }
            }
        }
    }
    false
}

fn pairwise_oracle(group: &GroupPresentation, x: f64) -> Result<usize> {
    let bound = bridge_norm_bound(x, group.len_l().to_f64(), 4.0);
    let ball = enumerate_ball(group, bound, &EnumerationOptions::default())?;
    let m = group.m().to_f64();
    let mut classes: Vec<[f64; 4]> = Vec::new();
    for e in &ball.elements {
        if e.mat.b_invariant().to_f64().abs() > x + 1e-12 {
            continue;
        }
        let g = e.mat.to_f64();
        if !classes.iter().any(|h| twist_equivalent(h, &g, m, 12)) {
            classes.push(g);
        }
    }
    Ok(classes.len())
}

/// count_n against a pairwise twist reduction of the whole ball, with the margin rerun.
pub fn counting_oracle() -> Result<(bool, String)> {
    let group = bolza()?;
    let mut ok = true;
    let mut parts = Vec::new();
    for x in [10.0, 25.0, 50.0] {
        let n = count_n(&group, x, &CountOptions::default())?;
        let oracle = pairwise_oracle(&group, x)?;
        ok &= n.count == oracle && n.certified_count == Some(n.count);
        parts.push(format!("N({x})={} oracle={oracle} margin+1={:?}", n.count, n.certified_count));
    }
    Ok((ok, parts.join(", ")))
}

/// N(X)/(a X) over the two top octaves of [10, x_max].
pub fn leading_order_trend(x_max: f64) -> Result<(bool, String)> {
    let group = bolza()?;
    let a = group.main_coefficient();
    let table = coset_table(&group, x_max, &CountOptions::default())?;
    let tol = group.ctx().tol_eq();
    let ratios = |lo: f64, hi: f64| -> Vec<f64> {
        log_grid(lo, hi, 33).into_iter().map(|x| table.count(x, tol) as f64 / (a * x)).collect()
    };
    let top = ratios(x_max / 2.0, x_max);
    let prev = ratios(x_max / 4.0, x_max / 2.0);
    let dev = |r: &[f64]| r.iter().map(|v| (v - 1.0).abs()).sum::<f64>() / r.len() as f64;
    let in_band = top.iter().all(|r| (0.5..=1.5).contains(r));
    let (lo, hi) = top.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
    let (d_top, d_prev) = (dev(&top), dev(&prev));
    Ok((
        in_band && d_top < d_prev && table.certified_count == Some(table.cosets.len()),
        format!(
            "N({x_max})={}, top-octave ratio in [{lo:.3}, {hi:.3}], mean |ratio-1| {d_top:.4} vs {d_prev:.4} on the octave below",
            table.cosets.len()
        ),
    ))
}

/// Envelope slope of |E| and the mean-square ratio to X log^2 X.
pub fn error_growth(x_max: f64) -> Result<(bool, String)> {
    let group = bolza()?;
    let sp = empty_spectrum(&group)?;
    let opts = CountOptions::default();
    let series = error_series(&group, &sp, &log_grid(10.0, x_max, 40), &opts)?;
    let slope = series.fitted_constants["envelope_slope"];
    let mv = mean_value_report(&group, &sp, &[50.0, 100.0, 200.0], 512, &opts)?;
    let ratios: Vec<String> = mv.rows.iter().map(|r| format!("{:.4}", r[2])).collect();
    Ok((
        slope <= 0.75 && series.verdict == Verdict::Pass && mv.verdict == Verdict::Pass,
        format!("envelope slope {slope:.3} on [10, {x_max}]; mean-square / (X log^2 X) = [{}]", ratios.join(", ")),
    ))
}

pub fn specfun_invariants() -> Result<(bool, String)> {
    let s = specfun_suite(&PrecisionContext::default())?;
    let ok = s.reflection_max <= 1e-20 && s.signs_max <= 1e-20 && s.passed();
    let failed: Vec<&str> = s.checks.iter().filter(|(_, v)| !**v).map(|(k, _)| k.as_str()).collect();
    let c = s.re_g_negative_from.map_or("none".to_string(), |c| format!("{c:.3}"));
    Ok((
        ok,
        format!(
            "reflection {:.2e}, signs {:.2e}, sqrt(t)|G| in [{:.4}, {:.4}] vs [{}, {}], C = {c} (Re G >= 0 at {}/{} samples), tau {:.5}; failed: [{}]",
            s.reflection_max,
            s.signs_max,
            s.g_range.0,
            s.g_range.1,
            s.g_window.0,
            s.g_window.1,
            s.re_g_nonnegative_samples,
            s.re_g_samples,
            s.tau,
            failed.join(", ")
        ),
    ))
}

pub fn transform_consistency() -> Result<(bool, String)> {
    let ctx = PrecisionContext::default();
    let tol_quad = ctx.tol_quad();
    let cfg = |e: f64| MollifierConfig::new(e);

    let sc = SmoothedCount::new(5.0, cfg(0.2)?)?;
    let span = (sc.flat_end(), sc.support_end());
    let f = TestFunction::generic(
        move |u| {
            let dg = |y: f64| sc.dg(y);
            weyl_f_from_g(&WeylG::analytic(&dg, span), u).map(|v| v.value).unwrap_or(f64::NAN)
        },
        1.0,
    )?;
    let top = sc.support_end();
    let mut weyl: f64 = 0.0;
    for k in 0..=24 {
        let u = 1.0 + (top - 1.0) * (k as f64 / 24.0).powi(2);
        weyl = weyl.max((weyl_g_from_f(&f, u)? - sc.g(u)?).abs());
    }

    let mut routes: f64 = 0.0;
    for t in [1.0, 5.0, 20.0] {
        for r in [5.0, 10.0] {
            for e in [0.05, 0.2] {
                let sc = SmoothedCount::new(r, cfg(e)?)?;
                let a = huber_dt_definition(&TestFunction::SmoothedCount(sc), t)?;
                let b = huber_dt_fs_route(&sc, t, &ctx)?;
                routes = routes.max((a - b).abs());
            }
        }
    }

    let mut resid: f64 = 0.0;
    for t in [5.0, 20.0, 40.0] {
        for r in [5.0, 8.0] {
            let c = cfg(0.05)?;
            let d = huber_dt(&TestFunction::smoothed_count(r, c)?, t, &ctx)?;
            resid = resid.max((d - huber_dt_approx(r, &c, t)?).abs() * t.powf(1.5));
        }
    }
    Ok((
        weyl <= 20.0 * tol_quad && routes <= 10.0 * tol_quad && resid <= HUBER_C,
        format!(
            "Weyl roundtrip {:.2e}·tol_quad, two routes {:.2e}·tol_quad over 12 points, approx residual {resid:.3}·t^-3/2 (c = {HUBER_C})",
            weyl / tol_quad,
            routes / tol_quad
        ),
    ))
}

pub fn a_half_growth() -> Result<(bool, String)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..=32 {
        let x = 10f64.powf(2.0 + 0.125 * k as f64);
        let r = a_half(x, 1.0)? / (x.sqrt() * x.ln());
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((
        lo >= A_HALF_WINDOW.0 && hi <= A_HALF_WINDOW.1,
        format!("a_half/(sqrt(X) log X) in [{lo:.4}, {hi:.4}] vs window [{}, {}]", A_HALF_WINDOW.0, A_HALF_WINDOW.1),
    ))
}

fn honors(q: &ResonanceRequest, r: &Result<ResonanceResult>) -> bool {
    match r {
        Ok(r) => {
            let top = q.m() * q.t().powi(q.rs().len() as i32);
            r.r >= q.m() && r.r <= top && r.max_defect < q.defect_bound()
        }
        Err(_) => false,
    }
}

pub fn resonance_guarantee() -> Result<(bool, String)> {
    let base = [1.0, 2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt(), PI, 7f64.sqrt()];
    let mut cases = 0;
    let mut bad = Vec::new();
    for n in 1..=6 {
        for t in [2.0, 3.5, 6.0, 10.0] {
            for m in [1.0, 2.0] {
                let q = ResonanceRequest::new(base[..n].to_vec(), m, t)?;
                let a = resonance_find(&q);
                let b = resonance_brute(&q);
                cases += 1;
                if !honors(&q, &a) || !honors(&q, &b) || a.is_ok() != b.is_ok() {
                    bad.push(format!("n={n} T={t} M={m}"));
                }
            }
        }
    }
    Ok((bad.is_empty(), format!("{cases} cases, both methods; failing: [{}]", bad.join("; "))))
}

pub fn omega_mechanism() -> Result<(bool, String, Vec<String>)> {
    let group = bolza()?;
    let sp = synth_spectrum(group.len_l().to_f64(), 140.0, 0.25, 7)?;
    let sigma = sp.law().sigma.unwrap_or(f64::INFINITY);
    let rep = omega_experiment(&sp, &[0.2, 0.1, 0.05, 0.025], &OmegaOptions::default())?;
    let exponent = rep.fitted_constants.get("exponent").copied().unwrap_or(f64::NAN);
    let dominant = rep.steps.iter().all(|s| s.resonant.abs() > s.nonresonant_median);
    let mut table = vec![format!("{:>7} {:>9} {:>10} {:>12} {:>12} {:>9}", "eps", "T", "R", "|e(R)|", "median", "log R")];
    for s in &rep.steps {
        table.push(format!(
            "{:>7} {:>9.3} {:>10.2} {:>12.5} {:>12.5} {:>9.4}",
            s.epsilon,
            s.t,
            s.r,
            s.resonant.abs(),
            s.nonresonant_median,
            s.r.ln()
        ));
    }
    let ok = sigma <= 0.1 && dominant && (0.8..=1.2).contains(&exponent) && rep.verdict == Verdict::Pass;
    Ok((
        ok,
        format!(
            "law sigma {sigma:.3}, resonant above median at every step: {dominant}, exponent {exponent:.3}, verdict {:?}",
            rep.verdict
        ),
        table,
    ))
}

/// Re G(1/2 + 50i) < 0.
pub fn example_re_g_at_fifty() -> Result<(bool, String)> {
    let g = big_g(Complex64::new(0.5, 50.0))?;
    Ok((g.re < 0.0, format!("G(1/2+50i) = {:.6} {:+.6}i", g.re, g.im)))
}

/// D(0.500001) > 1e5 D(0.6).
pub fn example_d_pole() -> Result<(bool, String)> {
    let near = d_coeff(0.500001)?;
    let far = d_coeff(0.6)?;
    Ok((near > 1e5 * far, format!("D(0.500001) = {near:.4e}, 1e5·D(0.6) = {:.4e}", 1e5 * far)))
}

/// The two-step omega run with seed 7, as driven by the command line.
pub fn example_omega_two_steps() -> Result<(bool, String)> {
    let group = bolza()?;
    let sp = synth_spectrum(group.len_l().to_f64(), 140.0, 0.25, 7)?;
    let rep = omega_experiment(&sp, &[0.2, 0.1], &OmegaOptions::default())?;
    Ok((
        rep.rows.len() == 2 && rep.verdict == Verdict::Pass,
        format!("{} rows, verdict {:?}", rep.rows.len(), rep.verdict),
    ))
}
