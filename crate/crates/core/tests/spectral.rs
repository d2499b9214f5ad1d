use std::f64::consts::PI;

use hypcount::fuchsian::{CountOptions, GroupPresentation};
use hypcount::numerics::PrecisionContext;
use hypcount::spectral::*;
use hypcount::specfun::{a_half, d_coeff};
use hypcount::transforms::{huber_dt, huber_dt_approx, MollifierConfig, TestFunction};

const LEN_L: f64 = 3.057141090203251;

fn synth(t_max: f64, seed: u64) -> Spectrum {
    synth_spectrum(LEN_L, t_max, 0.25, seed).unwrap()
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("hypcount-spectral-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn empty_file_gives_zero_sums() {
    let p = tmp("empty.txt");
    std::fs::write(&p, "len_l 2\nt_max 10\n").unwrap();
    let sp = load_spectrum(&p).unwrap();
    assert!(sp.data().is_empty());
    assert_eq!(weighted_period_sum(&sp, 0.0, 10.0, false).unwrap(), 0.0);
    assert_eq!(sp.law().sigma, None);
}

#[test]
fn exceptional_entry_is_parsed() {
    let p = tmp("exc.txt");
    std::fs::write(&p, "len_l 2\nexceptional 0.75 1\n").unwrap();
    let sp = load_spectrum(&p).unwrap();
    assert_eq!(sp.data().len(), 1);
    assert_eq!(sp.data()[0].param, SpectralParameter::Exceptional(0.75));
}

#[test]
fn schema_errors() {
    let p = tmp("neg.txt");
    std::fs::write(&p, "len_l 2\nprincipal 3 -1\n").unwrap();
    assert_eq!(load_spectrum(&p).unwrap_err().code(), "SCHEMA_ERROR");
    std::fs::write(&p, "principal 3 1\n").unwrap();
    assert_eq!(load_spectrum(&p).unwrap_err().code(), "SCHEMA_ERROR");
    std::fs::write(&p, "len_l 2\nweird 3 1\n").unwrap();
    assert_eq!(load_spectrum(&p).unwrap_err().code(), "SCHEMA_ERROR");
    assert_eq!(load_spectrum(&tmp("missing.txt")).unwrap_err().code(), "FILE_NOT_FOUND");
}

#[test]
fn file_roundtrip_is_bit_identical() {
    let sp = synth(30.0, 11);
    let a = tmp("rt_a.txt");
    let b = tmp("rt_b.txt");
    write_spectrum(&sp, &a).unwrap();
    let back = load_spectrum(&a).unwrap();
    write_spectrum(&back, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(back.data(), sp.data());
    assert_eq!(back.len_l().to_bits(), sp.len_l().to_bits());
}

#[test]
fn synthetic_examples() {
    assert!(synth_spectrum(LEN_L, 1.0, 0.25, 3).unwrap().data().is_empty());
    assert_eq!(synth(40.0, 5), synth(40.0, 5));
    assert_ne!(synth(40.0, 5).data(), synth(40.0, 6).data());
    let sp = synth(100.0, 7);
    let x = 50.0;
    let ratio = weighted_period_sum(&sp, 0.0, x, false).unwrap() / (LEN_L / PI * x);
    assert!((0.9..=1.1).contains(&ratio), "{ratio}");
    assert!(synth_spectrum(LEN_L, 0.5, 0.25, 1).is_err());
    assert!(synth_spectrum(LEN_L, 10.0, 0.0, 1).is_err());
}

#[test]
fn synthetic_law_and_windows() {
    for seed in 0..5 {
        let sp = synth(120.0, seed);
        let law = sp.law();
        assert_eq!(law.x0, 10.0);
        assert!(law.sigma.unwrap() <= 0.1, "seed {seed}: {:?}", law.sigma);
        let ts: Vec<f64> = sp.principal().map(|d| d.0).collect();
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        for x in [10.0, 30.0, 70.0, 110.0] {
            let m: f64 = sp.principal().filter(|d| d.0 > x && d.0 <= x + 1.0).map(|d| d.1).sum();
            let want = LEN_L / PI;
            assert!((m / want - 1.0).abs() <= 0.3, "window at {x}: {m} vs {want}");
        }
    }
}

#[test]
fn weighted_sum_examples() {
    let sp = synth(80.0, 2);
    assert_eq!(weighted_period_sum(&sp, -1.0, 10.0, false).unwrap_err().code(), "INVALID_INPUT");
    assert_eq!(weighted_period_sum(&sp, -0.5, 10.0, true).unwrap_err().code(), "INVALID_INPUT");
    let total = weighted_period_sum(&sp, 0.0, 80.0, false).unwrap();
    assert!((total / (LEN_L / PI * 80.0) - 1.0).abs() < 0.05);
    let ratios: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&t| weighted_period_sum(&sp, -2.0, t, true).unwrap() / t.powi(-1))
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 2.0, "{ratios:?}");
    let g: Vec<f64> = [10.0, 20.0, 40.0, 80.0]
        .iter()
        .map(|&t| weighted_period_sum(&sp, 0.5, t, false).unwrap() / t.powf(1.5))
        .collect();
    let (lo, hi) = g.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 2.0, "{g:?}");
}

#[test]
fn tail_sum_on_long_spectrum() {
    let sp = synth(400.0, 9);
    for t in [10.0, 20.0, 40.0, 80.0] {
        let r = weighted_period_sum(&sp, -2.0, t, true).unwrap() * t;
        assert!((0.5..=1.5).contains(&(r / (LEN_L / PI))), "T={t}: {r}");
    }
}

#[test]
fn main_term_examples() {
    let empty = Spectrum::from_data(vec![], 2.0, SpectrumSource::File("inline".into()), 10.0).unwrap();
    let v = main_term(&empty, 4.0 * PI, 2.0, 7.0).unwrap();
    assert!((v - 2.0 / (PI * PI) * 7.0).abs() < 1e-14);
    assert!(main_term(&empty, 4.0 * PI, 2.0, 0.5).is_err());

    let exc = Spectrum::from_data(
        vec![SpectralDatum { param: SpectralParameter::Exceptional(0.75), period_sq: 1.0 }],
        2.0,
        SpectrumSource::File("inline".into()),
        10.0,
    )
    .unwrap();
    let x = 40.0;
    let diff = main_term(&exc, 4.0 * PI, 2.0, x).unwrap() - main_term(&empty, 4.0 * PI, 2.0, x).unwrap();
    assert!((diff - d_coeff(0.75).unwrap() * x.powf(0.75)).abs() < 1e-12);
}

#[test]
fn main_term_monotone_and_linear() {
    let exc = |w: f64| {
        Spectrum::from_data(
            vec![SpectralDatum { param: SpectralParameter::Exceptional(0.75), period_sq: w }],
            LEN_L,
            SpectrumSource::File("inline".into()),
            10.0,
        )
        .unwrap()
    };
    let heavy = exc(1.0);
    let mut prev = 0.0;
    for k in 0..40 {
        let v = main_term(&heavy, 4.0 * PI, LEN_L, 1.0 + 7.0 * k as f64).unwrap();
        assert!(v > prev);
        prev = v;
    }
    let ratio = |sp: &Spectrum, x: f64| {
        main_term(sp, 4.0 * PI, LEN_L, 2.0 * x).unwrap() / main_term(sp, 4.0 * PI, LEN_L, x).unwrap()
    };
    let r = ratio(&exc(0.1), 1e4);
    assert!((r / 2.0 - 1.0).abs() < 0.01, "{r}");
    let gaps: Vec<f64> = [1e2, 1e4, 1e6, 1e8].iter().map(|&x| 2.0 - ratio(&heavy, x)).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0), "{gaps:?}");
}

#[test]
fn error_terms_examples() {
    let ctx = PrecisionContext::default();
    let m = ctx.float(3.0);
    let cyc = GroupPresentation::cyclic(&ctx, &m, 5.0).unwrap();
    let empty = Spectrum::from_data(vec![], cyc.len_l().to_f64(), SpectrumSource::File("inline".into()), 10.0).unwrap();
    let opts = CountOptions::default();
    let et = error_terms(&cyc, &empty, 20.0, &opts).unwrap();
    assert_eq!(et.count, 1);
    let lead = main_term(&empty, 5.0, cyc.len_l().to_f64(), 20.0).unwrap();
    assert_eq!(et.e, 1.0 - lead);
    assert_eq!(et.e_tilde, et.e);

    let bottom = Spectrum::from_data(
        vec![SpectralDatum { param: SpectralParameter::Principal(0.0), period_sq: 0.3 }],
        cyc.len_l().to_f64(),
        SpectrumSource::File("inline".into()),
        10.0,
    )
    .unwrap();
    let et = error_terms(&cyc, &bottom, 20.0, &opts).unwrap();
    let ah = a_half(20.0, 0.3).unwrap();
    assert_eq!(et.a_half, ah);
    assert!((et.e_tilde - et.e + ah).abs() <= 4.0 * f64::EPSILON * et.e.abs().max(ah));
}

#[test]
fn error_terms_on_bolza() {
    let ctx = PrecisionContext::default();
    let g = GroupPresentation::bolza(&ctx).unwrap();
    let sp = Spectrum::from_data(vec![], g.len_l().to_f64(), SpectrumSource::File("inline".into()), 10.0).unwrap();
    let et = error_terms(&g, &sp, 50.0, &CountOptions::default()).unwrap();
    assert_eq!(et.count, 25);
    // |E(50)| against the X^{2/3} envelope with a generous fitted constant
    assert!(et.e.abs() <= 2.0 * 50f64.powf(2.0 / 3.0), "{}", et.e);
}

#[test]
fn spectral_e_eps_examples() {
    let cfg = MollifierConfig::new(0.1).unwrap();
    let empty = Spectrum::from_data(vec![], LEN_L, SpectrumSource::File("inline".into()), 50.0).unwrap();
    assert_eq!(spectral_e_eps(&empty, 8.0, &cfg, 20.0).unwrap().value, 0.0);

    let one = Spectrum::from_data(
        vec![SpectralDatum { param: SpectralParameter::Principal(10.0), period_sq: 1.0 }],
        LEN_L,
        SpectrumSource::File("inline".into()),
        50.0,
    )
    .unwrap();
    let v = spectral_e_eps(&one, 8.0, &cfg, 20.0).unwrap();
    assert_eq!(v.value, 2.0 * huber_dt_approx(8.0, &cfg, 10.0).unwrap());
    assert_eq!(v.tail_bound, 0.0);
    assert!(spectral_e_eps(&one, 8.0, &cfg, 60.0).is_err());
}

#[test]
fn spectral_e_eps_is_linear_in_masses() {
    let cfg = MollifierConfig::new(0.1).unwrap();
    let sp = synth(60.0, 4);
    let doubled = Spectrum::from_data(
        sp.data().iter().map(|d| SpectralDatum { param: d.param, period_sq: 2.0 * d.period_sq }).collect(),
        sp.len_l(),
        SpectrumSource::File("inline".into()),
        60.0,
    )
    .unwrap();
    let a = spectral_e_eps(&sp, 12.3, &cfg, 50.0).unwrap();
    let b = spectral_e_eps(&doubled, 12.3, &cfg, 50.0).unwrap();
    assert_eq!(b.value, 2.0 * a.value);
    assert!(a.tail_bound > 0.0);
}

#[test]
fn spectral_e_eps_matches_exact_transform_route() {
    let ctx = PrecisionContext::default();
    let cfg = MollifierConfig::new(0.2).unwrap();
    let sp = synth(60.0, 8);
    let lines: Vec<(f64, f64)> = sp.principal().filter(|d| d.0 >= 1.0).take(50).collect();
    assert_eq!(lines.len(), 50);
    let cut = lines.last().unwrap().0;
    let r = 6.0;
    let approx = spectral_e_eps(&sp, r, &cfg, cut).unwrap().value;
    let f = TestFunction::smoothed_count(r, cfg).unwrap();
    let mut exact = 0.0;
    let mut budget = 0.0;
    for &(t, w) in &lines {
        exact += 2.0 * huber_dt(&f, t, &ctx).unwrap() * w;
        budget += 2.0 * 0.5 * t.powf(-1.5) * w;
    }
    assert!((approx - exact).abs() <= budget, "{approx} vs {exact} (budget {budget})");
}
