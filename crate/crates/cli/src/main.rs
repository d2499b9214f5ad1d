//! `hypcount`: command-line driver for the double-coset counting lab.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use hypcount::experiments::{
    error_series, log_grid, mean_value_report, omega_experiment, specfun_suite, ExperimentReport, OmegaOptions,
};
use hypcount::fuchsian::{count_n, CountOptions, GroupPresentation};
use hypcount::numerics::{to_decimal, PrecisionContext};
use hypcount::resonance::{resonance_brute, resonance_find, ResonanceRequest, FIND_BUDGET};
use hypcount::spectral::{load_spectrum, synth_spectrum, write_spectrum, Spectrum, SpectrumSource};
use hypcount::{Error, Result};

/// Geodesic double-coset counting, spectral error terms and resonance experiments.
#[derive(Debug, Parser, Serialize)]
#[command(name = "hypcount", version, arg_required_else_help = true)]
struct RunConfig {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 128)]
    bits: u32,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory receiving CSV and JSON reports.
    #[arg(long, global = true, default_value = "hypcount-out")]
    out: PathBuf,
    /// Seed for synthetic spectra and random baselines.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Group presentation JSON; the bundled genus-2 group when omitted.
    #[arg(long, global = true)]
    group: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    /// Count double cosets with |B| <= X and write the coset table.
    Count {
        /// Bound on |B|.
        #[arg(long)]
        x: f64,
        /// Extra norm margin for the enumeration ball.
        #[arg(long, default_value_t = 2.0)]
        margin: f64,
        /// Skip the margin + 1 stabilization rerun.
        #[arg(long)]
        no_certify: bool,
    },
    /// Tabulate N, M, E and the shifted error over a grid of X.
    ErrorSeries {
        /// Explicit comma-separated X values.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10.0)]
        from: f64,
        #[arg(long, default_value_t = 200.0)]
        to: f64,
        /// Number of log-spaced points between --from and --to.
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Mean square of E over [X, 2X] against X log^2 X.
    Meanvalue {
        /// Comma-separated X values.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
        xs: Vec<f64>,
        /// Midpoint samples over [X, 2X].
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Resonant versus non-resonant smoothed error over an epsilon schedule.
    Omega {
        /// Comma-separated mollifier widths, one experiment step each.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
        schedule: Vec<f64>,
        /// Mollifier decay order.
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Random radii drawn for the non-resonant median.
        #[arg(long, default_value_t = 32)]
        baseline: usize,
        /// Cap on the number of pigeonhole boxes.
        #[arg(long, default_value_t = FIND_BUDGET)]
        budget: f64,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Find R in [M, M T^n] with every |exp(i r_j R) - 1| < 4 pi / T.
    Resonate {
        /// Comma-separated frequencies r_j.
        #[arg(long, value_delimiter = ',', required = true)]
        rs: Vec<f64>,
        /// Base radius.
        #[arg(long = "M")]
        m: f64,
        /// Box count per axis; the defect bound is 4 pi / T.
        #[arg(long = "T")]
        t: f64,
        #[arg(long, value_enum, default_value_t = Method::Pigeonhole)]
        method: Method,
    },
    /// Run the special-function invariant suite and print the pinned constants.
    SpecfunCheck,
    /// Write a seeded synthetic spectrum file.
    SynthSpectrum {
        /// Closed-geodesic length; the group's when omitted.
        #[arg(long)]
        len_l: Option<f64>,
        #[arg(long, default_value_t = 140.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.25)]
        density: f64,
        /// Destination; <out>/spectrum.txt when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Pigeonhole,
    Brute,
}

#[derive(Debug, Args, Serialize)]
struct SpectrumArgs {
    /// Spectral data file.
    #[arg(long, conflicts_with = "synthetic")]
    spectrum: Option<PathBuf>,
    /// Use a seeded synthetic spectrum (always the case for omega without --spectrum).
    #[arg(long)]
    synthetic: bool,
    /// Closed-geodesic length for synthetic data; the group's when omitted.
    #[arg(long)]
    len_l: Option<f64>,
    /// Largest spectral parameter of synthetic data.
    #[arg(long, default_value_t = 140.0)]
    t_max: f64,
    /// Synthetic eigenvalue density: about density * t^2 parameters below t.
    #[arg(long, default_value_t = 0.25)]
    density: f64,
}

impl SpectrumArgs {
    fn resolve(&self, len_l: f64, seed: u64, synthetic_default: bool) -> Result<Spectrum> {
        if let Some(p) = &self.spectrum {
            return load_spectrum(p);
        }
        let len_l = self.len_l.unwrap_or(len_l);
        if self.synthetic || synthetic_default {
            return synth_spectrum(len_l, self.t_max, self.density, seed);
        }
        Spectrum::from_data(vec![], len_l, SpectrumSource::File("none".into()), self.t_max)
    }
}

impl RunConfig {
    fn validate(&self) -> Result<PrecisionContext> {
        if self.threads == Some(0) {
            return Err(Error::InvalidInput("--threads must be positive".into()));
        }
        let ctx = PrecisionContext::new(self.bits)?;
        match &self.command {
            Cmd::Count { x, margin, .. } => {
                positive("--x", *x)?;
                positive("--margin", *margin)?;
            }
            Cmd::ErrorSeries { grid, from, to, points, .. } => match grid {
                Some(g) if g.is_empty() => return Err(Error::InvalidInput("--grid is empty".into())),
                Some(g) => g.iter().try_for_each(|&x| positive("--grid", x))?,
                None => {
                    positive("--from", *from)?;
                    if !(to > from) || *points < 2 {
                        return Err(Error::InvalidInput("need --to > --from and --points >= 2".into()));
                    }
                }
            },
            Cmd::Meanvalue { xs, .. } => {
                if xs.is_empty() {
                    return Err(Error::InvalidInput("--xs is empty".into()));
                }
                xs.iter().try_for_each(|&x| positive("--xs", x))?;
            }
            Cmd::Omega { schedule, .. } => {
                if schedule.is_empty() {
                    return Err(Error::InvalidInput("--schedule is empty".into()));
                }
                if let Some(e) = schedule.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
                    return Err(Error::InvalidInput(format!("schedule entry {e} is outside (0, 1)")));
                }
            }
            Cmd::Resonate { .. } | Cmd::SpecfunCheck | Cmd::SynthSpectrum { .. } => {}
        }
        Ok(ctx)
    }

    fn load_group(&self, ctx: &PrecisionContext) -> Result<GroupPresentation> {
        match &self.group {
            Some(p) => GroupPresentation::load(ctx, p),
            None => GroupPresentation::bolza(ctx),
        }
    }
}

fn positive(flag: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{flag} must be positive and finite, got {v}")))
    }
}

fn write(dir: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), body)?;
    Ok(())
}

fn json_text(v: &serde_json::Value) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::InvalidInput(format!("json: {e}")))
}

fn envelope(cfg: &RunConfig, body: serde_json::Value) -> serde_json::Value {
    let mut doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "precision_bits": cfg.bits,
        "config": cfg,
    });
    if let (Some(d), serde_json::Value::Object(extra)) = (doc.as_object_mut(), body) {
        d.extend(extra);
    }
    doc
}

fn emit_report(cfg: &RunConfig, stem: &str, mut rep: ExperimentReport) -> Result<()> {
    rep.precision_bits = cfg.bits;
    write(&cfg.out, &format!("{stem}.csv"), &rep.to_csv()?)?;
    let report: serde_json::Value =
        serde_json::from_str(&rep.to_json()?).map_err(|e| Error::InvalidInput(format!("json: {e}")))?;
    write(&cfg.out, &format!("{stem}.json"), &json_text(&envelope(cfg, json!({ "report": report })))?)?;
    for (k, v) in &rep.fitted_constants {
        println!("{k} {v}");
    }
    println!("verdict {}", serde_json::to_value(rep.verdict).unwrap_or_default().as_str().unwrap_or("?"));
    Ok(())
}

fn run(cfg: &RunConfig) -> Result<u8> {
    let ctx = cfg.validate()?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    match &cfg.command {
        Cmd::Count { x, margin, no_certify } => {
            let group = cfg.load_group(&ctx)?;
            let opts = CountOptions { margin: *margin, certify: !no_certify, ..CountOptions::default() };
            let res = count_n(&group, *x, &opts)?;
            let names = group.generator_names();
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
            w.write_record(["B", "a", "b", "c", "d", "word"]).map_err(csv_err)?;
            for c in &res.cosets {
                let word: Vec<&str> = c.word.iter().map(|&i| names[i as usize].as_str()).collect();
                let [a, b, cc, d] = c.rep.entries();
                w.write_record([
                    to_decimal(&c.b_value),
                    to_decimal(a),
                    to_decimal(b),
                    to_decimal(cc),
                    to_decimal(d),
                    word.join(" "),
                ])
                .map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
            write(&cfg.out, "count.csv", &String::from_utf8_lossy(&bytes))?;
            let body = json!({
                "group": group.label(),
                "x": x,
                "count": res.count,
                "certified_count": res.certified_count,
            });
            write(&cfg.out, "count.json", &json_text(&envelope(cfg, body))?)?;
            println!("{}", res.count);
        }
        Cmd::ErrorSeries { grid, from, to, points, spectrum } => {
            let group = cfg.load_group(&ctx)?;
            let sp = spectrum.resolve(group.len_l().to_f64(), cfg.seed, false)?;
            let xs = grid.clone().unwrap_or_else(|| log_grid(*from, *to, *points));
            emit_report(cfg, "error_series", error_series(&group, &sp, &xs, &CountOptions::default())?)?;
        }
        Cmd::Meanvalue { xs, samples, spectrum } => {
            let group = cfg.load_group(&ctx)?;
            let sp = spectrum.resolve(group.len_l().to_f64(), cfg.seed, false)?;
            emit_report(cfg, "mean_value", mean_value_report(&group, &sp, xs, *samples, &CountOptions::default())?)?;
        }
        Cmd::Omega { schedule, k, baseline, budget, spectrum } => {
            let len_l = match (&spectrum.spectrum, spectrum.len_l) {
                (None, None) => cfg.load_group(&ctx)?.len_l().to_f64(),
                (_, l) => l.unwrap_or(0.0),
            };
            let sp = spectrum.resolve(len_l, cfg.seed, true)?;
            let opts = OmegaOptions { k: *k, seed: cfg.seed, baseline_samples: *baseline, budget: *budget };
            emit_report(cfg, "omega", omega_experiment(&sp, schedule, &opts)?)?;
        }
        Cmd::Resonate { rs, m, t, method } => {
            let req = ResonanceRequest::new(rs.clone(), *m, *t)?;
            let res = match method {
                Method::Pigeonhole => resonance_find(&req)?,
                Method::Brute => resonance_brute(&req)?,
            };
            let body = json!({ "result": res, "defect_bound": req.defect_bound() });
            write(&cfg.out, "resonate.json", &json_text(&envelope(cfg, body))?)?;
            println!("R {}", res.r);
            println!("defect {}", res.max_defect);
            println!("bound {}", req.defect_bound());
        }
        Cmd::SpecfunCheck => {
            let suite = specfun_suite(&ctx)?;
            write(&cfg.out, "specfun_check.json", &json_text(&envelope(cfg, json!({ "suite": suite })))?)?;
            println!("c1 {}", suite.g_window.0);
            println!("c2 {}", suite.g_window.1);
            match suite.re_g_negative_from {
                Some(c) => println!("C {c}"),
                None => println!("C none"),
            }
            println!("tau {}", suite.tau);
            for (name, ok) in &suite.checks {
                println!("{name} {}", if *ok { "pass" } else { "fail" });
            }
            if !suite.passed() {
                let failed: Vec<&str> =
                    suite.checks.iter().filter(|(_, ok)| !**ok).map(|(n, _)| n.as_str()).collect();
                report_error("CHECK_FAILED", &format!("failed checks: {}", failed.join(", ")));
                return Ok(3);
            }
        }
        Cmd::SynthSpectrum { len_l, t_max, density, output } => {
            let len_l = match len_l {
                Some(l) => *l,
                None => cfg.load_group(&ctx)?.len_l().to_f64(),
            };
            let sp = synth_spectrum(len_l, *t_max, *density, cfg.seed)?;
            let path = output.clone().unwrap_or_else(|| cfg.out.join("spectrum.txt"));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            write_spectrum(&sp, &path)?;
            println!("{}", path.display());
        }
    }
    Ok(0)
}

fn report_error(code: &str, message: &str) {
    eprintln!("{}", json!({ "error": { "code": code, "message": message } }));
}

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand | ErrorKind::MissingSubcommand => {
                    if !e.to_string().contains("Usage") {
                        let _ = RunConfig::command().print_help();
                    }
                    ExitCode::from(1)
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            report_error(e.code(), &e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
