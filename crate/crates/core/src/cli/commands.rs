//! Command implementations.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::pipeline::{fit_dataset, FitOptions};
use super::{FitArgs, IngestArgs, Manifest, ReportArgs, SbcArgs, SimulateArgs, VariantArg};
use crate::diagnostics::{RHAT_RELAXED, RHAT_STRICT};
use crate::error::{Error, Result};
use crate::io::{self, fmt_f64, fmt_opt, Dataset, KeyValues};
use crate::linalg::Matrix;
use crate::model::Variant;
use crate::sbc::{self, ConjugateMode, ConjugateNormal, LatentGpSbc, SbcConfig, SbcOutcome, SbcProblem};
use crate::simgen::{self, ScenarioSpec};

pub const FIT_META: &str = "fit.meta";

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(super) fn simulate(a: &SimulateArgs, argv: &[String]) -> Result<()> {
    let mut spec = ScenarioSpec::new(a.scenario, a.n, a.d, a.seed).map_err(to_usage)?;
    if let Some(s) = a.s {
        spec.s = s;
        spec.validate().map_err(to_usage)?;
    }
    let mut manifest = Manifest::start("simulate", argv);
    manifest
        .config("scenario", a.scenario)
        .config("n", a.n)
        .config("d", a.d)
        .config("seed", a.seed)
        .config("s", fmt_f64(spec.s));
    let ds = simgen::generate(&spec)?;
    io::write_simulated(&a.out, &ds)?;
    manifest
        .output("dataset", &a.out.join(io::DATASET_CSV))
        .output("meta", &a.out.join(io::DATASET_META));
    manifest.finish(&a.out)?;
    println!(
        "simulated {}: N={} D={} seed={} -> {}",
        a.scenario,
        a.n,
        a.d,
        a.seed,
        a.out.join(io::DATASET_CSV).display()
    );
    Ok(())
}

fn to_usage(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Usage(m),
        other => other,
    }
}

pub(super) fn fit(a: &FitArgs, argv: &[String]) -> Result<()> {
    let ds = io::read_dataset(&a.data)?;
    let opts = FitOptions {
        family: a.family,
        exact: a.variant == VariantArg::Exact,
        m: a.m,
        force_m: a.force_m,
        boundary_factor: a.c,
        priors: a.priors,
        s: a.s,
        allow_large_exact: a.allow_large_exact,
        sampler: a.sampler.config(),
    };
    opts.sampler.validate().map_err(to_usage)?;
    let mut manifest = Manifest::start("fit", argv);
    manifest
        .config("data", a.data.display())
        .config("family", a.family)
        .config("variant", if opts.exact { "exact" } else { "hsgp" })
        .config("m", a.m.map_or("auto".to_string(), |m| m.to_string()))
        .config("c", fmt_f64(a.c))
        .config("seed", a.sampler.seed)
        .config("iterations", a.sampler.iterations)
        .config("warmup", a.sampler.warmup)
        .config("chains", a.sampler.chains);
    let out = fit_dataset(&ds, &opts)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    ensure_dir(&a.out)?;
    let draws_path = a.out.join(io::DRAWS);
    let summary_path = a.out.join(io::SUMMARY);
    io::write_draws(&draws_path, &out.chains)?;
    io::write_summary(&summary_path, &out.report.params)?;

    let spec = out.model.spec();
    let mut meta = KeyValues::new();
    meta.set("data", a.data.display());
    for key in ["scenario", "source"] {
        if let Some(v) = ds.meta.get(key) {
            meta.set(key, v);
        }
    }
    meta.set("n", ds.n()).set("d", ds.d());
    meta.set("family", spec.family).set("variant", spec.variant.tag());
    match &spec.variant {
        Variant::Hsgp(cfg) => {
            meta.set("m", cfg.m);
            meta.set_f64("half_width", cfg.half_width);
            meta.set_f64("center", cfg.center);
            meta.set_f64("boundary_factor", cfg.boundary_factor);
        }
        Variant::Exact => {
            meta.set("m", "NA");
        }
    }
    meta.set("m_min", out.m_min.map_or("NA".to_string(), |m| m.to_string()));
    meta.set("priors", out.preset.tag());
    let p = &spec.priors;
    meta.set("rho_prior", p.rho).set("alpha_prior", p.alpha).set("sigma_prior", p.sigma);
    meta.set_f64("s", spec.s);
    meta.set("seed", a.sampler.seed);
    meta.set_list("step_size", &out.chains.iter().map(|c| c.step_size).collect::<Vec<_>>());
    meta.set("divergences", out.chains.iter().map(|c| c.divergences()).sum::<usize>());
    meta.set("max_rhat", fmt_opt(out.report.max_rhat()));
    meta.set("rhat_above_1.01", out.report.flagged(RHAT_STRICT).len());
    meta.set("rhat_above_1.1", out.report.flagged(RHAT_RELAXED).len());
    meta.set("warnings", out.warnings.len());
    meta.write(&a.out.join(FIT_META))?;

    manifest
        .output("draws", &draws_path)
        .output("summary", &summary_path)
        .output("fit_meta", &a.out.join(FIT_META));
    for (i, w) in out.warnings.iter().enumerate() {
        manifest.kv.set(format!("warning.{}", i + 1), w);
    }
    manifest.finish(&a.out)?;
    println!(
        "fit {} {} M={} -> {} ({} primary parameters, max R-hat {})",
        spec.family,
        spec.variant.tag(),
        meta.get("m").unwrap_or("NA"),
        summary_path.display(),
        out.report.params.len(),
        fmt_opt(out.report.max_rhat())
    );
    let relaxed = out.report.flagged(RHAT_RELAXED).len();
    if a.strict_rhat && relaxed > 0 {
        return Err(Error::Sampler(format!(
            "{relaxed} primary parameters have R-hat above {RHAT_RELAXED} (--strict-rhat)"
        )));
    }
    Ok(())
}

fn gamma_rows(out: &SbcOutcome, all: bool) -> Vec<Vec<String>> {
    out.gamma
        .iter()
        .map(|g| {
            let score = if all { g.score_all } else { g.score };
            let mut row = vec![g.name.clone()];
            match score {
                Some(s) => row.extend([
                    fmt_f64(s.log_gamma),
                    fmt_f64(s.threshold),
                    fmt_f64(s.margin()),
                    s.pass.to_string(),
                ]),
                None => row.extend(["NA", "NA", "NA", "NA"].map(String::from)),
            }
            if all {
                row.push((g.trials_used + g.trials_excluded).to_string());
            } else {
                row.push(g.trials_used.to_string());
                row.push(g.trials_excluded.to_string());
            }
            row
        })
        .collect()
}

pub(super) fn sbc(a: &SbcArgs, argv: &[String]) -> Result<()> {
    if a.trials < 2 {
        return Err(Error::Usage(format!("--trials must be at least 2, got {}", a.trials)));
    }
    let sampler = a.sampler.config();
    sampler.validate().map_err(to_usage)?;
    let config = SbcConfig {
        trials: a.trials,
        h: a.h,
        coverage: a.coverage,
        null_sims: a.null_sims,
        seed: a.sampler.seed,
        ..SbcConfig::default()
    };
    let mut manifest = Manifest::start("sbc", argv);
    let problem: Box<dyn SbcProblem> = if a.conjugate {
        manifest.config("problem", "conjugate");
        let mut p = ConjugateNormal::new(ConjugateMode::Sampler(sampler.clone()));
        p.sd_scale = a.conjugate_sd_scale;
        Box::new(p)
    } else {
        let scenario = ScenarioSpec::new(a.scenario, a.n, a.d, a.sampler.seed).map_err(to_usage)?;
        let family = a.family.unwrap_or(a.scenario.family());
        let mut p = LatentGpSbc::hsgp(scenario, family, sampler.clone())?;
        if a.exact {
            p.m = None;
        } else if let Some(m) = a.m {
            p.m = Some(m);
        }
        manifest
            .config("problem", "latent-gp")
            .config("scenario", a.scenario)
            .config("n", a.n)
            .config("d", a.d)
            .config("family", family)
            .config("m", p.m.map_or("exact".to_string(), |m| m.to_string()));
        Box::new(p)
    };
    manifest
        .config("trials", a.trials)
        .config("h", a.h)
        .config("coverage", fmt_f64(a.coverage))
        .config("null_sims", a.null_sims)
        .config("seed", a.sampler.seed)
        .config("iterations", a.sampler.iterations)
        .config("warmup", a.sampler.warmup);
    let out = sbc::run_sbc(problem.as_ref(), &config)?;
    ensure_dir(&a.out)?;
    let records = a.out.join("sbc_records.ndjson");
    let failures = a.out.join("sbc_failures.ndjson");
    let gamma = a.out.join("sbc_gamma.csv");
    let gamma_all = a.out.join("sbc_gamma_all.csv");
    let bands = a.out.join("sbc_bands.csv");
    io::write_ndjson(&records, &out.records)?;
    io::write_ndjson(&failures, &out.failures)?;
    io::write_table(
        &gamma,
        &["name", "log_gamma", "threshold", "log_gamma_minus_threshold", "pass", "trials_used", "trials_excluded"],
        &gamma_rows(&out, false),
    )?;
    io::write_table(
        &gamma_all,
        &["name", "log_gamma", "threshold", "log_gamma_minus_threshold", "pass", "trials"],
        &gamma_rows(&out, true),
    )?;
    let completed = a.trials - out.failures.len();
    if completed >= 1 {
        let b = sbc::ecdf_bands(completed, a.h, a.coverage, a.null_sims, a.sampler.seed)?;
        let rows: Vec<Vec<String>> = (0..b.h)
            .map(|k| vec![(k + 1).to_string(), fmt_f64(b.z[k]), b.lower[k].to_string(), b.upper[k].to_string()])
            .collect();
        io::write_table(&bands, &["k", "z", "lower", "upper"], &rows)?;
        manifest.output("bands", &bands);
    }
    for f in &out.failures {
        eprintln!("warning: trial {} failed: {}", f.trial, f.message);
    }
    if !out.unconverged_trials.is_empty() {
        eprintln!(
            "warning: {} trials flagged as not converged and excluded from the headline scores",
            out.unconverged_trials.len()
        );
    }
    let frac = out.pass_fraction(|_| true);
    let all_pass = out.gamma.iter().all(|g| g.score.is_some_and(|s| s.pass));
    manifest
        .output("records", &records)
        .output("failures", &failures)
        .output("gamma", &gamma)
        .output("gamma_all", &gamma_all);
    manifest.kv.set("result.pass_fraction", fmt_f64(frac));
    manifest.kv.set("result.pass", all_pass);
    manifest.kv.set("result.failed_trials", out.failures.len());
    manifest.kv.set("result.unconverged_trials", out.unconverged_trials.len());
    manifest.finish(&a.out)?;
    println!(
        "sbc: {} parameters, pass_fraction={} pass={} failed_trials={} unconverged_trials={}",
        out.gamma.len(),
        fmt_f64(frac),
        all_pass,
        out.failures.len(),
        out.unconverged_trials.len()
    );
    Ok(())
}

pub(super) fn ingest(a: &IngestArgs, argv: &[String]) -> Result<()> {
    if !(a.s > 0.0 && a.s.is_finite()) {
        return Err(Error::Usage(format!("--s must be positive, got {}", a.s)));
    }
    let (header, rows) = io::read_table(&a.input)?;
    let mut seen = HashSet::new();
    if let Some(dup) = header.iter().find(|h| !seen.insert(h.as_str())) {
        return Err(Error::Data(format!("{}: duplicate column name '{dup}'", a.input.display())));
    }
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("{}: missing column '{name}'", a.input.display())))
    };
    let t_col = find(&a.time_column)?;
    let cols: Vec<usize> = match &a.columns {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => (0..header.len()).filter(|&c| c != t_col).collect(),
    };
    if cols.is_empty() {
        return Err(Error::Data("no output columns selected".into()));
    }
    if rows.len() < 2 {
        return Err(Error::Data(format!("{}: need at least 2 rows", a.input.display())));
    }
    let cell = |i: usize, c: usize| -> Result<f64> {
        let raw = rows[i].get(c).map(String::as_str).unwrap_or("");
        match io::parse_f64(raw) {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Data(format!(
                "{}: row {}, column '{}': missing or non-numeric value '{raw}'",
                a.input.display(),
                i + 1,
                header[c]
            ))),
        }
    };
    let n = rows.len();
    let mut y = Matrix::zeros(n, cols.len());
    let mut time = Vec::with_capacity(n);
    for i in 0..n {
        for (e, &c) in cols.iter().enumerate() {
            y[(i, e)] = cell(i, c)?;
        }
        time.push(cell(i, t_col)?);
    }
    let lo = time.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = time.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rescale = lo < 0.0 || hi > 1.0;
    if rescale {
        if !(hi > lo) {
            return Err(Error::Data(format!("time column '{}' is constant", a.time_column)));
        }
        eprintln!(
            "warning: time column '{}' spans [{lo}, {hi}]; rescaled to [0, 1]",
            a.time_column
        );
        for t in &mut time {
            *t = (*t - lo) / (hi - lo);
        }
    }
    let mut meta = KeyValues::new();
    meta.set("source", "ingest");
    meta.set("input", a.input.display());
    meta.set("n", n).set("d", cols.len());
    meta.set_f64("s", a.s);
    meta.set("time_column", &a.time_column);
    meta.set("columns", cols.iter().map(|&c| header[c].as_str()).collect::<Vec<_>>().join(","));
    meta.set_f64("time_min", lo).set_f64("time_max", hi);
    meta.set("rescaled", rescale);
    let ds = Dataset {
        y,
        x_tilde: time,
        x_true: None,
        f_true: None,
        meta,
    };
    io::write_dataset(&a.out, &ds)?;
    let mut manifest = Manifest::start("ingest", argv);
    manifest
        .config("input", a.input.display())
        .config("time_column", &a.time_column)
        .config("s", fmt_f64(a.s))
        .output("dataset", &a.out.join(io::DATASET_CSV));
    manifest.finish(&a.out)?;
    println!(
        "ingested {}: N={} D={} -> {}",
        a.input.display(),
        n,
        cols.len(),
        a.out.join(io::DATASET_CSV).display()
    );
    Ok(())
}

pub(super) fn report(a: &ReportArgs, argv: &[String]) -> Result<()> {
    let tables = super::report::build(&a.runs, a.case_study)?;
    ensure_dir(&a.out)?;
    let mut manifest = Manifest::start("report", argv);
    for r in &a.runs {
        manifest.kv.set(format!("config.run.{}", r.display()), "");
    }
    for t in &tables {
        let path = a.out.join(&t.file);
        let header: Vec<&str> = t.header.iter().map(String::as_str).collect();
        io::write_table(&path, &header, &t.rows)?;
        manifest.output(t.file.trim_end_matches(".csv"), &path);
        println!("wrote {} ({} rows)", path.display(), t.rows.len());
    }
    manifest.finish(&a.out)
}
