//! Tables across fit runs: per-parameter bias/SD/RMSE, grouped summaries,
//! per-observation prior/posterior deviations and run-to-run comparisons.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{self, fmt_f64, fmt_opt, KeyValues, SummaryRow};

/// A CSV table ready to write.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// One fit run directory.
#[derive(Debug, Clone)]
pub struct Run {
    pub dir: PathBuf,
    pub label: String,
    pub meta: KeyValues,
    pub summary: Vec<SummaryRow>,
}

impl Run {
    pub fn load(dir: &Path) -> Result<Self> {
        let meta = KeyValues::read(&dir.join(super::commands::FIT_META))?;
        let summary = io::read_summary(&dir.join(io::SUMMARY))?;
        let label = dir
            .file_name()
            .map_or_else(|| dir.display().to_string(), |s| s.to_string_lossy().into_owned());
        Ok(Self {
            dir: dir.to_path_buf(),
            label,
            meta,
            summary,
        })
    }

    fn key(&self, k: &str) -> String {
        self.meta.get(k).unwrap_or("NA").to_string()
    }

    /// `(scenario, N, D, model, M)`.
    pub fn group(&self) -> [String; 5] {
        [
            self.key("scenario"),
            self.key("n"),
            self.key("d"),
            format!("{}-{}", self.key("variant"), self.key("family")),
            self.key("m"),
        ]
    }
}

/// Parameter block of a constrained name: `x`, `rho`, `alpha`, `sigma`,
/// `mu` or `C`.
pub fn block(name: &str) -> &str {
    name.split('[').next().unwrap_or(name)
}

const GROUP: [&str; 5] = ["scenario", "n", "d", "model", "m"];

fn param_table(runs: &[Run]) -> Table {
    let mut header: Vec<String> = vec!["run".into()];
    header.extend(GROUP.iter().map(|s| s.to_string()));
    header.extend(["name", "mean", "sd", "bias", "abs_bias", "rmse", "rhat"].map(String::from));
    let mut rows = Vec::new();
    for r in runs {
        for p in &r.summary {
            let mut row = vec![r.label.clone()];
            row.extend(r.group());
            row.extend([
                p.name.clone(),
                fmt_f64(p.mean),
                fmt_f64(p.sd),
                fmt_opt(p.bias),
                fmt_opt(p.bias.map(f64::abs)),
                fmt_opt(p.rmse),
                fmt_opt(p.rhat),
            ]);
            rows.push(row);
        }
    }
    Table {
        file: "parameters.csv".into(),
        header,
        rows,
    }
}

fn grouped_table(runs: &[Run]) -> Table {
    #[derive(Default)]
    struct Acc {
        count: usize,
        runs: std::collections::BTreeSet<String>,
        abs_bias: Vec<f64>,
        sd: Vec<f64>,
        rmse: Vec<f64>,
    }
    let mut groups: BTreeMap<([String; 5], String), Acc> = BTreeMap::new();
    for r in runs {
        for p in &r.summary {
            let acc = groups.entry((r.group(), block(&p.name).to_string())).or_default();
            acc.count += 1;
            acc.runs.insert(r.label.clone());
            acc.sd.push(p.sd);
            if let Some(b) = p.bias {
                acc.abs_bias.push(b.abs());
            }
            if let Some(e) = p.rmse {
                acc.rmse.push(e);
            }
        }
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    let mut header: Vec<String> = GROUP.iter().map(|s| s.to_string()).collect();
    header.extend(["block", "runs", "count", "mean_abs_bias", "mean_sd", "mean_rmse"].map(String::from));
    let rows = groups
        .into_iter()
        .map(|((g, b), acc)| {
            let mut row: Vec<String> = g.to_vec();
            row.extend([
                b,
                acc.runs.len().to_string(),
                acc.count.to_string(),
                fmt_opt(mean(&acc.abs_bias)),
                fmt_opt(mean(&acc.sd)),
                fmt_opt(mean(&acc.rmse)),
            ]);
            row
        })
        .collect();
    Table {
        file: "grouped.csv".into(),
        header,
        rows,
    }
}

fn case_study_table(runs: &[Run]) -> Result<Table> {
    let mut rows = Vec::new();
    for r in runs {
        let data = r
            .meta
            .get("data")
            .ok_or_else(|| Error::Data(format!("{}: fit.meta has no 'data' entry", r.dir.display())))?;
        let ds = io::read_dataset(Path::new(data))?;
        let means: BTreeMap<&str, &SummaryRow> = r.summary.iter().map(|p| (p.name.as_str(), p)).collect();
        for (i, xt) in ds.x_tilde.iter().enumerate() {
            let name = format!("x[{}]", i + 1);
            let p = means
                .get(name.as_str())
                .ok_or_else(|| Error::Data(format!("{}: summary lacks '{name}'", r.dir.display())))?;
            rows.push(vec![
                r.label.clone(),
                (i + 1).to_string(),
                fmt_f64(*xt),
                fmt_f64(p.mean),
                fmt_f64(p.sd),
                fmt_f64(p.mean - xt),
            ]);
        }
    }
    Ok(Table {
        file: "case_study.csv".into(),
        header: ["run", "i", "x_tilde", "post_mean", "post_sd", "difference"].map(String::from).to_vec(),
        rows,
    })
}

fn comparison_table(runs: &[Run]) -> Table {
    let mut rows = Vec::new();
    for (ia, a) in runs.iter().enumerate() {
        for b in &runs[ia + 1..] {
            if a.meta.get("data") != b.meta.get("data") {
                continue;
            }
            let other: BTreeMap<&str, &SummaryRow> = b.summary.iter().map(|p| (p.name.as_str(), p)).collect();
            for p in &a.summary {
                if let Some(q) = other.get(p.name.as_str()) {
                    rows.push(vec![
                        a.label.clone(),
                        b.label.clone(),
                        p.name.clone(),
                        fmt_f64(p.mean),
                        fmt_f64(q.mean),
                        fmt_f64(p.mean - q.mean),
                    ]);
                }
            }
        }
    }
    Table {
        file: "comparison.csv".into(),
        header: ["run_a", "run_b", "name", "mean_a", "mean_b", "difference"].map(String::from).to_vec(),
        rows,
    }
}

/// Loads every run and builds the report tables.
pub fn build(dirs: &[PathBuf], case_study: bool) -> Result<Vec<Table>> {
    let runs: Vec<Run> = dirs.iter().map(|d| Run::load(d)).collect::<Result<_>>()?;
    let mut tables = vec![param_table(&runs), grouped_table(&runs)];
    if case_study {
        tables.push(case_study_table(&runs)?);
    }
    if runs.len() > 1 {
        tables.push(comparison_table(&runs));
    }
    Ok(tables)
}
