//! File formats: dataset CSV with a key-value sidecar, NDJSON draws,
//! summary CSV and run manifests.
//!
//! Floats are written in shortest round-trip form; missing values are `NA`.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::diagnostics::ParamSummary;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::priors::{NormalPrior, TruncatedNormal};
use crate::sampler::{ChainDraws, DrawStats};
use crate::simgen::{ScenarioKind, ScenarioSpec, SimulatedDataset};

pub const DATASET_CSV: &str = "dataset.csv";
pub const DATASET_META: &str = "dataset.meta";
pub const MANIFEST: &str = "manifest.txt";
pub const DRAWS: &str = "draws.ndjson";
pub const SUMMARY: &str = "summary.csv";

/// Formats a float so that parsing it back gives the same bits; NaN is `NA`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v:?}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_f64)
}

/// Inverse of [`fmt_f64`].
pub fn parse_f64(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan") {
        Some(f64::NAN)
    } else {
        t.parse().ok()
    }
}

fn parse_opt(s: &str) -> Option<Option<f64>> {
    parse_f64(s).map(|v| if v.is_nan() { None } else { Some(v) })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Ordered `key=value` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `key`, replacing an existing value in place.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key, value)),
        }
        self
    }

    pub fn set_f64(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.set(key, fmt_f64(value))
    }

    pub fn set_list(&mut self, key: impl Into<String>, values: &[f64]) -> &mut Self {
        let s: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
        self.set(key, s.join(","))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Data(format!("missing key '{key}'")))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let raw = self.require(key)?;
        parse_f64(raw).ok_or_else(|| Error::Data(format!("key '{key}': '{raw}' is not a number")))
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| Error::Data(format!("key '{key}': '{raw}' is not a count")))
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| Error::Data(format!("key '{key}': '{raw}' is not an integer")))
    }

    pub fn get_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.require(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|t| parse_f64(t).ok_or_else(|| Error::Data(format!("key '{key}': '{t}' is not a number"))))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = create(path)?;
        for (k, v) in &self.entries {
            writeln!(w, "{k}={v}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut kv = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Data(format!("{}: line {} is not key=value", path.display(), i + 1)))?;
            kv.set(k.trim(), v.trim());
        }
        Ok(kv)
    }
}

/// Outputs plus noisy inputs, with optional ground truth columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y: Matrix,
    pub x_tilde: Vec<f64>,
    pub x_true: Option<Vec<f64>>,
    pub f_true: Option<Matrix>,
    pub meta: KeyValues,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y.rows()
    }

    pub fn d(&self) -> usize {
        self.y.cols()
    }

    /// Measurement SD recorded in the metadata.
    pub fn s(&self) -> Result<f64> {
        self.meta.get_f64("s")
    }
}

/// Path of the dataset CSV for a directory or file argument.
pub fn dataset_csv_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(DATASET_CSV)
    } else {
        path.to_path_buf()
    }
}

/// Writes `dataset.csv` and `dataset.meta` into `dir`.
pub fn write_dataset(dir: &Path, ds: &Dataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(DATASET_CSV);
    let d = ds.d();
    let mut header: Vec<String> = (1..=d).map(|e| format!("y_{e}")).collect();
    header.push("x_tilde".into());
    if ds.x_true.is_some() {
        header.push("x_true".into());
    }
    if ds.f_true.is_some() {
        header.extend((1..=d).map(|e| format!("f_{e}")));
    }
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(&header).map_err(csv_err(&path))?;
    for i in 0..ds.n() {
        let mut row: Vec<String> = ds.y.row(i).iter().map(|v| fmt_f64(*v)).collect();
        row.push(fmt_f64(ds.x_tilde[i]));
        if let Some(x) = &ds.x_true {
            row.push(fmt_f64(x[i]));
        }
        if let Some(f) = &ds.f_true {
            row.extend(f.row(i).iter().map(|v| fmt_f64(*v)));
        }
        w.write_record(&row).map_err(csv_err(&path))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    ds.meta.write(&dir.join(DATASET_META))
}

/// Reads a header and rows of strings.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err(path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// Writes a header and rows of strings.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn column(header: &[String], name: &str, path: &Path) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Data(format!("{}: missing column '{name}'", path.display())))
}

fn numeric_cell(rows: &[Vec<String>], i: usize, c: usize, header: &[String], path: &Path) -> Result<f64> {
    let raw = rows[i].get(c).map(String::as_str).unwrap_or("");
    match parse_f64(raw) {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Data(format!(
            "{}: row {}, column '{}': missing or non-finite value '{raw}'",
            path.display(),
            i + 1,
            header[c]
        ))),
    }
}

/// Reads a dataset from a directory (or its CSV path) and its sidecar.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let csv_path = dataset_csv_path(path);
    let (header, rows) = read_table(&csv_path)?;
    let d = (1..).take_while(|e| header.iter().any(|h| *h == format!("y_{e}"))).count();
    if d == 0 {
        return Err(Error::Data(format!("{}: missing column 'y_1'", csv_path.display())));
    }
    let y_cols: Vec<usize> = (1..=d)
        .map(|e| column(&header, &format!("y_{e}"), &csv_path))
        .collect::<Result<_>>()?;
    let xt_col = column(&header, "x_tilde", &csv_path)?;
    let x_true_col = header.iter().position(|h| h == "x_true");
    let f_cols: Option<Vec<usize>> = (1..=d)
        .map(|e| header.iter().position(|h| *h == format!("f_{e}")))
        .collect();
    let n = rows.len();
    let mut y = Matrix::zeros(n, d);
    let mut x_tilde = Vec::with_capacity(n);
    let mut x_true = x_true_col.map(|_| Vec::with_capacity(n));
    let mut f_true = f_cols.as_ref().map(|_| Matrix::zeros(n, d));
    for i in 0..n {
        for (e, &c) in y_cols.iter().enumerate() {
            y[(i, e)] = numeric_cell(&rows, i, c, &header, &csv_path)?;
        }
        x_tilde.push(numeric_cell(&rows, i, xt_col, &header, &csv_path)?);
        if let (Some(c), Some(x)) = (x_true_col, x_true.as_mut()) {
            x.push(numeric_cell(&rows, i, c, &header, &csv_path)?);
        }
        if let (Some(cols), Some(f)) = (&f_cols, f_true.as_mut()) {
            for (e, &c) in cols.iter().enumerate() {
                f[(i, e)] = numeric_cell(&rows, i, c, &header, &csv_path)?;
            }
        }
    }
    let meta_path = csv_path.with_extension("meta");
    let meta = if meta_path.exists() {
        KeyValues::read(&meta_path)?
    } else {
        KeyValues::new()
    };
    Ok(Dataset {
        y,
        x_tilde,
        x_true,
        f_true,
        meta,
    })
}

fn set_prior(kv: &mut KeyValues, name: &str, p: TruncatedNormal) {
    kv.set_f64(format!("{name}_prior_mean"), p.mean);
    kv.set_f64(format!("{name}_prior_sd"), p.sd);
}

fn get_prior(kv: &KeyValues, name: &str) -> Result<TruncatedNormal> {
    TruncatedNormal::new(kv.get_f64(&format!("{name}_prior_mean"))?, kv.get_f64(&format!("{name}_prior_sd"))?)
}

/// Metadata describing a simulated dataset: scenario constants, seed and
/// the true hyperparameters.
pub fn simulated_meta(ds: &SimulatedDataset) -> KeyValues {
    let s = &ds.spec;
    let mut kv = KeyValues::new();
    kv.set("source", "simulate");
    kv.set("scenario", s.kind.tag());
    kv.set("n", s.n);
    kv.set("d", s.d);
    kv.set("seed", s.seed);
    kv.set_f64("s", s.s);
    kv.set_f64("x_min", s.x_range.0);
    kv.set_f64("x_max", s.x_range.1);
    kv.set_f64("eta", s.eta);
    set_prior(&mut kv, "rho", s.rho);
    set_prior(&mut kv, "alpha", s.alpha);
    set_prior(&mut kv, "sigma", s.sigma);
    if let Some(mu) = s.mu {
        kv.set_f64("mu_prior_mean", mu.mean);
        kv.set_f64("mu_prior_sd", mu.sd);
    }
    kv.set_list("rho_true", &ds.rho);
    kv.set_list("alpha_true", &ds.alpha);
    kv.set_list("sigma_true", &ds.sigma);
    kv.set_list("mu_true", &ds.mu);
    kv.set_list("c_true", ds.c_true.as_slice());
    kv
}

/// Writes a simulated dataset with all ground truth.
pub fn write_simulated(dir: &Path, ds: &SimulatedDataset) -> Result<()> {
    write_dataset(
        dir,
        &Dataset {
            y: ds.y.clone(),
            x_tilde: ds.x_tilde.clone(),
            x_true: Some(ds.x_true.clone()),
            f_true: Some(ds.f_true.clone()),
            meta: simulated_meta(ds),
        },
    )
}

/// Reads back a dataset written by [`write_simulated`].
pub fn read_simulated(path: &Path) -> Result<SimulatedDataset> {
    let ds = read_dataset(path)?;
    let kv = &ds.meta;
    let kind: ScenarioKind = kv.require("scenario")?.parse()?;
    let d = kv.get_usize("d")?;
    let mu = match (kv.get("mu_prior_mean"), kv.get("mu_prior_sd")) {
        (Some(_), Some(_)) => Some(NormalPrior::new(kv.get_f64("mu_prior_mean")?, kv.get_f64("mu_prior_sd")?)?),
        _ => None,
    };
    let spec = ScenarioSpec {
        kind,
        n: kv.get_usize("n")?,
        d,
        rho: get_prior(kv, "rho")?,
        alpha: get_prior(kv, "alpha")?,
        sigma: get_prior(kv, "sigma")?,
        mu,
        s: kv.get_f64("s")?,
        x_range: (kv.get_f64("x_min")?, kv.get_f64("x_max")?),
        eta: kv.get_f64("eta")?,
        seed: kv.get_u64("seed")?,
    };
    let x_true = ds
        .x_true
        .clone()
        .ok_or_else(|| Error::Data("simulated dataset lacks the x_true column".into()))?;
    let f_true = ds
        .f_true
        .clone()
        .ok_or_else(|| Error::Data("simulated dataset lacks the f_1.. columns".into()))?;
    Ok(SimulatedDataset {
        spec,
        y: ds.y,
        x_true,
        x_tilde: ds.x_tilde,
        rho: kv.get_list("rho_true")?,
        alpha: kv.get_list("alpha_true")?,
        sigma: kv.get_list("sigma_true")?,
        mu: kv.get_list("mu_true")?,
        c_true: Matrix::from_vec(d, d, kv.get_list("c_true")?)?,
        f_true,
    })
}

fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// Writes one JSON object per retained draw, chains in order.
pub fn write_draws(path: &Path, chains: &[ChainDraws]) -> Result<()> {
    let mut w = create(path)?;
    for c in chains {
        for (s, (row, st)) in c.draws.iter().zip(&c.stats).enumerate() {
            let mut obj = Map::new();
            obj.insert("chain".into(), Value::from(c.chain));
            obj.insert("draw".into(), Value::from(s + 1));
            for (name, v) in c.names.iter().zip(row) {
                obj.insert(name.clone(), json_number(*v));
            }
            obj.insert("divergent__".into(), Value::Bool(st.divergent));
            obj.insert("treedepth__".into(), Value::from(st.tree_depth));
            obj.insert("n_leapfrog__".into(), Value::from(st.n_leapfrog));
            obj.insert("stepsize__".into(), json_number(st.step_size));
            obj.insert("energy__".into(), json_number(st.energy));
            obj.insert("accept_stat__".into(), json_number(st.accept_stat));
            obj.insert("lp__".into(), json_number(st.log_density));
            serde_json::to_writer(&mut w, &Value::Object(obj)).map_err(|e| Error::Json {
                path: path.to_path_buf(),
                line: s + 1,
                source: e,
            })?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads draws written by [`write_draws`]. Adaptation details that are not
/// stored per draw (metric, warmup divergences) come back empty.
pub fn read_draws(path: &Path) -> Result<Vec<ChainDraws>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut chains: Vec<ChainDraws> = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Data(format!("{} line {}: {msg}", path.display(), i + 1));
        let obj: Map<String, Value> = serde_json::from_str(&line).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source: e,
        })?;
        let chain = obj
            .get("chain")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing 'chain'".into()))? as usize;
        let num = |k: &str| -> Result<f64> {
            match obj.get(k) {
                Some(Value::Null) => Ok(f64::NAN),
                Some(v) => v.as_f64().ok_or_else(|| bad(format!("'{k}' is not a number"))),
                None => Err(bad(format!("missing '{k}'"))),
            }
        };
        let names: Vec<String> = obj
            .keys()
            .filter(|k| *k != "chain" && *k != "draw" && !k.ends_with("__"))
            .cloned()
            .collect();
        let row = names.iter().map(|k| num(k)).collect::<Result<Vec<_>>>()?;
        let stats = DrawStats {
            divergent: obj.get("divergent__").and_then(Value::as_bool).unwrap_or(false),
            tree_depth: obj.get("treedepth__").and_then(Value::as_u64).unwrap_or(0) as usize,
            n_leapfrog: obj.get("n_leapfrog__").and_then(Value::as_u64).unwrap_or(0) as usize,
            step_size: num("stepsize__").unwrap_or(f64::NAN),
            energy: num("energy__").unwrap_or(f64::NAN),
            accept_stat: num("accept_stat__").unwrap_or(f64::NAN),
            log_density: num("lp__").unwrap_or(f64::NAN),
        };
        let pos = match chains.iter().position(|c| c.chain == chain) {
            Some(p) => p,
            None => {
                chains.push(ChainDraws {
                    chain,
                    names: names.clone(),
                    draws: Vec::new(),
                    stats: Vec::new(),
                    step_size: stats.step_size,
                    inv_metric: Vec::new(),
                    warmup_divergences: 0,
                });
                chains.len() - 1
            }
        };
        let c = &mut chains[pos];
        if c.names != names {
            return Err(bad("parameter names differ from earlier lines".into()));
        }
        c.draws.push(row);
        c.stats.push(stats);
    }
    Ok(chains)
}

pub const SUMMARY_HEADER: [&str; 10] = ["name", "mean", "sd", "q5", "q95", "rhat", "bulk_ess", "tail_ess", "bias", "rmse"];

pub fn write_summary(path: &Path, params: &[ParamSummary]) -> Result<()> {
    let rows: Vec<Vec<String>> = params
        .iter()
        .map(|p| {
            vec![
                p.name.clone(),
                fmt_f64(p.mean),
                fmt_f64(p.sd),
                fmt_f64(p.q5),
                fmt_f64(p.q95),
                fmt_opt(p.rhat),
                fmt_opt(p.bulk_ess),
                fmt_opt(p.tail_ess),
                fmt_opt(p.bias),
                fmt_opt(p.rmse),
            ]
        })
        .collect();
    write_table(path, &SUMMARY_HEADER, &rows)
}

/// One row of a summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q5: f64,
    pub q95: f64,
    pub rhat: Option<f64>,
    pub bulk_ess: Option<f64>,
    pub tail_ess: Option<f64>,
    pub bias: Option<f64>,
    pub rmse: Option<f64>,
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let (header, rows) = read_table(path)?;
    let cols: Vec<usize> = SUMMARY_HEADER
        .iter()
        .map(|c| column(&header, c, path))
        .collect::<Result<_>>()?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let cell = |k: usize| r.get(cols[k]).map(String::as_str).unwrap_or("");
            let bad = |k: usize| Error::Data(format!("{}: row {}, column '{}'", path.display(), i + 1, SUMMARY_HEADER[k]));
            let f = |k: usize| parse_f64(cell(k)).ok_or_else(|| bad(k));
            let o = |k: usize| parse_opt(cell(k)).ok_or_else(|| bad(k));
            Ok(SummaryRow {
                name: cell(0).to_string(),
                mean: f(1)?,
                sd: f(2)?,
                q5: f(3)?,
                q95: f(4)?,
                rhat: o(5)?,
                bulk_ess: o(6)?,
                tail_ess: o(7)?,
                bias: o(8)?,
                rmse: o(9)?,
            })
        })
        .collect()
}

/// Writes serializable records as NDJSON.
pub fn write_ndjson<T: serde::Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for (i, it) in items.iter().enumerate() {
        serde_json::to_writer(&mut w, it).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source: e,
        })?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_ndjson<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source: e,
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::generate;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0, -3.5e-12, 1e300, 123456.789, f64::MIN_POSITIVE, 2.0f64.sqrt()] {
            assert_eq!(parse_f64(&fmt_f64(v)).unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt_f64(f64::NAN), "NA");
        assert!(parse_f64("NA").unwrap().is_nan());
    }

    #[test]
    fn simulated_dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ScenarioSpec::new(ScenarioKind::PeriodicHigh, 12, 3, 5).unwrap();
        let ds = generate(&spec).unwrap();
        write_simulated(dir.path(), &ds).unwrap();
        let back = read_simulated(dir.path()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn key_values_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut kv = KeyValues::new();
        kv.set("a", "x y").set_f64("b", 0.25).set_list("c", &[1.0, -2.5]);
        kv.set("a", "z");
        let p = dir.path().join("m.txt");
        kv.write(&p).unwrap();
        let back = KeyValues::read(&p).unwrap();
        assert_eq!(back, kv);
        assert_eq!(back.get("a"), Some("z"));
        assert_eq!(back.get_list("c").unwrap(), vec![1.0, -2.5]);
    }

    #[test]
    fn missing_cells_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("dataset.csv");
        fs::write(&p, "y_1,x_tilde\n1.0,0.5\n,0.7\n").unwrap();
        let err = read_dataset(&p).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("y_1"), "{err}");
        fs::write(&p, "y_1,x\n1.0,0.5\n").unwrap();
        let err = read_dataset(&p).unwrap_err().to_string();
        assert!(err.contains("x_tilde"), "{err}");
    }
}
