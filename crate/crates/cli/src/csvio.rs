//! CSV input and output for prices, headlines and every result table.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use newsimpact_core::analysis::{topic_name, ImportanceRanking, RegressionResult};
use newsimpact_core::cluster::SilhouetteReport;
use newsimpact_core::corpus::{parse_iso_date, Headline, PriceBar, ReturnSeries};

use crate::error::{Error, Result};

pub const PRICE_COLUMNS: [&str; 6] = ["Date", "Open", "High", "Low", "Close", "Volume"];
pub const REGRESSION_COLUMNS: [&str; 7] = [
    "Variable",
    "Coefficient",
    "Std. Error",
    "t-value",
    "P-value",
    "95% CI Lower",
    "95% CI Upper",
];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::Read {
            path: path.to_path_buf(),
            source,
        },
        kind => Error::Malformed {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Index of each wanted column, matched case-insensitively.
fn column_indices<const N: usize>(
    headers: &csv::StringRecord,
    wanted: [&'static str; N],
    path: &Path,
) -> Result<[usize; N]> {
    let mut out = [0; N];
    for (slot, name) in out.iter_mut().zip(wanted) {
        *slot = headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name,
            })?;
    }
    Ok(out)
}

fn field(record: &csv::StringRecord, idx: usize) -> &str {
    record.get(idx).unwrap_or("")
}

/// Parses price rows; `path` only labels errors.
pub fn read_prices<R: Read>(input: R, path: &Path) -> Result<Vec<PriceBar>> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = column_indices(&headers, PRICE_COLUMNS, path)?;
    let mut seen: BTreeMap<chrono::NaiveDate, u64> = BTreeMap::new();
    let mut bars = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |message: String| Error::Malformed {
            path: path.to_path_buf(),
            line,
            message,
        };
        let date_text = field(&record, cols[0]);
        let date = parse_iso_date(date_text).map_err(|e| malformed(e.to_string()))?;
        let mut prices = [0.0; 4];
        for (k, p) in prices.iter_mut().enumerate() {
            let raw = field(&record, cols[k + 1]);
            *p = raw
                .parse()
                .map_err(|_| malformed(format!("{} is not a number: {raw:?}", PRICE_COLUMNS[k + 1])))?;
        }
        let raw = field(&record, cols[5]);
        let volume = parse_volume(raw)
            .ok_or_else(|| malformed(format!("Volume is not a non-negative integer: {raw:?}")))?;
        let bar = PriceBar {
            date,
            open: prices[0],
            high: prices[1],
            low: prices[2],
            close: prices[3],
            volume,
        };
        bar.validate().map_err(|e| malformed(e.to_string()))?;
        if let Some(first) = seen.insert(date, line) {
            return Err(malformed(format!("duplicate date {date} (first on line {first})")));
        }
        bars.push(bar);
    }
    bars.sort_by_key(|b| b.date);
    Ok(bars)
}

/// Accepts plain integers and integral floats such as `1200.0`.
fn parse_volume(raw: &str) -> Option<u64> {
    if let Ok(v) = raw.parse::<u64>() {
        return Some(v);
    }
    let v: f64 = raw.parse().ok()?;
    (v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64).then_some(v as u64)
}

pub fn load_prices(path: &Path) -> Result<Vec<PriceBar>> {
    read_prices(open(path)?, path)
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Write {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let file = File::create(path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Write {
        path: path.to_path_buf(),
        source: io::Error::other(e),
    }
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes bars with shortest round-trip float formatting, so reloading gives
/// identical values.
pub fn write_prices(path: &Path, bars: &[PriceBar]) -> Result<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_record(PRICE_COLUMNS).map_err(&err)?;
    for b in bars {
        w.write_record([
            b.date.to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])
        .map_err(&err)?;
    }
    finish(w, path)
}

pub fn write_returns(path: &Path, series: &ReturnSeries) -> Result<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_record(["date", "return"]).map_err(&err)?;
    for (d, r) in series.dates().iter().zip(series.returns()) {
        w.write_record([d.to_string(), r.to_string()]).map_err(&err)?;
    }
    finish(w, path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadlineSet {
    pub headlines: Vec<Headline>,
    /// Rows dropped because the title was empty after trimming.
    pub skipped_empty: usize,
}

/// Each data row gets `id` = its 0-based row index, including rows that are
/// then skipped, so ids stay aligned with externally produced embeddings.
pub fn read_headlines<R: Read>(input: R, path: &Path) -> Result<HeadlineSet> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let [date_col, title_col] = column_indices(&headers, ["date", "title"], path)?;
    let mut headlines = Vec::new();
    let mut skipped_empty = 0;
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let title = field(&record, title_col);
        if title.is_empty() {
            skipped_empty += 1;
            continue;
        }
        let date = parse_iso_date(field(&record, date_col)).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: record.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        headlines.push(Headline {
            id: row as u64,
            date,
            title: title.to_string(),
        });
    }
    Ok(HeadlineSet {
        headlines,
        skipped_empty,
    })
}

pub fn load_headlines(path: &Path) -> Result<HeadlineSet> {
    read_headlines(open(path)?, path)
}

pub fn write_headlines(path: &Path, headlines: &[Headline]) -> Result<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_record(["date", "title"]).map_err(&err)?;
    for h in headlines {
        w.write_record([h.date.to_string().as_str(), h.title.as_str()])
            .map_err(&err)?;
    }
    finish(w, path)
}

/// Cluster assignments as `id,label`.
pub fn write_clusters(path: &Path, ids: &[String], labels: &[usize]) -> Result<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_record(["id", "label"]).map_err(&err)?;
    for (id, label) in ids.iter().zip(labels) {
        w.write_record([id.as_str(), label.to_string().as_str()])
            .map_err(&err)?;
    }
    finish(w, path)
}

pub fn load_clusters(path: &Path) -> Result<Vec<(String, usize)>> {
    let mut rdr = reader(open(path)?);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let [id_col, label_col] = column_indices(&headers, ["id", "label"], path)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let raw = field(&record, label_col);
        let label = raw.parse().map_err(|_| Error::Malformed {
            path: path.to_path_buf(),
            line: record.position().map_or(0, |p| p.line()),
            message: format!("label is not a non-negative integer: {raw:?}"),
        })?;
        out.push((field(&record, id_col).to_string(), label));
    }
    Ok(out)
}

/// Silhouette table as `k,score,chosen`.
pub fn write_silhouette(path: &Path, report: &SilhouetteReport) -> Result<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_record(["k", "score", "chosen"]).map_err(&err)?;
    for &(k, score) in &report.scores {
        w.write_record([
            k.to_string(),
            score.to_string(),
            (k == report.chosen_k).to_string(),
        ])
        .map_err(&err)?;
    }
    finish(w, path)
}

pub fn write_regression(path: &Path, fit: &RegressionResult) -> Result<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_record(REGRESSION_COLUMNS).map_err(&err)?;
    for i in 0..fit.coef.len() {
        w.write_record([
            fit.names[i].clone(),
            fit.coef[i].to_string(),
            fit.std_err[i].to_string(),
            fit.t_value[i].to_string(),
            fit.p_value[i].to_string(),
            fit.ci_low[i].to_string(),
            fit.ci_high[i].to_string(),
        ])
        .map_err(&err)?;
    }
    finish(w, path)
}

/// Reads back the `Variable` and `Coefficient` columns of a regression table.
pub fn load_coefficients(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut rdr = reader(open(path)?);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let [name_col, coef_col] = column_indices(&headers, ["Variable", "Coefficient"], path)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let raw = field(&record, coef_col);
        let coef = raw.parse().map_err(|_| Error::Malformed {
            path: path.to_path_buf(),
            line: record.position().map_or(0, |p| p.line()),
            message: format!("Coefficient is not a number: {raw:?}"),
        })?;
        out.push((field(&record, name_col).to_string(), coef));
    }
    Ok(out)
}

/// Named fit statistics as `statistic,value`.
pub fn write_diagnostics(path: &Path, fit: &RegressionResult) -> Result<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_record(["statistic", "value"]).map_err(&err)?;
    for (name, value) in diagnostic_rows(fit) {
        w.write_record([name, value.as_str()]).map_err(&err)?;
    }
    finish(w, path)
}

/// Diagnostics in report order; missing statistics render as `NA`.
pub fn diagnostic_rows(fit: &RegressionResult) -> Vec<(&'static str, String)> {
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| v.to_string());
    let norm = fit.normality.as_ref();
    vec![
        ("n", fit.n_obs.to_string()),
        ("df_resid", fit.df_resid.to_string()),
        ("r_squared", fit.r2.to_string()),
        ("adj_r_squared", fit.adj_r2.to_string()),
        ("f_statistic", fit.f_stat.to_string()),
        ("f_pvalue", fit.f_pvalue.to_string()),
        ("durbin_watson", opt(fit.durbin_watson)),
        ("jarque_bera", opt(norm.map(|n| n.jarque_bera))),
        ("jb_pvalue", opt(norm.map(|n| n.jb_pvalue))),
        ("omnibus", opt(norm.map(|n| n.omnibus))),
        ("omnibus_pvalue", opt(norm.map(|n| n.omnibus_pvalue))),
        ("skew", opt(norm.map(|n| n.skew))),
        ("kurtosis_pearson", opt(norm.map(|n| n.kurtosis))),
        ("condition_number", fit.condition_number.to_string()),
    ]
}

pub fn write_importance(path: &Path, ranking: &ImportanceRanking) -> Result<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_record(["Topic", "Importance Score"]).map_err(&err)?;
    for &(topic, score) in &ranking.entries {
        w.write_record([topic_name(topic), score.to_string()])
            .map_err(&err)?;
    }
    finish(w, path)
}

/// LDA keyword table as `topic,rank,token,probability`; ranks start at 1.
pub fn write_keywords(path: &Path, keywords: &[Vec<(String, f64)>]) -> Result<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_record(["topic", "rank", "token", "probability"])
        .map_err(&err)?;
    for (topic, words) in keywords.iter().enumerate() {
        for (rank, (token, p)) in words.iter().enumerate() {
            w.write_record([
                topic.to_string(),
                (rank + 1).to_string(),
                token.clone(),
                p.to_string(),
            ])
            .map_err(&err)?;
        }
    }
    finish(w, path)
}

/// Writes a text file, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let wrap = |p: PathBuf| move |source| Error::Write { path: p, source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(wrap(dir.to_path_buf()))?;
    }
    let mut f = File::create(path).map_err(wrap(path.to_path_buf()))?;
    f.write_all(text.as_bytes()).map_err(wrap(path.to_path_buf()))
}
