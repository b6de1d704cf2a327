//! Markdown and plain-text renderings of the results.

use std::fmt::Write as _;

use newsimpact_core::analysis::{topic_name, ImportanceRanking, RegressionResult};
use newsimpact_core::cluster::SilhouetteReport;

use crate::csvio::REGRESSION_COLUMNS;

/// Fixed-decimal formatting with `NA` for NaN.
pub fn num(v: f64, decimals: usize) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        // adding 0.0 turns -0.0 into 0.0
        let s = format!("{:.*}", decimals, v + 0.0);
        if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
            s[1..].to_string()
        } else {
            s
        }
    }
}

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "NA".to_string(), |v| num(v, decimals))
}

fn coefficient_rows(fit: &RegressionResult) -> Vec<[String; 7]> {
    (0..fit.coef.len())
        .map(|i| {
            [
                fit.names[i].clone(),
                num(fit.coef[i], 4),
                num(fit.std_err[i], 4),
                num(fit.t_value[i], 3),
                num(fit.p_value[i], 3),
                num(fit.ci_low[i], 4),
                num(fit.ci_high[i], 4),
            ]
        })
        .collect()
}

fn footer_rows(fit: &RegressionResult) -> Vec<(&'static str, String)> {
    let norm = fit.normality.as_ref();
    vec![
        ("R²", num(fit.r2, 3)),
        ("Adj. R²", num(fit.adj_r2, 3)),
        ("F-statistic", num(fit.f_stat, 3)),
        ("Prob (F-statistic)", num(fit.f_pvalue, 3)),
        ("Durbin-Watson", opt(fit.durbin_watson, 3)),
        ("Jarque-Bera (JB)", opt(norm.map(|n| n.jarque_bera), 3)),
        ("Prob (JB)", opt(norm.map(|n| n.jb_pvalue), 3)),
        ("Omnibus", opt(norm.map(|n| n.omnibus), 3)),
        ("Prob (Omnibus)", opt(norm.map(|n| n.omnibus_pvalue), 3)),
        ("Skew", opt(norm.map(|n| n.skew), 3)),
        ("Kurtosis (Pearson, normal = 3)", opt(norm.map(|n| n.kurtosis), 3)),
        ("No. observations", fit.n_obs.to_string()),
        ("Df residuals", fit.df_resid.to_string()),
        ("Condition number", num(fit.condition_number, 1)),
    ]
}

fn md_table<S: AsRef<str>>(out: &mut String, header: &[&str], rows: impl IntoIterator<Item = Vec<S>>) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let seps: Vec<&str> = header.iter().map(|_| "---").collect();
    let _ = writeln!(out, "| {} |", seps.join(" | "));
    for row in rows {
        let cells: Vec<&str> = row.iter().map(AsRef::as_ref).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
}

/// The coefficient table followed by the diagnostics footer, as markdown.
pub fn regression_markdown(fit: &RegressionResult) -> String {
    let mut out = String::new();
    md_table(
        &mut out,
        &REGRESSION_COLUMNS,
        coefficient_rows(fit).into_iter().map(Vec::from),
    );
    out.push('\n');
    md_table(
        &mut out,
        &["Diagnostic", "Value"],
        footer_rows(fit)
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), v]),
    );
    if fit.is_ill_conditioned() {
        let _ = writeln!(
            out,
            "\nWarning: the design matrix is ill-conditioned (condition number {}).",
            num(fit.condition_number, 1)
        );
    }
    out
}

/// Column-aligned plain-text version of [`regression_markdown`].
pub fn regression_text(fit: &RegressionResult) -> String {
    let rows = coefficient_rows(fit);
    let mut widths: Vec<usize> = REGRESSION_COLUMNS.iter().map(|h| h.chars().count()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&mut out, &REGRESSION_COLUMNS);
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    let _ = writeln!(out, "{}", "-".repeat(total));
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &cells);
    }
    let _ = writeln!(out, "{}", "-".repeat(total));
    let footer = footer_rows(fit);
    let key_width = footer.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    for (k, v) in footer {
        let pad = key_width - k.chars().count();
        let _ = writeln!(out, "{k}{}  {v}", " ".repeat(pad));
    }
    if fit.is_ill_conditioned() {
        let _ = writeln!(out, "warning: design matrix is ill-conditioned");
    }
    out
}

pub fn importance_markdown(ranking: &ImportanceRanking) -> String {
    let mut out = String::new();
    md_table(
        &mut out,
        &["Topic", "Importance Score"],
        ranking
            .entries
            .iter()
            .map(|&(t, s)| vec![topic_name(t), num(s, 3)]),
    );
    out
}

pub fn silhouette_markdown(report: &SilhouetteReport) -> String {
    let mut out = String::new();
    md_table(
        &mut out,
        &["K", "Silhouette", "Chosen"],
        report.scores.iter().map(|&(k, s)| {
            vec![
                k.to_string(),
                num(s, 4),
                if k == report.chosen_k { "yes" } else { "" }.to_string(),
            ]
        }),
    );
    out
}

pub fn keywords_markdown(keywords: &[Vec<(String, f64)>]) -> String {
    let mut out = String::new();
    md_table(
        &mut out,
        &["Topic", "Top Keywords"],
        keywords.iter().enumerate().map(|(t, words)| {
            let list: Vec<&str> = words.iter().map(|(w, _)| w.as_str()).collect();
            vec![format!("LDA topic {t}"), list.join(", ")]
        }),
    );
    out
}
