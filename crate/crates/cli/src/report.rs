//! Sweep reports. JSON is the source of truth; CSV and the aligned text
//! table are rendered from the same rows.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::ModelKind;

pub const CSV_HEADER: [&str; 7] = ["dataset", "tm", "k", "c_v", "s", "cov", "cov_ratio"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dataset: String,
    pub tm: ModelKind,
    pub k: usize,
    pub c_v: f64,
    /// Absent when the corpus carries no labels.
    pub s: Option<f64>,
    pub cov: Option<usize>,
    pub cov_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicWords {
    pub id: usize,
    /// Corpus weight, for HDP topics.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weight: Option<f64>,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicListing {
    pub tm: ModelKind,
    pub k: usize,
    pub topics: Vec<TopicWords>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub dataset: String,
    pub documents: usize,
    pub vocabulary_size: usize,
    pub total_tokens: u64,
    pub labels: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub topics: Vec<TopicListing>,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

impl SweepReport {
    pub fn write_json<W: Write>(&self, writer: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(writer, self)
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            let fields = [
                csv_field(&r.dataset),
                r.tm.to_string(),
                r.k.to_string(),
                r.c_v.to_string(),
                opt(&r.s),
                opt(&r.cov),
                opt(&r.cov_ratio),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Aligned, human-readable results table.
    pub fn to_text(&self) -> String {
        let header = ["Dataset", "TM", "K", "C_v", "S", "Cov", "Cov(%)"];
        let dash = || "-".to_string();
        let rows: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.dataset.clone(),
                    r.tm.to_string(),
                    r.k.to_string(),
                    format!("{:.3}", r.c_v),
                    r.s.map_or_else(dash, |s| format!("{s:.3}")),
                    r.cov.map_or_else(dash, |c| c.to_string()),
                    r.cov_ratio
                        .map_or_else(dash, |c| format!("{:.1}", 100.0 * c)),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| {
                    if i < 2 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&header.map(String::from));
        for row in &rows {
            out.push_str(&line(row));
        }
        out
    }

    /// Top words per topic for every (model, K), one topic per line.
    pub fn topics_text(&self) -> String {
        let mut out = String::new();
        for listing in &self.topics {
            out.push_str(&format!("# {} K={}\n", listing.tm, listing.k));
            out.push_str(&format_topics(&listing.topics));
        }
        out
    }
}

pub fn format_topics(topics: &[TopicWords]) -> String {
    topics
        .iter()
        .map(|t| format!("{}: {}\n", t.id, t.words.join(", ")))
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> SweepReport {
        SweepReport {
            dataset: "d".into(),
            documents: 2,
            vocabulary_size: 3,
            total_tokens: 6,
            labels: vec!["a".into()],
            rows: vec![
                SweepRow {
                    dataset: "d,x".into(),
                    tm: ModelKind::Lda,
                    k: 10,
                    c_v: 0.5,
                    s: Some(0.25),
                    cov: Some(3),
                    cov_ratio: Some(0.75),
                },
                SweepRow {
                    dataset: "d".into(),
                    tm: ModelKind::Hdp,
                    k: 25,
                    c_v: 0.608,
                    s: None,
                    cov: None,
                    cov_ratio: None,
                },
            ],
            topics: vec![],
        }
    }

    #[test]
    fn csv_rows() {
        let csv = report().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "dataset,tm,k,c_v,s,cov,cov_ratio");
        assert_eq!(lines[1], "\"d,x\",LDA,10,0.5,0.25,3,0.75");
        assert_eq!(lines[2], "d,HDP,25,0.608,,,");
    }

    #[test]
    fn text_table() {
        let text = report().to_text();
        assert!(text.starts_with("Dataset  TM"));
        assert!(text.contains("75.0"));
        assert!(text.lines().nth(2).unwrap().ends_with('-'));
    }

    #[test]
    fn topic_lines() {
        let t = vec![TopicWords {
            id: 3,
            weight: None,
            words: vec!["parks".into(), "closed".into()],
        }];
        assert_eq!(format_topics(&t), "3: parks, closed\n");
    }
}
