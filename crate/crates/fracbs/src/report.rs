//! CSV and JSON emission for study results.
//!
//! Every file starts with the fully resolved run configuration so results can
//! be reproduced from the artifact alone. The CSV column set is fixed:
//! `study,alpha,theta,n,N,value,error,seconds`. Machine numbers carry 17
//! significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::{ErrorGridCell, OrderReport, RefinedVariable, SweepPoint};

/// One output row of any study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyRow {
    pub study: String,
    pub alpha: f64,
    pub theta: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub time_steps: usize,
    pub value: f64,
    pub error: Option<f64>,
    pub seconds: f64,
}

/// A study report: resolved configuration plus result rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub config: Vec<(String, String)>,
    pub rows: Vec<StudyRow>,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

impl Report {
    pub fn new(config: Vec<(String, String)>, rows: Vec<StudyRow>) -> Self {
        Self { config, rows }
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        for (key, value) in &self.config {
            writeln!(w, "# {key}={value}")?;
        }
        writeln!(w, "study,alpha,theta,n,N,value,error,seconds")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                row.study,
                fmt(row.alpha),
                fmt(row.theta),
                row.n,
                row.time_steps,
                fmt(row.value),
                row.error.map(fmt).unwrap_or_default(),
                fmt(row.seconds),
            )?;
        }
        Ok(())
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            config: std::collections::BTreeMap<&'a str, &'a str>,
            rows: &'a [StudyRow],
        }
        let doc = Doc {
            config: self
                .config
                .iter()
                .map(|(k, v)| (k.as_str(), v.as_str()))
                .collect(),
            rows: &self.rows,
        };
        serde_json::to_writer_pretty(BufWriter::new(w), &doc).map_err(std::io::Error::other)?;
        Ok(())
    }

    /// Writes `<study>_<timestamp>.{csv,json}` into `dir`; returns the paths.
    pub fn write_files(&self, dir: &Path, study: &str) -> Result<(PathBuf, PathBuf)> {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let csv_path = dir.join(format!("{study}_{stamp}.csv"));
        let json_path = dir.join(format!("{study}_{stamp}.json"));
        self.write_csv(BufWriter::new(File::create(&csv_path)?))?;
        self.write_json(File::create(&json_path)?)?;
        Ok((csv_path, json_path))
    }
}

impl From<&OrderReport> for StudyRow {
    fn from(r: &OrderReport) -> Self {
        let study = match r.variable {
            RefinedVariable::Time => "temporal_order",
            RefinedVariable::Space => "spatial_order",
        };
        StudyRow {
            study: study.to_string(),
            alpha: r.alpha,
            theta: r.theta,
            n: r.coarse_grid.0,
            time_steps: r.coarse_grid.1,
            value: r.empirical_order,
            error: Some(r.relative_error),
            seconds: r.seconds,
        }
    }
}

impl ErrorGridCell {
    pub fn to_row(&self, alpha: f64) -> StudyRow {
        StudyRow {
            study: "error_grid".to_string(),
            alpha,
            theta: self.theta,
            n: self.space_intervals,
            time_steps: self.time_steps,
            value: self.price,
            error: Some(self.relative_error),
            seconds: self.seconds,
        }
    }
}

impl SweepPoint {
    /// Sweep rows encode the maturity in the study label so the fixed column
    /// set stays intact.
    pub fn to_rows(&self, n: usize, time_steps: usize) -> Vec<StudyRow> {
        let mut rows = vec![StudyRow {
            study: format!("alpha_sweep_T{}_K{}", self.maturity, self.strike),
            alpha: self.alpha,
            theta: self.theta,
            n,
            time_steps,
            value: self.price,
            error: None,
            seconds: self.seconds,
        }];
        if let Some(mc) = self.mc {
            rows.push(StudyRow {
                study: format!("alpha_sweep_mc_T{}_K{}", self.maturity, self.strike),
                alpha: self.alpha,
                theta: self.theta,
                n,
                time_steps,
                value: mc.mean,
                error: Some(mc.std_error),
                seconds: self.seconds,
            });
        }
        rows
    }
}
