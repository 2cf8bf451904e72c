//! CSV report rows.
//!
//! Metric columns hold a decimal number, `inf` for an infinite PSNR, or `na`
//! when the value is undefined (an empty region, or an image too small for
//! SSIM). Columns that do not apply to a row are left empty.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::metrics::Psnr;

/// Column order of every report.
pub const HEADER: [&str; 13] = [
    "image_id",
    "backbone",
    "tau",
    "alpha",
    "n",
    "stage1_epochs",
    "stage2_epochs",
    "seed",
    "psnr",
    "ssim",
    "hf_psnr",
    "lf_psnr",
    "wall_seconds",
];

/// Image id used by aggregate rows.
pub const MEAN_ID: &str = "MEAN";

pub const NA: &str = "na";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub image_id: String,
    pub backbone: Option<String>,
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub n: Option<usize>,
    pub stage1_epochs: Option<usize>,
    pub stage2_epochs: Option<usize>,
    pub seed: Option<u64>,
    pub psnr: Psnr,
    pub ssim: Option<f64>,
    pub hf_psnr: Option<Psnr>,
    pub lf_psnr: Option<Psnr>,
    pub wall_seconds: f64,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn metric<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| NA.to_string(), ToString::to_string)
}

impl ReportRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.image_id.clone(),
            opt(&self.backbone),
            opt(&self.tau),
            opt(&self.alpha),
            opt(&self.n),
            opt(&self.stage1_epochs),
            opt(&self.stage2_epochs),
            opt(&self.seed),
            self.psnr.to_string(),
            metric(&self.ssim),
            metric(&self.hf_psnr),
            metric(&self.lf_psnr),
            self.wall_seconds.to_string(),
        ]
    }

    pub fn is_mean(&self) -> bool {
        self.image_id == MEAN_ID
    }

    /// The configuration columns that identify a grid cell.
    fn cell_key(&self) -> String {
        self.record()[1..7].join(",")
    }
}

fn mean_psnr<'a>(values: impl Iterator<Item = &'a Psnr>) -> Psnr {
    let mut sum = 0.0;
    let mut count = 0;
    for v in values {
        match v {
            Psnr::Infinite => return Psnr::Infinite,
            Psnr::Finite(x) => {
                sum += x;
                count += 1;
            }
        }
    }
    Psnr::Finite(sum / count as f64)
}

/// One `MEAN` row per distinct configuration, in first-appearance order.
/// PSNR means are per-image means of dB values; any infinite member makes
/// the mean infinite. Undefined members make SSIM undefined and are skipped
/// for region PSNRs.
pub fn mean_rows(rows: &[ReportRow]) -> Vec<ReportRow> {
    let mut keys: Vec<String> = Vec::new();
    for r in rows.iter().filter(|r| !r.is_mean()) {
        let k = r.cell_key();
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.iter()
        .map(|k| {
            let group: Vec<&ReportRow> = rows
                .iter()
                .filter(|r| !r.is_mean() && &r.cell_key() == k)
                .collect();
            let first = group[0];
            let count = group.len() as f64;
            let ssim = group
                .iter()
                .map(|r| r.ssim)
                .collect::<Option<Vec<f64>>>()
                .map(|v| v.iter().sum::<f64>() / count);
            let region = |get: fn(&ReportRow) -> Option<Psnr>| {
                let defined: Vec<Psnr> = group.iter().filter_map(|r| get(r)).collect();
                (!defined.is_empty()).then(|| mean_psnr(defined.iter()))
            };
            ReportRow {
                image_id: MEAN_ID.to_string(),
                seed: None,
                psnr: mean_psnr(group.iter().map(|r| &r.psnr)),
                ssim,
                hf_psnr: region(|r| r.hf_psnr),
                lf_psnr: region(|r| r.lf_psnr),
                wall_seconds: group.iter().map(|r| r.wall_seconds).sum::<f64>() / count,
                ..(*first).clone()
            }
        })
        .collect()
}

pub fn write_rows<W: Write>(rows: &[ReportRow], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(HEADER)?;
    for row in rows {
        writer.write_record(row.record())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_report(rows: &[ReportRow], path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_rows(rows, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, tau: f64, psnr: Psnr, ssim: Option<f64>, hf: Option<Psnr>) -> ReportRow {
        ReportRow {
            image_id: id.into(),
            backbone: Some("siren".into()),
            tau: Some(tau),
            alpha: Some(50.0),
            n: Some(8),
            stage1_epochs: Some(100),
            stage2_epochs: Some(150),
            seed: Some(1),
            psnr,
            ssim,
            hf_psnr: hf,
            lf_psnr: None,
            wall_seconds: 2.0,
        }
    }

    #[test]
    fn header_and_record_formats() {
        let mut out = Vec::new();
        let r = row("kodim01", 0.3, Psnr::Infinite, None, Some(Psnr::Finite(30.5)));
        write_rows(&[r], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "kodim01,siren,0.3,50,8,100,150,1,inf,na,30.5,na,2"
        );
    }

    #[test]
    fn means_group_by_configuration() {
        let rows = vec![
            row("a", 0.1, Psnr::Finite(30.0), Some(0.9), Some(Psnr::Finite(20.0))),
            row("a", 0.3, Psnr::Finite(32.0), Some(0.8), None),
            row("b", 0.1, Psnr::Finite(34.0), Some(0.7), Some(Psnr::Finite(22.0))),
            row("b", 0.3, Psnr::Infinite, None, None),
        ];
        let means = mean_rows(&rows);
        assert_eq!(means.len(), 2);
        assert_eq!(means[0].tau, Some(0.1));
        assert_eq!(means[0].psnr, Psnr::Finite(32.0));
        assert!((means[0].ssim.unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(means[0].hf_psnr, Some(Psnr::Finite(21.0)));
        assert_eq!(means[0].seed, None);
        assert_eq!(means[1].psnr, Psnr::Infinite);
        assert_eq!(means[1].ssim, None);
        assert_eq!(means[1].hf_psnr, None);
        assert!(means.iter().all(ReportRow::is_mean));
    }
}
