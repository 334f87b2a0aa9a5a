//! Report sinks: NDJSON records, CSV tables and a plain-text summary.

use crate::config::{CampaignConfig, Format};
use gkvcs::verify::VerificationReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Meta {
    pub name: String,
    pub config_hash: String,
    pub version: String,
}

impl Meta {
    pub fn of(cfg: &CampaignConfig) -> Meta {
        Meta { name: cfg.name.clone(), config_hash: config_hash(cfg), version: env!("CARGO_PKG_VERSION").to_string() }
    }
}

/// One NDJSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
pub enum Record {
    Campaign(Meta),
    Report(VerificationReport),
}

/// SHA-256 of the canonical serialization, so formatting does not matter.
pub fn config_hash(cfg: &CampaignConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub failed_report_only: usize,
}

impl Tally {
    pub fn of(reports: &[VerificationReport]) -> Tally {
        let mut t = Tally { total: reports.len(), ..Tally::default() };
        for r in reports {
            match (r.passed, r.report_only) {
                (true, _) => t.passed += 1,
                (false, false) => t.failed += 1,
                (false, true) => t.failed_report_only += 1,
            }
        }
        t
    }

    /// 0 without asserted failures, 1 otherwise; `strict` also counts
    /// report-only failures.
    pub fn exit_code(&self, strict: bool) -> i32 {
        if self.failed > 0 || (strict && self.failed_report_only > 0) {
            1
        } else {
            0
        }
    }
}

pub fn status(r: &VerificationReport) -> &'static str {
    match (r.passed, r.report_only) {
        (true, _) => "PASS",
        (false, false) => "FAIL",
        (false, true) => "FAIL (report-only)",
    }
}

fn params_string(r: &VerificationReport) -> String {
    r.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

pub fn summary_text(meta: &Meta, reports: &[VerificationReport]) -> String {
    let t = Tally::of(reports);
    let mut s = String::new();
    let _ = writeln!(s, "campaign: {}", meta.name);
    let _ = writeln!(s, "config sha256: {}", meta.config_hash);
    let _ = writeln!(s, "version: {}", meta.version);
    let _ = writeln!(
        s,
        "records: {}  passed: {}  failed: {}  failed (report-only): {}",
        t.total, t.passed, t.failed, t.failed_report_only
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<20} {:<36} {:<18} metric={:.3e} tol={:.1e} {}",
            r.property,
            r.variant,
            status(r),
            r.metric,
            r.tolerance,
            params_string(r)
        );
        for n in &r.notes {
            let _ = writeln!(s, "    note: {n}");
        }
    }
    s
}

pub fn write_ndjson(out: &mut impl Write, records: &[Record]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_ndjson(path: &Path) -> io::Result<Vec<Record>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), i + 1))
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn write_reports_csv(path: &Path, reports: &[VerificationReport]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["property", "variant", "status", "metric", "tolerance", "tail_bound", "parameters", "notes"])?;
    for r in reports {
        w.write_record([
            r.property.as_str(),
            r.variant.as_str(),
            status(r),
            &format!("{:e}", r.metric),
            &format!("{:e}", r.tolerance),
            &format!("{:e}", r.tail_bound),
            &params_string(r),
            &r.notes.join("; "),
        ])?;
    }
    w.flush()
}

fn write_spectrum_csv(path: &Path, reports: &[VerificationReport]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["variant", "sector", "label", "analytic", "numeric", "abs_error"])?;
    for r in reports.iter().filter(|r| r.property == "spectrum") {
        let sector = r.parameters.get("sector").map_or("", String::as_str);
        for s in &r.samples {
            let Some(a) = s.target else { continue };
            w.write_record([
                r.variant.as_str(),
                sector,
                s.label.as_str(),
                &format!("{a:.12}"),
                &format!("{:.12}", s.value),
                &format!("{:e}", (s.value - a).abs()),
            ])?;
        }
    }
    w.flush()
}

/// Writes `results.ndjson` and/or `results.csv`, `spectrum.csv` when
/// spectra were compared, and `summary.txt`. Returns the files written.
pub fn write_outputs(dir: &Path, meta: &Meta, reports: &[VerificationReport], format: Format) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, Format::Ndjson | Format::Both) {
        let p = dir.join("results.ndjson");
        let mut records = vec![Record::Campaign(meta.clone())];
        records.extend(reports.iter().cloned().map(Record::Report));
        let mut f = io::BufWriter::new(std::fs::File::create(&p)?);
        write_ndjson(&mut f, &records)?;
        f.flush()?;
        written.push(p);
    }
    if matches!(format, Format::Csv | Format::Both) {
        let p = dir.join("results.csv");
        write_reports_csv(&p, reports)?;
        written.push(p);
    }
    if reports.iter().any(|r| r.property == "spectrum") {
        let p = dir.join("spectrum.csv");
        write_spectrum_csv(&p, reports)?;
        written.push(p);
    }
    let p = dir.join("summary.txt");
    std::fs::write(&p, summary_text(meta, reports))?;
    written.push(p);
    Ok(written)
}

/// Campaign records first (sorted, deduplicated), then reports sorted by
/// property, variant, parameters and finally the whole serialized line, so
/// the result does not depend on file order.
pub fn merge(inputs: Vec<Vec<Record>>) -> Vec<Record> {
    let mut metas = Vec::new();
    let mut reports = Vec::new();
    for rec in inputs.into_iter().flatten() {
        match rec {
            Record::Campaign(m) => metas.push(m),
            Record::Report(r) => {
                let params = serde_json::to_string(&r.parameters).expect("map serializes");
                let line = serde_json::to_string(&r).expect("report serializes");
                reports.push(((r.property.clone(), r.variant.clone(), params, line), r));
            }
        }
    }
    metas.sort();
    metas.dedup();
    reports.sort_by(|a, b| a.0.cmp(&b.0));
    metas.into_iter().map(Record::Campaign).chain(reports.into_iter().map(|(_, r)| Record::Report(r))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep(prop: &str, metric: f64) -> VerificationReport {
        VerificationReport::new(prop, "v", metric, 1.0, 0.0).with_param("J", metric)
    }

    #[test]
    fn tally_and_exit_codes() {
        let rs = vec![rep("a", 0.5), rep("b", 2.0), rep("c", 3.0).report_only()];
        let t = Tally::of(&rs);
        assert_eq!((t.total, t.passed, t.failed, t.failed_report_only), (3, 1, 1, 1));
        assert_eq!(t.exit_code(false), 1);
        let only = Tally::of(&rs[2..]);
        assert_eq!(only.exit_code(false), 0);
        assert_eq!(only.exit_code(true), 1);
    }

    #[test]
    fn ndjson_round_trip() {
        let meta = Meta { name: "x".into(), config_hash: "00".into(), version: "0".into() };
        let recs = vec![Record::Campaign(meta), Record::Report(rep("a", 0.5).with_note("n"))];
        let mut buf = Vec::new();
        write_ndjson(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().contains("\"record\":\"campaign\""));
        let back: Vec<Record> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(back, recs);
    }

    #[test]
    fn merge_is_order_independent() {
        let a = vec![Record::Report(rep("b", 0.1)), Record::Report(rep("a", 0.2))];
        let b = vec![Record::Report(rep("a", 0.1))];
        let m1 = merge(vec![a.clone(), b.clone()]);
        let m2 = merge(vec![b, a]);
        assert_eq!(m1, m2);
        let props: Vec<&str> = m1
            .iter()
            .filter_map(|r| match r {
                Record::Report(r) => Some(r.property.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(props, ["a", "a", "b"]);
    }
}
