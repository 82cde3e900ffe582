//! JSON reports for single points and whole scans.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::classify::{classify_point, report_entry, ClassifyError, ReportEntry, Verdict};
use crate::oracle::{cross_entry, CrossEntry};
use crate::singular::{analyze_point, singular_scan, Origin, Rejected, ScanOptions, ScanResult};
use crate::surface::{Domain, WData};

/// Associate angles checked for every reported point.
pub const DEFAULT_THETAS: [f64; 3] = [-1.0, 0.3, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub verdict: Verdict,
    pub agree: bool,
    pub covered: bool,
    pub borderline: bool,
    pub margins: BTreeMap<String, f64>,
    pub violations: Vec<String>,
}

impl From<CrossEntry> for OracleSummary {
    fn from(e: CrossEntry) -> Self {
        OracleSummary {
            verdict: e.verdict_oracle,
            agree: e.agree,
            covered: e.covered,
            borderline: e.borderline,
            margins: e.margins,
            violations: e.violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    #[serde(flatten)]
    pub entry: ReportEntry,
    pub origin: Option<Origin>,
    pub oracle: OracleSummary,
}

/// Classification of one point with transforms and the oracle verdict.
pub fn point_report(w: &WData, p: (f64, f64), thetas: &[f64]) -> Result<PointReport, ClassifyError> {
    let sp = analyze_point(w, p)?;
    let c = classify_point(w, &sp)?;
    Ok(PointReport {
        entry: report_entry(w, &sp, &c, thetas),
        origin: None,
        oracle: cross_entry(w, &sp).into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSummary {
    pub agreements: usize,
    pub disagreements: usize,
    pub uncovered: usize,
    pub borderline: usize,
    pub disagreeing: Vec<CrossEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub name: Option<String>,
    pub domain: [[f64; 2]; 2],
    pub curves: usize,
    pub w1_lines: Vec<f64>,
    pub w2_lines: Vec<f64>,
    pub counts: BTreeMap<String, usize>,
    pub points: Vec<PointReport>,
    pub rejected: Vec<Rejected>,
    pub crosscheck: CrossSummary,
}

impl ScanReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.counts.get(&v.to_string()).copied().unwrap_or(0)
    }
}

/// Scan, classify every located point, and cross-check with the oracle.
pub fn scan_report(
    name: Option<&str>,
    w: &WData,
    domain: &Domain,
    opts: &ScanOptions,
    thetas: &[f64],
) -> (ScanReport, ScanResult) {
    use rayon::prelude::*;
    let scan = singular_scan(w, domain, opts);
    let mut rejected = scan.rejected.clone();
    let rows: Vec<Result<PointReport, Rejected>> = scan
        .points
        .par_iter()
        .map(|sp| {
            let p = &sp.point;
            match classify_point(w, p) {
                Ok(c) => Ok(PointReport {
                    entry: report_entry(w, p, &c, thetas),
                    origin: Some(sp.origin),
                    oracle: cross_entry(w, p).into(),
                }),
                Err(e) => Err(Rejected {
                    uv: p.uv,
                    reason: e.to_string(),
                }),
            }
        })
        .collect();
    let mut points = Vec::new();
    for r in rows {
        match r {
            Ok(p) => points.push(p),
            Err(r) => rejected.push(r),
        }
    }
    let mut counts = BTreeMap::new();
    let mut cross = CrossSummary {
        agreements: 0,
        disagreements: 0,
        uncovered: 0,
        borderline: 0,
        disagreeing: Vec::new(),
    };
    for p in &points {
        *counts.entry(p.entry.verdict.to_string()).or_insert(0) += 1;
        let o = &p.oracle;
        cross.borderline += o.borderline as usize;
        if !o.covered {
            cross.uncovered += 1;
        } else if o.agree {
            cross.agreements += 1;
        } else {
            cross.disagreements += 1;
            cross.disagreeing.push(CrossEntry {
                u: p.entry.u,
                v: p.entry.v,
                verdict_wdata: p.entry.verdict,
                verdict_oracle: o.verdict,
                covered: o.covered,
                borderline: o.borderline,
                agree: false,
                margins: o.margins.clone(),
                violations: o.violations.clone(),
            });
        }
    }
    let report = ScanReport {
        name: name.map(str::to_string),
        domain: [[domain.u.0, domain.u.1], [domain.v.0, domain.v.1]],
        curves: scan.curves.len(),
        w1_lines: scan.w_lines.u_roots.iter().map(|r| r.x).collect(),
        w2_lines: scan.w_lines.v_roots.iter().map(|r| r.x).collect(),
        counts,
        points,
        rejected,
        crosscheck: cross,
    };
    (report, scan)
}

/// Parameter-space polylines of the singular set, for mesh overlays.
pub fn overlay(scan: &ScanResult, domain: &Domain) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = scan.curves.iter().map(|c| c.points.clone()).collect();
    for r in &scan.w_lines.u_roots {
        out.push(vec![(r.x, domain.v.0), (r.x, domain.v.1)]);
    }
    for r in &scan.w_lines.v_roots {
        out.push(vec![(domain.u.0, r.x), (domain.u.1, r.x)]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn enneper_window() {
        let f = fixtures::enneper();
        let opts = ScanOptions {
            grid: (48, 48),
            ..ScanOptions::default()
        };
        let (r, _) = scan_report(Some("enneper"), &f.wdata, &f.domain, &opts, &DEFAULT_THETAS);
        assert_eq!(r.curves, 1);
        assert_eq!(r.count(Verdict::Swallowtail), 1);
        assert_eq!(r.crosscheck.disagreements, 0);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["points"][0]["verdict"].is_string());
        assert!(json["points"][0]["oracle"]["agree"].is_boolean());
    }

    #[test]
    fn single_point() {
        let f = fixtures::d4();
        let p = point_report(&f.wdata, (0.0, 0.0), &DEFAULT_THETAS).unwrap();
        assert_eq!(p.entry.verdict, Verdict::D4Plus);
        assert!(p.oracle.agree);
        assert!(p.entry.transforms.associate.values().all(|v| *v == Some(Verdict::D4Plus)));
        assert!(point_report(&f.wdata, (0.5, 0.5), &DEFAULT_THETAS).is_err());
    }
}
