//! Deterministic text outputs: flat key: value reports and CSV files, all
//! written atomically (temp file + rename) with 17-significant-digit floats.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::hypotheses::{HypothesisReport, Inequality};
use crate::integrator::IvpTrajectory;
use crate::periodic::PeriodicTrajectory;
use crate::spectral::SineBasis;

/// 17 significant decimal digits; round-trips any f64 and keeps outputs
/// byte-deterministic.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordered key: value lines.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.lines.push((key.into(), value.into()));
    }

    pub fn push_float(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, format_float(value));
    }

    pub fn push_inequality(&mut self, name: &str, ineq: Option<Inequality>) {
        match ineq {
            Some(i) => {
                self.push_float(format!("check.{name}.lhs"), i.lhs);
                self.push_float(format!("check.{name}.rhs"), i.rhs);
                self.push_float(format!("check.{name}.margin"), i.margin());
                self.push(format!("check.{name}.verdict"), i.verdict().to_string());
            }
            None => {
                self.push(format!("check.{name}.verdict"), "UNKNOWN");
            }
        }
    }

    pub fn extend_config(&mut self, pairs: &[(String, String)]) {
        for (k, v) in pairs {
            self.push(format!("config.{k}"), v.clone());
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            s.push_str(k);
            s.push_str(": ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }
}

/// All constants, margins and verdicts of a hypothesis report.
pub fn hypothesis_lines(r: &HypothesisReport, report: &mut Report) {
    report.push("convention", r.convention.name());
    report.push_float("omega", r.omega);
    report.push_float("alpha", r.alpha);
    report.push_float("constant.C", r.constants.c);
    report.push_float("constant.M_alpha", r.constants.m_alpha);
    report.push_float("constant.C_one_minus_alpha", r.constants.c_one_minus_alpha);
    match r.constants.gamma {
        Some(g) => report.push_float("constant.gamma", g),
        None => report.push("constant.gamma", "undeclared"),
    }
    report.push_inequality("H3", r.mild.h3);
    report.push_inequality("H3_prime", r.mild.h3_prime);
    report.push_inequality("H6", r.regularity.h6);
    report.push_inequality("F3", r.model.f3);
    report.push_inequality("F6", r.model.f6);
    report.push("verdict.existence", r.mild.existence.to_string());
    report.push("verdict.uniqueness", r.mild.uniqueness.to_string());
    report.push("verdict.classical", r.regularity.classical.to_string());
    report.push("verdict.strong", r.regularity.strong.to_string());
    report.push("verdict.model_mild", r.model.mild.to_string());
    report.push("verdict.model_classical", r.model.classical.to_string());
    report.push("verdict.model_strong", r.model.strong.to_string());
    report.push("verdict.mild", r.mild_verdict().to_string());
}

/// "t,x,u" rows, t-major, for one period of a solution.
pub fn solution_csv(traj: &PeriodicTrajectory, basis: &SineBasis) -> String {
    let m_x = basis.m_x();
    let mut out = String::from("t,x,u\n");
    for j in 0..traj.m_t() {
        let t = traj.time(j);
        let grid = basis.synthesize(traj.field(j as isize));
        for (i, v) in grid.values().iter().enumerate() {
            let x = (i + 1) as f64 / m_x as f64;
            out.push_str(&format_float(t));
            out.push(',');
            out.push_str(&format_float(x));
            out.push(',');
            out.push_str(&format_float(*v));
            out.push('\n');
        }
    }
    out
}

/// "t,x,u" rows for an initial-value trajectory.
pub fn trajectory_csv(traj: &IvpTrajectory, basis: &SineBasis) -> String {
    let m_x = basis.m_x();
    let mut out = String::from("t,x,u\n");
    for (k, field) in traj.fields.iter().enumerate() {
        let t = traj.time(k);
        let grid = basis.synthesize(field);
        for (i, v) in grid.values().iter().enumerate() {
            let x = (i + 1) as f64 / m_x as f64;
            out.push_str(&format_float(t));
            out.push(',');
            out.push_str(&format_float(x));
            out.push(',');
            out.push_str(&format_float(*v));
            out.push('\n');
        }
    }
    out
}

/// "period_index,distance" rows.
pub fn distance_csv(distances: &[f64]) -> String {
    let mut out = String::from("period_index,distance\n");
    for (p, d) in distances.iter().enumerate() {
        out.push_str(&p.to_string());
        out.push(',');
        out.push_str(&format_float(*d));
        out.push('\n');
    }
    out
}

/// Write bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Parse a solution CSV back into a periodic trajectory (grid values are
/// re-analyzed into coefficients).
pub fn load_solution_csv(
    text: &str,
    omega: f64,
    n_modes: usize,
) -> Result<PeriodicTrajectory> {
    use crate::error::Error;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let mut parts = line.split(',');
        let bad = || Error::InvalidParameter(format!("solution csv row {i} malformed"));
        let t: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let _x: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let u: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        rows.push((t, u));
    }
    if rows.is_empty() {
        return Err(crate::error::Error::InvalidParameter(
            "solution csv has no rows".into(),
        ));
    }
    // rows are t-major: the leading run of equal t values spans one time slice
    let pts = rows.iter().take_while(|(t, _)| *t == rows[0].0).count();
    if pts == 0 || !rows.len().is_multiple_of(pts) {
        return Err(crate::error::Error::InvalidParameter(
            "solution csv is not a full t-major grid".into(),
        ));
    }
    let m_t = rows.len() / pts;
    let basis = SineBasis::new(n_modes, pts + 1)?;
    let fields = (0..m_t)
        .map(|j| {
            let values = rows[j * pts..(j + 1) * pts].iter().map(|(_, u)| *u).collect();
            basis.analyze(&crate::spectral::GridFunction::new(values))
        })
        .collect::<Result<Vec<_>>>()?;
    PeriodicTrajectory::new(omega, fields)
}
