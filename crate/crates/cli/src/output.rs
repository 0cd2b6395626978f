use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use umuscl::experiments::SeriesOutcome;
use umuscl::SchemeConfig;

/// `#`-prefixed run description written ahead of every table.
pub struct Header {
    lines: Vec<(String, String)>,
}

impl Header {
    pub fn new(experiment: &str, scheme: &SchemeConfig, grids: &[usize]) -> Self {
        let grids: Vec<String> = grids.iter().map(|n| n.to_string()).collect();
        let mut h = Self { lines: Vec::new() };
        h.push("experiment", experiment);
        h.push("scheme", scheme.mode);
        h.push("kappa", format!("{:.17}", scheme.kappa.value()));
        h.push("grids", grids.join(","));
        h.push("umuscl_version", env!("CARGO_PKG_VERSION"));
        h
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
    }
}

fn variable_names(count: usize) -> &'static [&'static str] {
    match count {
        1 => &["u"],
        3 => &["rho", "u", "p"],
        4 => &["rho", "u", "v", "p"],
        _ => &[],
    }
}

pub fn errors_tsv(header: &Header, outcome: &SeriesOutcome) -> String {
    let mut out = header.render();
    let count = outcome.report.records.first().map_or(0, |r| r.per_variable.len());
    out.push_str("n\th\tLinf\tL2");
    for name in variable_names(count) {
        let _ = write!(out, "\tLinf_{name}");
    }
    out.push('\n');
    for r in &outcome.report.records {
        let _ = write!(out, "{}\t{:.10e}\t{:.10e}\t{:.10e}", r.n, r.h, r.linf, r.l2);
        for e in &r.per_variable {
            let _ = write!(out, "\t{e:.10e}");
        }
        out.push('\n');
    }
    out
}

pub fn report_tsv(header: &Header, outcome: &SeriesOutcome) -> String {
    let mut out = header.render();
    let norm = match outcome.report.norm {
        umuscl::analysis::Norm::Linf => "Linf",
        umuscl::analysis::Norm::L2 => "L2",
    };
    let _ = writeln!(out, "# designated_norm={norm}");
    if let Some(c) = outcome.report.critical {
        let _ = writeln!(out, "# critical_h_formula={:.10e}", c.formula);
        if let Some(listed) = c.listed {
            let _ = writeln!(out, "# critical_h_listed={listed}");
        }
    }
    out.push_str(&outcome.report.to_tsv());
    out
}

pub fn iterations_tsv(header: &Header, outcome: &SeriesOutcome) -> String {
    let mut out = header.render();
    out.push_str("n\tstage\titeration\tratio\tresidual_per_equation\n");
    for run in &outcome.runs {
        for rec in &run.log {
            let res: Vec<String> = rec.residual.iter().map(|v| format!("{v:.6e}")).collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.6e}\t{}",
                run.record.n,
                rec.stage,
                rec.iteration,
                rec.ratio,
                res.join(",")
            );
        }
    }
    out
}

pub fn write_outputs(dir: &Path, header: &Header, outcome: &SeriesOutcome) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("errors.tsv"), errors_tsv(header, outcome))?;
    fs::write(dir.join("report.tsv"), report_tsv(header, outcome))?;
    fs::write(dir.join("iterations.tsv"), iterations_tsv(header, outcome))?;
    Ok(())
}
