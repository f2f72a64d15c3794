//! Artifact emission. All floating-point output goes through the
//! 17-significant-digit formatter, so reruns are byte-identical.

use std::io::Write;
use std::path::{Path, PathBuf};

/// In-memory artifacts of a completed scenario.
pub struct Artifacts {
    pub config_json: String,
    pub results_csv: String,
    pub report_json: Option<String>,
    pub plot_csv: Option<String>,
    pub summary: String,
    pub pass: bool,
}

/// Write the artifact set under `<prefix>.*`.
pub fn write_artifacts(prefix: &str, artifacts: &Artifacts) -> std::io::Result<Vec<PathBuf>> {
    let prefix = Path::new(prefix);
    if let Some(parent) = prefix.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut written = Vec::new();
    let mut emit = |suffix: &str, body: &str| -> std::io::Result<()> {
        let path = with_suffix(prefix, suffix);
        let mut file = std::fs::File::create(&path)?;
        file.write_all(body.as_bytes())?;
        written.push(path);
        Ok(())
    };
    emit("config.json", &artifacts.config_json)?;
    emit("results.csv", &artifacts.results_csv)?;
    if let Some(report) = &artifacts.report_json {
        emit("report.json", report)?;
    }
    if let Some(plot) = &artifacts.plot_csv {
        emit("plot.csv", plot)?;
    }
    emit("summary.txt", &artifacts.summary)?;
    Ok(written)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    prefix.with_file_name(name)
}

/// One CSV cell for a real number.
pub fn cell(v: f64) -> String {
    pcaf_core::jsonfmt::f64_str(v)
}

/// Plot-data rows `(curve, x, y, yerr)` per curve.
pub fn plotdata(curves: &[(String, Vec<(f64, f64, f64)>)]) -> String {
    let mut out = String::from("curve,x,y,yerr\n");
    for (name, rows) in curves {
        for &(x, y, yerr) in rows {
            out.push_str(name);
            out.push(',');
            out.push_str(&cell(x));
            out.push(',');
            out.push_str(&cell(y));
            out.push(',');
            out.push_str(&cell(yerr));
            out.push('\n');
        }
    }
    out
}
