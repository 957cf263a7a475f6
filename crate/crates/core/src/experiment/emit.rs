use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use super::run::TrajectoryRecord;
use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "gaussbath";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Paths written by [`emit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFiles {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `{:.16e}` keeps 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Data rows preceded by `#` comment lines with units and conventions.
pub fn write_csv<W: Write>(record: &TrajectoryRecord, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let path = PathBuf::from("<csv>");
    let mut preamble = vec![
        format!("# {TOOL_NAME} {TOOL_VERSION}: {}", record.config.name()),
        "# units: hbar = k_B = 1; entropies and mutual information in nats".to_string(),
        "# covariance convention: sigma_ab = <x_a x_b + x_b x_a>, vacuum = identity".to_string(),
        "# zeta = beta (E_env(t) - E_env(0)) - (S_sys(0) - S_sys(t)), beta = 1/T_E".to_string(),
        format!(
            "# T_eff is NaN where |s_qq - s_pp| or |s_qp| of the detector exceeds {} * nu",
            record.config.observables.thermality
        ),
    ];
    for c in &record.columns {
        preamble.push(format!("# column {}: {}", c.label(), c.unit()));
    }
    for line in preamble {
        writeln!(out, "{line}").map_err(io_error(&path))?;
    }
    let mut w = csv::Writer::from_writer(out);
    let header = std::iter::once("t").chain(record.columns.iter().map(|c| c.label()));
    w.write_record(header).map_err(csv_error)?;
    for (s, row) in record.samples.iter().zip(record.rows()) {
        let fields = std::iter::once(format_value(s.t)).chain(row.into_iter().map(format_value));
        w.write_record(fields).map_err(csv_error)?;
    }
    w.flush().map_err(io_error(&path))
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: PathBuf::from("<csv>"),
            source,
        },
        other => Error::NumericalQuality(format!("CSV serialization failed: {other:?}")),
    }
}

/// Metadata describing how the data were produced.
pub fn sidecar(record: &TrajectoryRecord) -> serde_json::Value {
    json!({
        "tool": { "name": TOOL_NAME, "version": TOOL_VERSION },
        "name": record.config.name(),
        "config": record.config,
        "model": record.model,
        "assumptions": record.assumptions,
        "columns": record.columns.iter().map(|c| json!({"label": c.label(), "unit": c.unit()})).collect::<Vec<_>>(),
        "telemetry": record.telemetry,
        "status": if record.passed() { "ok" } else { "failed" },
    })
}

/// Write `<stem>.csv` and `<stem>.json` into `dir`, creating it if needed.
pub fn emit(record: &TrajectoryRecord, dir: &Path) -> Result<EmittedFiles> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let stem = record.config.stem();
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let file = File::create(&csv_path).map_err(io_error(&csv_path))?;
    write_csv(record, file).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: csv_path.clone(),
            source,
        },
        other => other,
    })?;
    let text = serde_json::to_string_pretty(&sidecar(record))
        .map_err(|e| Error::NumericalQuality(format!("JSON serialization failed: {e}")))?;
    fs::write(&json_path, text + "\n").map_err(io_error(&json_path))?;
    Ok(EmittedFiles {
        csv: csv_path,
        sidecar: json_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run, RunConfig};

    fn record() -> TrajectoryRecord {
        let c = RunConfig::from_toml_str(
            r#"
            name = "emit"
            [model]
            kind = "cavity"
            modes = 2
            length = 1
            detector_frequency = "pi"
            coupling = 0.1
            system_temperature = 1
            bath_temperature = 2
            [switching]
            duration = 4
            ramp = 1
            [grid]
            dt = 1e-3
            samples = 9
            [observables]
            columns = ["zeta", "T_eff", "MI(S:mode1)"]
            "#,
        )
        .unwrap();
        run(&c).unwrap()
    }

    #[test]
    fn csv_round_trips_exactly() {
        let r = record();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# gaussbath"));
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header, ["t", "zeta", "T_eff", "MI(S:mode1)"]);
        let rows = r.rows();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.unwrap();
            assert_eq!(rec[0].parse::<f64>().unwrap(), r.samples[i].t);
            for (j, want) in rows[i].iter().enumerate() {
                let got: f64 = rec[j + 1].parse().unwrap();
                assert!(got == *want || (got.is_nan() && want.is_nan()));
            }
        }
    }

    #[test]
    fn sidecar_surfaces_assumptions() {
        let r = record();
        let s = sidecar(&r);
        assert_eq!(s["assumptions"]["detector_position"]["value"], json!(0.5));
        assert_eq!(s["tool"]["version"], json!(TOOL_VERSION));
        assert_eq!(s["status"], json!("ok"));
        assert_eq!(s["config"]["model"]["detector_frequency"], json!("pi"));
    }

    #[test]
    fn emit_writes_both_files_and_reports_io_errors() {
        let r = record();
        let dir = tempfile::tempdir().unwrap();
        let files = emit(&r, &dir.path().join("nested")).unwrap();
        assert!(files.csv.ends_with("emit.csv") && files.sidecar.exists());
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = emit(&r, &blocker.join("sub")).unwrap_err();
        assert!(err.is_io(), "{err}");
    }
}
