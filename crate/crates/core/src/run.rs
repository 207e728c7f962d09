//! Batch runs: alpha sweeps and spectra written as CSV files with a metadata
//! comment block, plus the matching reader.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::atom::build_scheme;
use crate::cbs::{cbs_spectrum, sweep_alpha, CbsSpectrum, SweepPoint};
use crate::config::RunConfig;
use crate::dressed::{generalized_rabi, validate_spectrum, PeakReport};
use crate::error::{Error, Result};
use crate::liouvillian::PhysicalParams;

pub const SWEEP_HEADER: [&str; 7] = ["s", "omega_rabi", "l2_el", "l2_inel", "c2_el", "c2_inel", "alpha"];
pub const SPECTRUM_HEADER: [&str; 3] = ["omega_over_gamma", "background_density", "interference_density"];
pub const SWEEP_FILE: &str = "alpha_sweep.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const REPORT_FILE: &str = "spectrum_report.txt";

/// Full double precision (17 significant digits).
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn metadata(command: &str, cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# command = {command}");
    let _ = writeln!(s, "# seed = {}", cfg.seed);
    let _ = writeln!(s, "# config:");
    for line in cfg.echo().lines() {
        let _ = writeln!(s, "#   {line}");
    }
    s
}

fn write_rows(meta: &str, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let body = String::from_utf8(body).expect("csv output is UTF-8");
    Ok(format!("{meta}{body}"))
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    pub csv: String,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.result.is_err()).count()
    }
}

/// Enhancement-factor sweep over `sweep_s`; rows follow the input order.
/// Failed points are kept with an `error` column.
pub fn alpha_sweep(cfg: &RunConfig) -> Result<SweepOutcome> {
    let s = cfg.sweep()?;
    let scheme = build_scheme(cfg.scheme);
    let base = cfg.base_params();
    base.validate()?;
    let points = sweep_alpha(&scheme, &base, cfg.detuning, s, &cfg.options())?;
    let with_error = points.iter().any(|p| p.result.is_err());
    let mut header: Vec<&str> = SWEEP_HEADER.to_vec();
    if with_error {
        header.push("error");
    }
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            let mut row = vec![format_value(p.s), format_value(p.rabi)];
            match &p.result {
                Ok(c) => {
                    for v in [c.l2_el, c.l2_inel, c.c2_el, c.c2_inel, c.alpha] {
                        row.push(format_value(v));
                    }
                    if with_error {
                        row.push(String::new());
                    }
                }
                Err(e) => {
                    row.extend(std::iter::repeat("NaN".to_string()).take(5));
                    row.push(e.replace(['\n', '\r'], " "));
                }
            }
            row
        })
        .collect();
    let csv = write_rows(&metadata("alpha-sweep", cfg), &header, &rows)?;
    Ok(SweepOutcome { points, csv })
}

#[derive(Clone, Debug)]
pub struct SpectrumOutcome {
    /// Normalized to unit inelastic background area.
    pub spectrum: CbsSpectrum,
    pub background_peaks: PeakReport,
    pub interference_peaks: PeakReport,
    pub csv: String,
    pub report: String,
}

fn peak_lines(s: &mut String, title: &str, r: &PeakReport) {
    let _ = writeln!(s, "{title} (tolerance {}):", r.tolerance);
    let _ = writeln!(s, "  {:<20} {:>12} {:>12} {:>10}  status", "label", "predicted", "found", "offset");
    for m in &r.matches {
        let (found, off) = match (m.found, m.deviation()) {
            (Some(f), Some(d)) => (format!("{f:.4}"), format!("{d:+.4}")),
            _ => ("-".into(), "-".into()),
        };
        let _ = writeln!(
            s,
            "  {:<20} {:>12.4} {:>12} {:>10}  {}",
            m.label.name(),
            m.predicted,
            found,
            off,
            if m.within_tolerance { "ok" } else { "missed" }
        );
    }
    let found: Vec<String> = r.extrema.iter().map(|w| format!("{w:.4}")).collect();
    let _ = writeln!(s, "  extrema ({}): {}", r.extrema.len(), found.join(" "));
}

fn render_report(cfg: &RunConfig, rabi: f64, out: &CbsSpectrum, bg: &PeakReport, inter: &PeakReport) -> String {
    let c = out.components;
    let mut s = String::new();
    let _ = writeln!(s, "rabi = {rabi}");
    let _ = writeln!(s, "detuning = {}", cfg.detuning);
    let _ = writeln!(s, "generalized_rabi = {}", generalized_rabi(rabi, cfg.detuning));
    let _ = writeln!(s, "frequency_points = {}", out.background.omega.len());
    let _ = writeln!(s);
    peak_lines(&mut s, "background peaks", bg);
    peak_lines(&mut s, "interference extrema", inter);
    let _ = writeln!(s);
    let _ = writeln!(s, "background_area = {}", format_value(out.background.inelastic_area()));
    let _ = writeln!(s, "interference_area = {}", format_value(out.interference.inelastic_area()));
    let _ = writeln!(s, "area_ratio = {}", format_value(out.area_ratio()));
    let _ = writeln!(s, "background_elastic_weight = {}", format_value(out.background.elastic_weight));
    let _ = writeln!(s, "interference_elastic_weight = {}", format_value(out.interference.elastic_weight));
    let _ = writeln!(s, "l2_el = {}", format_value(c.l2_el));
    let _ = writeln!(s, "l2_inel = {}", format_value(c.l2_inel));
    let _ = writeln!(s, "c2_el = {}", format_value(c.c2_el));
    let _ = writeln!(s, "c2_inel = {}", format_value(c.c2_inel));
    let _ = writeln!(s, "alpha = {}", format_value(c.alpha));
    let _ = writeln!(s, "alpha_from_spectra = {}", format_value(out.implied_alpha()));
    s
}

/// Background and interference spectra at a single Rabi frequency, with the
/// peak report. All checks on the configuration happen before solving.
pub fn spectrum(cfg: &RunConfig) -> Result<SpectrumOutcome> {
    let rabi = cfg.spectrum_rabi()?;
    let omega = cfg.frequency_grid()?;
    let params = PhysicalParams {
        rabi,
        ..cfg.base_params()
    };
    params.validate()?;
    let scheme = build_scheme(cfg.scheme);
    let raw = cbs_spectrum(&scheme, &params, &omega, &cfg.options())?;
    let spectrum = raw.normalized();
    let bg = validate_spectrum(&spectrum.background, rabi, cfg.detuning, cfg.peak_tolerance)?;
    let inter = validate_spectrum(&spectrum.interference, rabi, cfg.detuning, cfg.peak_tolerance)?;
    let rows: Vec<Vec<String>> = spectrum
        .background
        .omega
        .iter()
        .zip(&spectrum.background.density)
        .zip(&spectrum.interference.density)
        .map(|((w, b), i)| vec![format_value(*w), format_value(*b), format_value(*i)])
        .collect();
    let meta = metadata("spectrum", cfg);
    let csv = write_rows(&meta, &SPECTRUM_HEADER, &rows)?;
    let report = format!("{meta}{}", render_report(cfg, rabi, &spectrum, &bg, &inter));
    Ok(SpectrumOutcome {
        spectrum,
        background_peaks: bg,
        interference_peaks: inter,
        csv,
        report,
    })
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn write_sweep(cfg: &RunConfig, out: &SweepOutcome) -> Result<PathBuf> {
    write_file(&cfg.output_dir, SWEEP_FILE, &out.csv)
}

pub fn write_spectrum(cfg: &RunConfig, out: &SpectrumOutcome) -> Result<(PathBuf, PathBuf)> {
    Ok((
        write_file(&cfg.output_dir, SPECTRUM_FILE, &out.csv)?,
        write_file(&cfg.output_dir, REPORT_FILE, &out.report)?,
    ))
}

/// A CSV file as written by this crate.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    /// Comment lines without the leading `#`.
    pub metadata: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("no column `{name}`")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.column_index(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[k].parse::<f64>()
                    .map_err(|_| Error::Config(format!("`{}` in column `{name}` is not a number", r[k])))
            })
            .collect()
    }

    /// Value of a `key = value` line in the metadata block.
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find_map(|l| {
            let (k, v) = l.split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    }
}

pub fn read_csv(text: &str) -> Result<CsvTable> {
    let metadata = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l[1..].trim_start().to_string())
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, csv::Error>>()?;
    Ok(CsvTable {
        metadata,
        header,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn value_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 23.0 / 21.0, 1e-300, -7.25e12, 0.0] {
            assert_eq!(format_value(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_value(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn sweep_csv_round_trip() {
        let cfg = parse_config("sweep_s = 0.001, 1000\nseed = 3").unwrap();
        let out = alpha_sweep(&cfg).unwrap();
        assert_eq!(out.failures(), 0);
        assert!(!out.csv.contains('\r'));
        let t = read_csv(&out.csv).unwrap();
        assert_eq!(t.header, SWEEP_HEADER);
        assert_eq!(t.meta("seed"), Some("3"));
        assert_eq!(t.meta("scheme"), Some("v_type"));
        let alpha = t.column("alpha").unwrap();
        let want: Vec<f64> = out.points.iter().map(|p| p.result.as_ref().unwrap().alpha).collect();
        assert_eq!(alpha, want);
    }

    #[test]
    fn failing_points_get_error_column() {
        let cfg = parse_config("sweep_s = 0.1, 1\ncoupling = scalar").unwrap();
        let out = alpha_sweep(&cfg).unwrap();
        assert_eq!(out.failures(), 2);
        let t = read_csv(&out.csv).unwrap();
        assert_eq!(t.header.last().map(String::as_str), Some("error"));
        assert!(t.rows[0][7].contains("scalar"));
        assert!(t.column("alpha").unwrap()[0].is_nan());
    }

    #[test]
    fn missing_inputs_are_config_errors() {
        let cfg = parse_config("").unwrap();
        assert!(matches!(alpha_sweep(&cfg), Err(Error::Config(_))));
        assert!(matches!(spectrum(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn uncovered_grid_fails_before_solving() {
        let cfg = parse_config("rabi = 100\nomega_grid = uniform(-100, 100, 1)").unwrap();
        let e = spectrum(&cfg).unwrap_err();
        assert!(matches!(e, Error::Coverage { .. }));
        assert_eq!(e.exit_code(), 1);
    }
}
