//! Run configuration: a line-oriented `key = value` grammar with `#` comments.
//!
//! | key               | default   | meaning                                        |
//! |-------------------|-----------|------------------------------------------------|
//! | `scheme`          | `v_type`  | `two_level`, `v_type` or `full_j0_j1`          |
//! | `coupling`        | `vector`  | `vector` or `scalar` photon exchange           |
//! | `detuning`        | `0`       | laser detuning in units of gamma               |
//! | `sweep_s`         | none      | saturation values: list or `logspace(lo, hi, n)` |
//! | `rabi`            | none      | Rabi frequency of a spectrum run               |
//! | `kr`              | `100`     | interatomic distance times wavenumber, >= 10   |
//! | `phase_samples_a` | `4`       | laser phase samples                            |
//! | `phase_samples_b` | `4`       | detection phase samples                        |
//! | `phase_samples_p` | `4`       | propagation phase samples                      |
//! | `omega_grid`      | `default` | `default` or `uniform(lo, hi, step)`           |
//! | `route`           | `leading` | `leading` (second order) or `direct`           |
//! | `orientation`     | `fixed`   | `fixed` or `isotropic`                         |
//! | `axis`            | `1, 0, 0` | interatomic axis for fixed orientation         |
//! | `orientation_samples` | `64`  | axes drawn for isotropic averaging             |
//! | `seed`            | `0`       | seed of the orientation sampler                |
//! | `peak_tolerance`  | `0.5`     | allowed peak offset in units of gamma          |
//! | `output_dir`      | `.`       | directory receiving CSV files and reports      |

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::atom::SchemeKind;
use crate::cbs::{CbsOptions, GridSize, Orientation, Route, MIN_PHASE_SAMPLES};
use crate::dressed::{default_grid, generalized_rabi, peak_positions, REFINED_HALFWIDTH, REFINED_STEP};
use crate::error::{Error, Result};
use crate::liouvillian::{CouplingMode, PhysicalParams, MIN_KR};
use crate::spectra::{refine_grid, uniform_grid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OmegaGrid {
    Default,
    Uniform { lo: f64, hi: f64, step: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub coupling: CouplingMode,
    pub detuning: f64,
    pub sweep_s: Option<Vec<f64>>,
    pub rabi: Option<f64>,
    pub kr: f64,
    pub grid: GridSize,
    pub omega_grid: OmegaGrid,
    pub route: Route,
    pub isotropic: bool,
    pub axis: [f64; 3],
    pub orientation_samples: usize,
    pub seed: u64,
    pub peak_tolerance: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::VType,
            coupling: CouplingMode::Vector,
            detuning: 0.0,
            sweep_s: None,
            rabi: None,
            kr: 100.0,
            grid: GridSize::uniform(MIN_PHASE_SAMPLES),
            omega_grid: OmegaGrid::Default,
            route: Route::LeadingOrder,
            isotropic: false,
            axis: [1.0, 0.0, 0.0],
            orientation_samples: 64,
            seed: 0,
            peak_tolerance: 0.5,
            output_dir: PathBuf::from("."),
        }
    }
}

pub const KEYS: &[&str] = &[
    "scheme",
    "coupling",
    "detuning",
    "sweep_s",
    "rabi",
    "kr",
    "phase_samples_a",
    "phase_samples_b",
    "phase_samples_p",
    "omega_grid",
    "route",
    "orientation",
    "axis",
    "orientation_samples",
    "seed",
    "peak_tolerance",
    "output_dir",
];

fn number(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("`{}` is not finite", s.trim()));
    }
    Ok(v)
}

fn count(s: &str) -> std::result::Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))
}

fn call_args<'a>(s: &'a str, name: &str) -> Option<std::result::Result<Vec<&'a str>, String>> {
    let rest = s.trim().strip_prefix(name)?.trim_start();
    let inner = rest.strip_prefix('(')?;
    Some(match inner.strip_suffix(')') {
        Some(body) => Ok(body.split(',').map(str::trim).collect()),
        None => Err(format!("unterminated `{name}(`")),
    })
}

fn list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(number).collect()
}

/// Saturation values from a comma-separated list or `logspace(lo, hi, n)`,
/// where `lo` and `hi` are the end values themselves.
pub fn parse_sweep(s: &str) -> std::result::Result<Vec<f64>, String> {
    let values = match call_args(s, "logspace") {
        Some(args) => {
            let args = args?;
            if args.len() != 3 {
                return Err("logspace takes (lo, hi, n)".into());
            }
            let (lo, hi, n) = (number(args[0])?, number(args[1])?, count(args[2])?);
            if !(lo > 0.0 && hi > lo) || n < 2 {
                return Err("logspace needs 0 < lo < hi and n >= 2".into());
            }
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k == n - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
        None => list(s)?,
    };
    if values.iter().any(|v| *v <= 0.0) {
        return Err("saturation values must be positive".into());
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err("saturation values must be strictly increasing".into());
    }
    Ok(values)
}

fn parse_omega_grid(s: &str) -> std::result::Result<OmegaGrid, String> {
    if s.trim() == "default" {
        return Ok(OmegaGrid::Default);
    }
    match call_args(s, "uniform") {
        Some(args) => {
            let args = args?;
            if args.len() != 3 {
                return Err("uniform takes (lo, hi, step)".into());
            }
            let (lo, hi, step) = (number(args[0])?, number(args[1])?, number(args[2])?);
            if !(hi > lo) || !(step > 0.0) {
                return Err("uniform needs lo < hi and step > 0".into());
            }
            Ok(OmegaGrid::Uniform { lo, hi, step })
        }
        None => Err(format!("expected `default` or `uniform(lo, hi, step)`, found `{}`", s.trim())),
    }
}

fn apply(cfg: &mut RunConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "scheme" => cfg.scheme = value.parse().map_err(|e: Error| e.to_string())?,
        "coupling" => cfg.coupling = value.parse().map_err(|e: Error| e.to_string())?,
        "detuning" => cfg.detuning = number(value)?,
        "sweep_s" => cfg.sweep_s = Some(parse_sweep(value)?),
        "rabi" => {
            let r = number(value)?;
            if r <= 0.0 {
                return Err("rabi must be positive".into());
            }
            cfg.rabi = Some(r);
        }
        "kr" => {
            let kr = number(value)?;
            if kr < MIN_KR {
                return Err(format!("kr ≥ {MIN_KR} required (far-field coupling), found {kr}"));
            }
            cfg.kr = kr;
        }
        "phase_samples_a" | "phase_samples_b" | "phase_samples_p" => {
            let n = count(value)?;
            if n < MIN_PHASE_SAMPLES {
                return Err(format!("at least {MIN_PHASE_SAMPLES} samples required"));
            }
            match key {
                "phase_samples_a" => cfg.grid.a = n,
                "phase_samples_b" => cfg.grid.b = n,
                _ => cfg.grid.p = n,
            }
        }
        "omega_grid" => cfg.omega_grid = parse_omega_grid(value)?,
        "route" => cfg.route = value.parse().map_err(|e: Error| e.to_string())?,
        "orientation" => {
            cfg.isotropic = match value.trim() {
                "fixed" => false,
                "isotropic" => true,
                other => return Err(format!("expected `fixed` or `isotropic`, found `{other}`")),
            }
        }
        "axis" => {
            let v = list(value)?;
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if v.len() != 3 || norm == 0.0 {
                return Err("axis needs three components, not all zero".into());
            }
            cfg.axis = [v[0] / norm, v[1] / norm, v[2] / norm];
        }
        "orientation_samples" => {
            let n = count(value)?;
            if n == 0 {
                return Err("at least one orientation sample required".into());
            }
            cfg.orientation_samples = n;
        }
        "seed" => cfg.seed = value.trim().parse().map_err(|_| format!("`{}` is not a seed", value.trim()))?,
        "peak_tolerance" => {
            let t = number(value)?;
            if t <= 0.0 {
                return Err("peak_tolerance must be positive".into());
            }
            cfg.peak_tolerance = t;
        }
        "output_dir" => {
            if value.trim().is_empty() {
                return Err("output_dir is empty".into());
            }
            cfg.output_dir = PathBuf::from(value.trim());
        }
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            key: content.to_string(),
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let err = |message: String| Error::Parse {
            line,
            key: key.to_string(),
            message,
        };
        if !KEYS.contains(&key) {
            return Err(err("unknown key".into()));
        }
        if seen.contains(&key) {
            return Err(err("duplicate key".into()));
        }
        seen.push(key);
        apply(&mut cfg, key, value).map_err(err)?;
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn options(&self) -> CbsOptions {
        CbsOptions {
            grid: self.grid,
            route: self.route,
            orientation: if self.isotropic {
                Orientation::Isotropic {
                    samples: self.orientation_samples,
                    seed: self.seed,
                }
            } else {
                Orientation::Fixed
            },
        }
    }

    /// Everything except the drive strength.
    pub fn base_params(&self) -> PhysicalParams {
        PhysicalParams {
            detuning: self.detuning,
            kr: self.kr,
            coupling: self.coupling,
            orientation: self.axis,
            ..PhysicalParams::default()
        }
    }

    pub fn sweep(&self) -> Result<&[f64]> {
        self.sweep_s
            .as_deref()
            .ok_or_else(|| Error::Config("alpha sweep needs `sweep_s`".into()))
    }

    pub fn spectrum_rabi(&self) -> Result<f64> {
        self.rabi
            .ok_or_else(|| Error::Config("spectrum run needs `rabi`".into()))
    }

    /// Frequency grid of a spectrum run; it must cover the hyper-Raman lines.
    pub fn frequency_grid(&self) -> Result<Vec<f64>> {
        let rabi = self.spectrum_rabi()?;
        let grid = match self.omega_grid {
            OmegaGrid::Default => default_grid(rabi, self.detuning)?,
            OmegaGrid::Uniform { lo, hi, step } => {
                let w = 2.0 * generalized_rabi(rabi, self.detuning);
                if lo > -w || hi < w {
                    return Err(Error::Coverage {
                        position: if lo > -w { -w } else { w },
                        min: lo,
                        max: hi,
                    });
                }
                let base = uniform_grid(lo, hi, step)?;
                let centers: Vec<f64> = peak_positions(rabi, self.detuning)
                    .iter()
                    .map(|p| p.position)
                    .collect();
                refine_grid(&base, &centers, REFINED_HALFWIDTH, REFINED_STEP.min(step))
            }
        };
        Ok(grid)
    }

    /// Canonical `key = value` lines of the effective configuration.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scheme = {}", self.scheme);
        let _ = writeln!(s, "coupling = {}", self.coupling);
        let _ = writeln!(s, "detuning = {}", self.detuning);
        if let Some(v) = &self.sweep_s {
            let items: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(s, "sweep_s = {}", items.join(", "));
        }
        if let Some(r) = self.rabi {
            let _ = writeln!(s, "rabi = {r}");
        }
        let _ = writeln!(s, "kr = {}", self.kr);
        let _ = writeln!(s, "phase_samples_a = {}", self.grid.a);
        let _ = writeln!(s, "phase_samples_b = {}", self.grid.b);
        let _ = writeln!(s, "phase_samples_p = {}", self.grid.p);
        match self.omega_grid {
            OmegaGrid::Default => {
                let _ = writeln!(s, "omega_grid = default");
            }
            OmegaGrid::Uniform { lo, hi, step } => {
                let _ = writeln!(s, "omega_grid = uniform({lo}, {hi}, {step})");
            }
        }
        let _ = writeln!(s, "route = {}", self.route);
        let _ = writeln!(s, "orientation = {}", if self.isotropic { "isotropic" } else { "fixed" });
        let _ = writeln!(s, "axis = {}, {}, {}", self.axis[0], self.axis[1], self.axis[2]);
        let _ = writeln!(s, "orientation_samples = {}", self.orientation_samples);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "peak_tolerance = {}", self.peak_tolerance);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.detuning, 0.0);
        assert_eq!(c.scheme, SchemeKind::VType);
        assert_eq!(c.kr, 100.0);
    }

    #[test]
    fn logspace_sweep() {
        let c = parse_config("detuning = 0\nsweep_s = logspace(0.01, 1000, 25)").unwrap();
        let s = c.sweep().unwrap();
        assert_eq!(s.len(), 25);
        assert_eq!(s[0], 0.01);
        assert_eq!(s[24], 1000.0);
        assert!((s[12] - 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn small_kr_rejected() {
        let e = parse_config("kr = 5").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("kr ≥ 10 required"), "{msg}");
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn errors_name_line_and_key() {
        let e = parse_config("# header\ndetuning = 1\nfoo = 2").unwrap_err();
        match e {
            Error::Parse { line, key, .. } => {
                assert_eq!(line, 3);
                assert_eq!(key, "foo");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("detuning = x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("detuning"), Err(Error::Parse { .. })));
        assert!(matches!(parse_config("kr = 20\nkr = 30"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("phase_samples_p = 3"), Err(Error::Parse { .. })));
        assert!(matches!(parse_config("sweep_s = 0.5, 0.1"), Err(Error::Parse { .. })));
        assert!(matches!(parse_config("sweep_s = logspace(0.1, 1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn comments_and_lists() {
        let c = parse_config(
            "scheme = full_j0_j1  # four levels\nsweep_s = 0.1, 0.5, 2\norientation = isotropic\naxis = 0, 0, 2\nseed = 9",
        )
        .unwrap();
        assert_eq!(c.scheme, SchemeKind::FullJ0J1);
        assert_eq!(c.sweep_s, Some(vec![0.1, 0.5, 2.0]));
        assert_eq!(c.axis, [0.0, 0.0, 1.0]);
        assert_eq!(c.options().orientation, Orientation::Isotropic { samples: 64, seed: 9 });
    }

    #[test]
    fn echo_round_trips() {
        let c = parse_config(
            "detuning = 20\nrabi = 100\nsweep_s = logspace(0.01, 1000, 7)\nomega_grid = uniform(-300, 300, 0.5)\nroute = direct\nkr = 150",
        )
        .unwrap();
        assert_eq!(parse_config(&c.echo()).unwrap(), c);
    }

    #[test]
    fn grid_must_cover_hyper_raman_lines() {
        let c = parse_config("rabi = 100\nomega_grid = uniform(-150, 150, 0.1)").unwrap();
        assert!(matches!(c.frequency_grid(), Err(Error::Coverage { .. })));
        let c = parse_config("rabi = 100\nomega_grid = uniform(-250, 250, 0.1)").unwrap();
        assert!(c.frequency_grid().is_ok());
    }
}
