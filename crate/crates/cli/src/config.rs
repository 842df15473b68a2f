//! `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use soliton_squeeze::model::{make_grid, Grid1D, ModelParams, Sigma};
use soliton_squeeze::soliton::{beta_squared, Branch};

/// Every accepted key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("mu", "1.2", "pump parameter, 1 <= mu <= sqrt(1 + delta1^2)"),
    ("delta1", "1.2", "signal detuning, > 0"),
    ("sigma", "1", "sign of the nonlinearity, +1 or -1"),
    ("kappa", "1", "soliton position scale, > 0"),
    ("branch", "plus", "soliton branch: plus or minus"),
    ("grid.n", "512", "grid points, a power of two"),
    ("grid.length", "40", "periodic domain length"),
    ("omega.max", "10", "largest analysis frequency"),
    ("omega.points", "401", "number of frequencies in [0, omega.max]"),
    ("seed", "1", "random seed for the oracle"),
    ("lof.kind", "momentum", "plane-wave | gh1 | momentum | w3 | hopf-sum | soliton"),
    ("lof.theta", "optimal", "plane-wave phase, or 'optimal' to minimize S per frequency"),
    ("lof.xi", "optimal", "gh1 width, or 'optimal' to minimize S(0)"),
    ("lof.shift", "0", "gh1 center"),
    ("detector.sigma", "full", "detector size in soliton widths (width = sigma/beta), or 'full'"),
    ("detector.x0", "0", "detector center"),
    ("sweep.key", "none", "key to sweep: mu | delta1 | detector.sigma | detector.x0 | lof.theta | lof.xi | lof.shift"),
    ("sweep.from", "0", "first sweep value"),
    ("sweep.to", "1", "last sweep value"),
    ("sweep.points", "11", "number of sweep values"),
    ("oracle.dt", "auto", "time step, or 'auto' for 0.9 of the stability limit"),
    ("oracle.t_total", "1000", "recorded time per trajectory"),
    ("oracle.n_traj", "20", "number of trajectories"),
];

const SWEEPABLE: &[&str] = &["mu", "delta1", "detector.sigma", "detector.x0", "lof.theta", "lof.xi", "lof.shift"];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LofChoice {
    PlaneWave,
    Gh1,
    Momentum,
    W3,
    HopfSum,
    Soliton,
}

impl LofChoice {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "plane-wave" => Self::PlaneWave,
            "gh1" => Self::Gh1,
            "momentum" => Self::Momentum,
            "w3" => Self::W3,
            "hopf-sum" => Self::HopfSum,
            "soliton" => Self::Soliton,
            _ => return err(format!("unknown lof.kind '{s}'")),
        })
    }
}

/// A value that is either given or chosen by the program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Auto {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    raw: BTreeMap<String, String>,
    pub params: ModelParams,
    pub branch: Branch,
    pub grid: Grid1D,
    pub omega_max: f64,
    pub omega_points: usize,
    pub seed: u64,
    pub lof: LofChoice,
    pub theta: Auto,
    pub xi: Auto,
    pub shift: f64,
    /// `None` for the whole domain.
    pub detector_sigma: Option<f64>,
    pub detector_x0: f64,
    pub sweep: Option<Sweep>,
    pub dt: Auto,
    pub t_total: f64,
    pub n_traj: usize,
}

fn defaults() -> BTreeMap<String, String> {
    KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect()
}

/// Splits `key = value`; `#` starts a comment.
fn split_line(line: &str) -> Result<Option<(String, String)>> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    match line.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => {
            Ok(Some((k.trim().to_string(), v.trim().to_string())))
        }
        _ => err(format!("expected 'key = value', got '{line}'")),
    }
}

fn set(raw: &mut BTreeMap<String, String>, key: String, value: String) -> Result<()> {
    match raw.get_mut(&key) {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => err(format!("unknown key '{key}' (see --help for the list)")),
    }
}

fn number(raw: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let v = &raw[key];
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(format!("{key} = '{v}' is not a finite number")),
    }
}

fn integer<T: std::str::FromStr>(raw: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let v = &raw[key];
    v.parse().or_else(|_| err(format!("{key} = '{v}' is not a non-negative integer")))
}

fn auto_or_number(raw: &BTreeMap<String, String>, key: &str, word: &str) -> Result<Auto> {
    if raw[key] == word {
        Ok(Auto::Auto)
    } else {
        number(raw, key).map(Auto::Fixed)
    }
}

impl RunConfig {
    /// Parses defaults, then the file contents, then `--set` overrides.
    pub fn load(file: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut raw = defaults();
        if let Some(text) = file {
            for (n, line) in text.lines().enumerate() {
                if let Some((k, v)) = split_line(line).map_err(|e| ConfigError(format!("line {}: {e}", n + 1)))? {
                    set(&mut raw, k, v)?;
                }
            }
        }
        for o in overrides {
            let (k, v) = split_line(o)?.ok_or_else(|| ConfigError(format!("empty override '{o}'")))?;
            set(&mut raw, k, v)?;
        }
        Self::from_raw(raw)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::load(Some(&text), overrides)
    }

    fn from_raw(raw: BTreeMap<String, String>) -> Result<Self> {
        let sigma = match raw["sigma"].as_str() {
            "1" | "+1" => Sigma::Plus,
            "-1" => Sigma::Minus,
            s => return err(format!("sigma = '{s}' must be +1 or -1")),
        };
        let params = ModelParams::new(number(&raw, "mu")?, number(&raw, "delta1")?, sigma, number(&raw, "kappa")?)
            .or_else(|e| err(e.to_string()))?;
        let branch = match raw["branch"].as_str() {
            "plus" => Branch::Plus,
            "minus" => Branch::Minus,
            b => return err(format!("branch = '{b}' must be plus or minus")),
        };
        beta_squared(&params, branch).or_else(|e| err(e.to_string()))?;
        let grid = make_grid(integer(&raw, "grid.n")?, number(&raw, "grid.length")?).or_else(|e| err(e.to_string()))?;

        let omega_max = number(&raw, "omega.max")?;
        let omega_points: usize = integer(&raw, "omega.points")?;
        if !(omega_max >= 0.0) || omega_points == 0 || (omega_points == 1) != (omega_max == 0.0) {
            return err("omega.max must be >= 0 with omega.points >= 2 (or 1 point at omega.max = 0)");
        }

        let lof = LofChoice::parse(&raw["lof.kind"])?;
        let xi = auto_or_number(&raw, "lof.xi", "optimal")?;
        if let Auto::Fixed(x) = xi {
            if !(x > 0.0) {
                return err(format!("lof.xi must be positive, got {x}"));
            }
        }
        let detector_sigma = match raw["detector.sigma"].as_str() {
            "full" => None,
            _ => match number(&raw, "detector.sigma")? {
                s if s > 0.0 => Some(s),
                s => return err(format!("detector.sigma must be positive, got {s}")),
            },
        };
        if detector_sigma.is_some() && lof == LofChoice::HopfSum {
            return err("hopf-sum LOF does not support a finite detector");
        }

        let sweep = match raw["sweep.key"].as_str() {
            "none" => None,
            k if SWEEPABLE.contains(&k) => {
                let (a, b) = (number(&raw, "sweep.from")?, number(&raw, "sweep.to")?);
                let n: usize = integer(&raw, "sweep.points")?;
                if n == 0 {
                    return err("sweep.points must be at least 1");
                }
                let values = (0..n)
                    .map(|i| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 })
                    .collect();
                Some(Sweep { key: k.to_string(), values })
            }
            k => return err(format!("sweep.key = '{k}' is not sweepable; use one of {}", SWEEPABLE.join(", "))),
        };

        let dt = auto_or_number(&raw, "oracle.dt", "auto")?;
        if let Auto::Fixed(x) = dt {
            if !(x > 0.0) {
                return err(format!("oracle.dt must be positive, got {x}"));
            }
        }
        let t_total = number(&raw, "oracle.t_total")?;
        if !(t_total > 0.0) {
            return err(format!("oracle.t_total must be positive, got {t_total}"));
        }
        let n_traj: usize = integer(&raw, "oracle.n_traj")?;
        if n_traj == 0 {
            return err("oracle.n_traj must be at least 1");
        }

        Ok(Self {
            params,
            branch,
            grid,
            omega_max,
            omega_points,
            seed: integer(&raw, "seed")?,
            lof,
            theta: auto_or_number(&raw, "lof.theta", "optimal")?,
            xi,
            shift: number(&raw, "lof.shift")?,
            detector_sigma,
            detector_x0: number(&raw, "detector.x0")?,
            sweep,
            dt,
            t_total,
            n_traj,
            raw,
        })
    }

    /// The same configuration with one key replaced, re-validated.
    pub fn with(&self, key: &str, value: f64) -> Result<Self> {
        let mut raw = self.raw.clone();
        set(&mut raw, key.to_string(), format!("{value:?}"))?;
        raw.insert("sweep.key".into(), "none".into());
        Self::from_raw(raw)
    }

    /// Effective configuration as `# key = value` lines.
    pub fn header(&self) -> String {
        self.raw.iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
    }
}

/// Key table for `--help`.
pub fn key_help() -> String {
    let width = KEYS.iter().map(|(k, _, _)| k.len()).max().unwrap_or(0);
    let mut out = String::from("Configuration keys (`key = value` in the file, or --set key=value):\n");
    for (k, v, d) in KEYS {
        out.push_str(&format!("  {k:<width$}  {d} [default: {v}]\n"));
    }
    out
}
