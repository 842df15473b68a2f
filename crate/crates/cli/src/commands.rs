use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use soliton_squeeze::linop::{
    alpha0, build_operators, eigensystem, goldstone_vector, momentum_vector, Alpha0Field, EigenSystem,
    LinearOperatorMatrix, ModeTag,
};
use soliton_squeeze::lof::{optimal_gh_width, render_lof, LofKind, LofSpec, ModeSelector};
use soliton_squeeze::model::{frequency_axis, norm, FluctuationField};
use soliton_squeeze::oracle::{
    fit_drift, homodyne_oracle, max_local_rate, OracleSampling, SdeConfig, MAX_STEP_PRODUCT,
};
use soliton_squeeze::soliton::{soliton_profile, SolitonProfile};
use soliton_squeeze::spectra::{
    drift_diffusion, fmt17, intensity_spectrum, modal_diffusion, optimize_lof_phase,
    squeezing_spectrum_with, DetectorWindow, ModalDiffusionMatrix, SpectrumOptions,
};

use crate::config::{Auto, ConfigError, LofChoice, RunConfig};

/// Largest |z| for which the oracle agrees.
pub const Z_LIMIT: f64 = 4.0;

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Core(soliton_squeeze::Error),
    Io(String),
    Disagreement(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        use soliton_squeeze::Error as E;
        match self {
            Failure::Config(_) => 2,
            Failure::Core(
                E::InvalidArgument(_)
                | E::ExistenceViolation(_)
                | E::NonStationary { .. }
                | E::NoCrossing { .. }
                | E::InsufficientData(_),
            ) => 2,
            Failure::Core(_) => 3,
            Failure::Io(_) | Failure::Disagreement(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Disagreement(e) => write!(f, "oracle disagreement: {e}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<soliton_squeeze::Error> for Failure {
    fn from(e: soliton_squeeze::Error) -> Self {
        Failure::Core(e)
    }
}

type Result<T> = std::result::Result<T, Failure>;

struct System {
    profile: SolitonProfile,
    l: LinearOperatorMatrix,
    ldag: LinearOperatorMatrix,
    eig: EigenSystem,
    a0: Alpha0Field,
    d: ModalDiffusionMatrix,
}

impl System {
    fn build(cfg: &RunConfig) -> Result<Self> {
        let profile = soliton_profile(&cfg.params, &cfg.grid, cfg.branch)?;
        let (l, ldag) = build_operators(&profile)?;
        let eig = eigensystem(&l, &ldag)?;
        let a0 = alpha0(&profile);
        let d = modal_diffusion(&eig, &a0)?;
        Ok(Self { profile, l, ldag, eig, a0, d })
    }

    fn matches(&self, cfg: &RunConfig) -> bool {
        self.profile.params == cfg.params && self.profile.branch == cfg.branch && self.profile.grid == cfg.grid
    }
}

fn write(out: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    let path = out.join(name);
    fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn header(cfg: &RunConfig, command: &str) -> String {
    format!("# soliton-squeeze {command} {}\n{}", env!("CARGO_PKG_VERSION"), cfg.header())
}

fn residual(op: &LinearOperatorMatrix, f: &FluctuationField, lambda: f64, sys: &System) -> Result<f64> {
    let lf = op.apply(f)?;
    let r = lf.add(&f.scale(Complex64::new(-lambda, 0.0)));
    Ok(norm(&r, &sys.profile.grid)? / norm(f, &sys.profile.grid)?)
}

pub fn eigs(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let sys = System::build(cfg)?;
    let eig = &sys.eig;
    let mut head = header(cfg, "eigs");
    let _ = writeln!(head, "# beta = {}\n# phi = {}", fmt17(sys.profile.beta), fmt17(sys.profile.phi));
    let _ = writeln!(head, "# gram_deviation = {:.3e}", eig.gram_deviation());

    let mut table = head.clone();
    table.push_str("index,re,im,tag,parity,localization\n");
    for (i, l) in eig.eigenvalues().iter().enumerate() {
        let parity = eig.parity(i).map(|p| format!("{p:?}").to_lowercase()).unwrap_or_else(|| "none".into());
        let _ = writeln!(
            table,
            "{i},{},{},{},{parity},{}",
            fmt17(l.re),
            fmt17(l.im),
            eig.tags()[i].as_str(),
            fmt17(eig.localization(i))
        );
    }
    let mut modes = head;
    modes.push_str("tag,index,re,im,partner,partner_re,partner_im\n");
    for (i, t) in eig.tags().iter().enumerate() {
        if *t == ModeTag::Generic {
            continue;
        }
        let l = eig.eigenvalues()[i];
        let (p, pl) = match eig.partner(i) {
            Some(p) => (p.to_string(), eig.eigenvalues()[p]),
            None => ("none".into(), Complex64::new(f64::NAN, f64::NAN)),
        };
        let _ = writeln!(
            modes,
            "{},{i},{},{},{p},{},{}",
            t.as_str(),
            fmt17(l.re),
            fmt17(l.im),
            fmt17(pl.re),
            fmt17(pl.im)
        );
    }

    let g = residual(&sys.l, &goldstone_vector(&sys.profile), 0.0, &sys)?;
    let m = residual(&sys.ldag, &momentum_vector(&sys.profile), -2.0, &sys)?;
    println!("goldstone residual |L v1|/|v1| = {g:.3e}");
    println!("momentum residual |(L^dag + 2) w2|/|w2| = {m:.3e}");
    println!("biorthonormality max|<w_i|v_j> - delta_ij| = {:.3e}", eig.gram_deviation());
    Ok(vec![write(out, "eigenvalues.csv", &table)?, write(out, "modes.csv", &modes)?])
}

fn window(cfg: &RunConfig, sys: &System) -> Result<Option<DetectorWindow>> {
    Ok(match cfg.detector_sigma {
        Some(s) => Some(DetectorWindow::from_normalized(cfg.detector_x0, s, sys.profile.beta)?),
        None => None,
    })
}

/// LOF for kinds that do not optimize per frequency.
fn lof_field(cfg: &RunConfig, sys: &System) -> Result<(String, FluctuationField)> {
    let kind = match cfg.lof {
        LofChoice::PlaneWave => match cfg.theta {
            Auto::Fixed(theta) => LofKind::PlaneWave { theta },
            Auto::Auto => {
                let (theta, _) = optimize_lof_phase(&sys.eig, &sys.d, window(cfg, sys)?.as_ref(), 0.0)?;
                LofKind::PlaneWave { theta }
            }
        },
        LofChoice::Gh1 => {
            let xi = match cfg.xi {
                Auto::Fixed(x) => x,
                Auto::Auto => optimal_gh_width(&sys.profile, &sys.eig, &sys.d, 0.0)?.0,
            };
            LofKind::GaussHermite { xi, x_shift: cfg.shift, phi: None }
        }
        LofChoice::Momentum => {
            LofKind::ModeDerived { selector: ModeSelector::Tag(ModeTag::Momentum), coefficients: vec![] }
        }
        LofChoice::W3 => LofKind::ClosedFormW3 { beta: cfg.params.delta1.sqrt(), phi: sys.profile.phi },
        LofChoice::HopfSum => LofKind::ModeDerived {
            selector: ModeSelector::PartnerOf(ModeTag::HopfPair),
            coefficients: vec![],
        },
        LofChoice::Soliton => LofKind::SolitonProfile,
    };
    let spec = LofSpec::new(kind);
    Ok((spec.label(), render_lof(&spec, &sys.profile, Some(&sys.eig))?))
}

/// (Ω, S, θ) rows of one configuration; θ only for per-frequency phases.
fn spectrum_rows(cfg: &RunConfig, sys: &System) -> Result<(String, Vec<(f64, f64, Option<f64>)>)> {
    let omega = match cfg.omega_points {
        1 => vec![0.0],
        n => frequency_axis(cfg.omega_max, n)?,
    };
    let win = window(cfg, sys)?;
    if cfg.lof == LofChoice::PlaneWave && cfg.theta == Auto::Auto {
        let rows = omega
            .iter()
            .map(|&w| optimize_lof_phase(&sys.eig, &sys.d, win.as_ref(), w).map(|(t, s)| (w, s, Some(t))))
            .collect::<soliton_squeeze::Result<_>>()?;
        return Ok(("plane-wave(theta=optimal)".into(), rows));
    }
    let result = if cfg.lof == LofChoice::Soliton {
        intensity_spectrum(&sys.eig, &sys.d, &sys.profile, win.as_ref(), &omega)?
    } else {
        let (label, lof) = lof_field(cfg, sys)?;
        let opts = SpectrumOptions { relaxed: cfg.lof == LofChoice::HopfSum, label };
        squeezing_spectrum_with(&sys.eig, &sys.d, &lof, win.as_ref(), &omega, &opts)?
    };
    let rows = result.omega.iter().zip(&result.values).map(|(&w, &s)| (w, s, None)).collect();
    Ok((result.lof, rows))
}

fn sweep_part(points: &[(Option<f64>, RunConfig)]) -> Result<(String, String)> {
    let mut sys: Option<System> = None;
    let mut body = String::new();
    let mut label = String::new();
    for (value, c) in points {
        if !sys.as_ref().is_some_and(|s| s.matches(c)) {
            sys = Some(System::build(c)?);
        }
        let s = sys.as_ref().expect("built above");
        let (l, rows) = spectrum_rows(c, s)?;
        label = l;
        for (w, v, theta) in rows {
            if let Some(x) = value {
                let _ = write!(body, "{},", fmt17(*x));
            }
            let _ = write!(body, "{},{}", fmt17(w), fmt17(v));
            if let Some(t) = theta {
                let _ = write!(body, ",{}", fmt17(t));
            }
            body.push('\n');
        }
    }
    Ok((label, body))
}

pub fn squeeze(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let points: Vec<(Option<f64>, RunConfig)> = match &cfg.sweep {
        None => vec![(None, cfg.clone())],
        Some(s) => s
            .values
            .iter()
            .map(|&v| Ok((Some(v), cfg.with(&s.key, v)?)))
            .collect::<Result<_>>()?,
    };
    // contiguous chunks per worker; each rebuilds the system only when the physics changes
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).clamp(1, points.len());
    let chunk = points.len().div_ceil(workers);
    let parts: Vec<Result<(String, String)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = points.chunks(chunk).map(|part| scope.spawn(move || sweep_part(part))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut body = String::new();
    let mut label = String::new();
    for part in parts {
        let (l, text) = part?;
        label = l;
        body.push_str(&text);
    }
    let mut text = header(cfg, "squeeze");
    let _ = writeln!(text, "# lof = {label}");
    if let Some(s) = &cfg.sweep {
        let _ = write!(text, "{},", s.key);
    }
    text.push_str("omega,S");
    if cfg.lof == LofChoice::PlaneWave && cfg.theta == Auto::Auto {
        text.push_str(",theta");
    }
    text.push('\n');
    text.push_str(&body);
    Ok(vec![write(out, "squeeze.csv", &text)?])
}

pub fn oracle(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    if cfg.lof == LofChoice::HopfSum {
        return Err(ConfigError("the oracle needs a LOF with lower = conj(upper); hopf-sum is not".into()).into());
    }
    if cfg.detector_sigma.is_some() {
        return Err(ConfigError("the oracle compares full-domain spectra; set detector.sigma = full".into()).into());
    }
    if cfg.sweep.is_some() {
        return Err(ConfigError("the oracle does not sweep; set sweep.key = none".into()).into());
    }
    let sys = System::build(cfg)?;
    let rate = max_local_rate(&sys.profile);
    let dt = match cfg.dt {
        Auto::Fixed(dt) => dt,
        Auto::Auto => 0.9 * MAX_STEP_PRODUCT / rate,
    };
    let sde = SdeConfig::new(dt, cfg.t_total, cfg.n_traj, cfg.seed)?;
    let lof = if cfg.lof == LofChoice::Soliton {
        ("soliton-profile".to_string(), FluctuationField::conjugate_pair(sys.profile.psi_bar.clone()))
    } else {
        lof_field(cfg, &sys)?
    };
    let sampling = OracleSampling { omega_max: cfg.omega_max, ..OracleSampling::default() };
    let run = homodyne_oracle(&sys.profile, &sys.l, &sys.eig, &sys.d, &sde, std::slice::from_ref(&lof), &sampling)?;
    let cmp = &run.comparisons[0];
    let drift = drift_diffusion(&sys.eig, &sys.a0, &cfg.params)?;
    let shortest = run.positions.iter().map(|p| p.len()).min().unwrap_or(0);
    let fit = fit_drift(&run.positions, run.summary.dt_position, 100.min(shortest.saturating_sub(1)));

    let mut text = header(cfg, "oracle");
    let _ = writeln!(text, "# lof = {}", cmp.label);
    let _ = writeln!(text, "# dt = {}", fmt17(dt));
    let _ = writeln!(text, "# lambda_max = {}", fmt17(rate));
    let _ = writeln!(text, "# dt_record = {}", fmt17(run.summary.dt_record));
    let _ = writeln!(text, "# segments = {}", cmp.estimate.segments);
    let _ = writeln!(text, "# max_abs_z = {}", fmt17(cmp.max_abs_z()));
    let _ = writeln!(text, "# drift_D = {}", fmt17(drift.coefficient));
    match &fit {
        Ok(f) => {
            let _ = writeln!(text, "# drift_slope = {}\n# drift_r2 = {}", fmt17(f.slope), fmt17(f.r_squared));
        }
        Err(e) => {
            let _ = writeln!(text, "# drift_fit = unavailable ({e})");
        }
    }
    text.push_str("omega,S_analytic,S_expected,S_estimate,std_err,z\n");
    for k in 0..cmp.z.len() {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            fmt17(cmp.estimate.omega[k]),
            fmt17(cmp.analytic[k]),
            fmt17(cmp.expected[k]),
            fmt17(cmp.estimate.values[k].re),
            fmt17(cmp.estimate.std_err[k]),
            fmt17(cmp.z[k])
        );
    }
    let path = write(out, "oracle.csv", &text)?;
    println!(
        "{}: {} bins, max |z| = {:.3} (limit {Z_LIMIT}), dt = {dt:.4e}",
        cmp.label,
        cmp.z.len(),
        cmp.max_abs_z()
    );
    if !(cmp.max_abs_z() < Z_LIMIT) {
        return Err(Failure::Disagreement(format!(
            "max |z| = {:.3} reached {Z_LIMIT}; see {}",
            cmp.max_abs_z(),
            path.display()
        )));
    }
    Ok(vec![path])
}
