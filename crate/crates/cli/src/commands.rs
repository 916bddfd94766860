//! The six pipelines. Each writes its artifacts into the output directory and
//! returns the paths of any reports whose checks failed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use whitham_core::analysis::{self, DecayReport, SymmetryReport};
use whitham_core::evolution::{self, EvolutionReport};
use whitham_core::io::{self, SummaryRow};
use whitham_core::kernels::{self, CompleteMonotoneReport, PositivityReport, KERNEL_TAIL_WINDOW};
use whitham_core::steady::{self, SolitaryWave};
use whitham_core::symbols::strip_halfwidth;
use whitham_core::{par, Error, Grid, Multiplier, SpectralField, WaveSpeed};

use crate::config::{Command, ConfigError, RunConfig};

/// Reflection-error tolerance for the symmetry check.
const SYMMETRY_TOL: f64 = 1e-7;
/// Agreement required when re-ingesting a stored wave.
const ROUND_TRIP_TOL: f64 = 1e-12;
const TRAVELING_TOL: f64 = 1e-4;
const AXIS_SPEED_TOL: f64 = 1e-3;
const MASS_DRIFT_TOL: f64 = 1e-10;
const MOMENT_TOL: f64 = 1e-8;
/// Largest number of x samples per frame in the trajectory CSV.
const TRAJECTORY_POINTS: usize = 2048;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Core(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Core(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Core(Error::Io(e))
    }
}

type Result<T> = std::result::Result<T, RunError>;

#[derive(Debug, Default)]
pub struct Outcome {
    pub summary: String,
    pub failed: Vec<PathBuf>,
}

impl Outcome {
    fn record(&mut self, path: PathBuf, pass: bool, line: String) {
        let _ = writeln!(self.summary, "[{}] {line}", if pass { "pass" } else { "FAIL" });
        if !pass {
            self.failed.push(path);
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&cfg.out)?;
    let grid = Grid::new(cfg.half_length, cfg.n)?;
    let mut out = Outcome::default();
    match cfg.command {
        Command::Kernel => kernel(cfg, grid, &mut out)?,
        Command::Solve => solve(cfg, grid, &mut out)?,
        Command::Verify => verify(cfg, grid, &mut out)?,
        Command::Evolve => evolve(cfg, grid, &mut out)?,
        Command::Sweep => sweep(cfg, grid, &mut out)?,
        Command::Appendix => appendix(cfg, &mut out)?,
    }
    fs::write(cfg.out.join("summary.txt"), &out.summary)?;
    Ok(out)
}

fn speed(c: f64) -> Result<WaveSpeed> {
    Ok(WaveSpeed::new(c)?)
}

fn tag(c: f64) -> String {
    format!("c{c}")
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Serialize)]
struct TailReport {
    window: (f64, f64),
    fitted_rate: f64,
    delta_c: f64,
    pass: bool,
}

#[derive(Serialize)]
struct NearOrigin {
    x: Vec<f64>,
    sqrt_x_h: Vec<f64>,
    max_over_min: f64,
    limiting_coefficient: f64,
}

#[derive(Serialize)]
struct KernelReport {
    c: f64,
    positivity: PositivityReport,
    complete_monotone: CompleteMonotoneReport,
    tail: TailReport,
    near_origin: NearOrigin,
    pass: bool,
}

fn kernel(cfg: &RunConfig, grid: Grid, out: &mut Outcome) -> Result<()> {
    let mut speeds: Vec<f64> = cfg.c.into_iter().collect();
    speeds.extend(cfg.c_list.iter().filter(|c| Some(**c) != cfg.c));
    for c in speeds {
        let cs = speed(c)?;
        let table = kernels::synthesize_kernel(Multiplier::Resolvent { c: cs }, grid)?;
        let name = tag(c);
        fs::write(cfg.out.join(format!("kernel_{name}.csv")), io::kernel_csv(&table))?;

        let positivity = kernels::kernel_positivity_monotonicity(&table);
        let complete_monotone = kernels::check_complete_monotone(cs, 4, &log_space(1e-2, 50.0, 50))?;
        let window = cfg.window.unwrap_or(KERNEL_TAIL_WINDOW);
        let fitted_rate = table.tail_rate(window)?;
        let delta_c = strip_halfwidth(cs);
        let tail = TailReport {
            window,
            fitted_rate,
            delta_c,
            pass: fitted_rate >= 0.9 * delta_c,
        };
        let xs = log_space(1e-3, 1e-2, 21);
        let profile = kernels::near_origin_profile(&table, &xs);
        let (lo, hi) = profile
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let near_origin = NearOrigin {
            x: xs,
            sqrt_x_h: profile,
            max_over_min: hi / lo,
            limiting_coefficient: table.singular_coefficient(),
        };
        let pass = positivity.pass && complete_monotone.pass && tail.pass;
        let report = KernelReport {
            c,
            positivity,
            complete_monotone,
            tail,
            near_origin,
            pass,
        };
        let path = cfg.out.join(format!("kernel_{name}.json"));
        io::write_json(&path, "kernel", &report)?;
        out.record(
            path,
            pass,
            format!(
                "kernel c={c}: positive/decreasing to x={:.3}, CM n<=4 {}, tail rate {:.4} (delta_c {:.4})",
                report.positivity.checked_up_to,
                if report.complete_monotone.pass { "ok" } else { "violated" },
                report.tail.fitted_rate,
                report.tail.delta_c
            ),
        );
    }
    Ok(())
}

/// JSON sidecar written next to a wave CSV.
#[derive(Debug, Serialize, Deserialize)]
pub struct WaveSidecar {
    pub c: f64,
    pub half_length: f64,
    pub n: usize,
    pub tol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stabilizer: f64,
    pub amplitude: f64,
    pub residual_physical: f64,
    pub residual_convolution: f64,
    pub delta_c: f64,
    pub bounds_pass: bool,
    pub pass: bool,
}

fn solve(cfg: &RunConfig, grid: Grid, out: &mut Outcome) -> Result<()> {
    let c = cfg.c.expect("validated");
    let cs = speed(c)?;
    let wave = steady::petviashvili_solve(cs, grid, None, cfg.tol)?;
    let bounds = analysis::profile_bounds(&wave.phi, c);
    let pass = wave.converged && wave.residual_physical <= cfg.tol && bounds.pass;
    let name = tag(c);
    io::write_profile(
        &cfg.out.join(format!("wave_{name}.csv")),
        &wave.phi,
        &[("c", c.to_string())],
    )?;
    let sidecar = WaveSidecar {
        c,
        half_length: grid.half_length(),
        n: grid.len(),
        tol: cfg.tol,
        iterations: wave.iterations,
        converged: wave.converged,
        stabilizer: wave.stabilizer,
        amplitude: wave.amplitude(),
        residual_physical: wave.residual_physical,
        residual_convolution: wave.residual_convolution,
        delta_c: strip_halfwidth(cs),
        bounds_pass: bounds.pass,
        pass,
    };
    let path = cfg.out.join(format!("wave_{name}.json"));
    io::write_json(&path, "wave", &sidecar)?;
    out.record(
        path,
        pass,
        format!(
            "solve c={c}: {} iterations, sup phi {:.6}, residuals {:.2e} / {:.2e}",
            wave.iterations, sidecar.amplitude, wave.residual_physical, wave.residual_convolution
        ),
    );
    Ok(())
}

#[derive(Serialize)]
struct ResidualReport {
    residual_physical: f64,
    residual_convolution: f64,
    stored: Option<(f64, f64)>,
    round_trip_deviation: Option<f64>,
    pass: bool,
}

fn sidecar_path(input: &Path) -> PathBuf {
    input.with_extension("json")
}

fn verify(cfg: &RunConfig, grid: Grid, out: &mut Outcome) -> Result<()> {
    let (wave, stored) = match &cfg.input {
        Some(input) => {
            let profile = io::read_profile(input)?;
            let c = match (cfg.c, profile.meta("c")) {
                (Some(c), _) => c,
                (None, Some(v)) => v.parse::<f64>().map_err(|e| {
                    RunError::Config(ConfigError(format!("{}: header field 'c': {e}", input.display())))
                })?,
                (None, None) => {
                    return Err(RunError::Config(ConfigError(format!(
                        "field 'c': not given and absent from {}",
                        input.display()
                    ))))
                }
            };
            let wave = SolitaryWave::from_profile(profile.field, speed(c)?)?;
            let sidecar = sidecar_path(input);
            let stored = if sidecar.exists() {
                let s: io::Versioned<WaveSidecar> = io::read_json(&sidecar)?;
                Some((s.body.residual_physical, s.body.residual_convolution))
            } else {
                None
            };
            (wave, stored)
        }
        None => {
            let cs = speed(cfg.c.expect("validated"))?;
            (steady::petviashvili_solve(cs, grid, None, cfg.tol)?, None)
        }
    };
    let c = wave.c.get();
    let name = tag(c);

    let symmetry: SymmetryReport = analysis::verify_symmetry(&wave.phi, SYMMETRY_TOL)?;
    let path = cfg.out.join(format!("symmetry_{name}.json"));
    io::write_json(&path, "symmetry", &symmetry)?;
    out.record(
        path,
        symmetry.pass,
        format!(
            "symmetry c={c}: crest {:.3e}, reflection error {:.2e}, {} crest(s), moving plane at {:.3e}",
            symmetry.crest_location, symmetry.reflection_error, symmetry.crest_count, symmetry.moving_plane_sup
        ),
    );

    let decay: DecayReport = analysis::verify_decay(&wave, cfg.window, &analysis::default_norm_battery())?;
    let path = cfg.out.join(format!("decay_{name}.json"));
    io::write_json(&path, "decay", &decay)?;
    out.record(
        path,
        decay.pass,
        format!(
            "decay c={c}: rate {:.5} on [{:.2}, {:.2}] (delta_c {:.5}), {} weighted norms",
            decay.fitted_rate,
            decay.window.0,
            decay.window.1,
            decay.reference_rate,
            decay.weighted_norms.len()
        ),
    );

    if !cfg.all {
        return Ok(());
    }
    let bounds = analysis::profile_bounds(&wave.phi, c);
    let path = cfg.out.join(format!("bounds_{name}.json"));
    io::write_json(&path, "bounds", &bounds)?;
    out.record(
        path,
        bounds.pass,
        format!("bounds c={c}: {:.3e} <= phi <= {:.6} < c", bounds.min, bounds.max),
    );

    let remark = analysis::crest_remark_check(&wave);
    let path = cfg.out.join(format!("crest_{name}.json"));
    io::write_json(&path, "crest_remark", &remark)?;
    out.record(
        path,
        remark.pass,
        format!(
            "crest c={c}: max off crest {:.6} vs c/2 = {:.6}",
            remark.max_off_crest, remark.half_speed
        ),
    );

    let table = kernels::synthesize_kernel(Multiplier::Resolvent { c: wave.c }, wave.grid)?;
    let lambda = symmetry.crest_location;
    let mirror = SpectralField::from_values(wave.grid, wave.phi.reflection_values(lambda))?;
    let touching = analysis::touching_check(&wave.phi, &mirror, lambda, &table)?;
    let path = cfg.out.join(format!("touching_{name}.json"));
    io::write_json(&path, "touching", &touching)?;
    let touching_pass = touching.verdict != analysis::Touching::Inconclusive;
    out.record(
        path,
        touching_pass,
        format!("touching c={c}: {:?} at lambda {:.3e}", touching.verdict, lambda),
    );

    let (rp, rc) = steady::residual(&wave, Some(&table))?;
    let round_trip_deviation = stored.map(|(sp, sc)| (rp - sp).abs().max((rc - sc).abs()));
    let residuals = ResidualReport {
        residual_physical: rp,
        residual_convolution: rc,
        stored,
        round_trip_deviation,
        pass: round_trip_deviation.is_none_or(|d| d <= ROUND_TRIP_TOL),
    };
    let path = cfg.out.join(format!("residuals_{name}.json"));
    io::write_json(&path, "residuals", &residuals)?;
    out.record(
        path,
        residuals.pass,
        format!(
            "residuals c={c}: {rp:.2e} / {rc:.2e}{}",
            round_trip_deviation
                .map(|d| format!(", round trip {d:.1e}"))
                .unwrap_or_default()
        ),
    );
    Ok(())
}

fn evolve(cfg: &RunConfig, grid: Grid, out: &mut Outcome) -> Result<()> {
    let c = cfg.c.expect("validated");
    if c * cfg.t_end > 0.25 * cfg.half_length {
        return Err(RunError::Config(ConfigError(format!(
            "field 'T': travel distance c*T = {} exceeds L/4 = {}",
            c * cfg.t_end,
            0.25 * cfg.half_length
        ))));
    }
    let wave = steady::petviashvili_solve(speed(c)?, grid, None, cfg.tol)?;
    let dt = cfg.dt.unwrap_or_else(|| evolution::time_step_bound(&wave.phi));
    let (state, frames) = evolution::evolve(&wave.phi, cfg.t_end, dt)?;
    let exact = wave.phi.shifted(c * cfg.t_end)?;
    let (axis, axis_error) = match evolution::symmetry_axis_track(&frames) {
        Ok(a) => (Some(a), None),
        Err(e @ Error::AmbiguousCrest { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let report = EvolutionReport {
        c,
        t_end: cfg.t_end,
        dt,
        traveling_error: state.u.max_abs_diff(&exact) / wave.phi.sup(),
        axis,
        axis_error,
        mass_drift: state.mass_drift(),
        momentum_drift: state.momentum_drift(),
    };
    let name = tag(c);
    fs::write(
        cfg.out.join(format!("trajectory_{name}.csv")),
        io::trajectory_csv_strided(&frames, (grid.len() / TRAJECTORY_POINTS).max(1)),
    )?;
    let manifest = io::RunManifest::new(&state, &frames, dt);
    io::write_json(&cfg.out.join(format!("manifest_{name}.json")), "manifest", &manifest)?;

    let speed_fit = report.axis.as_ref().and_then(|a| a.axis_speed_fit);
    let pass = report.traveling_error <= TRAVELING_TOL
        && report.mass_drift <= MASS_DRIFT_TOL
        && speed_fit.map_or(cfg.t_end == 0.0, |s| (s - c).abs() <= AXIS_SPEED_TOL);
    let path = cfg.out.join(format!("evolution_{name}.json"));
    io::write_json(&path, "evolution", &report)?;
    out.record(
        path,
        pass,
        format!(
            "evolve c={c} to T={}: traveling error {:.2e}, axis speed {}, mass drift {:.1e}",
            cfg.t_end,
            report.traveling_error,
            speed_fit.map_or("n/a".to_string(), |s| format!("{s:.8}")),
            report.mass_drift
        ),
    );
    Ok(())
}

fn sweep(cfg: &RunConfig, grid: Grid, out: &mut Outcome) -> Result<()> {
    let tol = cfg.tol;
    let results = par::map(&cfg.c_list, |&c| -> whitham_core::Result<(SummaryRow, bool)> {
        let cs = WaveSpeed::new(c)?;
        let wave = steady::petviashvili_solve(cs, grid, None, tol)?;
        let sym = analysis::verify_symmetry(&wave.phi, SYMMETRY_TOL)?;
        let row = SummaryRow {
            c,
            sup_phi: wave.amplitude(),
            nu: wave.decay_rate(None).unwrap_or(f64::NAN),
            delta_c: strip_halfwidth(cs),
            reflection_error: sym.reflection_error,
            crest_count: sym.crest_count,
        };
        let pass = wave.converged && sym.pass && analysis::profile_bounds(&wave.phi, c).pass;
        Ok((row, pass))
    });
    let mut rows = Vec::new();
    let mut all_pass = true;
    for r in results {
        let (row, pass) = r?;
        let _ = writeln!(
            out.summary,
            "  c={}: sup phi {:.6}, decay {:.5} (delta_c {:.5}){}",
            row.c,
            row.sup_phi,
            row.nu,
            row.delta_c,
            if pass { "" } else { "  <- failed" }
        );
        all_pass &= pass;
        rows.push(row);
    }
    let path = cfg.out.join("summary.csv");
    fs::write(&path, io::summary_csv(&rows))?;
    out.record(path, all_pass, format!("sweep over {} speeds", rows.len()));
    Ok(())
}

#[derive(Serialize)]
struct FactorialResult {
    n_max: u32,
    q_max: u32,
    failures: Vec<(u32, u32)>,
}

#[derive(Serialize)]
struct MomentCase {
    pair: usize,
    order: u32,
    relative_deviation: f64,
}

#[derive(Serialize)]
struct AppendixReport {
    seed: u64,
    factorial: FactorialResult,
    moment_cases: Vec<MomentCase>,
    max_moment_deviation: f64,
    weights: Vec<analysis::WeightReport>,
    pass: bool,
}

/// Smooth bump supported in `[center - width, center + width]`.
fn bump(grid: Grid, center: f64, width: f64, amplitude: f64, tilt: f64) -> whitham_core::Result<SpectralField> {
    SpectralField::from_fn(grid, |x| {
        let s = (x - center) / width;
        if s.abs() < 1.0 {
            amplitude * (1.0 + tilt * s) * (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    })
}

fn random_bump(grid: Grid, rng: &mut ChaCha8Rng) -> whitham_core::Result<SpectralField> {
    bump(
        grid,
        rng.gen_range(-4.0..4.0),
        rng.gen_range(0.5..3.0),
        rng.gen_range(0.5..2.0),
        rng.gen_range(-0.9..0.9),
    )
}

fn appendix(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let (n_max, q_max) = (20, 5);
    let mut failures = Vec::new();
    for n in 0..=n_max {
        for q in 1..=q_max {
            if !analysis::factorial_inequality_holds(n, q)? {
                failures.push((n, q));
            }
        }
    }

    let grid = Grid::new(20.0, 1 << 10)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut moment_cases = Vec::new();
    for pair in 0..20 {
        let f = random_bump(grid, &mut rng)?;
        let g = random_bump(grid, &mut rng)?;
        for order in 0..=6 {
            let d = analysis::convolution_moment_identity(&f, &g, order)?;
            moment_cases.push(MomentCase {
                pair,
                order,
                relative_deviation: d.relative(),
            });
        }
    }
    let max_moment_deviation = moment_cases
        .iter()
        .fold(0.0f64, |m, c| m.max(c.relative_deviation));

    let xs: Vec<f64> = log_space(1.0, 1e3, 13).into_iter().flat_map(|x| [-x, x]).collect();
    let eps_set = [1e-3, 1e-2, 0.1, 0.5, 0.9];
    let weights = [(0.5, 2.0), (1.0, 3.0), (2.0, 4.0)]
        .iter()
        .map(|&(l, m)| analysis::weight_inequality_constant(l, m, &xs, &eps_set))
        .collect::<whitham_core::Result<Vec<_>>>()?;

    let pass = failures.is_empty()
        && max_moment_deviation <= MOMENT_TOL
        && weights.iter().all(|w| w.b_measured.is_finite());
    let report = AppendixReport {
        seed: cfg.seed,
        factorial: FactorialResult { n_max, q_max, failures },
        moment_cases,
        max_moment_deviation,
        weights,
        pass,
    };
    let path = cfg.out.join("appendix.json");
    io::write_json(&path, "appendix", &report)?;
    let bs: Vec<String> = report
        .weights
        .iter()
        .map(|w| format!("B({},{})={:.4}", w.l, w.m, w.b_measured))
        .collect();
    out.record(
        path,
        pass,
        format!(
            "appendix: factorial failures {}, moment deviation {:.1e}, {}",
            report.factorial.failures.len(),
            max_moment_deviation,
            bs.join(", ")
        ),
    );
    Ok(())
}
