use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use kgwave::energy::{select_c, EnergyFunctional};
use kgwave::model::{regime, spectral_condition};
use kgwave::polar::loglog_fit;
use kgwave::solver::{Monitor, Simulation};
use kgwave::spectral::{ddelta0_closed_form, scan, ClosedForm, Scan, Verdict};
use serde_json::json;

use crate::config::{RunConfig, Setup};
use crate::error::{CliError, Result};
use crate::output::{diagnostics_row, read_columns, read_snapshot, spectrum_row, write_snapshot, CsvOut};
use crate::output::{DIAGNOSTICS_HEADER, SPECTRUM_HEADER};

/// A loaded configuration with command-line overrides applied.
pub struct Context {
    pub cfg: RunConfig,
    pub setup: Setup,
    pub force: bool,
    pub threads: usize,
}

impl Context {
    fn out_dir(&self) -> &Path {
        &self.cfg.output.dir
    }

    fn run_scan(&self) -> Result<Scan> {
        let p = &self.setup.problem;
        Ok(scan(&p.pw, &p.f, self.cfg.scan.c, self.setup.ell_max, self.cfg.scan.n_samples)?)
    }

    /// Energy speed: the configured value, else the regime choice, else 0.
    fn energy_speed(&self) -> (f64, &'static str) {
        if let Some(c) = self.cfg.energy.c {
            return (c, "config");
        }
        let p = &self.setup.problem;
        match select_c(&p.pw, &p.f, self.cfg.energy.delta2) {
            Ok(sel) => (sel.c, "regime"),
            Err(e) => {
                eprintln!("warning: {e}; using the rest frame c = 0 for the energy");
                (0.0, "fallback")
            }
        }
    }
}

/// Exit status for a finished scan: 0 when the scan and closed form agree,
/// 2 when either side is inconclusive, and a disagreement error otherwise.
fn verdict_status(s: &Scan) -> Result<u8> {
    let v = &s.verdict;
    if v.closed_form_agrees {
        Ok(0)
    } else if v.verdict == Verdict::Marginal || v.closed_form == ClosedForm::Unclassified {
        Ok(2)
    } else {
        Err(CliError::Disagreement(format!(
            "scan reports {} but the closed form says {}",
            v.verdict.name(),
            v.closed_form.name()
        )))
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.to_path_buf(), source })
}

pub fn classify(ctx: &Context) -> Result<u8> {
    let p = &ctx.setup.problem;
    let (pw, f) = (&p.pw, &p.f);
    let residual = (pw.omega * pw.omega - pw.k * pw.k - f.eval(pw.a_sq())).abs();
    let sc = spectral_condition(pw, f);
    let s = ctx.run_scan()?;
    let v = &s.verdict;

    println!("wave: a = {}, k = {}, omega = {}", pw.a, pw.k, pw.omega);
    println!("dispersion residual: {residual:e}");
    println!("regime: {}", regime(pw, f).name());
    println!("spectral condition: {} (margin {})", if sc.satisfied { "satisfied" } else { "violated" }, sc.margin);
    println!("closed form: {}", v.closed_form.name());
    match v.witness_ell {
        Some(ell) => println!("scan: {} (max Re lambda = {:e} at ell = {ell})", v.verdict.name(), v.max_re),
        None => println!("scan: {} (max Re lambda = {:e})", v.verdict.name(), v.max_re),
    }
    if let Some(edge) = v.band_edge {
        println!("unstable band: |ell| <= {edge}");
    }
    println!("discriminant second derivative at 0: {:e}", ddelta0_closed_form(pw, f));
    println!("agreement: {}", v.closed_form_agrees);
    verdict_status(&s)
}

pub fn spectrum(ctx: &Context) -> Result<u8> {
    let s = ctx.run_scan()?;
    create_dir(ctx.out_dir())?;
    let path = ctx.out_dir().join("spectrum.csv");
    let mut out = CsvOut::create(&path, &SPECTRUM_HEADER)?;
    for sample in &s.samples {
        out.row(&spectrum_row(sample))?;
    }
    out.flush()?;
    let v = &s.verdict;
    println!(
        "verdict: {} (max Re lambda = {:e}, closed form {}, agreement {})",
        v.verdict.name(),
        v.max_re,
        v.closed_form.name(),
        v.closed_form_agrees
    );
    verdict_status(&s)
}

struct SnapshotRecord {
    requested: f64,
    step: usize,
    t: f64,
    file: PathBuf,
}

pub fn simulate(ctx: &Context) -> Result<u8> {
    let s = ctx.run_scan()?;
    if s.verdict.verdict == Verdict::Unstable || s.verdict.closed_form == ClosedForm::Unstable {
        let msg = format!("the background wave is spectrally unstable (max Re lambda = {:e})", s.verdict.max_re);
        if !ctx.force {
            return Err(CliError::Refused(msg));
        }
        eprintln!("warning: {msg}");
    }
    let (c, c_source) = ctx.energy_speed();
    let dir = ctx.out_dir();
    create_dir(dir)?;

    let split = ctx.setup.split;
    let monitor = Monitor { window: ctx.setup.window, c };
    let mut sim = Simulation::new(ctx.setup.problem.clone(), split, monitor)?;
    let total = sim.total_steps();
    let every = split.sample_every;

    let mut snapshots: Vec<SnapshotRecord> = ctx
        .cfg
        .output
        .snapshot_times
        .iter()
        .map(|&t| {
            let step = ((t / split.dt).round() as usize).min(total);
            let st = step as f64 * split.dt;
            SnapshotRecord { requested: t, step, t: st, file: dir.join(format!("snapshot_t{st:.6}.csv")) }
        })
        .collect();
    snapshots.sort_by_key(|r| r.step);
    snapshots.dedup_by_key(|r| r.step);

    let diag_path = dir.join("diagnostics.csv");
    let mut diag = CsvOut::create(&diag_path, &DIAGNOSTICS_HEADER)?;
    let mut rows = 0usize;
    let mut next_snap = 0usize;
    let run = (|| -> Result<()> {
        loop {
            let step = sim.step_index();
            if step.is_multiple_of(every) || step == total {
                diag.row(&diagnostics_row(&sim.sample()?))?;
                rows += 1;
            }
            while next_snap < snapshots.len() && snapshots[next_snap].step == step {
                write_snapshot(&snapshots[next_snap].file, &sim.problem().grid, sim.state())?;
                next_snap += 1;
            }
            if step == total {
                return Ok(());
            }
            let target = (((step / every) + 1) * every).min(total);
            let target = snapshots.get(next_snap).map_or(target, |r| target.min(r.step));
            sim.advance(target - step)?;
        }
    })();
    diag.flush()?;

    let status = match &run {
        Ok(()) => "completed".to_string(),
        Err(e) => format!("aborted: {e}"),
    };
    let written: Vec<_> = snapshots[..next_snap]
        .iter()
        .map(|r| json!({"requested_t": r.requested, "t": r.t, "step": r.step, "file": r.file.file_name().and_then(|n| n.to_str())}))
        .collect();
    let grid = &ctx.setup.problem.grid;
    let pw = &ctx.setup.problem.pw;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let meta = json!({
        "config": ctx.cfg.to_toml(),
        "grid": {"length": grid.length(), "n": grid.n(), "dx": grid.dx()},
        "wave": {"a": pw.a, "k": pw.k, "omega": pw.omega},
        "solver": {"dt": split.dt, "steps": total, "sample_every": every, "mass": split.mass_for(pw, &ctx.setup.problem.f)},
        "energy": {"c": c, "source": c_source},
        "versions": {"kgwave": kgwave::VERSION, "kgwave-cli": env!("CARGO_PKG_VERSION")},
        "threads": ctx.threads,
        "rows": rows,
        "snapshots": written,
        "status": status,
        "timestamp_unix": timestamp,
    });
    let meta_path = dir.join("metadata.json");
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(&meta_path, text + "\n").map_err(|source| CliError::Output { path: meta_path.clone(), source })?;

    match run {
        Ok(()) => {
            println!("wrote {rows} rows to {}", diag.path().display());
            Ok(0)
        }
        Err(e) => {
            eprintln!("partial diagnostics ({rows} rows) flushed to {}", diag.path().display());
            Err(e)
        }
    }
}

pub fn fit(path: &Path, column: &str, window_fraction: f64) -> Result<u8> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(CliError::Usage(format!("--window-fraction must lie in (0, 1], got {window_fraction}")));
    }
    let rows = read_columns(path, &["t", column])?;
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    let fit = loglog_fit(&series, window_fraction)
        .map_err(|e| CliError::MalformedCsv { path: path.to_path_buf(), message: e.to_string() })?;
    println!("slope = {}", fit.slope);
    println!("intercept = {}", fit.intercept);
    println!("r_squared = {}", fit.r_squared);
    println!("samples = {}", fit.samples);
    Ok(0)
}

pub fn energy(ctx: &Context, snapshot: &Path) -> Result<u8> {
    let p = &ctx.setup.problem;
    let state = read_snapshot(snapshot, &p.grid)?;
    let (c, source) = ctx.energy_speed();
    let report = EnergyFunctional::new(&p.pw, &p.f, c)?.evaluate(&state, &p.grid)?;
    println!("c = {c} ({source})");
    println!("total = {:e}", report.total);
    println!("kinetic = {:e}", report.kinetic);
    println!("gradient = {:e}", report.gradient);
    println!("potential = {:e}", report.potential);
    println!("cross = {:e}", report.cross);
    Ok(0)
}
