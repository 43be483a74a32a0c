use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use varsamp::kernels::{
    admissibility, average, fourier_check, half_unit_grid, l1_norm_with_tail, AveragedKernel, Kernel,
};
use varsamp::numerics::Decay;
use varsamp::operators::{averaged_sampling_derivative, averaged_sampling_series, derivative_identity_sweep};
use varsamp::signals::Signal;
use varsamp::variation::{
    convergence_study, detracting_check, required_window, variation_of_difference, variation_of_operator_output,
    StudyOptions,
};

use crate::output::{emit, gnuplot_script, plot_path, Table};
use crate::{Config, Grid, Verdict};

const SERIES_TOL: f64 = 1e-10;
/// Kernels with 1/x² envelopes need about 0.4/tol lattice terms per point.
const DECAYING_SERIES_TOL: f64 = 1e-6;
const FOURIER_INDICES: [i32; 7] = [0, 1, -1, 2, -2, 3, -3];

fn kernel(cfg: &Config) -> Result<Kernel> {
    Ok(Kernel::from_id(&cfg.kernel)?)
}

fn signal(cfg: &Config) -> Result<Signal> {
    Ok(Signal::from_id(&cfg.signal)?)
}

fn rates(cfg: &Config, default: &[f64]) -> Vec<f64> {
    if cfg.w.is_empty() {
        default.to_vec()
    } else {
        cfg.w.clone()
    }
}

fn mark(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn write_table(cfg: &Config, table: &Table, title: &str, logscale_x: bool) -> Result<()> {
    emit(cfg.out.as_deref(), &table.render())?;
    if cfg.plot {
        let csv = cfg.out.as_deref().context("--plot needs --out")?;
        let script = gnuplot_script(csv, table, title, logscale_x);
        emit(Some(&plot_path(csv)), &script)?;
    }
    Ok(())
}

/// Default pass tolerance: tight for compact kernels, looser where lattice
/// sums and integrals must be cut off.
fn default_tol(k: &Kernel) -> f64 {
    if k.support().is_compact() {
        1e-8
    } else {
        1e-5
    }
}

fn check_one(k: &Kernel, tol: Option<f64>, report: &mut String) -> Result<bool> {
    let tol = tol.unwrap_or_else(|| default_tol(k));
    let mut ok = true;
    writeln!(report, "kernel {}", k.id())?;

    let adm = admissibility(k, &half_unit_grid(101), tol)?;
    let p = adm.partition;
    ok &= p.pass;
    writeln!(
        report,
        "  partition-of-unity deviation={:.3e} truncation_bound={:.3e} radius={} {}",
        p.max_deviation,
        p.truncation_bound,
        p.radius,
        mark(p.pass)
    )?;

    let a = adm.absolute_moment;
    let a_pass = a.is_finite() && (!k.is_nonnegative() || (a - 1.0).abs() <= 1e-4);
    ok &= a_pass;
    writeln!(report, "  absolute-moment A={a:.10} {}", mark(a_pass))?;

    let (l1, tail) = l1_norm_with_tail(k);
    let l1_pass = match k.l1_norm_hint() {
        Some(h) => (l1 - h).abs() <= tol.max(1e-8) + tail,
        None => l1.is_finite(),
    };
    ok &= l1_pass;
    writeln!(report, "  l1-norm value={l1:.12} tail={tail:.3e} {}", mark(l1_pass))?;

    for kk in FOURIER_INDICES {
        let f = fourier_check(k, kk, tol)?;
        ok &= f.pass;
        writeln!(
            report,
            "  fourier k={kk:+} re={:.3e} im={:.3e} deviation={:.3e} {}",
            f.real,
            f.imag,
            f.deviation,
            mark(f.pass)
        )?;
    }
    Ok(ok)
}

/// Checks `--kernel` and, when `--m` is given, also its m-average.
pub fn check_kernel(cfg: &Config) -> Result<Verdict> {
    let k = kernel(cfg)?;
    let mut report = String::new();
    let mut ok = check_one(&k, cfg.tol, &mut report)?;
    if let Some(m) = cfg.m {
        ok &= check_one(&average(&k, m)?.to_kernel(), cfg.tol, &mut report)?;
    }
    writeln!(report, "{}", mark(ok))?;
    emit(cfg.out.as_deref(), &report)?;
    Ok(if ok { Verdict::Pass } else { Verdict::Fail })
}

fn default_kernel_grid(ak: &AveragedKernel) -> Grid {
    match ak.support() {
        Decay::Compact { radius } => Grid {
            start: -(radius + 0.5),
            stop: radius + 0.5,
            count: 401,
        },
        Decay::Polynomial { .. } => Grid {
            start: -15.0,
            stop: 15.0,
            count: 601,
        },
    }
}

pub fn kernel_table(cfg: &Config) -> Result<Verdict> {
    let k = kernel(cfg)?;
    let ak = average(&k, cfg.m.unwrap_or(1))?;
    let grid = cfg.grid.unwrap_or_else(|| default_kernel_grid(&ak));
    let mut table = Table::new(vec!["t", "kernel", "averaged"]);
    for t in grid.points() {
        table.push(vec![t, k.evaluate(t), ak.evaluate(t)]);
    }
    write_table(cfg, &table, &format!("{} and its {}-average", k.id(), ak.m()), false)?;
    Ok(Verdict::Pass)
}

fn signal_grid(cfg: &Config, f: &Signal) -> Grid {
    cfg.grid.unwrap_or_else(|| {
        let (a, b) = f.essential_window();
        let pad = 0.25 * (b - a).max(1.0);
        Grid {
            start: a - pad,
            stop: b + pad,
            count: 401,
        }
    })
}

pub fn eval(cfg: &Config) -> Result<Verdict> {
    let f = signal(cfg)?;
    let mut ak = average(&kernel(cfg)?, cfg.m.unwrap_or(1))?;
    if let Some(h) = cfg.cache_step {
        ak = ak.with_grid_cache(h)?;
    }
    let ts = signal_grid(cfg, &f).points();
    let tol = cfg.tol.unwrap_or(if ak.support().is_compact() {
        SERIES_TOL
    } else {
        DECAYING_SERIES_TOL
    });
    let mut table = Table::new(vec!["w", "t", "signal", "series", "derivative"]);
    for w in rates(cfg, &[4.0]) {
        let rows: Vec<Vec<f64>> = ts
            .par_iter()
            .map(|&t| {
                vec![
                    w,
                    t,
                    f.evaluate(t),
                    averaged_sampling_series(&f, &ak, w, t, tol),
                    averaged_sampling_derivative(&f, &ak, w, t, tol),
                ]
            })
            .collect();
        rows.into_iter().for_each(|r| table.push(r));
    }
    write_table(
        cfg,
        &table,
        &format!("{} sampled with avg:{}:{}", f.id(), ak.m(), ak.base().id()),
        false,
    )?;
    Ok(Verdict::Pass)
}

pub fn detract(cfg: &Config) -> Result<Verdict> {
    let f = signal(cfg)?;
    let k = kernel(cfg)?;
    let m = cfg.m.unwrap_or(1);
    let mut table = Table::new(vec![
        "w",
        "variation",
        "tail_bound",
        "lhs",
        "bound",
        "m_free_bound",
        "pass",
    ]);
    let mut ok = true;
    for w in rates(cfg, &[2.0, 4.0, 8.0]) {
        let c = detracting_check(&f, &k, m, w)?;
        ok &= c.pass;
        table.push(vec![
            w,
            c.estimate.value,
            c.estimate.tail_bound,
            c.lhs,
            c.rhs,
            c.m_free_rhs,
            if c.pass { 1.0 } else { 0.0 },
        ]);
    }
    write_table(
        cfg,
        &table,
        &format!("variation of the averaged series, {} m={m}", f.id()),
        true,
    )?;
    Ok(if ok { Verdict::Pass } else { Verdict::Fail })
}

pub fn derivative_identity(cfg: &Config) -> Result<Verdict> {
    let f = signal(cfg)?;
    let k = kernel(cfg)?;
    let m = cfg.m.unwrap_or(1);
    let tol = cfg.tol.unwrap_or(1e-6);
    let ts = signal_grid(cfg, &f).points();
    let mut table = Table::new(vec!["w", "t", "lhs", "rhs", "residual"]);
    let mut summary = String::new();
    let mut ok = true;
    for w in rates(cfg, &[4.0]) {
        let samples = derivative_identity_sweep(&f, &k, m, w, &ts, SERIES_TOL.min(tol * 1e-3))?;
        let worst = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
        let pass = worst <= tol;
        ok &= pass;
        writeln!(summary, "w={w} max_residual={worst:.3e} tol={tol:.1e} {}", mark(pass))?;
        for s in samples {
            table.push(vec![w, s.t, s.lhs, s.rhs, s.residual]);
        }
    }
    if cfg.out.is_some() {
        write_table(
            cfg,
            &table,
            &format!("derivative identity residual, {} m={m}", f.id()),
            false,
        )?;
        print!("{summary}");
    } else {
        emit(None, &summary)?;
    }
    Ok(if ok { Verdict::Pass } else { Verdict::Fail })
}

pub fn converge(cfg: &Config) -> Result<Verdict> {
    let f = signal(cfg)?;
    let k = kernel(cfg)?;
    let m = cfg.m.unwrap_or(1);
    let ws = rates(cfg, &[2.0, 4.0, 8.0, 16.0, 32.0]);
    let options = StudyOptions {
        tol: cfg.tol.unwrap_or(StudyOptions::default().tol),
        ..StudyOptions::default()
    };
    let mut capped = false;
    let table = if cfg.timing {
        let ak = average(&k, m)?;
        let window = required_window(&f, &k, m, ws[0]);
        let bound = k.l1_norm() * f.exact_variation() / m as f64;
        let mut table = Table::new(vec!["w", "v_diff", "v_op", "detracting_bound", "wall_time"]);
        for &w in &ws {
            let start = Instant::now();
            let diff = variation_of_difference(&f, &ak, w, window, options.start_points)?;
            let op = variation_of_operator_output(&f, &ak, w, window, options.tol)?;
            capped |= diff.capped;
            table.push(vec![w, diff.value, op.value, bound, start.elapsed().as_secs_f64()]);
        }
        table
    } else {
        let mut table = Table::new(vec!["w", "v_diff", "v_op", "detracting_bound"]);
        for row in convergence_study(&f, &k, m, &ws, options)? {
            capped |= row.difference.capped;
            table.push(vec![row.w, row.difference.value, row.output.value, row.bound]);
        }
        table
    };
    write_table(
        cfg,
        &table,
        &format!("variation convergence, {} with avg:{m}:{}", f.id(), k.id()),
        true,
    )?;
    if capped {
        eprintln!("error: partition refinement hit its cap; v_diff is a lower bound");
        return Ok(Verdict::NonConvergence);
    }
    Ok(Verdict::Pass)
}
