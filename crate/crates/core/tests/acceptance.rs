//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits nonzero if any criterion fails. Pass a substring to run a subset.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use rustfft::num_complex::Complex64;

use shearback::diagnostics::fit_decay;
use shearback::dynamics::{ShearFrameState, Stepper, StepperConfig};
use shearback::harness::run::NullSink;
use shearback::harness::{hardy_survey, make_initial_data, sweep, InitFamily, RunConfig, RunStatus, RunSummary, Simulation};
use shearback::oracle::{damping_norm, default_t_values, elliptic_symbol_check};
use shearback::spectral::{GridSpec, PhysicalField, SpectralField, Transformer};

type Outcome = Result<(bool, String), String>;

fn reference_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.grid = GridSpec::new(128, 256, 4.0 * std::f64::consts::PI).unwrap();
    cfg.init.family = InitFamily::Single;
    cfg.sim.epsilon = 0.05;
    cfg.sim.s = 3.0;
    cfg.sim.t_end = 100.0;
    cfg.output.checkpoint_every = 0;
    cfg
}

fn reference_run() -> Result<&'static (RunSummary, Vec<shearback::diagnostics::DiagnosticsRecord>), String> {
    static RUN: OnceLock<Result<(RunSummary, Vec<shearback::diagnostics::DiagnosticsRecord>), String>> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut sim = Simulation::new(&reference_config()).map_err(|e| e.to_string())?;
        let summary = sim.run(&mut NullSink).map_err(|e| e.to_string())?;
        Ok((summary, sim.history().to_vec()))
    })
    .as_ref()
    .map_err(Clone::clone)
}

/// Eight samples per octave on `[lo, hi]`.
fn octaves(lo: f64, hi: f64) -> Vec<f64> {
    let n = ((hi / lo).log2() * 8.0).round() as i32;
    (0..=n).map(|i| lo * 2f64.powf(i as f64 / 8.0)).collect()
}

fn frozen_damping() -> Outcome {
    let grid = GridSpec::default();
    let tr = Transformer::new(grid).map_err(|e| e.to_string())?;
    let gaussian = tr
        .forward(&PhysicalField::from_fn(grid, |x, y| x.sin() * (-y * y).exp()))
        .map_err(|e| e.to_string())?;
    let mut single = SpectralField::zeros(grid);
    single.set_real_mode(1, 0, Complex64::new(0.5, 0.0));

    let times = octaves(16.0, 512.0);
    let mut ok = true;
    let mut detail = Vec::new();
    for s in [1.0, 2.0] {
        let series: Vec<(f64, f64)> = times
            .iter()
            .map(|&t| Ok((t, damping_norm(&gaussian, t, s)?)))
            .collect::<Result<_, shearback::Error>>()
            .map_err(|e| e.to_string())?;
        let fit = fit_decay(&series, (16.0, 512.0)).map_err(|e| e.to_string())?;
        let slope_ok = (fit.exponent + s).abs() <= 0.05;

        let base = damping_norm(&single, 0.0, s).map_err(|e| e.to_string())?;
        let mut worst = 0.0_f64;
        for &t in times.iter().chain([0.5, 1.0, 3.0, 1024.0].iter()) {
            let got = damping_norm(&single, t, s).map_err(|e| e.to_string())? / base;
            let want = (1.0 + t * t).powf(-s / 2.0);
            worst = worst.max((got - want).abs() / want);
        }
        ok &= slope_ok && worst <= 1e-10;
        detail.push(format!("s={s}: slope {:.4} (want {:.1} ± 0.05), closed-form rel err {worst:.1e}", fit.exponent, -s));
    }
    Ok((ok, detail.join("; ")))
}

fn elliptic_bounds() -> Outcome {
    let grid = GridSpec::default();
    let times = default_t_values();
    let mut ok = true;
    let mut detail = Vec::new();
    for (s1, s2) in [(1.0, 1.0), (2.0, 1.0), (0.0, 1.0), (3.0, 3.0)] {
        let r = elliptic_symbol_check(&grid, s1, s2, &times).map_err(|e| e.to_string())?;
        let spread = r.spread();
        let first = r.normalized_sup[0];
        let pass = spread < 4.0 && r.max_normalized <= 4.0 * first;
        ok &= pass;
        detail.push(format!(
            "({s1},{s2}): spread {spread:.3e}, max/first {:.3}",
            r.max_normalized / first
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn nonlinear_damping() -> Outcome {
    let (sum, _) = reference_run()?;
    let uy = sum.uy_fit.ok_or("no uy_l2 fit")?;
    let ux = sum.ux_fit.ok_or("no ux_neq0_l2 fit")?;
    let ok = sum.status == RunStatus::Completed
        && (-2.15..=-1.85).contains(&uy.exponent)
        && (-1.10..=-0.90).contains(&ux.exponent);
    Ok((
        ok,
        format!(
            "status {:?}; uy_l2 exponent {:.4} ± {:.1e} (want [-2.15, -1.85]); ux_neq0_l2 exponent {:.4} ± {:.1e} (want [-1.10, -0.90]); window {:?}; Gronwall C {:?}, envelope blow-up {:?}, T_eps(c_s=1) {:?}",
            sum.status,
            uy.exponent,
            uy.exponent_stderr,
            ux.exponent,
            ux.exponent_stderr,
            uy.window,
            sum.gronwall_c,
            sum.envelope_blowup_time,
            sum.predicted_lifespan
        ),
    ))
}

fn regularity() -> Outcome {
    let (sum, _) = reference_run()?;
    let h0 = sum.initial.hs;
    let ok = sum.status == RunStatus::Completed && sum.max_hs <= 0.15 && sum.max_hs <= 1.2 * h0;
    Ok((
        ok,
        format!(
            "max H^3 {:.6e} (limit 0.15), initial {:.6e}, ratio {:.6}",
            sum.max_hs,
            h0,
            sum.max_hs / h0
        ),
    ))
}

fn rk4_order() -> Result<f64, String> {
    let grid = GridSpec::default();
    let mut cfg = reference_config();
    cfg.sim.epsilon = 1.0;
    let w = make_initial_data(&cfg).map_err(|e| e.to_string())?.w_hat;
    let tr = Transformer::new(grid).map_err(|e| e.to_string())?;
    let peak = tr.inverse(&w).map_err(|e| e.to_string())?.max_abs();
    let w = w.map_modes(|_, _, c| c * (2.0 / peak));
    let stepper = Stepper::new(
        grid,
        StepperConfig {
            cfl: false,
            ..StepperConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let solve = |n: u32| -> Result<SpectralField, String> {
        let mut st = ShearFrameState::new(w.clone()).map_err(|e| e.to_string())?;
        for _ in 0..n {
            st = stepper.step_rk4(&st, 1.0 / n as f64).map_err(|e| e.to_string())?;
        }
        Ok(st.w_hat)
    };
    let (a, b, c) = (solve(8)?, solve(16)?, solve(32)?);
    let diff = |x: &SpectralField, y: &SpectralField| {
        SpectralField::from_coef(grid, x.coef() - y.coef()).unwrap().l2_norm()
    };
    Ok((diff(&a, &b) / diff(&b, &c)).log2())
}

fn conservation_convergence() -> Outcome {
    let (sum, _) = reference_run()?;
    let order = rk4_order()?;
    let ok = sum.l2_drift <= 1e-6 && (order - 4.0).abs() <= 0.3;
    Ok((
        ok,
        format!("L2 relative drift {:.2e} (limit 1e-6); RK4 observed order {order:.3} (want 4.0 ± 0.3)", sum.l2_drift),
    ))
}

fn cross_path() -> Outcome {
    let mut cfg = reference_config();
    cfg.sim.linear_mode = true;
    let mut sim = Simulation::new(&cfg).map_err(|e| e.to_string())?;
    let w0 = sim.state().w_hat.clone();
    sim.run(&mut NullSink).map_err(|e| e.to_string())?;
    let dx_w = w0.map_modes(|k, _, c| Complex64::new(0.0, k as f64) * c);
    let mut worst = 0.0_f64;
    for r in sim.history() {
        let oracle = damping_norm(&dx_w, r.t, 2.0).map_err(|e| e.to_string())?;
        worst = worst.max((r.uy_l2 - oracle).abs() / oracle);
    }
    Ok((
        worst <= 1e-12,
        format!("{} samples, max relative gap {worst:.2e} (limit 1e-12)", sim.history().len()),
    ))
}

fn lifespan_trend() -> Outcome {
    let mut cfg = reference_config();
    cfg.init.family = InitFamily::Multi;
    cfg.sim.t_end = 500.0;
    let epsilons = [0.4, 0.2, 0.1];
    let summary = sweep(&cfg, &epsilons, &[3.0], false).map_err(|e| e.to_string())?;
    // A cell that never grew by the cap has T_grow > t_final.
    let mut lower = Vec::new();
    for c in &summary.cells {
        let bound = match (c.t_grow, c.status, c.t_final) {
            (Some(t), _, _) => (t, false),
            (None, Some(RunStatus::Completed), Some(tf)) => (tf, true),
            _ => return Ok((false, format!("eps={}: no growth time ({:?})", c.epsilon, c.error))),
        };
        lower.push(bound);
    }
    let mut ok = true;
    for w in lower.windows(2) {
        let ((t_big_eps, censored), (t_small_eps, _)) = (w[0], w[1]);
        ok &= !censored && t_small_eps > t_big_eps;
    }
    let cells: Vec<String> = epsilons
        .iter()
        .zip(&lower)
        .map(|(e, (t, cens))| format!("eps={e}: T_grow {}{t:.2}", if *cens { ">" } else { "" }))
        .collect();
    let slope = &summary.slopes[0];
    Ok((
        ok,
        format!(
            "{}; log-log slope {} over {} points vs predicted {:.2} (report only)",
            cells.join(", "),
            slope.observed.map_or("n/a".into(), |v| format!("{v:.3}")),
            slope.n_points,
            slope.predicted
        ),
    ))
}

fn hardy_zero_mode() -> Outcome {
    let mut cfg = reference_config();
    cfg.init.seed = 1;
    let pairs = hardy_survey(&cfg, 100).map_err(|e| e.to_string())?;
    let mut ratios: Vec<f64> = pairs.iter().map(|p| p.ratio()).collect();
    ratios.sort_by(f64::total_cmp);
    let median = 0.5 * (ratios[49] + ratios[50]);
    let max = ratios[99];
    Ok((
        max <= 10.0 * median && max.is_finite(),
        format!("100 profiles: bound constant {max:.4}, median {median:.4}, max/median {:.3} (limit 10)", max / median),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("frozen damping rate", frozen_damping),
        ("elliptic symbol bounds", elliptic_bounds),
        ("nonlinear damping", nonlinear_damping),
        ("regularity", regularity),
        ("conservation and convergence", conservation_convergence),
        ("cross-path consistency", cross_path),
        ("lifespan trend", lifespan_trend),
        ("hardy zero-mode", hardy_zero_mode),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
