use std::fmt::Write as _;

use anyhow::Result;
use serde::Serialize;
use serde_json::json;
use shear_decay::harness::{
    fit_exponent, grid_independence_gate, is_monotone, measure_efold, measure_tail_rate, run_sweep,
    run_trajectory, ExponentFit, SweepRecord, SweepSettings, TailWindow, Timescale,
};
use shear_decay::norms::{
    calibration_family, family_norms, fractional_poincare_check, gevrey_bisect, gevrey_monitor, FamilyMember,
    Inequality, RatioStats, SpaceTimeField,
};
use shear_decay::oracle::{compare_with_couette, crank_nicolson_errors};
use shear_decay::{Error, Trajectory, YScheme};

use crate::config::{self, Config, FamilyKind, Scheme};
use crate::output::{comment_header, json_document, num, OutputSet};

/// Files to write and whether every check passed.
pub struct Outcome {
    pub files: OutputSet,
    pub pass: bool,
    pub summary: String,
}

fn start(command: &str, cfg: &Config) -> (String, OutputSet) {
    let toml = cfg.to_toml();
    let mut files = OutputSet::default();
    files.add("config.toml", format!("{}{toml}", comment_header(command, &toml)));
    (toml, files)
}

pub fn run(cfg: &Config) -> Result<Outcome> {
    let (toml, mut files) = start("run", cfg);
    let r = &cfg.run;
    let profile = config::profile(&r.profile, r.bc)?;
    let t_end = r.t_end.unwrap_or(r.window_multiplier * r.nu.powf(-profile.predicted_exponent()));
    let traj = run_trajectory(&profile, r.bc, r.nu, t_end, r.samples, r.record_snapshots, &cfg.resolution)?;

    let mut csv = comment_header("run", &toml);
    csv.push_str("time,l2,h1y");
    for m in &traj.modes {
        write!(csv, ",mode_{m}")?;
    }
    csv.push('\n');
    for i in 0..traj.sample_times.len() {
        write!(csv, "{},{},{}", num(traj.sample_times[i]), num(traj.l2_norms[i]), num(traj.h1y_history[i]))?;
        for v in &traj.per_mode_norms[i] {
            write!(csv, ",{}", num(*v))?;
        }
        csv.push('\n');
    }
    files.add("trajectory.csv", csv);

    let tau_efold = measure_efold(&traj).time();
    let tail = measure_tail_rate(&traj, TailWindow::new(r.tail_window[0], r.tail_window[1])?);
    let grid = traj.final_state.as_ref().map(|f| f.grid().clone());
    let summary = json!({
        "profile": profile.name(),
        "bc": r.bc,
        "nu": r.nu,
        "n_y": grid.as_ref().map(|g| g.n_y()),
        "dt": traj.dt,
        "t_end": t_end,
        "alpha_predicted": profile.predicted_exponent(),
        "tau_efold": tau_efold,
        "tail_rate": tail.as_ref().ok().map(|f| f.rate),
        "fit_t_lo": tail.as_ref().ok().map(|f| f.t_lo),
        "fit_t_hi": tail.as_ref().ok().map(|f| f.t_hi),
        "tail_note": tail.as_ref().err().map(|e| e.to_string()),
        "final_relative_norm": traj.relative_norms().last(),
    });
    files.add("summary.json", json_document("run", &toml, &summary)?);
    if r.record_snapshots {
        files.add("snapshots.bin", snapshot_bytes(&traj, &toml)?);
    }
    let summary = match tau_efold {
        Some(t) => format!("tau_efold = {t:.6}"),
        None => "norm did not reach 1/e before t_end".into(),
    };
    Ok(Outcome {
        files,
        pass: true,
        summary,
    })
}

/// Text header ending in `# end-header`, then for each snapshot `t` followed by
/// the real and imaginary parts of every mode at every node, all as
/// little-endian `f64`.
fn snapshot_bytes(traj: &Trajectory, toml: &str) -> Result<Vec<u8>> {
    let first = traj.snapshots.first().map(|(_, f)| f);
    let mut head = comment_header("run snapshots", toml);
    if let Some(f) = first {
        let g = f.grid();
        writeln!(
            head,
            "# layout: f64le; per snapshot t then modes {:?} x n_y {} x (re, im)",
            f.modes(),
            g.n_y()
        )?;
        writeln!(head, "# grid: bc {} y_lo {} y_hi {} h {}", g.bc(), num(g.y_lo()), num(g.y_hi()), num(g.h()))?;
    }
    writeln!(head, "# snapshots: {}", traj.snapshots.len())?;
    head.push_str("# end-header\n");
    let mut bytes = head.into_bytes();
    for (t, field) in &traj.snapshots {
        bytes.extend_from_slice(&t.to_le_bytes());
        for amp in field.amplitudes() {
            for z in amp {
                bytes.extend_from_slice(&z.re.to_le_bytes());
                bytes.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    Ok(bytes)
}

#[derive(Serialize)]
struct FitSummary {
    profile: String,
    bc: shear_decay::BoundaryCondition,
    #[serde(rename = "N")]
    n: u32,
    alpha_hat: Option<f64>,
    alpha_predicted: f64,
    ci_halfwidth: Option<f64>,
    residual: Option<f64>,
    n_points: usize,
    timescale: Timescale,
    tail_window: [f64; 2],
    intercept: Option<f64>,
    monotone: bool,
    fit_error: Option<String>,
    /// The fit on the other timescale, for comparison.
    alternate: Option<ExponentFit>,
    gate: Option<serde_json::Value>,
}

pub fn sweep(cfg: &Config) -> Result<Outcome> {
    let (toml, mut files) = start("sweep", cfg);
    let s = &cfg.sweep;
    let profile = config::profile(&s.profile, s.bc)?;
    let nus = cfg.sweep_nus();
    let settings = SweepSettings {
        policy: cfg.resolution.clone(),
        window: TailWindow::new(s.tail_window[0], s.tail_window[1])?,
        scheme: YScheme::FiniteDifference,
    };
    let records = run_sweep(&profile, s.bc, &nus, &settings)?;

    let mut csv = comment_header("sweep", &toml);
    csv.push_str(SweepRecord::CSV_HEADER);
    csv.push('\n');
    for r in &records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    files.add("sweep.csv", csv);

    let fit = fit_exponent(&records, s.timescale);
    let other = match s.timescale {
        Timescale::Efold => Timescale::TailRate,
        Timescale::TailRate => Timescale::Efold,
    };
    let gate = if s.gate {
        let smallest = nus.iter().copied().fold(f64::INFINITY, f64::min);
        Some(grid_independence_gate(&profile, s.bc, smallest, &settings)?)
    } else {
        None
    };
    let gate_ok = gate.as_ref().is_none_or(|g| g.pass);
    let summary = FitSummary {
        profile: profile.name(),
        bc: s.bc,
        n: profile.flatness(),
        alpha_hat: fit.as_ref().ok().map(|f| f.alpha_hat),
        alpha_predicted: profile.predicted_exponent(),
        ci_halfwidth: fit.as_ref().ok().map(|f| f.ci_halfwidth),
        residual: fit.as_ref().ok().map(|f| f.residual),
        n_points: fit.as_ref().map(|f| f.n_points()).unwrap_or(0),
        timescale: s.timescale,
        tail_window: s.tail_window,
        intercept: fit.as_ref().ok().map(|f| f.intercept),
        monotone: is_monotone(&records, s.timescale),
        fit_error: fit.as_ref().err().map(|e| e.to_string()),
        alternate: fit_exponent(&records, other).ok(),
        gate: gate.as_ref().map(serde_json::to_value).transpose()?,
    };
    files.add("fit.json", json_document("sweep", &toml, &summary)?);
    let text = match &fit {
        Ok(f) => format!(
            "alpha_hat = {:.4} +- {:.4} (predicted {:.4}) from {} points{}",
            f.alpha_hat,
            f.ci_halfwidth,
            profile.predicted_exponent(),
            f.n_points(),
            if gate_ok { "" } else { "; grid-independence gate failed" }
        ),
        Err(e) => format!("no valid fit: {e}"),
    };
    Ok(Outcome {
        files,
        pass: fit.is_ok() && gate_ok,
        summary: text,
    })
}

pub fn oracle(cfg: &Config) -> Result<Outcome> {
    let (toml, mut files) = start("oracle", cfg);
    let o = &cfg.oracle;
    let scheme = match o.scheme {
        Scheme::Spectral => YScheme::Spectral,
        Scheme::FiniteDifference => YScheme::FiniteDifference,
    };
    let t = o.t.unwrap_or(o.nu.powf(-1.0 / 3.0));
    let couette = compare_with_couette(o.nu, t, o.n_y, o.half_width, scheme, o.dt, cfg.resolution.seed)?;
    let couette_pass = couette.relative_error <= o.tolerance;

    let errors = crank_nicolson_errors(o.cn_nu, o.cn_n_y, o.cn_t, &o.cn_dts)?;
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let [lo, hi] = o.cn_ratio_range;
    let cn_pass = ratios.iter().all(|r| (lo..=hi).contains(r));

    let report = json!({
        "couette": {
            "nu": o.nu,
            "t": t,
            "n_y": o.n_y,
            "half_width": o.half_width,
            "dt": o.dt,
            "scheme": o.scheme,
            "relative_error": couette.relative_error,
            "tolerance": o.tolerance,
            "pass": couette_pass,
        },
        "crank_nicolson": {
            "nu": o.cn_nu,
            "n_y": o.cn_n_y,
            "t": o.cn_t,
            "dts": o.cn_dts,
            "errors": errors,
            "ratios": ratios,
            "ratio_range": o.cn_ratio_range,
            "pass": cn_pass,
        },
        "pass": couette_pass && cn_pass,
    });
    files.add("oracle.json", json_document("oracle", &toml, &report)?);
    Ok(Outcome {
        files,
        pass: couette_pass && cn_pass,
        summary: format!(
            "couette relative error {:.3e} (tolerance {:.1e}); CN ratios {:?}",
            couette.relative_error, o.tolerance, ratios
        ),
    })
}

fn family(kind: FamilyKind, seed: u64) -> Result<Vec<FamilyMember>> {
    let all = calibration_family(seed)?;
    Ok(match kind {
        FamilyKind::Standard => all,
        FamilyKind::XIndependent => all.into_iter().filter(|m| m.field.modes().is_empty()).collect(),
    })
}

pub fn inequalities(cfg: &Config) -> Result<Outcome> {
    let (toml, mut files) = start("inequalities", cfg);
    let q = &cfg.inequalities;
    let calibration = family(q.family, q.calibration_seed)?;
    let test = family(q.family, q.test_seed)?;
    let labels = |f: &[FamilyMember]| f.iter().map(|m| m.label.clone()).collect::<Vec<_>>();
    let (cal_labels, test_labels) = (labels(&calibration), labels(&test));
    let (cal_norms, test_norms) = (family_norms(&calibration), family_norms(&test));

    let mut reports = Vec::new();
    let mut pass = true;
    let mut csv = comment_header("inequalities", &toml);
    csv.push_str("family,inequality,member,ratio\n");
    for ineq in [Inequality::Subelliptic, Inequality::Bracket, Inequality::Interpolation] {
        let cal = RatioStats::from_norms(ineq, "calibration", &cal_labels, &cal_norms, q.c_cal)?;
        let constant = q.c_cal.unwrap_or(cal.calibration_constant);
        let fresh = RatioStats::from_norms(ineq, "test", &test_labels, &test_norms, Some(constant))?;
        pass &= cal.pass && fresh.pass && cal.skipped.is_empty() && fresh.skipped.is_empty();
        for stats in [&cal, &fresh] {
            for (member, ratio) in stats.members.iter().zip(&stats.ratios) {
                writeln!(csv, "{},{},{member},{}", stats.family, ineq.as_str(), num(*ratio))?;
            }
        }
        reports.push(cal);
        reports.push(fresh);
    }

    let mut poincare_max = 0.0f64;
    let mut poincare_bound = None;
    for member in calibration.iter().chain(&test) {
        if member.field.modes().is_empty() {
            continue;
        }
        let u = SpaceTimeField::new(vec![0.0, 1.0], vec![member.field.clone(), member.field.clone()])?;
        let r = fractional_poincare_check(&u, q.poincare_s, q.poincare_s_prime)?;
        pass &= r.pass;
        poincare_max = poincare_max.max(r.ratio);
        poincare_bound = Some(r.bound);
    }
    files.add("ratios.csv", csv);
    let report = json!({
        "stats": reports,
        "poincare": {
            "s": q.poincare_s,
            "max_ratio": poincare_max,
            "bound": poincare_bound,
        },
        "pass": pass,
    });
    files.add("inequalities.json", json_document("inequalities", &toml, &report)?);
    let failing: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{}/{} max {:.3} > C_cal {:.3}", r.family, r.inequality.as_str(), r.max, r.calibration_constant))
        .collect();
    let summary = if failing.is_empty() {
        format!("{} ratio checks within C_cal; poincare max ratio {poincare_max:.4}", reports.len())
    } else {
        failing.join("; ")
    };
    Ok(Outcome { files, pass, summary })
}

pub fn gevrey(cfg: &Config) -> Result<Outcome> {
    let (toml, mut files) = start("gevrey", cfg);
    let g = &cfg.gevrey;
    let profile = config::profile(&g.profile, g.bc)?;
    let n = profile.flatness();
    let t_max = g.t_factor * g.nu.powf(-profile.predicted_exponent());
    let traj = run_trajectory(&profile, g.bc, g.nu, t_max, g.samples, false, &cfg.resolution)?;
    let (d0, source) = match g.d0 {
        Some(d0) => (d0, "given"),
        None => (gevrey_bisect(&traj, g.nu, n, g.p, t_max, g.bound)?, "bisected"),
    };
    let mut csv = comment_header("gevrey", &toml);
    csv.push_str("time,amplification\n");
    let (sup, overflow) = match gevrey_monitor(&traj, g.nu, n, g.p, d0, t_max) {
        Ok(curve) => {
            for (t, a) in curve.times.iter().zip(&curve.amplification) {
                writeln!(csv, "{},{}", num(*t), num(*a))?;
            }
            (Some(curve.sup), None)
        }
        Err(e @ Error::WeightOverflow { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let pass = sup.is_some_and(|s| s <= g.bound);
    files.add("gevrey.csv", csv);
    let report = json!({
        "profile": profile.name(),
        "bc": g.bc,
        "nu": g.nu,
        "N": n,
        "p": g.p,
        "p_admissible": g.p > f64::from(n + 3) / 2.0,
        "d0": d0,
        "d0_source": source,
        "bound": g.bound,
        "t_max": t_max,
        "sup": sup,
        "overflow": overflow,
        "pass": pass,
    });
    files.add("gevrey.json", json_document("gevrey", &toml, &report)?);
    let summary = match sup {
        Some(s) => format!("d0 = {d0:.6e} ({source}): sup A = {s:.4} (bound {})", g.bound),
        None => format!("d0 = {d0:.6e} ({source}): weight overflow, amplification unbounded"),
    };
    Ok(Outcome { files, pass, summary })
}
