use std::path::Path;

use nustab_core::assembly::assemble_system;
use nustab_core::conditions::{
    converse_pair, hautus_check, hautus_secondorder_constants, nonuniform_obs_check, observability_doubling,
    sample_states, wavepacket_params,
};
use nustab_core::diophantine::{
    constant_type_check, continued_fraction, implied_pointwise_rate, log_coupling_lower_bound, sine_coupling_lower_bound,
};
use nustab_core::rate::{
    check_positive_increase, deviation_halves, eigenvalue_asymptotics_check, optimality_limsup, pseudoinverse_lower_bounds,
};
use nustab_core::resolvent::{default_grid, fit_growth_exponent, peak_series, scan, transfer_bounds, Method};
use nustab_core::semigroup::{
    decay_trace, eig_decompose, fit_decay_exponent, rate_consistency, time_grid, truncation_floor,
};
use nustab_core::{fit_loglog, DampingKind, DampedGenerator, ModalSystem, RateFunction, SystemSpec};

use crate::config::{ExperimentConfig, SGrid, Task};
use crate::output::{num, write_csv, write_json};
use crate::recipes;
use crate::report::*;
use crate::CliError;

/// Seed used when neither the config nor the command line gives one.
pub const DEFAULT_SEED: u64 = 0;

/// Largest stretch factor in positive-increase certificates.
const CERT_LAMBDA_MAX: f64 = 32.0;

pub struct Outcome {
    pub summary: String,
    /// A reproduction landed outside its expected range.
    pub check_failed: bool,
}

fn ok(summary: String) -> Result<Outcome, CliError> {
    Ok(Outcome { summary, check_failed: false })
}

/// Attaches the failing operation to a core error.
fn at(op: impl FnOnce() -> String) -> impl FnOnce(nustab_core::Error) -> CliError {
    move |e| CliError::from_core(&op(), e)
}

fn system(cfg: &ExperimentConfig) -> Result<(SystemSpec, ModalSystem, DampedGenerator), CliError> {
    let spec = cfg.system.clone().ok_or_else(|| CliError::Validation("missing `system`".into()))?;
    let ms = nustab_core::build_modal_system(&spec).map_err(at(|| "build_modal_system".into()))?;
    let dg = assemble_system(&ms).map_err(at(|| "assemble_system".into()))?;
    Ok((spec, ms, dg))
}

fn s_grid(cfg: &ExperimentConfig, lambdas: &[f64]) -> Vec<f64> {
    match cfg.s_grid.clone().unwrap_or(SGrid::Frequencies { refinements: 0 }) {
        SGrid::Frequencies { refinements } => {
            let extra: Vec<f64> = lambdas
                .windows(2)
                .flat_map(|w| {
                    let (a, b) = (w[0], w[1]);
                    (1..=refinements).map(move |k| a + (b - a) * k as f64 / (refinements + 1) as f64)
                })
                .collect();
            default_grid(lambdas, &extra)
        }
        SGrid::Linear { start, stop, points } => {
            (0..points).map(|k| start + (stop - start) * k as f64 / (points - 1) as f64).collect()
        }
    }
}

fn label(spec: &SystemSpec) -> String {
    let kind = match spec.system {
        nustab_core::SystemKind::Wave1d => "wave1d",
        nustab_core::SystemKind::Beam1d => "beam1d",
    };
    format!("{kind} N={}", spec.truncation)
}

pub fn run(task: Task, cfg: &ExperimentConfig, out: &Path, seed: Option<u64>) -> Result<Outcome, CliError> {
    cfg.validate(task)?;
    let seed = seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let (csv, json) = cfg.output_paths(task, out);
    match task {
        Task::Modes => modes(cfg, csv.as_deref(), &json),
        Task::ResolventScan => resolvent_scan(cfg, csv.as_deref(), &json),
        Task::Peaks => peaks(cfg, csv.as_deref(), &json),
        Task::DecaySim => decay_sim(cfg, csv.as_deref(), &json),
        Task::Conditions => conditions(cfg, &json, seed),
        Task::Optimality => optimality(cfg, csv.as_deref(), &json),
        Task::Diophantine => diophantine(cfg, &json),
        Task::Reproduce => reproduce(cfg, &json),
    }
}

fn modes(cfg: &ExperimentConfig, csv: Option<&Path>, json: &Path) -> Result<Outcome, CliError> {
    let (spec, ms, _) = system(cfg)?;
    if let Some(p) = csv {
        let rows = ms.modes.iter().map(|m| vec![m.n.to_string(), num(m.lambda), num(m.coupling)]);
        write_csv(p, &["n", "lambda", "coupling"], rows)?;
    }
    let gap = ms.spectral_gap().map_err(at(|| "spectral_gap".into()))?;
    write_json(json, &ModesReport { system: spec.clone(), modal: ms.clone(), spectral_gap: gap })?;
    ok(format!("modes: {} modes, gap {gap:.6}", label(&spec)))
}

fn resolvent_scan(cfg: &ExperimentConfig, csv: Option<&Path>, json: &Path) -> Result<Outcome, CliError> {
    let (spec, ms, dg) = system(cfg)?;
    let method = cfg.method.unwrap_or_else(|| Method::structured(&dg.damping));
    let grid = s_grid(cfg, &ms.frequencies());
    let sc = scan(&dg, method, &grid, true).map_err(at(|| format!("scan(method={method}, {} points)", grid.len())))?;
    let transfer = transfer_bounds(&dg, &sc).map_err(at(|| "transfer_bounds".into()))?;
    if let Some(p) = csv {
        let rows = (0..sc.len()).map(|k| vec![num(sc.s[k]), num(sc.norms[k]), sc.methods[k].to_string()]);
        write_csv(p, &["s", "norm", "method"], rows)?;
    }
    let (argmax, max_norm) = sc.norms.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |a, (k, v)| {
        if v > a.1 {
            (k, v)
        } else {
            a
        }
    });
    let report = ScanReport {
        system: spec.clone(),
        method,
        points: sc.len(),
        max_norm,
        argmax_s: sc.s.get(argmax).copied().unwrap_or(f64::NAN),
        transfer,
    };
    write_json(json, &report)?;
    ok(format!(
        "resolvent-scan: {} {} points, max norm {:.6e} at s={:.6}, transfer bounds {}",
        label(&spec),
        report.points,
        report.max_norm,
        report.argmax_s,
        if report.transfer.pass { "PASS" } else { "FAIL" }
    ))
}

fn mode_window(cfg: &ExperimentConfig, truncation: usize, default_lo: usize) -> (usize, usize) {
    cfg.modes.map(|w| (w.lo, w.hi)).unwrap_or((default_lo.max(1), truncation / 2))
}

fn peaks(cfg: &ExperimentConfig, csv: Option<&Path>, json: &Path) -> Result<Outcome, CliError> {
    let (spec, _, dg) = system(cfg)?;
    let method = cfg.method.unwrap_or_else(|| Method::structured(&dg.damping));
    let (lo, hi) = mode_window(cfg, spec.truncation, 1);
    let series = peak_series(&dg, method, lo, hi).map_err(at(|| format!("peak_series(lo={lo}, hi={hi}, method={method})")))?;
    let fit = fit_growth_exponent(&series).map_err(at(|| "fit_growth_exponent".into()))?;
    let env = series.upper_envelope();
    let envelope_fit = fit_loglog(&env.s, &env.peak, 5).ok();
    if let Some(p) = csv {
        let rows = (0..series.len()).map(|k| vec![series.n[k].to_string(), num(series.s[k]), num(series.peak[k])]);
        write_csv(p, &["n", "s", "peak_norm"], rows)?;
    }
    let summary = format!(
        "peaks: {} n {lo}..{hi} ({method}), slope {:.4}{}",
        label(&spec),
        fit.exponent,
        envelope_fit.map(|f| format!(", envelope slope {:.4}", f.exponent)).unwrap_or_default()
    );
    write_json(json, &PeaksReport { system: spec, series, fit, envelope_fit })?;
    ok(summary)
}

fn decay_sim(cfg: &ExperimentConfig, csv: Option<&Path>, json: &Path) -> Result<Outcome, CliError> {
    let (spec, _, dg) = system(cfg)?;
    let tg = cfg.t_grid.expect("validated");
    let grid = time_grid(tg.start, tg.stop, tg.points, tg.spacing).map_err(at(|| "time_grid".into()))?;
    let sf = eig_decompose(&dg).map_err(at(|| "eig_decompose".into()))?;
    let trace = decay_trace(&sf, &grid, cfg.rate.as_ref()).map_err(at(|| "decay_trace".into()))?;
    let (lo, hi) = cfg.fit.map(|w| (w.lo, w.hi)).unwrap_or((tg.start, tg.stop));
    let floor = truncation_floor(&sf.lambdas);
    let fit = fit_decay_exponent(&trace, lo, hi, floor).map_err(at(|| format!("fit_decay_exponent(window [{lo}, {hi}])")))?;
    let consistency = match &cfg.rate {
        Some(m) => {
            let (max, tail_over_head) =
                rate_consistency(&trace, m, lo, hi).map_err(at(|| "rate_consistency".into()))?;
            Some(RateConsistency { max, tail_over_head })
        }
        None => None,
    };
    if let Some(p) = csv {
        let rows = (0..trace.t.len()).map(|k| {
            let predicted = trace.predicted.as_ref().and_then(|v| v[k]).map(num).unwrap_or_default();
            vec![num(trace.t[k]), num(trace.values[k]), predicted]
        });
        write_csv(p, &["t", "opnorm", "predicted"], rows)?;
    }
    let summary = format!(
        "decay-sim: {} t {lo}..{hi}, exponent {:.4}{}{}",
        label(&spec),
        fit.exponent,
        consistency.map(|c| format!(", rate tail/head {:.3}", c.tail_over_head)).unwrap_or_default(),
        if trace.beyond_horizon { ", past validity horizon" } else { "" }
    );
    let report = DecayReport {
        system: spec,
        points: trace.t.len(),
        fit_window: [lo, hi],
        fit,
        truncation_floor: floor,
        horizon: trace.horizon,
        beyond_horizon: trace.beyond_horizon,
        rate: cfg.rate.clone(),
        consistency,
    };
    write_json(json, &report)?;
    ok(summary)
}

fn conditions(cfg: &ExperimentConfig, json: &Path, seed: u64) -> Result<Outcome, CliError> {
    let (spec, ms, dg) = system(cfg)?;
    let p = cfg.conditions.clone().expect("validated");
    let wavepackets = wavepacket_params(&ms).map_err(at(|| "wavepacket_params".into()))?;
    let hautus_rate = cfg.rate.clone().unwrap_or_else(|| wavepackets.predicted_m.clone());
    let states = sample_states(ms.dim(), p.random_samples, seed);
    let s = s_grid(cfg, &ms.frequencies());
    let (big, small) = converse_pair(&hautus_rate);
    let hautus = hautus_check(&dg.generator, &dg.damping, big, small, &s, &states)
        .map_err(at(|| format!("hautus_check({} frequencies, {} states)", s.len(), states.len())))?;
    let observability = nonuniform_obs_check(&ms, p.beta, p.tau, &states)
        .map_err(at(|| format!("nonuniform_obs_check(beta={}, tau={})", p.beta, p.tau)))?;
    let doubling = if p.doubling {
        Some(
            observability_doubling(&spec, p.beta, p.tau, p.random_samples, seed)
                .map_err(at(|| format!("observability_doubling(beta={}, tau={})", p.beta, p.tau)))?,
        )
    } else {
        None
    };
    let second_order = match ms.damping_kind {
        DampingKind::RankOne => {
            Some(hautus_secondorder_constants(&ms).map_err(at(|| "hautus_secondorder_constants".into()))?)
        }
        DampingKind::Diagonal => None,
    };
    let flag = |b: bool| if b { "PASS" } else { "FAIL" };
    let summary = format!(
        "conditions: {} hautus {} (worst ratio {:.4}), observability beta={} {} (c_tau {:.4e}){}",
        label(&spec),
        flag(hautus.pass),
        hautus.worst_ratio,
        p.beta,
        flag(observability.pass),
        observability.c_tau,
        doubling.as_ref().map(|d| format!(", doubling {} (kappa {:.3})", flag(d.pass), d.kappa)).unwrap_or_default()
    );
    let report =
        ConditionsReport { system: spec, seed, wavepackets, hautus_rate, hautus, observability, doubling, second_order };
    write_json(json, &report)?;
    ok(summary)
}

/// Log-spaced points covering where `m` is defined.
fn certificate_grid(m: &RateFunction) -> Vec<f64> {
    let start = m.domain_start().max(1.0);
    let stop = match m {
        RateFunction::Tabulated { s, .. } => *s.last().unwrap_or(&start),
        _ => 1e12,
    };
    if !(stop > start) {
        return vec![start];
    }
    let (a, b) = (start.ln(), stop.ln());
    (0..300).map(|k| (a + (b - a) * k as f64 / 299.0).exp().min(stop)).collect()
}

fn optimality(cfg: &ExperimentConfig, csv: Option<&Path>, json: &Path) -> Result<Outcome, CliError> {
    let (spec, ms, dg) = system(cfg)?;
    let m0 = cfg.rate.clone().expect("validated");
    let tg = cfg.t_grid.expect("validated");
    let grid = time_grid(tg.start, tg.stop, tg.points, tg.spacing).map_err(at(|| "time_grid".into()))?;
    let sf = eig_decompose(&dg).map_err(at(|| "eig_decompose".into()))?;
    let trace = decay_trace(&sf, &grid, Some(&m0)).map_err(at(|| "decay_trace".into()))?;
    let proxy = optimality_limsup(&trace, &m0).map_err(at(|| "optimality_limsup".into()))?;
    let (certificate, certificate_error) = match check_positive_increase(&m0, CERT_LAMBDA_MAX, &certificate_grid(&m0)) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let lower_bounds = pseudoinverse_lower_bounds(&ms);
    let (lo, hi) = mode_window(cfg, spec.truncation, spec.truncation / 4);
    let deviations = eigenvalue_asymptotics_check(&dg, &ms, lo, hi)
        .map_err(at(|| format!("eigenvalue_asymptotics_check(lo={lo}, hi={hi})")))?;
    let (head, tail) = deviation_halves(&deviations);
    if let Some(p) = csv {
        let rows = deviations
            .iter()
            .map(|r| vec![r.n.to_string(), num(r.lambda_n), num(r.bs_norm_sq), num(r.deviation)]);
        write_csv(p, &["n", "lambda_n", "Bs_norm_sq", "deviation"], rows)?;
    }
    let summary = format!(
        "optimality: {} proxy spread {:.3}, trend {:.3}, {}; certificate {}; deviations n {lo}..{hi} mean {:.4} -> {:.4}",
        label(&spec),
        proxy.spread,
        proxy.trend_exponent,
        if proxy.certified { "rate not beaten" } else { "NOT certified" },
        certificate.as_ref().map(|c| format!("alpha {:.2}", c.alpha)).unwrap_or_else(|| "none".into()),
        head,
        tail
    );
    let report = OptimalityReport {
        system: spec,
        rate: m0,
        certificate,
        certificate_error,
        proxy,
        lower_bounds,
        deviation_window: [lo, hi],
        deviations,
        deviation_means: [head, tail],
    };
    write_json(json, &report)?;
    ok(summary)
}

fn diophantine(cfg: &ExperimentConfig, json: &Path) -> Result<Outcome, CliError> {
    let p = cfg.diophantine.clone().expect("validated");
    let cf = continued_fraction(&p.xi0, p.depth).map_err(at(|| format!("continued_fraction(xi0={}, depth={})", p.xi0, p.depth)))?;
    let stats = constant_type_check(&p.xi0, p.n_max, p.depth)
        .map_err(at(|| format!("constant_type_check(xi0={}, n_max={})", p.xi0, p.n_max)))?;
    let summary = format!(
        "diophantine: xi0={} c_est {:.6} at n={}, tail minimum {:.6}, quotients {:?}{}",
        p.xi0,
        stats.c_est,
        stats.argmin,
        stats.c_tail,
        &cf.quotients[..cf.quotients.len().min(8)],
        if stats.bounded_quotients { ", bounded" } else { "" }
    );
    let report = DiophantineReport {
        xi0: p.xi0.clone(),
        sine_bound_at_n_max: sine_coupling_lower_bound(stats.c_est, p.n_max),
        log_bound_at_n_max: log_coupling_lower_bound(p.n_max, p.epsilon),
        implied_rate: implied_pointwise_rate(stats.c_est),
        continued_fraction: cf,
        stats,
        epsilon: p.epsilon,
    };
    write_json(json, &report)?;
    ok(summary)
}

fn reproduce(cfg: &ExperimentConfig, json: &Path) -> Result<Outcome, CliError> {
    let name = cfg.recipe.clone().expect("validated");
    let recipe = recipes::find(&name).ok_or_else(|| {
        let known: Vec<String> = recipes::catalogue().into_iter().map(|r| r.name).collect();
        CliError::Validation(format!("unknown recipe `{name}` (known: {})", known.join(", ")))
    })?;
    let mut checks = Vec::new();
    for e in &recipe.expectations {
        let value = recipe.measure(&e.measurement).map_err(at(|| format!("{name}: {}", e.measurement.label())))?;
        checks.push(CheckResult {
            measurement: e.measurement.clone(),
            value,
            lo: e.lo,
            hi: e.hi,
            pass: (e.lo..=e.hi).contains(&value),
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    let parts: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{} {:.4} in [{}, {}] {}",
                c.measurement.label(),
                c.value,
                c.lo,
                c.hi,
                if c.pass { "PASS" } else { "FAIL" }
            )
        })
        .collect();
    write_json(json, &ReproduceReport { recipe: name.clone(), checks, pass })?;
    Ok(Outcome { summary: format!("reproduce {name}: {}", parts.join("; ")), check_failed: !pass })
}
