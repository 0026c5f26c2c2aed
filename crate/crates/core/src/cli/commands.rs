use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{Format, RunConfig};
use super::output::{sig9, Csv};
use crate::analysis::{
    maximize_over_kappa, optimize_kappa, sweep, OptimizationReport, OptimumKind, Route, SweepAxis,
};
use crate::analytic::{amplitudes_at, efficiency, output_spectrum_analytic};
use crate::error::{Error, Result};
use crate::model::{classify_regime, derive_rates, ghz, to_ghz, CavityRegime, Coupling};
use crate::numeric::{
    efficiency_numeric, integrate, integrate_to_long_time, output_spectrum_numeric,
    IntegrationConfig,
};
use crate::spectrum::uniform_axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Efficiency,
    Simulate,
    Sweep,
    Optimize,
    Spectrum,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Efficiency => "efficiency",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Optimize => "optimize",
            Command::Spectrum => "spectrum",
        }
    }
}

/// Rendered command result. `body` goes to the output file or stdout,
/// `meta` to the sidecar.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub body: String,
    pub meta: serde_json::Value,
    /// Some sweep points failed; the body still holds every row.
    pub partial_failure: bool,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<CommandOutput> {
    let (body, partial_failure) = match cmd {
        Command::Efficiency => (cmd_efficiency(cfg)?, false),
        Command::Simulate => (cmd_simulate(cfg)?, false),
        Command::Sweep => cmd_sweep(cfg)?,
        Command::Optimize => (cmd_optimize(cfg)?, false),
        Command::Spectrum => (cmd_spectrum(cfg)?, false),
    };
    let meta = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "config": cfg,
        "units": {
            "frequency": "GHz (linear, rate / 2pi)",
            "time": "ns",
            "rate": "1/ns",
            "spectral_density": "1/GHz",
        },
        "partial_failure": partial_failure,
    });
    Ok(CommandOutput {
        body,
        meta,
        partial_failure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub g0_ghz: f64,
    pub kappa_ghz: f64,
    pub gamma_ghz: f64,
    pub delta_ghz: f64,
    pub gamma0_ghz: Option<f64>,
    pub eta_q: f64,
    pub eta_c: f64,
    pub eta_extr: f64,
    /// `None` for a lossless emitter (unbounded cooperativity).
    pub c0: Option<f64>,
    pub coupling: Coupling,
    pub cavity: CavityRegime,
    pub law_kimble: f64,
    pub law_kimble_error: f64,
    pub purcell_factor: Option<f64>,
    pub f: Option<f64>,
    pub beta: Option<f64>,
    /// Integrated efficiency, reported only off resonance.
    pub eta_q_numeric: Option<f64>,
    pub fwhm_ps: Option<f64>,
}

pub fn efficiency_report(cfg: &RunConfig) -> Result<EfficiencyReport> {
    let p = cfg.params()?;
    let d = derive_rates(&p)?;
    let regime = classify_regime(&p, &d)?;
    let b = efficiency(&p)?;
    let eta_q_numeric = if p.delta != 0.0 {
        Some(efficiency_numeric(&p, &cfg.integration(&p)?)?)
    } else {
        None
    };
    let fwhm_ps = if p.delta == 0.0 {
        crate::analysis::pulse_metrics(&p)
            .ok()
            .map(|m| m.fwhm * 1e3)
    } else {
        None
    };
    Ok(EfficiencyReport {
        g0_ghz: to_ghz(p.g0),
        kappa_ghz: to_ghz(p.kappa),
        gamma_ghz: to_ghz(p.gamma),
        delta_ghz: to_ghz(p.delta),
        gamma0_ghz: p.gamma0.map(to_ghz),
        eta_q: b.eta_q,
        eta_c: b.eta_c,
        eta_extr: b.eta_extr,
        c0: d.c0.is_finite().then_some(d.c0),
        coupling: regime.coupling,
        cavity: regime.cavity,
        law_kimble: b.law_kimble,
        law_kimble_error: b.law_kimble_error,
        purcell_factor: d.purcell.map(|pf| pf.fp),
        f: d.purcell.map(|pf| pf.f),
        beta: d.purcell.map(|pf| pf.beta),
        eta_q_numeric,
        fwhm_ps,
    })
}

fn opt6(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

fn cmd_efficiency(cfg: &RunConfig) -> Result<String> {
    let r = efficiency_report(cfg)?;
    match cfg.format {
        Some(Format::Json) => Ok(serde_json::to_string_pretty(&r)? + "\n"),
        Some(Format::Csv) => {
            let mut csv = Csv::new(&[
                "g0_ghz",
                "kappa_ghz",
                "gamma_ghz",
                "delta_ghz",
                "eta_q",
                "eta_c",
                "eta_extr",
                "C0",
                "coupling",
                "cavity",
                "law_kimble",
                "law_kimble_error",
                "Fp",
                "f",
                "beta",
            ]);
            let opt = |v: Option<f64>| v.map_or_else(String::new, sig9);
            csv.row(&[
                sig9(r.g0_ghz),
                sig9(r.kappa_ghz),
                sig9(r.gamma_ghz),
                sig9(r.delta_ghz),
                sig9(r.eta_q),
                sig9(r.eta_c),
                sig9(r.eta_extr),
                r.c0.map_or_else(|| "inf".to_string(), sig9),
                r.coupling.to_string(),
                r.cavity.to_string(),
                sig9(r.law_kimble),
                sig9(r.law_kimble_error),
                opt(r.purcell_factor),
                opt(r.f),
                opt(r.beta),
            ]);
            Ok(csv.finish())
        }
        None => {
            let mut lines = vec![
                format!("eta_q={:.6}", r.eta_q),
                format!("eta_c={:.6}", r.eta_c),
                format!("eta_extr={:.6}", r.eta_extr),
                format!(
                    "C0={}",
                    r.c0.map_or_else(|| "inf".to_string(), |c| format!("{c:.6}"))
                ),
                format!("coupling={}", r.coupling),
                format!("cavity={}", r.cavity),
                format!("law_kimble={:.6}", r.law_kimble),
                format!("law_kimble_error={:.6}", r.law_kimble_error),
            ];
            if r.purcell_factor.is_some() {
                lines.push(format!("Fp={}", opt6(r.purcell_factor)));
                lines.push(format!("f={}", opt6(r.f)));
                lines.push(format!("beta={}", opt6(r.beta)));
            }
            if let Some(n) = r.eta_q_numeric {
                lines.push(format!("eta_q_numeric={n:.6}"));
            }
            if let Some(w) = r.fwhm_ps {
                lines.push(format!("fwhm_ps={w:.3}"));
            }
            Ok(lines.join("\n") + "\n")
        }
    }
}

/// Column-oriented trajectory, one array per CSV column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryTable {
    pub t_ns: Vec<f64>,
    #[serde(rename = "re_E")]
    pub re_e: Vec<f64>,
    #[serde(rename = "im_E")]
    pub im_e: Vec<f64>,
    #[serde(rename = "re_C")]
    pub re_c: Vec<f64>,
    #[serde(rename = "im_C")]
    pub im_c: Vec<f64>,
    #[serde(rename = "abs2_E")]
    pub abs2_e: Vec<f64>,
    #[serde(rename = "abs2_C")]
    pub abs2_c: Vec<f64>,
    #[serde(rename = "P_out")]
    pub p_out: Vec<f64>,
    #[serde(rename = "P_spont")]
    pub p_spont: Vec<f64>,
    pub n_rate: Vec<f64>,
    pub ledger_residual: Vec<f64>,
    #[serde(rename = "re_E_ref", skip_serializing_if = "Option::is_none", default)]
    pub re_e_ref: Option<Vec<f64>>,
    #[serde(rename = "im_E_ref", skip_serializing_if = "Option::is_none", default)]
    pub im_e_ref: Option<Vec<f64>>,
    #[serde(rename = "re_C_ref", skip_serializing_if = "Option::is_none", default)]
    pub re_c_ref: Option<Vec<f64>>,
    #[serde(rename = "im_C_ref", skip_serializing_if = "Option::is_none", default)]
    pub im_c_ref: Option<Vec<f64>>,
}

pub const TRAJECTORY_COLUMNS: &[&str] = &[
    "t_ns",
    "re_E",
    "im_E",
    "re_C",
    "im_C",
    "abs2_E",
    "abs2_C",
    "P_out",
    "P_spont",
    "n_rate",
    "ledger_residual",
];

pub fn trajectory_table(cfg: &RunConfig) -> Result<TrajectoryTable> {
    let p = cfg.params()?;
    if cfg.reference && p.delta != 0.0 {
        return Err(Error::OffResonance { delta: p.delta });
    }
    let traj = integrate(&p, &cfg.integration(&p)?)?;
    let n = traj.len();
    let mut t = TrajectoryTable {
        t_ns: traj.times.clone(),
        re_e: traj.e.iter().map(|z| z.re).collect(),
        im_e: traj.e.iter().map(|z| z.im).collect(),
        re_c: traj.c.iter().map(|z| z.re).collect(),
        im_c: traj.c.iter().map(|z| z.im).collect(),
        abs2_e: traj.e.iter().map(|z| z.norm_sqr()).collect(),
        abs2_c: traj.c.iter().map(|z| z.norm_sqr()).collect(),
        p_out: traj.p_out.clone(),
        p_spont: traj.p_spont.clone(),
        n_rate: (0..n).map(|i| traj.emission_rate(i)).collect(),
        ledger_residual: (0..n).map(|i| traj.ledger_residual(i)).collect(),
        re_e_ref: None,
        im_e_ref: None,
        re_c_ref: None,
        im_c_ref: None,
    };
    if cfg.reference {
        let refs = traj
            .times
            .iter()
            .map(|&s| amplitudes_at(&p, s))
            .collect::<Result<Vec<_>>>()?;
        t.re_e_ref = Some(refs.iter().map(|a| a.e.re).collect());
        t.im_e_ref = Some(refs.iter().map(|a| a.e.im).collect());
        t.re_c_ref = Some(refs.iter().map(|a| a.c.re).collect());
        t.im_c_ref = Some(refs.iter().map(|a| a.c.im).collect());
    }
    Ok(t)
}

fn cmd_simulate(cfg: &RunConfig) -> Result<String> {
    let t = trajectory_table(cfg)?;
    if cfg.format == Some(Format::Json) {
        return Ok(serde_json::to_string(&t)? + "\n");
    }
    let mut header = TRAJECTORY_COLUMNS.to_vec();
    if cfg.reference {
        header.extend(["re_E_ref", "im_E_ref", "re_C_ref", "im_C_ref"]);
    }
    let mut csv = Csv::new(&header);
    for i in 0..t.t_ns.len() {
        let mut row = vec![
            t.t_ns[i],
            t.re_e[i],
            t.im_e[i],
            t.re_c[i],
            t.im_c[i],
            t.abs2_e[i],
            t.abs2_c[i],
            t.p_out[i],
            t.p_spont[i],
            t.n_rate[i],
            t.ledger_residual[i],
        ];
        if let (Some(a), Some(b), Some(c), Some(d)) =
            (&t.re_e_ref, &t.im_e_ref, &t.re_c_ref, &t.im_c_ref)
        {
            row.extend([a[i], b[i], c[i], d[i]]);
        }
        let fields: Vec<String> = row.into_iter().map(sig9).collect();
        csv.row(&fields);
    }
    Ok(csv.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub eta_q: Option<f64>,
    pub fwhm_ns: Option<f64>,
    pub peak_time_ns: Option<f64>,
    pub regime: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub axis_unit: String,
    pub provenance: Route,
    pub rows: Vec<SweepRow>,
}

pub fn sweep_report(cfg: &RunConfig) -> Result<SweepReport> {
    let axis = cfg
        .sweep_axis
        .ok_or_else(|| Error::Config("missing required key `sweep_axis`".into()))?;
    // The swept key itself may be absent from the config.
    let mut base_cfg = cfg.clone();
    let placeholder = cfg.sweep_values.first().copied().unwrap_or(1.0);
    match axis {
        SweepAxis::G0 => {
            base_cfg.g0_ghz.get_or_insert(placeholder);
        }
        SweepAxis::Kappa => {
            base_cfg.kappa_ghz.get_or_insert(placeholder);
        }
        SweepAxis::Gamma => {
            base_cfg.gamma_ghz.get_or_insert(placeholder.max(0.0));
        }
        SweepAxis::Delta => {}
    }
    let base = base_cfg.params()?;
    let values: Vec<f64> = cfg.sweep_values.iter().map(|&v| ghz(v)).collect();
    let result = sweep(&base, axis, &values, cfg.route)?;
    let rows = result
        .points
        .iter()
        .zip(&cfg.sweep_values)
        .map(|(pt, &v)| SweepRow {
            axis_value: v,
            eta_q: pt.metrics.map(|m| m.eta_q),
            fwhm_ns: pt.metrics.map(|m| m.fwhm),
            peak_time_ns: pt.metrics.map(|m| m.peak_time),
            regime: pt.metrics.map(|m| m.regime.to_string()),
            error: pt.error.clone(),
        })
        .collect();
    Ok(SweepReport {
        axis,
        axis_unit: "GHz".into(),
        provenance: result.provenance,
        rows,
    })
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(String, bool)> {
    let r = sweep_report(cfg)?;
    let partial = r.rows.iter().any(|row| row.error.is_some());
    if cfg.format == Some(Format::Json) {
        return Ok((serde_json::to_string_pretty(&r)? + "\n", partial));
    }
    let opt = |v: Option<f64>| v.map_or_else(String::new, sig9);
    let mut csv = Csv::new(&[
        "axis_value",
        "eta_q",
        "fwhm_ns",
        "peak_time_ns",
        "regime",
        "error",
    ]);
    for row in &r.rows {
        csv.row(&[
            sig9(row.axis_value),
            opt(row.eta_q),
            opt(row.fwhm_ns),
            opt(row.peak_time_ns),
            row.regime.clone().unwrap_or_default(),
            row.error.clone().unwrap_or_default(),
        ]);
    }
    Ok((csv.finish(), partial))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub kappa_star_ghz: f64,
    pub eta_q_star: f64,
    pub iterations: usize,
    pub kind: OptimumKind,
    pub kappa_lo_ghz: f64,
    pub kappa_hi_ghz: f64,
    pub route: Route,
}

pub fn optimize_report(cfg: &RunConfig) -> Result<OptimizeReport> {
    let (g0, gamma) = cfg.emitter()?;
    let bracket = (ghz(cfg.kappa_lo_ghz), ghz(cfg.kappa_hi_ghz));
    let delta = ghz(cfg.delta_ghz);
    let (report, route): (OptimizationReport, Route) =
        if delta == 0.0 && cfg.route == Route::Analytic {
            (optimize_kappa(g0, gamma, bracket)?, Route::Analytic)
        } else {
            let objective = |kappa: f64| {
                let mut probe = cfg.clone();
                probe.kappa_ghz = Some(to_ghz(kappa));
                let p = probe.params()?;
                efficiency_numeric(&p, &IntegrationConfig::for_params(&p))
            };
            (maximize_over_kappa(bracket, objective)?, Route::Numeric)
        };
    Ok(OptimizeReport {
        kappa_star_ghz: to_ghz(report.kappa_star),
        eta_q_star: report.eta_q_star,
        iterations: report.iterations,
        kind: report.kind,
        kappa_lo_ghz: cfg.kappa_lo_ghz,
        kappa_hi_ghz: cfg.kappa_hi_ghz,
        route,
    })
}

fn cmd_optimize(cfg: &RunConfig) -> Result<String> {
    let r = optimize_report(cfg)?;
    if cfg.format == Some(Format::Json) {
        return Ok(serde_json::to_string_pretty(&r)? + "\n");
    }
    let mut csv = Csv::new(&[
        "kappa_star_ghz",
        "eta_q_star",
        "iterations",
        "kind",
        "kappa_lo_ghz",
        "kappa_hi_ghz",
    ]);
    csv.row(&[
        sig9(r.kappa_star_ghz),
        sig9(r.eta_q_star),
        r.iterations.to_string(),
        format!("{:?}", r.kind),
        sig9(r.kappa_lo_ghz),
        sig9(r.kappa_hi_ghz),
    ]);
    Ok(csv.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub route: Route,
    pub delta_ghz: Vec<f64>,
    /// Spectral density per GHz of linear detuning.
    #[serde(rename = "S")]
    pub s: Vec<f64>,
}

pub fn spectrum_report(cfg: &RunConfig) -> Result<SpectrumReport> {
    let p = cfg.params()?;
    let span = 20.0 * to_ghz(p.total_damping());
    let lo = cfg.delta_min_ghz.unwrap_or(-span);
    let hi = cfg.delta_max_ghz.unwrap_or(span);
    let axis_ghz = uniform_axis(lo, hi, cfg.delta_points)?;
    let axis: Vec<f64> = axis_ghz.iter().map(|&d| ghz(d)).collect();
    let (grid, route) = if p.delta == 0.0 && cfg.route == Route::Analytic {
        (output_spectrum_analytic(&p, &axis)?, Route::Analytic)
    } else {
        let traj = integrate_to_long_time(&p, &cfg.integration(&p)?)?;
        (output_spectrum_numeric(&traj, &axis)?, Route::Numeric)
    };
    Ok(SpectrumReport {
        route,
        delta_ghz: axis_ghz,
        s: grid.density.iter().map(|s| s * TAU).collect(),
    })
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<String> {
    let r = spectrum_report(cfg)?;
    if cfg.format == Some(Format::Json) {
        return Ok(serde_json::to_string(&r)? + "\n");
    }
    let mut csv = Csv::new(&["delta_ghz", "S"]);
    for (d, s) in r.delta_ghz.iter().zip(&r.s) {
        csv.row(&[sig9(*d), sig9(*s)]);
    }
    Ok(csv.finish())
}
