use std::f64::consts::PI;

use exceptional::ep_finder::{
    coalescence_residual, find_oscillator_ep, monodromy_loop, track_branches, tune_g_for_real_f, EpError,
    ExceptionalPoint, MatrixFamily, NewtonOptions, OscillatorFamily, TwoLevelFamily,
};
use exceptional::linalg::defect_report;
use exceptional::oscillator::{
    amplitude_ratio_forms, ep_amplitude_ratio, frequency_sweep, FrequencyConvention, OscillatorParams,
};
use exceptional::two_level::{
    build_h, ep_eigenvector_left, ep_eigenvector_right, ep_locations, real_spectrum_window, self_orthogonality, Branch,
    TwoLevelSystem,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{required, Model, RunConfig};
use crate::error::CliError;
use crate::output::{complex, complex_vec, Cell, Output, Table};

const DEFAULT_SAMPLES: usize = 1001;
const DEFAULT_G_RANGE: (f64, f64) = (1e-5, 0.02);
const DEFAULT_G_SAMPLES: usize = 60;
const DEFAULT_LOOP_STEPS: usize = 256;
const I: Complex64 = Complex64::new(0.0, 1.0);

fn two_level_system(cfg: &RunConfig) -> Result<TwoLevelSystem, CliError> {
    let deg = PI / 180.0;
    Ok(TwoLevelSystem::new(
        cfg.complex("eps1")?,
        cfg.complex("eps2")?,
        cfg.complex("omega1")?,
        cfg.complex("omega2")?,
        cfg.complex("phi1")? * deg,
        cfg.complex("phi2")? * deg,
    ))
}

fn oscillator_params(cfg: &RunConfig, f: f64, g: f64) -> Result<OscillatorParams, CliError> {
    let p = OscillatorParams::new(
        cfg.real("omega1")?,
        cfg.real("omega2")?,
        cfg.real("k1")?,
        cfg.real("k2")?,
        f,
        g,
    );
    p.validate()?;
    Ok(p)
}

fn param_meta(cfg: &RunConfig) -> Vec<(String, Value)> {
    let mut meta = vec![(
        "model".to_string(),
        json!(match cfg.model {
            Some(Model::TwoLevel) => "two-level",
            _ => "oscillator",
        }),
    )];
    for (k, v) in &cfg.params {
        let value = if v.0.im == 0.0 { json!(v.0.re) } else { complex(v.0) };
        meta.push((format!("param.{k}"), value));
    }
    meta
}

/// Evenly spaced grid with exact end points; one sample needs `from == to`.
fn grid(from: f64, to: f64, samples: usize) -> Result<Vec<f64>, CliError> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::Config("sweep range must be finite".into()));
    }
    match samples {
        0 => Err(CliError::Config("samples must be positive".into())),
        1 if from == to => Ok(vec![from]),
        1 => Err(CliError::Config("a single sample needs from == to".into())),
        n => Ok((0..n)
            .map(|k| {
                if k == n - 1 {
                    to
                } else {
                    from + (to - from) * k as f64 / (n - 1) as f64
                }
            })
            .collect()),
    }
}

pub fn twolevel_sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let sys = two_level_system(cfg)?;
    let from = required(cfg.sweep.from, "sweep.from (lambda range)")?;
    let to = required(cfg.sweep.to, "sweep.to (lambda range)")?;
    let samples = cfg.sweep.samples.unwrap_or(DEFAULT_SAMPLES);
    grid(from, to, samples.max(2))?;
    let window = real_spectrum_window(&sys, (from, to), samples)?;
    let eps = ep_locations(&sys)?;

    let mut meta = param_meta(cfg);
    for b in [Branch::Plus, Branch::Minus] {
        let tag = if b == Branch::Plus { "plus" } else { "minus" };
        meta.push((format!("ep_{tag}.lambda"), complex(eps.lambda(b))));
        meta.push((format!("ep_{tag}.energy"), complex(eps.energy(b))));
    }
    meta.push(("ep_both_real".into(), json!(eps.both_real)));
    let rows = window
        .iter()
        .map(|w| {
            vec![
                Cell::Num(w.lambda),
                Cell::Num(w.e1.re),
                Cell::Num(w.e1.im),
                Cell::Num(w.e2.re),
                Cell::Num(w.e2.im),
                Cell::Bool(w.is_real_pair),
            ]
        })
        .collect();
    Ok(Output::Table(Table {
        meta,
        columns: ["lambda", "re_E1", "im_E1", "re_E2", "im_E2", "is_real_pair"]
            .map(String::from)
            .to_vec(),
        rows,
    }))
}

pub fn twolevel_ep(cfg: &RunConfig) -> Result<Output, CliError> {
    let sys = two_level_system(cfg)?;
    let eps = ep_locations(&sys)?;
    let fam = TwoLevelFamily::new(sys)?;
    let mut record = serde_json::Map::new();
    for b in [Branch::Plus, Branch::Minus] {
        let (lambda, energy) = (eps.lambda(b), eps.energy(b));
        let res = coalescence_residual(&fam, &[lambda], energy);
        let defect = defect_report(&build_h(&sys, lambda)?, energy).map_err(EpError::from)?;
        let tag = if b == Branch::Plus { "plus" } else { "minus" };
        record.insert(
            tag.into(),
            json!({
                "lambda": complex(lambda),
                "energy": complex(energy),
                "right_eigenvector": complex_vec(&ep_eigenvector_right(&sys, b)?),
                "left_eigenvector": complex_vec(&ep_eigenvector_left(&sys, b)?),
                "self_orthogonality": self_orthogonality(&sys, b)?,
                "residuals": { "det": res.det_normalized, "deriv": res.deriv_normalized },
                "defect": defect_json(&defect),
            }),
        );
    }
    record.insert("both_real".into(), json!(eps.both_real));
    Ok(Output::Record(Value::Object(record)))
}

fn defect_json(d: &exceptional::linalg::DefectReport) -> Value {
    json!({
        "algebraic_multiplicity": d.algebraic_multiplicity,
        "geometric_multiplicity": d.geometric_multiplicity,
        "jordan_residual": d.jordan_residual,
        "is_defective": d.is_defective,
    })
}

pub fn osc_sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let variable = required(cfg.sweep.variable.clone(), "sweep.variable (f or g)")?;
    let index = match variable.as_str() {
        "f" => 0,
        "g" => 1,
        other => {
            return Err(CliError::Config(format!(
                "sweep.variable must be f or g, got {other:?}"
            )))
        }
    };
    let other = ["f", "g"][1 - index];
    let fixed = cfg.real(other)?;
    let base = oscillator_params(cfg, 0.0, 0.0)?;
    let from = required(cfg.sweep.from, "sweep.from")?;
    let to = required(cfg.sweep.to, "sweep.to")?;
    let values = grid(from, to, cfg.sweep.samples.unwrap_or(DEFAULT_SAMPLES))?;

    let path: Vec<Vec<Complex64>> = values
        .iter()
        .map(|&v| {
            let mut p = vec![Complex64::new(fixed, 0.0); 2];
            p[index] = Complex64::new(v, 0.0);
            p
        })
        .collect();
    let track = track_branches(&OscillatorFamily::new(base), &path).map_err(|e| match e {
        EpError::TrackingAmbiguous { at } => CliError::Numerical(format!(
            "branch tracking ambiguous near {variable} = {}",
            at.get(index).map_or(f64::NAN, |z| z.re)
        )),
        e => e.into(),
    })?;

    let mut meta = param_meta(cfg);
    meta.push(("sweep_variable".into(), json!(variable)));
    meta.push((
        "frequency_convention".into(),
        json!("physical (damped modes have Im < 0)"),
    ));
    let mut columns = vec!["sweep_value".to_string()];
    columns.extend((1..=4).map(|k| format!("re_E{k}")));
    columns.extend((1..=4).map(|k| format!("im_E{k}")));
    let rows = values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            // physical frequency w = i x for an eigenvalue x of M
            let w: Vec<Complex64> = track.branches.iter().map(|b| I * b[k]).collect();
            let mut row = vec![Cell::Num(v)];
            row.extend(w.iter().map(|z| Cell::Num(z.re)));
            row.extend(w.iter().map(|z| Cell::Num(z.im)));
            row
        })
        .collect();
    Ok(Output::Table(Table { meta, columns, rows }))
}

pub fn osc_response(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = oscillator_params(cfg, cfg.real("f")?, cfg.real("g")?)?;
    let c1 = required(cfg.drive.c1, "drive.c1")?.0;
    let c2 = required(cfg.drive.c2, "drive.c2")?.0;
    if c1 == Complex64::new(0.0, 0.0) && c2 == Complex64::new(0.0, 0.0) {
        return Err(CliError::Config("degenerate drive: c1 = c2 = 0".into()));
    }
    let from = required(cfg.drive.from, "drive.from (omega range)")?;
    let to = required(cfg.drive.to, "drive.to (omega range)")?;
    let samples = cfg.drive.samples.unwrap_or(DEFAULT_SAMPLES);
    grid(from, to, samples.max(2))?;
    let sweep = frequency_sweep(&params, c1, c2, (from, to), samples, FrequencyConvention::Physical)?;

    let mut meta = param_meta(cfg);
    meta.push(("drive.c1".into(), complex(c1)));
    meta.push(("drive.c2".into(), complex(c2)));
    meta.push((
        "phase_diff".into(),
        json!("arg(q1/q2), degrees, unwrapped along the sweep"),
    ));
    let rows = sweep
        .iter()
        .map(|s| {
            vec![
                Cell::Num(s.omega),
                Cell::Num(s.abs_q1),
                Cell::Num(s.abs_q2),
                Cell::Num(s.arg_q1.to_degrees()),
                Cell::Num(s.arg_q2.to_degrees()),
                Cell::Num(s.phase_diff.to_degrees()),
            ]
        })
        .collect();
    Ok(Output::Table(Table {
        meta,
        columns: [
            "omega",
            "abs_q1",
            "abs_q2",
            "phase_q1_deg",
            "phase_q2_deg",
            "phase_diff_deg",
        ]
        .map(String::from)
        .to_vec(),
        rows,
    }))
}

pub fn osc_find_ep(cfg: &RunConfig) -> Result<Output, CliError> {
    let base = oscillator_params(cfg, 0.0, 0.0)?;
    let opts = NewtonOptions::default();
    let s = &cfg.search;
    let mut quintic = None;
    let ep = match (s.seed_f, s.seed_g) {
        (Some(f), Some(g)) => find_oscillator_ep(&base, f, g, &opts)?,
        (None, None) if base.is_symmetric() => {
            // only genuine degeneracies exist; Newton from the uncoupled point reports it
            find_oscillator_ep(&base, 0.0, 0.0, &opts)?
        }
        (None, None) => {
            let range = (
                s.g_from.unwrap_or(DEFAULT_G_RANGE.0),
                s.g_to.unwrap_or(DEFAULT_G_RANGE.1),
            );
            let hits = tune_g_for_real_f(&base, range, s.g_samples.unwrap_or(DEFAULT_G_SAMPLES))?;
            let hit = hits.iter().find(|h| h.tuned).ok_or_else(|| {
                CliError::NoConvergence(format!("no EP at real f for g in [{}, {}]", range.0, range.1))
            })?;
            let ep = find_oscillator_ep(&base, hit.f, hit.g, &opts)?;
            quintic = Some(json!({
                "f": hit.f,
                "g": hit.g,
                "omega_ep": complex(hit.omega),
                "newton_difference": {
                    "f": (ep.params[0].re - hit.f).abs(),
                    "omega": (-ep.frequency - hit.omega).norm(),
                },
            }));
            ep
        }
        _ => {
            return Err(CliError::Config(
                "give both search.seed_f and search.seed_g, or neither".into(),
            ))
        }
    };
    Ok(Output::Record(oscillator_ep_record(&base, &ep, quintic)?))
}

/// `quintic` is only present when the search went through the tuned scan.
fn oscillator_ep_record(
    base: &OscillatorParams,
    ep: &ExceptionalPoint,
    quintic: Option<Value>,
) -> Result<Value, CliError> {
    let (f, g) = (ep.params[0].re, ep.params[1].re);
    let params = base.with_coupling(f, g);
    let omega = -ep.frequency;
    let ratio = ep_amplitude_ratio(&params, omega)?;
    let (first, second) = amplitude_ratio_forms(&params, omega);
    let v = &ep.eigenvector;
    let mut rec = json!({
        "params": { "f": f, "g": g },
        "omega_ep": { "raw": complex(ep.frequency), "normalized": complex(omega) },
        "residuals": {
            "det": ep.det_residual,
            "deriv": ep.deriv_residual,
            "self_pairing": ep.self_pairing,
        },
        "eigenvalue": complex(ep.eigenvalue),
        "eigenvector": complex_vec(v),
        "left_eigenvector": complex_vec(&ep.left_eigenvector),
        "amplitude_ratio": {
            "value": complex(ratio),
            "first_form": complex(first),
            "second_form": complex(second),
            "null_vector": complex(v[2] / v[3]),
        },
        "defect": defect_json(&ep.defect),
        "iterations": ep.iterations,
    });
    if let Some(q) = quintic {
        rec["quintic"] = q;
    }
    Ok(rec)
}

pub fn run_loop(cfg: &RunConfig) -> Result<Output, CliError> {
    let l = &cfg.loop_;
    let center = required(l.center, "loop.center")?.0;
    let radius = required(l.radius, "loop.radius")?;
    let steps = l.steps.unwrap_or(DEFAULT_LOOP_STEPS);
    let param = l.param.clone();
    let result = match cfg.model {
        Some(Model::TwoLevel) => {
            if param.as_deref().is_some_and(|p| p != "lambda") {
                return Err(CliError::Config("two-level loops run in lambda".into()));
            }
            let fam = TwoLevelFamily::new(two_level_system(cfg)?)?;
            loop_in(&fam, &[center], 0, center, radius, steps)?
        }
        Some(Model::Oscillator) => {
            let index = match required(param.clone(), "loop.param (f or g)")?.as_str() {
                "f" => 0,
                "g" => 1,
                p => return Err(CliError::Config(format!("loop.param must be f or g, got {p:?}"))),
            };
            let base = oscillator_params(cfg, cfg.real_or("f", 0.0)?, cfg.real_or("g", 0.0)?)?;
            let fam = OscillatorFamily::new(base);
            loop_in(&fam, &OscillatorFamily::params_of(&base), index, center, radius, steps)?
        }
        None => {
            return Err(CliError::Config(
                "loop needs a model (--model or \"model\" in the config)".into(),
            ))
        }
    };
    Ok(Output::Record(result))
}

fn loop_in<F: MatrixFamily>(
    fam: &F,
    base: &[Complex64],
    index: usize,
    center: Complex64,
    radius: f64,
    steps: usize,
) -> Result<Value, CliError> {
    let r = monodromy_loop(fam, base, index, center, radius, steps).map_err(|e| match e {
        EpError::TrackingAmbiguous { at } => CliError::Numerical(format!(
            "loop passes through or too close to an EP near {}",
            at.get(index).copied().unwrap_or(center)
        )),
        e => e.into(),
    })?;
    Ok(json!({
        "param": fam.param_names()[index],
        "center": complex(center),
        "radius": radius,
        "steps": steps,
        "permutation": r.permutation,
        "loops_to_restore_eigenvalues": r.loops_to_restore_eigenvalues,
        "loops_to_restore_eigenvector": r.loops_to_restore_eigenvector,
        "accumulated_phase": complex(r.accumulated_phase),
        "start_eigenvalues": complex_vec(&r.start_eigenvalues),
    }))
}
