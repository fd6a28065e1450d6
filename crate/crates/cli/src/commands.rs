use std::collections::HashSet;
use std::path::PathBuf;

use serde_json::{json, Value};
use subrayleigh::analytic::{excitation_rate, visibility_closed_form, FringeKind, RateParams};
use subrayleigh::fit::{fit_fringe, fit_rate_vs_gain, fit_visibility_vs_gain, FitResult, FringePoint, GainPoint};
use subrayleigh::montecarlo::{exact_click_probabilities, simulate_counts, CountsRow, CHUNK_SHOTS};
use subrayleigh::pipeline::{
    dominant_harmonic, run_fringe_scan, uniform_phase_grid, visibility_of_scan, Backend, DetectorCombo, FringeScan,
    PipelineConfig, VisibilityMethod,
};
use subrayleigh::Error;

use crate::config::{OutputFormat, RunConfig};
use crate::error::{CliError, CliResult};
use crate::svg::{render, Series};
use crate::table::{fmt_num, fmt_opt, read_csv, write_atomic, CsvDoc, NumericTable};
use crate::{FitArgs, FitKind, Outcome, Quantity, RunArgs, SweepArgs, VERSION};

const SWEEP_SCAN_POINTS: usize = 64;

struct Targets {
    data: Option<PathBuf>,
    format: OutputFormat,
    svg: Option<PathBuf>,
}

fn targets(args: &RunArgs, config: &RunConfig) -> Targets {
    let spec = config.output.as_ref();
    let data = args.out.clone().or_else(|| spec.map(|o| PathBuf::from(&o.path)));
    let format = match (&args.out, spec) {
        (Some(p), _) if p.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
        (Some(_), _) => OutputFormat::Csv,
        (None, Some(o)) => o.format,
        (None, None) => OutputFormat::Csv,
    };
    let svg = args
        .svg
        .clone()
        .or_else(|| spec.and_then(|o| o.svg.as_ref().map(PathBuf::from)));
    Targets { data, format, svg }
}

fn path_json(p: &Option<PathBuf>) -> Value {
    p.as_ref().map_or(Value::Null, |p| json!(p.display().to_string()))
}

fn note(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        eprintln!("{}", msg.as_ref());
    }
}

/// Writes every prepared file; nothing is written if preparation failed.
fn write_all(files: &[(PathBuf, String)], quiet: bool) -> CliResult<()> {
    for (path, contents) in files {
        write_atomic(path, contents.as_bytes())?;
        note(quiet, format!("wrote {}", path.display()));
    }
    Ok(())
}

fn base_meta(doc: &mut CsvDoc, command: &str, config: &RunConfig, pipeline: &PipelineConfig) {
    doc.meta("generator", format!("subrayleigh {VERSION}"))
        .meta("command", command)
        .meta("config_hash", config.hash())
        .meta("backend", pipeline.backend.tag())
        .meta("wavelength_nm", pipeline.wavelength_nm);
}

/// Invalid-input failures of an optional diagnostic become `null`.
fn optional<T>(r: subrayleigh::Result<T>) -> CliResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::InvalidParameter(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn scan_json(scan: &FringeScan, config: &RunConfig) -> Value {
    json!({
        "generator": format!("subrayleigh {VERSION}"),
        "config_hash": config.hash(),
        "backend": scan.backend,
        "combo": scan.combo.label(),
        "fanout_factor": scan.fanout_factor,
        "points": scan.points.iter().map(|p| json!({"phi_rad": p.phi, "value": p.value, "stderr": p.stderr})).collect::<Vec<_>>(),
    })
}

pub fn fringe(args: &RunArgs, quiet: bool) -> CliResult<Outcome> {
    let config = RunConfig::load(&args.config)?;
    let pipeline = config.pipeline()?;
    let grid = config.grid()?;
    let combo = config.detectors.combo;
    let scan = run_fringe_scan(&pipeline, &grid, combo)?;
    let method = match pipeline.backend {
        Backend::MonteCarlo { .. } => VisibilityMethod::Fit,
        _ => VisibilityMethod::Extrema,
    };
    let visibility = optional(visibility_of_scan(&scan, method))?;
    let harmonic = optional(dominant_harmonic(&scan))?.flatten();

    let t = targets(args, &config);
    let mut files = Vec::new();
    if let Some(path) = &t.data {
        let contents = match t.format {
            OutputFormat::Json => format!("{}\n", scan_json(&scan, &config)),
            OutputFormat::Csv => {
                let mut doc = CsvDoc::new(&["phi_rad", "value", "stderr"]);
                base_meta(&mut doc, "fringe", &config, &pipeline);
                doc.meta("combo", combo.label())
                    .meta("fanout_factor", fmt_num(scan.fanout_factor));
                for p in &scan.points {
                    doc.row(vec![fmt_num(p.phi), fmt_num(p.value), fmt_opt(p.stderr)]);
                }
                doc.render()
            }
        };
        files.push((path.clone(), contents));
    }
    if let Some(path) = &t.svg {
        let series = Series {
            name: combo.label().to_string(),
            points: scan.points.iter().map(|p| (p.phi, p.value)).collect(),
        };
        files.push((
            path.clone(),
            render("Fringe scan", "phase (rad)", "coincidence signal", &[series]),
        ));
    }
    write_all(&files, quiet)?;
    Ok(Outcome {
        json: json!({
            "command": "fringe",
            "backend": pipeline.backend.tag(),
            "combo": combo.label(),
            "points": scan.points.len(),
            "visibility": visibility.map(|v| v.visibility),
            "visibility_stderr": visibility.and_then(|v| v.uncertainty),
            "harmonic": harmonic,
            "config_hash": config.hash(),
            "version": VERSION,
            "out": path_json(&t.data),
            "svg": path_json(&t.svg),
        }),
        exit: 0,
    })
}

pub fn gain_sweep(args: &SweepArgs, quiet: bool) -> CliResult<Outcome> {
    let config = RunConfig::load(&args.run.config)?;
    let pipeline = config.pipeline()?;
    if matches!(pipeline.backend, Backend::MonteCarlo { .. }) {
        return Err(CliError::Config("gain-sweep needs the gaussian or fock backend".into()));
    }
    let combo = match args.order {
        2 => DetectorCombo::D1A_D1B,
        3 => DetectorCombo::D1A_D1B_D1C,
        o => return Err(CliError::Config(format!("order must be 2 or 3, got {o}"))),
    };
    if !(args.alpha > 0.0) || !args.alpha.is_finite() {
        return Err(CliError::Config("alpha must be positive".into()));
    }
    let mut seen = HashSet::new();
    for g in &args.gains {
        if !(*g >= 0.0) || !g.is_finite() {
            return Err(CliError::Config(format!("gains must be finite and >= 0, got {g}")));
        }
        if !seen.insert(g.to_bits()) {
            return Err(CliError::Config(format!("gain {g} is listed twice")));
        }
    }
    let grid = uniform_phase_grid(SWEEP_SCAN_POINTS);
    let mut rows = Vec::with_capacity(args.gains.len());
    for &g in &args.gains {
        let mut c = pipeline;
        c.gain = args.alpha * g;
        c.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let scan = run_fringe_scan(&c, &grid, combo)?;
        let value = match args.quantity {
            Quantity::Visibility => visibility_of_scan(&scan, VisibilityMethod::Extrema)?.visibility,
            Quantity::Rate => scan.values().iter().sum::<f64>() / grid.len() as f64,
        };
        rows.push((g, c.gain.sinh().powi(2), value));
    }

    let quantity = match args.quantity {
        Quantity::Visibility => "visibility",
        Quantity::Rate => "rate",
    };
    let t = targets(&args.run, &config);
    let mut files = Vec::new();
    if let Some(path) = &t.data {
        let contents = match t.format {
            OutputFormat::Json => format!(
                "{}\n",
                json!({
                    "generator": format!("subrayleigh {VERSION}"),
                    "config_hash": config.hash(),
                    "quantity": quantity,
                    "order": args.order,
                    "alpha": args.alpha,
                    "rows": rows.iter().map(|r| json!({"g": r.0, "n_bar": r.1, "value": r.2})).collect::<Vec<_>>(),
                })
            ),
            OutputFormat::Csv => {
                let mut doc = CsvDoc::new(&["g", "n_bar", "value"]);
                base_meta(&mut doc, "gain-sweep", &config, &pipeline);
                doc.meta("quantity", quantity)
                    .meta("combo", combo.label())
                    .meta("alpha", fmt_num(args.alpha))
                    .meta("n_bar", "sinh^2(alpha * g)");
                if args.quantity == Quantity::Rate {
                    doc.meta(
                        "rate_scale",
                        format!(
                            "value is the phase-averaged moment; excitation rate = {} * sigma{} * value",
                            1u32 << args.order,
                            args.order
                        ),
                    );
                }
                for r in &rows {
                    doc.row(vec![fmt_num(r.0), fmt_num(r.1), fmt_num(r.2)]);
                }
                doc.render()
            }
        };
        files.push((path.clone(), contents));
    }
    if let Some(path) = &t.svg {
        let series = Series {
            name: format!("{quantity} ({})", combo.label()),
            points: rows.iter().map(|r| (r.0, r.2)).collect(),
        };
        files.push((path.clone(), render("Gain sweep", "gain g", quantity, &[series])));
    }
    write_all(&files, quiet)?;
    Ok(Outcome {
        json: json!({
            "command": "gain-sweep",
            "quantity": quantity,
            "order": args.order,
            "alpha": args.alpha,
            "combo": combo.label(),
            "gains": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
            "values": rows.iter().map(|r| r.2).collect::<Vec<_>>(),
            "config_hash": config.hash(),
            "version": VERSION,
            "out": path_json(&t.data),
            "svg": path_json(&t.svg),
        }),
        exit: 0,
    })
}

fn weights(table: &NumericTable, weighted: bool) -> CliResult<Vec<f64>> {
    if !weighted {
        return Ok(vec![1.0; table.rows.len()]);
    }
    if table.column("weight").is_some() {
        return table.required("weight");
    }
    if table.column("stderr").is_some() {
        let s = table.required("stderr")?;
        if s.iter().any(|v| !(*v > 0.0)) {
            return Err(CliError::Config("stderr must be positive for weighting".into()));
        }
        return Ok(s.iter().map(|v| 1.0 / (v * v)).collect());
    }
    Err(CliError::Config("--weighted needs a weight or stderr column".into()))
}

fn fit_json(kind: &str, r: &FitResult) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!("fit"));
    m.insert("kind".into(), json!(kind));
    let params: serde_json::Map<String, Value> = r
        .names
        .iter()
        .zip(&r.parameters)
        .map(|(n, v)| (n.clone(), json!(v)))
        .collect();
    let errs: serde_json::Map<String, Value> = r.names.iter().map(|n| (n.clone(), json!(r.stderr(n)))).collect();
    m.insert("parameters".into(), Value::Object(params));
    m.insert("stderr".into(), Value::Object(errs));
    m.insert("covariance".into(), json!(r.covariance));
    m.insert("residual_norm".into(), json!(r.residual_norm));
    m.insert("converged".into(), json!(r.converged));
    m.insert("iterations".into(), json!(r.iterations));
    m.insert("flags".into(), json!(r.flags));
    m
}

fn curve(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    (0..=200)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / 200.0;
            (x, f(x))
        })
        .collect()
}

pub fn fit(args: &FitArgs, quiet: bool) -> CliResult<Outcome> {
    let table = read_csv(&args.input)?;
    if table.rows.is_empty() {
        return Err(CliError::Config("input CSV has no data rows".into()));
    }
    let w = weights(&table, args.weighted)?;
    let (mut out, converged, plot) = match args.kind {
        FitKind::Fringe => {
            let phi = table.required("phi_rad")?;
            let value = table.required("value")?;
            let points: Vec<FringePoint> = phi
                .iter()
                .zip(&value)
                .zip(&w)
                .map(|((&phi, &value), &weight)| FringePoint { phi, value, weight })
                .collect();
            let f = fit_fringe(&points).map_err(fit_error)?;
            let mut m = fit_json("fringe", &f.result);
            m.insert("visibility".into(), json!(f.visibility));
            m.insert("visibility_stderr".into(), json!(f.visibility_stderr));
            m.insert("flat".into(), json!(f.flat));
            let (a, b, d) = (f.result.parameters[0], f.result.parameters[1], f.result.parameters[2]);
            let (lo, hi) = bounds(&phi);
            let model = curve(|x| a + b * (2.0 * x + d).cos(), lo, hi);
            (m, f.result.converged, (zip(&phi, &value), model, "phase (rad)"))
        }
        FitKind::VisibilityGain | FitKind::RateGain => {
            let g = table.required("g")?;
            let value = table.required("value")?;
            let points: Vec<GainPoint> = g
                .iter()
                .zip(&value)
                .zip(&w)
                .map(|((&g, &value), &weight)| GainPoint { g, value, weight })
                .collect();
            let (lo, hi) = bounds(&g);
            if args.kind == FitKind::VisibilityGain {
                let r = fit_visibility_vs_gain(&points).map_err(fit_error)?;
                let v = r.parameters[0];
                let model = curve(
                    |x| v * visibility_closed_form(FringeKind::SAME_2, x.sinh().powi(2)).unwrap_or(f64::NAN),
                    lo,
                    hi,
                );
                (
                    fit_json("visibility-gain", &r),
                    r.converged,
                    (zip(&g, &value), model, "gain g"),
                )
            } else {
                if args.order != 2 && args.order != 3 {
                    return Err(CliError::Config(format!("order must be 2 or 3, got {}", args.order)));
                }
                let r = fit_rate_vs_gain(&points, args.order).map_err(fit_error)?;
                let (alpha, sigma) = (r.parameters[0], r.parameters[1]);
                let order = args.order;
                let model = curve(
                    |x| {
                        let n = (alpha * x).sinh().powi(2);
                        let p = RateParams {
                            sigma2: sigma,
                            sigma3: sigma,
                            v_max: 1.0,
                            alpha,
                        };
                        excitation_rate(order, n, &p).unwrap_or(f64::NAN)
                    },
                    lo,
                    hi,
                );
                let mut m = fit_json("rate-gain", &r);
                m.insert("order".into(), json!(order));
                (m, r.converged, (zip(&g, &value), model, "gain g"))
            }
        }
    };
    out.insert("input".into(), json!(args.input.display().to_string()));
    out.insert("version".into(), json!(VERSION));
    let json = Value::Object(out);
    let mut files = Vec::new();
    if let Some(path) = &args.out {
        files.push((path.clone(), format!("{json}\n")));
    }
    if let Some(path) = &args.svg {
        let (data, model, x_label) = plot;
        let series = [
            Series {
                name: "data".into(),
                points: data,
            },
            Series {
                name: "model".into(),
                points: model,
            },
        ];
        files.push((path.clone(), render("Fit", x_label, "value", &series)));
    }
    write_all(&files, quiet)?;
    Ok(Outcome {
        json,
        exit: if converged { 0 } else { 4 },
    })
}

fn fit_error(e: Error) -> CliError {
    match e {
        Error::InvalidParameter(m) | Error::Unsupported(m) => CliError::Config(m),
        other => other.into(),
    }
}

fn zip(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    x.iter().copied().zip(y.iter().copied()).collect()
}

fn bounds(x: &[f64]) -> (f64, f64) {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

const COUNT_COLUMNS: [&str; 17] = [
    "phi_rad",
    "shots",
    "singles_1",
    "singles_2",
    "pairs",
    "same_pairs",
    "triples",
    "singles_1_rate",
    "singles_1_stderr",
    "singles_2_rate",
    "singles_2_stderr",
    "pair_rate",
    "pair_stderr",
    "same_pair_rate",
    "same_pair_stderr",
    "triple_rate",
    "triple_stderr",
];

fn counts_cells(r: &CountsRow) -> Vec<String> {
    let t = &r.tally;
    let mut cells = vec![
        fmt_num(r.phi),
        t.shots.to_string(),
        t.singles_1.to_string(),
        t.singles_2.to_string(),
        t.pairs.to_string(),
        t.same_pairs.to_string(),
        t.triples.to_string(),
    ];
    for count in [t.singles_1, t.singles_2, t.pairs, t.same_pairs, t.triples] {
        let (rate, err) = subrayleigh::montecarlo::binomial_rate(count, t.shots);
        cells.push(fmt_num(rate));
        cells.push(fmt_num(err));
    }
    cells
}

pub fn montecarlo(args: &RunArgs, quiet: bool) -> CliResult<Outcome> {
    let config = RunConfig::load(&args.config)?;
    let pipeline = config.pipeline()?;
    let (shots, seed) = match pipeline.backend {
        Backend::MonteCarlo { shots, seed } => (shots, seed),
        _ => return Err(CliError::Config("montecarlo needs the montecarlo backend".into())),
    };
    let grid = config.grid()?;
    let combo = config.detectors.combo;
    let table = simulate_counts(&pipeline, &grid, shots, seed)?;
    let scan = run_fringe_scan(&pipeline, &grid, combo)?;
    let visibility = optional(visibility_of_scan(&scan, VisibilityMethod::Fit))?;
    let mut exact_scan = scan.clone();
    for p in exact_scan.points.iter_mut() {
        p.value = exact_click_probabilities(&pipeline, p.phi)?.get(combo);
    }
    let exact = optional(visibility_of_scan(&exact_scan, VisibilityMethod::Fit))?;
    let harmonic = optional(dominant_harmonic(&scan))?.flatten();

    let t = targets(args, &config);
    let mut files = Vec::new();
    if let Some(path) = &t.data {
        let contents = match t.format {
            OutputFormat::Json => format!(
                "{}\n",
                json!({
                    "generator": format!("subrayleigh {VERSION}"),
                    "config_hash": config.hash(),
                    "rng": table.rng,
                    "stream_rule": table.stream_rule,
                    "chunk_shots": table.chunk_shots,
                    "seed": table.seed,
                    "rows": table.rows,
                })
            ),
            OutputFormat::Csv => {
                let mut doc = CsvDoc::new(&COUNT_COLUMNS);
                base_meta(&mut doc, "montecarlo", &config, &pipeline);
                doc.meta("rng", &table.rng)
                    .meta("stream_rule", &table.stream_rule)
                    .meta("chunk_shots", CHUNK_SHOTS)
                    .meta("seed", seed)
                    .meta(
                        "fanout",
                        "arm 1 feeds D1A, D1B, D1C with efficiency/3 each; arm 2 feeds D2",
                    );
                for r in &table.rows {
                    doc.row(counts_cells(r));
                }
                doc.render()
            }
        };
        files.push((path.clone(), contents));
    }
    if let Some(path) = &t.svg {
        let series = [
            Series {
                name: format!("{} simulated", combo.label()),
                points: scan.points.iter().map(|p| (p.phi, p.value)).collect(),
            },
            Series {
                name: format!("{} exact", combo.label()),
                points: exact_scan.points.iter().map(|p| (p.phi, p.value)).collect(),
            },
        ];
        files.push((
            path.clone(),
            render("Click probability", "phase (rad)", "per-pulse probability", &series),
        ));
    }
    write_all(&files, quiet)?;
    Ok(Outcome {
        json: json!({
            "command": "montecarlo",
            "combo": combo.label(),
            "shots": shots,
            "seed": seed,
            "points": grid.len(),
            "visibility": visibility.map(|v| v.visibility),
            "visibility_stderr": visibility.and_then(|v| v.uncertainty),
            "exact_visibility": exact.map(|v| v.visibility),
            "harmonic": harmonic,
            "rng": table.rng,
            "config_hash": config.hash(),
            "version": VERSION,
            "out": path_json(&t.data),
            "svg": path_json(&t.svg),
        }),
        exit: 0,
    })
}
