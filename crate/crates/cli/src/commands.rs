use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use spinstar::closed_form::{
    amplitudes, ladder_optimal_time, ladder_success_probability, optimal_times, pair_concurrence,
    success_probability, survival_probability, timing_robustness, w_like_state,
};
use spinstar::entanglement::{reduced_pair_density, wootters_concurrence};
use spinstar::estimation::{
    estimate_coupling_ratios, fit_collective_coupling, simulate_ratio_sampling,
    simulate_survival_sampling, FitOptions, ProbabilitySeries,
};
use spinstar::measurement::{
    ladder_coupling, simulate_trajectories, LadderProtocol, RngStream, WLikeProtocol,
};
use spinstar::model::{make_params, params_from_reader, rabi_frequency};
use spinstar::{Error, SectorPropagator, SectorState, SpinStarParams, TrajectoryRecord};

use crate::config::{
    resolve, Cli, Command, ConcurrenceArgs, ConfigFile, EstimateArgs, Format, LadderArgs,
    RobustnessArgs, SimulateArgs, WstateArgs, DEFAULT_SEED,
};
use crate::error::CliError;
use crate::output::{num, Sink};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli
        .config
        .as_deref()
        .map(ConfigFile::load)
        .transpose()?
        .unwrap_or_default();
    let path = cli.config.as_deref();
    match cli.command {
        Command::Simulate(a) => simulate(resolve(a, config.simulate, path)),
        Command::Wstate(a) => wstate(resolve(a, config.wstate, path)),
        Command::Ladder(a) => ladder(resolve(a, config.ladder, path)),
        Command::Concurrence(a) => concurrence(resolve(a, config.concurrence, path)),
        Command::Estimate(a) => estimate(resolve(a, config.estimate, path)),
        Command::Robustness(a) => robustness(resolve(a, config.robustness, path)),
    }
}

fn load_params(path: Option<&Path>) -> Result<SpinStarParams, CliError> {
    let path = path.ok_or_else(|| CliError::Usage("--params is required".into()))?;
    let file = File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open params file {}: {e}", path.display())))?;
    Ok(params_from_reader(file)?)
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(CliError::Usage(format!(
            "grid needs finite min < max, got [{lo}, {hi}]"
        )));
    }
    if points < 2 {
        return Err(CliError::Usage(format!(
            "grid needs at least 2 points, got {points}"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            if k + 1 == points {
                hi
            } else {
                lo + step * k as f64
            }
        })
        .collect())
}

/// Numeric table as versioned CSV or as JSON lines; `footer` goes into
/// trailing `#` lines (CSV) or a final object (JSON).
fn emit_table(
    sink: &mut Sink,
    format: Format,
    command: &str,
    columns: &[String],
    rows: &[Vec<f64>],
    footer: &[(&str, f64)],
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            sink.csv_header(command, columns)?;
            for r in rows {
                sink.csv_row(r)?;
            }
            for (k, v) in footer {
                sink.comment(k, &num(*v))?;
            }
        }
        Format::Json => {
            for r in rows {
                let obj: Map<String, Value> = columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(|&v| json!(v)))
                    .collect();
                sink.json_line(&obj)?;
            }
            if !footer.is_empty() {
                let obj: Map<String, Value> = footer
                    .iter()
                    .map(|(k, v)| (k.to_string(), json!(v)))
                    .collect();
                sink.json_line(&obj)?;
            }
        }
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let p = load_params(a.params.as_deref())?;
    let times = grid(
        a.t_min.unwrap_or(0.0),
        a.t_max.unwrap_or(10.0),
        a.points.unwrap_or(101),
    )?;
    let n = p.n_spins();
    let oracle = if a.with_oracle {
        Some((
            SectorPropagator::for_params(&p, 0)?,
            SectorState::ground(n)?,
        ))
    } else {
        None
    };

    let mut columns: Vec<String> = ["t", "re_a", "im_a", "p_success", "p_survival"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    columns.extend((1..=n).map(|j| format!("abs_b{j}")));
    if oracle.is_some() {
        columns.push("oracle_re_a".into());
        columns.push("oracle_im_a".into());
        columns.extend((1..=n).map(|j| format!("oracle_abs_b{j}")));
    }

    let mut worst: f64 = 0.0;
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let cf = amplitudes(&p, t);
        let mut row = vec![
            t,
            cf.a.re,
            cf.a.im,
            success_probability(&p, t),
            survival_probability(&p, t),
        ];
        row.extend(cf.b.iter().map(|b| b.norm()));
        if let Some((prop, s0)) = &oracle {
            let s = prop.evolve(s0, t)?;
            let z = s.amplitudes();
            row.push(z[0].re);
            row.push(z[0].im);
            row.extend(z[1..].iter().map(|b| b.norm()));
            worst = worst.max((z[0] - cf.a).norm());
            for (x, y) in z[1..].iter().zip(&cf.b) {
                worst = worst.max((x - y).norm());
            }
        }
        rows.push(row);
    }
    let footer: Vec<(&str, f64)> = if oracle.is_some() {
        vec![("max_abs_deviation", worst)]
    } else {
        Vec::new()
    };
    let mut sink = Sink::open(a.output.as_deref())?;
    emit_table(
        &mut sink,
        a.format.unwrap_or(Format::Csv),
        "simulate",
        &columns,
        &rows,
        &footer,
    )?;
    Ok(sink.finish()?)
}

/// Per-trajectory rows (CSV) or records (JSON lines), then the summary.
fn emit_trajectories(
    sink: &mut Sink,
    format: Format,
    command: &str,
    records: &[TrajectoryRecord],
    summary: Value,
    summary_only: bool,
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            if !summary_only {
                for r in records {
                    sink.json_line(&r.to_json())?;
                }
            }
            sink.json_line(&summary)?;
        }
        Format::Csv => {
            let cols: Vec<String> = [
                "seed",
                "stream",
                "step",
                "time",
                "outcome",
                "probability",
                "succeeded",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            sink.csv_header(command, &cols)?;
            if !summary_only {
                for r in records {
                    for (k, s) in r.steps.iter().enumerate() {
                        sink.csv_cells(&[
                            r.seed.to_string(),
                            r.stream.to_string(),
                            (k + 1).to_string(),
                            num(s.time),
                            s.outcome.to_string(),
                            num(s.probability),
                            r.succeeded.to_string(),
                        ])?;
                    }
                }
            }
            if let Value::Object(m) = summary {
                for (k, v) in m {
                    sink.comment(&k, &v.to_string())?;
                }
            }
        }
    }
    Ok(())
}

fn wstate(a: WstateArgs) -> Result<(), CliError> {
    let p = load_params(a.params.as_deref())?;
    let time = match a.time {
        Some(t) => t,
        None => optimal_times(&p, a.n.unwrap_or(0))?,
    };
    let count = a.trajectories.unwrap_or(1000);
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let proto = WLikeProtocol::new(&p, time)?;
    let records = simulate_trajectories(&proto, seed, count)?;

    let successes = records.iter().filter(|r| r.succeeded).count() as u64;
    let predicted = success_probability(&p, time);
    let w = w_like_state(&p)?;
    let min_fidelity = records
        .iter()
        .filter(|r| r.succeeded)
        .map(|r| w.fidelity(r.final_state.amplitudes()))
        .reduce(f64::min);
    let summary = json!({
        "summary": true,
        "command": "wstate",
        "seed": seed,
        "rng": RngStream::ALGORITHM,
        "measure_time": time,
        "trajectories": count,
        "successes": successes,
        "empirical_rate": rate(successes, count),
        "predicted_rate": predicted,
        "binomial_sigma": sigma(predicted, count),
        "min_w_like_fidelity": min_fidelity,
    });
    let mut sink = Sink::open(a.output.as_deref())?;
    emit_trajectories(
        &mut sink,
        a.format.unwrap_or(Format::Json),
        "wstate",
        &records,
        summary,
        a.summary_only,
    )?;
    Ok(sink.finish()?)
}

fn rate(hits: u64, count: u64) -> Option<f64> {
    (count > 0).then(|| hits as f64 / count as f64)
}

fn sigma(p: f64, count: u64) -> Option<f64> {
    (count > 0).then(|| (p * (1.0 - p) / count as f64).sqrt())
}

fn ladder(a: LadderArgs) -> Result<(), CliError> {
    let p = load_params(a.params.as_deref())?;
    let alpha = ladder_coupling(&p)?;
    let n = p.n_spins();
    let k =
        a.k.ok_or_else(|| CliError::Usage("--k is required".into()))?;
    if k == 0 || k > n {
        return Err(Error::LadderStep { step: k, n }.into());
    }
    let schedule = match a.schedule {
        Some(s) => s,
        None => (1..=k)
            .map(|i| ladder_optimal_time(n, i, alpha, a.n.unwrap_or(0)))
            .collect::<Result<Vec<f64>, _>>()?,
    };
    if schedule.len() != k {
        return Err(Error::ScheduleLength {
            expected: k,
            found: schedule.len(),
        }
        .into());
    }
    let count = a.trajectories.unwrap_or(1000);
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let proto = LadderProtocol::new(n, alpha, &schedule)?;
    let records = simulate_trajectories(&proto, seed, count)?;
    let successes = records.iter().filter(|r| r.succeeded).count() as u64;
    let predicted = ladder_success_probability(n, alpha, &schedule)?;
    let target = proto.target_state();
    let j = n as f64 / 2.0;
    let summary = json!({
        "summary": true,
        "command": "ladder",
        "seed": seed,
        "rng": RngStream::ALGORITHM,
        "alpha": alpha,
        "k": k,
        "schedule": schedule,
        "trajectories": count,
        "successes": successes,
        "empirical_rate": rate(successes, count),
        "predicted_rate": predicted,
        "binomial_sigma": sigma(predicted, count),
        "final_j2": target.map(|s| s.expectation_j2()),
        "final_jz": target.map(|s| s.expectation_jz()),
        "expected_j2": j * (j + 1.0),
        "expected_jz": k as f64 - j,
    });
    let mut sink = Sink::open(a.output.as_deref())?;
    emit_trajectories(
        &mut sink,
        a.format.unwrap_or(Format::Json),
        "ladder",
        &records,
        summary,
        a.summary_only,
    )?;
    Ok(sink.finish()?)
}

fn concurrence(a: ConcurrenceArgs) -> Result<(), CliError> {
    let p = load_params(a.params.as_deref())?;
    let i =
        a.i.ok_or_else(|| CliError::Usage("--i is required".into()))?;
    let j =
        a.j.ok_or_else(|| CliError::Usage("--j is required".into()))?;
    let times = grid(
        a.t_min.unwrap_or(0.0),
        a.t_max.unwrap_or(10.0),
        a.points.unwrap_or(200),
    )?;
    // validates the pair before any work
    pair_concurrence(&p, i, j, 0.0)?;
    let prop = SectorPropagator::for_params(&p, 0)?;
    let s0 = SectorState::ground(p.n_spins())?;
    let mut rows = Vec::with_capacity(times.len());
    let mut worst: f64 = 0.0;
    for &t in &times {
        let closed = pair_concurrence(&p, i, j, t)?;
        let oracle = wootters_concurrence(&reduced_pair_density(&prop.evolve(&s0, t)?, i, j)?);
        let diff = (closed - oracle).abs();
        worst = worst.max(diff);
        rows.push(vec![t, closed, oracle, diff]);
    }
    let columns: Vec<String> = ["t", "closed", "oracle", "abs_diff"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut sink = Sink::open(a.output.as_deref())?;
    emit_table(
        &mut sink,
        a.format.unwrap_or(Format::Csv),
        "concurrence",
        &columns,
        &rows,
        &[("max_abs_diff", worst)],
    )?;
    Ok(sink.finish()?)
}

fn estimate(a: EstimateArgs) -> Result<(), CliError> {
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let mut extra = Map::new();
    let (series, hint, n_spins, synth_counts) = match (&a.from_file, a.synthesize) {
        (Some(path), false) => {
            let file = File::open(path).map_err(|e| {
                CliError::Usage(format!("cannot open series {}: {e}", path.display()))
            })?;
            let series = ProbabilitySeries::read_csv(file)?;
            (series, a.omega_hint, a.counts.as_ref().map(Vec::len), None)
        }
        (None, true) => {
            let p = load_params(a.params.as_deref())?;
            let omega = rabi_frequency(&p);
            if omega == 0.0 {
                return Err(Error::NoDynamics.into());
            }
            let times = grid(
                a.t_min.unwrap_or(0.0),
                a.t_max.unwrap_or(3.0 * PI / omega),
                a.points.unwrap_or(64),
            )?;
            let series =
                simulate_survival_sampling(&p, &times, a.shots, &mut RngStream::new(seed, 0))?;
            if let Some(out) = &a.series_out {
                let mut w = BufWriter::new(File::create(out)?);
                writeln!(w, "# spinstar series v{}", crate::output::CSV_VERSION)?;
                series.write_csv(&mut w)?;
                w.flush()?;
            }
            let counts = a
                .ratio_shots
                .map(|shots| simulate_ratio_sampling(&p, shots, &mut RngStream::new(seed, 1)))
                .transpose()?;
            extra.insert("true_omega".into(), json!(omega));
            extra.insert("true_sum_alpha_sq".into(), json!(p.sum_alpha_sq()));
            extra.insert("seed".into(), json!(seed));
            (
                series,
                Some(a.omega_hint.unwrap_or(omega)),
                Some(p.n_spins()),
                counts,
            )
        }
        _ => {
            return Err(CliError::Usage(
                "choose exactly one of --from-file FILE or --synthesize".into(),
            ))
        }
    };

    let options = FitOptions {
        fit_floor: a.fit_floor,
        omega_hint: hint,
    };
    let mut est = fit_collective_coupling(&series, options)?;
    if let Some(counts) = synth_counts.or(a.counts) {
        est.ratios = estimate_coupling_ratios(&counts)?;
        extra.insert("counts".into(), json!(counts));
    }
    let mut doc = match serde_json::to_value(&est)? {
        Value::Object(m) => m,
        _ => unreachable!("estimate serializes to an object"),
    };
    if let Some(n) = n_spins {
        doc.insert("per_spin_scale".into(), json!(est.per_spin_scale(n)));
        doc.insert(
            "per_spin_scale_note".into(),
            json!("sqrt(sum_alpha_sq_hat / N): order of magnitude only, assumes couplings of similar size"),
        );
    }
    doc.insert("points".into(), json!(series.len()));
    doc.extend(extra);

    let mut sink = Sink::open(a.output.as_deref())?;
    match a.format.unwrap_or(Format::Json) {
        Format::Json => sink.json_pretty(&doc)?,
        Format::Csv => {
            sink.csv_header("estimate", &["quantity".into(), "value".into()])?;
            for (k, v) in &doc {
                sink.csv_cells(&[k.clone(), csv_value(v)])?;
            }
        }
    }
    Ok(sink.finish()?)
}

fn csv_value(v: &Value) -> String {
    match v {
        Value::String(s) => format!("\"{}\"", s.replace('"', "\"\"")),
        other => format!("\"{}\"", other.to_string().replace('"', "\"\"")),
    }
}

fn robustness(a: RobustnessArgs) -> Result<(), CliError> {
    let p = match a.params.as_deref() {
        Some(path) => load_params(Some(path))?,
        None => make_params(1, vec![1.0], 0.0, 0.0)?,
    };
    let n = a.n.unwrap_or(100);
    let x_max = a.x_max.unwrap_or(4e-3);
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(CliError::Usage(format!(
            "--x-max must be positive, got {x_max}"
        )));
    }
    let xs = grid(-x_max, x_max, a.points.unwrap_or(161))?;
    let rows = xs
        .iter()
        .map(|&x| Ok(vec![x, timing_robustness(&p, n, x)?]))
        .collect::<Result<Vec<_>, Error>>()?;
    let columns = vec!["x".to_string(), "p_success".to_string()];
    let mut sink = Sink::open(a.output.as_deref())?;
    emit_table(
        &mut sink,
        a.format.unwrap_or(Format::Csv),
        "robustness",
        &columns,
        &rows,
        &[],
    )?;
    Ok(sink.finish()?)
}
