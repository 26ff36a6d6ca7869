//! Experiment runners: translate a configuration into Monte Carlo runs,
//! bound evaluations and plot series.

use crate::config::{arc_budget, ExperimentConfig, ExperimentKind, ProcessChoice};
use crate::report::{least_squares, ResultRow, Series};
use anyhow::{anyhow, bail, Result};
use std::sync::Mutex;
use std::time::Instant;
use w2lab_core::bounds::{
    mean_empirical_bound, minimize_over_time, nonuniform_gap_bound, quantization_floor,
    spectral_gap_w2_bound, walk_empirical_bound, GapInput, GapMode,
};
use w2lab_core::fourier::{convolution_power, fourier_group, spectral_radius};
use w2lab_core::lps::{lps_generators, lps_spectral_radius};
use w2lab_core::measure::MeasureSpec;
use w2lab_core::process::{MixingBudget, ProcessKind, ProcessSpec};
use w2lab_core::space::SpaceModel;
use w2lab_core::transport::montecarlo::{expected_w2sq_streams, McRun, W2Target};
use w2lab_core::transport::semidiscrete::haar_reference;

/// Everything a run produces.
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub plots: Vec<Series>,
    pub timings: Vec<(String, usize, u128)>,
    /// Number of grid points whose measured value clearly violated the
    /// bound (beyond both statistical and systematic tolerances).
    pub violations: usize,
}

pub fn experiment_id(config: &ExperimentConfig) -> String {
    format!(
        "{}-{}-{}",
        config.kind.as_str(),
        crate::config::space_name(config.space),
        config.process.as_str()
    )
}

fn build_process(config: &ExperimentConfig, n: usize) -> Result<ProcessSpec> {
    let kind = match config.process {
        ProcessChoice::IidUniform => ProcessKind::Iid(MeasureSpec::uniform(config.space)),
        ProcessChoice::Teleport => ProcessKind::Teleport {
            target: MeasureSpec::uniform(config.space),
            refresh: config.theta,
        },
        ProcessChoice::WalkLps => ProcessKind::Walk {
            step: lps_generators(config.lps_p, config.space)
                .map_err(|e| anyhow!("lps generators: {e}"))?,
        },
        ProcessChoice::TwoIsland => {
            return Ok(ProcessSpec::two_island_default(config.space.dim(), n, config.seed));
        }
    };
    Ok(ProcessSpec::new(kind, n, config.seed))
}

fn build_target(config: &ExperimentConfig) -> Result<W2Target> {
    Ok(match (config.space, config.process) {
        (_, ProcessChoice::TwoIsland) => {
            // island cell count chosen so the grid bias stays well below the
            // island imbalance signal at the largest N
            W2Target::IslandsGrid { m_per_axis: 24 }
        }
        (SpaceModel::Circle, _) => W2Target::CircleDensity(MeasureSpec::uniform(SpaceModel::Circle)),
        (SpaceModel::FlatTorus(_), _) => W2Target::TorusUniformGrid { m: config.grid_m },
        (SpaceModel::SU2 | SpaceModel::SO3, _) => W2Target::Reference(
            haar_reference(config.space, config.reference_size, config.seed)
                .map_err(|e| anyhow!("haar reference: {e}"))?,
        ),
    })
}

/// The bound paired with a `(space, process)` cell, minimized over the
/// smoothing time where the form is not closed.
fn evaluate_bound(config: &ExperimentConfig, n: usize) -> Result<Option<(f64, Option<f64>)>> {
    match config.process {
        ProcessChoice::TwoIsland => Ok(None),
        ProcessChoice::IidUniform | ProcessChoice::Teleport => {
            let budget = if config.process == ProcessChoice::IidUniform {
                MixingBudget { beta: 0.0, alpha: 0.0, lower_mass: 1.0 }
            } else {
                let beta = (1.0 - config.theta) / config.theta;
                MixingBudget { beta, alpha: beta / 2.0, lower_mass: 1.0 }
            };
            if config.space == SpaceModel::Circle {
                let b = w2lab_core::bounds::circle_rate_bound(
                    budget.lower_mass,
                    budget.alpha,
                    n,
                );
                return Ok(Some((b, None)));
            }
            let uni = MeasureSpec::uniform(config.space);
            let opt = minimize_over_time(
                |t| mean_empirical_bound(config.space, &uni, &budget, n, t).map(|r| r.value),
                1e-7,
                1.0,
            )
            .map_err(|e| anyhow!("bound optimization: {e}"))?;
            Ok(Some((opt.value, Some(opt.t_star))))
        }
        ProcessChoice::WalkLps => {
            let q = lps_spectral_radius(config.lps_p);
            let q_budget = q / (1.0 - q);
            let rep = walk_empirical_bound(q_budget, n, config.space)
                .map_err(|e| anyhow!("walk bound: {e}"))?;
            Ok(Some((rep.value, rep.t_star)))
        }
    }
}

fn mc_row(config: &ExperimentConfig, id: &str, n: usize, n_index: usize) -> Result<(ResultRow, McRun)> {
    let process = build_process(config, n)?;
    let target = build_target(config)?;
    let stream_base = (n_index as u64) << 32;
    let run = expected_w2sq_streams(
        &process,
        &target,
        config.replicates,
        config.seed,
        stream_base,
        arc_budget(),
    )
    .map_err(|e| anyhow!("monte carlo at n = {n}: {e}"))?;
    let bound = evaluate_bound(config, n)?;
    let row = ResultRow {
        experiment: id.to_string(),
        n,
        mc_mean: run.estimate.mean,
        ci_half: run.estimate.ci_half_width,
        sys_lo: run.sys_lo_mean,
        sys_hi: run.sys_hi_mean,
        bound: bound.map(|(v, _)| v),
        t_star: bound.and_then(|(_, t)| t),
        seed: config.seed,
    };
    Ok((row, run))
}

fn is_violation(row: &ResultRow) -> bool {
    match row.bound {
        // clearly violated: even the optimistic end of the systematic band,
        // minus the confidence half-width, exceeds the squared bound
        Some(b) => row.sys_lo - row.ci_half > b * b,
        None => false,
    }
}

/// Run a Monte Carlo experiment over the N grid, parallelized over grid
/// entries; results are placed by index, so the schedule cannot change them.
fn run_mc_grid(config: &ExperimentConfig, id: &str) -> Result<(Vec<ResultRow>, Vec<(String, usize, u128)>)> {
    let slots: Mutex<Vec<Option<(ResultRow, u128)>>> =
        Mutex::new(vec![None; config.n_grid.len()]);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let workers = config.threads.clamp(1, config.n_grid.len());
    let errors: Mutex<Vec<String>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if idx >= config.n_grid.len() {
                    break;
                }
                let n = config.n_grid[idx];
                let start = Instant::now();
                match mc_row(config, id, n, idx) {
                    Ok((row, _)) => {
                        slots.lock().unwrap()[idx] = Some((row, start.elapsed().as_millis()));
                    }
                    Err(e) => errors.lock().unwrap().push(format!("n = {n}: {e}")),
                }
            });
        }
    });
    let errors = errors.into_inner().unwrap();
    if !errors.is_empty() {
        bail!("{}", errors.join("; "));
    }
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for slot in slots.into_inner().unwrap() {
        let (row, ms) = slot.expect("all grid slots filled");
        timings.push((row.experiment.clone(), row.n, ms));
        rows.push(row);
    }
    Ok((rows, timings))
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let id = experiment_id(config);
    match config.kind {
        ExperimentKind::BoundCheck => {
            let (rows, timings) = run_mc_grid(config, &id)?;
            let violations = rows.iter().filter(|r| is_violation(r)).count();
            let plots = vec![
                series_mc(&rows),
                Series {
                    name: "bound_vs_n".into(),
                    header: "n,bound".into(),
                    rows: rows
                        .iter()
                        .filter_map(|r| r.bound.map(|b| vec![r.n as f64, b]))
                        .collect(),
                },
            ];
            Ok(RunOutput { rows, plots, timings, violations })
        }
        ExperimentKind::RateFit => {
            let (rows, timings) = run_mc_grid(config, &id)?;
            let violations = rows.iter().filter(|r| is_violation(r)).count();
            // ratio of the measured rate to the reference sqrt(log n / n) law
            let mut ratio_rows = Vec::new();
            for r in &rows {
                let nf = r.n as f64;
                let reference = (nf.ln() / nf).sqrt();
                ratio_rows.push(vec![
                    r.n as f64,
                    r.mc_mean.max(0.0).sqrt() / reference,
                    r.bound.map(|b| b / reference).unwrap_or(f64::NAN),
                ]);
            }
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| ((r.n as f64).ln(), r.mc_mean.max(1e-300).ln()))
                .collect();
            let (slope, intercept) = least_squares(&pts);
            let plots = vec![
                series_mc(&rows),
                Series {
                    name: "ratio_vs_n".into(),
                    header: "n,measured_ratio,bound_ratio".into(),
                    rows: ratio_rows,
                },
                fit_series(slope, intercept),
            ];
            Ok(RunOutput { rows, plots, timings, violations })
        }
        ExperimentKind::LowerBoundDemo => {
            let (rows, timings) = run_mc_grid(config, &id)?;
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| ((r.n as f64).ln(), r.mc_mean.max(1e-300).ln()))
                .collect();
            let (slope, intercept) = least_squares(&pts);
            let plots = vec![series_mc(&rows), fit_series(slope, intercept)];
            Ok(RunOutput { rows, plots, timings, violations: 0 })
        }
        ExperimentKind::WalkDecay => run_walk_decay(config, &id),
        ExperimentKind::LpsQuantization => run_lps_quantization(config, &id),
    }
}

fn series_mc(rows: &[ResultRow]) -> Series {
    Series {
        name: "mc_vs_n".into(),
        header: "n,mc_mean,ci_half_width,sys_lo,sys_hi".into(),
        rows: rows
            .iter()
            .map(|r| vec![r.n as f64, r.mc_mean, r.ci_half, r.sys_lo, r.sys_hi])
            .collect(),
    }
}

fn fit_series(slope: f64, intercept: f64) -> Series {
    Series {
        name: "fit".into(),
        header: "slope,intercept".into(),
        rows: vec![vec![slope, intercept]],
    }
}

/// Walk decay: stretched-exponential bound for the n-step distribution of a
/// generator walk, with the measured operator-norm decay of the generator
/// coefficients as the observable.
fn run_walk_decay(config: &ExperimentConfig, id: &str) -> Result<RunOutput> {
    let start = Instant::now();
    let gap = GapInput { b: config.gap_b, aperiodicity_scale: 1 };
    let step = lps_generators(config.lps_p, config.space).map_err(|e| anyhow!("{e}"))?;
    let packet = fourier_group(&step, config.n_max).map_err(|e| anyhow!("{e}"))?;
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for &steps in &config.n_grid {
        let rep = nonuniform_gap_bound(&gap, GapMode::ConvolutionStep(steps), config.space)
            .map_err(|e| anyhow!("{e}"))?;
        let powered = convolution_power(&packet, steps as u32);
        let measured = spectral_radius(&powered).q_at_cutoff;
        rows.push(ResultRow {
            experiment: id.to_string(),
            n: steps,
            mc_mean: measured,
            ci_half: 0.0,
            sys_lo: measured,
            sys_hi: measured,
            bound: Some(rep.value),
            t_star: rep.t_star,
            seed: config.seed,
        });
        plot.push(vec![
            steps as f64,
            (steps as f64).cbrt(),
            measured,
            rep.value,
            rep.value.ln(),
        ]);
    }
    let pts: Vec<(f64, f64)> = plot.iter().map(|r| (r[1], r[4])).collect();
    let (slope, intercept) = least_squares(&pts);
    let plots = vec![
        Series {
            name: "decay_vs_n".into(),
            header: "n,n_cbrt,measured_q_power,bound,log_bound".into(),
            rows: plot,
        },
        fit_series(slope, intercept),
    ];
    let timings = vec![(id.to_string(), *config.n_grid.last().unwrap(), start.elapsed().as_millis())];
    Ok(RunOutput { rows, plots, timings, violations: 0 })
}

/// Quantization by generator nets: convolution powers of the generator set
/// against the ball-packing floor.
fn run_lps_quantization(config: &ExperimentConfig, id: &str) -> Result<RunOutput> {
    let start = Instant::now();
    let q1 = lps_spectral_radius(config.lps_p);
    let step = lps_generators(config.lps_p, config.space).map_err(|e| anyhow!("{e}"))?;
    let packet = fourier_group(&step, config.n_max).map_err(|e| anyhow!("{e}"))?;
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for &k in &config.n_grid {
        // support of the k-fold power: reduced words of length k, k-2, ...
        let p = config.lps_p as f64;
        let mut support = 0f64;
        let mut len = k as i64;
        while len >= 0 {
            support += if len == 0 { 1.0 } else { (p + 1.0) * p.powi(len as i32 - 1) };
            len -= 2;
        }
        let q_pow = q1.powi(k as i32);
        let powered = convolution_power(&packet, k as u32);
        let measured = spectral_radius(&powered).q_at_cutoff;
        let bound = spectral_gap_w2_bound(q_pow, config.space)
            .map_err(|e| anyhow!("{e}"))?;
        let floor = quantization_floor(support as usize, config.space);
        rows.push(ResultRow {
            experiment: id.to_string(),
            n: k,
            mc_mean: measured,
            ci_half: 0.0,
            sys_lo: measured,
            sys_hi: measured,
            bound: Some(bound.value),
            t_star: bound.t_star,
            seed: config.seed,
        });
        plot.push(vec![
            k as f64,
            support,
            q_pow,
            measured,
            bound.value,
            floor.value,
            bound.value / floor.value,
        ]);
    }
    let plots = vec![Series {
        name: "net_vs_floor".into(),
        header: "k,support,q_power,measured_q_power,bound,floor,optimality_ratio".into(),
        rows: plot,
    }];
    let timings = vec![(id.to_string(), *config.n_grid.last().unwrap(), start.elapsed().as_millis())];
    Ok(RunOutput { rows, plots, timings, violations: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn circle_bound_check_runs_and_holds() {
        let config = ExperimentConfig::parse_str(
            "kind = bound-check\nspace = circle\nprocess = iid-uniform\nn_grid = 50,100\nreplicates = 25\nseed = 9\n",
        )
        .unwrap();
        let out = run(&config).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert_eq!(out.violations, 0);
        for r in &out.rows {
            let b = r.bound.unwrap();
            assert!(r.mc_mean < b * b);
        }
    }

    #[test]
    fn reruns_are_bit_identical() {
        let config = ExperimentConfig::parse_str(
            "kind = bound-check\nspace = circle\nprocess = iid-uniform\nn_grid = 40\nreplicates = 10\nseed = 4\n",
        )
        .unwrap();
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        let csv_a = crate::report::results_csv(&a.rows);
        let csv_b = crate::report::results_csv(&b.rows);
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn walk_decay_bound_decreases() {
        let config = ExperimentConfig::parse_str(
            "kind = walk-decay\nspace = su2\nn_grid = 27,64,125\nreplicates = 2\nn_max = 8\n",
        )
        .unwrap();
        let out = run(&config).unwrap();
        let bounds: Vec<f64> = out.rows.iter().map(|r| r.bound.unwrap()).collect();
        assert!(bounds.windows(2).all(|w| w[1] < w[0]));
        // the measured generator decay respects the documented value
        for r in &out.rows {
            assert!(r.mc_mean <= lps_spectral_radius(5).powi(r.n as i32) + 1e-9);
        }
    }

    #[test]
    fn lps_quantization_ratio_is_order_one() {
        let config = ExperimentConfig::parse_str(
            "kind = lps-quantization\nspace = su2\nn_grid = 1,2,3,4\nreplicates = 2\nn_max = 10\n",
        )
        .unwrap();
        let out = run(&config).unwrap();
        let series = &out.plots[0];
        for row in &series.rows {
            let ratio = row[6];
            assert!(ratio > 0.5 && ratio < 200.0, "ratio {ratio}");
        }
    }
}
