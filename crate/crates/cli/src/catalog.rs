//! Built-in acceptance experiments.
//!
//! Each entry checks one pinned criterion end to end with fixed seeds,
//! sizes and tolerances, and reports a single pass/fail outcome with its
//! measured numbers. The catalog listing is static, so `list` output is
//! bit-identical across runs.

use crate::config::arc_budget;
use anyhow::{anyhow, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use w2lab_core::bounds::{
    gauss_circle_tau, mean_empirical_bound, minimize_over_time, spectral_gap_w2_bound,
    walk_empirical_bound,
};
use w2lab_core::fourier::{fourier_group_points, fourier_torus, singular_values, PacketData};
use w2lab_core::lps::{lps_generators, lps_spectral_radius};
use w2lab_core::measure::{MeasureSpec, TrigTerm};
use w2lab_core::process::{MixingBudget, ProcessKind, ProcessSpec};
use w2lab_core::space::{Point, SpaceModel};
use w2lab_core::spectrum::{dispersion_integral, inv_heat_sum};
use w2lab_core::transport::circle::w2sq_density_vs_uniform;
use w2lab_core::transport::montecarlo::{expected_w2sq_streams, W2Target};
use w2lab_core::transport::semidiscrete::{haar_reference, torus_grid, w2_semidiscrete};
use w2lab_core::transport::{w2_discrete, w2sq_discrete};

pub struct CatalogEntry {
    pub id: &'static str,
    pub formula: &'static str,
    pub summary: &'static str,
    pub runtime_hint: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        id: "circle-iid-rate",
        formula: "circle-empirical-rate",
        summary: "i.i.d. uniform circle: MC mean of W2^2 <= 2/(3N) for N in {100,200,400}, R=200, with slack factor >= 4",
        runtime_hint: "< 1 min",
    },
    CatalogEntry {
        id: "torus2-ast-constant",
        formula: "empirical-mixing-w2",
        summary: "2-torus rate constant: sqrt(mean)/sqrt(log N/N) in [0.20,0.45] at N=4096 (R=50, grid 96), below the optimized bound, which stays within 2.5x of sqrt(1/pi) sqrt(log N/N)",
        runtime_hint: "< 20 min",
    },
    CatalogEntry {
        id: "torus2-teleport-mixing",
        formula: "empirical-mixing-w2",
        summary: "teleport chain (refresh 0.2, budget B=4) on the 2-torus: MC mean <= optimized bound at N in {256,1024}; bound inflation over i.i.d. matches the (1+const*B)^(1/2) structure",
        runtime_hint: "< 10 min",
    },
    CatalogEntry {
        id: "torus2-smoothing-inequality",
        formula: "smoothing-w2",
        summary: "20 random 20-atom measures vs uniform on the 2-torus: certified semidiscrete distance <= smoothing bound at t in {1e-3,1e-2,1e-1}, zero violations",
        runtime_hint: "< 5 min",
    },
    CatalogEntry {
        id: "dispersion-bound",
        formula: "dispersion-2dt",
        summary: "dispersion integral <= 2 d t on 20 log-spaced t in [1e-4,1] for circle, torus2, torus3, su2",
        runtime_hint: "< 1 min",
    },
    CatalogEntry {
        id: "lps-ramanujan-value",
        formula: "generator-spectral-radius",
        summary: "LPS p=5 generators: every singular value over n <= 25 is at most 2 sqrt(5)/6 + 1e-9, and the max comes within 0.05 of it",
        runtime_hint: "< 1 min",
    },
    CatalogEntry {
        id: "circle-gap-bound",
        formula: "gap-w2-d1",
        summary: "density 1 + 0.5 cos(2 pi x): exact distance to uniform <= 0.25/sqrt(3); 2-torus constant audit in [2.76, 2.78]",
        runtime_hint: "< 1 min",
    },
    CatalogEntry {
        id: "su2-walk-empirical",
        formula: "walk-empirical-d3",
        summary: "LPS(5) walk on SU2, N in {256,1024}, R=25, B=q/(1-q): heuristic semidiscrete mean below bound + reference band; per-replicate spectral sums below the bound's spectral component in >= 95% of replicates",
        runtime_hint: "< 15 min",
    },
    CatalogEntry {
        id: "two-island-slope",
        formula: "disconnected-support-floor",
        summary: "two-island process: log-log slope of MC mean W2^2 over N in {2^6..2^12} equals -0.5 +- 0.1",
        runtime_hint: "< 10 min",
    },
    CatalogEntry {
        id: "transport-oracle",
        formula: "exact-ot-certificates",
        summary: "100 random instances up to 4x4 match brute-force vertex enumeration to 1e-12; every plan passes its duality certificate",
        runtime_hint: "< 1 min",
    },
];

pub struct CheckOutcome {
    pub id: &'static str,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl CheckOutcome {
    fn new(id: &'static str) -> CheckOutcome {
        CheckOutcome { id, passed: true, notes: Vec::new() }
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn check(&mut self, ok: bool, s: String) {
        if !ok {
            self.passed = false;
        }
        self.notes.push(format!("{} {s}", if ok { "ok " } else { "BAD" }));
    }
}

/// Stable listing text for the `list` subcommand.
pub fn listing() -> String {
    let mut out = String::new();
    for e in CATALOG {
        out.push_str(&format!(
            "{:<26} [{}] ({})\n    {}\n",
            e.id, e.formula, e.runtime_hint, e.summary
        ));
    }
    out
}

pub fn suite_ids(name: &str) -> Option<Vec<&'static str>> {
    match name {
        "all" | "acceptance" => Some(CATALOG.iter().map(|e| e.id).collect()),
        "fast" => Some(vec![
            "circle-iid-rate",
            "torus2-smoothing-inequality",
            "dispersion-bound",
            "lps-ramanujan-value",
            "circle-gap-bound",
            "transport-oracle",
        ]),
        _ => CATALOG.iter().find(|e| e.id == name).map(|e| vec![e.id]),
    }
}

pub fn run_criterion(id: &str) -> Result<CheckOutcome> {
    match id {
        "circle-iid-rate" => circle_iid_rate(),
        "torus2-ast-constant" => torus2_ast_constant(),
        "torus2-teleport-mixing" => torus2_teleport_mixing(),
        "torus2-smoothing-inequality" => torus2_smoothing_inequality(),
        "dispersion-bound" => dispersion_bound(),
        "lps-ramanujan-value" => lps_ramanujan_value(),
        "circle-gap-bound" => circle_gap_bound(),
        "su2-walk-empirical" => su2_walk_empirical(),
        "two-island-slope" => two_island_slope(),
        "transport-oracle" => transport_oracle(),
        _ => Err(anyhow!("unknown criterion '{id}'")),
    }
}

fn circle_iid_rate() -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("circle-iid-rate");
    let target = W2Target::CircleDensity(MeasureSpec::uniform(SpaceModel::Circle));
    for (idx, &n) in [100usize, 200, 400].iter().enumerate() {
        let p = ProcessSpec::new(
            ProcessKind::Iid(MeasureSpec::uniform(SpaceModel::Circle)),
            n,
            101,
        );
        let run = expected_w2sq_streams(&p, &target, 200, 101, (idx as u64) << 32, arc_budget())?;
        let cap = 2.0 / (3.0 * n as f64);
        let slack = cap / run.estimate.mean;
        out.check(
            run.estimate.mean <= cap,
            format!("N={n}: mean {:.3e} <= 2/(3N) = {cap:.3e}", run.estimate.mean),
        );
        out.check(slack >= 4.0, format!("N={n}: slack factor {slack:.2} >= 4"));
    }
    Ok(out)
}

fn torus2_ast_constant() -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("torus2-ast-constant");
    let space = SpaceModel::FlatTorus(2);
    let uni = MeasureSpec::uniform(space);
    let budget = MixingBudget { beta: 0.0, alpha: 0.0, lower_mass: 1.0 };
    let target = W2Target::TorusUniformGrid { m: 96 };
    let ns = [256usize, 512, 1024, 2048, 4096];
    let mut last = None;
    for (idx, &n) in ns.iter().enumerate() {
        let nf = n as f64;
        let p = ProcessSpec::new(ProcessKind::Iid(uni.clone()), n, 102);
        let run = expected_w2sq_streams(&p, &target, 50, 102, (idx as u64) << 32, arc_budget())?;
        let opt = minimize_over_time(
            |t| mean_empirical_bound(space, &uni, &budget, n, t).map(|r| r.value),
            1e-7,
            1.0,
        )
        .map_err(|e| anyhow!("{e}"))?;
        let reference = (nf.ln() / nf).sqrt();
        // the optimized bound stays within a factor 2.5 of the recovered
        // two-dimensional rate constant sqrt(1/pi)
        let recovered = (1.0 / std::f64::consts::PI).sqrt() * reference;
        out.check(
            opt.value <= 2.5 * recovered && opt.value >= recovered / 2.5,
            format!(
                "N={n}: optimized bound {:.4} within 2.5x of sqrt(1/pi) rate {:.4}",
                opt.value, recovered
            ),
        );
        last = Some((n, run, opt));
    }
    let (n, run, opt) = last.unwrap();
    let nf = n as f64;
    let reference = (nf.ln() / nf).sqrt();
    let ratio = run.estimate.mean.sqrt() / reference;
    out.check(
        (0.20..=0.45).contains(&ratio),
        format!("N={n}: measured ratio {ratio:.4} in [0.20, 0.45]"),
    );
    // band-adjusted consistency with the planar rate constant 0.2821
    let ast = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    let lo = (run.sys_lo_mean.sqrt() - run.estimate.ci_half_width.sqrt()).max(0.0) / reference;
    let hi = (run.sys_hi_mean.sqrt() + run.estimate.ci_half_width.sqrt()) / reference;
    out.check(
        lo <= ast && ast <= hi,
        format!("N={n}: band-adjusted ratio interval [{lo:.4}, {hi:.4}] contains {ast:.4}"),
    );
    out.check(
        run.estimate.mean.sqrt() <= opt.value,
        format!("N={n}: measured rate {:.4} below bound {:.4}", run.estimate.mean.sqrt(), opt.value),
    );
    Ok(out)
}

fn torus2_teleport_mixing() -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("torus2-teleport-mixing");
    let space = SpaceModel::FlatTorus(2);
    let uni = MeasureSpec::uniform(space);
    let theta = 0.2;
    let b_beta = (1.0 - theta) / theta;
    let budget = MixingBudget { beta: b_beta, alpha: b_beta / 2.0, lower_mass: 1.0 };
    let iid_budget = MixingBudget { beta: 0.0, alpha: 0.0, lower_mass: 1.0 };
    out.note(format!("teleport refresh {theta} gives pairwise budget B = {b_beta}"));
    let target = W2Target::TorusUniformGrid { m: 64 };
    for (idx, &n) in [256usize, 1024].iter().enumerate() {
        let p = ProcessSpec::new(
            ProcessKind::Teleport { target: uni.clone(), refresh: theta },
            n,
            103,
        );
        let run = expected_w2sq_streams(&p, &target, 50, 103, (idx as u64) << 32, arc_budget())?;
        let opt = minimize_over_time(
            |t| mean_empirical_bound(space, &uni, &budget, n, t).map(|r| r.value),
            1e-7,
            1.0,
        )
        .map_err(|e| anyhow!("{e}"))?;
        out.check(
            run.estimate.mean <= opt.value * opt.value,
            format!(
                "N={n}: MC mean {:.3e} <= bound^2 {:.3e}",
                run.estimate.mean,
                opt.value * opt.value
            ),
        );
        let iid_opt = minimize_over_time(
            |t| mean_empirical_bound(space, &uni, &iid_budget, n, t).map(|r| r.value),
            1e-7,
            1.0,
        )
        .map_err(|e| anyhow!("{e}"))?;
        let inflation = opt.value / iid_opt.value;
        // the beta branch enters as (1 + 4B) inside the square root
        let structural = inflation * inflation / (1.0 + 4.0 * b_beta);
        out.check(
            (0.4..=2.5).contains(&structural),
            format!(
                "N={n}: bound inflation {inflation:.2} consistent with (1+4B) structure (ratio {structural:.2})"
            ),
        );
    }
    Ok(out)
}

fn torus2_smoothing_inequality() -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("torus2-smoothing-inequality");
    let space = SpaceModel::FlatTorus(2);
    let grid = torus_grid(space, 128).map_err(|e| anyhow!("{e}"))?;
    let mut rng = ChaCha12Rng::seed_from_u64(104);
    let mut violations = 0usize;
    let mut checks = 0usize;
    for _ in 0..20 {
        let atoms: Vec<(Point, f64)> = (0..20)
            .map(|_| (Point::torus(&[rng.gen::<f64>(), rng.gen::<f64>()]), 0.05))
            .collect();
        let nu = MeasureSpec::atomic(space, atoms.clone()).map_err(|e| anyhow!("{e}"))?;
        let packet = fourier_torus(&nu, 40).map_err(|e| anyhow!("{e}"))?;
        let points: Vec<Point> = atoms.iter().map(|(p, _)| p.clone()).collect();
        let est = w2_semidiscrete(&points, space, &grid, arc_budget()).map_err(|e| anyhow!("{e}"))?;
        for &t in &[1e-3, 1e-2, 1e-1] {
            let bound = w2lab_core::bounds::smoothing_bound(space, 1.0, &packet, t)
                .map_err(|e| anyhow!("{e}"))?;
            checks += 1;
            if est.w2 - est.band > bound.value {
                violations += 1;
            }
        }
    }
    out.check(violations == 0, format!("{checks} checks, {violations} violations"));
    Ok(out)
}

fn dispersion_bound() -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("dispersion-bound");
    for space in [
        SpaceModel::Circle,
        SpaceModel::FlatTorus(2),
        SpaceModel::FlatTorus(3),
        SpaceModel::SU2,
    ] {
        let d = space.dim() as f64;
        let mut worst_excess: f64 = f64::NEG_INFINITY;
        for i in 0..20 {
            let t = 1e-4 * (1e4f64).powf(i as f64 / 19.0);
            let v = dispersion_integral(space, t).map_err(|e| anyhow!("{e}"))?;
            worst_excess = worst_excess.max(v - 2.0 * d * t);
        }
        // the bound is approached exponentially closely as t -> 0, so allow
        // the quadrature evaluation tolerance
        out.check(
            worst_excess <= 5e-9,
            format!("{space:?}: max (dispersion - 2dt) = {worst_excess:.2e}"),
        );
    }
    Ok(out)
}

fn lps_ramanujan_value() -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("lps-ramanujan-value");
    let target = 2.0 * 5f64.sqrt() / 6.0;
    let m = lps_generators(5, SpaceModel::SU2).map_err(|e| anyhow!("{e}"))?;
    let packet = w2lab_core::fourier::fourier_group(&m, 25).map_err(|e| anyhow!("{e}"))?;
    let PacketData::Group { blocks, .. } = &packet.data else { unreachable!() };
    let mut max_sv: f64 = 0.0;
    let mut all_below = true;
    for (_, block) in blocks {
        for sv in singular_values(block) {
            if sv > target + 1e-9 {
                all_below = false;
            }
            max_sv = max_sv.max(sv);
        }
    }
    out.check(all_below, format!("all singular values <= 2 sqrt(5)/6 + 1e-9 = {target:.9}"));
    out.check(
        (target - max_sv).abs() <= 0.05,
        format!("max singular value {max_sv:.6} within 0.05 of {target:.6}"),
    );
    Ok(out)
}

fn circle_gap_bound() -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("circle-gap-bound");
    let m = MeasureSpec::mixture(
        SpaceModel::Circle,
        0.5,
        vec![TrigTerm::new(vec![1], 0.5, 0.0)],
    )
    .map_err(|e| anyhow!("{e}"))?;
    let w2sq = w2sq_density_vs_uniform(&m).map_err(|e| anyhow!("{e}"))?;
    let w2 = w2sq.sqrt();
    let cap = 0.25 / 3f64.sqrt();
    out.check(w2 <= cap, format!("exact distance {w2:.6} <= 0.25/sqrt(3) = {cap:.6}"));
    // quantile-integration value agrees with the closed form 1/(32 pi^2)
    let closed = 1.0 / (32.0 * std::f64::consts::PI.powi(2));
    out.check(
        (w2sq - closed).abs() < 1e-10,
        format!("quantile integration {w2sq:.12e} matches 1/(32 pi^2) = {closed:.12e}"),
    );
    let audit = 2f64.sqrt() + 2.0 * gauss_circle_tau().sqrt();
    out.check(
        (2.76..=2.78).contains(&audit),
        format!("2-torus constant audit {audit:.5} in [2.76, 2.78]"),
    );
    Ok(out)
}

fn su2_walk_empirical() -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("su2-walk-empirical");
    let space = SpaceModel::SU2;
    let q = lps_spectral_radius(5);
    let q_budget = q / (1.0 - q);
    out.note(format!("q = {q:.6}, pairwise budget B = q/(1-q) = {q_budget:.4}"));
    let step = lps_generators(5, space).map_err(|e| anyhow!("{e}"))?;
    let reference = haar_reference(space, 2048, 108).map_err(|e| anyhow!("{e}"))?;
    let r = space.radius_scale().unwrap();
    for (idx, &n) in [256usize, 1024].iter().enumerate() {
        let p = ProcessSpec::new(ProcessKind::Walk { step: step.clone() }, n, 108);
        let bound = walk_empirical_bound(q_budget, n, space).map_err(|e| anyhow!("{e}"))?;
        let t_star = bound.t_star.unwrap();
        let run = expected_w2sq_streams(
            &p,
            &W2Target::Reference(reference.clone()),
            25,
            108,
            (idx as u64) << 32,
            arc_budget(),
        )?;
        out.check(
            run.estimate.mean.sqrt() <= bound.value + reference.band,
            format!(
                "N={n}: semidiscrete rate {:.4} <= bound {:.4} + reference band {:.4} (heuristic)",
                run.estimate.mean.sqrt(),
                bound.value,
                reference.band
            ),
        );
        // spectral side: per-replicate heat-damped coefficient sums against
        // the bound's spectral component (1+2B)/N * Phi(t*)
        let (phi, phi_err) = inv_heat_sum(space, t_star).map_err(|e| anyhow!("{e}"))?;
        let component = (1.0 + 2.0 * q_budget) / n as f64 * (phi + phi_err);
        let mut below = 0usize;
        let reps = 25usize;
        for rep in 0..reps {
            let trace = p.sample_stream(108, ((idx as u64) << 32) + rep as u64)?;
            let packet = fourier_group_points(space, &trace.points, 15)
                .map_err(|e| anyhow!("{e}"))?;
            let PacketData::Group { blocks, .. } = &packet.data else { unreachable!() };
            let mut s = 0.0;
            for (dim, block) in blocks {
                let nf = *dim as f64;
                let lam = (nf * nf - 1.0) / (r * r);
                s += (-lam * t_star).exp() / lam * nf * block.norm_squared();
            }
            if s <= component {
                below += 1;
            }
        }
        let needed = (0.95 * reps as f64).ceil() as usize;
        out.check(
            below >= needed,
            format!("N={n}: spectral sums below component in {below}/{reps} replicates (need {needed})"),
        );
    }
    Ok(out)
}

fn two_island_slope() -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("two-island-slope");
    let ns = [64usize, 128, 256, 512, 1024, 2048, 4096];
    let mut pts = Vec::new();
    for (idx, &n) in ns.iter().enumerate() {
        let p = ProcessSpec::two_island_default(2, n, 109);
        let run = expected_w2sq_streams(
            &p,
            &W2Target::IslandsGrid { m_per_axis: 24 },
            50,
            109,
            (idx as u64) << 32,
            arc_budget(),
        )?;
        pts.push(((n as f64).ln(), run.estimate.mean.ln()));
    }
    let (slope, _) = crate::report::least_squares(&pts);
    out.check(
        (-0.6..=-0.4).contains(&slope),
        format!("log-log slope {slope:.4} in [-0.6, -0.4]"),
    );
    Ok(out)
}

fn transport_oracle() -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("transport-oracle");
    let space = SpaceModel::FlatTorus(2);
    let mut rng = ChaCha12Rng::seed_from_u64(110);
    let mut max_gap: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=4);
        let mut mk = |count: usize| -> Vec<(Point, f64)> {
            let raw: Vec<f64> = (0..count).map(|_| rng.gen::<f64>() + 0.05).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter()
                .map(|w| (Point::torus(&[rng.gen::<f64>(), rng.gen::<f64>()]), w / total))
                .collect()
        };
        let mut mu = mk(m);
        let nu = mk(n);
        let s: f64 = mu.iter().map(|(_, w)| w).sum();
        for a in &mut mu {
            a.1 /= s;
        }
        let plan = w2_discrete(&mu, &nu, space, arc_budget()).map_err(|e| anyhow!("{e}"))?;
        let supplies: Vec<f64> = mu.iter().map(|(_, w)| *w).collect();
        let demands: Vec<f64> = nu.iter().map(|(_, w)| *w).collect();
        plan.verify(&supplies, &demands, |i, j| space.distance_sq(&mu[i].0, &nu[j].0))
            .map_err(|e| anyhow!("certificate: {e}"))?;
        let oracle = brute_force_min_cost(&supplies, &demands, &|i, j| {
            space.distance_sq(&mu[i].0, &nu[j].0)
        });
        max_gap = max_gap.max((plan.cost - oracle).abs());
    }
    out.check(
        max_gap < 1e-12,
        format!("100 instances: max |simplex - enumeration| = {max_gap:.2e} < 1e-12"),
    );
    out.note("duality certificates verified on every plan".into());
    Ok(out)
}

/// Minimum cost over all spanning-tree vertices of the transport polytope.
fn brute_force_min_cost(
    supplies: &[f64],
    demands: &[f64],
    cost: &dyn Fn(usize, usize) -> f64,
) -> f64 {
    let m = supplies.len();
    let n = demands.len();
    let arcs: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    let mut chosen = vec![0usize; m + n - 1];
    fn rec(
        arcs: &[(usize, usize)],
        start: usize,
        chosen: &mut Vec<usize>,
        level: usize,
        m: usize,
        n: usize,
        supplies: &[f64],
        demands: &[f64],
        cost: &dyn Fn(usize, usize) -> f64,
        best: &mut f64,
    ) {
        if level == m + n - 1 {
            if let Some(total) = solve_tree(arcs, chosen, m, n, supplies, demands, cost) {
                if total < *best {
                    *best = total;
                }
            }
            return;
        }
        for a in start..arcs.len() {
            chosen[level] = a;
            rec(arcs, a + 1, chosen, level + 1, m, n, supplies, demands, cost, best);
        }
    }
    rec(&arcs, 0, &mut chosen, 0, m, n, supplies, demands, cost, &mut best);
    best
}

fn solve_tree(
    arcs: &[(usize, usize)],
    chosen: &[usize],
    m: usize,
    n: usize,
    supplies: &[f64],
    demands: &[f64],
    cost: &dyn Fn(usize, usize) -> f64,
) -> Option<f64> {
    let total = m + n;
    let mut degree = vec![0usize; total];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (slot, &a) in chosen.iter().enumerate() {
        let (i, j) = arcs[a];
        degree[i] += 1;
        degree[m + j] += 1;
        incident[i].push(slot);
        incident[m + j].push(slot);
    }
    let mut balance: Vec<f64> =
        supplies.iter().copied().chain(demands.iter().map(|&b| -b)).collect();
    let mut flow = vec![f64::NAN; chosen.len()];
    let mut removed = vec![false; chosen.len()];
    let mut leaves: Vec<usize> = (0..total).filter(|&v| degree[v] == 1).collect();
    let mut processed = 0;
    while let Some(v) = leaves.pop() {
        let Some(&slot) = incident[v].iter().find(|&&s| !removed[s]) else { continue };
        let (i, j) = arcs[chosen[slot]];
        let other = if v < m { m + j } else { i };
        let f = if v < m { balance[v] } else { -balance[v] };
        flow[slot] = f;
        balance[v] = 0.0;
        if other < m {
            balance[other] -= f;
        } else {
            balance[other] += f;
        }
        removed[slot] = true;
        processed += 1;
        degree[v] -= 1;
        degree[other] -= 1;
        if degree[other] == 1 {
            leaves.push(other);
        }
    }
    if processed != chosen.len() {
        return None;
    }
    let mut total_cost = 0.0;
    for (slot, &a) in chosen.iter().enumerate() {
        if flow[slot] < -1e-12 {
            return None;
        }
        let (i, j) = arcs[a];
        total_cost += flow[slot].max(0.0) * cost(i, j);
    }
    Some(total_cost)
}
