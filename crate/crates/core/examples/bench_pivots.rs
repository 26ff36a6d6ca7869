use std::time::Instant;
use w2lab_core::measure::MeasureSpec;
use w2lab_core::process::{ProcessKind, ProcessSpec};
use w2lab_core::space::SpaceModel;
use w2lab_core::transport::{w2_discrete, semidiscrete::torus_grid};

fn main() {
    let m: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(96);
    let n: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(4096);
    let grid = torus_grid(SpaceModel::FlatTorus(2), m).unwrap();
    let p = ProcessSpec::new(ProcessKind::Iid(MeasureSpec::uniform(SpaceModel::FlatTorus(2))), n, 12345);
    let tr = p.sample().unwrap();
    let w = 1.0 / n as f64;
    let mu: Vec<_> = tr.points.iter().map(|p| (p.clone(), w)).collect();
    let t0 = Instant::now();
    let plan = w2_discrete(&mu, &grid.atoms, SpaceModel::FlatTorus(2), 100_000_000).unwrap();
    println!("N={n} grid={m}^2 cost={:.6} pivots={} time={:?}", plan.cost, plan.pivots, t0.elapsed());
}
