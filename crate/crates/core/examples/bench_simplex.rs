use std::time::Instant;
use w2lab_core::measure::MeasureSpec;
use w2lab_core::process::{ProcessKind, ProcessSpec};
use w2lab_core::space::SpaceModel;
use w2lab_core::transport::semidiscrete::{torus_grid, w2_semidiscrete};

fn main() {
    let m: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(96);
    let n: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(4096);
    let grid = torus_grid(SpaceModel::FlatTorus(2), m).unwrap();
    let p = ProcessSpec::new(
        ProcessKind::Iid(MeasureSpec::uniform(SpaceModel::FlatTorus(2))),
        n,
        12345,
    );
    let tr = p.sample().unwrap();
    let t0 = Instant::now();
    let est = w2_semidiscrete(&tr.points, SpaceModel::FlatTorus(2), &grid, 100_000_000).unwrap();
    let dt = t0.elapsed();
    let n_f = n as f64;
    let ast = (1.0 / (4.0 * std::f64::consts::PI)).sqrt() * (n_f.ln() / n_f).sqrt();
    println!(
        "N={n} grid={m}^2  W2={:.5}  (AST prediction ~{ast:.5})  band={:.5}  time={dt:?}",
        est.w2, est.band
    );
}
