//! Stationary sample processes and their analytic mixing budgets.
//!
//! Samplers are deterministic functions of `(spec, seed, stream)`: each
//! replicate draws from its own counter-mode substream of a seeded ChaCha
//! generator, so replicate-level parallelism cannot change results.

use crate::error::{Error, Result};
use crate::measure::{MeasureKind, MeasureSpec};
use crate::quaternion::Quaternion;
use crate::space::{Point, SpaceModel};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Axis-aligned box `[lo, lo+side]^d` (componentwise) on a torus.
#[derive(Debug, Clone, PartialEq)]
pub struct IslandBox {
    pub lo: Vec<f64>,
    pub side: f64,
}

impl IslandBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.lo
            .iter()
            .zip(x.iter())
            .all(|(&l, &xi)| xi >= l - 1e-12 && xi <= l + self.side + 1e-12)
    }
}

/// Process variants.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessKind {
    /// Independent draws from the target measure.
    Iid(MeasureSpec),
    /// Markov chain that keeps the previous state with probability
    /// `1 - refresh` and redraws from the target otherwise.
    Teleport { target: MeasureSpec, refresh: f64 },
    /// Left-to-right random walk `S_n = S_{n-1} g_n` with i.i.d. steps from
    /// an atomic step measure on SU(2) or SO(3).
    Walk { step: MeasureSpec },
    /// I.i.d. draws from the uniform mixture on two separated boxes:
    /// island A with probability `prob_a`, island B otherwise.
    TwoIsland { island_a: IslandBox, island_b: IslandBox, prob_a: f64 },
}

/// A process together with its trace length and base seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub len: usize,
    pub seed: u64,
}

/// An ordered sample path.
#[derive(Debug, Clone)]
pub struct SampleTrace {
    pub points: Vec<Point>,
    pub seed: u64,
    pub stream: u64,
}

/// Analytic mixing budgets feeding the empirical bounds: `sum beta <= beta*N`
/// and `sum alpha <= alpha*N` over all ordered pairs, plus the lower mass
/// constant of the marginal.
#[derive(Debug, Clone, Copy)]
pub struct MixingBudget {
    pub beta: f64,
    pub alpha: f64,
    pub lower_mass: f64,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, len: usize, seed: u64) -> ProcessSpec {
        ProcessSpec { kind, len, seed }
    }

    /// The default two-island construction on `FlatTorus(d)`: island A is the
    /// `[0, 0.25]^d` box, island B is A shifted by 0.5 in the first
    /// coordinate, each carrying mass 1/2; their distance is 0.25.
    pub fn two_island_default(d: u32, len: usize, seed: u64) -> ProcessSpec {
        let island_a = IslandBox { lo: vec![0.0; d as usize], side: 0.25 };
        let mut lo_b = vec![0.0; d as usize];
        lo_b[0] = 0.5;
        let island_b = IslandBox { lo: lo_b, side: 0.25 };
        ProcessSpec::new(ProcessKind::TwoIsland { island_a, island_b, prob_a: 0.5 }, len, seed)
    }

    pub fn space(&self) -> SpaceModel {
        match &self.kind {
            ProcessKind::Iid(m) | ProcessKind::Teleport { target: m, .. } => m.space,
            ProcessKind::Walk { step } => step.space,
            ProcessKind::TwoIsland { island_a, .. } => {
                if island_a.lo.len() == 1 {
                    SpaceModel::Circle
                } else {
                    SpaceModel::FlatTorus(island_a.lo.len() as u32)
                }
            }
        }
    }

    /// Sample the trace using the spec's own seed (stream 0).
    pub fn sample(&self) -> Result<SampleTrace> {
        self.sample_stream(self.seed, 0)
    }

    /// Sample a replicate substream: identical `(seed, stream)` pairs yield
    /// identical traces bit for bit.
    pub fn sample_stream(&self, seed: u64, stream: u64) -> Result<SampleTrace> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut points = Vec::with_capacity(self.len);
        match &self.kind {
            ProcessKind::Iid(target) => {
                let mut sampler = MeasureSampler::new(target)?;
                for _ in 0..self.len {
                    points.push(sampler.draw(&mut rng)?);
                }
            }
            ProcessKind::Teleport { target, refresh } => {
                if !(*refresh > 0.0 && *refresh <= 1.0) {
                    return Err(Error::UnsupportedProcess(format!(
                        "teleport refresh probability {refresh} outside (0, 1]"
                    )));
                }
                let mut sampler = MeasureSampler::new(target)?;
                let mut current = sampler.draw(&mut rng)?;
                points.push(current.clone());
                for _ in 1..self.len {
                    if rng.gen::<f64>() < *refresh {
                        current = sampler.draw(&mut rng)?;
                    }
                    points.push(current.clone());
                }
            }
            ProcessKind::Walk { step } => {
                let space = step.space;
                if !space.is_group_sphere() {
                    return Err(Error::UnsupportedProcess(
                        "random walks are defined on SU2/SO3".into(),
                    ));
                }
                let atoms = step.atoms().ok_or_else(|| {
                    Error::UnsupportedProcess("walk steps must be an atomic measure".into())
                })?;
                let cum = cumulative_weights(atoms);
                let mut state = Quaternion::ONE;
                for _ in 0..self.len {
                    let g = pick_atom(atoms, &cum, rng.gen::<f64>());
                    let q = g.quaternion().unwrap();
                    state = state.mul(q).normalized();
                    let rep = if space == SpaceModel::SO3 {
                        state.canonical_mod_sign()
                    } else {
                        state
                    };
                    points.push(Point::Rotation(rep));
                }
            }
            ProcessKind::TwoIsland { island_a, island_b, prob_a } => {
                let d = island_a.lo.len();
                for _ in 0..self.len {
                    let island = if rng.gen::<f64>() < *prob_a { island_a } else { island_b };
                    let mut x = Vec::with_capacity(d);
                    for &lo in &island.lo {
                        x.push((lo + island.side * rng.gen::<f64>()).rem_euclid(1.0));
                    }
                    points.push(Point::Torus(x));
                }
            }
        }
        Ok(SampleTrace { points, seed, stream })
    }

    /// Analytic mixing budgets. The teleport chain has exactly geometric
    /// pairwise dependence: the joint law of states `j` apart is
    /// `(1-refresh)^j * diagonal + (1-(1-refresh)^j) * product`, so the sum
    /// over pairs is bounded by `N * (1-refresh)/refresh`.
    pub fn mixing_budget(&self) -> Result<MixingBudget> {
        match &self.kind {
            ProcessKind::Iid(m) => {
                Ok(MixingBudget { beta: 0.0, alpha: 0.0, lower_mass: m.lower_mass_constant()? })
            }
            ProcessKind::TwoIsland { .. } => {
                Ok(MixingBudget { beta: 0.0, alpha: 0.0, lower_mass: 0.0 })
            }
            ProcessKind::Teleport { target, refresh } => {
                let beta = (1.0 - refresh) / refresh;
                Ok(MixingBudget {
                    beta,
                    alpha: beta / 2.0,
                    lower_mass: target.lower_mass_constant()?,
                })
            }
            ProcessKind::Walk { .. } => Err(Error::UnsupportedProcess(
                "walks use the spectral gap machinery, not pairwise mixing budgets".into(),
            )),
        }
    }
}

fn cumulative_weights(atoms: &[(Point, f64)]) -> Vec<f64> {
    let mut acc = 0.0;
    atoms
        .iter()
        .map(|(_, w)| {
            acc += w;
            acc
        })
        .collect()
}

fn pick_atom<'a>(atoms: &'a [(Point, f64)], cum: &[f64], u: f64) -> &'a Point {
    let target = u * cum.last().unwrap();
    let idx = cum.partition_point(|&c| c <= target).min(atoms.len() - 1);
    &atoms[idx].0
}

/// Draws single points from a measure specification.
struct MeasureSampler<'a> {
    spec: &'a MeasureSpec,
    cum: Vec<f64>,
    envelope: f64,
    proposals: u64,
    accepts: u64,
}

impl<'a> MeasureSampler<'a> {
    fn new(spec: &'a MeasureSpec) -> Result<Self> {
        let cum = match &spec.kind {
            MeasureKind::Atomic(atoms) => cumulative_weights(atoms),
            _ => Vec::new(),
        };
        Ok(MeasureSampler { spec, cum, envelope: spec.density_sup_bound(), proposals: 0, accepts: 0 })
    }

    fn draw<R: Rng>(&mut self, rng: &mut R) -> Result<Point> {
        match &self.spec.kind {
            MeasureKind::Uniform => match self.spec.space {
                SpaceModel::Circle | SpaceModel::FlatTorus(_) => {
                    let d = self.spec.space.dim() as usize;
                    Ok(Point::Torus((0..d).map(|_| rng.gen::<f64>()).collect()))
                }
                SpaceModel::SU2 => Ok(Point::Rotation(haar_quaternion(rng))),
                SpaceModel::SO3 => Ok(Point::Rotation(haar_quaternion(rng).canonical_mod_sign())),
            },
            MeasureKind::Mixture { .. } => {
                // rejection against the constant envelope
                let d = self.spec.space.dim() as usize;
                loop {
                    self.proposals += 1;
                    let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
                    let u: f64 = rng.gen();
                    if u * self.envelope <= self.spec.density(&x) {
                        self.accepts += 1;
                        return Ok(Point::Torus(x));
                    }
                    if self.proposals >= 10_000 {
                        let rate = self.accepts as f64 / self.proposals as f64;
                        if rate < 1e-3 {
                            return Err(Error::RejectionStall { rate });
                        }
                    }
                }
            }
            MeasureKind::Atomic(atoms) => {
                let p = pick_atom(atoms, &self.cum, rng.gen::<f64>());
                Ok(p.clone())
            }
        }
    }
}

/// Haar-distributed unit quaternion via a normalized 4-D standard Gaussian.
pub fn haar_quaternion<R: Rng>(rng: &mut R) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if q.norm() > 1e-6 {
            return q.normalized();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_circle_iid(n: usize, seed: u64) -> ProcessSpec {
        ProcessSpec::new(ProcessKind::Iid(MeasureSpec::uniform(SpaceModel::Circle)), n, seed)
    }

    #[test]
    fn iid_uniform_circle_is_reproducible() {
        let p = uniform_circle_iid(3, 42);
        let a = p.sample().unwrap();
        let b = p.sample().unwrap();
        assert_eq!(a.points.len(), 3);
        for (x, y) in a.points.iter().zip(b.points.iter()) {
            assert_eq!(x, y);
        }
        for pt in &a.points {
            let c = pt.torus_coords().unwrap()[0];
            assert!((0.0..1.0).contains(&c));
        }
    }

    #[test]
    fn different_streams_differ() {
        let p = uniform_circle_iid(8, 42);
        let a = p.sample_stream(42, 0).unwrap();
        let b = p.sample_stream(42, 1).unwrap();
        assert_ne!(a.points, b.points);
    }

    #[test]
    fn teleport_with_full_refresh_matches_iid_distinctness() {
        let target = MeasureSpec::uniform(SpaceModel::Circle);
        let p = ProcessSpec::new(ProcessKind::Teleport { target, refresh: 1.0 }, 200, 7);
        let tr = p.sample().unwrap();
        let mut seen: Vec<f64> = tr.points.iter().map(|p| p.torus_coords().unwrap()[0]).collect();
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        seen.dedup();
        assert_eq!(seen.len(), 200);
    }

    #[test]
    fn teleport_refresh_count_within_three_sigma() {
        let n = 100_000usize;
        let nf = n as f64;
        for &theta in &[0.2, 0.5, 0.8] {
            let target = MeasureSpec::uniform(SpaceModel::Circle);
            let p = ProcessSpec::new(ProcessKind::Teleport { target, refresh: theta }, n, 11);
            let tr = p.sample().unwrap();
            let mut refreshes = 0usize;
            for w in tr.points.windows(2) {
                if w[0] != w[1] {
                    refreshes += 1;
                }
            }
            let mean = theta * (nf - 1.0);
            let sd = (theta * (1.0 - theta) * (nf - 1.0)).sqrt();
            let z = (refreshes as f64 - mean).abs() / sd;
            assert!(z < 3.0, "theta={theta}: refreshes {refreshes}, z = {z}");
        }
    }

    #[test]
    fn walk_with_point_mass_is_deterministic_powers() {
        let g = Quaternion::new(0.8, 0.6, 0.0, 0.0);
        let step = MeasureSpec::atomic(SpaceModel::SU2, vec![(Point::rotation(g), 1.0)]).unwrap();
        let p = ProcessSpec::new(ProcessKind::Walk { step }, 5, 1);
        let tr = p.sample().unwrap();
        let mut expect = Quaternion::ONE;
        for pt in &tr.points {
            expect = expect.mul(&g).normalized();
            let q = pt.quaternion().unwrap();
            assert!(q.dot(&expect).abs() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn two_island_points_stay_in_islands() {
        let p = ProcessSpec::two_island_default(2, 500, 3);
        let ProcessKind::TwoIsland { island_a, island_b, .. } = &p.kind else { unreachable!() };
        let tr = p.sample().unwrap();
        for pt in &tr.points {
            let x = pt.torus_coords().unwrap();
            assert!(island_a.contains(x) || island_b.contains(x), "{x:?}");
        }
    }

    #[test]
    fn iid_budget_is_zero() {
        let p = uniform_circle_iid(10, 1);
        let b = p.mixing_budget().unwrap();
        assert_eq!(b.beta, 0.0);
        assert_eq!(b.alpha, 0.0);
        assert_eq!(b.lower_mass, 1.0);
    }

    #[test]
    fn teleport_budget_geometric_sum() {
        // sum_{j>=1} (1-theta)^j = (1-theta)/theta
        for &(theta, expect) in &[(0.5, 1.0), (0.2, 4.0)] {
            let target = MeasureSpec::uniform(SpaceModel::Circle);
            let p = ProcessSpec::new(ProcessKind::Teleport { target, refresh: theta }, 10, 1);
            let b = p.mixing_budget().unwrap();
            assert!((b.beta - expect).abs() < 1e-12);
            assert!((b.alpha - expect / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn teleport_beta_oracle_two_state_chain() {
        // Coupling oracle on the 2-state discretization (cells [0,1/2) and
        // [1/2,1)): the exact joint law of (X_m, X_{m+j}) is
        //   (1-theta)^j * diag(1/2) + (1 - (1-theta)^j) * (1/4 each),
        // whose total-variation beta coefficient is (1-theta)^j / 2, within
        // the claimed (1-theta)^j envelope; the geometric series of the
        // envelope gives the budget.
        for &theta in &[0.2, 0.5, 0.8] {
            let mut envelope_sum = 0.0;
            for j in 1..260u32 {
                let keep = (1.0f64 - theta).powi(j as i32);
                let joint_diag = keep * 0.5 + (1.0 - keep) * 0.25;
                let joint_off = (1.0 - keep) * 0.25;
                let beta_j = 0.5
                    * (2.0 * (joint_diag - 0.25).abs() + 2.0 * (joint_off - 0.25).abs());
                assert!(beta_j <= keep + 1e-15, "beta_{j} = {beta_j} > {keep}");
                envelope_sum += keep;
            }
            let budget = (1.0 - theta) / theta;
            assert!((envelope_sum - budget).abs() < 1e-9, "theta={theta}");
        }
    }

    #[test]
    fn walk_budget_unsupported() {
        let step = MeasureSpec::atomic(
            SpaceModel::SU2,
            vec![(Point::Rotation(Quaternion::ONE), 1.0)],
        )
        .unwrap();
        let p = ProcessSpec::new(ProcessKind::Walk { step }, 4, 1);
        assert!(p.mixing_budget().is_err());
    }

    #[test]
    fn haar_mean_is_near_center() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let n = 100_000;
        let mut mean = [0.0f64; 4];
        for _ in 0..n {
            let q = haar_quaternion(&mut rng);
            mean[0] += q.a;
            mean[1] += q.b;
            mean[2] += q.c;
            mean[3] += q.d;
        }
        // components have variance 1/4; 3 sigma of the mean is 1.5e-3 * ...
        let limit = 3.0 * 0.5 / (n as f64).sqrt();
        for m in mean {
            assert!((m / n as f64).abs() < limit);
        }
    }
}
