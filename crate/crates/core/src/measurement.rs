//! Projective measurement of the central spin and the conditional protocols
//! built on it: single-shot W-like state preparation and the uniform-coupling
//! Dicke ladder.
//!
//! Outcome `−1` (central spin down) is the branch of interest. Each
//! trajectory draws from its own ChaCha8 stream, so Monte Carlo runs are
//! reproducible and embarrassingly parallel.

use std::sync::Arc;

use nalgebra::Complex;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::closed_form::ladder_optimal_time;
use crate::error::{Error, Result};
use crate::model::{binomial, combinations, enumerate_sector, lex_rank, SpinStarParams};
use crate::scalar::{czero, Real};
use crate::sector::{bath_moments, SectorPropagator, SectorState};

/// Tolerated deviation of `‖ψ‖²` from 1 before a measurement is refused.
const NORM_TOL: f64 = 1e-8;

/// One reproducible random stream: ChaCha8 keyed by `seed`, positioned on
/// stream `stream`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Bath-only state with a fixed number of up spins; amplitudes follow the
/// lexicographic order of the up-sets.
#[derive(Debug, Clone, PartialEq)]
pub struct BathState<T: Real> {
    n_spins: usize,
    up_count: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> BathState<T> {
    pub fn new(n_spins: usize, up_count: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::NoSpins);
        }
        if up_count > n_spins {
            return Err(Error::ExcitationOutOfRange {
                p: up_count,
                n: n_spins,
            });
        }
        let dim = binomial(n_spins, up_count);
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            n_spins,
            up_count,
            amplitudes,
        })
    }

    /// All bath spins down.
    pub fn all_down(n_spins: usize) -> Result<Self> {
        Self::new(n_spins, 0, vec![Complex::new(T::one(), T::zero())])
    }

    /// Symmetric Dicke state with `up_count` excitations, `|N/2, −N/2+k⟩`.
    pub fn dicke(n_spins: usize, up_count: usize) -> Result<Self> {
        if up_count > n_spins {
            return Err(Error::ExcitationOutOfRange {
                p: up_count,
                n: n_spins,
            });
        }
        let dim = binomial(n_spins, up_count);
        let amp = T::one() / T::from_usize_lossy(dim).sqrt();
        Self::new(n_spins, up_count, vec![Complex::new(amp, T::zero()); dim])
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn up_count(&self) -> usize {
        self.up_count
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        crate::scalar::norm_sqr(&self.amplitudes)
    }

    pub fn amplitude(&self, up_set: &[usize]) -> Option<Complex<T>> {
        let valid = up_set.len() == self.up_count
            && up_set.iter().all(|&j| (1..=self.n_spins).contains(&j))
            && up_set.windows(2).all(|w| w[0] < w[1]);
        valid.then(|| self.amplitudes[lex_rank(up_set, self.n_spins)])
    }

    /// `(up_set, amplitude)` pairs in basis order.
    pub fn configurations(&self) -> impl Iterator<Item = (Vec<usize>, Complex<T>)> + '_ {
        combinations(self.n_spins, self.up_count)
            .into_iter()
            .zip(self.amplitudes.iter().copied())
    }

    /// `|⟨self|other⟩|²`; zero when the excitation numbers differ.
    pub fn fidelity(&self, other: &Self) -> T {
        if self.n_spins != other.n_spins || self.up_count != other.up_count {
            return T::zero();
        }
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(czero::<T>(), |acc, (x, y)| acc + x.conj() * y)
            .norm_sqr()
    }

    /// Removes the global phase so that the largest amplitude is real positive.
    pub fn canonical_phase(mut self) -> Self {
        let mut best = czero::<T>();
        for z in &self.amplitudes {
            if z.norm_sqr() > best.norm_sqr() {
                best = *z;
            }
        }
        let m = best.norm_sqr().sqrt();
        if !m.is_zero() {
            let rot = best.conj() / m;
            self.amplitudes.iter_mut().for_each(|z| *z *= rot);
        }
        self
    }

    pub fn expectation_jz(&self) -> T {
        self.moments().0
    }

    pub fn expectation_j2(&self) -> T {
        self.moments().1
    }

    fn moments(&self) -> (T, T) {
        let sets = combinations(self.n_spins, self.up_count);
        bath_moments(
            self.n_spins,
            sets.iter()
                .zip(&self.amplitudes)
                .map(|(s, &z)| (false, s.as_slice(), z)),
        )
    }

    /// Joint state with the central spin re-prepared up.
    pub fn with_central_up(&self) -> Result<SectorState<T>> {
        let basis = Arc::new(enumerate_sector(self.n_spins, self.up_count)?);
        let mut amps = self.amplitudes.clone();
        amps.resize(basis.len(), czero());
        SectorState::new(basis, amps)
    }
}

/// Result of one projective `σ_z^A` measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome<T: Real> {
    /// `+1` (central up) or `−1` (central down).
    pub eigenvalue: i8,
    /// Born probability of the observed eigenvalue.
    pub probability: T,
    pub p_plus: T,
    pub p_minus: T,
    /// Renormalized bath state left behind.
    pub collapsed: BathState<T>,
}

/// Samples `σ_z^A` on a normalized sector state.
pub fn measure_central<T: Real>(
    state: &SectorState<T>,
    rng: &mut RngStream,
) -> Result<MeasurementOutcome<T>> {
    let norm = state.norm_sqr();
    if (norm - T::one()).abs() > T::lit(NORM_TOL) {
        return Err(Error::NotNormalized(norm.to_f64_lossy()));
    }
    let p_plus = state.central_up_weight() / norm;
    let p_minus = state.central_down_weight() / norm;
    let down = rng.uniform() < p_minus.to_f64_lossy();
    let (eigenvalue, probability) = if down { (-1, p_minus) } else { (1, p_plus) };
    Ok(MeasurementOutcome {
        eigenvalue,
        probability,
        p_plus,
        p_minus,
        collapsed: collapse(state, down)?,
    })
}

fn collapse<T: Real>(state: &SectorState<T>, down: bool) -> Result<BathState<T>> {
    let split = state.up_block_len();
    let block = if down {
        &state.amplitudes()[split..]
    } else {
        &state.amplitudes()[..split]
    };
    let w = crate::scalar::norm_sqr(block);
    if w.is_zero() {
        return Err(Error::ZeroProbabilityBranch);
    }
    let scale = T::one() / w.sqrt();
    let p = state.basis().excitation_p();
    BathState::new(
        state.basis().n_spins(),
        if down { p + 1 } else { p },
        block.iter().map(|z| *z * scale).collect(),
    )
}

/// One recorded measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep<T: Real> {
    pub time: T,
    pub outcome: i8,
    pub probability: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<T: Real> {
    pub seed: u64,
    pub stream: u64,
    pub rng: &'static str,
    pub steps: Vec<TrajectoryStep<T>>,
    pub final_state: BathState<T>,
    pub succeeded: bool,
}

impl<T: Real> TrajectoryRecord<T> {
    /// Compact JSON log line (the final state is omitted).
    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<_> = self
            .steps
            .iter()
            .map(|s| {
                json!({
                    "time": s.time.to_f64_lossy(),
                    "outcome": s.outcome,
                    "probability": s.probability.to_f64_lossy(),
                })
            })
            .collect();
        json!({
            "seed": self.seed,
            "stream": self.stream,
            "rng": self.rng,
            "steps": steps,
            "succeeded": self.succeeded,
            "final_up_count": self.final_state.up_count(),
        })
    }
}

/// A conditional protocol whose deterministic part is computed once and whose
/// measurement outcomes are sampled per trajectory.
pub trait Protocol<T: Real>: Sync {
    fn run(&self, rng: &mut RngStream) -> Result<TrajectoryRecord<T>>;
}

/// Measurement schedule applied to a deterministic chain of pre-measurement
/// states; step `i` only exists if all earlier steps could succeed.
#[derive(Debug, Clone)]
struct Chain<T: Real> {
    times: Vec<T>,
    evolved: Vec<SectorState<T>>,
}

impl<T: Real> Chain<T> {
    fn run(&self, rng: &mut RngStream) -> Result<TrajectoryRecord<T>> {
        let mut steps = Vec::with_capacity(self.evolved.len());
        let mut last = None;
        for (&time, state) in self.times.iter().zip(&self.evolved) {
            let m = measure_central(state, rng)?;
            steps.push(TrajectoryStep {
                time,
                outcome: m.eigenvalue,
                probability: m.probability,
            });
            let failed = m.eigenvalue == 1;
            last = Some(m.collapsed);
            if failed {
                break;
            }
        }
        let succeeded = steps.len() == self.times.len() && steps.iter().all(|s| s.outcome == -1);
        Ok(TrajectoryRecord {
            seed: rng.seed(),
            stream: rng.stream(),
            rng: RngStream::ALGORITHM,
            steps,
            final_state: last.expect("chains have at least one step"),
            succeeded,
        })
    }
}

/// Evolve from the central spin up and all bath spins down, then measure.
#[derive(Debug, Clone)]
pub struct WLikeProtocol<T: Real> {
    chain: Chain<T>,
}

impl<T: Real> WLikeProtocol<T> {
    pub fn new(params: &SpinStarParams<T>, measure_time: T) -> Result<Self> {
        if params.sum_alpha_sq().is_zero() {
            return Err(Error::ZeroCouplings);
        }
        if !measure_time.is_finite() {
            return Err(Error::NonFinite("measure_time"));
        }
        let prop = SectorPropagator::for_params(params, 0)?;
        let evolved = prop.evolve(&SectorState::ground(params.n_spins())?, measure_time)?;
        Ok(Self {
            chain: Chain {
                times: vec![measure_time],
                evolved: vec![evolved],
            },
        })
    }

    /// Probability that the central spin is found down.
    pub fn success_probability(&self) -> T {
        self.chain.evolved[0].central_down_weight()
    }
}

impl<T: Real> Protocol<T> for WLikeProtocol<T> {
    fn run(&self, rng: &mut RngStream) -> Result<TrajectoryRecord<T>> {
        self.chain.run(rng)
    }
}

pub fn prepare_w_like<T: Real>(
    params: &SpinStarParams<T>,
    measure_time: T,
    rng: &mut RngStream,
) -> Result<TrajectoryRecord<T>> {
    WLikeProtocol::new(params, measure_time)?.run(rng)
}

/// Iterated conditional measurement with uniform coupling `alpha`: measure,
/// and on `−1` reset the central spin up before the next interval.
#[derive(Debug, Clone)]
pub struct LadderProtocol<T: Real> {
    n_spins: usize,
    alpha: T,
    chain: Chain<T>,
    /// Bath state after every step succeeded, when reachable.
    target: Option<BathState<T>>,
}

impl<T: Real> LadderProtocol<T> {
    pub fn new(n_spins: usize, alpha: T, schedule: &[T]) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::NoSpins);
        }
        if !(alpha.is_finite() && alpha > T::zero()) {
            return Err(Error::NonPositiveCoupling);
        }
        if schedule.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if schedule.len() > n_spins {
            return Err(Error::LadderStep {
                step: schedule.len(),
                n: n_spins,
            });
        }
        if schedule.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("schedule"));
        }
        // ω = ω₀ = 0: the ladder assumes Δ = 0 and the sector offset is a global phase
        let params = SpinStarParams::uniform(n_spins, alpha, T::zero(), T::zero())?;
        let mut bath = BathState::all_down(n_spins)?;
        let mut evolved = Vec::with_capacity(schedule.len());
        let mut target = None;
        for (i, &t) in schedule.iter().enumerate() {
            let prop = SectorPropagator::for_params(&params, i)?;
            let state = prop.evolve(&bath.with_central_up()?, t)?;
            let reachable = !state.central_down_weight().is_zero();
            let next = reachable.then(|| collapse(&state, true)).transpose()?;
            evolved.push(state);
            match next {
                Some(b) if i + 1 == schedule.len() => target = Some(b),
                Some(b) => bath = b,
                None => break,
            }
        }
        // `evolved` may stop short of the schedule when a step cannot succeed
        Ok(Self {
            n_spins,
            alpha,
            chain: Chain {
                times: schedule.to_vec(),
                evolved,
            },
            target,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn schedule(&self) -> &[T] {
        &self.chain.times
    }

    /// Bath state reached when every measurement gives `−1`.
    pub fn target_state(&self) -> Option<&BathState<T>> {
        self.target.as_ref()
    }

    /// Product of the per-step `−1` probabilities.
    pub fn success_probability(&self) -> T {
        if self.chain.evolved.len() < self.chain.times.len() {
            return T::zero();
        }
        self.chain
            .evolved
            .iter()
            .fold(T::one(), |acc, s| acc * s.central_down_weight())
    }
}

impl<T: Real> Protocol<T> for LadderProtocol<T> {
    fn run(&self, rng: &mut RngStream) -> Result<TrajectoryRecord<T>> {
        self.chain.run(rng)
    }
}

pub fn run_ladder<T: Real>(
    n_spins: usize,
    alpha: T,
    target_k: usize,
    schedule: &[T],
    rng: &mut RngStream,
) -> Result<TrajectoryRecord<T>> {
    if schedule.len() != target_k {
        return Err(Error::ScheduleLength {
            expected: target_k,
            found: schedule.len(),
        });
    }
    LadderProtocol::new(n_spins, alpha, schedule)?.run(rng)
}

/// The uniform coupling of `params`, or why the ladder does not apply.
pub fn ladder_coupling<T: Real>(params: &SpinStarParams<T>) -> Result<T> {
    let alpha = params
        .uniform_coupling()
        .ok_or(Error::NonUniformCouplings)?;
    let delta = params.detuning();
    if !delta.is_zero() {
        return Err(Error::NonZeroDetuning(delta.to_f64_lossy()));
    }
    if alpha > T::zero() {
        Ok(alpha)
    } else {
        Err(Error::NonPositiveCoupling)
    }
}

/// Optimal (`n = 0`) schedule and the bath state it reaches with certainty,
/// phase-fixed so the amplitudes are real positive.
pub fn deterministic_ladder<T: Real>(
    n_spins: usize,
    alpha: T,
    target_k: usize,
) -> Result<(Vec<T>, BathState<T>)> {
    if target_k == 0 {
        return Err(Error::EmptySchedule);
    }
    let schedule = (1..=target_k)
        .map(|i| ladder_optimal_time(n_spins, i, alpha, 0))
        .collect::<Result<Vec<T>>>()?;
    let protocol = LadderProtocol::new(n_spins, alpha, &schedule)?;
    let state = protocol
        .target
        .ok_or(Error::ZeroProbabilityBranch)?
        .canonical_phase();
    Ok((schedule, state))
}

/// Runs `count` trajectories on streams `0..count` of `seed`, in parallel,
/// returned in stream order.
pub fn simulate_trajectories<T: Real, P: Protocol<T>>(
    protocol: &P,
    seed: u64,
    count: u64,
) -> Result<Vec<TrajectoryRecord<T>>> {
    (0..count)
        .into_par_iter()
        .map(|stream| protocol.run(&mut RngStream::new(seed, stream)))
        .collect()
}

/// Number of successful trajectories among `count` on `seed`, without keeping
/// the records.
pub fn count_successes<T: Real, P: Protocol<T>>(
    protocol: &P,
    seed: u64,
    count: u64,
) -> Result<u64> {
    (0..count)
        .into_par_iter()
        .map(|stream| {
            protocol
                .run(&mut RngStream::new(seed, stream))
                .map(|r| r.succeeded as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}
