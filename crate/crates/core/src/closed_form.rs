//! Analytic results for the single-excitation sector and the uniform-coupling
//! angular-momentum ladder.
//!
//! Starting from the central spin up and every bath spin down, the state stays
//! in the span of `|↑_A⟩|↓…↓⟩` (amplitude `a`) and `|↓_A⟩|↓…↑_j…↓⟩` (amplitudes
//! `b_j`). With `Ω = √(Σα² + Δ²)`:
//!
//! ```text
//! a(t)   = cos Ωt − i (Δ/Ω) sin Ωt
//! b_j(t) = −i (α_j/Ω) sin Ωt
//! ```
//!
//! When `Ω = 0` nothing moves: `a ≡ 1`, `b ≡ 0`.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::model::{check_spin_index, rabi_frequency, SpinStarParams};
use crate::scalar::{czero, Real};

/// `a(t)` and all `b_j(t)` at a single instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormAmplitudes<T: Real> {
    pub a: Complex<T>,
    pub b: Vec<Complex<T>>,
}

impl<T: Real> ClosedFormAmplitudes<T> {
    pub fn norm_sqr(&self) -> T {
        self.b
            .iter()
            .fold(self.a.norm_sqr(), |acc, z| acc + z.norm_sqr())
    }
}

/// One step of the uniform-coupling ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderStep<T: Real> {
    pub step_index: usize,
    pub p_i: T,
    /// Amplitude of `|↑_A⟩|N/2, −N/2+i−1⟩`.
    pub a: Complex<T>,
    /// Amplitude of `|↓_A⟩|N/2, −N/2+i⟩`.
    pub b: Complex<T>,
}

/// Bath state left behind when the central spin is found down.
#[derive(Debug, Clone, PartialEq)]
pub struct WLikeState<T: Real> {
    /// `amplitudes[j-1]` weights `|↓…↑_j…↓⟩`.
    pub amplitudes: Vec<Complex<T>>,
}

impl<T: Real> WLikeState<T> {
    pub fn norm_sqr(&self) -> T {
        crate::scalar::norm_sqr(&self.amplitudes)
    }

    /// Spin with the largest weight; ties go to the lower index.
    pub fn dominant_spin(&self) -> usize {
        let mut best = 0;
        for (k, z) in self.amplitudes.iter().enumerate() {
            if z.norm_sqr() > self.amplitudes[best].norm_sqr() {
                best = k;
            }
        }
        best + 1
    }

    /// `|⟨self|other⟩|²` for another single-excitation bath vector.
    pub fn fidelity(&self, other: &[Complex<T>]) -> T {
        let overlap = self
            .amplitudes
            .iter()
            .zip(other)
            .fold(czero::<T>(), |acc, (x, y)| acc + x.conj() * y);
        overlap.norm_sqr()
    }
}

pub fn amplitude_a<T: Real>(params: &SpinStarParams<T>, t: T) -> Complex<T> {
    let omega = rabi_frequency(params);
    if omega.is_zero() {
        return Complex::new(T::one(), T::zero());
    }
    let arg = omega * t;
    Complex::new(arg.cos(), -(params.detuning() / omega) * arg.sin())
}

/// `b_j(t)` for bath spin `j` (1-based).
pub fn amplitude_b<T: Real>(params: &SpinStarParams<T>, j: usize, t: T) -> Result<Complex<T>> {
    let alpha = params.coupling(j)?;
    let omega = rabi_frequency(params);
    if omega.is_zero() {
        return Ok(czero());
    }
    Ok(Complex::new(
        T::zero(),
        -(alpha / omega) * (omega * t).sin(),
    ))
}

pub fn amplitudes<T: Real>(params: &SpinStarParams<T>, t: T) -> ClosedFormAmplitudes<T> {
    let omega = rabi_frequency(params);
    let a = amplitude_a(params, t);
    let b = if omega.is_zero() {
        vec![czero(); params.n_spins()]
    } else {
        let s = (omega * t).sin();
        params
            .couplings()
            .iter()
            .map(|&alpha| Complex::new(T::zero(), -(alpha / omega) * s))
            .collect()
    };
    ClosedFormAmplitudes { a, b }
}

/// Probability that measuring the central spin at `t` yields −1.
pub fn success_probability<T: Real>(params: &SpinStarParams<T>, t: T) -> T {
    let omega = rabi_frequency(params);
    if omega.is_zero() {
        return T::zero();
    }
    let s = (omega * t).sin();
    params.sum_alpha_sq() / (omega * omega) * s * s
}

/// `t_n = π(2n+1)/(2Ω)`, the instants where the success probability peaks.
pub fn optimal_times<T: Real>(params: &SpinStarParams<T>, n: u32) -> Result<T> {
    let omega = rabi_frequency(params);
    if omega.is_zero() {
        return Err(Error::NoDynamics);
    }
    Ok(T::pi() * T::from_u32(2 * n + 1).unwrap() / (T::lit(2.0) * omega))
}

/// Success probability when measuring at `t_n (1 + x)`.
pub fn timing_robustness<T: Real>(params: &SpinStarParams<T>, n: u32, x: T) -> Result<T> {
    let tn = optimal_times(params, n)?;
    Ok(success_probability(params, tn * (T::one() + x)))
}

/// Normalized bath state `α_j / √Σα²` obtained on outcome −1.
pub fn w_like_state<T: Real>(params: &SpinStarParams<T>) -> Result<WLikeState<T>> {
    let total = params.sum_alpha_sq();
    if total.is_zero() {
        return Err(Error::ZeroCouplings);
    }
    let norm = total.sqrt();
    Ok(WLikeState {
        amplitudes: params
            .couplings()
            .iter()
            .map(|&a| Complex::new(a / norm, T::zero()))
            .collect(),
    })
}

/// Concurrence between bath spins `i < j`: `2|α_i||α_j| sin²(Ωt) / Ω²`.
pub fn pair_concurrence<T: Real>(
    params: &SpinStarParams<T>,
    i: usize,
    j: usize,
    t: T,
) -> Result<T> {
    check_pair(i, j, params.n_spins())?;
    let omega = rabi_frequency(params);
    if omega.is_zero() {
        return Ok(T::zero());
    }
    let s = (omega * t).sin();
    let ai = params.couplings()[i - 1].abs();
    let aj = params.couplings()[j - 1].abs();
    Ok(T::lit(2.0) * ai * aj / (omega * omega) * s * s)
}

pub(crate) fn check_pair(i: usize, j: usize, n: usize) -> Result<()> {
    check_spin_index(i, n)?;
    check_spin_index(j, n)?;
    if i >= j {
        return Err(Error::PairOrder { i, j });
    }
    Ok(())
}

fn check_step(n_spins: usize, step: usize) -> Result<()> {
    if n_spins == 0 {
        return Err(Error::NoSpins);
    }
    if step == 0 || step > n_spins {
        return Err(Error::LadderStep { step, n: n_spins });
    }
    Ok(())
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha.is_finite() && alpha > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositiveCoupling)
    }
}

/// Raising-operator matrix element between `M = −N/2+i−1` and `M+1` at `J = N/2`.
pub fn ladder_coefficient<T: Real>(n_spins: usize, i: usize) -> Result<T> {
    check_step(n_spins, i)?;
    // 4 p_i^2 = N(N+2) - (2i-2-N)(2i-N), exact in integers
    let n = n_spins as i64;
    let i = i as i64;
    let four_p_sq = n * (n + 2) - (2 * i - 2 - n) * (2 * i - n);
    Ok(T::from_i64(four_p_sq).unwrap().sqrt() / T::lit(2.0))
}

pub fn ladder_amplitudes<T: Real>(
    n_spins: usize,
    step_k: usize,
    alpha: T,
    t: T,
) -> Result<LadderStep<T>> {
    check_alpha(alpha)?;
    let p = ladder_coefficient::<T>(n_spins, step_k)?;
    let arg = p * alpha * t;
    Ok(LadderStep {
        step_index: step_k,
        p_i: p,
        a: Complex::new(arg.cos(), T::zero()),
        b: Complex::new(T::zero(), -arg.sin()),
    })
}

/// `∏_i sin²(p_i α t_i)` over the schedule.
pub fn ladder_success_probability<T: Real>(n_spins: usize, alpha: T, times: &[T]) -> Result<T> {
    check_alpha(alpha)?;
    if times.is_empty() {
        return Err(Error::EmptySchedule);
    }
    times
        .iter()
        .enumerate()
        .try_fold(T::one(), |acc, (idx, &t)| {
            let p = ladder_coefficient::<T>(n_spins, idx + 1)?;
            let s = (p * alpha * t).sin();
            Ok(acc * s * s)
        })
}

/// `(2n+1)π / (2 α p_i)`.
pub fn ladder_optimal_time<T: Real>(n_spins: usize, step_i: usize, alpha: T, n: u32) -> Result<T> {
    check_alpha(alpha)?;
    let p = ladder_coefficient::<T>(n_spins, step_i)?;
    Ok(T::pi() * T::from_u32(2 * n + 1).unwrap() / (T::lit(2.0) * alpha * p))
}

/// Probability of finding the joint system back in its initial state, `|a(t)|²`.
pub fn survival_probability<T: Real>(params: &SpinStarParams<T>, t: T) -> T {
    amplitude_a(params, t).norm_sqr()
}
