//! Brute-force evolution on the whole `2^(N+1)`-dimensional space.
//!
//! Basis index layout: bit 0 is the central spin, bit `j` is bath spin `j`;
//! a set bit means spin up. The Hamiltonian is applied matrix-free and the
//! propagator is a sliced Taylor series, so nothing here depends on the
//! sector enumeration.
//!
//! Zeeman sign: the Zeeman term is taken as `−(ω Σ_j σ_z^j + ω₀ σ_z^A)`,
//! which puts `+Δ` on the central-up amplitudes exactly as the sector
//! equations do (with `Δ = ω − ω₀`). Flipping this sign is equivalent to
//! `Δ → −Δ`; populations, probabilities and concurrences depend on `Δ²` only.

use std::sync::Arc;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::model::{enumerate_sector, SpinStarParams};
use crate::scalar::{czero, phase, Real};

use super::{SectorPropagator, SectorState};

/// Largest bath size accepted by the full-space routines.
pub const MAX_FULL_SPINS: usize = 12;

/// State vector on the full product space.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState<T: Real> {
    n_spins: usize,
    amplitudes: Vec<Complex<T>>,
}

fn check_size(n_spins: usize) -> Result<()> {
    if n_spins == 0 {
        return Err(Error::NoSpins);
    }
    if n_spins > MAX_FULL_SPINS {
        return Err(Error::FullSpaceTooLarge {
            n: n_spins,
            max: MAX_FULL_SPINS,
        });
    }
    Ok(())
}

/// Index of a configuration in the full basis.
pub fn full_index(central_up: bool, up_set: &[usize]) -> usize {
    up_set
        .iter()
        .fold(central_up as usize, |acc, &j| acc | (1 << j))
}

impl<T: Real> FullState<T> {
    pub fn new(n_spins: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_size(n_spins)?;
        let dim = 1usize << (n_spins + 1);
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            n_spins,
            amplitudes,
        })
    }

    /// Product state from per-spin `(up, down)` amplitudes; `spins[0]` is the
    /// central spin, `spins[j]` bath spin `j`.
    pub fn product(spins: &[[Complex<T>; 2]]) -> Result<Self> {
        let n_spins = spins.len().saturating_sub(1);
        check_size(n_spins)?;
        let dim = 1usize << spins.len();
        let amplitudes = (0..dim)
            .map(|idx| {
                spins
                    .iter()
                    .enumerate()
                    .fold(Complex::new(T::one(), T::zero()), |acc, (bit, s)| {
                        acc * if idx >> bit & 1 == 1 { s[0] } else { s[1] }
                    })
            })
            .collect();
        Ok(Self {
            n_spins,
            amplitudes,
        })
    }

    /// Embeds a sector state.
    pub fn from_sector(state: &SectorState<T>) -> Result<Self> {
        let n_spins = state.basis().n_spins();
        check_size(n_spins)?;
        let mut amplitudes = vec![czero(); 1 << (n_spins + 1)];
        for (central, set, z) in state.entries() {
            amplitudes[full_index(central, set)] = z;
        }
        Ok(Self {
            n_spins,
            amplitudes,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        crate::scalar::norm_sqr(&self.amplitudes)
    }

    /// Restriction to the sector with `p` excitations (not renormalized).
    pub fn project_sector(&self, excitation_p: usize) -> Result<SectorState<T>> {
        let basis = Arc::new(enumerate_sector(self.n_spins, excitation_p)?);
        let amps = basis
            .elements()
            .iter()
            .map(|e| self.amplitudes[full_index(e.central_up, &e.up_set)])
            .collect();
        SectorState::new(basis, amps)
    }

    /// `⟨S_z⟩` including the central spin.
    pub fn expectation_sz(&self) -> T {
        let half = T::lit(0.5);
        self.amplitudes
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (idx, z)| {
                let ups = idx.count_ones() as i64;
                let twice = 2 * ups - (self.n_spins as i64 + 1);
                acc + z.norm_sqr() * T::from_i64(twice).unwrap() * half
            })
    }
}

/// `H ψ` for the complete Hamiltonian.
fn apply_hamiltonian<T: Real>(
    params: &SpinStarParams<T>,
    psi: &[Complex<T>],
    out: &mut [Complex<T>],
) {
    let n = params.n_spins();
    let alphas = params.couplings();
    for (idx, o) in out.iter_mut().enumerate() {
        let mut zeeman = T::zero();
        for j in 1..=n {
            zeeman += if idx >> j & 1 == 1 {
                params.omega()
            } else {
                -params.omega()
            };
        }
        zeeman += if idx & 1 == 1 {
            params.omega0()
        } else {
            -params.omega0()
        };
        let mut acc = psi[idx] * (-zeeman);
        // exchange: central and spin j swap when antiparallel
        let central = idx & 1;
        for (j, &a) in (1..=n).zip(alphas) {
            if (idx >> j & 1) != central {
                acc += psi[idx ^ 1 ^ (1 << j)] * a;
            }
        }
        *o = acc;
    }
}

/// Evolves a full-space state for time `t` (N ≤ 12).
pub fn evolve_full<T: Real>(
    params: &SpinStarParams<T>,
    state: &FullState<T>,
    t: T,
) -> Result<FullState<T>> {
    check_size(params.n_spins())?;
    if state.n_spins != params.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: params.n_spins(),
            found: state.n_spins,
        });
    }
    let n = params.n_spins();
    let bound = T::from_usize_lossy(n) * params.omega().abs()
        + params.omega0().abs()
        + params
            .couplings()
            .iter()
            .fold(T::zero(), |acc, a| acc + a.abs());
    let mut psi = state.amplitudes.clone();
    if t.is_zero() || bound.is_zero() {
        return Ok(state.clone());
    }
    // slices with |H| dt <= 1/2
    let slices = (bound * t.abs() * T::lit(2.0))
        .ceil()
        .to_f64_lossy()
        .max(1.0) as usize;
    let dt = t / T::from_usize_lossy(slices);
    let dim = psi.len();
    let mut term = vec![czero::<T>(); dim];
    let mut next = vec![czero::<T>(); dim];
    let tiny = T::default_epsilon() * T::lit(1e-3);
    for _ in 0..slices {
        term.copy_from_slice(&psi);
        for k in 1..80 {
            apply_hamiltonian(params, &term, &mut next);
            // term <- (-i dt / k) H term
            let scale = dt / T::from_usize_lossy(k);
            let mut size = T::zero();
            for (tm, nx) in term.iter_mut().zip(&next) {
                *tm = Complex::new(nx.im * scale, -nx.re * scale);
                size += tm.norm_sqr();
            }
            for (p, tm) in psi.iter_mut().zip(&term) {
                *p += *tm;
            }
            if size.sqrt() < tiny {
                break;
            }
        }
    }
    Ok(FullState {
        n_spins: n,
        amplitudes: psi,
    })
}

/// Same evolution as [`evolve_full`], assembled from independent sector
/// evolutions plus the two one-dimensional extreme sectors.
pub fn evolve_by_sectors<T: Real>(
    params: &SpinStarParams<T>,
    state: &FullState<T>,
    t: T,
) -> Result<FullState<T>> {
    check_size(params.n_spins())?;
    if state.n_spins != params.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: params.n_spins(),
            found: state.n_spins,
        });
    }
    let n = params.n_spins();
    let mut out = vec![czero::<T>(); state.amplitudes.len()];
    for p in 0..n {
        let prop = SectorPropagator::for_params(params, p)?;
        let piece = state.project_sector(p)?;
        let offset = phase(prop.hamiltonian().energy_offset() * t);
        let evolved = prop.evolve(&piece, t)?;
        for (central, set, z) in evolved.entries() {
            out[full_index(central, set)] = z * offset;
        }
    }
    // |↓_A ↓…↓⟩ and |↑_A ↑…↑⟩ are eigenstates
    let nn = T::from_usize_lossy(n);
    let bottom = 0usize;
    let top = (1usize << (n + 1)) - 1;
    let e_bottom = params.omega0() + nn * params.omega();
    let e_top = -(params.omega0() + nn * params.omega());
    out[bottom] = state.amplitudes[bottom] * phase(e_bottom * t);
    out[top] = state.amplitudes[top] * phase(e_top * t);
    Ok(FullState {
        n_spins: n,
        amplitudes: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_params;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spinor(rng: &mut ChaCha8Rng) -> [Complex<f64>; 2] {
        let u: Complex<f64> =
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let d: Complex<f64> =
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let norm: f64 = (u.norm_sqr() + d.norm_sqr()).sqrt();
        [u / norm, d / norm]
    }

    #[test]
    fn zero_time_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spins: Vec<_> = (0..4).map(|_| random_spinor(&mut rng)).collect();
        let s = FullState::product(&spins).unwrap();
        let p = make_params(3, vec![0.2, 0.4, 0.6], 1.0, 0.5).unwrap();
        assert_eq!(evolve_full(&p, &s, 0.0).unwrap(), s);
    }

    #[test]
    fn ground_state_stays_in_its_sector() {
        let p = make_params(4, vec![0.3, 0.5, 0.7, 0.9], 0.8, 0.2).unwrap();
        let s0 = FullState::from_sector(&SectorState::ground(4).unwrap()).unwrap();
        let s: FullState<f64> = evolve_full(&p, &s0, 2.7).unwrap();
        let sector = enumerate_sector(4, 0).unwrap();
        let allowed: Vec<usize> = sector
            .elements()
            .iter()
            .map(|e| full_index(e.central_up, &e.up_set))
            .collect();
        for (idx, z) in s.amplitudes().iter().enumerate() {
            if !allowed.contains(&idx) {
                assert!(z.norm() < 1e-15, "leak into {idx}");
            }
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_matches_sector_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let alphas: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..1.0)).collect();
        let p = make_params(5, alphas, 0.9, -0.4).unwrap();
        let spins: Vec<_> = (0..6).map(|_| random_spinor(&mut rng)).collect();
        let s0 = FullState::product(&spins).unwrap();
        let a = evolve_full(&p, &s0, 1.3).unwrap();
        let b = evolve_by_sectors(&p, &s0, 1.3).unwrap();
        let dev = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-9, "{dev}");
        assert!((a.expectation_sz() - s0.expectation_sz()).abs() < 1e-10);
    }

    #[test]
    fn size_guard() {
        let p = make_params(13, vec![0.1; 13], 0.0, 0.0).unwrap();
        assert!(matches!(
            FullState::<f64>::new(13, vec![]),
            Err(Error::FullSpaceTooLarge { n: 13, .. })
        ));
        let s = FullState::<f64>::new(2, vec![Complex::new(0.0, 0.0); 8]).unwrap();
        assert!(evolve_full(&p, &s, 1.0).is_err());
    }
}
