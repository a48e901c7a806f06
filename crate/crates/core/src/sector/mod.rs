//! Numerical dynamics inside one conserved-`S_z` sector.
//!
//! In the sector basis the Hamiltonian is real symmetric:
//!
//! * central-up elements carry `+Δ` on the diagonal, central-down elements `−Δ`;
//! * `a_S` couples to `b_{S ∪ {r}}` with strength `α_r` for every `r ∉ S`.
//!
//! The Zeeman energy common to the whole sector, `ω (N − 2p − 1)`, is kept in
//! [`SectorHamiltonian::energy_offset`] but is not applied by
//! [`evolve_sector`]: within one sector it is a global phase. The full-space
//! propagator in [`full`] restores it when sectors are recombined.

pub mod full;
pub mod ode;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{add_index, enumerate_sector, remove_index, SectorBasis, SpinStarParams};
use crate::scalar::{czero, phase, Real};

/// Largest sector handled with dense matrices.
pub const MAX_DENSE_DIM: usize = 5000;

/// Amplitude vector over a sector basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState<T: Real> {
    basis: Arc<SectorBasis>,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> SectorState<T> {
    pub fn new(basis: Arc<SectorBasis>, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Central spin up, bath spins in `up_set` up, all others down.
    pub fn configuration(n_spins: usize, up_set: &[usize]) -> Result<Self> {
        let basis = Arc::new(enumerate_sector(n_spins, up_set.len())?);
        let rank = basis.rank_of(true, up_set).ok_or(Error::SpinIndex {
            index: up_set.iter().copied().max().unwrap_or(0),
            n: n_spins,
        })?;
        let mut amplitudes = vec![czero(); basis.len()];
        amplitudes[rank] = Complex::new(T::one(), T::zero());
        Ok(Self { basis, amplitudes })
    }

    /// Central spin up, all bath spins down.
    pub fn ground(n_spins: usize) -> Result<Self> {
        Self::configuration(n_spins, &[])
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn amplitude(&self, central_up: bool, up_set: &[usize]) -> Option<Complex<T>> {
        self.basis
            .rank_of(central_up, up_set)
            .map(|r| self.amplitudes[r])
    }

    pub fn norm_sqr(&self) -> T {
        crate::scalar::norm_sqr(&self.amplitudes)
    }

    /// Split point between the central-up and central-down blocks.
    pub fn up_block_len(&self) -> usize {
        self.basis.up_block_len()
    }

    /// Weight of the central-up block.
    pub fn central_up_weight(&self) -> T {
        crate::scalar::norm_sqr(&self.amplitudes[..self.up_block_len()])
    }

    /// Weight of the central-down block.
    pub fn central_down_weight(&self) -> T {
        crate::scalar::norm_sqr(&self.amplitudes[self.up_block_len()..])
    }

    /// `(central_up, up_set, amplitude)` for every basis element.
    pub fn entries(&self) -> impl Iterator<Item = (bool, &[usize], Complex<T>)> + '_ {
        self.basis
            .elements()
            .iter()
            .zip(&self.amplitudes)
            .map(|(e, &z)| (e.central_up, e.up_set.as_slice(), z))
    }
}

/// Sector Hamiltonian stored as a dense real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian<T: Real> {
    basis: Arc<SectorBasis>,
    matrix: DMatrix<T>,
    energy_offset: T,
}

impl<T: Real> SectorHamiltonian<T> {
    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// Zeeman energy shared by every element of the sector.
    pub fn energy_offset(&self) -> T {
        self.energy_offset
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Builds the sector Hamiltonian for "central up, `p` bath spins up".
pub fn build_sector_hamiltonian<T: Real>(
    params: &SpinStarParams<T>,
    excitation_p: usize,
) -> Result<SectorHamiltonian<T>> {
    let n = params.n_spins();
    if excitation_p >= n {
        return Err(Error::ExcitationOutOfRange { p: excitation_p, n });
    }
    let dim = crate::model::binomial(n, excitation_p) + crate::model::binomial(n, excitation_p + 1);
    if dim > MAX_DENSE_DIM {
        return Err(Error::SectorTooLarge {
            dim,
            max: MAX_DENSE_DIM,
        });
    }
    let basis = Arc::new(enumerate_sector(n, excitation_p)?);
    build_on_basis(params, basis)
}

fn build_on_basis<T: Real>(
    params: &SpinStarParams<T>,
    basis: Arc<SectorBasis>,
) -> Result<SectorHamiltonian<T>> {
    let n = params.n_spins();
    let dim = basis.len();
    let split = basis.up_block_len();
    let delta = params.detuning();
    let alphas = params.couplings();
    let mut matrix = DMatrix::<T>::zeros(dim, dim);

    for (row, e) in basis.elements().iter().enumerate() {
        if row < split {
            matrix[(row, row)] = delta;
            // a_S <- b_{O(S ∪ {r})}, r ∉ S
            for r in 1..=n {
                if e.is_up(r) {
                    continue;
                }
                let target = add_index(&e.up_set, r)?;
                let col = basis
                    .rank_of(false, &target)
                    .expect("O(S ∪ {r}) lies in the sector");
                matrix[(row, col)] = alphas[r - 1];
            }
        } else {
            matrix[(row, row)] = -delta;
            // b_S <- a_{δ_r(S)}, r ∈ S
            for &r in &e.up_set {
                let target = remove_index(&e.up_set, r)?;
                let col = basis
                    .rank_of(true, &target)
                    .expect("δ_r(S) lies in the sector");
                matrix[(row, col)] = alphas[r - 1];
            }
        }
    }
    let p = basis.excitation_p() as i64;
    let energy_offset = params.omega() * T::from_i64(n as i64 - 2 * p - 1).unwrap();
    Ok(SectorHamiltonian {
        basis,
        matrix,
        energy_offset,
    })
}

/// Cached eigendecomposition of a sector Hamiltonian.
#[derive(Debug, Clone)]
pub struct SectorPropagator<T: Real> {
    hamiltonian: SectorHamiltonian<T>,
    energies: DVector<T>,
    modes: DMatrix<T>,
}

impl<T: Real> SectorPropagator<T> {
    pub fn new(hamiltonian: SectorHamiltonian<T>) -> Self {
        let eig = SymmetricEigen::new(hamiltonian.matrix.clone());
        Self {
            hamiltonian,
            energies: eig.eigenvalues,
            modes: eig.eigenvectors,
        }
    }

    pub fn for_params(params: &SpinStarParams<T>, excitation_p: usize) -> Result<Self> {
        Ok(Self::new(build_sector_hamiltonian(params, excitation_p)?))
    }

    pub fn hamiltonian(&self) -> &SectorHamiltonian<T> {
        &self.hamiltonian
    }

    pub fn energies(&self) -> &DVector<T> {
        &self.energies
    }

    /// `exp(−iHt) ψ` for amplitudes ordered like the sector basis.
    pub fn propagate(&self, psi: &[Complex<T>], t: T) -> Result<Vec<Complex<T>>> {
        let dim = self.hamiltonian.dim();
        if psi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.len(),
            });
        }
        if t.is_zero() {
            return Ok(psi.to_vec());
        }
        // coefficients in the eigenbasis, then phase, then back
        let mut coeffs = vec![czero::<T>(); dim];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let col = self.modes.column(k);
            let mut acc = czero::<T>();
            for (v, z) in col.iter().zip(psi) {
                acc += *z * *v;
            }
            *c = acc * phase(self.energies[k] * t);
        }
        let mut out = vec![czero::<T>(); dim];
        for (k, c) in coeffs.iter().enumerate() {
            let col = self.modes.column(k);
            for (o, v) in out.iter_mut().zip(col.iter()) {
                *o += *c * *v;
            }
        }
        Ok(out)
    }

    pub fn evolve(&self, state: &SectorState<T>, t: T) -> Result<SectorState<T>> {
        if state.basis.as_ref() != self.hamiltonian.basis.as_ref() {
            return Err(Error::DimensionMismatch {
                expected: self.hamiltonian.dim(),
                found: state.amplitudes.len(),
            });
        }
        Ok(SectorState {
            basis: Arc::clone(&state.basis),
            amplitudes: self.propagate(&state.amplitudes, t)?,
        })
    }
}

/// Evolves `initial` for time `t` under the sector Hamiltonian of `params`.
pub fn evolve_sector<T: Real>(
    params: &SpinStarParams<T>,
    initial: &SectorState<T>,
    t: T,
) -> Result<SectorState<T>> {
    if initial.basis.n_spins() != params.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: params.n_spins(),
            found: initial.basis.n_spins(),
        });
    }
    let ham = build_on_basis(params, Arc::clone(&initial.basis))?;
    if ham.dim() > MAX_DENSE_DIM {
        return Err(Error::SectorTooLarge {
            dim: ham.dim(),
            max: MAX_DENSE_DIM,
        });
    }
    SectorPropagator::new(ham).evolve(initial, t)
}

/// `⟨S_z⟩` including the central spin.
pub fn expectation_sz<T: Real>(state: &SectorState<T>) -> T {
    let n = state.basis.n_spins();
    state
        .basis
        .elements()
        .iter()
        .zip(&state.amplitudes)
        .fold(T::zero(), |acc, (e, z)| {
            acc + z.norm_sqr() * T::from_i64(e.twice_sz(n)).unwrap() / T::lit(2.0)
        })
}

/// `⟨J_z⟩` over the bath spins.
pub fn expectation_jz<T: Real>(state: &SectorState<T>) -> T {
    bath_moments(state.basis.n_spins(), state.entries()).0
}

/// `⟨J²⟩` over the bath spins.
pub fn expectation_j2<T: Real>(state: &SectorState<T>) -> T {
    bath_moments(state.basis.n_spins(), state.entries()).1
}

/// `(⟨J_z⟩, ⟨J²⟩)` of the bath for a list of `(central_up, up_set, amplitude)`.
///
/// Uses `J² = J_z² − J_z + J₊J₋`, with `⟨J₊J₋⟩ = ‖J₋ψ‖²`.
pub(crate) fn bath_moments<'a, T: Real>(
    n_spins: usize,
    entries: impl Iterator<Item = (bool, &'a [usize], Complex<T>)>,
) -> (T, T) {
    let half = T::lit(0.5);
    let mut jz = T::zero();
    let mut jz2 = T::zero();
    let mut lowered: BTreeMap<(bool, Vec<usize>), Complex<T>> = BTreeMap::new();
    for (central, set, z) in entries {
        let w = z.norm_sqr();
        let m = T::from_i64(2 * set.len() as i64 - n_spins as i64).unwrap() * half;
        jz += w * m;
        jz2 += w * m * m;
        for k in 0..set.len() {
            let mut target = set.to_vec();
            target.remove(k);
            *lowered.entry((central, target)).or_insert_with(czero) += z;
        }
    }
    let jpjm = lowered
        .values()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr());
    (jz, jz2 - jz + jpjm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_params;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params(alphas: &[f64], delta: f64) -> SpinStarParams<f64> {
        make_params(alphas.len(), alphas.to_vec(), delta + 0.25, 0.25).unwrap()
    }

    fn random_state(basis: Arc<SectorBasis>, rng: &mut ChaCha8Rng) -> SectorState<f64> {
        let mut amps: Vec<Complex<f64>> = (0..basis.len())
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = crate::scalar::norm_sqr(&amps).sqrt();
        amps.iter_mut().for_each(|z| *z /= norm);
        SectorState::new(basis, amps).unwrap()
    }

    #[test]
    fn n1_hamiltonian_is_two_level() {
        let p = params(&[0.8], 0.3);
        let h = build_sector_hamiltonian(&p, 0).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.3, 0.8, 0.8, -0.3]);
        assert!((h.matrix() - expect).abs().max() < 1e-15);
    }

    #[test]
    fn n2_hamiltonian_layout() {
        let p = params(&[0.4, 0.9], -0.5);
        let h = build_sector_hamiltonian(&p, 0).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[-0.5, 0.4, 0.9, 0.4, 0.5, 0.0, 0.9, 0.0, 0.5]);
        assert!((h.matrix() - expect).abs().max() < 1e-15);
    }

    #[test]
    fn n3_p1_coupling_uses_index_insertion() {
        let p = params(&[0.1, 0.2, 0.3], 0.0);
        let h = build_sector_hamiltonian(&p, 1).unwrap();
        assert_eq!(h.dim(), 6);
        let b = h.basis();
        let a1 = b.rank_of(true, &[1]).unwrap();
        let b13 = b.rank_of(false, &[1, 3]).unwrap();
        assert_eq!(h.matrix()[(a1, b13)], 0.3);
        assert_eq!(h.matrix()[(b13, a1)], 0.3);
        // a_{1} and b_{2,3} are not connected
        let b23 = b.rank_of(false, &[2, 3]).unwrap();
        assert_eq!(h.matrix()[(a1, b23)], 0.0);
    }

    #[test]
    fn hamiltonian_is_symmetric_and_block_off_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..8 {
            let alphas: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = params(&alphas, 0.7);
            for ex in 0..n {
                let h = build_sector_hamiltonian(&p, ex).unwrap();
                let m = h.matrix();
                assert!((m - m.transpose()).abs().max() < 1e-12);
                let split = h.basis().up_block_len();
                for r in 0..h.dim() {
                    for c in 0..h.dim() {
                        if r != c && (r < split) == (c < split) {
                            assert_eq!(m[(r, c)], 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sector_too_large_is_rejected() {
        let p = make_params(14, vec![0.1; 14], 0.0, 0.0).unwrap();
        assert!(matches!(
            build_sector_hamiltonian(&p, 6),
            Err(Error::SectorTooLarge { dim: 6435, .. })
        ));
        assert!(matches!(
            build_sector_hamiltonian(&p, 14),
            Err(Error::ExcitationOutOfRange { .. })
        ));
    }

    #[test]
    fn evolve_examples() {
        let p = params(&[1.0], 0.0);
        let s0 = SectorState::ground(1).unwrap();
        let s = evolve_sector(&p, &s0, 0.0).unwrap();
        assert_eq!(s, s0);
        let s = evolve_sector(&p, &s0, PI / 2.0).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-14);
        assert!((s.amplitudes()[1] - Complex::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn evolve_rejects_mismatched_state() {
        let p = params(&[1.0, 0.5], 0.0);
        let s0 = SectorState::ground(3).unwrap();
        assert!(matches!(
            evolve_sector(&p, &s0, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigen_propagator_agrees_with_ode() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alphas: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..1.0)).collect();
        let p = params(&alphas, 0.6);
        for ex in 0..3 {
            let prop = SectorPropagator::for_params(&p, ex).unwrap();
            let s0 = random_state(Arc::clone(prop.hamiltonian().basis()), &mut rng);
            let eig = prop.evolve(&s0, 3.1).unwrap();
            let ode = ode::integrate_schrodinger(
                prop.hamiltonian().matrix(),
                s0.amplitudes(),
                3.1,
                1e-12,
                1e-14,
            )
            .unwrap();
            for (x, y) in eig.amplitudes().iter().zip(&ode) {
                assert!((x - y).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn unitarity_and_sz_over_long_times() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = params(&[0.3, 0.9, 0.5, 0.7, 0.2, 0.4], 1.3);
        let prop = SectorPropagator::for_params(&p, 2).unwrap();
        let s0 = random_state(Arc::clone(prop.hamiltonian().basis()), &mut rng);
        let sz0 = expectation_sz(&s0);
        for &t in &[3.0, 10.0, 100.0, 1000.0] {
            let s = prop.evolve(&s0, t).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10, "t={t}");
            assert!((expectation_sz(&s) - sz0).abs() < 1e-10);
        }
    }

    #[test]
    fn collective_observables() {
        // W state on N spins: J² = N/2(N/2+1), J_z = -N/2+1
        for n in 1..7 {
            let basis = Arc::new(enumerate_sector(n, 0).unwrap());
            let mut amps = vec![Complex::new(0.0, 0.0); basis.len()];
            for a in amps.iter_mut().skip(1) {
                *a = Complex::new(1.0 / (n as f64).sqrt(), 0.0);
            }
            let s = SectorState::new(basis, amps).unwrap();
            let j = n as f64 / 2.0;
            assert!((expectation_j2(&s) - j * (j + 1.0)).abs() < 1e-12);
            assert!((expectation_jz(&s) - (1.0 - j)).abs() < 1e-12);
            let g = SectorState::<f64>::ground(n).unwrap();
            assert!((expectation_jz(&g) + j).abs() < 1e-15);
            assert!((expectation_sz(&g) - (0.5 - j)).abs() < 1e-15);
        }
        // singlet-like combination of two spins: J² = 0
        let basis = Arc::new(enumerate_sector(2, 0).unwrap());
        let r = 1.0 / 2f64.sqrt();
        let amps = vec![
            Complex::new(0.0, 0.0),
            Complex::new(r, 0.0),
            Complex::new(-r, 0.0),
        ];
        let s = SectorState::new(basis, amps).unwrap();
        assert!(expectation_j2(&s).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn uniform_coupling_conserves_j2(
            n in 1usize..7, alpha in 0.1f64..1.0, t in 0.0f64..20.0, seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = make_params(n, vec![alpha; n], 0.0, 0.0).unwrap();
            let ex = seed as usize % n;
            let prop = SectorPropagator::for_params(&p, ex).unwrap();
            let s0 = random_state(Arc::clone(prop.hamiltonian().basis()), &mut rng);
            let s = prop.evolve(&s0, t).unwrap();
            prop_assert!((expectation_j2(&s) - expectation_j2(&s0)).abs() < 1e-9);
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}
