//! Two-spin reduced density matrices and Wootters concurrence.
//!
//! Pair basis order is `{↑↑, ↑↓, ↓↑, ↓↓}` with the first label belonging to
//! the lower spin index.
//!
//! The `λ_k` of the Wootters formula are the square roots of the eigenvalues
//! of `ρ ρ̃`. Writing `ρ = A A†` with `A = V √μ` from the eigendecomposition,
//! they are the singular values of `A† (σ_y⊗σ_y) A*`, which avoids forming
//! the non-Hermitian product and stays accurate for rank-deficient `ρ`
//! (every pure-state marginal of this model has rank ≤ 2).

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, Matrix4, SymmetricEigen, SVD};

use crate::closed_form::check_pair;
use crate::error::{Error, Result};
use crate::scalar::{czero, Real};
use crate::sector::full::FullState;
use crate::sector::SectorState;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;
const PSD_TOL: f64 = 1e-12;

/// Validated 4×4 two-spin density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDensityMatrix<T: Real> {
    matrix: Matrix4<Complex<T>>,
}

impl<T: Real> PairDensityMatrix<T> {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(matrix: Matrix4<Complex<T>>) -> Result<Self> {
        let herm = (matrix - matrix.adjoint())
            .iter()
            .fold(T::zero(), |m, z| m.max(z.norm_sqr().sqrt()));
        if herm > T::lit(HERMITIAN_TOL) {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {:e})",
                herm.to_f64_lossy()
            )));
        }
        let tr = matrix.trace().re;
        if (tr - T::one()).abs() > T::lit(TRACE_TOL) {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {}",
                tr.to_f64_lossy()
            )));
        }
        let rho = Self { matrix };
        let min = rho
            .eigenvalues()
            .iter()
            .fold(T::max_value().unwrap(), |m, &x| m.min(x));
        if min < -T::lit(PSD_TOL) {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {:e}",
                min.to_f64_lossy()
            )));
        }
        Ok(rho)
    }

    /// Density matrix of a pure two-spin state.
    pub fn from_pure(psi: [Complex<T>; 4]) -> Result<Self> {
        let v = nalgebra::Vector4::from(psi);
        Self::new(v * v.adjoint())
    }

    pub fn matrix(&self) -> &Matrix4<Complex<T>> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        SymmetricEigen::new(self.matrix)
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }

    /// `(σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
    pub fn spin_flipped(&self) -> Matrix4<Complex<T>> {
        let y = spin_flip::<T>();
        y * self.matrix.conjugate() * y
    }
}

/// `σ_y⊗σ_y`: antidiagonal with signs `(−1, +1, +1, −1)`.
fn spin_flip<T: Real>() -> Matrix4<Complex<T>> {
    let mut y = Matrix4::from_element(czero());
    let one = Complex::new(T::one(), T::zero());
    y[(0, 3)] = -one;
    y[(1, 2)] = one;
    y[(2, 1)] = one;
    y[(3, 0)] = -one;
    y
}

/// A state whose two-spin marginals can be taken.
pub trait PairMarginal<T: Real> {
    fn n_spins(&self) -> usize;

    /// Groups amplitudes by the configuration of every spin other than `i`
    /// and `j`; each group lists the four pair amplitudes in basis order.
    fn pair_groups(&self, i: usize, j: usize) -> Vec<[Complex<T>; 4]>;
}

fn pair_slot(i_up: bool, j_up: bool) -> usize {
    match (i_up, j_up) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

impl<T: Real> PairMarginal<T> for SectorState<T> {
    fn n_spins(&self) -> usize {
        self.basis().n_spins()
    }

    fn pair_groups(&self, i: usize, j: usize) -> Vec<[Complex<T>; 4]> {
        let mut groups: BTreeMap<(bool, Vec<usize>), [Complex<T>; 4]> = BTreeMap::new();
        for (central, set, z) in self.entries() {
            let rest: Vec<usize> = set.iter().copied().filter(|&s| s != i && s != j).collect();
            let slot = pair_slot(set.contains(&i), set.contains(&j));
            groups.entry((central, rest)).or_insert([czero(); 4])[slot] += z;
        }
        groups.into_values().collect()
    }
}

impl<T: Real> PairMarginal<T> for FullState<T> {
    fn n_spins(&self) -> usize {
        FullState::n_spins(self)
    }

    fn pair_groups(&self, i: usize, j: usize) -> Vec<[Complex<T>; 4]> {
        let (bi, bj) = (1usize << i, 1usize << j);
        let amps = self.amplitudes();
        (0..amps.len())
            .filter(|idx| idx & (bi | bj) == 0)
            .map(|rest| {
                [
                    amps[rest | bi | bj],
                    amps[rest | bi],
                    amps[rest | bj],
                    amps[rest],
                ]
            })
            .collect()
    }
}

/// Partial trace over the central spin and every bath spin except `i < j`.
pub fn reduced_pair_density<T: Real, S: PairMarginal<T>>(
    state: &S,
    i: usize,
    j: usize,
) -> Result<PairDensityMatrix<T>> {
    check_pair(i, j, state.n_spins())?;
    let mut rho = Matrix4::from_element(czero::<T>());
    for g in state.pair_groups(i, j) {
        for r in 0..4 {
            for c in 0..4 {
                rho[(r, c)] += g[r] * g[c].conj();
            }
        }
    }
    let tr = rho.trace().re;
    if (tr - T::one()).abs() > T::lit(TRACE_TOL) {
        return Err(Error::NotNormalized(tr.to_f64_lossy()));
    }
    PairDensityMatrix::new(rho)
}

/// `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
pub fn wootters_concurrence<T: Real>(rho: &PairDensityMatrix<T>) -> T {
    let eig = SymmetricEigen::new(rho.matrix);
    let mu_max = eig.eigenvalues.iter().fold(T::zero(), |m, &x| m.max(x));
    if mu_max.is_zero() {
        return T::zero();
    }
    // eigenvalues at rounding level are treated as exact zeros
    let cutoff = T::default_epsilon() * T::lit(16.0) * mu_max;
    let kept: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] > cutoff).collect();
    let a = DMatrix::from_fn(4, kept.len(), |r, c| {
        let k = kept[c];
        eig.eigenvectors[(r, k)] * Complex::new(eig.eigenvalues[k].sqrt(), T::zero())
    });
    let y = DMatrix::from_fn(4, 4, |r, c| spin_flip::<T>()[(r, c)]);
    let m = a.adjoint() * y * a.conjugate();
    let mut lambda: Vec<T> = SVD::new(m, false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    lambda.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    let c = lambda.iter().skip(1).fold(
        lambda.first().copied().unwrap_or_else(T::zero),
        |acc, &l| acc - l,
    );
    c.max(T::zero()).min(T::one())
}
