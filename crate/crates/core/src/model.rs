//! Model parameters, conserved-sector bases and index-set operators.
//!
//! The bath spins are labelled `1..=N`. A configuration is described by the
//! central spin value and the ascending list of bath spins that point up.
//! Total `S_z` is conserved, so the dynamics started from "central up, `p`
//! bath spins up" never leaves the sector spanned by
//!
//! * central up with exactly `p` bath spins up, and
//! * central down with exactly `p + 1` bath spins up.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reduced Planck constant in eV·s (CODATA 2018).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// Parameters of the disordered spin star.
///
/// All frequencies are angular frequencies in units where ħ = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinStarParams<T: Real> {
    couplings: Vec<T>,
    omega: T,
    omega0: T,
    detuning: T,
}

impl<T: Real> SpinStarParams<T> {
    pub fn new(n_spins: usize, couplings: Vec<T>, omega: T, omega0: T) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::NoSpins);
        }
        if couplings.len() != n_spins {
            return Err(Error::CouplingCount {
                expected: n_spins,
                found: couplings.len(),
            });
        }
        if couplings.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("couplings"));
        }
        if !omega.is_finite() {
            return Err(Error::NonFinite("omega"));
        }
        if !omega0.is_finite() {
            return Err(Error::NonFinite("omega0"));
        }
        Ok(Self {
            couplings,
            omega,
            omega0,
            detuning: omega - omega0,
        })
    }

    /// Uniform coupling `alpha` for all `n_spins` bath spins.
    pub fn uniform(n_spins: usize, alpha: T, omega: T, omega0: T) -> Result<Self> {
        Self::new(n_spins, vec![alpha; n_spins], omega, omega0)
    }

    pub fn n_spins(&self) -> usize {
        self.couplings.len()
    }

    pub fn couplings(&self) -> &[T] {
        &self.couplings
    }

    /// Coupling of bath spin `j` (1-based).
    pub fn coupling(&self, j: usize) -> Result<T> {
        check_spin_index(j, self.n_spins())?;
        Ok(self.couplings[j - 1])
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn omega0(&self) -> T {
        self.omega0
    }

    /// `ω − ω₀`.
    pub fn detuning(&self) -> T {
        self.detuning
    }

    pub fn sum_alpha_sq(&self) -> T {
        self.couplings.iter().fold(T::zero(), |acc, &a| acc + a * a)
    }

    /// Returns the common coupling if all couplings agree to a relative
    /// tolerance of 1e-12.
    pub fn uniform_coupling(&self) -> Option<T> {
        let first = self.couplings[0];
        let scale = self.couplings.iter().fold(T::zero(), |m, a| m.max(a.abs()));
        let tol = T::lit(1e-12) * scale;
        self.couplings
            .iter()
            .all(|&a| (a - first).abs() <= tol)
            .then_some(first)
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> SpinStarParams<U> {
        let conv = |x: T| U::lit(x.to_f64_lossy());
        SpinStarParams {
            couplings: self.couplings.iter().map(|&a| conv(a)).collect(),
            omega: conv(self.omega),
            omega0: conv(self.omega0),
            detuning: conv(self.omega) - conv(self.omega0),
        }
    }
}

/// Builds validated parameters; `detuning` is derived as `omega − omega0`.
pub fn make_params<T: Real>(
    n_spins: usize,
    couplings: Vec<T>,
    omega: T,
    omega0: T,
) -> Result<SpinStarParams<T>> {
    SpinStarParams::new(n_spins, couplings, omega, omega0)
}

/// `√(Σ_j α_j² + Δ²)`, the single-excitation oscillation rate.
pub fn rabi_frequency<T: Real>(params: &SpinStarParams<T>) -> T {
    let d = params.detuning();
    (params.sum_alpha_sq() + d * d).sqrt()
}

/// On-disk parameter document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDocument {
    pub n_spins: usize,
    pub couplings: Vec<f64>,
    pub omega: f64,
    pub omega0: f64,
}

impl ParamsDocument {
    pub fn into_params<T: Real>(self) -> Result<SpinStarParams<T>> {
        let couplings = self.couplings.iter().map(|&a| T::lit(a)).collect();
        if self.couplings.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("couplings"));
        }
        SpinStarParams::new(
            self.n_spins,
            couplings,
            T::lit(self.omega),
            T::lit(self.omega0),
        )
    }
}

impl<T: Real> From<&SpinStarParams<T>> for ParamsDocument {
    fn from(p: &SpinStarParams<T>) -> Self {
        Self {
            n_spins: p.n_spins(),
            couplings: p.couplings().iter().map(|a| a.to_f64_lossy()).collect(),
            omega: p.omega().to_f64_lossy(),
            omega0: p.omega0().to_f64_lossy(),
        }
    }
}

/// Parses `{"n_spins", "couplings", "omega", "omega0"}`.
pub fn params_from_json<T: Real>(text: &str) -> Result<SpinStarParams<T>> {
    let doc: ParamsDocument = serde_json::from_str(text)?;
    doc.into_params()
}

pub fn params_from_reader<T: Real, R: Read>(reader: R) -> Result<SpinStarParams<T>> {
    let doc: ParamsDocument = serde_json::from_reader(reader)?;
    doc.into_params()
}

/// Converts an energy in eV into an angular frequency in rad/s.
pub fn ev_to_angular_frequency(energy_ev: f64) -> f64 {
    energy_ev / HBAR_EV_S
}

pub(crate) fn check_spin_index(j: usize, n: usize) -> Result<()> {
    if j == 0 || j > n {
        Err(Error::SpinIndex { index: j, n })
    } else {
        Ok(())
    }
}

/// Inserts `r` into a strictly ascending index set, keeping it ascending.
pub fn add_index(index_set: &[usize], r: usize) -> Result<Vec<usize>> {
    match index_set.binary_search(&r) {
        Ok(_) => Err(Error::IndexPresent(r)),
        Err(pos) => {
            let mut out = Vec::with_capacity(index_set.len() + 1);
            out.extend_from_slice(&index_set[..pos]);
            out.push(r);
            out.extend_from_slice(&index_set[pos..]);
            Ok(out)
        }
    }
}

/// Removes `r` from a strictly ascending index set.
pub fn remove_index(index_set: &[usize], r: usize) -> Result<Vec<usize>> {
    match index_set.binary_search(&r) {
        Ok(pos) => {
            let mut out = index_set.to_vec();
            out.remove(pos);
            Ok(out)
        }
        Err(_) => Err(Error::IndexAbsent(r)),
    }
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}

/// Lexicographic rank of an ascending `k`-subset of `1..=n`.
pub(crate) fn lex_rank(set: &[usize], n: usize) -> usize {
    let k = set.len();
    let mut rank = 0;
    let mut prev = 0;
    for (i, &s) in set.iter().enumerate() {
        for v in prev + 1..s {
            rank += binomial(n - v, k - i - 1);
        }
        prev = s;
    }
    rank
}

/// All ascending `k`-subsets of `1..=n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (1..=k).collect();
    loop {
        out.push(cur.clone());
        // rightmost position that can still advance
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i + 1) else {
            break;
        };
        cur[i] += 1;
        for m in i + 1..k {
            cur[m] = cur[m - 1] + 1;
        }
    }
    out
}

/// One configuration of the joint system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisElement {
    pub central_up: bool,
    /// Bath spins pointing up, strictly ascending, 1-based.
    pub up_set: Vec<usize>,
}

impl BasisElement {
    pub fn new(central_up: bool, up_set: Vec<usize>, n_spins: usize) -> Result<Self> {
        for w in up_set.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::IndexPresent(w[1]));
            }
        }
        for &j in &up_set {
            check_spin_index(j, n_spins)?;
        }
        Ok(Self { central_up, up_set })
    }

    /// Twice the total `S_z` eigenvalue (central spin included).
    pub fn twice_sz(&self, n_spins: usize) -> i64 {
        let up = self.up_set.len() as i64;
        let central = if self.central_up { 1 } else { -1 };
        central + 2 * up - n_spins as i64
    }

    pub fn is_up(&self, j: usize) -> bool {
        self.up_set.binary_search(&j).is_ok()
    }
}

/// Ordered basis of one conserved-`S_z` sector.
///
/// Elements with the central spin up (`p` bath spins up) come first, then the
/// central-down block (`p + 1` bath spins up); each block is lexicographic.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    n_spins: usize,
    excitation_p: usize,
    elements: Vec<BasisElement>,
}

impl SectorBasis {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn excitation_p(&self) -> usize {
        self.excitation_p
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Size of the central-up block, `C(N, p)`.
    pub fn up_block_len(&self) -> usize {
        binomial(self.n_spins, self.excitation_p)
    }

    pub fn element(&self, rank: usize) -> Option<&BasisElement> {
        self.elements.get(rank)
    }

    /// Position of `element` in the basis, if it belongs to this sector.
    pub fn rank(&self, element: &BasisElement) -> Option<usize> {
        self.rank_of(element.central_up, &element.up_set)
    }

    pub fn rank_of(&self, central_up: bool, up_set: &[usize]) -> Option<usize> {
        let expected = if central_up {
            self.excitation_p
        } else {
            self.excitation_p + 1
        };
        if up_set.len() != expected
            || up_set.iter().any(|&j| j == 0 || j > self.n_spins)
            || up_set.windows(2).any(|w| w[0] >= w[1])
        {
            return None;
        }
        let offset = if central_up { 0 } else { self.up_block_len() };
        Some(offset + lex_rank(up_set, self.n_spins))
    }

    /// Twice the conserved total `S_z`.
    pub fn twice_sz(&self) -> i64 {
        1 + 2 * self.excitation_p as i64 - self.n_spins as i64
    }
}

/// Enumerates the sector reached from "central up, `p` bath spins up".
pub fn enumerate_sector(n_spins: usize, excitation_p: usize) -> Result<SectorBasis> {
    if n_spins == 0 {
        return Err(Error::NoSpins);
    }
    if excitation_p >= n_spins {
        return Err(Error::ExcitationOutOfRange {
            p: excitation_p,
            n: n_spins,
        });
    }
    let ups = combinations(n_spins, excitation_p)
        .into_iter()
        .map(|up_set| BasisElement {
            central_up: true,
            up_set,
        });
    let downs = combinations(n_spins, excitation_p + 1)
        .into_iter()
        .map(|up_set| BasisElement {
            central_up: false,
            up_set,
        });
    Ok(SectorBasis {
        n_spins,
        excitation_p,
        elements: ups.chain(downs).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn make_params_derives_detuning() {
        let p = make_params(3, vec![1.0, 1.0, 1.0], 2.0, 2.0).unwrap();
        assert_eq!(p.detuning(), 0.0);
        let p = make_params(2, vec![0.5, 0.7], 3.0, 1.0).unwrap();
        assert_eq!(p.detuning(), 2.0);
    }

    #[test]
    fn make_params_rejects_bad_input() {
        assert!(matches!(
            make_params(1, vec![1.0, 2.0], 0.0, 0.0),
            Err(Error::CouplingCount {
                expected: 1,
                found: 2
            })
        ));
        assert!(matches!(
            make_params(1, vec![f64::NAN], 0.0, 0.0),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            make_params(1, vec![1.0], f64::INFINITY, 0.0),
            Err(Error::NonFinite("omega"))
        ));
        assert!(matches!(
            make_params::<f64>(0, vec![], 0.0, 0.0),
            Err(Error::NoSpins)
        ));
    }

    #[test]
    fn zero_couplings_are_allowed() {
        let p = make_params(2, vec![0.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(rabi_frequency(&p), 0.0);
    }

    #[test]
    fn rabi_frequency_examples() {
        let p = make_params(1, vec![1.0], 0.0, 0.0).unwrap();
        assert_eq!(rabi_frequency(&p), 1.0);
        let p = make_params(1, vec![3.0], 4.0, 0.0).unwrap();
        assert_eq!(rabi_frequency(&p), 5.0);
        let p = make_params(4, vec![1.0; 4], 0.0, 0.0).unwrap();
        assert_eq!(rabi_frequency(&p), 2.0);
    }

    #[test]
    fn enumerate_small_sectors() {
        let b = enumerate_sector(2, 0).unwrap();
        let got: Vec<_> = b
            .elements()
            .iter()
            .map(|e| (e.central_up, e.up_set.clone()))
            .collect();
        assert_eq!(
            got,
            vec![(true, vec![]), (false, vec![1]), (false, vec![2])]
        );
        assert_eq!(enumerate_sector(4, 1).unwrap().len(), 10);
        assert!(matches!(
            enumerate_sector(3, 3),
            Err(Error::ExcitationOutOfRange { p: 3, n: 3 })
        ));
    }

    #[test]
    fn index_operators() {
        assert_eq!(add_index(&[1, 3], 2).unwrap(), vec![1, 2, 3]);
        assert_eq!(add_index(&[], 5).unwrap(), vec![5]);
        assert!(matches!(add_index(&[2], 2), Err(Error::IndexPresent(2))));
        assert_eq!(remove_index(&[1, 2, 3], 2).unwrap(), vec![1, 3]);
        assert_eq!(remove_index(&[4], 4).unwrap(), Vec::<usize>::new());
        assert!(matches!(
            remove_index(&[1, 3], 2),
            Err(Error::IndexAbsent(2))
        ));
    }

    #[test]
    fn unit_conversion() {
        assert_eq!(ev_to_angular_frequency(0.0), 0.0);
        assert!((ev_to_angular_frequency(HBAR_EV_S) - 1.0).abs() < 1e-15);
        let w = ev_to_angular_frequency(1e-5);
        assert!((w / 1.519e10 - 1.0).abs() < 1e-3, "{w}");
    }

    #[test]
    fn json_ingestion() {
        let p: SpinStarParams<f64> =
            params_from_json(r#"{"n_spins": 2, "couplings": [0.5, 0.7], "omega": 3, "omega0": 1}"#)
                .unwrap();
        assert_eq!(p.detuning(), 2.0);
        assert!(params_from_json::<f64>(r#"{"n_spins": 2, "couplings": [0.5]}"#).is_err());
        assert!(params_from_json::<f64>(
            r#"{"n_spins": 1, "couplings": [0.5], "omega": 0, "omega0": 0, "extra": 1}"#
        )
        .is_err());
        assert!(matches!(
            params_from_json::<f64>(
                r#"{"n_spins": 2, "couplings": [0.5], "omega": 0, "omega0": 0}"#
            ),
            Err(Error::CouplingCount { .. })
        ));
    }

    #[test]
    fn uniform_detection() {
        let p = SpinStarParams::uniform(3, 0.4, 0.0, 0.0).unwrap();
        assert_eq!(p.uniform_coupling(), Some(0.4));
        let p = make_params(2, vec![0.4, 0.5], 0.0, 0.0).unwrap();
        assert_eq!(p.uniform_coupling(), None);
    }

    proptest! {
        #[test]
        fn sector_rank_is_bijective(n in 1usize..9, p_frac in 0.0f64..1.0) {
            let p = ((n as f64) * p_frac) as usize;
            let basis = enumerate_sector(n, p.min(n - 1)).unwrap();
            let p = basis.excitation_p();
            prop_assert_eq!(basis.len(), binomial(n, p) + binomial(n, p + 1));
            let sz = basis.twice_sz();
            for (r, e) in basis.elements().iter().enumerate() {
                prop_assert_eq!(basis.rank(e), Some(r));
                prop_assert_eq!(e.twice_sz(n), sz);
            }
            // lexicographic order inside each block
            for w in basis.elements().windows(2) {
                if w[0].central_up == w[1].central_up {
                    prop_assert!(w[0].up_set < w[1].up_set);
                }
            }
        }

        #[test]
        fn add_then_remove_is_identity(
            set in proptest::collection::btree_set(1usize..20, 0..8),
            r in 1usize..20,
        ) {
            let set: Vec<usize> = set.into_iter().collect();
            prop_assume!(!set.contains(&r));
            let added = add_index(&set, r).unwrap();
            prop_assert!(added.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(remove_index(&added, r).unwrap(), set);
        }

        #[test]
        fn rabi_frequency_squared(
            alphas in proptest::collection::vec(-3.0f64..3.0, 1..10),
            omega in -5.0f64..5.0,
            omega0 in -5.0f64..5.0,
        ) {
            let p = make_params(alphas.len(), alphas.clone(), omega, omega0).unwrap();
            let w = rabi_frequency(&p);
            let d = omega - omega0;
            let expect = alphas.iter().map(|a| a * a).sum::<f64>() + d * d;
            prop_assert!((w * w - expect).abs() <= 1e-13 * expect.max(1.0));
        }
    }
}
