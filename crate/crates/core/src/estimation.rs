//! Recovering couplings from simulated measurement records.
//!
//! The survival probability `P₀(t) = |a(t)|² = f + (1 − f) cos²(Ωt)` with
//! floor `f = Δ²/Ω²` (zero on resonance) oscillates with period `π/Ω`, so a
//! fit of `Ω` gives `Σα² = Ω²(1 − f)`. Individual `α_j²/Σα²` come from
//! counting which bath spin is found up in repeated W-like preparations.
//!
//! Everything here works in `f64`: it is statistics on data, not dynamics.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::closed_form::{survival_probability, w_like_state};
use crate::error::{Error, Result};
use crate::measurement::RngStream;
use crate::model::SpinStarParams;

/// Normal quantile for two-sided 95 % intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

const MIN_POINTS: usize = 8;
const MIN_PERIODS: f64 = 1.5;
const MAX_ITERATIONS: usize = 200;
const STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub p_hat: f64,
    /// `None` marks an exact (noiseless) value.
    pub shots: Option<u64>,
}

/// Estimated survival probabilities on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilitySeries {
    points: Vec<SeriesPoint>,
}

impl ProbabilitySeries {
    pub fn new(points: Vec<SeriesPoint>) -> Result<Self> {
        for (k, p) in points.iter().enumerate() {
            if !p.t.is_finite() || !p.p_hat.is_finite() {
                return Err(Error::InvalidSeries(format!("non-finite value in row {k}")));
            }
            if !(0.0..=1.0).contains(&p.p_hat) {
                return Err(Error::InvalidSeries(format!(
                    "p_hat = {} outside [0, 1] in row {k}",
                    p.p_hat
                )));
            }
            if p.shots == Some(0) {
                return Err(Error::InvalidSeries(format!("zero shots in row {k}")));
            }
        }
        if let Some(k) = points.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidSeries(format!(
                "times not strictly increasing at row {}",
                k + 1
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[SeriesPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reads CSV with header `t,p_hat,shots`; lines starting with `#` are
    /// skipped and an empty `shots` field means noiseless.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "p_hat", "shots"] {
            return Err(Error::InvalidSeries(format!(
                "expected header t,p_hat,shots, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let points = rdr.deserialize().collect::<Result<Vec<SeriesPoint>, _>>()?;
        Self::new(points)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Binomial estimates of `P₀(t)` with `shots` repetitions per time, or exact
/// values when `shots` is `None`.
pub fn simulate_survival_sampling(
    params: &SpinStarParams<f64>,
    times: &[f64],
    shots: Option<u64>,
    rng: &mut RngStream,
) -> Result<ProbabilitySeries> {
    let points = times
        .iter()
        .map(|&t| {
            let p = survival_probability(params, t).clamp(0.0, 1.0);
            let p_hat = match shots {
                None => p,
                Some(0) => return Err(Error::InvalidSeries("zero shots".into())),
                Some(n) => {
                    let k = Binomial::new(n, p)
                        .expect("p clamped to [0, 1]")
                        .sample(rng);
                    k as f64 / n as f64
                }
            };
            Ok(SeriesPoint { t, p_hat, shots })
        })
        .collect::<Result<Vec<_>>>()?;
    ProbabilitySeries::new(points)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitOptions {
    /// Also fit the floor `f = Δ²/Ω²` (off-resonant data).
    pub fit_floor: bool,
    /// Prior upper estimate of `Ω`, used only by the aliasing guard.
    pub omega_hint: Option<f64>,
}

/// `α_j²/Σα²` estimate with its 95 % half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioInterval {
    pub estimate: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEstimate {
    pub omega_hat: f64,
    pub sum_alpha_sq_hat: f64,
    /// Standard error of `omega_hat`.
    pub stderr: f64,
    /// Fitted `Δ²/Ω²`, when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub floor_stderr: Option<f64>,
    pub iterations: usize,
    #[serde(default)]
    pub ratios: Vec<RatioInterval>,
}

impl CouplingEstimate {
    /// `√(Σα²/N)`: the common per-spin scale, meaningful only as an order of
    /// magnitude when the couplings are similar.
    pub fn per_spin_scale(&self, n_spins: usize) -> f64 {
        (self.sum_alpha_sq_hat / n_spins as f64).sqrt()
    }

    pub fn interval95(&self) -> (f64, f64) {
        (
            self.omega_hat - Z95 * self.stderr,
            self.omega_hat + Z95 * self.stderr,
        )
    }
}

fn model(omega: f64, floor: f64, t: f64) -> f64 {
    let c = (omega * t).cos();
    floor + (1.0 - floor) * c * c
}

/// Floor minimizing the squared error at fixed `omega`, kept in `[0, 1)`.
fn best_floor(omega: f64, pts: &[SeriesPoint]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for p in pts {
        let s2 = (omega * p.t).sin().powi(2);
        num += s2 * (p.p_hat - (1.0 - s2));
        den += s2 * s2;
    }
    if den > 0.0 {
        (num / den).clamp(0.0, 0.999)
    } else {
        0.0
    }
}

fn sse(omega: f64, floor: f64, pts: &[SeriesPoint]) -> f64 {
    pts.iter()
        .map(|p| (p.p_hat - model(omega, floor, p.t)).powi(2))
        .sum()
}

/// Peak of the periodogram of the centered signal `2p − 1`, which oscillates
/// at `2Ω`; returns the implied `Ω`.
fn coarse_omega(pts: &[SeriesPoint]) -> f64 {
    let n = pts.len() as f64;
    let mean = pts.iter().map(|p| 2.0 * p.p_hat - 1.0).sum::<f64>() / n;
    let span = pts[pts.len() - 1].t - pts[0].t;
    let mut gaps: Vec<f64> = pts.windows(2).map(|w| w[1].t - w[0].t).collect();
    gaps.sort_by(f64::total_cmp);
    let dt = gaps[gaps.len() / 2];
    let nu_lo = std::f64::consts::PI / span;
    let nu_hi = std::f64::consts::PI / dt;
    let count = ((8.0 * span / dt).ceil() as usize).clamp(64, 50_000);
    let step = (nu_hi - nu_lo) / count as f64;
    let mut best = (0.0, nu_lo);
    for k in 0..=count {
        let nu = nu_lo + step * k as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for p in pts {
            let y = 2.0 * p.p_hat - 1.0 - mean;
            re += y * (nu * p.t).cos();
            im += y * (nu * p.t).sin();
        }
        let power = re * re + im * im;
        if power > best.0 {
            best = (power, nu);
        }
    }
    best.1 / 2.0
}

/// Least-squares fit of `Ω` (and optionally the floor) to a survival series.
pub fn fit_collective_coupling(
    series: &ProbabilitySeries,
    options: FitOptions,
) -> Result<CouplingEstimate> {
    let pts = series.points();
    if pts.len() < MIN_POINTS {
        return Err(Error::InvalidSeries(format!(
            "{} points, need at least {MIN_POINTS}",
            pts.len()
        )));
    }
    let span = pts[pts.len() - 1].t - pts[0].t;
    let coarse = coarse_omega(pts);
    let max_gap = pts.windows(2).map(|w| w[1].t - w[0].t).fold(0.0, f64::max);
    let guard_omega = options.omega_hint.map_or(coarse, |h| h.max(coarse));
    let limit = std::f64::consts::PI / (2.0 * guard_omega);
    if max_gap > limit {
        return Err(Error::Aliased {
            interval: max_gap,
            limit,
            omega: guard_omega,
        });
    }

    // fine scan around the coarse peak
    let periods_guess = span * coarse / std::f64::consts::PI;
    let grid = ((40.0 * periods_guess) as usize).max(2000);
    let (lo, hi) = (0.5 * coarse, 1.5 * coarse);
    let mut start = (f64::INFINITY, coarse, 0.0);
    for k in 0..=grid {
        let w = lo + (hi - lo) * k as f64 / grid as f64;
        let f = if options.fit_floor {
            best_floor(w, pts)
        } else {
            0.0
        };
        let e = sse(w, f, pts);
        if e < start.0 {
            start = (e, w, f);
        }
    }

    let (omega, floor, iterations) = levenberg_marquardt(pts, start.1, start.2, options.fit_floor)?;
    let periods = span * omega / std::f64::consts::PI;
    if periods < MIN_PERIODS {
        return Err(Error::SeriesTooShort {
            periods,
            required: MIN_PERIODS,
        });
    }
    let cov = covariance(pts, omega, floor, options.fit_floor);
    Ok(CouplingEstimate {
        omega_hat: omega,
        sum_alpha_sq_hat: omega * omega * (1.0 - floor),
        stderr: cov[(0, 0)].max(0.0).sqrt(),
        floor: options.fit_floor.then_some(floor),
        floor_stderr: options.fit_floor.then(|| cov[(1, 1)].max(0.0).sqrt()),
        iterations,
        ratios: Vec::new(),
    })
}

fn jacobian(pts: &[SeriesPoint], omega: f64, floor: f64, fit_floor: bool) -> DMatrix<f64> {
    let k = if fit_floor { 2 } else { 1 };
    DMatrix::from_fn(pts.len(), k, |r, c| {
        let t = pts[r].t;
        match c {
            0 => -(1.0 - floor) * t * (2.0 * omega * t).sin(),
            _ => (omega * t).sin().powi(2),
        }
    })
}

fn residuals(pts: &[SeriesPoint], omega: f64, floor: f64) -> DVector<f64> {
    DVector::from_iterator(
        pts.len(),
        pts.iter().map(|p| p.p_hat - model(omega, floor, p.t)),
    )
}

fn levenberg_marquardt(
    pts: &[SeriesPoint],
    omega0: f64,
    floor0: f64,
    fit_floor: bool,
) -> Result<(f64, f64, usize)> {
    let (mut omega, mut floor) = (omega0, floor0);
    let mut cost = sse(omega, floor, pts);
    let mut lambda = 1e-3;
    let mut last_step = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let j = jacobian(pts, omega, floor, fit_floor);
        let r = residuals(pts, omega, floor);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * r;
        loop {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] *= 1.0 + lambda;
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                if lambda > 1e12 {
                    return Err(Error::NoConvergence {
                        iterations: it,
                        last_step,
                    });
                }
                continue;
            };
            let w_new = omega + delta[0];
            let f_new = if fit_floor {
                (floor + delta[1]).clamp(0.0, 0.999)
            } else {
                floor
            };
            let new_cost = sse(w_new, f_new, pts);
            if new_cost <= cost {
                last_step = (delta[0] / omega).abs().max(if fit_floor {
                    (f_new - floor).abs()
                } else {
                    0.0
                });
                omega = w_new;
                floor = f_new;
                cost = new_cost;
                lambda = (lambda / 10.0).max(1e-12);
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                // no downhill step left: already at the minimum to machine precision
                return Ok((omega, floor, it));
            }
        }
        if last_step < STEP_TOL {
            return Ok((omega, floor, it));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        last_step,
    })
}

/// Sandwich covariance `(JᵀJ)⁻¹ Jᵀ V J (JᵀJ)⁻¹`, with `V` the binomial
/// variance of the fitted model; falls back to the residual variance when any
/// point is noiseless.
fn covariance(pts: &[SeriesPoint], omega: f64, floor: f64, fit_floor: bool) -> DMatrix<f64> {
    let j = jacobian(pts, omega, floor, fit_floor);
    let k = j.ncols();
    let Some(bread) = (j.transpose() * &j).try_inverse() else {
        return DMatrix::from_element(k, k, f64::INFINITY);
    };
    if pts.iter().all(|p| p.shots.is_some()) {
        let mut meat = DMatrix::zeros(k, k);
        for (r, p) in pts.iter().enumerate() {
            let m = model(omega, floor, p.t);
            let var = m * (1.0 - m) / p.shots.unwrap() as f64;
            let row = j.row(r);
            meat += row.transpose() * row * var;
        }
        &bread * meat * &bread
    } else {
        let dof = (pts.len() - k).max(1) as f64;
        bread * (sse(omega, floor, pts) / dof)
    }
}

/// Per-spin `α_j²/Σα²` from counts of which bath spin was found up.
///
/// Half-widths are the normal-approximation 95 % interval plus a `1/(2n)`
/// continuity floor, so boundary counts still get a nonzero width.
pub fn estimate_coupling_ratios(counts: &[u64]) -> Result<Vec<RatioInterval>> {
    if counts.is_empty() {
        return Err(Error::NoSpins);
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::NoCounts);
    }
    let n = total as f64;
    Ok(counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            RatioInterval {
                estimate: p,
                half_width: Z95 * (p * (1.0 - p) / n).sqrt() + 0.5 / n,
            }
        })
        .collect())
}

/// Which-spin-is-up counts over `shots` W-like preparations (multinomial with
/// probabilities `α_j²/Σα²`).
pub fn simulate_ratio_sampling(
    params: &SpinStarParams<f64>,
    shots: u64,
    rng: &mut RngStream,
) -> Result<Vec<u64>> {
    let probs: Vec<f64> = w_like_state(params)?
        .amplitudes
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    // sequential conditional binomials
    let mut counts = Vec::with_capacity(probs.len());
    let mut left = shots;
    let mut mass = 1.0;
    for (k, &p) in probs.iter().enumerate() {
        if k + 1 == probs.len() {
            counts.push(left);
            break;
        }
        let q = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let c = Binomial::new(left, q)
            .expect("q clamped to [0, 1]")
            .sample(rng);
        counts.push(c);
        left -= c;
        mass -= p;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_params;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn resonant(alphas: &[f64]) -> SpinStarParams<f64> {
        make_params(alphas.len(), alphas.to_vec(), 0.0, 0.0).unwrap()
    }

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
    }

    fn noiseless(params: &SpinStarParams<f64>, times: &[f64]) -> ProbabilitySeries {
        simulate_survival_sampling(params, times, None, &mut RngStream::new(0, 0)).unwrap()
    }

    #[test]
    fn noiseless_recovery() {
        let s = noiseless(&resonant(&[0.6, 0.8]), &grid(3.0 * PI, 64));
        let e = fit_collective_coupling(&s, FitOptions::default()).unwrap();
        assert!((e.omega_hat - 1.0).abs() < 1e-6);
        assert!((e.sum_alpha_sq_hat - 1.0).abs() < 2e-6);

        let s = noiseless(&resonant(&[1.2, 1.6]), &grid(3.0 * PI, 64));
        let e = fit_collective_coupling(&s, FitOptions::default()).unwrap();
        assert!((e.omega_hat - 2.0).abs() < 1e-6);
    }

    #[test]
    fn off_resonant_floor() {
        // Σα² = 0.75, Δ = 0.5: Ω = 1, f = 0.25
        let p = make_params(3, vec![0.5; 3], 0.7, 0.2).unwrap();
        let s = noiseless(&p, &grid(4.0 * PI, 100));
        let opts = FitOptions {
            fit_floor: true,
            omega_hint: None,
        };
        let e = fit_collective_coupling(&s, opts).unwrap();
        assert!((e.omega_hat - 1.0).abs() < 1e-8);
        assert!((e.floor.unwrap() - 0.25).abs() < 1e-8);
        assert!((e.sum_alpha_sq_hat - 0.75).abs() < 1e-8);
    }

    #[test]
    fn node_is_near_zero() {
        let p = resonant(&[1.0]);
        let s = simulate_survival_sampling(&p, &[PI / 2.0], Some(500), &mut RngStream::new(1, 0))
            .unwrap();
        assert!(s.points()[0].p_hat < 1e-3);
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = resonant(&[0.3, 0.4]);
        let times = grid(10.0, 30);
        let a =
            simulate_survival_sampling(&p, &times, Some(100), &mut RngStream::new(9, 2)).unwrap();
        let b =
            simulate_survival_sampling(&p, &times, Some(100), &mut RngStream::new(9, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_short_or_too_sparse() {
        let p = resonant(&[1.0]);
        let s = noiseless(&p, &grid(PI, 40));
        assert!(matches!(
            fit_collective_coupling(&s, FitOptions::default()),
            Err(Error::SeriesTooShort { .. })
        ));
        let s = noiseless(&p, &grid(3.0 * PI, 5));
        assert!(matches!(
            fit_collective_coupling(&s, FitOptions::default()),
            Err(Error::InvalidSeries(_))
        ));
    }

    #[test]
    fn aliasing_guard() {
        // 12 points over 30 periods of a unit-Ω signal
        let p = resonant(&[1.0]);
        let s = noiseless(&p, &grid(30.0 * PI, 12));
        let opts = FitOptions {
            fit_floor: false,
            omega_hint: Some(1.0),
        };
        assert!(matches!(
            fit_collective_coupling(&s, opts),
            Err(Error::Aliased { .. })
        ));
    }

    #[test]
    fn series_validation_and_csv() {
        let bad = vec![
            SeriesPoint {
                t: 1.0,
                p_hat: 0.5,
                shots: Some(10),
            },
            SeriesPoint {
                t: 1.0,
                p_hat: 0.5,
                shots: Some(10),
            },
        ];
        assert!(ProbabilitySeries::new(bad).is_err());
        assert!(ProbabilitySeries::new(vec![SeriesPoint {
            t: 0.0,
            p_hat: 1.5,
            shots: None
        }])
        .is_err());

        let s = noiseless(&resonant(&[0.5]), &grid(2.0, 5));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,p_hat,shots\n0.0,1.0,\n"));
        let back = ProbabilitySeries::read_csv(format!("# comment\n{text}").as_bytes()).unwrap();
        assert_eq!(back, s);
        assert!(ProbabilitySeries::read_csv("time,p\n1,0.5\n".as_bytes()).is_err());
    }

    #[test]
    fn ratio_examples() {
        let r = estimate_coupling_ratios(&[7, 7, 7]).unwrap();
        assert!(r.iter().all(|x| (x.estimate - 1.0 / 3.0).abs() < 1e-15));
        let r = estimate_coupling_ratios(&[10, 0]).unwrap();
        assert_eq!(r[0].estimate, 1.0);
        assert_eq!(r[1].estimate, 0.0);
        assert!(r[0].half_width > 0.0 && r[1].half_width > 0.0);
        assert!(matches!(
            estimate_coupling_ratios(&[0, 0]),
            Err(Error::NoCounts)
        ));
    }

    #[test]
    fn ratio_sampling() {
        let c =
            simulate_ratio_sampling(&resonant(&[0.7]), 1000, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(c, vec![1000]);

        let shots = 100_000;
        let c = simulate_ratio_sampling(&resonant(&[3.0, 4.0]), shots, &mut RngStream::new(4, 0))
            .unwrap();
        assert_eq!(c.iter().sum::<u64>(), shots);
        let sigma = (0.36f64 * 0.64 / shots as f64).sqrt();
        assert!((c[0] as f64 / shots as f64 - 0.36).abs() < 5.0 * sigma);

        let n = 5;
        let shots = n as u64 * 10_000;
        let c = simulate_ratio_sampling(&resonant(&[0.2; 5]), shots, &mut RngStream::new(8, 0))
            .unwrap();
        let sigma = (shots as f64 * 0.2 * 0.8).sqrt();
        for k in c {
            assert!((k as f64 - shots as f64 / n as f64).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn noisy_fit_is_close() {
        let p = resonant(&[0.6, 0.8]);
        let s = simulate_survival_sampling(
            &p,
            &grid(3.0 * PI, 64),
            Some(1000),
            &mut RngStream::new(3, 0),
        )
        .unwrap();
        let e = fit_collective_coupling(&s, FitOptions::default()).unwrap();
        assert!((e.omega_hat - 1.0).abs() < 0.02);
        assert!(e.stderr > 0.0 && e.stderr < 0.01);
        let (lo, hi) = e.interval95();
        assert!(lo < e.omega_hat && e.omega_hat < hi);
    }

    #[test]
    fn estimate_json_fields() {
        let s = noiseless(&resonant(&[1.0]), &grid(3.0 * PI, 32));
        let mut e = fit_collective_coupling(&s, FitOptions::default()).unwrap();
        e.ratios = estimate_coupling_ratios(&[3, 1]).unwrap();
        let v = serde_json::to_value(&e).unwrap();
        for key in ["omega_hat", "sum_alpha_sq_hat", "stderr", "ratios"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v.get("floor").is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn scale_equivariance(
            alphas in prop::collection::vec(0.2f64..1.0, 1..5),
            c in 0.3f64..3.0,
        ) {
            let p = resonant(&alphas);
            let omega = p.sum_alpha_sq().sqrt();
            let times = grid(4.0 * PI / omega, 80);
            let e1 = fit_collective_coupling(&noiseless(&p, &times), FitOptions::default()).unwrap();
            let scaled: Vec<f64> = alphas.iter().map(|a| a * c).collect();
            let times_c: Vec<f64> = times.iter().map(|t| t / c).collect();
            let e2 = fit_collective_coupling(&noiseless(&resonant(&scaled), &times_c), FitOptions::default()).unwrap();
            prop_assert!((e1.omega_hat - omega).abs() < 1e-8 * omega);
            prop_assert!((e2.omega_hat - c * e1.omega_hat).abs() < 1e-8 * c * omega);
        }

        #[test]
        fn ratios_sum_to_one(counts in prop::collection::vec(0u64..1000, 1..8)) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let r = estimate_coupling_ratios(&counts).unwrap();
            prop_assert!((r.iter().map(|x| x.estimate).sum::<f64>() - 1.0).abs() < 1e-9);
            let doubled: Vec<u64> = counts.iter().map(|c| 2 * c).collect();
            let r2 = estimate_coupling_ratios(&doubled).unwrap();
            for (a, b) in r.iter().zip(&r2) {
                prop_assert_eq!(a.estimate, b.estimate);
            }
        }
    }
}
