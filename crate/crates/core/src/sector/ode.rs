//! Adaptive Dormand–Prince 5(4) integrator for `i dψ/dt = H ψ` with a real
//! symmetric `H`. Kept separate from the eigendecomposition propagator so the
//! two can check each other.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

const MAX_STEPS: usize = 5_000_000;

// Butcher tableau (autonomous system, so the nodes are not needed)
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// difference between the 5th and 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn rhs<T: Real>(h: &DMatrix<T>, psi: &[Complex<T>], out: &mut [Complex<T>]) {
    let n = psi.len();
    for (r, o) in out.iter_mut().enumerate() {
        let mut acc = czero::<T>();
        for c in 0..n {
            let hrc = h[(r, c)];
            if !hrc.is_zero() {
                acc += psi[c] * hrc;
            }
        }
        // -i * acc
        *o = Complex::new(acc.im, -acc.re);
    }
}

/// Integrates from `psi0` at time 0 to time `t` (either sign).
pub fn integrate_schrodinger<T: Real>(
    h: &DMatrix<T>,
    psi0: &[Complex<T>],
    t: T,
    rtol: T,
    atol: T,
) -> Result<Vec<Complex<T>>> {
    let n = psi0.len();
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: n,
        });
    }
    let mut y = psi0.to_vec();
    if t.is_zero() || n == 0 {
        return Ok(y);
    }
    let dir = t.signum();
    let span = t.abs();
    let norm_h = h.iter().fold(T::zero(), |m, x| m.max(x.abs())) * T::from_usize_lossy(n);
    let mut step = if norm_h > T::zero() {
        (T::lit(0.01) / norm_h).min(span)
    } else {
        span
    };
    let mut done = T::zero();
    let mut k: Vec<Vec<Complex<T>>> = vec![vec![czero(); n]; 7];
    let mut stage = vec![czero::<T>(); n];
    rhs(h, &y, &mut k[0]);

    for _ in 0..MAX_STEPS {
        if done >= span {
            return Ok(y);
        }
        let hstep = step.min(span - done);
        let hs = hstep * dir;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (m, km) in k.iter().enumerate().take(s) {
                    let a = A[s][m];
                    if a != 0.0 {
                        acc += km[i] * (hs * T::lit(a));
                    }
                }
                stage[i] = acc;
            }
            rhs(h, &stage, &mut k[s]);
        }
        // stage holds the 5th-order solution (FSAL row)
        let mut err_acc = T::zero();
        for i in 0..n {
            let mut e = czero::<T>();
            for (m, km) in k.iter().enumerate() {
                if E[m] != 0.0 {
                    e += km[i] * (hs * T::lit(E[m]));
                }
            }
            let scale_re = atol + rtol * y[i].re.abs().max(stage[i].re.abs());
            let scale_im = atol + rtol * y[i].im.abs().max(stage[i].im.abs());
            err_acc += (e.re / scale_re).squared() + (e.im / scale_im).squared();
        }
        let err = (err_acc / T::from_usize_lossy(2 * n)).sqrt();
        if err <= T::one() {
            done += hstep;
            y.copy_from_slice(&stage);
            k.swap(0, 6);
        }
        let factor = if err.is_zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2)))
                .min(T::lit(5.0))
                .max(T::lit(0.2))
        };
        step = hstep * factor;
    }
    Err(Error::NoConvergence {
        iterations: MAX_STEPS,
        last_step: step.to_f64_lossy(),
    })
}
