//! Dormand–Prince 5(4) embedded Runge–Kutta pair with step-size control and
//! continuous (dense) output.
//!
//! The fifth-order solution is propagated; the fourth-order companion only
//! feeds the error estimate. Dense output is the classic fourth-order
//! interpolant of the pair.

/// Right-hand side `dy/ds = f(s, y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, s: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn rhs(&self, s: f64, y: &[f64; N]) -> [f64; N] {
        self(s, y)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<const N: usize> {
    pub rtol: f64,
    /// Per-component absolute floor of the error scale.
    pub atol: [f64; N],
}

/// Why the controller gave up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepError {
    pub s: f64,
    pub h: f64,
    pub reason: &'static str,
}

/// Continuous extension of one accepted step over `[s0, s0 + h]`.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub s0: f64,
    pub h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    /// Interpolated state at `s0 + theta * h`, `theta ∈ [0, 1]`.
    pub fn at_fraction(&self, theta: f64) -> [f64; N] {
        let t1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        std::array::from_fn(|i| r1[i] + theta * (r2[i] + t1 * (r3[i] + theta * (r4[i] + t1 * r5[i]))))
    }

    pub fn at(&self, s: f64) -> [f64; N] {
        self.at_fraction((s - self.s0) / self.h)
    }

    pub fn end(&self) -> f64 {
        self.s0 + self.h
    }
}

#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    s: f64,
    y: [f64; N],
    dy: [f64; N],
    h: f64,
    tol: Tolerance<N>,
    h_min: f64,
    err_old: f64,
    last_rejected: bool,
    accepted: u64,
    rejected: u64,
    dense: Option<DenseStep<N>>,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

impl<const N: usize> Dopri5<N> {
    /// `h0` is the trial first step; its sign fixes the direction of integration.
    pub fn new<S: OdeSystem<N>>(sys: &S, s: f64, y: [f64; N], h0: f64, tol: Tolerance<N>, h_min: f64) -> Self {
        let dy = sys.rhs(s, &y);
        Dopri5 {
            s,
            y,
            dy,
            h: h0,
            tol,
            h_min,
            err_old: 1e-4,
            last_rejected: false,
            accepted: 0,
            rejected: 0,
            dense: None,
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn accepted_steps(&self) -> u64 {
        self.accepted
    }

    pub fn rejected_steps(&self) -> u64 {
        self.rejected
    }

    /// Dense output of the most recent accepted step.
    pub fn dense(&self) -> Option<&DenseStep<N>> {
        self.dense.as_ref()
    }

    /// Moves the integrator to a new point, e.g. an interpolated event
    /// location or the start of a new right-hand-side piece.
    pub fn restart<S: OdeSystem<N>>(&mut self, sys: &S, s: f64, y: [f64; N]) {
        self.s = s;
        self.y = y;
        self.dy = sys.rhs(s, &y);
        self.dense = None;
    }

    /// Performs one accepted step, retrying with smaller steps as needed.
    pub fn step<S: OdeSystem<N>>(&mut self, sys: &S) -> Result<(), StepError> {
        let mut h = self.h;
        loop {
            if h.abs() < self.h_min || !h.is_finite() {
                return Err(StepError {
                    s: self.s,
                    h,
                    reason: "step size underflow",
                });
            }
            if self.s + h == self.s {
                return Err(StepError {
                    s: self.s,
                    h,
                    reason: "step below the resolution of s",
                });
            }
            let s = self.s;
            let y = &self.y;
            let k1 = &self.dy;
            let k2 = sys.rhs(s + C2 * h, &axpy(y, h, &[(A21, k1)]));
            let k3 = sys.rhs(s + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
            let k4 = sys.rhs(s + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
            let k5 = sys.rhs(
                s + C5 * h,
                &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = sys.rhs(
                s + h,
                &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = sys.rhs(s + h, &y_new);

            let mut sum = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol[i] + self.tol.rtol * y[i].abs().max(y_new[i].abs());
                sum += (e / sc) * (e / sc);
            }
            let err = (sum / N as f64).sqrt();

            if !err.is_finite() {
                self.rejected += 1;
                self.last_rejected = true;
                h *= FAC_MIN;
                continue;
            }

            let fac11 = err.powf(0.2 - 0.75 * BETA);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_next = h / fac;
                if self.last_rejected {
                    h_next = h_next.abs().min(h.abs()).copysign(h);
                }
                self.err_old = err.max(1e-4);
                self.last_rejected = false;

                let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
                let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
                let coeffs = [
                    *y,
                    ydiff,
                    bspl,
                    std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                    std::array::from_fn(|i| {
                        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                    }),
                ];
                self.dense = Some(DenseStep { s0: s, h, coeffs });
                self.s = s + h;
                self.y = y_new;
                self.dy = k7;
                self.h = h_next;
                self.accepted += 1;
                return Ok(());
            }
            self.rejected += 1;
            self.last_rejected = true;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
}
