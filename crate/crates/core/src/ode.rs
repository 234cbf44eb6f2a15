//! Small ODE integrators shared by the geometry modules.
//!
//! Two flavours: a classical fixed-step RK4 used wherever reproducibility
//! matters more than adaptivity (geodesics, trajectories), and an adaptive
//! Dormand–Prince 5(4) pair for scalar problems that need tight local error.

/// One classical 4th-order Runge–Kutta step of size `h` for `y' = rhs(t, y)`.
pub fn rk4_step<const N: usize, F>(rhs: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = rhs(t + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}

/// Outcome of a fixed-step integration.
#[derive(Debug, Clone)]
pub struct FixedStepRun<const N: usize> {
    /// `(t, y)` pairs including the initial state.
    pub samples: Vec<(f64, [f64; N])>,
    /// Set when `admissible` rejected a state before `length` was reached.
    pub truncated: bool,
}

/// Integrates with fixed step `step` over signed `length`, stopping at the
/// last admissible state. The final step is shortened to land on `length`.
pub fn rk4_fixed<const N: usize, F, A>(rhs: F, y0: [f64; N], length: f64, step: f64, admissible: A) -> FixedStepRun<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    A: Fn(&[f64; N]) -> bool,
{
    let dir = if length < 0.0 { -1.0 } else { 1.0 };
    let total = length.abs();
    let n_full = (total / step).floor() as usize;
    let rem = total - n_full as f64 * step;
    // skip a sliver step produced by rounding of total / step
    let has_tail = rem > 1e-12 * step.max(1.0);
    let n_steps = n_full + usize::from(has_tail);

    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push((0.0, y0));
    let mut t = 0.0;
    let mut y = y0;
    let mut truncated = false;
    for i in 0..n_steps {
        let (h, t_next) = if i < n_full {
            (step, dir * (i + 1) as f64 * step)
        } else {
            (rem, dir * total)
        };
        let next = rk4_step(&rhs, t, &y, dir * h);
        if !next.iter().all(|x| x.is_finite()) || !admissible(&next) {
            truncated = true;
            break;
        }
        y = next;
        t = t_next;
        samples.push((t, y));
    }
    FixedStepRun { samples, truncated }
}

/// Tolerances and step bounds for [`dopri5_scalar`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// A guard boundary is located to within this step size.
    pub guard_resolution: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            h_init: 1e-3,
            h_min: 1e-12,
            h_max: 0.05,
            guard_resolution: 1e-9,
            max_steps: 1_000_000,
        }
    }
}

/// Result of an adaptive scalar run in one direction.
#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    /// Accepted nodes `(t, y, y')`, starting at the initial condition.
    pub nodes: Vec<(f64, f64, f64)>,
    /// `Some(reason)` when a guard stopped integration before `t_end`.
    pub stopped: Option<StopReason>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// The state left the admissible set; the step could not be refined further.
    Guard,
    /// The right-hand side produced a non-finite value.
    NonFinite,
    /// Step size underflow or step budget exhausted.
    StepLimit,
}

// Dormand–Prince 5(4) tableau.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b̂ (error weights); the 7th stage is the FSAL stage
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct DpStep {
    y: f64,
    k_end: f64,
    err: f64,
    finite: bool,
}

fn dp_step<F: Fn(f64, f64) -> f64>(rhs: &F, t: f64, y: f64, k1: f64, hd: f64, t_end: f64) -> DpStep {
    let k2 = rhs(t + C2 * hd, y + hd * A21 * k1);
    let k3 = rhs(t + C3 * hd, y + hd * (A31 * k1 + A32 * k2));
    let k4 = rhs(t + C4 * hd, y + hd * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = rhs(t + C5 * hd, y + hd * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    let k6 = rhs(t + hd, y + hd * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    let y_new = y + hd * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = rhs(t_end, y_new);
    let err = (hd * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).abs();
    let finite = [k2, k3, k4, k5, k6, k7, y_new].iter().all(|x| x.is_finite());
    DpStep {
        y: y_new,
        k_end: k7,
        err,
        finite,
    }
}

/// Adaptive Dormand–Prince 5(4) integration of a scalar ODE from `t0` to `t_end`
/// (either direction).
///
/// Besides the embedded error estimate, every accepted step is checked at its
/// midpoint: the cubic Hermite interpolant through the two nodes must agree
/// with a half-step solution to within the same tolerance, so that dense
/// output built by [`hermite`] inherits the local error bound.
///
/// `admissible(previous, candidate)` sees both ends of every candidate step as
/// `(t, y, y')` triples; a rejected step is halved until `h_min`, then
/// integration stops.
pub fn dopri5_scalar<F, A>(rhs: F, t0: f64, y0: f64, t_end: f64, opts: AdaptiveOptions, admissible: A) -> AdaptiveRun
where
    F: Fn(f64, f64) -> f64,
    A: Fn((f64, f64, f64), (f64, f64, f64)) -> bool,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, y);
    let mut nodes = vec![(t, y, k1)];
    let mut h = opts.h_init.min(opts.h_max);
    let mut guard_hit = false;

    for _ in 0..opts.max_steps {
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            return AdaptiveRun { nodes, stopped: None };
        }
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        let hd = dir * hs;
        let t_new = if last { t_end } else { t + hd };

        let step = dp_step(&rhs, t, y, k1, hd, t_new);
        if !step.finite || !admissible((t, y, k1), (t_new, step.y, step.k_end)) {
            // shrink towards the boundary of the admissible set
            guard_hit = true;
            h = 0.5 * hs;
            if h < opts.h_min.max(opts.guard_resolution) {
                let reason = if step.finite {
                    StopReason::Guard
                } else {
                    StopReason::NonFinite
                };
                return AdaptiveRun {
                    nodes,
                    stopped: Some(reason),
                };
            }
            continue;
        }

        let scale = opts.tol * (1.0 + y.abs().max(step.y.abs()));
        let ratio = step.err / scale;
        let mut factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        let mut accepted = ratio <= 1.0;
        if accepted {
            let t_mid = t + 0.5 * hd;
            let half = dp_step(&rhs, t, y, k1, 0.5 * hd, t_mid);
            let (interp, _) = hermite(t, y, k1, t_new, step.y, step.k_end, t_mid);
            let dense_err = (interp - half.y).abs();
            if half.finite && dense_err > scale {
                accepted = false;
                factor = (0.9 * (scale / dense_err).powf(0.25)).clamp(0.2, 0.9);
            } else if half.finite && dense_err > 0.0 {
                factor = factor.min((0.9 * (scale / dense_err).powf(0.25)).max(1.0));
            }
        }
        if accepted {
            t = t_new;
            y = step.y;
            k1 = step.k_end;
            nodes.push((t, y, k1));
            if last {
                return AdaptiveRun { nodes, stopped: None };
            }
        }
        h = (hs * factor).min(opts.h_max);
        if guard_hit {
            // once near a guard, grow cautiously so the boundary is approached gradually
            h = h.min(2.0 * hs);
        }
        if h < opts.h_min {
            return AdaptiveRun {
                nodes,
                stopped: Some(StopReason::StepLimit),
            };
        }
    }
    AdaptiveRun {
        nodes,
        stopped: Some(StopReason::StepLimit),
    }
}

/// Cubic Hermite interpolation on `[t0, t1]` from values and slopes.
/// Returns the interpolated value and derivative at `t`.
pub fn hermite(t0: f64, y0: f64, d0: f64, t1: f64, y1: f64, d1: f64, t: f64) -> (f64, f64) {
    let h = t1 - t0;
    if h == 0.0 {
        return (y0, d0);
    }
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = 6.0 * s2 - 6.0 * s;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = -6.0 * s2 + 6.0 * s;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
    (value, deriv)
}

/// Quintic Hermite interpolation on `[t0, t1]` from values, first and second
/// derivatives at both ends. Returns the interpolated value and derivative at `t`.
pub fn hermite5(t0: f64, y0: [f64; 3], t1: f64, y1: [f64; 3], t: f64) -> (f64, f64) {
    let h = t1 - t0;
    if h == 0.0 {
        return (y0[0], y0[1]);
    }
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let basis = [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
    ];
    let slope = [
        -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
        1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
        s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4,
        1.5 * s2 - 4.0 * s3 + 2.5 * s4,
        -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
        30.0 * s2 - 60.0 * s3 + 30.0 * s4,
    ];
    let weights = [y0[0], h * y0[1], h * h * y0[2], h * h * y1[2], h * y1[1], y1[0]];
    let dot = |b: &[f64; 6]| b.iter().zip(&weights).map(|(b, w)| b * w).sum::<f64>();
    (dot(&basis), dot(&slope) / h)
}
