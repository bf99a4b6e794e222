//! Embedded adaptive Runge-Kutta 5(4) (Dormand-Prince) for dense
//! first-order systems, with FSAL reuse and cubic-Hermite dense output
//! between accepted steps.

use nalgebra::DVector;

/// Step-size controller options.
#[derive(Debug, Clone)]
pub struct RkOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard cap on a single step; `None` means the full interval.
    pub max_step: Option<f64>,
    /// Below this step size the controller gives up ([`Outcome::Stalled`]).
    pub step_floor: f64,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        RkOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            step_floor: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

/// How an integration ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Reached `t_end`.
    Reached,
    /// The sink asked to stop at the given time.
    Halted(f64),
    /// Controller could not continue: the next step would be below the
    /// floor (or the state went non-finite at the smallest allowed step).
    /// `attempted` is the step that was about to be tried.
    Stalled { t: f64, attempted: f64 },
    /// Step budget exhausted.
    MaxSteps(f64),
}

/// One accepted step, handed to the sink.
pub struct Accepted<'a> {
    pub t: f64,
    pub y: &'a DVector<f64>,
    /// Derivative at (`t`, `y`); FSAL stage, free of charge.
    pub dy: &'a DVector<f64>,
    /// Size of the step that produced this state (0 for the initial point).
    pub h: f64,
}

// Dormand-Prince 5(4) coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
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
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dt = f(t, y)` from `t0` to `t_end > t0`; the right-hand
/// side writes its value into the provided buffer.
///
/// The sink receives the initial point and every accepted step and may
/// return `false` to halt. Returns the outcome together with the final
/// `(t, y)` pair.
pub fn integrate<F, S>(
    f: F,
    t0: f64,
    y0: DVector<f64>,
    t_end: f64,
    opts: &RkOptions,
    sink: S,
) -> (Outcome, f64, DVector<f64>)
where
    F: FnMut(f64, &DVector<f64>, &mut DVector<f64>),
    S: FnMut(&Accepted) -> bool,
{
    integrate_with_aux_error(f, t0, y0, t_end, opts, None, sink)
}

/// Extra per-step error functional: maps the candidate state and the
/// embedded local-error vector to an error ratio.
pub type AuxError<'a> = &'a dyn Fn(&DVector<f64>, &DVector<f64>) -> f64;

/// [`integrate`] with an extra per-step error functional, which returns
/// an error ratio on the same scale as the built-in component norm
/// (acceptance requires the combined ratio to stay at most 1). Used to
/// protect derived invariants whose absolute accuracy is not captured by
/// componentwise relative control; working from the error vector keeps
/// the functional free of large-magnitude cancellation.
pub fn integrate_with_aux_error<F, S>(
    mut f: F,
    t0: f64,
    y0: DVector<f64>,
    t_end: f64,
    opts: &RkOptions,
    aux_error: Option<AuxError>,
    mut sink: S,
) -> (Outcome, f64, DVector<f64>)
where
    F: FnMut(f64, &DVector<f64>, &mut DVector<f64>),
    S: FnMut(&Accepted) -> bool,
{
    let dim = y0.len();
    let span = t_end - t0;
    assert!(span > 0.0, "integration span must be positive");
    let hmax = opts.max_step.unwrap_or(span).min(span);

    let mut t = t0;
    let mut y = y0;
    let mut k: Vec<DVector<f64>> = vec![DVector::zeros(dim); 7];
    let mut arg = DVector::zeros(dim);
    let mut y_new = DVector::zeros(dim);
    let mut err_vec = DVector::zeros(dim);

    {
        let (k0, _) = k.split_at_mut(1);
        f(t, &y, &mut k0[0]);
    }
    if !sink(&Accepted {
        t,
        y: &y,
        dy: &k[0],
        h: 0.0,
    }) {
        return (Outcome::Halted(t), t, y);
    }

    let mut h = initial_step(&mut f, t, &y, &k[0].clone(), opts, hmax);
    let mut rejected_last = false;

    for _ in 0..opts.max_steps {
        if t >= t_end {
            return (Outcome::Reached, t, y);
        }
        h = h.min(t_end - t).min(hmax);
        if h < opts.step_floor && t + h < t_end {
            return (Outcome::Stalled { t, attempted: h }, t, y);
        }

        let mut non_finite = false;
        for stage in 1..7 {
            arg.copy_from(&y);
            let (head, tail) = k.split_at_mut(stage);
            for (j, kj) in head.iter().enumerate() {
                let a = A[stage - 1][j];
                if a != 0.0 {
                    arg.axpy(h * a, kj, 1.0);
                }
            }
            if arg.iter().any(|v| !v.is_finite()) {
                non_finite = true;
                break;
            }
            f(t + C[stage] * h, &arg, &mut tail[0]);
            if tail[0].iter().any(|v| !v.is_finite()) {
                non_finite = true;
                break;
            }
        }
        // Stage 6's argument row equals the 5th-order weights, so the new
        // state is exactly the argument fed to the last (FSAL) stage.
        let err = if non_finite {
            f64::INFINITY
        } else {
            y_new.copy_from(&y);
            for (j, kj) in k.iter().enumerate().take(6) {
                let a = A[5][j];
                if a != 0.0 {
                    y_new.axpy(h * a, kj, 1.0);
                }
            }
            let mut acc = 0.0;
            for i in 0..dim {
                let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                err_vec[i] = h * e;
                acc += (err_vec[i] / sc) * (err_vec[i] / sc);
            }
            let mut err = (acc / dim as f64).sqrt();
            if let Some(aux) = aux_error {
                err = err.max(aux(&y_new, &err_vec));
            }
            err
        };

        if err <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            if !sink(&Accepted {
                t,
                y: &y,
                dy: &k[0],
                h,
            }) {
                return (Outcome::Halted(t), t, y);
            }
            let fac_max = if rejected_last { 1.0 } else { 5.0 };
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, fac_max);
            h *= fac;
            rejected_last = false;
        } else {
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 0.5)
            } else {
                0.2
            };
            let h_next = h * fac;
            if h_next < opts.step_floor {
                return (
                    Outcome::Stalled {
                        t,
                        attempted: h_next,
                    },
                    t,
                    y,
                );
            }
            h = h_next;
            rejected_last = true;
        }
    }
    (Outcome::MaxSteps(t), t, y)
}

/// Hairer-style starting step heuristic.
fn initial_step<F>(
    f: &mut F,
    t0: f64,
    y0: &DVector<f64>,
    f0: &DVector<f64>,
    opts: &RkOptions,
    hmax: f64,
) -> f64
where
    F: FnMut(f64, &DVector<f64>, &mut DVector<f64>),
{
    let dim = y0.len();
    let sc = |i: usize| opts.abs_tol + opts.rel_tol * y0[i].abs();
    let rms = |v: &DVector<f64>| {
        ((0..dim).map(|i| (v[i] / sc(i)).powi(2)).sum::<f64>() / dim as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(hmax);
    let y1 = y0 + h0 * f0;
    let mut f1 = DVector::zeros(dim);
    f(t0 + h0, &y1, &mut f1);
    let d2 = rms(&(&f1 - f0)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(hmax).max(opts.step_floor)
}

/// Cubic Hermite interpolation between two accepted nodes.
pub fn hermite_interpolate(
    t0: f64,
    y0: &DVector<f64>,
    dy0: &DVector<f64>,
    t1: f64,
    y1: &DVector<f64>,
    dy1: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * y0 + (h * h10) * dy0 + h01 * y1 + (h * h11) * dy1
}
