//! Explicit Dormand-Prince 5(4) integrator with PI step-size control and the
//! pair's native fourth-order continuous extension.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    pub paired_scale: Option<PairedScale>,
}

/// Error scale for derivative components: `y[velocities + i]` is measured
/// against `max(|y[velocities + i]|, rate |y[positions + i]|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedScale {
    pub positions: usize,
    pub velocities: usize,
    pub len: usize,
    pub rate: f64,
}

impl OdeOptions {
    /// Error control that is relative for every component whose magnitude
    /// exceeds `1e-100 * rtol`.
    pub fn relative(rtol: f64) -> Self {
        Self {
            rtol,
            atol: rtol * 1e-100,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
            paired_scale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Completed,
    /// The right-hand side refused a state.
    RhsAbort {
        t: f64,
        reason: String,
    },
    /// The post-step check refused an accepted state; that state is dropped.
    CheckAbort {
        t: f64,
        reason: String,
    },
    StepUnderflow {
        t: f64,
        h: f64,
    },
    MaxSteps {
        t: f64,
    },
}

impl StopReason {
    pub fn is_completed(&self) -> bool {
        matches!(self, StopReason::Completed)
    }
}

/// Accepted steps and their interpolation data.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeOutcome {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    /// Continuous-extension coefficients for step `i -> i + 1`.
    cont: Vec<[Vec<f64>; 5]>,
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    pub stop: StopReason,
}

impl OdeOutcome {
    pub fn t_last(&self) -> f64 {
        *self.ts.last().expect("outcome holds the initial point")
    }

    pub fn y_last(&self) -> &[f64] {
        self.ys.last().expect("outcome holds the initial point")
    }

    /// Interpolated state at `t`, or `None` outside the integrated range.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let (t0, t1) = (self.ts[0], self.t_last());
        if !(t0..=t1).contains(&t) {
            return None;
        }
        if t == t1 {
            return Some(self.y_last().to_vec());
        }
        let i = self.ts.partition_point(|&s| s <= t) - 1;
        let h = self.ts[i + 1] - self.ts[i];
        let s = (t - self.ts[i]) / h;
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = &self.cont[i];
        Some(
            (0..r1.len())
                .map(|k| r1[k] + s * (r2[k] + s1 * (r3[k] + s * (r4[k] + s1 * r5[k]))))
                .collect(),
        )
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
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn lincomb(y: &[f64], h: f64, terms: &[(f64, &[f64])], out: &mut [f64]) {
    for i in 0..y.len() {
        let mut s = 0.0;
        for (a, k) in terms {
            s += a * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], o: &OdeOptions) -> f64 {
    let n = err.len() as f64;
    let magnitude = |i: usize| {
        let m = y0[i].abs().max(y1[i].abs());
        match o.paired_scale {
            Some(p) if (p.velocities..p.velocities + p.len).contains(&i) => {
                let j = p.positions + i - p.velocities;
                m.max(p.rate * y0[j].abs().max(y1[j].abs()))
            }
            _ => m,
        }
    };
    let s: f64 = err
        .iter()
        .enumerate()
        .map(|(i, e)| (e / (o.atol + o.rtol * magnitude(i))).powi(2))
        .sum();
    (s / n).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end > t0`.
///
/// `rhs` writes the derivative into its third argument and may refuse a
/// state with a message. `check` runs on each accepted state; a refusal ends
/// the integration without recording that state.
pub fn dopri5<F, C>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &OdeOptions,
    mut check: C,
) -> OdeOutcome
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), String>,
    C: FnMut(f64, &[f64]) -> Result<(), String>,
{
    assert!(t_end > t0, "integration interval must be nonempty");
    let n = y0.len();
    let mut out = OdeOutcome {
        ts: vec![t0],
        ys: vec![y0.to_vec()],
        cont: Vec::new(),
        accepted: 0,
        rejected: 0,
        rhs_evaluations: 0,
        stop: StopReason::Completed,
    };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut evals = 0usize;
    macro_rules! call {
        ($t:expr, $y:expr, $k:expr) => {{
            evals += 1;
            if let Err(reason) = rhs($t, $y, $k) {
                out.rhs_evaluations = evals;
                out.stop = StopReason::RhsAbort { t: $t, reason };
                return out;
            }
        }};
    }
    call!(t, &y, &mut k1);

    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            let mut f1 = vec![0.0; n];
            let mut y1 = vec![0.0; n];
            let h0 = initial_step(&y, &k1, opts, t_end - t0);
            lincomb(&y, h0, &[(1.0, &k1)], &mut y1);
            call!(t + h0, &y1, &mut f1);
            refine_initial_step(&y, &k1, &f1, h0, opts)
        }
    }
    .max(1e-8 * (t_end - t0))
    .min(opts.h_max)
    .min(t_end - t0);

    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut facold = 1e-4_f64;
    let mut last_rejected = false;

    loop {
        if out.accepted + out.rejected >= opts.max_steps {
            out.stop = StopReason::MaxSteps { t };
            break;
        }
        if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            out.stop = StopReason::StepUnderflow { t, h };
            break;
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        lincomb(&y, h, &[(A21, &k1)], &mut ytmp);
        call!(t + C2 * h, &ytmp, &mut k2);
        lincomb(&y, h, &[(A31, &k1), (A32, &k2)], &mut ytmp);
        call!(t + C3 * h, &ytmp, &mut k3);
        lincomb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)], &mut ytmp);
        call!(t + C4 * h, &ytmp, &mut k4);
        lincomb(
            &y,
            h,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            &mut ytmp,
        );
        call!(t + C5 * h, &ytmp, &mut k5);
        lincomb(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            &mut ytmp,
        );
        call!(t + h, &ytmp, &mut k6);
        lincomb(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            &mut ynew,
        );
        call!(t + h, &ynew, &mut k7);

        for i in 0..n {
            err[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = error_norm(&err, &y, &ynew, opts);
        if !e.is_finite() {
            out.rejected += 1;
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }

        let fac11 = e.powf(EXPO1);
        if e <= 1.0 {
            let t_new = if last { t_end } else { t + h };
            if let Err(reason) = check(t_new, &ynew) {
                out.stop = StopReason::CheckAbort { t: t_new, reason };
                break;
            }
            let mut cont: [Vec<f64>; 5] = Default::default();
            cont[0] = y.clone();
            cont[1] = ynew.iter().zip(&y).map(|(a, b)| a - b).collect();
            cont[2] = (0..n).map(|i| h * k1[i] - cont[1][i]).collect();
            cont[3] = (0..n)
                .map(|i| cont[1][i] - h * k7[i] - cont[2][i])
                .collect();
            cont[4] = (0..n)
                .map(|i| {
                    h * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i])
                })
                .collect();
            out.cont.push(cont);

            std::mem::swap(&mut k1, &mut k7);
            std::mem::swap(&mut y, &mut ynew);
            t = t_new;
            out.ts.push(t);
            out.ys.push(y.clone());
            out.accepted += 1;
            if last {
                break;
            }
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            facold = e.max(1e-4);
            let mut h_new = (h / fac).min(opts.h_max);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            out.rejected += 1;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
    out.rhs_evaluations = evals;
    out
}

fn scaled_rms(v: &[f64], y: &[f64], o: &OdeOptions) -> f64 {
    let n = v.len() as f64;
    (v.iter()
        .zip(y)
        .map(|(a, b)| (a / (o.atol + o.rtol * b.abs())).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

fn initial_step(y: &[f64], f: &[f64], o: &OdeOptions, span: f64) -> f64 {
    let d0 = scaled_rms(y, y, o);
    let d1 = scaled_rms(f, y, o);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0.min(span).min(o.h_max)
}

fn refine_initial_step(y: &[f64], f0: &[f64], f1: &[f64], h0: f64, o: &OdeOptions) -> f64 {
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled_rms(&diff, y, o) / h0;
    let d1 = scaled_rms(f0, y, o);
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
