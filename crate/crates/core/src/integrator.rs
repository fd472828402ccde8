//! Dormand–Prince 5(4) integration of the seven-component system with dense
//! output on a uniform reporting grid, plus fixed-step reference schemes.
//!
//! Values are never clipped; negative excursions are left for callers to
//! detect with [`crate::model::in_omega`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{omega_violation, reconstruct_rh, rhs_unchecked, ControlLevel, ModelParams, State7, State8};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub t0: f64,
    pub t_end: f64,
    pub rtol: f64,
    /// Absolute tolerance as a fraction of each component's scale
    /// (N_h, k·N_h or m·N_h).
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub output_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t0: 0.0,
            t_end: 100.0,
            rtol: 1e-8,
            atol: 1e-8,
            h_init: 1e-3,
            h_max: 1.0,
            output_step: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("t0", self.t0),
            ("t_end", self.t_end),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("h_init", self.h_init),
            ("h_max", self.h_max),
            ("output_step", self.output_step),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("{name} must be finite")));
        }
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.t_end < self.t0 {
            return fail("t_end must not precede t0");
        }
        if self.rtol <= 0.0 || self.atol <= 0.0 {
            return fail("rtol and atol must be > 0");
        }
        if !(self.h_init > 0.0 && self.h_init <= self.h_max) {
            return fail("need 0 < h_init <= h_max");
        }
        if self.output_step <= 0.0 {
            return fail("output_step must be > 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State8>,
    pub step_stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &State8)> {
        Some((*self.times.last()?, self.states.last()?))
    }

    /// Peak of a component over the reporting grid.
    pub fn peak(&self, component: impl Fn(&State8) -> f64) -> f64 {
        self.states.iter().map(component).fold(f64::NEG_INFINITY, f64::max)
    }
}

const MIN_STEP: f64 = 1e-12;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
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
// fifth-order weights equal the last row of A (FSAL)
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// fifth minus fourth order
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

type Vec7 = [f64; 7];

fn eval(p: &ModelParams, c: f64, y: &Vec7) -> Vec7 {
    rhs_unchecked(p, c, &State7::from_array(*y)).to_array()
}

/// One Dormand–Prince step. Returns the stages; `k[6]` is f at the new point.
fn dp_stages(p: &ModelParams, c: f64, y: &Vec7, k0: &Vec7, h: f64) -> ([Vec7; 7], Vec7) {
    let mut k = [[0.0; 7]; 7];
    k[0] = *k0;
    let mut y_new = *y;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..7 {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        if s == 6 {
            y_new = ys;
        }
        k[s] = eval(p, c, &ys);
    }
    (k, y_new)
}

struct Dense {
    t_old: f64,
    h: f64,
    coeffs: [Vec7; 5],
}

impl Dense {
    fn at(&self, t: f64) -> Vec7 {
        let s = (t - self.t_old) / self.h;
        let s1 = 1.0 - s;
        let r = &self.coeffs;
        std::array::from_fn(|i| r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i]))))
    }
}

fn output_grid(cfg: &SolverConfig) -> Vec<f64> {
    let span = cfg.t_end - cfg.t0;
    let n = (span / cfg.output_step).floor() as usize;
    let mut times: Vec<f64> = (0..=n)
        .map(|i| cfg.t0 + i as f64 * cfg.output_step)
        .filter(|&t| t <= cfg.t_end)
        .collect();
    let last = *times.last().unwrap();
    if cfg.t_end - last > 1e-9 * cfg.output_step {
        times.push(cfg.t_end);
    } else if let Some(l) = times.last_mut() {
        *l = cfg.t_end;
    }
    times
}

/// Adaptive Dormand–Prince 5(4) integration reported on a uniform grid.
pub fn integrate(p: &ModelParams, c: ControlLevel, x0: &State7, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if let Some(bound) = omega_violation(p, x0) {
        return Err(Error::OutsideOmega { bound });
    }
    let cv = c.value();
    let scales = p.component_scales();
    let atol: Vec7 = scales.map(|s| cfg.atol * s);
    let grid = output_grid(cfg);

    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    times.push(grid[0]);
    states.push(reconstruct_rh(p, x0));
    let mut next_out = 1;

    let mut stats = StepStats::default();
    let mut t = cfg.t0;
    let mut y = x0.to_array();
    let mut k0 = eval(p, cv, &y);
    let mut h = cfg.h_init.min(cfg.h_max);

    while next_out < grid.len() {
        let remaining = cfg.t_end - t;
        let last_step = 1.01 * h >= remaining;
        if last_step {
            h = remaining;
        }
        if h < MIN_STEP {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let (k, y_new) = dp_stages(p, cv, &y, &k0, h);
        let mut err = 0.0;
        for i in 0..7 {
            let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * h;
            let sk = atol[i] + cfg.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sk).powi(2);
        }
        let err = (err / 7.0).sqrt();

        if !err.is_finite() || err > 1.0 {
            stats.rejected += 1;
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).max(FAC_MIN)
            } else {
                FAC_MIN
            };
            h *= fac;
            continue;
        }

        stats.accepted += 1;
        let t_new = if last_step { cfg.t_end } else { t + h };
        let ydiff: Vec7 = std::array::from_fn(|i| y_new[i] - y[i]);
        let bspl: Vec7 = std::array::from_fn(|i| h * k[0][i] - ydiff[i]);
        let dense = Dense {
            t_old: t,
            h,
            coeffs: [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k[6][i] - bspl[i]),
                std::array::from_fn(|i| h * (0..7).map(|s| D[s] * k[s][i]).sum::<f64>()),
            ],
        };
        while next_out < grid.len() && grid[next_out] <= t_new {
            let to = grid[next_out];
            let value = if to == t_new { y_new } else { dense.at(to) };
            times.push(to);
            states.push(reconstruct_rh(p, &State7::from_array(value)));
            next_out += 1;
        }

        t = t_new;
        y = y_new;
        k0 = k[6];
        let fac = if err == 0.0 {
            FAC_MAX
        } else {
            (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
        };
        h = (h * fac).min(cfg.h_max);
    }

    Ok(Trajectory {
        times,
        states,
        step_stats: stats,
    })
}

/// Fixed-step schemes used as independent references in tests and
/// convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedMethod {
    ClassicalRk4,
    /// The fifth-order Dormand–Prince solution without error control.
    DormandPrince5,
}

/// Classical fourth-order Runge–Kutta from t = 0 to `t_end`, reporting every
/// step.
pub fn integrate_fixed_rk4(p: &ModelParams, c: ControlLevel, x0: &State7, h: f64, t_end: f64) -> Result<Trajectory> {
    integrate_fixed(p, c, x0, h, t_end, FixedMethod::ClassicalRk4)
}

pub fn integrate_fixed(
    p: &ModelParams,
    c: ControlLevel,
    x0: &State7,
    h: f64,
    t_end: f64,
    method: FixedMethod,
) -> Result<Trajectory> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidConfig(format!("fixed step h = {h} must be > 0")));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidConfig(format!("t_end = {t_end} must be >= 0")));
    }
    if !x0.is_finite() {
        return Err(Error::NonFinite { what: "initial state" });
    }
    let cv = c.value();
    let mut n = (t_end / h).round() as usize;
    if (n as f64) * h > t_end * (1.0 + 1e-12) {
        n -= 1;
    }
    let mut times = vec![0.0];
    let mut states = vec![reconstruct_rh(p, x0)];
    let mut y = x0.to_array();
    let step = |y: &Vec7, h: f64| -> Vec7 {
        match method {
            FixedMethod::ClassicalRk4 => rk4_step(p, cv, y, h),
            FixedMethod::DormandPrince5 => {
                let k0 = eval(p, cv, y);
                let (k, _) = dp_stages(p, cv, y, &k0, h);
                std::array::from_fn(|i| y[i] + h * (0..7).map(|s| B[s] * k[s][i]).sum::<f64>())
            }
        }
    };
    for i in 1..=n {
        y = step(&y, h);
        times.push(i as f64 * h);
        states.push(reconstruct_rh(p, &State7::from_array(y)));
    }
    let t_last = n as f64 * h;
    if t_end - t_last > 1e-12 * t_end.max(1.0) {
        y = step(&y, t_end - t_last);
        times.push(t_end);
        states.push(reconstruct_rh(p, &State7::from_array(y)));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "fixed-step solution",
        });
    }
    Ok(Trajectory {
        times,
        states,
        step_stats: StepStats {
            accepted: n,
            rejected: 0,
        },
    })
}

fn rk4_step(p: &ModelParams, c: f64, y: &Vec7, h: f64) -> Vec7 {
    let k1 = eval(p, c, y);
    let k2 = eval(p, c, &std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
    let k3 = eval(p, c, &std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
    let k4 = eval(p, c, &std::array::from_fn(|i| y[i] + h * k3[i]));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}
