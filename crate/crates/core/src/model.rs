//! Host-vector dengue model with constant adulticide control.
//!
//! Humans move through S_h → E_h → I_h → R_h; mosquitoes have an aquatic
//! stage A_m feeding the adult classes S_m → E_m → I_m. The recovered class is
//! eliminated through S_h + E_h + I_h + R_h = N_h, so the dynamic state has
//! seven components. Insecticide removes adults at rate `c` and does not act
//! on the aquatic stage.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plain parameter values. Validate through [`ModelParams::new`].
///
/// `Default` gives the Cape Verde 2009 outbreak values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    /// Total human population N_h.
    pub human_population: f64,
    /// Average daily bites per mosquito, B.
    pub biting_rate: f64,
    /// Transmission probability per bite from an infectious mosquito.
    pub p_mosquito_to_human: f64,
    /// Transmission probability per bite from an infectious human.
    pub p_human_to_mosquito: f64,
    /// Human mortality, 1/day.
    pub human_mortality: f64,
    /// Human recovery rate (1 / viraemic period).
    pub human_recovery: f64,
    /// Adult mosquito mortality, 1/day.
    pub mosquito_mortality: f64,
    /// Eggs deposited per capita per day.
    pub egg_deposition: f64,
    /// Larval mortality, 1/day.
    pub larval_mortality: f64,
    /// Maturation rate from larva to adult, 1/day.
    pub maturation: f64,
    /// 1 / extrinsic incubation period (inside the mosquito).
    pub extrinsic_incubation: f64,
    /// 1 / intrinsic incubation period (inside the human).
    pub intrinsic_incubation: f64,
    /// Female mosquitoes per human, m.
    pub mosquitoes_per_human: f64,
    /// Larvae per human, k.
    pub larvae_per_human: f64,
    /// Larval carrying capacity K.
    pub larval_capacity: f64,
}

impl Default for ParamSet {
    fn default() -> Self {
        let human_population = 480_000.0;
        let larvae_per_human = 3.0;
        Self {
            human_population,
            biting_rate: 1.0,
            p_mosquito_to_human: 0.375,
            p_human_to_mosquito: 0.375,
            human_mortality: 1.0 / (71.0 * 365.0),
            human_recovery: 1.0 / 3.0,
            mosquito_mortality: 1.0 / 11.0,
            egg_deposition: 6.0,
            larval_mortality: 1.0 / 4.0,
            maturation: 0.08,
            extrinsic_incubation: 1.0 / 11.0,
            intrinsic_incubation: 1.0 / 4.0,
            mosquitoes_per_human: 6.0,
            larvae_per_human,
            larval_capacity: larvae_per_human * human_population,
        }
    }
}

/// Validated model parameters.
///
/// Rates are strictly positive except the egg deposition and maturation
/// rates, which may be zero to express a population that cannot sustain
/// itself. Transmission probabilities lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams(ParamSet);

impl ModelParams {
    pub fn new(values: ParamSet) -> Result<Self> {
        let checks: [(&'static str, f64, Bound); 15] = [
            ("N_h", values.human_population, Bound::Positive),
            ("B", values.biting_rate, Bound::NonNegative),
            ("beta_mh", values.p_mosquito_to_human, Bound::Probability),
            ("beta_hm", values.p_human_to_mosquito, Bound::Probability),
            ("mu_h", values.human_mortality, Bound::Positive),
            ("eta_h", values.human_recovery, Bound::Positive),
            ("mu_m", values.mosquito_mortality, Bound::Positive),
            ("mu_b", values.egg_deposition, Bound::NonNegative),
            ("mu_A", values.larval_mortality, Bound::Positive),
            ("eta_A", values.maturation, Bound::NonNegative),
            ("eta_m", values.extrinsic_incubation, Bound::Positive),
            ("nu_h", values.intrinsic_incubation, Bound::Positive),
            ("m", values.mosquitoes_per_human, Bound::Positive),
            ("k", values.larvae_per_human, Bound::Positive),
            ("K", values.larval_capacity, Bound::Positive),
        ];
        for (name, value, bound) in checks {
            bound.check(name, value)?;
        }
        Ok(Self(values))
    }

    /// Cape Verde 2009 parameter set.
    pub fn cape_verde() -> Self {
        Self(ParamSet::default())
    }

    pub fn values(&self) -> &ParamSet {
        &self.0
    }

    /// Per-component magnitudes used for error norms and residuals:
    /// N_h for the human classes, k·N_h for larvae, m·N_h for adults.
    pub fn component_scales(&self) -> [f64; 7] {
        let n = self.human_population;
        let larvae = self.larvae_per_human * n;
        let adults = self.mosquitoes_per_human * n;
        [n, n, n, larvae, adults, adults, adults]
    }
}

impl Deref for ModelParams {
    type Target = ParamSet;

    fn deref(&self) -> &ParamSet {
        &self.0
    }
}

#[derive(Clone, Copy)]
enum Bound {
    Positive,
    NonNegative,
    Probability,
}

impl Bound {
    fn check(self, name: &'static str, value: f64) -> Result<()> {
        let reason = if !value.is_finite() {
            Some("must be finite")
        } else {
            match self {
                Bound::Positive if value <= 0.0 => Some("must be > 0"),
                Bound::NonNegative if value < 0.0 => Some("must be >= 0"),
                Bound::Probability if !(0.0..=1.0).contains(&value) => Some("must lie in [0, 1]"),
                _ => None,
            }
        };
        match reason {
            Some(reason) => Err(Error::InvalidParameter { name, value, reason }),
            None => Ok(()),
        }
    }
}

/// Constant adulticide removal rate c (1/day).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct ControlLevel(f64);

impl ControlLevel {
    pub const NONE: ControlLevel = ControlLevel(0.0);

    pub fn new(c: f64) -> Result<Self> {
        if c.is_finite() && c >= 0.0 {
            Ok(Self(c))
        } else {
            Err(Error::InvalidControl(c))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Seven-component state (S_h, E_h, I_h, A_m, S_m, E_m, I_m).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State7 {
    pub s_h: f64,
    pub e_h: f64,
    pub i_h: f64,
    pub a_m: f64,
    pub s_m: f64,
    pub e_m: f64,
    pub i_m: f64,
}

impl State7 {
    pub const NAMES: [&'static str; 7] = ["S_h", "E_h", "I_h", "A_m", "S_m", "E_m", "I_m"];

    pub fn from_array(v: [f64; 7]) -> Self {
        Self {
            s_h: v[0],
            e_h: v[1],
            i_h: v[2],
            a_m: v[3],
            s_m: v[4],
            e_m: v[5],
            i_m: v[6],
        }
    }

    pub fn to_array(&self) -> [f64; 7] {
        [self.s_h, self.e_h, self.i_h, self.a_m, self.s_m, self.e_m, self.i_m]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn humans(&self) -> f64 {
        self.s_h + self.e_h + self.i_h
    }

    pub fn adults(&self) -> f64 {
        self.s_m + self.e_m + self.i_m
    }

    pub fn max_norm(&self) -> f64 {
        self.to_array().iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// State with the recovered class R_h restored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State8 {
    pub state: State7,
    pub r_h: f64,
}

impl State8 {
    pub const NAMES: [&'static str; 8] = ["S_h", "E_h", "I_h", "R_h", "A_m", "S_m", "E_m", "I_m"];

    /// Components in reporting order (S_h, E_h, I_h, R_h, A_m, S_m, E_m, I_m).
    pub fn to_array(&self) -> [f64; 8] {
        let x = &self.state;
        [x.s_h, x.e_h, x.i_h, self.r_h, x.a_m, x.s_m, x.e_m, x.i_m]
    }

    pub fn from_array(v: [f64; 8]) -> Self {
        Self {
            state: State7::from_array([v[0], v[1], v[2], v[4], v[5], v[6], v[7]]),
            r_h: v[3],
        }
    }

    pub fn human_total(&self) -> f64 {
        self.state.humans() + self.r_h
    }
}

/// M(X) and F such that dX/dt = M(X)·X + F.
#[derive(Debug, Clone, PartialEq)]
pub struct MetzlerForm {
    pub matrix: [[f64; 7]; 7],
    pub inflow: [f64; 7],
}

impl MetzlerForm {
    pub fn apply(&self, x: &State7) -> State7 {
        let v = x.to_array();
        let mut out = self.inflow;
        for (o, row) in out.iter_mut().zip(&self.matrix) {
            *o += row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        }
        State7::from_array(out)
    }

    /// Largest negative off-diagonal entry, or 0 when the matrix is Metzler.
    pub fn min_off_diagonal(&self) -> f64 {
        let mut lo = f64::INFINITY;
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    lo = lo.min(v);
                }
            }
        }
        lo
    }
}

/// Time derivative of the seven-component state.
pub fn rhs(p: &ModelParams, c: ControlLevel, x: &State7) -> Result<State7> {
    if !x.is_finite() {
        return Err(Error::NonFinite { what: "state" });
    }
    Ok(rhs_unchecked(p, c.value(), x))
}

pub(crate) fn rhs_unchecked(p: &ModelParams, c: f64, x: &State7) -> State7 {
    let n_h = p.human_population;
    let bite = p.biting_rate;
    let mu_h = p.human_mortality;
    let nu_h = p.intrinsic_incubation;
    let eta_h = p.human_recovery;
    let mu_m = p.mosquito_mortality;
    let eta_m = p.extrinsic_incubation;
    let eta_a = p.maturation;
    let mu_a = p.larval_mortality;

    let human_infection = bite * p.p_mosquito_to_human * x.i_m / n_h;
    let mosquito_infection = bite * p.p_human_to_mosquito * x.i_h / n_h;

    State7 {
        s_h: mu_h * n_h - (human_infection + mu_h) * x.s_h,
        e_h: human_infection * x.s_h - (nu_h + mu_h) * x.e_h,
        i_h: nu_h * x.e_h - (eta_h + mu_h) * x.i_h,
        a_m: p.egg_deposition * (1.0 - x.a_m / p.larval_capacity) * x.adults() - (eta_a + mu_a) * x.a_m,
        s_m: -(mosquito_infection + mu_m) * x.s_m + eta_a * x.a_m - c * x.s_m,
        e_m: mosquito_infection * x.s_m - (mu_m + eta_m) * x.e_m - c * x.e_m,
        i_m: eta_m * x.e_m - mu_m * x.i_m - c * x.i_m,
    }
}

/// Derivative of the eliminated recovered class, η_h·I_h − μ_h·R_h.
pub fn recovered_rate(p: &ModelParams, x: &State8) -> f64 {
    p.human_recovery * x.state.i_h - p.human_mortality * x.r_h
}

pub fn reconstruct_rh(p: &ModelParams, x: &State7) -> State8 {
    State8 {
        state: *x,
        r_h: p.human_population - x.s_h - x.e_h - x.i_h,
    }
}

/// Mosquito viability 𝓜 = η_A·μ_b − (η_A + μ_A)(μ_m + c).
///
/// Positive exactly when the adult population can sustain itself under
/// control `c`.
pub fn mosquito_viability(p: &ModelParams, c: ControlLevel) -> f64 {
    p.maturation * p.egg_deposition - (p.maturation + p.larval_mortality) * (p.mosquito_mortality + c.value())
}

/// The ratio (η_A + μ_A)(μ_m + c) / (μ_b·η_A); below one iff 𝓜 > 0.
///
/// This is the reciprocal of the usual "offspring per mosquito" quantity, but
/// it is the form whose comparison with one decides viability.
pub fn basic_offspring_number(p: &ModelParams, c: ControlLevel) -> Result<f64> {
    let denom = p.egg_deposition * p.maturation;
    if denom == 0.0 {
        return Err(Error::DivisionDomain {
            what: "basic offspring number (mu_b * eta_A = 0)",
        });
    }
    Ok((p.maturation + p.larval_mortality) * (p.mosquito_mortality + c.value()) / denom)
}

/// Control level at which 𝓜 reaches zero: η_A·μ_b/(η_A + μ_A) − μ_m.
pub fn collapse_control(p: &ModelParams) -> f64 {
    p.maturation * p.egg_deposition / (p.maturation + p.larval_mortality) - p.mosquito_mortality
}

const OMEGA_SLACK: f64 = 1e-9;

/// Membership in Ω: nonnegative components, S_h+E_h+I_h ≤ N_h,
/// A_m ≤ k·N_h and S_m+E_m+I_m ≤ m·N_h, each with additive slack of
/// 1e-9 times the bound.
pub fn in_omega(p: &ModelParams, x: &State7) -> bool {
    omega_violation(p, x).is_none()
}

/// Describes the first violated Ω bound, if any.
pub fn omega_violation(p: &ModelParams, x: &State7) -> Option<String> {
    if !x.is_finite() {
        return Some("state has non-finite components".into());
    }
    let scales = p.component_scales();
    for ((name, v), scale) in State7::NAMES.iter().zip(x.to_array()).zip(scales) {
        if v < -OMEGA_SLACK * scale {
            return Some(format!("{name} = {v} is negative"));
        }
    }
    let n = p.human_population;
    let larvae = p.larvae_per_human * n;
    let adults = p.mosquitoes_per_human * n;
    if x.humans() > n * (1.0 + OMEGA_SLACK) {
        return Some(format!("S_h+E_h+I_h = {} exceeds N_h = {n}", x.humans()));
    }
    if x.a_m > larvae * (1.0 + OMEGA_SLACK) {
        return Some(format!("A_m = {} exceeds k*N_h = {larvae}", x.a_m));
    }
    if x.adults() > adults * (1.0 + OMEGA_SLACK) {
        return Some(format!("S_m+E_m+I_m = {} exceeds m*N_h = {adults}", x.adults()));
    }
    None
}

pub fn metzler_decomposition(p: &ModelParams, c: ControlLevel, x: &State7) -> MetzlerForm {
    let c = c.value();
    let n_h = p.human_population;
    let mu_h = p.human_mortality;
    let nu_h = p.intrinsic_incubation;
    let eta_h = p.human_recovery;
    let mu_m = p.mosquito_mortality;
    let eta_m = p.extrinsic_incubation;
    let mu_b = p.egg_deposition;
    let human_infection = p.biting_rate * p.p_mosquito_to_human * x.i_m / n_h;
    let mosquito_infection = p.biting_rate * p.p_human_to_mosquito * x.i_h / n_h;

    let mut m = [[0.0; 7]; 7];
    m[0][0] = -human_infection - mu_h;
    m[1][0] = human_infection;
    m[1][1] = -nu_h - mu_h;
    m[2][1] = nu_h;
    m[2][2] = -eta_h - mu_h;
    m[3][3] = -mu_b * x.adults() / p.larval_capacity - p.maturation - p.larval_mortality;
    m[3][4] = mu_b;
    m[3][5] = mu_b;
    m[3][6] = mu_b;
    m[4][3] = p.maturation;
    m[4][4] = -mosquito_infection - mu_m - c;
    m[5][4] = mosquito_infection;
    m[5][5] = -mu_m - eta_m - c;
    m[6][5] = eta_m;
    m[6][6] = -mu_m - c;

    let mut inflow = [0.0; 7];
    inflow[0] = mu_h * n_h;
    MetzlerForm { matrix: m, inflow }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv() -> ModelParams {
        ModelParams::cape_verde()
    }

    #[test]
    fn trivial_state_is_stationary() {
        let x = State7 {
            s_h: 480_000.0,
            ..Default::default()
        };
        let d = rhs(&cv(), ControlLevel::NONE, &x).unwrap();
        assert_eq!(d, State7::default());
    }

    #[test]
    fn exposed_inflow_hand_value() {
        let x = State7 {
            s_h: 480_000.0,
            i_m: 1000.0,
            ..Default::default()
        };
        let d = rhs(&cv(), ControlLevel::NONE, &x).unwrap();
        assert!((d.e_h - 375.0).abs() < 1e-9);
    }

    #[test]
    fn aquatic_stage_ignores_control() {
        let x = State7::from_array([4e5, 10.0, 10.0, 1e6, 1e6, 100.0, 100.0]);
        let a = rhs(&cv(), ControlLevel::NONE, &x).unwrap();
        let b = rhs(&cv(), ControlLevel::new(0.5).unwrap(), &x).unwrap();
        assert_eq!(a.a_m, b.a_m);
        assert!(b.s_m < a.s_m);
    }

    #[test]
    fn rhs_rejects_nan() {
        let x = State7 {
            e_m: f64::NAN,
            ..Default::default()
        };
        assert!(matches!(
            rhs(&cv(), ControlLevel::NONE, &x),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn reconstruct_recovered() {
        let p = cv();
        let full = State7 {
            s_h: 480_000.0,
            ..Default::default()
        };
        assert_eq!(reconstruct_rh(&p, &full).r_h, 0.0);
        let initial = State7 {
            s_h: 479_350.0,
            e_h: 216.0,
            i_h: 434.0,
            ..Default::default()
        };
        assert_eq!(reconstruct_rh(&p, &initial).r_h, 0.0);
        let mid = State7 {
            s_h: 400_000.0,
            e_h: 30_000.0,
            i_h: 20_000.0,
            ..Default::default()
        };
        assert_eq!(reconstruct_rh(&p, &mid).r_h, 30_000.0);
    }

    #[test]
    fn human_total_derivative_vanishes_on_full_population() {
        let p = cv();
        let x = State7::from_array([400_000.0, 30_000.0, 20_000.0, 1e6, 2e6, 5e3, 1e3]);
        let full = reconstruct_rh(&p, &x);
        let d = rhs(&p, ControlLevel::NONE, &x).unwrap();
        let total = d.s_h + d.e_h + d.i_h + recovered_rate(&p, &full);
        let expected = p.human_mortality * (p.human_population - full.human_total());
        assert!((total - expected).abs() < 1e-9);
        assert!(total.abs() < 1e-9);
    }

    #[test]
    fn viability_values() {
        let p = cv();
        assert!((mosquito_viability(&p, ControlLevel::NONE) - 0.45).abs() < 1e-15);
        let c = ControlLevel::new(0.156961).unwrap();
        assert!((mosquito_viability(&p, c) - 0.3982029).abs() < 1e-6);
        let no_eggs = ModelParams::new(ParamSet {
            egg_deposition: 0.0,
            ..ParamSet::default()
        })
        .unwrap();
        let v = mosquito_viability(&no_eggs, ControlLevel::NONE);
        assert!((v + (1.0 / 11.0) * 0.33).abs() < 1e-15);
        assert!(v < 0.0);
    }

    #[test]
    fn expanded_viability_expression_matches() {
        // −(c(η_A+μ_A) + μ_Aμ_m + η_A(−μ_b+μ_m)), the fully expanded form
        let p = cv();
        for c in [0.0, 0.1, 0.7] {
            let expanded = -(c * (p.maturation + p.larval_mortality)
                + p.larval_mortality * p.mosquito_mortality
                + p.maturation * (-p.egg_deposition + p.mosquito_mortality));
            let ours = mosquito_viability(&p, ControlLevel::new(c).unwrap());
            assert!((expanded - ours).abs() < 1e-14);
        }
    }

    #[test]
    fn offspring_ratio() {
        let p = cv();
        let r = basic_offspring_number(&p, ControlLevel::NONE).unwrap();
        assert!((r - 0.0625).abs() < 1e-15);

        let no_eggs = ModelParams::new(ParamSet {
            egg_deposition: 0.0,
            ..ParamSet::default()
        })
        .unwrap();
        assert!(basic_offspring_number(&no_eggs, ControlLevel::NONE).is_err());

        // ratio = 1 at the collapse control
        let c = ControlLevel::new(collapse_control(&p)).unwrap();
        assert!((basic_offspring_number(&p, c).unwrap() - 1.0).abs() < 1e-12);
        assert!(mosquito_viability(&p, c).abs() < 1e-12);
    }

    #[test]
    fn collapse_bound_value() {
        assert!((collapse_control(&cv()) - 1.363636).abs() < 1e-6);
    }

    #[test]
    fn omega_membership() {
        let p = cv();
        let initial = State7 {
            s_h: 479_350.0,
            e_h: 216.0,
            i_h: 434.0,
            a_m: 3.0 * 480_000.0,
            s_m: 6.0 * 480_000.0,
            ..Default::default()
        };
        assert!(in_omega(&p, &initial));
        let mut neg = initial;
        neg.i_h = -1.0;
        assert!(!in_omega(&p, &neg));
        assert!(omega_violation(&p, &neg).unwrap().contains("I_h"));
        let mut over = initial;
        over.a_m = 3.0 * 480_000.0 * 1.01;
        assert!(omega_violation(&p, &over).unwrap().contains("A_m"));
    }

    #[test]
    fn parameter_validation() {
        let bad = ParamSet {
            p_human_to_mosquito: 1.5,
            ..ParamSet::default()
        };
        assert!(matches!(
            ModelParams::new(bad),
            Err(Error::InvalidParameter { name: "beta_hm", .. })
        ));
        let nan = ParamSet {
            human_mortality: f64::NAN,
            ..ParamSet::default()
        };
        assert!(ModelParams::new(nan).is_err());
        let zero_pop = ParamSet {
            human_population: 0.0,
            ..ParamSet::default()
        };
        assert!(ModelParams::new(zero_pop).is_err());
        assert!(ControlLevel::new(-0.1).is_err());
        assert!(ControlLevel::new(f64::INFINITY).is_err());
    }

    #[test]
    fn metzler_inflow_and_entries() {
        let p = cv();
        let trivial = State7 {
            s_h: 480_000.0,
            ..Default::default()
        };
        let form = metzler_decomposition(&p, ControlLevel::NONE, &trivial);
        let mut expected = [0.0; 7];
        expected[0] = p.human_mortality * 480_000.0;
        assert_eq!(form.inflow, expected);

        let x = State7 {
            s_h: 480_000.0,
            i_m: 1000.0,
            ..Default::default()
        };
        let form = metzler_decomposition(&p, ControlLevel::NONE, &x);
        // B·beta_mh·I_m/N_h multiplies S_h in the E_h row
        assert!((form.matrix[1][0] * x.s_h - 375.0).abs() < 1e-9);
        assert!(form.min_off_diagonal() >= 0.0);
    }
}
