//! Fixed points of the model: closed forms, Newton refinement and residuals.
//!
//! The closed-form disease-free point with mosquitoes places adults at
//! S_m = k·N_h·𝓜/(μ_b·μ_m). That value is stationary only without control;
//! for c > 0 the adult equation leaves a residual of −c·S_m. The closed form
//! is kept as is because the reproduction number and the control threshold
//! are defined at it; [`refine`] maps it onto the exact fixed point
//! S_m = η_A·A_m/(μ_m + c).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{in_omega, mosquito_viability, omega_violation, rhs_unchecked, ControlLevel, ModelParams, State7};
use crate::reproduction;
use crate::stability::jacobian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumKind {
    /// No mosquitoes, no disease.
    Trivial,
    /// Mosquitoes persist, disease absent.
    Brdfe,
    /// Disease persists in both populations.
    Endemic,
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EquilibriumKind::Trivial => "trivial",
            EquilibriumKind::Brdfe => "disease-free (BRDFE)",
            EquilibriumKind::Endemic => "endemic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub state: State7,
    /// max_i |rhs_i| / scale_i at `state`.
    pub residual_norm: f64,
    /// True when produced by Newton refinement.
    pub refined: bool,
    /// Newton iterations taken (zero for closed forms).
    pub iterations: usize,
}

impl Equilibrium {
    fn closed_form(p: &ModelParams, c: ControlLevel, kind: EquilibriumKind, state: State7) -> Self {
        Self {
            kind,
            state,
            residual_norm: residual(p, c, &state),
            refined: false,
            iterations: 0,
        }
    }
}

/// Scaled residual max_i |rhs_i(x)| / scale_i, with N_h for humans, k·N_h for
/// larvae and m·N_h for adults.
pub fn residual(p: &ModelParams, c: ControlLevel, x: &State7) -> f64 {
    let f = rhs_unchecked(p, c.value(), x).to_array();
    f.iter()
        .zip(p.component_scales())
        .fold(0.0, |acc, (v, s)| acc.max(v.abs() / s))
}

pub fn trivial_equilibrium(p: &ModelParams) -> Equilibrium {
    let state = State7 {
        s_h: p.human_population,
        ..Default::default()
    };
    Equilibrium::closed_form(p, ControlLevel::NONE, EquilibriumKind::Trivial, state)
}

/// Disease-free equilibrium with mosquitoes:
/// (N_h, 0, 0, k·N_h·𝓜/(η_A·μ_b), k·N_h·𝓜/(μ_b·μ_m), 0, 0).
pub fn brdfe(p: &ModelParams, c: ControlLevel) -> Result<Equilibrium> {
    let viability = require_viable(p, c)?;
    let kn = p.larvae_per_human * p.human_population;
    let state = State7 {
        s_h: p.human_population,
        a_m: kn * viability / (p.maturation * p.egg_deposition),
        s_m: kn * viability / (p.egg_deposition * p.mosquito_mortality),
        ..Default::default()
    };
    Ok(Equilibrium::closed_form(p, c, EquilibriumKind::Brdfe, state))
}

fn require_viable(p: &ModelParams, c: ControlLevel) -> Result<f64> {
    let viability = mosquito_viability(p, c);
    if viability > 0.0 {
        Ok(viability)
    } else {
        Err(Error::MosquitoCollapse { viability })
    }
}

/// Closed-form endemic equilibrium (I_h = ξ/χ).
///
/// Exact at c = 0. For c > 0 the closed form carries a small residual; use
/// [`endemic`] for the refined root.
pub fn endemic_closed_form(p: &ModelParams, c: ControlLevel) -> Result<Equilibrium> {
    let viability = require_viable(p, c)?;
    let r0 = reproduction::r0_closed_form(p, c)?;
    if r0 <= 1.0 {
        return Err(Error::NoEndemic {
            reason: format!("R0 = {r0} <= 1"),
        });
    }
    let cv = c.value();
    let n_h = p.human_population;
    let bite = p.biting_rate;
    let k = p.larvae_per_human;
    let b_hm = p.p_human_to_mosquito;
    let b_mh = p.p_mosquito_to_human;
    let mu_h = p.human_mortality;
    let nu_h = p.intrinsic_incubation;
    let eta_h = p.human_recovery;
    let mu_m = p.mosquito_mortality;
    let eta_m = p.extrinsic_incubation;
    let mu_b = p.egg_deposition;
    let eta_a = p.maturation;
    let m_ = viability;

    let xi = n_h
        * mu_h
        * (-bite * bite * k * b_hm * b_mh * nu_h * eta_m * m_
            + mu_b * mu_m * mu_m * (eta_m + mu_m) * (mu_h + nu_h) * (mu_h + eta_h)
            + cv * cv * mu_b * (eta_h + mu_h) * (mu_h + nu_h) * (cv + eta_m + 3.0 * mu_m)
            + cv * mu_b * mu_m * (mu_h + nu_h) * (mu_h * (3.0 * mu_m + 2.0) + eta_h * (2.0 * eta_m + 3.0 * mu_m)));
    let chi = bite
        * b_hm
        * (eta_h + mu_h)
        * (-mu_b * mu_h * (cv + mu_m) * (cv + eta_m + mu_m) - bite * k * b_mh * eta_m * m_)
        * (mu_h + nu_h);
    let i_h = xi / chi;

    let adult_removal = cv * n_h + bite * i_h * b_hm + n_h * mu_m;
    let i_m = bite * i_h * k * n_h * b_hm * eta_m * m_ / (mu_b * (cv + mu_m) * (cv + eta_m + mu_m) * adult_removal);
    let state = State7 {
        s_h: n_h - (mu_h + nu_h) * (mu_h + eta_h) / (mu_h * nu_h) * i_h,
        e_h: (mu_h + eta_h) / nu_h * i_h,
        i_h,
        a_m: m_ / (eta_a * mu_b) * k * n_h,
        s_m: k * n_h * n_h * m_ / (mu_b * adult_removal),
        e_m: (mu_m + cv) / eta_m * i_m,
        i_m,
    };
    if !state.is_finite() || state.to_array().iter().any(|&v| v <= 0.0) || !in_omega(p, &state) {
        return Err(Error::NoEndemic {
            reason: format!(
                "closed form lies outside the biological region ({})",
                omega_violation(p, &state).unwrap_or_else(|| "non-positive component".into())
            ),
        });
    }
    Ok(Equilibrium::closed_form(p, c, EquilibriumKind::Endemic, state))
}

/// Endemic equilibrium: the closed form refined by Newton iteration and
/// checked against Ω.
pub fn endemic(p: &ModelParams, c: ControlLevel) -> Result<Equilibrium> {
    let guess = endemic_closed_form(p, c)?;
    let eq = refine(p, c, &guess.state)?;
    if eq.kind != EquilibriumKind::Endemic || !in_omega(p, &eq.state) {
        return Err(Error::NoEndemic {
            reason: "refined root is not an interior point of the biological region".into(),
        });
    }
    Ok(eq)
}

pub const REFINE_TOLERANCE: f64 = 1e-10;
const MAX_NEWTON_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 30;

/// Damped Newton iteration on rhs = 0 starting at `guess`.
///
/// Converged when the scaled residual drops below 1e-10. Each step is halved
/// up to 30 times until the residual decreases.
pub fn refine(p: &ModelParams, c: ControlLevel, guess: &State7) -> Result<Equilibrium> {
    if !guess.is_finite() {
        return Err(Error::NonFinite { what: "Newton guess" });
    }
    let mut x = *guess;
    let mut res = residual(p, c, &x);
    let mut iterations = 0;
    while res >= REFINE_TOLERANCE {
        if iterations == MAX_NEWTON_ITERATIONS {
            return Err(Error::RefinementFailed {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let f = rhs_unchecked(p, c.value(), &x).to_array();
        let step = linalg::solve(jacobian(p, c, &x), f.map(|v| -v)).ok_or(Error::SingularJacobian)?;
        let base = x.to_array();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = State7::from_array(std::array::from_fn(|i| base[i] + lambda * step[i]));
            let trial_res = residual(p, c, &trial);
            if trial_res < res {
                accepted = Some((trial, trial_res));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, trial_res)) => {
                x = trial;
                res = trial_res;
            }
            None => {
                return Err(Error::RefinementFailed {
                    iterations,
                    residual: res,
                })
            }
        }
    }
    Ok(Equilibrium {
        kind: infer_kind(p, &x),
        state: x,
        residual_norm: res,
        refined: true,
        iterations,
    })
}

fn infer_kind(p: &ModelParams, x: &State7) -> EquilibriumKind {
    let s = p.component_scales();
    let infected = [x.e_h / s[1], x.i_h / s[2], x.e_m / s[5], x.i_m / s[6]];
    let mosquitoes = (x.a_m / s[3]).abs().max((x.s_m / s[4]).abs());
    if infected.iter().any(|v| v.abs() > 1e-9) {
        EquilibriumKind::Endemic
    } else if mosquitoes > 1e-9 {
        EquilibriumKind::Brdfe
    } else {
        EquilibriumKind::Trivial
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv() -> ModelParams {
        ModelParams::cape_verde()
    }

    fn ctl(c: f64) -> ControlLevel {
        ControlLevel::new(c).unwrap()
    }

    #[test]
    fn trivial_state() {
        let p = cv();
        let eq = trivial_equilibrium(&p);
        assert_eq!(eq.state.to_array(), [480_000.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(eq.residual_norm, 0.0);
        assert_eq!(residual(&p, ctl(0.7), &eq.state), 0.0);
    }

    #[test]
    fn brdfe_cape_verde() {
        let p = cv();
        let eq = brdfe(&p, ControlLevel::NONE).unwrap();
        assert!((eq.state.a_m - 1_350_000.0).abs() < 1e-6);
        assert!((eq.state.s_m - 1_188_000.0).abs() < 1e-6);
        assert!(eq.residual_norm < 1e-12);
        assert!(in_omega(&p, &eq.state));
    }

    #[test]
    fn brdfe_collapse() {
        // mu_b <= mu_m (mu_A + eta_A) / eta_A
        let p = ModelParams::new(crate::model::ParamSet {
            egg_deposition: (1.0 / 11.0) * 0.33 / 0.08,
            ..Default::default()
        })
        .unwrap();
        assert!(matches!(
            brdfe(&p, ControlLevel::NONE),
            Err(Error::MosquitoCollapse { .. })
        ));
        assert!(matches!(brdfe(&cv(), ctl(1.5)), Err(Error::MosquitoCollapse { .. })));
    }

    #[test]
    fn controlled_brdfe_residual_is_adult_removal() {
        // The closed-form adult level is not stationary under control: dS_m/dt = −c·S_m.
        let p = cv();
        let c = 0.12;
        let eq = brdfe(&p, ctl(c)).unwrap();
        let d = crate::model::rhs(&p, ctl(c), &eq.state).unwrap();
        assert!((d.s_m + c * eq.state.s_m).abs() < 1e-6 * eq.state.s_m);
        let exact = refine(&p, ctl(c), &eq.state).unwrap();
        assert_eq!(exact.kind, EquilibriumKind::Brdfe);
        assert!(exact.residual_norm < REFINE_TOLERANCE);
        let want = p.maturation * eq.state.a_m / (p.mosquito_mortality + c);
        assert!((exact.state.s_m - want).abs() < 1e-8 * want);
        assert!((exact.state.a_m - eq.state.a_m).abs() < 1e-8 * eq.state.a_m);
    }

    #[test]
    fn endemic_closed_form_cape_verde() {
        let p = cv();
        let eq = endemic_closed_form(&p, ControlLevel::NONE).unwrap();
        assert!(!eq.refined);
        assert!(eq.state.to_array().iter().all(|&v| v > 0.0));
        assert!(in_omega(&p, &eq.state));
        let ratio = eq.state.e_m / eq.state.i_m;
        assert!((ratio - p.mosquito_mortality / p.extrinsic_incubation).abs() < 1e-12);
        assert!(eq.residual_norm < 1e-12);

        let c = ctl(0.03);
        let eq = endemic_closed_form(&p, c).unwrap();
        let ratio = eq.state.e_m / eq.state.i_m;
        assert!((ratio - (p.mosquito_mortality + 0.03) / p.extrinsic_incubation).abs() < 1e-12);

        assert!(matches!(
            endemic_closed_form(&p, ctl(0.2)),
            Err(Error::NoEndemic { .. })
        ));
    }

    #[test]
    fn refine_from_brdfe_is_immediate() {
        let p = cv();
        let eq = brdfe(&p, ControlLevel::NONE).unwrap();
        let r = refine(&p, ControlLevel::NONE, &eq.state).unwrap();
        assert!(r.iterations <= 2);
        assert_eq!(r.kind, EquilibriumKind::Brdfe);
        assert!(r.refined);
    }

    #[test]
    fn refine_endemic_and_recover_from_perturbation() {
        let p = cv();
        let c = ControlLevel::NONE;
        let root = endemic(&p, c).unwrap();
        assert!(root.residual_norm < REFINE_TOLERANCE);
        assert_eq!(root.kind, EquilibriumKind::Endemic);

        let mut guess = root.state;
        guess.i_h *= 1.01;
        let again = refine(&p, c, &guess).unwrap();
        for (a, b) in again.state.to_array().iter().zip(root.state.to_array()) {
            assert!((a - b).abs() <= 1e-8 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn refine_failure_reports_residual() {
        let p = cv();
        let guess = State7::from_array([f64::NAN; 7]);
        assert!(refine(&p, ControlLevel::NONE, &guess).is_err());
    }

    #[test]
    fn residual_positive_off_equilibrium() {
        let p = cv();
        let x = State7 {
            s_h: 479_350.0,
            e_h: 216.0,
            i_h: 434.0,
            a_m: 1_440_000.0,
            s_m: 2_880_000.0,
            ..Default::default()
        };
        assert!(residual(&p, ControlLevel::NONE, &x) > 0.0);
    }
}
