//! Linearization of the seven-component system and local stability of its
//! equilibria.
//!
//! The recovered class is eliminated, so the reduced Jacobian omits the
//! trivially stable −μ_h direction it would contribute.

use num_complex::Complex64;
use serde::Serialize;

use crate::equilibria::{Equilibrium, EquilibriumKind};
use crate::error::Result;
use crate::linalg::{self, DenseMatrix};
use crate::model::{ControlLevel, ModelParams, State7};
use crate::reproduction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    AsymptoticallyStable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::AsymptoticallyStable => "asymptotically stable",
            Classification::Unstable => "unstable",
            Classification::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    #[serde(serialize_with = "serialize_complex")]
    pub eigenvalues: Vec<Complex64>,
    pub spectral_abscissa: f64,
    pub classification: Classification,
    /// Populated for the disease-free equilibrium with mosquitoes.
    pub r0_at_point: Option<f64>,
}

fn serialize_complex<S: serde::Serializer>(values: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for z in values {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Analytic Jacobian of the right-hand side at `x`.
pub fn jacobian(p: &ModelParams, c: ControlLevel, x: &State7) -> [[f64; 7]; 7] {
    let c = c.value();
    let n_h = p.human_population;
    let mu_h = p.human_mortality;
    let nu_h = p.intrinsic_incubation;
    let eta_h = p.human_recovery;
    let mu_m = p.mosquito_mortality;
    let eta_m = p.extrinsic_incubation;
    let mu_b = p.egg_deposition;
    let k_cap = p.larval_capacity;
    let to_human = p.biting_rate * p.p_mosquito_to_human / n_h;
    let to_mosquito = p.biting_rate * p.p_human_to_mosquito / n_h;
    let logistic = mu_b * (1.0 - x.a_m / k_cap);

    let mut j = [[0.0; 7]; 7];
    // S_h
    j[0][0] = -to_human * x.i_m - mu_h;
    j[0][6] = -to_human * x.s_h;
    // E_h
    j[1][0] = to_human * x.i_m;
    j[1][1] = -(nu_h + mu_h);
    j[1][6] = to_human * x.s_h;
    // I_h
    j[2][1] = nu_h;
    j[2][2] = -(eta_h + mu_h);
    // A_m
    j[3][3] = -mu_b * x.adults() / k_cap - p.maturation - p.larval_mortality;
    j[3][4] = logistic;
    j[3][5] = logistic;
    j[3][6] = logistic;
    // S_m
    j[4][2] = -to_mosquito * x.s_m;
    j[4][3] = p.maturation;
    j[4][4] = -to_mosquito * x.i_h - mu_m - c;
    // E_m
    j[5][2] = to_mosquito * x.s_m;
    j[5][4] = to_mosquito * x.i_h;
    j[5][5] = -(mu_m + eta_m + c);
    // I_m
    j[6][5] = eta_m;
    j[6][6] = -(mu_m + c);
    j
}

/// Eigenvalues of the Jacobian at `x`, sorted by descending real part.
pub fn jacobian_eigenvalues(p: &ModelParams, c: ControlLevel, x: &State7) -> Result<Vec<Complex64>> {
    linalg::eigenvalues(&DenseMatrix::from(jacobian(p, c, x)))
}

/// Margin separating stable from unstable: 1e-9 times the largest diagonal
/// rate of the Jacobian.
pub fn tolerance_margin(jac: &[[f64; 7]; 7]) -> f64 {
    let rate = (0..7).fold(0.0, |acc: f64, i| acc.max(jac[i][i].abs()));
    1e-9 * rate
}

pub fn classify(p: &ModelParams, c: ControlLevel, eq: &Equilibrium) -> Result<StabilityReport> {
    let jac = jacobian(p, c, &eq.state);
    let eigenvalues = linalg::eigenvalues(&DenseMatrix::from(jac))?;
    let spectral_abscissa = eigenvalues.iter().fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re));
    let margin = tolerance_margin(&jac);
    let classification = if spectral_abscissa < -margin {
        Classification::AsymptoticallyStable
    } else if spectral_abscissa > margin {
        Classification::Unstable
    } else {
        Classification::Marginal
    };
    let r0_at_point = match eq.kind {
        EquilibriumKind::Brdfe => Some(reproduction::r0_closed_form(p, c)?),
        _ => None,
    };
    Ok(StabilityReport {
        eigenvalues,
        spectral_abscissa,
        classification,
        r0_at_point,
    })
}
