//! Basic reproduction number at the disease-free equilibrium with mosquitoes.
//!
//! The infected subsystem is ordered (E_h, I_h, E_m, I_m). New infections
//! enter E_h from I_m and E_m from I_h; everything else is transition.

use serde::Serialize;

use crate::equilibria;
use crate::error::Result;
use crate::linalg::{self, DenseMatrix};
use crate::model::{mosquito_viability, ControlLevel, ModelParams};

/// Linearized new-infection (J_F) and transition (J_V) operators and the
/// next-generation matrix J_F·J_V⁻¹.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NgmDecomposition {
    pub new_infections: [[f64; 4]; 4],
    pub transitions: [[f64; 4]; 4],
    pub transitions_inverse: [[f64; 4]; 4],
    pub ngm: [[f64; 4]; 4],
}

pub fn build_ngm(p: &ModelParams, c: ControlLevel) -> Result<NgmDecomposition> {
    let point = equilibria::brdfe(p, c)?.state;
    let cv = c.value();
    let n_h = p.human_population;

    let mut jf = [[0.0; 4]; 4];
    jf[0][3] = p.biting_rate * p.p_mosquito_to_human * point.s_h / n_h;
    jf[2][1] = p.biting_rate * p.p_human_to_mosquito * point.s_m / n_h;

    let mut jv = [[0.0; 4]; 4];
    jv[0][0] = p.intrinsic_incubation + p.human_mortality;
    jv[1][0] = -p.intrinsic_incubation;
    jv[1][1] = p.human_recovery + p.human_mortality;
    jv[2][2] = p.mosquito_mortality + p.extrinsic_incubation + cv;
    jv[3][2] = -p.extrinsic_incubation;
    jv[3][3] = p.mosquito_mortality + cv;

    let jv_inv = lower_triangular_inverse(&jv);
    let mut ngm = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            ngm[i][j] = (0..4).map(|k| jf[i][k] * jv_inv[k][j]).sum();
        }
    }
    Ok(NgmDecomposition {
        new_infections: jf,
        transitions: jv,
        transitions_inverse: jv_inv,
        ngm,
    })
}

/// Inverse of a lower-triangular matrix with nonzero diagonal, column by
/// column through forward substitution.
#[allow(clippy::needless_range_loop)]
fn lower_triangular_inverse(l: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut inv = [[0.0; 4]; 4];
    for col in 0..4 {
        for i in col..4 {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let acc: f64 = (col..i).map(|k| l[i][k] * inv[k][col]).sum();
            inv[i][col] = (rhs - acc) / l[i][i];
        }
    }
    inv
}

/// Spectral radius of the next-generation matrix.
pub fn r0_spectral(p: &ModelParams, c: ControlLevel) -> Result<f64> {
    let ngm = build_ngm(p, c)?;
    linalg::spectral_radius(&DenseMatrix::from(ngm.ngm))
}

/// R0 from the closed form
/// R0² = B²·k·β_hm·β_mh·η_m·ν_h·𝓜 / (μ_b(η_h+μ_h)·μ_m·(c+μ_m)(c+η_m+μ_m)(μ_h+ν_h)).
pub fn r0_closed_form(p: &ModelParams, c: ControlLevel) -> Result<f64> {
    Ok(r0_squared(p, c)?.sqrt())
}

fn r0_squared(p: &ModelParams, c: ControlLevel) -> Result<f64> {
    let viability = mosquito_viability(p, c);
    if viability <= 0.0 {
        return Err(crate::error::Error::MosquitoCollapse { viability });
    }
    let cv = c.value();
    let num = p.biting_rate.powi(2)
        * p.larvae_per_human
        * p.p_human_to_mosquito
        * p.p_mosquito_to_human
        * p.extrinsic_incubation
        * p.intrinsic_incubation
        * viability;
    let den = p.egg_deposition
        * (p.human_recovery + p.human_mortality)
        * p.mosquito_mortality
        * (cv + p.mosquito_mortality)
        * (cv + p.extrinsic_incubation + p.mosquito_mortality)
        * (p.human_mortality + p.intrinsic_incubation);
    Ok(num / den)
}

/// Human-to-mosquito and mosquito-to-human factors with R_hm·R_mh = R0².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct R0Factors {
    pub human_to_mosquito: f64,
    pub mosquito_to_human: f64,
}

pub fn r0_factors(p: &ModelParams, c: ControlLevel) -> Result<R0Factors> {
    let point = equilibria::brdfe(p, c)?.state;
    let cv = c.value();
    let n_h = p.human_population;
    let human_to_mosquito = p.biting_rate * point.s_m * p.p_human_to_mosquito * p.intrinsic_incubation
        / (n_h * (p.human_recovery + p.human_mortality) * (p.human_mortality + p.intrinsic_incubation));
    let mosquito_to_human = p.biting_rate * point.s_h * p.p_mosquito_to_human * p.extrinsic_incubation
        / (n_h * (cv + p.mosquito_mortality) * (cv + p.extrinsic_incubation + p.mosquito_mortality));
    Ok(R0Factors {
        human_to_mosquito,
        mosquito_to_human,
    })
}

/// How R0 is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum R0Route {
    #[default]
    ClosedForm,
    Spectral,
}

pub fn r0(p: &ModelParams, c: ControlLevel, route: R0Route) -> Result<f64> {
    match route {
        R0Route::ClosedForm => r0_closed_form(p, c),
        R0Route::Spectral => r0_spectral(p, c),
    }
}
