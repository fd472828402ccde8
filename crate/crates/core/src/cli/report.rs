//! Aggregated analysis of a scenario, rendered as text and JSON from the same
//! values.

use std::fmt::Write;

use serde::Serialize;

use crate::equilibria::{self, Equilibrium};
use crate::error::{Error, Result};
use crate::model::{basic_offspring_number, collapse_control, mosquito_viability, ControlLevel, ModelParams};
use crate::reproduction::{self, R0Factors};
use crate::stability::{self, StabilityReport};
use crate::threshold::{self, ControlOutcome};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumEntry {
    pub label: String,
    pub equilibrium: Equilibrium,
    pub stability: StabilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub scenario: String,
    pub control: f64,
    pub mosquito_viability: f64,
    pub collapse_bound: f64,
    /// Absent when μ_b·η_A = 0.
    pub offspring_ratio: Option<f64>,
    pub mosquito_collapse: bool,
    pub r0_closed_form: Option<f64>,
    pub r0_spectral: Option<f64>,
    pub r0_factors: Option<R0Factors>,
    pub equilibria: Vec<EquilibriumEntry>,
    /// Why no endemic equilibrium is listed, when none is.
    pub endemic_note: Option<String>,
    pub threshold: ControlOutcome,
}

impl AnalysisReport {
    pub fn build(name: &str, p: &ModelParams, c: ControlLevel, tol: f64) -> Result<Self> {
        let viability = mosquito_viability(p, c);
        let collapse = viability <= 0.0;
        let offspring_ratio = match basic_offspring_number(p, c) {
            Ok(v) => Some(v),
            Err(Error::DivisionDomain { .. }) => None,
            Err(e) => return Err(e),
        };

        let mut entries = Vec::new();
        let trivial = equilibria::trivial_equilibrium(p);
        entries.push(EquilibriumEntry {
            label: "trivial".into(),
            stability: stability::classify(p, c, &trivial)?,
            equilibrium: trivial,
        });

        let (r0_closed_form, r0_spectral, r0_factors, endemic_note) = if collapse {
            (None, None, None, Some("mosquito population collapses".to_string()))
        } else {
            let brdfe = equilibria::brdfe(p, c)?;
            if c.value() > 0.0 {
                let exact = equilibria::refine(p, c, &brdfe.state)?;
                entries.push(EquilibriumEntry {
                    label: "disease-free, exact fixed point".into(),
                    stability: stability::classify(p, c, &exact)?,
                    equilibrium: exact,
                });
            }
            entries.insert(
                1,
                EquilibriumEntry {
                    label: "disease-free (closed form)".into(),
                    stability: stability::classify(p, c, &brdfe)?,
                    equilibrium: brdfe,
                },
            );
            let note = match equilibria::endemic(p, c) {
                Ok(eq) => {
                    entries.push(EquilibriumEntry {
                        label: "endemic (refined)".into(),
                        stability: stability::classify(p, c, &eq)?,
                        equilibrium: eq,
                    });
                    None
                }
                Err(e @ (Error::NoEndemic { .. } | Error::RefinementFailed { .. })) => Some(e.to_string()),
                Err(e) => return Err(e),
            };
            (
                Some(reproduction::r0_closed_form(p, c)?),
                Some(reproduction::r0_spectral(p, c)?),
                Some(reproduction::r0_factors(p, c)?),
                note,
            )
        };

        Ok(Self {
            scenario: name.to_string(),
            control: c.value(),
            mosquito_viability: viability,
            collapse_bound: collapse_control(p),
            offspring_ratio,
            mosquito_collapse: collapse,
            r0_closed_form,
            r0_spectral,
            r0_factors,
            equilibria: entries,
            endemic_note,
            threshold: threshold::min_control(p, tol)?,
        })
    }

    pub fn has_endemic(&self) -> bool {
        self.equilibria
            .iter()
            .any(|e| e.equilibrium.kind == equilibria::EquilibriumKind::Endemic)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into());
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(s, "control c = {}", self.control);
        let _ = writeln!(s, "mosquito viability M = {}", self.mosquito_viability);
        let _ = writeln!(s, "offspring ratio = {}", opt(self.offspring_ratio));
        let _ = writeln!(s, "collapse bound c = {}", self.collapse_bound);
        if self.mosquito_collapse {
            let _ = writeln!(s, "MOSQUITO COLLAPSE: only the trivial equilibrium exists");
        }
        let _ = writeln!(s, "R0 = {}", opt(self.r0_closed_form));
        let _ = writeln!(s, "R0 (spectral radius) = {}", opt(self.r0_spectral));
        if let Some(f) = &self.r0_factors {
            let _ = writeln!(s, "R_hm = {}", f.human_to_mosquito);
            let _ = writeln!(s, "R_mh = {}", f.mosquito_to_human);
        }
        let _ = writeln!(s, "equilibria:");
        for e in &self.equilibria {
            let eq = &e.equilibrium;
            let _ = writeln!(s, "  {}:", e.label);
            let names = crate::model::State7::NAMES;
            let comps: Vec<String> = names
                .iter()
                .zip(eq.state.to_array())
                .map(|(n, v)| format!("{n}={v}"))
                .collect();
            let _ = writeln!(s, "    state: {}", comps.join(" "));
            let _ = writeln!(s, "    residual = {}", eq.residual_norm);
            let _ = writeln!(s, "    refined = {}", eq.refined);
            let _ = writeln!(s, "    stability: {}", e.stability.classification);
            let _ = writeln!(s, "    spectral abscissa = {}", e.stability.spectral_abscissa);
        }
        if let Some(note) = &self.endemic_note {
            let _ = writeln!(s, "no endemic equilibrium: {note}");
        }
        match &self.threshold {
            ControlOutcome::Threshold(t) => {
                let _ = writeln!(s, "threshold: c* = {:.6}", t.c_star);
            }
            ControlOutcome::NoControlNeeded { .. } => {
                let _ = writeln!(s, "threshold: no control needed");
            }
            ControlOutcome::Unattainable { .. } => {
                let _ = writeln!(s, "threshold: unattainable before mosquito collapse");
            }
        }
        s
    }
}
