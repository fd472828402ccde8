//! Scenario files: flat `key = value` lines, `#` comments.
//!
//! Keys use the model's symbol names (`N_h`, `beta_mh`, `mu_A`, ...). Values
//! are numbers or small arithmetic expressions such as `1/(71*365)`. A file
//! may start from a built-in scenario with `base = capeverde2009` and override
//! individual keys.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use crate::integrator::SolverConfig;
use crate::model::{omega_violation, ControlLevel, ModelParams, ParamSet, State7};

pub const BUILTIN_CAPE_VERDE: &str = "capeverde2009";

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub message: String,
}

impl ScenarioError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ScenarioError {}

/// A complete run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: ModelParams,
    pub control: ControlLevel,
    pub initial: State7,
    pub solver: SolverConfig,
    /// When set, S_h0 = N_h − E_h0 − I_h0 − R_h0.
    pub human_total_rule: bool,
}

const PARAM_KEYS: [&str; 15] = [
    "N_h", "B", "beta_mh", "beta_hm", "mu_h", "eta_h", "mu_m", "mu_b", "mu_A", "eta_A", "eta_m", "nu_h", "m", "k", "K",
];
const INITIAL_KEYS: [&str; 8] = ["S_h0", "E_h0", "I_h0", "R_h0", "A_m0", "S_m0", "E_m0", "I_m0"];
const SOLVER_KEYS: [&str; 7] = ["t0", "t_end", "rtol", "atol", "h_init", "h_max", "output_step"];

impl Scenario {
    pub fn builtin(name: &str) -> Result<Self, ScenarioError> {
        match name {
            BUILTIN_CAPE_VERDE => Ok(Self::cape_verde_2009()),
            other => Err(ScenarioError::general(format!(
                "unknown built-in scenario '{other}' (available: {BUILTIN_CAPE_VERDE})"
            ))),
        }
    }

    /// Cape Verde 2009: no control, E_h0 = 216, I_h0 = 434, R_h0 = 0,
    /// A_m0 = k·N_h, S_m0 = m·N_h.
    pub fn cape_verde_2009() -> Self {
        let params = ModelParams::cape_verde();
        let n = params.human_population;
        Self {
            name: BUILTIN_CAPE_VERDE.into(),
            params,
            control: ControlLevel::NONE,
            initial: State7 {
                s_h: n - 216.0 - 434.0,
                e_h: 216.0,
                i_h: 434.0,
                a_m: params.larvae_per_human * n,
                s_m: params.mosquitoes_per_human * n,
                e_m: 0.0,
                i_m: 0.0,
            },
            solver: SolverConfig::default(),
            human_total_rule: true,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::general(format!("cannot read {}: {e}", path.display())))?;
        let mut s = Self::parse(&text)?;
        if s.name.is_empty() {
            s.name = path
                .file_stem()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut values: HashMap<&str, (usize, f64)> = HashMap::new();
        let mut base: Option<Scenario> = None;
        let mut name = String::new();
        let mut rule: Option<(usize, bool)> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ScenarioError::at(line_no, "expected 'key = value'"))?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(ScenarioError::at(line_no, format!("missing value for '{key}'")));
            }
            match key {
                "base" => {
                    if base.is_some() {
                        return Err(ScenarioError::at(line_no, "duplicate key 'base'"));
                    }
                    base = Some(Scenario::builtin(value).map_err(|e| ScenarioError::at(line_no, e.message))?);
                }
                "name" => name = value.to_string(),
                "human_total_rule" => {
                    let flag = match value {
                        "true" | "on" | "1" => true,
                        "false" | "off" | "0" => false,
                        _ => {
                            return Err(ScenarioError::at(
                                line_no,
                                format!("human_total_rule must be true or false, got '{value}'"),
                            ))
                        }
                    };
                    rule = Some((line_no, flag));
                }
                _ => {
                    let known = PARAM_KEYS
                        .iter()
                        .chain(&INITIAL_KEYS)
                        .chain(&SOLVER_KEYS)
                        .chain(&["c"])
                        .find(|k| **k == key)
                        .ok_or_else(|| ScenarioError::at(line_no, format!("unknown key '{key}'")))?;
                    let v = eval_expr(value).map_err(|e| ScenarioError::at(line_no, format!("{key}: {e}")))?;
                    if values.insert(known, (line_no, v)).is_some() {
                        return Err(ScenarioError::at(line_no, format!("duplicate key '{key}'")));
                    }
                }
            }
        }

        let get = |k: &str| values.get(k).map(|(_, v)| *v);
        let line_of = |k: &str| values.get(k).map(|(l, _)| *l);
        let require = |k: &str, fallback: Option<f64>| -> Result<f64, ScenarioError> {
            get(k)
                .or(fallback)
                .ok_or_else(|| ScenarioError::general(format!("missing required key '{k}'")))
        };

        let defaults = base.as_ref().map(|b| *b.params.values());
        let d = |f: fn(&ParamSet) -> f64| defaults.as_ref().map(f);
        let n_h = require("N_h", d(|p| p.human_population))?;
        let k = require("k", d(|p| p.larvae_per_human))?;
        let set = ParamSet {
            human_population: n_h,
            biting_rate: require("B", d(|p| p.biting_rate))?,
            p_mosquito_to_human: require("beta_mh", d(|p| p.p_mosquito_to_human))?,
            p_human_to_mosquito: require("beta_hm", d(|p| p.p_human_to_mosquito))?,
            human_mortality: require("mu_h", d(|p| p.human_mortality))?,
            human_recovery: require("eta_h", d(|p| p.human_recovery))?,
            mosquito_mortality: require("mu_m", d(|p| p.mosquito_mortality))?,
            egg_deposition: require("mu_b", d(|p| p.egg_deposition))?,
            larval_mortality: require("mu_A", d(|p| p.larval_mortality))?,
            maturation: require("eta_A", d(|p| p.maturation))?,
            extrinsic_incubation: require("eta_m", d(|p| p.extrinsic_incubation))?,
            intrinsic_incubation: require("nu_h", d(|p| p.intrinsic_incubation))?,
            mosquitoes_per_human: require("m", d(|p| p.mosquitoes_per_human))?,
            larvae_per_human: k,
            // K follows k·N_h unless given explicitly
            larval_capacity: get("K").unwrap_or(k * n_h),
        };
        let params = ModelParams::new(set).map_err(|e| {
            let line = match &e {
                crate::Error::InvalidParameter { name, .. } => line_of(name),
                _ => None,
            };
            ScenarioError {
                line,
                message: e.to_string(),
            }
        })?;

        let control =
            ControlLevel::new(get("c").or(base.as_ref().map(|b| b.control.value())).unwrap_or(0.0)).map_err(|e| {
                ScenarioError {
                    line: line_of("c"),
                    message: e.to_string(),
                }
            })?;

        let human_total_rule = rule.map(|(_, f)| f).unwrap_or(true);
        let base_initial = base.as_ref().map(|b| b.initial);
        let e_h = require("E_h0", base_initial.map(|x| x.e_h))?;
        let i_h = require("I_h0", base_initial.map(|x| x.i_h))?;
        let r_h = get("R_h0").unwrap_or(0.0);
        let s_h = if human_total_rule {
            if let Some(line) = line_of("S_h0") {
                return Err(ScenarioError::at(
                    line,
                    "S_h0 is derived from N_h - E_h0 - I_h0 - R_h0; set human_total_rule = false to give it explicitly",
                ));
            }
            n_h - e_h - i_h - r_h
        } else {
            if line_of("R_h0").is_some() {
                return Err(ScenarioError::at(
                    line_of("R_h0").unwrap(),
                    "R_h0 is implied by N_h - S_h0 - E_h0 - I_h0 when human_total_rule = false",
                ));
            }
            require("S_h0", None)?
        };
        let initial = State7 {
            s_h,
            e_h,
            i_h,
            a_m: get("A_m0").unwrap_or(k * n_h),
            s_m: get("S_m0").unwrap_or(params.mosquitoes_per_human * n_h),
            e_m: get("E_m0").unwrap_or(0.0),
            i_m: get("I_m0").unwrap_or(0.0),
        };
        if let Some(bound) = omega_violation(&params, &initial) {
            return Err(ScenarioError::general(format!(
                "initial condition outside the biological region: {bound}"
            )));
        }

        let sd = base.as_ref().map(|b| b.solver).unwrap_or_default();
        let solver = SolverConfig {
            t0: get("t0").unwrap_or(sd.t0),
            t_end: get("t_end").unwrap_or(sd.t_end),
            rtol: get("rtol").unwrap_or(sd.rtol),
            atol: get("atol").unwrap_or(sd.atol),
            h_init: get("h_init").unwrap_or(sd.h_init),
            h_max: get("h_max").unwrap_or(sd.h_max),
            output_step: get("output_step").unwrap_or(sd.output_step),
        };
        solver.validate().map_err(|e| ScenarioError::general(e.to_string()))?;

        if name.is_empty() {
            if let Some(b) = &base {
                name = b.name.clone();
            }
        }
        Ok(Scenario {
            name,
            params,
            control,
            initial,
            solver,
            human_total_rule,
        })
    }

    /// Re-check Ω after command-line overrides.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if let Some(bound) = omega_violation(&self.params, &self.initial) {
            return Err(ScenarioError::general(format!(
                "initial condition outside the biological region: {bound}"
            )));
        }
        self.solver
            .validate()
            .map_err(|e| ScenarioError::general(e.to_string()))
    }

    /// Scenario file text that parses back to `self`.
    pub fn render(&self) -> String {
        let p = self.params.values();
        let x = &self.initial;
        let s = &self.solver;
        let mut out = String::new();
        let mut kv = |k: &str, v: f64| out.push_str(&format!("{k} = {v}\n"));
        for (k, v) in PARAM_KEYS.iter().zip([
            p.human_population,
            p.biting_rate,
            p.p_mosquito_to_human,
            p.p_human_to_mosquito,
            p.human_mortality,
            p.human_recovery,
            p.mosquito_mortality,
            p.egg_deposition,
            p.larval_mortality,
            p.maturation,
            p.extrinsic_incubation,
            p.intrinsic_incubation,
            p.mosquitoes_per_human,
            p.larvae_per_human,
            p.larval_capacity,
        ]) {
            kv(k, v);
        }
        kv("c", self.control.value());
        let r_h = p.human_population - x.s_h - x.e_h - x.i_h;
        if self.human_total_rule {
            kv("R_h0", r_h);
        } else {
            kv("S_h0", x.s_h);
        }
        kv("E_h0", x.e_h);
        kv("I_h0", x.i_h);
        kv("A_m0", x.a_m);
        kv("S_m0", x.s_m);
        kv("E_m0", x.e_m);
        kv("I_m0", x.i_m);
        for (k, v) in SOLVER_KEYS
            .iter()
            .zip([s.t0, s.t_end, s.rtol, s.atol, s.h_init, s.h_max, s.output_step])
        {
            kv(k, v);
        }
        let mut head = String::new();
        if !self.name.is_empty() {
            head.push_str(&format!("name = {}\n", self.name));
        }
        head.push_str(&format!("human_total_rule = {}\n", self.human_total_rule));
        head + &out
    }
}

/// Evaluates `+ - * /`, unary minus, parentheses and decimal literals
/// (including exponents).
pub fn eval_expr(src: &str) -> Result<f64, String> {
    let mut parser = ExprParser {
        chars: src.as_bytes(),
        pos: 0,
    };
    let v = parser.sum()?;
    parser.skip_ws();
    if parser.pos != parser.chars.len() {
        return Err(format!("unexpected '{}' in '{src}'", &src[parser.pos..]));
    }
    if !v.is_finite() {
        return Err(format!("'{src}' is not finite"));
    }
    Ok(v)
}

struct ExprParser<'a> {
    chars: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut acc = self.product()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if op == b'+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == b'*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err("missing ')'".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(_) => self.number(),
            None => Err("unexpected end of expression".into()),
        }
    }

    fn number(&mut self) -> Result<f64, String> {
        let start = self.pos;
        while self.pos < self.chars.len() {
            let ch = self.chars[self.pos];
            let exp_sign =
                (ch == b'-' || ch == b'+') && self.pos > start && matches!(self.chars[self.pos - 1], b'e' | b'E');
            if ch.is_ascii_digit() || ch == b'.' || ch == b'e' || ch == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.chars[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map_err(|_| format!("invalid number '{text}'"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions() {
        assert_eq!(eval_expr("0.375").unwrap(), 0.375);
        assert_eq!(eval_expr("1/(71*365)").unwrap(), 1.0 / (71.0 * 365.0));
        assert_eq!(eval_expr(" -2 + 3*4 ").unwrap(), 10.0);
        assert_eq!(eval_expr("1e-3*2").unwrap(), 2e-3);
        assert_eq!(eval_expr("2.5E+2").unwrap(), 250.0);
        assert!(eval_expr("1/0").is_err());
        assert!(eval_expr("abc").is_err());
        assert!(eval_expr("(1+2").is_err());
        assert!(eval_expr("1 2").is_err());
    }

    #[test]
    fn builtin_values() {
        let s = Scenario::builtin("capeverde2009").unwrap();
        assert_eq!(s.initial.s_h, 479_350.0);
        assert_eq!(s.initial.a_m, 1_440_000.0);
        assert_eq!(s.initial.s_m, 2_880_000.0);
        assert_eq!(s.params.larval_capacity, 1_440_000.0);
        assert!(Scenario::builtin("nowhere").is_err());
    }

    #[test]
    fn full_file_matches_builtin() {
        let text = "\
# Cape Verde 2009
N_h = 480000
B = 1
beta_mh = 0.375
beta_hm = 0.375
mu_h = 1/(71*365)
eta_h = 1/3
mu_m = 1/11
mu_b = 6
mu_A = 1/4
eta_A = 0.08
eta_m = 1/11
nu_h = 1/4
m = 6
k = 3
E_h0 = 216
I_h0 = 434   # S_h0 follows from the human total
R_h0 = 0
";
        let s = Scenario::parse(text).unwrap();
        let b = Scenario::cape_verde_2009();
        assert_eq!(s.params, b.params);
        assert_eq!(s.initial, b.initial);
        assert_eq!(s.solver, b.solver);
        assert_eq!(s.control, b.control);
    }

    #[test]
    fn render_round_trip() {
        let mut b = Scenario::cape_verde_2009();
        b.control = ControlLevel::new(0.2).unwrap();
        let again = Scenario::parse(&b.render()).unwrap();
        assert_eq!(again, b);
    }

    #[test]
    fn base_with_overrides() {
        let s = Scenario::parse("base = capeverde2009\nc = 0.2\nt_end = 50\n").unwrap();
        assert_eq!(s.control.value(), 0.2);
        assert_eq!(s.solver.t_end, 50.0);
        assert_eq!(s.name, "capeverde2009");
    }

    #[test]
    fn line_numbered_errors() {
        let err = Scenario::parse("base = capeverde2009\n\nbogus = 3\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        let err = Scenario::parse("base = capeverde2009\nbeta_mh = 2\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert!(err.message.contains("beta_mh"));
        let err = Scenario::parse("base = capeverde2009\nc = 1\nc = 2\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        let err = Scenario::parse("base = capeverde2009\nno equals here\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        let err = Scenario::parse("base = capeverde2009\nS_h0 = 1000\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        let err = Scenario::parse("N_h = 10\n").unwrap_err();
        assert!(err.message.contains("missing required key"));
    }

    #[test]
    fn omega_violation_names_bound() {
        let err = Scenario::parse("base = capeverde2009\nA_m0 = 2e6\n").unwrap_err();
        assert!(err.message.contains("A_m"), "{err}");
        let err = Scenario::parse("base = capeverde2009\nS_m0 = 1e7\n").unwrap_err();
        assert!(err.message.contains("m*N_h"), "{err}");
        let err = Scenario::parse("base = capeverde2009\nE_h0 = 600000\n").unwrap_err();
        assert!(err.message.contains("S_h"), "{err}");
    }
}
