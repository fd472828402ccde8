//! Shared helpers for the integration tests: seeded parameter draws and
//! random admissible states.

#![allow(dead_code)]

use dengue_core::model::{mosquito_viability, ControlLevel, ModelParams, ParamSet, State7};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cape Verde values with every rate scaled by a log-uniform factor in
/// [1/3, 3], probabilities drawn from [0.05, 1], and K = k·N_h.
pub fn draw_params(rng: &mut impl Rng) -> ModelParams {
    let base = ParamSet::default();
    let mut f = |v: f64| v * 3f64.powf(rng.random_range(-1.0..1.0));
    let mut v = ParamSet {
        human_population: f(base.human_population),
        biting_rate: f(base.biting_rate),
        p_mosquito_to_human: 0.0,
        p_human_to_mosquito: 0.0,
        human_mortality: f(base.human_mortality),
        human_recovery: f(base.human_recovery),
        mosquito_mortality: f(base.mosquito_mortality),
        egg_deposition: f(base.egg_deposition),
        larval_mortality: f(base.larval_mortality),
        maturation: f(base.maturation),
        extrinsic_incubation: f(base.extrinsic_incubation),
        intrinsic_incubation: f(base.intrinsic_incubation),
        mosquitoes_per_human: f(base.mosquitoes_per_human),
        larvae_per_human: f(base.larvae_per_human),
        larval_capacity: 0.0,
    };
    v.p_mosquito_to_human = rng.random_range(0.05..=1.0);
    v.p_human_to_mosquito = rng.random_range(0.05..=1.0);
    v.larval_capacity = v.larvae_per_human * v.human_population;
    // Keep the adult bound of Ω above the largest adult population the
    // larval cap can feed, η_A·k·N_h/μ_m, so that Ω stays invariant.
    let adult_ceiling = v.maturation * v.larvae_per_human / v.mosquito_mortality;
    if v.mosquitoes_per_human < adult_ceiling {
        v.mosquitoes_per_human = adult_ceiling * rng.random_range(1.0..3.0);
    }
    ModelParams::new(v).expect("drawn parameters are valid")
}

/// A parameter draw and control level with 𝓜 > 0.
pub fn draw_viable(rng: &mut impl Rng) -> (ModelParams, ControlLevel) {
    loop {
        let p = draw_params(rng);
        let c = ControlLevel::new(rng.random_range(0.0..0.5)).unwrap();
        if mosquito_viability(&p, c) > 0.0 {
            return (p, c);
        }
    }
}

/// Uniform random point of Ω: each population block's total is drawn below
/// its bound and split among the block's classes.
pub fn draw_omega_state(p: &ModelParams, rng: &mut impl Rng) -> State7 {
    let n = p.human_population;
    let mut split3 = |total: f64| {
        let w: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
        let s: f64 = w.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        w.map(|x| total * x / s)
    };
    let h = split3(n * 0.999);
    let m = split3(p.mosquitoes_per_human * n * 0.999);
    State7 {
        s_h: h[0],
        e_h: h[1],
        i_h: h[2],
        a_m: p.larvae_per_human * n * rng.random_range(0.0..1.0),
        s_m: m[0],
        e_m: m[1],
        i_m: m[2],
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}
