//! R0 route equivalence, the factor identity, NGM structure, and the control
//! threshold's bracketing guarantees.

mod common;

use common::{draw_viable, rel_diff, rng};
use dengue_core::model::{ControlLevel, ModelParams, ParamSet};
use dengue_core::reproduction::{build_ngm, r0_closed_form, r0_factors, r0_spectral, R0Route};
use dengue_core::threshold::{min_control, min_control_with, r0_profile, uniform_grid, ControlOutcome};
use proptest::prelude::*;

fn cape_verde() -> ModelParams {
    ModelParams::cape_verde()
}

fn level(c: f64) -> ControlLevel {
    ControlLevel::new(c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn spectral_and_closed_form_agree(seed in any::<u64>()) {
        let (p, c) = draw_viable(&mut rng(seed));
        let a = r0_spectral(&p, c).unwrap();
        let b = r0_closed_form(&p, c).unwrap();
        prop_assert!(rel_diff(a, b) < 1e-10, "spectral {a} closed {b}");
    }

    #[test]
    fn ngm_entries_nonnegative(seed in any::<u64>()) {
        let (p, c) = draw_viable(&mut rng(seed));
        let ngm = build_ngm(&p, c).unwrap();
        for row in ngm.ngm.iter().chain(ngm.transitions_inverse.iter()) {
            prop_assert!(row.iter().all(|&v| v >= 0.0), "{row:?}");
        }
    }

    #[test]
    fn factor_product_is_r0_squared(seed in any::<u64>()) {
        let (p, c) = draw_viable(&mut rng(seed));
        let f = r0_factors(&p, c).unwrap();
        let r0 = r0_closed_form(&p, c).unwrap();
        prop_assert!(rel_diff(f.human_to_mosquito * f.mosquito_to_human, r0 * r0) < 1e-12);
    }

    #[test]
    fn doubling_biting_rate_quadruples_r0_squared(seed in any::<u64>()) {
        let (p, c) = draw_viable(&mut rng(seed));
        let mut v = *p.values();
        v.biting_rate *= 2.0;
        let q = ModelParams::new(v).unwrap();
        let (a, b) = (r0_closed_form(&p, c).unwrap(), r0_closed_form(&q, c).unwrap());
        prop_assert!(rel_diff(b * b, 4.0 * a * a) < 1e-12);
    }

    #[test]
    fn threshold_brackets_a_sign_change(seed in any::<u64>()) {
        let (p, _) = draw_viable(&mut rng(seed));
        if let ControlOutcome::Threshold(t) = min_control(&p, 1e-6).unwrap() {
            let (lo, hi) = t.bracket;
            prop_assert!(lo <= t.c_star && t.c_star <= hi);
            prop_assert!(hi - lo <= 1e-6);
            prop_assert!(r0_closed_form(&p, level(lo)).unwrap() >= 1.0);
            prop_assert!(r0_closed_form(&p, level(hi)).unwrap() < 1.0);
            prop_assert!((t.r0_at_c_star - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn r0_strictly_decreasing_on_unit_interval() {
    let grid: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
    let profile = r0_profile(&cape_verde(), &grid).unwrap();
    let values: Vec<f64> = profile.iter().map(|pt| pt.r0.unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    let flips = values.windows(2).filter(|w| (w[0] > 1.0) != (w[1] > 1.0)).count();
    assert_eq!(flips, 1);
}

#[test]
fn mosquito_to_human_factor_decreases_with_control() {
    let p = cape_verde();
    let values: Vec<f64> = (0..100)
        .map(|i| r0_factors(&p, level(i as f64 * 0.01)).unwrap().mosquito_to_human)
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    let f = r0_factors(&p, ControlLevel::NONE).unwrap();
    let mu_m = p.mosquito_mortality;
    let eta_m = p.extrinsic_incubation;
    let expected = p.biting_rate * p.p_mosquito_to_human * eta_m / (mu_m * (eta_m + mu_m));
    assert!(rel_diff(f.mosquito_to_human, expected) < 1e-14);
}

#[test]
fn broken_transmission_cycles() {
    let p = ModelParams::new(ParamSet {
        p_mosquito_to_human: 0.0,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(r0_spectral(&p, ControlLevel::NONE).unwrap(), 0.0);
    assert_eq!(r0_closed_form(&p, ControlLevel::NONE).unwrap(), 0.0);
    assert!(matches!(
        min_control(&p, 1e-6).unwrap(),
        ControlOutcome::NoControlNeeded { r0_uncontrolled: Some(r) } if r == 0.0
    ));

    let p = ModelParams::new(ParamSet {
        p_human_to_mosquito: 0.0,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(r0_factors(&p, ControlLevel::NONE).unwrap().human_to_mosquito, 0.0);
}

#[test]
fn threshold_independent_of_route() {
    let p = cape_verde();
    let get = |route| match min_control_with(&p, 1e-8, route).unwrap() {
        ControlOutcome::Threshold(t) => t.c_star,
        other => panic!("unexpected {other:?}"),
    };
    let (a, b) = (get(R0Route::ClosedForm), get(R0Route::Spectral));
    assert!((a - b).abs() <= 1e-8);
}

#[test]
fn threshold_consistent_with_r0() {
    let p = cape_verde();
    let tol = 1e-6;
    let ControlOutcome::Threshold(t) = min_control(&p, tol).unwrap() else {
        panic!("expected a threshold")
    };
    assert_eq!(format!("{:.6}", t.c_star), "0.156961");
    assert!(r0_closed_form(&p, level(t.c_star + 10.0 * tol)).unwrap() < 1.0);
    assert!(r0_closed_form(&p, level(t.c_star - 10.0 * tol)).unwrap() > 1.0);
    assert!((r0_closed_form(&p, level(t.c_star)).unwrap() - 1.0).abs() < 1e-3);
    assert!((r0_closed_form(&p, ControlLevel::NONE).unwrap() - 1.0 - 1.396).abs() < 1e-3);
    assert!(r0_closed_form(&p, level(0.3)).unwrap() < 1.0);
}

#[test]
fn profile_flags_collapse_beyond_bound() {
    let p = cape_verde();
    let grid = uniform_grid(1.3, 1.45, 0.01).unwrap();
    let profile = r0_profile(&p, &grid).unwrap();
    for pt in profile {
        assert_eq!(pt.collapsed(), pt.c > 1.3636, "c = {}", pt.c);
    }
    let zero = r0_profile(&p, &[0.0]).unwrap();
    assert!((zero[0].r0.unwrap() - 2.396).abs() < 1e-3);
}
