//! End-to-end use of the public API.

use nohair::entangled::{der_bound_check, factorization_residual, SchmidtInput};
use nohair::exec::{map_indexed, Schedule};
use nohair::tradeoff::{compute_dmax, compute_epsilon, pivot_radius, verify_tradeoff, PivotOptions, Verdict, VerifyConfig};
use nohair::{
    diamond_distance, ChannelFamily, ChannelFamilySpec, DiamondOptions, HorizonModel,
    SeededRng,
};
use nohair::channel::embed_family_as_horizon;

#[test]
fn random_model_satisfies_every_check() {
    for (k, bh) in [2, 4].into_iter().enumerate() {
        let model = HorizonModel::random(2, bh, &mut SeededRng::new(900, k as u64)).unwrap();
        let r = verify_tradeoff(&model, &VerifyConfig::default(), &SeededRng::new(901, k as u64)).unwrap();
        assert!(r.epsilon_certified);
        assert!(r.dmax_lower <= r.bound_value + 1e-7);
        assert!(r.epsilon_upper >= 1.0 - r.fidelity_floor - 1e-7);
        assert!(r.triangle_holds);
        assert_eq!(r.verdict, Verdict::Pass);
    }
}

#[test]
fn lifted_dephasing_matches_closed_forms() {
    let p = 0.2;
    let model = embed_family_as_horizon(&ChannelFamilySpec::new(ChannelFamily::Dephasing, 2, p).unwrap()).unwrap();
    let eps = compute_epsilon(&model, 1e-7, &DiamondOptions::default()).unwrap();
    assert!(eps.certified);
    assert!((eps.upper - p / 2.0).abs() <= 1e-6, "{eps:?}");
    let d = compute_dmax(&model, 8, &SeededRng::new(902, 0)).unwrap();
    assert!((d.dmax_lower - (2.0 * p - p * p).sqrt()).abs() <= 1e-8);
}

#[test]
fn swap_model_saturates_distinguishability() {
    let model = HorizonModel::swap().unwrap();
    let pivot = pivot_radius(&model, &PivotOptions::default(), &SeededRng::new(903, 0)).unwrap();
    assert!(pivot.converged);
    assert!((pivot.radius - 0.5).abs() <= 1e-6);
    let bell = SchmidtInput::maximally_entangled(2).unwrap();
    assert!((factorization_residual(&model, &bell, &pivot.pivot).unwrap() - 0.75).abs() <= 1e-6);
}

#[test]
fn ideal_model_factorizes_and_obeys_reference_bound() {
    let model = HorizonModel::ideal(2, 4, &mut SeededRng::new(904, 0)).unwrap();
    let pivot = pivot_radius(&model, &PivotOptions::default(), &SeededRng::new(904, 1)).unwrap();
    let mut rng = SeededRng::new(904, 2);
    for _ in 0..5 {
        let a = SchmidtInput::random(2, &mut rng).unwrap();
        let b = SchmidtInput::random(2, &mut rng).unwrap();
        assert!(factorization_residual(&model, &a, &pivot.pivot).unwrap() <= 1e-8);
        let c = der_bound_check(&model, &a, &b, 0.0).unwrap();
        assert!(c.holds && c.new_distinguishability().abs() <= 1e-8);
    }
}

#[test]
fn schedules_agree() {
    let run = |schedule| {
        map_indexed(4, schedule, |k| {
            let model = HorizonModel::random(2, 2, &mut SeededRng::new(905, k as u64)).unwrap();
            let mut opts = DiamondOptions::default();
            opts.variational.rng = SeededRng::new(906, k as u64);
            let eps = diamond_distance(&model.interior_channel(), &model.ideal_channel(), 1e-6, &opts).unwrap();
            (eps.lower.to_bits(), eps.upper.to_bits())
        })
    };
    assert_eq!(run(Schedule::Sequential), run(Schedule::Parallel));
}
