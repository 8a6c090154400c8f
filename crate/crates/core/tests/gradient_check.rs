mod common;

use spikeseq::snn::GradientFlow;

fn worst_over(flow: GradientFlow, zero_reset: bool, membrane: bool, wanted: usize) -> (usize, f64) {
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut nonzero = 0;
    let mut seed = 0;
    while checked < wanted {
        if let Some((err, active)) = common::gradient_check(seed, flow, zero_reset, membrane) {
            checked += 1;
            worst = worst.max(err);
            nonzero += active;
        }
        seed += 1;
        assert!(seed < wanted as u64 * 10, "too many kink-adjacent instances");
    }
    assert!(nonzero >= wanted * 3, "only {nonzero} non-zero gradient entries checked");
    (checked, worst)
}

#[test]
fn through_time_matches_finite_differences() {
    let (_, worst) = worst_over(GradientFlow::ThroughTime, false, false, 40);
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn isolated_matches_frozen_carry_finite_differences() {
    let (_, worst) = worst_over(GradientFlow::Isolated, false, false, 40);
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn zero_reset_and_membrane_readout() {
    for flow in [GradientFlow::Isolated, GradientFlow::ThroughTime] {
        for (zero, membrane) in [(true, false), (false, true), (true, true)] {
            let (_, worst) = worst_over(flow, zero, membrane, 15);
            assert!(worst < 1e-4, "{flow:?} zero={zero} membrane={membrane}: {worst}");
        }
    }
}

#[test]
fn isolated_differs_from_full_bptt_when_carry_matters() {
    // The two oracles must not coincide, otherwise the checks above prove little.
    let net = common::NaiveNet {
        inputs: 3,
        hidden: 4,
        classes: 2,
        decay: 0.9,
        threshold: 1.0,
        width: 1.0,
        steps: 4,
        zero_reset: false,
        membrane_readout: false,
    };
    let x = [0.4, 0.9, 0.2];
    let differs = (0..20).any(|seed| {
        let mut r = common::rng(seed);
        let theta = common::random_theta(&net, &mut r, 0.8);
        let reference = common::naive_loss(&net, &theta, &x, 1, None);
        let full = common::finite_difference(&net, &theta, &x, 1, None, 1e-4);
        let frozen = common::finite_difference(&net, &theta, &x, 1, Some(&reference), 1e-4);
        full.iter().zip(&frozen).any(|(a, b)| (a - b).abs() > 1e-6)
    });
    assert!(differs);
}
