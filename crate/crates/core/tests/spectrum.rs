use femtonet::rng::{stream, Purpose};
use femtonet::spectrum::{
    access_probability, decide_access, fuse_beliefs, fuse_beliefs_batch, sense, PrimaryChannel, SensorProfile,
};
use proptest::prelude::*;

/// Bayes by enumerating both hypotheses with explicit per-report likelihoods.
fn posterior_idle(eta: f64, obs: &[bool], eps: &[f64], del: &[f64]) -> f64 {
    let mut idle = 1.0 - eta;
    let mut busy = eta;
    for i in 0..obs.len() {
        // a report of "busy" is a false alarm under idle, a detection under busy
        idle *= if obs[i] { eps[i] } else { 1.0 - eps[i] };
        busy *= if obs[i] { 1.0 - del[i] } else { del[i] };
    }
    idle / (idle + busy)
}

#[test]
fn iterative_fusion_matches_bayes_for_every_sequence() {
    let eps = [0.3, 0.1, 0.25, 0.4, 0.05, 0.2];
    let del = [0.3, 0.2, 0.15, 0.1, 0.35, 0.3];
    let profiles: Vec<SensorProfile> = eps.iter().zip(&del).map(|(&e, &d)| SensorProfile::new(e, d).unwrap()).collect();
    for eta in [0.1, 0.5, 0.8] {
        for mask in 0..64u32 {
            let obs: Vec<bool> = (0..6).map(|i| mask >> i & 1 == 1).collect();
            let oracle = posterior_idle(eta, &obs, &eps, &del);
            let it = fuse_beliefs(eta, &obs, &profiles).unwrap();
            let batch = fuse_beliefs_batch(eta, &obs, &profiles).unwrap();
            assert!((it - oracle).abs() <= 1e-12, "{mask:06b}: {it} vs {oracle}");
            assert!((batch - oracle).abs() <= 1e-12);
        }
    }
}

#[test]
fn single_idle_report_hand_value() {
    let p = SensorProfile::new(0.3, 0.3).unwrap();
    let pa = fuse_beliefs(0.5, &[false], &[p]).unwrap();
    assert!((pa - 0.7).abs() < 1e-12);
    assert!((access_probability(pa, 0.2) - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn collision_rate_stays_under_tolerance() {
    let chan = PrimaryChannel::new(0.4, 0.3).unwrap();
    let profile = SensorProfile::new(0.3, 0.3).unwrap();
    let gamma = 0.2;
    let slots = 40_000;
    let mut rng = stream(1, Purpose::ChannelState, &[0]);
    let mut sensing = stream(1, Purpose::Sensing, &[0]);
    let mut access = stream(1, Purpose::Access, &[0]);
    let mut busy = chan.initial(&mut rng);
    let eta = chan.utilization();
    let mut collisions = 0usize;
    for _ in 0..slots {
        busy = chan.step(busy, &mut rng);
        let obs = sense(busy, &profile, &mut sensing);
        let pa = fuse_beliefs(eta, &[obs], &[profile]).unwrap();
        let pd = access_probability(pa, gamma);
        let d = decide_access(&[pa], &[pd], &mut access);
        if busy {
            collisions += d.channels.len();
        }
    }
    let rate = collisions as f64 / slots as f64;
    let sigma = (gamma * (1.0 - gamma) / slots as f64).sqrt();
    assert!(rate <= gamma + 3.0 * sigma, "rate {rate}");
}

proptest! {
    #[test]
    fn fusion_is_order_independent(eta in 0.01f64..0.99, mask in 0u32..32, shift in 0usize..5) {
        let p = SensorProfile::new(0.3, 0.2).unwrap();
        let obs: Vec<bool> = (0..5).map(|i| mask >> i & 1 == 1).collect();
        let mut rotated = obs.clone();
        rotated.rotate_left(shift);
        let a = fuse_beliefs(eta, &obs, &[p; 5]).unwrap();
        let b = fuse_beliefs(eta, &rotated, &[p; 5]).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn an_idle_report_raises_the_posterior(eta in 0.01f64..0.99, mask in 0u32..16) {
        let p = SensorProfile::new(0.3, 0.3).unwrap();
        let mut obs: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
        let before = fuse_beliefs(eta, &obs, &[p; 4]).unwrap();
        obs.push(false);
        let after = fuse_beliefs(eta, &obs, &[p; 5]).unwrap();
        prop_assert!(after >= before);
    }

    #[test]
    fn access_keeps_expected_collision_within_gamma(pa in 0.0f64..1.0, gamma in 0.0f64..1.0) {
        let pd = access_probability(pa, gamma);
        prop_assert!((0.0..=1.0).contains(&pd));
        prop_assert!(pd * (1.0 - pa) <= gamma + 1e-12);
    }
}
