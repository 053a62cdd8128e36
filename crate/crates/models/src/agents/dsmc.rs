//! Particle simulation of the binary exchange dynamics: per step of length
//! `dt`, `Sround(N dt / (2 eps))` disjoint pairs are drawn uniformly and
//! updated through the exchange rule, so each agent interacts `dt / eps`
//! times per unit time on average.

use rand::Rng;

use crate::agents::{
    binary_interact, AgentEnsemble, Interaction, InteractionRule, InteractionStats,
};
use crate::error::{config, Result};
use crate::gas::dsmc::sround;

/// One interaction sweep of length `dt`, in place. The agent count never
/// changes; rejected updates leave both agents untouched and are counted.
pub fn dsmc_step(
    rule: &InteractionRule,
    ens: &mut AgentEnsemble,
    dt: f64,
    z: f64,
    rng: &mut impl Rng,
    stats: &mut InteractionStats,
) -> Result<()> {
    let n = ens.len();
    if n < 2 || n % 2 != 0 {
        return Err(config(
            "exchange step needs an even number (>= 2) of agents",
        ));
    }
    let eps = ens.epsilon;
    if !(dt >= 0.0) || dt > 2.0 * eps * (1.0 + 1e-12) {
        return Err(config(format!(
            "step length {dt} outside [0, 2 eps] with eps = {eps}"
        )));
    }
    let n_c = (sround(n as f64 * dt / (2.0 * eps), rng) as usize).min(n / 2);
    if n_c == 0 {
        ens.time += dt;
        return Ok(());
    }
    // Partial Fisher-Yates: the first 2*n_c slots become a uniform draw of
    // disjoint indices.
    let mut idx: Vec<usize> = (0..n).collect();
    for k in 0..(2 * n_c) {
        let j = k + rng.random_range(0..n - k);
        idx.swap(k, j);
    }
    for m in 0..n_c {
        let (i, j) = (idx[2 * m], idx[2 * m + 1]);
        let eta = rule.sample_noise(rng);
        let eta_star = rule.sample_noise(rng);
        stats.attempted += 1;
        match binary_interact(rule, ens.states[i], ens.states[j], eta, eta_star, eps, z)? {
            Interaction::Accepted { v, w } => {
                ens.states[i] = v;
                ens.states[j] = w;
            }
            Interaction::Rejected => stats.rejected += 1,
        }
    }
    ens.time += dt;
    Ok(())
}

/// March the ensemble to `t_end` with steps of at most `dt`, landing on
/// `t_end` exactly. Returns the evolved ensemble and interaction counts.
pub fn dsmc_run(
    rule: &InteractionRule,
    ens: &AgentEnsemble,
    dt: f64,
    t_end: f64,
    z: f64,
    rng: &mut impl Rng,
) -> Result<(AgentEnsemble, InteractionStats)> {
    if !(dt > 0.0) {
        return Err(config("exchange run needs dt > 0"));
    }
    if !(t_end >= ens.time) {
        return Err(config("final time precedes the ensemble time"));
    }
    if let Some(&bad) = ens.states.iter().find(|&&s| !rule.contains(s)) {
        return Err(config(format!("agent state {bad} outside the rule domain")));
    }
    let mut out = ens.clone();
    let mut stats = InteractionStats::default();
    while out.time < t_end - 1e-12 {
        let step = dt.min(t_end - out.time);
        dsmc_step(rule, &mut out, step, z, rng, &mut stats)?;
    }
    out.time = t_end;
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::presets::{AgentPreset, AgentScenario};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_duration_run_returns_the_input() {
        let sc = AgentScenario::preset(AgentPreset::WealthC);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ens = sc.ensemble(0.5, 100, &mut rng).unwrap();
        let (out, stats) = dsmc_run(&sc.rule, &ens, sc.dt, 0.0, 0.5, &mut rng).unwrap();
        assert_eq!(out.states, ens.states);
        assert_eq!(stats.attempted, 0);
    }

    #[test]
    fn oversized_steps_and_odd_counts_are_rejected() {
        let sc = AgentScenario::preset(AgentPreset::OpinionA);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ens = sc.ensemble(0.5, 100, &mut rng).unwrap();
        assert!(dsmc_run(&sc.rule, &ens, 2.1 * ens.epsilon, 1.0, 0.5, &mut rng).is_err());
        let odd = sc.ensemble(0.5, 101, &mut rng).unwrap();
        assert!(dsmc_run(&sc.rule, &odd, sc.dt, 1.0, 0.5, &mut rng).is_err());
    }

    #[test]
    fn agent_count_is_conserved() {
        let sc = AgentScenario::preset(AgentPreset::WealthD);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ens = sc.ensemble(-0.2, 500, &mut rng).unwrap();
        let (out, _) = dsmc_run(&sc.rule, &ens, sc.dt, 1.0, -0.2, &mut rng).unwrap();
        assert_eq!(out.len(), 500);
        assert!(out.states.iter().all(|&s| sc.rule.contains(s)));
    }

    #[test]
    fn mean_opinion_stays_within_statistical_error() {
        // The compromise terms of a pair cancel and the noise has zero mean,
        // so the ensemble mean is a martingale; its drift over [0, t] should
        // stay within a few standard errors of zero.
        let sc = AgentScenario::preset(AgentPreset::OpinionA);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let ens = sc.ensemble(0.7, n, &mut rng).unwrap();
        let before = ens.mean();
        let (out, stats) = dsmc_run(&sc.rule, &ens, sc.dt, 1.0, 0.7, &mut rng).unwrap();
        let std: f64 = {
            let m = out.mean();
            (out.states.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
        };
        let drift = (out.mean() - before).abs();
        assert!(
            drift <= 3.0 * std / (n as f64).sqrt(),
            "drift {drift} vs noise floor {}",
            std / (n as f64).sqrt()
        );
        // Bounded-support noise with a vanishing diffusion at the ends keeps
        // rejections rare.
        assert!(stats.rejection_rate() < 0.01, "{:?}", stats);
    }

    #[test]
    fn mean_wealth_is_a_martingale_across_runs() {
        // Multiplicative noise leaves the pair sum unchanged only on
        // average; over independent runs the mean-of-means must not drift.
        let sc = AgentScenario::preset(AgentPreset::WealthC);
        let z = 0.3;
        let runs = 50;
        let n = 2000;
        let mut finals = Vec::with_capacity(runs);
        let mut initial = 0.0;
        for r in 0..runs {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + r as u64);
            let ens = sc.ensemble(z, n, &mut rng).unwrap();
            initial += ens.mean();
            let (out, _) = dsmc_run(&sc.rule, &ens, sc.dt, 1.0, z, &mut rng).unwrap();
            finals.push(out.mean());
        }
        initial /= runs as f64;
        let mean = finals.iter().sum::<f64>() / runs as f64;
        let se = (finals.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
            / (runs as f64 - 1.0))
            .sqrt()
            / (runs as f64).sqrt();
        assert!(
            (mean - initial).abs() <= 3.0 * se,
            "drift {} vs 3 se {}",
            (mean - initial).abs(),
            3.0 * se
        );
    }
}
