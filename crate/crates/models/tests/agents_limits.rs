//! Particle runs against their mean-field and long-time limits.

use kinuq_core::histogram::{histogram_reconstruct, OutOfRange};
use kinuq_core::random::substream;
use kinuq_models::agents::dsmc::dsmc_run;
use kinuq_models::agents::fokker_planck::fokker_planck_solve;
use kinuq_models::agents::presets::{AgentPreset, AgentScenario};
use kinuq_models::agents::AgentEnsemble;

fn l1(a: &[f64], b: &[f64], dw: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dw
}

/// Histogram of `runs` independent particle runs at exchange scale `eps`,
/// pooled to cut the sampling noise, at a fixed physical time.
fn pooled_histogram(
    sc: &AgentScenario,
    eps: f64,
    z: f64,
    t: f64,
    runs: u64,
    master_seed: u64,
) -> Vec<f64> {
    let layout = sc.state_layout();
    let mut acc = vec![0.0; sc.grid.n_cells()];
    for r in 0..runs {
        let mut rng = substream(master_seed, r);
        let states = sc.sample_ic(z, sc.n_particles, &mut rng);
        let ens = AgentEnsemble::new(states, eps).unwrap();
        let (out, _) = dsmc_run(&sc.rule, &ens, eps, t, z, &mut rng).unwrap();
        let h = histogram_reconstruct(&out.states, &sc.grid, &layout, OutOfRange::Reject).unwrap();
        acc.iter_mut().zip(h.values()).for_each(|(a, v)| *a += v);
    }
    acc.iter_mut().for_each(|a| *a /= runs as f64);
    acc
}

// Shrinking the exchange scale drives the particle histograms toward the
// mean-field solution at the same time; the distance decreases monotonically
// and ends within the pooled sampling noise.
#[test]
fn exchange_scale_controls_the_mean_field_gap() {
    let sc = AgentScenario::preset(AgentPreset::OpinionA);
    let z = 0.6;
    let t = 1.0;
    let ic = sc.mean_field_ic(z).unwrap();
    let f = fokker_planck_solve(&sc.rule, &ic, &sc.solver_grid, t, z).unwrap();
    let f = sc.restrict_to_window(&f).unwrap();

    let mut dists = Vec::new();
    for (k, eps) in [0.5, 0.1, 0.02].into_iter().enumerate() {
        let h = pooled_histogram(&sc, eps, z, t, 4, 2000 + 10 * k as u64);
        dists.push(l1(&h, f.values(), sc.grid.spacing()));
    }
    assert!(
        dists[0] > dists[1] && dists[1] > dists[2],
        "distances {dists:?} are not monotone in the exchange scale"
    );
    assert!(dists[2] < 0.05, "finest-scale distance {}", dists[2]);
}

// At the scenario's own exchange scale the wealth ensemble relaxes onto the
// heavy-tailed profile; the histogram window catches all but ~1e-4 of it.
#[test]
fn wealth_particles_reach_the_heavy_tailed_state() {
    let sc = AgentScenario::preset(AgentPreset::WealthC);
    let z = 0.2;
    let h = pooled_histogram(&sc, sc.epsilon, z, 20.0, 2, 3100);
    let steady = sc.steady.eval_on(&sc.grid.centers(), z).unwrap();
    let dist = l1(&h, &steady, sc.grid.spacing());
    assert!(dist < 0.08, "distance to the long-time state {dist}");
}
