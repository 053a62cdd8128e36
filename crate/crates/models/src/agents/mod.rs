//! Binary exchange models for interacting agents: a pair of scalar states
//! is updated by a linear exchange rule plus state-dependent noise. With the
//! small-exchange scaling (drift O(eps), noise variance O(eps), interaction
//! frequency 1/eps) the particle dynamics approaches a mean-field drift-
//! diffusion equation whose steady states are known in closed form for the
//! rules implemented here.

pub mod dsmc;
pub mod fokker_planck;
pub mod presets;
pub mod steady;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{config, Result};

/// Scalar model coefficient as a function of the random input `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coeff {
    Const(f64),
    /// `a + b z`
    Affine { a: f64, b: f64 },
}

impl Coeff {
    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            Coeff::Const(c) => c,
            Coeff::Affine { a, b } => a + b * z,
        }
    }

    /// Range of values taken on `[z_lo, z_hi]`; exact since the map is affine.
    pub fn range_on(&self, z_lo: f64, z_hi: f64) -> (f64, f64) {
        let (a, b) = (self.eval(z_lo), self.eval(z_hi));
        (a.min(b), a.max(b))
    }
}

/// Local strength of the noise term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diffusion {
    /// `sqrt(1 - w^2)`, vanishing at the ends of `[-1, 1]`.
    SqrtBounded,
    /// `1 - w^2`, vanishing quadratically at the ends of `[-1, 1]`.
    QuadraticBounded,
    /// `w`, multiplicative noise on the positive half line.
    Linear,
}

impl Diffusion {
    pub fn eval(&self, w: f64) -> f64 {
        match self {
            Diffusion::SqrtBounded => (1.0 - w * w).max(0.0).sqrt(),
            Diffusion::QuadraticBounded => 1.0 - w * w,
            Diffusion::Linear => w,
        }
    }
}

/// Law of the interaction noise; always zero mean with variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLaw {
    /// Symmetric two-point law `±sigma`. Bounded support keeps the opinion
    /// rules inside their domain for small `eps`.
    TwoPoint,
    /// Gaussian conditioned on `|x| <= cut` standard deviations, rescaled so
    /// the variance is exactly `sigma2` again.
    TruncatedGaussian { cut: f64 },
}

/// Pairwise exchange rule
///
/// ```text
/// v' = v + eps [(p1(z) - 1) v + q1(z) w] + D(v) sqrt(eps) eta
/// w' = w + eps [p2(z) v + (q2(z) - 1) w] + D(w) sqrt(eps) eta*
/// ```
///
/// with independent zero-mean noises `eta`, `eta*` of variance `sigma2`.
/// The constructors cover compromise dynamics on `[-1, 1]` and multiplicative
/// wealth exchange on the positive half line; `generic_linear` exposes the
/// full coefficient set.
#[derive(Debug, Clone)]
pub struct InteractionRule {
    p1: Coeff,
    q1: Coeff,
    p2: Coeff,
    q2: Coeff,
    diffusion: Diffusion,
    sigma2: f64,
    noise: NoiseLaw,
    lo: f64,
    hi: f64,
}

impl InteractionRule {
    /// Compromise dynamics on `[-1, 1]`: both agents move toward each other
    /// with weight `p(z)`, which must stay in `[0, 1]` over `[z_lo, z_hi]`.
    pub fn opinion(
        p: Coeff,
        diffusion: Diffusion,
        sigma2: f64,
        (z_lo, z_hi): (f64, f64),
    ) -> Result<Self> {
        let (p_min, p_max) = p.range_on(z_lo, z_hi);
        if p_min < 0.0 || p_max > 1.0 {
            return Err(config(format!(
                "compromise weight must lie in [0, 1], got [{p_min}, {p_max}]"
            )));
        }
        if matches!(diffusion, Diffusion::Linear) {
            return Err(config("opinion diffusion must vanish at the domain ends"));
        }
        Self::generic_linear(
            flip(p),
            p,
            p,
            flip(p),
            diffusion,
            sigma2,
            (-1.0, 1.0),
        )
    }

    /// Wealth exchange on `[0, inf)`: each agent invests the fraction
    /// `lambda(z)` of its wealth, with multiplicative noise `D(w) = w`.
    pub fn wealth(lambda: Coeff, sigma2: f64, (z_lo, z_hi): (f64, f64)) -> Result<Self> {
        let (l_min, l_max) = lambda.range_on(z_lo, z_hi);
        if l_min <= 0.0 || l_max > 1.0 {
            return Err(config(format!(
                "exchanged wealth fraction must lie in (0, 1], got [{l_min}, {l_max}]"
            )));
        }
        Self::generic_linear(
            flip(lambda),
            lambda,
            lambda,
            flip(lambda),
            Diffusion::Linear,
            sigma2,
            (0.0, f64::INFINITY),
        )
    }

    pub fn generic_linear(
        p1: Coeff,
        q1: Coeff,
        p2: Coeff,
        q2: Coeff,
        diffusion: Diffusion,
        sigma2: f64,
        (lo, hi): (f64, f64),
    ) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(config("noise variance must be positive"));
        }
        if !(lo < hi) {
            return Err(config("state domain is empty"));
        }
        Ok(Self {
            p1,
            q1,
            p2,
            q2,
            diffusion,
            sigma2,
            noise: NoiseLaw::TwoPoint,
            lo,
            hi,
        })
    }

    pub fn with_noise(mut self, noise: NoiseLaw) -> Result<Self> {
        if let NoiseLaw::TruncatedGaussian { cut } = noise {
            if !(cut > 0.0) {
                return Err(config("truncation cut must be positive"));
            }
        }
        self.noise = noise;
        Ok(self)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, w: f64) -> bool {
        w >= self.lo && w <= self.hi
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn diffusion(&self) -> Diffusion {
        self.diffusion
    }

    /// Coefficient of `w` in the mean-field drift kernel.
    pub fn drift_state_coeff(&self, z: f64) -> f64 {
        0.5 * (self.p1.eval(z) + self.q2.eval(z) - 2.0)
    }

    /// Coefficient of the partner state in the mean-field drift kernel.
    pub fn drift_partner_coeff(&self, z: f64) -> f64 {
        0.5 * (self.q1.eval(z) + self.p2.eval(z))
    }

    /// One noise draw: zero mean, variance exactly `sigma2`.
    pub fn sample_noise(&self, rng: &mut impl Rng) -> f64 {
        let sigma = self.sigma2.sqrt();
        match self.noise {
            NoiseLaw::TwoPoint => {
                if rng.random::<f64>() < 0.5 {
                    sigma
                } else {
                    -sigma
                }
            }
            NoiseLaw::TruncatedGaussian { cut } => {
                let x = loop {
                    let x: f64 = rng.sample(StandardNormal);
                    if x.abs() <= cut {
                        break x;
                    }
                };
                sigma * x / truncated_std(cut)
            }
        }
    }
}

/// `1 - c(z)` as a coefficient, used for the diagonal exchange weights.
fn flip(c: Coeff) -> Coeff {
    match c {
        Coeff::Const(v) => Coeff::Const(1.0 - v),
        Coeff::Affine { a, b } => Coeff::Affine { a: 1.0 - a, b: -b },
    }
}

/// Standard deviation of a unit Gaussian conditioned on `|x| <= cut`.
fn truncated_std(cut: f64) -> f64 {
    let phi = (-0.5 * cut * cut).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mass = statrs::function::erf::erf(cut / std::f64::consts::SQRT_2);
    (1.0 - 2.0 * cut * phi / mass).sqrt()
}

/// Result of one attempted pair interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interaction {
    Accepted { v: f64, w: f64 },
    /// The update would have left the state domain; both agents keep their
    /// pre-interaction states.
    Rejected,
}

/// Apply the exchange rule to one pair. `eta` and `eta_star` are raw noise
/// draws with variance `sigma2`; the small-exchange scaling (drift by `eps`,
/// noise by `sqrt(eps)`) is applied here.
pub fn binary_interact(
    rule: &InteractionRule,
    v: f64,
    w: f64,
    eta: f64,
    eta_star: f64,
    eps: f64,
    z: f64,
) -> Result<Interaction> {
    if !(eps > 0.0) {
        return Err(config("interaction scale eps must be positive"));
    }
    if !rule.contains(v) || !rule.contains(w) {
        return Err(config(format!(
            "pre-interaction states ({v}, {w}) outside the domain"
        )));
    }
    let root_eps = eps.sqrt();
    let v_new = v
        + eps * ((rule.p1.eval(z) - 1.0) * v + rule.q1.eval(z) * w)
        + rule.diffusion.eval(v) * root_eps * eta;
    let w_new = w
        + eps * (rule.p2.eval(z) * v + (rule.q2.eval(z) - 1.0) * w)
        + rule.diffusion.eval(w) * root_eps * eta_star;
    if rule.contains(v_new) && rule.contains(w_new) {
        Ok(Interaction::Accepted { v: v_new, w: w_new })
    } else {
        Ok(Interaction::Rejected)
    }
}

/// Particle representation of the agent distribution at one `z`.
#[derive(Debug, Clone)]
pub struct AgentEnsemble {
    pub states: Vec<f64>,
    pub time: f64,
    /// Exchange scale used by the dynamics this ensemble evolves under.
    pub epsilon: f64,
}

impl AgentEnsemble {
    pub fn new(states: Vec<f64>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(config("exchange scale eps must be positive"));
        }
        if states.iter().any(|s| !s.is_finite()) {
            return Err(config("agent states must be finite"));
        }
        Ok(Self {
            states,
            time: 0.0,
            epsilon,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.states.iter().sum::<f64>() / self.states.len() as f64
    }
}

/// Counts of attempted and rejected pair interactions over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InteractionStats {
    pub attempted: u64,
    pub rejected: u64,
}

impl InteractionStats {
    pub fn rejection_rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.rejected as f64 / self.attempted as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wealth_rule() -> InteractionRule {
        InteractionRule::wealth(Coeff::Const(0.3), 0.5, (0.0, 1.0)).unwrap()
    }

    #[test]
    fn wealth_rule_without_noise_is_the_plain_exchange() {
        let rule = wealth_rule();
        let got = binary_interact(&rule, 2.0, 5.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        let want_v = 0.7 * 2.0 + 0.3 * 5.0;
        let want_w = 0.7 * 5.0 + 0.3 * 2.0;
        match got {
            Interaction::Accepted { v, w } => {
                assert!((v - want_v).abs() < 1e-15);
                assert!((w - want_w).abs() < 1e-15);
            }
            Interaction::Rejected => panic!("noise-free exchange cannot leave the domain"),
        }
    }

    #[test]
    fn equal_opinions_only_feel_the_noise() {
        let rule =
            InteractionRule::opinion(Coeff::Const(0.8), Diffusion::SqrtBounded, 0.1, (0.0, 1.0))
                .unwrap();
        let (v0, eta) = (0.4, 0.05);
        let got = binary_interact(&rule, v0, v0, eta, 0.0, 1.0, 0.3).unwrap();
        match got {
            Interaction::Accepted { v, w } => {
                assert!((v - (v0 + rule.diffusion.eval(v0) * eta)).abs() < 1e-15);
                assert!((w - v0).abs() < 1e-15);
            }
            Interaction::Rejected => panic!("interior update cannot be rejected"),
        }
    }

    #[test]
    fn wealth_exchange_preserves_the_pair_sum_on_average() {
        // The noise enters linearly, so averaging over the four two-point
        // noise combinations gives the exact conditional expectation.
        let rule = wealth_rule();
        let sigma = rule.sigma2().sqrt();
        let (v0, w0, eps) = (1.3, 0.4, 0.05);
        let mut total = 0.0;
        for eta in [sigma, -sigma] {
            for eta_star in [sigma, -sigma] {
                match binary_interact(&rule, v0, w0, eta, eta_star, eps, 0.5).unwrap() {
                    Interaction::Accepted { v, w } => total += v + w,
                    Interaction::Rejected => panic!("small noise cannot leave the half line"),
                }
            }
        }
        assert!((total / 4.0 - (v0 + w0)).abs() < 1e-14);
    }

    #[test]
    fn out_of_domain_updates_are_rejected() {
        let rule =
            InteractionRule::opinion(Coeff::Const(0.0), Diffusion::SqrtBounded, 4.0, (0.0, 1.0))
                .unwrap();
        // Huge noise at a state where the diffusion is still active.
        let got = binary_interact(&rule, 0.9, 0.0, 10.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(got, Interaction::Rejected);
    }

    #[test]
    fn rule_construction_rejects_bad_parameters() {
        assert!(InteractionRule::opinion(
            Coeff::Affine { a: 0.9, b: 0.3 },
            Diffusion::SqrtBounded,
            0.1,
            (0.0, 1.0)
        )
        .is_err());
        assert!(InteractionRule::wealth(Coeff::Const(1.2), 0.5, (0.0, 1.0)).is_err());
        assert!(InteractionRule::wealth(Coeff::Const(0.5), 0.0, (0.0, 1.0)).is_err());
        assert!(InteractionRule::wealth(Coeff::Const(1.0), 0.5, (0.0, 1.0)).is_ok());
    }

    #[test]
    fn two_point_noise_hits_only_two_values() {
        let rule = wealth_rule();
        let sigma = rule.sigma2().sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws: Vec<f64> = (0..2000).map(|_| rule.sample_noise(&mut rng)).collect();
        assert!(draws.iter().all(|&d| d == sigma || d == -sigma));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 3.0 * sigma / (draws.len() as f64).sqrt() * 1.5);
    }

    #[test]
    fn truncated_gaussian_noise_is_bounded_with_unit_variance() {
        let cut = 2.0;
        let rule = wealth_rule()
            .with_noise(NoiseLaw::TruncatedGaussian { cut })
            .unwrap();
        let sigma = rule.sigma2().sqrt();
        let bound = sigma * cut / super::truncated_std(cut);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| rule.sample_noise(&mut rng)).collect();
        assert!(draws.iter().all(|&d| d.abs() <= bound + 1e-12));
        let var = draws.iter().map(|d| d * d).sum::<f64>() / n as f64;
        assert!((var - rule.sigma2()).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn drift_kernel_coefficients_match_the_rule() {
        // Compromise weight p: kernel is p (partner - state).
        let rule =
            InteractionRule::opinion(Coeff::Affine { a: 0.75, b: 0.25 }, Diffusion::QuadraticBounded, 0.1, (-1.0, 1.0))
                .unwrap();
        let z = 0.2;
        let p = 0.75 + 0.25 * z;
        assert!((rule.drift_state_coeff(z) + p).abs() < 1e-15);
        assert!((rule.drift_partner_coeff(z) - p).abs() < 1e-15);
    }
}
