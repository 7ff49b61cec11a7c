//! Seeded invariant suites behind `shuffle-rdp verify`.
//!
//! Each suite draws small random instances, evaluates them exactly through
//! the core oracle and reports one [`PropertyResult`] per property. The
//! instance counts are sized so that `all` stays well under a minute in an
//! unoptimised build.

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shuffle_rdp_core::numerics::gamma_inequality_holds;
use shuffle_rdp_core::oracle::{
    e_m_sequence, mixture_decomposition_error, moment_identities_check, monotonicity_check,
    random_feasible_pair, random_vertex, reduction_check, renyi_divergence, shuffle_dist,
    sup_variance_vertex, two_bin_vertex, variance_functional, DiscreteMechanism,
};
use shuffle_rdp_core::{
    best_upper, erlingsson_baseline, lower_bound, ub1, ub2, RdpOrder, ShuffleParams,
};

/// Seed used when neither `--seed` nor the environment supplies one.
pub const DEFAULT_SEED: u64 = 20_240_601;
/// Environment variable that overrides [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "SHUFFLE_RDP_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Oracle,
    Moments,
    Mixture,
    Monotonic,
    Sandwich,
    Gamma,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub suite: &'static str,
    pub property: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl PropertyResult {
    fn new(suite: &'static str, property: &'static str, passed: bool, detail: String) -> Self {
        Self { suite, property, passed, detail }
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{}/{}: {tag} - {}", self.suite, self.property, self.detail)
    }
}

/// Runs `suite` (every suite for [`Suite::All`]) with a fixed seed.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<PropertyResult> {
    match suite {
        Suite::Oracle => oracle(seed),
        Suite::Moments => moments(seed),
        Suite::Mixture => mixture(seed),
        Suite::Monotonic => monotonic(seed),
        Suite::Sandwich => sandwich(),
        Suite::Gamma => gamma(),
        Suite::All => [Suite::Oracle, Suite::Moments, Suite::Mixture, Suite::Monotonic, Suite::Sandwich, Suite::Gamma]
            .into_iter()
            .flat_map(|s| run_suite(s, seed))
            .collect(),
    }
}

fn order(k: u32) -> RdpOrder {
    RdpOrder::integer(k).expect("k >= 2")
}

fn small_mechanism(rng: &mut ChaCha8Rng, max_bins: usize) -> DiscreteMechanism {
    let eps0 = rng.gen_range(0.05..3.0);
    let inputs = rng.gen_range(2..=3);
    let bins = rng.gen_range(2..=max_bins);
    DiscreteMechanism::random(rng, inputs, bins, eps0).expect("valid shape")
}

// Two datasets that differ in the last client only.
fn neighbours(rng: &mut ChaCha8Rng, n: usize, inputs: usize) -> (Vec<usize>, Vec<usize>) {
    let d: Vec<usize> = (0..n).map(|_| rng.gen_range(0..inputs)).collect();
    let mut dp = d.clone();
    dp[n - 1] = (d[n - 1] + rng.gen_range(1..inputs)) % inputs;
    (d, dp)
}

fn oracle(seed: u64) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = 120;
    let mut violations = 0;
    let mut tightest = 0.0f64;
    for _ in 0..instances {
        let mech = small_mechanism(&mut rng, 4);
        let n = rng.gen_range(2..=8);
        let (d, dp) = neighbours(&mut rng, n, mech.inputs());
        let md = shuffle_dist(&mech, &d).expect("within budget");
        let mdp = shuffle_dist(&mech, &dp).expect("within budget");
        let p = ShuffleParams::new(mech.eps0(), n as u64).expect("valid params");
        for lambda in [2u32, 3, 4] {
            let bound = ub1(&p, order(lambda)).expect("integer order").min(ub2(&p, order(lambda)).expect("integer order"));
            for div in [
                renyi_divergence(&md, &mdp, f64::from(lambda)).expect("shared support"),
                renyi_divergence(&mdp, &md, f64::from(lambda)).expect("shared support"),
            ] {
                violations += usize::from(div > bound);
                tightest = tightest.max(div / bound);
            }
        }
    }
    vec![PropertyResult::new(
        "oracle",
        "exact divergence below both upper bounds",
        violations == 0,
        format!("{instances} mechanisms, {violations} violations, max divergence/bound {tightest:.3}"),
    )]
}

fn moments(seed: u64) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut failures = 0;
    for _ in 0..100 {
        let eps0 = rng.gen_range(0.05..3.0);
        let bins = rng.gen_range(2..=4);
        let m = rng.gen_range(1..=6);
        let (p, pp) = random_feasible_pair(&mut rng, bins, eps0);
        let report = moment_identities_check(eps0, m, &p, &pp, 8).expect("valid pair");
        failures += usize::from(!report.holds());
    }

    let mut worst = f64::NEG_INFINITY;
    for eps0 in [0.1, 1.0, 3.0] {
        let sup = sup_variance_vertex(eps0);
        for i in 0..2_000 {
            let bins = 2 + i % 3;
            let (p, pp) = random_feasible_pair(&mut rng, bins, eps0);
            worst = worst.max(variance_functional(&p, &pp) - sup);
            if let Some((p, pp)) = random_vertex(&mut rng, bins, eps0) {
                worst = worst.max(variance_functional(&p, &pp) - sup);
            }
        }
        let (p, pp) = two_bin_vertex(eps0);
        worst = worst.max((variance_functional(&p, &pp) - sup).abs());
    }

    vec![
        PropertyResult::new(
            "moments",
            "mean, variance and absolute-moment caps",
            failures == 0,
            format!("{failures}/100 instances failed"),
        ),
        PropertyResult::new(
            "moments",
            "variance supremum attained at the two-bin vertex",
            worst <= 1e-12,
            format!("max excess {worst:.1e}"),
        ),
    ]
}

fn mixture(seed: u64) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let mech = small_mechanism(&mut rng, 3);
        let n = rng.gen_range(1..=6);
        let (d, dp) = neighbours(&mut rng, n, mech.inputs());
        worst = worst.max(mixture_decomposition_error(&mech, &d, &dp).expect("within budget"));
    }
    let mut reduction_fail = 0;
    for _ in 0..40 {
        let mech = small_mechanism(&mut rng, 3);
        let n = rng.gen_range(1..=6);
        let (d, dp) = neighbours(&mut rng, n, mech.inputs());
        let lambda = f64::from(rng.gen_range(2..=4u32));
        reduction_fail += usize::from(!reduction_check(&mech, &d, &dp, lambda).expect("within budget").holds());
    }
    vec![
        PropertyResult::new(
            "mixture",
            "mixture decomposition is exact",
            worst < 1e-11,
            format!("max entrywise error {worst:.1e} over 40 instances"),
        ),
        PropertyResult::new(
            "mixture",
            "reduction to the special case",
            reduction_fail == 0,
            format!("{reduction_fail}/40 instances failed"),
        ),
    ]
}

fn monotonic(seed: u64) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let mut fail = 0;
    let mut non_strict = 0;
    for _ in 0..60 {
        let mech = small_mechanism(&mut rng, 3);
        let n = rng.gen_range(2..=8);
        let (d, dp) = neighbours(&mut rng, n, mech.inputs());
        let lambda = f64::from(rng.gen_range(2..=4u32));
        let report = monotonicity_check(&mech, &d, &dp, lambda).expect("within budget");
        fail += usize::from(!report.holds());
        non_strict += report.non_strict();
    }
    let mut e_m_fail = 0;
    for _ in 0..40 {
        let eps0 = rng.gen_range(0.05..3.0);
        let bins = rng.gen_range(2..=4);
        let (p, pp) = random_feasible_pair(&mut rng, bins, eps0);
        let seq = e_m_sequence(&p, &pp, f64::from(rng.gen_range(2..=4u32)), 6).expect("valid pair");
        e_m_fail += usize::from(!seq[1..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
    vec![
        PropertyResult::new(
            "monotonic",
            "removing a client never lowers the power expectation",
            fail == 0,
            format!("{fail}/60 instances failed, {non_strict} non-strict removals flagged"),
        ),
        PropertyResult::new(
            "monotonic",
            "E_m non-increasing for m in 1..=6",
            e_m_fail == 0,
            format!("{e_m_fail}/40 sequences failed"),
        ),
    ]
}

fn sandwich() -> Vec<PropertyResult> {
    let mut checked = 0;
    let mut bad = Vec::new();
    for eps0 in [0.1, 0.5, 1.0, 2.0, 3.0] {
        for n in [100u64, 1_000, 10_000, 1_000_000] {
            let p = ShuffleParams::new(eps0, n).expect("valid params");
            for lambda in [2u32, 4, 8, 16, 32, 64] {
                let o = order(lambda);
                let lb = lower_bound(&p, o).expect("integer order");
                let uppers = [
                    ub1(&p, o).expect("integer order"),
                    ub2(&p, o).expect("integer order"),
                    erlingsson_baseline(&p, o),
                    best_upper(&p, o),
                ];
                checked += 1;
                if uppers.iter().any(|&u| lb > u) || best_upper(&p, o) > eps0 {
                    bad.push(format!("(eps0={eps0}, n={n}, lambda={lambda})"));
                }
            }
        }
    }
    vec![PropertyResult::new(
        "sandwich",
        "lower bound below every upper bound",
        bad.is_empty(),
        format!("{checked} grid points, {} violations {}", bad.len(), bad.join(" ")),
    )]
}

fn gamma() -> Vec<PropertyResult> {
    let mut checked = 0;
    let mut failures = 0;
    for lambda in 3..=128u32 {
        for k in 3..=lambda {
            checked += 1;
            failures += usize::from(!gamma_inequality_holds(lambda, k));
        }
    }
    vec![PropertyResult::new(
        "gamma",
        "C(lambda,k) k Gamma(k/2) <= lambda^k",
        failures == 0,
        format!("{checked} pairs, {failures} failures"),
    )]
}
