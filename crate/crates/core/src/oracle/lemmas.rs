use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused when std is linked and its inherent methods take over
use num_traits::Float;
use rand::Rng;

use super::divergence::{ln_power_expectation, special_case_ln_expectation};
use super::histogram::{check_budget, enumerate_histograms, ln_multinomial_pmf, shuffle_rows};
use super::mechanism::random_simplex;
use super::{
    DiscreteMechanism, Histogram, OracleError, MAX_MIXTURE_CLIENTS, MAX_MONOTONICITY_CLIENTS,
};
use crate::numerics::{ln_gamma, BinomialLogPmf, NeumaierSum};

/// Slack for membership tests on probability vectors.
const PAIR_TOL: f64 = 1e-12;

/// Checks that `dataset` and `neighbor` have equal length `n >= 1` and agree
/// on the first `n - 1` entries.
fn check_neighbors(
    mech: &DiscreteMechanism,
    dataset: &[usize],
    neighbor: &[usize],
    max_clients: usize,
) -> Result<usize, OracleError> {
    mech.check_dataset(dataset)?;
    mech.check_dataset(neighbor)?;
    let n = dataset.len();
    if n == 0 || neighbor.len() != n || dataset[..n - 1] != neighbor[..n - 1] {
        return Err(OracleError::InvalidInput(
            "datasets must have equal nonzero length and differ only in the last entry",
        ));
    }
    if n > max_clients {
        return Err(OracleError::BudgetExceeded("too many clients for this check"));
    }
    Ok(n)
}

/// `p_tilde = (p - q p') / (1 - q)` for `q = e^{-eps0}`; tiny negative
/// entries from rounding are clamped to zero.
fn tilde_row(p: &[f64], p_prime_last: &[f64], eps0: f64) -> Result<Vec<f64>, OracleError> {
    if eps0 == 0.0 {
        return Ok(p.to_vec());
    }
    let q = (-eps0).exp();
    let mut out = Vec::with_capacity(p.len());
    for (&a, &b) in p.iter().zip(p_prime_last) {
        let t = (a - q * b) / (-(-eps0).exp_m1());
        if t < -PAIR_TOL {
            return Err(OracleError::NotLdp {
                declared: eps0,
                actual: (b / a).ln(),
            });
        }
        out.push(t.max(0.0));
    }
    Ok(out)
}

/// Largest entrywise gap between the shuffled distributions of `dataset` and
/// `neighbor` and their subset-mixture decompositions.
///
/// Each of the first `n - 1` clients is written as
/// `p_i = q p'_n + (1 - q) p_tilde_i` with `q = e^{-eps0}`; expanding the
/// convolution gives a mixture over subsets `C` of those clients, with weight
/// `q^|C| (1 - q)^{n - 1 - |C|}`, of instances where clients in `C` use
/// `p'_n` and the rest use `p_tilde_i`.
pub fn mixture_decomposition_error(
    mech: &DiscreteMechanism,
    dataset: &[usize],
    neighbor: &[usize],
) -> Result<f64, OracleError> {
    let n = check_neighbors(mech, dataset, neighbor, MAX_MIXTURE_CLIENTS)?;
    if n == 1 {
        return Ok(0.0);
    }
    let eps0 = mech.eps0();
    let q = (-eps0).exp();
    let last = mech.row(dataset[n - 1]);
    let last_prime = mech.row(neighbor[n - 1]);
    let tildes = dataset[..n - 1]
        .iter()
        .map(|&d| tilde_row(mech.row(d), last_prime, eps0))
        .collect::<Result<Vec<_>, _>>()?;

    let mut worst = 0.0f64;
    for tail in [last, last_prime] {
        let rows: Vec<&[f64]> = dataset[..n - 1]
            .iter()
            .map(|&d| mech.row(d))
            .chain([tail])
            .collect();
        let exact = shuffle_rows(rows, mech.bins());
        let mut mixed: BTreeMap<Histogram, NeumaierSum> = BTreeMap::new();
        for subset in 0u32..(1 << (n - 1)) {
            let size = subset.count_ones() as i32;
            let weight = q.powi(size) * (1.0 - q).powi(n as i32 - 1 - size);
            if weight == 0.0 {
                continue;
            }
            let rows = (0..n - 1)
                .map(|i| {
                    if subset & (1 << i) != 0 {
                        last_prime
                    } else {
                        tildes[i].as_slice()
                    }
                })
                .chain([tail]);
            for (h, m) in shuffle_rows(rows, mech.bins()).iter() {
                mixed.entry(h.clone()).or_default().add(weight * m);
            }
        }
        for (h, m) in exact.iter() {
            let approx = mixed.get(h).map_or(0.0, NeumaierSum::total);
            worst = worst.max((m - approx).abs());
        }
        for (h, s) in &mixed {
            worst = worst.max((exact.mass(h) - s.total()).abs());
        }
    }
    Ok(worst)
}

/// Whether [`mixture_decomposition_error`] is within `tol`.
pub fn mixture_decomposition_check(
    mech: &DiscreteMechanism,
    dataset: &[usize],
    neighbor: &[usize],
    tol: f64,
) -> Result<bool, OracleError> {
    Ok(mixture_decomposition_error(mech, dataset, neighbor)? <= tol)
}

/// Whether `(p, p')` are probability vectors with every likelihood ratio in
/// `[e^{-eps0}, e^{eps0}]`.
pub fn in_tilde_set(p: &[f64], p_prime: &[f64], eps0: f64) -> bool {
    let valid = |v: &[f64]| {
        v.iter().all(|&x| x > 0.0 && x.is_finite()) && (v.iter().sum::<f64>() - 1.0).abs() <= PAIR_TOL
    };
    p.len() == p_prime.len()
        && !p.is_empty()
        && valid(p)
        && valid(p_prime)
        && p
            .iter()
            .zip(p_prime)
            .all(|(&a, &b)| (b.ln() - a.ln()).abs() <= eps0 + PAIR_TOL)
}

/// `sum_j p'_j^2 / p_j - 1`, evaluated as `sum_j (p'_j - p_j)^2 / p_j`.
pub fn variance_functional(p: &[f64], p_prime: &[f64]) -> f64 {
    p.iter()
        .zip(p_prime)
        .map(|(&a, &b)| (b - a) * (b - a) / a)
        .sum()
}

/// Supremum of [`variance_functional`] over eps0-bounded pairs:
/// `(e^eps0 - 1)^2 / e^eps0`.
pub fn sup_variance_vertex(eps0: f64) -> f64 {
    let em1 = eps0.exp_m1();
    em1 * em1 / eps0.exp()
}

/// The two-bin pair attaining [`sup_variance_vertex`]:
/// `p = (1/(e^eps0+1), e^eps0/(e^eps0+1))` and `p'` reversed.
pub fn two_bin_vertex(eps0: f64) -> (Vec<f64>, Vec<f64>) {
    let lo = 1.0 / (eps0.exp() + 1.0);
    let hi = 1.0 - lo;
    (alloc::vec![lo, hi], alloc::vec![hi, lo])
}

/// A random eps0-bounded pair: the two rows of a random two-input mechanism.
pub fn random_feasible_pair<R: Rng + ?Sized>(rng: &mut R, bins: usize, eps0: f64) -> (Vec<f64>, Vec<f64>) {
    let mech = DiscreteMechanism::random(rng, 2, bins, eps0).expect("bins >= 1");
    (mech.row(0).to_vec(), mech.row(1).to_vec())
}

/// A random vertex of the set of `p'` compatible with a random `p`: every
/// ratio but one sits at `e^{+-eps0}` and one coordinate absorbs the slack.
/// Returns `None` when the drawn sign pattern is infeasible.
pub fn random_vertex<R: Rng + ?Sized>(rng: &mut R, bins: usize, eps0: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let p = random_simplex(rng, bins);
    let free = rng.gen_range(0..bins);
    let mut p_prime: Vec<f64> = p
        .iter()
        .map(|&x| if rng.gen_bool(0.5) { x * eps0.exp() } else { x * (-eps0).exp() })
        .collect();
    let rest: f64 = p_prime
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != free)
        .map(|(_, &x)| x)
        .sum();
    p_prime[free] = 1.0 - rest;
    let r = p_prime[free] / p[free];
    let ok = p_prime[free] > 0.0
        && r <= eps0.exp() * (1.0 + PAIR_TOL)
        && r >= (-eps0).exp() * (1.0 - PAIR_TOL);
    ok.then_some((p, p_prime))
}

/// Exact moments of `X(h) = sum_j (p'_j/p_j) h_j - m` under `h ~ MN(m, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub m: u32,
    pub mean: f64,
    pub variance: f64,
    /// `m (sum_j p'_j^2/p_j - 1)`, corrected for any floating-point gap
    /// between `sum p` and `sum p'`.
    pub expected_variance: f64,
    /// `(i, E|X|^i, i Gamma(i/2) (2 m nu^2)^{i/2})` for `i >= 3`, with
    /// `nu = (e^eps - e^{-eps}) / 2` and `eps` the pair's largest log-ratio.
    pub absolute_moments: Vec<(u32, f64, f64)>,
}

impl MomentReport {
    pub fn mean_ok(&self) -> bool {
        self.mean.abs() <= 1e-10 * f64::from(self.m)
    }

    pub fn variance_ok(&self) -> bool {
        (self.variance - self.expected_variance).abs() <= 1e-10 * self.expected_variance + 1e-300
    }

    pub fn caps_ok(&self) -> bool {
        self.absolute_moments
            .iter()
            .all(|&(_, moment, cap)| moment <= cap * (1.0 + 1e-12))
    }

    pub fn holds(&self) -> bool {
        self.mean_ok() && self.variance_ok() && self.caps_ok()
    }
}

/// Enumerates `MN(m, p)` and reports the moment identities of the
/// likelihood-ratio statistic `X`.
pub fn moment_identities_check(
    eps0: f64,
    m: u32,
    p: &[f64],
    p_prime: &[f64],
    max_order: u32,
) -> Result<MomentReport, OracleError> {
    if m == 0 {
        return Err(OracleError::InvalidInput("m must be >= 1"));
    }
    if !in_tilde_set(p, p_prime, eps0) {
        return Err(OracleError::InvalidInput("(p, p') is not an eps0-bounded pair"));
    }
    check_budget(m as usize, p.len())?;
    let excess: Vec<f64> = p.iter().zip(p_prime).map(|(&a, &b)| (b - a) / a).collect();
    let points: Vec<(f64, f64)> = enumerate_histograms(m, p.len())?
        .iter()
        .map(|h| {
            let x = h
                .counts()
                .iter()
                .zip(&excess)
                .map(|(&c, &e)| f64::from(c) * e)
                .sum::<f64>();
            (ln_multinomial_pmf(p, h).exp(), x)
        })
        .collect();

    let mut mean = NeumaierSum::new();
    for &(w, x) in &points {
        mean.add(w * x);
    }
    let mean = mean.total();
    let mut var = NeumaierSum::new();
    for &(w, x) in &points {
        var.add(w * (x - mean) * (x - mean));
    }

    let eps_pair = p
        .iter()
        .zip(p_prime)
        .fold(0.0f64, |acc, (&a, &b)| acc.max((b.ln() - a.ln()).abs()));
    let nu = eps_pair.sinh();
    let residual: f64 = p_prime.iter().zip(p).map(|(&b, &a)| b - a).sum();
    let mf = f64::from(m);
    let absolute_moments = (3..=max_order)
        .map(|i| {
            let fi = f64::from(i);
            let mut acc = NeumaierSum::new();
            for &(w, x) in &points {
                acc.add(w * x.abs().powi(i as i32));
            }
            let ln_cap = fi.ln() + ln_gamma(fi / 2.0).expect("i >= 3") + 0.5 * fi * (2.0 * mf * nu * nu).ln();
            (i, acc.total(), ln_cap.exp())
        })
        .collect();

    Ok(MomentReport {
        m,
        mean,
        variance: var.total(),
        // the correction vanishes when p and p' sum to exactly the same value
        expected_variance: mf * (variance_functional(p, p_prime) - residual * residual),
        absolute_moments,
    })
}

/// `ln E_{F(D')}[(F(D)/F(D'))^lambda]` for the full instance and for every
/// instance with one shared client removed.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub full_ln: f64,
    /// Indexed by the removed client.
    pub reduced_ln: Vec<f64>,
}

impl MonotonicityReport {
    /// Removing any shared client never lowers the expectation (up to
    /// rounding in the enumerated sums).
    pub fn holds(&self) -> bool {
        self.reduced_ln
            .iter()
            .all(|&r| r >= self.full_ln - 1e-12 * self.full_ln.abs() - 1e-14)
    }

    /// Clients whose removal left the expectation exactly unchanged.
    pub fn non_strict(&self) -> usize {
        self.reduced_ln.iter().filter(|&&r| r <= self.full_ln).count()
    }
}

fn ln_expectation_for(
    mech: &DiscreteMechanism,
    dataset: &[usize],
    neighbor: &[usize],
    lambda: f64,
) -> Result<f64, OracleError> {
    let bins = mech.bins();
    let p = shuffle_rows(dataset.iter().map(|&d| mech.row(d)), bins);
    let q = shuffle_rows(neighbor.iter().map(|&d| mech.row(d)), bins);
    ln_power_expectation(&p, &q, lambda)
}

/// Removing one of the first `n - 1` (shared) clients from both datasets.
pub fn monotonicity_check(
    mech: &DiscreteMechanism,
    dataset: &[usize],
    neighbor: &[usize],
    lambda: f64,
) -> Result<MonotonicityReport, OracleError> {
    let n = check_neighbors(mech, dataset, neighbor, MAX_MONOTONICITY_CLIENTS)?;
    let full_ln = ln_expectation_for(mech, dataset, neighbor, lambda)?;
    let reduced_ln = (0..n - 1)
        .map(|i| {
            let drop = |v: &[usize]| -> Vec<usize> {
                v.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &d)| d)
                    .collect()
            };
            ln_expectation_for(mech, &drop(dataset), &drop(neighbor), lambda)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MonotonicityReport { full_ln, reduced_ln })
}

/// `E_m` for `m = 0..=m_max`: the order-`lambda` power expectation between
/// `m` clients with row `base` plus one with row `other`, and `m + 1`
/// clients with row `base`.
pub fn e_m_sequence(base: &[f64], other: &[f64], lambda: f64, m_max: u32) -> Result<Vec<f64>, OracleError> {
    (0..=m_max)
        .map(|m| special_case_ln_expectation(m + 1, base, other, lambda).map(Float::exp))
        .collect()
}

/// Both sides of the reduction to special neighbouring datasets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionReport {
    /// `E_{F(D')}[(F(D)/F(D'))^lambda]`.
    pub full: f64,
    /// `E_{m ~ Bin(n-1, e^{-eps0})}[E_m]` with base row `p'_n`, other row `p_n`.
    pub bound: f64,
}

impl ReductionReport {
    pub fn holds(&self) -> bool {
        self.full <= self.bound * (1.0 + 1e-12)
    }
}

/// Enumerates both sides of the reduction inequality exactly.
pub fn reduction_check(
    mech: &DiscreteMechanism,
    dataset: &[usize],
    neighbor: &[usize],
    lambda: f64,
) -> Result<ReductionReport, OracleError> {
    let n = check_neighbors(mech, dataset, neighbor, MAX_MIXTURE_CLIENTS)?;
    let full = ln_expectation_for(mech, dataset, neighbor, lambda)?.exp();
    let base = mech.row(neighbor[n - 1]);
    let other = mech.row(dataset[n - 1]);
    let e_m = e_m_sequence(base, other, lambda, n as u32 - 1)?;
    let q = (-mech.eps0()).exp();
    let mut bound = NeumaierSum::new();
    for (m, lp) in BinomialLogPmf::full(n as u64 - 1, q).iter() {
        bound.add(lp.exp() * e_m[m as usize]);
    }
    Ok(ReductionReport {
        full,
        bound: bound.total(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mixture_trivial_and_rr() {
        let rr = DiscreteMechanism::binary_rr(1.0).unwrap();
        assert!(mixture_decomposition_check(&rr, &[0], &[1], 0.0).unwrap());
        assert!(mixture_decomposition_check(&rr, &[0, 1, 0], &[0, 1, 1], 1e-12).unwrap());
        assert!(mixture_decomposition_error(&rr, &[0, 1], &[1, 1]).is_err());
    }

    #[test]
    fn mixture_random_mechanisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let eps0 = rng.gen_range(0.1..2.5);
            let mech = DiscreteMechanism::random(&mut rng, 3, 3, eps0).unwrap();
            let err = mixture_decomposition_error(&mech, &[0, 1, 2, 0], &[0, 1, 2, 1]).unwrap();
            assert!(err < 1e-11, "{err}");
        }
    }

    #[test]
    fn mixture_at_tight_eps0() {
        let rows = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
        let honest = DiscreteMechanism::new(rows, 9f64.ln()).unwrap();
        assert!(mixture_decomposition_error(&honest, &[0, 0], &[0, 1]).is_ok());
    }

    #[test]
    fn moment_examples() {
        let r = moment_identities_check(1.0, 4, &[0.5, 0.5], &[0.6, 0.4], 8).unwrap();
        assert!((r.expected_variance - 0.16).abs() < 1e-15);
        assert!((r.variance - 0.16).abs() < 1e-15);
        assert!(r.holds());
        let same = moment_identities_check(1.0, 5, &[0.2, 0.8], &[0.2, 0.8], 6).unwrap();
        assert_eq!(same.variance, 0.0);
        assert!(same.absolute_moments.iter().all(|&(_, m, _)| m == 0.0));
        assert!(same.holds());
    }

    #[test]
    fn supremum_vertex() {
        assert_eq!(sup_variance_vertex(0.0), 0.0);
        let e = 1f64.exp();
        assert!((sup_variance_vertex(1.0) - (e - 1.0).powi(2) / e).abs() < 1e-15);
        assert!((sup_variance_vertex(1.0) - 1.0861).abs() < 1e-4);
        let (p, pp) = two_bin_vertex(1.0);
        assert!(in_tilde_set(&p, &pp, 1.0));
        assert!((variance_functional(&p, &pp) - sup_variance_vertex(1.0)).abs() < 1e-12);
    }

    #[test]
    fn random_pairs_stay_below_supremum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for eps0 in [0.1, 1.0, 3.0] {
            let sup = sup_variance_vertex(eps0);
            for _ in 0..200 {
                let (p, pp) = random_feasible_pair(&mut rng, 4, eps0);
                assert!(variance_functional(&p, &pp) <= sup + 1e-12);
                if let Some((p, pp)) = random_vertex(&mut rng, 3, eps0) {
                    assert!(variance_functional(&p, &pp) <= sup + 1e-12);
                }
            }
        }
    }

    #[test]
    fn monotonicity_examples() {
        let flat = DiscreteMechanism::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]], 0.0).unwrap();
        let r = monotonicity_check(&flat, &[0, 1, 0], &[0, 1, 1], 3.0).unwrap();
        assert_eq!(r.full_ln, 0.0);
        assert!(r.holds());
        assert_eq!(r.non_strict(), 2);

        let rr = DiscreteMechanism::binary_rr(1.0).unwrap();
        let r = monotonicity_check(&rr, &[0, 1, 0, 0, 0], &[0, 1, 0, 0, 1], 3.0).unwrap();
        assert_eq!(r.reduced_ln.len(), 4);
        assert!(r.holds());
    }

    #[test]
    fn e_m_is_nonincreasing() {
        let (p, pp) = two_bin_vertex(1.0);
        let seq = e_m_sequence(&pp, &p, 3.0, 6).unwrap();
        assert!(seq.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{seq:?}");
    }

    #[test]
    fn reduction_holds_for_rr() {
        let rr = DiscreteMechanism::binary_rr(1.5).unwrap();
        let r = reduction_check(&rr, &[0, 1, 1, 0], &[0, 1, 1, 1], 3.0).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.full >= 1.0);
    }

}
