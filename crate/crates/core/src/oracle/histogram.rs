use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // unused when std is linked and its inherent methods take over
use num_traits::Float;

use super::{DiscreteMechanism, OracleError, MAX_ENUMERATED_CLIENTS, MAX_HISTOGRAMS};
use crate::numerics::{ln_binomial, ln_gamma};

/// Counts per bin of the shuffled reports.
///
/// Ordered colexicographically: the last bin is most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Histogram(Vec<u32>);

impl Histogram {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn zero(bins: usize) -> Self {
        Self(vec![0; bins])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    fn incremented(&self, bin: usize) -> Self {
        let mut c = self.0.clone();
        c[bin] += 1;
        Self(c)
    }
}

impl Ord for Histogram {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .iter()
            .rev()
            .cmp(other.0.iter().rev())
            .then(self.0.len().cmp(&other.0.len()))
    }
}

impl PartialOrd for Histogram {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Number of histograms with `bins` bins summing to `n`, i.e. `C(n+B-1, B-1)`.
pub fn histogram_count(n: u32, bins: usize) -> f64 {
    if bins == 0 {
        return 0.0;
    }
    ln_binomial(u64::from(n) + bins as u64 - 1, bins as u64 - 1)
        .to_linear()
        .round()
}

/// Every histogram of `n` items over `bins` bins, in colexicographic order.
pub fn enumerate_histograms(n: u32, bins: usize) -> Result<Vec<Histogram>, OracleError> {
    if bins == 0 {
        return Err(OracleError::InvalidInput("need at least one bin"));
    }
    if histogram_count(n, bins) > MAX_HISTOGRAMS as f64 {
        return Err(OracleError::BudgetExceeded("histogram count above enumeration budget"));
    }
    let mut out = Vec::new();
    let mut counts = vec![0u32; bins];
    fill(&mut counts, bins, n, &mut out);
    Ok(out)
}

// Fixes bins from the most significant (last) down, smallest value first.
fn fill(counts: &mut [u32], upto: usize, remaining: u32, out: &mut Vec<Histogram>) {
    if upto == 1 {
        counts[0] = remaining;
        out.push(Histogram(counts.to_vec()));
        return;
    }
    for c in 0..=remaining {
        counts[upto - 1] = c;
        fill(counts, upto - 1, remaining - c, out);
    }
    counts[upto - 1] = 0;
}

/// An exact probability mass function over histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramDistribution {
    n: u32,
    bins: usize,
    mass: BTreeMap<Histogram, f64>,
}

impl HistogramDistribution {
    pub fn point(bins: usize) -> Self {
        let mut mass = BTreeMap::new();
        mass.insert(Histogram::zero(bins), 1.0);
        Self { n: 0, bins, mass }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn mass(&self, h: &Histogram) -> f64 {
        self.mass.get(h).copied().unwrap_or(0.0)
    }

    /// `(histogram, probability)` in colexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Histogram, f64)> + '_ {
        self.mass.iter().map(|(h, &m)| (h, m))
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.values().sum()
    }

    /// Adds one more client reporting according to `row`.
    pub fn convolve(&self, row: &[f64]) -> Self {
        let mut mass = BTreeMap::new();
        for (h, &m) in &self.mass {
            for (j, &r) in row.iter().enumerate() {
                *mass.entry(h.incremented(j)).or_insert(0.0) += m * r;
            }
        }
        Self {
            n: self.n + 1,
            bins: self.bins,
            mass,
        }
    }
}

/// Exact distribution of the shuffled histogram for `dataset`, built by
/// folding in one client at a time.
pub fn shuffle_dist(
    mech: &DiscreteMechanism,
    dataset: &[usize],
) -> Result<HistogramDistribution, OracleError> {
    mech.check_dataset(dataset)?;
    check_budget(dataset.len(), mech.bins())?;
    Ok(shuffle_rows(dataset.iter().map(|&d| mech.row(d)), mech.bins()))
}

pub(crate) fn check_budget(n: usize, bins: usize) -> Result<(), OracleError> {
    if n > MAX_ENUMERATED_CLIENTS {
        return Err(OracleError::BudgetExceeded("too many clients to enumerate"));
    }
    if histogram_count(n as u32, bins) > MAX_HISTOGRAMS as f64 {
        return Err(OracleError::BudgetExceeded("histogram count above enumeration budget"));
    }
    Ok(())
}

pub(crate) fn shuffle_rows<'a, I>(rows: I, bins: usize) -> HistogramDistribution
where
    I: IntoIterator<Item = &'a [f64]>,
{
    rows.into_iter()
        .fold(HistogramDistribution::point(bins), |acc, row| acc.convolve(row))
}

/// `ln MN(m, p)(h)` from the multinomial formula.
pub fn ln_multinomial_pmf(p: &[f64], h: &Histogram) -> f64 {
    let m = f64::from(h.total());
    let mut acc = ln_gamma(m + 1.0).expect("m + 1 > 0");
    for (&c, &pj) in h.counts().iter().zip(p) {
        if c > 0 {
            acc += f64::from(c) * pj.ln() - ln_gamma(f64::from(c) + 1.0).expect("c + 1 > 0");
        }
    }
    acc
}
