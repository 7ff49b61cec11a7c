use alloc::vec::Vec;

#[allow(unused_imports)] // unused when std is linked and its inherent methods take over
use num_traits::Float;
use rand::Rng;

use super::OracleError;

/// Slack allowed when checking that rows sum to one.
const ROW_SUM_TOL: f64 = 1e-12;

/// A finite-range local randomizer: `rows[d][j]` is the probability that
/// input `d` is reported as bin `j`.
///
/// Rows must be strictly positive. Any finite `eps0` forbids one-sided zeros,
/// and strict positivity keeps every likelihood ratio well defined.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMechanism {
    rows: Vec<Vec<f64>>,
    eps0: f64,
}

impl DiscreteMechanism {
    /// Validates the rows and checks they are `eps0`-LDP.
    pub fn new(rows: Vec<Vec<f64>>, eps0: f64) -> Result<Self, OracleError> {
        let bins = rows.first().map_or(0, Vec::len);
        if bins == 0 {
            return Err(OracleError::InvalidMechanism("need at least one input and one bin"));
        }
        if rows.iter().any(|r| r.len() != bins) {
            return Err(OracleError::InvalidMechanism("rows differ in length"));
        }
        if rows.iter().flatten().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(OracleError::InvalidMechanism("entries must be finite and > 0"));
        }
        if rows
            .iter()
            .any(|r| (r.iter().sum::<f64>() - 1.0).abs() > ROW_SUM_TOL)
        {
            return Err(OracleError::InvalidMechanism("rows must sum to 1"));
        }
        if !(eps0.is_finite() && eps0 >= 0.0) {
            return Err(OracleError::InvalidMechanism("eps0 must be finite and >= 0"));
        }
        let mech = Self { rows, eps0 };
        if mech.ldp_epsilon() > eps0 + 1e-12 {
            return Err(OracleError::NotLdp {
                declared: eps0,
                actual: mech.ldp_epsilon(),
            });
        }
        Ok(mech)
    }

    /// Binary randomized response: report the true bit with probability
    /// `e^eps0 / (e^eps0 + 1)`.
    pub fn binary_rr(eps0: f64) -> Result<Self, OracleError> {
        let flip = 1.0 / (eps0.exp() + 1.0);
        let keep = 1.0 - flip;
        Self::new(alloc::vec![alloc::vec![keep, flip], alloc::vec![flip, keep]], eps0)
    }

    /// A random strictly positive `eps0`-LDP mechanism.
    ///
    /// A flat Dirichlet base row is perturbed multiplicatively per input and
    /// renormalised; draws that miss `eps0` (less a 1e-9 slack) are rejected.
    /// Half of the draws push perturbations to the edge of the allowed range
    /// so that nearly tight mechanisms are well represented. Draws where two
    /// inputs end up (nearly) indistinguishable are rejected too, since they
    /// make every divergence trivially zero.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        inputs: usize,
        bins: usize,
        eps0: f64,
    ) -> Result<Self, OracleError> {
        if inputs == 0 || bins == 0 {
            return Err(OracleError::InvalidMechanism("need at least one input and one bin"));
        }
        let target = (eps0 - 1e-9).max(0.0);
        loop {
            let base = random_simplex(rng, bins);
            let extreme = rng.gen_bool(0.5);
            let rows: Vec<Vec<f64>> = (0..inputs)
                .map(|_| {
                    let row: Vec<f64> = base
                        .iter()
                        .map(|&b| {
                            let u: f64 = if extreme {
                                if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
                            } else {
                                rng.gen_range(-1.0..=1.0)
                            };
                            b * (0.5 * target * u).exp()
                        })
                        .collect();
                    let z: f64 = row.iter().sum();
                    row.into_iter().map(|x| x / z).collect()
                })
                .collect();
            if let Ok(m) = Self::new(rows, eps0) {
                if m.ldp_epsilon() <= target && m.min_pairwise_epsilon() >= 0.05 * target {
                    return Ok(m);
                }
            }
        }
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn bins(&self) -> usize {
        self.rows[0].len()
    }

    /// Declared LDP parameter.
    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.rows[input]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Smallest `eps` for which the rows are `eps`-LDP.
    pub fn ldp_epsilon(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.bins() {
            let (lo, hi) = self
                .rows
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r[j]), hi.max(r[j])));
            worst = worst.max(hi.ln() - lo.ln());
        }
        worst
    }

    /// Smallest LDP distance between two distinct inputs; 0 for a single input.
    pub fn min_pairwise_epsilon(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.rows.iter().enumerate() {
            for b in &self.rows[i + 1..] {
                let d = a
                    .iter()
                    .zip(b)
                    .fold(0.0f64, |acc, (&x, &y)| acc.max((x.ln() - y.ln()).abs()));
                best = best.min(d);
            }
        }
        if best.is_finite() { best } else { 0.0 }
    }

    pub(crate) fn check_dataset(&self, dataset: &[usize]) -> Result<(), OracleError> {
        if dataset.iter().any(|&d| d >= self.inputs()) {
            return Err(OracleError::InvalidInput("dataset symbol out of range"));
        }
        Ok(())
    }
}

/// Uniform draw from the probability simplex (flat Dirichlet), kept away
/// from zero.
pub(crate) fn random_simplex<R: Rng + ?Sized>(rng: &mut R, bins: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..bins)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-3)
        .collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / z).collect()
}
