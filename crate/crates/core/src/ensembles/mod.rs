//! The four input ensembles `Ξ^(i)_n`, their exact censuses, cost
//! statistics over them, and the branch-word description of the sets of
//! pairs that need exactly `n` steps.

mod stats;
mod theta;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcd::binary_gcd;

pub use stats::{
    geometric_ladder, mean_cost, mean_cost_sampled, slope_fit, sweep, EnsembleStats, SampledStats, SlopeFit, StatsRow,
    SweepResult,
};
pub use theta::{theta_enumerate, verify_theta, BranchWord, Family, Letter, ThetaEntry, ThetaMismatch, ThetaReport};

/// Which pairs `1 <= u < v <= n` belong to an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum EnsembleId {
    /// `Ξ^(1)`: both odd, coprime.
    OddCoprime = 1,
    /// `Ξ^(2)`: both odd.
    Odd = 2,
    /// `Ξ^(3)`: coprime.
    Coprime = 3,
    /// `Ξ^(4)`: unrestricted.
    All = 4,
}

impl EnsembleId {
    pub const ALL: [EnsembleId; 4] = [EnsembleId::OddCoprime, EnsembleId::Odd, EnsembleId::Coprime, EnsembleId::All];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(EnsembleId::OddCoprime),
            2 => Ok(EnsembleId::Odd),
            3 => Ok(EnsembleId::Coprime),
            4 => Ok(EnsembleId::All),
            other => Err(Error::Domain(format!("ensemble index must be 1..=4, got {other}"))),
        }
    }

    pub fn requires_odd(self) -> bool {
        matches!(self, EnsembleId::OddCoprime | EnsembleId::Odd)
    }

    pub fn requires_coprime(self) -> bool {
        matches!(self, EnsembleId::OddCoprime | EnsembleId::Coprime)
    }

    /// Limit of `count(Ξ^(i)_n)/n²`.
    pub fn density_limit(self) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        match self {
            EnsembleId::OddCoprime => 1.0 / pi2,
            EnsembleId::Odd => 0.125,
            EnsembleId::Coprime => 3.0 / pi2,
            EnsembleId::All => 0.5,
        }
    }

    /// Membership of `(u, v)` (assumes `1 <= u < v`).
    pub fn contains(self, u: u64, v: u64) -> bool {
        if self.requires_odd() && (u % 2 == 0 || v % 2 == 0) {
            return false;
        }
        !self.requires_coprime() || coprime(u, v)
    }

    /// Flags-based membership used by the sweeps.
    #[inline]
    pub(crate) fn admits(self, both_odd: bool, is_coprime: bool) -> bool {
        (!self.requires_odd() || both_odd) && (!self.requires_coprime() || is_coprime)
    }
}

impl From<EnsembleId> for u8 {
    fn from(id: EnsembleId) -> u8 {
        id.index()
    }
}

impl TryFrom<u8> for EnsembleId {
    type Error = Error;

    fn try_from(i: u8) -> Result<Self> {
        EnsembleId::from_index(i)
    }
}

impl fmt::Display for EnsembleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl FromStr for EnsembleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "odd-coprime" => Ok(EnsembleId::OddCoprime),
            "2" | "odd" => Ok(EnsembleId::Odd),
            "3" | "coprime" => Ok(EnsembleId::Coprime),
            "4" | "all" => Ok(EnsembleId::All),
            other => Err(Error::Parse(format!("unknown ensemble `{other}`"))),
        }
    }
}

/// Coprimality through the binary algorithm itself.
pub(crate) fn coprime(u: u64, v: u64) -> bool {
    let g = binary_gcd(u, v).expect("positive inputs");
    debug_assert_eq!(g, num_integer::gcd(u, v));
    g == 1
}

/// All pairs of an ensemble with `v <= n`, ordered by `v` then `u`.
pub fn enumerate_pairs(id: EnsembleId, n: u64) -> impl Iterator<Item = (u64, u64)> {
    let odd = id.requires_odd();
    let step = if odd { 2 } else { 1 };
    let first_v = if odd { 3 } else { 2 };
    (first_v..=n)
        .step_by(step)
        .flat_map(move |v| (1..v).step_by(step).map(move |u| (u, v)))
        .filter(move |&(u, v)| !id.requires_coprime() || coprime(u, v))
}

/// Exact size of `Ξ^(i)_n` and its ratio to `n²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub ensemble: EnsembleId,
    pub n: u64,
    pub count: u64,
    pub ratio: f64,
}

/// Euler's totient for `0..=n` by a linear-time sieve.
pub fn totients(n: usize) -> Vec<u32> {
    let mut phi: Vec<u32> = (0..=n as u32).collect();
    for p in 2..=n {
        if phi[p] == p as u32 {
            for m in (p..=n).step_by(p) {
                phi[m] -= phi[m] / p as u32;
            }
        }
    }
    phi
}

/// Counts `Ξ^(i)_n` exactly.
///
/// The unrestricted and odd ensembles have closed forms. The coprime ones
/// sum totients: for odd `v > 1` exactly half of the residues coprime to
/// `v` are odd, since `u ↦ v − u` swaps parity.
pub fn ensemble_census(id: EnsembleId, n: u64) -> Result<Census> {
    if n == 0 {
        return Err(Error::Domain("census bound must be at least 1".into()));
    }
    let count = match id {
        EnsembleId::All => n * (n - 1) / 2,
        EnsembleId::Odd => {
            let m = n.div_ceil(2);
            m * (m - 1) / 2
        }
        EnsembleId::Coprime | EnsembleId::OddCoprime => {
            let limit = usize::try_from(n).map_err(|_| Error::TooLarge(n))?;
            let phi = totients(limit);
            if id == EnsembleId::Coprime {
                phi.iter().skip(2).map(|&p| u64::from(p)).sum()
            } else {
                phi.iter().skip(3).step_by(2).map(|&p| u64::from(p) / 2).sum()
            }
        }
    };
    Ok(Census { ensemble: id, n, count, ratio: count as f64 / (n as f64 * n as f64) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_examples() {
        let got: Vec<_> = enumerate_pairs(EnsembleId::OddCoprime, 5).collect();
        assert_eq!(got, vec![(1, 3), (1, 5), (3, 5)]);
        assert_eq!(enumerate_pairs(EnsembleId::Odd, 9).count(), 10);
        assert_eq!(enumerate_pairs(EnsembleId::All, 2).collect::<Vec<_>>(), vec![(1, 2)]);
        assert_eq!(enumerate_pairs(EnsembleId::All, 1).count(), 0);
    }

    #[test]
    fn enumeration_is_ordered_and_filtered() {
        for id in EnsembleId::ALL {
            let pairs: Vec<_> = enumerate_pairs(id, 60).collect();
            assert!(pairs.windows(2).all(|w| (w[0].1, w[0].0) < (w[1].1, w[1].0)));
            for v in 2..=60u64 {
                for u in 1..v {
                    assert_eq!(pairs.contains(&(u, v)), id.contains(u, v), "{id} ({u},{v})");
                }
            }
        }
    }

    #[test]
    fn census_examples() {
        assert_eq!(ensemble_census(EnsembleId::OddCoprime, 10).unwrap().count, 9);
        let c = ensemble_census(EnsembleId::Odd, 10).unwrap();
        assert_eq!(c.count, 10);
        assert!((c.ratio - 0.10).abs() < 1e-15);
        for n in [1u64, 2, 7, 100, 1001] {
            assert_eq!(ensemble_census(EnsembleId::All, n).unwrap().count, n * (n - 1) / 2);
        }
        assert!(ensemble_census(EnsembleId::All, 0).is_err());
    }

    #[test]
    fn census_matches_enumeration() {
        for id in EnsembleId::ALL {
            for n in [1u64, 2, 3, 10, 33, 200] {
                let brute = enumerate_pairs(id, n).count() as u64;
                assert_eq!(ensemble_census(id, n).unwrap().count, brute, "{id} n={n}");
            }
        }
    }

    #[test]
    fn totient_small_values() {
        assert_eq!(&totients(12)[1..], &[1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4]);
    }

    #[test]
    fn ensemble_parsing() {
        assert_eq!("2".parse::<EnsembleId>().unwrap(), EnsembleId::Odd);
        assert_eq!("odd-coprime".parse::<EnsembleId>().unwrap(), EnsembleId::OddCoprime);
        assert!("5".parse::<EnsembleId>().is_err());
    }
}
