//! Pairs needing exactly `n` steps, generated backwards from `1/1` as
//! compositions of the inverse branches and checked against brute force.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedMul, One};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcd::{binary_gcd_trace, Branch, CostFunction, CostTable};

/// Inverse branch family: `G_k(z) = 1/(1 + 2^k z)` undoes an exchange step,
/// `D_k(z) = z/(z + 2^k)` undoes a step without exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    G,
    D,
}

impl Family {
    pub fn branch(self) -> Branch {
        match self {
            Family::G => Branch::Exchange,
            Family::D => Branch::NoExchange,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub family: Family,
    pub k: u32,
}

impl Letter {
    /// Integer matrix `[[a, b], [c, d]]` of `z ↦ (az + b)/(cz + d)`.
    pub fn matrix(self) -> [[i128; 2]; 2] {
        let p = 1i128 << self.k;
        match self.family {
            Family::G => [[0, 1], [p, 1]],
            Family::D => [[1, 0], [1, p]],
        }
    }

    pub fn determinant(self) -> i128 {
        let m = self.matrix();
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Image of the fraction `p/q` (numerator, denominator).
    pub fn apply(self, p: u64, q: u64) -> Option<(u64, u64)> {
        let shifted = |x: u64| x.checked_mul(1u64.checked_shl(self.k)?);
        match self.family {
            Family::G => Some((q, q.checked_add(shifted(p)?)?)),
            Family::D => Some((p, p.checked_add(shifted(q)?)?)),
        }
    }

    /// `h'(z)` at a rational point.
    fn derivative(self, z: Ratio<i128>) -> Option<Ratio<i128>> {
        let [_, [c, d]] = self.matrix();
        let den = z.checked_mul(&Ratio::from_integer(c))? + Ratio::from_integer(d);
        let den_sq = den.checked_mul(&den)?;
        Some(Ratio::from_integer(self.determinant()) / den_sq)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.k)
    }
}

/// `h_n ∘ ⋯ ∘ h_1`, stored innermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchWord {
    letters: Vec<Letter>,
}

impl BranchWord {
    /// Validates that the innermost letter belongs to the `D` family.
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        match letters.first() {
            Some(l) if l.family == Family::D => Ok(BranchWord { letters }),
            Some(_) => Err(Error::Domain("the innermost branch must be of family D".into())),
            None => Err(Error::Domain("empty branch word".into())),
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The fraction reached from `1/1`.
    pub fn evaluate_at_one(&self) -> Result<(u64, u64)> {
        self.letters
            .iter()
            .try_fold((1u64, 1u64), |(p, q), l| l.apply(p, q))
            .ok_or_else(|| Error::Overflow("branch word image".into()))
    }

    /// Product matrix `M_n ⋯ M_1`.
    pub fn matrix(&self) -> Result<[[i128; 2]; 2]> {
        let mut acc = [[1i128, 0], [0, 1]];
        for l in &self.letters {
            let m = l.matrix();
            let mut next = [[0i128; 2]; 2];
            for (i, row) in next.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    let x = m[i][0].checked_mul(acc[0][j]);
                    let y = m[i][1].checked_mul(acc[1][j]);
                    *cell = x
                        .zip(y)
                        .and_then(|(x, y)| x.checked_add(y))
                        .ok_or_else(|| Error::Overflow("branch word matrix".into()))?;
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    pub fn determinant_product(&self) -> i128 {
        self.letters.iter().map(|l| l.determinant()).product()
    }

    /// Derivative of the composition at `1` by the chain rule, exactly.
    pub fn derivative_at_one(&self) -> Result<Ratio<i128>> {
        let overflow = || Error::Overflow("branch word derivative".into());
        let mut z = Ratio::one();
        let mut deriv = Ratio::one();
        for l in &self.letters {
            deriv = deriv.checked_mul(&l.derivative(z).ok_or_else(overflow)?).ok_or_else(overflow)?;
            let [[a, b], [c, d]] = l.matrix();
            let num = z.checked_mul(&Ratio::from_integer(a)).ok_or_else(overflow)? + Ratio::from_integer(b);
            let den = z.checked_mul(&Ratio::from_integer(c)).ok_or_else(overflow)? + Ratio::from_integer(d);
            z = num / den;
        }
        Ok(deriv)
    }

    pub fn cost(&self, table: &CostTable) -> f64 {
        self.letters.iter().map(|l| table.get(l.family.branch(), l.k)).sum()
    }
}

impl fmt::Display for BranchWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().rev().enumerate() {
            if i > 0 {
                write!(f, "∘")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaEntry {
    pub u: u64,
    pub v: u64,
    pub cost: f64,
    pub word: BranchWord,
}

/// All pairs of `Θ_n` with `v <= v_max`, sorted by `v` then `u`.
///
/// Denominators grow strictly with every letter and with `k`, so each
/// extension stops at the first `k` whose image leaves the bound.
pub fn theta_enumerate(n_steps: usize, v_max: u64, cost: &CostFunction) -> Result<Vec<ThetaEntry>> {
    if n_steps == 0 {
        return Err(Error::Domain("step count must be at least 1".into()));
    }
    if v_max < 3 {
        return Err(Error::Domain("v_max must be at least 3".into()));
    }
    let table = cost.table()?;
    let levels = theta_levels(n_steps, v_max)?;
    let mut out: Vec<ThetaEntry> = levels
        .into_iter()
        .last()
        .unwrap_or_default()
        .into_iter()
        .map(|(u, v, letters)| {
            let word = BranchWord { letters };
            ThetaEntry { u, v, cost: word.cost(&table), word }
        })
        .collect();
    out.sort_by_key(|e| (e.v, e.u));
    Ok(out)
}

type Node = (u64, u64, Vec<Letter>);

fn theta_levels(n_steps: usize, v_max: u64) -> Result<Vec<Vec<Node>>> {
    let mut levels: Vec<Vec<Node>> = Vec::with_capacity(n_steps);
    let mut frontier: Vec<Node> = vec![(1, 1, Vec::new())];
    for depth in 1..=n_steps {
        let families: &[Family] = if depth == 1 { &[Family::D] } else { &[Family::G, Family::D] };
        let mut next = Vec::new();
        for (p, q, word) in &frontier {
            for &family in families {
                for k in 1..64 {
                    let letter = Letter { family, k };
                    match letter.apply(*p, *q) {
                        Some((np, nq)) if nq <= v_max => {
                            let mut w = word.clone();
                            w.push(letter);
                            next.push((np, nq, w));
                        }
                        _ => break,
                    }
                }
            }
        }
        levels.push(next.clone());
        frontier = next;
    }
    Ok(levels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaMismatch {
    pub n: usize,
    pub u: u64,
    pub v: u64,
    pub kind: String,
    pub detail: String,
}

/// JSON shape: `{n, v_max, status, mismatches}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub n: usize,
    pub v_max: u64,
    pub status: String,
    pub mismatches: Vec<ThetaMismatch>,
}

impl ThetaReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares the branch-word enumeration with the step counts of every odd
/// coprime pair `u < v <= v_max`, for each `n <= n_max`, including costs,
/// uniqueness of the word and the exact derivative identity
/// `(h_n ∘ ⋯ ∘ h_1)'(1) = Π det(h_i) / v²`.
pub fn verify_theta(n_max: usize, v_max: u64, cost: &CostFunction) -> Result<ThetaReport> {
    if v_max < 3 {
        return Err(Error::Domain("v_max must be at least 3".into()));
    }
    let table = cost.table()?;
    let mut brute: BTreeMap<(usize, u64, u64), f64> = BTreeMap::new();
    for v in (3..=v_max).step_by(2) {
        for u in (1..v).step_by(2) {
            let trace = binary_gcd_trace(u, v)?;
            if trace.gcd() != 1 || trace.steps().len() > n_max {
                continue;
            }
            let c: f64 = trace.steps().iter().map(|s| table.get(s.branch, s.k)).sum();
            brute.insert((trace.steps().len(), u, v), c);
        }
    }

    let mut mismatches = Vec::new();
    let mut push = |n: usize, u: u64, v: u64, kind: &str, detail: String| {
        mismatches.push(ThetaMismatch { n, u, v, kind: kind.into(), detail });
    };
    let levels = if n_max == 0 { Vec::new() } else { theta_levels(n_max, v_max)? };
    let mut seen: BTreeMap<(usize, u64, u64), f64> = BTreeMap::new();
    for (i, level) in levels.into_iter().enumerate() {
        let n = i + 1;
        for (u, v, letters) in level {
            let word = BranchWord { letters };
            let c = word.cost(&table);
            if seen.insert((n, u, v), c).is_some() {
                push(n, u, v, "duplicate", format!("second word {word}"));
                continue;
            }
            match brute.get(&(n, u, v)) {
                None => push(n, u, v, "extra", format!("word {word} not confirmed by forward run")),
                Some(&b) if b != c => push(n, u, v, "cost", format!("word cost {c} vs forward cost {b}")),
                Some(_) => {}
            }
            let [[a, b], [cc, d]] = word.matrix()?;
            if (a + b, cc + d) != (i128::from(u), i128::from(v)) {
                push(n, u, v, "matrix", format!("matrix image ({}, {}) is not in lowest terms", a + b, cc + d));
            }
            let deriv = word.derivative_at_one()?;
            let v2 = i128::from(v) * i128::from(v);
            if deriv != Ratio::new(word.determinant_product(), v2) {
                push(n, u, v, "determinant", format!("derivative {deriv} vs {}/{v2}", word.determinant_product()));
            }
        }
    }
    for (&(n, u, v), _) in brute.iter().filter(|(key, _)| key.0 >= 1) {
        if !seen.contains_key(&(n, u, v)) {
            push(n, u, v, "missing", "forward run has no matching word".into());
        }
    }
    let status = if mismatches.is_empty() { "pass" } else { "fail" }.to_string();
    Ok(ThetaReport { n: n_max, v_max, status, mismatches })
}
