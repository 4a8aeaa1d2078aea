//! Exact information quantities over explicit finite joint distributions.
//!
//! This is the known-distribution setting: every query is answered from the
//! probability table, so it doubles as the correctness yardstick for the
//! sample-based paths.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{check_parts, disjoint, Partition};

/// Default cap on the number of entries of the product alphabet.
pub const DEFAULT_CAPACITY: usize = 1 << 24;

/// Largest `N` accepted by [`brute_force_finest`].
pub const BRUTE_FORCE_MAX_VARS: usize = 10;

/// Tolerance below which an exact information value counts as zero (bits).
pub const ZERO_TOLERANCE: f64 = 1e-9;

/// Joint probability table over `N` finite-valued variables.
///
/// The table is stored row-major: the last variable varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteJoint {
    sizes: Vec<usize>,
    pmf: Vec<f64>,
}

impl FiniteJoint {
    pub fn new(sizes: Vec<usize>, pmf: Vec<f64>) -> Result<Self> {
        Self::with_capacity(sizes, pmf, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(sizes: Vec<usize>, pmf: Vec<f64>, capacity: usize) -> Result<Self> {
        let total = table_size(&sizes, capacity)?;
        if pmf.len() != total {
            return Err(Error::validation(format!(
                "probability table has {} entries, expected {}",
                pmf.len(),
                total
            )));
        }
        if let Some(p) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::validation(format!("invalid probability {p}")));
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { sizes, pmf })
    }

    /// Builds a table from sparse `(outcome, probability)` pairs; missing outcomes get 0.
    pub fn from_outcomes(sizes: Vec<usize>, outcomes: &[(Vec<usize>, f64)]) -> Result<Self> {
        let total = table_size(&sizes, DEFAULT_CAPACITY)?;
        let mut pmf = vec![0.0; total];
        let mut seen = vec![false; total];
        for (outcome, p) in outcomes {
            let idx = flat_index(&sizes, outcome)?;
            if seen[idx] {
                return Err(Error::validation(format!("outcome {outcome:?} listed twice")));
            }
            seen[idx] = true;
            pmf[idx] = *p;
        }
        Self::new(sizes, pmf)
    }

    /// Number of variables, `N`.
    pub fn vars(&self) -> usize {
        self.sizes.len()
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Probability of a full outcome tuple.
    pub fn probability(&self, outcome: &[usize]) -> Result<f64> {
        Ok(self.pmf[flat_index(&self.sizes, outcome)?])
    }

    /// Iterates `(outcome, probability)` over every cell with positive mass.
    pub fn support(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(move |(idx, &p)| (unflatten(&self.sizes, idx), p))
    }

    /// Marginal table over `subset` (in the given order).
    pub fn marginal(&self, subset: &[usize]) -> Result<FiniteJoint> {
        self.check_indices(subset)?;
        let sizes: Vec<usize> = subset.iter().map(|&i| self.sizes[i]).collect();
        let pmf = self.marginal_table(subset);
        Ok(FiniteJoint { sizes, pmf })
    }

    fn marginal_table(&self, subset: &[usize]) -> Vec<f64> {
        let n = self.vars();
        let mut mstride = vec![0usize; n];
        let mut stride = 1usize;
        for &v in subset.iter().rev() {
            mstride[v] = stride;
            stride *= self.sizes[v];
        }
        let mut out = vec![0.0; stride];
        let mut digits = vec![0usize; n];
        let mut midx = 0usize;
        for &p in &self.pmf {
            out[midx] += p;
            // odometer step, last variable fastest
            for v in (0..n).rev() {
                digits[v] += 1;
                midx += mstride[v];
                if digits[v] < self.sizes[v] {
                    break;
                }
                midx -= mstride[v] * digits[v];
                digits[v] = 0;
            }
        }
        out
    }

    fn check_indices(&self, set: &[usize]) -> Result<()> {
        for (k, &i) in set.iter().enumerate() {
            if i >= self.vars() {
                return Err(Error::validation(format!(
                    "variable {i} out of range 0..{}",
                    self.vars()
                )));
            }
            if set[..k].contains(&i) {
                return Err(Error::validation(format!("variable {i} repeated")));
            }
        }
        Ok(())
    }

    /// Shannon entropy in bits of the marginal on `subset`; the empty set has entropy 0.
    pub fn entropy(&self, subset: &[usize]) -> Result<f64> {
        if subset.is_empty() {
            return Ok(0.0);
        }
        self.check_indices(subset)?;
        Ok(entropy_of(&self.marginal_table(subset)))
    }

    /// `H(A) + H(B) - H(A u B)`, clamped at zero. Either side empty gives 0.
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        if !disjoint(a, b) {
            return Err(Error::validation("mutual information of overlapping sets"));
        }
        if a.is_empty() || b.is_empty() {
            return Ok(0.0);
        }
        let union: Vec<usize> = a.iter().chain(b).copied().collect();
        let v = self.entropy(a)? + self.entropy(b)? - self.entropy(&union)?;
        Ok(v.max(0.0))
    }

    /// `sum_i H(part_i) - H(union)`, zero iff the parts are mutually independent.
    pub fn multi_information(&self, parts: &[Vec<usize>]) -> Result<f64> {
        check_parts(parts, self.vars())?;
        let union: Vec<usize> = parts.iter().flatten().copied().collect();
        if union.is_empty() {
            return Err(Error::validation("multi-information of no variables"));
        }
        let mut sum = 0.0;
        for part in parts {
            sum += self.entropy(part)?;
        }
        Ok((sum - self.entropy(&union)?).max(0.0))
    }

    /// Product distribution of independent factors; variables are concatenated.
    pub fn product(factors: &[FiniteJoint]) -> Result<FiniteJoint> {
        let sizes: Vec<usize> = factors.iter().flat_map(|f| f.sizes.clone()).collect();
        table_size(&sizes, DEFAULT_CAPACITY)?;
        let mut pmf = vec![1.0];
        for f in factors {
            let mut next = Vec::with_capacity(pmf.len() * f.pmf.len());
            for &p in &pmf {
                for &q in &f.pmf {
                    next.push(p * q);
                }
            }
            pmf = next;
        }
        Ok(FiniteJoint { sizes, pmf })
    }

    /// Reorders variables: variable `i` of the result is variable `order[i]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<FiniteJoint> {
        if order.len() != self.vars() {
            return Err(Error::validation("permutation length mismatch"));
        }
        self.marginal(order)
    }

    /// Push-forward under per-variable value maps. `maps[v][x]` is the new value
    /// of variable `v` when it takes value `x`; `sizes[v]` bounds the new values.
    pub fn map_values(&self, maps: &[Vec<usize>], sizes: Vec<usize>) -> Result<FiniteJoint> {
        if maps.len() != self.vars() || sizes.len() != self.vars() {
            return Err(Error::validation("value map arity mismatch"));
        }
        let total = table_size(&sizes, DEFAULT_CAPACITY)?;
        let mut pmf = vec![0.0; total];
        for (outcome, p) in self.support() {
            let mapped: Vec<usize> = outcome
                .iter()
                .enumerate()
                .map(|(v, &x)| maps[v][x])
                .collect();
            pmf[flat_index(&sizes, &mapped)?] += p;
        }
        Ok(FiniteJoint { sizes, pmf })
    }

    /// Serializes to the line-oriented text format read by [`FiniteJoint::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("# finite joint distribution\nsizes");
        for s in &self.sizes {
            let _ = write!(out, " {s}");
        }
        out.push('\n');
        for (outcome, p) in self.support() {
            for x in outcome {
                let _ = write!(out, "{x} ");
            }
            let _ = writeln!(out, "{p:?}");
        }
        out
    }

    /// Parses the text format:
    ///
    /// ```text
    /// # comment
    /// sizes 2 2 2
    /// 0 0 0 0.25
    /// 0 1 1 0.25
    /// ```
    ///
    /// The `sizes` line comes first; each further line is an outcome tuple
    /// followed by its probability. Unlisted outcomes have probability 0.
    pub fn from_text(text: &str) -> Result<FiniteJoint> {
        let mut sizes: Option<Vec<usize>> = None;
        let mut total = 0usize;
        let mut pmf: Vec<f64> = Vec::new();
        let mut seen: Vec<bool> = Vec::new();
        let mut last_line = 0u64;
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno as u64 + 1;
            last_line = line_no;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let mut fields = line.split_whitespace();
            match &sizes {
                None => {
                    if fields.next() != Some("sizes") {
                        return Err(perr("expected a 'sizes' line first".into()));
                    }
                    let parsed = fields
                        .map(|f| {
                            f.parse::<usize>()
                                .map_err(|_| perr(format!("bad alphabet size '{f}'")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if parsed.is_empty() {
                        return Err(perr("no variables declared".into()));
                    }
                    total = table_size(&parsed, DEFAULT_CAPACITY).map_err(|e| match e {
                        Error::Capacity(m) => Error::Capacity(m),
                        other => perr(other.to_string()),
                    })?;
                    pmf = vec![0.0; total];
                    seen = vec![false; total];
                    sizes = Some(parsed);
                }
                Some(sz) => {
                    let tokens: Vec<&str> = fields.collect();
                    if tokens.len() != sz.len() + 1 {
                        return Err(perr(format!(
                            "expected {} outcome values and a probability, found {} fields",
                            sz.len(),
                            tokens.len()
                        )));
                    }
                    let mut idx = 0usize;
                    for (v, tok) in tokens[..sz.len()].iter().enumerate() {
                        let x: usize = tok
                            .parse()
                            .map_err(|_| perr(format!("bad outcome value '{tok}'")))?;
                        if x >= sz[v] {
                            return Err(perr(format!(
                                "value {x} of variable {} exceeds alphabet size {}",
                                v + 1,
                                sz[v]
                            )));
                        }
                        idx = idx * sz[v] + x;
                    }
                    let p: f64 = tokens[sz.len()]
                        .parse()
                        .map_err(|_| perr(format!("bad probability '{}'", tokens[sz.len()])))?;
                    if !(p.is_finite() && p >= 0.0) {
                        return Err(perr(format!("invalid probability {p}")));
                    }
                    debug_assert!(idx < total);
                    if seen[idx] {
                        return Err(perr("outcome listed twice".into()));
                    }
                    seen[idx] = true;
                    pmf[idx] = p;
                }
            }
        }
        let sizes = sizes.ok_or(Error::Parse {
            line: last_line.max(1),
            message: "missing 'sizes' line".into(),
        })?;
        FiniteJoint::new(sizes, pmf).map_err(|e| match e {
            Error::Validation(message) => Error::Parse {
                line: last_line.max(1),
                message,
            },
            other => other,
        })
    }
}

fn table_size(sizes: &[usize], capacity: usize) -> Result<usize> {
    if sizes.is_empty() {
        return Err(Error::validation("a joint distribution needs at least one variable"));
    }
    let mut total: usize = 1;
    for &s in sizes {
        if s == 0 {
            return Err(Error::validation("alphabet sizes must be positive"));
        }
        total = total
            .checked_mul(s)
            .filter(|&t| t <= capacity)
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "product alphabet of sizes {sizes:?} exceeds {capacity} entries"
                ))
            })?;
    }
    Ok(total)
}

fn flat_index(sizes: &[usize], outcome: &[usize]) -> Result<usize> {
    if outcome.len() != sizes.len() {
        return Err(Error::validation(format!(
            "outcome has {} values, expected {}",
            outcome.len(),
            sizes.len()
        )));
    }
    let mut idx = 0usize;
    for (&x, &s) in outcome.iter().zip(sizes) {
        if x >= s {
            return Err(Error::validation(format!("value {x} exceeds alphabet size {s}")));
        }
        idx = idx * s + x;
    }
    Ok(idx)
}

fn unflatten(sizes: &[usize], mut idx: usize) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for v in (0..sizes.len()).rev() {
        out[v] = idx % sizes[v];
        idx /= sizes[v];
    }
    out
}

/// Entropy in bits of a probability vector, with `0 log 0 = 0`.
pub(crate) fn entropy_of(p: &[f64]) -> f64 {
    let h: f64 = p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum();
    h.max(0.0)
}

/// Free-function form of [`FiniteJoint::entropy`].
pub fn entropy(d: &FiniteJoint, subset: &[usize]) -> Result<f64> {
    d.entropy(subset)
}

pub fn mutual_information(d: &FiniteJoint, a: &[usize], b: &[usize]) -> Result<f64> {
    d.mutual_information(a, b)
}

pub fn multi_information(d: &FiniteJoint, parts: &[Vec<usize>]) -> Result<f64> {
    d.multi_information(parts)
}

/// Answers "is `I(A,B) > I(C,D)`?" exactly, with a `1e-9` margin.
pub fn exact_oracle_compare(
    d: &FiniteJoint,
    a: &[usize],
    b: &[usize],
    c: &[usize],
    e: &[usize],
) -> Result<bool> {
    let left = d.mutual_information(a, b)?;
    let right = d.mutual_information(c, e)?;
    Ok(left > right + ZERO_TOLERANCE)
}

/// Entropy of every subset of variables, indexed by bitmask.
pub(crate) fn subset_entropies(d: &FiniteJoint) -> Result<Vec<f64>> {
    let n = d.vars();
    if n > 20 {
        return Err(Error::Capacity(format!("{n} variables are too many to tabulate")));
    }
    (0..1usize << n)
        .into_par_iter()
        .map(|mask| {
            let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            d.entropy(&subset)
        })
        .collect()
}

/// All set partitions of `0..n` as restricted growth strings, in lexicographic order.
pub(crate) fn restricted_growth_strings(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut rgs = vec![0usize; n];
    let mut max_prefix = vec![0usize; n];
    loop {
        out.push(rgs.clone());
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            if rgs[i] <= max_prefix[i - 1] {
                rgs[i] += 1;
                max_prefix[i] = max_prefix[i - 1].max(rgs[i]);
                for j in i + 1..n {
                    rgs[j] = 0;
                    max_prefix[j] = max_prefix[j - 1];
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Finest partition into mutually independent clusters, by exhaustive search.
///
/// Every set partition is scored by its multi-information; among those below
/// [`ZERO_TOLERANCE`] the one with the most blocks wins. The finest
/// independent partition is unique, so two distinct maximal candidates mean
/// the tolerance is failing and an integrity error is returned.
pub fn brute_force_finest(d: &FiniteJoint) -> Result<Partition> {
    let n = d.vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(Error::Capacity(format!(
            "brute force over {n} variables (at most {BRUTE_FORCE_MAX_VARS})"
        )));
    }
    let h = subset_entropies(d)?;
    let full = (1usize << n) - 1;
    let candidates = restricted_growth_strings(n);
    let scored: Vec<(usize, usize)> = candidates
        .par_iter()
        .enumerate()
        .filter_map(|(idx, rgs)| {
            let k = rgs.iter().max().unwrap() + 1;
            let mut masks = vec![0usize; k];
            for (i, &label) in rgs.iter().enumerate() {
                masks[label] |= 1 << i;
            }
            let mi: f64 = masks.iter().map(|&m| h[m]).sum::<f64>() - h[full];
            (mi < ZERO_TOLERANCE).then_some((k, idx))
        })
        .collect();
    let best_k = scored.iter().map(|&(k, _)| k).max().ok_or_else(|| {
        Error::Integrity("no independent partition found (the trivial one must be)".into())
    })?;
    let winners: Vec<usize> = scored
        .iter()
        .filter(|&&(k, _)| k == best_k)
        .map(|&(_, idx)| idx)
        .collect();
    if winners.len() > 1 {
        return Err(Error::Integrity(format!(
            "{} distinct finest independent partitions with {} blocks",
            winners.len(),
            best_k
        )));
    }
    Partition::new(candidates[winners[0]].clone(), best_k)
}

/// Independent groups; a group of size `g` is `g - 1` fair bits and their XOR.
pub fn parity_distribution(group_sizes: &[usize]) -> Result<FiniteJoint> {
    if group_sizes.is_empty() {
        return Err(Error::validation("no groups given"));
    }
    let total_vars: usize = group_sizes.iter().sum();
    let sizes = vec![2usize; total_vars];
    table_size(&sizes, DEFAULT_CAPACITY)?;
    let mut factors = Vec::with_capacity(group_sizes.len());
    for &g in group_sizes {
        if g < 2 {
            return Err(Error::validation(format!("parity group of size {g} (need >= 2)")));
        }
        let cells = 1usize << g;
        let p = 1.0 / (1u64 << (g - 1)) as f64;
        let pmf = (0..cells)
            .map(|idx| if idx.count_ones() % 2 == 0 { p } else { 0.0 })
            .collect();
        factors.push(FiniteJoint {
            sizes: vec![2; g],
            pmf,
        });
    }
    FiniteJoint::product(&factors)
}

/// Canonical ground truth of a parity construction: one cluster per group.
pub fn parity_ground_truth(group_sizes: &[usize]) -> Result<Partition> {
    let labels: Vec<usize> = group_sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &size)| std::iter::repeat_n(g, size))
        .collect();
    Partition::from_labels(&labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coin() -> FiniteJoint {
        FiniteJoint::new(vec![2], vec![0.5, 0.5]).unwrap()
    }

    fn random_joint(rng: &mut ChaCha8Rng, vars: usize) -> FiniteJoint {
        let sizes: Vec<usize> = (0..vars).map(|_| rng.random_range(2..=3)).collect();
        let total: usize = sizes.iter().product();
        let raw: Vec<f64> = (0..total)
            .map(|_| {
                let u: f64 = rng.random();
                if u < 0.2 {
                    0.0
                } else {
                    u
                }
            })
            .collect();
        let mut raw = raw;
        if raw.iter().all(|&x| x == 0.0) {
            raw[0] = 1.0;
        }
        let z: f64 = raw.iter().sum();
        let mut pmf: Vec<f64> = raw.iter().map(|x| x / z).collect();
        let fix: f64 = 1.0 - pmf.iter().sum::<f64>();
        let top = (0..pmf.len())
            .max_by(|&a, &b| pmf[a].total_cmp(&pmf[b]))
            .unwrap();
        pmf[top] += fix;
        FiniteJoint::new(sizes, pmf).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(coin().entropy(&[0]).unwrap(), 1.0);
        let det = FiniteJoint::new(vec![3], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(det.entropy(&[0]).unwrap(), 0.0);
        let two = FiniteJoint::product(&[coin(), coin()]).unwrap();
        assert_abs_diff_eq!(two.entropy(&[0, 1]).unwrap(), 2.0, epsilon = 1e-15);
        assert_eq!(two.entropy(&[]).unwrap(), 0.0);
        assert!(two.entropy(&[2]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let copy = FiniteJoint::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(copy.mutual_information(&[0], &[1]).unwrap(), 1.0);
        let indep = FiniteJoint::product(&[coin(), coin()]).unwrap();
        assert_abs_diff_eq!(indep.mutual_information(&[0], &[1]).unwrap(), 0.0);
        let parity = parity_distribution(&[3]).unwrap();
        assert_abs_diff_eq!(parity.mutual_information(&[0], &[2]).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(parity.mutual_information(&[0, 1], &[2]).unwrap(), 1.0, epsilon = 1e-12);
        assert!(parity.mutual_information(&[0, 1], &[1]).is_err());
        assert_eq!(parity.mutual_information(&[], &[1]).unwrap(), 0.0);
    }

    #[test]
    fn multi_information_examples() {
        let three = FiniteJoint::product(&[coin(), coin(), coin()]).unwrap();
        let singles = vec![vec![0], vec![1], vec![2]];
        assert_abs_diff_eq!(three.multi_information(&singles).unwrap(), 0.0, epsilon = 1e-12);
        let parity = parity_distribution(&[3]).unwrap();
        assert_abs_diff_eq!(parity.multi_information(&singles).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(parity.multi_information(&[vec![0, 1, 2]]).unwrap(), 0.0);
        assert!(parity.multi_information(&[vec![0, 1], vec![1]]).is_err());
    }

    #[test]
    fn parity_triple_table_by_enumeration() {
        let parity = parity_distribution(&[3]).unwrap();
        assert_eq!(parity.pmf().len(), 8);
        let mut nonzero = 0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let p = parity.probability(&[a, b, c]).unwrap();
                    if (a + b + c) % 2 == 0 {
                        assert_eq!(p, 0.25);
                        nonzero += 1;
                    } else {
                        assert_eq!(p, 0.0);
                    }
                }
            }
        }
        assert_eq!(nonzero, 4);
        let pair = parity_distribution(&[2]).unwrap();
        assert_eq!(pair.pmf(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn oracle_compare_examples() {
        let parity = parity_distribution(&[3]).unwrap();
        assert!(exact_oracle_compare(&parity, &[0, 1], &[2], &[0], &[2]).unwrap());
        assert!(!exact_oracle_compare(&parity, &[0, 1], &[2], &[0, 1], &[2]).unwrap());
        let indep = FiniteJoint::product(&[coin(), coin()]).unwrap();
        assert!(!exact_oracle_compare(&indep, &[0], &[1], &[0], &[]).unwrap());
    }

    #[test]
    fn brute_force_examples() {
        let three = FiniteJoint::product(&[coin(), coin(), coin()]).unwrap();
        assert_eq!(brute_force_finest(&three).unwrap(), Partition::singletons(3));
        let parity = parity_distribution(&[3]).unwrap();
        assert_eq!(brute_force_finest(&parity).unwrap(), Partition::whole(3));
        let two = parity_distribution(&[3, 3]).unwrap();
        assert_eq!(
            brute_force_finest(&two).unwrap(),
            parity_ground_truth(&[3, 3]).unwrap()
        );
        let big = FiniteJoint::product(&vec![coin(); 11]).unwrap();
        assert!(matches!(brute_force_finest(&big), Err(Error::Capacity(_))));
    }

    #[test]
    fn parity_groups_are_mutually_independent() {
        let d = parity_distribution(&[3, 3]).unwrap();
        for x in 0..3 {
            assert_abs_diff_eq!(
                d.mutual_information(&[x], &[3, 4, 5]).unwrap(),
                0.0,
                epsilon = 1e-12
            );
        }
        assert!(parity_distribution(&[1]).is_err());
    }

    #[test]
    fn bell_numbers() {
        let bell = [1usize, 2, 5, 15, 52, 203, 877];
        for (i, &b) in bell.iter().enumerate() {
            assert_eq!(restricted_growth_strings(i + 1).len(), b);
        }
    }

    #[test]
    fn capacity_guard() {
        let sizes = vec![2usize; 25];
        assert!(matches!(parity_distribution(&[25]), Err(Error::Capacity(_))));
        assert!(matches!(
            FiniteJoint::new(sizes, vec![]),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn text_round_trip_and_errors() {
        let d = parity_distribution(&[3, 2]).unwrap();
        let back = FiniteJoint::from_text(&d.to_text()).unwrap();
        assert_eq!(back, d);
        let err = FiniteJoint::from_text("sizes 2\n0 0.5\n2 0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = FiniteJoint::from_text("0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = FiniteJoint::from_text("sizes 2\n0 0.5\n0 0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(FiniteJoint::from_text("sizes 2\n0 0.5\n").is_err());
        assert!(FiniteJoint::from_text("").is_err());
        assert!(FiniteJoint::from_text("# c\nsizes 2 # two\n\n1 1.0\n").is_ok());
    }

    #[test]
    fn random_joint_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let vars = rng.random_range(2..=4);
            let d = random_joint(&mut rng, vars);
            for mask in 1..(1usize << vars) {
                let subset: Vec<usize> = (0..vars).filter(|i| mask >> i & 1 == 1).collect();
                let h = d.entropy(&subset).unwrap();
                let cap: f64 = subset.iter().map(|&i| (d.alphabet_sizes()[i] as f64).log2()).sum();
                assert!(h >= 0.0 && h <= cap + 1e-12);
            }
            let a = vec![0];
            let r: Vec<usize> = (1..vars).collect();
            let ab = d.mutual_information(&a, &r).unwrap();
            let ba = d.mutual_information(&r, &a).unwrap();
            assert_abs_diff_eq!(ab, ba, epsilon = 1e-12);
            assert_abs_diff_eq!(
                d.multi_information(&[a.clone(), r.clone()]).unwrap(),
                ab,
                epsilon = 1e-12
            );
            // removing an element from R never increases I(C, R)
            for &x in &r {
                let smaller: Vec<usize> = r.iter().copied().filter(|&y| y != x).collect();
                assert!(d.mutual_information(&a, &r).unwrap() >= d.mutual_information(&a, &smaller).unwrap() - 1e-9);
            }
            // product measures have zero information
            let other = random_joint(&mut rng, 1);
            let prod = FiniteJoint::product(&[d.marginal(&[0]).unwrap(), other]).unwrap();
            assert!(prod.mutual_information(&[0], &[1]).unwrap() < 1e-12);
            assert_eq!(brute_force_finest(&prod).unwrap(), Partition::singletons(2));
        }
    }
}
