use super::{ClusteringResult, DependenceOracle};
use crate::error::{Error, Result};
use crate::model::{normalize_set, Partition};

/// Splits `set` into a cluster `C` grown from its lowest element and the
/// remainder `R`, which is empty when no independent split exists.
///
/// While the oracle reports `I(C;R) > 0`, the elements of `R` are scanned in
/// ascending order and removed one by one; the first element whose removal
/// lowers `I(C;R)` moves to `C`, the scan stops and `R` is restored to
/// `set \ C`. Every round must either move an element or end the loop, so
/// a scan that moves nothing (positive `I(C;R)` that no single removal
/// lowers) is reported as an inconsistent oracle, as is exceeding `|set|`
/// rounds.
pub fn clin_split(set: &[usize], o: &dyn DependenceOracle) -> Result<(Vec<usize>, Vec<usize>)> {
    let set = normalize_set(set);
    if set.is_empty() {
        return Err(Error::validation("cannot split an empty set"));
    }
    if let Some(&bad) = set.iter().find(|&&i| i >= o.variables()) {
        return Err(Error::validation(format!("variable {bad} unknown to the oracle")));
    }
    let mut c = vec![set[0]];
    let mut r: Vec<usize> = set[1..].to_vec();
    let mut rounds = 0;
    while !r.is_empty() && o.is_positive(&c, &r)? {
        rounds += 1;
        if rounds > set.len() {
            return Err(Error::InconsistentOracle {
                set_size: set.len(),
                iterations: rounds,
            });
        }
        let mut remaining = r.clone();
        let mut moved = false;
        for &x in &r {
            let without: Vec<usize> = remaining.iter().copied().filter(|&y| y != x).collect();
            if o.compare(&c, &remaining, &c, &without)? {
                c.push(x);
                c.sort_unstable();
                moved = true;
                break;
            }
            remaining = without;
        }
        if !moved {
            return Err(Error::InconsistentOracle {
                set_size: set.len(),
                iterations: rounds,
            });
        }
        r = set.iter().copied().filter(|i| !c.contains(i)).collect();
    }
    Ok((c, r))
}

/// Recursively splits the oracle's variables until no split is possible.
///
/// The number of oracle queries is checked against `2 k N^2`, `k` being the
/// number of clusters found.
pub fn clin(o: &dyn DependenceOracle) -> Result<ClusteringResult> {
    let n = o.variables();
    if n == 0 {
        return Err(Error::validation("no variables to cluster"));
    }
    let start = o.calls();
    let mut clusters = Vec::new();
    let mut pending = vec![(0..n).collect::<Vec<_>>()];
    let mut splits = 0usize;
    while let Some(set) = pending.pop() {
        let (c, r) = clin_split(&set, o)?;
        splits += 1;
        if r.is_empty() {
            clusters.push(c);
        } else {
            // depth-first, lower cluster first
            pending.push(r);
            pending.push(c);
        }
    }
    let calls = o.calls() - start;
    let partition = Partition::from_blocks(n, &clusters)?;
    let bound = 2 * partition.k() as u64 * (n as u64).pow(2);
    if calls > bound {
        return Err(Error::Integrity(format!(
            "{calls} oracle calls exceed the bound 2kN^2 = {bound}"
        )));
    }
    Ok(ClusteringResult {
        partition,
        score: None,
        oracle_calls: calls,
        estimator_calls: 0,
        candidates_examined: splits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::ExactOracle;
    use crate::finite_dist::{parity_distribution, FiniteJoint};

    fn coins(n: usize) -> FiniteJoint {
        let coin = FiniteJoint::new(vec![2], vec![0.5, 0.5]).unwrap();
        FiniteJoint::product(&vec![coin; n]).unwrap()
    }

    #[test]
    fn split_examples() {
        let o = ExactOracle::new(&parity_distribution(&[3]).unwrap()).unwrap();
        assert_eq!(clin_split(&[0, 1, 2], &o).unwrap(), (vec![0, 1, 2], vec![]));
        let o = ExactOracle::new(&coins(2)).unwrap();
        assert_eq!(clin_split(&[0, 1], &o).unwrap(), (vec![0], vec![1]));
        let o = ExactOracle::new(&parity_distribution(&[3, 3]).unwrap()).unwrap();
        assert_eq!(
            clin_split(&[0, 1, 2, 3, 4, 5], &o).unwrap(),
            (vec![0, 1, 2], vec![3, 4, 5])
        );
    }

    #[test]
    fn parity_groups_within_bound() {
        let o = ExactOracle::new(&parity_distribution(&[4, 4, 4]).unwrap()).unwrap();
        let res = clin(&o).unwrap();
        assert_eq!(
            res.partition.blocks(),
            vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![8, 9, 10, 11]]
        );
        assert!(res.oracle_calls <= 864);
    }

    #[test]
    fn product_gives_singletons() {
        let o = ExactOracle::new(&coins(5)).unwrap();
        assert_eq!(clin(&o).unwrap().partition, Partition::singletons(5));
    }

    struct Stubborn;
    impl DependenceOracle for Stubborn {
        fn variables(&self) -> usize {
            3
        }
        fn compare(&self, _: &[usize], _: &[usize], _: &[usize], _: &[usize]) -> Result<bool> {
            Ok(false)
        }
        fn is_positive(&self, _: &[usize], _: &[usize]) -> Result<bool> {
            Ok(true)
        }
        fn calls(&self) -> u64 {
            0
        }
    }

    #[test]
    fn inconsistent_oracle_is_reported() {
        assert!(matches!(
            clin_split(&[0, 1, 2], &Stubborn),
            Err(Error::InconsistentOracle { set_size: 3, iterations: 1 })
        ));
    }
}
