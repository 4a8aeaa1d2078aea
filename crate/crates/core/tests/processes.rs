use indclust::clustering::{
    clin_split, clink_candidates, clink_split, ExactOracle, RotationCluster, RotationEvaluator,
    StrictComparator,
};
use indclust::datagen::{
    gen_parity_series, gen_perturbed_translation, gen_translation_pair, PairCoupling, ProcessSpec,
    GOLDEN_ROTATION, SILVER_ROTATION,
};
use indclust::estimators::sum_information;
use indclust::finite_dist::parity_distribution;
use indclust::quantizer::fit_normalizer;
use indclust::{RunConfig, SeriesSet};

/// Plug-in multi-information (bits) of binary columns, counted directly.
fn binary_multi_information(columns: &[&[f64]]) -> f64 {
    let n = columns[0].len();
    let h = |counts: &[u64]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n as f64;
                -p * p.log2()
            })
            .sum()
    };
    let mut joint = vec![0u64; 1 << columns.len()];
    let mut marginals = vec![[0u64; 2]; columns.len()];
    for t in 0..n {
        let mut idx = 0;
        for (k, col) in columns.iter().enumerate() {
            let b = (col[t] > 0.5) as usize;
            marginals[k][b] += 1;
            idx = (idx << 1) | b;
        }
        joint[idx] += 1;
    }
    marginals.iter().map(|m| h(m)).sum::<f64>() - h(&joint)
}

#[test]
fn parity_groups_look_independent_below_full_order() {
    let s = gen_parity_series(&[4, 4, 4], 100_000, 3).unwrap();
    let group: Vec<&[f64]> = (0..4).map(|i| s.series(i)).collect();
    for skip in 0..4 {
        let three: Vec<&[f64]> = (0..4).filter(|&i| i != skip).map(|i| group[i]).collect();
        assert!(binary_multi_information(&three) < 1e-3);
    }
    assert!((binary_multi_information(&group) - 1.0).abs() < 1e-3);
}

#[test]
fn strong_perturbation_looks_like_fair_coins() {
    let x = gen_perturbed_translation(GOLDEN_ROTATION, 0.5, 100_000, 9).unwrap();
    let ones = x.iter().filter(|&&v| v > 0.5).count() as f64 / x.len() as f64;
    assert!((ones - 0.5).abs() < 0.01, "{ones}");
}

#[test]
fn quarter_offset_pair_is_first_order_independent_only() {
    let s = gen_translation_pair(GOLDEN_ROTATION, PairCoupling::Fixed { delta: 0.25 }, 100_000, 4)
        .unwrap();
    assert!(binary_multi_information(&[s.series(0), s.series(1)]) < 1e-3);
    // longer blocks still see the coupling
    let v = sum_information(&s, &[vec![0], vec![1]], &RunConfig::default(), &fit_normalizer(&s))
        .unwrap();
    let m2 = v.terms.iter().find(|t| t.m == 2 && t.l == 2).unwrap();
    assert!(m2.information > 0.1, "{}", m2.information);
}

#[test]
fn distinct_rotation_pair_is_below_the_calibration_bound() {
    const C0_N1E5: f64 = 0.018638769506967728;
    let s = gen_translation_pair(
        GOLDEN_ROTATION,
        PairCoupling::IndependentRotations {
            second_alpha: SILVER_ROTATION,
        },
        100_000,
        12,
    )
    .unwrap();
    let v = sum_information(&s, &[vec![0], vec![1]], &RunConfig::default(), &fit_normalizer(&s))
        .unwrap()
        .value;
    assert!(v < C0_N1E5, "{v}");
}

#[test]
fn clin_split_traces_on_parity() {
    let o = ExactOracle::new(&parity_distribution(&[3, 3]).unwrap()).unwrap();
    assert_eq!(clin_split(&[0, 1, 2, 3, 4, 5], &o).unwrap(), (vec![0, 1, 2], vec![3, 4, 5]));
    assert_eq!(clin_split(&[3, 4, 5], &o).unwrap(), (vec![3, 4, 5], vec![]));
    assert_eq!(clin_split(&[3], &o).unwrap(), (vec![3], vec![]));
}

#[test]
fn clink_snapshots_contain_the_coupled_pairs() {
    // a, b, a', b' with a ~ a' and b ~ b'
    let est = RotationEvaluator::new(
        vec![
            RotationCluster {
                alpha: GOLDEN_ROTATION,
                members: vec![(0, 0.0), (2, 0.1)],
            },
            RotationCluster {
                alpha: SILVER_ROTATION,
                members: vec![(1, 0.0), (3, 0.1)],
            },
        ],
        6,
        6,
    )
    .unwrap();
    let splits = clink_split(&[0, 1, 2, 3], &est, &StrictComparator).unwrap();
    assert_eq!(splits.len(), 4);
    assert!(splits.splits.contains(&(vec![0, 2], vec![1, 3])), "{:?}", splits.splits);

    let candidates = clink_candidates(&est, 2, &StrictComparator).unwrap();
    assert!(candidates.contains(&vec![vec![0, 2], vec![1, 3]]), "{candidates:?}");
}

#[test]
fn spec_files_generate_reproducibly() {
    let spec = ProcessSpec::from_json(
        r#"{"kind": "translation_clusters", "clusters": [
            {"offsets": [0.0, 0.1]},
            {"alpha_rot": 0.41421356237309503, "offsets": [0.0]}
        ], "n": 500, "seed": 77}"#,
    )
    .unwrap();
    let a = spec.generate().unwrap();
    let b = ProcessSpec::from_json(&spec.to_json()).unwrap().generate().unwrap();
    assert_eq!(a, b);
    assert_eq!(a.ground_truth.blocks(), vec![vec![0, 1], vec![2]]);
    let s: &SeriesSet = &a.series;
    assert_eq!((s.count(), s.len()), (3, 500));
}
