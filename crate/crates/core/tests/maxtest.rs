use rand::Rng;
use rand_distr::StandardNormal;
use rankindep::rng::stream_rng;
use rankindep::{
    asymptotic_test, max_statistics, mc_exact_test, pair_stats, pairwise_matrices,
    random_rank_matrix, DataMatrix, KernelKind,
};

fn gaussian(n: usize, p: usize, seed: u64) -> DataMatrix {
    let mut rng = stream_rng(seed, 0);
    let values = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    DataMatrix::from_column_major(n, p, values).unwrap()
}

#[test]
fn engine_matches_pairwise_functions_across_sizes() {
    // covers one-word, multi-word and fallback paths of the D engine
    for (n, p) in [
        (6usize, 4usize),
        (64, 3),
        (65, 3),
        (200, 3),
        (300, 3),
        (1100, 3),
    ] {
        let ranks = random_rank_matrix(n, p, 11, n as u64);
        let mats = pairwise_matrices(&ranks, &KernelKind::ALL).unwrap();
        for j in 0..p {
            for k in 0..p {
                if j == k {
                    continue;
                }
                let direct = pair_stats(&ranks.pair(j, k)).unwrap();
                for m in &mats {
                    assert_eq!(m.get(j, k), direct.get(m.kind), "n={n} {j},{k} {}", m.kind);
                }
            }
        }
    }
}

#[test]
fn single_kind_engine_agrees_with_joint_engine() {
    let ranks = random_rank_matrix(120, 12, 5, 0);
    let joint = max_statistics(&ranks, &KernelKind::ALL).unwrap();
    for (i, kind) in KernelKind::ALL.into_iter().enumerate() {
        assert_eq!(max_statistics(&ranks, &[kind]).unwrap()[0], joint[i]);
    }
}

#[test]
fn monotone_transforms_give_identical_outcomes() {
    let data = gaussian(60, 8, 3);
    let cube = data.map(|v| v * v * v).unwrap();
    let root = data.map(f64::cbrt).unwrap();
    for kind in KernelKind::ALL {
        let a = asymptotic_test(&data, kind, 0.05).unwrap();
        assert_eq!(a, asymptotic_test(&cube, kind, 0.05).unwrap());
        assert_eq!(a, asymptotic_test(&root, kind, 0.05).unwrap());
        let m = mc_exact_test(&data, kind, 0.05, 50, 9).unwrap();
        assert_eq!(m, mc_exact_test(&cube, kind, 0.05, 50, 9).unwrap());
    }
}

#[test]
fn seeded_mc_test_repeats() {
    let data = gaussian(40, 5, 8);
    let a = mc_exact_test(&data, KernelKind::TauStar, 0.1, 99, 1234).unwrap();
    let b = mc_exact_test(&data, KernelKind::TauStar, 0.1, 99, 1234).unwrap();
    assert_eq!(a, b);
    assert!(a.p_value >= 1.0 / 100.0 && a.p_value <= 1.0);
}

#[test]
fn duplicated_column_is_rejected() {
    let base = gaussian(80, 6, 4);
    let mut cols: Vec<Vec<f64>> = (0..6).map(|j| base.column(j).to_vec()).collect();
    cols.push(cols[2].iter().map(|v| v.exp()).collect());
    let data = DataMatrix::from_columns(cols).unwrap();
    for kind in KernelKind::ALL {
        let asy = asymptotic_test(&data, kind, 0.05).unwrap();
        assert!(asy.reject, "{kind}");
        let mc = mc_exact_test(&data, kind, 0.05, 199, 2).unwrap();
        assert!(mc.reject, "{kind}");
        assert_eq!(mc.p_value, 1.0 / 200.0);
    }
}
