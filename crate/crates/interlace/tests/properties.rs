use interlace::discrepancy::{solve_kls, DiscrepancyInstance};
use interlace::engine::FiniteDistribution;
use interlace::gen::{gen_instance, GenKind, GenOptions};
use interlace::io::EnsembleFile;
use interlace::{HermitianMatrix, MatrixEnsemble};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = GenKind> {
    prop_oneof![Just(GenKind::PsdTraceCapped), Just(GenKind::RankOne), Just(GenKind::Lyapunov), Just(GenKind::Ksr)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_files_meet_their_hypotheses(k in kind(), d in 1usize..=6, m in 1usize..=10, eps in 0.01f64..1.5, seed in any::<u64>(), blocks in 1usize..=3) {
        let file = gen_instance(&GenOptions { blocks, ..GenOptions::new(k, d, m, eps, seed) }).unwrap();
        let text = file.to_json();
        let back = EnsembleFile::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        let stats = back.ensemble().unwrap().stats().unwrap();
        prop_assert!(stats.all_psd);
        prop_assert!(stats.epsilon <= eps);
        prop_assert!(stats.sum_max_eigenvalue <= 1.0);
    }

    #[test]
    fn real_symmetric_files_round_trip(d in 1usize..=4, vals in prop::collection::vec(-3.0f64..3.0, 16 * 3)) {
        let mats: Vec<HermitianMatrix> = (0..3)
            .map(|k| {
                let rows: Vec<Vec<f64>> = (0..d)
                    .map(|i| (0..d).map(|j| vals[16 * k + 4 * i.min(j) + i.max(j)]).collect())
                    .collect();
                HermitianMatrix::from_real(&rows).unwrap()
            })
            .collect();
        let e = MatrixEnsemble::new(mats).unwrap();
        let file = EnsembleFile::from_ensemble(&e);
        let back = EnsembleFile::from_json(&file.to_json()).unwrap();
        prop_assert_eq!(back.ensemble().unwrap(), e);
    }

    #[test]
    fn generated_discrepancy_instances_meet_four_sigma(d in 1usize..=4, m in 1usize..=6, seed in any::<u64>()) {
        let file = gen_instance(&GenOptions::new(GenKind::PsdTraceCapped, d, m, 0.5, seed)).unwrap();
        let e = file.ensemble().unwrap();
        let dists: Vec<FiniteDistribution> = file.dists().unwrap().unwrap();
        let res = solve_kls(&DiscrepancyInstance::new(e, dists).unwrap(), true).unwrap();
        prop_assert!(res.achieved <= res.bound + 1e-7, "{} > {}", res.achieved, res.bound);
    }
}
