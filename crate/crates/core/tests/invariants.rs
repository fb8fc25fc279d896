use drgame::assembler::assemble;
use drgame::io::generate::{random_leader, random_scenario};
use drgame::io::{fmt12, load_scenario, round12, save_scenario, ScenarioPaths};
use drgame::lcp::{lemke, Lcp, LemkeOptions};
use drgame::vgne::{kkt_residual, solve_vgne, VgneOptions};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lcp_from(n: usize, entries: &[f64], q: &[f64]) -> Lcp {
    let a = DMatrix::from_row_slice(n, n, &entries[..n * n]);
    let s = DMatrix::from_row_slice(n, n, &entries[n * n..2 * n * n]);
    let m = a.transpose() * &a + (&s - s.transpose()) + DMatrix::identity(n, n) * 1e-3;
    Lcp::new(m, DVector::from_column_slice(&q[..n]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lemke_solves_positive_definite_lcps(
        n in 1usize..8,
        entries in prop::collection::vec(-1.0f64..1.0, 128),
        q in prop::collection::vec(-3.0f64..3.0, 8),
    ) {
        let lcp = lcp_from(n, &entries, &q);
        let sol = lemke::solve(&lcp, LemkeOptions::default()).unwrap();
        let w = lcp.slack(&sol.z);
        for i in 0..n {
            prop_assert!(sol.z[i] >= -1e-9 && w[i] >= -1e-9);
            prop_assert!((sol.z[i] * w[i]).abs() <= 1e-8);
        }
    }

    #[test]
    fn follower_equilibria_satisfy_their_kkt_conditions(
        n in 1usize..4,
        t in 1usize..5,
        seed in 0u64..10_000,
    ) {
        let scen = random_scenario(n, t, seed);
        let game = assemble(&scen).unwrap();
        let z0 = random_leader(&mut ChaCha8Rng::seed_from_u64(seed), &scen);
        let opts = VgneOptions::default();
        let sol = solve_vgne(&game, &z0, &opts).unwrap();
        let rep = kkt_residual(&game, &z0, &sol.x, &sol.lambda, &sol.lambda_local, Some(&sol.nu), opts.tikhonov);
        prop_assert!(rep.stationarity <= 1e-6, "{rep:?}");
        prop_assert!(rep.primal_feasibility <= 1e-6 && rep.dual_feasibility <= 1e-6, "{rep:?}");
        prop_assert!(rep.complementarity <= 1e-8, "{rep:?}");
        prop_assert!(sol.lambda.iter().chain(&sol.lambda_local).all(|l| *l >= 0.0));
    }

    #[test]
    fn saved_scenarios_load_back_unchanged(n in 1usize..5, t in 1usize..10, seed in 0u64..10_000) {
        let scen = random_scenario(n, t, seed);
        let dir = tempfile::tempdir().unwrap();
        let paths = ScenarioPaths::in_dir(dir.path());
        save_scenario(&scen, &paths, None).unwrap();
        prop_assert_eq!(load_scenario(&paths).unwrap(), scen);
    }

    #[test]
    fn twelve_digit_rounding_is_idempotent_and_close(v in prop::num::f64::NORMAL) {
        let r = round12(v);
        prop_assert_eq!(round12(r), r);
        prop_assert!((r - v).abs() <= 5e-12 * v.abs());
        prop_assert_eq!(fmt12(v).parse::<f64>().unwrap(), r);
    }
}
