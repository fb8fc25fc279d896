use drgame::assembler::assemble;
use drgame::io::generate::random_scenario;
use drgame::mpec::{certify_lse, grid_oracle, leader_objective, solve_lse, CertifyOptions, SearchOptions};
use drgame::vgne::VgneOptions;

#[test]
fn search_is_no_worse_than_a_coarse_grid() {
    for seed in 0..3 {
        let scen = random_scenario(2, 2, 100 + seed);
        let game = assemble(&scen).unwrap();
        let grid = grid_oracle(&game, 5, &VgneOptions::default()).unwrap();
        let res = solve_lse(&game, &SearchOptions { starts: 4, ..Default::default() }).unwrap();
        assert!(res.j_dso <= grid.best_cost + 1e-3, "seed {seed}: {} vs grid {}", res.j_dso, grid.best_cost);
    }
}

#[test]
fn reported_cost_matches_a_fresh_evaluation() {
    let scen = random_scenario(2, 3, 7);
    let game = assemble(&scen).unwrap();
    let res = solve_lse(&game, &SearchOptions { starts: 2, ..Default::default() }).unwrap();
    let z0 = res.z0_star.to_vec();
    let (j, sol) = leader_objective(&z0, &game, &VgneOptions::default()).unwrap();
    assert!((j - res.j_dso).abs() < 1e-9 * (1.0 + j.abs()));
    assert_eq!(sol.x.len(), res.x_star.len());
    assert!(res.stat_residual <= 1e-6 && res.feas_residual <= 1e-6 && res.comp_residual <= 1e-8);
}

#[test]
fn outputs_pass_an_independent_certificate() {
    for seed in 0..3 {
        let scen = random_scenario(2, 3, 200 + seed);
        let game = assemble(&scen).unwrap();
        let res = solve_lse(&game, &SearchOptions { starts: 2, ..Default::default() }).unwrap();
        assert!(res.certificate.passed, "seed {seed}: {:?}", res.certificate);
        let other = CertifyOptions { seed: 4242, ..Default::default() };
        let c = certify_lse(&game, &res.z0_star.to_vec(), &res.x_star, 1e-3, 200, &other);
        assert!(c.passed, "seed {seed}: worst improvement {}", c.worst_improvement);
    }
}

#[test]
fn runs_are_deterministic() {
    let scen = random_scenario(2, 3, 9);
    let game = assemble(&scen).unwrap();
    let opts = SearchOptions { starts: 3, seed: 5, ..Default::default() };
    let a = solve_lse(&game, &opts).unwrap();
    let b = solve_lse(&game, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn extra_start_at_the_grid_best_is_never_lost() {
    let scen = random_scenario(2, 2, 31);
    let game = assemble(&scen).unwrap();
    let grid = grid_oracle(&game, 7, &VgneOptions::default()).unwrap();
    let opts = SearchOptions { starts: 2, extra_starts: vec![grid.best_z0.clone()], ..Default::default() };
    let res = solve_lse(&game, &opts).unwrap();
    assert!(res.j_dso <= grid.best_cost + 1e-12);
    assert_eq!(res.starts.len(), 2);
    assert_eq!(res.starts[0].z0_start, grid.best_z0);
}
