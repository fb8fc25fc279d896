use drgame::assembler::{assemble, AssembledGame, Block};
use drgame::io::generate::{random_leader, random_scenario};
use drgame::model::{ProsumerSpec, Scenario};
use drgame::vgne::{kkt_residual, solve_vgne, verify_vi, Method, VgneError, VgneOptions};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prosumer(demand: f64, solar: f64, e0: f64) -> ProsumerSpec {
    ProsumerSpec {
        demand: vec![demand],
        solar: vec![solar],
        e_max: 10.0,
        p_max: 3.0,
        eta_c: 1.0,
        eta_dc: 1.0,
        e0,
    }
}

#[test]
fn interior_toy_matches_calculus() {
    let scen = Scenario {
        dt: 1.0,
        request: vec![0.0],
        p_bar: 1.0,
        p_tilde: 0.1,
        beta: 1.0,
        c1: vec![0.2],
        c0_lo: vec![0.0],
        c0_hi: vec![1.0],
        grid_capacity: vec![5.0],
        mu: 0.0,
        delta: 1e-9,
        prosumers: vec![prosumer(1.0, 1.0, 5.0)],
    };
    let game = assemble(&scen).unwrap();
    for c0 in [0.0, 0.3, 1.0] {
        let sol = solve_vgne(&game, &[c0, 0.5], &VgneOptions::default()).unwrap();
        let want = (-c0 / (2.0 * 0.2f64)).max(0.0);
        assert!((sol.x[game.layout.idx(0, Block::P, 0)] - want).abs() < 1e-6);
    }
}

/// Dense convex QP `min ½xᵀHx + fᵀx, Ae x = be, A x ≤ b` by enumerating active
/// sets of size at most `max_active` (positive definite `H`).
fn qp_enumerate(
    h: &DMatrix<f64>,
    f: &DVector<f64>,
    ae: &DMatrix<f64>,
    be: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    max_active: usize,
) -> DVector<f64> {
    let (n, me, m) = (h.nrows(), ae.nrows(), a.nrows());
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut set = Vec::new();
    fn rec(
        start: usize,
        m: usize,
        max_active: usize,
        set: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        visit(set);
        if set.len() == max_active {
            return;
        }
        for j in start..m {
            set.push(j);
            rec(j + 1, m, max_active, set, visit);
            set.pop();
        }
    }
    let mut visit = |act: &[usize]| {
        let k = me + act.len();
        let mut kkt = DMatrix::zeros(n + k, n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(h);
        let mut rhs = DVector::zeros(n + k);
        rhs.rows_mut(0, n).copy_from(&(-f));
        for r in 0..me {
            for c in 0..n {
                kkt[(n + r, c)] = ae[(r, c)];
                kkt[(c, n + r)] = ae[(r, c)];
            }
            rhs[n + r] = be[r];
        }
        for (q, &r) in act.iter().enumerate() {
            for c in 0..n {
                kkt[(n + me + q, c)] = a[(r, c)];
                kkt[(c, n + me + q)] = a[(r, c)];
            }
            rhs[n + me + q] = b[r];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { return };
        let x = sol.rows(0, n).into_owned();
        if (a * &x - b).iter().any(|v| *v > 1e-9) {
            return;
        }
        if (0..act.len()).any(|q| sol[n + me + q] < -1e-9) {
            return;
        }
        let obj = 0.5 * x.dot(&(h * &x)) + f.dot(&x);
        if best.as_ref().is_none_or(|(o, _)| obj < *o - 1e-14) {
            best = Some((obj, x));
        }
    };
    rec(0, m, max_active, &mut set, &mut visit);
    best.expect("feasible QP").1
}

/// Best response of follower `i` with everyone else frozen, from the game's matrices.
fn best_response(game: &AssembledGame, z0: &[f64], x: &DVector<f64>, i: usize, eps: f64) -> DVector<f64> {
    let per = game.layout.per_follower();
    let off = i * per;
    let mut h = game.big_q.view((off, off), (per, per)).into_owned();
    for k in 0..per {
        h[(k, k)] += 2.0 * eps;
    }
    let mut others = x.clone();
    others.rows_mut(off, per).fill(0.0);
    let grad0 = &game.big_q * &others + &game.c_map * DVector::from_column_slice(z0) + &game.q_lin;
    let f = grad0.rows(off, per).into_owned();
    let pick = |m: &DMatrix<f64>, rows: Vec<usize>| DMatrix::from_fn(rows.len(), per, |r, c| m[(rows[r], off + c)]);
    let own_eq: Vec<usize> = (0..game.eq_rows.len()).filter(|&r| game.eq_rows[r].prosumer == Some(i)).collect();
    let own_loc: Vec<usize> = (0..game.local_rows.len()).filter(|&r| game.local_rows[r].prosumer == Some(i)).collect();
    let ae = pick(&game.e_local, own_eq.clone());
    let be = DVector::from_iterator(own_eq.len(), own_eq.iter().map(|&r| game.e_rhs[r]));
    let a_loc = pick(&game.f_local, own_loc.clone());
    let b_loc = DVector::from_iterator(own_loc.len(), own_loc.iter().map(|&r| game.f_rhs[r]));
    let coup_rows: Vec<usize> = (0..game.coup_rows.len()).collect();
    let a_c = pick(&game.a_coup, coup_rows);
    let b_c = &game.b_coup - &game.a_coup * &others;
    let mut a = DMatrix::zeros(a_loc.nrows() + a_c.nrows(), per);
    a.rows_mut(0, a_loc.nrows()).copy_from(&a_loc);
    a.rows_mut(a_loc.nrows(), a_c.nrows()).copy_from(&a_c);
    let mut b = DVector::zeros(a.nrows());
    b.rows_mut(0, b_loc.len()).copy_from(&b_loc);
    b.rows_mut(b_loc.len(), b_c.len()).copy_from(&b_c);
    let mut out = x.clone();
    out.rows_mut(off, per).copy_from(&qp_enumerate(&h, &f, &ae, &be, &a, &b, per - ae.nrows()));
    out
}

#[test]
fn two_follower_toy_matches_best_response_iteration() {
    // α·p̄ < μ keeps response at zero, so no shared row binds and the Nash
    // equilibrium coincides with the variational one.
    let scen = Scenario {
        dt: 1.0,
        request: vec![1.0],
        p_bar: 1.0,
        p_tilde: 0.1,
        beta: 0.6,
        c1: vec![0.1],
        c0_lo: vec![0.1],
        c0_hi: vec![0.1],
        grid_capacity: vec![50.0],
        mu: 0.09,
        delta: 0.5,
        prosumers: vec![prosumer(3.0, 0.0, 5.0), prosumer(2.0, 0.0, 5.0)],
    };
    let game = assemble(&scen).unwrap();
    let z0 = [0.1, 0.05];
    let opts = VgneOptions::default();
    let sol = solve_vgne(&game, &z0, &opts).unwrap();
    let mut x = DVector::zeros(game.num_vars());
    for _ in 0..200 {
        let prev = x.clone();
        for i in 0..2 {
            x = best_response(&game, &z0, &x, i, opts.tikhonov);
        }
        if (&x - prev).amax() < 1e-12 {
            break;
        }
    }
    let got = DVector::from_column_slice(&sol.x);
    assert!((&got - &x).amax() < 1e-5, "vGNE {got} vs best-response {x}");
    // the closed form holds for the unregularized game
    let raw = solve_vgne(&game, &z0, &VgneOptions { tikhonov: 0.0, ..opts }).unwrap();
    let lay = game.layout;
    for i in 0..2 {
        assert!((raw.x[lay.idx(i, Block::P, 0)] - 4.0 / 3.0).abs() < 1e-9);
    }
}

#[test]
fn random_small_instances_pass_kkt_and_vi_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let opts = VgneOptions::default();
    for seed in 0..8 {
        let scen = random_scenario(2, 2, 100 + seed);
        let game = assemble(&scen).unwrap();
        let z0 = random_leader(&mut rng, &scen);
        let sol = solve_vgne(&game, &z0, &opts).unwrap();
        assert!(sol.stat_residual <= 1e-6 && sol.feas_residual <= 1e-6 && sol.comp_residual <= 1e-8);
        let rep = kkt_residual(&game, &z0, &sol.x, &sol.lambda, &sol.lambda_local, Some(&sol.nu), opts.tikhonov);
        assert!(rep.within(1e-6, 1e-6, 1e-8));
        assert!(sol.lambda.iter().chain(&sol.lambda_local).all(|v| *v >= 0.0));
        let vi = verify_vi(&game, &z0, &sol.x, 1000, seed, opts.tikhonov).unwrap();
        assert!(vi.worst >= -1e-6, "seed {seed}: worst VI value {}", vi.worst);
        assert!(vi.interior_margin > 0.0);
    }
}

#[test]
fn pseudo_gradient_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..10 {
        let scen = random_scenario(3, 4, seed);
        let game = assemble(&scen).unwrap();
        let z0 = random_leader(&mut rng, &scen);
        let a: Vec<f64> = (0..game.num_vars()).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..game.num_vars()).map(|_| rng.random_range(-5.0..5.0)).collect();
        let d = DVector::from_column_slice(&a) - DVector::from_column_slice(&b);
        let dh = game.pseudo_gradient(&z0, &a) - game.pseudo_gradient(&z0, &b);
        assert!(d.dot(&dh) >= -1e-12);
    }
}

#[test]
fn leader_sweep_always_finds_an_equilibrium() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..10 {
        let scen = random_scenario(1 + seed as usize % 3, 1 + seed as usize % 4, 300 + seed);
        let game = assemble(&scen).unwrap();
        for _ in 0..5 {
            let z0 = random_leader(&mut rng, &scen);
            solve_vgne(&game, &z0, &VgneOptions::default()).unwrap();
        }
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let scen = random_scenario(3, 4, 77);
    let game = assemble(&scen).unwrap();
    let z0 = scen.leader_midpoint().to_vec();
    let a = serde_json::to_string(&solve_vgne(&game, &z0, &VgneOptions::default()).unwrap()).unwrap();
    let b = serde_json::to_string(&solve_vgne(&game, &z0, &VgneOptions::default()).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pivoting_and_splitting_agree_with_tikhonov() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for seed in 0..5 {
        let scen = random_scenario(2, 3, 500 + seed);
        let game = assemble(&scen).unwrap();
        let z0 = random_leader(&mut rng, &scen);
        let piv = solve_vgne(&game, &z0, &VgneOptions { method: Method::Pivoting, ..Default::default() }).unwrap();
        let spl = solve_vgne(&game, &z0, &VgneOptions { method: Method::Splitting, ..Default::default() }).unwrap();
        assert_eq!(spl.method, Method::Splitting);
        let diff = piv.x.iter().zip(&spl.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-5, "seed {seed}: {diff}");
    }
}

#[test]
fn coupling_multipliers_are_shared() {
    let scen = random_scenario(3, 4, 21);
    let game = assemble(&scen).unwrap();
    let sol = solve_vgne(&game, &scen.leader_midpoint().to_vec(), &VgneOptions::default()).unwrap();
    // one multiplier per coupling row, not per follower and row
    assert_eq!(sol.lambda.len(), game.a_coup.nrows());
    assert_eq!(sol.lambda_local.len(), game.f_local.nrows());
}

#[test]
fn infeasible_game_is_reported() {
    let mut scen = random_scenario(2, 2, 3);
    for p in &mut scen.prosumers {
        p.e0 = 0.0;
    }
    scen.grid_capacity = vec![0.1; 2];
    scen.request = vec![0.0; 2];
    let game = assemble(&scen).unwrap();
    let err = solve_vgne(&game, &scen.leader_midpoint().to_vec(), &VgneOptions::default()).unwrap_err();
    assert!(matches!(err, VgneError::Infeasible { .. }), "{err}");
}

#[test]
fn mid_size_instances_solve_by_pivoting() {
    let opts = VgneOptions { method: Method::Pivoting, ..Default::default() };
    for seed in 0..12 {
        for (n, t) in [(3, 8), (5, 12)] {
            let scen = random_scenario(n, t, seed);
            let game = assemble(&scen).unwrap();
            let sol = solve_vgne(&game, &scen.leader_midpoint().to_vec(), &opts);
            assert!(sol.is_ok(), "seed {seed}, {n}x{t}: {:?}", sol.err());
        }
    }
}
