use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use drgame::assembler::assemble;
use drgame::io::generate::{random_leader, random_scenario};
use drgame::lcp::{lemke, LemkeOptions};
use drgame::mpec::{solve_lse, SearchOptions};
use drgame::vgne::{KktSystem, VgneOptions, VgneSolver};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn lemke_cold(c: &mut Criterion) {
    let mut g = c.benchmark_group("lemke_cold");
    g.sample_size(10);
    for (n, t) in [(2, 4), (3, 8)] {
        let scen = random_scenario(n, t, 1);
        let game = assemble(&scen).unwrap();
        let sys = KktSystem::new(&game, 1e-6);
        let z0 = random_leader(&mut ChaCha8Rng::seed_from_u64(1), &scen);
        let lcp = sys.lcp(&z0);
        g.bench_function(format!("N{n}T{t}"), |b| b.iter(|| lemke::solve(black_box(&lcp), LemkeOptions::default())));
    }
    g.finish();
}

/// Follower re-solve after a small leader move, the inner step of the search.
fn vgne_warm(c: &mut Criterion) {
    let scen = random_scenario(3, 8, 2);
    let game = assemble(&scen).unwrap();
    let sys = KktSystem::new(&game, 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let z0 = random_leader(&mut rng, &scen);
    let mut z1 = z0.clone();
    z1[0] = (z1[0] + scen.c0_lo[0]) / 2.0;
    c.bench_function("vgne_warm_N3T8", |b| {
        b.iter_batched(
            || {
                let mut s = VgneSolver::new(&sys, VgneOptions::default());
                s.solve(&z0).unwrap();
                s
            },
            |mut s| s.solve(black_box(&z1)).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn leader_search(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_lse");
    g.sample_size(10);
    let game = assemble(&random_scenario(2, 3, 3)).unwrap();
    let opts = SearchOptions { starts: 2, ..Default::default() };
    g.bench_function("N2T3", |b| b.iter(|| solve_lse(black_box(&game), &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, lemke_cold, vgne_warm, leader_search);
criterion_main!(benches);
