use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use conewave::cone::Cap;
use conewave::conical::conical_average;
use conewave::constructions::{build_sharpness_example, sphere_lattice_points};
use conewave::extension::{extend_points, LatticeKernel};
use conewave::grid::{annulus_grid, build_cube_cover};
use conewave::harness::{cube_lq_values, CUBE_POINTS};
use conewave::measures::lebesgue_ball;
use conewave::packets::{random_cap_input, visit_packets, PacketInput};

fn extension(c: &mut Criterion) {
    let ex = build_sharpness_example(64.0, 2, 2, 0.05).unwrap();
    let pts: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64, -0.5 * i as f64, 2.0 * i as f64]).collect();
    c.bench_function("extend_points 64", |b| b.iter(|| extend_points(black_box(&ex.f), &pts).unwrap()));

    let cover = build_cube_cover(64.0, 2).unwrap();
    let shape = cover.cube_lattice(0, CUBE_POINTS);
    let kernel = LatticeKernel::new(&ex.f, &shape).unwrap();
    let lattice = cover.cube_lattice(cover.len() / 2, CUBE_POINTS);
    c.bench_function("lattice kernel one cube", |b| b.iter(|| kernel.eval(black_box(&lattice)).unwrap()));

    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("cube L^q values R=64", |b| b.iter(|| cube_lq_values(&ex.f, &cover, 6.0, CUBE_POINTS).unwrap()));
    g.finish();
}

fn measures(c: &mut Criterion) {
    let mu = lebesgue_ball(3, 1.0 / 16.0).unwrap();
    let grid = annulus_grid(2, 64, false).unwrap();
    let mut g = c.benchmark_group("measures");
    g.sample_size(10);
    g.bench_function("conical average R=8", |b| b.iter(|| conical_average(&mu, black_box(8.0), &grid).unwrap()));
    g.bench_function("sphere points m=14 in Z^5", |b| b.iter(|| sphere_lattice_points(black_box(14), 5).unwrap()));
    g.finish();
}

fn packets(c: &mut Criterion) {
    let r: f64 = 64.0;
    let cap = Cap::centered(&[0.3, 1.0], 1.0 / r.sqrt()).unwrap();
    let f = random_cap_input(&cap, r, 1);
    let mut g = c.benchmark_group("packets");
    g.sample_size(10);
    g.bench_function("stream packets R=64", |b| {
        b.iter(|| visit_packets(PacketInput::Closure(&f), &cap, r, 0.05, |_| Ok(())).unwrap())
    });
    g.finish();
}

criterion_group!(benches, extension, measures, packets);
criterion_main!(benches);
