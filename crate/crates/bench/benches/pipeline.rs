use std::hint::black_box;

use apdisc::apgen::enumerate_all_aps;
use apdisc::body::{f_k, ShiftedBody};
use apdisc::fourier::{certified_lower_bound, choose_lb_params};
use apdisc::gamma2::{ap_cert, ap_cert_right_only, map_cert, map_summary};
use apdisc::walk::{brute_force_min_disc, BoxColorer};
use apdisc_bench::{boxes, triangle};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn certificates(c: &mut Criterion) {
    let mut g = c.benchmark_group("certificates");
    g.sample_size(10);
    for bx in boxes(&[&[256], &[1024], &[16, 16]]) {
        g.bench_with_input(BenchmarkId::new("ap_cert_right_only", format!("{:?}", bx.sides())), &bx, |b, bx| {
            b.iter(|| ap_cert_right_only(black_box(bx)).unwrap())
        });
    }
    for bx in boxes(&[&[256], &[8, 8]]) {
        g.bench_with_input(BenchmarkId::new("ap_cert_full", format!("{:?}", bx.sides())), &bx, |b, bx| {
            b.iter(|| ap_cert(black_box(bx)).unwrap())
        });
    }
    for bx in boxes(&[&[32, 32], &[8, 8, 8]]) {
        g.bench_with_input(BenchmarkId::new("map_cert", format!("{:?}", bx.sides())), &bx, |b, bx| {
            b.iter(|| map_cert(black_box(bx)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("map_summary", format!("{:?}", bx.sides())), &bx, |b, bx| {
            b.iter(|| map_summary(black_box(bx)).unwrap())
        });
    }
    g.finish();
}

fn coloring(c: &mut Criterion) {
    let mut g = c.benchmark_group("coloring");
    g.sample_size(10);
    for bx in boxes(&[&[256], &[16, 16]]) {
        let cert = ap_cert(&bx).unwrap().cert;
        let colorer = BoxColorer::new(&bx, &cert).unwrap();
        let mut seed = 0u64;
        g.bench_function(BenchmarkId::new("gs_walk", format!("{:?}", bx.sides())), |b| {
            b.iter(|| {
                seed += 1;
                colorer.color(seed).unwrap().disc
            })
        });
    }
    for bx in boxes(&[&[16], &[4, 4]]) {
        let sys = enumerate_all_aps(&bx).unwrap();
        g.bench_function(BenchmarkId::new("brute_force", format!("{:?}", bx.sides())), |b| {
            b.iter(|| brute_force_min_disc(black_box(&sys)).unwrap().min_disc)
        });
    }
    g.finish();
}

fn bodies(c: &mut Criterion) {
    let mut g = c.benchmark_group("bodies");
    g.sample_size(10);
    for r in [8i64, 32] {
        let p = triangle(r);
        g.bench_with_input(BenchmarkId::new("f_k_triangle", r), &p, |b, p| b.iter(|| f_k(black_box(p)).unwrap().f));
        let body = ShiftedBody::unshifted(p.clone());
        let params = choose_lb_params(&p).unwrap();
        g.bench_with_input(BenchmarkId::new("lower_bound_triangle", r), &body, |b, body| {
            b.iter(|| certified_lower_bound(black_box(body), &params).unwrap().value)
        });
    }
    g.finish();
}

criterion_group!(benches, certificates, coloring, bodies);
criterion_main!(benches);
