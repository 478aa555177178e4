use std::hint::black_box;

use bjgeo::sampling::{self, random_polyhedral};
use bjgeo::{certify_isometry, is_orthogonal, preserves_at_point, Matrix, NormedSpace, PolyhedralSpace, Vector};
use criterion::{criterion_group, criterion_main, Criterion};

fn v(c: &[i64]) -> Vector {
    Vector::from_ints(c)
}

fn ortho(c: &mut Criterion) {
    let s = PolyhedralSpace::linf(4).unwrap();
    let (x, y) = (v(&[1, 1, 1, 0]), v(&[1, -1, 0, 3]));
    c.bench_function("ortho/linf4", |b| b.iter(|| is_orthogonal(&s, black_box(&x), black_box(&y)).unwrap()));
    let s = PolyhedralSpace::l1(4).unwrap();
    let x = v(&[1, 0, 0, 0]);
    c.bench_function("ortho/l1_4", |b| b.iter(|| is_orthogonal(&s, black_box(&x), black_box(&y)).unwrap()));
}

fn preserve(c: &mut Criterion) {
    let s = PolyhedralSpace::l1(3).unwrap();
    let t = Matrix::from_columns(&[v(&[1, 0, 0]), v(&[1, -1, -1]), v(&[0, 0, -1])]).unwrap();
    let x = v(&[1, 0, 0]);
    c.bench_function("preserve/at_point/l1_3", |b| b.iter(|| preserves_at_point(&s, &s, &t, black_box(&x)).unwrap()));
}

fn isometry(c: &mut Criterion) {
    let ns: NormedSpace = PolyhedralSpace::linf(3).unwrap().into();
    let t = Matrix::from_columns(&[v(&[0, 1, 0]), v(&[-1, 0, 0]), v(&[0, 0, -1])]).unwrap();
    c.bench_function("isometry/linf3", |b| b.iter(|| certify_isometry(&ns, black_box(&t)).unwrap()));
}

fn construction(c: &mut Criterion) {
    c.bench_function("polytope/random_4d", |b| {
        let mut rng = sampling::rng(5);
        b.iter(|| random_polyhedral(&mut rng, 4, 6))
    });
}

criterion_group!(benches, ortho, preserve, isometry, construction);
criterion_main!(benches);
