use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use squeezechain::pfaffian::{pfaffian, SkewMatrix};

fn random_skew(rng: &mut ChaCha8Rng, dim: usize) -> SkewMatrix<C64> {
    SkewMatrix::from_upper(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn determinant(m: &SkewMatrix<C64>) -> C64 {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| m.get(i, j)).lu().determinant()
}

#[test]
fn square_equals_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let dim = 2 * rng.gen_range(1..=100);
        let m = random_skew(&mut rng, dim);
        let pf = pfaffian(&m);
        let det = determinant(&m);
        let rel = (pf * pf - det).norm() / det.norm();
        worst = worst.max(rel);
        assert!(rel < 1e-8, "dim {dim}: relative error {rel:e}");
    }
    eprintln!("worst relative error {worst:e}");
}

#[test]
fn odd_dimensions_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in (1..60).step_by(2) {
        assert_eq!(pfaffian(&random_skew(&mut rng, dim)), C64::new(0.0, 0.0));
    }
}

#[test]
fn small_cases_are_exact() {
    let x = C64::new(0.3, -1.2);
    let two = SkewMatrix::from_upper(2, |_, _| x);
    assert_eq!(pfaffian(&two), x);
    let v = [C64::new(1.0, 2.0), C64::new(-0.5, 0.0), C64::new(3.0, 1.0), C64::new(0.0, -2.0), C64::new(4.0, 0.5), C64::new(-1.0, 1.0)];
    let m = SkewMatrix::from_upper(4, |i, j| match (i, j) {
        (0, 1) => v[0],
        (0, 2) => v[1],
        (0, 3) => v[2],
        (1, 2) => v[3],
        (1, 3) => v[4],
        _ => v[5],
    });
    // pf = m01 m23 - m02 m13 + m03 m12
    assert_eq!(pfaffian(&m), v[0] * v[5] - v[1] * v[4] + v[2] * v[3]);
}
