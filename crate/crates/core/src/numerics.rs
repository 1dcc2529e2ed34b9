//! Small fixed-size linear algebra and the seeded random streams.
//!
//! Everything here is sized for the estimator: 2×2 complex solves for the
//! primal update and 3×3 real inversion for the Fisher information matrix.
//!
//! Random streams are ChaCha8 keyed by the master seed, with the stream id
//! selecting one of 2^64 independent keystreams. A given
//! `(master_seed, stream_id, draw index)` always yields the same value no
//! matter how many other streams exist or in which order they are consumed.
//! Normal deviates come from `rand_distr::StandardNormal` (ziggurat); both
//! crates are pinned in `Cargo.lock`, which fixes the bit-exact output.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

/// Row-major 2×2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];
pub type Vec2 = [Complex64; 2];
/// Row-major 3×3 real matrix.
pub type Mat3 = [[f64; 3]; 3];

/// Relative determinant threshold below which a solve is rejected.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// A seeded, splittable source of normal deviates.
#[derive(Debug, Clone)]
pub struct RandomStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// One CN(0, 1) draw: real part first, then imaginary part.
    pub fn standard_complex_normal(&mut self) -> Complex64 {
        let re = self.standard_normal();
        let im = self.standard_normal();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Draws from the circularly symmetric CN(mean, variance), where `variance`
/// is the total power E|z - mean|² split evenly between the two parts.
///
/// Two normal deviates are consumed even when the variance is zero, so the
/// stream position does not depend on the parameters.
pub fn sample_complex_gaussian(
    mean: Complex64,
    variance: f64,
    rng: &mut RandomStream,
) -> Result<Complex64> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::invalid(format!(
            "variance must be finite and >= 0, got {variance}"
        )));
    }
    let z = rng.standard_complex_normal();
    if variance == 0.0 {
        return Ok(mean);
    }
    Ok(mean + z * variance.sqrt())
}

fn row_scale2(m: &Mat2) -> f64 {
    m.iter()
        .map(|row| row.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .product()
}

pub fn det2(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn mul2(m: &Mat2, v: &Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Solves `m · x = v` by Cramer's rule.
///
/// Rejects `m` when `|det| < 1e-12 · Π_i max_j |m_ij|`.
pub fn solve_2x2(m: &Mat2, v: &Vec2) -> Result<Vec2> {
    let det = det2(m);
    let scale = row_scale2(m);
    if !(det.norm() >= SINGULARITY_THRESHOLD * scale) || scale == 0.0 {
        return Err(Error::SingularMatrix { det: det.norm() });
    }
    Ok([
        (m[1][1] * v[0] - m[0][1] * v[1]) / det,
        (m[0][0] * v[1] - m[1][0] * v[0]) / det,
    ])
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn mul3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Inverts a 3×3 real matrix through its adjugate.
pub fn invert_3x3(m: &Mat3) -> Result<Mat3> {
    let det = det3(m);
    let scale: f64 = m
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).fold(0.0, f64::max))
        .product();
    if !(det.abs() >= SINGULARITY_THRESHOLD * scale) || scale == 0.0 {
        return Err(Error::SingularMatrix { det: det.abs() });
    }
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    Ok(adj.map(|row| row.map(|x| x / det)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_variance_returns_mean() {
        let mut rng = RandomStream::new(1, 0);
        assert_eq!(
            sample_complex_gaussian(c(0.0, 0.0), 0.0, &mut rng).unwrap(),
            c(0.0, 0.0)
        );
        assert_eq!(
            sample_complex_gaussian(c(3.0, 4.0), 0.0, &mut rng).unwrap(),
            c(3.0, 4.0)
        );
    }

    #[test]
    fn negative_variance_rejected() {
        let mut rng = RandomStream::new(1, 0);
        assert!(matches!(
            sample_complex_gaussian(c(0.0, 0.0), -1.0, &mut rng),
            Err(Error::InvalidParameter(_))
        ));
        assert!(sample_complex_gaussian(c(0.0, 0.0), f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn unit_gaussian_moments() {
        let mut rng = RandomStream::new(2024, 7);
        let n = 100_000;
        let draws: Vec<Complex64> = (0..n)
            .map(|_| sample_complex_gaussian(c(0.0, 0.0), 1.0, &mut rng).unwrap())
            .collect();
        let mean = draws.iter().sum::<Complex64>() / n as f64;
        let var = draws.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n as f64;
        let var_re = draws.iter().map(|z| (z.re - mean.re).powi(2)).sum::<f64>() / n as f64;
        let var_im = draws.iter().map(|z| (z.im - mean.im).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.norm() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
        assert!((var_re - 0.5).abs() < 0.015, "var_re {var_re}");
        assert!((var_im - 0.5).abs() < 0.015, "var_im {var_im}");
    }

    #[test]
    fn streams_are_reproducible_and_order_independent() {
        let take = |seed, stream, n| {
            let mut r = RandomStream::new(seed, stream);
            (0..n).map(|_| r.standard_normal().to_bits()).collect::<Vec<_>>()
        };
        let a = take(9, 3, 64);
        // consume other streams in between; stream 3 must not change
        let _ = take(9, 4, 100);
        let _ = take(9, 2, 10);
        assert_eq!(a, take(9, 3, 64));
        assert_ne!(a, take(9, 4, 64));
        assert_ne!(a, take(10, 3, 64));
    }

    #[test]
    fn solve_identity() {
        let m = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let v = [c(1.0, 1.0), c(2.0, 0.0)];
        assert_eq!(solve_2x2(&m, &v).unwrap(), v);
    }

    #[test]
    fn solve_small_real_system() {
        let m = [[c(2.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(1.0, 0.0)]];
        let x = solve_2x2(&m, &[c(3.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_rejects_singular() {
        let m = [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(1.0, 0.0)]];
        match solve_2x2(&m, &[c(1.0, 0.0), c(0.0, 0.0)]) {
            Err(Error::SingularMatrix { det }) => assert_eq!(det, 0.0),
            other => panic!("expected singular error, got {other:?}"),
        }
        let zero = [[c(0.0, 0.0); 2]; 2];
        assert!(solve_2x2(&zero, &[c(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn solve_threshold_is_scale_invariant() {
        let m = [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(1.0 + 1e-9, 0.0)]];
        let v = [c(1.0, 0.0), c(1.0, 0.0)];
        assert!(solve_2x2(&m, &v).is_ok());
        let big = m.map(|r| r.map(|z| z * 1e150));
        assert!(solve_2x2(&big, &v).is_ok());
        let tiny = m.map(|r| r.map(|z| z * 1e-150));
        assert!(solve_2x2(&tiny, &v).is_ok());
    }

    #[test]
    fn invert_identity_and_diagonal() {
        let eye = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(invert_3x3(&eye).unwrap(), eye);
        let d = invert_3x3(&[[2.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 5.0]]).unwrap();
        assert_eq!(d, [[0.5, 0.0, 0.0], [0.0, 0.25, 0.0], [0.0, 0.0, 0.2]]);
    }

    #[test]
    fn invert_fim_pattern() {
        let m = [[2.0, 0.0, 1.0], [0.0, 2.0, 0.0], [1.0, 0.0, 1.0]];
        let inv = invert_3x3(&m).unwrap();
        let want = [[1.0, 0.0, -1.0], [0.0, 0.5, 0.0], [-1.0, 0.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((inv[i][j] - want[i][j]).abs() < 1e-14);
            }
        }
        let prod = mul3(&m, &inv);
        for (i, row) in prod.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((x - e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn invert_rejects_singular() {
        let m = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]];
        assert!(matches!(invert_3x3(&m), Err(Error::SingularMatrix { .. })));
    }
}
