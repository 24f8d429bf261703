//! Small dense complex linear algebra on fixed-size nalgebra matrices.

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector};
use num_complex::Complex;
use num_traits::Float;

pub type C64 = Complex<f64>;

/// Operator on the two-atom space `{0,1,r} ⊗ {0,1,r}`.
pub type TwoAtomOperator = SMatrix<C64, 9, 9>;
/// State vector on the two-atom space.
pub type TwoAtomState = SVector<C64, 9>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Largest element modulus.
pub fn max_abs<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |H − H†|`.
pub fn hermiticity_defect<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `max |U†U − 1|`.
pub fn unitarity_defect<const N: usize>(u: &SMatrix<C64, N, N>) -> f64 {
    max_abs(&(u.adjoint() * u - SMatrix::<C64, N, N>::identity()))
}

pub fn commutator<const N: usize>(
    a: &SMatrix<C64, N, N>,
    b: &SMatrix<C64, N, N>,
) -> SMatrix<C64, N, N> {
    a * b - b * a
}

// Row-sum norm with |re| + |im| in place of the modulus; an upper bound on
// the induced ∞-norm that avoids square roots.
fn row_norm_bound<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    let mut best = 0.0f64;
    for i in 0..N {
        let mut s = 0.0;
        for j in 0..N {
            let z = m[(i, j)];
            s += z.re.abs() + z.im.abs();
        }
        best = best.max(s);
    }
    best
}

/// Matrix exponential by scaling and squaring with a Taylor core.
///
/// The scaled matrix has norm at most 1/2 and the series is summed until
/// the next term falls below machine precision.
pub fn expm<const N: usize>(a: &SMatrix<C64, N, N>) -> SMatrix<C64, N, N> {
    let norm = row_norm_bound(a);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * real(scale);
    let mut term = SMatrix::<C64, N, N>::identity();
    let mut sum = term;
    for k in 1..=40 {
        term = term * a * real(1.0 / k as f64);
        sum += term;
        if row_norm_bound(&term) <= 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// `exp(−i·h·dt)` for Hermitian `h`.
pub fn evolution_operator<const N: usize>(h: &SMatrix<C64, N, N>, dt: f64) -> SMatrix<C64, N, N> {
    expm(&(h * c(0.0, -dt)))
}

/// Closed-form `exp(−i·h·dt)` for a 2×2 Hermitian `h`.
pub fn evolution_operator_2x2(h: &Matrix2<C64>, dt: f64) -> Matrix2<C64> {
    // h = a0·1 + nx σx + ny σy + nz σz
    let a0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let nz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let nx = h[(1, 0)].re;
    let ny = h[(1, 0)].im;
    let n = (nx * nx + ny * ny + nz * nz).sqrt();
    let phase = C64::from_polar(1.0, -a0 * dt);
    let (s, cth) = (n * dt).sin_cos();
    if n == 0.0 {
        return Matrix2::identity() * phase;
    }
    let (ux, uy, uz) = (nx / n, ny / n, nz / n);
    // cos·1 − i·sin·(n̂·σ)
    let m = Matrix2::new(
        c(cth, -s * uz),
        c(-s * uy, -s * ux),
        c(s * uy, -s * ux),
        c(cth, s * uz),
    );
    m * phase
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen<const N: usize>(
    h: &SMatrix<C64, N, N>,
) -> (SVector<f64, N>, SMatrix<C64, N, N>) {
    let dense = nalgebra::DMatrix::from_fn(N, N, |r, col| h[(r, col)]);
    let eig = nalgebra::linalg::SymmetricEigen::new(dense);
    let mut order: [usize; N] = core::array::from_fn(|i| i);
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = SVector::<f64, N>::from_fn(|i, _| eig.eigenvalues[order[i]]);
    let vectors = SMatrix::<C64, N, N>::from_fn(|r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

/// Kronecker product of two single-qubit operators, first factor on the
/// more significant index.
pub fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Pauli matrices in the order 1, σx, σy, σz.
pub fn pauli(k: usize) -> Matrix2<C64> {
    match k {
        0 => Matrix2::identity(),
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {k} out of range"),
    }
}
