//! Fixed-size 2×2 real/complex helpers. Everything downstream works with
//! two-component states, so a dense library would be overkill.

use num_complex::Complex64;

pub type Mat2 = [[f64; 2]; 2];
pub type CVec2 = [Complex64; 2];
pub type CMat2 = [[Complex64; 2]; 2];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn to_complex(m: &Mat2) -> CMat2 {
    [
        [c(m[0][0], 0.0), c(m[0][1], 0.0)],
        [c(m[1][0], 0.0), c(m[1][1], 0.0)],
    ]
}

pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn trace(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

pub fn mat_vec(m: &CMat2, v: &CVec2) -> CVec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub fn real_mat_vec(m: &Mat2, v: &CVec2) -> CVec2 {
    [
        v[0] * m[0][0] + v[1] * m[0][1],
        v[0] * m[1][0] + v[1] * m[1][1],
    ]
}

/// Row-vector product `u^T m`.
pub fn vec_mat(u: &CVec2, m: &CMat2) -> CVec2 {
    [
        u[0] * m[0][0] + u[1] * m[1][0],
        u[0] * m[0][1] + u[1] * m[1][1],
    ]
}

/// Plain (non-conjugating) dot product.
pub fn dot(u: &CVec2, v: &CVec2) -> Complex64 {
    u[0] * v[0] + u[1] * v[1]
}

pub fn conj(v: &CVec2) -> CVec2 {
    [v[0].conj(), v[1].conj()]
}

pub fn scale(v: &CVec2, s: Complex64) -> CVec2 {
    [v[0] * s, v[1] * s]
}

pub fn add(u: &CVec2, v: &CVec2) -> CVec2 {
    [u[0] + v[0], u[1] + v[1]]
}

pub fn sub(u: &CVec2, v: &CVec2) -> CVec2 {
    [u[0] - v[0], u[1] - v[1]]
}

pub fn norm(v: &CVec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// `A + e B - lambda I` with real `A`, `B`.
pub fn combine(a: &Mat2, b: &Mat2, e: Complex64, lambda: Complex64) -> CMat2 {
    let mut m = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][j] + e * b[i][j];
        }
        m[i][i] -= lambda;
    }
    m
}

/// Gaussian elimination with partial pivoting. Returns `None` when the
/// matrix is singular relative to `rtol` times its largest entry.
pub fn solve(m: &CMat2, rhs: &CVec2, rtol: f64) -> Option<CVec2> {
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let (p, q) = if m[0][0].norm() >= m[1][0].norm() {
        (0, 1)
    } else {
        (1, 0)
    };
    let pivot = m[p][0];
    if pivot.norm() <= rtol * scale {
        return None;
    }
    let factor = m[q][0] / pivot;
    let u11 = m[q][1] - factor * m[p][1];
    if u11.norm() <= rtol * scale {
        return None;
    }
    let x1 = (rhs[q] - factor * rhs[p]) / u11;
    let x0 = (rhs[p] - m[p][1] * x1) / pivot;
    Some([x0, x1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_recovers_known_solution() {
        let m = [[c(1e-3, 2.0), c(3.0, -1.0)], [c(4.0, 0.5), c(-2.0, 0.0)]];
        let x = [c(0.3, -0.7), c(-1.2, 2.5)];
        let b = mat_vec(&m, &x);
        let y = solve(&m, &b, 1e-14).unwrap();
        assert!(norm(&sub(&x, &y)) < 1e-14);
    }

    #[test]
    fn singular_is_none() {
        let m = [[c(1.0, 1.0), c(2.0, 2.0)], [c(2.0, 2.0), c(4.0, 4.0)]];
        assert!(solve(&m, &[c(1.0, 0.0), c(0.0, 0.0)], 1e-12).is_none());
    }
}
