//! Tiny fixed-size helpers for 2-vectors and 2x2 matrices.

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(c: f64, a: Vec2) -> Vec2 {
    [c * a[0], c * a[1]]
}

#[inline]
pub fn axpy(c: f64, a: Vec2, b: Vec2) -> Vec2 {
    [c * a[0] + b[0], c * a[1] + b[1]]
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// `v^T m`, i.e. the action of `m` on a row vector.
#[inline]
pub fn vec_mat(v: Vec2, m: &Mat2) -> Vec2 {
    [v[0] * m[0][0] + v[1] * m[1][0], v[0] * m[0][1] + v[1] * m[1][1]]
}

#[inline]
pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

#[inline]
pub fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

#[inline]
pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Inverse of a 2x2 matrix, `None` when the determinant is not usable.
pub fn inverse(a: &Mat2) -> Option<Mat2> {
    let d = det(a);
    if !d.is_finite() || d.abs() < 1e-300 {
        return None;
    }
    Some([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

/// Bilinear form `a^T m b`.
#[inline]
pub fn quad_form(m: &Mat2, a: Vec2, b: Vec2) -> f64 {
    dot(a, mat_vec(m, b))
}

/// Eigenvalues of a symmetric 2x2 matrix in ascending order.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let tr = m[0][0] + m[1][1];
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let off = 0.5 * (m[0][1] + m[1][0]);
    let r = half_diff.hypot(off);
    (0.5 * tr - r, 0.5 * tr + r)
}

/// Symmetric inverse square root of an SPD 2x2 matrix.
pub fn sym_inv_sqrt(m: &Mat2) -> Mat2 {
    // sqrt(M) = (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det)) for SPD 2x2.
    let s = det(m).sqrt();
    let t = (m[0][0] + m[1][1] + 2.0 * s).sqrt();
    let root = [[(m[0][0] + s) / t, m[0][1] / t], [m[1][0] / t, (m[1][1] + s) / t]];
    inverse(&root).expect("SPD matrix has an invertible square root")
}

/// Counter-clockwise rotation by `angle`.
pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    [[c, -s], [s, c]]
}
