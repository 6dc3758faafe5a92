//! Orthonormal shifted Legendre polynomials on `(0, 1)`.

/// Values of `L_1(u)..L_degree(u)` with `L_k(u) = sqrt(2k+1) P_k(2u - 1)`.
pub fn shifted_legendre(u: f64, degree: usize) -> Vec<f64> {
    let x = 2.0 * u - 1.0;
    let mut out = Vec::with_capacity(degree);
    let (mut prev, mut cur) = (1.0, x);
    for k in 1..=degree {
        if k > 1 {
            let kf = k as f64;
            let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
            prev = cur;
            cur = next;
        }
        out.push((2.0 * k as f64 + 1.0).sqrt() * cur);
    }
    out
}
