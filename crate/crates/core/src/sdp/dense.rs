//! Dense real kernels on row-major square matrices.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

/// Row block height and column tile width of the trailing update.
const TILE_I: usize = 4;
const TILE_J: usize = 8;
const PANEL: usize = 96;

/// In-place Cholesky factorization `a = L L^T` of a symmetric positive
/// definite matrix. Only the lower triangle is read; on success it holds `L`
/// and the strict upper triangle is unspecified. Returns the failing pivot
/// index otherwise.
pub fn cholesky(a: &mut [f64], n: usize) -> Result<(), usize> {
    debug_assert_eq!(a.len(), n * n);
    let mut panel_t = vec![0.0; PANEL * n];
    let mut k0 = 0;
    while k0 < n {
        let k1 = (k0 + PANEL).min(n);
        let kb = k1 - k0;

        for j in k0..k1 {
            let row_j = &mut a[j * n..j * n + n];
            let mut d = row_j[j];
            for k in k0..j {
                d -= row_j[k] * row_j[k];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(j);
            }
            let l = d.sqrt();
            row_j[j] = l;
            for i in j + 1..k1 {
                let (top, bottom) = a.split_at_mut(i * n);
                let rj = &top[j * n..j * n + n];
                let ri = &mut bottom[..n];
                let mut s = ri[j];
                for k in k0..j {
                    s -= ri[k] * rj[k];
                }
                ri[j] = s / l;
            }
        }

        // L21 = A21 L11^{-T}
        for i in k1..n {
            let (top, bottom) = a.split_at_mut(i * n);
            let ri = &mut bottom[..n];
            for j in k0..k1 {
                let rj = &top[j * n..j * n + n];
                let mut s = ri[j];
                for k in k0..j {
                    s -= ri[k] * rj[k];
                }
                ri[j] = s / rj[j];
            }
        }

        // A22 -= L21 L21^T (lower part, whole tiles)
        let w = n - k1;
        if w == 0 {
            break;
        }
        for r in 0..w {
            let row = &a[(k1 + r) * n + k0..(k1 + r) * n + k1];
            for (k, &x) in row.iter().enumerate() {
                panel_t[k * w + r] = x;
            }
        }
        let mut i0 = 0;
        while i0 < w {
            let ih = TILE_I.min(w - i0);
            let jmax = i0 + ih;
            let mut j0 = 0;
            while j0 < jmax {
                let jw = TILE_J.min(w - j0);
                if ih == TILE_I && jw == TILE_J {
                    tile_update(a, n, k0, kb, k1, i0, j0, &panel_t, w);
                } else {
                    for u in 0..ih {
                        for v in 0..jw {
                            let i = k1 + i0 + u;
                            let mut s = 0.0;
                            for k in 0..kb {
                                s += a[i * n + k0 + k] * panel_t[k * w + j0 + v];
                            }
                            a[i * n + k1 + j0 + v] -= s;
                        }
                    }
                }
                j0 += TILE_J;
            }
            i0 += TILE_I;
        }
        k0 = k1;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn tile_update(
    a: &mut [f64],
    n: usize,
    k0: usize,
    kb: usize,
    k1: usize,
    i0: usize,
    j0: usize,
    pt: &[f64],
    w: usize,
) {
    let mut acc = [[0.0f64; TILE_J]; TILE_I];
    let rows: [usize; TILE_I] = core::array::from_fn(|u| (k1 + i0 + u) * n + k0);
    for k in 0..kb {
        let t: &[f64; TILE_J] = pt[k * w + j0..k * w + j0 + TILE_J]
            .try_into()
            .expect("tile width");
        for u in 0..TILE_I {
            let p = a[rows[u] + k];
            for v in 0..TILE_J {
                acc[u][v] += p * t[v];
            }
        }
    }
    for u in 0..TILE_I {
        let base = (k1 + i0 + u) * n + k1 + j0;
        for v in 0..TILE_J {
            a[base + v] -= acc[u][v];
        }
    }
}

/// Solves `L L^T x = b` in place given the factor from [`cholesky`].
pub fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let s: f64 = row.iter().zip(&b[..i]).map(|(x, y)| x * y).sum();
        b[i] = (b[i] - s) / l[i * n + i];
    }
    for i in (0..n).rev() {
        let xi = b[i] / l[i * n + i];
        b[i] = xi;
        let row = &l[i * n..i * n + i];
        for (bk, &lk) in b[..i].iter_mut().zip(row) {
            *bk -= lk * xi;
        }
    }
}

/// `L^{-1} b` for a lower-triangular factor.
pub fn forward_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let s: f64 = row.iter().zip(&b[..i]).map(|(x, y)| x * y).sum();
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

/// Inverse of a symmetric positive definite matrix from its Cholesky factor.
pub fn cholesky_inverse(l: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.iter_mut().for_each(|x| *x = 0.0);
        col[j] = 1.0;
        cholesky_solve(l, n, &mut col);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    symmetrize(&mut inv, n);
    inv
}

/// `L^{-1} S L^{-T}` for symmetric `s`.
pub fn congruence_inverse(l: &[f64], n: usize, s: &[f64]) -> Vec<f64> {
    // T = L^{-1} S, column by column, then L^{-1} T^T
    let mut t = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = s[i * n + j];
        }
        forward_solve(l, n, &mut col);
        for i in 0..n {
            t[j * n + i] = col[i]; // stored transposed
        }
    }
    let mut out = vec![0.0; n * n];
    // out = L^{-1} T^T where T^T[i][j] = T[j][i] = t[i*n + j]
    for j in 0..n {
        for i in 0..n {
            col[i] = t[i * n + j];
        }
        forward_solve(l, n, &mut col);
        for i in 0..n {
            out[i * n + j] = col[i];
        }
    }
    symmetrize(&mut out, n);
    out
}

pub fn symmetrize(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
}

/// `a b` for square row-major matrices.
pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let orow = &mut out[i * n..i * n + n];
        for k in 0..n {
            let x = a[i * n + k];
            if x == 0.0 {
                continue;
            }
            let brow = &b[k * n..k * n + n];
            for (o, &y) in orow.iter_mut().zip(brow) {
                *o += x * y;
            }
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvalues of a real symmetric matrix (ascending), by Householder
/// tridiagonalization and implicit QL. `None` if QL fails to converge.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return Some(d);
    }
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in j + 1..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[i * n + i];
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return None;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    Some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spd(n: usize, seed: &[f64]) -> Vec<f64> {
        // G G^T + n I
        let g: Vec<f64> = (0..n * n)
            .map(|k| seed[k % seed.len()] * ((k * 7 % 11) as f64 - 5.0))
            .collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum::<f64>();
            }
            a[i * n + i] += n as f64;
        }
        a
    }

    #[test]
    fn cholesky_matches_definition_across_tile_edges() {
        for n in [1, 3, 8, 13, 100, 203] {
            let a = spd(n, &[0.3, -0.7, 1.1, 0.2]);
            let mut l = a.clone();
            cholesky(&mut l, n).unwrap();
            for i in 0..n {
                for j in 0..=i {
                    let s: f64 = (0..=j).map(|k| l[i * n + k] * l[j * n + k]).sum();
                    assert!(
                        (s - a[i * n + j]).abs() < 1e-9 * (1.0 + a[i * n + j].abs()),
                        "n={n} ({i},{j})"
                    );
                }
            }
            let mut b: Vec<f64> = (0..n).map(|k| k as f64 - 1.5).collect();
            let rhs = b.clone();
            cholesky_solve(&l, n, &mut b);
            for i in 0..n {
                let ax: f64 = (0..n).map(|k| a[i * n + k] * b[k]).sum();
                assert!((ax - rhs[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        assert_eq!(cholesky(&mut a, 2), Err(1));
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let w = sym_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14);
        let w = sym_eigenvalues(&[1.0, 2.0, 2.0, 1.0], 2).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14);
        let w = sym_eigenvalues(&[5.0], 1).unwrap();
        assert_eq!(w, vec![5.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn eigenvalues_match_trace_and_frobenius(n in 1usize..30, seed in proptest::collection::vec(-1.0f64..1.0, 16)) {
            let mut a: Vec<f64> = (0..n * n).map(|k| seed[k % 16] + (k % 5) as f64 * 0.1).collect();
            symmetrize(&mut a, n);
            let w = sym_eigenvalues(&a, n).unwrap();
            let tr: f64 = (0..n).map(|i| a[i * n + i]).sum();
            let fro: f64 = a.iter().map(|x| x * x).sum();
            prop_assert!((w.iter().sum::<f64>() - tr).abs() < 1e-9 * (1.0 + fro));
            prop_assert!((w.iter().map(|x| x * x).sum::<f64>() - fro).abs() < 1e-9 * (1.0 + fro));
        }

        #[test]
        fn congruence_inverse_is_symmetric_similarity(n in 1usize..12) {
            let a = spd(n, &[0.5, -0.25, 0.75]);
            let mut l = a.clone();
            cholesky(&mut l, n).unwrap();
            for i in 0..n { for j in i + 1..n { l[i * n + j] = 0.0; } }
            // L^{-1} A L^{-T} = I
            let c = congruence_inverse(&l, n, &a);
            for i in 0..n {
                for j in 0..n {
                    let e = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((c[i * n + j] - e).abs() < 1e-9);
                }
            }
        }
    }
}
