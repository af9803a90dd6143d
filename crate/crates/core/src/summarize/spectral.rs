//! Adjacency spectrum: top eigenvalues and characteristic polynomial.

use crate::error::{Error, Result};
use crate::triangulate::AdjacencyMatrix;

/// Largest matrix handled by the dense tridiagonal solver.
pub const DENSE_LIMIT: usize = 400;
/// Largest matrix for the Faddeev-LeVerrier recurrence.
pub const CHAR_POLY_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub eig1: f64,
    pub eig2: f64,
    pub eig3: f64,
    pub char_coeffs: Option<Vec<f64>>,
}

/// Householder reduction of a dense symmetric matrix (row-major, consumed)
/// to tridiagonal form. Returns `(diagonal, subdiagonal)` with the
/// subdiagonal in `e[1..]`.
fn tridiagonalize(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let idx = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[idx(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..=l {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let f = a[idx(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g / h;
                    f_acc += e[j] * a[idx(i, j)];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[idx(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[idx(j, k)] -= f * e[k] + g * a[idx(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
        d[i] = h;
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[idx(i, i)];
    }
    (d, e)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// subdiagonal `e[1..]`, by implicit QL with Wilkinson-type shifts.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(d);
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
            if iter > 100 {
                return Err(Error::Singular("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
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
    Ok(d)
}

/// All eigenvalues of a dense symmetric row-major matrix, descending.
pub fn symmetric_eigenvalues(a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let (d, e) = tridiagonalize(a, n);
    let mut ev = tridiagonal_eigenvalues(d, e)?;
    ev.sort_by(|x, y| y.total_cmp(x));
    Ok(ev)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sparse_mul(a: &AdjacencyMatrix, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = a.neighbours(i).iter().map(|&j| v[j]).sum();
    }
}

/// Top `k` eigenvalues by Lanczos iteration with full reorthogonalization.
/// Stops when the leading Ritz values move by less than `tol` between
/// checks, or when the Krylov space is exhausted.
pub fn top_eigenvalues_lanczos(a: &AdjacencyMatrix, k: usize, tol: f64) -> Result<Vec<f64>> {
    let n = a.n();
    if n < k {
        return Err(Error::InsufficientPoints { needed: k, got: n });
    }
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7311).sin()).collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut previous: Option<Vec<f64>> = None;
    loop {
        let m = basis.len() - 1;
        sparse_mul(a, &basis[m], &mut w);
        let alpha = dot(&w, &basis[m]);
        alphas.push(alpha);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = dot(&w, &w).sqrt();
        let size = alphas.len();
        let exhausted = beta < 1e-10 || size == n;
        if size >= k && (size % 8 == 0 || exhausted) {
            let mut e = vec![0.0; size];
            e[1..size].copy_from_slice(&betas[..size - 1]);
            let mut ritz = tridiagonal_eigenvalues(alphas.clone(), e)?;
            ritz.sort_by(|x, y| y.total_cmp(x));
            ritz.truncate(k);
            if exhausted {
                if size < n && ritz.len() == k {
                    // Invariant subspace found early; the start vector may miss
                    // part of the spectrum, so fall back to the dense solver.
                    return top_dense(a, k);
                }
                return Ok(ritz);
            }
            if let Some(prev) = &previous {
                if prev.iter().zip(&ritz).all(|(p, r)| (p - r).abs() < tol) {
                    return Ok(ritz);
                }
            }
            previous = Some(ritz);
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
}

fn top_dense(a: &AdjacencyMatrix, k: usize) -> Result<Vec<f64>> {
    let mut ev = symmetric_eigenvalues(a.to_dense(), a.n())?;
    ev.truncate(k);
    Ok(ev)
}

/// The `k` algebraically largest eigenvalues, descending.
pub fn top_eigenvalues(a: &AdjacencyMatrix, k: usize) -> Result<Vec<f64>> {
    let n = a.n();
    if n < k {
        return Err(Error::InsufficientPoints { needed: k, got: n });
    }
    if n <= DENSE_LIMIT {
        top_dense(a, k)
    } else {
        top_eigenvalues_lanczos(a, k, 1e-11)
    }
}

/// Monic characteristic polynomial `[1, c1, ..., cn]` (coefficient of
/// `lambda^(n-k)` at index `k`) by the Faddeev-LeVerrier recurrence.
pub fn char_poly_coeffs(a: &AdjacencyMatrix) -> Result<Vec<f64>> {
    let n = a.n();
    if n > CHAR_POLY_LIMIT {
        return Err(Error::TooLarge(n));
    }
    let mut coeffs = vec![1.0];
    // M_1 = I
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    let mut am = vec![0.0; n * n];
    for k in 1..=n {
        // am = A * M_k
        for i in 0..n {
            for j in 0..n {
                am[i * n + j] = a.neighbours(i).iter().map(|&l| m[l * n + j]).sum();
            }
        }
        let trace: f64 = (0..n).map(|i| am[i * n + i]).sum();
        let ck = -trace / k as f64;
        coeffs.push(ck);
        // M_{k+1} = A M_k + c_k I
        std::mem::swap(&mut m, &mut am);
        for i in 0..n {
            m[i * n + i] += ck;
        }
    }
    Ok(coeffs)
}

/// Top three eigenvalues, plus the characteristic polynomial when small.
pub fn spectral_summary(a: &AdjacencyMatrix) -> Result<SpectralSummary> {
    let top = top_eigenvalues(a, 3)?;
    let char_coeffs = if a.n() <= CHAR_POLY_LIMIT {
        Some(char_poly_coeffs(a)?)
    } else {
        None
    };
    Ok(SpectralSummary {
        eig1: top[0],
        eig2: top[1],
        eig3: top[2],
        char_coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn complete_graph_on_three() {
        let a = AdjacencyMatrix::from_edges(3, &[[0, 1], [1, 2], [0, 2]]);
        assert!(close(&top_eigenvalues(&a, 3).unwrap(), &[2.0, -1.0, -1.0], 1e-12));
        assert_eq!(char_poly_coeffs(&a).unwrap(), vec![1.0, 0.0, -3.0, -2.0]);
    }

    #[test]
    fn path_on_three() {
        let a = AdjacencyMatrix::from_edges(3, &[[0, 1], [1, 2]]);
        let s = 2f64.sqrt();
        assert!(close(&top_eigenvalues(&a, 3).unwrap(), &[s, 0.0, -s], 1e-12));
    }

    #[test]
    fn edgeless_pair() {
        let a = AdjacencyMatrix::from_edges(2, &[]);
        assert_eq!(char_poly_coeffs(&a).unwrap(), vec![1.0, 0.0, 0.0]);
        assert!(top_eigenvalues(&a, 3).is_err());
    }

    #[test]
    fn char_poly_guard() {
        let edges: Vec<[usize; 2]> = (0..64).map(|i| [i, i + 1]).collect();
        let a = AdjacencyMatrix::from_edges(65, &edges);
        assert!(matches!(char_poly_coeffs(&a), Err(Error::TooLarge(65))));
    }

    #[test]
    fn cycle_spectrum_matches_closed_form() {
        let n = 12;
        let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
        let a = AdjacencyMatrix::from_edges(n, &edges);
        let mut exact: Vec<f64> = (0..n)
            .map(|j| 2.0 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        exact.sort_by(|x, y| y.total_cmp(x));
        let all = symmetric_eigenvalues(a.to_dense(), n).unwrap();
        assert!(close(&all, &exact, 1e-12));
    }

    #[test]
    fn lanczos_agrees_with_dense_on_grid_graph() {
        let side = 25;
        let id = |i: usize, j: usize| i * side + j;
        let mut edges = Vec::new();
        for i in 0..side {
            for j in 0..side {
                if i + 1 < side {
                    edges.push([id(i, j), id(i + 1, j)]);
                }
                if j + 1 < side {
                    edges.push([id(i, j), id(i, j + 1)]);
                }
                if i + 1 < side && j + 1 < side {
                    edges.push([id(i, j), id(i + 1, j + 1)]);
                }
            }
        }
        let a = AdjacencyMatrix::from_edges(side * side, &edges);
        let lz = top_eigenvalues_lanczos(&a, 3, 1e-11).unwrap();
        let dense = top_dense(&a, 3).unwrap();
        assert!(close(&lz, &dense, 1e-8), "{lz:?} vs {dense:?}");
    }
}
