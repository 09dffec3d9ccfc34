//! Dense factorizations: Householder QR, one-sided Jacobi SVD, Cholesky.

use rayon::prelude::*;

use super::dense::{dot, norm2, DenseMatrix};

const MAX_SWEEPS: usize = 80;

/// Column-major copy of a matrix as one `Vec` per column.
fn to_columns(a: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..a.cols()).map(|j| a.column(j)).collect()
}

fn from_columns(rows: usize, cols: &[Vec<f64>]) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Thin QR: `a = q · r` with `q` m×p orthonormal and `r` p×n upper triangular,
/// p = min(m, n).
pub fn householder_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = a.shape();
    let p = m.min(n);
    let mut cols = to_columns(a);
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(p);

    for j in 0..p {
        let x = &cols[j][j..];
        let alpha = norm2(x);
        if alpha == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let mut v = x.to_vec();
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vn = norm2(&v);
        v.iter_mut().for_each(|e| *e /= vn);
        cols[j..].par_iter_mut().for_each(|c| reflect(&v, &mut c[j..]));
        reflectors.push(v);
    }

    let r = DenseMatrix::from_fn(p, n, |i, k| if i <= k { cols[k][i] } else { 0.0 });

    let mut q: Vec<Vec<f64>> = (0..p)
        .map(|k| {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            e
        })
        .collect();
    for (j, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        q.par_iter_mut().for_each(|c| reflect(v, &mut c[j..]));
    }
    (from_columns(m, &q), r)
}

#[inline]
fn reflect(v: &[f64], x: &mut [f64]) {
    let s = 2.0 * dot(v, x);
    if s != 0.0 {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi -= s * vi;
        }
    }
}

/// Thin singular value decomposition `a = u · diag(s) · vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// m×p, orthonormal columns.
    pub u: DenseMatrix,
    /// p values, nonincreasing.
    pub s: Vec<f64>,
    /// n×p, orthonormal columns.
    pub v: DenseMatrix,
}

/// Full thin SVD by one-sided (Hestenes) Jacobi rotations. Tall inputs are
/// first reduced with QR; wide inputs are handled through the transpose.
pub fn jacobi_svd(a: &DenseMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = jacobi_svd(&a.transpose());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    if m > n && n > 0 {
        let (q, r) = householder_qr(a);
        let inner = jacobi_square(&r);
        return Svd {
            u: q.matmul(&inner.u).expect("qr factor shapes"),
            s: inner.s,
            v: inner.v,
        };
    }
    jacobi_square(a)
}

fn jacobi_square(a: &DenseMatrix) -> Svd {
    let (m, n) = a.shape();
    let mut cols = to_columns(a);
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            e
        })
        .collect();
    let tol = f64::EPSILON * (m.max(1) as f64).sqrt();
    let rounds = round_robin(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for pairs in &rounds {
            // move the disjoint column pairs out so each rotation owns its data
            let mut work: Vec<(usize, usize, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> = pairs
                .iter()
                .map(|&(p, q)| {
                    (
                        p,
                        q,
                        std::mem::take(&mut cols[p]),
                        std::mem::take(&mut cols[q]),
                        std::mem::take(&mut vcols[p]),
                        std::mem::take(&mut vcols[q]),
                    )
                })
                .collect();
            let any = work
                .par_iter_mut()
                .with_min_len(4)
                .map(|(_, _, ap, aq, vp, vq)| rotate_pair(ap, aq, vp, vq, tol))
                .reduce(|| false, |x, y| x || y);
            rotated |= any;
            for (p, q, ap, aq, vp, vq) in work {
                cols[p] = ap;
                cols[q] = aq;
                vcols[p] = vp;
                vcols[q] = vq;
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    let smax = order.first().map_or(0.0, |&i| sigma[i]);
    let cutoff = smax * 1e-13;

    let mut u_cols: Vec<Option<Vec<f64>>> = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut v_sorted = Vec::with_capacity(n);
    for &k in &order {
        let sk = sigma[k];
        if sk > cutoff && sk > 0.0 {
            u_cols.push(Some(cols[k].iter().map(|x| x / sk).collect()));
        } else {
            u_cols.push(None);
        }
        s.push(sk);
        v_sorted.push(vcols[k].clone());
    }
    let u_cols = complete_orthonormal(m, u_cols);
    Svd {
        u: from_columns(m, &u_cols),
        s,
        v: from_columns(n, &v_sorted),
    }
}

/// Rotates columns p, q so they become orthogonal. Returns whether a rotation
/// was applied.
fn rotate_pair(ap: &mut [f64], aq: &mut [f64], vp: &mut [f64], vq: &mut [f64], tol: f64) -> bool {
    let alpha = dot(ap, ap);
    let beta = dot(aq, aq);
    let gamma = dot(ap, aq);
    if gamma == 0.0 || alpha == 0.0 || beta == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
        return false;
    }
    let zeta = (beta - alpha) / (2.0 * gamma);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;
    for (x, y) in ap.iter_mut().zip(aq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
    true
}

/// Round-robin tournament: every unordered pair of 0..n exactly once, grouped
/// into rounds of disjoint pairs.
fn round_robin(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n < 2 {
        return Vec::new();
    }
    let players = if n % 2 == 0 { n } else { n + 1 };
    let mut ring: Vec<usize> = (0..players).collect();
    let mut rounds = Vec::with_capacity(players - 1);
    for _ in 0..players - 1 {
        let mut pairs = Vec::with_capacity(players / 2);
        for i in 0..players / 2 {
            let (a, b) = (ring[i], ring[players - 1 - i]);
            if a < n && b < n {
                pairs.push((a.min(b), a.max(b)));
            }
        }
        rounds.push(pairs);
        // keep ring[0] fixed, rotate the rest
        let last = ring.pop().expect("nonempty ring");
        ring.insert(1, last);
    }
    rounds
}

/// Fills `None` slots with unit vectors orthogonal to every other column.
pub(crate) fn complete_orthonormal(m: usize, cols: Vec<Option<Vec<f64>>>) -> Vec<Vec<f64>> {
    let mut done: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    let known: Vec<Vec<f64>> = cols.iter().flatten().cloned().collect();
    let mut next_basis = 0usize;
    for c in cols {
        match c {
            Some(v) => done.push(v),
            None => {
                let mut found = None;
                while next_basis < m {
                    let mut e = vec![0.0; m];
                    e[next_basis] = 1.0;
                    next_basis += 1;
                    for _ in 0..2 {
                        for b in known.iter().chain(done.iter()) {
                            let d = dot(b, &e);
                            e.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
                        }
                    }
                    let nrm = norm2(&e);
                    if nrm > 1e-6 {
                        e.iter_mut().for_each(|x| *x /= nrm);
                        found = Some(e);
                        break;
                    }
                }
                done.push(found.unwrap_or_else(|| vec![0.0; m]));
            }
        }
    }
    done
}

/// Lower Cholesky factor of a symmetric positive-definite matrix, or `None`
/// when a pivot is not safely positive.
pub fn cholesky(a: &DenseMatrix) -> Option<DenseMatrix> {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a.get(i, i).abs()));
    let floor = max_diag * 1e-12;
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let lj = l.row(j)[..j].to_vec();
        let d = a.get(j, j) - dot(&lj, &lj);
        if !(d > floor) {
            return None;
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        let below: Vec<f64> = (j + 1..n)
            .into_par_iter()
            .map(|i| (a.get(i, j) - dot(&l.row(i)[..j], &lj)) / djj)
            .collect();
        for (off, v) in below.into_iter().enumerate() {
            l.set(j + 1 + off, j, v);
        }
    }
    Some(l)
}

/// Solves `(l lᵀ) x = b` for every column of `b`.
pub fn cholesky_solve(l: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = l.rows();
    let q = b.cols();
    let bt = b.transpose();
    let mut xt = DenseMatrix::zeros(q, n);
    xt.data_mut()
        .par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(c, x)| {
            let rhs = bt.row(c);
            for i in 0..n {
                let s = rhs[i] - dot(&l.row(i)[..i], &x[..i]);
                x[i] = s / l.get(i, i);
            }
            for i in (0..n).rev() {
                let mut s = x[i];
                for k in i + 1..n {
                    s -= l.get(k, i) * x[k];
                }
                x[i] = s / l.get(i, i);
            }
        });
    xt.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(rows: usize, cols: usize, salt: u64) -> DenseMatrix {
        let mut state = salt.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        DenseMatrix::from_fn(rows, cols, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    fn orthonormality_error(q: &DenseMatrix) -> f64 {
        let g = q.t_matmul(q).unwrap();
        g.max_abs_diff(&DenseMatrix::identity(q.cols()))
    }

    #[test]
    fn round_robin_covers_every_pair_once() {
        for n in [2, 5, 8, 9] {
            let mut seen = std::collections::HashSet::new();
            for round in round_robin(n) {
                let mut used = std::collections::HashSet::new();
                for (p, q) in round {
                    assert!(used.insert(p) && used.insert(q));
                    assert!(seen.insert((p, q)));
                }
            }
            assert_eq!(seen.len(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn qr_reconstructs() {
        for (m, n) in [(6, 4), (4, 6), (5, 5)] {
            let a = pseudo_random(m, n, (m * 10 + n) as u64);
            let (q, r) = householder_qr(&a);
            assert!(q.matmul(&r).unwrap().max_abs_diff(&a) < 1e-12);
            assert!(orthonormality_error(&q) < 1e-12);
        }
    }

    #[test]
    fn svd_reconstructs_all_shapes() {
        for (m, n) in [(7, 3), (3, 7), (6, 6), (1, 4), (4, 1)] {
            let a = pseudo_random(m, n, (m * 31 + n) as u64);
            let svd = jacobi_svd(&a);
            let rebuilt = svd
                .u
                .matmul(&DenseMatrix::diag(&svd.s))
                .unwrap()
                .matmul(&svd.v.transpose())
                .unwrap();
            assert!(rebuilt.max_abs_diff(&a) < 1e-12, "{m}x{n}");
            assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
            assert!(orthonormality_error(&svd.u) < 1e-12);
            assert!(orthonormality_error(&svd.v) < 1e-12);
        }
    }

    #[test]
    fn zero_matrix_svd_has_orthonormal_factors() {
        let svd = jacobi_svd(&DenseMatrix::zeros(4, 3));
        assert!(svd.s.iter().all(|&s| s == 0.0));
        assert!(orthonormality_error(&svd.u) < 1e-12);
        assert!(orthonormality_error(&svd.v) < 1e-12);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let b = pseudo_random(6, 4, 3);
        let a = b.t_matmul(&b).unwrap().add(&DenseMatrix::identity(4)).unwrap();
        let l = cholesky(&a).unwrap();
        assert!(l.matmul(&l.transpose()).unwrap().max_abs_diff(&a) < 1e-12);
        let rhs = pseudo_random(4, 2, 9);
        let x = cholesky_solve(&l, &rhs);
        assert!(a.matmul(&x).unwrap().max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_singular() {
        let a = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(cholesky(&a).is_none());
    }
}
