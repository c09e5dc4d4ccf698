//! Reference computations that share no code with the library.
#![allow(dead_code)]

use rand::Rng;

/// Solves `A_S x = b` for the columns `cols` by Gaussian elimination with
/// partial pivoting. `None` if the columns are dependent or the system is
/// inconsistent.
pub fn solve_on_columns(a: &[Vec<f64>], b: &[f64], cols: &[usize]) -> Option<Vec<f64>> {
    let p = a.len();
    let k = cols.len();
    let mut m: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let mut row: Vec<f64> = cols.iter().map(|&j| a[i][j]).collect();
            row.push(b[i]);
            row
        })
        .collect();
    let scale = m.iter().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
    let mut r = 0;
    for c in 0..k {
        let piv = (r..p).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))?;
        if m[piv][c].abs() < 1e-10 * scale {
            return None;
        }
        m.swap(r, piv);
        for i in 0..p {
            if i != r {
                let f = m[i][c] / m[r][c];
                for j in c..=k {
                    let v = m[r][j];
                    m[i][j] -= f * v;
                }
            }
        }
        r += 1;
    }
    if m[k..].iter().any(|row| row[k].abs() > 1e-8 * scale) {
        return None;
    }
    Some((0..k).map(|i| m[i][k] / m[i][i]).collect())
}

pub fn rank(a: &[Vec<f64>]) -> usize {
    let mut m = a.to_vec();
    let (p, n) = (m.len(), m.first().map_or(0, Vec::len));
    let mut r = 0;
    for c in 0..n {
        if r == p {
            break;
        }
        let piv = (r..p).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        if m[piv][c].abs() < 1e-10 {
            continue;
        }
        m.swap(r, piv);
        for i in r + 1..p {
            let f = m[i][c] / m[r][c];
            for j in c..n {
                let v = m[r][j];
                m[i][j] -= f * v;
            }
        }
        r += 1;
    }
    r
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for j in start..n {
        if n - j < k - cur.len() {
            break;
        }
        cur.push(j);
        subsets(n, k, j + 1, cur, f);
        cur.pop();
    }
}

/// Minimum of `cᵀx` over `Ax = b, x ≥ 0` by enumerating every basic
/// solution. `None` when no basic solution is feasible.
pub fn vertex_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = c.len();
    let r = rank(a);
    let mut best: Option<f64> = None;
    if r == 0 {
        return b.iter().all(|x| x.abs() < 1e-12).then_some(0.0);
    }
    subsets(n, r, 0, &mut Vec::new(), &mut |cols| {
        if let Some(x) = solve_on_columns(a, b, cols) {
            if x.iter().all(|&v| v >= -1e-9) {
                let obj: f64 = cols.iter().zip(&x).map(|(&j, v)| c[j] * v).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    });
    best
}

/// Orthonormal zero-sum basis, vector `k` having `k` leading entries
/// `1/√(k(k+1))` followed by `−k/√(k(k+1))`.
pub fn helmert(m: usize) -> Vec<Vec<f64>> {
    (1..m)
        .map(|k| {
            let s = ((k * (k + 1)) as f64).sqrt();
            let mut v = vec![0.0; m];
            for x in v.iter_mut().take(k) {
                *x = 1.0 / s;
            }
            v[k] = -(k as f64) / s;
            v
        })
        .collect()
}

pub fn quad(c: &[Vec<f64>], a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            s += a[i] * c[i][j] * b[j];
        }
    }
    s
}

/// `BᵀCB` entry by entry from explicit quadratic forms.
pub fn reduced(c: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let h = helmert(c.len());
    h.iter().map(|u| h.iter().map(|v| quad(c, u, v)).collect()).collect()
}

/// Eigenvalues of a symmetric matrix of size at most 2, ascending.
pub fn small_eigenvalues(r: &[Vec<f64>]) -> Vec<f64> {
    match r.len() {
        0 => vec![],
        1 => vec![r[0][0]],
        2 => {
            let (a, b, d) = (r[0][0], r[0][1], r[1][1]);
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            vec![mid - rad, mid + rad]
        }
        _ => panic!("only sizes up to 2"),
    }
}

/// Average of `C[x_i][x_j]` over ordered pairs `i ≠ j`, for each sequence
/// in `[m]^n`, accumulated by occupation counts.
pub fn sequence_energies(c: &[Vec<f64>], n: usize) -> Vec<(Vec<u32>, f64)> {
    let m = c.len();
    let total = m.pow(n as u32);
    let mut out: Vec<(Vec<u32>, f64)> = Vec::new();
    for code in 0..total {
        let mut x = Vec::with_capacity(n);
        let mut rest = code;
        for _ in 0..n {
            x.push(rest % m);
            rest /= m;
        }
        let mut counts = vec![0u32; m];
        for &xi in &x {
            counts[xi] += 1;
        }
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += c[x[i]][x[j]];
                }
            }
        }
        let e = s / (n * (n - 1)) as f64;
        if !out.iter().any(|(k, _)| *k == counts) {
            out.push((counts, e));
        }
    }
    out
}

/// Exact minimal `N`-body energy at marginal `mu` by vertex enumeration
/// over occupation states.
pub fn nbody_oracle(c: &[Vec<f64>], mu: &[f64], n: usize) -> f64 {
    let states = sequence_energies(c, n);
    let m = c.len();
    let cost: Vec<f64> = states.iter().map(|(_, e)| *e).collect();
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|i| states.iter().map(|(k, _)| k[i] as f64 / n as f64).collect())
        .collect();
    a.push(vec![1.0; states.len()]);
    let mut b = mu.to_vec();
    b.push(1.0);
    vertex_min(&cost, &a, &b).expect("marginal is feasible")
}

pub fn random_symmetric_nonneg<R: Rng>(rng: &mut R, m: usize, hi: f64) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let v = rng.random_range(0.0..hi);
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    c
}

/// `GᵀG + s·11ᵀ` with the shift chosen to make every entry nonnegative:
/// positive semidefinite, and positive semidefinite on zero-sum vectors.
pub fn random_psd_nonneg<R: Rng>(rng: &mut R, m: usize, rank: usize) -> Vec<Vec<f64>> {
    let g: Vec<Vec<f64>> = (0..rank).map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            c[i][j] = g.iter().map(|row| row[i] * row[j]).sum();
        }
    }
    let shift = c.iter().flatten().fold(0.0f64, |s, &x| s.max(-x));
    for row in &mut c {
        for x in row {
            *x += shift;
        }
    }
    c
}

pub fn random_prob<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m).map(|_| -rng.random_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

/// Uniformly random direction in the zero-sum hyperplane, unit length.
pub fn random_zero_sum<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..m).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let mean = v.iter().sum::<f64>() / m as f64;
        for x in &mut v {
            *x -= mean;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn random_unit<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Random on-grid probability vector with every entry a positive multiple
/// of `1/r` (requires `r ≥ m`).
pub fn random_grid_interior<R: Rng>(rng: &mut R, m: usize, r: usize) -> Vec<f64> {
    let mut k = vec![1usize; m];
    for _ in m..r {
        k[rng.random_range(0..m)] += 1;
    }
    k.into_iter().map(|x| x as f64 / r as f64).collect()
}

/// Random feasible and bounded LP: either nonnegative costs or a
/// normalizing row. Returns `(c, A, b)`.
pub fn random_lp<R: Rng>(rng: &mut R, n: usize, p: usize) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let mut a: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.random_range(-3i32..=3) as f64).collect())
        .collect();
    let bounded_by_row = p < n && rng.random_bool(0.5);
    if bounded_by_row {
        a.push(vec![1.0; n]);
    }
    let x0: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0..4) as f64 })
        .collect();
    let b = a.iter().map(|row| row.iter().zip(&x0).map(|(r, x)| r * x).sum()).collect();
    let c = (0..n)
        .map(|_| {
            if bounded_by_row {
                rng.random_range(-5i32..=5) as f64
            } else {
                rng.random_range(0i32..=5) as f64
            }
        })
        .collect();
    (c, a, b)
}
