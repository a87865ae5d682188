//! Small dense eigensolvers.
//!
//! Symmetric: Householder tridiagonalisation followed by implicit QL with
//! Wilkinson-type shifts. General: balancing, Householder reduction to
//! Hessenberg form, then Francis double-shift QR on the Hessenberg matrix.

use crate::error::{Error, Result};
use crate::linalg::max_abs_diff;
use crate::{Matrix, Vector};

/// Symmetry tolerance accepted by [`eig_sym`].
pub const SYMMETRY_TOL: f64 = 1e-10;
const MAX_DIM: usize = 512;
const QL_MAX_SWEEPS: usize = 60;
const QR_MAX_ITERS: usize = 60;

/// Ascending eigenvalues with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vector,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }
    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

fn check_square(a: &Matrix) -> Result<usize> {
    let n = a.nrows();
    if n != a.ncols() || n == 0 {
        return Err(Error::Dimension(format!("matrix must be square, got {:?}", a.shape())));
    }
    if n > MAX_DIM {
        return Err(Error::Dimension(format!("dense eigensolver limited to n ≤ {MAX_DIM}")));
    }
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericalDivergence("non-finite matrix entry".into()));
    }
    Ok(n)
}

/// Eigen-decomposition of a symmetric matrix.
pub fn eig_sym(a: &Matrix) -> Result<SymEigen> {
    let n = check_square(a)?;
    let asym = max_abs_diff(a, &a.transpose());
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    // Row-major working copy of the symmetrised input.
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (a[(i, j)] + a[(j, i)])).collect())
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| d[i]));
    let vectors = Matrix::from_fn(n, n, |r, c| v[r][order[c]]);
    Ok(SymEigen { values, vectors })
}

// Householder reduction to tridiagonal form, accumulating the transform in `v`.
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e), rotating the columns of `v`.
fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > QL_MAX_SWEEPS {
                    return Err(Error::SpectrumNotResolved(QL_MAX_SWEEPS));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// All (possibly complex) eigenvalues as `(re, im)` pairs, unordered.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<(f64, f64)>> {
    let n = check_square(a)?;
    // 1-based working storage keeps the QR sweep readable.
    let mut h = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            h[i + 1][j + 1] = a[(i, j)];
        }
    }
    balance(&mut h, n);
    hessenberg(&mut h, n);
    hqr(&mut h, n)
}

/// `max |λ|` over the spectrum of a general real matrix.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .fold(0.0, f64::max))
}

/// Largest singular value `‖A‖₂`.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let ata = a.transpose() * a;
    let ata = (&ata + ata.transpose()) * 0.5;
    Ok(eig_sym(&ata)?.max().max(0.0).sqrt())
}

// Diagonal similarity by powers of two so row and column norms match.
fn balance(a: &mut [Vec<f64>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut().skip(1) {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

// Orthogonal (Householder) reduction to upper Hessenberg form.
fn hessenberg(a: &mut [Vec<f64>], n: usize) {
    for k in 1..n.saturating_sub(1) {
        // Annihilate a[k+2..=n][k].
        let alpha_norm: f64 = ((k + 1)..=n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -alpha_norm } else { alpha_norm };
        let mut v = vec![0.0; n + 1];
        for i in (k + 1)..=n {
            v[i] = a[i][k];
        }
        v[k + 1] -= alpha;
        let vn2: f64 = ((k + 1)..=n).map(|i| v[i] * v[i]).sum();
        if vn2 == 0.0 {
            continue;
        }
        // Left: A ← (I − 2vvᵀ/vᵀv) A on rows k+1..n.
        for j in 1..=n {
            let s: f64 = ((k + 1)..=n).map(|i| v[i] * a[i][j]).sum();
            let s = 2.0 * s / vn2;
            for i in (k + 1)..=n {
                a[i][j] -= s * v[i];
            }
        }
        // Right: A ← A (I − 2vvᵀ/vᵀv) on columns k+1..n.
        for row in a.iter_mut().skip(1) {
            let s: f64 = ((k + 1)..=n).map(|j| row[j] * v[j]).sum();
            let s = 2.0 * s / vn2;
            for j in (k + 1)..=n {
                row[j] -= s * v[j];
            }
        }
        a[k + 1][k] = alpha;
        for row in a.iter_mut().skip(k + 2) {
            row[k] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

// Francis double-shift QR on an upper Hessenberg matrix (1-based).
fn hqr(a: &mut [Vec<f64>], n: usize) -> Result<Vec<(f64, f64)>> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    let mut its = 0;
    while nn >= 1 {
        // Look for a single small subdiagonal element.
        let mut l = 1;
        for ll in (2..=nn).rev() {
            let mut s = a[ll - 1][ll - 1].abs() + a[ll][ll].abs();
            if s == 0.0 {
                s = anorm;
            }
            if a[ll][ll - 1].abs() + s == s {
                a[ll][ll - 1] = 0.0;
                l = ll;
                break;
            }
        }
        let mut x = a[nn][nn];
        if l == nn {
            wr[nn] = x + t;
            wi[nn] = 0.0;
            nn -= 1;
            its = 0;
            continue;
        }
        let mut y = a[nn - 1][nn - 1];
        let mut w = a[nn][nn - 1] * a[nn - 1][nn];
        if l == nn - 1 {
            let p = 0.5 * (y - x);
            let q = p * p + w;
            let mut z = q.abs().sqrt();
            x += t;
            if q >= 0.0 {
                z = p + sign(z, p);
                wr[nn - 1] = x + z;
                wr[nn] = x + z;
                if z != 0.0 {
                    wr[nn] = x - w / z;
                }
                wi[nn - 1] = 0.0;
                wi[nn] = 0.0;
            } else {
                wr[nn - 1] = x + p;
                wr[nn] = x + p;
                wi[nn - 1] = -z;
                wi[nn] = z;
            }
            nn = nn.saturating_sub(2);
            its = 0;
            continue;
        }
        if its == QR_MAX_ITERS {
            return Err(Error::SpectrumNotResolved(QR_MAX_ITERS));
        }
        if its > 0 && its % 10 == 0 {
            // Exceptional shift.
            t += x;
            for i in 1..=nn {
                a[i][i] -= x;
            }
            let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;
        let (mut p, mut q, mut r);
        let mut z;
        let mut m = nn - 2;
        loop {
            z = a[m][m];
            r = x - z;
            let s = y - z;
            p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - r - s;
            r = a[m + 2][m + 1];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = a[m][m - 1].abs() * (q.abs() + r.abs());
            let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
            if u + v == v {
                break;
            }
            m -= 1;
        }
        for i in (m + 2)..=nn {
            a[i][i - 2] = 0.0;
            if i != m + 2 {
                a[i][i - 3] = 0.0;
            }
        }
        let mut k = m;
        while k < nn {
            if k != m {
                p = a[k][k - 1];
                q = a[k + 1][k - 1];
                r = 0.0;
                if k != nn - 1 {
                    r = a[k + 2][k - 1];
                }
                x = p.abs() + q.abs() + r.abs();
                if x != 0.0 {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            let s = sign((p * p + q * q + r * r).sqrt(), p);
            if s != 0.0 {
                if k == m {
                    if l != m {
                        a[k][k - 1] = -a[k][k - 1];
                    }
                } else {
                    a[k][k - 1] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;
                for j in k..=nn {
                    p = a[k][j] + q * a[k + 1][j];
                    if k != nn - 1 {
                        p += r * a[k + 2][j];
                        a[k + 2][j] -= p * z;
                    }
                    a[k + 1][j] -= p * y;
                    a[k][j] -= p * x;
                }
                let mmin = if nn < k + 3 { nn } else { k + 3 };
                for i in l..=mmin {
                    p = x * a[i][k] + y * a[i][k + 1];
                    if k != nn - 1 {
                        p += z * a[i][k + 2];
                        a[i][k + 2] -= p * r;
                    }
                    a[i][k + 1] -= p * q;
                    a[i][k] -= p;
                }
            }
            k += 1;
        }
    }
    Ok((1..=n).map(|i| (wr[i], wi[i])).collect())
}
