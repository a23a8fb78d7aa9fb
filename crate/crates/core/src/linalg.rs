//! Symmetric eigensolvers: implicit QL on tridiagonal matrices and a
//! restarted Lanczos iteration for sparse operators.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

/// Eigenvalues in ascending order with the matching unit eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off[i]` couples rows `i` and `i + 1`).
///
/// Returned eigenvectors are in the basis of the tridiagonal matrix.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<EigenPairs> {
    let n = diag.len();
    if n == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "off-diagonal has {} entries for {n} diagonal entries",
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    // z[k][i]: component k of eigenvector i
    let mut z = vec![vec![0.0; n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::NoConvergence {
                        what: "tridiagonal QL",
                        iterations: iter,
                    });
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
                    for row in z.iter_mut() {
                        let h = row[i + 1];
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

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| z.iter().map(|row| row[i]).collect())
        .collect();
    Ok(EigenPairs { values, vectors })
}

/// Which end of the spectrum a Lanczos run targets.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Spectrum {
    Smallest,
    Largest,
    LargestMagnitude,
}

/// Options for [`lanczos`].
#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub count: usize,
    pub which: Spectrum,
    pub max_basis: usize,
    pub tolerance: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            count: 1,
            which: Spectrum::Smallest,
            max_basis: 300,
            tolerance: 1e-8,
            max_restarts: 30,
            seed: 0,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in against {
            let c = dot(v, q);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

/// Extreme eigenpairs of the symmetric operator `apply` (writing `A x`
/// into its second argument) on the complement of `deflate`.
///
/// Full reorthogonalization, explicit restarts from the wanted Ritz
/// vectors. Convergence is judged on the true residual `|A x - θ x|`.
pub fn lanczos<F>(
    n: usize,
    apply: F,
    deflate: &[Vec<f64>],
    opts: &LanczosOptions,
) -> Result<EigenPairs>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = n.saturating_sub(deflate.len());
    if opts.count == 0 || opts.count > dim {
        return Err(Error::InvalidInput(format!(
            "requested {} eigenpairs from a {dim}-dimensional space",
            opts.count
        )));
    }
    let m_max = opts.max_basis.max(opts.count + 2).min(dim);
    let mut rng = seed::rng_for(opts.seed, "lanczos", &[n as u64]);
    let mut random_unit = |against: &[Vec<f64>], extra: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..8 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            orthogonalize(&mut v, against);
            orthogonalize(&mut v, extra);
            orthogonalize(&mut v, against);
            let nv = norm(&v);
            if nv > 1e-10 {
                v.iter_mut().for_each(|x| *x /= nv);
                return Some(v);
            }
        }
        None
    };

    let mut start = random_unit(deflate, &[]).ok_or(Error::NoConvergence {
        what: "lanczos start vector",
        iterations: 0,
    })?;
    let mut scratch = vec![0.0; n];

    for restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max);
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        basis.push(start.clone());
        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut scratch);
            let a = dot(&scratch, &basis[j]);
            alpha.push(a);
            if basis.len() == m_max {
                break;
            }
            let mut w = scratch.clone();
            orthogonalize(&mut w, deflate);
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, deflate);
            let b = norm(&w);
            if b > 1e-10 * (1.0 + a.abs()) {
                w.iter_mut().for_each(|x| *x /= b);
                beta.push(b);
                basis.push(w);
            } else {
                // invariant subspace reached: continue from a fresh direction
                match random_unit(deflate, &basis) {
                    Some(v) => {
                        beta.push(0.0);
                        basis.push(v);
                    }
                    None => break,
                }
            }
        }

        let ritz = tridiagonal_eigen(&alpha, &beta)?;
        let k = alpha.len();
        let mut picks: Vec<usize> = (0..k).collect();
        match opts.which {
            Spectrum::Smallest => {}
            Spectrum::Largest => picks.reverse(),
            Spectrum::LargestMagnitude => {
                picks.sort_by(|&a, &b| ritz.values[b].abs().total_cmp(&ritz.values[a].abs()))
            }
        }
        picks.truncate(opts.count);

        let mut values = Vec::with_capacity(opts.count);
        let mut vectors = Vec::with_capacity(opts.count);
        let mut worst: f64 = 0.0;
        for &p in &picks {
            let coeffs = &ritz.vectors[p];
            let mut x = vec![0.0; n];
            for (c, q) in coeffs.iter().zip(&basis) {
                for (xi, qi) in x.iter_mut().zip(q) {
                    *xi += c * qi;
                }
            }
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            apply(&x, &mut scratch);
            let theta = ritz.values[p];
            let res = scratch
                .iter()
                .zip(&x)
                .map(|(ax, xi)| (ax - theta * xi).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(res / theta.abs().max(1.0));
            values.push(theta);
            vectors.push(x);
        }
        if worst <= opts.tolerance || k == dim {
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            return Ok(EigenPairs {
                values: order.iter().map(|&i| values[i]).collect(),
                vectors: order.iter().map(|&i| vectors[i].clone()).collect(),
            });
        }
        // restart from a blend of the wanted Ritz vectors, weighted toward
        // the slowest to converge
        let mut next = vec![0.0; n];
        for x in &vectors {
            for (a, b) in next.iter_mut().zip(x) {
                *a += b;
            }
        }
        orthogonalize(&mut next, deflate);
        let nn = norm(&next);
        if nn < 1e-12 || restart == opts.max_restarts {
            if restart == opts.max_restarts {
                break;
            }
            start = random_unit(deflate, &[]).ok_or(Error::NoConvergence {
                what: "lanczos restart",
                iterations: restart,
            })?;
        } else {
            next.iter_mut().for_each(|x| *x /= nn);
            start = next;
        }
    }
    Err(Error::NoConvergence {
        what: "lanczos",
        iterations: opts.max_restarts + 1,
    })
}
