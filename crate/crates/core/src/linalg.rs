//! Row reduction over [`Scalar`], exact when the input is exact.

use crate::scalar::Scalar;

pub type Matrix = Vec<Vec<Scalar>>;

/// Reduced row echelon form and pivot columns. Float entries below `tol`
/// relative to the largest entry count as zero.
pub fn rref(m: &Matrix, tol: f64) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let scale = a.iter().flatten().map(Scalar::abs).fold(0.0, f64::max).max(1.0);
    let small = |c: &Scalar| c.is_zero() || (!c.is_exact() && c.abs() <= tol * scale);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows)
            .filter(|&i| !small(&a[i][c]))
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()));
        let Some(p) = best else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip().expect("nonzero pivot");
        a[r] = a[r].iter().map(|x| x * &inv).collect();
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let row_r = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&row_r) {
                    *x = &*x - &(&f * y);
                }
                a[i][c] = Scalar::zero();
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &Matrix, tol: f64) -> usize {
    rref(m, tol).1.len()
}

/// Basis of the right kernel.
pub fn nullspace(m: &Matrix, ncols: usize, tol: f64) -> Vec<Vec<Scalar>> {
    let (a, pivots) = rref(m, tol);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Scalar::zero(); ncols];
            v[f] = Scalar::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -&a[row][f];
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&k| Scalar::int(k)).collect()).collect()
    }

    #[test]
    fn rank_and_kernel() {
        let m = ints(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&m, 1e-12), 2);
        let k = nullspace(&m, 3, 1e-12);
        assert_eq!(k.len(), 1);
        for row in &m {
            let dot = row.iter().zip(&k[0]).fold(Scalar::zero(), |acc, (a, b)| &acc + &(a * b));
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn float_rank_uses_tolerance() {
        let m = vec![
            vec![Scalar::float(1.0, 0.0), Scalar::float(1.0, 0.0)],
            vec![Scalar::float(1.0, 0.0), Scalar::float(1.0 + 1e-15, 0.0)],
        ];
        assert_eq!(rank(&m, 1e-10), 1);
    }
}
