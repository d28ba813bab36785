//! Symmetric tridiagonal matrices: shifted solves, Sturm counts and the
//! lowest eigenpair.

use crate::error::{Error, Result};

const TINY_PIVOT: f64 = 1e-300;

#[derive(Debug, Clone)]
pub(crate) struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Eigenpair {
    pub value: f64,
    /// Unit 2-norm, sign chosen so that the entries sum to a positive number.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// `|| M x - value x ||_inf` for the returned unit vector.
    pub residual: f64,
}

impl SymTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// Solves `(M - shift) x = rhs` by Gaussian elimination without pivoting;
    /// pivots below `tiny` are nudged so that solves at an eigenvalue still
    /// return a large vector along the eigenvector.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64], tiny: f64) -> Vec<f64> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut pivot = guard(self.diag[0] - shift, tiny);
        x[0] = rhs[0] / pivot;
        for i in 1..n {
            c[i - 1] = self.off[i - 1] / pivot;
            pivot = guard(self.diag[i] - shift - self.off[i - 1] * c[i - 1], tiny);
            x[i] = (rhs[i] - self.off[i - 1] * x[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = guard(self.diag[i] - x - coupling, TINY_PIVOT);
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            (lo.min(self.diag[i] - r), hi.max(self.diag[i] + r))
        })
    }

    fn rayleigh(&self, v: &[f64]) -> f64 {
        self.apply(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Lowest eigenpair by inverse iteration: shift 0 for the first five
    /// steps, Rayleigh-quotient shifts afterwards. A Sturm count confirms that
    /// nothing lies below the result; otherwise the eigenvalue is bracketed by
    /// bisection and the vector recomputed at that shift.
    pub fn lowest(&self, rel_tol: f64, max_iter: usize) -> Result<Eigenpair> {
        let n = self.len();
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let floor = 1e3 * f64::EPSILON * scale;
        let tiny = f64::EPSILON * scale;
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        let mut shift = 0.0;
        let mut previous = f64::INFINITY;
        let mut found = None;
        for it in 1..=max_iter {
            x = unit(self.solve_shifted(shift, &x, tiny));
            let value = self.rayleigh(&x);
            if (value - previous).abs() <= (rel_tol * value.abs().max(1.0)).max(floor) {
                found = Some((value, it));
                break;
            }
            previous = value;
            if it >= 5 {
                shift = value;
            }
        }
        let (mut value, mut iterations) = found.ok_or(Error::Convergence {
            iterations: max_iter,
            residual: (self.rayleigh(&x) - previous).abs(),
        })?;
        let margin = 1e-9 * value.abs().max(1.0);
        if self.count_below(value - margin) > 0 {
            let (mut a, mut b) = (lo, value);
            while b - a > 1e-15 * scale {
                let mid = 0.5 * (a + b);
                if self.count_below(mid) >= 1 {
                    b = mid;
                } else {
                    a = mid;
                }
                iterations += 1;
            }
            let target = a - margin;
            x = vec![1.0 / (n as f64).sqrt(); n];
            for _ in 0..4 {
                x = unit(self.solve_shifted(target, &x, tiny));
                iterations += 1;
            }
            value = self.rayleigh(&x);
        }
        if x.iter().sum::<f64>() < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let residual =
            self.apply(&x).iter().zip(&x).map(|(a, b)| (a - value * b).abs()).fold(0.0, f64::max);
        Ok(Eigenpair { value, vector: x, iterations, residual })
    }
}

fn guard(p: f64, tiny: f64) -> f64 {
    if p.abs() >= tiny {
        p
    } else if p.is_sign_negative() {
        -tiny
    } else {
        tiny
    }
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Path-graph Laplacian, eigenvalues `2 - 2 cos(j pi / (n + 1))`.
    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal { diag: vec![2.0; n], off: vec![-1.0; n - 1] }
    }

    #[test]
    fn shifted_solve_inverts_apply() {
        let m = SymTridiagonal { diag: vec![4.0, 5.0, 6.0, 7.0], off: vec![1.0, -2.0, 0.5] };
        let x = [1.0, -2.0, 3.0, 0.25];
        let mut rhs = m.apply(&x);
        rhs.iter_mut().zip(&x).for_each(|(r, v)| *r -= 1.5 * v);
        let back = m.solve_shifted(1.5, &rhs, 1e-300);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn sturm_count_matches_closed_form() {
        let n = 50;
        let m = laplacian(n);
        let eig = |j: usize| 2.0 - 2.0 * (j as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
        assert_eq!(m.count_below(0.0), 0);
        assert_eq!(m.count_below(0.5 * (eig(3) + eig(4))), 3);
        assert_eq!(m.count_below(5.0), n);
    }

    #[test]
    fn lowest_pair_of_laplacian() {
        let n = 200;
        let pair = laplacian(n).lowest(1e-12, 200).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n + 1) as f64).cos();
        assert!((pair.value - exact).abs() < 1e-13);
        assert!(pair.vector.iter().all(|v| *v > 0.0));
        assert!(pair.residual < 1e-10);
    }

    #[test]
    fn singular_matrix_has_zero_lowest_value() {
        // Neumann path Laplacian: constant null vector
        let mut m = laplacian(30);
        m.diag[0] = 1.0;
        m.diag[29] = 1.0;
        let pair = m.lowest(1e-12, 200).unwrap();
        assert!(pair.value.abs() < 1e-12);
        let c = pair.vector[0];
        assert!(pair.vector.iter().all(|v| (v - c).abs() < 1e-10));
    }
}
