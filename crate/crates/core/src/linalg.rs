//! Dense real LU factorisation with partial pivoting.
//!
//! The Newton-Raphson Jacobian of an 18-bus system is about 33×33, where a
//! dense factorisation costs microseconds. Work grows as N³, so systems
//! beyond a few hundred buses want a sparse solver instead.

use alloc::vec::Vec;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: alloc::vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// Singular pivot encountered while eliminating this column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Singular {
    pub column: usize,
}

pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(mut a: DenseMatrix) -> Result<Self, Singular> {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let tiny = scale * 1e-14;
        for k in 0..n {
            let mut p = k;
            let mut best = a.get(k, k).abs();
            for i in k + 1..n {
                let v = a.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Singular { column: k });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a.get(k, k);
            for i in k + 1..n {
                let f = a.get(i, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                a.set(i, k, f);
                for j in k + 1..n {
                    let v = a.get(k, j);
                    a.add(i, j, -f * v);
                }
            }
        }
        Ok(Lu { lu: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s / self.lu.get(i, i);
        }
        x
    }
}

pub fn solve(a: DenseMatrix, b: &[f64]) -> Result<Vec<f64>, Singular> {
    Ok(Lu::factor(a)?.solve(b))
}
