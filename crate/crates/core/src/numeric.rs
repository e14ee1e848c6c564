//! Small numeric helpers shared across modules.

use nalgebra::Matrix2;

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub type Mat2 = Matrix2<f64>;

/// Row-major `[[a, b], [c, d]]`.
pub fn mat2_rows(m: &Mat2) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Serializes a [`Mat2`] as nested rows; use with `#[serde(serialize_with)]`.
pub fn serialize_mat2<S: serde::Serializer>(m: &Mat2, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&mat2_rows(m), s)
}

pub fn serialize_mat2_vec<S: serde::Serializer>(v: &[Mat2], s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<[[f64; 2]; 2]> = v.iter().map(mat2_rows).collect();
    serde::Serialize::serialize(&rows, s)
}

/// Eigenvalues of a real symmetric 2×2 matrix, ascending.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + d);
    let rad = (0.5 * (a - d)).hypot(b);
    (mean - rad, mean + rad)
}

pub fn min_eigenvalue(m: &Mat2) -> f64 {
    sym_eigenvalues(m).0
}

pub fn max_abs_entry(m: &Mat2) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Median of a slice (NaNs excluded); `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// `n` equispaced points covering `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn sym_eigs() {
        let m = Mat2::new(2.0, 1.0, 1.0, 2.0);
        assert_eq!(sym_eigenvalues(&m), (1.0, 3.0));
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(linspace(-1.0, 1.0, 3), vec![-1.0, 0.0, 1.0]);
    }
}
