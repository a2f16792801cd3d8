#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sovkit::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn unit_disk(rng: &mut ChaCha8Rng) -> C64 {
    loop {
        let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() <= 1.0 {
            return z;
        }
    }
}

pub fn unit_disk_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| unit_disk(rng)).collect()
}

/// Determinant by Laplace expansion along the first row.
pub fn det_cofactor(m: &[Vec<C64>]) -> C64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    let mut s = c(0.0, 0.0);
    for j in 0..n {
        let minor: Vec<Vec<C64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v).collect())
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += m[0][j] * det_cofactor(&minor) * sign;
    }
    s
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det_gauss(m: &[Vec<C64>]) -> C64 {
    let n = m.len();
    let mut a: Vec<Vec<C64>> = m.to_vec();
    let mut det = c(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| a[p][col].norm().total_cmp(&a[q][col].norm()))
            .unwrap();
        if a[piv][col].norm() == 0.0 {
            return c(0.0, 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let t = a[col][k] * f;
                a[row][k] -= t;
            }
        }
    }
    det
}

pub fn mat_max_abs(m: &[Vec<C64>]) -> f64 {
    m.iter().flatten().fold(0.0, |a, x| a.max(x.norm()))
}
