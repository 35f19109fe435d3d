//! Reference implementations that share no code with the library: least
//! squares from the normal equations by Gauss-Jordan elimination, and the
//! textbook sandwich covariance.

#![allow(dead_code)]

pub struct OracleFit {
    pub beta: Vec<f64>,
    pub hc0: Vec<Vec<f64>>,
    pub hc1: Vec<Vec<f64>>,
}

/// Inverse by Gauss-Jordan with partial pivoting.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        assert!(d != 0.0, "oracle: singular matrix");
        for v in &mut m[c] {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    let pivot = m[c].clone();
                    for (v, p) in m[r].iter_mut().zip(&pivot) {
                        *v -= f * p;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `x` rows already include the intercept column.
pub fn ols(x: &[Vec<f64>], y: &[f64]) -> OracleFit {
    let n = x.len();
    let k = x[0].len();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, yi) in x.iter().zip(y) {
        for a in 0..k {
            xty[a] += row[a] * yi;
            for b in 0..k {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    let inv = invert(&xtx);
    let beta: Vec<f64> = (0..k).map(|a| (0..k).map(|b| inv[a][b] * xty[b]).sum()).collect();
    let mut meat = vec![vec![0.0; k]; k];
    for (row, yi) in x.iter().zip(y) {
        let e = yi - row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
        for a in 0..k {
            for b in 0..k {
                meat[a][b] += e * e * row[a] * row[b];
            }
        }
    }
    let mul = |p: &[Vec<f64>], q: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..k)
            .map(|i| (0..k).map(|j| (0..k).map(|l| p[i][l] * q[l][j]).sum()).collect())
            .collect()
    };
    let hc0 = mul(&mul(&inv, &meat), &inv);
    let s = n as f64 / (n - k) as f64;
    let hc1 = hc0.iter().map(|r| r.iter().map(|v| v * s).collect()).collect();
    OracleFit { beta, hc0, hc1 }
}
