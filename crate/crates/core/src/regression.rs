//! Ordinary least squares for the visit-generating function, with
//! heteroskedasticity-consistent (sandwich) covariance and t / Wald inference.
//!
//! The fit goes through a Householder QR of the design. A column whose
//! `|R_jj|` falls below `1e-10 * ‖X‖_F` is reported as linearly dependent on
//! the columns before it.

use serde::Serialize;

use crate::distributions::{f_sf, t_quantile, t_sf_two_sided};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, invert_upper, solve_upper, Matrix, Qr};

pub const INTERCEPT: &str = "Constant";
const RANK_TOL: f64 = 1e-10;

/// Regressors plus an intercept column (always column 0) and the response.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    x: Matrix,
    y: Vec<f64>,
}

impl DesignMatrix {
    /// Builds `[1 | columns]`. Column vectors must all have the response's length.
    pub fn new(names: &[&str], columns: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let n = response.len();
        if let Some((name, col)) = names.iter().zip(columns).find(|(_, c)| c.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "column `{name}` has {} rows, response has {n}",
                col.len()
            )));
        }
        if response.iter().chain(columns.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("design contains non-finite values"));
        }
        let k = columns.len() + 1;
        let mut x = Matrix::zeros(n, k);
        for i in 0..n {
            x[(i, 0)] = 1.0;
            for (j, col) in columns.iter().enumerate() {
                x[(i, j + 1)] = col[i];
            }
        }
        let mut all_names = vec![INTERCEPT.to_string()];
        all_names.extend(names.iter().map(|s| s.to_string()));
        Ok(Self {
            names: all_names,
            x,
            y: response,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &Matrix {
        &self.x
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn k(&self) -> usize {
        self.x.cols()
    }
}

/// Estimation core shared by [`fit_ols`]; valid whenever `n >= k`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    pub r_squared: f64,
    /// `(XᵀX)⁻¹ = R⁻¹ R⁻ᵀ`
    pub xtx_inv: Matrix,
}

pub fn least_squares(design: &DesignMatrix) -> Result<LeastSquares> {
    let (n, k) = (design.n(), design.k());
    if n < k {
        return Err(Error::TooFewObservations { n, k });
    }
    let x = design.matrix();
    let qr = Qr::new(x);
    let tol = RANK_TOL * x.frobenius_norm();
    if let Some(j) = qr.r_diagonal().iter().position(|d| d.abs() <= tol) {
        return Err(Error::RankDeficient {
            column: design.names[j].clone(),
        });
    }
    let r = qr.r();
    let qty = qr.qt_mul(design.response());
    let coefficients = solve_upper(&r, &qty[..k]);
    let fitted = x.mul_vec(&coefficients);
    let residuals: Vec<f64> = design
        .response()
        .iter()
        .zip(&fitted)
        .map(|(y, f)| y - f)
        .collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let y = design.response();
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let r_inv = invert_upper(&r);
    let xtx_inv = r_inv.matmul(&r_inv.transpose());
    Ok(LeastSquares {
        coefficients,
        fitted,
        residuals,
        ssr,
        r_squared,
        xtx_inv,
    })
}

/// Which heteroskedasticity-consistent estimator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
pub enum CovarianceFlavor {
    /// White's estimator, `ω_i = e_i²`.
    HC0,
    /// `HC0 * n / (n - k)`.
    #[default]
    HC1,
}

impl std::str::FromStr for CovarianceFlavor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "HC0" => Ok(Self::HC0),
            "HC1" => Ok(Self::HC1),
            other => Err(format!("unknown covariance flavor `{other}` (expected HC0 or HC1)")),
        }
    }
}

impl std::fmt::Display for CovarianceFlavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::HC0 => "HC0",
            Self::HC1 => "HC1",
        })
    }
}

fn sandwich(x: &Matrix, xtx_inv: &Matrix, residuals: &[f64], flavor: CovarianceFlavor) -> Matrix {
    let (n, k) = (x.rows(), x.cols());
    let mut meat = Matrix::zeros(k, k);
    for (i, e) in residuals.iter().enumerate() {
        let w = e * e;
        let row = x.row(i);
        for a in 0..k {
            let wa = w * row[a];
            for b in 0..k {
                meat[(a, b)] += wa * row[b];
            }
        }
    }
    let mut cov = xtx_inv.matmul(&meat).matmul(xtx_inv);
    // symmetrize away rounding asymmetry
    for a in 0..k {
        for b in (a + 1)..k {
            let m = 0.5 * (cov[(a, b)] + cov[(b, a)]);
            cov[(a, b)] = m;
            cov[(b, a)] = m;
        }
    }
    if flavor == CovarianceFlavor::HC1 {
        cov.scale(n as f64 / (n - k) as f64);
    }
    cov
}

/// t-test and confidence interval for one coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefInference {
    pub name: String,
    pub coef: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Set when the standard error is zero and `t` is reported as ±∞ (or 0).
    pub zero_se: bool,
}

/// Inference from a coefficient, its standard error and residual degrees of freedom.
pub fn coefficient_inference(name: &str, coef: f64, se: f64, df_resid: u32) -> Result<CoefInference> {
    if df_resid == 0 {
        return Err(Error::ZeroDegreesOfFreedom);
    }
    if !(se >= 0.0) {
        return Err(Error::invalid(format!("standard error {se} is negative")));
    }
    let crit = t_quantile(0.975, df_resid)?;
    let zero_se = se == 0.0;
    let t = if coef == 0.0 {
        0.0
    } else if zero_se {
        coef.signum() * f64::INFINITY
    } else {
        coef / se
    };
    let p = t_sf_two_sided(t, df_resid)?.value();
    Ok(CoefInference {
        name: name.to_string(),
        coef,
        se,
        t,
        p,
        ci_low: coef - crit * se,
        ci_high: coef + crit * se,
        zero_se,
    })
}

/// Joint test that every slope is zero, using the robust covariance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaldTest {
    pub f: f64,
    pub df_num: u32,
    pub df_den: u32,
    pub p: f64,
    /// The model fits perfectly, so `F` is infinite.
    pub infinite: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub n: usize,
    pub df_resid: usize,
    pub r_squared: f64,
    pub root_mse: f64,
    pub flavor: CovarianceFlavor,
    pub robust_cov: Matrix,
    pub terms: Vec<CoefInference>,
    pub wald: WaldTest,
    #[serde(skip)]
    xtx_inv: Matrix,
    #[serde(skip)]
    response_norm: f64,
}

impl OlsFit {
    pub fn se(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.se).collect()
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }

    pub fn term(&self, name: &str) -> Option<&CoefInference> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn xtx_inv(&self) -> &Matrix {
        &self.xtx_inv
    }
}

/// Fits with the default (HC1) robust covariance.
pub fn fit_ols(design: &DesignMatrix) -> Result<OlsFit> {
    fit_ols_with(design, CovarianceFlavor::default())
}

pub fn fit_ols_with(design: &DesignMatrix, flavor: CovarianceFlavor) -> Result<OlsFit> {
    let (n, k) = (design.n(), design.k());
    if n <= k {
        return Err(Error::TooFewObservations { n, k });
    }
    let ls = least_squares(design)?;
    let df_resid = n - k;
    let robust_cov = sandwich(design.matrix(), &ls.xtx_inv, &ls.residuals, flavor);
    let mut fit = OlsFit {
        names: design.names().to_vec(),
        coefficients: ls.coefficients,
        residuals: ls.residuals,
        fitted: ls.fitted,
        n,
        df_resid,
        r_squared: ls.r_squared,
        root_mse: (ls.ssr / df_resid as f64).sqrt(),
        flavor,
        robust_cov,
        terms: Vec::new(),
        wald: WaldTest {
            f: f64::NAN,
            df_num: 0,
            df_den: 0,
            p: f64::NAN,
            infinite: false,
        },
        xtx_inv: ls.xtx_inv,
        response_norm: design.response().iter().map(|v| v * v).sum::<f64>().sqrt(),
    };
    fit.terms = inference(&fit)?;
    fit.wald = wald_f_test(&fit)?;
    Ok(fit)
}

/// Sandwich covariance `(XᵀX)⁻¹ Xᵀ diag(e²) X (XᵀX)⁻¹`, scaled by `n/(n-k)` for HC1.
pub fn robust_covariance(design: &DesignMatrix, fit: &OlsFit, flavor: CovarianceFlavor) -> Result<Matrix> {
    if design.n() != fit.residuals.len() || design.k() != fit.coefficients.len() {
        return Err(Error::DimensionMismatch(format!(
            "design is {}x{}, fit has {} residuals and {} coefficients",
            design.n(),
            design.k(),
            fit.residuals.len(),
            fit.coefficients.len()
        )));
    }
    Ok(sandwich(design.matrix(), &fit.xtx_inv, &fit.residuals, flavor))
}

/// Per-coefficient t, two-sided p and 95% interval at `df_resid`.
pub fn inference(fit: &OlsFit) -> Result<Vec<CoefInference>> {
    let df = u32::try_from(fit.df_resid).map_err(|_| Error::invalid("df_resid overflows u32"))?;
    fit.names
        .iter()
        .zip(&fit.coefficients)
        .zip(fit.robust_cov.diagonal())
        .map(|((name, &coef), var)| coefficient_inference(name, coef, var.max(0.0).sqrt(), df))
        .collect()
}

/// Wald test of all slopes = 0 with the fit's robust covariance, reported as
/// `W / q` against `F(q, n - k)`.
pub fn wald_f_test(fit: &OlsFit) -> Result<WaldTest> {
    let k = fit.coefficients.len();
    if k < 2 {
        return Err(Error::invalid("Wald test needs at least one slope"));
    }
    let q = k - 1;
    let df_num = q as u32;
    let df_den = u32::try_from(fit.df_resid).map_err(|_| Error::invalid("df_resid overflows u32"))?;
    let ssr: f64 = fit.residuals.iter().map(|e| e * e).sum();
    if ssr.sqrt() <= 1e-10 * fit.response_norm.max(f64::MIN_POSITIVE) {
        return Ok(WaldTest {
            f: f64::INFINITY,
            df_num,
            df_den,
            p: 0.0,
            infinite: true,
        });
    }
    let slopes: Vec<usize> = (1..k).collect();
    let block = fit.robust_cov.select(&slopes);
    let b: Vec<f64> = slopes.iter().map(|&i| fit.coefficients[i]).collect();
    let z = cholesky_solve(&block, &b, 1e-13).ok_or(Error::SingularCovariance)?;
    let w: f64 = b.iter().zip(&z).map(|(a, c)| a * c).sum();
    let f = w / q as f64;
    Ok(WaldTest {
        f,
        df_num,
        df_den,
        p: f_sf(f, df_num, df_den)?.value(),
        infinite: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_perfect_fit() {
        let d = DesignMatrix::new(&["x"], &[vec![0.0, 1.0]], vec![0.0, 1.0]).unwrap();
        let ls = least_squares(&d).unwrap();
        assert!(ls.coefficients[0].abs() < 1e-15);
        assert!((ls.coefficients[1] - 1.0).abs() < 1e-15);
        assert!(ls.residuals.iter().all(|e| e.abs() < 1e-15));
        assert_eq!(ls.r_squared, 1.0);
        // inference is undefined without residual degrees of freedom
        assert!(matches!(fit_ols(&d), Err(Error::TooFewObservations { n: 2, k: 2 })));
    }

    #[test]
    fn too_few_rows() {
        let d = DesignMatrix::new(&["a", "b"], &[vec![1.0, 2.0], vec![3.0, 5.0]], vec![1.0, 2.0]).unwrap();
        assert!(matches!(least_squares(&d), Err(Error::TooFewObservations { n: 2, k: 3 })));
    }

    #[test]
    fn duplicate_column_is_named() {
        let alone = vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let x = vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let y = vec![1.0, 2.0, 2.0, 3.0, 5.0, 4.0];
        let d = DesignMatrix::new(&["TCost", "Alone", "Package"], &[x, alone.clone(), alone], y).unwrap();
        match fit_ols(&d) {
            Err(Error::RankDeficient { column }) => assert_eq!(column, "Package"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn constant_dummy_collides_with_intercept() {
        let d = DesignMatrix::new(
            &["x", "always"],
            &[vec![1.0, 2.0, 3.0, 4.0], vec![1.0; 4]],
            vec![1.0, 3.0, 2.0, 5.0],
        )
        .unwrap();
        assert!(matches!(least_squares(&d), Err(Error::RankDeficient { column }) if column == "always"));
    }

    #[test]
    fn zero_coefficient_inference() {
        let ci = coefficient_inference("b", 0.0, 3.0, 11).unwrap();
        assert_eq!(ci.t, 0.0);
        assert_eq!(ci.p, 1.0);
        assert!((ci.ci_low + ci.ci_high).abs() < 1e-12);
    }

    #[test]
    fn zero_se_is_flagged() {
        let ci = coefficient_inference("b", 2.0, 0.0, 5).unwrap();
        assert!(ci.zero_se);
        assert_eq!(ci.t, f64::INFINITY);
        assert_eq!(ci.p, 0.0);
    }

    #[test]
    fn published_alone_row() {
        let ci = coefficient_inference("Alone", 487.94, 328.2, 11).unwrap();
        assert!((ci.t - 1.49).abs() < 0.01);
        assert!((ci.p - 0.16).abs() < 0.01);
        assert!((ci.ci_low + 234.4).abs() < 0.2);
        assert!((ci.ci_high - 1210.2).abs() < 0.2);
        let ci = coefficient_inference("Air", -23.15, 16.2, 11).unwrap();
        assert!((ci.t + 1.43).abs() < 0.01);
        assert!((ci.p - 0.18).abs() < 0.01);
    }

    #[test]
    fn perfect_fit_gives_infinite_wald() {
        let x: Vec<f64> = (0..8).map(f64::from).collect();
        let z: Vec<f64> = (0..8).map(|i| f64::from(i * i % 5)).collect();
        let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 2.0 + 3.0 * a - b).collect();
        let fit = fit_ols(&DesignMatrix::new(&["x", "z"], &[x, z], y).unwrap()).unwrap();
        assert!(fit.wald.infinite);
        assert_eq!(fit.wald.p, 0.0);
    }

    #[test]
    fn hc1_over_hc0_ratio() {
        let x = vec![1.0, 2.0, 4.0, 3.0, 7.0, 5.0, 6.0];
        let y = vec![2.0, 2.5, 5.0, 3.1, 9.0, 4.2, 8.8];
        let d = DesignMatrix::new(&["x"], &[x], y).unwrap();
        let fit = fit_ols_with(&d, CovarianceFlavor::HC0).unwrap();
        let hc0 = robust_covariance(&d, &fit, CovarianceFlavor::HC0).unwrap();
        let hc1 = robust_covariance(&d, &fit, CovarianceFlavor::HC1).unwrap();
        let ratio = 7.0 / 5.0;
        for i in 0..2 {
            for j in 0..2 {
                assert!((hc1[(i, j)] - ratio * hc0[(i, j)]).abs() <= 1e-14 * hc0[(i, j)].abs().max(1e-300));
            }
        }
    }

    #[test]
    fn mismatched_design_rejected() {
        let d = DesignMatrix::new(&["x"], &[vec![1.0, 2.0, 3.0, 5.0]], vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        let other = DesignMatrix::new(&["x"], &[vec![1.0, 2.0, 3.0]], vec![1.0, 2.0, 2.0]).unwrap();
        let fit = fit_ols(&d).unwrap();
        assert!(matches!(
            robust_covariance(&other, &fit, CovarianceFlavor::HC0),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(DesignMatrix::new(&["x"], &[vec![1.0]], vec![1.0, 2.0]).is_err());
    }
}
