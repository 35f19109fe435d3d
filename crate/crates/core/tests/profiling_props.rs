use proptest::prelude::*;
use ztcm_core::profiling::{
    chi_square_independence, one_way_anova, one_way_anova_raw, ContingencyTable, Df, GroupSummary,
};

fn table() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..5, 2usize..5).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(1u32..200, c), r))
        .prop_map(|t| t.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect())
}

fn chi2(t: Vec<Vec<f64>>) -> f64 {
    chi_square_independence(&ContingencyTable::from_counts(t).unwrap()).unwrap().statistic
}

proptest! {
    #[test]
    fn permutation_invariant(t in table(), seed in any::<u64>()) {
        let base = chi2(t.clone());
        let mut rows = t.clone();
        let shift_rows = (seed % rows.len() as u64) as usize;
        rows.rotate_left(shift_rows);
        let mut cols = rows.clone();
        let shift = (seed / 7 % cols[0].len() as u64) as usize;
        for r in &mut cols {
            r.rotate_right(shift);
        }
        let transposed: Vec<Vec<f64>> = (0..t[0].len()).map(|j| t.iter().map(|r| r[j]).collect()).collect();
        for other in [chi2(cols), chi2(transposed)] {
            prop_assert!((other - base).abs() <= 1e-9 * base.max(1.0));
        }
    }

    #[test]
    fn scales_linearly_with_counts(t in table(), c in 2u32..10) {
        let base = chi2(t.clone());
        let scaled = t.iter().map(|r| r.iter().map(|v| v * f64::from(c)).collect()).collect();
        prop_assert!((chi2(scaled) - f64::from(c) * base).abs() <= 1e-9 * base.max(1.0) * f64::from(c));
    }

    #[test]
    fn two_by_two_equals_squared_z(a in 1u32..300, b in 1u32..300, c in 1u32..300, d in 1u32..300) {
        let (a, b, c, d) = (f64::from(a), f64::from(b), f64::from(c), f64::from(d));
        let r = chi_square_independence(&ContingencyTable::from_counts(vec![vec![a, b], vec![c, d]]).unwrap()).unwrap();
        let (n1, n2) = (a + b, c + d);
        let pooled = (a + c) / (n1 + n2);
        let z = (a / n1 - c / n2) / (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
        prop_assert!((r.statistic - z * z).abs() <= 1e-9 * r.statistic.max(1.0));
        prop_assert_eq!(r.df, Df::One(1));
    }

    #[test]
    fn anova_summary_matches_raw(groups in prop::collection::vec(prop::collection::vec(-100.0..100.0f64, 2..20), 2..5)) {
        let raw: Vec<(String, Vec<f64>)> = groups.iter().enumerate().map(|(i, g)| (format!("g{i}"), g.clone())).collect();
        let borrowed: Vec<(&str, &[f64])> = raw.iter().map(|(l, g)| (l.as_str(), g.as_slice())).collect();
        let from_raw = one_way_anova_raw(&borrowed).unwrap();
        let summaries: Vec<GroupSummary> = raw.iter().map(|(l, g)| GroupSummary::from_values(l, g).unwrap()).collect();
        let from_summary = one_way_anova(&summaries).unwrap();

        // direct sums of squares
        let all: Vec<f64> = groups.iter().flatten().copied().collect();
        let grand = all.iter().sum::<f64>() / all.len() as f64;
        let mut ssb = 0.0;
        let mut ssw = 0.0;
        for g in &groups {
            let m = g.iter().sum::<f64>() / g.len() as f64;
            ssb += g.len() as f64 * (m - grand).powi(2);
            ssw += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
        }
        let k = groups.len() as f64;
        let f = (ssb / (k - 1.0)) / (ssw / (all.len() as f64 - k));
        prop_assert!((from_raw.statistic - f).abs() <= 1e-9 * f.max(1.0));
        prop_assert!((from_summary.statistic - f).abs() <= 1e-9 * f.max(1.0));
        prop_assert_eq!(from_raw.df, Df::Pair(groups.len() as u32 - 1, all.len() as u32 - groups.len() as u32));
    }
}
