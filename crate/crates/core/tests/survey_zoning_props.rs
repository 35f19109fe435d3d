use std::path::Path;

use proptest::prelude::*;
use ztcm_core::survey::{
    filter_tourists, parse_survey_reader, write_survey_csv, zonal_shares, AgeBand, Dataset, Division, EducationBand,
    MaritalStatus, Occupation, OriginZone, Purpose, Sex, SurveyRecord, SurveySchema, TravelMode, VisitorKind,
};
use ztcm_core::zoning::{build_observation_rows, potential_visitors, IncomeDistribution, ZoneRecord};

fn pick<T: Copy + std::fmt::Debug + 'static>(all: &'static [T]) -> impl Strategy<Value = T> {
    prop::sample::select(all)
}

fn record() -> impl Strategy<Value = SurveyRecord> {
    (
        prop::option::of(pick(Division::ALL)),
        (0u32..2_000_000).prop_map(|c| f64::from(c) / 4.0),
        pick(TravelMode::ALL),
        any::<(bool, bool)>(),
        pick(Purpose::ALL),
        (
            prop::option::of(pick(Sex::ALL)),
            prop::option::of(pick(AgeBand::ALL)),
            prop::option::of(pick(EducationBand::ALL)),
            prop::option::of(pick(MaritalStatus::ALL)),
            prop::option::of(pick(Occupation::ALL)),
        ),
        prop::option::of(1u32..15),
        prop::option::of(0.0..500_000.0f64),
        prop::option::of(any::<bool>()),
    )
        .prop_map(|(zone, cost, mode, (alone, package), purpose, demo, hh, income, repeat)| SurveyRecord {
            respondent_id: String::new(),
            visitor_kind: if zone.is_some() { VisitorKind::Local } else { VisitorKind::Foreign },
            origin_zone: zone.map_or(OriginZone::Foreign, OriginZone::Domestic),
            travel_cost: cost,
            travel_mode: mode,
            alone,
            package_tour: package,
            purpose,
            sex: demo.0,
            age_band: demo.1,
            education_band: demo.2,
            marital_status: demo.3,
            occupation: demo.4,
            household_size: hh,
            monthly_income: income,
            repeat_visitor: repeat,
        })
}

fn dataset() -> impl Strategy<Value = Dataset> {
    prop::collection::vec(record(), 1..60).prop_map(|mut recs| {
        for (i, r) in recs.iter_mut().enumerate() {
            r.respondent_id = format!("r{i}");
        }
        Dataset::from_records(recs, "gen.csv").unwrap()
    })
}

proptest! {
    #[test]
    fn csv_round_trip(d in dataset()) {
        let schema = SurveySchema::default();
        let mut buf = Vec::new();
        write_survey_csv(&d, &mut buf, &schema).unwrap();
        let back = parse_survey_reader(&buf[..], Path::new("gen.csv"), &schema).unwrap();
        prop_assert!(back.rejects.is_empty());
        prop_assert_eq!(back.dataset.records, d.records);
    }

    #[test]
    fn tourist_filter_is_idempotent(d in dataset()) {
        let once = filter_tourists(&d);
        prop_assert!(once.records.iter().all(|r| r.purpose != Purpose::Spiritual));
        prop_assert_eq!(filter_tourists(&once), once);
    }

    #[test]
    fn shares_sum_to_one(d in dataset()) {
        match zonal_shares(&d) {
            Ok(s) => {
                prop_assert!((s.values().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(s.values().all(|v| *v > 0.0));
            }
            Err(_) => prop_assert_eq!(d.locals().count(), 0),
        }
    }

    #[test]
    fn cell_rates_add_up_to_zone_rates(d in dataset(), rate in 0.0..100.0f64) {
        let table: Vec<ZoneRecord> = Division::ALL.iter().map(|&zone| ZoneRecord {
            zone,
            annual_visits: 0.0,
            potential_visitors: 1.0,
            mean_travel_cost: 0.0,
            visitation_rate: rate,
            respondents: 0,
            income_threshold: 0.0,
        }).collect();
        let rows = build_observation_rows(&d, &table).unwrap();
        for zone in Division::ALL {
            let cells: Vec<_> = rows.iter().filter(|r| r.zone == *zone).collect();
            if !cells.is_empty() {
                let sum: f64 = cells.iter().map(|r| r.v).sum();
                prop_assert!((sum - rate).abs() <= 1e-9 * rate.max(1.0));
            }
        }
        prop_assert!(rows.len() <= Division::ALL.len() * TravelMode::ALL.len());
    }
}

/// Increasing `(fraction, income)` points ending at fraction 1.
fn quantiles() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((1u32..100, 1u32..5_000), 1..6).prop_map(|steps| {
        let total: u32 = steps.iter().map(|s| s.0).sum();
        let mut f = 0u32;
        let mut x = 0u32;
        steps
            .into_iter()
            .map(|(df, dx)| {
                f += df;
                x += dx;
                (f64::from(f) / f64::from(total), f64::from(x) * 10.0)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn potential_visitors_monotone(q in quantiles(), a in 0.0..60_000.0f64, b in 0.0..60_000.0f64) {
        let d = IncomeDistribution::new(Division::Dhaka, q, 1e6).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(potential_visitors(&d, hi).unwrap() <= potential_visitors(&d, lo).unwrap());
    }

    /// Lay out one income per person along the piecewise-linear quantile
    /// function and count those at or above the threshold.
    #[test]
    fn potential_visitors_match_a_discrete_population(
        q in quantiles(),
        pop in 100u32..20_000,
        t in 0.0..60_000.0f64,
    ) {
        let d = IncomeDistribution::new(Division::Khulna, q.clone(), f64::from(pop)).unwrap();
        let inverse = |u: f64| -> f64 {
            let mut prev = (0.0, q[0].1);
            for &(f, x) in &q {
                if u <= f {
                    return if f > prev.0 { prev.1 + (u - prev.0) / (f - prev.0) * (x - prev.1) } else { x };
                }
                prev = (f, x);
            }
            prev.1
        };
        let count = (0..pop)
            .filter(|i| inverse((f64::from(*i) + 0.5) / f64::from(pop)) >= t)
            .count() as f64;
        let got = potential_visitors(&d, t).unwrap();
        prop_assert!((got - count).abs() <= 1.0, "{got} vs {count}");
    }
}
