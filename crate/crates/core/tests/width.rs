use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use zoll_core::sweepout::MinmaxParams;
use zoll_core::width::{
    certify, continuity_battery, continuity_check, geodesic_sum_decompose, isospectral_verdict,
    partition_count, spectrum, zoll_width, zoll_width_multiple, CertificationStore, Decomposition,
    Provenance, SpectrumMode,
};
use zoll_core::{c0_distance, make_metric, MetricOfRevolution, OddProfile, ZollError};

fn zoll(eps: f64) -> MetricOfRevolution {
    make_metric(&OddProfile::cubic(eps).unwrap()).unwrap()
}

fn certified(metrics: &[&MetricOfRevolution]) -> CertificationStore {
    let mut store = CertificationStore::in_memory();
    for g in metrics {
        let run = certify(g, &Default::default()).unwrap();
        assert!(run.artifact.passed);
        store.record(run.artifact).unwrap();
    }
    store
}

/// Partitions of `n` from all 2^(n-1) compositions, sorted and deduplicated.
fn brute_force_partitions(n: u64) -> BTreeSet<Vec<u64>> {
    let mut out = BTreeSet::new();
    for mask in 0u64..1 << (n - 1) {
        let mut parts = Vec::new();
        let mut run = 1;
        for bit in 0..n - 1 {
            if mask >> bit & 1 == 1 {
                parts.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        parts.push(run);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        out.insert(parts);
    }
    out
}

#[test]
fn round_spectrum_to_eight() {
    let g = MetricOfRevolution::round();
    let s = spectrum(&g, 8, SpectrumMode::ExactZoll, &certified(&[&g])).unwrap();
    let k: Vec<u64> = s.entries.iter().map(|e| e.multiple.unwrap()).collect();
    assert_eq!(k, [1, 1, 1, 2, 2, 2, 2, 2]);
    assert!(s
        .entries
        .iter()
        .all(|e| e.provenance == Provenance::ExactZoll));
    assert!(s.is_monotone());
}

#[test]
fn certified_perturbation_has_round_spectrum() {
    let (r, g) = (MetricOfRevolution::round(), zoll(0.3));
    let store = certified(&[&r, &g]);
    let a = spectrum(&r, 8, SpectrumMode::ExactZoll, &store).unwrap();
    let b = spectrum(&g, 8, SpectrumMode::ExactZoll, &store).unwrap();
    assert!(a.identical_to(&b));
}

#[test]
fn uncertified_metric_is_refused() {
    let store = CertificationStore::in_memory();
    assert!(matches!(
        spectrum(&zoll(0.3), 8, SpectrumMode::ExactZoll, &store),
        Err(ZollError::NotCertifiedZoll { .. })
    ));
}

#[test]
fn minmax_mode_first_width() {
    let g = MetricOfRevolution::round();
    let params = MinmaxParams {
        t_count: 17,
        n_vertices: 64,
        rounds: 40,
        phase: 0.0,
    };
    let store = CertificationStore::in_memory();
    let s = spectrum(&g, 1, SpectrumMode::MinmaxEstimate(params), &store).unwrap();
    assert_eq!(s.entries[0].provenance, Provenance::MinmaxEstimate);
    assert!((s.entries[0].value / TAU - 1.0).abs() < 0.02);
    assert!(spectrum(&g, 2, SpectrumMode::MinmaxEstimate(params), &store).is_err());
}

#[test]
fn floor_law_steps() {
    for k in 1u64..200 {
        assert_eq!(zoll_width_multiple(k * k), k);
        assert_eq!(zoll_width(k * k), TAU * k as f64);
        if k >= 2 {
            assert_eq!(
                zoll_width_multiple(k * k) - zoll_width_multiple(k * k - 1),
                1
            );
        }
        for p in k * k..(k + 1) * (k + 1) {
            assert_eq!(zoll_width_multiple(p), k);
        }
    }
    assert_eq!(zoll_width(99), 18.0 * PI);
    assert_eq!(zoll_width_multiple(u64::MAX), 4_294_967_295);
}

#[test]
fn spectrum_entries_are_integer_multiples() {
    let g = MetricOfRevolution::round();
    let s = spectrum(&g, 10_000, SpectrumMode::ExactZoll, &certified(&[&g])).unwrap();
    for e in &s.entries {
        let k = e.multiple.unwrap();
        assert!(k >= 1);
        assert_eq!(e.value, TAU * k as f64);
    }
}

#[test]
fn small_decompositions() {
    let two = geodesic_sum_decompose(4.0 * PI).unwrap();
    let Decomposition::Enumerated(sums) = two else {
        panic!("expected enumeration")
    };
    let terms: Vec<Vec<u64>> = sums
        .iter()
        .map(|s| s.terms.iter().map(|t| t.0).collect())
        .collect();
    assert_eq!(terms, [vec![2], vec![1, 1]]);
    assert_eq!(geodesic_sum_decompose(6.0 * PI).unwrap().count(), 3);
    assert!(matches!(
        geodesic_sum_decompose(5.0),
        Err(ZollError::NotMultipleOf2Pi { .. })
    ));
    assert!(geodesic_sum_decompose(-TAU).is_err());
    assert_eq!(
        geodesic_sum_decompose(TAU * 100.0).unwrap(),
        Decomposition::CountOnly {
            n: 100,
            count: 190_569_292
        }
    );
}

#[test]
fn decompositions_match_brute_force() {
    for n in 1..=12u64 {
        let Decomposition::Enumerated(sums) = geodesic_sum_decompose(TAU * n as f64).unwrap()
        else {
            panic!("n = {n} should enumerate")
        };
        let got: Vec<Vec<u64>> = sums
            .iter()
            .map(|s| s.terms.iter().map(|t| t.0).collect())
            .collect();
        let unique: BTreeSet<Vec<u64>> = got.iter().cloned().collect();
        let oracle = brute_force_partitions(n);
        assert_eq!(got.len(), unique.len(), "duplicates at n = {n}");
        assert_eq!(unique, oracle, "n = {n}");
        assert_eq!(partition_count(n), oracle.len() as u128);
        for s in &sums {
            assert!((s.total - TAU * n as f64).abs() < 1e-12 * n as f64);
        }
    }
}

#[test]
fn continuity_examples() {
    let (r, g) = (MetricOfRevolution::round(), zoll(0.3));
    let store = certified(&[&r, &g]);
    let same = continuity_check(&r, &r, 7, 1.0, &store).unwrap();
    assert_eq!((same.lhs, same.rhs), (0.0, 0.0));
    assert!(same.satisfied);

    let d = c0_distance(&r, &g);
    let c = continuity_check(&r, &g, 25, 1.0, &store).unwrap();
    assert_eq!(c.lhs, 0.0);
    assert!((c.rhs - 5.0 * d).abs() < 1e-14 && c.rhs > 0.0);
    assert!(c.satisfied);
    let one = continuity_check(&r, &g, 1, 1.0, &store).unwrap();
    assert!(one.lhs == 0.0 && one.satisfied);

    assert!(continuity_check(&r, &g, 1, 0.0, &store).is_err());
}

#[test]
fn continuity_regression_over_pairs() {
    let ms = [MetricOfRevolution::round(), zoll(0.1), zoll(0.2), zoll(0.3)];
    let store = certified(&ms.iter().collect::<Vec<_>>());
    for a in &ms {
        for b in &ms {
            let checks = continuity_battery(a, b, 100, 1.0, &store).unwrap();
            let d = c0_distance(a, b);
            for c in &checks {
                assert_eq!(c.lhs, 0.0);
                assert!(c.rhs >= 0.0);
                assert_eq!(c.rhs == 0.0, d == 0.0);
            }
        }
    }
}

#[test]
fn verdicts() {
    let (r, g2, g3) = (MetricOfRevolution::round(), zoll(0.2), zoll(0.3));
    let store = certified(&[&r, &g2, &g3]);
    let same = isospectral_verdict(&r, &r, 100, &store).unwrap();
    assert!(same.isospectral && !same.distinct_geometry && !same.counterexample);
    let v = isospectral_verdict(&r, &g3, 100, &store).unwrap();
    assert!(v.isospectral && v.distinct_geometry && v.counterexample);
    assert_eq!(
        v.headline(),
        "ISOSPECTRAL, NOT ISOMETRIC: counterexample reproduced"
    );
    let w = isospectral_verdict(&g2, &g3, 100, &store).unwrap();
    assert!(w.isospectral && w.distinct_geometry);
    assert!((w.k_range.0 - 0.6).abs() < 1e-9 && (w.k_range.1 - 1.4).abs() < 1e-9);
}

#[test]
fn store_round_trips_through_directory() {
    let dir = tempfile::tempdir().unwrap();
    let g = zoll(0.1);
    {
        let mut store = CertificationStore::open(dir.path()).unwrap();
        store
            .record(certify(&g, &Default::default()).unwrap().artifact)
            .unwrap();
    }
    let reopened = CertificationStore::open(dir.path()).unwrap();
    assert!(reopened.is_certified(&g));
    assert!(!reopened.is_certified(&zoll(0.2)));
}
