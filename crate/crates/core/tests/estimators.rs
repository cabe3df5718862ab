use nhat::{
    binom_pmf, clt_confidence_interval, conditional_coverage, estimate_mean_of_products,
    estimate_product_of_means, nhat_single, pascal_pmf, sample_variance_s2, EstimateReport,
    EstimatorKind, PairedSample,
};

// E over every (x₁, x₂, t₁, t₂) with t truncated where the Pascal mass is
// negligible.
fn enumerate_two_pairs(n: u64, p: f64, m: u64) -> (f64, f64) {
    let t_max = m + 400;
    let bx: Vec<f64> = (0..=n).map(|x| binom_pmf(x, n, p).unwrap()).collect();
    let pt: Vec<f64> = (m..=t_max).map(|t| pascal_pmf(t, m, p).unwrap()).collect();
    let (mut mop, mut pom) = (0.0, 0.0);
    for x1 in 0..=n {
        for x2 in 0..=n {
            let wx = bx[x1 as usize] * bx[x2 as usize];
            for (i, t1) in (m..=t_max).enumerate() {
                for (j, t2) in (m..=t_max).enumerate() {
                    let w = wx * pt[i] * pt[j];
                    if w == 0.0 {
                        continue;
                    }
                    let sample = PairedSample::new(vec![x1, x2], vec![t1, t2], m).unwrap();
                    mop += w * estimate_mean_of_products(&sample).unwrap();
                    pom += w * estimate_product_of_means(&sample);
                }
            }
        }
    }
    (mop, pom)
}

#[test]
fn estimators_are_exactly_unbiased_for_two_pairs() {
    for (n, p, m) in [(1, 0.5, 1), (3, 0.4, 2), (5, 0.7, 1), (5, 0.5, 2)] {
        let (mop, pom) = enumerate_two_pairs(n, p, m);
        assert!((mop - n as f64).abs() < 1e-9, "{n} {p} {m}: {mop}");
        assert!((pom - n as f64).abs() < 1e-9, "{n} {p} {m}: {pom}");
    }
}

#[test]
fn single_pair_estimate() {
    assert_eq!(nhat_single(300, 50, 10).unwrap(), 1500.0);
    assert_eq!(nhat_single(0, 12, 3).unwrap(), 0.0);
    assert!(nhat_single(3, 2, 3).is_err());
}

#[test]
fn sample_variance_examples() {
    assert_eq!(sample_variance_s2(&[4.0, 4.0, 4.0]).unwrap(), 0.0);
    assert_eq!(sample_variance_s2(&[1.0, 3.0]).unwrap(), 2.0);
    assert!(sample_variance_s2(&[1.0]).is_err());
}

#[test]
fn clt_interval_examples() {
    let (lo, hi) = clt_confidence_interval(100.0, 469.333, 100, 0.05).unwrap();
    let half = 1.959_964 * (469.333f64 / 100.0).sqrt();
    assert!((hi - 100.0 - half).abs() < 1e-5);
    assert!((100.0 - lo - half).abs() < 1e-5);
    assert_eq!(clt_confidence_interval(7.0, 0.0, 5, 0.05).unwrap(), (7.0, 7.0));
}

#[test]
fn conditional_coverage_examples() {
    let c = conditional_coverage(436.5608, 469.333, 0.05).unwrap();
    assert!((c - 0.9413).abs() < 2e-4);
    for alpha in [0.01, 0.05, 0.1] {
        assert!((conditional_coverage(3.0, 3.0, alpha).unwrap() - (1.0 - alpha)).abs() < 1e-12);
    }
    assert!(conditional_coverage(1e-30, 469.0, 0.05).unwrap() < 1e-10);
}

#[test]
fn unpaired_samples_only_allow_product_of_means() {
    let sample = PairedSample::new(vec![3, 4, 5], vec![20, 30], 10).unwrap();
    assert!(!sample.is_paired());
    assert!(estimate_mean_of_products(&sample).is_err());
    assert_eq!(estimate_product_of_means(&sample), 4.0 * 25.0 / 10.0);
    let report = EstimateReport::from_sample(&sample, EstimatorKind::ProductOfMeans, 0.05).unwrap();
    assert!(report.ci_low < report.n_hat && report.n_hat < report.ci_high);
    assert!((report.p_hat - 0.4).abs() < 1e-15);
}

#[test]
fn mean_of_products_report() {
    let sample = PairedSample::new(vec![10, 12, 9, 11], vec![25, 22, 30, 24], 10).unwrap();
    let report = EstimateReport::from_sample(&sample, EstimatorKind::MeanOfProducts, 0.05).unwrap();
    let nhats = [25.0, 26.4, 27.0, 26.4];
    let center = nhats.iter().sum::<f64>() / 4.0;
    assert!((report.n_hat - center).abs() < 1e-12);
    let (lo, hi) = clt_confidence_interval(center, sample_variance_s2(&nhats).unwrap(), 4, 0.05).unwrap();
    assert!((report.ci_low - lo).abs() < 1e-12 && (report.ci_high - hi).abs() < 1e-12);
    assert_eq!(report.k_final, 4);
}
