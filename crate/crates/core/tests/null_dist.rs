use rankindep::null_dist::{eigen_series_d, zeta_max_sample, NullSpec};
use rankindep::{gumbel_cdf, ks_distance, KernelKind};

#[test]
fn partial_sums_rise_to_one_twelfth() {
    let mut last = 0.0;
    for k in [10usize, 100, 1_000, 10_000, 100_000] {
        let s = eigen_series_d(k);
        let sum = s.partial_sum();
        assert!(sum > last && sum < 1.0 / 12.0, "K = {k}");
        assert!((sum + s.tail_sum() - 1.0 / 12.0).abs() < 1e-15);
        last = sum;
    }
    assert!(1.0 / 12.0 - last < 1e-4);
}

#[test]
fn tail_mass_follows_log_squared_law() {
    // the ratio to (log K)^2 / K settles near 0.025 (frozen bracket)
    for k in [100usize, 1_000, 10_000, 100_000] {
        let kf = k as f64;
        let ratio = eigen_series_d(k).tail_sum() / (kf.ln().powi(2) / kf);
        assert!((0.02..0.035).contains(&ratio), "K = {k}: {ratio}");
    }
}

#[test]
fn truncated_maxima_are_close_to_gumbel() {
    let spec = NullSpec::for_kernel(KernelKind::HoeffdingD);
    let eig = eigen_series_d(40).values();
    let sample = zeta_max_sample(&spec, &eig, 50, 1000, 17);
    let ks = ks_distance(&sample, |y| gumbel_cdf(y, &spec));
    assert!(ks < 0.12, "KS = {ks}");
}
