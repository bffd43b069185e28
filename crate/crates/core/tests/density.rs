use splitgauge::density::*;
use std::f64::consts::{LN_2, PI};
use splitgauge::prng::Stream;
use splitgauge::embed::FeatureMatrix;
use splitgauge::Error;
use splitgauge::stats::summarize;

fn gaussian_rows(n: usize, d: usize, seed: u64, center: &[f64], sigma: f64) -> Vec<Vec<f64>> {
    let mut s = Stream::new(seed, "gmm-test");
    (0..n)
        .map(|_| (0..d).map(|j| center[j] + sigma * s.gauss()).collect())
        .collect()
}

#[test]
fn single_component_equals_moments() {
    let f = FeatureMatrix::from_rows(&gaussian_rows(500, 3, 1, &[1.0, -2.0, 0.5], 1.5)).unwrap();
    let model = fit_gmm(&f, &GmmConfig::default()).unwrap();
    let g = summarize(&f).unwrap();
    let scale = (f.rows() - 1) as f64 / f.rows() as f64;
    assert_eq!(model.weights, vec![1.0]);
    for j in 0..3 {
        assert!((model.means[0][j] - g.mean[j]).abs() < 1e-9);
    }
    let cov = g.cov_row_major();
    for (p, (&got, &c)) in model.covs[0].iter().zip(&cov).enumerate() {
        let expect = c * scale + if p % 4 == 0 { model.reg } else { 0.0 };
        assert!((got - expect).abs() < 1e-9);
    }
}

#[test]
fn separated_clusters_recovered() {
    let mut rows = gaussian_rows(600, 2, 2, &[-5.0, 0.0], 0.5);
    rows.extend(gaussian_rows(600, 2, 3, &[5.0, 0.0], 0.5));
    let f = FeatureMatrix::from_rows(&rows).unwrap();
    let model = fit_gmm(&f, &GmmConfig { components: 2, seed: 4, ..Default::default() }).unwrap();
    let mut xs: Vec<&Vec<f64>> = model.means.iter().collect();
    xs.sort_by(|a, b| a[0].total_cmp(&b[0]));
    assert!((xs[0][0] + 5.0).abs() < 0.05 && xs[0][1].abs() < 0.05);
    assert!((xs[1][0] - 5.0).abs() < 0.05 && xs[1][1].abs() < 0.05);
}

#[test]
fn trace_nondecreasing() {
    let f = FeatureMatrix::from_rows(&gaussian_rows(400, 4, 5, &[0.0; 4], 1.0)).unwrap();
    let model = fit_gmm(&f, &GmmConfig { components: 3, seed: 1, ..Default::default() }).unwrap();
    assert!(model.fit_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
}

#[test]
fn standard_normal_at_mode() {
    let model = GmmModel {
        weights: vec![1.0],
        means: vec![vec![0.0]],
        covs: vec![vec![1.0]],
        fit_trace: vec![],
        dim: 1,
        covariance: CovarianceKind::Full,
        reg: 0.0,
        seed: 0,
        iterations: 0,
        converged: true,
    };
    let r = bpd(&model, &FeatureMatrix::from_rows(&[vec![0.0]]).unwrap()).unwrap();
    let expected = (2.0 * PI).sqrt().log2();
    assert!((r.bpd - expected).abs() < 1e-12);
    assert!((r.bpd - 1.32575).abs() < 1e-5);
    assert_eq!(r.bpd, r.mean_nll_nats / LN_2);
}

#[test]
fn shifted_data_has_higher_bpd() {
    let rows = gaussian_rows(300, 2, 6, &[0.0, 0.0], 1.0);
    let f = FeatureMatrix::from_rows(&rows).unwrap();
    let model = fit_gmm(&f, &GmmConfig::default()).unwrap();
    let shifted = f.map_rows(|src, dst| {
        dst.copy_from_slice(src);
        dst[0] += 10.0;
    });
    assert!(bpd(&model, &shifted).unwrap().bpd > bpd(&model, &f).unwrap().bpd);
}

#[test]
fn errors() {
    let f = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
    assert!(fit_gmm(&f, &GmmConfig { components: 3, ..Default::default() }).is_err());
    assert!(fit_gmm(&f, &GmmConfig { reg: Some(-1.0), ..Default::default() }).is_err());
    let model = fit_gmm(&f, &GmmConfig::default()).unwrap();
    let g2 = FeatureMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap();
    assert!(matches!(bpd(&model, &g2), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn diagonal_mode_zeroes_off_diagonal() {
    let mut s = Stream::new(8, "diag");
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|_| {
            let a = s.gauss();
            vec![a, a + 0.1 * s.gauss()]
        })
        .collect();
    let f = FeatureMatrix::from_rows(&rows).unwrap();
    let m = fit_gmm(&f, &GmmConfig { covariance: CovarianceKind::Diagonal, ..Default::default() }).unwrap();
    assert_eq!(m.covs[0][1], 0.0);
    assert_eq!(m.covs[0][2], 0.0);
}

#[test]
fn model_json_round_trip() {
    let f = FeatureMatrix::from_rows(&gaussian_rows(50, 2, 9, &[0.0; 2], 1.0)).unwrap();
    let m = fit_gmm(&f, &GmmConfig { components: 2, ..Default::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    m.save(&p).unwrap();
    assert_eq!(GmmModel::load(&p).unwrap(), m);
}
