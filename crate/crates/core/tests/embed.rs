use splitgauge::embed::*;
use splitgauge::ingest::Dataset;
use splitgauge::prng::Stream;

fn random_dataset(n: usize, h: usize, w: usize, c: usize, seed: u64) -> Dataset {
    let mut s = Stream::new(seed, "test-images");
    let images = (0..n * h * w * c).map(|_| s.below(256) as u8).collect();
    Dataset::new(images, vec![0; n], h, w, c, 1).unwrap()
}

#[test]
fn deterministic() {
    let ds = random_dataset(5, 12, 12, 3, 1);
    let cfg = EmbedderConfig::default();
    assert_eq!(embed_reference(&ds, &cfg).unwrap(), embed_reference(&ds, &cfg).unwrap());
}

#[test]
fn constant_images_give_identical_rows() {
    let ds = Dataset::new(vec![77; 4 * 9 * 7 * 3], vec![0; 4], 9, 7, 3, 1).unwrap();
    let f = embed_reference(&ds, &EmbedderConfig::default()).unwrap();
    for i in 1..4 {
        assert_eq!(f.row(i), f.row(0));
    }
}

#[test]
fn outputs_in_tanh_range_and_label_independent() {
    let mut ds = random_dataset(6, 16, 16, 3, 2);
    let cfg = EmbedderConfig {
        projection_dim: 32,
        ..Default::default()
    };
    let a = embed_reference(&ds, &cfg).unwrap();
    assert!(a.values().iter().all(|v| v.abs() < 1.0));
    ds.labels = vec![0; 6];
    ds.class_count = 3;
    ds.labels[2] = 2;
    assert_eq!(a.values(), embed_reference(&ds, &cfg).unwrap().values());
}

#[test]
fn row_permutation_commutes() {
    let ds = random_dataset(5, 10, 10, 1, 3);
    let cfg = EmbedderConfig {
        grid_h: 4,
        grid_w: 4,
        projection_dim: 16,
        seed: 9,
    };
    let perm = [3, 0, 4, 1, 2];
    let a = embed_reference(&ds, &cfg).unwrap().select(&perm);
    let b = embed_reference(&ds.select(&perm), &cfg).unwrap();
    assert_eq!(a.values(), b.values());
}

#[test]
fn pooling_pads_by_edge_replication() {
    // 3 x 3 single-channel image on a 2 x 2 grid: patches are 2 x 2 after
    // padding to 4 x 4.
    let img = [0u8, 0, 255, 0, 0, 255, 255, 255, 255];
    let cfg = EmbedderConfig {
        grid_h: 2,
        grid_w: 2,
        projection_dim: 1,
        seed: 0,
    };
    let p = pooled_means(&img, 3, 3, 1, &cfg);
    assert_eq!(p, vec![0.0, 1.0, 1.0, 1.0]);
}

#[test]
fn projection_dim_bound() {
    let cfg = EmbedderConfig {
        grid_h: 1,
        grid_w: 1,
        projection_dim: 5,
        seed: 0,
    };
    assert!(cfg.validate(1).is_err());
    assert!(cfg.validate(2).is_ok());
}

#[test]
fn feature_matrix_rejects_non_finite() {
    assert!(FeatureMatrix::new(1, 2, vec![1.0, f64::NAN], "x", 0).is_err());
    assert!(FeatureMatrix::new(1, 0, vec![], "x", 0).is_err());
}
