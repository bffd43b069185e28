use splitgauge::prng::*;

// Known-answer vectors published with the Random123 reference library.
#[test]
fn philox_known_answers() {
    assert_eq!(
        philox4x32([0, 0, 0, 0], [0, 0]),
        [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]
    );
    assert_eq!(
        philox4x32([u32::MAX; 4], [u32::MAX; 2]),
        [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]
    );
    assert_eq!(
        philox4x32(
            [0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344],
            [0xa4093822, 0x299f31d0]
        ),
        [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
    );
}

#[test]
fn golden_stream() {
    let mut s = Stream::new(42, "golden");
    let got: Vec<u64> = (0..4).map(|_| s.next_u64()).collect();
    assert_eq!(got, GOLDEN_42);
    assert_eq!(next_u64(&StreamKey::new(42, "golden", 2)), GOLDEN_42[2]);
}

const GOLDEN_42: [u64; 4] = [
    10095087608010548779,
    13177189121710301643,
    16293625822686005363,
    12152330914429282006,
];

#[test]
fn shuffle_singleton() {
    assert_eq!(shuffle(&StreamKey::new(1, "t", 0), &[0]), vec![0]);
    let empty: Vec<u8> = Vec::new();
    assert!(shuffle(&StreamKey::new(1, "t", 0), &empty).is_empty());
}

#[test]
fn full_sample_is_permutation() {
    let mut got = sample_without_replacement(&StreamKey::new(9, "t", 0), 5, 5).unwrap();
    got.sort_unstable();
    assert_eq!(got, vec![0, 1, 2, 3, 4]);
}

#[test]
fn oversample_is_error() {
    assert!(sample_without_replacement(&StreamKey::new(9, "t", 0), 3, 4).is_err());
}

#[test]
fn domains_and_seeds_separate() {
    let a = next_u64(&StreamKey::new(1, "a", 0));
    let b = next_u64(&StreamKey::new(1, "b", 0));
    let c = next_u64(&StreamKey::new(2, "a", 0));
    assert!(a != b && a != c && b != c);
}

#[test]
fn low_byte_chi_square() {
    let mut s = Stream::new(2024, "chi-square");
    let mut counts = [0u64; 256];
    let draws = 1_000_000u64;
    for _ in 0..draws {
        counts[(s.next_u64() & 0xff) as usize] += 1;
    }
    let expected = draws as f64 / 256.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // chi-square, 255 dof, upper 0.001 quantile
    assert!(chi2 < 330.52, "chi2 = {chi2}");
}

#[test]
fn below_is_in_range_and_covers() {
    let mut s = Stream::new(3, "below");
    let mut seen = [false; 7];
    for _ in 0..1000 {
        let v = s.below(7);
        assert!(v < 7);
        seen[v as usize] = true;
    }
    assert!(seen.iter().all(|&x| x));
}

#[test]
fn gauss_moments() {
    let mut s = Stream::new(5, "gauss");
    let n = 200_000;
    let xs: Vec<f64> = (0..n).map(|_| s.gauss()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!(mean.abs() < 0.01, "{mean}");
    assert!((var - 1.0).abs() < 0.01, "{var}");
}

#[test]
fn partitioned_ranges_stay_disjoint() {
    let mut s = Stream::new(11, "part");
    let picked = s.sample_without_replacement(100, 40).unwrap();
    let (a, b) = picked.split_at(20);
    assert!(a.iter().all(|x| !b.contains(x)));
}
