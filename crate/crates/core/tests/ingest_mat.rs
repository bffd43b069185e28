use splitgauge::ingest::mat::*;
use splitgauge::ingest::Dataset;
use splitgauge::Error;

// Level-5 MAT tags and array classes, restated from the format description
const HDF5_SIGNATURE: &[u8; 8] = b"\x89HDF\r\n\x1a\n";
const MI_INT8: u32 = 1;
const MI_UINT8: u32 = 2;
const MI_INT32: u32 = 5;
const MI_UINT32: u32 = 6;
const MI_DOUBLE: u32 = 9;
const MI_MATRIX: u32 = 14;
const MX_DOUBLE: u8 = 6;
const MX_UINT8: u8 = 9;

fn push_element(out: &mut Vec<u8>, ty: u32, data: &[u8]) {
    out.extend_from_slice(&ty.to_le_bytes());
    out.extend_from_slice(&(data.len() as u32).to_le_bytes());
    out.extend_from_slice(data);
    out.resize(out.len().next_multiple_of(8), 0);
}

fn matrix_element(name: &str, class: u8, dims: &[usize], data_type: u32, data: &[u8]) -> Vec<u8> {
    let mut body = Vec::new();
    push_element(&mut body, MI_UINT32, &[class, 0, 0, 0, 0, 0, 0, 0]);
    let dims: Vec<u8> = dims.iter().flat_map(|&d| (d as i32).to_le_bytes()).collect();
    push_element(&mut body, MI_INT32, &dims);
    push_element(&mut body, MI_INT8, name.as_bytes());
    push_element(&mut body, data_type, data);
    let mut out = MI_MATRIX.to_le_bytes().to_vec();
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

fn toy() -> Dataset {
    let (n, h, w, c) = (3, 2, 3, 3);
    let images = (0..n * h * w * c).map(|i| (i * 7 % 256) as u8).collect();
    Dataset::new(images, vec![1, 0, 9], h, w, c, 10).unwrap()
}

fn header() -> Vec<u8> {
    let mut h = b"MATLAB 5.0 MAT-file".to_vec();
    h.resize(116, b' ');
    h.extend_from_slice(&[0u8; 8]);
    h.extend_from_slice(&0x0100u16.to_le_bytes());
    h.extend_from_slice(b"IM");
    h
}

#[test]
fn writer_round_trip_plain_and_compressed() {
    let ds = toy();
    for compress in [false, true] {
        let bytes = encode_svhn_mat(&ds, compress, false).unwrap();
        let back = read_svhn_mat_bytes(&bytes, false).unwrap();
        assert_eq!(back.images, ds.images);
        assert_eq!(back.labels, ds.labels);
        assert_eq!(back.class_count, 10);
    }
}

#[test]
fn remap_ten_to_zero() {
    let ds = toy();
    let bytes = encode_svhn_mat(&ds, true, true).unwrap();
    let raw = read_svhn_mat_bytes(&bytes, false).unwrap();
    assert_eq!(raw.labels, vec![1, 10, 9]);
    assert_eq!(raw.class_count, 11);
    let mapped = read_svhn_mat_bytes(&bytes, true).unwrap();
    assert_eq!(mapped.labels, vec![1, 0, 9]);
    assert_eq!(mapped.class_count, 10);
}

#[test]
fn hdf5_rejected_at_start_and_after_user_block() {
    let mut a = HDF5_SIGNATURE.to_vec();
    a.resize(1024, 0);
    let err = read_svhn_mat_bytes(&a, false).unwrap_err();
    assert!(matches!(&err, Error::UnsupportedFormat(m) if m.contains("HDF5")), "{err}");

    let mut b = b"MATLAB 7.3 MAT-file".to_vec();
    b.resize(512, b' ');
    b.extend_from_slice(HDF5_SIGNATURE);
    b.resize(1024, 0);
    let err = read_svhn_mat_bytes(&b, false).unwrap_err();
    assert!(matches!(&err, Error::UnsupportedFormat(m) if m.contains("v7.3")), "{err}");
}

// Hand-assembled bytes, independent of the writer: a 1x1x1x2 uint8 X
// whose payload uses the small-element format, and a uint8-stored y.
#[test]
fn hand_built_small_elements() {
    let mut f = header();
    let mut body = Vec::new();
    push_element(&mut body, MI_UINT32, &[MX_UINT8, 0, 0, 0, 0, 0, 0, 0]);
    push_element(&mut body, MI_INT32, &[1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0]);
    // small element: name "X"
    body.extend_from_slice(&((1u32 << 16) | MI_INT8).to_le_bytes());
    body.extend_from_slice(&[b'X', 0, 0, 0]);
    // small element: two pixel bytes
    body.extend_from_slice(&((2u32 << 16) | MI_UINT8).to_le_bytes());
    body.extend_from_slice(&[200, 17, 0, 0]);
    f.extend_from_slice(&MI_MATRIX.to_le_bytes());
    f.extend_from_slice(&(body.len() as u32).to_le_bytes());
    f.extend_from_slice(&body);

    let mut body = Vec::new();
    push_element(&mut body, MI_UINT32, &[MX_DOUBLE, 0, 0, 0, 0, 0, 0, 0]);
    push_element(&mut body, MI_INT32, &[2, 0, 0, 0, 1, 0, 0, 0]);
    body.extend_from_slice(&((1u32 << 16) | MI_INT8).to_le_bytes());
    body.extend_from_slice(&[b'y', 0, 0, 0]);
    body.extend_from_slice(&((2u32 << 16) | MI_UINT8).to_le_bytes());
    body.extend_from_slice(&[10, 3, 0, 0]);
    f.extend_from_slice(&MI_MATRIX.to_le_bytes());
    f.extend_from_slice(&(body.len() as u32).to_le_bytes());
    f.extend_from_slice(&body);

    let ds = read_svhn_mat_bytes(&f, true).unwrap();
    assert_eq!(ds.images, vec![200, 17]);
    assert_eq!(ds.labels, vec![0, 3]);
    assert_eq!((ds.height, ds.width, ds.channels), (1, 1, 1));
}

#[test]
fn missing_variable() {
    let ds = toy();
    let bytes = encode_svhn_mat(&ds, false, false).unwrap();
    // cut off the trailing `y` element
    let x_len = 128 + matrix_element("X", MX_UINT8, &[2, 3, 3, 3], MI_UINT8, &ds.images).len();
    let err = read_svhn_mat_bytes(&bytes[..x_len], false).unwrap_err();
    assert!(matches!(err, Error::Structure(_)), "{err}");
}

#[test]
fn non_uint8_x_rejected() {
    let mut f = header();
    f.extend_from_slice(&matrix_element("X", MX_DOUBLE, &[1, 1, 1, 1], MI_DOUBLE, &1.0f64.to_le_bytes()));
    f.extend_from_slice(&matrix_element("y", MX_DOUBLE, &[1, 1], MI_DOUBLE, &1.0f64.to_le_bytes()));
    assert!(matches!(read_svhn_mat_bytes(&f, false), Err(Error::Type(_))));
}

#[test]
fn label_above_ten_with_remap() {
    let mut f = header();
    f.extend_from_slice(&matrix_element("X", MX_UINT8, &[1, 1, 1, 1], MI_UINT8, &[5]));
    f.extend_from_slice(&matrix_element("y", MX_DOUBLE, &[1, 1], MI_DOUBLE, &11.0f64.to_le_bytes()));
    assert!(matches!(read_svhn_mat_bytes(&f, true), Err(Error::LabelOutOfRange { .. })));
}

#[test]
fn truncated_element() {
    let bytes = encode_svhn_mat(&toy(), false, false).unwrap();
    assert!(read_svhn_mat_bytes(&bytes[..200], false).is_err());
}
