//! The subset of MATLAB Level-5 MAT files needed for the SVHN cropped-digit
//! release: a `uint8` array `X` of shape `H × W × C × N` and a numeric label
//! column `y` of length `N`, optionally inside zlib-compressed elements.
//! HDF5-based (v7.3) containers are detected and refused.

use std::io::{Read, Write};
use std::path::Path;

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;
use flate2::Compression;

use super::Dataset;
use crate::{Error, Result};

const HEADER_LEN: usize = 128;
const HDF5_SIGNATURE: &[u8; 8] = b"\x89HDF\r\n\x1a\n";

const MI_INT8: u32 = 1;
const MI_UINT8: u32 = 2;
const MI_INT16: u32 = 3;
const MI_UINT16: u32 = 4;
const MI_INT32: u32 = 5;
const MI_UINT32: u32 = 6;
const MI_SINGLE: u32 = 7;
const MI_DOUBLE: u32 = 9;
const MI_INT64: u32 = 12;
const MI_UINT64: u32 = 13;
const MI_MATRIX: u32 = 14;
const MI_COMPRESSED: u32 = 15;

const MX_DOUBLE: u8 = 6;
const MX_UINT8: u8 = 9;
const FLAG_COMPLEX: u32 = 0x0800;

const WHAT: &str = "MAT file";

#[derive(Clone, Copy)]
enum Endian {
    Little,
    Big,
}

impl Endian {
    fn u16(self, b: &[u8]) -> u16 {
        let a = [b[0], b[1]];
        match self {
            Endian::Little => u16::from_le_bytes(a),
            Endian::Big => u16::from_be_bytes(a),
        }
    }

    fn u32(self, b: &[u8]) -> u32 {
        let a = b[..4].try_into().unwrap();
        match self {
            Endian::Little => u32::from_le_bytes(a),
            Endian::Big => u32::from_be_bytes(a),
        }
    }

    fn u64(self, b: &[u8]) -> u64 {
        let a = b[..8].try_into().unwrap();
        match self {
            Endian::Little => u64::from_le_bytes(a),
            Endian::Big => u64::from_be_bytes(a),
        }
    }
}

/// A top-level variable that survived parsing.
struct Variable {
    name: String,
    class: u8,
    dims: Vec<usize>,
    data_type: u32,
    data: Vec<u8>,
}

fn is_numeric_class(class: u8) -> bool {
    (6..=15).contains(&class)
}

fn type_width(t: u32) -> Option<usize> {
    Some(match t {
        MI_INT8 | MI_UINT8 => 1,
        MI_INT16 | MI_UINT16 => 2,
        MI_INT32 | MI_UINT32 | MI_SINGLE => 4,
        MI_DOUBLE | MI_INT64 | MI_UINT64 => 8,
        _ => return None,
    })
}

/// Splits one data element off the front of `buf`: `(type, payload, consumed)`.
fn split_element(buf: &[u8], e: Endian) -> Result<(u32, &[u8], usize)> {
    if buf.len() < 8 {
        return Err(Error::Truncated {
            what: WHAT,
            expected: 8,
            found: buf.len() as u64,
        });
    }
    let word = e.u32(&buf[0..4]);
    if word >> 16 != 0 {
        // small data element: size and type share the first word
        let ty = word & 0xffff;
        let n = (word >> 16) as usize;
        if n > 4 {
            return Err(Error::format(WHAT, format!("small element declares {n} bytes")));
        }
        return Ok((ty, &buf[4..4 + n], 8));
    }
    let n = e.u32(&buf[4..8]) as usize;
    // compressed elements carry no padding
    let padded = if word == MI_COMPRESSED || n.is_multiple_of(8) { n } else { n + 8 - n % 8 };
    if buf.len() - 8 < n {
        return Err(Error::Truncated {
            what: WHAT,
            expected: (8 + n) as u64,
            found: buf.len() as u64,
        });
    }
    // tolerate a missing final pad
    let consumed = (8 + padded).min(buf.len());
    Ok((word, &buf[8..8 + n], consumed))
}

fn inflate(payload: &[u8], e: Endian) -> Result<Vec<u8>> {
    let mut dec = ZlibDecoder::new(payload);
    let mut tag = [0u8; 8];
    dec.read_exact(&mut tag)
        .map_err(|err| Error::format(WHAT, format!("zlib stream: {err}")))?;
    let declared = if e.u32(&tag[0..4]) >> 16 != 0 {
        4
    } else {
        u64::from(e.u32(&tag[4..8]))
    };
    let mut out = tag.to_vec();
    // grows with the bytes actually produced, never with the declared size
    dec.take(declared)
        .read_to_end(&mut out)
        .map_err(|err| Error::format(WHAT, format!("zlib stream: {err}")))?;
    if ((out.len() - 8) as u64) < declared {
        return Err(Error::Truncated {
            what: WHAT,
            expected: declared,
            found: (out.len() - 8) as u64,
        });
    }
    Ok(out)
}

fn parse_matrix(payload: &[u8], e: Endian) -> Result<Variable> {
    let (flags_ty, flags, mut pos) = split_element(payload, e)?;
    if flags_ty != MI_UINT32 || flags.len() != 8 {
        return Err(Error::Structure("array flags subelement missing".into()));
    }
    let flag_word = e.u32(&flags[0..4]);
    let class = (flag_word & 0xff) as u8;
    let (dims_ty, dims_raw, used) = split_element(&payload[pos..], e)?;
    pos += used;
    if dims_ty != MI_INT32 || dims_raw.len() % 4 != 0 {
        return Err(Error::Structure("dimensions subelement missing".into()));
    }
    let dims = dims_raw
        .chunks_exact(4)
        .map(|c| {
            let v = e.u32(c) as i32;
            usize::try_from(v).map_err(|_| Error::Structure(format!("negative dimension {v}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let (name_ty, name_raw, used) = split_element(&payload[pos..], e)?;
    pos += used;
    if name_ty != MI_INT8 {
        return Err(Error::Structure("array name subelement missing".into()));
    }
    let name = String::from_utf8_lossy(name_raw).into_owned();

    let (data_type, data) = if is_numeric_class(class) {
        if flag_word & FLAG_COMPLEX != 0 {
            return Err(Error::Type(format!("variable `{name}` is complex")));
        }
        let (ty, data, _) = split_element(&payload[pos..], e)?;
        (ty, data.to_vec())
    } else {
        // cells, structs, objects, chars, sparse: recorded but not decoded
        (0, Vec::new())
    };
    Ok(Variable {
        name,
        class,
        dims,
        data_type,
        data,
    })
}

fn parse_variables(body: &[u8], e: Endian, out: &mut Vec<Variable>) -> Result<()> {
    let mut pos = 0;
    while body.len() - pos >= 8 {
        let (ty, payload, used) = split_element(&body[pos..], e)?;
        pos += used;
        match ty {
            MI_COMPRESSED => {
                let inner = inflate(payload, e)?;
                parse_variables(&inner, e, out)?;
            }
            MI_MATRIX if !payload.is_empty() => out.push(parse_matrix(payload, e)?),
            _ => {}
        }
    }
    Ok(())
}

fn detect_container(buf: &[u8]) -> Result<Endian> {
    if buf.starts_with(HDF5_SIGNATURE)
        || (buf.len() >= 520 && &buf[512..520] == HDF5_SIGNATURE)
    {
        return Err(Error::UnsupportedFormat(
            "HDF5-based MAT container (v7.3); re-save with -v7 or convert to the raw tensor format"
                .into(),
        ));
    }
    if buf.len() < HEADER_LEN {
        return Err(Error::Truncated {
            what: WHAT,
            expected: HEADER_LEN as u64,
            found: buf.len() as u64,
        });
    }
    let endian = match &buf[126..128] {
        b"IM" => Endian::Little,
        b"MI" => Endian::Big,
        _ => {
            return Err(Error::UnsupportedFormat(
                "not a Level-5 MAT file (Level-4 or unknown container)".into(),
            ))
        }
    };
    match endian.u16(&buf[124..126]) {
        0x0100 => Ok(endian),
        0x0200 => Err(Error::UnsupportedFormat(
            "HDF5-based MAT container (v7.3); re-save with -v7 or convert to the raw tensor format"
                .into(),
        )),
        v => Err(Error::UnsupportedFormat(format!("MAT version 0x{v:04x}"))),
    }
}

fn numeric_values(var: &Variable, e: Endian) -> Result<Vec<f64>> {
    let w = type_width(var.data_type)
        .ok_or_else(|| Error::Type(format!("`{}` stored as element type {}", var.name, var.data_type)))?;
    Ok(var
        .data
        .chunks_exact(w)
        .map(|c| match var.data_type {
            MI_INT8 => f64::from(c[0] as i8),
            MI_UINT8 => f64::from(c[0]),
            MI_INT16 => f64::from(e.u16(c) as i16),
            MI_UINT16 => f64::from(e.u16(c)),
            MI_INT32 => f64::from(e.u32(c) as i32),
            MI_UINT32 => f64::from(e.u32(c)),
            MI_SINGLE => f64::from(f32::from_bits(e.u32(c))),
            MI_DOUBLE => f64::from_bits(e.u64(c)),
            MI_INT64 => e.u64(c) as i64 as f64,
            _ => e.u64(c) as f64,
        })
        .collect())
}

/// Parses an in-memory MAT file. See [`read_svhn_mat`].
pub fn read_svhn_mat_bytes(buf: &[u8], remap_label_ten: bool) -> Result<Dataset> {
    let e = detect_container(buf)?;
    let mut vars = Vec::new();
    parse_variables(&buf[HEADER_LEN..], e, &mut vars)?;

    let x = vars
        .iter()
        .find(|v| v.name == "X")
        .ok_or_else(|| Error::Structure("variable `X` not found".into()))?;
    let y = vars
        .iter()
        .find(|v| v.name == "y")
        .ok_or_else(|| Error::Structure("variable `y` not found".into()))?;

    if x.class != MX_UINT8 {
        return Err(Error::Type(format!("`X` has MATLAB class {}, expected uint8", x.class)));
    }
    let (h, w, c, n) = match x.dims.as_slice() {
        &[h, w, c, n] => (h, w, c, n),
        // a single image loses its trailing singleton dimension
        &[h, w, c] => (h, w, c, 1),
        other => {
            return Err(Error::Structure(format!("`X` has shape {other:?}, expected H x W x C x N")))
        }
    };
    let count = h * w * c * n;
    let column_major: Vec<u8> = if x.data_type == MI_UINT8 {
        x.data.clone()
    } else {
        numeric_values(x, e)?
            .into_iter()
            .map(|v| {
                if (0.0..=255.0).contains(&v) && v.fract() == 0.0 {
                    Ok(v as u8)
                } else {
                    Err(Error::Type(format!("`X` value {v} does not fit uint8")))
                }
            })
            .collect::<Result<_>>()?
    };
    if column_major.len() != count {
        return Err(Error::Structure(format!(
            "`X` holds {} values for shape {h}x{w}x{c}x{n}",
            column_major.len()
        )));
    }

    if !is_numeric_class(y.class) {
        return Err(Error::Type(format!("`y` has non-numeric MATLAB class {}", y.class)));
    }
    let raw_labels = numeric_values(y, e)?;
    if raw_labels.len() != n || y.dims.iter().product::<usize>() != n {
        return Err(Error::Structure(format!(
            "`y` has {} entries for {n} images",
            raw_labels.len()
        )));
    }
    let mut labels = Vec::with_capacity(n);
    for v in raw_labels {
        if v < 0.0 || v.fract() != 0.0 || v > f64::from(u32::MAX) {
            return Err(Error::Validation(format!("label {v} is not a non-negative integer")));
        }
        labels.push(v as u32);
    }
    let class_count = if remap_label_ten {
        for l in labels.iter_mut() {
            match *l {
                10 => *l = 0,
                v if v > 10 => return Err(Error::LabelOutOfRange { label: v, classes: 10 }),
                _ => {}
            }
        }
        10
    } else {
        labels.iter().max().map_or(1, |m| m + 1)
    };

    // H x W x C x N column-major -> N x H x W x C row-major
    let mut images = vec![0u8; count];
    for s in 0..n {
        for ch in 0..c {
            for col in 0..w {
                let src = h * (col + w * (ch + c * s));
                for row in 0..h {
                    images[((s * h + row) * w + col) * c + ch] = column_major[src + row];
                }
            }
        }
    }
    Dataset::new(images, labels, h, w, c, class_count)
}

/// Reads an SVHN-style `.mat` file.
///
/// With `remap_label_ten`, the SVHN convention of labelling digit zero as
/// `10` is undone and labels come back in `0..10`.
pub fn read_svhn_mat(path: impl AsRef<Path>, remap_label_ten: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_svhn_mat_bytes(&buf, remap_label_ten)
}

fn push_element(out: &mut Vec<u8>, ty: u32, data: &[u8]) {
    out.extend_from_slice(&ty.to_le_bytes());
    out.extend_from_slice(&(data.len() as u32).to_le_bytes());
    out.extend_from_slice(data);
    while !out.len().is_multiple_of(8) {
        out.push(0);
    }
}

fn matrix_element(name: &str, class: u8, dims: &[usize], data_type: u32, data: &[u8]) -> Vec<u8> {
    let mut body = Vec::new();
    let mut flags = Vec::with_capacity(8);
    flags.extend_from_slice(&u32::from(class).to_le_bytes());
    flags.extend_from_slice(&0u32.to_le_bytes());
    push_element(&mut body, MI_UINT32, &flags);
    let dims: Vec<u8> = dims.iter().flat_map(|&d| (d as i32).to_le_bytes()).collect();
    push_element(&mut body, MI_INT32, &dims);
    push_element(&mut body, MI_INT8, name.as_bytes());
    push_element(&mut body, data_type, data);
    let mut out = Vec::with_capacity(body.len() + 8);
    out.extend_from_slice(&MI_MATRIX.to_le_bytes());
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

/// Encodes a dataset in the SVHN `.mat` layout (`X` uint8 `H×W×C×N`, `y`
/// double `N×1`). With `zero_as_ten`, label 0 is written as 10.
pub fn encode_svhn_mat(ds: &Dataset, compress: bool, zero_as_ten: bool) -> Result<Vec<u8>> {
    ds.validate()?;
    let (n, h, w, c) = (ds.len(), ds.height, ds.width, ds.channels);
    if [n, h, w, c].iter().any(|&v| v > i32::MAX as usize) {
        return Err(Error::Validation("dimension exceeds MAT int32 range".into()));
    }
    let mut header = b"MATLAB 5.0 MAT-file, Platform: splitgauge".to_vec();
    header.resize(116, b' ');
    header.extend_from_slice(&[0u8; 8]);
    header.extend_from_slice(&0x0100u16.to_le_bytes());
    header.extend_from_slice(b"IM");

    let mut column_major = vec![0u8; ds.images.len()];
    for s in 0..n {
        for ch in 0..c {
            for col in 0..w {
                let dst = h * (col + w * (ch + c * s));
                for row in 0..h {
                    column_major[dst + row] = ds.images[((s * h + row) * w + col) * c + ch];
                }
            }
        }
    }
    let labels: Vec<u8> = ds
        .labels
        .iter()
        .map(|&l| if zero_as_ten && l == 0 { 10.0 } else { f64::from(l) })
        .flat_map(f64::to_le_bytes)
        .collect();

    let elements = [
        matrix_element("X", MX_UINT8, &[h, w, c, n], MI_UINT8, &column_major),
        matrix_element("y", MX_DOUBLE, &[n, 1], MI_DOUBLE, &labels),
    ];
    let mut out = header;
    for el in elements {
        if compress {
            let mut enc = ZlibEncoder::new(Vec::new(), Compression::default());
            enc.write_all(&el).expect("in-memory write");
            let z = enc.finish().expect("in-memory write");
            out.extend_from_slice(&MI_COMPRESSED.to_le_bytes());
            out.extend_from_slice(&(z.len() as u32).to_le_bytes());
            out.extend_from_slice(&z);
        } else {
            out.extend_from_slice(&el);
        }
    }
    Ok(out)
}

pub fn write_svhn_mat(path: impl AsRef<Path>, ds: &Dataset, compress: bool, zero_as_ten: bool) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_svhn_mat(ds, compress, zero_as_ten)?).map_err(|e| Error::io(path, e))
}
