use crate::{Error, Result};

/// Little-endian cursor over an in-memory buffer; every read is bounds-checked.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8], what: &'static str) -> Self {
        Self { buf, pos: 0, what }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Truncated {
                what: self.what,
                expected: (self.pos + n) as u64,
                found: self.buf.len() as u64,
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn expect_magic(&mut self, magic: &[u8; 8]) -> Result<()> {
        let got = self.take(magic.len()).map_err(|_| {
            Error::format(self.what, "file shorter than magic")
        })?;
        if got != magic {
            return Err(Error::format(
                self.what,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(got),
                    String::from_utf8_lossy(magic)
                ),
            ));
        }
        Ok(())
    }
}

/// Checks that `count * elem` bytes remain before anything is allocated.
pub(crate) fn require_payload(
    r: &Reader<'_>,
    what: &'static str,
    count: u64,
    elem: u64,
) -> Result<usize> {
    let need = count
        .checked_mul(elem)
        .ok_or_else(|| Error::format(what, "declared size overflows"))?;
    if (r.remaining() as u64) < need {
        return Err(Error::Truncated {
            what,
            expected: need,
            found: r.remaining() as u64,
        });
    }
    Ok(need as usize)
}
