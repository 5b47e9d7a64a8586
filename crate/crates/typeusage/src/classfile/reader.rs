use super::ClassFileError;

/// Bounds-checked big-endian cursor over a class-file image.
pub(crate) struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        ByteReader { data, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ClassFileError> {
        if self.pos + n > self.data.len() {
            return Err(ClassFileError::Malformed(format!(
                "unexpected end of file at offset {} (wanted {} bytes, {} left)",
                self.pos,
                n,
                self.data.len() - self.pos
            )));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    pub fn u8(&mut self) -> Result<u8, ClassFileError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, ClassFileError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    pub fn u32(&mut self) -> Result<u32, ClassFileError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn bytes(&mut self, n: usize) -> Result<&'a [u8], ClassFileError> {
        self.take(n)
    }

    pub fn skip(&mut self, n: usize) -> Result<(), ClassFileError> {
        self.take(n).map(|_| ())
    }
}

/// Decodes the JVM's modified UTF-8. Surrogate pairs are recombined;
/// anything outside the encoding is a malformed-file error.
pub(crate) fn decode_mutf8(bytes: &[u8]) -> Result<String, ClassFileError> {
    let mut out = String::with_capacity(bytes.len());
    let mut units: Vec<u16> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b & 0x80 == 0 {
            if b == 0 {
                return Err(ClassFileError::Malformed("NUL byte in mutf8".into()));
            }
            units.push(b as u16);
            i += 1;
        } else if b & 0xE0 == 0xC0 {
            if i + 1 >= bytes.len() || bytes[i + 1] & 0xC0 != 0x80 {
                return Err(ClassFileError::Malformed("truncated mutf8 sequence".into()));
            }
            units.push(((b as u16 & 0x1F) << 6) | (bytes[i + 1] as u16 & 0x3F));
            i += 2;
        } else if b & 0xF0 == 0xE0 {
            if i + 2 >= bytes.len()
                || bytes[i + 1] & 0xC0 != 0x80
                || bytes[i + 2] & 0xC0 != 0x80
            {
                return Err(ClassFileError::Malformed("truncated mutf8 sequence".into()));
            }
            units.push(
                ((b as u16 & 0x0F) << 12)
                    | ((bytes[i + 1] as u16 & 0x3F) << 6)
                    | (bytes[i + 2] as u16 & 0x3F),
            );
            i += 3;
        } else {
            return Err(ClassFileError::Malformed(format!(
                "invalid mutf8 lead byte 0x{b:02X}"
            )));
        }
    }
    for c in char::decode_utf16(units.into_iter()) {
        match c {
            Ok(c) => out.push(c),
            Err(_) => out.push(char::REPLACEMENT_CHARACTER),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_big_endian() {
        let mut r = ByteReader::new(&[0xCA, 0xFE, 0xBA, 0xBE, 0x00, 0x01]);
        assert_eq!(r.u32().unwrap(), 0xCAFE_BABE);
        assert_eq!(r.u16().unwrap(), 1);
        assert!(r.u8().is_err());
    }

    #[test]
    fn mutf8_ascii_and_two_byte() {
        assert_eq!(decode_mutf8(b"java/lang/String").unwrap(), "java/lang/String");
        // NUL is encoded as 0xC0 0x80
        assert_eq!(decode_mutf8(&[0xC0, 0x80]).unwrap(), "\0");
        assert!(decode_mutf8(&[0x00]).is_err());
        assert!(decode_mutf8(&[0xC3]).is_err());
    }
}
