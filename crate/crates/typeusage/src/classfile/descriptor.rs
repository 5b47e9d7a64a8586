use super::ClassFileError;

/// A single JVM field type, e.g. `I`, `Ljava/lang/String;` or `[[D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldType {
    /// The raw descriptor text, e.g. "Ljava/lang/String;".
    pub raw: String,
}

impl FieldType {
    /// Stack width in slots: 2 for long and double, 1 otherwise.
    pub fn width(&self) -> u8 {
        match self.raw.as_bytes()[0] {
            b'J' | b'D' => 2,
            _ => 1,
        }
    }

    pub fn is_reference(&self) -> bool {
        matches!(self.raw.as_bytes()[0], b'L' | b'[')
    }

    /// The binary class name for `L...;` descriptors; arrays and primitives
    /// keep their raw descriptor form.
    pub fn binary_name(&self) -> &str {
        if self.raw.starts_with('L') && self.raw.ends_with(';') {
            &self.raw[1..self.raw.len() - 1]
        } else {
            &self.raw
        }
    }
}

/// A decomposed JVM method descriptor such as `(Ljava/lang/String;I)V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDescriptor {
    pub param_types: Vec<FieldType>,
    /// None means `V` (void).
    pub return_type: Option<FieldType>,
}

impl MethodDescriptor {
    /// Total stack slots occupied by the parameters (category-2 types count 2).
    pub fn param_slots(&self) -> u16 {
        self.param_types.iter().map(|t| t.width() as u16).sum()
    }
}

impl std::fmt::Display for MethodDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for p in &self.param_types {
            write!(f, "{}", p.raw)?;
        }
        write!(f, ")")?;
        match &self.return_type {
            Some(t) => write!(f, "{}", t.raw),
            None => write!(f, "V"),
        }
    }
}

fn parse_field_type(s: &str, pos: &mut usize) -> Result<FieldType, ClassFileError> {
    let start = *pos;
    let bytes = s.as_bytes();
    loop {
        match bytes.get(*pos) {
            Some(b'[') => *pos += 1,
            Some(b'B' | b'C' | b'D' | b'F' | b'I' | b'J' | b'S' | b'Z') => {
                *pos += 1;
                return Ok(FieldType { raw: s[start..*pos].to_owned() });
            }
            Some(b'L') => {
                let end = s[*pos..]
                    .find(';')
                    .ok_or_else(|| bad_descriptor(s, "unterminated class type"))?;
                *pos += end + 1;
                return Ok(FieldType { raw: s[start..*pos].to_owned() });
            }
            _ => return Err(bad_descriptor(s, "invalid type character")),
        }
    }
}

fn bad_descriptor(s: &str, why: &str) -> ClassFileError {
    ClassFileError::BadDescriptor { descriptor: s.to_owned(), reason: why.to_owned() }
}

/// Parses a JVM method descriptor. The result round-trips: `parse_descriptor(d).to_string() == d`.
pub fn parse_descriptor(text: &str) -> Result<MethodDescriptor, ClassFileError> {
    if !text.starts_with('(') {
        return Err(bad_descriptor(text, "missing opening parenthesis"));
    }
    let mut pos = 1;
    let mut param_types = Vec::new();
    while text.as_bytes().get(pos) != Some(&b')') {
        if pos >= text.len() {
            return Err(bad_descriptor(text, "missing closing parenthesis"));
        }
        param_types.push(parse_field_type(text, &mut pos)?);
    }
    pos += 1; // ')'
    let return_type = if text.as_bytes().get(pos) == Some(&b'V') {
        pos += 1;
        None
    } else {
        Some(parse_field_type(text, &mut pos)?)
    };
    if pos != text.len() {
        return Err(bad_descriptor(text, "trailing characters"));
    }
    Ok(MethodDescriptor { param_types, return_type })
}
