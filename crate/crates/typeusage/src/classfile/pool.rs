use super::reader::{decode_mutf8, ByteReader};
use super::ClassFileError;

/// One constant-pool entry. Only the shapes the extractor needs are kept
/// structurally; numeric constants keep no payload.
#[derive(Debug, Clone, PartialEq)]
pub enum PoolEntry {
    Utf8(String),
    Integer,
    Float,
    Long,
    Double,
    Class { name_index: u16 },
    String { utf8_index: u16 },
    FieldRef { class_index: u16, name_and_type_index: u16 },
    MethodRef { class_index: u16, name_and_type_index: u16 },
    InterfaceMethodRef { class_index: u16, name_and_type_index: u16 },
    NameAndType { name_index: u16, descriptor_index: u16 },
    MethodHandle,
    MethodType,
    Dynamic,
    InvokeDynamic { name_and_type_index: u16 },
    Module,
    Package,
    /// Second slot of a long/double entry.
    Unusable,
}

/// Indexed 1-based, as the class-file format does.
#[derive(Debug, Clone)]
pub struct ConstantPool {
    entries: Vec<PoolEntry>,
}

/// A resolved symbolic reference to a method or field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberRef {
    pub owner: String,
    pub name: String,
    pub descriptor: String,
}

impl ConstantPool {
    pub(crate) fn parse(r: &mut ByteReader<'_>) -> Result<ConstantPool, ClassFileError> {
        let count = r.u16()?;
        let mut entries = Vec::with_capacity(count as usize);
        entries.push(PoolEntry::Unusable); // index 0 is never valid
        let mut i = 1;
        while i < count {
            let tag = r.u8()?;
            let entry = match tag {
                1 => {
                    let len = r.u16()? as usize;
                    PoolEntry::Utf8(decode_mutf8(r.bytes(len)?)?)
                }
                3 => {
                    r.skip(4)?;
                    PoolEntry::Integer
                }
                4 => {
                    r.skip(4)?;
                    PoolEntry::Float
                }
                5 => {
                    r.skip(8)?;
                    PoolEntry::Long
                }
                6 => {
                    r.skip(8)?;
                    PoolEntry::Double
                }
                7 => PoolEntry::Class { name_index: r.u16()? },
                8 => PoolEntry::String { utf8_index: r.u16()? },
                9 => PoolEntry::FieldRef {
                    class_index: r.u16()?,
                    name_and_type_index: r.u16()?,
                },
                10 => PoolEntry::MethodRef {
                    class_index: r.u16()?,
                    name_and_type_index: r.u16()?,
                },
                11 => PoolEntry::InterfaceMethodRef {
                    class_index: r.u16()?,
                    name_and_type_index: r.u16()?,
                },
                12 => PoolEntry::NameAndType {
                    name_index: r.u16()?,
                    descriptor_index: r.u16()?,
                },
                15 => {
                    r.skip(3)?;
                    PoolEntry::MethodHandle
                }
                16 => {
                    r.skip(2)?;
                    PoolEntry::MethodType
                }
                17 => {
                    r.skip(4)?;
                    PoolEntry::Dynamic
                }
                18 => {
                    r.skip(2)?;
                    PoolEntry::InvokeDynamic { name_and_type_index: r.u16()? }
                }
                19 => {
                    r.skip(2)?;
                    PoolEntry::Module
                }
                20 => {
                    r.skip(2)?;
                    PoolEntry::Package
                }
                other => {
                    return Err(ClassFileError::Malformed(format!(
                        "unknown constant-pool tag {other} at entry {i}"
                    )))
                }
            };
            let two_slots = matches!(entry, PoolEntry::Long | PoolEntry::Double);
            entries.push(entry);
            if two_slots {
                entries.push(PoolEntry::Unusable);
                i += 1;
            }
            i += 1;
        }
        Ok(ConstantPool { entries })
    }

    pub fn get(&self, index: u16) -> Result<&PoolEntry, ClassFileError> {
        self.entries
            .get(index as usize)
            .filter(|e| !matches!(e, PoolEntry::Unusable))
            .ok_or_else(|| {
                ClassFileError::Malformed(format!("constant-pool index {index} out of range"))
            })
    }

    pub fn utf8(&self, index: u16) -> Result<&str, ClassFileError> {
        match self.get(index)? {
            PoolEntry::Utf8(s) => Ok(s),
            other => Err(ClassFileError::Malformed(format!(
                "expected Utf8 at pool index {index}, found {other:?}"
            ))),
        }
    }

    pub fn class_name(&self, index: u16) -> Result<&str, ClassFileError> {
        match self.get(index)? {
            PoolEntry::Class { name_index } => self.utf8(*name_index),
            other => Err(ClassFileError::Malformed(format!(
                "expected Class at pool index {index}, found {other:?}"
            ))),
        }
    }

    fn name_and_type(&self, index: u16) -> Result<(&str, &str), ClassFileError> {
        match self.get(index)? {
            PoolEntry::NameAndType { name_index, descriptor_index } => {
                Ok((self.utf8(*name_index)?, self.utf8(*descriptor_index)?))
            }
            other => Err(ClassFileError::Malformed(format!(
                "expected NameAndType at pool index {index}, found {other:?}"
            ))),
        }
    }

    /// Resolves a FieldRef/MethodRef/InterfaceMethodRef into owner + name + descriptor.
    pub fn member_ref(&self, index: u16) -> Result<MemberRef, ClassFileError> {
        let (class_index, nat_index) = match self.get(index)? {
            PoolEntry::FieldRef { class_index, name_and_type_index }
            | PoolEntry::MethodRef { class_index, name_and_type_index }
            | PoolEntry::InterfaceMethodRef { class_index, name_and_type_index } => {
                (*class_index, *name_and_type_index)
            }
            other => {
                return Err(ClassFileError::Malformed(format!(
                    "expected member ref at pool index {index}, found {other:?}"
                )))
            }
        };
        let owner = self.class_name(class_index)?.to_owned();
        let (name, descriptor) = self.name_and_type(nat_index)?;
        Ok(MemberRef { owner, name: name.to_owned(), descriptor: descriptor.to_owned() })
    }

    /// Descriptor of the call site behind an InvokeDynamic entry.
    pub fn invokedynamic_descriptor(&self, index: u16) -> Result<&str, ClassFileError> {
        match self.get(index)? {
            PoolEntry::InvokeDynamic { name_and_type_index } => {
                Ok(self.name_and_type(*name_and_type_index)?.1)
            }
            other => Err(ClassFileError::Malformed(format!(
                "expected InvokeDynamic at pool index {index}, found {other:?}"
            ))),
        }
    }

    /// True when a single-slot `ldc` of this entry pushes a reference
    /// (String/Class/MethodType/MethodHandle/Dynamic) rather than a primitive.
    pub fn is_wide_constant(&self, index: u16) -> bool {
        matches!(self.get(index), Ok(PoolEntry::Long | PoolEntry::Double))
    }

    /// Iterate every Utf8 entry (used by descriptor round-trip checks).
    pub fn utf8_entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter_map(|e| match e {
            PoolEntry::Utf8(s) => Some(s.as_str()),
            _ => None,
        })
    }
}
