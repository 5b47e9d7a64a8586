//! Minimal JVM class-file frontend.
//!
//! Decodes the constant pool, methods, `Code`, the exception table and
//! `LocalVariableTable`; every other attribute is skipped. This is all the
//! extractor needs. Unknown constant-pool tags are rejected so that a format
//! revision fails loudly instead of misattributing calls.

mod descriptor;
mod pool;
mod reader;

pub use descriptor::{parse_descriptor, FieldType, MethodDescriptor};
pub use pool::{ConstantPool, MemberRef, PoolEntry};

use reader::ByteReader;
use thiserror::Error;

pub const ACC_STATIC: u16 = 0x0008;
pub const ACC_NATIVE: u16 = 0x0100;
pub const ACC_ABSTRACT: u16 = 0x0400;

/// Newest published class-file major version accepted (Java 25).
pub const MAX_MAJOR_VERSION: u16 = 69;

#[derive(Debug, Error)]
pub enum ClassFileError {
    #[error("malformed class file: {0}")]
    Malformed(String),
    #[error("bad descriptor {descriptor:?}: {reason}")]
    BadDescriptor { descriptor: String, reason: String },
}

/// `(slot, start_pc, length, name, type_descriptor)` from LocalVariableTable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalVariableEntry {
    pub slot: u16,
    pub start_pc: u16,
    pub length: u16,
    pub name: String,
    pub type_descriptor: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExceptionHandler {
    pub start_pc: u16,
    pub end_pc: u16,
    pub handler_pc: u16,
}

#[derive(Debug, Clone)]
pub struct CodeBody {
    pub max_stack: u16,
    pub max_locals: u16,
    pub bytecode: Vec<u8>,
    pub exception_handlers: Vec<ExceptionHandler>,
}

#[derive(Debug, Clone)]
pub struct MethodInfo {
    pub name: String,
    pub descriptor: String,
    pub access_flags: u16,
    pub code: Option<CodeBody>,
    pub local_variable_table: Option<Vec<LocalVariableEntry>>,
}

impl MethodInfo {
    pub fn is_static(&self) -> bool {
        self.access_flags & ACC_STATIC != 0
    }
}

#[derive(Debug, Clone)]
pub struct FieldInfo {
    pub name: String,
    pub descriptor: String,
}

#[derive(Debug, Clone)]
pub struct ClassFile {
    pub binary_name: String,
    pub super_name: Option<String>,
    pub access_flags: u16,
    pub constant_pool: ConstantPool,
    pub methods: Vec<MethodInfo>,
    pub fields: Vec<FieldInfo>,
}

/// Parses a complete class-file image.
///
/// Attributes other than Code / LocalVariableTable are skipped, not rejected.
pub fn parse_class(bytes: &[u8]) -> Result<ClassFile, ClassFileError> {
    let mut r = ByteReader::new(bytes);
    let magic = r.u32()?;
    if magic != 0xCAFE_BABE {
        return Err(ClassFileError::Malformed(format!("bad magic 0x{magic:08X}")));
    }
    let _minor = r.u16()?;
    let major = r.u16()?;
    if !(45..=MAX_MAJOR_VERSION).contains(&major) {
        return Err(ClassFileError::Malformed(format!(
            "unsupported class-file major version {major}"
        )));
    }
    let pool = ConstantPool::parse(&mut r)?;
    let access_flags = r.u16()?;
    let this_class = r.u16()?;
    let super_class = r.u16()?;
    let binary_name = pool.class_name(this_class)?.to_owned();
    let super_name = if super_class == 0 {
        None
    } else {
        Some(pool.class_name(super_class)?.to_owned())
    };

    let interface_count = r.u16()?;
    r.skip(interface_count as usize * 2)?;

    let field_count = r.u16()?;
    let mut fields = Vec::with_capacity(field_count as usize);
    for _ in 0..field_count {
        let _flags = r.u16()?;
        let name = pool.utf8(r.u16()?)?.to_owned();
        let descriptor = pool.utf8(r.u16()?)?.to_owned();
        skip_attributes(&mut r)?;
        fields.push(FieldInfo { name, descriptor });
    }

    let method_count = r.u16()?;
    let mut methods = Vec::with_capacity(method_count as usize);
    for _ in 0..method_count {
        methods.push(parse_method(&mut r, &pool)?);
    }
    skip_attributes(&mut r)?;

    // Every method descriptor must parse; surfacing this here keeps the
    // extractor free of descriptor errors.
    for m in &methods {
        parse_descriptor(&m.descriptor)?;
    }

    Ok(ClassFile { binary_name, super_name, access_flags, constant_pool: pool, methods, fields })
}

fn skip_attributes(r: &mut ByteReader<'_>) -> Result<(), ClassFileError> {
    let count = r.u16()?;
    for _ in 0..count {
        let _name = r.u16()?;
        let len = r.u32()?;
        r.skip(len as usize)?;
    }
    Ok(())
}

fn parse_method(r: &mut ByteReader<'_>, pool: &ConstantPool) -> Result<MethodInfo, ClassFileError> {
    let access_flags = r.u16()?;
    let name = pool.utf8(r.u16()?)?.to_owned();
    let descriptor = pool.utf8(r.u16()?)?.to_owned();
    let mut code = None;
    let mut lvt = None;

    let attr_count = r.u16()?;
    for _ in 0..attr_count {
        let attr_name = pool.utf8(r.u16()?)?;
        let len = r.u32()? as usize;
        if attr_name == "Code" {
            let end = r.position() + len;
            let max_stack = r.u16()?;
            let max_locals = r.u16()?;
            let code_len = r.u32()? as usize;
            let bytecode = r.bytes(code_len)?.to_vec();
            let handler_count = r.u16()?;
            let mut exception_handlers = Vec::with_capacity(handler_count as usize);
            for _ in 0..handler_count {
                let start_pc = r.u16()?;
                let end_pc = r.u16()?;
                let handler_pc = r.u16()?;
                let _catch_type = r.u16()?;
                exception_handlers.push(ExceptionHandler { start_pc, end_pc, handler_pc });
            }
            // nested attributes of Code: keep LocalVariableTable, skip the rest
            let nested = r.u16()?;
            for _ in 0..nested {
                let nested_name = pool.utf8(r.u16()?)?;
                let nested_len = r.u32()? as usize;
                if nested_name == "LocalVariableTable" {
                    let entry_count = r.u16()?;
                    let mut entries = Vec::with_capacity(entry_count as usize);
                    for _ in 0..entry_count {
                        let start_pc = r.u16()?;
                        let length = r.u16()?;
                        let name = pool.utf8(r.u16()?)?.to_owned();
                        let type_descriptor = pool.utf8(r.u16()?)?.to_owned();
                        let slot = r.u16()?;
                        entries.push(LocalVariableEntry {
                            slot,
                            start_pc,
                            length,
                            name,
                            type_descriptor,
                        });
                    }
                    lvt = Some(entries);
                } else {
                    r.skip(nested_len)?;
                }
            }
            if r.position() != end {
                return Err(ClassFileError::Malformed(format!(
                    "Code attribute of {name}{descriptor} has inconsistent length"
                )));
            }
            code = Some(CodeBody { max_stack, max_locals, bytecode, exception_handlers });
        } else {
            r.skip(len)?;
        }
    }

    let has_body = access_flags & (ACC_ABSTRACT | ACC_NATIVE) == 0;
    if has_body != code.is_some() {
        return Err(ClassFileError::Malformed(format!(
            "method {name}{descriptor}: Code attribute presence contradicts access flags"
        )));
    }

    Ok(MethodInfo { name, descriptor, access_flags, code, local_variable_table: lvt })
}
