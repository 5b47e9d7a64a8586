//! A small class-file assembler.
//!
//! Builds valid class files in memory for synthetic corpora and test
//! fixtures. Emits major version 49 (no StackMapTable needed), which the
//! reader side accepts like any other supported version.

use std::collections::HashMap;
use std::io::Write as _;

use crate::classfile::{ACC_ABSTRACT, ACC_STATIC};

const ACC_PUBLIC: u16 = 0x0001;
const ACC_SUPER: u16 = 0x0020;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Const {
    Utf8(String),
    Class(u16),
    NameAndType(u16, u16),
    MethodRef(u16, u16),
    InterfaceMethodRef(u16, u16),
    FieldRef(u16, u16),
    Str(u16),
}

#[derive(Default)]
struct Pool {
    entries: Vec<Const>,
    index: HashMap<Const, u16>,
}

impl Pool {
    fn intern(&mut self, c: Const) -> u16 {
        if let Some(&i) = self.index.get(&c) {
            return i;
        }
        self.entries.push(c.clone());
        let i = self.entries.len() as u16; // 1-based
        self.index.insert(c, i);
        i
    }

    fn utf8(&mut self, s: &str) -> u16 {
        self.intern(Const::Utf8(s.to_owned()))
    }

    fn class(&mut self, name: &str) -> u16 {
        let n = self.utf8(name);
        self.intern(Const::Class(n))
    }

    fn name_and_type(&mut self, name: &str, desc: &str) -> u16 {
        let n = self.utf8(name);
        let d = self.utf8(desc);
        self.intern(Const::NameAndType(n, d))
    }

    fn method_ref(&mut self, owner: &str, name: &str, desc: &str) -> u16 {
        let c = self.class(owner);
        let nt = self.name_and_type(name, desc);
        self.intern(Const::MethodRef(c, nt))
    }

    fn interface_method_ref(&mut self, owner: &str, name: &str, desc: &str) -> u16 {
        let c = self.class(owner);
        let nt = self.name_and_type(name, desc);
        self.intern(Const::InterfaceMethodRef(c, nt))
    }

    fn field_ref(&mut self, owner: &str, name: &str, desc: &str) -> u16 {
        let c = self.class(owner);
        let nt = self.name_and_type(name, desc);
        self.intern(Const::FieldRef(c, nt))
    }

    fn string(&mut self, s: &str) -> u16 {
        let u = self.utf8(s);
        self.intern(Const::Str(u))
    }

    fn write(&self, out: &mut Vec<u8>) {
        out.extend((self.entries.len() as u16 + 1).to_be_bytes());
        for e in &self.entries {
            match e {
                Const::Utf8(s) => {
                    out.push(1);
                    // fixtures stay ASCII, plain UTF-8 is valid mutf8 here
                    out.extend((s.len() as u16).to_be_bytes());
                    out.extend(s.as_bytes());
                }
                Const::Class(n) => {
                    out.push(7);
                    out.extend(n.to_be_bytes());
                }
                Const::Str(n) => {
                    out.push(8);
                    out.extend(n.to_be_bytes());
                }
                Const::FieldRef(c, nt) => {
                    out.push(9);
                    out.extend(c.to_be_bytes());
                    out.extend(nt.to_be_bytes());
                }
                Const::MethodRef(c, nt) => {
                    out.push(10);
                    out.extend(c.to_be_bytes());
                    out.extend(nt.to_be_bytes());
                }
                Const::InterfaceMethodRef(c, nt) => {
                    out.push(11);
                    out.extend(c.to_be_bytes());
                    out.extend(nt.to_be_bytes());
                }
                Const::NameAndType(n, d) => {
                    out.push(12);
                    out.extend(n.to_be_bytes());
                    out.extend(d.to_be_bytes());
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Label(usize);

struct LvtEntry {
    slot: u16,
    start: Label,
    end: Label,
    name: String,
    desc: String,
}

struct SealedLvtEntry {
    slot: u16,
    start_pc: u16,
    length: u16,
    name: String,
    desc: String,
}

struct PendingMethod {
    name: String,
    descriptor: String,
    access_flags: u16,
    code: Option<MethodCode>,
}

struct MethodCode {
    max_stack: u16,
    max_locals: u16,
    bytecode: Vec<u8>,
    handlers: Vec<(u16, u16, u16)>,
    lvt: Vec<SealedLvtEntry>,
}

/// Assembles bytecode for one method body. Branch targets are labels,
/// resolved when the method is sealed.
pub struct CodeAssembler<'a> {
    pool: &'a mut Pool,
    code: Vec<u8>,
    labels: Vec<Option<u16>>,
    fixups: Vec<(usize, usize, Label)>, // (operand offset, opcode pc, label)
    max_stack: u16,
    max_locals: u16,
    handlers: Vec<(Label, Label, Label)>,
    lvt: Vec<LvtEntry>,
}

impl<'a> CodeAssembler<'a> {
    fn new(pool: &'a mut Pool, max_stack: u16, max_locals: u16) -> Self {
        CodeAssembler {
            pool,
            code: Vec::new(),
            labels: Vec::new(),
            fixups: Vec::new(),
            max_stack,
            max_locals,
            handlers: Vec::new(),
            lvt: Vec::new(),
        }
    }

    pub fn pc(&self) -> u16 {
        self.code.len() as u16
    }

    pub fn new_label(&mut self) -> Label {
        self.labels.push(None);
        Label(self.labels.len() - 1)
    }

    pub fn place(&mut self, label: Label) {
        self.labels[label.0] = Some(self.pc());
    }

    fn branch(&mut self, opcode: u8, target: Label) {
        let pc = self.code.len();
        self.code.push(opcode);
        self.fixups.push((self.code.len(), pc, target));
        self.code.extend([0, 0]);
    }

    pub fn raw(&mut self, bytes: &[u8]) {
        self.code.extend(bytes);
    }

    pub fn nop(&mut self) {
        self.code.push(0x00);
    }

    pub fn aconst_null(&mut self) {
        self.code.push(0x01);
    }

    pub fn iconst(&mut self, v: i32) {
        match v {
            -1..=5 => self.code.push((0x03 + v) as u8),
            -128..=127 => {
                self.code.push(0x10);
                self.code.push(v as i8 as u8);
            }
            _ => {
                self.code.push(0x11);
                self.code.extend((v as i16).to_be_bytes());
            }
        }
    }

    pub fn ldc_string(&mut self, s: &str) {
        let idx = self.pool.string(s);
        if idx <= 0xFF {
            self.code.push(0x12);
            self.code.push(idx as u8);
        } else {
            self.code.push(0x13);
            self.code.extend(idx.to_be_bytes());
        }
    }

    fn load_store(&mut self, base_short: u8, base_long: u8, slot: u16) {
        if slot <= 3 {
            self.code.push(base_short + slot as u8);
        } else if slot <= 0xFF {
            self.code.push(base_long);
            self.code.push(slot as u8);
        } else {
            self.code.push(0xC4); // wide
            self.code.push(base_long);
            self.code.extend(slot.to_be_bytes());
        }
        self.max_locals = self.max_locals.max(slot + 2);
    }

    pub fn aload(&mut self, slot: u16) {
        self.load_store(0x2A, 0x19, slot);
    }

    pub fn astore(&mut self, slot: u16) {
        self.load_store(0x4B, 0x3A, slot);
    }

    pub fn iload(&mut self, slot: u16) {
        self.load_store(0x1A, 0x15, slot);
    }

    pub fn istore(&mut self, slot: u16) {
        self.load_store(0x3B, 0x36, slot);
    }

    pub fn dup(&mut self) {
        self.code.push(0x59);
    }

    pub fn pop(&mut self) {
        self.code.push(0x57);
    }

    pub fn swap(&mut self) {
        self.code.push(0x5F);
    }

    pub fn aaload(&mut self) {
        self.code.push(0x32);
    }

    pub fn arraylength(&mut self) {
        self.code.push(0xBE);
    }

    pub fn iinc(&mut self, slot: u16, delta: i8) {
        self.code.push(0x84);
        self.code.push(slot as u8);
        self.code.push(delta as u8);
    }

    pub fn new_object(&mut self, class: &str) {
        let idx = self.pool.class(class);
        self.code.push(0xBB);
        self.code.extend(idx.to_be_bytes());
    }

    pub fn checkcast(&mut self, class: &str) {
        let idx = self.pool.class(class);
        self.code.push(0xC0);
        self.code.extend(idx.to_be_bytes());
    }

    pub fn anewarray(&mut self, class: &str) {
        let idx = self.pool.class(class);
        self.code.push(0xBD);
        self.code.extend(idx.to_be_bytes());
    }

    pub fn invokevirtual(&mut self, owner: &str, name: &str, desc: &str) {
        let idx = self.pool.method_ref(owner, name, desc);
        self.code.push(0xB6);
        self.code.extend(idx.to_be_bytes());
    }

    pub fn invokespecial(&mut self, owner: &str, name: &str, desc: &str) {
        let idx = self.pool.method_ref(owner, name, desc);
        self.code.push(0xB7);
        self.code.extend(idx.to_be_bytes());
    }

    pub fn invokestatic(&mut self, owner: &str, name: &str, desc: &str) {
        let idx = self.pool.method_ref(owner, name, desc);
        self.code.push(0xB8);
        self.code.extend(idx.to_be_bytes());
    }

    pub fn invokeinterface(&mut self, owner: &str, name: &str, desc: &str, arg_slots: u8) {
        let idx = self.pool.interface_method_ref(owner, name, desc);
        self.code.push(0xB9);
        self.code.extend(idx.to_be_bytes());
        self.code.push(arg_slots + 1); // count includes the receiver
        self.code.push(0);
    }

    pub fn getfield(&mut self, owner: &str, name: &str, desc: &str) {
        let idx = self.pool.field_ref(owner, name, desc);
        self.code.push(0xB4);
        self.code.extend(idx.to_be_bytes());
    }

    pub fn putfield(&mut self, owner: &str, name: &str, desc: &str) {
        let idx = self.pool.field_ref(owner, name, desc);
        self.code.push(0xB5);
        self.code.extend(idx.to_be_bytes());
    }

    pub fn getstatic(&mut self, owner: &str, name: &str, desc: &str) {
        let idx = self.pool.field_ref(owner, name, desc);
        self.code.push(0xB2);
        self.code.extend(idx.to_be_bytes());
    }

    pub fn ifeq(&mut self, target: Label) {
        self.branch(0x99, target);
    }

    pub fn ifne(&mut self, target: Label) {
        self.branch(0x9A, target);
    }

    pub fn if_icmpge(&mut self, target: Label) {
        self.branch(0xA2, target);
    }

    pub fn ifnull(&mut self, target: Label) {
        self.branch(0xC6, target);
    }

    pub fn goto(&mut self, target: Label) {
        self.branch(0xA7, target);
    }

    pub fn athrow(&mut self) {
        self.code.push(0xBF);
    }

    pub fn vreturn(&mut self) {
        self.code.push(0xB1);
    }

    pub fn areturn(&mut self) {
        self.code.push(0xB0);
    }

    pub fn ireturn(&mut self) {
        self.code.push(0xAC);
    }

    pub fn handler(&mut self, start: Label, end: Label, target: Label) {
        self.handlers.push((start, end, target));
    }

    /// Records a LocalVariableTable entry covering [start, end).
    pub fn local_variable(&mut self, name: &str, desc: &str, slot: u16, start: Label, end: Label) {
        self.lvt.push(LvtEntry { slot, start, end, name: name.to_owned(), desc: desc.to_owned() });
    }

    fn seal(mut self) -> MethodCode {
        for (operand_at, opcode_pc, label) in &self.fixups {
            let target = self.labels[label.0].expect("unplaced label") as i32;
            let offset = (target - *opcode_pc as i32) as i16;
            self.code[*operand_at..*operand_at + 2].copy_from_slice(&offset.to_be_bytes());
        }
        let at = |l: Label| self.labels[l.0].expect("unplaced label");
        let handlers = self.handlers.iter().map(|(s, e, h)| (at(*s), at(*e), at(*h))).collect();
        let lvt = self
            .lvt
            .iter()
            .map(|e| SealedLvtEntry {
                slot: e.slot,
                start_pc: at(e.start),
                length: at(e.end) - at(e.start),
                name: e.name.clone(),
                desc: e.desc.clone(),
            })
            .collect();
        MethodCode {
            max_stack: self.max_stack,
            max_locals: self.max_locals,
            bytecode: self.code,
            handlers,
            lvt,
        }
    }
}

/// Builds one class file.
pub struct ClassBuilder {
    pool: Pool,
    name: String,
    super_name: String,
    fields: Vec<(String, String)>,
    methods: Vec<PendingMethod>,
}

impl ClassBuilder {
    pub fn new(binary_name: &str) -> Self {
        ClassBuilder {
            pool: Pool::default(),
            name: binary_name.to_owned(),
            super_name: "java/lang/Object".to_owned(),
            fields: Vec::new(),
            methods: Vec::new(),
        }
    }

    pub fn field(&mut self, name: &str, descriptor: &str) -> &mut Self {
        self.fields.push((name.to_owned(), descriptor.to_owned()));
        self
    }

    /// Adds an instance method; `body` receives an assembler positioned at pc 0.
    pub fn method(
        &mut self,
        name: &str,
        descriptor: &str,
        body: impl FnOnce(&mut CodeAssembler<'_>),
    ) -> &mut Self {
        self.method_flags(name, descriptor, ACC_PUBLIC, body)
    }

    pub fn static_method(
        &mut self,
        name: &str,
        descriptor: &str,
        body: impl FnOnce(&mut CodeAssembler<'_>),
    ) -> &mut Self {
        self.method_flags(name, descriptor, ACC_PUBLIC | ACC_STATIC, body)
    }

    pub fn method_flags(
        &mut self,
        name: &str,
        descriptor: &str,
        access_flags: u16,
        body: impl FnOnce(&mut CodeAssembler<'_>),
    ) -> &mut Self {
        let param_slots: u16 = crate::classfile::parse_descriptor(descriptor)
            .expect("fixture descriptor")
            .param_slots();
        let implicit_this = if access_flags & ACC_STATIC == 0 { 1 } else { 0 };
        let mut asm = CodeAssembler::new(&mut self.pool, 16, param_slots + implicit_this + 1);
        body(&mut asm);
        let code = asm.seal();
        self.methods.push(PendingMethod {
            name: name.to_owned(),
            descriptor: descriptor.to_owned(),
            access_flags,
            code: Some(code),
        });
        self
    }

    /// Adds an abstract method (no Code attribute).
    pub fn abstract_method(&mut self, name: &str, descriptor: &str) -> &mut Self {
        self.methods.push(PendingMethod {
            name: name.to_owned(),
            descriptor: descriptor.to_owned(),
            access_flags: ACC_PUBLIC | ACC_ABSTRACT,
            code: None,
        });
        self
    }

    /// Convenience: a default constructor that only calls `super()`.
    pub fn default_constructor(&mut self) -> &mut Self {
        let sup = self.super_name.clone();
        self.method("<init>", "()V", |a| {
            a.aload(0);
            a.invokespecial(&sup, "<init>", "()V");
            a.vreturn();
        })
    }

    pub fn build(mut self) -> Vec<u8> {
        // intern everything the tail of the file references before the pool is written
        let this_class = self.pool.class(&self.name);
        let super_class = self.pool.class(&self.super_name);
        let code_attr = self.pool.utf8("Code");
        let lvt_attr = self.pool.utf8("LocalVariableTable");
        let mut field_refs = Vec::new();
        for (name, desc) in &self.fields {
            field_refs.push((self.pool.utf8(name), self.pool.utf8(desc)));
        }
        let mut method_refs = Vec::new();
        for m in &self.methods {
            method_refs.push((self.pool.utf8(&m.name), self.pool.utf8(&m.descriptor)));
        }
        let mut lvt_strings = Vec::new();
        for m in &self.methods {
            let mut per_method = Vec::new();
            if let Some(code) = &m.code {
                for e in &code.lvt {
                    per_method.push((self.pool.utf8(&e.name), self.pool.utf8(&e.desc)));
                }
            }
            lvt_strings.push(per_method);
        }

        let mut out = Vec::new();
        out.extend(0xCAFE_BABEu32.to_be_bytes());
        out.extend(0u16.to_be_bytes()); // minor
        out.extend(49u16.to_be_bytes()); // major: Java 5
        self.pool.write(&mut out);
        let class_flags = if self.methods.iter().any(|m| m.code.is_none()) {
            ACC_PUBLIC | ACC_SUPER | ACC_ABSTRACT
        } else {
            ACC_PUBLIC | ACC_SUPER
        };
        out.extend(class_flags.to_be_bytes());
        out.extend(this_class.to_be_bytes());
        out.extend(super_class.to_be_bytes());
        out.extend(0u16.to_be_bytes()); // interfaces

        out.extend((self.fields.len() as u16).to_be_bytes());
        for (name_idx, desc_idx) in &field_refs {
            out.extend(0x0002u16.to_be_bytes()); // private
            out.extend(name_idx.to_be_bytes());
            out.extend(desc_idx.to_be_bytes());
            out.extend(0u16.to_be_bytes()); // attributes
        }

        out.extend((self.methods.len() as u16).to_be_bytes());
        for (i, m) in self.methods.iter().enumerate() {
            let (name_idx, desc_idx) = method_refs[i];
            out.extend(m.access_flags.to_be_bytes());
            out.extend(name_idx.to_be_bytes());
            out.extend(desc_idx.to_be_bytes());
            match &m.code {
                None => out.extend(0u16.to_be_bytes()),
                Some(code) => {
                    out.extend(1u16.to_be_bytes());
                    out.extend(code_attr.to_be_bytes());
                    let mut body = Vec::new();
                    body.extend(code.max_stack.to_be_bytes());
                    body.extend(code.max_locals.to_be_bytes());
                    body.extend((code.bytecode.len() as u32).to_be_bytes());
                    body.extend(&code.bytecode);
                    body.extend((code.handlers.len() as u16).to_be_bytes());
                    for (s, e, h) in &code.handlers {
                        body.extend(s.to_be_bytes());
                        body.extend(e.to_be_bytes());
                        body.extend(h.to_be_bytes());
                        body.extend(0u16.to_be_bytes()); // catch any
                    }
                    if code.lvt.is_empty() {
                        body.extend(0u16.to_be_bytes());
                    } else {
                        body.extend(1u16.to_be_bytes());
                        body.extend(lvt_attr.to_be_bytes());
                        let mut lvt = Vec::new();
                        lvt.extend((code.lvt.len() as u16).to_be_bytes());
                        for (j, e) in code.lvt.iter().enumerate() {
                            lvt.extend(e.start_pc.to_be_bytes());
                            lvt.extend(e.length.to_be_bytes());
                            let (n, d) = lvt_strings[i][j];
                            lvt.extend(n.to_be_bytes());
                            lvt.extend(d.to_be_bytes());
                            lvt.extend(e.slot.to_be_bytes());
                        }
                        body.extend((lvt.len() as u32).to_be_bytes());
                        body.extend(lvt);
                    }
                    out.extend((body.len() as u32).to_be_bytes());
                    out.extend(body);
                }
            }
        }
        out.extend(0u16.to_be_bytes()); // class attributes
        out
    }
}

pub mod samples {
    //! Ready-made synthetic classes for demos and tests.

    use super::ClassBuilder;

    /// A class whose `saveNames` method collects the file names of a
    /// directory into an `ArrayList`, compiled the way javac lays it out
    /// (raw `ArrayList`, enhanced-for over the `listFiles()` array).
    ///
    /// Slots: 0 `this`, 1 the path parameter, 2 the list, 3 the directory,
    /// 4..6 loop machinery, 7 the element variable.
    pub fn file_lister_class() -> Vec<u8> {
        let mut cb = ClassBuilder::new("FileLister");
        cb.default_constructor();
        cb.method("saveNames", "(Ljava/lang/String;)V", |a| {
            let start = a.new_label();
            a.place(start);
            a.new_object("java/util/ArrayList");
            a.dup();
            a.invokespecial("java/util/ArrayList", "<init>", "()V");
            a.astore(2);
            let filenames_live = a.new_label();
            a.place(filenames_live);
            a.new_object("java/io/File");
            a.dup();
            a.aload(1);
            a.invokespecial("java/io/File", "<init>", "(Ljava/lang/String;)V");
            a.astore(3);
            let input_file_live = a.new_label();
            a.place(input_file_live);
            a.aload(3);
            a.invokevirtual("java/io/File", "isDirectory", "()Z");
            let end = a.new_label();
            a.ifeq(end);
            a.aload(3);
            a.invokevirtual("java/io/File", "listFiles", "()[Ljava/io/File;");
            a.astore(4);
            a.aload(4);
            a.arraylength();
            a.istore(5);
            a.iconst(0);
            a.istore(6);
            let loop_head = a.new_label();
            a.place(loop_head);
            a.iload(6);
            a.iload(5);
            a.if_icmpge(end);
            a.aload(4);
            a.iload(6);
            a.aaload();
            a.astore(7);
            let f_live = a.new_label();
            a.place(f_live);
            a.aload(2);
            a.aload(7);
            a.invokevirtual("java/io/File", "getName", "()Ljava/lang/String;");
            a.invokevirtual("java/util/ArrayList", "add", "(Ljava/lang/Object;)Z");
            a.pop();
            let f_dead = a.new_label();
            a.place(f_dead);
            a.iinc(6, 1);
            a.goto(loop_head);
            a.place(end);
            a.vreturn();
            let method_end = a.new_label();
            a.place(method_end);
            a.local_variable("this", "LFileLister;", 0, start, method_end);
            a.local_variable("inputPath", "Ljava/lang/String;", 1, start, method_end);
            a.local_variable("filenames", "Ljava/util/ArrayList;", 2, filenames_live, method_end);
            a.local_variable("inputFile", "Ljava/io/File;", 3, input_file_live, method_end);
            a.local_variable("f", "Ljava/io/File;", 7, f_live, f_dead);
        });
        cb.build()
    }
}

/// Writes a jar (zip) file whose entries are the given (name, bytes) pairs.
pub fn write_jar(
    path: &std::path::Path,
    entries: &[(&str, &[u8])],
) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut zip = zip::ZipWriter::new(file);
    let options: zip::write::SimpleFileOptions = zip::write::SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default());
    for (name, bytes) in entries {
        zip.start_file(*name, options)
            .map_err(|e| std::io::Error::other(e))?;
        zip.write_all(bytes)?;
    }
    zip.finish().map_err(|e| std::io::Error::other(e))?;
    Ok(())
}
