//! Type-usage extraction from parsed class files.
//!
//! Each method body is interpreted linearly per basic block with a symbolic
//! operand stack. Receiver method calls are attributed to local variables,
//! parameters and fields of the enclosing class; everything else degrades to
//! `Unknown` and records nothing. The interpretation never misattributes: an
//! empty symbolic stack yields `Unknown` pops, which drop the call.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::bytecode::{self, Instruction, InvokeKind, Op, VarKind};
use crate::classfile::{parse_descriptor, ClassFile, FieldType, LocalVariableEntry, MethodInfo};

pub use crate::bytecode::BytecodeError;

/// One method call: name plus full JVM descriptor. Two calls are equal only
/// if name, parameter types and return type all match.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CallSignature {
    pub name: String,
    pub descriptor: String,
}

impl CallSignature {
    pub fn new(name: impl Into<String>, descriptor: impl Into<String>) -> Self {
        CallSignature { name: name.into(), descriptor: descriptor.into() }
    }

    /// Canonical rendering: name immediately followed by descriptor,
    /// e.g. `isDirectory()Z`.
    pub fn render(&self) -> String {
        format!("{}{}", self.name, self.descriptor)
    }
}

impl std::fmt::Display for CallSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.name, self.descriptor)
    }
}

// Ordering follows the canonical rendering, not the (name, descriptor) pair:
// names may contain characters that sort after '('.
impl Ord for CallSignature {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name
            .bytes()
            .chain(self.descriptor.bytes())
            .cmp(other.name.bytes().chain(other.descriptor.bytes()))
    }
}

impl PartialOrd for CallSignature {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UsageKind {
    Local,
    Param,
    Field,
    Temp,
}

impl std::fmt::Display for UsageKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            UsageKind::Local => "local",
            UsageKind::Param => "param",
            UsageKind::Field => "field",
            UsageKind::Temp => "temp",
        };
        f.write_str(s)
    }
}

/// One specimen: a variable with the set of calls observed on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeUsageInstance {
    pub project_id: String,
    pub class_name: String,
    /// name+descriptor of the enclosing method, or `<fields>` for
    /// class-scope field records.
    pub enclosing_method: String,
    pub kind: UsageKind,
    pub variable_id: String,
    pub receiver_type: String,
    pub type_inferred: bool,
    pub calls: BTreeSet<CallSignature>,
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractConfig {
    /// Record calls whose receiver is `this` (slot 0 of an instance method).
    pub include_this: bool,
    /// Emit `temp` instances for constructed objects that are never stored.
    pub include_temps: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig { include_this: false, include_temps: false }
    }
}

/// Where a symbolic stack value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueOrigin {
    LocalSlot { slot: u16, generation: Option<usize> },
    FieldRef { owner: String, name: String, type_descriptor: String },
    NewSite { pc: u32, class: String },
    ReturnValue,
    Constant,
    Unknown,
}

#[derive(Debug, Clone)]
struct Entry {
    origin: ValueOrigin,
    width: u8,
}

impl Entry {
    fn unknown() -> Entry {
        Entry { origin: ValueOrigin::Unknown, width: 1 }
    }
}

#[derive(Default)]
struct VarRecord {
    calls: BTreeSet<CallSignature>,
    /// invoke owner -> occurrence count, for receiver-type inference.
    owners: BTreeMap<String, usize>,
}

struct FieldRecord {
    type_descriptor: String,
    calls: BTreeSet<CallSignature>,
}

struct NewRecord {
    class: String,
    calls: BTreeSet<CallSignature>,
    stored: bool,
}

/// Exposes the block boundaries the interpreter runs on.
pub fn split_basic_blocks(code: &crate::classfile::CodeBody) -> Result<Vec<(u32, u32)>, BytecodeError> {
    let insns = bytecode::decode(&code.bytecode)?;
    let handler_pcs: Vec<u32> = code.exception_handlers.iter().map(|h| h.handler_pc as u32).collect();
    bytecode::split_basic_blocks(&insns, code.bytecode.len() as u32, &handler_pcs)
}

fn lvt_generation(
    lvt: Option<&[LocalVariableEntry]>,
    slot: u16,
    pc: u32,
) -> Option<usize> {
    let entries = lvt?;
    entries.iter().position(|e| {
        e.slot == slot && (e.start_pc as u32) <= pc && pc < e.start_pc as u32 + e.length as u32
    })
}

fn type_from_descriptor(descriptor: &str) -> String {
    FieldType { raw: descriptor.to_owned() }.binary_name().to_owned()
}

/// Interprets one method body and returns its type-usage instances.
///
/// Field-receiver calls are returned as per-method `field` instances; the
/// caller merges them class-wide.
pub fn simulate_method(
    class: &ClassFile,
    method: &MethodInfo,
    config: &ExtractConfig,
    project_id: &str,
) -> Result<Vec<TypeUsageInstance>, BytecodeError> {
    let code = method.code.as_ref().expect("simulate_method requires a code body");
    let insns = bytecode::decode(&code.bytecode)?;
    let handler_pcs: Vec<u32> =
        code.exception_handlers.iter().map(|h| h.handler_pc as u32).collect();
    let blocks = bytecode::split_basic_blocks(&insns, code.bytecode.len() as u32, &handler_pcs)?;
    let handler_set: BTreeSet<u32> = handler_pcs.iter().copied().collect();

    let descriptor = parse_descriptor(&method.descriptor)
        .expect("descriptor validity is checked during class parsing");
    let implicit_this: u16 = if method.is_static() { 0 } else { 1 };
    let first_nonparam_slot = implicit_this + descriptor.param_slots();
    let lvt = method.local_variable_table.as_deref();

    let mut vars: BTreeMap<(u16, Option<usize>), VarRecord> = BTreeMap::new();
    let mut fields: BTreeMap<String, FieldRecord> = BTreeMap::new();
    let mut news: BTreeMap<u32, NewRecord> = BTreeMap::new();

    // pc -> instruction index, for block iteration
    let index_of: HashMap<u32, usize> = insns.iter().enumerate().map(|(i, x)| (x.pc, i)).collect();

    for &(start, end) in &blocks {
        let mut stack: Vec<Entry> = Vec::new();
        if handler_set.contains(&start) {
            // the thrown value
            stack.push(Entry::unknown());
        }
        let mut idx = index_of[&start];
        while idx < insns.len() && insns[idx].pc < end {
            let insn = &insns[idx];
            let next_pc = insns.get(idx + 1).map(|i| i.pc).unwrap_or(code.bytecode.len() as u32);
            step(
                insn,
                next_pc,
                &mut stack,
                class,
                method,
                lvt,
                &mut vars,
                &mut fields,
                &mut news,
            )?;
            idx += 1;
        }
    }

    let enclosing = format!("{}{}", method.name, method.descriptor);
    let mut out = Vec::new();

    for ((slot, generation), record) in vars {
        if record.calls.is_empty() {
            continue;
        }
        if slot == 0 && implicit_this == 1 && !config.include_this {
            continue;
        }
        let kind = if slot < first_nonparam_slot { UsageKind::Param } else { UsageKind::Local };
        let (variable_id, receiver_type, type_inferred) = match generation {
            Some(g) => {
                let e = &lvt.unwrap()[g];
                (
                    format!("{}:{}:{}", e.name, e.slot, e.start_pc),
                    type_from_descriptor(&e.type_descriptor),
                    false,
                )
            }
            None => (format!("slot{slot}"), plurality_owner(&record.owners), true),
        };
        out.push(TypeUsageInstance {
            project_id: project_id.to_owned(),
            class_name: class.binary_name.clone(),
            enclosing_method: enclosing.clone(),
            kind,
            variable_id,
            receiver_type,
            type_inferred,
            calls: record.calls,
        });
    }

    for (name, record) in fields {
        if record.calls.is_empty() {
            continue;
        }
        out.push(TypeUsageInstance {
            project_id: project_id.to_owned(),
            class_name: class.binary_name.clone(),
            enclosing_method: "<fields>".to_owned(),
            kind: UsageKind::Field,
            variable_id: name,
            receiver_type: type_from_descriptor(&record.type_descriptor),
            type_inferred: false,
            calls: record.calls,
        });
    }

    if config.include_temps {
        for (pc, record) in news {
            if record.stored || record.calls.is_empty() {
                continue;
            }
            out.push(TypeUsageInstance {
                project_id: project_id.to_owned(),
                class_name: class.binary_name.clone(),
                enclosing_method: enclosing.clone(),
                kind: UsageKind::Temp,
                variable_id: format!("new@{pc}"),
                receiver_type: record.class,
                type_inferred: false,
                calls: record.calls,
            });
        }
    }

    Ok(out)
}

/// Most frequent invoke owner; ties break lexicographically. BTreeMap
/// iteration order makes the first maximal entry the smallest name.
fn plurality_owner(owners: &BTreeMap<String, usize>) -> String {
    let mut best: Option<(&str, usize)> = None;
    for (owner, &count) in owners {
        match best {
            Some((_, c)) if count <= c => {}
            _ => best = Some((owner, count)),
        }
    }
    best.map(|(o, _)| o.to_owned()).unwrap_or_default()
}

fn pop(stack: &mut Vec<Entry>) -> Entry {
    stack.pop().unwrap_or_else(Entry::unknown)
}

/// Pops values until `slots` stack slots are consumed, top first.
fn pop_slots(stack: &mut Vec<Entry>, slots: u8) -> Vec<Entry> {
    let mut taken = Vec::new();
    let mut n = 0;
    while n < slots {
        let e = pop(stack);
        n += e.width;
        taken.push(e);
    }
    taken
}

#[allow(clippy::too_many_arguments)]
fn step(
    insn: &Instruction,
    next_pc: u32,
    stack: &mut Vec<Entry>,
    class: &ClassFile,
    method: &MethodInfo,
    lvt: Option<&[LocalVariableEntry]>,
    vars: &mut BTreeMap<(u16, Option<usize>), VarRecord>,
    fields: &mut BTreeMap<String, FieldRecord>,
    news: &mut BTreeMap<u32, NewRecord>,
) -> Result<(), BytecodeError> {
    let pool = &class.constant_pool;
    let bad = |pc: u32| BytecodeError::Undecodable { pc, opcode: 0 };
    match &insn.op {
        Op::Nop | Op::Iinc | Op::Ret => {}
        Op::PushConst { width } => stack.push(Entry { origin: ValueOrigin::Constant, width: *width }),
        Op::Load { slot, kind } => match kind {
            VarKind::Ref => stack.push(Entry {
                origin: ValueOrigin::LocalSlot {
                    slot: *slot,
                    generation: lvt_generation(lvt, *slot, insn.pc),
                },
                width: 1,
            }),
            _ => stack.push(Entry { origin: ValueOrigin::Constant, width: kind.width() }),
        },
        Op::Store { slot, kind } => {
            let value = pop(stack);
            if *kind == VarKind::Ref {
                if let ValueOrigin::NewSite { pc: site, .. } = value.origin {
                    // the constructor call accumulated on the fresh object
                    // transfers to the variable it is stored into
                    if let Some(record) = news.get_mut(&site) {
                        record.stored = true;
                        let generation = lvt_generation(lvt, *slot, next_pc);
                        let var = vars.entry((*slot, generation)).or_default();
                        for call in &record.calls {
                            var.calls.insert(call.clone());
                        }
                        *var.owners.entry(record.class.clone()).or_insert(0) +=
                            record.calls.len();
                    }
                }
            }
        }
        Op::ArrayLoad { width } => {
            pop(stack); // index
            pop(stack); // arrayref
            stack.push(Entry { origin: ValueOrigin::Unknown, width: *width });
        }
        Op::ArrayStore { .. } => {
            pop(stack);
            pop(stack);
            pop(stack);
        }
        Op::Pop => {
            pop(stack);
        }
        Op::Pop2 => {
            let e = pop(stack);
            if e.width == 1 {
                pop(stack);
            }
        }
        Op::Dup => {
            let e = pop(stack);
            stack.push(e.clone());
            stack.push(e);
        }
        Op::DupX1 => dup_x(stack, 1, 1),
        Op::DupX2 => dup_x(stack, 1, 2),
        Op::Dup2 => {
            let top = pop(stack);
            if top.width == 2 {
                stack.push(top.clone());
                stack.push(top);
            } else {
                let under = pop(stack);
                stack.push(under.clone());
                stack.push(top.clone());
                stack.push(under);
                stack.push(top);
            }
        }
        Op::Dup2X1 => dup_x(stack, 2, 1),
        Op::Dup2X2 => dup_x(stack, 2, 2),
        Op::Swap => {
            let a = pop(stack);
            let b = pop(stack);
            stack.push(a);
            stack.push(b);
        }
        Op::Stack { pops, push } => {
            for _ in pops.iter() {
                pop(stack);
            }
            if let Some(w) = push {
                stack.push(Entry { origin: ValueOrigin::Unknown, width: *w });
            }
        }
        Op::GetStatic { index } => {
            let member = pool.member_ref(*index).map_err(|_| bad(insn.pc))?;
            let width = FieldType { raw: member.descriptor }.width();
            stack.push(Entry { origin: ValueOrigin::Unknown, width });
        }
        Op::PutStatic { .. } => {
            pop(stack);
        }
        Op::GetField { index } => {
            let member = pool.member_ref(*index).map_err(|_| bad(insn.pc))?;
            let receiver = pop(stack);
            let width = FieldType { raw: member.descriptor.clone() }.width();
            let is_this = matches!(receiver.origin, ValueOrigin::LocalSlot { slot: 0, .. })
                && !method.is_static();
            if is_this {
                stack.push(Entry {
                    origin: ValueOrigin::FieldRef {
                        owner: class.binary_name.clone(),
                        name: member.name,
                        type_descriptor: member.descriptor,
                    },
                    width,
                });
            } else {
                stack.push(Entry { origin: ValueOrigin::Unknown, width });
            }
        }
        Op::PutField { .. } => {
            pop(stack);
            pop(stack);
        }
        Op::Invoke { index, kind } => {
            let member = pool.member_ref(*index).map_err(|_| bad(insn.pc))?;
            let desc = parse_descriptor(&member.descriptor).map_err(|_| bad(insn.pc))?;
            for _ in 0..desc.param_types.len() {
                pop(stack);
            }
            if *kind != InvokeKind::Static {
                let receiver = pop(stack);
                let call = CallSignature::new(member.name.clone(), member.descriptor.clone());
                match receiver.origin {
                    ValueOrigin::LocalSlot { slot, generation } => {
                        let var = vars.entry((slot, generation)).or_default();
                        var.calls.insert(call);
                        *var.owners.entry(member.owner.clone()).or_insert(0) += 1;
                    }
                    ValueOrigin::FieldRef { name, type_descriptor, .. } => {
                        let record = fields.entry(name).or_insert_with(|| FieldRecord {
                            type_descriptor,
                            calls: BTreeSet::new(),
                        });
                        record.calls.insert(call);
                    }
                    ValueOrigin::NewSite { pc: site, .. } => {
                        if let Some(record) = news.get_mut(&site) {
                            record.calls.insert(call);
                        }
                    }
                    _ => {}
                }
            }
            if let Some(ret) = desc.return_type {
                stack.push(Entry { origin: ValueOrigin::ReturnValue, width: ret.width() });
            }
        }
        Op::InvokeDynamic { index } => {
            let descriptor = pool.invokedynamic_descriptor(*index).map_err(|_| bad(insn.pc))?;
            let desc = parse_descriptor(descriptor).map_err(|_| bad(insn.pc))?;
            for _ in 0..desc.param_types.len() {
                pop(stack);
            }
            if let Some(ret) = desc.return_type {
                stack.push(Entry { origin: ValueOrigin::Unknown, width: ret.width() });
            }
        }
        Op::New { index } => {
            let name = pool.class_name(*index).map_err(|_| bad(insn.pc))?.to_owned();
            news.insert(
                insn.pc,
                NewRecord { class: name.clone(), calls: BTreeSet::new(), stored: false },
            );
            stack.push(Entry { origin: ValueOrigin::NewSite { pc: insn.pc, class: name }, width: 1 });
        }
        Op::Checkcast => {
            // identity on origin
            let e = pop(stack);
            stack.push(e);
        }
        Op::MultiNewArray { dims, .. } => {
            for _ in 0..*dims {
                pop(stack);
            }
            stack.push(Entry::unknown());
        }
        Op::Branch { pops, .. } => {
            for _ in 0..*pops {
                pop(stack);
            }
        }
        Op::Goto { .. } => {}
        Op::Jsr { .. } => stack.push(Entry { origin: ValueOrigin::Constant, width: 1 }),
        Op::Switch { .. } => {
            pop(stack);
        }
        Op::Return => {
            stack.clear();
        }
        Op::Athrow => {
            pop(stack);
        }
    }
    Ok(())
}

/// dup / dup2 with an insertion point below `skip_slots` stack slots.
fn dup_x(stack: &mut Vec<Entry>, dup_slots: u8, skip_slots: u8) {
    let dup_group = pop_slots(stack, dup_slots);
    let skip_group = pop_slots(stack, skip_slots);
    for e in dup_group.iter().rev() {
        stack.push(e.clone());
    }
    for e in skip_group.into_iter().rev() {
        stack.push(e);
    }
    for e in dup_group.into_iter().rev() {
        stack.push(e);
    }
}

/// Result of extracting one class: instances plus per-method failure count.
#[derive(Debug, Default)]
pub struct ClassExtraction {
    pub instances: Vec<TypeUsageInstance>,
    pub methods_skipped: usize,
}

/// Extracts all type-usages of a class: method-body scope for locals and
/// parameters, class scope for fields (field records from all methods merge
/// into one instance per distinct field).
pub fn extract_class(
    class: &ClassFile,
    project_id: &str,
    config: &ExtractConfig,
) -> ClassExtraction {
    let mut result = ClassExtraction::default();
    let mut field_merge: BTreeMap<String, TypeUsageInstance> = BTreeMap::new();

    for method in &class.methods {
        if method.code.is_none() {
            continue;
        }
        match simulate_method(class, method, config, project_id) {
            Ok(instances) => {
                for inst in instances {
                    if inst.kind == UsageKind::Field {
                        field_merge
                            .entry(inst.variable_id.clone())
                            .and_modify(|existing| {
                                existing.calls.extend(inst.calls.iter().cloned())
                            })
                            .or_insert(inst);
                    } else {
                        result.instances.push(inst);
                    }
                }
            }
            Err(_) => result.methods_skipped += 1,
        }
    }
    result.instances.extend(field_merge.into_values());
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classgen::{samples, ClassBuilder};

    fn parse(bytes: &[u8]) -> ClassFile {
        crate::classfile::parse_class(bytes).expect("fixture class parses")
    }

    fn rendered(inst: &TypeUsageInstance) -> Vec<String> {
        inst.calls.iter().map(CallSignature::render).collect()
    }

    #[test]
    fn file_lister_yields_three_instances() {
        let class = parse(&samples::file_lister_class());
        let result = extract_class(&class, "p", &ExtractConfig::default());
        assert_eq!(result.methods_skipped, 0);

        let mut got: Vec<(String, Vec<String>)> = result
            .instances
            .iter()
            .map(|i| (i.receiver_type.clone(), rendered(i)))
            .collect();
        got.sort();
        assert_eq!(
            got,
            vec![
                (
                    "java/io/File".to_owned(),
                    vec![
                        "<init>(Ljava/lang/String;)V".to_owned(),
                        "isDirectory()Z".to_owned(),
                        "listFiles()[Ljava/io/File;".to_owned(),
                    ],
                ),
                ("java/io/File".to_owned(), vec!["getName()Ljava/lang/String;".to_owned()]),
                (
                    "java/util/ArrayList".to_owned(),
                    vec!["<init>()V".to_owned(), "add(Ljava/lang/Object;)Z".to_owned()],
                ),
            ]
        );
        for inst in &result.instances {
            assert_eq!(inst.kind, UsageKind::Local);
            assert!(!inst.type_inferred, "LVT names the type of {}", inst.variable_id);
            assert_eq!(inst.enclosing_method, "saveNames(Ljava/lang/String;)V");
        }
        let names: BTreeSet<&str> = result
            .instances
            .iter()
            .map(|i| i.variable_id.split(':').next().unwrap())
            .collect();
        assert_eq!(names, BTreeSet::from(["f", "filenames", "inputFile"]));
    }

    #[test]
    fn parameter_without_lvt_is_inferred_from_call_owners() {
        let mut cb = ClassBuilder::new("P");
        cb.default_constructor();
        cb.method("use", "(Ljava/io/File;)V", |a| {
            a.aload(1);
            a.invokevirtual("java/io/File", "isDirectory", "()Z");
            a.pop();
            a.vreturn();
        });
        let result = extract_class(&parse(&cb.build()), "p", &ExtractConfig::default());
        assert_eq!(result.instances.len(), 1);
        let inst = &result.instances[0];
        assert_eq!(inst.kind, UsageKind::Param);
        assert_eq!(inst.variable_id, "slot1");
        assert_eq!(inst.receiver_type, "java/io/File");
        assert!(inst.type_inferred);
    }

    #[test]
    fn field_calls_merge_across_methods() {
        let mut cb = ClassBuilder::new("F");
        cb.field("log", "Lutil/Logger;");
        cb.default_constructor();
        cb.method("a", "()V", |a| {
            a.aload(0);
            a.getfield("F", "log", "Lutil/Logger;");
            a.invokevirtual("util/Logger", "info", "()V");
            a.vreturn();
        });
        cb.method("b", "()V", |a| {
            a.aload(0);
            a.getfield("F", "log", "Lutil/Logger;");
            a.invokevirtual("util/Logger", "warn", "()V");
            a.vreturn();
        });
        let result = extract_class(&parse(&cb.build()), "p", &ExtractConfig::default());
        assert_eq!(result.instances.len(), 1);
        let inst = &result.instances[0];
        assert_eq!(inst.kind, UsageKind::Field);
        assert_eq!(inst.variable_id, "log");
        assert_eq!(inst.enclosing_method, "<fields>");
        assert_eq!(inst.receiver_type, "util/Logger");
        assert_eq!(rendered(inst), vec!["info()V", "warn()V"]);
    }

    #[test]
    fn same_typed_locals_stay_distinct() {
        let mut cb = ClassBuilder::new("T");
        cb.default_constructor();
        cb.method("run", "()V", |a| {
            for slot in 1..=3 {
                a.new_object("java/io/File");
                a.dup();
                a.ldc_string("x");
                a.invokespecial("java/io/File", "<init>", "(Ljava/lang/String;)V");
                a.astore(slot);
            }
            a.vreturn();
        });
        let result = extract_class(&parse(&cb.build()), "p", &ExtractConfig::default());
        assert_eq!(result.instances.len(), 3);
        for inst in &result.instances {
            assert_eq!(inst.receiver_type, "java/io/File");
            assert_eq!(rendered(inst), vec!["<init>(Ljava/lang/String;)V"]);
        }
    }

    #[test]
    fn unstored_construction_needs_include_temps() {
        let mut cb = ClassBuilder::new("T");
        cb.default_constructor();
        cb.method("probe", "(Ljava/lang/String;)Z", |a| {
            a.new_object("java/io/File");
            a.dup();
            a.aload(1);
            a.invokespecial("java/io/File", "<init>", "(Ljava/lang/String;)V");
            a.invokevirtual("java/io/File", "isDirectory", "()Z");
            a.ireturn();
        });
        let class = parse(&cb.build());

        let default = extract_class(&class, "p", &ExtractConfig::default());
        assert!(default.instances.is_empty());

        let with_temps = extract_class(
            &class,
            "p",
            &ExtractConfig { include_temps: true, ..ExtractConfig::default() },
        );
        assert_eq!(with_temps.instances.len(), 1);
        let inst = &with_temps.instances[0];
        assert_eq!(inst.kind, UsageKind::Temp);
        assert_eq!(inst.receiver_type, "java/io/File");
        assert_eq!(rendered(inst), vec!["<init>(Ljava/lang/String;)V", "isDirectory()Z"]);
    }

    #[test]
    fn calls_on_this_need_include_this() {
        let mut cb = ClassBuilder::new("S");
        cb.default_constructor();
        cb.method("helper", "()V", |a| a.vreturn());
        cb.method("run", "()V", |a| {
            a.aload(0);
            a.invokevirtual("S", "helper", "()V");
            a.vreturn();
        });
        let class = parse(&cb.build());

        let default = extract_class(&class, "p", &ExtractConfig::default());
        assert!(default.instances.is_empty());

        let with_this = extract_class(
            &class,
            "p",
            &ExtractConfig { include_this: true, ..ExtractConfig::default() },
        );
        // slot 0 of the constructor records super() too
        let run: Vec<_> = with_this
            .instances
            .iter()
            .filter(|i| i.enclosing_method == "run()V")
            .collect();
        assert_eq!(run.len(), 1);
        assert_eq!(run[0].kind, UsageKind::Param);
        assert_eq!(rendered(run[0]), vec!["helper()V"]);
    }

    #[test]
    fn repeated_calls_collapse_into_a_set() {
        let mut cb = ClassBuilder::new("R");
        cb.default_constructor();
        cb.method("twice", "(Ljava/io/File;)V", |a| {
            a.aload(1);
            a.invokevirtual("java/io/File", "isDirectory", "()Z");
            a.pop();
            a.aload(1);
            a.invokevirtual("java/io/File", "isDirectory", "()Z");
            a.pop();
            a.vreturn();
        });
        let result = extract_class(&parse(&cb.build()), "p", &ExtractConfig::default());
        assert_eq!(result.instances.len(), 1);
        assert_eq!(rendered(&result.instances[0]), vec!["isDirectory()Z"]);
    }

    #[test]
    fn abstract_methods_and_empty_bodies_yield_nothing() {
        let mut cb = ClassBuilder::new("A");
        cb.abstract_method("todo", "()V");
        cb.method("noop", "()V", |a| a.vreturn());
        let result = extract_class(&parse(&cb.build()), "p", &ExtractConfig::default());
        assert!(result.instances.is_empty());
        assert_eq!(result.methods_skipped, 0);
    }

    #[test]
    fn static_receiver_slot_zero_is_a_parameter() {
        let mut cb = ClassBuilder::new("U");
        cb.default_constructor();
        cb.static_method("probe", "(Ljava/io/File;)V", |a| {
            a.aload(0);
            a.invokevirtual("java/io/File", "exists", "()Z");
            a.pop();
            a.vreturn();
        });
        let result = extract_class(&parse(&cb.build()), "p", &ExtractConfig::default());
        assert_eq!(result.instances.len(), 1);
        let inst = &result.instances[0];
        assert_eq!(inst.kind, UsageKind::Param);
        assert_eq!(inst.variable_id, "slot0");
    }

    #[test]
    fn static_calls_record_no_receiver_usage() {
        let mut cb = ClassBuilder::new("V");
        cb.default_constructor();
        cb.method("run", "()V", |a| {
            a.ldc_string("7");
            a.invokestatic("java/lang/Integer", "parseInt", "(Ljava/lang/String;)I");
            a.pop();
            a.vreturn();
        });
        let result = extract_class(&parse(&cb.build()), "p", &ExtractConfig::default());
        assert!(result.instances.is_empty());
    }
}
