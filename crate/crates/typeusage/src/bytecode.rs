//! Bytecode decoding and basic-block splitting.
//!
//! Instructions are normalized for the symbolic interpreter: shortcut forms
//! (`aload_0`, `iconst_3`, ...) decode to the same shape as their generic
//! counterparts, and pure stack-shuffling arithmetic is reduced to its slot
//! widths.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BytecodeError {
    #[error("undecodable instruction: opcode 0x{opcode:02X} at pc {pc}")]
    Undecodable { pc: u32, opcode: u8 },
    #[error("truncated instruction at pc {pc}")]
    Truncated { pc: u32 },
    #[error("branch target {target} from pc {pc} is not an instruction boundary")]
    BadTarget { pc: u32, target: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Object reference (aload/astore).
    Ref,
    /// Category-1 primitive (int/float).
    One,
    /// Category-2 primitive (long/double).
    Two,
}

impl VarKind {
    pub fn width(self) -> u8 {
        match self {
            VarKind::Two => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvokeKind {
    Virtual,
    Special,
    Static,
    Interface,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Nop,
    /// Pushes one constant of the given width (iconst/ldc/bipush/...).
    PushConst { width: u8 },
    Load { slot: u16, kind: VarKind },
    Store { slot: u16, kind: VarKind },
    /// Pops index + arrayref, pushes one element of the given width.
    ArrayLoad { width: u8 },
    /// Pops value (width) + index + arrayref.
    ArrayStore { width: u8 },
    Pop,
    Pop2,
    Dup,
    DupX1,
    DupX2,
    Dup2,
    Dup2X1,
    Dup2X2,
    Swap,
    /// Generic stack effect: pop the listed widths (top first), push Unknown.
    Stack { pops: &'static [u8], push: Option<u8> },
    Iinc,
    GetStatic { index: u16 },
    PutStatic { index: u16 },
    GetField { index: u16 },
    PutField { index: u16 },
    Invoke { index: u16, kind: InvokeKind },
    InvokeDynamic { index: u16 },
    New { index: u16 },
    /// checkcast: identity on the top-of-stack origin.
    Checkcast,
    MultiNewArray { index: u16, dims: u8 },
    /// Conditional branch; pops `pops` category-1 values.
    Branch { target: u32, pops: u8 },
    Goto { target: u32 },
    Jsr { target: u32 },
    Ret,
    /// tableswitch / lookupswitch; pops the key.
    Switch { default: u32, targets: Vec<u32> },
    /// Any of the six *return opcodes.
    Return,
    Athrow,
}

impl Op {
    /// True when control does not fall through to the next instruction.
    pub fn ends_flow(&self) -> bool {
        matches!(self, Op::Goto { .. } | Op::Ret | Op::Switch { .. } | Op::Return | Op::Athrow)
    }

    /// True when the following instruction starts a new basic block.
    pub fn ends_block(&self) -> bool {
        self.ends_flow() || matches!(self, Op::Branch { .. } | Op::Jsr { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    pub pc: u32,
    pub op: Op,
}

struct Cursor<'a> {
    code: &'a [u8],
    pos: usize,
    insn_pc: u32,
}

impl<'a> Cursor<'a> {
    fn u8(&mut self) -> Result<u8, BytecodeError> {
        let b = *self.code.get(self.pos).ok_or(BytecodeError::Truncated { pc: self.insn_pc })?;
        self.pos += 1;
        Ok(b)
    }

    fn u16(&mut self) -> Result<u16, BytecodeError> {
        Ok(u16::from_be_bytes([self.u8()?, self.u8()?]))
    }

    fn i16(&mut self) -> Result<i16, BytecodeError> {
        Ok(self.u16()? as i16)
    }

    fn i32(&mut self) -> Result<i32, BytecodeError> {
        Ok(i32::from_be_bytes([self.u8()?, self.u8()?, self.u8()?, self.u8()?]))
    }
}

fn target(pc: u32, offset: i32) -> u32 {
    (pc as i64 + offset as i64) as u32
}

const W1: &[u8] = &[1];
const W2: &[u8] = &[2];
const W11: &[u8] = &[1, 1];
const W22: &[u8] = &[2, 2];
const W12: &[u8] = &[1, 2]; // shift: pops amount (1) then value (2)

/// Decodes a complete bytecode body into instructions, in pc order.
pub fn decode(bytecode: &[u8]) -> Result<Vec<Instruction>, BytecodeError> {
    let mut cursor = Cursor { code: bytecode, pos: 0, insn_pc: 0 };
    let mut out = Vec::new();
    while cursor.pos < bytecode.len() {
        let pc = cursor.pos as u32;
        cursor.insn_pc = pc;
        let opcode = cursor.u8()?;
        let op = decode_one(opcode, pc, &mut cursor)?;
        out.push(Instruction { pc, op });
    }
    Ok(out)
}

fn decode_one(opcode: u8, pc: u32, c: &mut Cursor<'_>) -> Result<Op, BytecodeError> {
    let op = match opcode {
        0x00 => Op::Nop,
        // constants
        0x01..=0x08 => Op::PushConst { width: 1 }, // aconst_null, iconst_*
        0x09 | 0x0A => Op::PushConst { width: 2 }, // lconst
        0x0B..=0x0D => Op::PushConst { width: 1 }, // fconst
        0x0E | 0x0F => Op::PushConst { width: 2 }, // dconst
        0x10 => {
            c.u8()?;
            Op::PushConst { width: 1 }
        }
        0x11 => {
            c.u16()?;
            Op::PushConst { width: 1 }
        }
        0x12 => {
            c.u8()?;
            Op::PushConst { width: 1 } // ldc
        }
        0x13 => {
            c.u16()?;
            Op::PushConst { width: 1 } // ldc_w
        }
        0x14 => {
            c.u16()?;
            Op::PushConst { width: 2 } // ldc2_w
        }
        // loads
        0x15 => Op::Load { slot: c.u8()? as u16, kind: VarKind::One },
        0x16 => Op::Load { slot: c.u8()? as u16, kind: VarKind::Two },
        0x17 => Op::Load { slot: c.u8()? as u16, kind: VarKind::One },
        0x18 => Op::Load { slot: c.u8()? as u16, kind: VarKind::Two },
        0x19 => Op::Load { slot: c.u8()? as u16, kind: VarKind::Ref },
        0x1A..=0x1D => Op::Load { slot: (opcode - 0x1A) as u16, kind: VarKind::One },
        0x1E..=0x21 => Op::Load { slot: (opcode - 0x1E) as u16, kind: VarKind::Two },
        0x22..=0x25 => Op::Load { slot: (opcode - 0x22) as u16, kind: VarKind::One },
        0x26..=0x29 => Op::Load { slot: (opcode - 0x26) as u16, kind: VarKind::Two },
        0x2A..=0x2D => Op::Load { slot: (opcode - 0x2A) as u16, kind: VarKind::Ref },
        // array loads
        0x2E => Op::ArrayLoad { width: 1 },
        0x2F => Op::ArrayLoad { width: 2 },
        0x30 => Op::ArrayLoad { width: 1 },
        0x31 => Op::ArrayLoad { width: 2 },
        0x32 => Op::ArrayLoad { width: 1 }, // aaload: reference element
        0x33..=0x35 => Op::ArrayLoad { width: 1 },
        // stores
        0x36 => Op::Store { slot: c.u8()? as u16, kind: VarKind::One },
        0x37 => Op::Store { slot: c.u8()? as u16, kind: VarKind::Two },
        0x38 => Op::Store { slot: c.u8()? as u16, kind: VarKind::One },
        0x39 => Op::Store { slot: c.u8()? as u16, kind: VarKind::Two },
        0x3A => Op::Store { slot: c.u8()? as u16, kind: VarKind::Ref },
        0x3B..=0x3E => Op::Store { slot: (opcode - 0x3B) as u16, kind: VarKind::One },
        0x3F..=0x42 => Op::Store { slot: (opcode - 0x3F) as u16, kind: VarKind::Two },
        0x43..=0x46 => Op::Store { slot: (opcode - 0x43) as u16, kind: VarKind::One },
        0x47..=0x4A => Op::Store { slot: (opcode - 0x47) as u16, kind: VarKind::Two },
        0x4B..=0x4E => Op::Store { slot: (opcode - 0x4B) as u16, kind: VarKind::Ref },
        // array stores
        0x4F => Op::ArrayStore { width: 1 },
        0x50 => Op::ArrayStore { width: 2 },
        0x51 => Op::ArrayStore { width: 1 },
        0x52 => Op::ArrayStore { width: 2 },
        0x53..=0x56 => Op::ArrayStore { width: 1 },
        // stack shuffles
        0x57 => Op::Pop,
        0x58 => Op::Pop2,
        0x59 => Op::Dup,
        0x5A => Op::DupX1,
        0x5B => Op::DupX2,
        0x5C => Op::Dup2,
        0x5D => Op::Dup2X1,
        0x5E => Op::Dup2X2,
        0x5F => Op::Swap,
        // arithmetic: iadd/ladd/fadd/dadd pattern repeats through ixor
        0x60 | 0x62 | 0x64 | 0x66 | 0x68 | 0x6A | 0x6C | 0x6E | 0x70 | 0x72 => {
            Op::Stack { pops: W11, push: Some(1) }
        }
        0x61 | 0x63 | 0x65 | 0x67 | 0x69 | 0x6B | 0x6D | 0x6F | 0x71 | 0x73 => {
            Op::Stack { pops: W22, push: Some(2) }
        }
        0x74 | 0x76 => Op::Stack { pops: W1, push: Some(1) }, // ineg, fneg
        0x75 | 0x77 => Op::Stack { pops: W2, push: Some(2) }, // lneg, dneg
        0x78 | 0x7A | 0x7C => Op::Stack { pops: W11, push: Some(1) }, // ishl/ishr/iushr
        0x79 | 0x7B | 0x7D => Op::Stack { pops: W12, push: Some(2) }, // lshl/lshr/lushr
        0x7E | 0x80 | 0x82 => Op::Stack { pops: W11, push: Some(1) }, // iand/ior/ixor
        0x7F | 0x81 | 0x83 => Op::Stack { pops: W22, push: Some(2) }, // land/lor/lxor
        0x84 => {
            c.u8()?;
            c.u8()?;
            Op::Iinc
        }
        // conversions
        0x85 => Op::Stack { pops: W1, push: Some(2) }, // i2l
        0x86 => Op::Stack { pops: W1, push: Some(1) }, // i2f
        0x87 => Op::Stack { pops: W1, push: Some(2) }, // i2d
        0x88 => Op::Stack { pops: W2, push: Some(1) }, // l2i
        0x89 => Op::Stack { pops: W2, push: Some(1) }, // l2f
        0x8A => Op::Stack { pops: W2, push: Some(2) }, // l2d
        0x8B => Op::Stack { pops: W1, push: Some(1) }, // f2i
        0x8C => Op::Stack { pops: W1, push: Some(2) }, // f2l
        0x8D => Op::Stack { pops: W1, push: Some(2) }, // f2d
        0x8E => Op::Stack { pops: W2, push: Some(1) }, // d2i
        0x8F => Op::Stack { pops: W2, push: Some(2) }, // d2l
        0x90 => Op::Stack { pops: W2, push: Some(1) }, // d2f
        0x91..=0x93 => Op::Stack { pops: W1, push: Some(1) }, // i2b/i2c/i2s
        // comparisons
        0x94 => Op::Stack { pops: W22, push: Some(1) }, // lcmp
        0x95 | 0x96 => Op::Stack { pops: W11, push: Some(1) }, // fcmpl/fcmpg
        0x97 | 0x98 => Op::Stack { pops: W22, push: Some(1) }, // dcmpl/dcmpg
        // branches
        0x99..=0x9E => Op::Branch { target: target(pc, c.i16()? as i32), pops: 1 },
        0x9F..=0xA6 => Op::Branch { target: target(pc, c.i16()? as i32), pops: 2 },
        0xA7 => Op::Goto { target: target(pc, c.i16()? as i32) },
        0xA8 => Op::Jsr { target: target(pc, c.i16()? as i32) },
        0xA9 => {
            c.u8()?;
            Op::Ret
        }
        0xAA => {
            // tableswitch: pad to a 4-byte boundary from the start of the body
            while c.pos % 4 != 0 {
                c.u8()?;
            }
            let default = target(pc, c.i32()?);
            let low = c.i32()?;
            let high = c.i32()?;
            if high < low {
                return Err(BytecodeError::Undecodable { pc, opcode });
            }
            let count = (high as i64 - low as i64 + 1) as usize;
            let mut targets = Vec::with_capacity(count);
            for _ in 0..count {
                targets.push(target(pc, c.i32()?));
            }
            Op::Switch { default, targets }
        }
        0xAB => {
            while c.pos % 4 != 0 {
                c.u8()?;
            }
            let default = target(pc, c.i32()?);
            let npairs = c.i32()?;
            if npairs < 0 {
                return Err(BytecodeError::Undecodable { pc, opcode });
            }
            let mut targets = Vec::with_capacity(npairs as usize);
            for _ in 0..npairs {
                let _match = c.i32()?;
                targets.push(target(pc, c.i32()?));
            }
            Op::Switch { default, targets }
        }
        0xAC..=0xB1 => Op::Return,
        0xB2 => Op::GetStatic { index: c.u16()? },
        0xB3 => Op::PutStatic { index: c.u16()? },
        0xB4 => Op::GetField { index: c.u16()? },
        0xB5 => Op::PutField { index: c.u16()? },
        0xB6 => Op::Invoke { index: c.u16()?, kind: InvokeKind::Virtual },
        0xB7 => Op::Invoke { index: c.u16()?, kind: InvokeKind::Special },
        0xB8 => Op::Invoke { index: c.u16()?, kind: InvokeKind::Static },
        0xB9 => {
            let index = c.u16()?;
            c.u8()?; // count
            c.u8()?; // zero
            Op::Invoke { index, kind: InvokeKind::Interface }
        }
        0xBA => {
            let index = c.u16()?;
            c.u8()?;
            c.u8()?;
            Op::InvokeDynamic { index }
        }
        0xBB => Op::New { index: c.u16()? },
        0xBC => {
            c.u8()?;
            Op::Stack { pops: W1, push: Some(1) } // newarray
        }
        0xBD => {
            c.u16()?;
            Op::Stack { pops: W1, push: Some(1) } // anewarray
        }
        0xBE => Op::Stack { pops: W1, push: Some(1) }, // arraylength
        0xBF => Op::Athrow,
        0xC0 => {
            c.u16()?;
            Op::Checkcast
        }
        0xC1 => {
            c.u16()?;
            Op::Stack { pops: W1, push: Some(1) } // instanceof
        }
        0xC2 | 0xC3 => Op::Stack { pops: W1, push: None }, // monitorenter/exit
        0xC4 => {
            // wide prefix
            let inner = c.u8()?;
            match inner {
                0x15 | 0x17 => Op::Load { slot: c.u16()?, kind: VarKind::One },
                0x16 | 0x18 => Op::Load { slot: c.u16()?, kind: VarKind::Two },
                0x19 => Op::Load { slot: c.u16()?, kind: VarKind::Ref },
                0x36 | 0x38 => Op::Store { slot: c.u16()?, kind: VarKind::One },
                0x37 | 0x39 => Op::Store { slot: c.u16()?, kind: VarKind::Two },
                0x3A => Op::Store { slot: c.u16()?, kind: VarKind::Ref },
                0x84 => {
                    c.u16()?;
                    c.u16()?;
                    Op::Iinc
                }
                0xA9 => {
                    c.u16()?;
                    Op::Ret
                }
                _ => return Err(BytecodeError::Undecodable { pc, opcode: inner }),
            }
        }
        0xC5 => {
            let index = c.u16()?;
            let dims = c.u8()?;
            Op::MultiNewArray { index, dims }
        }
        0xC6 | 0xC7 => Op::Branch { target: target(pc, c.i16()? as i32), pops: 1 },
        0xC8 => Op::Goto { target: target(pc, c.i32()?) },
        0xC9 => Op::Jsr { target: target(pc, c.i32()?) },
        _ => return Err(BytecodeError::Undecodable { pc, opcode }),
    };
    Ok(op)
}

/// A basic block: the half-open pc range `[start, end)`.
pub type BlockRange = (u32, u32);

/// Splits a decoded body into basic blocks.
///
/// Boundaries: method entry, every branch/switch target, every instruction
/// following a branch/return/throw, and every exception-handler pc. Blocks
/// cover the bytecode exactly once, in pc order.
pub fn split_basic_blocks(
    instructions: &[Instruction],
    code_len: u32,
    handler_pcs: &[u32],
) -> Result<Vec<BlockRange>, BytecodeError> {
    if instructions.is_empty() {
        return Ok(Vec::new());
    }
    let starts: std::collections::BTreeSet<u32> = instructions.iter().map(|i| i.pc).collect();
    let mut boundaries = std::collections::BTreeSet::new();
    boundaries.insert(0u32);

    let check = |from: u32, t: u32| -> Result<u32, BytecodeError> {
        if starts.contains(&t) {
            Ok(t)
        } else {
            Err(BytecodeError::BadTarget { pc: from, target: t })
        }
    };

    for (idx, insn) in instructions.iter().enumerate() {
        match &insn.op {
            Op::Branch { target, .. } | Op::Goto { target } | Op::Jsr { target } => {
                boundaries.insert(check(insn.pc, *target)?);
            }
            Op::Switch { default, targets } => {
                boundaries.insert(check(insn.pc, *default)?);
                for t in targets {
                    boundaries.insert(check(insn.pc, *t)?);
                }
            }
            _ => {}
        }
        if insn.op.ends_block() {
            if let Some(next) = instructions.get(idx + 1) {
                boundaries.insert(next.pc);
            }
        }
    }
    for &pc in handler_pcs {
        boundaries.insert(check(pc, pc)?);
    }

    let mut blocks = Vec::with_capacity(boundaries.len());
    let mut iter = boundaries.iter().peekable();
    while let Some(&start) = iter.next() {
        let end = iter.peek().map(|&&p| p).unwrap_or(code_len);
        blocks.push((start, end));
    }
    Ok(blocks)
}
