//! Straight-line f64 programs compiled from expression DAGs.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::expr::{Expr, ExprError, Func, Node, SpaceOp, Symbol};
use crate::float::rational_to_f64;

enum Instr {
    Const(f64),
    Slot(usize),
    Sum(Vec<usize>),
    Product(Vec<usize>),
    Pow(usize, i32),
    Func(Func, usize),
}

pub(super) struct Program {
    instrs: Vec<Instr>,
    outputs: Vec<usize>,
}

impl Program {
    /// Evaluates every output; `regs` is scratch space reused across calls.
    pub(super) fn run(&self, slots: &[f64], regs: &mut Vec<f64>) -> Vec<f64> {
        regs.clear();
        for ins in &self.instrs {
            let v = match ins {
                Instr::Const(c) => *c,
                Instr::Slot(i) => slots[*i],
                Instr::Sum(xs) => xs.iter().map(|&i| regs[i]).sum(),
                Instr::Product(xs) => xs.iter().map(|&i| regs[i]).product(),
                Instr::Pow(b, n) => powi(regs[*b], *n),
                Instr::Func(f, a) => {
                    let a = regs[*a];
                    match f {
                        Func::Exp => libm::exp(a),
                        Func::Tanh => libm::tanh(a),
                        Func::Sech => 1.0 / libm::cosh(a),
                        Func::Cosh => libm::cosh(a),
                        Func::Sinh => libm::sinh(a),
                    }
                }
            };
            regs.push(v);
        }
        self.outputs.iter().map(|&i| regs[i]).collect()
    }
}

fn powi(b: f64, n: i32) -> f64 {
    let mut acc = 1.0;
    let mut base = if n < 0 { 1.0 / b } else { b };
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Compiles expressions over fields (slots `0..fields`), the space
/// coordinate (slot `fields`) and optionally operator values (following
/// slots). Parameters become constants.
pub(super) struct Compiler {
    instrs: Vec<Instr>,
    memo: BTreeMap<usize, usize>,
    slots: BTreeMap<Symbol, usize>,
    constants: BTreeMap<Symbol, f64>,
    operators: Vec<(SpaceOp, Expr)>,
}

impl Compiler {
    pub(super) fn new(fields: &[Symbol], space: &Symbol, params: &[(Symbol, f64)]) -> Compiler {
        let mut slots: BTreeMap<Symbol, usize> = fields.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        slots.insert(space.clone(), fields.len());
        Compiler {
            instrs: Vec::new(),
            memo: BTreeMap::new(),
            slots,
            constants: params.iter().cloned().collect(),
            operators: Vec::new(),
        }
    }

    pub(super) fn with_operators(mut self, ops: &[(SpaceOp, Expr)]) -> Compiler {
        self.operators = ops.to_vec();
        self
    }

    fn push(&mut self, ins: Instr) -> usize {
        self.instrs.push(ins);
        self.instrs.len() - 1
    }

    pub(super) fn compile(&mut self, e: &Expr) -> Result<usize, ExprError> {
        if let Some(&r) = self.memo.get(&e.ptr_id()) {
            return Ok(r);
        }
        let ins = match e.node() {
            Node::Const(q) => Instr::Const(rational_to_f64(q)),
            Node::Symbol(s) => match (self.slots.get(s), self.constants.get(s)) {
                (Some(&i), _) => Instr::Slot(i),
                (None, Some(&v)) => Instr::Const(v),
                (None, None) => return Err(ExprError::UnboundSymbol(s.as_str().to_string())),
            },
            Node::Sum(xs) => Instr::Sum(xs.iter().map(|x| self.compile(x)).collect::<Result<_, _>>()?),
            Node::Product(xs) => Instr::Product(xs.iter().map(|x| self.compile(x)).collect::<Result<_, _>>()?),
            Node::Pow(b, n) => {
                let n = i32::try_from(*n).map_err(|_| ExprError::Overflow)?;
                Instr::Pow(self.compile(b)?, n)
            }
            Node::Func(f, a) => Instr::Func(*f, self.compile(a)?),
            Node::Op(op, a) => {
                let j = self
                    .operators
                    .iter()
                    .position(|(o, x)| o == op && x == a)
                    .ok_or_else(|| ExprError::UnresolvedOperator(alloc::format!("{op:?}")))?;
                Instr::Slot(self.slots.len() + j)
            }
        };
        let r = self.push(ins);
        self.memo.insert(e.ptr_id(), r);
        Ok(r)
    }

    pub(super) fn finish(self, outputs: Vec<usize>) -> Program {
        Program { instrs: self.instrs, outputs }
    }
}
