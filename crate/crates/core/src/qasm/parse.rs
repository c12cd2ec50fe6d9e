//! Recursive-descent parser for the OpenQASM 2 subset, producing a
//! [`HybridCircuit`].
//!
//! Statement coverage: the version header, `include "qelib1.inc"` (ignored),
//! `qreg` / `creg`, `gate` definitions (inlined at application time,
//! `opaque` rejected), gate applications with broadcast over registers,
//! `measure`, `reset`, `barrier` (ignored), and single-bit `if` conditions.
//!
//! `reset` is read as allocation of a fresh |0> wire: on an untouched wire
//! it is a plain initialisation; on a used wire the register is re-pointed
//! at a new logical wire and the old one joins the discard set, which keeps
//! initialisations ahead of any gate that touches their wire. A reset of an
//! already measured wire is rejected.

use std::collections::{BTreeMap, BTreeSet};

use super::angle::{DyadicAngle, Value};
use super::lexer::{lex, Pos, Pragma, Spanned, Tok};
use super::lower::lower_gate;
use super::{QasmError, Sidecar};
use crate::circuit::{ClassicalBitId, HybridCircuit, Instruction, WireId};

#[derive(Debug, Clone)]
enum Expr {
    Int(i64),
    Real(f64),
    Pi,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Call(String, Box<Expr>),
}

impl Expr {
    fn eval(&self, env: &BTreeMap<String, Value>, pos: Pos) -> Result<Value, QasmError> {
        Ok(match self {
            Expr::Int(v) => Value::int(*v),
            Expr::Real(v) => Value::Float(*v),
            Expr::Pi => Value::PI,
            Expr::Param(name) => *env.get(name).ok_or_else(|| QasmError::parse(
                pos,
                format!("unknown parameter '{name}'"),
            ))?,
            Expr::Neg(e) => e.eval(env, pos)?.neg(),
            Expr::Add(a, b) => a.eval(env, pos)?.add(b.eval(env, pos)?),
            Expr::Sub(a, b) => a.eval(env, pos)?.sub(b.eval(env, pos)?),
            Expr::Mul(a, b) => a.eval(env, pos)?.mul(b.eval(env, pos)?),
            Expr::Div(a, b) => a.eval(env, pos)?.div(b.eval(env, pos)?),
            Expr::Call(f, e) => {
                let v = e.eval(env, pos)?;
                v.apply_fn(f).ok_or_else(|| QasmError::parse(pos, format!("unknown function '{f}'")))?
            }
        })
    }
}

/// One call inside a gate definition body; operands are formal argument
/// names.
#[derive(Debug, Clone)]
struct BodyCall {
    name: String,
    params: Vec<Expr>,
    operands: Vec<String>,
    pos: Pos,
}

#[derive(Debug, Clone)]
struct GateDef {
    params: Vec<String>,
    args: Vec<String>,
    body: Vec<BodyCall>,
}

#[derive(Debug, Clone, Copy)]
struct Reg {
    offset: u32,
    size: u32,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    qregs: BTreeMap<String, Reg>,
    cregs: BTreeMap<String, Reg>,
    creg_order: Vec<String>,
    defs: BTreeMap<String, GateDef>,
    /// Declared quantum slot -> current logical wire.
    logical: Vec<u32>,
    next_logical: u32,
    referenced: Vec<bool>,
    measured: Vec<bool>,
    auto_discards: BTreeSet<WireId>,
    body: Vec<Instruction>,
}

impl Parser {
    fn here(&self) -> Pos {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Result<Tok, QasmError> {
        let t = self
            .toks
            .get(self.pos)
            .ok_or_else(|| QasmError::parse(self.here(), "unexpected end of input".to_string()))?;
        self.pos += 1;
        Ok(t.tok.clone())
    }

    fn expect(&mut self, tok: Tok) -> Result<(), QasmError> {
        let pos = self.here();
        let got = self.next()?;
        if got == tok {
            Ok(())
        } else {
            Err(QasmError::parse(pos, format!("expected '{tok}', found '{got}'")))
        }
    }

    fn expect_ident(&mut self) -> Result<String, QasmError> {
        let pos = self.here();
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            other => Err(QasmError::parse(pos, format!("expected identifier, found '{other}'"))),
        }
    }

    fn expect_int(&mut self) -> Result<i64, QasmError> {
        let pos = self.here();
        match self.next()? {
            Tok::Int(v) => Ok(v),
            other => Err(QasmError::parse(pos, format!("expected integer, found '{other}'"))),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // expression grammar: expr := term (('+'|'-') term)*
    fn parse_expr(&mut self) -> Result<Expr, QasmError> {
        let mut acc = self.parse_term()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = Expr::Add(Box::new(acc), Box::new(self.parse_term()?));
            } else if self.eat(&Tok::Minus) {
                acc = Expr::Sub(Box::new(acc), Box::new(self.parse_term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, QasmError> {
        let mut acc = self.parse_factor()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = Expr::Mul(Box::new(acc), Box::new(self.parse_factor()?));
            } else if self.eat(&Tok::Slash) {
                acc = Expr::Div(Box::new(acc), Box::new(self.parse_factor()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_factor(&mut self) -> Result<Expr, QasmError> {
        let pos = self.here();
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.parse_factor()?)));
        }
        match self.next()? {
            Tok::Int(v) => Ok(Expr::Int(v)),
            Tok::Real(v) => Ok(Expr::Real(v)),
            Tok::Pi => Ok(Expr::Pi),
            Tok::LParen => {
                let e = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.eat(&Tok::LParen) {
                    let e = self.parse_expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Call(name, Box::new(e)))
                } else {
                    Ok(Expr::Param(name))
                }
            }
            other => Err(QasmError::parse(pos, format!("expected expression, found '{other}'"))),
        }
    }

    /// Quantum operand: a register name or an indexed wire, resolved to
    /// declared slots.
    fn parse_qarg(&mut self) -> Result<Vec<u32>, QasmError> {
        let pos = self.here();
        let name = self.expect_ident()?;
        let reg = *self
            .qregs
            .get(&name)
            .ok_or_else(|| QasmError::parse(pos, format!("unknown quantum register '{name}'")))?;
        if self.eat(&Tok::LBracket) {
            let idx = self.expect_int()?;
            self.expect(Tok::RBracket)?;
            if idx < 0 || idx as u32 >= reg.size {
                return Err(QasmError::parse(pos, format!("index {idx} out of range for '{name}'")));
            }
            Ok(vec![reg.offset + idx as u32])
        } else {
            Ok((reg.offset..reg.offset + reg.size).collect())
        }
    }

    fn parse_carg(&mut self) -> Result<Vec<u32>, QasmError> {
        let pos = self.here();
        let name = self.expect_ident()?;
        let reg = *self
            .cregs
            .get(&name)
            .ok_or_else(|| QasmError::parse(pos, format!("unknown classical register '{name}'")))?;
        if self.eat(&Tok::LBracket) {
            let idx = self.expect_int()?;
            self.expect(Tok::RBracket)?;
            if idx < 0 || idx as u32 >= reg.size {
                return Err(QasmError::parse(pos, format!("index {idx} out of range for '{name}'")));
            }
            Ok(vec![reg.offset + idx as u32])
        } else {
            Ok((reg.offset..reg.offset + reg.size).collect())
        }
    }

    fn touch(&mut self, wire: u32) {
        self.referenced[wire as usize] = true;
    }

    /// Lowers one gate application (already broadcast to single slots) into
    /// the body, wrapping the kernel instructions per `condition`.
    fn emit_gate(
        &mut self,
        name: &str,
        params: &[DyadicAngle],
        slots: &[u32],
        condition: Option<(ClassicalBitId, bool)>,
        pos: Pos,
        depth: usize,
    ) -> Result<(), QasmError> {
        if depth > 64 {
            return Err(QasmError::parse(pos, "gate definitions nested too deeply".to_string()));
        }
        if let Some(def) = self.defs.get(name).cloned() {
            if def.params.len() != params.len() || def.args.len() != slots.len() {
                return Err(QasmError::parse(
                    pos,
                    format!("gate '{name}' applied with wrong arity"),
                ));
            }
            let env: BTreeMap<String, Value> = def
                .params
                .iter()
                .zip(params)
                .map(|(p, a)| (p.clone(), Value::PiRational(a.mult, 1i64 << a.denom_exp.max(1) - 1)))
                .collect();
            let binding: BTreeMap<&str, u32> =
                def.args.iter().map(String::as_str).zip(slots.iter().copied()).collect();
            for call in &def.body {
                let mut angles = Vec::with_capacity(call.params.len());
                for e in &call.params {
                    let v = e.eval(&env, call.pos)?;
                    angles.push(v.to_dyadic().map_err(|e| QasmError::NonDyadicAngle {
                        line: call.pos.line,
                        source: e,
                    })?);
                }
                let wires: Vec<u32> = call
                    .operands
                    .iter()
                    .map(|a| {
                        binding.get(a.as_str()).copied().ok_or_else(|| {
                            QasmError::parse(call.pos, format!("unknown gate argument '{a}'"))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                self.emit_gate(&call.name, &angles, &wires, condition, call.pos, depth + 1)?;
            }
            return Ok(());
        }

        let wires: Vec<WireId> = slots.iter().map(|&s| WireId(self.logical[s as usize])).collect();
        for w in &wires {
            if self.measured[w.0 as usize] {
                return Err(QasmError::parse(
                    pos,
                    format!("wire addressed after its measurement (declared slot {})", slots[0]),
                ));
            }
        }
        let apps = lower_gate(name, params, &wires).map_err(|e| QasmError::Lower {
            line: pos.line,
            source: e,
        })?;
        for app in apps {
            for w in app.wires() {
                self.touch(w.0);
            }
            match condition {
                None => self.body.push(Instruction::Apply(app)),
                Some((bit, true)) => {
                    self.body.push(Instruction::ClassicallyControlled { bit, inner: app })
                }
                Some((bit, false)) => {
                    self.body.push(Instruction::NotBit(bit));
                    self.body.push(Instruction::ClassicallyControlled { bit, inner: app });
                    self.body.push(Instruction::NotBit(bit));
                }
            }
        }
        Ok(())
    }

    /// Broadcast rule: all multi-wire operands must share one length; size-1
    /// operands repeat.
    fn broadcast(
        &mut self,
        name: &str,
        params: &[DyadicAngle],
        operands: &[Vec<u32>],
        condition: Option<(ClassicalBitId, bool)>,
        pos: Pos,
    ) -> Result<(), QasmError> {
        let len = operands.iter().map(Vec::len).max().unwrap_or(1);
        for ops in operands {
            if ops.len() != 1 && ops.len() != len {
                return Err(QasmError::parse(pos, "mismatched register sizes in application".to_string()));
            }
        }
        for rep in 0..len {
            let slots: Vec<u32> =
                operands.iter().map(|ops| ops[if ops.len() == 1 { 0 } else { rep }]).collect();
            self.emit_gate(name, params, &slots, condition, pos, 0)?;
        }
        Ok(())
    }

    /// A gate-application statement, used at top level and under `if`.
    fn parse_application(
        &mut self,
        name: String,
        condition: Option<(ClassicalBitId, bool)>,
        pos: Pos,
    ) -> Result<(), QasmError> {
        let mut params: Vec<DyadicAngle> = Vec::new();
        if self.eat(&Tok::LParen) {
            if !self.eat(&Tok::RParen) {
                loop {
                    let e = self.parse_expr()?;
                    let v = e.eval(&BTreeMap::new(), pos)?;
                    params.push(v.to_dyadic().map_err(|e| QasmError::NonDyadicAngle {
                        line: pos.line,
                        source: e,
                    })?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            }
        }
        let mut operands = vec![self.parse_qarg()?];
        while self.eat(&Tok::Comma) {
            operands.push(self.parse_qarg()?);
        }
        self.expect(Tok::Semi)?;
        self.broadcast(&name, &params, &operands, condition, pos)
    }

    fn parse_measure(&mut self, pos: Pos) -> Result<(), QasmError> {
        let qarg = self.parse_qarg()?;
        self.expect(Tok::Arrow)?;
        let carg = self.parse_carg()?;
        self.expect(Tok::Semi)?;
        if qarg.len() != carg.len() {
            return Err(QasmError::parse(pos, "measure operands have mismatched sizes".to_string()));
        }
        for (&slot, &bit) in qarg.iter().zip(&carg) {
            let wire = self.logical[slot as usize];
            if self.measured[wire as usize] {
                return Err(QasmError::parse(pos, format!("wire q[{slot}] measured twice")));
            }
            self.touch(wire);
            self.measured[wire as usize] = true;
            self.body.push(Instruction::Measure { wire: WireId(wire), bit: ClassicalBitId(bit) });
        }
        Ok(())
    }

    fn parse_reset(&mut self, pos: Pos) -> Result<(), QasmError> {
        let qarg = self.parse_qarg()?;
        self.expect(Tok::Semi)?;
        for &slot in &qarg {
            let wire = self.logical[slot as usize];
            if self.measured[wire as usize] {
                return Err(QasmError::parse(
                    pos,
                    format!("reset of slot {slot} after its measurement is not supported"),
                ));
            }
            if self.referenced[wire as usize] {
                // fresh logical wire; the dirty one is traced out
                let fresh = self.next_logical;
                self.next_logical += 1;
                self.referenced.push(true);
                self.measured.push(false);
                self.auto_discards.insert(WireId(wire));
                self.logical[slot as usize] = fresh;
                self.body.push(Instruction::Init(WireId(fresh)));
            } else {
                self.referenced[wire as usize] = true;
                self.body.push(Instruction::Init(WireId(wire)));
            }
        }
        Ok(())
    }

    fn parse_gate_def(&mut self) -> Result<(), QasmError> {
        let pos = self.here();
        let name = self.expect_ident()?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            if !self.eat(&Tok::RParen) {
                loop {
                    params.push(self.expect_ident()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            }
        }
        let mut args = vec![self.expect_ident()?];
        while self.eat(&Tok::Comma) {
            args.push(self.expect_ident()?);
        }
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        loop {
            let call_pos = self.here();
            match self.next()? {
                Tok::RBrace => break,
                Tok::Ident(callee) if callee == "barrier" => {
                    // operand list, ignored
                    while self.peek() != Some(&Tok::Semi) {
                        self.next()?;
                    }
                    self.expect(Tok::Semi)?;
                }
                Tok::Ident(callee) => {
                    let mut call_params = Vec::new();
                    if self.eat(&Tok::LParen) {
                        if !self.eat(&Tok::RParen) {
                            loop {
                                call_params.push(self.parse_expr()?);
                                if !self.eat(&Tok::Comma) {
                                    break;
                                }
                            }
                            self.expect(Tok::RParen)?;
                        }
                    }
                    let mut operands = vec![self.expect_ident()?];
                    while self.eat(&Tok::Comma) {
                        operands.push(self.expect_ident()?);
                    }
                    self.expect(Tok::Semi)?;
                    body.push(BodyCall { name: callee, params: call_params, operands, pos: call_pos });
                }
                other => {
                    return Err(QasmError::parse(
                        call_pos,
                        format!("unexpected '{other}' in gate body"),
                    ))
                }
            }
        }
        self.defs.insert(name, GateDef { params, args, body });
        let _ = pos;
        Ok(())
    }

    fn parse_if(&mut self) -> Result<(), QasmError> {
        let pos = self.here();
        self.expect(Tok::LParen)?;
        let creg_name = self.expect_ident()?;
        let reg = *self.cregs.get(&creg_name).ok_or_else(|| {
            QasmError::parse(pos, format!("unknown classical register '{creg_name}'"))
        })?;
        self.expect(Tok::EqEq)?;
        let value = self.expect_int()?;
        self.expect(Tok::RParen)?;
        if reg.size != 1 {
            return Err(QasmError::parse(
                pos,
                format!(
                    "conditions on multi-bit registers are not supported ('{creg_name}' has {} bits); split it into one-bit registers",
                    reg.size
                ),
            ));
        }
        let bit = ClassicalBitId(reg.offset);
        let stmt_pos = self.here();
        let head = self.next()?;
        match head {
            Tok::Ident(name) if name == "measure" || name == "reset" || name == "if" => Err(
                QasmError::parse(stmt_pos, format!("'if' may only guard a gate application, found '{name}'")),
            ),
            Tok::Ident(name) => {
                if value < 0 || value > 1 {
                    // a 1-bit register can never equal it: parse and drop
                    let save = self.body.len();
                    self.parse_application(name, None, stmt_pos)?;
                    self.body.truncate(save);
                    Ok(())
                } else {
                    self.parse_application(name, Some((bit, value == 1)), stmt_pos)
                }
            }
            other => Err(QasmError::parse(stmt_pos, format!("expected gate application, found '{other}'"))),
        }
    }

    fn parse_program(&mut self) -> Result<(), QasmError> {
        // version header
        self.expect(Tok::Openqasm)?;
        let pos = self.here();
        match self.next()? {
            Tok::Real(v) if v == 2.0 => {}
            other => {
                return Err(QasmError::parse(pos, format!("unsupported OpenQASM version '{other}'")))
            }
        }
        self.expect(Tok::Semi)?;

        while self.peek().is_some() {
            let pos = self.here();
            match self.next()? {
                Tok::Ident(word) => match word.as_str() {
                    "include" => {
                        let file = match self.next()? {
                            Tok::Str(s) => s,
                            other => {
                                return Err(QasmError::parse(
                                    pos,
                                    format!("expected include file name, found '{other}'"),
                                ))
                            }
                        };
                        self.expect(Tok::Semi)?;
                        if file != "qelib1.inc" {
                            return Err(QasmError::parse(
                                pos,
                                format!("only \"qelib1.inc\" may be included, found \"{file}\""),
                            ));
                        }
                    }
                    "qreg" => {
                        let name = self.expect_ident()?;
                        self.expect(Tok::LBracket)?;
                        let size = self.expect_int()?;
                        self.expect(Tok::RBracket)?;
                        self.expect(Tok::Semi)?;
                        if size < 0 || self.qregs.contains_key(&name) {
                            return Err(QasmError::parse(pos, format!("bad qreg declaration '{name}'")));
                        }
                        let offset = self.next_logical;
                        self.qregs.insert(name, Reg { offset, size: size as u32 });
                        for _ in 0..size {
                            self.logical.push(self.next_logical);
                            self.referenced.push(false);
                            self.measured.push(false);
                            self.next_logical += 1;
                        }
                    }
                    "creg" => {
                        let name = self.expect_ident()?;
                        self.expect(Tok::LBracket)?;
                        let size = self.expect_int()?;
                        self.expect(Tok::RBracket)?;
                        self.expect(Tok::Semi)?;
                        if size < 0 || self.cregs.contains_key(&name) {
                            return Err(QasmError::parse(pos, format!("bad creg declaration '{name}'")));
                        }
                        let offset: u32 = self.cregs.values().map(|r| r.size).sum();
                        self.cregs.insert(name.clone(), Reg { offset, size: size as u32 });
                        self.creg_order.push(name);
                    }
                    "gate" => self.parse_gate_def()?,
                    "opaque" => {
                        return Err(QasmError::parse(pos, "opaque gates are not supported".to_string()))
                    }
                    "measure" => self.parse_measure(pos)?,
                    "reset" => self.parse_reset(pos)?,
                    "barrier" => {
                        while self.peek() != Some(&Tok::Semi) {
                            self.next()?;
                        }
                        self.expect(Tok::Semi)?;
                    }
                    "if" => self.parse_if()?,
                    name => self.parse_application(name.to_string(), None, pos)?,
                },
                other => {
                    return Err(QasmError::parse(pos, format!("unexpected token '{other}'")));
                }
            }
        }
        Ok(())
    }

    /// Resolves a `name[i]` (or bare `name`) wire reference to final logical
    /// wires.
    fn resolve_wire_name(&self, text: &str) -> Result<Vec<WireId>, QasmError> {
        let (name, idx) = match text.find('[') {
            Some(b) => {
                let name = &text[..b];
                let idx: u32 = text[b + 1..]
                    .strip_suffix(']')
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| QasmError::UnresolvedSidecarName(text.to_string()))?;
                (name, Some(idx))
            }
            None => (text, None),
        };
        let reg =
            self.qregs.get(name).ok_or_else(|| QasmError::UnresolvedSidecarName(text.to_string()))?;
        match idx {
            Some(i) if i < reg.size => Ok(vec![WireId(self.logical[(reg.offset + i) as usize])]),
            Some(_) => Err(QasmError::UnresolvedSidecarName(text.to_string())),
            None => Ok((reg.offset..reg.offset + reg.size)
                .map(|s| WireId(self.logical[s as usize]))
                .collect()),
        }
    }
}

/// Parses OpenQASM 2 source with an optional sidecar; inline `@discard` /
/// `@inputs` pragmas cover the same ground, with the sidecar winning on
/// conflict.
pub fn parse(src: &str, sidecar: Option<&Sidecar>) -> Result<HybridCircuit, QasmError> {
    let lexed = lex(src).map_err(|e| QasmError::parse(e.pos, e.message))?;
    let mut p = Parser {
        toks: lexed.tokens,
        pos: 0,
        qregs: BTreeMap::new(),
        cregs: BTreeMap::new(),
        creg_order: Vec::new(),
        defs: BTreeMap::new(),
        logical: Vec::new(),
        next_logical: 0,
        referenced: Vec::new(),
        measured: Vec::new(),
        auto_discards: BTreeSet::new(),
        body: Vec::new(),
    };
    p.parse_program()?;

    let mut c = HybridCircuit::new(p.next_logical, p.cregs.values().map(|r| r.size).sum());
    c.body = std::mem::take(&mut p.body);
    c.discards = p.auto_discards.clone();
    c.infer_primary_inputs();

    // discard set: sidecar beats pragmas; a keep list must complement it
    let pragma_list = |pragmas: &[Pragma], name: &str| -> Option<Vec<String>> {
        pragmas.iter().find(|pr| pr.name == name).map(|pr| pr.args.clone())
    };
    let discard_names = sidecar
        .filter(|s| !s.discard.is_empty())
        .map(|s| s.discard.clone())
        .or_else(|| pragma_list(&lexed.pragmas, "discard"));
    if let Some(names) = discard_names {
        for n in names {
            for w in p.resolve_wire_name(&n)? {
                c.discards.insert(w);
            }
        }
    }
    let keep_names = sidecar.and_then(|s| s.keep.clone());
    if let Some(names) = keep_names {
        let mut keep: BTreeSet<WireId> = BTreeSet::new();
        for n in names {
            keep.extend(p.resolve_wire_name(&n)?);
        }
        if keep.intersection(&c.discards).next().is_some() {
            return Err(QasmError::SidecarConflict(
                "keep and discard lists intersect".to_string(),
            ));
        }
        let expected: BTreeSet<WireId> =
            (0..c.n_qubits).map(WireId).filter(|w| !keep.contains(w)).collect();
        if expected != c.discards {
            return Err(QasmError::SidecarConflict(
                "keep list does not complement the discard set".to_string(),
            ));
        }
    }
    let input_names = sidecar
        .and_then(|s| s.inputs.clone())
        .or_else(|| pragma_list(&lexed.pragmas, "inputs"));
    if let Some(names) = input_names {
        let mut order: Vec<WireId> = Vec::new();
        for n in names {
            order.extend(p.resolve_wire_name(&n)?);
        }
        let given: BTreeSet<WireId> = order.iter().copied().collect();
        let inferred: BTreeSet<WireId> = c.primary_inputs.iter().copied().collect();
        if given != inferred || order.len() != given.len() {
            return Err(QasmError::SidecarConflict(
                "inputs list must name each non-initialised wire exactly once".to_string(),
            ));
        }
        c.primary_inputs = order;
    }

    let violations = c.well_formedness_violations();
    if !violations.is_empty() {
        return Err(QasmError::IllFormed(violations[0].to_string()));
    }
    Ok(c)
}
