//! A small QCL-flavoured circuit language (`.qc` files).
//!
//! ```text
//! program   := { statement } ;
//! statement := decl | gatecall | measure ;
//! decl      := "qreg" IDENT "[" INT "]" ";" ;
//! gatecall  := GATE "(" target { "," target } ")" ";" ;
//! target    := IDENT [ "[" INT "]" ] ;
//! measure   := "measure" ";" ;
//! ```
//!
//! `//` starts a comment that runs to the end of the line. Gate names are
//! case-insensitive: `H`, `X`/`NOT`, `Z`/`PHASEFLIP`, `SNOT`, `CNOT`, `SWAP`,
//! `TOFFOLI`, `FREDKIN` and `CPHASE` (controlled phase flip on two wires).
//!
//! Each gate statement is one stage. A single-qubit gate given the whole
//! register, or several wires, becomes one broadcast stage (a plain gate
//! stage when that is a single wire). A multi-qubit
//! gate takes exactly as many wires as its arity; a whole-register target
//! contributes all of its wires in order. A program declares exactly one
//! register and `measure`, when present, must come last.

use std::fmt;

use thiserror::Error;

use crate::circuit::{Circuit, StageKind, StageOp};
use crate::quantumcore::{controlled, Gate, StandardGate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub col: usize,
    pub length: usize,
}

impl SourceSpan {
    fn to(self, end: SourceSpan) -> SourceSpan {
        let length = if end.line == self.line {
            end.col + end.length - self.col
        } else {
            self.length
        };
        SourceSpan { length, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {}, col {}: {message}{}", span.line, span.col, expected_suffix(expected))]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(" or "))
    }
}

impl ParseError {
    fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            span,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    fn expecting(span: SourceSpan, message: impl Into<String>, expected: &[&str]) -> Self {
        Self {
            span,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("stage {label:?} cannot be expressed in the circuit language")]
    Unsupported { label: String },
}

/// Gate vocabulary of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DslGate {
    H,
    Not,
    PhaseFlip,
    Snot,
    Cnot,
    Swap,
    Toffoli,
    Fredkin,
    CPhase,
}

const GATE_NAMES: [&str; 11] = [
    "H", "X", "NOT", "Z", "PHASEFLIP", "SNOT", "CNOT", "SWAP", "TOFFOLI", "FREDKIN", "CPHASE",
];

impl DslGate {
    const ALL: [DslGate; 9] = [
        DslGate::H,
        DslGate::Not,
        DslGate::PhaseFlip,
        DslGate::Snot,
        DslGate::Cnot,
        DslGate::Swap,
        DslGate::Toffoli,
        DslGate::Fredkin,
        DslGate::CPhase,
    ];

    fn lookup(name: &str) -> Option<Self> {
        let gate = match name.to_ascii_uppercase().as_str() {
            "H" => DslGate::H,
            "X" | "NOT" => DslGate::Not,
            "Z" | "PHASEFLIP" => DslGate::PhaseFlip,
            "SNOT" => DslGate::Snot,
            "CNOT" => DslGate::Cnot,
            "SWAP" => DslGate::Swap,
            "TOFFOLI" => DslGate::Toffoli,
            "FREDKIN" => DslGate::Fredkin,
            "CPHASE" => DslGate::CPhase,
            _ => return None,
        };
        Some(gate)
    }

    /// Canonical spelling used by [`serialize`].
    fn symbol(self) -> &'static str {
        match self {
            DslGate::H => "H",
            DslGate::Not => "NOT",
            DslGate::PhaseFlip => "PHASEFLIP",
            DslGate::Snot => "SNOT",
            DslGate::Cnot => "CNOT",
            DslGate::Swap => "SWAP",
            DslGate::Toffoli => "TOFFOLI",
            DslGate::Fredkin => "FREDKIN",
            DslGate::CPhase => "CPHASE",
        }
    }

    fn gate(self) -> Gate {
        let standard = match self {
            DslGate::H => StandardGate::Hadamard,
            DslGate::Not => StandardGate::Not,
            DslGate::PhaseFlip => StandardGate::PhaseFlip,
            DslGate::Snot => StandardGate::Snot,
            DslGate::Cnot => StandardGate::Cnot,
            DslGate::Swap => StandardGate::Swap,
            DslGate::Toffoli => StandardGate::Toffoli,
            DslGate::Fredkin => StandardGate::Fredkin,
            DslGate::CPhase => {
                return controlled(&StandardGate::PhaseFlip.gate(), 1)
                    .expect("two wires fit the cap")
                    .renamed("CPHASE")
            }
        };
        standard.gate()
    }

    /// Inverse of [`DslGate::gate`], matching both name and matrix.
    fn from_gate(gate: &Gate) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|g| {
                let reference = g.gate();
                reference.name() == gate.name() && reference.matrix() == gate.matrix()
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(Option<u64>),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Stray(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Int(_) => "integer".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Semi => "';'".into(),
            Tok::Comma => "','".into(),
            Tok::Stray(c) => format!("character {c:?}"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let mut last_end = SourceSpan {
        line: 1,
        col: 1,
        length: 0,
    };

    while let Some(&c) = chars.peek() {
        let start = SourceSpan {
            line,
            col,
            length: 1,
        };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '/' {
            chars.next();
            col += 1;
            if chars.peek() == Some(&'/') {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
                continue;
            }
            tokens.push(Token {
                tok: Tok::Stray('/'),
                span: start,
            });
            last_end = start;
            continue;
        }
        let (tok, length) = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek().filter(|c| c.is_ascii_alphanumeric() || **c == '_') {
                s.push(c);
                chars.next();
            }
            let length = s.len();
            (Tok::Ident(s), length)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek().filter(|c| c.is_ascii_digit()) {
                s.push(c);
                chars.next();
            }
            (Tok::Int(s.parse().ok()), s.len())
        } else {
            chars.next();
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                other => Tok::Stray(other),
            };
            (tok, 1)
        };
        let span = SourceSpan { length, ..start };
        col += length;
        last_end = span;
        tokens.push(Token { tok, span });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: SourceSpan {
            line: last_end.line,
            col: last_end.col + last_end.length.saturating_sub(1),
            length: 0,
        },
    });
    tokens
}

struct Register {
    name: String,
    size: usize,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    register: Option<Register>,
    circuit: Option<Circuit>,
    measure_span: Option<SourceSpan>,
}

/// Parses program text into a [`Circuit`]. The circuit is named after the
/// declared register.
pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    let mut parser = Parser {
        tokens: lex(text),
        pos: 0,
        register: None,
        circuit: None,
        measure_span: None,
    };
    parser.program()?;
    let eof = parser.peek().span;
    let mut circuit = parser.circuit.ok_or_else(|| {
        ParseError::expecting(eof, "program declares no register", &["qreg declaration"])
    })?;
    circuit.set_measured(parser.measure_span.is_some());
    Ok(circuit)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.advance();
        if std::mem::discriminant(&t.tok) == std::mem::discriminant(&want) {
            Ok(t)
        } else {
            Err(ParseError::expecting(
                t.span,
                format!("unexpected {}", t.tok.describe()),
                &[what],
            ))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        let t = self.advance();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.span)),
            other => Err(ParseError::expecting(
                t.span,
                format!("unexpected {}", other.describe()),
                &[what],
            )),
        }
    }

    fn int(&mut self, what: &str) -> Result<(usize, SourceSpan), ParseError> {
        let t = self.advance();
        match t.tok {
            Tok::Int(Some(v)) => usize::try_from(v)
                .map(|v| (v, t.span))
                .map_err(|_| ParseError::new(t.span, "integer literal too large")),
            Tok::Int(None) => Err(ParseError::new(t.span, "integer literal too large")),
            other => Err(ParseError::expecting(
                t.span,
                format!("unexpected {}", other.describe()),
                &[what],
            )),
        }
    }

    fn program(&mut self) -> Result<(), ParseError> {
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => return Ok(()),
                Tok::Ident(word) => {
                    if self.measure_span.is_some() {
                        return Err(ParseError::new(
                            t.span,
                            "statement after measure; measure must be the last statement",
                        ));
                    }
                    match word.as_str() {
                        "qreg" => self.decl()?,
                        "measure" => self.measure()?,
                        _ => self.gatecall()?,
                    }
                }
                other => {
                    return Err(ParseError::expecting(
                        t.span,
                        format!("unexpected {}", other.describe()),
                        &["qreg", "gate call", "measure"],
                    ))
                }
            }
        }
    }

    fn decl(&mut self) -> Result<(), ParseError> {
        let kw = self.advance();
        let (name, _) = self.ident("register name")?;
        self.expect(Tok::LBracket, "'['")?;
        let (size, size_span) = self.int("register size")?;
        self.expect(Tok::RBracket, "']'")?;
        let semi = self.expect(Tok::Semi, "';'")?;
        let span = kw.span.to(semi.span);
        if let Some(existing) = &self.register {
            return Err(ParseError::new(
                span,
                format!(
                    "duplicate qreg {name:?}; register {:?} is already declared and only one is allowed",
                    existing.name
                ),
            ));
        }
        if size == 0 {
            return Err(ParseError::new(size_span, "register size must be at least 1"));
        }
        self.circuit = Some(
            Circuit::new(name.clone(), size).map_err(|e| ParseError::new(span, e.to_string()))?,
        );
        self.register = Some(Register { name, size });
        Ok(())
    }

    fn measure(&mut self) -> Result<(), ParseError> {
        let kw = self.advance();
        let semi = self.expect(Tok::Semi, "';'")?;
        self.measure_span = Some(kw.span.to(semi.span));
        Ok(())
    }

    fn target(&mut self) -> Result<Vec<usize>, ParseError> {
        let (name, name_span) = self.ident("register target")?;
        let register = match &self.register {
            Some(r) if r.name == name => r,
            Some(r) => {
                return Err(ParseError::new(
                    name_span,
                    format!("undeclared register {name:?} (declared: {:?})", r.name),
                ))
            }
            None => {
                return Err(ParseError::new(
                    name_span,
                    format!("undeclared register {name:?}"),
                ))
            }
        };
        let size = register.size;
        if self.peek().tok != Tok::LBracket {
            return Ok((0..size).collect());
        }
        self.advance();
        let (index, index_span) = self.int("wire index")?;
        self.expect(Tok::RBracket, "']'")?;
        if index >= size {
            return Err(ParseError::new(
                index_span,
                format!("index {index} out of range for {name}[{size}]"),
            ));
        }
        Ok(vec![index])
    }

    fn gatecall(&mut self) -> Result<(), ParseError> {
        let (name, name_span) = self.ident("gate name")?;
        let gate = DslGate::lookup(&name).ok_or_else(|| {
            ParseError::expecting(name_span, format!("unknown gate {name:?}"), &GATE_NAMES)
        })?;
        self.expect(Tok::LParen, "'('")?;
        let mut targets = vec![self.target()?];
        while self.peek().tok == Tok::Comma {
            self.advance();
            targets.push(self.target()?);
        }
        self.expect(Tok::RParen, "')' or ','")?;
        let semi = self.expect(Tok::Semi, "';'")?;
        let span = name_span.to(semi.span);

        let gate = gate.gate();
        let wires: Vec<usize> = targets.concat();
        for (i, w) in wires.iter().enumerate() {
            if wires[..i].contains(w) {
                return Err(ParseError::new(span, format!("wire {w} used twice in one gate")));
            }
        }

        let stage = if gate.arity() == 1 {
            if wires.len() > 1 {
                StageOp::broadcast(gate, wires)
            } else {
                StageOp::gate(gate, wires)
            }
        } else {
            if wires.len() != gate.arity() {
                return Err(ParseError::new(
                    span,
                    format!(
                        "arity mismatch: {} needs {} targets, got {}",
                        name.to_ascii_uppercase(),
                        gate.arity(),
                        wires.len()
                    ),
                ));
            }
            StageOp::gate(gate, wires)
        };
        self.circuit
            .as_mut()
            .expect("register declared, so circuit exists")
            .push(stage)
            .map_err(|e| ParseError::new(span, e.to_string()))
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Targets<'a> {
    register: &'a str,
    wires: &'a [usize],
    n: usize,
    broadcast: bool,
}

impl fmt::Display for Targets<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let covers_register = self.wires.iter().copied().eq(0..self.n);
        if self.broadcast && covers_register {
            return f.write_str(self.register);
        }
        for (i, w) in self.wires.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}[{w}]", self.register)?;
        }
        Ok(())
    }
}

/// Canonical program text: one statement per line. Stage labels are not
/// part of the language; parsing the output yields gate-named labels.
pub fn serialize(circuit: &Circuit) -> Result<String, SerializeError> {
    let register = if is_identifier(circuit.name()) {
        circuit.name()
    } else {
        "q"
    };
    let n = circuit.qubit_count();
    let mut out = format!("qreg {register}[{n}];\n");
    for stage in circuit.stages() {
        let unsupported = || SerializeError::Unsupported {
            label: stage.label().to_string(),
        };
        let (gate, broadcast) = match stage.kind() {
            StageKind::Gate(g) => (g, false),
            StageKind::Broadcast(g) => (g, stage.wires().len() > 1),
            StageKind::Composite(_) => return Err(unsupported()),
        };
        let dsl = DslGate::from_gate(gate).ok_or_else(unsupported)?;
        let targets = Targets {
            register,
            wires: stage.wires(),
            n,
            broadcast,
        };
        out.push_str(&format!("{}({targets});\n", dsl.symbol()));
    }
    if circuit.measured() {
        out.push_str("measure;\n");
    }
    Ok(out)
}
