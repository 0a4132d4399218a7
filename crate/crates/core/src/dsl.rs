//! Text format for open parity games and diagram terms.
//!
//! A source file is a sequence of `opg` and `diagram` definitions:
//!
//! ```text
//! opg A : (1,0) -> (2,0) {
//!   maxprio 4;
//!   node s E;
//!   in.r1 -> s @ 0;
//!   s -> out.r1 @ 3;
//!   s -> out.r2 @ 2;
//! }
//!
//! diagram d = A ; (B + C);
//! ```
//!
//! A declared type `(a,b) -> (c,d)` fixes the interface arities: `in.r1..a`,
//! `out.l1..b`, `out.r1..c`, `in.l1..d`. Interface nodes are implicit and
//! owned by the left player; `node` declarations list only internal nodes.
//! Exits receive their zero self-loop automatically, and writing any other
//! edge out of an exit is an error. `maxprio` must be even when given and
//! defaults to the smallest even cap covering the priorities used.
//!
//! In terms, `+` binds tighter than `;` and both associate to the left. A
//! name refers to an `opg` or to a diagram defined earlier in the file.
//! Comments run from `#` to the end of the line.

use std::collections::BTreeMap;
use std::fmt;

use crate::diagram::{type_of, DiagramTerm, InterfaceType};
use crate::opg::{Interface, OpenParityGame};
use crate::orders::{Priority, PrioritySpace};
use crate::solver::{Edge, Owner, ParityGame};

#[derive(Debug, thiserror::Error)]
pub enum DslError {
    #[error("line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("in {def}: {message}")]
    Semantic { def: String, message: String },
}

impl DslError {
    fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        DslError::Syntax {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    fn semantic(def: &str, message: impl Into<String>) -> Self {
        DslError::Semantic {
            def: def.to_string(),
            message: message.into(),
        }
    }
}

/// One endpoint of an edge as written in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Named(String),
    EntranceRight(usize),
    EntranceLeft(usize),
    ExitRight(usize),
    ExitLeft(usize),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Named(n) => write!(f, "{n}"),
            Endpoint::EntranceRight(i) => write!(f, "in.r{i}"),
            Endpoint::EntranceLeft(i) => write!(f, "in.l{i}"),
            Endpoint::ExitRight(i) => write!(f, "out.r{i}"),
            Endpoint::ExitLeft(i) => write!(f, "out.l{i}"),
        }
    }
}

/// An `opg` definition together with its resolved game.
///
/// Node ids in `game` follow the layout: entrances right, entrances left,
/// exits right, exits left, then the named nodes in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpgDef {
    pub name: String,
    pub ty: InterfaceType,
    pub max_priority: Priority,
    pub node_names: Vec<String>,
    pub node_owners: Vec<Owner>,
    pub edges: Vec<(Endpoint, Endpoint, Priority)>,
    pub game: OpenParityGame,
}

/// A diagram term as written, before name resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermAst {
    Ref(String),
    Seq(Box<TermAst>, Box<TermAst>),
    Sum(Box<TermAst>, Box<TermAst>),
}

/// A `diagram` definition with its resolved, type-checked term.
///
/// Every atom in `term` carries the diagram-wide priority space, the join
/// of the spaces of the games it mentions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramDef {
    pub name: String,
    pub term_ast: TermAst,
    pub term: DiagramTerm,
    pub ty: InterfaceType,
}

/// A parsed and resolved source file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceFile {
    pub opgs: Vec<OpgDef>,
    pub diagrams: Vec<DiagramDef>,
}

impl SourceFile {
    pub fn opg(&self, name: &str) -> Option<&OpgDef> {
        self.opgs.iter().find(|d| d.name == name)
    }

    pub fn diagram(&self, name: &str) -> Option<&DiagramDef> {
        self.diagrams.iter().find(|d| d.name == name)
    }

    /// Renders the file in the canonical layout. Parsing the result gives
    /// back an equal `SourceFile`.
    pub fn print(&self) -> String {
        let mut out = String::new();
        for def in &self.opgs {
            if !out.is_empty() {
                out.push('\n');
            }
            print_opg(def, &mut out);
        }
        for def in &self.diagrams {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!(
                "diagram {} = {};\n",
                def.name,
                print_term(&def.term_ast)
            ));
        }
        out
    }
}

impl fmt::Display for SourceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

fn print_opg(def: &OpgDef, out: &mut String) {
    let (a, b) = def.ty.dom;
    let (c, d) = def.ty.cod;
    out.push_str(&format!("opg {} : ({a},{b}) -> ({c},{d}) {{\n", def.name));
    out.push_str(&format!("  maxprio {};\n", def.max_priority));
    for (name, owner) in def.node_names.iter().zip(&def.node_owners) {
        let tag = match owner {
            Owner::Exists => 'E',
            Owner::Forall => 'A',
        };
        out.push_str(&format!("  node {name} {tag};\n"));
    }
    for (from, to, p) in &def.edges {
        out.push_str(&format!("  {from} -> {to} @ {p};\n"));
    }
    out.push_str("}\n");
}

fn print_term(t: &TermAst) -> String {
    // Precedence: atoms 3, sums 2, seqs 1. A child needs parentheses when
    // it binds looser than its parent, or equally on the right of the same
    // left-associative operator.
    fn go(t: &TermAst, parent: u8, right: bool) -> String {
        let (prec, body) = match t {
            TermAst::Ref(n) => (3, n.clone()),
            TermAst::Sum(l, r) => (2, format!("{} + {}", go(l, 2, false), go(r, 2, true))),
            TermAst::Seq(l, r) => (1, format!("{} ; {}", go(l, 1, false), go(r, 1, true))),
        };
        if prec < parent || (prec == parent && right && prec < 3) {
            format!("({body})")
        } else {
            body
        }
    }
    go(t, 0, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u32),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Arrow,
    At,
    Plus,
    Eq,
    Dot,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Nat(n) => write!(f, "`{n}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::At => write!(f, "`@`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Dot => write!(f, "`.`"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let pos = Pos { line, col };
        match ch {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(s), pos));
            }
            c if c.is_ascii_digit() => {
                let mut n: u64 = 0;
                while let Some(&c) = chars.peek() {
                    if let Some(d) = c.to_digit(10) {
                        n = n * 10 + u64::from(d);
                        if n > u64::from(u32::MAX) {
                            return Err(DslError::syntax(pos, "number too large"));
                        }
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Nat(n as u32), pos));
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    toks.push((Tok::Arrow, pos));
                } else {
                    return Err(DslError::syntax(pos, "expected `->`"));
                }
            }
            _ => {
                let tok = match ch {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    '@' => Tok::At,
                    '+' => Tok::Plus,
                    '=' => Tok::Eq,
                    '.' => Tok::Dot,
                    other => {
                        return Err(DslError::syntax(
                            pos,
                            format!("unexpected character `{other}`"),
                        ))
                    }
                };
                chars.next();
                col += 1;
                toks.push((tok, pos));
            }
        }
    }
    Ok(toks)
}

const KEYWORDS: [&str; 6] = ["opg", "diagram", "node", "maxprio", "in", "out"];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<(), DslError> {
        let pos = self.pos();
        match self.next() {
            Some(t) if &t == want => Ok(()),
            Some(t) => Err(DslError::syntax(pos, format!("expected {want}, found {t}"))),
            None => Err(DslError::syntax(
                pos,
                format!("expected {want}, found end of input"),
            )),
        }
    }

    fn nat(&mut self) -> Result<u32, DslError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Nat(n)) => Ok(n),
            Some(t) => Err(DslError::syntax(
                pos,
                format!("expected a number, found {t}"),
            )),
            None => Err(DslError::syntax(
                pos,
                "expected a number, found end of input",
            )),
        }
    }

    fn name(&mut self) -> Result<String, DslError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => Ok(s),
            Some(Tok::Ident(s)) => Err(DslError::syntax(
                pos,
                format!("`{s}` is a keyword and cannot be used as a name"),
            )),
            Some(t) => Err(DslError::syntax(pos, format!("expected a name, found {t}"))),
            None => Err(DslError::syntax(pos, "expected a name, found end of input")),
        }
    }

    fn type_pair(&mut self) -> Result<(usize, usize), DslError> {
        self.expect(&Tok::LParen)?;
        let a = self.nat()? as usize;
        self.expect(&Tok::Comma)?;
        let b = self.nat()? as usize;
        self.expect(&Tok::RParen)?;
        Ok((a, b))
    }

    /// `in.r1`, `out.l 2`, or a node name. The side and index may be fused
    /// into one identifier or written with the index as a separate number.
    fn endpoint(&mut self) -> Result<Endpoint, DslError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(s)) if s == "in" || s == "out" => {
                let entrance = s == "in";
                self.next();
                self.expect(&Tok::Dot)?;
                let spos = self.pos();
                let side = match self.next() {
                    Some(Tok::Ident(side)) => side,
                    Some(t) => {
                        return Err(DslError::syntax(
                            spos,
                            format!("expected `r` or `l` after the dot, found {t}"),
                        ))
                    }
                    None => {
                        return Err(DslError::syntax(spos, "expected `r` or `l` after the dot"))
                    }
                };
                let (right, index) = if side == "r" || side == "l" {
                    (side == "r", self.nat()? as usize)
                } else {
                    let (head, digits) = side.split_at(1);
                    if (head == "r" || head == "l")
                        && !digits.is_empty()
                        && digits.chars().all(|c| c.is_ascii_digit())
                    {
                        let index: usize = digits
                            .parse()
                            .map_err(|_| DslError::syntax(spos, "interface index too large"))?;
                        (head == "r", index)
                    } else {
                        return Err(DslError::syntax(
                            spos,
                            format!("expected `r` or `l` after the dot, found `{side}`"),
                        ));
                    }
                };
                if index == 0 {
                    return Err(DslError::syntax(spos, "interface indices start at 1"));
                }
                Ok(match (entrance, right) {
                    (true, true) => Endpoint::EntranceRight(index),
                    (true, false) => Endpoint::EntranceLeft(index),
                    (false, true) => Endpoint::ExitRight(index),
                    (false, false) => Endpoint::ExitLeft(index),
                })
            }
            Some(Tok::Ident(_)) => Ok(Endpoint::Named(self.name()?)),
            Some(t) => Err(DslError::syntax(
                pos,
                format!("expected an endpoint, found {t}"),
            )),
            None => Err(DslError::syntax(
                pos,
                "expected an endpoint, found end of input",
            )),
        }
    }

    fn opg_def(&mut self) -> Result<RawOpg, DslError> {
        let name = self.name()?;
        self.expect(&Tok::Colon)?;
        let dom = self.type_pair()?;
        self.expect(&Tok::Arrow)?;
        let cod = self.type_pair()?;
        self.expect(&Tok::LBrace)?;

        let mut maxprio = None;
        if self.peek() == Some(&Tok::Ident("maxprio".into())) {
            self.next();
            let pos = self.pos();
            maxprio = Some((self.nat()?, pos));
            self.expect(&Tok::Semi)?;
        }

        let mut nodes: Vec<(String, Owner, Pos)> = Vec::new();
        while self.peek() == Some(&Tok::Ident("node".into())) {
            self.next();
            let pos = self.pos();
            let name = self.name()?;
            let opos = self.pos();
            let owner = match self.next() {
                Some(Tok::Ident(tag)) if tag == "E" => Owner::Exists,
                Some(Tok::Ident(tag)) if tag == "A" => Owner::Forall,
                Some(t) => {
                    return Err(DslError::syntax(
                        opos,
                        format!("expected owner `E` or `A`, found {t}"),
                    ))
                }
                None => return Err(DslError::syntax(opos, "expected owner `E` or `A`")),
            };
            self.expect(&Tok::Semi)?;
            nodes.push((name, owner, pos));
        }

        let mut edges: Vec<(Endpoint, Endpoint, Priority, Pos)> = Vec::new();
        while self.peek() != Some(&Tok::RBrace) {
            let pos = self.pos();
            let from = self.endpoint()?;
            self.expect(&Tok::Arrow)?;
            let to = self.endpoint()?;
            self.expect(&Tok::At)?;
            let p = self.nat()?;
            self.expect(&Tok::Semi)?;
            edges.push((from, to, p, pos));
        }
        self.expect(&Tok::RBrace)?;

        Ok(RawOpg {
            name,
            ty: InterfaceType { dom, cod },
            maxprio,
            nodes,
            edges,
        })
    }

    fn term(&mut self) -> Result<TermAst, DslError> {
        let mut acc = self.sum_term()?;
        // A `;` continues the term only when something that can start a
        // term follows; otherwise it terminates the diagram definition.
        while self.peek() == Some(&Tok::Semi) {
            let continues = match self.peek2() {
                Some(Tok::LParen) => true,
                Some(Tok::Ident(s)) => !KEYWORDS.contains(&s.as_str()),
                _ => false,
            };
            if !continues {
                break;
            }
            self.next();
            let rhs = self.sum_term()?;
            acc = TermAst::Seq(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn sum_term(&mut self) -> Result<TermAst, DslError> {
        let mut acc = self.primary_term()?;
        while self.peek() == Some(&Tok::Plus) {
            self.next();
            let rhs = self.primary_term()?;
            acc = TermAst::Sum(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn primary_term(&mut self) -> Result<TermAst, DslError> {
        if self.peek() == Some(&Tok::LParen) {
            self.next();
            let t = self.term()?;
            self.expect(&Tok::RParen)?;
            Ok(t)
        } else {
            Ok(TermAst::Ref(self.name()?))
        }
    }
}

struct RawOpg {
    name: String,
    ty: InterfaceType,
    maxprio: Option<(Priority, Pos)>,
    nodes: Vec<(String, Owner, Pos)>,
    edges: Vec<(Endpoint, Endpoint, Priority, Pos)>,
}

fn resolve_opg(raw: RawOpg) -> Result<OpgDef, DslError> {
    let def = raw.name.clone();
    let (a, b) = raw.ty.dom;
    let (c, d) = raw.ty.cod;

    // Interface nodes first: entrances right, entrances left, exits right,
    // exits left. Named nodes follow in declaration order.
    let num_interface = a + d + c + b;
    let mut names: BTreeMap<String, usize> = BTreeMap::new();
    let mut owners = vec![Owner::Exists; num_interface];
    let mut node_names = Vec::new();
    let mut node_owners = Vec::new();
    for (name, owner, _) in &raw.nodes {
        if names
            .insert(name.clone(), num_interface + node_names.len())
            .is_some()
        {
            return Err(DslError::semantic(
                &def,
                format!("node `{name}` declared twice"),
            ));
        }
        node_names.push(name.clone());
        node_owners.push(*owner);
        owners.push(*owner);
    }

    let interface = Interface {
        entrances_right: (0..a).collect(),
        entrances_left: (a..a + d).collect(),
        exits_right: (a + d..a + d + c).collect(),
        exits_left: (a + d + c..num_interface).collect(),
    };

    let locate = |e: &Endpoint| -> Result<usize, DslError> {
        match e {
            Endpoint::Named(n) => names
                .get(n)
                .copied()
                .ok_or_else(|| DslError::semantic(&def, format!("unknown node `{n}`"))),
            Endpoint::EntranceRight(i) if *i <= a => Ok(i - 1),
            Endpoint::EntranceLeft(i) if *i <= d => Ok(a + i - 1),
            Endpoint::ExitRight(i) if *i <= c => Ok(a + d + i - 1),
            Endpoint::ExitLeft(i) if *i <= b => Ok(a + d + c + i - 1),
            other => Err(DslError::semantic(
                &def,
                format!("`{other}` is outside the declared type {}", raw.ty),
            )),
        }
    };

    let mut edges = Vec::new();
    let mut max_used: Priority = 0;
    for (from, to, p, _) in &raw.edges {
        let from_id = locate(from)?;
        if matches!(from, Endpoint::ExitRight(_) | Endpoint::ExitLeft(_)) {
            return Err(DslError::semantic(
                &def,
                format!("`{from}` is an exit and must be a sink"),
            ));
        }
        let to_id = locate(to)?;
        max_used = max_used.max(*p);
        edges.push(Edge {
            from: from_id,
            to: to_id,
            priority: *p,
        });
    }
    for &x in interface.exits_right.iter().chain(&interface.exits_left) {
        edges.push(Edge {
            from: x,
            to: x,
            priority: 0,
        });
    }

    let max_priority = match raw.maxprio {
        Some((m, pos)) => {
            if m % 2 != 0 || m < 2 {
                return Err(DslError::syntax(pos, "maxprio must be even and at least 2"));
            }
            if max_used > m {
                return Err(DslError::semantic(
                    &def,
                    format!("priority {max_used} exceeds maxprio {m}"),
                ));
            }
            m
        }
        None => PrioritySpace::covering(max_used).max(),
    };
    let space =
        PrioritySpace::new(max_priority).map_err(|e| DslError::semantic(&def, e.to_string()))?;

    let game = ParityGame::new(owners, edges, space).map_err(|e| {
        let message = match &e {
            crate::solver::GameError::NoSuccessor(id) => {
                format!(
                    "{} has no outgoing edge",
                    describe_node(*id, &raw.ty, &node_names)
                )
            }
            crate::solver::GameError::DuplicateEdge(from, to) => format!(
                "duplicate edge {} -> {}",
                describe_node(*from, &raw.ty, &node_names),
                describe_node(*to, &raw.ty, &node_names)
            ),
            other => other.to_string(),
        };
        DslError::semantic(&def, message)
    })?;
    let game = OpenParityGame::new(game, interface)
        .map_err(|e| DslError::semantic(&def, e.to_string()))?;

    Ok(OpgDef {
        name: raw.name,
        ty: raw.ty,
        max_priority,
        node_names,
        node_owners,
        edges: raw
            .edges
            .into_iter()
            .map(|(from, to, p, _)| (from, to, p))
            .collect(),
        game,
    })
}

/// Readable name for a node id under the interface-first layout.
fn describe_node(id: usize, ty: &InterfaceType, node_names: &[String]) -> String {
    let (a, b) = ty.dom;
    let (c, d) = ty.cod;
    if id < a {
        format!("in.r{}", id + 1)
    } else if id < a + d {
        format!("in.l{}", id - a + 1)
    } else if id < a + d + c {
        format!("out.r{}", id - a - d + 1)
    } else if id < a + d + c + b {
        format!("out.l{}", id - a - d - c + 1)
    } else {
        format!("node `{}`", node_names[id - a - d - c - b])
    }
}

fn atom_spaces(t: &DiagramTerm, join: &mut PrioritySpace) {
    match t {
        DiagramTerm::Atom(_, g) => *join = join.join(g.game().space()),
        DiagramTerm::Seq(l, r) | DiagramTerm::Sum(l, r) => {
            atom_spaces(l, join);
            atom_spaces(r, join);
        }
    }
}

fn lift_atoms(t: &DiagramTerm, space: PrioritySpace) -> DiagramTerm {
    match t {
        DiagramTerm::Atom(name, g) => DiagramTerm::Atom(name.clone(), g.lift_space(space)),
        DiagramTerm::Seq(l, r) => DiagramTerm::Seq(
            Box::new(lift_atoms(l, space)),
            Box::new(lift_atoms(r, space)),
        ),
        DiagramTerm::Sum(l, r) => DiagramTerm::Sum(
            Box::new(lift_atoms(l, space)),
            Box::new(lift_atoms(r, space)),
        ),
    }
}

fn resolve_term(ast: &TermAst, file: &SourceFile, def: &str) -> Result<DiagramTerm, DslError> {
    match ast {
        TermAst::Ref(name) => {
            if let Some(opg) = file.opg(name) {
                Ok(DiagramTerm::Atom(name.clone(), opg.game.clone()))
            } else if let Some(diag) = file.diagram(name) {
                Ok(diag.term.clone())
            } else {
                Err(DslError::semantic(def, format!("unknown name `{name}`")))
            }
        }
        TermAst::Seq(l, r) => Ok(DiagramTerm::Seq(
            Box::new(resolve_term(l, file, def)?),
            Box::new(resolve_term(r, file, def)?),
        )),
        TermAst::Sum(l, r) => Ok(DiagramTerm::Sum(
            Box::new(resolve_term(l, file, def)?),
            Box::new(resolve_term(r, file, def)?),
        )),
    }
}

/// Parses, resolves, and type-checks a source file.
pub fn parse_source(text: &str) -> Result<SourceFile, DslError> {
    let toks = lex(text)?;
    let end = toks
        .last()
        .map(|(_, p)| Pos {
            line: p.line,
            col: p.col + 1,
        })
        .unwrap_or(Pos { line: 1, col: 1 });
    let mut parser = Parser { toks, at: 0, end };

    let mut file = SourceFile::default();
    loop {
        let pos = parser.pos();
        match parser.next() {
            None => break,
            Some(Tok::Ident(kw)) if kw == "opg" => {
                let raw = parser.opg_def()?;
                let def = resolve_opg(raw)?;
                if file.opg(&def.name).is_some() || file.diagram(&def.name).is_some() {
                    return Err(DslError::semantic(
                        &def.name,
                        "a definition with this name already exists",
                    ));
                }
                file.opgs.push(def);
            }
            Some(Tok::Ident(kw)) if kw == "diagram" => {
                let name = parser.name()?;
                parser.expect(&Tok::Eq)?;
                let term_ast = parser.term()?;
                parser.expect(&Tok::Semi)?;
                if file.opg(&name).is_some() || file.diagram(&name).is_some() {
                    return Err(DslError::semantic(
                        &name,
                        "a definition with this name already exists",
                    ));
                }
                let term = resolve_term(&term_ast, &file, &name)?;
                let mut space = PrioritySpace::covering(0);
                atom_spaces(&term, &mut space);
                let term = lift_atoms(&term, space);
                let ty = type_of(&term).map_err(|e| DslError::semantic(&name, e.to_string()))?;
                file.diagrams.push(DiagramDef {
                    name,
                    term_ast,
                    term,
                    ty,
                });
            }
            Some(t) => {
                return Err(DslError::syntax(
                    pos,
                    format!("expected `opg` or `diagram`, found {t}"),
                ))
            }
        }
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opg::{front_of, EntranceRef};
    use crate::orders::{DomainElement, ExitRef, ResultSet};

    const DUEL: &str = "
        # the running two-player tussle
        opg C : (1,1) -> (1,0) {
          maxprio 4;
          node a E;
          node c E;
          node d A;
          node b A;
          in.r1 -> a @ 0;
          a -> c @ 1;
          c -> d @ 0;
          c -> out.r1 @ 0;
          d -> b @ 1;
          d -> out.r1 @ 2;
          b -> a @ 3;
          b -> out.l1 @ 0;
        }
    ";

    #[test]
    fn duel_source_parses_and_solves() {
        let file = parse_source(DUEL).unwrap();
        let def = file.opg("C").unwrap();
        assert_eq!(def.ty.dom, (1, 1));
        assert_eq!(def.ty.cod, (1, 0));
        assert_eq!(def.max_priority, 4);
        assert_eq!(def.game.game().num_nodes(), 7);
        assert!(def.game.validate(true).is_empty());

        let front = front_of(&def.game, EntranceRef::right(1)).unwrap();
        let want = vec![ResultSet::new(vec![DomainElement::ExitAt(ExitRef::right(1), 1)]).unwrap()];
        assert_eq!(front.results(), &want[..]);
    }

    #[test]
    fn exit_self_loops_are_implicit() {
        let file = parse_source(DUEL).unwrap();
        let game = &file.opg("C").unwrap().game;
        for (_, node) in game.exits() {
            let succ = game.game().successors(node);
            assert_eq!(succ.len(), 1);
            assert_eq!(succ[0].to, node);
            assert_eq!(succ[0].priority, 0);
        }
    }

    #[test]
    fn maxprio_defaults_to_covering_even() {
        let text = "
            opg w : (1,0) -> (1,0) {
              node m E;
              in.r1 -> m @ 0;
              m -> out.r1 @ 3;
            }
        ";
        let file = parse_source(text).unwrap();
        assert_eq!(file.opg("w").unwrap().max_priority, 4);
        assert_eq!(file.opg("w").unwrap().game.game().space().max(), 4);
    }

    #[test]
    fn detached_index_form_is_accepted() {
        let fused = "opg w : (1,0) -> (1,0) { in.r1 -> out.r1 @ 2; }";
        let spaced = "opg w : (1,0) -> (1,0) { in.r 1 -> out.r 1 @ 2; }";
        assert_eq!(
            parse_source(fused).unwrap().opg("w").unwrap().game,
            parse_source(spaced).unwrap().opg("w").unwrap().game
        );
    }

    fn wire(name: &str) -> String {
        format!("opg {name} : (1,0) -> (1,0) {{ in.r1 -> out.r1 @ 2; }}")
    }

    #[test]
    fn plus_binds_tighter_than_seq() {
        let text = format!(
            "{}\n{}\n{}\n{}\ndiagram d = f ; x + y;",
            "opg f : (1,0) -> (2,0) { node s E; in.r1 -> s @ 0; s -> out.r1 @ 2; s -> out.r2 @ 2; }",
            wire("x"),
            wire("y"),
            wire("z"),
        );
        let file = parse_source(&text).unwrap();
        let d = file.diagram("d").unwrap();
        assert_eq!(
            d.term_ast,
            TermAst::Seq(
                Box::new(TermAst::Ref("f".into())),
                Box::new(TermAst::Sum(
                    Box::new(TermAst::Ref("x".into())),
                    Box::new(TermAst::Ref("y".into()))
                ))
            )
        );
        assert_eq!(d.ty.dom, (1, 0));
        assert_eq!(d.ty.cod, (2, 0));
    }

    #[test]
    fn operators_associate_left() {
        let text = format!(
            "{}\n{}\n{}\ndiagram d = x ; y ; z;\ndiagram s = x + y + z;",
            wire("x"),
            wire("y"),
            wire("z")
        );
        let file = parse_source(&text).unwrap();
        let seq = &file.diagram("d").unwrap().term_ast;
        assert_eq!(
            *seq,
            TermAst::Seq(
                Box::new(TermAst::Seq(
                    Box::new(TermAst::Ref("x".into())),
                    Box::new(TermAst::Ref("y".into()))
                )),
                Box::new(TermAst::Ref("z".into()))
            )
        );
        let sum = &file.diagram("s").unwrap().term_ast;
        assert_eq!(
            *sum,
            TermAst::Sum(
                Box::new(TermAst::Sum(
                    Box::new(TermAst::Ref("x".into())),
                    Box::new(TermAst::Ref("y".into()))
                )),
                Box::new(TermAst::Ref("z".into()))
            )
        );
    }

    #[test]
    fn diagrams_may_reference_earlier_diagrams() {
        let text = format!(
            "{}\n{}\ndiagram d = x ; y;\ndiagram e = d ; x;",
            wire("x"),
            wire("y")
        );
        let file = parse_source(&text).unwrap();
        let e = &file.diagram("e").unwrap().term;
        // d's resolved term is inlined, so e's term is (x ; y) ; x.
        match e {
            DiagramTerm::Seq(l, _) => assert!(matches!(**l, DiagramTerm::Seq(_, _))),
            other => panic!("expected a sequential composite, got {other:?}"),
        }
    }

    #[test]
    fn diagram_space_is_joined_across_atoms() {
        let text = "
            opg lo : (1,0) -> (1,0) { maxprio 2; in.r1 -> out.r1 @ 1; }
            opg hi : (1,0) -> (1,0) { maxprio 6; in.r1 -> out.r1 @ 5; }
            diagram d = lo ; hi;
        ";
        let file = parse_source(text).unwrap();
        let mut spaces = Vec::new();
        fn collect(t: &DiagramTerm, out: &mut Vec<Priority>) {
            match t {
                DiagramTerm::Atom(_, g) => out.push(g.game().space().max()),
                DiagramTerm::Seq(l, r) | DiagramTerm::Sum(l, r) => {
                    collect(l, out);
                    collect(r, out);
                }
            }
        }
        collect(&file.diagram("d").unwrap().term, &mut spaces);
        assert_eq!(spaces, vec![6, 6]);
        // The standalone definition keeps its own cap.
        assert_eq!(file.opg("lo").unwrap().game.game().space().max(), 2);
    }

    #[test]
    fn print_then_parse_is_identity() {
        let text = format!(
            "{}\n{}\n{}\n{}\ndiagram d = f ; (x + y) ; (y + x);\ndiagram e = (x + (y ; z)) + x;",
            "opg f : (1,0) -> (2,0) { maxprio 4; node s A; in.r1 -> s @ 1; s -> out.r1 @ 3; s -> out.r2 @ 2; }",
            wire("x"),
            wire("y"),
            wire("z"),
        );
        let file = parse_source(&text).unwrap();
        let printed = file.print();
        let reparsed = parse_source(&printed).unwrap();
        assert_eq!(file, reparsed);
        // And printing is a fixed point.
        assert_eq!(printed, reparsed.print());
    }

    #[test]
    fn printed_duel_roundtrips() {
        let file = parse_source(DUEL).unwrap();
        let reparsed = parse_source(&file.print()).unwrap();
        assert_eq!(file, reparsed);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_source("opg w : (1,0) -> (1,0) {\n  in.r1 -> @ 2;\n}").unwrap_err();
        match err {
            DslError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert!(col > 1);
            }
            other => panic!("expected a syntax error, got {other}"),
        }
        let err = parse_source("opg w : (1,0) -> (1,0) { in.r1 -> out.r1 ! 2; }").unwrap_err();
        assert!(err.to_string().contains("unexpected character"));
    }

    #[test]
    fn semantic_errors_name_the_definition() {
        let unknown = parse_source("opg w : (1,0) -> (1,0) { in.r1 -> ghost @ 0; }").unwrap_err();
        assert!(unknown.to_string().contains("in w"));
        assert!(unknown.to_string().contains("ghost"));

        let out_of_range =
            parse_source("opg w : (1,0) -> (1,0) { in.r2 -> out.r1 @ 0; in.r1 -> out.r1 @ 0; }")
                .unwrap_err();
        assert!(out_of_range.to_string().contains("in.r2"));

        let exit_source =
            parse_source("opg w : (1,0) -> (1,0) { in.r1 -> out.r1 @ 0; out.r1 -> in.r1 @ 0; }")
                .unwrap_err();
        assert!(exit_source.to_string().contains("must be a sink"));

        let dup_edge =
            parse_source("opg w : (1,0) -> (1,0) { in.r1 -> out.r1 @ 0; in.r1 -> out.r1 @ 2; }")
                .unwrap_err();
        assert!(dup_edge.to_string().contains("duplicate edge"));

        let no_succ = parse_source(
            "opg w : (1,0) -> (1,0) { node stuck E; node lost A; in.r1 -> stuck @ 0; stuck -> out.r1 @ 0; }",
        )
        .unwrap_err();
        assert!(no_succ.to_string().contains("lost"));
        assert!(no_succ.to_string().contains("no outgoing edge"));

        let over_cap =
            parse_source("opg w : (1,0) -> (1,0) { maxprio 2; in.r1 -> out.r1 @ 3; }").unwrap_err();
        assert!(over_cap.to_string().contains("exceeds maxprio"));

        let odd_cap =
            parse_source("opg w : (1,0) -> (1,0) { maxprio 3; in.r1 -> out.r1 @ 1; }").unwrap_err();
        assert!(odd_cap.to_string().contains("even"));
    }

    #[test]
    fn term_errors_name_the_diagram() {
        let unknown = parse_source(&format!("{}\ndiagram d = x ; ghost;", wire("x"))).unwrap_err();
        assert!(unknown.to_string().contains("in d"));

        let mismatch = parse_source(&format!(
            "{}\n{}\ndiagram d = x ; big;",
            wire("x"),
            "opg big : (2,0) -> (2,0) { in.r1 -> out.r1 @ 0; in.r2 -> out.r2 @ 0; }"
        ))
        .unwrap_err();
        assert!(mismatch.to_string().contains("in d"));

        let dup = parse_source(&format!("{}\ndiagram x = x;", wire("x"))).unwrap_err();
        assert!(dup.to_string().contains("already exists"));
    }

    #[test]
    fn keywords_are_not_names() {
        let err = parse_source("opg node : (1,0) -> (1,0) { in.r1 -> out.r1 @ 0; }").unwrap_err();
        assert!(err.to_string().contains("keyword"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "
            # leading comment
            opg w : (1,0) -> (1,0) {  # trailing comment
              in.r1 -> out.r1 @ 2;    # after an edge
            }
        ";
        assert!(parse_source(text).is_ok());
    }

    #[test]
    fn empty_file_is_valid() {
        let file = parse_source("").unwrap();
        assert!(file.opgs.is_empty());
        assert!(file.diagrams.is_empty());
    }
}
