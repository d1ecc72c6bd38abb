use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use crate::behavior::IdlePolicy;
use crate::expr::{BinOp, Expr, UnOp};
use crate::kernel::{DataTypeDef, TypeExpr, TypeShape, Value};
use crate::traces::Party;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

type PResult<T> = Result<T, SyntaxError>;

const RESERVED: &[&str] = &["div", "mod", "and", "or", "not", "true", "false", "env"];

pub fn parse_document(src: &str) -> PResult<ModelDocument> {
    let tokens = tokenize(src)?;
    let mut p = Parser { toks: &tokens, i: 0 };
    p.document()
}

pub fn parse_expr(src: &str) -> PResult<Expr> {
    let tokens = tokenize(src)?;
    let mut p = Parser { toks: &tokens, i: 0 };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_value(src: &str) -> PResult<Value> {
    let tokens = tokenize(src)?;
    let mut p = Parser { toks: &tokens, i: 0 };
    let v = p.value()?;
    p.expect_eof()?;
    Ok(v)
}

/// Parses `Ch = [v, ...] [..] ...; Ch2 = ...` into per-channel interval lists.
pub fn parse_stream_spec(src: &str) -> PResult<BTreeMap<String, Vec<Vec<Value>>>> {
    let tokens = tokenize(src)?;
    let mut p = Parser { toks: &tokens, i: 0 };
    let mut out = BTreeMap::new();
    while !p.at(&Tok::Eof) {
        let (channel, _) = p.ident()?;
        p.expect(&Tok::Equals)?;
        let mut intervals = Vec::new();
        while p.at(&Tok::LBracket) {
            intervals.push(p.value_list()?);
        }
        out.insert(channel, intervals);
        if !p.eat(&Tok::Comma) {
            break;
        }
    }
    p.expect_eof()?;
    Ok(out)
}

fn tokenize(src: &str) -> PResult<Vec<Token>> {
    lex(src).map_err(|e| SyntaxError {
        pos: e.pos,
        message: e.message,
    })
}

struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &'a Token {
        &self.toks[self.i.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, offset: usize) -> &'a Tok {
        &self.toks[(self.i + offset).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.peek().pos
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn advance(&mut self) -> &'a Token {
        let t = self.peek();
        if self.i < self.toks.len() - 1 {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(SyntaxError {
            pos: self.pos(),
            message: format!("expected {expected}, found {}", self.peek().tok.describe()),
        })
    }

    fn expect(&mut self, tok: &Tok) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.error(&Tok::describe(tok))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if self.at(&Tok::Eof) {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match &self.peek().tok {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let pos = self.pos();
                self.advance();
                Ok((s.clone(), pos))
            }
            _ => self.error("identifier"),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        let negative = self.eat(&Tok::Minus);
        match self.peek().tok {
            Tok::Int(n) => {
                self.advance();
                Ok(if negative { -n } else { n })
            }
            _ => self.error("integer"),
        }
    }

    fn count(&mut self) -> PResult<usize> {
        match self.peek().tok {
            Tok::Int(n) if n >= 0 => {
                self.advance();
                Ok(n as usize)
            }
            _ => self.error("non-negative integer"),
        }
    }

    fn document(&mut self) -> PResult<ModelDocument> {
        let mut doc = ModelDocument::default();
        loop {
            let Tok::Ident(kw) = &self.peek().tok else {
                if self.at(&Tok::Eof) {
                    return Ok(doc);
                }
                return self.error("a declaration");
            };
            match kw.as_str() {
                "import" => {
                    self.advance();
                    match &self.peek().tok {
                        Tok::Str(path) => {
                            doc.imports.push(path.clone());
                            self.advance();
                        }
                        _ => return self.error("import path string"),
                    }
                }
                "datatype" => doc.datatypes.push(self.datatype()?),
                "automaton" => doc.automata.push(self.automaton()?),
                "component" => doc.components.push(self.component()?),
                "network" => doc.networks.push(self.network()?),
                "trace" => doc.traces.push(self.trace()?),
                "traceexpr" => doc.trace_exprs.push(self.trace_expr_decl()?),
                "contract" => doc.contracts.push(self.contract()?),
                "refinement" => doc.refinements.push(self.refinement()?),
                _ => return self.error("a declaration"),
            }
        }
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        if self.eat_kw("int") {
            let (lo, hi) = self.int_range()?;
            return Ok(TypeExpr::Int { lo, hi });
        }
        if self.eat_kw("bool") {
            return Ok(TypeExpr::Bool);
        }
        Ok(TypeExpr::Named(self.ident()?.0))
    }

    fn int_range(&mut self) -> PResult<(i64, i64)> {
        self.expect(&Tok::LBracket)?;
        let lo = self.int()?;
        self.expect(&Tok::DotDot)?;
        let hi = self.int()?;
        self.expect(&Tok::RBracket)?;
        Ok((lo, hi))
    }

    fn datatype(&mut self) -> PResult<DataTypeDef> {
        self.expect_kw("datatype")?;
        let (name, _) = self.ident()?;
        self.expect(&Tok::Equals)?;
        let shape = if self.eat_kw("int") {
            let (lo, hi) = self.int_range()?;
            TypeShape::IntRange { lo, hi }
        } else if self.eat_kw("enum") {
            self.expect(&Tok::LBrace)?;
            let mut literals = Vec::new();
            while !self.at(&Tok::RBrace) {
                literals.push(self.ident()?.0);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RBrace)?;
            TypeShape::Enumeration(literals)
        } else if self.eat_kw("record") {
            self.expect(&Tok::LBrace)?;
            let mut fields = Vec::new();
            while !self.at(&Tok::RBrace) {
                let (field, _) = self.ident()?;
                self.expect(&Tok::Colon)?;
                fields.push((field, self.type_expr()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RBrace)?;
            TypeShape::Record(fields)
        } else {
            return self.error("`int`, `enum` or `record`");
        };
        Ok(DataTypeDef { name, shape })
    }

    fn port(&mut self) -> PResult<PortDecl> {
        let (name, pos) = self.ident()?;
        self.expect(&Tok::Colon)?;
        let ty = self.type_expr()?;
        Ok(PortDecl { name, ty, pos })
    }

    fn policy(&mut self) -> PResult<IdlePolicy> {
        if self.eat_kw("idle") {
            Ok(IdlePolicy::Idle)
        } else if self.eat_kw("strict") {
            Ok(IdlePolicy::Strict)
        } else {
            self.error("`idle` or `strict`")
        }
    }

    fn automaton(&mut self) -> PResult<AutomatonDecl> {
        let pos = self.pos();
        self.expect_kw("automaton")?;
        let (name, _) = self.ident()?;
        self.expect(&Tok::LBrace)?;
        let mut a = AutomatonDecl {
            name,
            policy: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            vars: Vec::new(),
            states: Vec::new(),
            transitions: Vec::new(),
            pos,
        };
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("policy") {
                a.policy = Some(self.policy()?);
            } else if self.eat_kw("in") {
                a.inputs.push(self.port()?);
            } else if self.eat_kw("out") {
                a.outputs.push(self.port()?);
            } else if self.eat_kw("var") {
                let (name, pos) = self.ident()?;
                self.expect(&Tok::Colon)?;
                let ty = self.type_expr()?;
                self.expect(&Tok::Equals)?;
                let init = self.expr()?;
                a.vars.push(VarDecl { name, ty, init, pos });
            } else if self.eat_kw("state") {
                let (name, pos) = self.ident()?;
                let initial = self.eat_kw("initial");
                a.states.push(StateDecl { name, initial, pos });
            } else if self.at_kw("transition") {
                a.transitions.push(self.transition()?);
            } else {
                return self.error("automaton item or `}`");
            }
        }
        Ok(a)
    }

    fn transition(&mut self) -> PResult<TransitionDecl> {
        let pos = self.pos();
        self.expect_kw("transition")?;
        let (source, _) = self.ident()?;
        self.expect(&Tok::Arrow)?;
        let (target, _) = self.ident()?;
        let mut t = TransitionDecl {
            source,
            target,
            patterns: Vec::new(),
            guard: None,
            actions: Vec::new(),
            pos,
        };
        if !self.eat(&Tok::Colon) {
            return Ok(t);
        }
        while matches!(self.peek().tok, Tok::Ident(_)) && self.peek_at(1) == &Tok::Question {
            let (channel, _) = self.ident()?;
            self.expect(&Tok::Question)?;
            let (var, _) = self.ident()?;
            t.patterns.push(PatternDecl { channel, var });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        if self.eat(&Tok::LBracket) {
            t.guard = Some(self.expr()?);
            self.expect(&Tok::RBracket)?;
        }
        if self.eat(&Tok::Slash) {
            loop {
                let (name, _) = self.ident()?;
                if self.eat(&Tok::Bang) {
                    t.actions.push(ActionDecl::Emit {
                        channel: name,
                        value: self.expr()?,
                    });
                } else if self.eat(&Tok::Assign) {
                    t.actions.push(ActionDecl::Assign {
                        var: name,
                        value: self.expr()?,
                    });
                } else {
                    return self.error("`!` or `:=`");
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        Ok(t)
    }

    fn component(&mut self) -> PResult<ComponentDecl> {
        let pos = self.pos();
        self.expect_kw("component")?;
        let (name, _) = self.ident()?;
        self.expect(&Tok::LBrace)?;
        let mut c = ComponentDecl {
            name,
            inputs: Vec::new(),
            outputs: Vec::new(),
            behavior: None,
            pos,
        };
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("in") {
                c.inputs.push(self.port()?);
            } else if self.eat_kw("out") {
                c.outputs.push(self.port()?);
            } else if self.eat_kw("behavior") {
                c.behavior = Some(if self.eat_kw("automaton") {
                    BehaviorRef::Automaton(self.ident()?.0)
                } else if self.eat_kw("network") {
                    BehaviorRef::Network(self.ident()?.0)
                } else {
                    return self.error("`automaton` or `network`");
                });
            } else {
                return self.error("component item or `}`");
            }
        }
        Ok(c)
    }

    fn endpoint(&mut self) -> PResult<EndpointRef> {
        let (first, _) = self.ident()?;
        if self.eat(&Tok::Dot) {
            let (port, _) = self.ident()?;
            Ok(EndpointRef {
                instance: Some(first),
                port,
            })
        } else {
            Ok(EndpointRef {
                instance: None,
                port: first,
            })
        }
    }

    fn network(&mut self) -> PResult<NetworkDecl> {
        let pos = self.pos();
        self.expect_kw("network")?;
        let (name, _) = self.ident()?;
        self.expect(&Tok::LBrace)?;
        let mut n = NetworkDecl {
            name,
            inputs: Vec::new(),
            outputs: Vec::new(),
            nodes: Vec::new(),
            wires: Vec::new(),
            pos,
        };
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("in") {
                n.inputs.push(self.port()?);
            } else if self.eat_kw("out") {
                n.outputs.push(self.port()?);
            } else if self.eat_kw("node") {
                let (name, pos) = self.ident()?;
                self.expect(&Tok::Colon)?;
                let (component, _) = self.ident()?;
                n.nodes.push(NodeDecl {
                    name,
                    component,
                    pos,
                });
            } else if self.at_kw("wire") {
                let pos = self.pos();
                self.advance();
                let source = self.endpoint()?;
                self.expect(&Tok::Arrow)?;
                let sink = self.endpoint()?;
                n.wires.push(WireDecl { source, sink, pos });
            } else {
                return self.error("network item or `}`");
            }
        }
        Ok(n)
    }

    fn party(&mut self) -> PResult<Party> {
        if self.eat_kw("env") {
            return Ok(Party::Env);
        }
        let (mut path, _) = self.ident()?;
        while self.eat(&Tok::Slash) {
            path.push('/');
            path.push_str(&self.ident()?.0);
        }
        Ok(Party::Instance(path))
    }

    fn trace(&mut self) -> PResult<TraceDecl> {
        let pos = self.pos();
        self.expect_kw("trace")?;
        let (name, _) = self.ident()?;
        self.expect_kw("on")?;
        let (network, _) = self.ident()?;
        self.expect(&Tok::LBrace)?;
        let mut events = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let pos = self.pos();
            let sender = self.party()?;
            self.expect(&Tok::Arrow)?;
            let receiver = self.party()?;
            self.expect(&Tok::Colon)?;
            let (channel, _) = self.ident()?;
            self.expect(&Tok::Bang)?;
            let message = self.value()?;
            self.expect(&Tok::At)?;
            let interval = self.count()?;
            events.push(EventDecl {
                sender,
                receiver,
                channel,
                message,
                interval,
                pos,
            });
        }
        Ok(TraceDecl {
            name,
            network,
            events,
            pos,
        })
    }

    fn trace_expr_decl(&mut self) -> PResult<TraceExprDecl> {
        let pos = self.pos();
        self.expect_kw("traceexpr")?;
        let (name, _) = self.ident()?;
        self.expect(&Tok::Equals)?;
        let expr = self.trace_expr()?;
        Ok(TraceExprDecl { name, expr, pos })
    }

    fn trace_expr(&mut self) -> PResult<TraceExprAst> {
        let is_call = self.peek_at(1) == &Tok::LParen;
        if is_call && (self.at_kw("seq") || self.at_kw("par")) {
            let seq = self.at_kw("seq");
            self.advance();
            self.expect(&Tok::LParen)?;
            let a = self.trace_expr()?;
            self.expect(&Tok::Comma)?;
            let b = self.trace_expr()?;
            self.expect(&Tok::RParen)?;
            return Ok(if seq {
                TraceExprAst::Seq(Box::new(a), Box::new(b))
            } else {
                TraceExprAst::Par(Box::new(a), Box::new(b))
            });
        }
        if is_call && self.at_kw("iter") {
            self.advance();
            self.expect(&Tok::LParen)?;
            let a = self.trace_expr()?;
            self.expect(&Tok::Comma)?;
            let n = self.count()?;
            self.expect(&Tok::RParen)?;
            return Ok(TraceExprAst::Iter(Box::new(a), n));
        }
        Ok(TraceExprAst::Ref(self.ident()?.0))
    }

    fn contract(&mut self) -> PResult<ContractDecl> {
        let pos = self.pos();
        self.expect_kw("contract")?;
        let (name, _) = self.ident()?;
        self.expect_kw("for")?;
        let (trace, _) = self.ident()?;
        self.expect(&Tok::LBrace)?;
        self.expect_kw("assume")?;
        let assume = self.expr()?;
        self.expect_kw("commit")?;
        let commit = self.expr()?;
        self.expect(&Tok::RBrace)?;
        Ok(ContractDecl {
            name,
            trace,
            assume,
            commit,
            pos,
        })
    }

    fn refinement(&mut self) -> PResult<RefinementDecl> {
        let pos = self.pos();
        self.expect_kw("refinement")?;
        let (name, _) = self.ident()?;
        let kind = match &self.peek().tok {
            Tok::Ident(k) if k == "behavioral" => RefinementKind::Behavioral,
            Tok::Ident(k) if k == "interface" => RefinementKind::Interface,
            Tok::Ident(k) if k == "structural" => RefinementKind::Structural,
            Tok::Ident(k) if k == "inheritance" => RefinementKind::Inheritance,
            _ => return self.error("refinement kind"),
        };
        self.advance();
        self.expect(&Tok::LBrace)?;
        let mut abstract_ref = None;
        let mut concrete_ref = None;
        let mut r = RefinementDecl {
            name,
            kind,
            abstract_ref: String::new(),
            concrete_ref: String::new(),
            repr: None,
            abst: None,
            horizon: 0,
            domains: Vec::new(),
            per_interval: None,
            policy: None,
            slack: None,
            pos,
        };
        let mut horizon = None;
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("abstract") {
                abstract_ref = Some(self.ident()?.0);
            } else if self.eat_kw("concrete") {
                concrete_ref = Some(self.ident()?.0);
            } else if self.eat_kw("repr") {
                r.repr = Some(self.ident()?.0);
            } else if self.eat_kw("abst") {
                r.abst = Some(self.ident()?.0);
            } else if self.eat_kw("horizon") {
                horizon = Some(self.count()?);
            } else if self.eat_kw("domain") {
                let (channel, _) = self.ident()?;
                self.expect(&Tok::Equals)?;
                let values = if self.at(&Tok::LBracket) {
                    self.value_list()?
                } else {
                    let lo = self.int()?;
                    self.expect(&Tok::DotDot)?;
                    let hi = self.int()?;
                    (lo..=hi).map(Value::Int).collect()
                };
                r.domains.push((channel, values));
            } else if self.eat_kw("per_interval") {
                r.per_interval = Some(self.count()?);
            } else if self.eat_kw("policy") {
                r.policy = Some(self.policy()?);
            } else if self.eat_kw("slack") {
                r.slack = Some(self.count()?);
            } else {
                return self.error("refinement item or `}`");
            }
        }
        let Some(abstract_ref) = abstract_ref else {
            return Err(SyntaxError {
                pos,
                message: "refinement is missing `abstract`".into(),
            });
        };
        let Some(concrete_ref) = concrete_ref else {
            return Err(SyntaxError {
                pos,
                message: "refinement is missing `concrete`".into(),
            });
        };
        let Some(horizon) = horizon else {
            return Err(SyntaxError {
                pos,
                message: "refinement is missing `horizon`".into(),
            });
        };
        r.abstract_ref = abstract_ref;
        r.concrete_ref = concrete_ref;
        r.horizon = horizon;
        Ok(r)
    }

    fn value_list(&mut self) -> PResult<Vec<Value>> {
        self.expect(&Tok::LBracket)?;
        let mut values = Vec::new();
        while !self.at(&Tok::RBracket) {
            values.push(self.value()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::RBracket)?;
        Ok(values)
    }

    fn value(&mut self) -> PResult<Value> {
        match &self.peek().tok {
            Tok::Int(_) | Tok::Minus => Ok(Value::Int(self.int()?)),
            Tok::Ident(s) if s == "true" => {
                self.advance();
                Ok(Value::Bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.advance();
                Ok(Value::Bool(false))
            }
            Tok::Ident(_) => Ok(Value::Enum(self.ident()?.0)),
            Tok::LBrace => {
                self.advance();
                let mut fields = BTreeMap::new();
                while !self.at(&Tok::RBrace) {
                    let (name, pos) = self.ident()?;
                    self.expect(&Tok::Equals)?;
                    let v = self.value()?;
                    if fields.insert(name.clone(), v).is_some() {
                        return Err(SyntaxError {
                            pos,
                            message: format!("duplicate field `{name}`"),
                        });
                    }
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(&Tok::RBrace)?;
                Ok(Value::Record(fields))
            }
            _ => self.error("a value"),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        Some(match &self.peek().tok {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Ident(s) => match s.as_str() {
                "div" => BinOp::Div,
                "mod" => BinOp::Mod,
                "and" => BinOp::And,
                "or" => BinOp::Or,
                _ => return None,
            },
            _ => return None,
        })
    }

    /// Precedence climbing; comparisons do not associate.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        if min_prec > 5 {
            return self.unary();
        }
        let mut lhs = self.binary(min_prec + 1)?;
        while let Some(op) = self.binary_op() {
            if op.precedence() != min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(min_prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
            if op.is_comparison() {
                if self.binary_op().is_some_and(BinOp::is_comparison) {
                    return self.error("a parenthesized comparison (comparisons do not chain)");
                }
                break;
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.at(&Tok::Minus) {
            self.advance();
            if let Tok::Int(n) = self.peek().tok {
                self.advance();
                return self.postfix(Expr::Int(-n));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        if self.eat_kw("not") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        let atom = self.atom()?;
        self.postfix(atom)
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        while self.eat(&Tok::Dot) {
            let (field, _) = self.ident()?;
            e = Expr::Field(Box::new(e), field);
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Expr> {
        match &self.peek().tok {
            Tok::Int(n) => {
                let n = *n;
                self.advance();
                Ok(Expr::Int(n))
            }
            Tok::Ident(s) if s == "true" => {
                self.advance();
                Ok(Expr::Bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.advance();
                Ok(Expr::Bool(false))
            }
            Tok::Ident(_) => Ok(Expr::Ident(self.ident()?.0)),
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => {
                self.advance();
                let mut fields = Vec::new();
                while !self.at(&Tok::RBrace) {
                    let (name, _) = self.ident()?;
                    self.expect(&Tok::Equals)?;
                    fields.push((name, self.expr()?));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(&Tok::RBrace)?;
                Ok(Expr::Record(fields))
            }
            _ => self.error("an expression"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_precedence() {
        let e = parse_expr("1 + 2 * 3 == 7 and not false").unwrap();
        assert_eq!(e.to_string(), "1 + 2 * 3 == 7 and not false");
        let Expr::Binary(BinOp::And, lhs, _) = e else {
            panic!("and should bind loosest")
        };
        assert!(matches!(*lhs, Expr::Binary(BinOp::Eq, ..)));
    }

    #[test]
    fn negative_literals_fold() {
        assert_eq!(parse_expr("-3").unwrap(), Expr::Int(-3));
        assert_eq!(
            parse_expr("-(3)").unwrap(),
            Expr::Unary(UnOp::Neg, Box::new(Expr::Int(3)))
        );
    }

    #[test]
    fn chained_comparison_rejected() {
        assert!(parse_expr("1 < 2 < 3").is_err());
    }

    #[test]
    fn values() {
        assert_eq!(parse_value("-1").unwrap(), Value::Int(-1));
        let rec = parse_value("{lo = 1, hi = 0}").unwrap();
        assert_eq!(rec.to_string(), "{hi = 0, lo = 1}");
        assert!(parse_value("{a = 1, a = 2}").is_err());
    }

    #[test]
    fn stream_spec() {
        let spec = parse_stream_spec("In = [3] [] [1, 2], Ctl = [Go]").unwrap();
        assert_eq!(spec["In"].len(), 3);
        assert_eq!(spec["Ctl"], vec![vec![Value::Enum("Go".into())]]);
    }
}
