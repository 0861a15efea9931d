//! Recursive-descent parser producing the surface tree with byte spans.
//! No scoping or typing happens here.

use super::lex::{lex, Tok, Token};
use super::{Diagnostic, SBranch, SDecl, SExpr, SKind, SMatch, Severity, SourceFile, Span};

pub fn parse(text: &str) -> Result<SourceFile, Diagnostic> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut decls = Vec::new();
    while !p.at(&Tok::Eof) {
        decls.push(p.decl()?);
    }
    Ok(SourceFile { decls })
}

/// Parses a single term, for `eval --args`.
pub fn parse_term(text: &str) -> Result<SExpr, Diagnostic> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.term()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<Token, Diagnostic> {
        if self.at(&t) {
            Ok(self.bump())
        } else {
            Err(self.error(format!("expected {t}, found {}", self.peek())))
        }
    }

    fn error(&self, message: String) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            message,
            span: self.peek_span(),
            rule: None,
        }
    }

    fn ident(&mut self) -> Result<(String, Span), Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(n) => {
                let sp = self.peek_span();
                self.bump();
                Ok((n, sp))
            }
            other => Err(self.error(format!("expected a name, found {other}"))),
        }
    }

    fn decl(&mut self) -> Result<SDecl, Diagnostic> {
        let start = self.peek_span().start;
        match self.peek() {
            Tok::KwData => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::LParen)?;
                let params = self.bindings(Tok::RParen)?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::LBrace)?;
                let mut ctors = Vec::new();
                while !self.at(&Tok::RBrace) {
                    let cstart = self.peek_span().start;
                    let (cname, _) = self.ident()?;
                    self.expect(Tok::LParen)?;
                    let fields = self.bindings(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    let cend = self.tokens[self.pos.saturating_sub(1)].span.end;
                    ctors.push((
                        cname,
                        fields,
                        Span {
                            start: cstart,
                            end: cend,
                        },
                    ));
                    if !self.eat(&Tok::Semi) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                let end = self.tokens[self.pos.saturating_sub(1)].span.end;
                Ok(SDecl::Data {
                    name,
                    params,
                    ctors,
                    span: Span { start, end },
                })
            }
            Tok::KwDef => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.term()?;
                self.expect(Tok::ColonEq)?;
                let body = self.term()?;
                let end = self.tokens[self.pos.saturating_sub(1)].span.end;
                Ok(SDecl::Def {
                    name,
                    ty,
                    body,
                    span: Span { start, end },
                })
            }
            other => Err(self.error(format!("expected data or def, found {other}"))),
        }
    }

    /// `name : term, name : term, ...` up to (not consuming) `closer`.
    fn bindings(&mut self, closer: Tok) -> Result<Vec<(String, SExpr)>, Diagnostic> {
        let mut out = Vec::new();
        if self.at(&closer) {
            return Ok(out);
        }
        loop {
            let (name, _) = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.term()?;
            out.push((name, ty));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<SExpr, Diagnostic> {
        let start = self.peek_span().start;
        match self.peek() {
            Tok::Backslash => {
                self.bump();
                let mut names = Vec::new();
                loop {
                    let (n, _) = self.ident()?;
                    names.push(n);
                    if self.at(&Tok::Dot) {
                        break;
                    }
                }
                self.expect(Tok::Dot)?;
                let body = self.term()?;
                let end = body.span.end;
                let mut e = body;
                for n in names.into_iter().rev() {
                    e = SExpr {
                        kind: SKind::Lam(n, Box::new(e)),
                        span: Span { start, end },
                    };
                }
                Ok(e)
            }
            Tok::KwPi => {
                self.bump();
                let mut groups: Vec<(String, SExpr)> = Vec::new();
                while self.at(&Tok::LParen) {
                    self.bump();
                    let mut names = Vec::new();
                    loop {
                        let (n, _) = self.ident()?;
                        names.push(n);
                        if self.at(&Tok::Colon) {
                            break;
                        }
                    }
                    self.expect(Tok::Colon)?;
                    let ty = self.term()?;
                    self.expect(Tok::RParen)?;
                    for n in names {
                        groups.push((n, ty.clone()));
                    }
                }
                if groups.is_empty() {
                    return Err(self.error("Pi needs at least one (name : type) group".into()));
                }
                self.expect(Tok::Dot)?;
                let body = self.term()?;
                let end = body.span.end;
                let mut e = body;
                for (n, ty) in groups.into_iter().rev() {
                    e = SExpr {
                        kind: SKind::Pi(n, Box::new(ty), Box::new(e)),
                        span: Span { start, end },
                    };
                }
                Ok(e)
            }
            Tok::KwMatch => self.match_term(),
            _ => self.app(),
        }
    }

    fn match_term(&mut self) -> Result<SExpr, Diagnostic> {
        let start = self.peek_span().start;
        self.expect(Tok::KwMatch)?;
        self.expect(Tok::LParen)?;
        let scrutinees = self.term_list(Tok::RParen)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Colon)?;
        self.expect(Tok::LParen)?;
        let tel = self.bindings(Tok::RParen)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::KwTo)?;
        let motive = self.term()?;
        self.expect(Tok::LBrace)?;
        let mut branches = Vec::new();
        while self.at(&Tok::Pipe) {
            self.bump();
            self.expect(Tok::LParen)?;
            let btel = self.bindings(Tok::RParen)?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Dot)?;
            self.expect(Tok::LParen)?;
            let pattern = self.term_list(Tok::RParen)?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::FatArrow)?;
            let body = self.term()?;
            branches.push(SBranch {
                tel: btel,
                pattern,
                body,
            });
        }
        self.expect(Tok::RBrace)?;
        let end = self.tokens[self.pos.saturating_sub(1)].span.end;
        Ok(SExpr {
            kind: SKind::Match(SMatch {
                scrutinees,
                tel,
                motive: Box::new(motive),
                branches,
            }),
            span: Span { start, end },
        })
    }

    fn term_list(&mut self, closer: Tok) -> Result<Vec<SExpr>, Diagnostic> {
        let mut out = Vec::new();
        if self.at(&closer) {
            return Ok(out);
        }
        loop {
            out.push(self.term()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(out)
    }

    fn app(&mut self) -> Result<SExpr, Diagnostic> {
        let mut e = self.atom()?;
        while self.starts_atom() {
            let a = self.atom()?;
            let span = Span {
                start: e.span.start,
                end: a.span.end,
            };
            e = SExpr {
                kind: SKind::App(Box::new(e), Box::new(a)),
                span,
            };
        }
        Ok(e)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::KwType | Tok::KwRefl | Tok::KwEq | Tok::LParen | Tok::Dot
        )
    }

    fn atom(&mut self) -> Result<SExpr, Diagnostic> {
        let start = self.peek_span().start;
        match self.peek().clone() {
            Tok::KwType => {
                self.bump();
                Ok(SExpr {
                    kind: SKind::Type,
                    span: Span {
                        start,
                        end: start + 4,
                    },
                })
            }
            Tok::KwEq => {
                self.bump();
                self.expect(Tok::LParen)?;
                let ty = self.term()?;
                self.expect(Tok::Comma)?;
                let l = self.term()?;
                self.expect(Tok::Comma)?;
                let r = self.term()?;
                self.expect(Tok::RParen)?;
                let end = self.tokens[self.pos.saturating_sub(1)].span.end;
                Ok(SExpr {
                    kind: SKind::Eq(Box::new(ty), Box::new(l), Box::new(r)),
                    span: Span { start, end },
                })
            }
            Tok::KwRefl => {
                self.bump();
                self.expect(Tok::LParen)?;
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                let end = self.tokens[self.pos.saturating_sub(1)].span.end;
                Ok(SExpr {
                    kind: SKind::Refl(Box::new(t)),
                    span: Span { start, end },
                })
            }
            Tok::Dot => {
                self.bump();
                let inner = self.atom()?;
                let end = inner.span.end;
                Ok(SExpr {
                    kind: SKind::Dot(Box::new(inner)),
                    span: Span { start, end },
                })
            }
            Tok::LParen => {
                self.bump();
                let e = self.term()?;
                self.expect(Tok::RParen)?;
                let end = self.tokens[self.pos.saturating_sub(1)].span.end;
                Ok(SExpr {
                    kind: e.kind,
                    span: Span { start, end },
                })
            }
            Tok::Ident(name) => {
                let ident_end = self.peek_span().end;
                self.bump();
                // A constructor call needs its parenthesis flush against the
                // name; `f (x)` is an application, `f(x)` a call.
                if self.at(&Tok::LParen) && self.peek_span().start == ident_end {
                    self.bump();
                    let args = self.term_list(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    let end = self.tokens[self.pos.saturating_sub(1)].span.end;
                    Ok(SExpr {
                        kind: SKind::Call(name, args),
                        span: Span { start, end },
                    })
                } else {
                    let end = start + name.len();
                    Ok(SExpr {
                        kind: SKind::Var(name),
                        span: Span { start, end },
                    })
                }
            }
            other => Err(self.error(format!("expected a term, found {other}"))),
        }
    }
}
