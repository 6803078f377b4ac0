//! Indentation-aware recursive-descent parser.
//!
//! Block structure errors (bad indentation, unbalanced brackets, orphan
//! clauses) are hard errors. A simple statement or header expression that the
//! expression grammar cannot handle is recovered as an opaque node and counted
//! in [`Module::recoveries`], so metrics still work on Python 2 style scripts
//! while strict callers can reject the text.

use super::ast::*;
use super::lexer::{Token, TokenClass, TokenStream};
use super::SourceError;

#[derive(Debug, Clone)]
pub struct Module {
    pub tokens: TokenStream,
    pub body: Block,
    pub recoveries: usize,
}

#[derive(Debug, Clone)]
struct Line {
    indent: String,
    start: usize,
    end: usize,
}

pub fn parse_module(tokens: TokenStream) -> Result<Module, SourceError> {
    let lines = logical_lines(&tokens.tokens)?;
    let mut p = Parser { toks: &tokens.tokens, lines: &lines, i: 0, recoveries: 0 };
    let body = if lines.is_empty() {
        Vec::new()
    } else {
        if !lines[0].indent.is_empty() {
            return Err(p.error_at(lines[0].start, "unexpected indent"));
        }
        let body = p.block("")?;
        if p.i < lines.len() {
            return Err(p.error_at(lines[p.i].start, "unindent does not match any outer indentation level"));
        }
        body
    };
    let recoveries = p.recoveries;
    Ok(Module { tokens, body, recoveries })
}

fn indent_of(leading: &str) -> Option<String> {
    // A line break counts unless every newline in the trivia is escaped by `\`.
    let bytes = leading.as_bytes();
    let mut last_break = None;
    for (i, b) in bytes.iter().enumerate() {
        if *b == b'\n' {
            let escaped = (i >= 1 && bytes[i - 1] == b'\\') || (i >= 2 && bytes[i - 1] == b'\r' && bytes[i - 2] == b'\\');
            if !escaped {
                last_break = Some(i);
            }
        }
    }
    last_break.map(|i| {
        let tail = &leading[i + 1..];
        // Whitespace after an escaped newline is not indentation.
        match tail.rfind('\n') {
            Some(j) => tail[j + 1..].to_string(),
            None => tail.to_string(),
        }
    })
}

fn logical_lines(toks: &[Token]) -> Result<Vec<Line>, SourceError> {
    let mut lines: Vec<Line> = Vec::new();
    let mut stack: Vec<(char, usize)> = Vec::new();
    for (i, tok) in toks.iter().enumerate() {
        let new_line = i == 0 || (stack.is_empty() && indent_of(&tok.leading).is_some());
        if new_line {
            if let Some(last) = lines.last_mut() {
                last.end = i;
            }
            let indent = if i == 0 {
                let lead = &tok.leading;
                match lead.rfind('\n') {
                    Some(j) => lead[j + 1..].to_string(),
                    None => lead.clone(),
                }
            } else {
                indent_of(&tok.leading).unwrap_or_default()
            };
            lines.push(Line { indent, start: i, end: i + 1 });
        }
        if tok.class == TokenClass::Punctuation {
            match tok.lexeme.as_str() {
                "(" => stack.push((')', i)),
                "[" => stack.push((']', i)),
                "{" => stack.push(('}', i)),
                ")" | "]" | "}" => {
                    let want = tok.lexeme.chars().next().unwrap();
                    match stack.pop() {
                        Some((c, _)) if c == want => {}
                        _ => {
                            return Err(SourceError::Parse {
                                line: tok.line,
                                column: tok.column,
                                message: format!("unmatched '{}'", tok.lexeme),
                            })
                        }
                    }
                }
                _ => {}
            }
        }
    }
    if let Some((_, i)) = stack.pop() {
        let t = &toks[i];
        return Err(SourceError::Parse { line: t.line, column: t.column, message: format!("'{}' was never closed", t.lexeme) });
    }
    if let Some(last) = lines.last_mut() {
        last.end = toks.len();
    }
    Ok(lines)
}

enum IndentCmp {
    Same,
    Deeper,
    Shallower,
    Inconsistent,
}

fn compare_indent(line: &str, block: &str) -> IndentCmp {
    if line == block {
        IndentCmp::Same
    } else if line.starts_with(block) {
        IndentCmp::Deeper
    } else if block.starts_with(line) {
        IndentCmp::Shallower
    } else {
        IndentCmp::Inconsistent
    }
}

struct Parser<'a> {
    toks: &'a [Token],
    lines: &'a [Line],
    i: usize,
    recoveries: usize,
}

impl<'a> Parser<'a> {
    fn error_at(&self, tok: usize, message: &str) -> SourceError {
        let t = &self.toks[tok.min(self.toks.len().saturating_sub(1))];
        SourceError::Parse { line: t.line, column: t.column, message: message.to_string() }
    }

    fn block(&mut self, indent: &str) -> Result<Block, SourceError> {
        let mut out = Vec::new();
        while self.i < self.lines.len() {
            let line = &self.lines[self.i];
            match compare_indent(&line.indent, indent) {
                IndentCmp::Same => self.statement(indent, &mut out)?,
                IndentCmp::Deeper => return Err(self.error_at(line.start, "unexpected indent")),
                IndentCmp::Shallower => break,
                IndentCmp::Inconsistent => {
                    return Err(self.error_at(line.start, "inconsistent use of tabs and spaces in indentation"))
                }
            }
        }
        Ok(out)
    }

    fn first(&self) -> &'a Token {
        &self.toks[self.lines[self.i].start]
    }

    fn span_of(&self, start: usize, end: usize) -> Span {
        self.toks[start].start..self.toks[end - 1].end()
    }

    /// Finds the `:` that ends a compound statement header.
    fn header_colon(&self, line: &Line) -> Result<usize, SourceError> {
        let mut depth = 0i32;
        let mut lambdas = 0;
        for k in line.start..line.end {
            let t = &self.toks[k];
            match t.lexeme.as_str() {
                "(" | "[" | "{" if t.class == TokenClass::Punctuation => depth += 1,
                ")" | "]" | "}" if t.class == TokenClass::Punctuation => depth -= 1,
                "lambda" if t.class == TokenClass::Keyword && depth == 0 => lambdas += 1,
                ":" if t.class == TokenClass::Punctuation && depth == 0 => {
                    if lambdas == 0 {
                        return Ok(k);
                    }
                    lambdas -= 1;
                }
                _ => {}
            }
        }
        Err(self.error_at(line.end - 1, "expected ':'"))
    }

    /// Parses the body after a header colon: inline statements or an indented block.
    fn suite(&mut self, indent: &str, colon: usize) -> Result<Block, SourceError> {
        let line = self.lines[self.i].clone();
        self.i += 1;
        if colon + 1 < line.end {
            let mut out = Vec::new();
            self.simple_statements(colon + 1, line.end, &mut out);
            return Ok(out);
        }
        match self.lines.get(self.i) {
            Some(next) => match compare_indent(&next.indent, indent) {
                IndentCmp::Deeper => {
                    let child = next.indent.clone();
                    self.block(&child)
                }
                IndentCmp::Inconsistent => {
                    Err(self.error_at(next.start, "inconsistent use of tabs and spaces in indentation"))
                }
                _ => Err(self.error_at(next.start, "expected an indented block")),
            },
            None => Err(self.error_at(colon, "expected an indented block")),
        }
    }

    fn block_end(&self, body: &Block, fallback: usize) -> usize {
        body.last().map(|s| s.span.end).unwrap_or(fallback)
    }

    fn header_expr(&mut self, start: usize, end: usize) -> Expr {
        match ExprParser::new(self.toks, start, end).full(|p| p.named_test()) {
            Ok(e) => e,
            Err(()) => self.opaque(start, end),
        }
    }

    fn header_exprlist(&mut self, start: usize, end: usize) -> Expr {
        match ExprParser::new(self.toks, start, end).full(|p| p.expr_list(true)) {
            Ok(e) => e,
            Err(()) => self.opaque(start, end),
        }
    }

    fn opaque(&mut self, start: usize, end: usize) -> Expr {
        self.recoveries += 1;
        opaque_expr(self.toks, start, end)
    }

    fn next_starts_with(&self, indent: &str, kws: &[&str]) -> Option<&'a str> {
        let line = self.lines.get(self.i)?;
        if line.indent != indent {
            return None;
        }
        let t = &self.toks[line.start];
        (t.class == TokenClass::Keyword && kws.contains(&t.lexeme.as_str())).then(|| {
            let kw: &'a str = &self.toks[line.start].lexeme;
            kw
        })
    }

    fn statement(&mut self, indent: &str, out: &mut Block) -> Result<(), SourceError> {
        let line = self.lines[self.i].clone();
        let first = self.first();
        if first.is("@") && first.class == TokenClass::Operator {
            let mut decorators = Vec::new();
            let start_tok = line.start;
            while self.i < self.lines.len() && self.toks[self.lines[self.i].start].is("@") {
                let l = self.lines[self.i].clone();
                if l.indent != indent {
                    return Err(self.error_at(l.start, "unexpected indent"));
                }
                let e = self.header_expr(l.start + 1, l.end);
                decorators.push(e);
                self.i += 1;
            }
            if self.i >= self.lines.len() {
                return Err(self.error_at(start_tok, "decorator without definition"));
            }
            let mut tmp = Vec::new();
            self.statement(indent, &mut tmp)?;
            let mut stmt = tmp.pop().ok_or_else(|| self.error_at(start_tok, "decorator without definition"))?;
            match &mut stmt.kind {
                StmtKind::FunctionDef(f) => f.decorators = decorators,
                StmtKind::ClassDef { decorators: d, .. } => *d = decorators,
                _ => return Err(self.error_at(start_tok, "decorator must precede def or class")),
            }
            stmt.span.start = self.toks[start_tok].start;
            out.push(stmt);
            return Ok(());
        }
        let mut kw_start = line.start;
        if first.is_keyword("async") && line.end > line.start + 1 {
            kw_start += 1;
        }
        let kw_tok = &self.toks[kw_start];
        if kw_tok.class == TokenClass::Keyword {
            match kw_tok.lexeme.as_str() {
                "def" => return self.def_stmt(indent, &line, kw_start, out),
                "class" => return self.class_stmt(indent, &line, out),
                "if" => return self.if_stmt(indent, &line, out),
                "for" => return self.for_stmt(indent, &line, kw_start, out),
                "while" => return self.while_stmt(indent, &line, out),
                "try" => return self.try_stmt(indent, &line, out),
                "with" => return self.with_stmt(indent, &line, kw_start, out),
                "elif" | "else" | "except" | "finally" => {
                    return Err(self.error_at(line.start, &format!("'{}' without matching statement", kw_tok.lexeme)))
                }
                _ => {}
            }
        }
        // Soft-keyword blocks such as `match x:` / `case 1:`.
        let last = &self.toks[line.end - 1];
        if first.class == TokenClass::Identifier
            && matches!(first.lexeme.as_str(), "match" | "case")
            && last.is(":")
            && line.end - line.start > 1
            && self.lines.get(self.i + 1).is_some_and(|n| matches!(compare_indent(&n.indent, indent), IndentCmp::Deeper))
        {
            let colon = line.end - 1;
            let head = if colon > line.start + 1 { vec![self.header_exprlist(line.start + 1, colon)] } else { vec![] };
            let body = self.suite(indent, colon)?;
            let end = self.block_end(&body, self.toks[colon].end());
            out.push(Stmt {
                kind: StmtKind::Block { keyword: first.lexeme.clone(), head, body },
                span: first.start..end,
            });
            return Ok(());
        }
        self.i += 1;
        self.simple_statements(line.start, line.end, out);
        Ok(())
    }

    fn def_stmt(&mut self, indent: &str, line: &Line, kw: usize, out: &mut Block) -> Result<(), SourceError> {
        let colon = self.header_colon(line)?;
        let name_tok = kw + 1;
        if name_tok >= colon || self.toks[name_tok].class != TokenClass::Identifier {
            return Err(self.error_at(kw, "expected function name"));
        }
        let name = self.toks[name_tok].lexeme.clone();
        let open = name_tok + 1;
        if open >= colon || !self.toks[open].is("(") {
            return Err(self.error_at(open.min(colon), "expected '('"));
        }
        let close = matching_close(self.toks, open).filter(|c| *c < colon).ok_or_else(|| self.error_at(open, "expected ')'"))?;
        let params = match ExprParser::new(self.toks, open + 1, close).full(|p| p.params(")", true)) {
            Ok(ps) => ps,
            Err(()) => return Err(self.error_at(open + 1, "invalid parameter list")),
        };
        let returns = if close + 1 < colon {
            if !self.toks[close + 1].is("->") {
                return Err(self.error_at(close + 1, "expected ':'"));
            }
            Some(self.header_expr(close + 2, colon))
        } else {
            None
        };
        let body = self.suite(indent, colon)?;
        let body_start = body.first().map(|s| s.span.start).unwrap_or(self.toks[colon].end());
        let end = self.block_end(&body, self.toks[colon].end());
        out.push(Stmt {
            kind: StmtKind::FunctionDef(FunctionDef { name, params, returns, decorators: vec![], body, body_span: body_start..end }),
            span: self.toks[line.start].start..end,
        });
        Ok(())
    }

    fn class_stmt(&mut self, indent: &str, line: &Line, out: &mut Block) -> Result<(), SourceError> {
        let colon = self.header_colon(line)?;
        let name_tok = line.start + 1;
        if name_tok >= colon || self.toks[name_tok].class != TokenClass::Identifier {
            return Err(self.error_at(line.start, "expected class name"));
        }
        let name = self.toks[name_tok].lexeme.clone();
        let bases = if name_tok + 1 < colon {
            match ExprParser::new(self.toks, name_tok + 1, colon).full(|p| p.atom()) {
                Ok(Expr { kind: ExprKind::Tuple(items), .. }) => items,
                Ok(e) => vec![e],
                Err(()) => vec![self.opaque(name_tok + 1, colon)],
            }
        } else {
            vec![]
        };
        let body = self.suite(indent, colon)?;
        let end = self.block_end(&body, self.toks[colon].end());
        out.push(Stmt {
            kind: StmtKind::ClassDef { name, bases, decorators: vec![], body },
            span: self.toks[line.start].start..end,
        });
        Ok(())
    }

    fn if_stmt(&mut self, indent: &str, line: &Line, out: &mut Block) -> Result<(), SourceError> {
        let mut arms = Vec::new();
        let mut current = line.clone();
        let mut kind = ArmKind::If;
        loop {
            let colon = self.header_colon(&current)?;
            let test = match kind {
                ArmKind::Else => {
                    if colon != current.start + 1 {
                        return Err(self.error_at(current.start + 1, "expected ':'"));
                    }
                    None
                }
                _ => {
                    if colon == current.start + 1 {
                        return Err(self.error_at(colon, "invalid syntax"));
                    }
                    Some(self.header_expr(current.start + 1, colon))
                }
            };
            let body = self.suite(indent, colon)?;
            let end = self.block_end(&body, self.toks[colon].end());
            arms.push(Arm { kind, test, body, span: self.toks[current.start].start..end });
            if kind == ArmKind::Else {
                break;
            }
            match self.next_starts_with(indent, &["elif", "else"]) {
                Some("elif") => kind = ArmKind::Elif,
                Some(_) => kind = ArmKind::Else,
                None => break,
            }
            current = self.lines[self.i].clone();
        }
        let span = arms[0].span.start..arms.last().unwrap().span.end;
        out.push(Stmt { kind: StmtKind::If { arms }, span });
        Ok(())
    }

    fn loop_else(&mut self, indent: &str) -> Result<Option<Arm>, SourceError> {
        if self.next_starts_with(indent, &["else"]).is_none() {
            return Ok(None);
        }
        let line = self.lines[self.i].clone();
        let colon = self.header_colon(&line)?;
        if colon != line.start + 1 {
            return Err(self.error_at(line.start + 1, "expected ':'"));
        }
        let body = self.suite(indent, colon)?;
        let end = self.block_end(&body, self.toks[colon].end());
        Ok(Some(Arm { kind: ArmKind::Else, test: None, body, span: self.toks[line.start].start..end }))
    }

    fn for_stmt(&mut self, indent: &str, line: &Line, kw: usize, out: &mut Block) -> Result<(), SourceError> {
        let colon = self.header_colon(line)?;
        let in_tok = (kw + 1..colon).find(|k| {
            let t = &self.toks[*k];
            t.is_keyword("in") && bracket_depth(self.toks, kw + 1, *k) == 0
        });
        let (target, iter) = match in_tok {
            Some(k) if k > kw + 1 && k + 1 < colon => {
                let target = match ExprParser::new(self.toks, kw + 1, k).full(|p| p.target_list()) {
                    Ok(e) => e,
                    Err(()) => self.opaque(kw + 1, k),
                };
                (target, self.header_exprlist(k + 1, colon))
            }
            _ => return Err(self.error_at(kw, "expected 'in' in for statement")),
        };
        let body = self.suite(indent, colon)?;
        let header = self.toks[line.start].start..self.toks[colon].end();
        let body_end = self.block_end(&body, self.toks[colon].end());
        let orelse = self.loop_else(indent)?;
        out.push(Stmt {
            kind: StmtKind::For { target, iter, body, header: header.start..body_end, orelse: orelse.clone() },
            span: header.start..orelse.map(|a| a.span.end).unwrap_or(body_end),
        });
        Ok(())
    }

    fn while_stmt(&mut self, indent: &str, line: &Line, out: &mut Block) -> Result<(), SourceError> {
        let colon = self.header_colon(line)?;
        if colon == line.start + 1 {
            return Err(self.error_at(colon, "invalid syntax"));
        }
        let test = self.header_expr(line.start + 1, colon);
        let body = self.suite(indent, colon)?;
        let start = self.toks[line.start].start;
        let body_end = self.block_end(&body, self.toks[colon].end());
        let orelse = self.loop_else(indent)?;
        out.push(Stmt {
            kind: StmtKind::While { test, body, header: start..body_end, orelse: orelse.clone() },
            span: start..orelse.map(|a| a.span.end).unwrap_or(body_end),
        });
        Ok(())
    }

    fn try_stmt(&mut self, indent: &str, line: &Line, out: &mut Block) -> Result<(), SourceError> {
        let colon = self.header_colon(line)?;
        let body = self.suite(indent, colon)?;
        let mut end = self.block_end(&body, self.toks[colon].end());
        let mut handlers = Vec::new();
        let mut orelse = None;
        let mut finalbody = None;
        while self.next_starts_with(indent, &["except"]).is_some() {
            let l = self.lines[self.i].clone();
            let colon = self.header_colon(&l)?;
            let mut start = l.start + 1;
            if start < colon && self.toks[start].is("*") {
                start += 1;
            }
            let as_tok = (start..colon).find(|k| self.toks[*k].is_keyword("as"));
            let (exc_type, name) = match as_tok {
                Some(a) => {
                    let ty = (a > start).then(|| self.header_expr(start, a));
                    let name = (a + 1 < colon).then(|| (self.toks[a + 1].lexeme.clone(), a + 1));
                    (ty, name)
                }
                None => ((start < colon).then(|| self.header_exprlist(start, colon)), None),
            };
            let hbody = self.suite(indent, colon)?;
            let hend = self.block_end(&hbody, self.toks[colon].end());
            handlers.push(Handler { exc_type, name, body: hbody, span: self.toks[l.start].start..hend });
            end = hend;
        }
        if self.next_starts_with(indent, &["else"]).is_some() {
            let l = self.lines[self.i].clone();
            let colon = self.header_colon(&l)?;
            let b = self.suite(indent, colon)?;
            end = self.block_end(&b, end);
            orelse = Some(b);
        }
        if self.next_starts_with(indent, &["finally"]).is_some() {
            let l = self.lines[self.i].clone();
            let colon = self.header_colon(&l)?;
            let b = self.suite(indent, colon)?;
            end = self.block_end(&b, end);
            finalbody = Some(b);
        }
        if handlers.is_empty() && finalbody.is_none() {
            return Err(self.error_at(line.start, "expected 'except' or 'finally' block"));
        }
        out.push(Stmt {
            kind: StmtKind::Try { body, handlers, orelse, finalbody },
            span: self.toks[line.start].start..end,
        });
        Ok(())
    }

    fn with_stmt(&mut self, indent: &str, line: &Line, kw: usize, out: &mut Block) -> Result<(), SourceError> {
        let colon = self.header_colon(line)?;
        let items = match ExprParser::new(self.toks, kw + 1, colon).full(|p| p.with_items()) {
            Ok(items) => items,
            Err(()) => vec![(self.opaque(kw + 1, colon), None)],
        };
        let body = self.suite(indent, colon)?;
        let end = self.block_end(&body, self.toks[colon].end());
        out.push(Stmt { kind: StmtKind::With { items, body }, span: self.toks[line.start].start..end });
        Ok(())
    }

    fn simple_statements(&mut self, start: usize, end: usize, out: &mut Block) {
        let mut seg_start = start;
        let mut depth = 0i32;
        for k in start..=end {
            let at_sep = k == end || (depth == 0 && self.toks[k].is(";") && self.toks[k].class == TokenClass::Punctuation);
            if k < end && self.toks[k].class == TokenClass::Punctuation {
                match self.toks[k].lexeme.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => depth -= 1,
                    _ => {}
                }
            }
            if at_sep {
                if seg_start < k {
                    let stmt = self.simple_statement(seg_start, k);
                    out.push(stmt);
                }
                seg_start = k + 1;
            }
        }
    }

    fn simple_statement(&mut self, start: usize, end: usize) -> Stmt {
        let span = self.span_of(start, end);
        match ExprParser::new(self.toks, start, end).full(|p| p.simple_statement()) {
            Ok(kind) => Stmt { kind, span },
            Err(()) => {
                self.recoveries += 1;
                let leaves = opaque_expr(self.toks, start, end);
                let items = match leaves.kind {
                    ExprKind::Opaque(items) => items,
                    _ => vec![],
                };
                Stmt { kind: StmtKind::Opaque(items), span }
            }
        }
    }
}

fn bracket_depth(toks: &[Token], start: usize, end: usize) -> i32 {
    let mut depth = 0;
    for t in &toks[start..end] {
        if t.class == TokenClass::Punctuation {
            match t.lexeme.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                _ => {}
            }
        }
    }
    depth
}

fn matching_close(toks: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0;
    for (k, t) in toks.iter().enumerate().skip(open) {
        if t.class == TokenClass::Punctuation {
            match t.lexeme.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(k);
                    }
                }
                _ => {}
            }
        }
    }
    None
}

fn leaf(tok: &Token, index: usize) -> Option<Expr> {
    let kind = match tok.class {
        TokenClass::Identifier => ExprKind::Name(tok.lexeme.clone()),
        TokenClass::LiteralNumber => ExprKind::Number(tok.lexeme.clone()),
        TokenClass::LiteralString => ExprKind::Str(tok.lexeme.clone()),
        TokenClass::Keyword if matches!(tok.lexeme.as_str(), "True" | "False" | "None") => {
            ExprKind::Constant(tok.lexeme.clone())
        }
        _ => return None,
    };
    Some(Expr { kind, span: tok.start..tok.end(), token: index })
}

fn opaque_expr(toks: &[Token], start: usize, end: usize) -> Expr {
    let items: Vec<Expr> = (start..end)
        .filter(|k| !(*k > start && toks[k - 1].is(".")))
        .filter_map(|k| leaf(&toks[k], k))
        .collect();
    let span = if start < end { toks[start].start..toks[end - 1].end() } else { 0..0 };
    Expr { kind: ExprKind::Opaque(items), span, token: start }
}

type PResult<T> = Result<T, ()>;

const AUG_OPS: &[&str] = &["+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "|=", "^=", "@="];

struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
    end: usize,
}

impl<'a> ExprParser<'a> {
    fn new(toks: &'a [Token], start: usize, end: usize) -> Self {
        Self { toks, pos: start, end }
    }

    fn full<T>(mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let v = f(&mut self)?;
        if self.pos == self.end {
            Ok(v)
        } else {
            Err(())
        }
    }

    fn peek(&self) -> Option<&'a Token> {
        (self.pos < self.end).then(|| &self.toks[self.pos])
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        (self.pos + k < self.end).then(|| &self.toks[self.pos + k])
    }

    fn at(&self, lex: &str) -> bool {
        self.peek().is_some_and(|t| t.lexeme == lex && t.class != TokenClass::LiteralString)
    }

    fn eat(&mut self, lex: &str) -> bool {
        if self.at(lex) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lex: &str) -> PResult<()> {
        if self.eat(lex) {
            Ok(())
        } else {
            Err(())
        }
    }

    fn last_end(&self) -> usize {
        self.toks[self.pos - 1].end()
    }

    fn mk(&self, kind: ExprKind, start_tok: usize) -> Expr {
        Expr { kind, span: self.toks[start_tok].start..self.last_end(), token: start_tok }
    }

    fn at_expr_end(&self) -> bool {
        match self.peek() {
            None => true,
            Some(t) => {
                t.class == TokenClass::Punctuation && matches!(t.lexeme.as_str(), ")" | "]" | "}" | ":" | ",")
                    || t.is("=")
                    || AUG_OPS.contains(&t.lexeme.as_str())
                    || t.is_keyword("for")
                    || t.is_keyword("async")
                    || t.is_keyword("in")
            }
        }
    }

    fn simple_statement(&mut self) -> PResult<StmtKind> {
        let t = self.peek().ok_or(())?;
        if t.class == TokenClass::Keyword {
            match t.lexeme.as_str() {
                "pass" => {
                    self.pos += 1;
                    return Ok(StmtKind::Pass);
                }
                "break" => {
                    self.pos += 1;
                    return Ok(StmtKind::Break);
                }
                "continue" => {
                    self.pos += 1;
                    return Ok(StmtKind::Continue);
                }
                "return" => {
                    self.pos += 1;
                    let value = if self.peek().is_some() { Some(self.expr_list(true)?) } else { None };
                    return Ok(StmtKind::Return(value));
                }
                "raise" => {
                    self.pos += 1;
                    let exc = if self.peek().is_some() { Some(self.test()?) } else { None };
                    let cause = if self.eat("from") { Some(self.test()?) } else { None };
                    return Ok(StmtKind::Raise { exc, cause });
                }
                "global" | "nonlocal" => {
                    self.pos += 1;
                    let mut names = Vec::new();
                    loop {
                        let n = self.peek().filter(|t| t.class == TokenClass::Identifier).ok_or(())?;
                        names.push(n.lexeme.clone());
                        self.pos += 1;
                        if !self.eat(",") {
                            break;
                        }
                    }
                    return Ok(StmtKind::Global(names));
                }
                "del" => {
                    self.pos += 1;
                    let e = self.expr_list(false)?;
                    let targets = match e.kind {
                        ExprKind::Tuple(items) => items,
                        _ => vec![e],
                    };
                    return Ok(StmtKind::Del(targets));
                }
                "assert" => {
                    self.pos += 1;
                    let test = self.test()?;
                    let msg = if self.eat(",") { Some(self.test()?) } else { None };
                    return Ok(StmtKind::Assert { test, msg });
                }
                "import" | "from" => {
                    let mut names = Vec::new();
                    while let Some(t) = self.peek() {
                        if t.class == TokenClass::Identifier {
                            names.push(t.lexeme.clone());
                        }
                        self.pos += 1;
                    }
                    return Ok(StmtKind::Import(names));
                }
                _ => {}
            }
        }
        let first = if self.at("yield") { self.yield_expr()? } else { self.expr_list(true)? };
        if self.eat(":") {
            let annotation = self.test()?;
            let value = if self.eat("=") { Some(self.assign_value()?) } else { None };
            return Ok(StmtKind::AnnAssign { target: first, annotation, value });
        }
        if let Some(op) = self.peek().filter(|t| AUG_OPS.contains(&t.lexeme.as_str())) {
            self.pos += 1;
            let value = self.assign_value()?;
            return Ok(StmtKind::AugAssign { target: first, op: op.lexeme.clone(), value });
        }
        if self.at("=") {
            let mut targets = vec![first];
            let mut value = None;
            while self.eat("=") {
                let v = self.assign_value()?;
                if let Some(prev) = value.replace(v) {
                    targets.push(prev);
                }
            }
            return Ok(StmtKind::Assign { targets, value: value.ok_or(())? });
        }
        Ok(StmtKind::Expr(first))
    }

    fn assign_value(&mut self) -> PResult<Expr> {
        if self.at("yield") {
            self.yield_expr()
        } else {
            self.expr_list(true)
        }
    }

    fn yield_expr(&mut self) -> PResult<Expr> {
        let start = self.pos;
        self.expect("yield")?;
        if self.eat("from") {
            let v = self.test()?;
            return Ok(self.mk(ExprKind::Yield { value: Some(Box::new(v)), from: true }, start));
        }
        let value = if self.at_expr_end() { None } else { Some(Box::new(self.expr_list(true)?)) };
        Ok(self.mk(ExprKind::Yield { value, from: false }, start))
    }

    /// Comma-separated expressions; a trailing or separating comma makes a tuple.
    fn expr_list(&mut self, allow_star: bool) -> PResult<Expr> {
        let start = self.pos;
        let first = self.list_item(allow_star)?;
        if !self.at(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(",") {
            if self.at_expr_end() {
                break;
            }
            items.push(self.list_item(allow_star)?);
        }
        Ok(self.mk(ExprKind::Tuple(items), start))
    }

    fn list_item(&mut self, allow_star: bool) -> PResult<Expr> {
        if allow_star && self.at("*") {
            let start = self.pos;
            self.pos += 1;
            let v = self.bitor()?;
            return Ok(self.mk(ExprKind::Starred { op: "*".into(), value: Box::new(v) }, start));
        }
        self.named_test()
    }

    /// Assignment targets in `for` headers and comprehensions (stops before `in`).
    fn target_list(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let first = self.target_item()?;
        if !self.at(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(",") {
            if self.at_expr_end() {
                break;
            }
            items.push(self.target_item()?);
        }
        Ok(self.mk(ExprKind::Tuple(items), start))
    }

    fn target_item(&mut self) -> PResult<Expr> {
        if self.at("*") {
            let start = self.pos;
            self.pos += 1;
            let v = self.bitor()?;
            return Ok(self.mk(ExprKind::Starred { op: "*".into(), value: Box::new(v) }, start));
        }
        self.bitor()
    }

    fn named_test(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let e = self.test()?;
        if self.eat(":=") {
            let v = self.test()?;
            return Ok(self.mk(ExprKind::NamedExpr { target: Box::new(e), value: Box::new(v) }, start));
        }
        Ok(e)
    }

    fn test(&mut self) -> PResult<Expr> {
        if self.at("lambda") {
            return self.lambda();
        }
        let start = self.pos;
        let body = self.or_test()?;
        if self.at("if") {
            // `x if c else y`; a bare `if` here belongs to an enclosing comprehension.
            let save = self.pos;
            self.pos += 1;
            let test = self.or_test()?;
            if !self.eat("else") {
                self.pos = save;
                return Ok(body);
            }
            let orelse = self.test()?;
            return Ok(self.mk(
                ExprKind::IfExp { test: Box::new(test), body: Box::new(body), orelse: Box::new(orelse) },
                start,
            ));
        }
        Ok(body)
    }

    fn lambda(&mut self) -> PResult<Expr> {
        let start = self.pos;
        self.expect("lambda")?;
        let params = self.params(":", false)?;
        self.expect(":")?;
        let body = self.test()?;
        Ok(self.mk(ExprKind::Lambda { params, body: Box::new(body) }, start))
    }

    /// Parameter list up to (not including) `close`.
    fn params(&mut self, close: &str, annotations: bool) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        while !self.at(close) && self.peek().is_some() {
            let token = self.pos;
            let name = if self.eat("/") {
                "/".to_string()
            } else if self.eat("**") {
                let n = self.ident()?;
                format!("**{n}")
            } else if self.eat("*") {
                if self.peek().is_some_and(|t| t.class == TokenClass::Identifier) {
                    format!("*{}", self.ident()?)
                } else {
                    "*".to_string()
                }
            } else {
                self.ident()?
            };
            // Star prefixes are separate tokens; point at the bound identifier.
            let token = if name.starts_with('*') && name.len() > 1 { token + 1 } else { token };
            let annotation = if annotations && name != "*" && name != "/" && self.eat(":") { Some(self.test()?) } else { None };
            let default = if self.eat("=") { Some(self.test()?) } else { None };
            params.push(Param { name, default, annotation, token });
            if !self.eat(",") {
                break;
            }
        }
        Ok(params)
    }

    fn ident(&mut self) -> PResult<String> {
        let t = self.peek().filter(|t| t.class == TokenClass::Identifier).ok_or(())?;
        self.pos += 1;
        Ok(t.lexeme.clone())
    }

    fn or_test(&mut self) -> PResult<Expr> {
        self.bool_chain("or", Self::and_test)
    }

    fn and_test(&mut self) -> PResult<Expr> {
        self.bool_chain("and", Self::not_test)
    }

    fn bool_chain(&mut self, op: &str, next: fn(&mut Self) -> PResult<Expr>) -> PResult<Expr> {
        let start = self.pos;
        let first = next(self)?;
        if !self.at(op) {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat(op) {
            values.push(next(self)?);
        }
        Ok(self.mk(ExprKind::BoolOp { op: op.into(), values }, start))
    }

    fn not_test(&mut self) -> PResult<Expr> {
        let start = self.pos;
        if self.eat("not") {
            let operand = self.not_test()?;
            return Ok(self.mk(ExprKind::UnaryOp { op: "not".into(), operand: Box::new(operand) }, start));
        }
        self.comparison()
    }

    fn comp_op(&mut self) -> Option<String> {
        let t = self.peek()?;
        let op = match t.lexeme.as_str() {
            "<" | ">" | "==" | ">=" | "<=" | "!=" | "<>" => t.lexeme.clone(),
            "in" if t.class == TokenClass::Keyword => "in".into(),
            "not" if self.peek_at(1).is_some_and(|n| n.is_keyword("in")) => {
                self.pos += 1;
                "not in".into()
            }
            "is" if t.class == TokenClass::Keyword => {
                if self.peek_at(1).is_some_and(|n| n.is_keyword("not")) {
                    self.pos += 1;
                    "is not".into()
                } else {
                    "is".into()
                }
            }
            _ => return None,
        };
        self.pos += 1;
        Some(op)
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let left = self.bitor()?;
        let mut ops = Vec::new();
        let mut comparators = Vec::new();
        while let Some(op) = self.comp_op() {
            ops.push(op);
            comparators.push(self.bitor()?);
        }
        if ops.is_empty() {
            return Ok(left);
        }
        Ok(self.mk(ExprKind::Compare { left: Box::new(left), ops, comparators }, start))
    }

    fn binary(&mut self, ops: &[&str], next: fn(&mut Self) -> PResult<Expr>) -> PResult<Expr> {
        let start = self.pos;
        let mut left = next(self)?;
        while let Some(t) = self.peek().filter(|t| t.class == TokenClass::Operator && ops.contains(&t.lexeme.as_str())) {
            self.pos += 1;
            let right = next(self)?;
            left = self.mk(ExprKind::BinOp { op: t.lexeme.clone(), left: Box::new(left), right: Box::new(right) }, start);
        }
        Ok(left)
    }

    fn bitor(&mut self) -> PResult<Expr> {
        self.binary(&["|"], Self::bitxor)
    }

    fn bitxor(&mut self) -> PResult<Expr> {
        self.binary(&["^"], Self::bitand)
    }

    fn bitand(&mut self) -> PResult<Expr> {
        self.binary(&["&"], Self::shift)
    }

    fn shift(&mut self) -> PResult<Expr> {
        self.binary(&["<<", ">>"], Self::arith)
    }

    fn arith(&mut self) -> PResult<Expr> {
        self.binary(&["+", "-"], Self::term)
    }

    fn term(&mut self) -> PResult<Expr> {
        self.binary(&["*", "/", "//", "%", "@"], Self::factor)
    }

    fn factor(&mut self) -> PResult<Expr> {
        let start = self.pos;
        if let Some(t) = self.peek().filter(|t| matches!(t.lexeme.as_str(), "+" | "-" | "~")) {
            self.pos += 1;
            let operand = self.factor()?;
            return Ok(self.mk(ExprKind::UnaryOp { op: t.lexeme.clone(), operand: Box::new(operand) }, start));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let base = if self.eat("await") {
            let v = self.primary()?;
            self.mk(ExprKind::Await(Box::new(v)), start)
        } else {
            self.primary()?
        };
        if self.eat("**") {
            let exp = self.factor()?;
            return Ok(self.mk(ExprKind::BinOp { op: "**".into(), left: Box::new(base), right: Box::new(exp) }, start));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let mut e = self.atom()?;
        loop {
            if self.eat("(") {
                let args = self.call_args()?;
                self.expect(")")?;
                e = self.mk(ExprKind::Call { func: Box::new(e), args }, start);
            } else if self.eat("[") {
                let index = self.subscript_list()?;
                self.expect("]")?;
                e = self.mk(ExprKind::Subscript { value: Box::new(e), index: Box::new(index) }, start);
            } else if self.at(".") && self.peek_at(1).is_some_and(|t| t.class == TokenClass::Identifier || t.class == TokenClass::Keyword) {
                self.pos += 1;
                let attr = self.peek().unwrap().lexeme.clone();
                self.pos += 1;
                e = self.mk(ExprKind::Attribute { value: Box::new(e), attr }, start);
            } else {
                return Ok(e);
            }
        }
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        while !self.at(")") {
            let start = self.pos;
            let arg = if self.eat("**") || self.eat("*") {
                let op = self.toks[start].lexeme.clone();
                let v = self.test()?;
                self.mk(ExprKind::Starred { op, value: Box::new(v) }, start)
            } else if self.peek().is_some_and(|t| t.class == TokenClass::Identifier)
                && self.peek_at(1).is_some_and(|t| t.is("="))
            {
                let name = self.ident()?;
                self.pos += 1;
                let v = self.test()?;
                self.mk(ExprKind::Keyword { name, value: Box::new(v) }, start)
            } else {
                let e = self.named_test()?;
                if self.at("for") || self.at("async") {
                    let generators = self.comp_for()?;
                    self.mk(ExprKind::Comprehension { kind: CompKind::Generator, element: Box::new(e), generators }, start)
                } else {
                    e
                }
            };
            args.push(arg);
            if !self.eat(",") {
                break;
            }
        }
        Ok(args)
    }

    fn subscript_list(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let first = self.subscript()?;
        if !self.at(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(",") {
            if self.at("]") {
                break;
            }
            items.push(self.subscript()?);
        }
        Ok(self.mk(ExprKind::Tuple(items), start))
    }

    fn subscript(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let lower = if self.at(":") { None } else { Some(Box::new(self.list_item(true)?)) };
        if !self.at(":") {
            return lower.map(|b| *b).ok_or(());
        }
        self.pos += 1;
        let bound = |p: &mut Self| -> PResult<Option<Box<Expr>>> {
            if p.at(":") || p.at("]") || p.at(",") {
                Ok(None)
            } else {
                Ok(Some(Box::new(p.test()?)))
            }
        };
        let upper = bound(self)?;
        let step = if self.eat(":") { bound(self)? } else { None };
        Ok(self.mk(ExprKind::Slice { lower, upper, step }, start))
    }

    fn comp_for(&mut self) -> PResult<Vec<Generator>> {
        let mut gens = Vec::new();
        loop {
            self.eat("async");
            if !self.eat("for") {
                break;
            }
            let target = self.target_list()?;
            self.expect("in")?;
            let iter = self.or_test()?;
            let mut ifs = Vec::new();
            while self.eat("if") {
                ifs.push(self.or_test_nocond()?);
            }
            gens.push(Generator { target, iter, ifs });
        }
        if gens.is_empty() {
            Err(())
        } else {
            Ok(gens)
        }
    }

    fn or_test_nocond(&mut self) -> PResult<Expr> {
        if self.at("lambda") {
            return self.lambda();
        }
        self.or_test()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let t = self.peek().ok_or(())?;
        match t.class {
            TokenClass::Identifier => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Name(t.lexeme.clone()), start))
            }
            TokenClass::LiteralNumber => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Number(t.lexeme.clone()), start))
            }
            TokenClass::LiteralString => {
                let mut parts = Vec::new();
                while let Some(s) = self.peek().filter(|t| t.class == TokenClass::LiteralString) {
                    parts.push(s.lexeme.as_str());
                    self.pos += 1;
                }
                Ok(self.mk(ExprKind::Str(parts.join(" ")), start))
            }
            TokenClass::Keyword if matches!(t.lexeme.as_str(), "True" | "False" | "None") => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Constant(t.lexeme.clone()), start))
            }
            TokenClass::Operator if t.is("...") => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Constant("...".into()), start))
            }
            TokenClass::Punctuation => match t.lexeme.as_str() {
                "(" => self.paren(),
                "[" => self.list_display(),
                "{" => self.brace_display(),
                _ => Err(()),
            },
            _ => Err(()),
        }
    }

    fn paren(&mut self) -> PResult<Expr> {
        let start = self.pos;
        self.expect("(")?;
        if self.eat(")") {
            return Ok(self.mk(ExprKind::Tuple(vec![]), start));
        }
        if self.at("yield") {
            let y = self.yield_expr()?;
            self.expect(")")?;
            return Ok(y);
        }
        let first = self.list_item(true)?;
        if self.at("for") || self.at("async") {
            let generators = self.comp_for()?;
            self.expect(")")?;
            return Ok(self.mk(ExprKind::Comprehension { kind: CompKind::Generator, element: Box::new(first), generators }, start));
        }
        if self.eat(")") {
            let mut inner = first;
            inner.span = self.toks[start].start..self.last_end();
            return Ok(inner);
        }
        let mut items = vec![first];
        while self.eat(",") {
            if self.at(")") {
                break;
            }
            items.push(self.list_item(true)?);
        }
        self.expect(")")?;
        Ok(self.mk(ExprKind::Tuple(items), start))
    }

    fn list_display(&mut self) -> PResult<Expr> {
        let start = self.pos;
        self.expect("[")?;
        if self.eat("]") {
            return Ok(self.mk(ExprKind::List(vec![]), start));
        }
        let first = self.list_item(true)?;
        if self.at("for") || self.at("async") {
            let generators = self.comp_for()?;
            self.expect("]")?;
            return Ok(self.mk(ExprKind::Comprehension { kind: CompKind::List, element: Box::new(first), generators }, start));
        }
        let mut items = vec![first];
        while self.eat(",") {
            if self.at("]") {
                break;
            }
            items.push(self.list_item(true)?);
        }
        self.expect("]")?;
        Ok(self.mk(ExprKind::List(items), start))
    }

    fn dict_item(&mut self) -> PResult<Expr> {
        let start = self.pos;
        if self.eat("**") {
            let v = self.bitor()?;
            return Ok(self.mk(ExprKind::Starred { op: "**".into(), value: Box::new(v) }, start));
        }
        let key = self.test()?;
        self.expect(":")?;
        let value = self.test()?;
        Ok(self.mk(ExprKind::KeyValue { key: Box::new(key), value: Box::new(value) }, start))
    }

    fn brace_display(&mut self) -> PResult<Expr> {
        let start = self.pos;
        self.expect("{")?;
        if self.eat("}") {
            return Ok(self.mk(ExprKind::Dict(vec![]), start));
        }
        let is_dict = self.at("**") || {
            let save = self.pos;
            let ok = self.test().is_ok() && self.at(":");
            self.pos = save;
            ok
        };
        let first = if is_dict { self.dict_item()? } else { self.list_item(true)? };
        if self.at("for") || self.at("async") {
            let generators = self.comp_for()?;
            self.expect("}")?;
            let kind = if is_dict { CompKind::Dict } else { CompKind::Set };
            return Ok(self.mk(ExprKind::Comprehension { kind, element: Box::new(first), generators }, start));
        }
        let mut items = vec![first];
        while self.eat(",") {
            if self.at("}") {
                break;
            }
            items.push(if is_dict { self.dict_item()? } else { self.list_item(true)? });
        }
        self.expect("}")?;
        Ok(self.mk(if is_dict { ExprKind::Dict(items) } else { ExprKind::Set(items) }, start))
    }

    fn with_items(&mut self) -> PResult<Vec<(Expr, Option<Expr>)>> {
        let mut items = Vec::new();
        let parenthesized = self.at("(") && {
            // `with (a as b, c as d):` form
            let close = matching_close(self.toks, self.pos);
            close == Some(self.end - 1) && (self.pos..self.end).any(|k| self.toks[k].is_keyword("as"))
        };
        if parenthesized {
            self.pos += 1;
            self.end -= 1;
        }
        loop {
            let e = self.test()?;
            let target = if self.eat("as") { Some(self.target_item()?) } else { None };
            items.push((e, target));
            if !self.eat(",") || self.peek().is_none() {
                break;
            }
        }
        if parenthesized {
            if self.pos != self.end {
                return Err(());
            }
            self.end += 1;
            self.pos += 1;
        }
        Ok(items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::lexer::tokenize_str;

    fn parse(src: &str) -> Module {
        parse_module(tokenize_str(src).unwrap()).unwrap()
    }

    #[test]
    fn parses_nested_blocks() {
        let m = parse("def f(n):\n    if n:\n        return 1\n    else:\n        return 2\n");
        assert_eq!(m.recoveries, 0);
        let StmtKind::FunctionDef(f) = &m.body[0].kind else { panic!() };
        let StmtKind::If { arms } = &f.body[0].kind else { panic!() };
        assert_eq!(arms.len(), 2);
        assert_eq!(arms[1].kind, ArmKind::Else);
    }

    #[test]
    fn inline_suites_and_semicolons() {
        let m = parse("if x: a = 1; b = 2\nelse: pass\nwhile i < n: i += 1\n");
        assert_eq!(m.recoveries, 0);
        let StmtKind::If { arms } = &m.body[0].kind else { panic!() };
        assert_eq!(arms[0].body.len(), 2);
        assert!(matches!(m.body[1].kind, StmtKind::While { .. }));
    }

    #[test]
    fn brackets_span_lines() {
        let m = parse("x = [1,\n  2,\n      3]\ny = (a +\n b)\n");
        assert_eq!(m.body.len(), 2);
        assert_eq!(m.recoveries, 0);
    }

    #[test]
    fn mixed_indentation_is_an_error() {
        let err = parse_module(tokenize_str("def f():\n    x = 1\n\treturn x\n").unwrap()).unwrap_err();
        assert!(matches!(err, SourceError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn dedent_to_unknown_level_is_an_error() {
        let err = parse_module(tokenize_str("if x:\n        a = 1\n    b = 2\n").unwrap()).unwrap_err();
        assert!(matches!(err, SourceError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn missing_block_is_an_error() {
        assert!(parse_module(tokenize_str("def f():\nreturn 1\n").unwrap()).is_err());
        assert!(parse_module(tokenize_str("else:\n    pass\n").unwrap()).is_err());
        assert!(parse_module(tokenize_str("x = (1,\n").unwrap()).is_err());
    }

    #[test]
    fn python2_print_is_recovered() {
        let m = parse("print 'hello', x\n");
        assert_eq!(m.recoveries, 1);
        assert!(matches!(m.body[0].kind, StmtKind::Opaque(_)));
    }

    #[test]
    fn expression_forms() {
        let src = "\
a, *b = f(x, *y, k=1, **z)
c = [i * 2 for i in range(10) if i % 2 == 0]
d = {k: v for k, v in items.items()}
e = lambda p, q=2: p if q else -p ** 2
g = s[1:2, ::3][0]
h = not a in b and c is not None or d < e <= f
with open(p) as fh, lock:
    data = fh.read()
@dec(1)
def k(a, /, b: int = 3, *args, c, **kw) -> str:
    yield from a
try:
    pass
except (A, B) as err:
    raise ValueError('x') from err
else:
    pass
finally:
    pass
for i, (j, k) in enumerate(z):
    continue
else:
    pass
";
        let m = parse(src);
        assert_eq!(m.recoveries, 0, "{:#?}", m.body);
        assert_eq!(m.body.len(), 10);
    }

    #[test]
    fn signature_params() {
        let m = parse("def k(a, /, b=3, *args, c, **kw):\n    pass\n");
        let StmtKind::FunctionDef(f) = &m.body[0].kind else { panic!() };
        let names: Vec<_> = f.params.iter().map(|p| (p.name.as_str(), p.has_default())).collect();
        assert_eq!(names, [("a", false), ("/", false), ("b", true), ("*args", false), ("c", false), ("**kw", false)]);
    }
}
