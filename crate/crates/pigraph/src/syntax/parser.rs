//! Recursive-descent parser for the model grammar.

use super::lexer::{tokenize, Token};
use super::{
    Decl, GraphAst, IteratorAst, NameRef, Prefix, PrefixKind, ProcessAst, Sigil, Span, SyntaxError,
};

pub fn parse_source(source: &str) -> Result<GraphAst, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    parser.graph()
}

struct Parser {
    tokens: Vec<(Token, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn advance(&mut self) -> Token {
        let token = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn error(&self, expected: &str) -> SyntaxError {
        SyntaxError::Parse {
            span: self.span(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, token: Token, expected: &str) -> Result<Span, SyntaxError> {
        if *self.peek() == token {
            let span = self.span();
            self.advance();
            Ok(span)
        } else {
            Err(self.error(expected))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<Decl, SyntaxError> {
        let span = self.span();
        match self.peek().clone() {
            Token::Ident(ident) => {
                self.advance();
                Ok(Decl { ident, span })
            }
            _ => Err(self.error(expected)),
        }
    }

    /// `graph := free(list) restr(list) iterator+`
    fn graph(&mut self) -> Result<GraphAst, SyntaxError> {
        self.expect(Token::KwFree, "`free`")?;
        let free_names = self.decl_list()?;
        self.expect(Token::KwRestr, "`restr`")?;
        let restrictions = self.decl_list()?;

        let mut iterators = Vec::new();
        loop {
            match self.peek() {
                Token::Star => iterators.push(self.iterator()?),
                Token::Eof if !iterators.is_empty() => break,
                Token::Eof => {
                    return Err(SyntaxError::NoIterators { span: self.span() });
                }
                _ => return Err(self.error("`*[` starting an iterator")),
            }
        }
        Ok(GraphAst {
            free_names,
            restrictions,
            iterators,
        })
    }

    /// `( ident (,? ident)* )` with commas optional.
    fn decl_list(&mut self) -> Result<Vec<Decl>, SyntaxError> {
        self.expect(Token::LParen, "`(`")?;
        let mut decls = Vec::new();
        loop {
            match self.peek() {
                Token::RParen => {
                    self.advance();
                    return Ok(decls);
                }
                Token::Comma if !decls.is_empty() => {
                    self.advance();
                }
                _ => decls.push(self.ident("an identifier or `)`")?),
            }
        }
    }

    /// `*[ priv(list) bind(list) process ]`
    fn iterator(&mut self) -> Result<IteratorAst, SyntaxError> {
        let span = self.expect(Token::Star, "`*`")?;
        self.expect(Token::LBracket, "`[`")?;
        self.expect(Token::KwPriv, "`priv`")?;
        let privates = self.decl_list()?;
        self.expect(Token::KwBind, "`bind`")?;
        let binders = self.decl_list()?;
        let body = self.process()?;
        self.expect(Token::RBracket, "`]`")?;
        Ok(IteratorAst {
            privates,
            binders,
            body,
            span,
        })
    }

    /// `process := (prefix .)* 0`
    fn process(&mut self) -> Result<ProcessAst, SyntaxError> {
        let mut prefixes = Vec::new();
        loop {
            if *self.peek() == Token::Zero {
                self.advance();
                return Ok(ProcessAst { prefixes });
            }
            prefixes.push(self.prefix()?);
            self.expect(Token::Dot, "`.`")?;
        }
    }

    fn prefix(&mut self) -> Result<Prefix, SyntaxError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Token::KwTau => {
                self.advance();
                PrefixKind::Silent
            }
            Token::LBracket => {
                self.advance();
                let left = self.name_ref()?;
                self.expect(Token::Eq, "`=`")?;
                let right = self.name_ref()?;
                self.expect(Token::RBracket, "`]`")?;
                PrefixKind::Match { left, right }
            }
            Token::KwSum => {
                self.advance();
                PrefixKind::Sum(self.branches(Token::Plus, "`+`", "sum", span)?)
            }
            Token::KwPar => {
                self.advance();
                PrefixKind::Par(self.branches(Token::ParSep, "`||`", "par", span)?)
            }
            Token::Ident(_) | Token::Dollar | Token::Caret | Token::Question => {
                let chan = self.name_ref()?;
                match self.peek() {
                    Token::Bang => {
                        self.advance();
                        self.expect(Token::Lt, "`<`")?;
                        let datum = self.name_ref()?;
                        self.expect(Token::Gt, "`>`")?;
                        PrefixKind::Output { chan, datum }
                    }
                    Token::Question => {
                        self.advance();
                        self.expect(Token::LParen, "`(`")?;
                        let binder = self.name_ref()?;
                        self.expect(Token::RParen, "`)`")?;
                        PrefixKind::Input { chan, binder }
                    }
                    _ => return Err(self.error("`!<` or `?(` after a channel name")),
                }
            }
            _ => {
                return Err(self.error(
                    "a prefix (`tau`, output, input, `[a=b]`, `sum{..}`, `par{..}`) or `0`",
                ))
            }
        };
        Ok(Prefix { kind, span })
    }

    /// `{ process (sep process)+ }` for sum/par bodies.
    fn branches(
        &mut self,
        sep: Token,
        sep_name: &str,
        construct: &'static str,
        span: Span,
    ) -> Result<Vec<ProcessAst>, SyntaxError> {
        self.expect(Token::LBrace, "`{`")?;
        let mut branches = vec![self.process()?];
        loop {
            if *self.peek() == sep {
                self.advance();
                branches.push(self.process()?);
            } else if *self.peek() == Token::RBrace {
                self.advance();
                break;
            } else {
                return Err(self.error(&format!("{sep_name} or `}}`")));
            }
        }
        if branches.len() < 2 {
            return Err(SyntaxError::TooFewBranches { span, construct });
        }
        Ok(branches)
    }

    /// A name occurrence: optional sigil followed by an identifier.
    fn name_ref(&mut self) -> Result<NameRef, SyntaxError> {
        let span = self.span();
        let sigil = match self.peek() {
            Token::Dollar => {
                self.advance();
                Some(Sigil::Private)
            }
            Token::Caret => {
                self.advance();
                Some(Sigil::Restriction)
            }
            Token::Question => {
                self.advance();
                Some(Sigil::Binder)
            }
            _ => None,
        };
        match self.peek().clone() {
            Token::Ident(ident) => {
                self.advance();
                Ok(NameRef { ident, sigil, span })
            }
            _ => Err(self.error("a name")),
        }
    }
}
