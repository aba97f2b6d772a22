//! Tokenizer for the model grammar.

use super::{Span, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    KwFree,
    KwRestr,
    KwPriv,
    KwBind,
    KwTau,
    KwSum,
    KwPar,
    Zero,
    Star,
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Bang,
    Question,
    Lt,
    Gt,
    Eq,
    Dot,
    Plus,
    ParSep,
    Comma,
    Dollar,
    Caret,
    Eof,
}

impl Token {
    /// Human-readable form used in error messages.
    pub fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::KwFree => "`free`".into(),
            Token::KwRestr => "`restr`".into(),
            Token::KwPriv => "`priv`".into(),
            Token::KwBind => "`bind`".into(),
            Token::KwTau => "`tau`".into(),
            Token::KwSum => "`sum`".into(),
            Token::KwPar => "`par`".into(),
            Token::Zero => "`0`".into(),
            Token::Star => "`*`".into(),
            Token::LBracket => "`[`".into(),
            Token::RBracket => "`]`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::LBrace => "`{`".into(),
            Token::RBrace => "`}`".into(),
            Token::Bang => "`!`".into(),
            Token::Question => "`?`".into(),
            Token::Lt => "`<`".into(),
            Token::Gt => "`>`".into(),
            Token::Eq => "`=`".into(),
            Token::Dot => "`.`".into(),
            Token::Plus => "`+`".into(),
            Token::ParSep => "`||`".into(),
            Token::Comma => "`,`".into(),
            Token::Dollar => "`$`".into(),
            Token::Caret => "`^`".into(),
            Token::Eof => "end of input".into(),
        }
    }
}

pub fn tokenize(source: &str) -> Result<Vec<(Token, Span)>, SyntaxError> {
    let mut tokens = Vec::new();
    let mut chars = source.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            'A'..='Z' | 'a'..='z' | '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let token = match ident.as_str() {
                    "free" => Token::KwFree,
                    "restr" => Token::KwRestr,
                    "priv" => Token::KwPriv,
                    "bind" => Token::KwBind,
                    "tau" => Token::KwTau,
                    "sum" => Token::KwSum,
                    "par" => Token::KwPar,
                    _ => Token::Ident(ident),
                };
                tokens.push((token, span));
            }
            '0' => {
                bump!();
                tokens.push((Token::Zero, span));
            }
            '|' => {
                bump!();
                if chars.peek() == Some(&'|') {
                    bump!();
                    tokens.push((Token::ParSep, span));
                } else {
                    return Err(SyntaxError::Lex { span, ch: '|' });
                }
            }
            _ => {
                let token = match c {
                    '*' => Token::Star,
                    '[' => Token::LBracket,
                    ']' => Token::RBracket,
                    '(' => Token::LParen,
                    ')' => Token::RParen,
                    '{' => Token::LBrace,
                    '}' => Token::RBrace,
                    '!' => Token::Bang,
                    '?' => Token::Question,
                    '<' => Token::Lt,
                    '>' => Token::Gt,
                    '=' => Token::Eq,
                    '.' => Token::Dot,
                    '+' => Token::Plus,
                    ',' => Token::Comma,
                    '$' => Token::Dollar,
                    '^' => Token::Caret,
                    other => return Err(SyntaxError::Lex { span, ch: other }),
                };
                bump!();
                tokens.push((token, span));
            }
        }
    }
    tokens.push((Token::Eof, Span { line, col }));
    Ok(tokens)
}
