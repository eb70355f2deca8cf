//! Tokenizer shared by the contract parser and the specification parser.
//!
//! Keywords are not distinguished here; both parsers interpret `Ident`
//! tokens contextually. Line comments start with `//` or `#` and run to the
//! end of the line.

use crate::diag::{Diagnostic, Span};
use num_bigint::BigUint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(BigUint),
    StrLit(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    /// `=>` in mapping types.
    Arrow,
    /// `==>` in specification implications.
    Implies,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Bang,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    PlusPlus,
    /// End of input, carried so parsers always have a span to point at.
    Eof,
}

impl Tok {
    /// Rendering used in "expected X, found Y" messages.
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("`{n}`"),
            Tok::StrLit(_) => "string literal".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LBracket => "`[`".to_string(),
            Tok::RBracket => "`]`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Colon => "`:`".to_string(),
            Tok::Dot => "`.`".to_string(),
            Tok::Arrow => "`=>`".to_string(),
            Tok::Implies => "`==>`".to_string(),
            Tok::Assign => "`=`".to_string(),
            Tok::Plus => "`+`".to_string(),
            Tok::Minus => "`-`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::Slash => "`/`".to_string(),
            Tok::Bang => "`!`".to_string(),
            Tok::Lt => "`<`".to_string(),
            Tok::Gt => "`>`".to_string(),
            Tok::Le => "`<=`".to_string(),
            Tok::Ge => "`>=`".to_string(),
            Tok::EqEq => "`==`".to_string(),
            Tok::Ne => "`!=`".to_string(),
            Tok::AndAnd => "`&&`".to_string(),
            Tok::OrOr => "`||`".to_string(),
            Tok::PlusPlus => "`++`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Tokenizes `src`, reporting the first lexical error against `file`.
pub fn tokenize(file: &str, src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! peek {
        ($off:expr) => {
            chars.get(i + $off).copied()
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        let advance = |n: usize, line: &mut u32, col: &mut u32, i: &mut usize| {
            for k in 0..n {
                if chars[*i + k] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
            }
            *i += n;
        };

        if c.is_whitespace() {
            advance(1, &mut line, &mut col, &mut i);
            continue;
        }
        if c == '#' || (c == '/' && peek!(1) == Some('/')) {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut line, &mut col, &mut i);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(1, &mut line, &mut col, &mut i);
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(text), span });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(1, &mut line, &mut col, &mut i);
            }
            let text: String = chars[start..i].iter().collect();
            let n: BigUint = text.parse().expect("digit run parses as unsigned integer");
            out.push(Token { tok: Tok::Number(n), span });
            continue;
        }
        if c == '"' {
            advance(1, &mut line, &mut col, &mut i);
            let mut s = String::new();
            loop {
                match chars.get(i).copied() {
                    None | Some('\n') => {
                        return Err(Diagnostic::error(file, span, "unterminated string literal"))
                    }
                    Some('"') => {
                        advance(1, &mut line, &mut col, &mut i);
                        break;
                    }
                    Some('\\') => {
                        let esc = peek!(1);
                        match esc {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            _ => {
                                return Err(Diagnostic::error(
                                    file,
                                    Span::new(line, col),
                                    "unknown escape sequence in string literal",
                                ))
                            }
                        }
                        advance(2, &mut line, &mut col, &mut i);
                    }
                    Some(other) => {
                        s.push(other);
                        advance(1, &mut line, &mut col, &mut i);
                    }
                }
            }
            out.push(Token { tok: Tok::StrLit(s), span });
            continue;
        }

        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            ';' => (Tok::Semi, 1),
            ':' => (Tok::Colon, 1),
            '.' => (Tok::Dot, 1),
            '+' if peek!(1) == Some('+') => (Tok::PlusPlus, 2),
            '+' => (Tok::Plus, 1),
            '-' => (Tok::Minus, 1),
            '*' => (Tok::Star, 1),
            '/' => (Tok::Slash, 1),
            '=' if peek!(1) == Some('=') && peek!(2) == Some('>') => (Tok::Implies, 3),
            '=' if peek!(1) == Some('=') => (Tok::EqEq, 2),
            '=' if peek!(1) == Some('>') => (Tok::Arrow, 2),
            '=' => (Tok::Assign, 1),
            '!' if peek!(1) == Some('=') => (Tok::Ne, 2),
            '!' => (Tok::Bang, 1),
            '<' if peek!(1) == Some('=') => (Tok::Le, 2),
            '<' => (Tok::Lt, 1),
            '>' if peek!(1) == Some('=') => (Tok::Ge, 2),
            '>' => (Tok::Gt, 1),
            '&' if peek!(1) == Some('&') => (Tok::AndAnd, 2),
            '|' if peek!(1) == Some('|') => (Tok::OrOr, 2),
            _ => {
                return Err(Diagnostic::error(
                    file,
                    span,
                    format!("unexpected character `{c}`"),
                ))
            }
        };
        advance(len, &mut line, &mut col, &mut i);
        out.push(Token { tok, span });
    }

    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    Ok(out)
}
