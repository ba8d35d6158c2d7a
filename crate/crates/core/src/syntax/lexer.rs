use std::fmt;

use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Int(i64),
    Str(String),
    Backslash,
    Dot,
    Colon,
    Arrow,
    LParen,
    RParen,
    Equals,
    Plus,
    Minus,
    Star,
    Leq,
    Gt,
    Let,
    In,
    If,
    Then,
    Else,
    Read,
    Tick,
    Def,
    Main,
    True,
    False,
    IntTy,
    BoolTy,
    Eof,
}

impl Token {
    fn keyword(word: &str) -> Option<Token> {
        Some(match word {
            "let" => Token::Let,
            "in" => Token::In,
            "if" => Token::If,
            "then" => Token::Then,
            "else" => Token::Else,
            "read" => Token::Read,
            "tick" => Token::Tick,
            "def" => Token::Def,
            "main" => Token::Main,
            "true" => Token::True,
            "false" => Token::False,
            "int" => Token::IntTy,
            "bool" => Token::BoolTy,
            _ => return None,
        })
    }

    /// Description used in "expected ..." lists.
    pub fn describe(&self) -> String {
        match self {
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::Int(n) => format!("integer `{n}`"),
            Token::Str(s) => format!("string {s:?}"),
            Token::Eof => "end of input".to_string(),
            other => format!("`{other}`"),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Token::Ident(name) => return f.write_str(name),
            Token::Int(n) => return write!(f, "{n}"),
            Token::Str(s) => return write!(f, "{s:?}"),
            Token::Backslash => "\\",
            Token::Dot => ".",
            Token::Colon => ":",
            Token::Arrow => "->",
            Token::LParen => "(",
            Token::RParen => ")",
            Token::Equals => "=",
            Token::Plus => "+",
            Token::Minus => "-",
            Token::Star => "*",
            Token::Leq => "<=",
            Token::Gt => ">",
            Token::Let => "let",
            Token::In => "in",
            Token::If => "if",
            Token::Then => "then",
            Token::Else => "else",
            Token::Read => "read",
            Token::Tick => "tick",
            Token::Def => "def",
            Token::Main => "main",
            Token::True => "true",
            Token::False => "false",
            Token::IntTy => "int",
            Token::BoolTy => "bool",
            Token::Eof => "<eof>",
        };
        f.write_str(s)
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub token: Token,
    pub pos: Pos,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn is_keyword(word: &str) -> bool {
    Token::keyword(word).is_some()
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let simple = match c {
            '\\' => Some(Token::Backslash),
            '.' => Some(Token::Dot),
            ':' => Some(Token::Colon),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            '=' => Some(Token::Equals),
            '+' => Some(Token::Plus),
            '*' => Some(Token::Star),
            '>' => Some(Token::Gt),
            _ => None,
        };
        if let Some(token) = simple {
            bump!();
            tokens.push(Spanned { token, pos });
            continue;
        }
        match c {
            '-' => {
                bump!();
                let token = if chars.get(i) == Some(&'>') {
                    bump!();
                    Token::Arrow
                } else {
                    Token::Minus
                };
                tokens.push(Spanned { token, pos });
            }
            '<' => {
                bump!();
                if chars.get(i) != Some(&'=') {
                    return Err(ParseError::new(pos, vec!["`<=`".into()], "`<`".into()));
                }
                bump!();
                tokens.push(Spanned {
                    token: Token::Leq,
                    pos,
                });
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(ParseError::new(
                                Pos { line, col },
                                vec!["closing `\"`".into()],
                                "end of line".into(),
                            ))
                        }
                        Some('"') => {
                            bump!();
                            break;
                        }
                        Some('\\') => {
                            bump!();
                            match chars.get(i) {
                                Some(&e @ ('"' | '\\')) => {
                                    s.push(e);
                                    bump!();
                                }
                                other => {
                                    return Err(ParseError::new(
                                        Pos { line, col },
                                        vec!["`\\\"`".into(), "`\\\\`".into()],
                                        other.map_or("end of input".into(), |c| format!("`\\{c}`")),
                                    ))
                                }
                            }
                        }
                        Some(&ch) => {
                            s.push(ch);
                            bump!();
                        }
                    }
                }
                tokens.push(Spanned {
                    token: Token::Str(s),
                    pos,
                });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
                let digits: String = chars[start..i].iter().collect();
                let n = digits.parse::<i64>().map_err(|_| {
                    ParseError::new(pos, vec!["64-bit integer".into()], format!("`{digits}`"))
                })?;
                tokens.push(Spanned {
                    token: Token::Int(n),
                    pos,
                });
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_continue(chars[i]) {
                    bump!();
                }
                let word: String = chars[start..i].iter().collect();
                let token = Token::keyword(&word).unwrap_or(Token::Ident(word));
                tokens.push(Spanned { token, pos });
            }
            other => {
                return Err(ParseError::new(
                    pos,
                    vec!["token".into()],
                    format!("character `{other}`"),
                ))
            }
        }
    }
    tokens.push(Spanned {
        token: Token::Eof,
        pos: Pos { line, col },
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<Token> {
        tokenize(text).unwrap().into_iter().map(|t| t.token).collect()
    }

    #[test]
    fn comments_and_arrows() {
        assert_eq!(
            kinds("x -> y -- trailing\n- 1"),
            vec![
                Token::Ident("x".into()),
                Token::Arrow,
                Token::Ident("y".into()),
                Token::Minus,
                Token::Int(1),
                Token::Eof
            ]
        );
    }

    #[test]
    fn string_escapes() {
        assert_eq!(
            kinds(r#"read "a\"b\\""#),
            vec![Token::Read, Token::Str("a\"b\\".into()), Token::Eof]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("main =\n  x").unwrap();
        assert_eq!(toks[2].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn unterminated_string() {
        let err = tokenize("read \"abc").unwrap_err();
        assert_eq!(err.line, 1);
    }
}
