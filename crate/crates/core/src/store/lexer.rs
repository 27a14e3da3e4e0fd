//! Token scanner shared by the Turtle subset and the query language.
//!
//! The two grammars share their term syntax (IRIs, prefixed names, literals),
//! so they share one scanner. `Mode` controls the few places the languages
//! diverge: query mode admits variables, braces, parentheses, and comparison
//! operators; turtle mode reports those characters as unsupported constructs.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Turtle,
    Query,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    /// `@prefix` directive keyword (turtle only).
    PrefixDirective,
    /// `<...>` absolute IRI (content between the angle brackets).
    IriRef(String),
    /// `prefix:local`; either part may be empty.
    PrefixedName { prefix: String, local: String },
    /// Bare identifier: `a`, `true`, `false`, or a query keyword.
    Ident(String),
    /// Quoted string with escapes resolved.
    StringLit(String),
    /// Raw integer lexical (sign included).
    IntegerLit(String),
    /// Raw decimal lexical (sign included, one `.`).
    DecimalLit(String),
    /// `?name` query variable.
    Var(String),
    /// `^^` datatype marker.
    CaretCaret,
    Dot,
    Semicolon,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    /// Comparison operator: one of `=`, `!=`, `<`, `<=`, `>`, `>=`.
    Cmp(String),
}

impl Token {
    pub fn describe(&self) -> String {
        match self {
            Token::PrefixDirective => "`@prefix`".to_string(),
            Token::IriRef(i) => format!("IRI `<{i}>`"),
            Token::PrefixedName { prefix, local } => format!("name `{prefix}:{local}`"),
            Token::Ident(w) => format!("`{w}`"),
            Token::StringLit(_) => "string literal".to_string(),
            Token::IntegerLit(v) | Token::DecimalLit(v) => format!("number `{v}`"),
            Token::Var(v) => format!("variable `?{v}`"),
            Token::CaretCaret => "`^^`".to_string(),
            Token::Dot => "`.`".to_string(),
            Token::Semicolon => "`;`".to_string(),
            Token::Comma => "`,`".to_string(),
            Token::LBrace => "`{`".to_string(),
            Token::RBrace => "`}`".to_string(),
            Token::LParen => "`(`".to_string(),
            Token::RParen => "`)`".to_string(),
            Token::Cmp(c) => format!("`{c}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub pos: Pos,
    pub message: String,
}

struct Scanner<'a> {
    chars: Vec<char>,
    index: usize,
    line: u32,
    col: u32,
    mode: Mode,
    input: &'a str,
}

pub(crate) fn lex(input: &str, mode: Mode) -> Result<Vec<(Token, Pos)>, LexError> {
    let mut scanner = Scanner {
        chars: input.chars().collect(),
        index: 0,
        line: 1,
        col: 1,
        mode,
        input,
    };
    scanner.run()
}

impl<'a> Scanner<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.index).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.index + offset).copied()
    }

    fn advance(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.index += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> LexError {
        LexError {
            pos,
            message: message.into(),
        }
    }

    fn run(&mut self) -> Result<Vec<(Token, Pos)>, LexError> {
        let mut tokens = Vec::new();
        while let Some(c) = self.peek() {
            let start = self.pos();
            match c {
                c if c.is_whitespace() => {
                    self.advance();
                }
                '#' => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.advance();
                    }
                }
                '.' => {
                    self.advance();
                    tokens.push((Token::Dot, start));
                }
                ';' => {
                    self.advance();
                    tokens.push((Token::Semicolon, start));
                }
                ',' => {
                    self.advance();
                    tokens.push((Token::Comma, start));
                }
                '<' => self.scan_angle(start, &mut tokens)?,
                '"' => {
                    let s = self.scan_string(start)?;
                    tokens.push((Token::StringLit(s), start));
                }
                '^' => {
                    self.advance();
                    if self.peek() == Some('^') {
                        self.advance();
                        tokens.push((Token::CaretCaret, start));
                    } else {
                        return Err(self.error(start, "stray `^` (expected `^^`)"));
                    }
                }
                '@' => {
                    self.advance();
                    let word = self.scan_word();
                    match word.as_str() {
                        "prefix" => tokens.push((Token::PrefixDirective, start)),
                        "base" => {
                            return Err(self.error(start, "unsupported construct: `@base`"));
                        }
                        other => {
                            return Err(self.error(
                                start,
                                format!("unsupported construct: language tag or directive `@{other}`"),
                            ));
                        }
                    }
                }
                '_' => {
                    return Err(self.error(start, "unsupported construct: blank node"));
                }
                '[' | ']' => {
                    return Err(self.error(start, "unsupported construct: blank node"));
                }
                '(' | ')' if self.mode == Mode::Turtle => {
                    return Err(self.error(start, "unsupported construct: collection"));
                }
                '(' => {
                    self.advance();
                    tokens.push((Token::LParen, start));
                }
                ')' => {
                    self.advance();
                    tokens.push((Token::RParen, start));
                }
                '{' | '}' if self.mode == Mode::Turtle => {
                    return Err(self.error(start, format!("unexpected `{c}`")));
                }
                '{' => {
                    self.advance();
                    tokens.push((Token::LBrace, start));
                }
                '}' => {
                    self.advance();
                    tokens.push((Token::RBrace, start));
                }
                '?' => {
                    if self.mode == Mode::Turtle {
                        return Err(self.error(start, "variables are not allowed here"));
                    }
                    self.advance();
                    let name = self.scan_word();
                    if name.is_empty() {
                        return Err(self.error(start, "expected variable name after `?`"));
                    }
                    tokens.push((Token::Var(name), start));
                }
                '=' => {
                    self.require_query(start, "=")?;
                    self.advance();
                    tokens.push((Token::Cmp("=".into()), start));
                }
                '!' => {
                    self.require_query(start, "!")?;
                    self.advance();
                    if self.peek() == Some('=') {
                        self.advance();
                        tokens.push((Token::Cmp("!=".into()), start));
                    } else {
                        return Err(self.error(start, "stray `!` (expected `!=`)"));
                    }
                }
                '>' => {
                    self.require_query(start, ">")?;
                    self.advance();
                    if self.peek() == Some('=') {
                        self.advance();
                        tokens.push((Token::Cmp(">=".into()), start));
                    } else {
                        tokens.push((Token::Cmp(">".into()), start));
                    }
                }
                '-' | '0'..='9' => {
                    let tok = self.scan_number(start)?;
                    tokens.push((tok, start));
                }
                c if c.is_alphabetic() => self.scan_name(start, &mut tokens)?,
                ':' => self.scan_name(start, &mut tokens)?,
                other => {
                    return Err(self.error(start, format!("unexpected character `{other}`")));
                }
            }
        }
        Ok(tokens)
    }

    fn require_query(&self, pos: Pos, what: &str) -> Result<(), LexError> {
        if self.mode == Mode::Turtle {
            Err(self.error(pos, format!("unexpected `{what}`")))
        } else {
            Ok(())
        }
    }

    /// `<` begins an IRI reference when a matching `>` appears before any
    /// whitespace; in query mode it is otherwise the `<`/`<=` operator.
    fn scan_angle(&mut self, start: Pos, tokens: &mut Vec<(Token, Pos)>) -> Result<(), LexError> {
        let mut looks_like_iri = false;
        let mut offset = 1;
        while let Some(c) = self.peek_at(offset) {
            if c == '>' {
                looks_like_iri = true;
                break;
            }
            if c.is_whitespace() {
                break;
            }
            offset += 1;
        }
        if looks_like_iri {
            self.advance(); // <
            let mut iri = String::new();
            loop {
                match self.advance() {
                    Some('>') => break,
                    Some(c) => iri.push(c),
                    None => return Err(self.error(start, "unterminated IRI reference")),
                }
            }
            tokens.push((Token::IriRef(iri), start));
            return Ok(());
        }
        self.require_query(start, "<")?;
        self.advance();
        if self.peek() == Some('=') {
            self.advance();
            tokens.push((Token::Cmp("<=".into()), start));
        } else {
            tokens.push((Token::Cmp("<".into()), start));
        }
        Ok(())
    }

    fn scan_string(&mut self, start: Pos) -> Result<String, LexError> {
        self.advance(); // opening quote
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.error(start, "unterminated string literal")),
                Some('\n') => {
                    return Err(self.error(start, "string literal not closed before end of line"));
                }
                Some('"') => {
                    self.advance();
                    return Ok(out);
                }
                Some('\\') => {
                    let esc_pos = self.pos();
                    self.advance();
                    match self.advance() {
                        Some('\\') => out.push('\\'),
                        Some('"') => out.push('"'),
                        Some('n') => out.push('\n'),
                        Some('r') => out.push('\r'),
                        Some('t') => out.push('\t'),
                        Some('u') => {
                            let mut code = String::new();
                            for _ in 0..4 {
                                match self.advance() {
                                    Some(h) if h.is_ascii_hexdigit() => code.push(h),
                                    _ => {
                                        return Err(self.error(esc_pos, "invalid \\u escape (need 4 hex digits)"));
                                    }
                                }
                            }
                            let value = u32::from_str_radix(&code, 16).expect("hex digits");
                            match char::from_u32(value) {
                                Some(c) => out.push(c),
                                None => {
                                    return Err(self.error(esc_pos, "\\u escape is not a valid character"));
                                }
                            }
                        }
                        Some(other) => {
                            return Err(self.error(esc_pos, format!("unknown escape `\\{other}`")));
                        }
                        None => return Err(self.error(start, "unterminated string literal")),
                    }
                }
                Some(_) => {
                    let c = self.advance().expect("peeked");
                    out.push(c);
                }
            }
        }
    }

    fn scan_number(&mut self, start: Pos) -> Result<Token, LexError> {
        let mut text = String::new();
        if self.peek() == Some('-') {
            text.push('-');
            self.advance();
        }
        if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            return Err(self.error(start, "expected digits after `-`"));
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            text.push(self.advance().expect("digit"));
        }
        // A decimal needs a digit after the dot; otherwise the dot is a
        // statement terminator.
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some(c) if c.is_ascii_digit()) {
            text.push(self.advance().expect("dot"));
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                text.push(self.advance().expect("digit"));
            }
            Ok(Token::DecimalLit(text))
        } else {
            Ok(Token::IntegerLit(text))
        }
    }

    /// Bare identifiers and prefixed names. Trailing dots on a local name
    /// are statement terminators, not name characters.
    fn scan_name(&mut self, start: Pos, tokens: &mut Vec<(Token, Pos)>) -> Result<(), LexError> {
        let word = self.scan_word();
        if self.peek() != Some(':') {
            if word.is_empty() {
                return Err(self.error(start, "unexpected `:`"));
            }
            tokens.push((Token::Ident(word), start));
            return Ok(());
        }
        self.advance(); // ':'
        let mut local = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                local.push(self.advance().expect("peeked"));
            } else {
                break;
            }
        }
        let mut trailing_dots = 0;
        while local.ends_with('.') {
            local.pop();
            trailing_dots += 1;
        }
        tokens.push((
            Token::PrefixedName {
                prefix: word,
                local,
            },
            start,
        ));
        for _ in 0..trailing_dots {
            tokens.push((Token::Dot, self.pos()));
        }
        let _ = self.input;
        Ok(())
    }

    fn scan_word(&mut self) -> String {
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                word.push(self.advance().expect("peeked"));
            } else {
                break;
            }
        }
        word
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(input: &str, mode: Mode) -> Vec<Token> {
        lex(input, mode).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn lexes_basic_statement() {
        let toks = kinds(":String1 :attackSuccessRate 0.5 .", Mode::Turtle);
        assert_eq!(
            toks,
            vec![
                Token::PrefixedName { prefix: "".into(), local: "String1".into() },
                Token::PrefixedName { prefix: "".into(), local: "attackSuccessRate".into() },
                Token::DecimalLit("0.5".into()),
                Token::Dot,
            ]
        );
    }

    #[test]
    fn trailing_dot_detaches_from_local_name() {
        let toks = kinds(":String1 a :ExtractionAttack.", Mode::Turtle);
        assert_eq!(
            toks,
            vec![
                Token::PrefixedName { prefix: "".into(), local: "String1".into() },
                Token::Ident("a".into()),
                Token::PrefixedName { prefix: "".into(), local: "ExtractionAttack".into() },
                Token::Dot,
            ]
        );
    }

    #[test]
    fn dotted_local_names_keep_interior_dots() {
        let toks = kinds(":G1.5.1 :p 1 .", Mode::Turtle);
        assert_eq!(
            toks[0],
            Token::PrefixedName { prefix: "".into(), local: "G1.5.1".into() }
        );
    }

    #[test]
    fn integer_then_terminator() {
        let toks = kinds(":s :p 6 .", Mode::Turtle);
        assert_eq!(toks[2], Token::IntegerLit("6".into()));
        assert_eq!(toks[3], Token::Dot);
        let toks = kinds(":s :p 6.", Mode::Turtle);
        assert_eq!(toks[2], Token::IntegerLit("6".into()));
        assert_eq!(toks[3], Token::Dot);
    }

    #[test]
    fn blank_nodes_are_unsupported() {
        let err = lex(":s :p _:b1 .", Mode::Turtle).unwrap_err();
        assert!(err.message.contains("blank node"));
        let err = lex(":s :p [] .", Mode::Turtle).unwrap_err();
        assert!(err.message.contains("blank node"));
    }

    #[test]
    fn language_tags_and_base_are_unsupported() {
        let err = lex(":s :p \"x\"@en .", Mode::Turtle).unwrap_err();
        assert!(err.message.contains("language tag"));
        let err = lex("@base <urn:x> .", Mode::Turtle).unwrap_err();
        assert!(err.message.contains("@base"));
    }

    #[test]
    fn string_escapes_resolve() {
        let toks = kinds(r#":s :p "a\"b\ncA" ."#, Mode::Turtle);
        assert_eq!(toks[2], Token::StringLit("a\"b\nc\u{41}".into()));
    }

    #[test]
    fn query_mode_operators() {
        let toks = kinds("FILTER(?v <= 0.5)", Mode::Query);
        assert_eq!(
            toks,
            vec![
                Token::Ident("FILTER".into()),
                Token::LParen,
                Token::Var("v".into()),
                Token::Cmp("<=".into()),
                Token::DecimalLit("0.5".into()),
                Token::RParen,
            ]
        );
    }

    #[test]
    fn angle_disambiguation() {
        let toks = kinds("PREFIX : <urn:argus:> SELECT", Mode::Query);
        assert_eq!(toks[2], Token::IriRef("urn:argus:".into()));
        let toks = kinds("?v < 3", Mode::Query);
        assert_eq!(toks[1], Token::Cmp("<".into()));
    }

    #[test]
    fn comments_run_to_end_of_line() {
        let toks = kinds(":s :p 1 . # trailing note\n:s :q 2 .", Mode::Turtle);
        assert_eq!(toks.len(), 8);
    }

    #[test]
    fn positions_track_lines() {
        let lexed = lex("\n\n  :s :p 1 .", Mode::Turtle).unwrap();
        assert_eq!(lexed[0].1, Pos { line: 3, col: 3 });
    }
}
