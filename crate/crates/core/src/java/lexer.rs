//! Tokenizer for the Java subset accepted by the parser.
//!
//! Whitespace and comments are dropped. String, char and text-block literals
//! are kept as a single token with their quotes.

use std::fmt;

use serde::Serialize;

use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Identifier,
    Keyword,
    Literal,
    Operator,
    Separator,
    AnnotationMarker,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub column: u32,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.text)
    }
}

pub const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while",
];

const LITERAL_WORDS: &[&str] = &["true", "false", "null"];

// Longest first so that maximal munch works with a linear scan.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>", "=", ">", "<", "!", "~",
    "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

const SEPARATORS: &[char] = &['(', ')', '{', '}', '[', ']', ';', ',', '.'];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, line: 1, column: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: u32, column: u32, message: impl Into<String>) -> FrontendError {
        FrontendError::Lex { line, column, message: message.into() }
    }
}

/// Splits `source` into tokens.
pub fn lex(source: &str) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor::new(source);
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);

        if c.is_whitespace() || c == '\u{feff}' {
            cur.bump();
            continue;
        }
        if cur.starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if cur.starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    return Err(cur.error(line, column, "unterminated comment"));
                }
            }
            continue;
        }

        let push = |tokens: &mut Vec<Token>, kind, text: String| {
            tokens.push(Token { kind, text, line, column });
        };

        if c.is_alphabetic() || c == '_' || c == '$' {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_alphanumeric() || c == '_' || c == '$' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            let kind = if LITERAL_WORDS.contains(&word.as_str()) {
                TokenKind::Literal
            } else if is_keyword(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            push(&mut tokens, kind, word);
            continue;
        }

        if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            let text = lex_number(&mut cur);
            push(&mut tokens, TokenKind::Literal, text);
            continue;
        }

        if cur.starts_with("\"\"\"") {
            let mut text = String::from("\"\"\"");
            for _ in 0..3 {
                cur.bump();
            }
            loop {
                if cur.starts_with("\"\"\"") {
                    for _ in 0..3 {
                        cur.bump();
                    }
                    text.push_str("\"\"\"");
                    break;
                }
                match cur.bump() {
                    Some('\\') => {
                        text.push('\\');
                        match cur.bump() {
                            Some(e) => text.push(e),
                            None => return Err(cur.error(line, column, "unterminated text block")),
                        }
                    }
                    Some(c) => text.push(c),
                    None => return Err(cur.error(line, column, "unterminated text block")),
                }
            }
            push(&mut tokens, TokenKind::Literal, text);
            continue;
        }

        if c == '"' || c == '\'' {
            let quote = c;
            let mut text = String::new();
            text.push(quote);
            cur.bump();
            loop {
                match cur.peek() {
                    None | Some('\n') => {
                        let what = if quote == '"' { "string" } else { "character" };
                        return Err(cur.error(line, column, format!("unterminated {what} literal")));
                    }
                    Some('\\') => {
                        text.push('\\');
                        cur.bump();
                        match cur.peek() {
                            None | Some('\n') => {
                                return Err(cur.error(line, column, "unterminated escape sequence"))
                            }
                            Some(e) => {
                                text.push(e);
                                cur.bump();
                            }
                        }
                    }
                    Some(c) if c == quote => {
                        text.push(c);
                        cur.bump();
                        break;
                    }
                    Some(c) => {
                        text.push(c);
                        cur.bump();
                    }
                }
            }
            if quote == '\'' && text.len() <= 2 {
                return Err(cur.error(line, column, "empty character literal"));
            }
            push(&mut tokens, TokenKind::Literal, text);
            continue;
        }

        if c == '@' {
            cur.bump();
            push(&mut tokens, TokenKind::AnnotationMarker, "@".to_string());
            continue;
        }

        // `...` and `::` are operators here; `.` alone is a separator.
        if let Some(op) = OPERATORS.iter().find(|op| cur.starts_with(op)) {
            for _ in 0..op.chars().count() {
                cur.bump();
            }
            push(&mut tokens, TokenKind::Operator, (*op).to_string());
            continue;
        }

        if SEPARATORS.contains(&c) {
            cur.bump();
            push(&mut tokens, TokenKind::Separator, c.to_string());
            continue;
        }

        return Err(cur.error(line, column, format!("unexpected character {c:?}")));
    }

    Ok(tokens)
}

fn lex_number(cur: &mut Cursor) -> String {
    let mut text = String::new();
    let take = |cur: &mut Cursor, text: &mut String| {
        if let Some(c) = cur.bump() {
            text.push(c);
        }
    };

    if cur.peek() == Some('0') && matches!(cur.peek_at(1), Some('x' | 'X' | 'b' | 'B')) {
        take(cur, &mut text);
        take(cur, &mut text);
        while cur.peek().is_some_and(|c| c.is_ascii_hexdigit() || c == '_') {
            take(cur, &mut text);
        }
        if matches!(cur.peek(), Some('l' | 'L')) {
            take(cur, &mut text);
        }
        return text;
    }

    let digits = |cur: &mut Cursor, text: &mut String| {
        while cur.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
            if let Some(c) = cur.bump() {
                text.push(c);
            }
        }
    };

    digits(cur, &mut text);
    let fraction = match cur.peek_at(1) {
        Some(c) => c.is_ascii_digit() || !(c.is_alphabetic() || c == '_' || c == '$' || c == '.'),
        None => true,
    };
    if cur.peek() == Some('.') && fraction {
        take(cur, &mut text);
        digits(cur, &mut text);
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let sign = matches!(cur.peek_at(1), Some('+' | '-'));
        let digit_at = if sign { 2 } else { 1 };
        if cur.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
            take(cur, &mut text);
            if sign {
                take(cur, &mut text);
            }
            digits(cur, &mut text);
        }
    }
    if matches!(cur.peek(), Some('f' | 'F' | 'd' | 'D' | 'l' | 'L')) {
        take(cur, &mut text);
    }
    text
}
