use super::{ParseError, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Word(String),
    /// `[`
    Open,
    /// `]`
    Close,
    /// `]_label`
    CloseLabel(String),
    Arrow,
    Colon,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Open => "`[`".into(),
            Tok::Close => "`]`".into(),
            Tok::CloseLabel(h) => format!("`]_{h}`"),
            Tok::Arrow => "`->`".into(),
            Tok::Colon => "`:`".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// The tokens of one logical line.
#[derive(Clone, Debug)]
pub(crate) struct Line {
    pub tokens: Vec<Token>,
    /// Where the line ends, for "expected more" errors.
    pub end: SourceSpan,
}

impl Line {
    pub fn directive(&self) -> Option<(&str, SourceSpan)> {
        match self.tokens.first() {
            Some(Token {
                tok: Tok::Word(w),
                span,
            }) => w.strip_prefix('@').map(|d| (d, *span)),
            _ => None,
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '@' || c == '#'
}

/// Splits the text into non-empty logical lines of tokens.
pub(crate) fn lex(text: &str) -> Result<Vec<Line>, ParseError> {
    let mut lines = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    let span_at = |i: usize, line: usize, col: usize| SourceSpan {
        line,
        column: col,
        offset: chars.get(i).map_or(text.len(), |(o, _)| *o),
    };
    let flush = |current: &mut Vec<Token>, end: SourceSpan, lines: &mut Vec<Line>| {
        if !current.is_empty() {
            lines.push(Line {
                tokens: std::mem::take(current),
                end,
            });
        }
    };

    while i < chars.len() {
        let c = chars[i].1;
        let span = span_at(i, line, col);
        match c {
            '\n' => {
                flush(&mut current, span, &mut lines);
                i += 1;
                line += 1;
                col = 1;
            }
            ';' => {
                flush(&mut current, span, &mut lines);
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i].1 != '\n' {
                    i += 1;
                    col += 1;
                }
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '[' => {
                current.push(Token { tok: Tok::Open, span });
                i += 1;
                col += 1;
            }
            ']' => {
                if chars.get(i + 1).map(|p| p.1) == Some('_') {
                    let mut j = i + 2;
                    while j < chars.len() && (chars[j].1.is_alphanumeric() || chars[j].1 == '_') {
                        j += 1;
                    }
                    if j == i + 2 {
                        return Err(ParseError::syntax(span, "expected a label after `]_`"));
                    }
                    let label: String = chars[i + 2..j].iter().map(|p| p.1).collect();
                    current.push(Token {
                        tok: Tok::CloseLabel(label),
                        span,
                    });
                    col += j - i;
                    i = j;
                } else {
                    current.push(Token { tok: Tok::Close, span });
                    i += 1;
                    col += 1;
                }
            }
            '-' => {
                if chars.get(i + 1).map(|p| p.1) != Some('>') {
                    return Err(ParseError::syntax(span, "expected `->`"));
                }
                current.push(Token { tok: Tok::Arrow, span });
                i += 2;
                col += 2;
            }
            ':' => {
                current.push(Token { tok: Tok::Colon, span });
                i += 1;
                col += 1;
            }
            c if is_word_char(c) => {
                let mut j = i;
                while j < chars.len() && is_word_char(chars[j].1) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().map(|p| p.1).collect();
                current.push(Token {
                    tok: Tok::Word(word),
                    span,
                });
                col += j - i;
                i = j;
            }
            other => {
                return Err(ParseError::syntax(span, format!("unexpected character {other:?}")));
            }
        }
    }
    let end = span_at(i, line, col);
    flush(&mut current, end, &mut lines);
    Ok(lines)
}

/// A cursor over one line's tokens.
pub(crate) struct Cursor<'a> {
    line: &'a Line,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(line: &'a Line, pos: usize) -> Self {
        Cursor { line, pos }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.line.tokens.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.line.tokens.get(self.pos + k).map(|t| &t.tok)
    }

    pub fn span(&self) -> SourceSpan {
        self.line.tokens.get(self.pos).map_or(self.line.end, |t| t.span)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.line.tokens.len()
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::syntax(self.span(), format!("expected {wanted}, found {}", t.describe())),
            None => ParseError::syntax(self.span(), format!("expected {wanted} before end of line")),
        }
    }

    pub fn word(&mut self, wanted: &str) -> Result<(&'a str, SourceSpan), ParseError> {
        match self.line.tokens.get(self.pos) {
            Some(Token {
                tok: Tok::Word(w),
                span,
            }) => {
                self.pos += 1;
                Ok((w.as_str(), *span))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub fn close_label(&mut self) -> Result<&'a str, ParseError> {
        match self.peek() {
            Some(Tok::CloseLabel(h)) => {
                self.pos += 1;
                Ok(h.as_str())
            }
            _ => Err(self.unexpected("`]_label`")),
        }
    }

    pub fn end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of line"))
        }
    }
}
