//! Controlled-vocabulary variable labels.
//!
//! Grammar:
//!
//! ```text
//! name     := object "__" quantity
//! object   := token ("_" token)*
//! quantity := token ("_" token)*
//! token    := word ("~" word)*
//! word     := [a-z][a-z0-9]*
//! ```
//!
//! The first word of a token is its base, the `~`-suffixed words are
//! adjectives (`sediment~suspended`). Inside the quantity part the token
//! `of` chains operators onto a base quantity:
//! `gradient_of_time_derivative_of_temperature`.
//!
//! Parsing is a single left-to-right scan and reports the first violation
//! encountered, with a character (not byte) position.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const SEPARATOR: &str = "__";
const OPERATOR_WORD: &str = "of";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NameErrorKind {
    NoSeparator,
    MultipleSeparators,
    EmptyObject,
    EmptyQuantity,
    IllegalCharacter,
    BadTokenStart,
    EmptyToken,
}

impl fmt::Display for NameErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NameErrorKind::NoSeparator => "NoSeparator",
            NameErrorKind::MultipleSeparators => "MultipleSeparators",
            NameErrorKind::EmptyObject => "EmptyObject",
            NameErrorKind::EmptyQuantity => "EmptyQuantity",
            NameErrorKind::IllegalCharacter => "IllegalCharacter",
            NameErrorKind::BadTokenStart => "BadTokenStart",
            NameErrorKind::EmptyToken => "EmptyToken",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at {position}: {message}")]
pub struct NameError {
    pub kind: NameErrorKind,
    /// Character index into the input. Always 0 for `NoSeparator`.
    pub position: usize,
    pub message: String,
}

impl NameError {
    fn new(kind: NameErrorKind, position: usize, message: impl Into<String>) -> Self {
        NameError {
            kind,
            position,
            message: message.into(),
        }
    }
}

/// One `_`-delimited element of a name: a base word plus `~` adjectives.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub base: String,
    pub adjectives: Vec<String>,
}

impl Token {
    pub fn new(base: impl Into<String>) -> Self {
        Token {
            base: base.into(),
            adjectives: Vec::new(),
        }
    }

    pub fn with_adjective(mut self, adjective: impl Into<String>) -> Self {
        self.adjectives.push(adjective.into());
        self
    }

    fn is_operator_word(&self) -> bool {
        self.base == OPERATOR_WORD && self.adjectives.is_empty()
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        for adjective in &self.adjectives {
            write!(f, "~{adjective}")?;
        }
        Ok(())
    }
}

fn join_tokens(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(Token::to_string)
        .collect::<Vec<_>>()
        .join("_")
}

/// A parsed, valid label. Construct with [`StandardName::parse`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StandardName {
    object_part: Vec<Token>,
    quantity_part: Vec<Token>,
    raw: String,
}

/// Result of splitting a quantity at its `of` tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// Outermost operator first.
    pub operators: Vec<Vec<Token>>,
    pub base_quantity: Vec<Token>,
}

impl Decomposition {
    pub fn operator_names(&self) -> Vec<String> {
        self.operators.iter().map(|op| join_tokens(op)).collect()
    }

    pub fn base_quantity_name(&self) -> String {
        join_tokens(&self.base_quantity)
    }
}

impl StandardName {
    pub fn parse(input: &str) -> Result<StandardName, NameError> {
        Scanner::new(input).run()
    }

    pub fn object_part(&self) -> &[Token] {
        &self.object_part
    }

    pub fn quantity_part(&self) -> &[Token] {
        &self.quantity_part
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    pub fn canonical_form(&self) -> String {
        format!(
            "{}{SEPARATOR}{}",
            join_tokens(&self.object_part),
            join_tokens(&self.quantity_part)
        )
    }

    /// Splits the quantity part at each `of` token.
    pub fn decompose_quantity(&self) -> Result<Decomposition, NameError> {
        // character offset of each quantity token, for error positions
        let quantity_start = self.raw.chars().count() - self.quantity_chars();
        let mut offset = quantity_start;
        let mut operators = Vec::new();
        let mut current: Vec<Token> = Vec::new();
        for token in &self.quantity_part {
            let len = token.to_string().chars().count();
            if token.is_operator_word() {
                if current.is_empty() {
                    return Err(NameError::new(
                        NameErrorKind::EmptyToken,
                        offset,
                        "operator `of` has no preceding operator words",
                    ));
                }
                operators.push(std::mem::take(&mut current));
            } else {
                current.push(token.clone());
            }
            offset += len + 1;
        }
        if current.is_empty() {
            let last = self.raw.chars().count() - 1;
            return Err(NameError::new(
                NameErrorKind::EmptyQuantity,
                last,
                "quantity ends with operator `of` and has no base quantity",
            ));
        }
        Ok(Decomposition {
            operators,
            base_quantity: current,
        })
    }

    fn quantity_chars(&self) -> usize {
        join_tokens(&self.quantity_part).chars().count()
    }
}

/// Exact-match compatibility between a producer output and a consumer input.
pub fn compatible(producer: &StandardName, consumer: &StandardName) -> bool {
    producer.raw == consumer.raw
}

impl fmt::Display for StandardName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl FromStr for StandardName {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StandardName::parse(s)
    }
}

impl AsRef<str> for StandardName {
    fn as_ref(&self) -> &str {
        &self.raw
    }
}

impl Serialize for StandardName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for StandardName {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        StandardName::parse(&raw).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    Object,
    Quantity,
}

struct Scanner<'a> {
    input: &'a str,
    chars: Vec<char>,
    part: Part,
    separator_at: Option<usize>,
    object: Vec<Token>,
    quantity: Vec<Token>,
    // words of the token being built; the first is the base
    token_words: Vec<String>,
    word: String,
}

impl<'a> Scanner<'a> {
    fn new(input: &'a str) -> Self {
        Scanner {
            input,
            chars: input.chars().collect(),
            part: Part::Object,
            separator_at: None,
            object: Vec::new(),
            quantity: Vec::new(),
            token_words: Vec::new(),
            word: String::new(),
        }
    }

    fn current_part(&mut self) -> &mut Vec<Token> {
        match self.part {
            Part::Object => &mut self.object,
            Part::Quantity => &mut self.quantity,
        }
    }

    // Ends the current word at the delimiter found at `at`.
    fn finish_word(&mut self, at: usize) -> Result<(), NameError> {
        if self.word.is_empty() {
            return Err(NameError::new(
                NameErrorKind::EmptyToken,
                at,
                "empty word between delimiters",
            ));
        }
        self.token_words.push(std::mem::take(&mut self.word));
        Ok(())
    }

    fn finish_token(&mut self, at: usize) -> Result<(), NameError> {
        self.finish_word(at)?;
        let mut words = std::mem::take(&mut self.token_words).into_iter();
        let base = words.next().expect("finish_word pushed a word");
        let token = Token {
            base,
            adjectives: words.collect(),
        };
        self.current_part().push(token);
        Ok(())
    }

    fn at_part_start(&self) -> bool {
        self.word.is_empty()
            && self.token_words.is_empty()
            && match self.part {
                Part::Object => self.object.is_empty(),
                Part::Quantity => self.quantity.is_empty(),
            }
    }

    fn run(mut self) -> Result<StandardName, NameError> {
        if self.chars.is_empty() {
            return Err(NameError::new(
                NameErrorKind::NoSeparator,
                0,
                "empty input has no `__` separator",
            ));
        }
        let n = self.chars.len();
        let mut i = 0;
        while i < n {
            let c = self.chars[i];
            match c {
                'a'..='z' => {
                    self.word.push(c);
                    i += 1;
                }
                '0'..='9' => {
                    if self.word.is_empty() {
                        return Err(NameError::new(
                            NameErrorKind::BadTokenStart,
                            i,
                            format!("word starts with digit '{c}'"),
                        ));
                    }
                    self.word.push(c);
                    i += 1;
                }
                '_' if i + 1 < n && self.chars[i + 1] == '_' => {
                    if self.separator_at.is_some() {
                        return Err(NameError::new(
                            NameErrorKind::MultipleSeparators,
                            i,
                            "second `__` separator",
                        ));
                    }
                    if self.part == Part::Object && self.at_part_start() {
                        return Err(NameError::new(
                            NameErrorKind::EmptyObject,
                            0,
                            "object part is empty",
                        ));
                    }
                    self.finish_token(i)?;
                    self.separator_at = Some(i);
                    self.part = Part::Quantity;
                    i += 2;
                }
                '_' => {
                    self.finish_token(i)?;
                    i += 1;
                }
                '~' => {
                    self.finish_word(i)?;
                    i += 1;
                }
                other => {
                    return Err(NameError::new(
                        NameErrorKind::IllegalCharacter,
                        i,
                        format!("illegal character {other:?}"),
                    ));
                }
            }
        }
        let Some(separator) = self.separator_at else {
            return Err(NameError::new(
                NameErrorKind::NoSeparator,
                0,
                "no `__` separator between object and quantity",
            ));
        };
        if self.at_part_start() {
            return Err(NameError::new(
                NameErrorKind::EmptyQuantity,
                separator,
                "quantity part is empty",
            ));
        }
        self.finish_token(n - 1)?;
        Ok(StandardName {
            object_part: self.object,
            quantity_part: self.quantity,
            raw: self.input.to_string(),
        })
    }
}
