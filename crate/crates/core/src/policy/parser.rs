use super::{normalize_attribute, AccessTree, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Int(usize),
    LParen,
    RParen,
    Comma,
    And,
    Or,
    Of,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            b',' => {
                tokens.push((Token::Comma, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                    return Err(Error::InvalidAttribute(
                        word_at(text, start).to_string(),
                    ));
                }
                let value = text[start..i].parse().map_err(|_| Error::Parse {
                    position: start,
                    message: "threshold does not fit in an integer".into(),
                })?;
                tokens.push((Token::Int(value), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                let token = match word.to_ascii_lowercase().as_str() {
                    "and" => Token::And,
                    "or" => Token::Or,
                    "of" => Token::Of,
                    _ => Token::Ident(normalize_attribute(word)?),
                };
                tokens.push((token, start));
            }
            _ => {
                return Err(Error::Parse {
                    position: i,
                    message: format!("unexpected character {:?}", text[i..].chars().next().unwrap_or('?')),
                })
            }
        }
    }
    tokens.push((Token::End, text.len()));
    Ok(tokens)
}

fn word_at(text: &str, start: usize) -> &str {
    let end = text[start..]
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .map_or(text.len(), |n| start + n);
    &text[start..end]
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if t != Token::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn error(&self, message: &str) -> Error {
        let found = match self.peek() {
            Token::End => "end of input".to_string(),
            t => format!("{t:?}"),
        };
        Error::Parse {
            position: self.offset(),
            message: format!("{message}, found {found}"),
        }
    }

    fn policy(&mut self) -> Result<Node> {
        let mut terms = vec![self.and()?];
        while *self.peek() == Token::Or {
            self.bump();
            terms.push(self.and()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            Node::or(terms)?
        })
    }

    fn and(&mut self) -> Result<Node> {
        let mut terms = vec![self.term()?];
        while *self.peek() == Token::And {
            self.bump();
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            Node::and(terms)?
        })
    }

    fn term(&mut self) -> Result<Node> {
        match self.peek().clone() {
            Token::Ident(name) => {
                self.bump();
                Ok(Node::Leaf { attribute: name })
            }
            Token::LParen => {
                self.bump();
                let inner = self.policy()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            Token::Int(k) => {
                self.bump();
                self.expect(Token::Of, "'of'")?;
                self.expect(Token::LParen, "'('")?;
                let mut children = vec![self.policy()?];
                while *self.peek() == Token::Comma {
                    self.bump();
                    children.push(self.policy()?);
                }
                self.expect(Token::RParen, "')' or ','")?;
                Node::gate(k, children)
            }
            _ => Err(self.error("expected attribute, threshold or '('")),
        }
    }
}

/// Parses the textual policy language into an access tree.
pub fn parse_policy(text: &str) -> Result<AccessTree> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let root = parser.policy()?;
    if *parser.peek() != Token::End {
        return Err(parser.error("expected 'and', 'or' or end of policy"));
    }
    AccessTree::new(root)
}
