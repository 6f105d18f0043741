//! Access trees: threshold gates over attribute leaves.
//!
//! The text form is
//!
//! ```text
//! policy := or
//! or     := and ("or" and)*
//! and    := term ("and" term)*
//! term   := attr | INT "of" "(" policy ("," policy)* ")" | "(" policy ")"
//! attr   := [a-z][a-z0-9_]*
//! ```
//!
//! Keywords are case-insensitive. A chain `a and b and c` becomes one 3-of-3
//! gate; parenthesized groups keep their own gate.
//!
//! Leaves are identified by their preorder position (0-based). Ciphertext
//! components, conversion requests and satisfying selections all use that
//! identifier.

mod parser;
pub mod random;
mod select;
mod share;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use parser::parse_policy;
pub use select::{select_satisfying_leaves, select_with, SatisfyingSelection, SelectionNode};
pub use share::{share_over_tree, LeafShareAssignment};

const KEYWORDS: [&str; 3] = ["and", "or", "of"];

/// Trims and lowercases an attribute name, then checks it against
/// `[a-z][a-z0-9_]*`.
pub fn normalize_attribute(raw: &str) -> Result<String> {
    let name = raw.trim().to_ascii_lowercase();
    let mut chars = name.chars();
    let valid_head = matches!(chars.next(), Some('a'..='z'));
    let valid_tail = chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'));
    if !valid_head || !valid_tail || KEYWORDS.contains(&name.as_str()) {
        return Err(Error::InvalidAttribute(raw.to_string()));
    }
    Ok(name)
}

/// Normalizes a whole attribute set; the result must be nonempty.
pub fn normalize_attribute_set<I, S>(attrs: I) -> Result<BTreeSet<String>>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let set = attrs
        .into_iter()
        .map(|a| normalize_attribute(a.as_ref()))
        .collect::<Result<BTreeSet<_>>>()?;
    if set.is_empty() {
        return Err(Error::InvalidAttributeSet);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Leaf { attribute: String },
    Gate { threshold: usize, children: Vec<Node> },
}

impl Node {
    pub fn leaf(attribute: &str) -> Result<Node> {
        Ok(Node::Leaf {
            attribute: normalize_attribute(attribute)?,
        })
    }

    pub fn gate(threshold: usize, children: Vec<Node>) -> Result<Node> {
        if threshold < 1 || threshold > children.len() {
            return Err(Error::Threshold {
                threshold,
                children: children.len(),
            });
        }
        Ok(Node::Gate {
            threshold,
            children,
        })
    }

    pub fn and(children: Vec<Node>) -> Result<Node> {
        let n = children.len();
        Node::gate(n, children)
    }

    pub fn or(children: Vec<Node>) -> Result<Node> {
        Node::gate(1, children)
    }

    pub fn threshold(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Gate { threshold, .. } => *threshold,
        }
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::Leaf { .. } => &[],
            Node::Gate { children, .. } => children,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Node::Leaf { attribute } => {
                if normalize_attribute(attribute)? != *attribute {
                    return Err(Error::InvalidAttribute(attribute.clone()));
                }
                Ok(())
            }
            Node::Gate {
                threshold,
                children,
            } => {
                if *threshold < 1 || *threshold > children.len() {
                    return Err(Error::Threshold {
                        threshold: *threshold,
                        children: children.len(),
                    });
                }
                children.iter().try_for_each(Node::validate)
            }
        }
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Node::Leaf { attribute } => out.push(attribute),
            Node::Gate { children, .. } => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    fn internal_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Gate { children, .. } => 1 + children.iter().map(Node::internal_count).sum::<usize>(),
        }
    }

    fn depth(&self) -> usize {
        1 + self.children().iter().map(Node::depth).max().unwrap_or(0)
    }
}

/// A validated policy tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessTree {
    root: Node,
    leaves: Vec<String>,
}

impl AccessTree {
    pub fn new(root: Node) -> Result<Self> {
        root.validate()?;
        let mut leaves = Vec::new();
        root.collect_leaves(&mut leaves);
        let leaves = leaves.into_iter().map(str::to_string).collect();
        Ok(AccessTree { root, leaves })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Leaf attributes in preorder; the index is the leaf identifier.
    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn internal_count(&self) -> usize {
        self.root.internal_count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn attribute(&self, leaf: usize) -> Option<&str> {
        self.leaves.get(leaf).map(String::as_str)
    }

    pub fn is_satisfied_by(&self, attrs: &BTreeSet<String>) -> bool {
        select_satisfying_leaves(self, attrs).is_some()
    }
}

impl FromStr for AccessTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_policy(s)
    }
}

impl fmt::Display for AccessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_policy(self))
    }
}

/// Renders a tree in the policy language; parsing the output yields the
/// same tree.
pub fn format_policy(tree: &AccessTree) -> String {
    let mut out = String::new();
    write_node(&tree.root, &mut out);
    out
}

fn write_node(node: &Node, out: &mut String) {
    match node {
        Node::Leaf { attribute } => out.push_str(attribute),
        Node::Gate {
            threshold,
            children,
        } => {
            let n = children.len();
            let joiner = if n >= 2 && *threshold == n {
                Some(" and ")
            } else if n >= 2 && *threshold == 1 {
                Some(" or ")
            } else {
                None
            };
            match joiner {
                Some(joiner) => {
                    for (i, child) in children.iter().enumerate() {
                        if i > 0 {
                            out.push_str(joiner);
                        }
                        if matches!(child, Node::Gate { .. }) {
                            out.push('(');
                            write_node(child, out);
                            out.push(')');
                        } else {
                            write_node(child, out);
                        }
                    }
                }
                None => {
                    out.push_str(&format!("{threshold} of ("));
                    for (i, child) in children.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        write_node(child, out);
                    }
                    out.push(')');
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize_attribute(" Friend ").unwrap(), "friend");
        assert_eq!(normalize_attribute("attr_12").unwrap(), "attr_12");
        for bad in ["", "  ", "1abc", "co-worker", "or", "AND", "_x"] {
            assert!(normalize_attribute(bad).is_err(), "{bad:?}");
        }
        assert_eq!(
            normalize_attribute_set(Vec::<String>::new()),
            Err(Error::InvalidAttributeSet)
        );
    }

    #[test]
    fn gate_validation() {
        let leaves = || vec![Node::leaf("a").unwrap(), Node::leaf("b").unwrap()];
        assert!(Node::gate(0, leaves()).is_err());
        assert!(Node::gate(3, leaves()).is_err());
        assert!(Node::gate(2, leaves()).is_ok());
    }

    #[test]
    fn preorder_leaf_ids() {
        let tree = parse_policy("colleague or (friend and neighbor)").unwrap();
        assert_eq!(tree.leaves(), ["colleague", "friend", "neighbor"]);
        assert_eq!(tree.internal_count(), 2);
        assert_eq!(tree.depth(), 3);
    }

    #[test]
    fn formatting() {
        for text in [
            "friend and neighbor",
            "a or b or c",
            "2 of (a, b, c)",
            "colleague or (friend and neighbor)",
            "(a or b) and c",
            "2 of (a and b, c or d, e)",
        ] {
            let tree = parse_policy(text).unwrap();
            assert_eq!(format_policy(&tree), text);
            assert_eq!(parse_policy(&format_policy(&tree)).unwrap(), tree);
        }
        let single = AccessTree::new(Node::gate(1, vec![Node::leaf("a").unwrap()]).unwrap()).unwrap();
        assert_eq!(format_policy(&single), "1 of (a)");
        assert_eq!(parse_policy("1 of (a)").unwrap(), single);
    }
}
