//! Minimal GML reader: `node [ id .. label .. ]` and
//! `edge [ source .. target .. value .. ]`, other keys ignored.

use std::collections::HashMap;

use super::graph::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Word(String),
    Str(String),
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut chars = line.chars().peekable();
        while let Some(&c) = chars.peek() {
            match c {
                c if c.is_whitespace() => {
                    chars.next();
                }
                '#' => break,
                '[' => {
                    chars.next();
                    out.push((line_no, Token::Open));
                }
                ']' => {
                    chars.next();
                    out.push((line_no, Token::Close));
                }
                '"' => {
                    chars.next();
                    let mut s = String::new();
                    loop {
                        match chars.next() {
                            Some('"') => break,
                            Some(ch) => s.push(ch),
                            None => return Err(Error::Parse { line: line_no, msg: "unterminated string".into() }),
                        }
                    }
                    out.push((line_no, Token::Str(s)));
                }
                _ => {
                    let mut s = String::new();
                    while let Some(&ch) = chars.peek() {
                        if ch.is_whitespace() || ch == '[' || ch == ']' || ch == '"' {
                            break;
                        }
                        s.push(ch);
                        chars.next();
                    }
                    out.push((line_no, Token::Word(s)));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug)]
enum Value {
    Scalar(usize, String),
    List(usize, Vec<(String, Value)>),
}

fn parse_list(toks: &[(usize, Token)], pos: &mut usize, nested: bool) -> Result<Vec<(String, Value)>> {
    let mut items = Vec::new();
    loop {
        let Some((line, tok)) = toks.get(*pos) else {
            if nested {
                let line = toks.last().map_or(0, |t| t.0);
                return Err(Error::Parse { line, msg: "missing `]`".into() });
            }
            return Ok(items);
        };
        match tok {
            Token::Close if nested => {
                *pos += 1;
                return Ok(items);
            }
            Token::Word(key) => {
                *pos += 1;
                let Some((vline, vtok)) = toks.get(*pos) else {
                    return Err(Error::Parse { line: *line, msg: format!("key {key} has no value") });
                };
                let value = match vtok {
                    Token::Open => {
                        *pos += 1;
                        Value::List(*vline, parse_list(toks, pos, true)?)
                    }
                    Token::Word(s) | Token::Str(s) => {
                        *pos += 1;
                        Value::Scalar(*vline, s.clone())
                    }
                    Token::Close => {
                        return Err(Error::Parse { line: *vline, msg: format!("key {key} has no value") })
                    }
                };
                items.push((key.clone(), value));
            }
            _ => return Err(Error::Parse { line: *line, msg: format!("unexpected token {tok:?}") }),
        }
    }
}

fn scalar<'a>(items: &'a [(String, Value)], key: &str) -> Option<(usize, &'a str)> {
    items.iter().find_map(|(k, v)| match v {
        Value::Scalar(line, s) if k == key => Some((*line, s.as_str())),
        _ => None,
    })
}

/// Parses a GML graph. Node ids are mapped to `0..n` in file order and node
/// labels are kept; edge weights come from `value` (default 1).
pub fn load_gml(text: &str) -> Result<Graph> {
    let toks = tokenize(text)?;
    let mut pos = 0;
    let top = parse_list(&toks, &mut pos, false)?;
    let body = top
        .iter()
        .find_map(|(k, v)| match v {
            Value::List(_, items) if k == "graph" => Some(items),
            _ => None,
        })
        .ok_or(Error::Parse { line: 1, msg: "no `graph [ ... ]` block".into() })?;

    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    for (k, v) in body {
        if let (true, Value::List(line, items)) = (k == "node", v) {
            let (_, id) = scalar(items, "id").ok_or(Error::Parse { line: *line, msg: "node without id".into() })?;
            if ids.insert(id.to_string(), labels.len()).is_some() {
                return Err(Error::Parse { line: *line, msg: format!("duplicate node id {id}") });
            }
            labels.push(scalar(items, "label").map_or_else(|| id.to_string(), |(_, l)| l.to_string()));
        }
    }
    let mut g = Graph::new(labels.len());
    for (k, v) in body {
        if let (true, Value::List(line, items)) = (k == "edge", v) {
            let end = |key: &str| -> Result<usize> {
                let (l, id) = scalar(items, key).ok_or(Error::Parse { line: *line, msg: format!("edge without {key}") })?;
                ids.get(id).copied().ok_or(Error::Parse { line: l, msg: format!("unknown node id {id}") })
            };
            let (u, v) = (end("source")?, end("target")?);
            let w = match scalar(items, "value") {
                Some((l, s)) => s
                    .parse::<f64>()
                    .map_err(|_| Error::Parse { line: l, msg: format!("value {s:?} is not a number") })?,
                None => 1.0,
            };
            g.add_edge(u, v, w).map_err(|e| match e {
                Error::Validation(msg) => Error::Validation(format!("line {line}: {msg}")),
                other => other,
            })?;
        }
    }
    g.with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_graph() {
        let text = r#"graph [
  directed 0
  node [ id 10 label "a b" ]
  node [ id 20 label "c" ]
  node [ id 30 ]
  edge [ source 10 target 20 value 3 ]
  edge [ source 30 target 20 ]
]"#;
        let g = load_gml(text).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.labels().unwrap(), &["a b", "c", "30"]);
        assert_eq!(g.weight(0, 1), 3.0);
        assert_eq!(g.weight(1, 2), 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(load_gml("graph [ node [ id 1 ]"), Err(Error::Parse { .. })));
        assert!(matches!(
            load_gml("graph [\n node [ id 1 ]\n edge [ source 1 target 2 ]\n]"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            load_gml("graph [ node [ id 1 ] node [ id 2 ] edge [ source 1 target 2 value -1 ] ]"),
            Err(Error::Validation(_))
        ));
    }
}
