//! Absolute `M`/`L`/`Z` path data with a single subpath.

use super::{GeometryError, Point, Polygon};

#[derive(Debug, PartialEq)]
enum Token {
    Command(char),
    Number(f64),
}

fn tokenize(d: &str) -> Result<Vec<Token>, GeometryError> {
    let bytes = d.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() || c == ',' {
            i += 1;
        } else if c.is_ascii_alphabetic() {
            out.push(Token::Command(c));
            i += 1;
        } else if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') {
            let start = i;
            if matches!(c, '+' | '-') {
                i += 1;
            }
            let mut seen_dot = false;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || (bytes[i] == b'.' && !seen_dot)) {
                seen_dot |= bytes[i] == b'.';
                i += 1;
            }
            if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
                let save = i;
                i += 1;
                if i < bytes.len() && matches!(bytes[i], b'+' | b'-') {
                    i += 1;
                }
                if i < bytes.len() && bytes[i].is_ascii_digit() {
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text = &d[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| GeometryError::SvgSyntax(format!("bad number {text:?}")))?;
            out.push(Token::Number(v));
        } else {
            return Err(GeometryError::SvgSyntax(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

/// Parses path data restricted to absolute `M`, `L` and `Z`.
///
/// Coordinate pairs after `M` are implicit line-tos, as in SVG. Anything else
/// (curves, arcs, `H`/`V`, relative commands, a second subpath) is rejected.
pub fn parse_svg_path(d: &str) -> Result<Polygon, GeometryError> {
    let tokens = tokenize(d)?;
    let mut vertices = Vec::new();
    let mut iter = tokens.into_iter().peekable();
    let mut started = false;
    let mut closed = false;

    while let Some(tok) = iter.next() {
        let cmd = match tok {
            Token::Command(c) => c,
            Token::Number(_) => return Err(GeometryError::SvgSyntax("number without a command".into())),
        };
        if closed {
            return Err(GeometryError::SvgUnsupported(format!(
                "{cmd:?} after Z (only one subpath is supported)"
            )));
        }
        match cmd {
            'M' if started => {
                return Err(GeometryError::SvgUnsupported("multiple subpaths".into()));
            }
            'M' | 'L' => {
                if cmd == 'L' && !started {
                    return Err(GeometryError::SvgSyntax("path must start with M".into()));
                }
                started = true;
                let mut pairs = 0;
                while let Some(Token::Number(x)) = iter.peek() {
                    let x = *x;
                    iter.next();
                    match iter.next() {
                        Some(Token::Number(y)) => vertices.push(Point::new(x, y)),
                        _ => return Err(GeometryError::SvgSyntax(format!("{cmd} needs coordinate pairs"))),
                    }
                    pairs += 1;
                }
                if pairs == 0 {
                    return Err(GeometryError::SvgSyntax(format!("{cmd} without coordinates")));
                }
            }
            'Z' | 'z' => {
                if !started {
                    return Err(GeometryError::SvgSyntax("path must start with M".into()));
                }
                closed = true;
            }
            other => {
                return Err(GeometryError::SvgUnsupported(format!("command {other:?}")));
            }
        }
    }
    if !started {
        return Err(GeometryError::SvgSyntax("empty path".into()));
    }
    Polygon::new(vertices)
}
