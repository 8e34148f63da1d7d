//! CPLEX LP format writer and a reader for the same subset.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::model::{LinExpr, MilpModel, Relation, Sense, VarId};
use crate::MilpError;

const TERMS_PER_LINE: usize = 8;

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn write_expr(out: &mut String, model: &MilpModel, expr: &LinExpr) {
    for (i, &(v, c)) in expr.terms().iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.variable(v).name;
        if i == 0 {
            let _ = write!(out, " {} {}", num(c), name);
        } else if c < 0.0 {
            let _ = write!(out, " - {} {}", num(-c), name);
        } else {
            let _ = write!(out, " + {} {}", num(c), name);
        }
    }
}

/// Render `model` in CPLEX LP format.
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str(match model.objective().sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    if model.objective().expr.is_empty() {
        match model.variables().first() {
            Some(v) => {
                let _ = write!(out, " 0 {}", v.name);
            }
            None => out.push_str(" 0"),
        }
    } else {
        write_expr(&mut out, model, &model.objective().expr);
    }
    out.push_str("\nSubject To\n");
    for (i, c) in model.constraints().iter().enumerate() {
        let name = if c.name.is_empty() { format!("c{i}") } else { c.name.clone() };
        let _ = write!(out, " {name}:");
        if c.expr.is_empty() {
            // keep the row; the LP format needs at least one term
            if let Some(v) = model.variables().first() {
                let _ = write!(out, " 0 {}", v.name);
            }
        } else {
            write_expr(&mut out, model, &c.expr);
        }
        let _ = writeln!(out, " {} {}", c.relation, num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        if v.is_binary() {
            continue;
        }
        match (v.lower, v.upper) {
            (lo, hi) if lo == f64::NEG_INFINITY && hi == f64::INFINITY => {
                let _ = writeln!(out, " {} free", v.name);
            }
            (lo, hi) if lo == hi => {
                let _ = writeln!(out, " {} = {}", v.name, num(lo));
            }
            (lo, hi) if hi == f64::INFINITY => {
                let _ = writeln!(out, " {} >= {}", v.name, num(lo));
            }
            (lo, hi) => {
                let _ = writeln!(out, " {} <= {} <= {}", num(lo), v.name, num(hi));
            }
        }
    }
    let generals: Vec<&str> =
        model.variables().iter().filter(|v| v.integer && !v.is_binary()).map(|v| v.name.as_str()).collect();
    let binaries: Vec<&str> =
        model.variables().iter().filter(|v| v.is_binary()).map(|v| v.name.as_str()).collect();
    for (title, names) in [("Generals", generals), ("Binaries", binaries)] {
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{title}");
        for chunk in names.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Rel(Relation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
}

fn section_header(line: &str) -> Option<Option<(Section, Option<Sense>)>> {
    let l = line.trim().to_ascii_lowercase();
    let s = match l.as_str() {
        "minimize" | "minimise" | "minimum" | "min" => (Section::Objective, Some(Sense::Minimize)),
        "maximize" | "maximise" | "maximum" | "max" => (Section::Objective, Some(Sense::Maximize)),
        "subject to" | "such that" | "st" | "s.t." => (Section::Constraints, None),
        "bounds" | "bound" => (Section::Bounds, None),
        "generals" | "general" | "gen" | "integers" => (Section::Generals, None),
        "binaries" | "binary" | "bin" => (Section::Binaries, None),
        "end" => return Some(None),
        _ => return None,
    };
    Some(Some(s))
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~[]^".contains(c)
}

fn tokenize(line: &str, lineno: usize, out: &mut Vec<(Tok, usize)>) -> Result<(), MilpError> {
    let err = |msg: String| MilpError::Parse { line: lineno, msg };
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '\\' {
            break;
        } else if c == '+' {
            out.push((Tok::Plus, lineno));
            i += 1;
        } else if c == '-' {
            out.push((Tok::Minus, lineno));
            i += 1;
        } else if c == ':' {
            out.push((Tok::Colon, lineno));
            i += 1;
        } else if c == '<' || c == '>' || c == '=' {
            let mut j = i + 1;
            if j < chars.len() && (chars[j] == '=' || chars[j] == '<' || chars[j] == '>') {
                j += 1;
            }
            let op: String = chars[i..j].iter().collect();
            let rel = match op.as_str() {
                "<" | "<=" | "=<" => Relation::Le,
                ">" | ">=" | "=>" => Relation::Ge,
                "=" | "==" => Relation::Eq,
                _ => return Err(err(format!("unknown operator `{op}`"))),
            };
            out.push((Tok::Rel(rel), lineno));
            i = j;
        } else if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let text: String = chars[i..j].iter().collect();
            let v = text.parse::<f64>().map_err(|_| err(format!("bad number `{text}`")))?;
            out.push((Tok::Num(v), lineno));
            i = j;
        } else if is_name_char(c) {
            let mut j = i;
            while j < chars.len() && is_name_char(chars[j]) {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let lower = text.to_ascii_lowercase();
            let tok = match lower.as_str() {
                "inf" | "infinity" => Tok::Num(f64::INFINITY),
                _ => Tok::Name(text),
            };
            out.push((tok, lineno));
            i = j;
        } else {
            return Err(err(format!("unexpected character `{c}`")));
        }
    }
    Ok(())
}

struct Builder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    integer: Vec<bool>,
}

impl Builder {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.lower.push(0.0);
        self.upper.push(f64::INFINITY);
        self.integer.push(false);
        i
    }
}

/// Parse a linear expression `[+|-] [coef] name ...` starting at `pos`.
/// Stops at a relation operator or the end of the tokens.
fn parse_expr(
    toks: &[(Tok, usize)],
    pos: &mut usize,
    b: &mut Builder,
) -> Result<Vec<(usize, f64)>, MilpError> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while *pos < toks.len() {
        let (tok, line) = &toks[*pos];
        match tok {
            Tok::Rel(_) => break,
            Tok::Plus => {}
            Tok::Minus => sign = -sign,
            Tok::Num(v) => {
                if coef.is_some() {
                    return Err(MilpError::Parse { line: *line, msg: "two numbers in a row".into() });
                }
                coef = Some(*v);
            }
            Tok::Name(n) => {
                let j = b.var(n);
                terms.push((j, sign * coef.take().unwrap_or(1.0)));
                sign = 1.0;
            }
            Tok::Colon => return Err(MilpError::Parse { line: *line, msg: "unexpected `:`".into() }),
        }
        *pos += 1;
    }
    if let Some(c) = coef {
        // a trailing constant such as `obj: 0`
        if c != 0.0 {
            let line = toks.get(pos.saturating_sub(1)).map(|t| t.1).unwrap_or(0);
            return Err(MilpError::Parse { line, msg: "constant term in expression".into() });
        }
    }
    Ok(terms)
}

fn signed_number(toks: &[(Tok, usize)], pos: &mut usize) -> Option<f64> {
    let mut sign = 1.0;
    while let Some((t, _)) = toks.get(*pos) {
        match t {
            Tok::Plus => *pos += 1,
            Tok::Minus => {
                sign = -sign;
                *pos += 1
            }
            Tok::Num(v) => {
                *pos += 1;
                return Some(sign * v);
            }
            _ => return None,
        }
    }
    None
}

/// Split off an optional `name:` label.
fn take_label(toks: &[(Tok, usize)]) -> (Option<String>, &[(Tok, usize)]) {
    match toks {
        [(Tok::Name(n), _), (Tok::Colon, _), rest @ ..] => (Some(n.clone()), rest),
        _ => (None, toks),
    }
}

/// Parse LP-format text produced by [`export_lp`] (or a compatible writer).
pub fn parse_lp(text: &str) -> Result<MilpModel, MilpError> {
    let mut b = Builder {
        names: Vec::new(),
        index: HashMap::new(),
        lower: Vec::new(),
        upper: Vec::new(),
        integer: Vec::new(),
    };
    let mut sense = None;
    let mut section: Option<Section> = None;
    let mut objective_toks: Vec<(Tok, usize)> = Vec::new();
    let mut constraint_toks: Vec<(Tok, usize)> = Vec::new();
    let mut bound_lines: Vec<(Vec<(Tok, usize)>, usize)> = Vec::new();
    let mut int_names: Vec<(String, bool, usize)> = Vec::new();
    let mut ended = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(h) = section_header(line) {
            match h {
                None => {
                    ended = true;
                    break;
                }
                Some((s, sn)) => {
                    if let Some(sn) = sn {
                        sense = Some(sn);
                    }
                    section = Some(s);
                }
            }
            continue;
        }
        match section {
            None => {
                return Err(MilpError::Parse { line: lineno, msg: "content before objective section".into() })
            }
            Some(Section::Objective) => tokenize(line, lineno, &mut objective_toks)?,
            Some(Section::Constraints) => tokenize(line, lineno, &mut constraint_toks)?,
            Some(Section::Bounds) => {
                let mut t = Vec::new();
                tokenize(line, lineno, &mut t)?;
                bound_lines.push((t, lineno));
            }
            Some(s @ (Section::Generals | Section::Binaries)) => {
                for n in line.split_whitespace() {
                    int_names.push((n.to_string(), s == Section::Binaries, lineno));
                }
            }
        }
    }
    if !ended {
        return Err(MilpError::Parse { line: text.lines().count(), msg: "missing `End`".into() });
    }
    let sense = sense.ok_or(MilpError::Parse { line: 1, msg: "missing objective section".into() })?;

    let (_, obj) = take_label(&objective_toks);
    let mut pos = 0;
    let obj_terms = parse_expr(obj, &mut pos, &mut b)?;
    if pos != obj.len() {
        return Err(MilpError::Parse { line: obj[pos].1, msg: "relation in objective".into() });
    }

    let mut rows = Vec::new();
    let mut rest: &[(Tok, usize)] = &constraint_toks;
    while !rest.is_empty() {
        let (label, body) = take_label(rest);
        let mut pos = 0;
        let terms = parse_expr(body, &mut pos, &mut b)?;
        let line = body.get(pos).map(|t| t.1).unwrap_or_else(|| body.last().map(|t| t.1).unwrap_or(0));
        let rel = match body.get(pos) {
            Some((Tok::Rel(r), _)) => *r,
            _ => return Err(MilpError::Parse { line, msg: "constraint without relation".into() }),
        };
        pos += 1;
        let rhs = signed_number(body, &mut pos)
            .ok_or(MilpError::Parse { line, msg: "constraint without numeric right-hand side".into() })?;
        rows.push((label.unwrap_or_else(|| format!("c{}", rows.len())), terms, rel, rhs));
        rest = &body[pos..];
    }

    for (toks, line) in bound_lines {
        let err = |msg: &str| MilpError::Parse { line, msg: msg.into() };
        let mut pos = 0;
        let lead = signed_number(&toks, &mut pos);
        match lead {
            Some(lo) => {
                // lo <= x [<= hi]
                match toks.get(pos) {
                    Some((Tok::Rel(Relation::Le), _)) => {}
                    _ => return Err(err("expected `<=` after leading bound")),
                }
                let name = match toks.get(pos + 1) {
                    Some((Tok::Name(n), _)) => n.clone(),
                    _ => return Err(err("expected variable name")),
                };
                let j = b.var(&name);
                b.lower[j] = lo;
                pos += 2;
                if pos < toks.len() {
                    match toks.get(pos) {
                        Some((Tok::Rel(Relation::Le), _)) => {}
                        _ => return Err(err("expected `<=` before upper bound")),
                    }
                    pos += 1;
                    b.upper[j] = signed_number(&toks, &mut pos).ok_or_else(|| err("expected upper bound"))?;
                }
            }
            None => {
                let name = match toks.first() {
                    Some((Tok::Name(n), _)) => n.clone(),
                    _ => return Err(err("expected variable name")),
                };
                let j = b.var(&name);
                match toks.get(1) {
                    Some((Tok::Name(f), _)) if f.eq_ignore_ascii_case("free") => {
                        b.lower[j] = f64::NEG_INFINITY;
                        b.upper[j] = f64::INFINITY;
                        pos = 2;
                    }
                    Some((Tok::Rel(r), _)) => {
                        pos = 2;
                        let v = signed_number(&toks, &mut pos).ok_or_else(|| err("expected bound value"))?;
                        match r {
                            Relation::Le => b.upper[j] = v,
                            Relation::Ge => b.lower[j] = v,
                            Relation::Eq => {
                                b.lower[j] = v;
                                b.upper[j] = v;
                            }
                        }
                    }
                    _ => return Err(err("malformed bound")),
                }
            }
        }
        if pos != toks.len() {
            return Err(err("trailing tokens in bound"));
        }
    }
    for (name, binary, _) in int_names {
        let j = b.var(&name);
        b.integer[j] = true;
        if binary {
            b.lower[j] = 0.0;
            b.upper[j] = 1.0;
        }
    }

    let mut model = MilpModel::new(sense);
    for j in 0..b.names.len() {
        model.add_var(b.names[j].clone(), b.lower[j], b.upper[j], b.integer[j])?;
    }
    let to_expr = |terms: Vec<(usize, f64)>| LinExpr::from(terms.into_iter().map(|(j, c)| (VarId(j), c)));
    for (name, terms, rel, rhs) in rows {
        model.add_constraint(name, to_expr(terms), rel, rhs)?;
    }
    model.set_objective(sense, to_expr(obj_terms))?;
    Ok(model)
}
